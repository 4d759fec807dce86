//! One-point weights of the product ensemble.
//!
//! The weight of a single eigenvalue is `w(z) = Omega(|z|^2) / pi`, where
//! `Omega` is supported on `(0, 1]` and is a polynomial of degree
//! `max(L_j) - 1` in `x` and of degree `M - 1` in `ln x`. The coefficient
//! table is produced by residue calculus on the inverse Mellin transform,
//! using truncated-Taylor (jet) arithmetic of the rational cofactor at each
//! pole; pole multiplicities follow the truncation multiset, so equal and
//! unequal `L_j` share one code path.
//!
//! Two independent evaluation routes are kept alongside the table: a direct
//! Mellin–Barnes quadrature along a right-opening contour and the
//! multiplicative convolution recursion. They validate the table and also
//! stand in for it when `sum L_j` is large enough that the expanded
//! polynomial cancels catastrophically.

use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::logspace::ln_factorial;
use crate::params::EnsembleParams;
use crate::quad;

/// One `c * x^l * ln^m(x)` term of the weight table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightTerm {
    pub l: u32,
    pub m: u32,
    pub c: f64,
}

/// Exact representation of `Omega(x)` as a finite double sum of
/// `x^l ln^m x` terms on the support `(0, 1]`.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    params: EnsembleParams,
    terms: Vec<WeightTerm>,
    /// coefficients in double-double precision, aligned with `terms`; the
    /// moment sums cancel by many orders of magnitude and need the head
    /// and tail of each coefficient
    terms_dd: Vec<Dd>,
    /// `pole_orders[l] = #{j : L_j > l}`, the multiplicity of the pole at `u = l`.
    pole_orders: Vec<u32>,
    /// per-degree polynomials in `ln x`; evaluation also runs in
    /// double-double so that the near-total cancellation at `x -> 1`
    /// still lands within the 1e-12 nonnegativity floor
    by_degree: Vec<Vec<Dd>>,
}

/// Builds the coefficient table of `Omega` for the given ensemble.
///
/// The inverse Mellin integrand `x^u / prod_j prod_{l<L_j} (l - u)` is closed
/// to the right for `x < 1`; the residue at the pole `u = l` (order
/// `m_l = #{j : L_j > l}`) is read off a jet expansion of the cofactor.
pub fn build_weight(params: &EnsembleParams) -> WeightFunction {
    let max_l = params.max_l();
    let ln_prefactor: f64 = params.truncations().iter().map(|&l| ln_factorial(l as u64)).sum();
    assert!(
        ln_prefactor < 690.0,
        "the factorial prefactor of the weight table exceeds f64 range (sum ln L_j! = {ln_prefactor:.1})"
    );
    let prefactor = ln_prefactor.exp();

    let mut pole_orders = Vec::with_capacity(max_l);
    let mut terms = Vec::new();
    let mut terms_dd = Vec::new();
    for l in 0..max_l {
        let m_l = params.truncations().iter().filter(|&&lj| lj > l).count();
        pole_orders.push(m_l as u32);
        // jet of the cofactor g_l(eps) = prod 1/(d - eps) over the non-pole
        // factors, d = l' - l; 1/(d - eps) expands exactly as sum eps^k / d^{k+1};
        // double-double arithmetic keeps the coefficients accurate enough for
        // the heavily cancelling moment identities
        let mut jet = vec![Dd::ZERO; m_l];
        jet[0] = Dd { hi: 1.0, lo: 0.0 };
        for &lj in params.truncations() {
            for lp in 0..lj {
                if lp == l {
                    continue;
                }
                let d = lp as f64 - l as f64;
                let mut inv = Vec::with_capacity(m_l);
                let mut p = Dd::from_div(1.0, d);
                for _ in 0..m_l {
                    inv.push(p);
                    p = p.div_f64(d);
                }
                jet = jet_mul(&jet, &inv, m_l);
            }
        }
        // residue of order m_l: combine the jet with the x^{l+eps} expansion
        let sign = if m_l % 2 == 0 { 1.0 } else { -1.0 };
        let mut m_factorial = 1.0;
        for m in 0..m_l {
            if m > 0 {
                m_factorial *= m as f64;
            }
            let c = jet[m_l - 1 - m].mul_f64(-prefactor * sign / m_factorial);
            if c.hi != 0.0 {
                terms.push(WeightTerm { l: l as u32, m: m as u32, c: c.hi + c.lo });
                terms_dd.push(c);
            }
        }
    }

    let mut by_degree = vec![Vec::new(); max_l];
    for (t, c) in terms.iter().zip(&terms_dd) {
        let poly = &mut by_degree[t.l as usize];
        if poly.len() <= t.m as usize {
            poly.resize(t.m as usize + 1, Dd::ZERO);
        }
        poly[t.m as usize] = *c;
    }

    WeightFunction { params: params.clone(), terms, terms_dd, pole_orders, by_degree }
}

fn jet_mul(a: &[Dd], b: &[Dd], order: usize) -> Vec<Dd> {
    let mut out = vec![Dd::ZERO; order];
    for (i, &ai) in a.iter().enumerate() {
        if ai.hi == 0.0 && ai.lo == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(order - i) {
            out[i + j] = out[i + j].add(ai.mul(bj));
        }
    }
    out
}

impl WeightFunction {
    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    pub fn terms(&self) -> &[WeightTerm] {
        &self.terms
    }

    pub fn pole_orders(&self) -> &[u32] {
        &self.pole_orders
    }

    pub fn coefficient(&self, l: u32, m: u32) -> f64 {
        self.terms
            .iter()
            .find(|t| t.l == l && t.m == m)
            .map(|t| t.c)
            .unwrap_or(0.0)
    }

    /// True when `Omega(x)` diverges as `x -> 0` (any `ln^m` term survives
    /// at degree zero, which happens exactly for `M >= 2`).
    pub fn singular_at_origin(&self) -> bool {
        self.terms.iter().any(|t| t.l == 0 && t.m > 0 && t.c != 0.0)
    }

    /// Evaluates `Omega(x)`.
    ///
    /// `x > 1` returns 0 (support), `x = 0` returns the finite limit when it
    /// exists and a `SingularAtOrigin` error otherwise, and `x < 0` is a
    /// domain error. The support convention is `Theta(0) = 1`: `x = 1`
    /// evaluates the polynomial part.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!("weight argument must satisfy x >= 0, got {x}")));
        }
        if x > 1.0 {
            return Ok(0.0);
        }
        if x == 0.0 {
            if self.singular_at_origin() {
                return Err(Error::SingularAtOrigin(
                    "Omega(x) has a log divergence at x = 0 for M >= 2".into(),
                ));
            }
            return Ok(self.coefficient(0, 0));
        }
        let lnx = x.ln();
        let mut acc = Dd::ZERO;
        let mut xpow = Dd { hi: 1.0, lo: 0.0 };
        for poly in &self.by_degree {
            if !poly.is_empty() {
                let mut horner = Dd::ZERO;
                for &c in poly.iter().rev() {
                    horner = horner.mul_f64(lnx).add(c);
                }
                acc = acc.add(horner.mul(xpow));
            }
            xpow = xpow.mul_f64(x);
        }
        Ok(acc.hi + acc.lo)
    }

    /// `integral of Omega(x) x^j dx` over `(0, 1]` in closed form.
    ///
    /// The table coefficients cancel heavily against each other (their
    /// magnitude grows with the factorial prefactor while the moments stay
    /// of order one), so the sum runs in double-double arithmetic.
    pub fn moment(&self, j: u32) -> f64 {
        let mut acc = Dd::ZERO;
        for (t, c) in self.terms.iter().zip(&self.terms_dd) {
            let p1 = (t.l + j) as f64 + 1.0;
            let mut pow = 1.0f64;
            for _ in 0..=t.m {
                pow *= p1;
            }
            let mut m_fact = 1.0f64;
            for k in 2..=t.m {
                m_fact *= k as f64;
            }
            if t.m % 2 == 1 {
                m_fact = -m_fact;
            }
            acc = acc.add(Dd::from_div(m_fact, pow).mul(*c));
        }
        acc.hi + acc.lo
    }

    /// `integral of Omega(x) dx` over the support; equals 1 for a valid table.
    pub fn normalization(&self) -> f64 {
        self.moment(0)
    }

    /// `integral of Omega(x) x^j dx` over `(0, b]` in closed form.
    pub fn incomplete_moment(&self, j: u32, b: f64) -> f64 {
        assert!((0.0..=1.0).contains(&b));
        self.terms
            .iter()
            .map(|t| t.c * term_antiderivative(t.l + j, t.m, b))
            .sum()
    }

    /// Coefficient table as JSON: `{"params": ..., "terms": [{l, m, c}]}`.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "params": self.params,
            "terms": self.terms.iter().map(|t| json!({"l": t.l, "m": t.m, "c": t.c})).collect::<Vec<_>>(),
        })
    }
}

/// `integral over (0, b] of x^p ln^m x dx`; antiderivative
/// `x^{p+1} sum_k (-1)^{m-k} (m!/k!) ln^k x / (p+1)^{m-k+1}` vanishing at 0.
fn term_antiderivative(p: u32, m: u32, b: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let p1 = p as f64 + 1.0;
    let lnb = b.ln();
    let mut coeff = 1.0 / p1; // k = m
    let mut acc = coeff * lnb.powi(m as i32);
    for k in (0..m).rev() {
        coeff *= -(k as f64 + 1.0) / p1;
        acc += coeff * lnb.powi(k as i32);
    }
    acc * b.powi(p as i32 + 1)
}

/// Double-double value for the compensated moment sums.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    fn mul_f64(self, c: f64) -> Dd {
        let (p, e) = two_prod(self.hi, c);
        let e = e + self.lo * c;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let r = q1.mul_add(-d, self.hi) + self.lo;
        let q2 = r / d;
        let (hi, lo) = two_sum(q1, q2);
        Dd { hi, lo }
    }

    /// Accurate quotient of two exact doubles.
    fn from_div(a: f64, b: f64) -> Dd {
        let q = a / b;
        let r = q.mul_add(-b, a) / b;
        let (hi, lo) = two_sum(q, r);
        Dd { hi, lo }
    }
}

/// Mellin transform of the single-factor weight:
/// `M_1(s) = Gamma(s) Gamma(L+1) / Gamma(s+L)`, in log space.
pub fn mellin_m1(s: f64, l: usize) -> Result<f64> {
    if s <= 0.0 {
        return Err(Error::Domain(format!(
            "Mellin transform has its first pole at s = 0; got s = {s}"
        )));
    }
    let l = l as f64;
    Ok((crate::logspace::ln_gamma(s) + crate::logspace::ln_gamma(l + 1.0)
        - crate::logspace::ln_gamma(s + l))
    .exp())
}

/// Independent oracle: evaluates `Omega(x)` by direct quadrature of the
/// inverse Mellin integral.
///
/// The vertical contour `Re u = -1/2` is deformed onto the hyperbola
/// `u(t) = -1/2 + a (sqrt(1 + t^2) - 1) + i t`, which opens to the right
/// (where `x^u` decays like `exp(-a |ln x| |t|)`) while leaving every pole
/// `u = 0, 1, ...` on its right. No pole is crossed in the deformation and
/// the integrand is smooth through `t = 0`, so the trapezoid rule converges
/// spectrally. The folded integrand uses the Schwarz symmetry of the
/// integrand in `conj(u)`.
pub fn weight_eval_mellin_barnes(params: &EnsembleParams, x: f64) -> Result<f64> {
    if !(0.0 < x && x < 1.0) {
        return Err(Error::Domain(format!(
            "Mellin-Barnes evaluation requires 0 < x < 1, got {x}"
        )));
    }
    const SLOPE: f64 = 1.0;
    let ln_x = x.ln(); // negative
    let decay = SLOPE * (-ln_x);
    let sum_l: u32 = params.truncations().iter().map(|&l| l as u32).sum();

    // Put the contour vertex at the real saddle point c* < 0 of
    // x^u / prod (l - u): ln x + sum 1/(l - c) = 0. Anchoring there keeps
    // the integrand maximum at the scale of the result; a fixed vertex at
    // -1/2 can exceed it by hundreds of orders of magnitude at large sum(L).
    let s_sum = |c: f64| -> f64 {
        params
            .truncations()
            .iter()
            .map(|&lj| (0..lj).map(|l| 1.0 / (l as f64 - c)).sum::<f64>())
            .sum::<f64>()
    };
    let mut lo = -1e9;
    let mut hi = -1e-9;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_x + s_sum(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let vertex = 0.5 * (lo + hi);

    let contour = move |t: f64| -> Complex64 {
        Complex64::new(vertex + SLOPE * ((1.0 + t * t).sqrt() - 1.0), t)
    };
    // the denominator is a product of up to sum(L_j) linear factors and the
    // prefactor is a product of factorials, so magnitudes are accumulated in
    // log space and recombined per point
    let ln_prefactor: f64 = params.truncations().iter().map(|&l| ln_factorial(l as u64)).sum();
    let integrand_f = |t: f64| -> Complex64 {
        let u = contour(t);
        let mut ln_mag = ln_prefactor + u.re * ln_x;
        let mut phase = u.im * ln_x;
        for &lj in params.truncations() {
            for l in 0..lj {
                let d = Complex64::new(l as f64, 0.0) - u;
                ln_mag -= d.norm().ln();
                phase -= d.arg();
            }
        }
        if ln_mag < -745.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(ln_mag.exp(), phase)
    };
    // folded real integrand over t >= 0
    let g = |t: f64| -> f64 {
        let f = integrand_f(t);
        let a_prime = SLOPE * t / (1.0 + t * t).sqrt();
        f.re + a_prime * f.im
    };

    const TOL: f64 = 1e-12;
    // choose T from the analytic tail bound: |f(t)| <= |f(T)| e^{-decay (t-T)}
    // for t >= T (the denominator keeps growing), so the tail is bounded by
    // |f(T)| (1 + SLOPE) / decay
    let mut t_max = (2.0 + 4.0 / decay).min(2000.0);
    let mut tail_ok = false;
    for _ in 0..60 {
        let bound = integrand_f(t_max).norm() * (1.0 + SLOPE) / decay;
        if bound < TOL {
            tail_ok = true;
            break;
        }
        t_max *= 1.5;
        if t_max > 1e6 {
            break;
        }
    }
    if !tail_ok {
        return Err(Error::Quadrature(format!(
            "Mellin-Barnes tail bound not met for x = {x} (sum L = {sum_l})"
        )));
    }

    let trapezoid = |h: f64| -> f64 {
        let n = (t_max / h).ceil() as usize;
        let mut acc = 0.5 * g(0.0);
        for k in 1..=n {
            acc += g(k as f64 * h);
        }
        acc * h
    };

    let mut h = 0.25;
    let mut prev = trapezoid(h);
    for _ in 0..12 {
        h *= 0.5;
        let cur = trapezoid(h);
        if (cur - prev).abs() <= 0.5 * TOL * cur.abs().max(1.0) {
            return Ok(cur / std::f64::consts::PI);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "Mellin-Barnes trapezoid did not stabilize for x = {x} at panel width {h}"
    )))
}

/// Closed form of the single-factor weight `Omega_1^{(L)}(x) = L (1-x)^{L-1}`.
pub fn omega_single(l: usize, x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    if l == 1 {
        return 1.0;
    }
    l as f64 * ((l as f64 - 1.0) * (1.0 - x).ln()).exp()
}

/// Second independent oracle: one step of the multiplicative convolution
/// recursion, `Omega_M(x) = integral over (x,1] of
/// `Omega_1^{(L_M)}(x/y) Omega_{M-1}(y) dy / y`, with `Omega_{M-1}` taken
/// from the residue table of the reduced ensemble.
pub fn weight_convolve_check(params: &EnsembleParams, x: f64) -> Result<f64> {
    if params.num_factors() < 2 {
        return Err(Error::Domain(
            "the convolution recursion needs at least two factors (M >= 2)".into(),
        ));
    }
    if !(0.0 < x && x < 1.0) {
        return Err(Error::Domain(format!("convolution check requires 0 < x < 1, got {x}")));
    }
    let inner = EnsembleParams::new(
        params.n(),
        params.truncations()[..params.num_factors() - 1].to_vec(),
    )?;
    let last_l = *params.truncations().last().expect("M >= 2");
    let table = build_weight(&inner);
    let f = |y: f64| -> f64 {
        let om_inner = table.eval(y).unwrap_or(0.0);
        omega_single(last_l, x / y) * om_inner / y
    };
    quad::integrate(f, x, 1.0, 1e-13, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: usize, l: usize) -> EnsembleParams {
        EnsembleParams::equal(n, m, l).unwrap()
    }

    #[test]
    fn single_factor_tables_match_beta_form() {
        // Omega_1^{(2)}(x) = 2(1-x)
        let w = build_weight(&params(4, 1, 2));
        assert!((w.coefficient(0, 0) - 2.0).abs() < 1e-12);
        assert!((w.coefficient(1, 0) + 2.0).abs() < 1e-12);
        assert!((w.eval(0.5).unwrap() - 1.0).abs() < 1e-12);
        for l in 1..=8usize {
            let w = build_weight(&params(4, 1, l));
            for &x in &[0.04, 0.31, 0.77, 0.95] {
                let want = omega_single(l, x);
                let got = w.eval(x).unwrap();
                assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "L={l} x={x}");
            }
        }
    }

    #[test]
    fn product_of_two_with_l1_is_minus_log() {
        // Omega_2^{(1)}(x) = -ln x
        let w = build_weight(&params(4, 2, 1));
        assert!((w.coefficient(0, 1) + 1.0).abs() < 1e-12);
        assert!((w.eval((-1.0f64).exp()).unwrap() - 1.0).abs() < 1e-12);
        assert!(w.singular_at_origin());
        assert!(matches!(w.eval(0.0), Err(Error::SingularAtOrigin(_))));
    }

    #[test]
    fn two_factor_l2_table() {
        // Omega_2^{(2)}(x) = -8(1-x) - 4(1+x) ln x
        let w = build_weight(&params(4, 2, 2));
        assert!((w.coefficient(0, 0) + 8.0).abs() < 1e-12);
        assert!((w.coefficient(1, 0) - 8.0).abs() < 1e-12);
        assert!((w.coefficient(0, 1) + 4.0).abs() < 1e-12);
        assert!((w.coefficient(1, 1) + 4.0).abs() < 1e-12);
        let want = -8.0 * 0.75 - 4.0 * 1.25 * 0.25f64.ln();
        assert!((w.eval(0.25).unwrap() - want).abs() < 1e-12);
        assert!((want - 0.931_471_8).abs() < 1e-6);
    }

    #[test]
    fn three_factor_l2_table() {
        // Omega_3^{(2)}(x) = 48(1-x) + 24(1+x) ln x + 4(1-x) ln^2 x
        let w = build_weight(&params(4, 3, 2));
        for (l, m, want) in [
            (0, 0, 48.0),
            (1, 0, -48.0),
            (0, 1, 24.0),
            (1, 1, 24.0),
            (0, 2, 4.0),
            (1, 2, -4.0),
        ] {
            assert!((w.coefficient(l, m) - want).abs() < 1e-10, "c[{l},{m}]");
        }
    }

    #[test]
    fn pole_orders_follow_truncation_multiset() {
        let w = build_weight(&EnsembleParams::new(4, vec![1, 2, 4]).unwrap());
        assert_eq!(w.pole_orders(), &[3, 2, 1, 1]);
    }

    #[test]
    fn normalization_and_moments_closed_form() {
        for m in 1..=4usize {
            for l in 1..=6usize {
                let w = build_weight(&params(4, m, l));
                assert!(
                    (w.normalization() - 1.0).abs() < 1e-10,
                    "normalization M={m} L={l}: {}",
                    w.normalization()
                );
                for j in 0..=10u32 {
                    let want = crate::logspace::h_moment(&params(4, m, l), j as u64);
                    let got = w.moment(j);
                    assert!(
                        (got - want).abs() < 1e-10,
                        "moment M={m} L={l} j={j}: got {got}, want {want}"
                    );
                }
            }
        }
        // unequal truncations against the generalized moment product
        let p = EnsembleParams::new(5, vec![1, 2, 3]).unwrap();
        let w = build_weight(&p);
        assert!((w.normalization() - 1.0).abs() < 1e-10);
        for j in 0..=10u32 {
            let want = crate::logspace::h_moment(&p, j as u64);
            assert!((w.moment(j) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn weight_is_nonnegative_on_support() {
        for (m, l) in [(1, 3), (2, 2), (3, 1), (4, 2), (2, 6)] {
            let w = build_weight(&params(4, m, l));
            for i in 1..400 {
                let x = i as f64 / 400.0;
                assert!(w.eval(x).unwrap() >= -1e-12, "M={m} L={l} x={x}");
            }
        }
    }

    #[test]
    fn support_conventions() {
        let w = build_weight(&params(4, 2, 2));
        assert_eq!(w.eval(1.5).unwrap(), 0.0);
        assert!((w.eval(1.0).unwrap() - 0.0).abs() < 1e-12); // -8(1-x) at x=1
        assert!(w.eval(-0.1).is_err());
        // M = 1 is finite at the origin
        let w1 = build_weight(&params(4, 1, 3));
        assert!((w1.eval(0.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mellin_m1_reference_points() {
        assert!((mellin_m1(1.0, 5).unwrap() - 1.0).abs() < 1e-13);
        assert!((mellin_m1(2.0, 1).unwrap() - 0.5).abs() < 1e-13);
        assert!((mellin_m1(3.0, 2).unwrap() - 1.0 / 6.0).abs() < 1e-13);
        assert!(mellin_m1(0.0, 2).is_err());
        assert!(mellin_m1(-1.0, 2).is_err());
    }

    #[test]
    fn mellin_factorization_at_real_s() {
        // integral of Omega_M x^{s-1} equals the product of single-factor
        // transforms, checked by quadrature at non-integer s
        for p in [params(4, 2, 2), params(4, 3, 2), EnsembleParams::new(4, vec![1, 3]).unwrap()] {
            let w = build_weight(&p);
            for &s in &[1.5f64, 2.0, 3.25] {
                let lhs = quad::integrate(
                    |x| w.eval(x).unwrap() * x.powf(s - 1.0),
                    0.0,
                    1.0,
                    1e-12,
                    1e-11,
                )
                .unwrap();
                let rhs: f64 = p
                    .truncations()
                    .iter()
                    .map(|&l| mellin_m1(s, l).unwrap())
                    .product();
                assert!(
                    (lhs - rhs).abs() < 1e-9 * rhs.abs().max(1e-12),
                    "{p} s={s}: lhs {lhs} rhs {rhs}"
                );
            }
        }
    }

    #[test]
    fn mellin_barnes_oracle_matches_tables() {
        let cases = [
            params(4, 1, 2),
            params(4, 2, 2),
            params(4, 3, 1),
            params(4, 2, 5),
            EnsembleParams::new(4, vec![1, 2]).unwrap(),
            EnsembleParams::new(4, vec![2, 4, 1]).unwrap(),
        ];
        for p in cases {
            let w = build_weight(&p);
            for i in 1..=9 {
                let x = i as f64 / 10.0;
                let got = weight_eval_mellin_barnes(&p, x).unwrap();
                let want = w.eval(x).unwrap();
                assert!(
                    (got - want).abs() < 1e-9 * want.abs().max(1.0),
                    "{p} x={x}: mb {got} table {want}"
                );
            }
        }
    }

    #[test]
    fn mellin_barnes_reference_values() {
        let v = weight_eval_mellin_barnes(&params(4, 1, 2), 0.5).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
        let v = weight_eval_mellin_barnes(&params(4, 2, 2), 0.25).unwrap();
        assert!((v - 0.931_471_805_599_453).abs() < 1e-8);
        // Omega_3^{(1)}(e^{-2}) = ln^2(1/x) / 2! = 2
        let v = weight_eval_mellin_barnes(&params(4, 3, 1), (-2.0f64).exp()).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn convolution_oracle_matches_tables() {
        let v = weight_convolve_check(&params(4, 2, 1), (-1.0f64).exp()).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        let v = weight_convolve_check(&params(4, 2, 2), 0.25).unwrap();
        assert!((v - 0.931_471_805_599_453).abs() < 1e-10);
        // Omega_3^{(2)}(0.5) = 24 + 36 ln(1/2) + 2 ln^2(1/2)
        let want = 24.0 + 36.0 * 0.5f64.ln() + 2.0 * 0.5f64.ln().powi(2);
        let v = weight_convolve_check(&params(4, 3, 2), 0.5).unwrap();
        assert!((v - want).abs() < 1e-10, "got {v}, want {want}");
        assert!((want - 0.007_607_527_7).abs() < 1e-9);
        // order of the truncation list does not matter
        let a = weight_convolve_check(&EnsembleParams::new(4, vec![1, 3]).unwrap(), 0.4).unwrap();
        let b = weight_convolve_check(&EnsembleParams::new(4, vec![3, 1]).unwrap(), 0.4).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!(weight_convolve_check(&params(4, 1, 2), 0.5).is_err());
    }

    #[test]
    fn origin_log_power_is_the_residue_prediction() {
        // c_{0, M-1} = L^M / (M-1)! with the sign carried by ln^{M-1} x,
        // and Omega(x) / ln^{M-1}(1/x) stabilizes towards it near 0. The
        // subleading term decays only like 1 / ln(1/x), so the tight Cauchy
        // tolerance needs very deep arguments.
        for (m, l) in [(2usize, 2usize), (3, 2), (4, 1), (3, 4)] {
            let w = build_weight(&params(4, m, l));
            let predicted = (l as f64).powi(m as i32) / crate::logspace::ln_factorial(m as u64 - 1).exp();
            let sign = if (m - 1) % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                (w.coefficient(0, m as u32 - 1) - sign * predicted).abs() < 1e-9 * predicted,
                "M={m} L={l}"
            );
            let ratio = |x: f64| w.eval(x).unwrap() / (1.0 / x).ln().powi(m as i32 - 1);
            let (r8, r10) = (ratio(1e-8), ratio(1e-10));
            assert!(
                ((r8 - r10) / r10).abs() < 0.15,
                "M={m} L={l}: ratio drifting ({r8} vs {r10})"
            );
            // the subleading term is c_{0,M-2} ln^{M-2}, so the Cauchy gap
            // between ln(1/x) = 644 and 690 is (b/c) * (1/644 - 1/690)
            let rate = if m >= 2 {
                (w.coefficient(0, m as u32 - 2) / w.coefficient(0, m as u32 - 1)).abs()
            } else {
                0.0
            };
            let tol = (2.0 * rate * (1.0 / 644.0 - 1.0 / 690.0)).max(1e-3);
            let (ra, rb) = (ratio(1e-280), ratio(1e-300));
            assert!(
                ((ra - rb) / rb).abs() < tol,
                "M={m} L={l}: ratio not converged ({ra} vs {rb}, tol {tol:.2e})"
            );
            assert!(
                ((rb - predicted) / predicted).abs() < 0.05,
                "M={m} L={l}: limit {rb} vs predicted {predicted}"
            );
        }
    }

    #[test]
    fn incomplete_moment_agrees_with_quadrature() {
        let w = build_weight(&params(4, 2, 3));
        for &b in &[0.2, 0.5, 0.9, 1.0] {
            for j in [0u32, 1, 3] {
                let closed = w.incomplete_moment(j, b);
                let numeric = quad::integrate(
                    |x| w.eval(x).unwrap() * x.powi(j as i32),
                    0.0,
                    b,
                    1e-13,
                    1e-12,
                )
                .unwrap();
                assert!((closed - numeric).abs() < 1e-10, "b={b} j={j}");
            }
        }
    }

    #[test]
    fn json_dump_shape() {
        let w = build_weight(&params(4, 2, 1));
        let v = w.to_json();
        assert!(v["params"].is_object());
        assert_eq!(v["terms"].as_array().unwrap().len(), w.terms().len());
    }
}
