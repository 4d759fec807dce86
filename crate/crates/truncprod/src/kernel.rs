//! Finite-N determinantal machinery: the truncated kernel series, the
//! kernel itself, the level density and k-point correlation determinants,
//! for equal and unequal truncations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::logspace::{self, log_b_sum};
use crate::params::EnsembleParams;
use crate::quad;
use crate::weights::{self, WeightFunction};

/// Largest polynomial degree for which the expanded weight table is used
/// unconditionally. Beyond it the monomial form cancels catastrophically at
/// mid-range arguments and evaluation falls back to Mellin–Barnes
/// quadrature, except near the origin where the table stays well
/// conditioned.
const TABLE_SAFE_MAX_L: usize = 12;

/// Correlation determinants are capped here; larger determinants are
/// statistically and numerically useless at desk scale.
pub const MAX_CORRELATION_ORDER: usize = 12;

/// A set of points at which a k-point correlation function is requested.
#[derive(Debug, Clone)]
pub struct CorrelationRequest {
    points: Vec<Complex64>,
}

impl CorrelationRequest {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("a correlation request needs k >= 1 points".into()));
        }
        if let Some(z) = points.iter().find(|z| z.norm() >= 1.0) {
            return Err(Error::Domain(format!(
                "correlation points must lie strictly inside the unit disk, got |z| = {}",
                z.norm()
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }
}

/// Precomputed finite-N kernel for one ensemble: the one-point weight plus
/// the log-space series coefficients `log_b[j] = sum_m ln C(L_m + j, j)`.
#[derive(Debug, Clone)]
pub struct FiniteKernel {
    params: EnsembleParams,
    weight: Option<WeightFunction>,
    log_b: Vec<f64>,
}

impl FiniteKernel {
    pub fn new(params: &EnsembleParams) -> Self {
        let log_b: Vec<f64> = (0..params.n() as u64).map(|j| log_b_sum(params, j)).collect();
        // the table is only materialized when its prefactor is representable
        let ln_prefactor: f64 = params
            .truncations()
            .iter()
            .map(|&l| logspace::ln_factorial(l as u64))
            .sum();
        let weight = (ln_prefactor < 690.0).then(|| weights::build_weight(params));
        FiniteKernel { params: params.clone(), weight, log_b }
    }

    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    /// Log-space series coefficients; `exp(-log_b[j])` equals `h_j`.
    pub fn log_b(&self) -> &[f64] {
        &self.log_b
    }

    /// The expanded weight table, when representable.
    pub fn weight_table(&self) -> Option<&WeightFunction> {
        self.weight.as_ref()
    }

    /// `Omega(x)`, routed between the expanded table and the Mellin–Barnes
    /// quadrature depending on conditioning.
    pub fn omega(&self, x: f64) -> Result<f64> {
        if x < 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!("Omega argument must be nonnegative, got {x}")));
        }
        if x > 1.0 {
            return Ok(0.0);
        }
        let max_l = self.params.max_l();
        if x == 0.0 {
            if self.params.num_factors() >= 2 {
                return Err(Error::SingularAtOrigin(
                    "the one-point weight diverges logarithmically at the origin for M >= 2".into(),
                ));
            }
            return Ok(max_l as f64);
        }
        if let Some(table) = &self.weight {
            let table_ok =
                max_l <= TABLE_SAFE_MAX_L || x <= 4.0 / (max_l as f64 * max_l as f64);
            if table_ok {
                return table.eval(x);
            }
        }
        if x == 1.0 {
            // Omega(1) vanishes unless every factor has L = 1 and M = 1
            return Ok(if max_l == 1 && self.params.num_factors() == 1 { 1.0 } else { 0.0 });
        }
        weights::weight_eval_mellin_barnes(&self.params, x)
    }

    /// One-point weight `w(z) = Omega(|z|^2) / pi` at modulus `r`.
    pub fn weight_at(&self, r: f64) -> Result<f64> {
        Ok(self.omega(r * r)? / std::f64::consts::PI)
    }

    /// Truncated series `T(x) = sum_{j=0}^{upper} b_j x^j` with
    /// `b_j = prod_m C(L_m + j, j)`, coefficients exponentiated from log
    /// space and accumulated with compensated summation.
    pub fn truncated_series(&self, upper: usize, x: Complex64) -> Complex64 {
        assert!(
            upper < self.params.n(),
            "series order {upper} exceeds N - 1 = {}",
            self.params.n() - 1
        );
        let mut sum = Complex64::new(0.0, 0.0);
        let mut comp = Complex64::new(0.0, 0.0);
        let mut xpow = Complex64::new(1.0, 0.0);
        for &lb in &self.log_b[..=upper] {
            let term = lb.exp() * xpow - comp;
            let t = sum + term;
            comp = (t - sum) - term;
            sum = t;
            xpow *= x;
        }
        sum
    }

    /// Real-argument fast path of the truncated series.
    pub fn truncated_series_real(&self, upper: usize, x: f64) -> f64 {
        assert!(upper < self.params.n());
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut xpow = 1.0f64;
        for &lb in &self.log_b[..=upper] {
            let term = lb.exp() * xpow - comp;
            let t = sum + term;
            comp = (t - sum) - term;
            sum = t;
            xpow *= x;
        }
        sum
    }

    fn check_point(&self, z: Complex64) -> Result<()> {
        let r = z.norm();
        if r >= 1.0 {
            return Err(Error::Domain(format!(
                "kernel arguments must lie strictly inside the unit disk, got |z| = {r}"
            )));
        }
        if r == 0.0 && self.params.num_factors() >= 2 {
            return Err(Error::SingularAtOrigin(
                "the kernel is log-singular at the origin for M >= 2".into(),
            ));
        }
        Ok(())
    }

    /// Kernel `K(u, v) = sqrt(w(u) w(v)) T^{(N-1)}(u conj(v))`.
    ///
    /// Hermitian by construction: the series has real coefficients, so
    /// `K(u, v) = conj(K(v, u))` exactly.
    pub fn kernel_eval(&self, u: Complex64, v: Complex64) -> Result<Complex64> {
        self.check_point(u)?;
        self.check_point(v)?;
        let wu = self.weight_at(u.norm())?;
        let wv = self.weight_at(v.norm())?;
        let t = self.truncated_series(self.params.n() - 1, u * v.conj());
        Ok((wu * wv).max(0.0).sqrt() * t)
    }

    /// Level density `R_1(z) = w(|z|) T^{(N-1)}(|z|^2)`.
    pub fn density(&self, z: Complex64) -> Result<f64> {
        self.density_radial(z.norm())
    }

    /// Level density at modulus `r` (the density is rotation invariant).
    pub fn density_radial(&self, r: f64) -> Result<f64> {
        if r >= 1.0 {
            return Err(Error::Domain(format!("density requires |z| < 1, got {r}")));
        }
        if r == 0.0 && self.params.num_factors() >= 2 {
            return Err(Error::SingularAtOrigin(
                "the level density diverges at the origin for M >= 2".into(),
            ));
        }
        let w = self.weight_at(r)?;
        Ok(w * self.truncated_series_real(self.params.n() - 1, r * r))
    }

    /// Mass of the level density on the annulus `r0 <= |z| < r1`, i.e.
    /// `2 pi int r R_1(r) dr`, by adaptive quadrature in `x = r^2`.
    pub fn radial_mass(&self, r0: f64, r1: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&r0) || !(0.0..=1.0).contains(&r1) || r0 > r1 {
            return Err(Error::Domain(format!("invalid annulus [{r0}, {r1}]")));
        }
        if self.weight.is_none() || self.params.max_l() > TABLE_SAFE_MAX_L {
            return Err(Error::Numerical(
                "radial integration relies on the expanded weight table (moderate L only)".into(),
            ));
        }
        let table = self.weight.as_ref().expect("checked above");
        let upper = self.params.n() - 1;
        let f = |x: f64| table.eval(x).unwrap_or(f64::NAN) * self.truncated_series_real(upper, x);
        let n = self.params.n() as f64;
        quad::integrate(f, r0 * r0, r1 * r1, 1e-9 * n, 1e-9)
    }

    /// Total mass of the density over the unit disk; equals `N`.
    pub fn total_mass(&self) -> Result<f64> {
        self.radial_mass(0.0, 1.0)
    }

    /// k-point correlation function `R_k = det[K(z_a, z_b)]` via a fully
    /// pivoted LU factorization. The determinant of a Hermitian positive
    /// semidefinite matrix is real; the imaginary residue is checked against
    /// 1e-12 and discarded.
    pub fn correlation_k(&self, req: &CorrelationRequest) -> Result<f64> {
        let k = req.k();
        if k > self.params.n() {
            return Err(Error::Domain(format!(
                "k = {k} exceeds the number of eigenvalues N = {}",
                self.params.n()
            )));
        }
        if k > MAX_CORRELATION_ORDER {
            return Err(Error::Domain(format!(
                "k = {k} exceeds the supported determinant order {MAX_CORRELATION_ORDER}"
            )));
        }
        let pts = req.points();
        let mut mat = vec![Complex64::new(0.0, 0.0); k * k];
        for a in 0..k {
            for b in 0..k {
                mat[a * k + b] = self.kernel_eval(pts[a], pts[b])?;
            }
        }
        let det = det_full_pivot(&mut mat, k);
        let scale = det.norm().max(1e-300);
        if det.im.abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::Numerical(format!(
                "correlation determinant has a non-real residue: {det}"
            )));
        }
        Ok(det.re)
    }

    /// Log of the joint eigenvalue density, used as the brute-force oracle
    /// for the determinantal form (never as a sampler):
    /// `ln P = -ln N! + sum_j log_b[j] + sum_n ln w(z_n) + 2 sum_{a<b} ln|z_b - z_a|`.
    pub fn log_joint_density(&self, points: &[Complex64]) -> Result<f64> {
        let n = self.params.n();
        if points.len() != n {
            return Err(Error::Domain(format!(
                "the joint density takes exactly N = {n} points, got {}",
                points.len()
            )));
        }
        let mut acc = -logspace::ln_factorial(n as u64);
        for &lb in &self.log_b {
            acc += lb; // -ln h_j
        }
        for &z in points {
            let w = self.weight_at(z.norm())?;
            if w <= 0.0 {
                return Err(Error::Domain(format!(
                    "joint density undefined where the weight vanishes (|z| = {})",
                    z.norm()
                )));
            }
            acc += w.ln();
        }
        for a in 0..n {
            for b in (a + 1)..n {
                let d = (points[b] - points[a]).norm();
                if d == 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                acc += 2.0 * d.ln();
            }
        }
        Ok(acc)
    }
}

/// Determinant by Gaussian elimination with full pivoting; the matrix is
/// consumed. Suitable for the small orders used by correlation requests.
fn det_full_pivot(mat: &mut [Complex64], k: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    let mut cols: Vec<usize> = (0..k).collect();
    for step in 0..k {
        let mut best = (step, step, 0.0f64);
        for r in step..k {
            for c in step..k {
                let m = mat[r * k + cols[c]].norm_sqr();
                if m > best.2 {
                    best = (r, c, m);
                }
            }
        }
        if best.2 == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if best.0 != step {
            for c in 0..k {
                mat.swap(step * k + c, best.0 * k + c);
            }
            det = -det;
        }
        if best.1 != step {
            cols.swap(step, best.1);
            det = -det;
        }
        let pivot = mat[step * k + cols[step]];
        det *= pivot;
        for r in (step + 1)..k {
            let factor = mat[r * k + cols[step]] / pivot;
            for c in step..k {
                let sub = factor * mat[step * k + cols[c]];
                mat[r * k + cols[c]] -= sub;
            }
        }
    }
    det
}
