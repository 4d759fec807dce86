//! Log-space combinatorics shared by every evaluator in the crate.
//!
//! All binomial products are held as natural logarithms and exponentiated as
//! late as possible: the coefficients `C(L+j, j)^M` of the truncated kernel
//! series overflow `f64` already at modest `N`, `L`, `M`.

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::params::EnsembleParams;

/// Lanczos coefficients for g = 607/128, n = 15 (Boost / GSL parameter set).
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEFF: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
];

const HALF_LN_TWO_PI: f64 = 0.91893853320467274178;

/// Natural log of the Gamma function for positive real argument.
///
/// Lanczos approximation, relative accuracy better than 1e-13 over
/// `[1, 1e6]` (checked against compensated log-factorial sums in the tests).
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate region
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFF[0];
    for (i, &c) in LANCZOS_COEFF.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let base = z + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (z + 0.5) * base.ln() - base + sum.ln()
}

/// Principal branch of `ln Gamma(z)` for complex `z` off the non-positive
/// real axis. Same Lanczos kernel as the real version; used by the
/// Mellin–Barnes evaluators along vertical contours.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = std::f64::consts::PI;
        let s = (pi * z).sin();
        return Complex64::new(pi.ln(), 0.0) - s.ln() - ln_gamma_complex(1.0 - z);
    }
    let zm = z - 1.0;
    let mut sum = Complex64::new(LANCZOS_COEFF[0], 0.0);
    for (i, &c) in LANCZOS_COEFF.iter().enumerate().skip(1) {
        sum += c / (zm + i as f64);
    }
    let base = zm + LANCZOS_G + 0.5;
    (zm + 0.5) * base.ln() - base + sum.ln() + HALF_LN_TWO_PI
}

const LN_FACTORIAL_CACHE_LEN: usize = 2048;

fn ln_factorial_cache() -> &'static [f64] {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    CACHE.get_or_init(|| {
        // cumulative compensated sum of ln k; more accurate than Lanczos
        // in the small regime and cheap to build once
        let mut table = Vec::with_capacity(LN_FACTORIAL_CACHE_LEN);
        table.push(0.0);
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for k in 1..LN_FACTORIAL_CACHE_LEN as u64 {
            let term = (k as f64).ln() - comp;
            let t = sum + term;
            comp = (t - sum) - term;
            sum = t;
            table.push(sum);
        }
        table
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    let cache = ln_factorial_cache();
    if (n as usize) < cache.len() {
        cache[n as usize]
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `ln C(top, bottom)` via log-factorials.
pub fn log_binom(top: u64, bottom: u64) -> Result<f64> {
    if bottom > top {
        return Err(Error::Domain(format!(
            "binomial coefficient C({top}, {bottom}) requires bottom <= top"
        )));
    }
    Ok(ln_factorial(top) - ln_factorial(bottom) - ln_factorial(top - bottom))
}

/// Squared-modulus moment of the one-point weight:
/// `h_j = prod_m C(L_m + j, j)^{-1}`, computed in log space.
pub fn h_moment(params: &EnsembleParams, j: u64) -> f64 {
    (-log_b_sum(params, j)).exp()
}

/// `ln b_j = sum_m ln C(L_m + j, j)`, the log of the kernel series
/// coefficient (`b_j = 1 / h_j`).
pub fn log_b_sum(params: &EnsembleParams, j: u64) -> f64 {
    params
        .truncations()
        .iter()
        .map(|&l| log_binom(l as u64 + j, j).expect("bottom <= top by construction"))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn exact_binom(top: u64, bottom: u64) -> BigUint {
        let mut acc = BigUint::from(1u32);
        for i in 0..bottom {
            acc = acc * BigUint::from(top - i) / BigUint::from(i + 1);
        }
        acc
    }

    fn ln_big(x: &BigUint) -> f64 {
        // ln of a big integer from its top bits plus the bit length
        let bits = x.bits();
        if bits <= 53 {
            let v: u64 = x.try_into().clone().unwrap_or(0);
            return (v as f64).ln();
        }
        let shift = bits - 53;
        let top: u64 = (x >> shift).try_into().unwrap();
        (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
    }

    #[test]
    fn log_binom_small_values() {
        assert!((log_binom(3, 2).unwrap() - 3.0f64.ln()).abs() < 1e-14);
        for j in 0..20u64 {
            assert_eq!(log_binom(j, 0).unwrap(), 0.0);
        }
        assert!(log_binom(2, 3).is_err());
    }

    #[test]
    fn log_binom_matches_exact_integers_small_regime() {
        for top in 0..=40u64 {
            for bottom in 0..=top {
                let exact = ln_big(&exact_binom(top, bottom));
                let got = log_binom(top, bottom).unwrap();
                let tol = 1e-12 * exact.abs().max(1.0);
                assert!(
                    (got - exact).abs() <= tol,
                    "C({top},{bottom}): got {got}, exact {exact}"
                );
            }
        }
    }

    #[test]
    fn log_binom_large_against_big_integer() {
        let exact = ln_big(&exact_binom(200, 100));
        let got = log_binom(200, 100).unwrap();
        assert!((got - exact).abs() < 1e-9 * exact.abs(), "got {got}, exact {exact}");
        // frozen from the big-integer oracle
        assert!((got - 135.753_236_081).abs() < 1e-6);
    }

    #[test]
    fn ln_gamma_accuracy_floor() {
        // compensated cumulative sum of ln k as the oracle for ln Gamma(n+1)
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut next_check = 1u64;
        for k in 1..=1_000_000u64 {
            let term = (k as f64).ln() - comp;
            let t = sum + term;
            comp = (t - sum) - term;
            sum = t;
            if k == next_check {
                let got = ln_gamma(k as f64 + 1.0);
                let tol = 1e-13 * sum.abs().max(1.0);
                assert!((got - sum).abs() <= tol, "ln Gamma({})! got {got} want {sum}", k);
                next_check *= 10;
            }
        }
    }

    #[test]
    fn ln_gamma_complex_agrees_on_real_axis() {
        for &x in &[0.75, 1.0, 2.5, 10.0, 55.5] {
            let re = ln_gamma(x);
            let c = ln_gamma_complex(Complex64::new(x, 0.0));
            assert!((c.re - re).abs() < 1e-12 * re.abs().max(1.0));
            assert!(c.im.abs() < 1e-13);
        }
        // Gamma(1 + i) has a tabulated modulus |Gamma(1+i)|^2 = pi / sinh(pi)
        let g = ln_gamma_complex(Complex64::new(1.0, 1.0));
        let modulus2 = (2.0 * g.re).exp();
        let want = std::f64::consts::PI / std::f64::consts::PI.sinh();
        assert!((modulus2 - want).abs() < 1e-13);
    }

    #[test]
    fn h_moment_examples_and_monotonicity() {
        let p = EnsembleParams::equal(5, 2, 2).unwrap();
        assert!((h_moment(&p, 1) - 1.0 / 9.0).abs() < 1e-14);
        assert_eq!(h_moment(&p, 0), 1.0);

        let q = EnsembleParams::new(5, vec![1, 2]).unwrap();
        assert!((h_moment(&q, 1) - 1.0 / 6.0).abs() < 1e-14);

        for params in [p, q, EnsembleParams::equal(4, 3, 5).unwrap()] {
            let mut prev = h_moment(&params, 0);
            for j in 1..30 {
                let cur = h_moment(&params, j);
                assert!(cur < prev, "h_j must decrease strictly in j");
                prev = cur;
            }
        }
    }
}
