//! Statistical tests and the edge-profile fit used by the verification
//! harness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{chi_square_survival, erfc, kolmogorov_survival};

/// Outcome of a binned chi-square comparison. Bins whose expectation falls
/// below the floor are excluded from the statistic (but still reported).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub tested_bins: usize,
    /// largest |observed - expected| over tested bins
    pub max_abs_deviation: f64,
    /// largest |observed - expected| / expected over tested bins
    pub max_rel_deviation: f64,
    /// largest |observed - expected| / sqrt(expected) over tested bins
    pub max_sigma: f64,
}

pub fn chi_square_binned(observed: &[u64], expected: &[f64], min_expected: f64) -> ChiSquareOutcome {
    assert_eq!(observed.len(), expected.len());
    let mut statistic = 0.0;
    let mut tested = 0usize;
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    let mut max_sigma: f64 = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        if e < min_expected {
            continue;
        }
        let diff = o as f64 - e;
        statistic += diff * diff / e;
        tested += 1;
        max_abs = max_abs.max(diff.abs());
        max_rel = max_rel.max(diff.abs() / e);
        max_sigma = max_sigma.max(diff.abs() / e.sqrt());
    }
    let dof = tested.max(1);
    let p_value = if tested == 0 { 1.0 } else { chi_square_survival(statistic, dof as f64) };
    ChiSquareOutcome {
        statistic,
        dof,
        p_value,
        tested_bins: tested,
        max_abs_deviation: max_abs,
        max_rel_deviation: max_rel,
        max_sigma,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub n_effective: f64,
}

fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let sq = n_eff.sqrt();
    kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)
}

/// Two-sample Kolmogorov–Smirnov test; both samples are sorted in place.
pub fn ks_two_sample(xs: &mut [f64], ys: &mut [f64]) -> KsOutcome {
    assert!(!xs.is_empty() && !ys.is_empty());
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    ys.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n as f64) * (m as f64) / (n as f64 + m as f64);
    KsOutcome { statistic: d, p_value: ks_p_value(d, n_eff), n_effective: n_eff }
}

/// One-sample Kolmogorov–Smirnov test against an analytic CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &mut [f64], cdf: F) -> KsOutcome {
    assert!(!xs.is_empty());
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - k as f64 / n).abs());
        d = d.max(((k as f64 + 1.0) / n - f).abs());
    }
    KsOutcome { statistic: d, p_value: ks_p_value(d, n), n_effective: n }
}

/// Result of fitting `y = c1 * erfc(c2 x + c3)` by weighted least squares.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErfcFit {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// one-sigma parameter errors from the Gauss-Newton normal matrix
    pub sigma: [f64; 3],
    /// root mean square of the weighted residuals (roughly 1 for a fit
    /// compatible with the error bars)
    pub weighted_rms: f64,
    pub iterations: usize,
}

/// Levenberg–Marquardt fit of an erfc profile. `sigma_y[i]` are the
/// one-sigma errors of `y[i]`; points with non-finite or non-positive
/// errors are ignored.
pub fn fit_erfc(x: &[f64], y: &[f64], sigma_y: &[f64], init: [f64; 3]) -> Result<ErfcFit> {
    assert!(x.len() == y.len() && y.len() == sigma_y.len());
    let pts: Vec<(f64, f64, f64)> = x
        .iter()
        .zip(y)
        .zip(sigma_y)
        .filter(|((_, _), &s)| s.is_finite() && s > 0.0)
        .map(|((&x, &y), &s)| (x, y, 1.0 / s))
        .collect();
    if pts.len() < 6 {
        return Err(Error::Numerical(format!(
            "erfc fit needs at least 6 usable points, got {}",
            pts.len()
        )));
    }

    let two_over_sqrt_pi = 2.0 / std::f64::consts::PI.sqrt();
    let residuals = |p: &[f64; 3]| -> (f64, Vec<f64>, Vec<[f64; 3]>) {
        let mut chi2 = 0.0;
        let mut res = Vec::with_capacity(pts.len());
        let mut jac = Vec::with_capacity(pts.len());
        for &(xi, yi, w) in &pts {
            let u = p[1] * xi + p[2];
            let e = erfc(u);
            let r = (yi - p[0] * e) * w;
            let g = p[0] * two_over_sqrt_pi * (-u * u).exp() * w;
            res.push(r);
            jac.push([-e * w, g * xi, g]);
            chi2 += r * r;
        }
        (chi2, res, jac)
    };

    let mut p = init;
    let mut lambda = 1e-3;
    let (mut chi2, mut res, mut jac) = residuals(&p);
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        // normal equations (J^T J + lambda diag) delta = -J^T r
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for (r, row) in res.iter().zip(&jac) {
            for a in 0..3 {
                jtr[a] += row[a] * r;
                for b in 0..3 {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let mut lhs = jtj;
        for (a, row) in lhs.iter_mut().enumerate() {
            row[a] += lambda * jtj[a][a].max(1e-12);
        }
        let delta = solve3(&lhs, &[-jtr[0], -jtr[1], -jtr[2]])
            .ok_or_else(|| Error::Numerical("singular normal matrix in erfc fit".into()))?;
        let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
        let (chi2_t, res_t, jac_t) = residuals(&trial);
        if chi2_t < chi2 {
            let rel = (chi2 - chi2_t) / chi2.max(1e-300);
            p = trial;
            chi2 = chi2_t;
            res = res_t;
            jac = jac_t;
            lambda = (lambda * 0.3).max(1e-12);
            if rel < 1e-12 {
                break;
            }
        } else {
            lambda *= 8.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    // covariance from the converged normal matrix
    let mut jtj = [[0.0f64; 3]; 3];
    for row in &jac {
        for a in 0..3 {
            for b in 0..3 {
                jtj[a][b] += row[a] * row[b];
            }
        }
    }
    let cov = invert3(&jtj)
        .ok_or_else(|| Error::Numerical("degenerate covariance in erfc fit".into()))?;
    let sigma = [cov[0][0].max(0.0).sqrt(), cov[1][1].max(0.0).sqrt(), cov[2][2].max(0.0).sqrt()];
    let weighted_rms = (chi2 / pts.len() as f64).sqrt();
    Ok(ErfcFit { c1: p[0], c2: p[1], c3: p[2], sigma, weighted_rms, iterations })
}

fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let inv = invert3(a)?;
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += inv[i][j] * b[j];
        }
    }
    Some(out)
}

fn invert3(a: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut out = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r1, r2) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (c1, c2) = match j {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let minor = a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1];
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            out[j][i] = sign * minor * inv_det;
        }
    }
    Some(out)
}
