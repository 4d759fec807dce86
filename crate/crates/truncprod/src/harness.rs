//! Monte Carlo verification harness: accumulates empirical spectra over
//! reproducible RNG streams (data parallel over sample batches), compares
//! them against the exact finite-N law and the limiting formulas, and emits
//! machine-readable reports.
//!
//! Chi-square on binned radial densities is the primary test (the
//! eigenvalues of one sample are correlated, which makes exact KS invalid);
//! KS is used for the iid Kostlan marginals and for pooled moduli with that
//! caveat recorded in the report.

use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::asymptotics::{StrongLimitParams, WeakLimitParams};
use crate::defaults;
use crate::error::{Error, Result};
use crate::kernel::FiniteKernel;
use crate::params::EnsembleParams;
use crate::quad;
use crate::sampler::{sample_product_spectrum, KostlanSampler, RngStream, SpectrumSample};
use crate::stats::{self, ChiSquareOutcome, ErfcFit, KsOutcome};

/// Samples per RNG stream; the stream layout is part of a report's
/// reproducibility contract.
pub const STREAM_BATCH: usize = 16;

/// Uniformly binned histogram of a radial (or scaled-radial) coordinate.
/// Values outside the range are counted in the under/overflow fields, so
/// the total eigenvalue count is conserved exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialHistogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    pub n_samples: u64,
    pub total_values: u64,
    pub underflow: u64,
    pub overflow: u64,
}

impl RadialHistogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(bins >= 1 && hi > lo);
        Self {
            lo,
            hi,
            counts: vec![0; bins],
            n_samples: 0,
            total_values: 0,
            underflow: 0,
            overflow: 0,
        }
    }

    pub fn record(&mut self, x: f64) {
        self.total_values += 1;
        if x < self.lo {
            self.underflow += 1;
            return;
        }
        let idx = ((x - self.lo) / (self.hi - self.lo) * self.counts.len() as f64) as usize;
        if idx >= self.counts.len() {
            self.overflow += 1;
        } else {
            self.counts[idx] += 1;
        }
    }

    /// Exact integer merge; associative and commutative.
    pub fn merge(mut self, other: RadialHistogram) -> RadialHistogram {
        assert_eq!(self.counts.len(), other.counts.len());
        assert_eq!((self.lo, self.hi), (other.lo, other.hi));
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n_samples += other.n_samples;
        self.total_values += other.total_values;
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn bin_edges(&self, idx: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + idx as f64 * w, self.lo + (idx + 1) as f64 * w)
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }
}

fn batch_layout(n_samples: usize) -> Vec<(u64, usize)> {
    let mut batches = Vec::new();
    let mut done = 0usize;
    let mut id = 0u64;
    while done < n_samples {
        let count = STREAM_BATCH.min(n_samples - done);
        batches.push((id, count));
        done += count;
        id += 1;
    }
    batches
}

fn merge_results<T, R>(a: Result<T>, b: Result<T>, reduce: &R) -> Result<T>
where
    R: Fn(T, T) -> T,
{
    Ok(reduce(a?, b?))
}

/// Map-reduce over sample batches. Each batch draws from the stream
/// `(base.seed, base.stream_id + batch_index)`, so results are independent
/// of the thread count.
#[cfg(feature = "parallel")]
pub fn run_batches<T, F, R>(
    n_samples: usize,
    base: RngStream,
    threads: usize,
    map: F,
    reduce: R,
) -> Result<T>
where
    T: Send,
    F: Fn(RngStream, usize) -> Result<T> + Sync,
    R: Fn(T, T) -> T + Send + Sync,
{
    let layout = batch_layout(n_samples);
    let body = || {
        use rayon::prelude::*;
        layout
            .par_iter()
            .map(|&(id, count)| map(RngStream::new(base.seed, base.stream_id + id), count))
            .reduce_with(|a, b| merge_results(a, b, &reduce))
            .expect("at least one batch")
    };
    if threads == 0 {
        body()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
        pool.install(body)
    }
}

/// Sequential fallback with the identical stream layout.
#[cfg(not(feature = "parallel"))]
pub fn run_batches<T, F, R>(
    n_samples: usize,
    base: RngStream,
    _threads: usize,
    map: F,
    reduce: R,
) -> Result<T>
where
    T: Send,
    F: Fn(RngStream, usize) -> Result<T> + Sync,
    R: Fn(T, T) -> T + Send + Sync,
{
    run_batches_seq(n_samples, base, map, reduce)
}

/// Sequential batch runner (always available; the criterion benches compare
/// it against the parallel path).
pub fn run_batches_seq<T, F, R>(n_samples: usize, base: RngStream, map: F, reduce: R) -> Result<T>
where
    F: Fn(RngStream, usize) -> Result<T>,
    R: Fn(T, T) -> T,
{
    let mut acc: Option<T> = None;
    for (id, count) in batch_layout(n_samples) {
        let part = map(RngStream::new(base.seed, base.stream_id + id), count)?;
        acc = Some(match acc {
            None => part,
            Some(prev) => reduce(prev, part),
        });
    }
    acc.ok_or_else(|| Error::Config("at least one sample is required".into()))
}

fn spectra_batch(params: &EnsembleParams, stream: RngStream, count: usize) -> Result<Vec<SpectrumSample>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        // one stream per batch; successive samples advance the same rng
        out.push(sample_product_spectrum_at(params, stream, out.len())?);
    }
    Ok(out)
}

fn sample_product_spectrum_at(
    params: &EnsembleParams,
    stream: RngStream,
    index_in_batch: usize,
) -> Result<SpectrumSample> {
    // derive a per-sample stream so each draw is independently reproducible
    let sub = RngStream::new(stream.seed, stream.stream_id * STREAM_BATCH as u64 + index_in_batch as u64);
    sample_product_spectrum(params, sub)
}

/// Draws `n_samples` spectra sequentially.
pub fn sample_spectra_seq(
    params: &EnsembleParams,
    n_samples: usize,
    base: RngStream,
) -> Result<Vec<SpectrumSample>> {
    run_batches_seq(
        n_samples,
        base,
        |stream, count| spectra_batch(params, stream, count),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )
}

/// Draws `n_samples` spectra, in parallel over batches when the `parallel`
/// feature is enabled (`threads = 0` uses the global pool size).
pub fn sample_spectra(
    params: &EnsembleParams,
    n_samples: usize,
    base: RngStream,
    threads: usize,
) -> Result<Vec<SpectrumSample>> {
    let mut all = run_batches(
        n_samples,
        base,
        threads,
        |stream, count| spectra_batch(params, stream, count),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )?;
    all.sort_by_key(|s| s.stream_id);
    Ok(all)
}

fn fold_histogram<Fm>(
    params: &EnsembleParams,
    n_samples: usize,
    base: RngStream,
    threads: usize,
    proto: &RadialHistogram,
    value_map: Fm,
) -> Result<RadialHistogram>
where
    Fm: Fn(&SpectrumSample, &mut RadialHistogram) + Sync,
{
    run_batches(
        n_samples,
        base,
        threads,
        |stream, count| {
            let mut hist = proto.clone();
            for i in 0..count {
                let sample = sample_product_spectrum_at(params, stream, i)?;
                value_map(&sample, &mut hist);
                hist.n_samples += 1;
            }
            Ok(hist)
        },
        RadialHistogram::merge,
    )
}

/// One bin of a comparison: observed counts against the analytic
/// expectation.
#[derive(Debug, Clone, Serialize)]
pub struct BinRow {
    pub lo: f64,
    pub hi: f64,
    pub observed: u64,
    pub expected: f64,
}

/// Fit block of an edge-profile report.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeFitReport {
    pub fit: ErfcFit,
    pub predicted_slope: f64,
    pub predicted_amplitude_full: f64,
    pub predicted_amplitude_half: f64,
    /// which amplitude the fitted profile selects
    pub decision: String,
    /// distance of the fitted amplitude from the rejected candidate, in
    /// fitted sigmas
    pub separation_sigma: f64,
}

/// Machine-readable outcome of one harness run. The pass flag is a pure
/// function of the recorded statistics and the versioned thresholds.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub test_name: String,
    pub params: EnsembleParams,
    pub n_samples: usize,
    pub seed: u64,
    pub base_stream: u64,
    pub stream_batch: usize,
    pub threads: usize,
    pub defaults_version: String,
    pub bins: Vec<BinRow>,
    pub chi_square: Option<ChiSquareOutcome>,
    pub ks: Option<KsOutcome>,
    pub edge_fit: Option<EdgeFitReport>,
    pub scalars: BTreeMap<String, f64>,
    pub max_abs_deviation: f64,
    pub max_rel_deviation: f64,
    pub pass: bool,
    pub notes: Vec<String>,
    /// wall-clock stamp; excluded from reproducibility comparisons
    pub unix_timestamp: u64,
}

impl ComparisonReport {
    fn new(test_name: &str, params: &EnsembleParams, n_samples: usize, base: RngStream, threads: usize) -> Self {
        ComparisonReport {
            test_name: test_name.to_string(),
            params: params.clone(),
            n_samples,
            seed: base.seed,
            base_stream: base.stream_id,
            stream_batch: STREAM_BATCH,
            threads,
            defaults_version: defaults::DEFAULTS_VERSION.to_string(),
            bins: Vec::new(),
            chi_square: None,
            ks: None,
            edge_fit: None,
            scalars: BTreeMap::new(),
            max_abs_deviation: 0.0,
            max_rel_deviation: 0.0,
            pass: false,
            notes: Vec::new(),
            unix_timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .unwrap_or_default()
                .as_secs(),
        }
    }

    fn fill_deviations(&mut self) {
        let mut max_abs: f64 = 0.0;
        let mut max_rel: f64 = 0.0;
        for row in &self.bins {
            if row.expected >= defaults::MIN_EXPECTED_PER_BIN {
                let d = (row.observed as f64 - row.expected).abs();
                max_abs = max_abs.max(d);
                max_rel = max_rel.max(d / row.expected);
            }
        }
        self.max_abs_deviation = max_abs;
        self.max_rel_deviation = max_rel;
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    /// Histogram CSV: `bin_lo, bin_hi, observed, expected` with a config
    /// header block.
    pub fn write_histogram_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# test: {}", self.test_name)?;
        writeln!(out, "# params: {}", self.params)?;
        writeln!(out, "# seed: {}, base_stream: {}, stream_batch: {}", self.seed, self.base_stream, self.stream_batch)?;
        writeln!(out, "# n_samples: {}", self.n_samples)?;
        writeln!(out, "bin_lo,bin_hi,observed,expected")?;
        for row in &self.bins {
            writeln!(out, "{:.16e},{:.16e},{},{:.16e}", row.lo, row.hi, row.observed, row.expected)?;
        }
        Ok(())
    }
}

/// Compares the empirical radial eigenvalue density against the exact
/// finite-N level density by a binned chi-square test. Expected bin masses
/// are `n_samples * 2 pi int r R_1(r) dr`, integrated adaptively.
pub fn run_density_comparison(
    params: &EnsembleParams,
    n_samples: usize,
    bins: usize,
    base: RngStream,
    threads: usize,
) -> Result<ComparisonReport> {
    if n_samples < 100 {
        return Err(Error::Config("density comparison needs at least 100 samples".into()));
    }
    let fk = FiniteKernel::new(params);
    let proto = RadialHistogram::new(0.0, 1.0, bins);
    let hist = fold_histogram(params, n_samples, base, threads, &proto, |s, h| {
        for z in &s.eigenvalues {
            h.record(z.norm());
        }
    })?;

    let mut report = ComparisonReport::new("density_vs_finite_n", params, n_samples, base, threads);
    let mut expected = Vec::with_capacity(bins);
    for i in 0..bins {
        let (lo, hi) = hist.bin_edges(i);
        let mass = fk.radial_mass(lo, hi.min(1.0))? * n_samples as f64;
        expected.push(mass);
        report.bins.push(BinRow { lo, hi, observed: hist.counts()[i], expected: mass });
    }
    let total_expected: f64 = expected.iter().sum();
    let n_total = (params.n() * n_samples) as f64;
    report.scalars.insert("expected_total".into(), total_expected);
    report.scalars.insert("observed_total".into(), hist.total_values as f64 - hist.overflow as f64 - hist.underflow as f64);
    if (total_expected - n_total).abs() > 1e-6 * n_total {
        return Err(Error::Quadrature(format!(
            "expected bin masses sum to {total_expected}, want {n_total}"
        )));
    }

    let chi = stats::chi_square_binned(hist.counts(), &expected, defaults::MIN_EXPECTED_PER_BIN);
    report.pass = chi.p_value > defaults::CHI_SQUARE_MIN_P && chi.max_sigma < defaults::MAX_BIN_SIGMA;
    report.chi_square = Some(chi);
    report.fill_deviations();
    Ok(report)
}

/// Cross-validates the eigenvalue sampler against the independent Kostlan
/// radial sampler by a two-sample KS test on pooled squared moduli. The two
/// laws agree exactly at finite N, so this simultaneously validates the
/// sampler, the weight table and the moments.
pub fn run_kostlan_check(
    params: &EnsembleParams,
    n_samples: usize,
    base: RngStream,
    threads: usize,
) -> Result<ComparisonReport> {
    let sampler = KostlanSampler::new(params)?;
    let mut eig: Vec<f64> = run_batches(
        n_samples,
        base,
        threads,
        |stream, count| {
            let mut vals = Vec::with_capacity(count * params.n());
            for i in 0..count {
                let s = sample_product_spectrum_at(params, stream, i)?;
                vals.extend(s.eigenvalues.iter().map(|z| z.norm_sqr()));
            }
            Ok(vals)
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )?;
    // disjoint stream space for the radial draws
    let radial_base = RngStream::new(base.seed, base.stream_id + (1u64 << 32));
    let mut radial: Vec<f64> = run_batches(
        n_samples,
        radial_base,
        threads,
        |stream, count| {
            let mut rng = stream.rng();
            let mut vals = Vec::with_capacity(count * params.n());
            for _ in 0..count {
                vals.extend(sampler.sample(&mut rng));
            }
            Ok(vals)
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )?;

    let mut report = ComparisonReport::new("kostlan_oracle_equivalence", params, n_samples, base, threads);
    let ks = stats::ks_two_sample(&mut eig, &mut radial);
    report.pass = ks.p_value > defaults::KS_MIN_P;
    report.ks = Some(ks);
    report
        .notes
        .push("two-sample KS on pooled squared moduli; within-sample repulsion makes the p-value approximate".into());
    Ok(report)
}

/// Histograms the scaled edge coordinate `x = sqrt(N) (|z| - mu^{M/2})`,
/// fits `c1 erfc(c2 x + c3)` to the scaled density and arbitrates between
/// the full-bulk and half-bulk edge amplitudes.
///
/// Two exact factors are divided out of the observed counts before the
/// fit: the annular measure `2 pi r sqrt(N)` and the tilt
/// `rho_cont(r) / rho_cont(edge)` of the analytically continued
/// macroscopic density (the finite-N density near the edge is that smooth
/// shape times the universal erfc cut; without the tilt division the
/// macroscopic variation across the scaled window swamps the profile).
pub fn run_edge_profile(
    params: &EnsembleParams,
    n_samples: usize,
    base: RngStream,
    threads: usize,
) -> Result<ComparisonReport> {
    let strong = StrongLimitParams::from_params(params)?;
    let n = params.n() as f64;
    let radius = strong.support_radius();
    let c = strong.edge_coefficient();
    let slope = (2.0 * c).sqrt();
    let amp_full = c / std::f64::consts::PI;
    let amp_half = 0.5 * amp_full;
    let s = 1.0 / slope; // width of the erfc transition in x units

    let bins = 48usize;
    let (x_lo, x_hi) = (-8.0 * s, 4.0 * s);
    let proto = RadialHistogram::new(x_lo, x_hi, bins);
    let hist = fold_histogram(params, n_samples, base, threads, &proto, |smp, h| {
        for z in &smp.eigenvalues {
            h.record(n.sqrt() * (z.norm() - radius));
        }
    })?;

    let mut report = ComparisonReport::new("edge_profile_erfc_fit", params, n_samples, base, threads);
    let rho_edge = crate::asymptotics::macro_density_continued(&strong, radius)?;
    let dx = hist.bin_width();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut sigmas = Vec::new();
    for i in 0..bins {
        let (lo, hi) = hist.bin_edges(i);
        let x = 0.5 * (lo + hi);
        let r = radius + x / n.sqrt();
        let tilt = crate::asymptotics::macro_density_continued(&strong, r)? / rho_edge;
        let jac = 2.0 * std::f64::consts::PI * r * n.sqrt();
        let denom = n_samples as f64 * dx * jac * tilt;
        let observed = hist.counts()[i];
        let density = observed as f64 / denom;
        let sigma = (observed.max(1) as f64).sqrt() / denom;
        let model = amp_half * crate::special::erfc(slope * x);
        report.bins.push(BinRow { lo, hi, observed, expected: model * denom });
        if observed >= 16 {
            xs.push(x);
            ys.push(density);
            sigmas.push(sigma);
        }
    }

    let fit = stats::fit_erfc(&xs, &ys, &sigmas, [amp_half, slope, 0.0])?;
    let d_full = (fit.c1 - amp_full).abs();
    let d_half = (fit.c1 - amp_half).abs();
    let (decision, separation) = if d_half <= d_full {
        ("half-bulk", d_full / fit.sigma[0].max(1e-300))
    } else {
        ("full-bulk", d_half / fit.sigma[0].max(1e-300))
    };
    let slope_rel_err = (fit.c2 - slope).abs() / slope;
    report.scalars.insert("slope_rel_err".into(), slope_rel_err);
    report.scalars.insert("fitted_over_half".into(), fit.c1 / amp_half);
    let pass = slope_rel_err < defaults::EDGE_SLOPE_MAX_REL_ERROR
        && separation >= defaults::EDGE_DECISION_MIN_SIGMA
        && fit.weighted_rms < 3.0;
    report.edge_fit = Some(EdgeFitReport {
        fit,
        predicted_slope: slope,
        predicted_amplitude_full: amp_full,
        predicted_amplitude_half: amp_half,
        decision: decision.to_string(),
        separation_sigma: separation,
    });
    report.pass = pass;
    report.fill_deviations();
    report.notes.push(
        "expected column uses the half-bulk amplitude; the fit block records the arbitration".into(),
    );
    Ok(report)
}

/// Histograms the weak-limit coordinate `x = N (1 - |z|)` and compares it
/// against the weak edge density by chi-square.
///
/// Measure and instantiation (the limit formulas leave both open up to
/// `1 + O(1/N)` factors; every choice below is exact or asymptotically
/// equivalent and is fixed here once):
///
/// * annular measure: exactly `2 pi r dr` with `r = 1 - x/N`;
/// * weight factor: `(prod L_j!) (2 ln(1/r))^{n-1} / (pi (n-1)!)` — the
///   weak form evaluated at the exact log coordinate (for `L_j = 1` this
///   is the exact finite-N weight);
/// * series factor: `N^{n+1} / (prod L_j!) * D_n(t)` at the resummed
///   argument `t = N sigma (1 - sigma/(n+1))`, `sigma = 2 ln(1/r)`, which
///   absorbs the leading large-`t` correction of the truncated series.
///
/// The combination reduces to `2 pi N rho_weak(x) dx` as `N -> infinity`.
pub fn run_weak_profile(
    params: &EnsembleParams,
    n_samples: usize,
    base: RngStream,
    threads: usize,
) -> Result<ComparisonReport> {
    let weak = WeakLimitParams::from_params(params);
    let n = params.n() as f64;
    let n_total = weak.l_total() as f64;
    let bins = 48usize;
    let x_hi = (8.0 * n_total).min(0.35 * n);
    let proto = RadialHistogram::new(0.0, x_hi, bins);
    let hist = fold_histogram(params, n_samples, base, threads, &proto, |smp, h| {
        for z in &smp.eigenvalues {
            h.record(n * (1.0 - z.norm()));
        }
    })?;

    let order = weak.l_total();
    let ln_norm = (order as f64 + 1.0) * n.ln()
        - crate::logspace::ln_factorial(order as u64 - 1)
        - std::f64::consts::PI.ln();
    let density_r = move |r: f64| -> f64 {
        let sigma = 2.0 * (1.0 / r).ln();
        let t = n * sigma * (1.0 - sigma / (order as f64 + 1.0));
        let d = crate::asymptotics::d_n(order, Complex64::new(t, 0.0)).re;
        if d <= 0.0 {
            return 0.0;
        }
        let ln_mag = ln_norm + (order as f64 - 1.0) * sigma.ln() + d.ln();
        2.0 * std::f64::consts::PI * r * ln_mag.exp()
    };

    let mut report = ComparisonReport::new("weak_edge_profile", params, n_samples, base, threads);
    let mut expected = Vec::with_capacity(bins);
    for i in 0..bins {
        let (lo, hi) = hist.bin_edges(i);
        let (r_lo, r_hi) = (1.0 - hi / n, 1.0 - lo / n);
        let mass = quad::integrate(&density_r, r_lo, r_hi, 1e-11, 1e-9)? * n_samples as f64;
        expected.push(mass);
        report.bins.push(BinRow { lo, hi, observed: hist.counts()[i], expected: mass });
    }
    let chi = stats::chi_square_binned(hist.counts(), &expected, defaults::MIN_EXPECTED_PER_BIN);
    report.pass = chi.p_value > defaults::CHI_SQUARE_MIN_P;
    report.chi_square = Some(chi);
    report.fill_deviations();
    Ok(report)
}

/// Counts eigenvalues inside the shrinking disk
/// `|z| < (1 - c / sqrt(N))^{M/2}` for two matrix sizes and checks the
/// `N^{-1/2}` halving of the interior fraction: the observed ratio must sit
/// within `3 sigma` of the exact finite-N ratio, which itself must be close
/// to 2 when the sizes differ by a factor 4.
pub fn run_interior_halving(
    params_small: &EnsembleParams,
    params_large: &EnsembleParams,
    n_samples_small: usize,
    n_samples_large: usize,
    c: f64,
    base: RngStream,
    threads: usize,
) -> Result<ComparisonReport> {
    let frac = |params: &EnsembleParams, n_samples: usize, stream_off: u64| -> Result<(f64, f64, f64)> {
        let m = params.num_factors() as f64;
        let n = params.n() as f64;
        let r = (1.0 - c / n.sqrt()).powf(m / 2.0);
        let fk = FiniteKernel::new(params);
        let expected = fk.radial_mass(0.0, r)? / n;
        let inside: u64 = run_batches(
            n_samples,
            RngStream::new(base.seed, base.stream_id + stream_off),
            threads,
            |stream, count| {
                let mut acc = 0u64;
                for i in 0..count {
                    let s = sample_product_spectrum_at(params, stream, i)?;
                    acc += s.eigenvalues.iter().filter(|z| z.norm() < r).count() as u64;
                }
                Ok(acc)
            },
            |a, b| a + b,
        )?;
        let draws = (params.n() * n_samples) as f64;
        let p_hat = inside as f64 / draws;
        // iid binomial bound; determinantal repulsion only shrinks it
        let sigma = (p_hat.max(1e-12) * (1.0 - p_hat) / draws).sqrt();
        Ok((p_hat, expected, sigma))
    };

    let (p_small, q_small, s_small) = frac(params_small, n_samples_small, 0)?;
    let (p_large, q_large, s_large) = frac(params_large, n_samples_large, 1 << 33)?;

    let ratio_obs = p_small / p_large;
    let ratio_exact = q_small / q_large;
    let sigma_ratio =
        ratio_obs * ((s_small / p_small).powi(2) + (s_large / p_large).powi(2)).sqrt();

    let mut report =
        ComparisonReport::new("weak_interior_halving", params_small, n_samples_small, base, threads);
    report.scalars.insert("shrink_constant_c".into(), c);
    report.scalars.insert("fraction_small_n".into(), p_small);
    report.scalars.insert("fraction_large_n".into(), p_large);
    report.scalars.insert("expected_small_n".into(), q_small);
    report.scalars.insert("expected_large_n".into(), q_large);
    report.scalars.insert("ratio_observed".into(), ratio_obs);
    report.scalars.insert("ratio_exact".into(), ratio_exact);
    report.scalars.insert("ratio_sigma".into(), sigma_ratio);
    report.notes.push(format!(
        "interior disk radius (1 - {c}/sqrt(N))^(M/2); large run uses N = {}",
        params_large.n()
    ));
    report.pass = (ratio_obs - ratio_exact).abs() < 3.0 * sigma_ratio
        && (ratio_exact - 2.0).abs() < 0.25;
    Ok(report)
}

/// Rescales spectra by `(L/N)^{M/2}` and tests the transformed pooled
/// moduli `u = |zhat|^{2/M}` against the uniform law on `[0, 1]` (the
/// macroscopic density in the Ginibre limit `mu -> 0`) with a one-sample
/// KS test.
///
/// At finite N an `O(1/sqrt(N))` fraction of eigenvalues sits beyond the
/// macroscopic edge, so the pooled sample size must stay moderate for the
/// asymptotic p-value to be meaningful; the report records the beyond-edge
/// fraction separately.
pub fn run_ginibre_crossover(
    n: usize,
    ratio: f64,
    m: usize,
    n_samples: usize,
    base: RngStream,
    threads: usize,
) -> Result<ComparisonReport> {
    if ratio < 10.0 {
        return Err(Error::Config(format!(
            "the Ginibre crossover needs L/N >= 10, got {ratio}"
        )));
    }
    let l = (ratio * n as f64).round() as usize;
    let params = EnsembleParams::equal(n, m, l)?;
    let scale = (l as f64 / n as f64).powf(m as f64 / 2.0);

    let mut us: Vec<f64> = run_batches(
        n_samples,
        base,
        threads,
        |stream, count| {
            let mut vals = Vec::with_capacity(count * n);
            for i in 0..count {
                let s = sample_product_spectrum_at(&params, stream, i)?;
                vals.extend(
                    s.eigenvalues
                        .iter()
                        .map(|z| (z.norm() * scale).powf(2.0 / m as f64)),
                );
            }
            Ok(vals)
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )?;

    let mut report = ComparisonReport::new("ginibre_crossover", &params, n_samples, base, threads);
    let beyond = us.iter().filter(|&&u| u > 1.0).count() as f64 / us.len() as f64;
    let ks = stats::ks_one_sample(&mut us, |u| u.clamp(0.0, 1.0));
    report.scalars.insert("rescale_factor".into(), scale);
    report.scalars.insert("fraction_beyond_edge".into(), beyond);
    report.pass = ks.p_value > defaults::KS_MIN_P;
    report.ks = Some(ks);
    report.notes.push(
        "one-sample KS of |zhat|^{2/M} against U(0,1); finite-N edge smearing dominates at large pooled sizes".into(),
    );
    Ok(report)
}
