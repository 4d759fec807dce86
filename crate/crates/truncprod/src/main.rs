//! Command-line front end: evaluation, sampling and verification
//! subcommands over the truncated-product ensemble library.
//!
//! Exit codes: 0 = pass, 1 = statistical failure, 2 = usage or
//! configuration error, 3 = numerical-engine error.

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use truncprod::asymptotics::{
    edge_density, macro_density, origin_density, weak_density, EdgeConvention, StrongLimitParams,
    WeakLimitParams,
};
use truncprod::error::Error;
use truncprod::harness::{
    run_density_comparison, run_edge_profile, run_ginibre_crossover, run_interior_halving,
    run_kostlan_check, run_weak_profile, ComparisonReport,
};
use truncprod::kernel::{CorrelationRequest, FiniteKernel};
use truncprod::sampler::{sample_product_spectrum, write_samples_csv, RngStream};
use truncprod::weights::build_weight;
use truncprod::EnsembleParams;

#[derive(Parser)]
#[command(
    name = "truncprod",
    about = "Eigenvalue statistics for products of truncated Haar-unitary matrices",
    version
)]
struct Cli {
    /// RNG seed shared by all sampling subcommands
    #[arg(long, global = true, default_value_t = 20260810)]
    seed: u64,

    /// Worker threads for Monte Carlo runs (0 = all available)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Output file (default: stdout); verify treats this as a directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for evaluation subcommands
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Regime {
    Finite,
    Macro,
    Edge,
    Origin,
    Weak,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Convention {
    Diagonal,
    Modulus,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the one-point weight Omega(x) on a grid over (0, 1]
    Weight {
        /// number of factors M (defaults to the length of --L)
        #[arg(long = "M")]
        m: Option<usize>,
        /// truncations: a single L for all factors or a comma list L1,L2,...
        #[arg(long = "L", value_delimiter = ',', required = true)]
        l: Vec<usize>,
        /// number of grid rows; x_i = i / grid
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// Evaluate the truncated kernel series T(x)
    Series {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        l: Vec<usize>,
        /// series order (defaults to N-1)
        #[arg(long)]
        upper: Option<usize>,
        /// real part of the argument
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        /// imaginary part of the argument
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xi: f64,
    },
    /// Evaluate the finite-N kernel K(u, v)
    Kernel {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        l: Vec<usize>,
        /// first argument as re,im
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        /// second argument as re,im
        #[arg(long, allow_hyphen_values = true)]
        v: String,
    },
    /// Tabulate a level density (finite-N or a limiting regime)
    Density {
        #[arg(long, value_enum)]
        regime: Regime,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long = "L", value_delimiter = ',')]
        l: Vec<usize>,
        /// mu = N/(N+L) for the macro and edge regimes
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        /// first grid coordinate (regime-specific default)
        #[arg(long, allow_hyphen_values = true)]
        coord_min: Option<f64>,
        /// last grid coordinate (regime-specific default)
        #[arg(long, allow_hyphen_values = true)]
        coord_max: Option<f64>,
        /// emit inf at log-singular origin points instead of failing
        #[arg(long, default_value_t = false)]
        allow_singular: bool,
        /// erfc argument convention for the edge profile
        #[arg(long, value_enum, default_value_t = Convention::Diagonal)]
        convention: Convention,
    },
    /// Evaluate a k-point correlation determinant
    Correlate {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        l: Vec<usize>,
        /// points as re,im;re,im;...
        #[arg(long, allow_hyphen_values = true)]
        points: String,
    },
    /// Draw spectra from the matrix ensemble and dump them as CSV
    Sample {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        l: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Run Monte Carlo verification suites against the analytic formulas
    Verify {
        /// suite name: default|density|kostlan|edge|weak|interior|ginibre|all
        #[arg(long)]
        suite: Option<String>,
        /// key = value configuration file (overridden by explicit flags)
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Configuration of a verify run; round-trips losslessly through its
/// key = value file representation, unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RunConfig {
    suite: String,
    n: Option<usize>,
    m: Option<usize>,
    l: Option<Vec<usize>>,
    samples: Option<usize>,
    bins: Option<usize>,
    seed: u64,
    threads: usize,
    out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suite: "default".into(),
            n: None,
            m: None,
            l: None,
            samples: None,
            bins: None,
            seed: 20260810,
            threads: 0,
            out_dir: None,
        }
    }
}

impl RunConfig {
    fn parse(text: &str) -> Result<Self, Error> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got {raw:?}", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| Error::Config(format!("line {}: bad {what}: {value:?}", lineno + 1));
            match key {
                "suite" => cfg.suite = value.to_string(),
                "n" => cfg.n = Some(value.parse().map_err(|_| bad("n"))?),
                "m" => cfg.m = Some(value.parse().map_err(|_| bad("m"))?),
                "l" => {
                    let ls: Result<Vec<usize>, _> =
                        value.split(',').map(|v| v.trim().parse()).collect();
                    cfg.l = Some(ls.map_err(|_| bad("l"))?);
                }
                "samples" => cfg.samples = Some(value.parse().map_err(|_| bad("samples"))?),
                "bins" => cfg.bins = Some(value.parse().map_err(|_| bad("bins"))?),
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "threads" => cfg.threads = value.parse().map_err(|_| bad("threads"))?,
                "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    fn to_file_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("suite = {}\n", self.suite));
        if let Some(n) = self.n {
            out.push_str(&format!("n = {n}\n"));
        }
        if let Some(m) = self.m {
            out.push_str(&format!("m = {m}\n"));
        }
        if let Some(l) = &self.l {
            let ls: Vec<String> = l.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("l = {}\n", ls.join(",")));
        }
        if let Some(s) = self.samples {
            out.push_str(&format!("samples = {s}\n"));
        }
        if let Some(b) = self.bins {
            out.push_str(&format!("bins = {b}\n"));
        }
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("threads = {}\n", self.threads));
        if let Some(dir) = &self.out_dir {
            out.push_str(&format!("out_dir = {}\n", dir.display()));
        }
        out
    }
}

fn parse_truncations(m: Option<usize>, l: &[usize]) -> Result<EnsembleParams, Error> {
    build_params(1, m, l).map(|(_, params)| params)
}

/// Resolves (--N, --M, --L) into ensemble parameters: a single L is
/// replicated M times, a list fixes M to its length.
fn build_params(n: usize, m: Option<usize>, l: &[usize]) -> Result<(usize, EnsembleParams), Error> {
    if l.is_empty() {
        return Err(Error::Config("at least one truncation L is required".into()));
    }
    let truncations = if l.len() == 1 {
        vec![l[0]; m.unwrap_or(1)]
    } else {
        if let Some(m) = m {
            if m != l.len() {
                return Err(Error::Config(format!(
                    "M = {m} contradicts the {} entries of --L",
                    l.len()
                )));
            }
        }
        l.to_vec()
    };
    Ok((n, EnsembleParams::new(n, truncations)?))
}

fn parse_complex(text: &str) -> Result<Complex64, Error> {
    let parts: Vec<&str> = text.split(',').collect();
    let bad = || Error::Config(format!("expected re or re,im, got {text:?}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(re.trim().parse().map_err(|_| bad())?, 0.0)),
        [re, im] => Ok(Complex64::new(
            re.trim().parse().map_err(|_| bad())?,
            im.trim().parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

fn parse_points(text: &str) -> Result<Vec<Complex64>, Error> {
    text.split(';').map(|p| parse_complex(p.trim())).collect()
}

/// Tabular output with an embedded configuration header; all numbers carry
/// 17 significant digits so doubles round-trip bit-faithfully.
struct Table {
    config: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn emit(&self, format: Format, out: Option<&Path>) -> Result<(), Error> {
        let text = match format {
            Format::Csv => {
                let mut s = String::new();
                for (k, v) in &self.config {
                    s.push_str(&format!("# {k}: {v}\n"));
                }
                s.push_str(&self.columns.join(","));
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let config: BTreeMap<&str, &str> =
                    self.config.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
                let rows: Vec<BTreeMap<&str, f64>> = self
                    .rows
                    .iter()
                    .map(|row| self.columns.iter().copied().zip(row.iter().copied()).collect())
                    .collect();
                serde_json::to_string_pretty(&serde_json::json!({
                    "config": config,
                    "columns": self.columns,
                    "rows": rows,
                }))
                .expect("table serialization cannot fail")
                    + "\n"
            }
        };
        match out {
            Some(path) => std::fs::write(path, text).map_err(Error::from)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Weight { m, l, grid } => {
            let params = parse_truncations(m, &l)?;
            if grid == 0 {
                return Err(Error::Config("grid must be positive".into()));
            }
            let table_fn = build_weight(&params);
            let mut rows = Vec::with_capacity(grid);
            for i in 1..=grid {
                let x = i as f64 / grid as f64;
                rows.push(vec![x, table_fn.eval(x)?]);
            }
            Table {
                config: vec![
                    ("command".into(), "weight".into()),
                    ("params".into(), params.to_string()),
                    ("grid".into(), grid.to_string()),
                ],
                columns: vec!["x", "omega"],
                rows,
            }
            .emit(cli.format, out)?;
            Ok(true)
        }
        Command::Series { n, m, l, upper, x, xi } => {
            let (_, params) = build_params(n, m, &l)?;
            let fk = FiniteKernel::new(&params);
            let upper = upper.unwrap_or(params.n() - 1);
            if upper >= params.n() {
                return Err(Error::Config(format!(
                    "series order {upper} exceeds N - 1 = {}",
                    params.n() - 1
                )));
            }
            let v = fk.truncated_series(upper, Complex64::new(x, xi));
            Table {
                config: vec![
                    ("command".into(), "series".into()),
                    ("params".into(), params.to_string()),
                    ("upper".into(), upper.to_string()),
                ],
                columns: vec!["x_re", "x_im", "t_re", "t_im"],
                rows: vec![vec![x, xi, v.re, v.im]],
            }
            .emit(cli.format, out)?;
            Ok(true)
        }
        Command::Kernel { n, m, l, u, v } => {
            let (_, params) = build_params(n, m, &l)?;
            let fk = FiniteKernel::new(&params);
            let (u, v) = (parse_complex(&u)?, parse_complex(&v)?);
            let k = fk.kernel_eval(u, v)?;
            Table {
                config: vec![
                    ("command".into(), "kernel".into()),
                    ("params".into(), params.to_string()),
                ],
                columns: vec!["u_re", "u_im", "v_re", "v_im", "k_re", "k_im"],
                rows: vec![vec![u.re, u.im, v.re, v.im, k.re, k.im]],
            }
            .emit(cli.format, out)?;
            Ok(true)
        }
        Command::Density {
            regime,
            n,
            m,
            l,
            mu,
            grid,
            coord_min,
            coord_max,
            allow_singular,
            convention,
        } => {
            run_density(
                regime,
                n,
                m,
                &l,
                mu,
                grid,
                coord_min,
                coord_max,
                allow_singular,
                convention,
                cli.format,
                out,
            )?;
            Ok(true)
        }
        Command::Correlate { n, m, l, points } => {
            let (_, params) = build_params(n, m, &l)?;
            let fk = FiniteKernel::new(&params);
            let pts = parse_points(&points)?;
            let req = CorrelationRequest::new(pts.clone())?;
            let r = fk.correlation_k(&req)?;
            let mut config = vec![
                ("command".into(), "correlate".into()),
                ("params".into(), params.to_string()),
                ("k".into(), pts.len().to_string()),
            ];
            config.push((
                "points".into(),
                pts.iter().map(|z| format!("{},{}", z.re, z.im)).collect::<Vec<_>>().join(";"),
            ));
            Table { config, columns: vec!["r_k"], rows: vec![vec![r]] }.emit(cli.format, out)?;
            Ok(true)
        }
        Command::Sample { n, m, l, samples } => {
            let (_, params) = build_params(n, m, &l)?;
            let mut all = Vec::with_capacity(samples);
            for i in 0..samples {
                all.push(sample_product_spectrum(&params, RngStream::new(cli.seed, i as u64))?);
            }
            match out {
                Some(path) => write_samples_csv(path, &all)?,
                None => {
                    let tmp = std::env::temp_dir().join("truncprod_samples.csv");
                    write_samples_csv(&tmp, &all)?;
                    let text = std::fs::read_to_string(&tmp)?;
                    print!("{text}");
                    let _ = std::fs::remove_file(&tmp);
                }
            }
            Ok(true)
        }
        Command::Verify { suite, config } => {
            let mut cfg = match config {
                Some(path) => RunConfig::parse(&std::fs::read_to_string(&path)?)?,
                None => RunConfig::default(),
            };
            if let Some(name) = suite {
                cfg.suite = name;
            }
            // explicit global flags override the file
            if cli.seed != 20260810 {
                cfg.seed = cli.seed;
            }
            if cli.threads != 0 {
                cfg.threads = cli.threads;
            }
            if let Some(dir) = &cli.out {
                cfg.out_dir = Some(dir.clone());
            }
            run_verify(&cfg)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_density(
    regime: Regime,
    n: Option<usize>,
    m: Option<usize>,
    l: &[usize],
    mu: Option<f64>,
    grid: usize,
    coord_min: Option<f64>,
    coord_max: Option<f64>,
    allow_singular: bool,
    convention: Convention,
    format: Format,
    out: Option<&Path>,
) -> Result<(), Error> {
    if grid == 0 {
        return Err(Error::Config("grid must be positive".into()));
    }
    let linspace = |lo: f64, hi: f64| -> Vec<f64> {
        if grid == 1 {
            return vec![lo];
        }
        (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect()
    };
    let mut config: Vec<(String, String)> = vec![("command".into(), "density".into())];
    let mut rows = Vec::with_capacity(grid);

    match regime {
        Regime::Finite => {
            let n = n.ok_or_else(|| Error::Config("--N is required for the finite regime".into()))?;
            let (_, params) = build_params(n, m, l)?;
            let fk = FiniteKernel::new(&params);
            let pts = linspace(
                coord_min.unwrap_or(1.0 / (grid as f64 + 1.0)),
                coord_max.unwrap_or(1.0 - 1.0 / (grid as f64 + 1.0)),
            );
            for r in pts {
                let value = match fk.density_radial(r) {
                    Ok(v) => v,
                    Err(Error::SingularAtOrigin(_)) if allow_singular => f64::INFINITY,
                    Err(e) => return Err(e),
                };
                rows.push(vec![r, value]);
            }
            config.push(("regime".into(), "finite".into()));
            config.push(("params".into(), params.to_string()));
            if let Ok(mass) = fk.total_mass() {
                config.push(("mass_check".into(), format!("{mass:.12e}")));
            }
        }
        Regime::Macro => {
            let mu = mu.ok_or_else(|| Error::Config("--mu is required for the macro regime".into()))?;
            let m = m.unwrap_or(1);
            let p = StrongLimitParams::new(mu, m)?;
            let edge = p.support_radius();
            let pts = linspace(
                coord_min.unwrap_or(edge / (grid as f64 + 1.0)),
                coord_max.unwrap_or(edge * (1.0 - 1e-9)),
            );
            for r in pts {
                let value = match macro_density(&p, Complex64::new(r, 0.0)) {
                    Ok(v) => v,
                    Err(Error::SingularAtOrigin(_)) if allow_singular => f64::INFINITY,
                    Err(e) => return Err(e),
                };
                rows.push(vec![r, value]);
            }
            config.push(("regime".into(), "macro".into()));
            config.push(("mu".into(), format!("{mu}")));
            config.push(("m".into(), m.to_string()));
        }
        Regime::Edge => {
            let mu = mu.ok_or_else(|| Error::Config("--mu is required for the edge regime".into()))?;
            let m = m.unwrap_or(1);
            let p = StrongLimitParams::new(mu, m)?;
            let conv = match convention {
                Convention::Diagonal => EdgeConvention::KernelDiagonal,
                Convention::Modulus => EdgeConvention::Modulus,
            };
            let pts = linspace(coord_min.unwrap_or(-4.0), coord_max.unwrap_or(4.0));
            for x in pts {
                rows.push(vec![x, edge_density(&p, x, conv)]);
            }
            config.push(("regime".into(), "edge".into()));
            config.push(("mu".into(), format!("{mu}")));
            config.push(("m".into(), m.to_string()));
            config.push((
                "convention".into(),
                match conv {
                    EdgeConvention::KernelDiagonal => "diagonal".into(),
                    EdgeConvention::Modulus => "modulus".into(),
                },
            ));
        }
        Regime::Origin => {
            let m = m.ok_or_else(|| Error::Config("--M is required for the origin regime".into()))?;
            let lo_default = 3.0 / grid as f64;
            let pts = linspace(coord_min.unwrap_or(lo_default), coord_max.unwrap_or(3.0));
            for r in pts {
                let value = if r == 0.0 {
                    if m == 1 {
                        origin_density(1, 0.0)?
                    } else if allow_singular {
                        f64::INFINITY
                    } else {
                        return Err(Error::SingularAtOrigin(
                            "origin density diverges at 0 for M >= 2 (use --allow-singular)".into(),
                        ));
                    }
                } else {
                    origin_density(m, r)?
                };
                rows.push(vec![r, value]);
            }
            config.push(("regime".into(), "origin".into()));
            config.push(("m".into(), m.to_string()));
        }
        Regime::Weak => {
            let params = parse_truncations(m, l)?;
            let weak = WeakLimitParams::from_params(&params);
            let hi_default = 6.0 * weak.l_total() as f64 + 2.0;
            let pts = linspace(coord_min.unwrap_or(0.0), coord_max.unwrap_or(hi_default));
            for x in pts {
                rows.push(vec![x, weak_density(&weak, Complex64::new(x, 0.0))]);
            }
            config.push(("regime".into(), "weak".into()));
            config.push(("l_total".into(), weak.l_total().to_string()));
            config.push(("m".into(), weak.num_factors().to_string()));
        }
    }

    Table { config, columns: vec!["coordinate", "density"], rows }.emit(format, out)
}

fn suite_reports(cfg: &RunConfig) -> Result<Vec<ComparisonReport>, Error> {
    let base = RngStream::new(cfg.seed, 0);
    let threads = cfg.threads;
    let params_or = |n_def: usize, m_def: usize, l_def: usize| -> Result<EnsembleParams, Error> {
        match &cfg.l {
            Some(ls) if ls.len() > 1 => EnsembleParams::new(cfg.n.unwrap_or(n_def), ls.clone()),
            Some(ls) => EnsembleParams::equal(cfg.n.unwrap_or(n_def), cfg.m.unwrap_or(m_def), ls[0]),
            None => EnsembleParams::equal(cfg.n.unwrap_or(n_def), cfg.m.unwrap_or(m_def), l_def),
        }
    };

    let mut reports = Vec::new();
    let push_suite = |name: &str, reports: &mut Vec<ComparisonReport>| -> Result<(), Error> {
        match name {
            "density" => {
                let params = params_or(20, 2, 3)?;
                reports.push(run_density_comparison(
                    &params,
                    cfg.samples.unwrap_or(10_000),
                    cfg.bins.unwrap_or(40),
                    base,
                    threads,
                )?);
            }
            "kostlan" => {
                let params = params_or(20, 2, 3)?;
                reports.push(run_kostlan_check(
                    &params,
                    cfg.samples.unwrap_or(2_000),
                    base,
                    threads,
                )?);
            }
            "edge" => {
                for m in [1usize, 2] {
                    let n = cfg.n.unwrap_or(100);
                    let l = cfg.l.as_ref().map(|ls| ls[0]).unwrap_or(100);
                    let params = EnsembleParams::equal(n, cfg.m.unwrap_or(m), l)?;
                    reports.push(run_edge_profile(
                        &params,
                        cfg.samples.unwrap_or(10_000),
                        base,
                        threads,
                    )?);
                    if cfg.m.is_some() {
                        break; // an explicit M runs once
                    }
                }
            }
            "weak" => {
                for m in [1usize, 2] {
                    let n = cfg.n.unwrap_or(100);
                    let l = cfg.l.as_ref().map(|ls| ls[0]).unwrap_or(1);
                    let params = EnsembleParams::equal(n, cfg.m.unwrap_or(m), l)?;
                    reports.push(run_weak_profile(
                        &params,
                        cfg.samples.unwrap_or(10_000),
                        base,
                        threads,
                    )?);
                    if cfg.m.is_some() {
                        break;
                    }
                }
            }
            "interior" => {
                let n_small = cfg.n.unwrap_or(100);
                let small = EnsembleParams::equal(n_small, cfg.m.unwrap_or(1), 1)?;
                let large = EnsembleParams::equal(4 * n_small, cfg.m.unwrap_or(1), 1)?;
                reports.push(run_interior_halving(
                    &small,
                    &large,
                    cfg.samples.unwrap_or(1_000),
                    cfg.samples.map(|s| (s / 7).max(20)).unwrap_or(150),
                    0.5,
                    base,
                    threads,
                )?);
            }
            "ginibre" => {
                for m in [1usize, 2] {
                    // finite-N edge smearing limits the meaningful pooled KS
                    // size; see the report note
                    reports.push(run_ginibre_crossover(
                        cfg.n.unwrap_or(30),
                        20.0,
                        cfg.m.unwrap_or(m),
                        cfg.samples.unwrap_or(12),
                        base,
                        threads,
                    )?);
                    if cfg.m.is_some() {
                        break;
                    }
                }
            }
            other => {
                return Err(Error::Config(format!("unknown verify suite {other:?}")));
            }
        }
        Ok(())
    };

    match cfg.suite.as_str() {
        "default" => {
            push_suite("density", &mut reports)?;
            push_suite("kostlan", &mut reports)?;
        }
        "all" => {
            for name in ["density", "kostlan", "edge", "weak", "interior", "ginibre"] {
                push_suite(name, &mut reports)?;
            }
        }
        name => push_suite(name, &mut reports)?,
    }
    Ok(reports)
}

fn run_verify(cfg: &RunConfig) -> Result<bool, Error> {
    let reports = suite_reports(cfg)?;
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        let effective = dir.join("effective_config.txt");
        std::fs::write(&effective, cfg.to_file_string())?;
    }
    let mut all_pass = true;
    let mut stdout = std::io::stdout().lock();
    for (idx, report) in reports.iter().enumerate() {
        let verdict = if report.pass { "PASS" } else { "FAIL" };
        writeln!(stdout, "{verdict} {} [{}]", report.test_name, report.params)
            .map_err(Error::from)?;
        if let Some(dir) = &cfg.out_dir {
            let stem = format!("{:02}_{}", idx, report.test_name);
            report.write_json(&dir.join(format!("{stem}.json")))?;
            if !report.bins.is_empty() {
                report.write_histogram_csv(&dir.join(format!("{stem}.csv")))?;
            }
        }
        if !report.pass {
            all_pass = false;
            eprintln!("first failing report: {}", report.test_name);
        }
    }
    Ok(all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Error::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Error::Io(err)) => {
            eprintln!("i/o error: {err}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
    }
}
