//! Command-line experiment runner.
//!
//! Four experiments: squeezing sweeps and bipartition scans over the example
//! networks (CSV or JSON tables), randomized checks of the purity bound, and
//! a cross-check of the analytic formulas against the Fock simulator.
//!
//! Settings come from an optional JSON file; every field can be overridden
//! by a long flag, and `CVD_SEED` overrides the seed from the file.

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fock::{self, FockArray};
use crate::gaussian::{bogoliubov_row, GaussianState, Subsystem};
use crate::networks::{self, ChainSpec, GraphSpec};
use crate::photon::{
    entanglement_increase, relative_purity, relative_purity_closed_form, subtract_reduced_wigner, thermal_traces,
    within_entanglement_bound, PhotonOp,
};
use crate::symplectic::{random_symplectic_with, CircuitElement};

/// Scans enumerate `2^{m−1}` bipartitions; refuse beyond this.
pub const MAX_SCAN_MODES: usize = 20;
/// Floor on the denominator of relative errors, so that quantities close to
/// zero are compared absolutely.
pub const RELATIVE_FLOOR: f64 = 1e-3;
pub const ORACLE_TOL: f64 = 1e-6;
pub const TRACE_TOL: f64 = 1e-8;
pub const TWO_PATH_TOL: f64 = 1e-8;
/// Leakage allowed in oracle cases.
pub const ORACLE_LEAK_TOL: f64 = 1e-10;
/// Smallest accepted ratio in `verify-bounds`.
pub const RATIO_FLOOR: f64 = 0.5 - 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SweepSqueezing,
    ScanBipartitions,
    VerifyBounds,
    OracleCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Chain,
    Graph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug, Clone, Default)]
#[command(name = "cvdistill", version, about = "Entanglement change under single-photon subtraction or addition")]
pub struct Args {
    /// JSON config file; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    #[arg(long, value_enum)]
    pub network: Option<NetworkKind>,
    /// Chain length
    #[arg(long)]
    pub modes: Option<usize>,
    /// Graph grid rows
    #[arg(long)]
    pub rows: Option<usize>,
    /// Graph grid columns
    #[arg(long)]
    pub cols: Option<usize>,
    /// Squeezing grid for the chain: `a,b,c` or `start:stop:step`
    #[arg(long)]
    pub r: Option<String>,
    /// Squeezing grid in dB for the graph
    #[arg(long)]
    pub db: Option<String>,
    /// Displacements of mode g: comma list of `re` or `re+imi`
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub g: Option<usize>,
    #[arg(long = "g-prime")]
    pub g_prime: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub kind: Option<PhotonOp>,
    /// Fock cutoff for oracle-check (default from the photon-number heuristic)
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Write the covariance and mean of the first network state as JSON
    #[arg(long = "dump-state")]
    pub dump_state: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default, Clone)]
#[serde(untagged)]
enum GridInput {
    List(Vec<f64>),
    Text(String),
    #[default]
    Missing,
}

#[derive(Deserialize, Debug, Default, Clone)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    experiment: Option<Experiment>,
    network: Option<NetworkKind>,
    modes: Option<usize>,
    rows: Option<usize>,
    cols: Option<usize>,
    adjacency: Option<Vec<Vec<f64>>>,
    r: Option<GridInput>,
    db: Option<GridInput>,
    alpha: Option<GridInput>,
    g: Option<usize>,
    g_prime: Option<usize>,
    seed: Option<u64>,
    trials: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
    kind: Option<PhotonOp>,
    cutoff: Option<usize>,
    dump_state: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NetworkConfig {
    Chain { modes: usize },
    Graph { adjacency: DMatrix<f64> },
}

impl NetworkConfig {
    pub fn modes(&self) -> usize {
        match self {
            NetworkConfig::Chain { modes } => *modes,
            NetworkConfig::Graph { adjacency } => adjacency.nrows(),
        }
    }

    fn adjacency(&self) -> DMatrix<f64> {
        match self {
            NetworkConfig::Chain { modes } => networks::chain_adjacency(*modes),
            NetworkConfig::Graph { adjacency } => adjacency.clone(),
        }
    }

    /// State for grid value `x` (r for the chain, dB for the graph).
    pub fn build(&self, x: f64, g: usize, alpha: Complex64) -> Result<GaussianState> {
        match self {
            NetworkConfig::Chain { modes } => {
                networks::build_chain(&ChainSpec { modes: *modes, r: x, g, alpha_g: alpha })
            }
            NetworkConfig::Graph { adjacency } => networks::build_graph(&GraphSpec {
                adjacency: adjacency.clone(),
                squeezing_db: x,
                g,
                alpha_g: alpha,
            }),
        }
    }
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub network: NetworkConfig,
    pub kind: PhotonOp,
    /// `r` values for the chain, dB values for the graph.
    pub grid: Vec<f64>,
    pub alphas: Vec<Complex64>,
    pub g: usize,
    pub g_prime: usize,
    pub seed: u64,
    pub trials: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub cutoff: Option<usize>,
    pub dump_state: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults for an experiment on the 10-mode chain.
    pub fn new(experiment: Experiment) -> Self {
        let network = NetworkConfig::Chain { modes: 10 };
        let g = networks::default_chain_mode(10);
        Self {
            experiment,
            g_prime: networks::first_neighbour(&network.adjacency(), g).unwrap_or(g),
            network,
            kind: PhotonOp::Subtract,
            grid: default_grid(experiment, NetworkKind::Chain),
            alphas: default_alphas(experiment),
            g,
            seed: 0,
            trials: default_trials(experiment),
            out: None,
            format: default_format(experiment),
            cutoff: None,
            dump_state: None,
        }
    }

    /// Merges defaults, the config file, `CVD_SEED` and flags, in increasing priority.
    pub fn resolve(args: &Args, env_seed: Option<&str>) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let experiment = args
            .experiment
            .or(file.experiment)
            .ok_or_else(|| Error::Config("no experiment given (use --experiment or the config file)".into()))?;
        let kind_of_network = args.network.or(file.network).unwrap_or(NetworkKind::Chain);
        let network = match kind_of_network {
            NetworkKind::Chain => {
                if file.adjacency.is_some() || args.rows.or(file.rows).is_some() || args.cols.or(file.cols).is_some() {
                    return Err(Error::Config("rows, cols and adjacency apply to the graph network".into()));
                }
                NetworkConfig::Chain { modes: args.modes.or(file.modes).unwrap_or(10) }
            }
            NetworkKind::Graph => {
                if args.modes.or(file.modes).is_some() {
                    return Err(Error::Config("modes applies to the chain network; use rows and cols".into()));
                }
                let adjacency = match (&file.adjacency, args.rows.or(file.rows), args.cols.or(file.cols)) {
                    (Some(rows), None, None) => adjacency_from_rows(rows)?,
                    (Some(_), _, _) => {
                        return Err(Error::Config("give either adjacency or rows/cols, not both".into()));
                    }
                    (None, r, c) => networks::grid_adjacency(r.unwrap_or(3), c.unwrap_or(3)),
                };
                NetworkConfig::Graph { adjacency }
            }
        };
        let m = network.modes();
        if m == 0 {
            return Err(Error::Config("network has no modes".into()));
        }

        let r_grid = pick_grid(args.r.as_deref(), file.r.as_ref())?;
        let db_grid = pick_grid(args.db.as_deref(), file.db.as_ref())?;
        let grid = match (kind_of_network, r_grid, db_grid) {
            (NetworkKind::Chain, _, Some(_)) => return Err(Error::Config("--db applies to the graph network".into())),
            (NetworkKind::Graph, Some(_), _) => return Err(Error::Config("--r applies to the chain network".into())),
            (_, Some(grid), None) | (_, None, Some(grid)) => grid,
            (_, None, None) => default_grid(experiment, kind_of_network),
        };
        let alphas = match (&args.alpha, &file.alpha) {
            (Some(text), _) => parse_alphas(text)?,
            (None, Some(GridInput::Text(text))) => parse_alphas(text)?,
            (None, Some(GridInput::List(v))) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            _ => default_alphas(experiment),
        };
        if alphas.is_empty() {
            return Err(Error::Config("alpha list is empty".into()));
        }

        let g = args.g.or(file.g).unwrap_or(match &network {
            NetworkConfig::Chain { modes } => networks::default_chain_mode(*modes),
            NetworkConfig::Graph { .. } => 1.min(m - 1),
        });
        if g >= m {
            return Err(Error::Config(format!("g = {g} is out of range for {m} modes")));
        }
        let g_prime = match args.g_prime.or(file.g_prime) {
            Some(gp) => gp,
            None => networks::first_neighbour(&network.adjacency(), g).unwrap_or(g),
        };
        if g_prime >= m {
            return Err(Error::Config(format!("g_prime = {g_prime} is out of range for {m} modes")));
        }

        let env_seed = env_seed
            .map(|s| s.trim().parse::<u64>().map_err(|_| Error::Config(format!("CVD_SEED is not an integer: {s:?}"))))
            .transpose()?;
        let seed = args.seed.or(env_seed).or(file.seed).unwrap_or(0);
        let trials = args.trials.or(file.trials).unwrap_or(default_trials(experiment));
        if trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let format = args.format.or(file.format).unwrap_or(default_format(experiment));
        if format == Format::Csv && matches!(experiment, Experiment::VerifyBounds | Experiment::OracleCheck) {
            return Err(Error::Config(format!("{experiment:?} writes a JSON summary; csv is not available")));
        }
        let cutoff = args.cutoff.or(file.cutoff);
        if cutoff.is_some_and(|d| d < 2) {
            return Err(Error::Config("cutoff must be at least 2".into()));
        }

        Ok(Self {
            experiment,
            network,
            kind: args.kind.or(file.kind).unwrap_or(PhotonOp::Subtract),
            grid,
            alphas,
            g,
            g_prime,
            seed,
            trials,
            out: args.out.clone().or(file.out),
            format,
            cutoff,
            dump_state: args.dump_state.clone().or(file.dump_state),
        })
    }
}

fn default_grid(experiment: Experiment, network: NetworkKind) -> Vec<f64> {
    match (experiment, network) {
        (Experiment::SweepSqueezing, NetworkKind::Chain) => parse_grid("0:2:0.1").expect("valid default grid"),
        (Experiment::SweepSqueezing, NetworkKind::Graph) => parse_grid("0:15:1").expect("valid default grid"),
        (_, NetworkKind::Chain) => vec![1.0],
        (_, NetworkKind::Graph) => vec![10.0],
    }
}

fn default_alphas(experiment: Experiment) -> Vec<Complex64> {
    match experiment {
        Experiment::SweepSqueezing => vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)],
        _ => vec![Complex64::new(0.5, 0.0)],
    }
}

fn default_trials(experiment: Experiment) -> usize {
    match experiment {
        Experiment::VerifyBounds => 10_000,
        _ => 1_000,
    }
}

fn default_format(experiment: Experiment) -> Format {
    match experiment {
        Experiment::SweepSqueezing | Experiment::ScanBipartitions => Format::Csv,
        _ => Format::Json,
    }
}

fn adjacency_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidAdjacency("adjacency rows must all have length equal to the row count".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn pick_grid(flag: Option<&str>, file: Option<&GridInput>) -> Result<Option<Vec<f64>>> {
    let grid = match (flag, file) {
        (Some(text), _) => parse_grid(text)?,
        (None, Some(GridInput::Text(text))) => parse_grid(text)?,
        (None, Some(GridInput::List(v))) => v.clone(),
        _ => return Ok(None),
    };
    validate_grid(&grid)?;
    Ok(Some(grid))
}

/// Grids are nonempty, finite and strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("grid is empty".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("grid contains a non-finite value".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `a,b,c` or `start:stop:step` (stop included when hit within rounding).
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::Config(format!("cannot parse grid {text:?}: {what}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(s.trim()));
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=count).map(|k| round_sig(start + k as f64 * step)).collect()
    } else {
        text.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    validate_grid(&grid)?;
    Ok(grid)
}

/// Comma list of `re`, `re+imi` or `re-imi`.
pub fn parse_alphas(text: &str) -> Result<Vec<Complex64>> {
    text.split(',')
        .map(|item| {
            let s = item.trim().replace(' ', "");
            Complex64::from_str(&s).map_err(|_| Error::Config(format!("cannot parse displacement {item:?}")))
        })
        .collect()
}

/// Rounds to 12 significant digits.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    if !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

fn fmt_num(v: f64) -> String {
    format!("{}", round_sig(v))
}

fn fmt_alpha(a: Complex64) -> String {
    if a.im == 0.0 {
        fmt_num(a.re)
    } else {
        let sign = if a.im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}i", fmt_num(a.re), fmt_num(a.im.abs()))
    }
}

/// `|a − b| / max(|b|, RELATIVE_FLOOR)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(RELATIVE_FLOOR)
}

fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionLabel {
    G,
    GPrime,
}

impl PartitionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PartitionLabel::G => "g",
            PartitionLabel::GPrime => "g_prime",
        }
    }
}

/// One sweep row; the entanglement fields are `None` when subtraction hit a vacuum mode.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub alpha_g: Complex64,
    pub partition: PartitionLabel,
    pub values: Option<(f64, f64, f64)>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub mask: u64,
    pub m_a: usize,
    pub e_before: f64,
    pub e_after: f64,
    pub delta_e: f64,
}

/// ΔE across `{g} | rest` and `{g′} | rest` for every grid value and displacement.
pub fn sweep_squeezing(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let m = cfg.network.modes();
    let mut jobs = Vec::new();
    for &x in &cfg.grid {
        for &alpha in &cfg.alphas {
            jobs.push((x, alpha, PartitionLabel::G, cfg.g));
            if cfg.g_prime != cfg.g {
                jobs.push((x, alpha, PartitionLabel::GPrime, cfg.g_prime));
            }
        }
    }
    let mut rows = jobs
        .into_par_iter()
        .map(|(x, alpha, partition, mode)| {
            let state = cfg.network.build(x, cfg.g, alpha)?;
            let sub = Subsystem::new(m, [mode])?;
            match entanglement_increase(&state, &sub, cfg.g, cfg.kind) {
                Ok(ch) => Ok(SweepRow {
                    x,
                    alpha_g: alpha,
                    partition,
                    values: Some((ch.before, ch.after, ch.delta)),
                    error: None,
                }),
                Err(e @ Error::VacuumModeSubtraction { .. }) => Ok(SweepRow {
                    x,
                    alpha_g: alpha,
                    partition,
                    values: None,
                    error: Some(format!("vacuum_mode_subtraction: {e}")),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        cmp_f64(a.x, b.x)
            .then(cmp_f64(a.alpha_g.re, b.alpha_g.re))
            .then(cmp_f64(a.alpha_g.im, b.alpha_g.im))
            .then(a.partition.cmp(&b.partition))
    });
    Ok(rows)
}

/// Every bipartition whose side 𝒜 contains `g`, ordered by bitmask.
pub fn scan_bipartitions(cfg: &RunConfig) -> Result<Vec<ScanRow>> {
    let m = cfg.network.modes();
    if m > MAX_SCAN_MODES {
        return Err(Error::TooManyModes { modes: m, limit: MAX_SCAN_MODES });
    }
    if cfg.grid.len() != 1 || cfg.alphas.len() != 1 {
        return Err(Error::Config("scan-bipartitions takes exactly one squeezing value and one displacement".into()));
    }
    let state = cfg.network.build(cfg.grid[0], cfg.g, cfg.alphas[0])?;
    let gbit = 1u64 << cfg.g;
    let masks: Vec<u64> = (0..1u64 << m).filter(|mask| mask & gbit != 0).collect();
    let mut rows = masks
        .into_par_iter()
        .map(|mask| {
            let sub = Subsystem::from_mask(m, mask)?;
            let ch = entanglement_increase(&state, &sub, cfg.g, cfg.kind)?;
            Ok(ScanRow { mask, m_a: sub.len(), e_before: ch.before, e_after: ch.after, delta_e: ch.delta })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.mask);
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("r,alpha_g,partition,e_before,e_after,delta_e\n");
    for row in rows {
        let values = match row.values {
            Some((b, a, d)) => format!("{},{},{}", fmt_num(b), fmt_num(a), fmt_num(d)),
            None => ",,".to_string(),
        };
        let _ = writeln!(out, "{},{},{},{values}", fmt_num(row.x), fmt_alpha(row.alpha_g), row.partition.as_str());
    }
    out
}

pub fn sweep_json(rows: &[SweepRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                let num = |v: f64| json!(round_sig(v));
                let (b, a, d) = match row.values {
                    Some((b, a, d)) => (num(b), num(a), num(d)),
                    None => (Value::Null, Value::Null, Value::Null),
                };
                let mut obj = json!({
                    "r": round_sig(row.x),
                    "alpha_g": fmt_alpha(row.alpha_g),
                    "partition": row.partition.as_str(),
                    "e_before": b,
                    "e_after": a,
                    "delta_e": d,
                });
                if let Some(err) = &row.error {
                    obj["error"] = json!(err);
                }
                obj
            })
            .collect(),
    )
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("mask,m_a,e_before,e_after,delta_e\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.mask,
            r.m_a,
            fmt_num(r.e_before),
            fmt_num(r.e_after),
            fmt_num(r.delta_e)
        );
    }
    out
}

pub fn scan_json(rows: &[ScanRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "mask": r.mask,
                    "m_a": r.m_a,
                    "e_before": round_sig(r.e_before),
                    "e_after": round_sig(r.e_after),
                    "delta_e": round_sig(r.delta_e),
                })
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSummary {
    pub trials: usize,
    pub kind: PhotonOp,
    pub min_ratio: f64,
    pub max_delta_e: f64,
    pub violations: usize,
    pub seed: u64,
}

/// Independent random stream for trial `index`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn random_alpha<R: Rng + ?Sized>(rng: &mut R, max_abs: f64) -> Complex64 {
    let radius = max_abs * rng.random::<f64>().sqrt();
    Complex64::from_polar(radius, 2.0 * PI * rng.random::<f64>())
}

/// Mixed state `S diag(ν, ν) Sᵗ` with `m ∈ 1..=5`, `ν_i ∈ [1, 10]`,
/// log-squeezing up to 2 and `|α_g| ≤ 2` on a random mode `g`.
pub fn random_mixed_case<R: Rng + ?Sized>(rng: &mut R) -> (GaussianState, usize) {
    let m = rng.random_range(1..=5usize);
    let nu: Vec<f64> = (0..m).map(|_| rng.random_range(1.0..=10.0)).collect();
    let s = random_symplectic_with(m, 2.0, rng);
    let g = rng.random_range(0..m);
    let alpha = random_alpha(rng, 2.0);
    let mut d = DMatrix::zeros(2 * m, 2 * m);
    for (k, &n) in nu.iter().enumerate() {
        d[(k, k)] = n;
        d[(m + k, m + k)] = n;
    }
    let cov = s.matrix() * d * s.matrix().transpose();
    let mut mean = DVector::zeros(2 * m);
    mean[g] = 2.0 * alpha.re;
    mean[m + g] = 2.0 * alpha.im;
    (GaussianState::new(mean, cov).expect("symmetric by construction"), g)
}

/// Pure global state from a random symplectic on `m ∈ 2..=5` vacua, a
/// displacement `|α_g| ≤ 1` and a proper subsystem containing `g`.
pub fn random_pure_case<R: Rng + ?Sized>(rng: &mut R) -> (GaussianState, Subsystem, usize) {
    let m = rng.random_range(2..=5usize);
    let s = random_symplectic_with(m, 1.0, rng);
    let g = rng.random_range(0..m);
    let alpha = random_alpha(rng, 1.0);
    let mask = loop {
        let mask = rng.random_range(0..1u64 << m) | (1 << g);
        if mask != (1 << m) - 1 {
            break mask;
        }
    };
    let disp = CircuitElement::displace_mode(g, alpha, m).expect("mode in range");
    let state = GaussianState::vacuum(m)
        .transform(&s, &DVector::zeros(2 * m))
        .and_then(|st| st.apply(&[disp]))
        .expect("valid random state");
    (state, Subsystem::from_mask(m, mask).expect("mask in range"), g)
}

/// Relative purity of a random mixed reduced state through the Williamson
/// decomposition and the closed form.
pub fn bound_trial(seed: u64, index: u64, kind: PhotonOp) -> Result<f64> {
    let mut rng = trial_rng(seed, index);
    let (state, g) = random_mixed_case(&mut rng);
    let decomp = state.williamson()?;
    relative_purity_closed_form(&decomp, &bogoliubov_row(&decomp, g)?, kind)
}

pub fn verify_bounds(cfg: &RunConfig) -> Result<BoundSummary> {
    let ratios = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| bound_trial(cfg.seed, i, cfg.kind))
        .collect::<Result<Vec<f64>>>()?;
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_delta_e = ratios.iter().map(|r| -r.ln()).fold(f64::NEG_INFINITY, f64::max);
    let violations = ratios.iter().filter(|&&r| !(r >= RATIO_FLOOR)).count();
    Ok(BoundSummary {
        trials: cfg.trials,
        kind: cfg.kind,
        min_ratio: round_sig(min_ratio),
        max_delta_e: round_sig(max_delta_e),
        violations,
        seed: cfg.seed,
    })
}

/// One analytic-vs-oracle comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCase {
    pub modes: usize,
    pub r: f64,
    pub alpha_g: String,
    pub mask: u64,
    pub kind: PhotonOp,
    pub cutoff: usize,
    pub purity: Option<[f64; 2]>,
    pub ratio: Option<[f64; 2]>,
    pub delta_e: Option<[f64; 2]>,
    pub max_rel_err: Option<f64>,
    pub leakage: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceBlock {
    pub n: Vec<f64>,
    pub max_rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoPathBlock {
    pub samples: usize,
    pub max_rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSummary {
    pub cases: Vec<OracleCase>,
    pub max_rel_err: f64,
    pub failures: usize,
    pub traces: TraceBlock,
    pub two_path: TwoPathBlock,
    pub seed: u64,
    pub pass: bool,
}

/// Grid of the default oracle check.
pub const ORACLE_MODES: [usize; 2] = [2, 3];
pub const ORACLE_R: [f64; 3] = [0.1, 0.4, 0.8];
pub const ORACLE_ALPHA: [f64; 2] = [0.0, 0.5];
pub const TRACE_N: [f64; 3] = [1.5, 2.0, 5.0];

/// Largest cutoff tried when growing it automatically.
pub const MAX_AUTO_CUTOFF: usize = 48;

/// Raises the cutoff in steps of 4 from `start` until the leakage is within
/// [`ORACLE_LEAK_TOL`].
fn oracle_with_growing_cutoff(
    m: usize,
    start: usize,
    elems: &[CircuitElement],
) -> std::result::Result<FockArray, (Error, usize)> {
    let mut d = start;
    loop {
        match FockArray::from_circuit(m, d, elems, ORACLE_LEAK_TOL) {
            Err(Error::CutoffTooSmall { .. }) if d + 4 <= MAX_AUTO_CUTOFF => d += 4,
            other => return other.map_err(|e| (e, d)),
        }
    }
}

/// Relative error of the analytic purity, relative purity and ΔE against the
/// Fock simulator for every bipartition of a chain with `g ∈ 𝒜 ≠ all`.
pub fn oracle_chain_cases(spec: &ChainSpec, kinds: &[PhotonOp], cutoff: Option<usize>) -> Vec<OracleCase> {
    let m = spec.modes;
    let masks: Vec<u64> = (0..(1u64 << m) - 1).filter(|mask| mask & (1 << spec.g) != 0).collect();
    let blank = |mask: u64, kind: PhotonOp, cutoff: usize| OracleCase {
        modes: m,
        r: spec.r,
        alpha_g: fmt_alpha(spec.alpha_g),
        mask,
        kind,
        cutoff,
        purity: None,
        ratio: None,
        delta_e: None,
        max_rel_err: None,
        leakage: None,
        error: None,
    };
    let fail = |msg: String, cutoff: usize| -> Vec<OracleCase> {
        masks
            .iter()
            .flat_map(|&mask| kinds.iter().map(move |&k| (mask, k)))
            .map(|(mask, k)| OracleCase { error: Some(msg.clone()), ..blank(mask, k, cutoff) })
            .collect()
    };
    let prepared = networks::chain_elements(spec).and_then(|elems| {
        let gs = GaussianState::vacuum(m).apply(&elems)?;
        Ok((elems, gs))
    });
    let (elems, gs) = match prepared {
        Ok(v) => v,
        Err(e) => return fail(e.to_string(), cutoff.unwrap_or(0)),
    };
    let built = match cutoff {
        Some(d) => FockArray::from_circuit(m, d, &elems, ORACLE_LEAK_TOL).map_err(|e| (e, d)),
        None => {
            let most = (0..m).map(|k| gs.mean_photon_number(k).unwrap_or(0.0)).fold(0.0, f64::max);
            oracle_with_growing_cutoff(m, fock::suggested_cutoff(most), &elems)
        }
    };
    let oracle = match built {
        Ok(st) => st,
        Err((e, d)) => return fail(e.to_string(), d),
    };
    let cutoff = oracle.cutoff();
    let mut cases = Vec::new();
    for &mask in &masks {
        for &kind in kinds {
            let case = blank(mask, kind, cutoff);
            let outcome = (|| -> Result<OracleCase> {
                let sub = Subsystem::from_mask(m, mask)?;
                let mu = gs.reduce(&sub)?.purity()?;
                let ratio = relative_purity(&gs, &sub, spec.g, kind)?;
                let delta = entanglement_increase(&gs, &sub, spec.g, kind)?.delta;
                let mu_f = oracle.reduced_purity(&sub)?;
                let after = match kind {
                    PhotonOp::Subtract => oracle.annihilate(spec.g)?,
                    PhotonOp::Add => oracle.create(spec.g)?,
                }
                .normalized()?;
                let mu_after = after.reduced_purity(&sub)?;
                let ratio_f = mu_after / mu_f;
                let delta_f = mu_f.ln() - mu_after.ln();
                let err = relative_error(mu, mu_f)
                    .max(relative_error(ratio, ratio_f))
                    .max(relative_error(delta, delta_f));
                Ok(OracleCase {
                    purity: Some([mu, mu_f]),
                    ratio: Some([ratio, ratio_f]),
                    delta_e: Some([delta, delta_f]),
                    max_rel_err: Some(err),
                    leakage: Some(after.leakage()),
                    ..case.clone()
                })
            })();
            cases.push(outcome.unwrap_or_else(|e| OracleCase { error: Some(e.to_string()), ..case }));
        }
    }
    cases
}

/// Largest relative error between the closed-form thermal traces and dense
/// Fock-space evaluations.
pub fn trace_block(ns: &[f64]) -> Result<TraceBlock> {
    let mut worst: f64 = 0.0;
    for &n in ns {
        let closed = thermal_traces(n)?.values();
        let rho = fock::thermal_density(n, fock::thermal_cutoff(n))?;
        let dense = fock::single_mode_traces(&rho)?;
        for (a, b) in closed.iter().zip(dense.iter()) {
            worst = worst.max(relative_error(*a, *b));
        }
    }
    Ok(TraceBlock { n: ns.to_vec(), max_rel_err: worst })
}

/// Closed form against the Wigner-moment purity on one random pure configuration.
pub fn two_path_trial(seed: u64, index: u64) -> Result<f64> {
    let mut rng = trial_rng(seed, index);
    let (state, sub, g) = random_pure_case(&mut rng);
    let reduced = state.reduce(&sub)?;
    let wigner = subtract_reduced_wigner(&state, g, &sub)?.purity()? / reduced.purity()?;
    let decomp = reduced.williamson()?;
    let local = sub.local_index(g).ok_or(Error::ModeNotInSubsystem { mode: g })?;
    let closed = relative_purity_closed_form(&decomp, &bogoliubov_row(&decomp, local)?, PhotonOp::Subtract)?;
    Ok(relative_error(wigner, closed))
}

pub fn two_path_block(seed: u64, samples: usize) -> Result<TwoPathBlock> {
    let errs = (0..samples as u64)
        .into_par_iter()
        .map(|i| two_path_trial(seed, i))
        .collect::<Result<Vec<f64>>>()?;
    Ok(TwoPathBlock { samples, max_rel_err: errs.into_iter().fold(0.0, f64::max) })
}

pub fn oracle_check(cfg: &RunConfig) -> Result<OracleSummary> {
    let mut specs = Vec::new();
    for &m in &ORACLE_MODES {
        for &r in &ORACLE_R {
            for &a in &ORACLE_ALPHA {
                specs.push(ChainSpec::new(m, r, Complex64::new(a, 0.0)));
            }
        }
    }
    let kinds = [PhotonOp::Subtract, PhotonOp::Add];
    let cases: Vec<OracleCase> =
        specs.par_iter().flat_map_iter(|spec| oracle_chain_cases(spec, &kinds, cfg.cutoff)).collect();
    let failures = cases.iter().filter(|c| c.error.is_some()).count();
    let max_rel_err = cases.iter().filter_map(|c| c.max_rel_err).fold(0.0, f64::max);
    let traces = trace_block(&TRACE_N)?;
    let two_path = two_path_block(cfg.seed, cfg.trials)?;
    let pass = failures == 0
        && max_rel_err <= ORACLE_TOL
        && traces.max_rel_err <= TRACE_TOL
        && two_path.max_rel_err <= TWO_PATH_TOL;
    Ok(OracleSummary { cases, max_rel_err, failures, traces, two_path, seed: cfg.seed, pass })
}

/// How a completed run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    BoundViolation,
    CheckFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::BoundViolation => 1,
            Outcome::CheckFailed => 3,
        }
    }
}

/// 2 for configuration problems, 3 for numerical ones.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Io(_)
        | Error::InvalidAdjacency(_)
        | Error::InvalidNetwork(_)
        | Error::IndexOutOfRange { .. }
        | Error::RepeatedMode(_)
        | Error::TooManyModes { .. }
        | Error::ModeNotInSubsystem { .. }
        | Error::EmptySubsystem => 2,
        _ => 3,
    }
}

fn emit(cfg: &RunConfig, body: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn to_json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

/// Runs the configured experiment and writes its output.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    if let Some(path) = &cfg.dump_state {
        let x = cfg.grid[0];
        let state = cfg.network.build(x, cfg.g, cfg.alphas[0])?;
        std::fs::write(path, to_json_text(&state.to_snapshot()))?;
    }
    match cfg.experiment {
        Experiment::SweepSqueezing => {
            let rows = sweep_squeezing(cfg)?;
            let body = match cfg.format {
                Format::Csv => sweep_csv(&rows),
                Format::Json => to_json_text(&sweep_json(&rows)),
            };
            emit(cfg, &body)?;
            let ok = rows.iter().all(|r| r.values.is_none_or(|(_, _, d)| within_entanglement_bound(d)));
            Ok(if ok { Outcome::Pass } else { Outcome::BoundViolation })
        }
        Experiment::ScanBipartitions => {
            let rows = scan_bipartitions(cfg)?;
            let body = match cfg.format {
                Format::Csv => scan_csv(&rows),
                Format::Json => to_json_text(&scan_json(&rows)),
            };
            emit(cfg, &body)?;
            let ok = rows.iter().all(|r| within_entanglement_bound(r.delta_e));
            Ok(if ok { Outcome::Pass } else { Outcome::BoundViolation })
        }
        Experiment::VerifyBounds => {
            let summary = verify_bounds(cfg)?;
            emit(cfg, &to_json_text(&summary))?;
            let ok = summary.violations == 0 && summary.max_delta_e <= LN_2 + 1e-9;
            Ok(if ok { Outcome::Pass } else { Outcome::BoundViolation })
        }
        Experiment::OracleCheck => {
            let summary = oracle_check(cfg)?;
            emit(cfg, &to_json_text(&summary))?;
            Ok(if summary.pass { Outcome::Pass } else { Outcome::CheckFailed })
        }
    }
}

/// Entry point for the binary: parses, runs, and maps the result to an exit code.
pub fn main_with_args(args: Args) -> i32 {
    let env_seed = std::env::var("CVD_SEED").ok();
    let result = RunConfig::resolve(&args, env_seed.as_deref()).and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => {
            if outcome != Outcome::Pass {
                eprintln!("cvdistill: {outcome:?}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("cvdistill: {e}");
            error_exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(experiment: Experiment) -> Args {
        Args { experiment: Some(experiment), ..Args::default() }
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0:2:0.1").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[3], 0.3);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert_eq!(parse_grid("0.5, 1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert!(parse_grid("1,1").is_err());
        assert!(parse_grid("2,1").is_err());
        assert!(parse_grid("").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn alpha_parsing() {
        let a = parse_alphas("0,0.5,0.3-0.4i").unwrap();
        assert_eq!(a, vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.3, -0.4)]);
        assert!(parse_alphas("x").is_err());
        assert_eq!(fmt_alpha(a[2]), "0.3-0.4i");
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(LN_2), "0.69314718056");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
    }

    #[test]
    fn resolve_defaults_and_overrides() {
        let cfg = RunConfig::resolve(&args(Experiment::SweepSqueezing), None).unwrap();
        assert_eq!(cfg, RunConfig::new(Experiment::SweepSqueezing));
        assert_eq!((cfg.g, cfg.g_prime), (4, 3));
        let mut a = args(Experiment::VerifyBounds);
        a.seed = Some(7);
        assert_eq!(RunConfig::resolve(&a, Some("9")).unwrap().seed, 7);
        a.seed = None;
        assert_eq!(RunConfig::resolve(&a, Some("9")).unwrap().seed, 9);
        assert!(RunConfig::resolve(&a, Some("nine")).is_err());
        let mut a = args(Experiment::ScanBipartitions);
        a.network = Some(NetworkKind::Graph);
        let cfg = RunConfig::resolve(&a, None).unwrap();
        assert_eq!((cfg.network.modes(), cfg.g, cfg.g_prime, cfg.grid.clone()), (9, 1, 0, vec![10.0]));
    }

    #[test]
    fn resolve_rejects_bad_settings() {
        assert!(matches!(RunConfig::resolve(&Args::default(), None), Err(Error::Config(_))));
        let mut a = args(Experiment::SweepSqueezing);
        a.db = Some("10".into());
        assert!(RunConfig::resolve(&a, None).is_err());
        let mut a = args(Experiment::VerifyBounds);
        a.trials = Some(0);
        assert!(RunConfig::resolve(&a, None).is_err());
        let mut a = args(Experiment::VerifyBounds);
        a.format = Some(Format::Csv);
        assert!(RunConfig::resolve(&a, None).is_err());
        let mut a = args(Experiment::SweepSqueezing);
        a.g = Some(10);
        assert!(RunConfig::resolve(&a, None).is_err());
    }

    #[test]
    fn vacuum_sweep_row_is_null() {
        let mut cfg = RunConfig::new(Experiment::SweepSqueezing);
        cfg.network = NetworkConfig::Chain { modes: 3 };
        cfg.g = 1;
        cfg.g_prime = 0;
        cfg.grid = vec![0.0, 0.5];
        cfg.alphas = vec![Complex64::new(0.0, 0.0)];
        let rows = sweep_squeezing(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].values.is_none() && rows[0].error.is_some());
        let csv = sweep_csv(&rows);
        assert!(csv.lines().nth(1).unwrap() == "0,0,g,,,");
        assert!(rows[2].values.is_some());
        assert_eq!(sweep_json(&rows)[0]["delta_e"], Value::Null);
    }

    #[test]
    fn two_mode_scan_has_two_rows() {
        let mut cfg = RunConfig::new(Experiment::ScanBipartitions);
        cfg.network = NetworkConfig::Chain { modes: 2 };
        cfg.g = 0;
        let rows = scan_bipartitions(&cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.mask).collect::<Vec<_>>(), vec![1, 3]);
        assert!(rows[1].delta_e.abs() < 1e-9);
        assert!(scan_csv(&rows).starts_with("mask,m_a,e_before,e_after,delta_e\n1,1,"));
    }

    #[test]
    fn scan_limits() {
        let mut cfg = RunConfig::new(Experiment::ScanBipartitions);
        cfg.network = NetworkConfig::Chain { modes: 21 };
        assert!(matches!(scan_bipartitions(&cfg), Err(Error::TooManyModes { .. })));
        let mut cfg = RunConfig::new(Experiment::ScanBipartitions);
        cfg.grid = vec![0.5, 1.0];
        assert!(matches!(scan_bipartitions(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn verify_bounds_is_deterministic() {
        let mut cfg = RunConfig::new(Experiment::VerifyBounds);
        cfg.trials = 50;
        cfg.seed = 3;
        let a = verify_bounds(&cfg).unwrap();
        assert_eq!(a, verify_bounds(&cfg).unwrap());
        assert_eq!(a.violations, 0);
        assert!(a.min_ratio >= 0.5);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(error_exit_code(&Error::Config("x".into())), 2);
        assert_eq!(error_exit_code(&Error::NumericalFailure("x".into())), 3);
        assert_eq!(Outcome::BoundViolation.exit_code(), 1);
    }
}
