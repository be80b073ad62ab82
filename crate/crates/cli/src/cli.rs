//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use harper_core::algebra::{build_rep, identity_residuals, neumann_inverse};
use harper_core::butterfly::fractions;
use harper_core::coefficients::{
    build_d, build_phi, coefficient_sheet, decay_rate, recursion_r, residual_21, CoefficientSheet,
};
use harper_core::lyapunov::{
    chambers_surface, critical_scan, fd_gradient, fd_hessian, gradient, hessian, lyapunov_chambers, lyapunov_thouless,
    lyapunov_trace, lyapunov_transfer, LyapunovValue, PhaseSpectra, Rotation, DEFAULT_TRACE_GRID,
};
use harper_core::numbertheory::{component_count, farey, franel_table, phi_cumulative};
use harper_core::rational::IrrationalTarget;
use harper_core::spectrum::{bands, gap_label, gaps, gaps_of, ids, track_gap, BandSet, DEFAULT_MIN_WIDTH};
use harper_core::{RationalFrequency, C64};
use serde_json::json;

use crate::batch::{compute_dataset, run_batch, BatchError, BatchOptions, BatchOutcome};
use crate::cells;
use crate::config::RunConfig;
use crate::csvio::{num, Table};
use crate::formats::{
    band_table, component_json, dataset_config, dataset_file, franel_csv, gap_table, pretty, sheet_table,
};
use crate::render::{render, Format, Style};
use crate::selftest;

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit code 2.
    Usage {
        flag: &'static str,
        message: String,
    },
    /// A check or computation failed; exit code 1.
    Failed(String),
    Io(io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage { flag, message } => write!(f, "invalid value for '{flag}': {message}"),
            Self::Failed(m) => write!(f, "{m}"),
            Self::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage { .. } => 2,
            _ => 1,
        }
    }
}

fn usage(flag: &'static str, message: impl std::fmt::Display) -> CliError {
    CliError::Usage { flag, message: message.to_string() }
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "harper",
    version,
    about = "Spectra, Lyapunov exponents and the Hofstadter butterfly of the almost Mathieu operator"
)]
pub struct Cli {
    /// Directory that relative output and checkpoint paths are resolved against.
    #[arg(long, global = true, env = "HARPER_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// Write the artifact to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// One or more rational frequencies.
#[derive(Args, Debug, Clone)]
pub struct FreqSet {
    /// Frequency as p/q.
    #[arg(long, conflicts_with_all = ["irrational", "qmax", "denominators"])]
    pub alpha: Option<String>,
    /// Convergents of golden, sqrt2, e-based, or custom-cf followed by a1,a2,...
    #[arg(long, num_args = 1..=2, value_names = ["TARGET", "QUOTIENTS"], requires = "depth", conflicts_with_all = ["qmax", "denominators"])]
    pub irrational: Option<Vec<String>>,
    /// Number of convergents.
    #[arg(long, requires = "irrational")]
    pub depth: Option<usize>,
    /// Every fraction p/q in [0, 1] with q <= QMAX.
    #[arg(long, conflicts_with = "denominators")]
    pub qmax: Option<u64>,
    /// Every reduced p/q in (0, 1) with q in this list.
    #[arg(long, value_delimiter = ',')]
    pub denominators: Option<Vec<u64>>,
}

#[derive(Args, Debug, Clone)]
pub struct OneFreq {
    /// Frequency as p/q.
    #[arg(long)]
    pub alpha: String,
}

#[derive(Args, Debug, Clone)]
pub struct BetaSet {
    /// Coupling.
    #[arg(long, conflicts_with_all = ["betas", "beta_grid"])]
    pub beta: Option<f64>,
    /// Comma separated couplings.
    #[arg(long, value_delimiter = ',', conflicts_with = "beta_grid")]
    pub betas: Option<Vec<f64>>,
    /// LO:HI:N, N evenly spaced couplings including both ends.
    #[arg(long)]
    pub beta_grid: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    All,
    Transfer,
    Thouless,
    Trace,
    Chambers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    /// Phase-grid eigendecomposition.
    Grid,
    /// Exact phase average through the Chambers polynomial.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    C,
    D,
    Phi,
    #[value(name = "r+")]
    RPlus,
    #[value(name = "r-")]
    RMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Svg,
    Ppm,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    #[command(allow_negative_numbers = true)]
    /// Band edges.
    Spectrum {
        #[command(flatten)]
        freq: FreqSet,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        workers: Option<usize>,
    },
    #[command(allow_negative_numbers = true)]
    /// Gap records with labels.
    Gaps {
        #[command(flatten)]
        freq: FreqSet,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = DEFAULT_MIN_WIDTH)]
        min_width: f64,
        /// Leave out closed gaps.
        #[arg(long)]
        open_only: bool,
        #[arg(long)]
        workers: Option<usize>,
    },
    #[command(allow_negative_numbers = true)]
    /// Integrated density of states.
    Ids {
        #[command(flatten)]
        freq: OneFreq,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "energy_grid")]
        energies: Option<Vec<f64>>,
        /// LO:HI:N
        #[arg(long, allow_hyphen_values = true)]
        energy_grid: Option<String>,
    },
    #[command(allow_negative_numbers = true)]
    /// Gap labels (m, n) with j = m q + n p.
    Label {
        #[command(flatten)]
        freq: OneFreq,
        /// One gap index; all when absent.
        #[arg(long)]
        j: Option<i64>,
    },
    #[command(allow_negative_numbers = true)]
    /// Lyapunov exponent.
    Lyapunov {
        #[command(flatten)]
        freq: FreqSet,
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        z_imag: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
        #[arg(long, default_value_t = 256)]
        theta_samples: usize,
        #[arg(long, default_value_t = DEFAULT_TRACE_GRID)]
        grid: usize,
    },
    #[command(allow_negative_numbers = true)]
    /// First partials of L in a gap.
    Gradient {
        #[command(flatten)]
        freq: OneFreq,
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, value_enum, default_value_t = RouteArg::Grid)]
        route: RouteArg,
        #[arg(long, default_value_t = DEFAULT_TRACE_GRID)]
        grid: usize,
        #[arg(long, default_value_t = 1e-4)]
        fd_step: f64,
    },
    #[command(allow_negative_numbers = true)]
    /// Root of g0 and the margin |g1| in every open gap.
    CriticalScan {
        #[command(flatten)]
        freq: FreqSet,
        #[command(flatten)]
        betas: BetaSet,
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_MIN_WIDTH)]
        min_width: f64,
    },
    #[command(allow_negative_numbers = true)]
    /// Second partials of L in a gap.
    Hessian {
        #[command(flatten)]
        freq: OneFreq,
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = DEFAULT_TRACE_GRID)]
        grid: usize,
        #[arg(long, default_value_t = 1e-3)]
        fd_step: f64,
    },
    #[command(allow_negative_numbers = true)]
    /// Coefficient sheet c, d or phi.
    Coeffs {
        #[command(flatten)]
        freq: OneFreq,
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = 12)]
        window: usize,
        #[arg(long, value_enum, default_value_t = KindArg::C)]
        kind: KindArg,
    },
    #[command(allow_negative_numbers = true)]
    /// Half-plane solutions R+ and R-.
    Recursion {
        #[command(flatten)]
        freq: OneFreq,
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = 12)]
        window: usize,
        /// r+ or r-.
        #[arg(long, value_enum, default_value_t = KindArg::RPlus)]
        kind: KindArg,
    },
    #[command(allow_negative_numbers = true)]
    /// Fitted decay rates along diagonal lines of a sheet.
    Decay {
        #[command(flatten)]
        freq: OneFreq,
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = 12)]
        window: usize,
        #[arg(long, value_enum, default_value_t = KindArg::D)]
        kind: KindArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [1, -1])]
        slopes: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-2, -1, 0, 1, 2])]
        offsets: Vec<i64>,
    },
    #[command(allow_negative_numbers = true)]
    /// Residuals of the algebraic identities and the Neumann series.
    SigmaCheck {
        #[command(flatten)]
        freq: OneFreq,
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true, requires = "theta2")]
        theta1: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "theta1")]
        theta2: Option<f64>,
        /// Phase pairs from a fixed low-discrepancy sequence.
        #[arg(long, default_value_t = 5, conflicts_with = "theta1")]
        samples: usize,
        #[arg(long, default_value_t = 40)]
        neumann_terms: usize,
    },
    #[command(allow_negative_numbers = true)]
    /// Butterfly dataset over all fractions with q <= QMAX.
    Butterfly {
        #[arg(long)]
        qmax: u64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = DEFAULT_MIN_WIDTH)]
        min_width: f64,
        #[arg(long)]
        workers: Option<usize>,
        /// Checkpoint file, rewritten every 32 fractions.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from the checkpoint.
        #[arg(long, requires = "checkpoint")]
        resume: bool,
        /// Stop at the first checkpoint with at least this many fractions done.
        #[arg(long, requires = "checkpoint")]
        stop_after: Option<usize>,
    },
    #[command(allow_negative_numbers = true)]
    /// Butterfly image.
    Render {
        #[arg(long)]
        qmax: u64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = FormatArg::Svg)]
        format: FormatArg,
        #[arg(long, default_value_t = 800)]
        width: u32,
        #[arg(long, default_value_t = 800)]
        height: u32,
        /// Color open gaps by Hall number.
        #[arg(long)]
        fill_gaps: bool,
        #[arg(long)]
        workers: Option<usize>,
    },
    #[command(allow_negative_numbers = true)]
    /// Width of one labelled gap across couplings.
    Track {
        #[command(flatten)]
        freq: OneFreq,
        /// M,N
        #[arg(long, allow_hyphen_values = true)]
        label: String,
        #[command(flatten)]
        betas: BetaSet,
        #[arg(long, default_value_t = DEFAULT_MIN_WIDTH)]
        min_width: f64,
    },
    #[command(allow_negative_numbers = true)]
    /// Franel sums of Farey sequences.
    Franel {
        #[arg(long)]
        nmax: u64,
    },
    #[command(allow_negative_numbers = true)]
    /// Farey sequence in (0, 1].
    Farey {
        #[arg(long)]
        order: u64,
    },
    #[command(allow_negative_numbers = true)]
    /// Components of open gaps with one Hall number.
    CountComponents {
        #[arg(long)]
        qmax: u64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        k: i64,
        #[arg(long, default_value_t = DEFAULT_MIN_WIDTH)]
        min_width: f64,
        #[arg(long)]
        workers: Option<usize>,
    },
    #[command(allow_negative_numbers = true)]
    /// Quick invariant suite.
    Selftest,
}

/// Parses and runs; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return e.exit_code();
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn resolve(cli: &Cli, path: &Path) -> PathBuf {
    match &cli.out_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

fn emit(cli: &Cli, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.out {
        Some(p) => {
            let path = resolve(cli, p);
            if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, bytes)?;
        }
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn workers(w: Option<usize>) -> Result<usize, CliError> {
    match w {
        Some(0) => Err(usage("--workers", "must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn check_beta(beta: f64) -> Result<f64, CliError> {
    if beta > 0.0 && beta.is_finite() {
        Ok(beta)
    } else {
        Err(usage("--beta", format!("{beta} is not a positive coupling")))
    }
}

fn parse_alpha(s: &str) -> Result<RationalFrequency, CliError> {
    s.parse().map_err(|e| usage("--alpha", e))
}

fn parse_grid(flag: &'static str, s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(usage(flag, format!("{s}: expected LO:HI:N")));
    };
    let lo: f64 = lo.parse().map_err(|_| usage(flag, format!("{s}: bad lower end")))?;
    let hi: f64 = hi.parse().map_err(|_| usage(flag, format!("{s}: bad upper end")))?;
    let n: usize = n.parse().map_err(|_| usage(flag, format!("{s}: bad count")))?;
    if n == 0 || !(lo.is_finite() && hi.is_finite()) {
        return Err(usage(flag, format!("{s}: need finite ends and N >= 1")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn irrational_target(values: &[String]) -> Result<IrrationalTarget, CliError> {
    match (values[0].as_str(), values.get(1)) {
        ("golden", None) => Ok(IrrationalTarget::Golden),
        ("sqrt2", None) => Ok(IrrationalTarget::Sqrt2),
        ("e-based", None) => Ok(IrrationalTarget::EBased),
        ("custom-cf", Some(list)) => list
            .split(',')
            .map(|a| a.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map(IrrationalTarget::Custom)
            .map_err(|_| usage("--irrational", format!("{list}: expected positive integers a1,a2,..."))),
        ("custom-cf", None) => Err(usage("--irrational", "custom-cf needs the quotients a1,a2,...")),
        (name, _) => Err(usage("--irrational", format!("{name}: expected golden, sqrt2, e-based or custom-cf"))),
    }
}

impl FreqSet {
    fn resolve(&self) -> Result<Vec<RationalFrequency>, CliError> {
        if let Some(a) = &self.alpha {
            return Ok(vec![parse_alpha(a)?]);
        }
        if let Some(values) = &self.irrational {
            let depth = self.depth.ok_or_else(|| usage("--depth", "required with --irrational"))?;
            if depth == 0 {
                return Err(usage("--depth", "must be at least 1"));
            }
            let target = irrational_target(values)?;
            return target.convergents(depth).map_err(|e| usage("--irrational", e));
        }
        if let Some(q) = self.qmax {
            return fractions(q).map_err(|e| usage("--qmax", e));
        }
        if let Some(qs) = &self.denominators {
            if qs.iter().any(|&q| q < 2) {
                return Err(usage("--denominators", "denominators must be at least 2"));
            }
            return Ok(qs
                .iter()
                .flat_map(|&q| (1..q).filter_map(move |p| RationalFrequency::new(p, q).ok()))
                .collect());
        }
        Err(usage("--alpha", "one of --alpha, --irrational, --qmax or --denominators is required"))
    }

    fn record(&self, c: &mut RunConfig) {
        if let Some(a) = &self.alpha {
            c.set("alpha", a);
        }
        if let Some(v) = &self.irrational {
            c.set("irrational", v.join(" "));
        }
        if let Some(d) = self.depth {
            c.set("depth", d);
        }
        if let Some(q) = self.qmax {
            c.set("qmax", q);
        }
        if let Some(qs) = &self.denominators {
            c.set("denominators", qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","));
        }
    }
}

impl BetaSet {
    fn resolve(&self) -> Result<Vec<f64>, CliError> {
        let v = if let Some(b) = self.beta {
            vec![b]
        } else if let Some(bs) = &self.betas {
            bs.clone()
        } else if let Some(g) = &self.beta_grid {
            parse_grid("--beta-grid", g)?
        } else {
            return Err(usage("--beta", "one of --beta, --betas or --beta-grid is required"));
        };
        for &b in &v {
            check_beta(b)?;
        }
        Ok(v)
    }

    fn label(&self) -> String {
        match (&self.beta, &self.betas, &self.beta_grid) {
            (Some(b), _, _) => num(*b),
            (_, Some(bs), _) => bs.iter().map(|b| num(*b)).collect::<Vec<_>>().join(","),
            (_, _, Some(g)) => g.clone(),
            _ => String::new(),
        }
    }
}

fn sheet_kind_flag(kind: KindArg) -> &'static str {
    match kind {
        KindArg::C => "c",
        KindArg::D => "d",
        KindArg::Phi => "phi",
        KindArg::RPlus => "r+",
        KindArg::RMinus => "r-",
    }
}

/// Computes the requested sheet; errors from an energy on the spectrum name `--z`.
fn build_sheet(
    freq: RationalFrequency,
    beta: f64,
    z: f64,
    window: usize,
    kind: KindArg,
) -> Result<CoefficientSheet, CliError> {
    let core = |e: harper_core::Error| match e {
        harper_core::Error::NearSpectrum { .. } => usage("--z", e),
        harper_core::Error::CouplingOutOfRange(_) => usage("--beta", e),
        other => usage("--window", other),
    };
    let recursion = || recursion_r(freq, beta, z, window).map_err(core);
    Ok(match kind {
        KindArg::C => coefficient_sheet(freq, beta, z, window).map_err(core)?,
        KindArg::RPlus => recursion()?.0,
        KindArg::RMinus => recursion()?.1,
        KindArg::D => {
            let (p, m) = recursion()?;
            build_d(&p, &m).map_err(failed)?
        }
        KindArg::Phi => {
            let c = coefficient_sheet(freq, beta, z, window).map_err(core)?;
            let (p, m) = recursion()?;
            build_phi(&c, &build_d(&p, &m).map_err(failed)?).map_err(failed)?
        }
    })
}

fn in_gap_error(e: harper_core::Error) -> CliError {
    match e {
        harper_core::Error::NotInGap { .. } | harper_core::Error::NearSpectrum { .. } => usage("--z", e),
        other => failed(other),
    }
}

fn band_sets(freqs: &[RationalFrequency], beta: f64, workers: usize) -> Result<Vec<BandSet>, CliError> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(failed)?;
    pool.install(|| freqs.par_iter().map(|&f| bands(f, beta)).collect::<Result<Vec<_>, _>>()).map_err(failed)
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Spectrum { freq, beta, workers: w } => {
            let beta = check_beta(*beta)?;
            let freqs = freq.resolve()?;
            let mut config = RunConfig::new("spectrum").with("beta", num(beta));
            freq.record(&mut config);
            let sets = band_sets(&freqs, beta, workers(*w)?)?;
            emit(cli, band_table(&config, &sets).as_bytes(), stdout)?;
        }
        Command::Gaps { freq, beta, min_width, open_only, workers: w } => {
            let beta = check_beta(*beta)?;
            let freqs = freq.resolve()?;
            let mut config = RunConfig::new("gaps")
                .with("beta", num(beta))
                .with("min_width", num(*min_width))
                .with("open_only", open_only);
            freq.record(&mut config);
            let sets = band_sets(&freqs, beta, workers(*w)?)?;
            let mut all = Vec::new();
            for bs in &sets {
                all.extend(gaps_of(bs, *min_width).map_err(failed)?);
            }
            emit(cli, gap_table(&config, all.iter().filter(|g| g.open || !open_only)).as_bytes(), stdout)?;
        }
        Command::Ids { freq, beta, energies, energy_grid } => {
            let fr = parse_alpha(&freq.alpha)?;
            let beta = check_beta(*beta)?;
            let es = match (energies, energy_grid) {
                (Some(e), _) => e.clone(),
                (None, Some(g)) => parse_grid("--energy-grid", g)?,
                (None, None) => return Err(usage("--energies", "one of --energies or --energy-grid is required")),
            };
            let config = RunConfig::new("ids")
                .with("alpha", fr)
                .with("beta", num(beta))
                .with("energies", es.iter().map(|e| num(*e)).collect::<Vec<_>>().join(","));
            let bs = bands(fr, beta).map_err(failed)?;
            let mut t = Table::new(&config.comment_line(), &["p", "q", "beta", "energy", "ids"]);
            for e in es {
                t.row(cells![fr.p(), fr.q(), num(beta), num(e), num(ids(&bs, e))]);
            }
            emit(cli, t.into_string().as_bytes(), stdout)?;
        }
        Command::Label { freq, j } => {
            let fr = parse_alpha(&freq.alpha)?;
            let q = fr.q() as i64;
            let js: Vec<i64> = match j {
                Some(j) => vec![*j],
                None => (1..q).collect(),
            };
            let mut config = RunConfig::new("label").with("alpha", fr);
            if let Some(j) = j {
                config.set("j", j);
            }
            let mut t = Table::new(&config.comment_line(), &["p", "q", "j", "m", "n"]);
            for j in js {
                let (m, n) = gap_label(j, fr).map_err(|e| usage("--j", e))?;
                t.row(cells![fr.p(), fr.q(), j, m, n]);
            }
            emit(cli, t.into_string().as_bytes(), stdout)?;
        }
        Command::Lyapunov { freq, beta, z, z_imag, method, theta_samples, grid } => {
            let beta = check_beta(*beta)?;
            let freqs = freq.resolve()?;
            if *theta_samples == 0 {
                return Err(usage("--theta-samples", "must be at least 1"));
            }
            let zc = C64::new(*z, *z_imag);
            let mut config = RunConfig::new("lyapunov")
                .with("beta", num(beta))
                .with("z", num(*z))
                .with("z_imag", num(*z_imag))
                .with("method", format!("{method:?}").to_lowercase())
                .with("theta_samples", theta_samples)
                .with("grid", grid);
            freq.record(&mut config);
            let mut t = Table::new(&config.comment_line(), &["p", "q", "beta", "z_re", "z_im", "method", "value"]);
            for fr in freqs {
                let bs = bands(fr, beta).map_err(failed)?;
                let wanted = |m: MethodArg| *method == MethodArg::All || *method == m;
                let mut values: Vec<(&str, LyapunovValue)> = Vec::new();
                if wanted(MethodArg::Transfer) {
                    let v = lyapunov_transfer(Rotation::Rational(fr), beta, zc, *theta_samples, fr.qsize())
                        .map_err(failed)?;
                    values.push(("transfer", v));
                }
                if wanted(MethodArg::Thouless) {
                    values.push(("thouless", lyapunov_thouless(&bs, zc)));
                }
                if wanted(MethodArg::Trace) {
                    let cache = PhaseSpectra::new(fr, beta, *grid).map_err(|e| usage("--grid", e))?;
                    match lyapunov_trace(&cache, &bs, zc) {
                        Ok(v) => values.push(("trace", v)),
                        Err(e) if *method == MethodArg::Trace => return Err(usage("--z", e)),
                        // on the spectrum the trace route is undefined; the others still apply
                        Err(_) => {}
                    }
                }
                if wanted(MethodArg::Chambers) {
                    if *z_imag != 0.0 {
                        if *method == MethodArg::Chambers {
                            return Err(usage("--z-imag", "the chambers route takes real energies"));
                        }
                    } else {
                        values.push(("chambers", lyapunov_chambers(fr, beta, *z).map_err(failed)?));
                    }
                }
                for (name, v) in values {
                    t.row(cells![fr.p(), fr.q(), num(beta), num(*z), num(*z_imag), name, num(v.value)]);
                }
            }
            emit(cli, t.into_string().as_bytes(), stdout)?;
        }
        Command::Gradient { freq, beta, z, route, grid, fd_step } => {
            let fr = parse_alpha(&freq.alpha)?;
            let beta = check_beta(*beta)?;
            let bs = bands(fr, beta).map_err(failed)?;
            let (g0, g1, imag) = match route {
                RouteArg::Grid => {
                    let cache = PhaseSpectra::new(fr, beta, *grid).map_err(|e| usage("--grid", e))?;
                    let g = gradient(&cache, &bs, *z).map_err(in_gap_error)?;
                    (g.g0, g.g1, g.imag_residue)
                }
                RouteArg::Exact => {
                    gradient(&PhaseSpectra::new(fr, beta, 1).map_err(failed)?, &bs, *z).map_err(in_gap_error)?;
                    let jet = chambers_surface(fr, beta, *z).map_err(in_gap_error)?;
                    (jet.g0(), jet.g1(), 0.0)
                }
            };
            let (fd0, fd1) = fd_gradient(fr, beta, *z, *fd_step).map_err(failed)?;
            let config = RunConfig::new("gradient")
                .with("alpha", fr)
                .with("beta", num(beta))
                .with("z", num(*z))
                .with("route", format!("{route:?}").to_lowercase())
                .with("grid", grid)
                .with("fd_step", num(*fd_step));
            let mut t = Table::new(
                &config.comment_line(),
                &["p", "q", "beta", "z", "g0", "g1", "imag_residue", "fd_g0", "fd_g1"],
            );
            t.row(cells![fr.p(), fr.q(), num(beta), num(*z), num(g0), num(g1), num(imag), num(fd0), num(fd1)]);
            emit(cli, t.into_string().as_bytes(), stdout)?;
        }
        Command::CriticalScan { freq, betas, threshold, min_width } => {
            let freqs = freq.resolve()?;
            let bs = betas.resolve()?;
            let mut config = RunConfig::new("critical-scan")
                .with("betas", betas.label())
                .with("threshold", num(*threshold))
                .with("min_width", num(*min_width));
            freq.record(&mut config);
            let mut rows = Vec::new();
            let mut errors = Vec::new();
            let mut min_margin = f64::INFINITY;
            for &fr in &freqs {
                for &beta in &bs {
                    for g in gaps(fr, beta, *min_width).map_err(failed)?.iter().filter(|g| g.open) {
                        match critical_scan(g) {
                            Ok(cp) => {
                                min_margin = min_margin.min(cp.margin());
                                rows.push(json!({
                                    "p": fr.p(), "q": fr.q(), "beta": beta, "m": g.m, "n": g.n,
                                    "s_star": cp.s_star, "g1_abs": cp.margin(),
                                    "hessian_det": cp.hessian.det(),
                                    "hessian_d2z": cp.hessian.d2z, "hessian_d2beta": cp.hessian.d2b,
                                    "monotone": cp.monotone,
                                }));
                            }
                            Err(e) => errors.push(
                                json!({"p": fr.p(), "q": fr.q(), "beta": beta, "j": g.j, "error": e.to_string()}),
                            ),
                        }
                    }
                }
            }
            let ok = errors.is_empty() && rows.iter().all(|r| r["g1_abs"].as_f64().unwrap_or(0.0) > *threshold);
            let report = json!({
                "provenance": config.provenance(),
                "threshold": threshold,
                "gaps": rows.len(),
                "min_margin": if rows.is_empty() { serde_json::Value::Null } else { json!(min_margin) },
                "all_above_threshold": ok,
                "rows": rows,
                "errors": errors,
            });
            emit(cli, pretty(&report).as_bytes(), stdout)?;
            if !ok {
                writeln!(stderr, "critical-scan: margin at or below {threshold:e} or a scan failed")?;
                return Ok(1);
            }
        }
        Command::Hessian { freq, beta, z, grid, fd_step } => {
            let fr = parse_alpha(&freq.alpha)?;
            let beta = check_beta(*beta)?;
            let bs = bands(fr, beta).map_err(failed)?;
            let cache = PhaseSpectra::new(fr, beta, *grid).map_err(|e| usage("--grid", e))?;
            let h = hessian(&cache, &bs, *z).map_err(in_gap_error)?;
            let fd = fd_hessian(fr, beta, *z, *fd_step).map_err(failed)?;
            let config = RunConfig::new("hessian")
                .with("alpha", fr)
                .with("beta", num(beta))
                .with("z", num(*z))
                .with("grid", grid)
                .with("fd_step", num(*fd_step));
            let scale = h.d2z.abs().max(h.d2b.abs()).max(h.dzb.abs());
            let fd_rel =
                [h.d2z - fd.d2z, h.dzb - fd.dzb, h.d2b - fd.d2b].iter().fold(0.0f64, |m, d| m.max(d.abs())) / scale;
            let report = json!({
                "provenance": config.provenance(),
                "p": fr.p(), "q": fr.q(), "beta": beta, "z": z,
                "d2z": h.d2z, "dzdbeta": h.dzb, "d2beta": h.d2b, "det": h.det(),
                "diagonal_negative": h.diagonal_negative(),
                "det_positive": h.det() > 0.0,
                "fd": {"d2z": fd.d2z, "dzdbeta": fd.dzb, "d2beta": fd.d2b, "max_relative_difference": fd_rel},
            });
            emit(cli, pretty(&report).as_bytes(), stdout)?;
        }
        Command::Coeffs { freq, beta, z, window, kind } | Command::Recursion { freq, beta, z, window, kind } => {
            let name = if matches!(cli.command, Command::Coeffs { .. }) { "coeffs" } else { "recursion" };
            if name == "recursion" && !matches!(kind, KindArg::RPlus | KindArg::RMinus) {
                return Err(usage("--kind", "recursion produces r+ or r-"));
            }
            let fr = parse_alpha(&freq.alpha)?;
            let beta = check_beta(*beta)?;
            if *window < 2 {
                return Err(usage("--window", "must be at least 2"));
            }
            let sheet = build_sheet(fr, beta, *z, *window, *kind)?;
            let config = RunConfig::new(name)
                .with("alpha", fr)
                .with("beta", num(beta))
                .with("z", num(*z))
                .with("window", window)
                .with("kind", sheet_kind_flag(*kind));
            let residual = residual_21(&sheet, beta, *z);
            emit(cli, sheet_table(&config, &sheet, Some(residual)).as_bytes(), stdout)?;
        }
        Command::Decay { freq, beta, z, window, kind, slopes, offsets } => {
            let fr = parse_alpha(&freq.alpha)?;
            let beta = check_beta(*beta)?;
            if let Some(s) = slopes.iter().find(|s| s.abs() != 1) {
                return Err(usage("--slopes", format!("{s}: slopes are 1 or -1")));
            }
            let sheet = build_sheet(fr, beta, *z, *window, *kind)?;
            let config = RunConfig::new("decay")
                .with("alpha", fr)
                .with("beta", num(beta))
                .with("z", num(*z))
                .with("window", window)
                .with("kind", sheet_kind_flag(*kind))
                .with("slopes", format!("{slopes:?}"))
                .with("offsets", format!("{offsets:?}"));
            let mut t = Table::new(
                &config.comment_line(),
                &["kind", "slope", "offset", "rate", "residual", "p_lo", "p_hi", "points"],
            );
            for &s in slopes {
                for &k in offsets {
                    let e = decay_rate(&sheet, s, k).map_err(|e| usage("--window", e))?;
                    t.row(cells![
                        sheet.kind.name(),
                        s,
                        k,
                        num(e.rate),
                        num(e.residual),
                        e.window.0,
                        e.window.1,
                        e.points
                    ]);
                }
            }
            emit(cli, t.into_string().as_bytes(), stdout)?;
        }
        Command::SigmaCheck { freq, beta, theta1, theta2, samples, neumann_terms } => {
            let fr = parse_alpha(&freq.alpha)?;
            let beta = check_beta(*beta)?;
            if beta >= 1.0 {
                return Err(usage("--beta", "the identities are checked for couplings in (0, 1)"));
            }
            let phases: Vec<(f64, f64)> = match (theta1, theta2) {
                (Some(a), Some(b)) => vec![(*a, *b)],
                _ => {
                    let (g, s2) = ((5f64.sqrt() - 1.0) / 2.0, 2f64.sqrt() - 1.0);
                    let tau = std::f64::consts::TAU;
                    (1..=*samples).map(|k| (tau * (k as f64 * g).fract(), tau * (k as f64 * s2).fract())).collect()
                }
            };
            let config = RunConfig::new("sigma-check")
                .with("alpha", fr)
                .with("beta", num(beta))
                .with("phases", format!("{phases:?}"))
                .with("neumann_terms", neumann_terms);
            let mut worst = 0.0f64;
            let mut rows = Vec::new();
            for &(t1, t2) in &phases {
                let rep = build_rep(fr, t1, t2).map_err(failed)?;
                let r = identity_residuals(&rep, beta).map_err(failed)?;
                worst = worst.max(r.max());
                rows.push(json!({
                    "theta1": t1, "theta2": t2,
                    "commutation": r.commutation, "unitarity": r.unitarity,
                    "hamiltonian_split": r.hamiltonian_split, "uv_relations": r.uv_relations,
                    "uu_star": r.uu_star, "rho_identity": r.rho_identity, "rho_automorphism": r.rho_automorphism,
                    "sigma_identity": r.sigma_identity, "sigma_fixes_u": r.sigma_fixes_u,
                    "sigma_adjoints_v": r.sigma_adjoints_v, "sigma_antiautomorphism": r.sigma_antiautomorphism,
                    "max": r.max(),
                }));
            }
            let rep = build_rep(fr, phases[0].0, phases[0].1).map_err(failed)?;
            let neumann = neumann_inverse(&rep, beta, *neumann_terms).map_err(failed)?;
            let report = json!({
                "provenance": config.provenance(),
                "samples": rows,
                "max_residual": worst,
                "tolerance": 1e-10,
                "pass": worst <= 1e-10,
                "neumann": {
                    "terms": neumann_terms,
                    "observed_ratio": neumann.observed_ratio,
                    "beta": beta,
                    "constant": neumann.constant,
                    "final_error": neumann.errors.last(),
                },
            });
            emit(cli, pretty(&report).as_bytes(), stdout)?;
        }
        Command::Butterfly { qmax, beta, min_width, workers: w, checkpoint, resume, stop_after } => {
            let beta = check_beta(*beta)?;
            if *qmax == 0 {
                return Err(usage("--qmax", "must be at least 1"));
            }
            let w = workers(*w)?;
            match &cli.out {
                Some(out) => {
                    let opts = BatchOptions {
                        q_max: *qmax,
                        beta,
                        min_width: *min_width,
                        workers: w,
                        checkpoint: checkpoint.as_ref().map(|c| resolve(cli, c)),
                        resume: *resume,
                        stop_after: *stop_after,
                    };
                    let out = resolve(cli, out);
                    if let (Some(ck), true) = (&opts.checkpoint, opts.resume) {
                        if !ck.exists() {
                            return Err(usage("--checkpoint", format!("no checkpoint at {}", ck.display())));
                        }
                        if !out.exists() {
                            return Err(usage("--resume", format!("no partial output at {}", out.display())));
                        }
                    }
                    if let Some(parent) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                        fs::create_dir_all(parent)?;
                    }
                    match run_batch(&opts, &out) {
                        Ok(BatchOutcome::Complete { rows }) => writeln!(stderr, "butterfly: {rows} fractions written")?,
                        Ok(BatchOutcome::Stopped { completed, total }) => writeln!(
                            stderr,
                            "butterfly: stopped after {completed} of {total} fractions; rerun with --resume"
                        )?,
                        Err(BatchError::Invalid(m)) if *resume => return Err(usage("--resume", m)),
                        Err(e) => return Err(failed(e)),
                    }
                }
                None => {
                    if checkpoint.is_some() {
                        return Err(usage("--checkpoint", "checkpointing needs --out"));
                    }
                    let d = compute_dataset(*qmax, beta, *min_width, w).map_err(failed)?;
                    emit(cli, dataset_file(&dataset_config(*qmax, beta, *min_width), &d).as_bytes(), stdout)?;
                }
            }
        }
        Command::Render { qmax, beta, format, width, height, fill_gaps, workers: w } => {
            let beta = check_beta(*beta)?;
            if *qmax == 0 {
                return Err(usage("--qmax", "must be at least 1"));
            }
            let d = compute_dataset(*qmax, beta, DEFAULT_MIN_WIDTH, workers(*w)?).map_err(failed)?;
            let style = Style {
                width: *width,
                height: *height,
                fill_gaps: *fill_gaps,
                format: match format {
                    FormatArg::Svg => Format::Svg,
                    FormatArg::Ppm => Format::Ppm,
                },
            };
            let bytes = render(&d, &style).map_err(|e| usage("--width", e))?;
            emit(cli, &bytes, stdout)?;
        }
        Command::Track { freq, label, betas, min_width } => {
            let fr = parse_alpha(&freq.alpha)?;
            let bs = betas.resolve()?;
            let (m, n) = label
                .split_once(',')
                .and_then(|(m, n)| Some((m.trim().parse::<i64>().ok()?, n.trim().parse::<i64>().ok()?)))
                .ok_or_else(|| usage("--label", format!("{label}: expected M,N")))?;
            let track = track_gap((m, n), fr, &bs, *min_width).map_err(|e| usage("--label", e))?;
            let config = RunConfig::new("track")
                .with("alpha", fr)
                .with("label", format!("{m},{n}"))
                .with("betas", betas.label())
                .with("min_width", num(*min_width));
            let mut t = Table::new(&config.comment_line(), &["p", "q", "m", "n", "beta", "width", "open"]);
            for ((b, w), o) in track.betas.iter().zip(&track.widths).zip(&track.open) {
                t.row(cells![fr.p(), fr.q(), m, n, num(*b), num(*w), o]);
            }
            emit(cli, t.into_string().as_bytes(), stdout)?;
        }
        Command::Franel { nmax } => {
            let rows = franel_table(*nmax).map_err(|e| usage("--nmax", e))?;
            let config = RunConfig::new("franel").with("nmax", nmax);
            emit(cli, franel_csv(&config, &rows).as_bytes(), stdout)?;
        }
        Command::Farey { order } => {
            let s = farey(*order).map_err(|e| usage("--order", e))?;
            let config = RunConfig::new("farey").with("order", order);
            let mut t = Table::default();
            t.comment(&config.comment_line());
            t.comment(&format!(
                "# terms={} phi_cumulative={} unimodular_neighbors={}",
                s.len(),
                phi_cumulative(*order).map_err(failed)?,
                s.neighbor_determinants().iter().all(|&d| d == 1)
            ));
            t.row(cells!["p", "q"]);
            for f in &s.fractions {
                t.row(cells![f.p(), f.q()]);
            }
            emit(cli, t.into_string().as_bytes(), stdout)?;
        }
        Command::CountComponents { qmax, beta, k, min_width, workers: w } => {
            let beta = check_beta(*beta)?;
            if *qmax == 0 {
                return Err(usage("--qmax", "must be at least 1"));
            }
            if *k <= 0 {
                return Err(usage("--k", "Hall number must be positive"));
            }
            let d = compute_dataset(*qmax, beta, *min_width, workers(*w)?).map_err(failed)?;
            let c = component_count(&d, *k).map_err(|e| usage("--k", e))?;
            let config = RunConfig::new("count-components")
                .with("Q", qmax)
                .with("beta", num(beta))
                .with("k", k)
                .with("min_width", num(*min_width));
            emit(cli, pretty(&component_json(&config, &c)).as_bytes(), stdout)?;
        }
        Command::Selftest => {
            let checks = selftest::run_all();
            let mut t = String::new();
            for c in &checks {
                t.push_str(&format!("{} {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
            }
            let failed_n = checks.iter().filter(|c| !c.pass).count();
            t.push_str(&format!("passed {} failed {}\n", checks.len() - failed_n, failed_n));
            emit(cli, t.as_bytes(), stdout)?;
            return Ok(if failed_n == 0 { 0 } else { 1 });
        }
    }
    Ok(0)
}
