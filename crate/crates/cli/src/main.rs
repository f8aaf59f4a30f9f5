//! `grushin`: evaluation, scans and the acceptance suite from the command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or domain error, 3 a check
//! failed.

mod output;
mod scans;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grushin::config::{OutputFormat, RunConfig};
use grushin::kernels::zonal_kernel;
use grushin::special::envelope::calibrate;
use grushin::special::{jacobi_eval, profile_eval, EnvelopeCalibration, JacobiIndex, ProfileIndex};
use grushin::spectrum::{HalfInt, Regime};
use grushin::verify::{run_criterion, VerifyOptions, CRITERIA};
use serde_json::{json, Map};

use output::{emit, write_atomic};
use scans::ScanOutcome;

#[derive(Parser)]
#[command(name = "grushin", version, about = "Spectral computations for spherical Grushin operators")]
struct Cli {
    /// JSON run configuration; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single special function value.
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Run a parameter scan and write its table and manifest.
    #[command(subcommand)]
    Scan(ScanCmd),
    /// Run the acceptance criteria.
    Verify(VerifyArgs),
    /// Refit the profile envelope constants.
    Calibrate(CalibrateArgs),
}

#[derive(Subcommand)]
enum EvalCmd {
    /// Jacobi polynomial P_j^{(alpha,beta)}(x).
    Jacobi {
        #[arg(long)]
        j: u32,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
    },
    /// Profile X^d_{l,m}(psi); indices are given as twice their value.
    Profile {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        ell2: u32,
        #[arg(long)]
        m2: u32,
        #[arg(long, allow_negative_numbers = true)]
        psi: f64,
    },
    /// Zonal kernel Z^k_m(u) of S^k; m is given as twice its value.
    Zonal {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m2: u32,
        #[arg(long, allow_negative_numbers = true)]
        u: f64,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    /// Comma-separated weight exponents.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    ell_max: Option<f64>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    All,
    Elliptic,
    Subelliptic,
}

#[derive(Subcommand)]
enum ScanCmd {
    /// Elliptic plus weighted subelliptic cluster sums.
    Cluster {
        #[command(flatten)]
        common: Common,
        /// Inclusive window range `a:b`.
        #[arg(long)]
        i: Option<String>,
        /// Comma-separated |x| values.
        #[arg(long, value_delimiter = ',', default_value = "0,0.015625,0.03125,0.0625,0.125")]
        x: Vec<f64>,
        #[arg(long, value_enum, default_value = "all")]
        regime: RegimeArg,
    },
    /// Elliptic cluster sums only.
    Elliptic {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        i: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.015625,0.03125,0.0625,0.125")]
        x: Vec<f64>,
    },
    /// Weighted Plancherel ratios for the indicator family.
    Plancherel {
        #[command(flatten)]
        common: Common,
        /// Powers of two in the range `a:b`.
        #[arg(long = "N", default_value = "4:64")]
        n: String,
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.3")]
        centers: Vec<f64>,
    },
    /// Riesz ratios at ell_max/2 and ell_max.
    Riesz {
        #[command(flatten)]
        common: Common,
        #[arg(long = "N", value_delimiter = ',', default_value = "1,2")]
        n: Vec<u32>,
    },
    /// Monte-Carlo ball volumes against the closed form.
    Volume {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.3")]
        psi: Vec<f64>,
    },
    /// Weight integrability and growth.
    Weights {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.3")]
        psi: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
    },
    /// L1 column norms of Bochner-Riesz means.
    Br {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        lambda: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        delta: Vec<f64>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Reduced grids for the expensive criteria.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated criterion ids.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u32>>,
    /// Where to write the JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 200)]
    ell_max: u32,
    #[arg(long, default_value_t = 8001)]
    points: usize,
    #[arg(long, default_value = "2:6")]
    dims: String,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Io(String),
    Usage(String),
    Checks,
}

impl From<grushin::Error> for Failure {
    fn from(e: grushin::Error) -> Self {
        match e {
            grushin::Error::Io(e) => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn parse_range(s: &str) -> Result<(u32, u32), Failure> {
    let bad = || Failure::Usage(format!("expected a range `a:b`, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn powers_of_two(lo: u32, hi: u32) -> Vec<u32> {
    (0..32).map(|e| 1u32 << e).filter(|&n| n >= lo && n <= hi).collect()
}

fn load_config(path: Option<&PathBuf>, common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let c = common.clone();
    if let Some(v) = c.d {
        cfg.d = v;
    }
    if let Some(v) = c.k {
        cfg.k = v;
    }
    if let Some(v) = c.alpha {
        cfg.alphas = v;
    }
    if c.epsilon.is_some() {
        cfg.epsilon = c.epsilon;
    }
    if let Some(v) = c.ell_max {
        cfg.ell_max = v;
    }
    if let Some(v) = c.seeds {
        cfg.seeds = v;
    }
    if let Some(v) = c.out {
        cfg.output_dir = v;
    }
    if let Some(f) = c.format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_eval(cmd: EvalCmd) -> CmdResult {
    let v = match cmd {
        EvalCmd::Jacobi { j, alpha, beta, x } => jacobi_eval(JacobiIndex::new(j, alpha, beta)?, x)?,
        EvalCmd::Profile { d, ell2, m2, psi } => profile_eval(ProfileIndex::from_twice(d, ell2, m2)?, psi)?,
        EvalCmd::Zonal { k, m2, u } => zonal_kernel(k, HalfInt::from_twice(m2), u)?,
    };
    println!("{v}");
    Ok(())
}

fn finish_scan(cfg: &RunConfig, stem: &str, out: ScanOutcome) -> CmdResult {
    let passed = out.checks.iter().all(|c| c.passed);
    let mut manifest = Map::new();
    manifest.insert("checks".into(), json!(out.checks));
    manifest.insert("tolerances".into(), json!(out.tolerances));
    manifest.insert("fitted_constants".into(), json!(out.fitted));
    manifest.insert("passed".into(), json!(passed));
    let path = emit(cfg, stem, &out.table, manifest)?;
    println!("wrote {} ({} rows)", path.display(), out.table.rows.len());
    for (name, v) in &out.fitted {
        println!("{name} = {v:.6}");
    }
    for c in &out.checks {
        let op = if c.kind == grushin::verify::Bound::AtMost { "<=" } else { ">=" };
        let mark = if c.passed { "ok" } else { "FAILED" };
        println!("check {}: {:.6} {op} {} {mark}", c.label, c.measured, c.bound);
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn with_i_range(mut cfg: RunConfig, i: Option<&str>) -> Result<RunConfig, Failure> {
    if let Some(s) = i {
        cfg.i_range = parse_range(s)?;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn cmd_scan(config: Option<&PathBuf>, cmd: ScanCmd) -> CmdResult {
    match cmd {
        ScanCmd::Cluster { common, i, x, regime } => {
            let cfg = with_i_range(load_config(config, &common)?, i.as_deref())?;
            let regime = match regime {
                RegimeArg::All => Regime::All,
                RegimeArg::Elliptic => Regime::Elliptic,
                RegimeArg::Subelliptic => Regime::Subelliptic,
            };
            let out = scans::cluster(&cfg, regime, &x)?;
            finish_scan(&cfg, "scan_cluster", out)
        }
        ScanCmd::Elliptic { common, i, x } => {
            let cfg = with_i_range(load_config(config, &common)?, i.as_deref())?;
            let out = scans::cluster(&cfg, Regime::Elliptic, &x)?;
            finish_scan(&cfg, "scan_elliptic", out)
        }
        ScanCmd::Plancherel { common, n, centers } => {
            let cfg = load_config(config, &common)?;
            let (lo, hi) = parse_range(&n)?;
            let out = scans::plancherel(&cfg, &powers_of_two(lo, hi), &centers)?;
            finish_scan(&cfg, "scan_plancherel", out)
        }
        ScanCmd::Riesz { common, n } => {
            let cfg = load_config(config, &common)?;
            let out = scans::riesz(&cfg, &n)?;
            finish_scan(&cfg, "scan_riesz", out)
        }
        ScanCmd::Volume { common, psi } => {
            let cfg = load_config(config, &common)?;
            let out = scans::volume(&cfg, &psi)?;
            finish_scan(&cfg, "scan_volume", out)
        }
        ScanCmd::Weights { common, psi, pairs } => {
            let cfg = load_config(config, &common)?;
            let out = scans::weights(&cfg, &psi, pairs)?;
            finish_scan(&cfg, "scan_weights", out)
        }
        ScanCmd::Br { common, lambda, delta } => {
            let cfg = load_config(config, &common)?;
            let out = scans::bochner_riesz(&cfg, &lambda, &delta)?;
            finish_scan(&cfg, "scan_br", out)
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let mut opts = VerifyOptions {
        quick: args.quick,
        ..VerifyOptions::default()
    };
    if let Some(s) = args.seed {
        opts.seed = s;
    }
    let ids: Vec<u32> = match args.only {
        Some(ids) => ids,
        None => CRITERIA.to_vec(),
    };
    let mut outcomes = vec![];
    for id in ids {
        let o = run_criterion(id, &opts)?;
        println!("{}", o.summary_line());
        outcomes.push(o);
    }
    let passed = outcomes.iter().all(|o| o.passed);
    let report = json!({ "options": opts, "passed": passed, "criteria": outcomes });
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    if let Some(p) = args.report {
        write_atomic(&p, &text)?;
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn cmd_calibrate(args: CalibrateArgs) -> CmdResult {
    let (lo, hi) = parse_range(&args.dims)?;
    if lo < 2 {
        return Err(Failure::Usage("envelope calibration needs d >= 2".into()));
    }
    let mut by_dim = BTreeMap::new();
    for d in lo..=hi {
        // Largest lattice point of N_d not above ell_max.
        let twice = 2 * args.ell_max;
        let ell = HalfInt::from_twice(if (twice + 1 - d) % 2 == 0 { twice } else { twice - 1 });
        let p = calibrate(d, ell, args.points)?;
        println!("d = {d}: prefactor {:.6}, c_exp {:.6}", p.prefactor, p.c_exp);
        by_dim.insert(d, p);
    }
    let cal = EnvelopeCalibration { by_dim };
    let text = serde_json::to_string_pretty(&cal).expect("calibration serializes") + "\n";
    write_atomic(&args.out, &text)?;
    Ok(())
}

fn init_threads() {
    if let Some(n) = std::env::var("GRUSHIN_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // A second initialization only fails if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let result = match cli.command {
        Command::Eval(cmd) => cmd_eval(cmd),
        Command::Scan(cmd) => cmd_scan(cli.config.as_ref(), cmd),
        Command::Verify(args) => cmd_verify(args),
        Command::Calibrate(args) => cmd_calibrate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Checks) => {
            eprintln!("one or more checks failed");
            ExitCode::from(3)
        }
    }
}
