//! `szego`: batch front end for kernel evaluation, verification scans,
//! projections and the lower-bound construction.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 usage error,
//! 3 input error.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use szego_core::io::{fmt_f64, read_table, to_json_string, write_table};
use szego_core::kernel::{kernel, reproducing_constant, s_eval};
use szego_core::lattice::LatticeSpec;
use szego_core::projection::{point_header, reproduce_check, ConvolutionPlan, ReproduceReport, SampledFunction};
use szego_core::sampling::{gaussian_point, sample_rng};
use szego_core::verification::{
    ball_pair_lower_bound, lower_bound_witness, run_claim, unit_sphere_nonvanishing, verify_all, BoundReport,
    Nonvanishing, ScanOptions, Witness,
};
use szego_core::{Error, GroupPoint, HVector, KernelConfig, Quaternion, SiegelPoint};

#[derive(Parser)]
#[command(name = "szego", version, about = "Cauchy-Szego kernel on the quaternionic Heisenberg group")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Quaternionic dimension of the Siegel domain (the group is H^{n-1}).
    #[arg(long, global = true, default_value_t = 2)]
    n: usize,
    /// Kernel constant. Defaults to 1, or to the reproducing normalization
    /// for `project` and `reproduce`.
    #[arg(long, global = true)]
    c: Option<f64>,
    /// Relative `|Im σ|/|σ|` below which the sum form replaces the closed form.
    #[arg(long = "switch-tol", global = true, default_value_t = 1e-3)]
    switch_tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Add `runtime_ms` to JSON outputs (makes them run-dependent).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Args)]
struct LatticeArgs {
    #[arg(long, default_value_t = 4.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.5)]
    hy: f64,
    /// Vertical spacing; defaults to hy^2.
    #[arg(long)]
    ht: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    exclusion: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel values for the points of a CSV file (`t1..,y..` or `x1..x4`).
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Every verification claim (or those named by --claim) as one JSON report.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        claim: Vec<String>,
    },
    /// A single named claim.
    Scan {
        #[arg(long)]
        claim: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Truncated principal-value projection of sampled data at one point.
    Project {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Comma-separated group coordinates `t1,t2,t3,y1,...`; the identity
        /// when absent.
        #[arg(long)]
        point: Option<String>,
        /// Use the regularized kernel `K_ε` on the full lattice.
        #[arg(long)]
        eps: Option<f64>,
        /// Sum `K(h^{-1} g) f(h)` instead of `f(h) K(h^{-1} g)`.
        #[arg(long)]
        reversed: bool,
    },
    /// Lattice reproducing check `Σ S(q, ξ) S(ξ, p0) w ≈ S(q, p0)`.
    Reproduce {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Comma-separated `q1 (4 reals), q' (4(n-1) reals)`; default `(2, 0)`.
        #[arg(long)]
        p0: Option<String>,
        #[arg(long)]
        q: Option<String>,
        /// Relative error accepted as a pass.
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
    },
    /// Nonvanishing on the unit sphere, the witness point and the ball-pair
    /// lower bound.
    LowerBound {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Distance `R` of the witness from the identity.
        #[arg(long = "big-r", default_value_t = 2.0)]
        big_r: f64,
        /// Ball radius `r` for the ball-pair bound.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
}

enum Failure {
    Usage(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Argument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Input(m)) => {
            eprintln!("input error: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let common = &cli.common;
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let reproducing = matches!(cli.command, Command::Project { .. } | Command::Reproduce { .. });
    let c = common.c.unwrap_or_else(|| {
        if reproducing && (2..=szego_core::kernel::MAX_N).contains(&common.n) {
            reproducing_constant(common.n)
        } else {
            1.0
        }
    });
    let cfg = KernelConfig::new(common.n, c)
        .and_then(|k| k.with_switch_tol(common.switch_tol))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let start = Instant::now();
    match &cli.command {
        Command::Eval { input } => eval(input, &cfg, common),
        Command::Verify { samples, claim } => {
            let opts = ScanOptions::new(*samples, common.seed);
            let reports = if claim.is_empty() {
                verify_all(&cfg, &opts)?
            } else {
                claim
                    .iter()
                    .map(|c| run_claim(c, &cfg, &opts))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(usage)?
            };
            let pass = reports.iter().all(|r| r.pass);
            let out = VerifyOutput {
                n: cfg.n,
                c: cfg.c,
                switch_tol: cfg.switch_tol,
                seed: common.seed,
                samples: *samples,
                pass,
                reports,
                runtime_ms: timing(common, start),
            };
            emit(common, &out)?;
            Ok(pass)
        }
        Command::Scan { claim, samples } => {
            let report = run_claim(claim, &cfg, &ScanOptions::new(*samples, common.seed)).map_err(usage)?;
            let pass = report.pass;
            emit(
                common,
                &ScanOutput {
                    report,
                    runtime_ms: timing(common, start),
                },
            )?;
            Ok(pass)
        }
        Command::Project {
            input,
            lattice,
            point,
            eps,
            reversed,
        } => {
            let spec = lattice_spec(lattice)?;
            let file = File::open(input).map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
            let f = SampledFunction::read_csv(BufReader::new(file), spec.hy, spec.ht)?;
            if f.n != cfg.n {
                return Err(Failure::Input(format!(
                    "{} holds samples for n = {}, but --n is {}",
                    input.display(),
                    f.n,
                    cfg.n
                )));
            }
            let g = match point {
                Some(s) => GroupPoint::from_coords(&parse_list(s, 3 + 4 * (cfg.n - 1), "--point")?)
                    .map_err(|e| Failure::Usage(e.to_string()))?,
                None => GroupPoint::identity(cfg.n),
            };
            let plan = match eps {
                Some(e) => ConvolutionPlan::regularized(&spec, &cfg, *e)?,
                None => ConvolutionPlan::new(&spec, &cfg)?,
            };
            let value = if *reversed {
                plan.apply_reversed(&f, &g)?
            } else {
                plan.apply(&f, &g)?
            };
            let out = ProjectOutput {
                point: g.coords(),
                value,
                spec,
                eps: *eps,
                order: if *reversed { "reversed" } else { "forward" },
                c: cfg.c,
                runtime_ms: timing(common, start),
            };
            emit(common, &out)?;
            Ok(true)
        }
        Command::Reproduce { lattice, p0, q, tol } => {
            let spec = lattice_spec(lattice)?;
            let p0 = siegel_point(p0.as_deref(), cfg.n, "--p0")?;
            let q = siegel_point(q.as_deref(), cfg.n, "--q")?;
            let report = reproduce_check(&p0, &q, &spec, &cfg)?;
            let pass = report.warning.is_none() && report.rel_err <= *tol;
            let out = ReproduceOutput {
                p0: siegel_coords(&p0),
                q: siegel_coords(&q),
                spec,
                c: cfg.c,
                tol: *tol,
                pass,
                report,
                runtime_ms: timing(common, start),
            };
            emit(common, &out)?;
            Ok(pass)
        }
        Command::LowerBound { samples, big_r, r } => {
            let nonvanishing = unit_sphere_nonvanishing(&cfg);
            let witness = lower_bound_witness(&GroupPoint::identity(cfg.n), *big_r, &cfg);
            let g = gaussian_point(&mut sample_rng(common.seed, 0), cfg.n);
            let ball_pair = ball_pair_lower_bound(&g, *r, &cfg, *samples, common.seed);
            for res in [witness.as_ref().err(), ball_pair.as_ref().err()].into_iter().flatten() {
                if let Error::Argument(m) = res {
                    return Err(Failure::Usage(m.clone()));
                }
            }
            let pass = nonvanishing.is_ok() && witness.is_ok() && ball_pair.as_ref().map(|b| b.pass).unwrap_or(false);
            let errors: Vec<String> = [
                nonvanishing.as_ref().err(),
                witness.as_ref().err(),
                ball_pair.as_ref().err(),
            ]
            .into_iter()
            .flatten()
            .map(|e| e.to_string())
            .collect();
            let out = LowerBoundOutput {
                n: cfg.n,
                c: cfg.c,
                seed: common.seed,
                pass,
                nonvanishing: nonvanishing.ok(),
                witness: witness.ok(),
                ball_pair: ball_pair.ok(),
                errors,
                runtime_ms: timing(common, start),
            };
            emit(common, &out)?;
            Ok(pass)
        }
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn timing(common: &Common, start: Instant) -> Option<u64> {
    common.timing.then(|| start.elapsed().as_millis() as u64)
}

#[derive(Serialize)]
struct VerifyOutput {
    n: usize,
    c: f64,
    switch_tol: f64,
    seed: u64,
    samples: usize,
    pass: bool,
    reports: Vec<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u64>,
}

#[derive(Serialize)]
struct ScanOutput {
    #[serde(flatten)]
    report: BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u64>,
}

#[derive(Serialize)]
struct ProjectOutput {
    point: Vec<f64>,
    value: Quaternion,
    spec: LatticeSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    order: &'static str,
    c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u64>,
}

#[derive(Serialize)]
struct ReproduceOutput {
    p0: Vec<f64>,
    q: Vec<f64>,
    spec: LatticeSpec,
    c: f64,
    tol: f64,
    pass: bool,
    report: ReproduceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u64>,
}

#[derive(Serialize)]
struct LowerBoundOutput {
    n: usize,
    c: f64,
    seed: u64,
    pass: bool,
    nonvanishing: Option<Nonvanishing>,
    witness: Option<Witness>,
    ball_pair: Option<BoundReport>,
    errors: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u64>,
}

fn emit<T: Serialize>(common: &Common, value: &T) -> Result<(), Failure> {
    let text = to_json_string(value)?;
    write_out(common, text.as_bytes())
}

fn write_out(common: &Common, bytes: &[u8]) -> Result<(), Failure> {
    let res = match &common.out {
        Some(p) => File::create(p).and_then(|mut f| f.write_all(bytes)),
        None => std::io::stdout().write_all(bytes),
    };
    res.map_err(|e| Failure::Input(format!("writing output: {e}")))
}

fn lattice_spec(a: &LatticeArgs) -> Result<LatticeSpec, Failure> {
    let spec = LatticeSpec::new(a.radius, a.hy, a.exclusion).map_err(usage)?;
    match a.ht {
        Some(ht) => spec.with_ht(ht).map_err(usage),
        None => Ok(spec),
    }
}

fn parse_list(s: &str, len: usize, flag: &str) -> Result<Vec<f64>, Failure> {
    let vals = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(format!("{flag}: {e}")))?;
    if vals.len() != len {
        return Err(Failure::Usage(format!("{flag}: expected {len} numbers, got {}", vals.len())));
    }
    Ok(vals)
}

fn siegel_point(s: Option<&str>, n: usize, flag: &str) -> Result<SiegelPoint, Failure> {
    let Some(s) = s else {
        return Ok(SiegelPoint::new(Quaternion::real(2.0), HVector::zeros(n - 1)));
    };
    let v = parse_list(s, 4 * n, flag)?;
    let qprime = HVector::from_reals(&v[4..]).map_err(usage)?;
    Ok(SiegelPoint::new(Quaternion::new(v[0], v[1], v[2], v[3]), qprime))
}

fn siegel_coords(p: &SiegelPoint) -> Vec<f64> {
    p.q1.to_array().into_iter().chain(p.qprime.to_reals()).collect()
}

/// Rows that fail keep `NaN` values, `status = 1` and the error message.
fn eval(input: &PathBuf, cfg: &KernelConfig, common: &Common) -> Outcome {
    let file = File::open(input).map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
    let table = read_table(BufReader::new(file))?;
    let quaternion_cols: Vec<String> = (1..=4).map(|i| format!("x{i}")).collect();
    let point_cols = point_header(cfg.n);
    let sigma_mode = table.header == quaternion_cols;
    if !sigma_mode && table.header != point_cols {
        return Err(Failure::Input(format!(
            "line 1: header must be {} or {}",
            point_cols.join(","),
            quaternion_cols.join(",")
        )));
    }
    let mut header = table.header.clone();
    header.extend((1..=4).map(|i| format!("f{i}")));
    header.push("status".into());
    header.push("error".into());
    let mut failed = 0usize;
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|(line, vals)| {
            let value = if sigma_mode {
                s_eval(&Quaternion::new(vals[0], vals[1], vals[2], vals[3]), cfg)
            } else {
                GroupPoint::from_coords(vals).and_then(|g| kernel(&g, cfg))
            };
            let mut row: Vec<String> = vals.iter().map(|v| fmt_f64(*v)).collect();
            match value {
                Ok(v) => {
                    row.extend(v.to_array().iter().map(|x| fmt_f64(*x)));
                    row.push("0".into());
                    row.push(String::new());
                }
                Err(e) => {
                    failed += 1;
                    row.extend(std::iter::repeat("NaN".to_string()).take(4));
                    row.push("1".into());
                    row.push(format!("line {line}: {e}"));
                }
            }
            row
        })
        .collect();
    let mut buf = Vec::new();
    write_table(&mut buf, &header, rows)?;
    write_out(common, &buf)?;
    if failed > 0 {
        eprintln!("{failed} of {} rows could not be evaluated", table.rows.len());
    }
    Ok(true)
}
