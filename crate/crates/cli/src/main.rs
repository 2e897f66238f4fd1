//! `ncopy`: decide whether a positive map can be implemented by a completely
//! positive map acting on `N` copies of the input.

mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use ncopy::checks;
use ncopy::criteria::{necessity_basis_search, necessity_check, threshold_bounds, transposition_bounds};
use ncopy::extension::{critical_eta_a, critical_eta_b, implementable, min_copies, DEFAULT_BISECTION_WIDTH};
use ncopy::maps::{noisy_a, noisy_b, LinearMap};
use ncopy::mapspec::MapSpec;
use ncopy::{Error, Limits};
use serde::Serialize;
use serde_json::json;

use report::{MapInfo, RunReport};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DIMENSION: u8 = 3;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Noise {
    /// White noise on the output: `(1-η) Λ(ρ) + η (Tr L/d_in)(I/d_out) Tr ρ`
    A,
    /// Depolarized input: `(1-η) Λ(ρ) + η Λ(I/d_in) Tr ρ`
    B,
}

#[derive(Debug, Parser)]
#[command(name = "ncopy", version, about = "N-copy implementability of positive maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Map spec (e.g. `transposition:d=2`, `mix:[id:d=2@0.5,T:d=2@0.5]`) or `@choi.json`
    #[arg(long, global = true)]
    map: Option<String>,

    /// Number of copies
    #[arg(long = "n", global = true, default_value_t = 1)]
    n: usize,

    /// Largest copy number for `sweep`
    #[arg(long, global = true, default_value_t = 4)]
    n_max: usize,

    /// Mix noise of weight ETA into the map before analysis
    #[arg(long, global = true)]
    eta: Option<f64>,

    /// Noise family used with --eta
    #[arg(long, global = true, value_enum, default_value_t = Noise::A)]
    noise: Noise,

    /// PSD tolerance; for `verify` it replaces every per-check tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Largest matrix side that may be built
    #[arg(long, global = true, default_value_t = ncopy::tensor::DEFAULT_MAX_SIDE)]
    max_dim: usize,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Write the (noisy) map's Choi operator to PATH as JSON
    #[arg(long, global = true, value_name = "PATH")]
    dump_choi: Option<PathBuf>,

    /// Comma-separated substrings of check ids to run (`verify`)
    #[arg(long, global = true)]
    only: Option<String>,

    /// Write the sweep table to PATH as CSV
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,

    /// Extra random bases for the necessity test (`analyze`)
    #[arg(long, global = true, default_value_t = 0)]
    basis_trials: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Implementability verdict and necessity test at one copy number
    Analyze,
    /// Verdicts for N = 1..n-max, stopping at the first implementable N
    Sweep,
    /// Closed-form noise bounds and computed critical noise levels
    Thresholds,
    /// Run the built-in verification suite
    Verify,
}

struct Failure {
    code: u8,
    message: String,
    report: Option<RunReport>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DimensionLimit { .. } => EXIT_DIMENSION,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

type Outcome = Result<RunReport, Failure>;

const DEFAULT_TOL: f64 = ncopy::DEFAULT_TOL;

impl Cli {
    fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    fn limits(&self) -> Limits {
        Limits::new(self.max_dim)
    }

    fn load_map(&self, report: &mut RunReport) -> Result<LinearMap, Failure> {
        let text = self.map.as_deref().ok_or_else(|| Failure {
            code: EXIT_USAGE,
            message: "--map is required for this command".into(),
            report: None,
        })?;
        let spec = MapSpec::parse(text)?;
        let mut m = spec.resolve()?;
        let mut desc = spec.to_string();
        if let Some(eta) = self.eta {
            m = match self.noise {
                Noise::A => noisy_a(&m, eta)?,
                Noise::B => noisy_b(&m, eta)?,
            };
            let family = match self.noise {
                Noise::A => "noisy_a",
                Noise::B => "noisy_b",
            };
            desc = format!("{family}:({desc}):eta={eta}");
        }
        if let Some(path) = &self.dump_choi {
            m.save(path)?;
        }
        report.map = Some(MapInfo {
            spec: desc,
            d_in: m.d_in(),
            d_out: m.d_out(),
        });
        Ok(m)
    }

    fn new_report(&self, command: &str) -> RunReport {
        let mut r = RunReport::new(command, self.seed, self.tol());
        r.param("max_dim", self.max_dim);
        if let Some(eta) = self.eta {
            r.param("eta", eta);
            r.param("noise", format!("{:?}", self.noise).to_lowercase());
        }
        r
    }
}

#[derive(Serialize)]
struct AnalyzeRow {
    #[serde(rename = "N")]
    n: usize,
    dim: usize,
    lambda_min: f64,
    psd: bool,
    necessity_lambda_min: f64,
    necessity_conclusive: bool,
}

fn analyze(cli: &Cli) -> Outcome {
    let mut r = cli.new_report("analyze");
    r.param("N", cli.n);
    r.param("basis_trials", cli.basis_trials);
    let m = cli.load_map(&mut r)?;
    let report = implementable(&m, cli.n, cli.tol(), &cli.limits())?;
    let necessity = if cli.basis_trials > 0 {
        necessity_basis_search(&m, cli.n, cli.basis_trials, cli.seed, cli.tol())?
    } else {
        necessity_check(&m, cli.n, None, cli.tol())?
    };
    r.result(AnalyzeRow {
        n: cli.n,
        dim: report.dim,
        lambda_min: report.lambda_min,
        psd: report.psd,
        necessity_lambda_min: necessity.lambda_min,
        necessity_conclusive: necessity.conclusive_negative,
    });
    r.verdict("implementable", report.psd);
    r.verdict("not_implementable_by_necessity_test", necessity.conclusive_negative);
    Ok(r)
}

/// One sweep row; field names double as the CSV header.
#[derive(Serialize)]
struct SweepRow {
    #[serde(rename = "N")]
    n: usize,
    dim: usize,
    lambda_min: f64,
    psd: bool,
    thm5_lambda_min: f64,
    thm5_conclusive: bool,
}

fn sweep(cli: &Cli) -> Outcome {
    let mut r = cli.new_report("sweep");
    r.param("n_max", cli.n_max);
    let m = cli.load_map(&mut r)?;
    let search = min_copies(&m, cli.n_max, cli.tol(), &cli.limits())?;
    let mut rows = Vec::new();
    for rep in &search.reports {
        let nec = necessity_check(&m, rep.n, None, cli.tol())?;
        rows.push(SweepRow {
            n: rep.n,
            dim: rep.dim,
            lambda_min: rep.lambda_min,
            psd: rep.psd,
            thm5_lambda_min: nec.lambda_min,
            thm5_conclusive: nec.conclusive_negative,
        });
    }
    if let Some(path) = &cli.csv {
        write_csv(path, &rows).map_err(|e| Failure {
            code: EXIT_USAGE,
            message: format!("cannot write {}: {e}", path.display()),
            report: None,
        })?;
    }
    for row in rows {
        r.result(row);
    }
    r.verdict("min_n", search.min_n);
    r.verdict("limit_reached_at", search.limit_reached_at);
    if let Some(n) = search.limit_reached_at {
        return Err(Failure {
            code: EXIT_DIMENSION,
            message: format!(
                "N = {n} exceeds the dimension limit {}; table is partial",
                cli.max_dim
            ),
            report: Some(r),
        });
    }
    Ok(r)
}

fn write_csv(path: &std::path::Path, rows: &[SweepRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(["N", "dim", "lambda_min", "psd", "thm5_lambda_min", "thm5_conclusive"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn thresholds(cli: &Cli) -> Outcome {
    let mut r = cli.new_report("thresholds");
    r.param("N", cli.n);
    let m = cli.load_map(&mut r)?;
    let limits = cli.limits();
    let bounds = threshold_bounds(m.d_out(), m.d_in(), cli.n, true)?;
    let plain = threshold_bounds(m.d_out(), m.d_in(), cli.n, false)?;
    let eta_a = match critical_eta_a(&m, cli.n, cli.tol(), &limits) {
        Ok(v) => Some(v),
        Err(Error::Precondition(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let eta_b = match critical_eta_b(&m, cli.n, DEFAULT_BISECTION_WIDTH, &limits) {
        Ok(v) => Some(v),
        Err(Error::Precondition(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let spec = cli.map.as_deref().map(MapSpec::parse).transpose()?;
    let transposition = match spec.and_then(|s| s.transposition_dim()) {
        Some(d) if cli.eta.is_none() => Some(transposition_bounds(d, cli.n)?),
        _ => None,
    };
    r.result(json!({
        "N": cli.n,
        "eta_a_sufficient": bounds.eta_a_sufficient,
        "eta_b_sufficient": bounds.eta_b_sufficient,
        "eta_a_sufficient_unimproved": plain.eta_a_sufficient,
        "eta_b_sufficient_unimproved": plain.eta_b_sufficient,
        "used_qubit_improvement": bounds.used_qubit_improvement,
        "critical_eta_a": eta_a,
        "critical_eta_b": eta_b,
    }));
    if let Some(t) = &transposition {
        r.verdict("transposition_eta_sufficient", t.eta_sufficient);
        r.verdict("transposition_eta_necessary_below", t.eta_necessary_below);
    }
    r.verdict("critical_eta_a", eta_a);
    r.verdict("critical_eta_b", eta_b);
    Ok(r)
}

fn verify(cli: &Cli) -> Outcome {
    let mut r = RunReport::new("verify", cli.seed, cli.tol());
    r.param("only", cli.only.as_deref());
    r.param("tol_override", cli.tol);
    let outcomes = checks::run(cli.tol, cli.only.as_deref(), cli.seed, &cli.limits())?;
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    for o in &outcomes {
        r.result(json!({
            "id": o.id,
            "passed": o.passed,
            "tol": o.tol,
            "max_error": o.max_error,
        }));
    }
    r.verdict("all_passed", failed.is_empty());
    r.verdict("failed", &failed);
    // pass/fail lines go to stderr so the report on stdout stays parseable
    for o in &outcomes {
        eprintln!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.title);
        for d in &o.details {
            eprintln!("    {d}");
        }
    }
    if !failed.is_empty() {
        return Err(Failure {
            code: EXIT_VERIFY_FAILED,
            message: format!("failed checks: {}", failed.join(", ")),
            report: Some(r),
        });
    }
    Ok(r)
}

fn emit(cli: &Cli, report: &mut RunReport, start: Instant) {
    report.meta.elapsed_s = start.elapsed().as_secs_f64();
    let text = match cli.format {
        Format::Json => report.to_json() + "\n",
        Format::Table => report.to_table(),
    };
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = match cli.command {
        Command::Analyze => analyze(&cli),
        Command::Sweep => sweep(&cli),
        Command::Thresholds => thresholds(&cli),
        Command::Verify => verify(&cli),
    };
    match outcome {
        Ok(mut report) => {
            emit(&cli, &mut report, start);
            ExitCode::SUCCESS
        }
        Err(mut failure) => {
            if let Some(report) = failure.report.as_mut() {
                emit(&cli, report, start);
            }
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
