use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bepgp::basis::exactness::{verify_catalog, verify_family, SuiteConfig, SuiteReport};
use bepgp::experiments::{run, ExperimentConfig, RunReport};
use bepgp::{catalog_lookup, Error, FamilyId};
use clap::{Parser, Subcommand, ValueEnum};

/// Gaussian processes whose samples solve linear PDEs with boundary
/// conditions exactly.
#[derive(Debug, Parser)]
#[command(name = "bepgp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Training and sampling seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for linear algebra and evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for reports, snapshots and checkpoints.
    #[arg(long, global = true, env = "BEPGP_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Multiply every training stage's epoch count.
    #[arg(long, global = true)]
    epochs_scale: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the basis families in the catalog.
    List,
    /// Print a family's element formula, domain and boundary conditions.
    Describe { family: String },
    /// Check that a config parses and is consistent.
    Validate { config: PathBuf },
    /// Run an experiment and write its report.
    Run { config: PathBuf },
    /// Run the exactness suite for one family or `all`.
    Verify { family: String },
    /// Time a synthetic workload (assembly, nlml, nlml_grad, predict).
    Bench { name: String },
}

/// A failure with its exit code: 1 for invalid input, 2 for runtime errors.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn invalid(e: impl ToString) -> Self {
        Self {
            code: 1,
            kind: "invalid",
            message: e.to_string(),
        }
    }

    fn runtime(e: impl ToString) -> Self {
        Self {
            code: 2,
            kind: "runtime",
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = first_line(&text);
            return report_failure(Failure::invalid(line.strip_prefix("error: ").unwrap_or(&line)));
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report_failure(f),
    }
}

fn first_line(s: &str) -> String {
    s.lines().find(|l| !l.trim().is_empty()).unwrap_or("").trim().to_string()
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::runtime(e)),
        _ => Ok(()),
    }
}

fn emit_json<T: serde::Serialize + ?Sized>(value: &T) -> Result<(), Failure> {
    emit(&(serde_json::to_string_pretty(value).map_err(Failure::runtime)? + "\n"))
}

fn report_failure(f: Failure) -> ExitCode {
    let message = f.message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("bepgp: error[{}]: {message}", f.kind);
    ExitCode::from(f.code)
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::runtime)?;
    }
    if let Some(s) = cli.epochs_scale {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Failure::invalid("--epochs-scale must be a non-negative number"));
        }
    }
    match &cli.command {
        Command::List => list(cli.format),
        Command::Describe { family } => {
            let id: FamilyId = family.parse().map_err(Failure::invalid)?;
            emit(&catalog_lookup(id).describe())
        }
        Command::Validate { config } => {
            let cfg = load_config(config)?;
            emit(&format!("ok {} ({})\n", cfg.name, resolve_config(config).display()))
        }
        Command::Run { config } => run_config(cli, config),
        Command::Verify { family } => verify(cli, family),
        Command::Bench { name } => bench(cli, name),
    }
}

fn list(format: Format) -> Result<(), Failure> {
    let rows: Vec<(String, String, String, String)> = FamilyId::ALL
        .iter()
        .map(|&id| {
            let f = catalog_lookup(id);
            let kind = if f.is_discrete() { "discrete" } else { "continuous" };
            (id.to_string(), f.operator.to_string(), kind.to_string(), f.domain.to_string())
        })
        .collect();
    match format {
        Format::Csv => {
            let mut out = String::from("id,pde,kind,domain\n");
            for (id, pde, kind, domain) in rows {
                let _ = writeln!(out, "{id},{pde},{kind},\"{domain}\"");
            }
            emit(&out)
        }
        Format::Json => {
            let v: Vec<serde_json::Value> = rows
                .into_iter()
                .map(|(id, pde, kind, domain)| serde_json::json!({"id": id, "pde": pde, "kind": kind, "domain": domain}))
                .collect();
            emit_json(&v)
        }
    }
}

/// `configs/name.cfg` resolves to `configs/name.toml` when only the latter
/// exists; a bare name resolves inside `configs/`.
fn resolve_config(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    let toml = path.with_extension("toml");
    if toml.exists() {
        return toml;
    }
    if path.parent().is_none_or(|p| p.as_os_str().is_empty()) {
        let named = Path::new("configs").join(path).with_extension("toml");
        if named.exists() {
            return named;
        }
    }
    path.to_path_buf()
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::load(&resolve_config(path)).map_err(Failure::invalid)
}

fn run_config(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let mut cfg = load_config(path)?;
    if let Some(seed) = cli.seed {
        cfg.train.seed = seed;
    }
    if let Some(s) = cli.epochs_scale {
        cfg.train.scale_epochs(s);
    }
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("runs").join(&cfg.name));
    let report = run(&cfg, Some(&out_dir)).map_err(|e| match e {
        Error::Config(_) | Error::Invalid(_) => Failure::invalid(e),
        other => Failure::runtime(other),
    })?;
    let json_path = out_dir.join("report.json");
    report.write_json(&json_path).map_err(Failure::runtime)?;
    match cli.format {
        Format::Json => emit(&(report.to_json() + "\n"))?,
        Format::Csv => emit(&report_csv(&report))?,
    }
    if report.complete {
        Ok(())
    } else {
        let first = &report.errors[0];
        Err(Failure::runtime(format!(
            "run incomplete, {} phase error(s); first in {}: {}",
            report.errors.len(),
            first.phase,
            first.message
        )))
    }
}

/// Flat `key,value` summary of a report.
fn report_csv(r: &RunReport) -> String {
    let mut rows: Vec<(String, String)> = vec![
        ("name".into(), r.name.clone()),
        ("family".into(), r.family.clone()),
        ("seed".into(), r.seed.to_string()),
        ("complete".into(), r.complete.to_string()),
    ];
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    if let Some(m) = &r.metrics {
        rows.push(("median_abs".into(), opt(m.median_abs)));
        rows.push(("rel".into(), opt(m.rel)));
        rows.push(("max_imag".into(), m.max_imag.to_string()));
    }
    if let Some(e) = &r.energy {
        rows.push(("energy_initial".into(), opt(e.series.energy.first().copied())));
        rows.push(("energy_max_relative_drift".into(), e.max_relative_drift.to_string()));
    }
    rows.push(("boundary_flat".into(), opt(r.residuals.boundary_flat)));
    rows.push(("boundary_arcs".into(), opt(r.residuals.boundary_arcs)));
    rows.push(("pde_fd".into(), opt(r.residuals.pde_fd)));
    for (phase, secs) in &r.timings {
        rows.push((format!("time_{phase}"), secs.to_string()));
    }
    rows.push(("determinism_hash".into(), r.determinism_hash.clone()));
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

fn verify(cli: &Cli, family: &str) -> Result<(), Failure> {
    let cfg = SuiteConfig {
        seed: cli.seed.unwrap_or(0),
        ..SuiteConfig::default()
    };
    let reports: Vec<SuiteReport> = if family == "all" {
        verify_catalog(&cfg).map_err(Failure::runtime)?
    } else {
        let id: FamilyId = family.parse().map_err(Failure::invalid)?;
        vec![verify_family(&catalog_lookup(id), &cfg).map_err(Failure::runtime)?]
    };
    match cli.format {
        Format::Json => emit_json(&reports)?,
        Format::Csv => {
            let mut out = String::from("family,check,samples,worst,tolerance,status\n");
            for r in &reports {
                for c in &r.checks {
                    let status = if c.passed { "PASS" } else { "FAIL" };
                    let _ = writeln!(out, "{},{},{},{:e},{:e},{status}", r.family, c.name, c.samples, c.worst, c.tolerance);
                }
            }
            emit(&out)?;
        }
    }
    if cli.format == Format::Json {
        for r in &reports {
            for c in &r.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                eprintln!("{status} {} {} (worst {:.2e} <= {:.0e})", r.family, c.name, c.worst, c.tolerance);
            }
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::invalid(format!("{failed} family suite(s) failed")))
    }
}

fn bench(cli: &Cli, name: &str) -> Result<(), Failure> {
    if !bepgp_bench::WORKLOADS.contains(&name) {
        return Err(Failure::invalid(format!(
            "unknown workload `{name}` (expected one of {})",
            bepgp_bench::WORKLOADS.join(", ")
        )));
    }
    let mut rows = Vec::new();
    for (m, n) in [(242, 50), (242, 250)] {
        let f = bepgp_bench::fixture(m, n).map_err(Failure::runtime)?;
        let t = bepgp_bench::time_workload(name, &f, 5).map_err(Failure::runtime)?;
        rows.push((m, n, t.as_secs_f64()));
    }
    match cli.format {
        Format::Csv => {
            let mut out = String::from("workload,rows,basis,median_seconds\n");
            for (m, n, s) in rows {
                let _ = writeln!(out, "{name},{m},{n},{s}");
            }
            emit(&out)
        }
        Format::Json => {
            let v: Vec<serde_json::Value> = rows
                .into_iter()
                .map(|(m, n, s)| serde_json::json!({"workload": name, "rows": m, "basis": n, "median_seconds": s}))
                .collect();
            emit_json(&v)
        }
    }
}
