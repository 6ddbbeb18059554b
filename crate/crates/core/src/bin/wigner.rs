use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use wigner_core::io::{write_density, write_field_csv, write_json, FieldJson, ReconstructionJson, RunManifest};
use wigner_core::liouvillian::{cascade_observed_state, Scenario};
use wigner_core::metrics::{compare_fields, field_metrics};
use wigner_core::reconstruct::{fit_superposition, strip_vacuum_mixture};
use wigner_core::states::{ClosedForm, DriveMode};
use wigner_core::verify::{self, Fault, Level};
use wigner_core::wigner::{
    wigner_coherent_closed, wigner_fock_closed, wigner_series, wigner_squeezed_closed, wigner_thermal_closed,
    wigner_tls_coherent, wigner_tls_incoherent,
};
use wigner_core::{DensityMatrix, Error, PhaseGrid, StateSpec, WignerField};

const THREADS_ENV: &str = "WIGNER_THREADS";
const DEFAULT_GRID: &str = "-4.5:4.5:451,-4.5:4.5:451";

#[derive(Parser, Debug)]
#[command(
    name = "wigner",
    version,
    about = "Wigner functions, cascaded detector steady states and effective-state reconstruction"
)]
struct Cli {
    /// TOML file with defaults for any flag; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (overrides WIGNER_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a density matrix and write it as JSON.
    State(StateArgs),
    /// Evaluate a Wigner function on a grid.
    Wigner(WignerArgs),
    /// Solve the cascaded emitter/detector model and reconstruct the effective state.
    Cascade(CascadeArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct StateArgs {
    /// e.g. fock:2, coherent:1,0.5, thermal:1, squeezed(fock:1):0.5,0.78, tls-inc:1,2, tls-coh:1,0.5,0
    spec: String,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Series,
    Closed,
}

#[derive(Args, Debug)]
struct WignerArgs {
    /// State description, as for `state`.
    #[arg(long, conflicts_with = "input")]
    state: Option<String>,
    /// Density matrix JSON file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    /// xmin:xmax:nx,ymin:ymax:ny
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Output path; `.json` writes the field as JSON, anything else as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Reconstruction {
    Mixture,
    Superposition,
    None,
}

#[derive(Args, Debug)]
struct CascadeArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Target occupation; defaults to the bare-emitter occupation.
    #[arg(long)]
    n_target: Option<f64>,
    #[arg(long, value_enum)]
    reconstruct: Option<Reconstruction>,
    /// xmin:xmax:nx,ymin:ymax:ny
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum VerifyLevel {
    Quick,
    Full,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    level: Option<VerifyLevel>,
    /// Write the report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, hide = true, value_name = "MU,NU")]
    inject_fault: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct Config {
    threads: Option<usize>,
    #[serde(default)]
    state: StateConfig,
    #[serde(default)]
    wigner: WignerConfig,
    #[serde(default)]
    cascade: CascadeConfig,
    #[serde(default)]
    verify: VerifyConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct StateConfig {
    dim: Option<usize>,
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct WignerConfig {
    state: Option<String>,
    input: Option<PathBuf>,
    dim: Option<usize>,
    grid: Option<String>,
    method: Option<Method>,
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct CascadeConfig {
    scenario: Option<PathBuf>,
    n_target: Option<f64>,
    reconstruct: Option<Reconstruction>,
    grid: Option<String>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct VerifyConfig {
    level: Option<VerifyLevel>,
    report: Option<PathBuf>,
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::InvalidGrid(_) | Error::InvalidParameter(_) | Error::Io(_) | Error::Json(_) => 2,
        Error::Infeasible { .. }
        | Error::Degenerate { .. }
        | Error::NonPhysical { .. }
        | Error::NoFeasibleFit { .. } => 4,
        _ => 3,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn required<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| Failure::usage(format!("missing required --{flag}")))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn finish(mut manifest: RunManifest, start: Instant, path: &Path) -> CliResult<()> {
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    write_json(path, &manifest)?;
    Ok(())
}

fn parse_spec(text: &str) -> CliResult<StateSpec> {
    text.parse::<StateSpec>().map_err(|e| Failure::usage(e.to_string()))
}

fn parse_grid(text: Option<String>) -> CliResult<PhaseGrid> {
    PhaseGrid::parse(text.as_deref().unwrap_or(DEFAULT_GRID)).map_err(|e| Failure::usage(e.to_string()))
}

fn cmd_state(args: StateArgs, cfg: StateConfig) -> CliResult<()> {
    let start = Instant::now();
    let spec = parse_spec(&args.spec)?;
    let dim = args.dim.or(cfg.dim).unwrap_or_else(|| spec.default_dim());
    let out = required(args.out.or(cfg.out), "out")?;
    let rho = spec.build(dim)?;
    write_density(&out, &rho)?;
    let mut manifest = RunManifest::new("state", json!({"spec": spec.to_string(), "dim": dim}), None);
    let manifest_path = sibling(&out, "manifest.json");
    manifest.outputs = vec![out.display().to_string(), manifest_path.display().to_string()];
    finish(manifest, start, &manifest_path)
}

fn closed_field(form: ClosedForm, grid: &PhaseGrid) -> wigner_core::Result<WignerField> {
    match form {
        ClosedForm::Fock(k) => wigner_fock_closed(k, grid),
        ClosedForm::Coherent(a) => wigner_coherent_closed(a, grid),
        ClosedForm::Thermal(n) => wigner_thermal_closed(n, grid),
        ClosedForm::Squeezed(kind, sq) => wigner_squeezed_closed(kind, &sq, grid),
        ClosedForm::TlsIncoherent { gamma, pump } => wigner_tls_incoherent(gamma, pump, grid),
        ClosedForm::TlsCoherent { gamma, omega, delta } => wigner_tls_coherent(gamma, omega, delta, grid),
    }
}

fn write_field(path: &Path, field: &WignerField) -> CliResult<()> {
    if path.extension().is_some_and(|e| e == "json") {
        write_json(path, &FieldJson::from_field(field))?;
    } else {
        write_field_csv(path, field)?;
    }
    Ok(())
}

fn cmd_wigner(args: WignerArgs, cfg: WignerConfig) -> CliResult<()> {
    let start = Instant::now();
    let (state, input) = match (args.state, args.input) {
        (None, None) => (cfg.state, cfg.input),
        flags => flags,
    };
    let method = args.method.or(cfg.method).unwrap_or(Method::Series);
    let grid_text = args.grid.or(cfg.grid);
    let grid = parse_grid(grid_text.clone())?;
    let out = required(args.out.or(cfg.out), "out")?;
    let dim = args.dim.or(cfg.dim);

    let (field, source) = match (state, input) {
        (Some(text), None) => {
            let spec = parse_spec(&text)?;
            let field = match method {
                Method::Closed => {
                    let form = spec
                        .closed_form()
                        .ok_or_else(|| Failure::usage(format!("no closed form for '{spec}'; use --method series")))?;
                    closed_field(form, &grid)?
                }
                Method::Series => wigner_series(&spec.build(dim.unwrap_or_else(|| spec.default_dim()))?, &grid)?,
            };
            (field, json!({"state": spec.to_string()}))
        }
        (None, Some(path)) => {
            if method == Method::Closed {
                return Err(Failure::usage("--method closed needs --state"));
            }
            let rho = read_input(&path)?;
            (
                wigner_series(&rho, &grid)?,
                json!({"input": path.display().to_string()}),
            )
        }
        (Some(_), Some(_)) => return Err(Failure::usage("give either --state or --input, not both")),
        (None, None) => return Err(Failure::usage("missing --state or --input")),
    };

    write_field(&out, &field)?;
    let metrics_path = sibling(&out, "metrics.json");
    write_json(&metrics_path, &field_metrics(&field))?;
    let manifest_path = sibling(&out, "manifest.json");
    let mut params = json!({"grid": grid, "method": method, "dim": dim});
    params
        .as_object_mut()
        .expect("object")
        .extend(source.as_object().expect("object").clone());
    let mut manifest = RunManifest::new("wigner", params, None);
    manifest.outputs = [&out, &metrics_path, &manifest_path]
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    finish(manifest, start, &manifest_path)
}

fn read_input(path: &Path) -> CliResult<DensityMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let m: wigner_core::io::MatrixJson =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(m.to_density()?)
}

fn cmd_cascade(args: CascadeArgs, cfg: CascadeConfig) -> CliResult<()> {
    let start = Instant::now();
    let scenario_path = required(args.scenario.or(cfg.scenario), "scenario")?;
    let out_dir = required(args.out_dir.or(cfg.out_dir), "out-dir")?;
    let mode = args.reconstruct.or(cfg.reconstruct).unwrap_or(Reconstruction::None);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let grid = parse_grid(args.grid.or(cfg.grid))?;
    let text = std::fs::read_to_string(&scenario_path)
        .map_err(|e| Failure::usage(format!("{}: {e}", scenario_path.display())))?;
    let scenario = Scenario::from_json(&text).map_err(|e| Failure::usage(e.to_string()))?;
    std::fs::create_dir_all(&out_dir).map_err(|e| Failure::usage(format!("{}: {e}", out_dir.display())))?;

    let result = cascade_observed_state(&scenario.drive, &scenario.detector)?;
    let n_target = args.n_target.or(cfg.n_target).unwrap_or(result.n_sigma);
    let d = scenario.drive;
    let emitter = match d.mode {
        DriveMode::Incoherent => wigner_tls_incoherent(d.gamma, d.pump, &grid)?,
        DriveMode::Coherent => wigner_tls_coherent(d.gamma, d.omega, d.delta, &grid)?,
    };
    let observed = wigner_series(&result.rho_obs, &grid)?;

    let mut outputs = Vec::new();
    let mut put = |name: &str| {
        let p = out_dir.join(name);
        outputs.push(p.display().to_string());
        p
    };
    write_density(&put("observed_state.json"), &result.rho_obs)?;
    write_field_csv(&put("observed_wigner.csv"), &observed)?;
    write_field_csv(&put("emitter_wigner.csv"), &emitter)?;

    let mut report = json!({
        "n_sigma": result.n_sigma,
        "n_obs": result.n_obs,
        "n_target": n_target,
        "steady_state_residual": result.residual,
        "observed": field_metrics(&observed),
        "emitter": field_metrics(&emitter),
    });

    let reconstruction = match mode {
        Reconstruction::None => None,
        Reconstruction::Mixture => Some(strip_vacuum_mixture(&result.rho_obs, n_target)),
        Reconstruction::Superposition => Some(fit_superposition(&result.rho_obs, n_target, seed)),
    };
    let mut failure = None;
    match reconstruction {
        None => {}
        Some(Ok(r)) => {
            write_json(&put("reconstruction.json"), &ReconstructionJson::from(&r))?;
            let effective = wigner_series(&r.effective_state, &grid)?;
            write_field_csv(&put("effective_wigner.csv"), &effective)?;
            let (l_inf, l2) = compare_fields(&effective, &emitter)?;
            let obj = report.as_object_mut().expect("object");
            obj.insert(
                "effective".into(),
                serde_json::to_value(field_metrics(&effective)).expect("metrics"),
            );
            obj.insert("effective_vs_emitter".into(), json!({"l_inf": l_inf, "l2": l2}));
        }
        Some(Err(e)) => {
            write_json(
                &put("reconstruction.json"),
                &json!({"error": e.to_string(), "kind": format!("{e:?}")}),
            )?;
            failure = Some(Failure::from(e));
        }
    }
    write_json(&put("metrics.json"), &report)?;
    let manifest_path = put("manifest.json");
    let params = json!({
        "scenario": scenario,
        "scenario_path": scenario_path.display().to_string(),
        "n_target": n_target,
        "reconstruct": mode,
        "grid": grid,
    });
    let mut manifest = RunManifest::new("cascade", params, Some(seed));
    manifest.outputs = outputs;
    finish(manifest, start, &manifest_path)?;
    failure.map_or(Ok(()), Err)
}

fn parse_fault(text: &str) -> CliResult<Fault> {
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [m, n] => match (m.trim().parse(), n.trim().parse()) {
            (Ok(mu), Ok(nu)) => Ok(Fault { mu, nu }),
            _ => Err(Failure::usage(format!("bad fault '{text}'"))),
        },
        _ => Err(Failure::usage(format!("bad fault '{text}'"))),
    }
}

fn cmd_verify(args: VerifyArgs, cfg: VerifyConfig) -> CliResult<()> {
    let level = match args.level.or(cfg.level).unwrap_or(VerifyLevel::Quick) {
        VerifyLevel::Quick => Level::Quick,
        VerifyLevel::Full => Level::Full,
    };
    let fault = args.inject_fault.as_deref().map(parse_fault).transpose()?;
    let report = verify::run(level, fault);
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "{tag} {} (error {:.3e}, tolerance {:.0e})",
            c.name, c.error, c.tolerance
        );
    }
    let failed = report.failures().count();
    println!(
        "{} checks, {failed} failed, {:.1} s",
        report.checks.len(),
        report.duration_seconds
    );
    if let Some(path) = args.report.or(cfg.report) {
        write_json(&path, &report)?;
    }
    if failed > 0 {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        return Err(Failure {
            code: 1,
            message: format!("verification failed: {}", names.join("; ")),
        });
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> CliResult<Config> {
    let Some(path) = path else { return Ok(Config::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn configure_threads(flag: Option<usize>, cfg: Option<usize>) -> CliResult<()> {
    let from_env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.parse::<usize>()
                .map_err(|_| Failure::usage(format!("{THREADS_ENV}={v} is not a count")))?,
        ),
        Err(_) => None,
    };
    if let Some(n) = flag.or(from_env).or(cfg) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = load_config(cli.config.as_deref())?;
    configure_threads(cli.threads, cfg.threads)?;
    match cli.command {
        Command::State(a) => cmd_state(a, cfg.state),
        Command::Wigner(a) => cmd_wigner(a, cfg.wigner),
        Command::Cascade(a) => cmd_cascade(a, cfg.cascade),
        Command::Verify(a) => cmd_verify(a, cfg.verify),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
