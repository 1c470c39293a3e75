use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hplattice::atoms::{self, Atom, AtomParams, MoleculeParams};
use hplattice::hardy::{self, Characterization, MaximalGrid};
use hplattice::kernels::{self, KernelConfig};
use hplattice::operators::{riesz_potential, riesz_transform};
use hplattice::verify::{self, ExperimentConfig, Suite};
use hplattice::{Backend, DiscreteCube, Error, GridFunction, LatticePoint, Window};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "hplattice", version, about = "Discrete Hardy-space kernels, norms and verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate a kernel on a centered window.
    KernelTable(KernelTableArgs),
    /// Apply the Riesz transform R_s^d to a grid function.
    ApplyRiesz(ApplyRieszArgs),
    /// Apply the Riesz potential I_α to a grid function.
    ApplyPotential(ApplyPotentialArgs),
    /// Windowed H^p quasi-norm of a grid function.
    HpNorm(HpNormArgs),
    /// Generate a seeded (p, p0, L)-atom on a cube centered at the origin.
    GenAtom(GenAtomArgs),
    /// Check an atom file against (a1)-(a3).
    ValidateAtom(ValidateAtomArgs),
    /// Molecule norm N(M) and θ of a grid function.
    MoleculeNorm(MoleculeNormArgs),
    /// Run verification suites and write their reports.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct OutDir {
    /// Output directory; every file the command writes goes here.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum KernelKind {
    Poisson,
    Riesz,
    Fractional,
    Phi,
}

#[derive(Args, Debug)]
struct KernelTableArgs {
    #[arg(long, value_enum)]
    kernel: KernelKind,
    #[arg(long)]
    n: usize,
    /// Half-width of the tabulated cube.
    #[arg(long)]
    radius: u64,
    /// Dilation parameter for poisson and phi.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Axis (1-based) for riesz.
    #[arg(long, default_value_t = 1)]
    axis: usize,
    /// Order for fractional.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args, Debug)]
struct OperatorIo {
    /// Grid function JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Radius of the origin-centered output window. Defaults to the input
    /// window padded by its own largest extent.
    #[arg(long)]
    radius: Option<u64>,
    #[arg(long, default_value = "fast")]
    backend: Backend,
}

#[derive(Args, Debug)]
struct ApplyRieszArgs {
    #[command(flatten)]
    io: OperatorIo,
    #[arg(long)]
    axis: usize,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args, Debug)]
struct ApplyPotentialArgs {
    #[command(flatten)]
    io: OperatorIo,
    #[arg(long)]
    alpha: f64,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args, Debug)]
struct HpNormArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value = "riesz")]
    characterization: Characterization,
    /// Radius of the origin-centered evaluation window. Defaults to four
    /// times the largest input extent.
    #[arg(long)]
    window: Option<u64>,
    #[arg(long, default_value = "fast")]
    backend: Backend,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args, Debug)]
struct GenAtomArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    /// Size exponent; `inf` is accepted.
    #[arg(long, default_value_t = f64::INFINITY)]
    p0: f64,
    #[arg(long = "L")]
    moment_order: u32,
    #[arg(long)]
    cube_halfwidth: u64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args, Debug)]
struct ValidateAtomArgs {
    /// Atom JSON file.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args, Debug)]
struct MoleculeNormArgs {
    #[arg(long)]
    input: PathBuf,
    /// Molecule center as comma-separated coordinates; defaults to the origin.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    center: Option<Vec<i64>>,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    p0: f64,
    #[arg(long)]
    r: f64,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite name or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Experiment configuration JSON; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutDir,
}

/// Failure modes mapped onto exit codes.
enum Failure {
    /// A verification check or atom validation did not pass.
    Check(String),
    /// Bad arguments, configuration or input files.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("HL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("HL_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::KernelTable(a) => kernel_table(a),
        Command::ApplyRiesz(a) => apply_riesz(a),
        Command::ApplyPotential(a) => apply_potential(a),
        Command::HpNorm(a) => hp_norm(a),
        Command::GenAtom(a) => gen_atom(a),
        Command::ValidateAtom(a) => validate_atom(a),
        Command::MoleculeNorm(a) => molecule_norm(a),
        Command::Verify(a) => run_verify(a),
    }
}

/// Logs the resolved configuration and writes it next to the outputs.
fn prepare_out(out: &Path, resolved: &Value) -> CmdResult {
    let text = serde_json::to_string_pretty(resolved)?;
    eprintln!("resolved configuration:\n{text}");
    fs::create_dir_all(out)?;
    fs::write(out.join("config.resolved.json"), text + "\n")?;
    Ok(())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CmdResult {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("failed to parse {}: {e}", path.display())))
}

fn kernel_table(a: KernelTableArgs) -> CmdResult {
    let resolved = json!({
        "verb": "kernel-table",
        "kernel": format!("{:?}", a.kernel).to_lowercase(),
        "n": a.n,
        "radius": a.radius,
        "t": a.t,
        "axis": a.axis,
        "alpha": a.alpha,
    });
    if a.n == 0 {
        return Err(Failure::Usage("n must be at least 1".into()));
    }
    let cfg = KernelConfig::new(a.n);
    let window = Window::centered(&LatticePoint::origin(a.n), a.radius);
    // Surface parameter errors once, before tabulating.
    let probe = LatticePoint::unit(a.n, 1);
    let eval = |j: &[i64]| -> hplattice::Result<f64> {
        match a.kernel {
            KernelKind::Poisson => kernels::poisson_kernel(a.t, j, &cfg),
            KernelKind::Riesz => kernels::riesz_kernel(a.axis, j),
            KernelKind::Fractional => kernels::fractional_kernel(a.alpha, j),
            KernelKind::Phi => kernels::phi_dilated(a.t, j, &cfg),
        }
    };
    eval(probe.coords())?;
    prepare_out(&a.out.out, &resolved)?;
    let table = GridFunction::from_fn(window, |j| eval(j).expect("parameters checked"))?;
    table.write_json(&a.out.out.join("kernel.json"))?;
    table.write_csv(fs::File::create(a.out.out.join("kernel.csv"))?)?;
    Ok(())
}

fn output_window(b: &GridFunction, radius: Option<u64>) -> Window {
    match radius {
        Some(r) => Window::centered(&LatticePoint::origin(b.dim()), r),
        None => {
            let pad = b.window().extent().iter().copied().max().unwrap_or(1) as i64;
            let offset: Vec<i64> = b.window().offset().coords().iter().map(|c| c - pad).collect();
            let extent = b.window().extent().iter().map(|e| e + 2 * pad as usize).collect();
            Window::new(LatticePoint::new(offset), extent).expect("dimensions agree")
        }
    }
}

fn apply_riesz(a: ApplyRieszArgs) -> CmdResult {
    let b = GridFunction::read_json(&a.io.input)?;
    let out = output_window(&b, a.io.radius);
    let resolved = json!({
        "verb": "apply-riesz",
        "input": a.io.input,
        "axis": a.axis,
        "backend": a.io.backend,
        "window": out,
    });
    prepare_out(&a.out.out, &resolved)?;
    riesz_transform(&b, a.axis, &out, a.io.backend)?.write_json(&a.out.out.join("riesz.json"))?;
    Ok(())
}

fn apply_potential(a: ApplyPotentialArgs) -> CmdResult {
    let b = GridFunction::read_json(&a.io.input)?;
    let out = output_window(&b, a.io.radius);
    let resolved = json!({
        "verb": "apply-potential",
        "input": a.io.input,
        "alpha": a.alpha,
        "backend": a.io.backend,
        "window": out,
    });
    prepare_out(&a.out.out, &resolved)?;
    riesz_potential(&b, a.alpha, &out, a.io.backend)?.write_json(&a.out.out.join("potential.json"))?;
    Ok(())
}

fn hp_norm(a: HpNormArgs) -> CmdResult {
    let b = GridFunction::read_json(&a.input)?;
    let radius = a
        .window
        .unwrap_or(4 * b.window().extent().iter().copied().max().unwrap_or(1) as u64);
    let out = Window::centered(&LatticePoint::origin(b.dim()), radius);
    let grid = MaximalGrid::for_window(&out);
    let mut resolved = json!({
        "verb": "hp-norm",
        "input": a.input,
        "p": a.p,
        "characterization": a.characterization,
        "window": out,
    });
    match a.characterization {
        Characterization::Maximal => resolved["t_grid"] = serde_json::to_value(grid)?,
        Characterization::Riesz => resolved["backend"] = serde_json::to_value(a.backend)?,
    }
    prepare_out(&a.out.out, &resolved)?;
    let report = match a.characterization {
        Characterization::Maximal => hardy::hardy_norm_maximal(&b, a.p, &grid, &out)?,
        Characterization::Riesz => hardy::hardy_norm_riesz(&b, a.p, &out, a.backend)?,
    };
    write_json(&a.out.out.join("hp_norm.json"), &report)
}

fn gen_atom(a: GenAtomArgs) -> CmdResult {
    let params = AtomParams::new(a.p, a.p0, a.moment_order)?;
    if a.n == 0 {
        return Err(Failure::Usage("n must be at least 1".into()));
    }
    let resolved = json!({
        "verb": "gen-atom",
        "n": a.n,
        "params": params,
        "cube_halfwidth": a.cube_halfwidth,
        "seed": a.seed,
    });
    prepare_out(&a.out.out, &resolved)?;
    let cube = DiscreteCube::centered(LatticePoint::origin(a.n), a.cube_halfwidth);
    let atom = atoms::generate_atom(&cube, params, a.seed)?;
    fs::write(a.out.out.join("atom.json"), atom.to_json()? + "\n")?;
    Ok(())
}

fn validate_atom(a: ValidateAtomArgs) -> CmdResult {
    let atom: Atom = read_json(&a.input)?;
    let resolved = json!({ "verb": "validate-atom", "input": a.input });
    prepare_out(&a.out.out, &resolved)?;
    let report = atoms::validate_atom(&atom);
    write_json(&a.out.out.join("validation.json"), &report)?;
    if report.passed() {
        Ok(())
    } else {
        let clauses: Vec<String> = report.violations.iter().map(|v| v.clause.to_string()).collect();
        Err(Failure::Check(format!("atom violates {}", clauses.join(", "))))
    }
}

fn molecule_norm(a: MoleculeNormArgs) -> CmdResult {
    let m = GridFunction::read_json(&a.input)?;
    let center = LatticePoint::new(a.center.unwrap_or_else(|| vec![0; m.dim()]));
    if center.dim() != m.dim() {
        return Err(Failure::Usage(format!(
            "center has {} coordinates but the input lives in dimension {}",
            center.dim(),
            m.dim()
        )));
    }
    let params = MoleculeParams::new(a.p, a.p0, a.r)?;
    let resolved = json!({
        "verb": "molecule-norm",
        "input": a.input,
        "center": center,
        "params": params,
    });
    prepare_out(&a.out.out, &resolved)?;
    let (norm, theta) = atoms::molecule_norm(&m, &center, params)?;
    write_json(&a.out.out.join("molecule_norm.json"), &json!({ "norm": norm, "theta": theta }))
}

fn run_verify(a: VerifyArgs) -> CmdResult {
    let suites = Suite::parse_selection(&a.suite).map_err(Failure::Usage)?;
    let cfg = match &a.config {
        Some(path) => verify::load_config(path)?,
        None => ExperimentConfig::default().normalized()?,
    };
    let mut resolved = serde_json::to_value(&cfg)?;
    resolved["verb"] = json!("verify");
    resolved["suites"] = json!(suites.iter().map(|s| s.name()).collect::<Vec<_>>());
    resolved["seed"] = json!(a.seed);
    prepare_out(&a.out.out, &resolved)?;

    let (reports, timings) = verify::run_suites(&suites, &cfg, a.seed)?;
    verify::emit_report(&reports, &a.out.out)?;
    verify::write_timings(&a.out.out, &timings)?;

    let mut failed = Vec::new();
    for r in &reports {
        let total = r.checks.len();
        let bad = r.failed_checks().count();
        eprintln!("{:<18} {:>4}/{:<4} checks passed  ({:.2}s)", r.suite, total - bad, total, timings[&r.suite]);
        if !r.passed {
            failed.push(r.suite.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed suites: {}", failed.join(", "))))
    }
}
