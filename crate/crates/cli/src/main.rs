use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use logpot::equilibrium::{
    fekete_points, solve_equilibrium, DiscreteMeasure, EquilibriumResult, FeketeConfig, MassModel, SolverOptions,
};
use logpot::fraclap::{
    fourier_multiplier_oracle, frac_laplacian, log_fourier_identity, truncated_graph_pairing, GaussianSpec,
    PairingOptions,
};
use logpot::frostman::{ball_mass_profile, default_radii, frostman_exponent, frostman_inequality_check};
use logpot::geometry::{sample_curve, CurveSpec, GraphFunction, SampledCurve};
use logpot::kernels::{assemble_kernel_matrix, DiagonalPolicy, KernelKind};
use logpot::suite::{run_suite, Status, SuiteConfig};

/// Equilibrium measures, Fekete points, fractional Laplacians and Frostman
/// bounds on curves.
#[derive(Debug, Parser)]
#[command(name = "logpot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Curve specification (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    curve: Option<PathBuf>,

    /// Number of quadrature nodes.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Number of Fekete points.
    #[arg(long = "N", global = true)]
    big_n: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Kernel::Log)]
    kernel: Kernel,

    /// Riesz exponent.
    #[arg(long, global = true)]
    s: Option<f64>,

    /// Inner truncation radius.
    #[arg(long, global = true)]
    eps: Option<f64>,

    /// Outer truncation radius.
    #[arg(long = "R", global = true)]
    big_r: Option<f64>,

    /// Order of the fractional Laplacian.
    #[arg(long, global = true)]
    beta: Option<f64>,

    /// Frostman exponent α.
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Lebesgue exponent p (`inf` allowed).
    #[arg(long, global = true)]
    p: Option<f64>,

    /// Solver tolerance on the KKT residual.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory for artifacts; created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "logpot-out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum)]
    suite: Option<Suite>,

    /// Single seed for the randomized verification criteria.
    #[arg(long, global = true)]
    quick: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Discrete equilibrium measure of a curve.
    Solve,
    /// Fekete points of a curve.
    Fekete,
    /// Fractional Laplacian of the unit Gaussian and the truncated pairing.
    Fraclap,
    /// Ball-growth exponent and Frostman constant of the log equilibrium.
    Frostman,
    /// Run a verification suite.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kernel {
    Log,
    Riesz,
    Graphlog,
    Trunclog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Paper,
}

/// How a run ended, when it did not end in an error.
enum Outcome {
    Success,
    VerificationFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match configure_threads().and_then(|()| run(&cli)) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("LOGPOT_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| anyhow!("LOGPOT_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the worker pool")
}

fn run(cli: &Cli) -> Result<Outcome> {
    if !(cli.tol > 0.0) {
        bail!("--tol must be positive, got {}", cli.tol);
    }
    match cli.command {
        Command::Solve => solve(cli),
        Command::Fekete => fekete(cli),
        Command::Fraclap => fraclap(cli),
        Command::Frostman => frostman(cli),
        Command::Verify => verify(cli),
    }
}

fn load_curve(cli: &Cli) -> Result<CurveSpec> {
    let path = cli.curve.as_ref().ok_or_else(|| anyhow!("--curve is required"))?;
    read_curve(path)
}

fn read_curve(path: &Path) -> Result<CurveSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    CurveSpec::from_json(&text).map_err(|e| match e {
        logpot::Error::Json(j) if j.line() > 0 => {
            anyhow!("{}:{}:{}: malformed curve spec: {j}", path.display(), j.line(), j.column())
        }
        other => anyhow!("{}: {other}", path.display()),
    })
}

fn kernel_kind(cli: &Cli, spec: Option<&CurveSpec>) -> Result<KernelKind> {
    Ok(match cli.kernel {
        Kernel::Log => KernelKind::Log,
        Kernel::Riesz => KernelKind::Riesz {
            s: cli.s.ok_or_else(|| anyhow!("--kernel riesz needs --s"))?,
        },
        Kernel::Trunclog => KernelKind::TruncatedLog {
            eps: cli.eps.ok_or_else(|| anyhow!("--kernel trunclog needs --eps"))?,
            r: cli.big_r.ok_or_else(|| anyhow!("--kernel trunclog needs --R"))?,
        },
        Kernel::Graphlog => match spec {
            Some(CurveSpec::Graph { function, .. }) => KernelKind::GraphLog {
                function: function.clone(),
            },
            _ => bail!("--kernel graphlog needs a graph curve"),
        },
    })
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    Ok(&cli.out)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(dir, name, &text)
}

fn coord_header(dim: usize) -> String {
    (1..=dim).map(|k| format!(",x{k}")).collect()
}

/// The Riesz cell average diverges for s ≥ 1, so those runs drop the
/// diagonal.
fn policy_for(kind: &KernelKind) -> DiagonalPolicy {
    match kind {
        KernelKind::Riesz { s } if *s >= 1.0 => DiagonalPolicy::Exclude,
        _ => DiagonalPolicy::CellAverage,
    }
}

fn equilibrium(curve: &SampledCurve, kind: &KernelKind, tol: f64) -> Result<EquilibriumResult> {
    let k = assemble_kernel_matrix(curve, kind, policy_for(kind))?;
    Ok(solve_equilibrium(&k, 1.0, tol, &SolverOptions::default())?)
}

#[derive(Serialize)]
struct SolveArtifact<'a> {
    curve: &'a CurveSpec,
    kernel: &'a KernelKind,
    n: usize,
    weights: &'a [f64],
    energy: f64,
    robin_constant: f64,
    kkt_residual: f64,
    support_mask: &'a [bool],
    converged: bool,
    iterations: usize,
}

fn solve(cli: &Cli) -> Result<Outcome> {
    let spec = load_curve(cli)?;
    let n = cli.n.unwrap_or(400);
    let kind = kernel_kind(cli, Some(&spec))?;
    let curve = sample_curve(&spec, n)?;
    let eq = equilibrium(&curve, &kind, cli.tol)?;
    let dir = out_dir(cli)?;
    write_json(
        dir,
        "equilibrium.json",
        &SolveArtifact {
            curve: &spec,
            kernel: &kind,
            n,
            weights: &eq.weights,
            energy: eq.energy,
            robin_constant: eq.robin_constant,
            kkt_residual: eq.kkt_residual,
            support_mask: &eq.support_mask,
            converged: eq.converged,
            iterations: eq.iterations,
        },
    )?;
    let mut csv = format!("t{},weight,potential\n", coord_header(curve.dim));
    for i in 0..curve.len() {
        let _ = write!(csv, "{:e}", curve.params[i]);
        for x in curve.point(i) {
            let _ = write!(csv, ",{x:e}");
        }
        let _ = writeln!(csv, ",{:e},{:e}", eq.weights[i], eq.potentials[i]);
    }
    write(dir, "nodes.csv", &csv)?;
    println!(
        "energy {:.10}, robin constant {:.10}, kkt residual {:.2e}, converged {}",
        eq.energy, eq.robin_constant, eq.kkt_residual, eq.converged
    );
    Ok(Outcome::Success)
}

fn fekete(cli: &Cli) -> Result<Outcome> {
    let spec = load_curve(cli)?;
    let big_n = cli.big_n.ok_or_else(|| anyhow!("fekete needs --N"))?;
    let kind = kernel_kind(cli, Some(&spec))?;
    let curve = sample_curve(&spec, cli.n.unwrap_or(400.max(big_n)))?;
    let cfg = FeketeConfig {
        seed: cli.seed,
        ..FeketeConfig::default()
    };
    let f = fekete_points(&curve, big_n, &kind, &cfg)?;
    let dir = out_dir(cli)?;
    write_json(dir, "fekete.json", &f)?;
    let mut csv = format!("t{}\n", coord_header(f.dim));
    for i in 0..f.len() {
        let _ = write!(csv, "{:e}", f.params[i]);
        for x in f.point(i) {
            let _ = write!(csv, ",{x:e}");
        }
        csv.push('\n');
    }
    write(dir, "points.csv", &csv)?;
    println!(
        "N = {big_n}: energy {:.10}, τ = {:.10}, converged {}",
        f.discrete_energy, f.normalized_energy, f.converged
    );
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct FraclapArtifact {
    beta: f64,
    max_oracle_error: f64,
    log_identity_lhs: f64,
    log_identity_rhs: f64,
}

fn fraclap(cli: &Cli) -> Result<Outcome> {
    let beta = cli.beta.unwrap_or(0.5);
    let f = GaussianSpec::unit();
    let mut csv = String::from("x,value,oracle,abs_error\n");
    let mut worst = 0.0f64;
    for i in 0..=64 {
        let x = -8.0 + 0.25 * i as f64;
        let v = frac_laplacian(&f, beta, x)?;
        let o = fourier_multiplier_oracle(&f, beta, x)?;
        worst = worst.max((v - o).abs());
        let _ = writeln!(csv, "{x:e},{v:e},{o:e},{:e}", (v - o).abs());
    }
    // The pairing takes A from a graph curve when one is given.
    let a = match cli.curve.as_deref().map(read_curve).transpose()? {
        Some(CurveSpec::Graph { function, .. }) => function,
        Some(_) => bail!("fraclap takes only graph curves"),
        None => GraphFunction::flat(2),
    };
    let pairs = match (cli.eps, cli.big_r) {
        (Some(e), Some(r)) => vec![(e, r)],
        (None, None) => vec![(1e-1, 10.0), (1e-2, 1e2), (1e-3, 1e3)],
        _ => bail!("--eps and --R go together"),
    };
    let pairing_beta = beta.min(1.0);
    let mut sweep = String::from("beta,epsilon,R,value,target,abs_error\n");
    for (e, r) in pairs {
        let p = truncated_graph_pairing(&a, pairing_beta, e, r, &f, &f, &PairingOptions::default())?;
        let _ = writeln!(
            sweep,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            p.beta, p.epsilon, p.r, p.value, p.target, p.abs_error
        );
    }
    let (lhs, rhs) = log_fourier_identity(&f);
    let dir = out_dir(cli)?;
    write(dir, "fraclap.csv", &csv)?;
    write(dir, "pairing.csv", &sweep)?;
    write_json(
        dir,
        "fraclap.json",
        &FraclapArtifact {
            beta,
            max_oracle_error: worst,
            log_identity_lhs: lhs,
            log_identity_rhs: rhs,
        },
    )?;
    println!("β = {beta}: max |Δ^(β/2)f − oracle| = {worst:.2e}; log identity {lhs:.8} vs {rhs:.8}");
    Ok(Outcome::Success)
}

fn frostman(cli: &Cli) -> Result<Outcome> {
    let spec = load_curve(cli)?;
    let alpha = cli.alpha.unwrap_or(0.4);
    let p = cli.p.unwrap_or(4.0);
    let curve = Arc::new(sample_curve(&spec, cli.n.unwrap_or(400))?);
    let eq = equilibrium(&curve, &KernelKind::Log, cli.tol)?;
    let mu = DiscreteMeasure::new(curve.clone(), eq.weights, MassModel::Cells)?;
    let radii = default_radii(&curve)?;
    let profile = ball_mass_profile(&mu, &radii)?;
    let fit = frostman_exponent(&profile, 0..profile.len())?;
    let report = frostman_inequality_check(&mu, alpha, p, &radii)?;
    let dir = out_dir(cli)?;
    write(dir, "profile.csv", &profile.to_csv())?;
    write(dir, "frostman.csv", &report.to_csv())?;
    write_json(dir, "frostman.json", &report)?;
    println!(
        "exponent {:.4} (residual {:.2e}); C = {:.4e} for (α, p) = ({alpha}, {p}), divergent {}, bounded {}",
        fit.exponent, fit.residual, report.constant, report.divergent, report.bounded
    );
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct CriterionRecord<'a> {
    id: u8,
    name: &'a str,
    status: Status,
    detail: &'a str,
}

#[derive(Serialize)]
struct VerifyArtifact<'a> {
    suite: &'a str,
    quick: bool,
    seed: u64,
    criteria: Vec<CriterionRecord<'a>>,
}

fn verify(cli: &Cli) -> Result<Outcome> {
    if cli.suite.is_none() {
        bail!("verify needs --suite paper");
    }
    let cfg = SuiteConfig {
        quick: cli.quick,
        seed: cli.seed,
    };
    let outcomes = run_suite(&cfg);
    for o in &outcomes {
        println!("{}", o.line());
    }
    // Timings stay on stdout so the artifacts are reproducible.
    let records = |pass: bool| -> Vec<CriterionRecord> {
        outcomes
            .iter()
            .filter(|o| pass || !o.passed())
            .map(|o| CriterionRecord {
                id: o.id,
                name: o.name,
                status: o.status,
                detail: &o.detail,
            })
            .collect()
    };
    let dir = out_dir(cli)?;
    let artifact = |criteria| VerifyArtifact {
        suite: "paper",
        quick: cli.quick,
        seed: cli.seed,
        criteria,
    };
    write_json(dir, "verify.json", &artifact(records(true)))?;
    let failed = records(false);
    let manifest = dir.join("failures.json");
    if failed.is_empty() {
        if manifest.exists() {
            fs::remove_file(&manifest).with_context(|| format!("removing stale {}", manifest.display()))?;
        }
        println!("all {} criteria pass", outcomes.len());
        return Ok(Outcome::Success);
    }
    let ids: Vec<u8> = failed.iter().map(|c| c.id).collect();
    write_json(dir, "failures.json", &artifact(failed))?;
    println!("{} of {} criteria fail: {ids:?}; see {}", ids.len(), outcomes.len(), manifest.display());
    Ok(Outcome::VerificationFailed)
}
