use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use netadmm::analysis::{certify, laplacian_network_bounds, optimize_rate};
use netadmm::experiment::{
    figure1_configs, replay_check, run_experiment, run_figure1, CheckOutcome, CheckSpec,
    ExperimentConfig,
};
use netadmm::graph::{generate_graph, laplacian, Graph, GraphKind};
use netadmm::spectral::compute_spectral_data;

#[derive(Parser)]
#[command(name = "netadmm", version, about = "Distributed ADMM over networks: runs, spectra and rate certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its trace and report.
    Run(RunArgs),
    /// Print the network constants of a graph.
    Spectra(SpectraArgs),
    /// Print the linear-rate certificate for given curvature constants.
    Certify(CertifyArgs),
    /// Re-check a trace file against its config.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Estimation,
    Figure1,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Output directory; defaults to the paths in the config's [output] section.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Enable every check, including the node/edge equivalence re-run.
    #[arg(long)]
    check_all: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Topology {
    Path,
    Cycle,
    Complete,
    Circulant,
    ErdosRenyi,
}

#[derive(Args)]
struct GraphArgs {
    /// Take the graph from an experiment config.
    #[arg(long, conflicts_with_all = ["graph_file", "topology"])]
    config: Option<PathBuf>,
    /// Edge-list file.
    #[arg(long, conflicts_with = "topology")]
    graph_file: Option<PathBuf>,
    #[arg(long = "graph", value_enum)]
    topology: Option<Topology>,
    #[arg(long, short)]
    n: Option<usize>,
    /// Degree of a circulant graph.
    #[arg(long)]
    degree: Option<usize>,
    /// Edge probability of an Erdős–Rényi graph.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GraphArgs {
    fn build(&self) -> Result<Graph> {
        if let Some(path) = &self.config {
            return Ok(ExperimentConfig::read(path)?.build_graph()?);
        }
        if let Some(path) = &self.graph_file {
            return Graph::read_file(path).with_context(|| format!("reading {}", path.display()));
        }
        let Some(topology) = self.topology else {
            bail!("give one of --config, --graph-file or --graph");
        };
        let n = self.n.context("--graph needs --n")?;
        let kind = match topology {
            Topology::Path => GraphKind::Path,
            Topology::Cycle => GraphKind::Cycle,
            Topology::Complete => GraphKind::Complete,
            Topology::Circulant => GraphKind::Circulant {
                degree: self.degree.context("circulant graphs need --degree")?,
            },
            Topology::ErdosRenyi => GraphKind::ErdosRenyi {
                p: self.p.context("erdos-renyi graphs need --p")?,
                seed: self.seed,
            },
        };
        Ok(generate_graph(kind, n)?)
    }
}

#[derive(Args)]
struct SpectraArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Print one CSV header and one value row.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Strong convexity constant.
    #[arg(long)]
    nu: f64,
    /// Gradient Lipschitz constant.
    #[arg(long = "lipschitz", visible_alias = "L")]
    lipschitz: f64,
    /// Also certify this penalty.
    #[arg(long)]
    c: Option<f64>,
    /// Target accuracy for the iteration prediction (needs --initial-gnorm-sq).
    #[arg(long, requires = "initial_gnorm_sq")]
    eps: Option<f64>,
    /// `‖q(0) − q*‖_G²` for the iteration prediction.
    #[arg(long)]
    initial_gnorm_sq: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Spectra(a) => cmd_spectra(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Check(a) => cmd_check(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn print_checks(checks: &[CheckOutcome]) -> bool {
    for c in checks {
        println!("{}: {} ({})", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

fn cmd_run(a: RunArgs) -> Result<bool> {
    let mut configs = match (&a.config, a.preset) {
        (Some(path), _) => vec![ExperimentConfig::read(path)?],
        (None, Some(Preset::Figure1)) => figure1_configs(),
        (None, _) => vec![ExperimentConfig::estimation()],
    };
    if a.check_all {
        for cfg in &mut configs {
            cfg.checks = CheckSpec {
                linear_fit_r2: cfg.checks.linear_fit_r2,
                ..CheckSpec::all()
            };
        }
    }

    if matches!(a.preset, Some(Preset::Figure1)) {
        let out = run_figure1(&configs, true)?;
        for r in &out.runs {
            println!("{}: c = {:.6e}, {}", r.config.name, r.c, if r.passed() { "PASS" } else { "FAIL" });
        }
        print!("{}", out.summary());
        if let Some(dir) = &a.out {
            for p in out.write_outputs(dir)? {
                println!("wrote {}", p.display());
            }
        }
        return Ok(out.passed());
    }

    let cfg = &configs[0];
    let outcome = run_experiment(cfg)?;
    let written = outcome.write_outputs(a.out.as_deref(), &cfg.name)?;
    if written.iter().all(|p| !p.to_string_lossy().ends_with(".report.txt")) {
        print!("{}", outcome.report());
    } else {
        print_checks(&outcome.checks);
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    Ok(outcome.passed())
}

fn cmd_spectra(a: SpectraArgs) -> Result<bool> {
    let g = a.graph.build()?;
    let sd = compute_spectral_data(&laplacian(&g), &g)?;
    let r = laplacian_network_bounds(&sd, &g)?;
    if a.csv {
        println!("n,edges,d_min,d_max,a_g,lambda_tilde_m,lambda_m,bounds_hold");
        println!(
            "{},{},{},{},{:.12e},{:.12e},{:.12e},{}",
            g.node_count(),
            g.edge_count(),
            r.d_min,
            r.d_max,
            r.a_g,
            r.lambda_tilde_m,
            r.lambda_m,
            r.all_hold()
        );
    } else {
        println!("nodes: {}", g.node_count());
        println!("edges: {}", g.edge_count());
        println!("degree range: [{}, {}]", r.d_min, r.d_max);
        println!("algebraic connectivity a(G): {:.10}", r.a_g);
        println!("lambda_tilde_m: {:.10}", r.lambda_tilde_m);
        println!("lambda_M: {:.10}", r.lambda_m);
        println!(
            "lambda_tilde_m in [{:.6}, {:.6}]: {}",
            r.tilde_lower,
            r.tilde_upper,
            r.sandwich_holds()
        );
        println!("lambda_M <= {:.6}: {}", r.lambda_m_upper, r.lambda_m_bound_holds());
        println!(
            "complexity factor {:.6} <= {:.6}: {}",
            r.complexity_exact,
            r.complexity_degree_bound,
            r.complexity_bound_holds()
        );
    }
    Ok(true)
}

fn cmd_certify(a: CertifyArgs) -> Result<bool> {
    let g = a.graph.build()?;
    let sd = compute_spectral_data(&laplacian(&g), &g)?;
    let s = sd.spectrum();
    let opt = optimize_rate(a.nu, a.lipschitz, &s)?;
    println!("nu: {}", a.nu);
    println!("L: {}", a.lipschitz);
    println!("kappa_f: {:.10}", opt.kappa_f);
    println!("lambda_tilde_m: {:.10}", s.lambda_tilde_m);
    println!("lambda_M: {:.10}", s.lambda_m);
    println!("c_star: {:.10}", opt.c_star);
    println!("beta_star: {:.10}", opt.beta_star);
    println!("delta_star: {:.10}", opt.delta_star);
    println!("rho_star: {:.10}", opt.rho_star);
    println!("complexity_coefficient: {:.10}", opt.complexity_coefficient());
    let chosen = match a.c {
        Some(c) => {
            let cert = certify(a.nu, a.lipschitz, c, &s)?;
            println!("c: {c}");
            println!("beta: {:.10}", cert.beta);
            println!("delta: {:.10}", cert.delta);
            println!("rho: {:.10}", cert.rho);
            cert
        }
        None => opt,
    };
    if let (Some(eps), Some(g0)) = (a.eps, a.initial_gnorm_sq) {
        println!("predicted_iterations: {}", chosen.predicted_iterations(eps, g0));
    }
    Ok(true)
}

fn cmd_check(a: CheckArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&a.trace).with_context(|| format!("reading {}", a.trace.display()))?;
    let cfg = ExperimentConfig::read(&a.config)?;
    let checks = replay_check(&text, &cfg)?;
    let ok = print_checks(&checks);
    println!("overall: {}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}
