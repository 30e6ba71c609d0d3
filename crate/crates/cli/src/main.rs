mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use pointforge_core::analysis::{
    default_sweep_angles, dispersion_scan, graph_bounds, great_circle_sweep, write_bounds_csv, BoundRow,
};
use pointforge_core::connes::{distance_matrix, solver_registry, SolveStatus, SolverOptions};
use pointforge_core::geometries::{geometry_registry, weyl_estimate, BuildParams, CutoffConvention};
use pointforge_core::localization::MinimizerConfig;
use pointforge_core::mds_embed::{smacof, weight_registry, SmacofOptions, StressProblem};
use pointforge_core::pointforge::{forge_with_progress, ForgeConfig, Progress};
use pointforge_core::{Manifold, MetricGraph, TruncatedTriple};

use output::{sibling, write_csv, write_file, write_json};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    NotConverged(String),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<pointforge_core::Error> for CliError {
    fn from(e: pointforge_core::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Io(e.to_string())
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::NotConverged(m) => write!(f, "not converged: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "pointforge",
    version,
    about = "Metric graphs from truncated spectral triples"
)]
struct Cli {
    /// Worker threads for parallel stages (defaults to all cores).
    #[arg(long, global = true, env = "POINTFORGE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a truncated triple and save it as JSON.
    Build(BuildArgs),
    /// Generate localized states and their distance matrix.
    Forge(ForgeArgs),
    /// Recompute the distance matrix of a graph's states on a (possibly different) triple.
    Distances(DistancesArgs),
    /// Embed a metric graph in Euclidean space.
    Embed(EmbedArgs),
    /// Heat-state dispersion on the sphere across cutoffs, with a log Λ/Λ² fit.
    DispersionScan(ScanArgs),
    /// Compare distances with the geodesic distance of barycenters.
    Bounds(BoundsArgs),
    /// Dimension and volume from the growth of the Dirac spectrum.
    Weyl(WeylArgs),
}

#[derive(Args, Debug)]
struct BuildArgs {
    /// circle, sphere or sphere-dc
    geometry: String,
    #[arg(long)]
    cutoff: f64,
    #[arg(long, default_value = "paper")]
    convention: CutoffConvention,
    /// Coupling of the sign(D)cos(πD) perturbation (sphere-dc only).
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    #[arg(long, default_value = "admm")]
    solver: String,
    /// Residual tolerance of the distance solver.
    #[arg(long, default_value_t = SolverOptions::default().tol)]
    tol: f64,
    /// Relative duality gap at which the distance solver stops.
    #[arg(long, default_value_t = SolverOptions::default().gap_tol)]
    gap_tol: f64,
    #[arg(long, default_value_t = SolverOptions::default().max_iter)]
    max_iter: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            gap_tol: self.gap_tol,
            max_iter: self.max_iter,
            ..SolverOptions::default()
        }
    }
}

#[derive(Args, Debug)]
struct ForgeArgs {
    triple: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// Number of states; estimated from the spectrum when absent.
    #[arg(long)]
    count: Option<usize>,
    /// Strength of the repulsion between states.
    #[arg(long, default_value_t = 0.1)]
    g_e: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Manifold dimension used for the state count (defaults to the triple's hint).
    #[arg(long)]
    spectral_dim: Option<u32>,
    /// Volume used for the state count (defaults to the Weyl estimate).
    #[arg(long)]
    volume: Option<f64>,
    #[arg(long, default_value_t = MinimizerConfig::default().restarts)]
    restarts: usize,
    #[arg(long, default_value_t = MinimizerConfig::default().max_iter)]
    minimizer_iter: usize,
    #[arg(long, default_value_t = MinimizerConfig::default().grad_tol)]
    grad_tol: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct DistancesArgs {
    triple: PathBuf,
    graph: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    graph: PathBuf,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// locality or uniform
    #[arg(long, default_value = "locality")]
    weights: String,
    #[arg(long, default_value_t = SmacofOptions::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = SmacofOptions::default().max_iter)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start from random coordinates instead of classical scaling.
    #[arg(long)]
    random_start: bool,
    /// Coordinate CSV; JSON, gnuplot data and script are written alongside.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,5,6,7,8,9,10,11,12")]
    cutoffs: Vec<f64>,
    #[arg(long, default_value = "paper")]
    convention: CutoffConvention,
    #[arg(long, default_value_t = 2)]
    spectral_dim: u32,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Metric graph whose pairs are compared.
    #[arg(long, conflicts_with = "triple", required_unless_present = "triple")]
    graph: Option<PathBuf>,
    /// Sphere triple for a sweep of heat states along a great circle.
    #[arg(long)]
    triple: Option<PathBuf>,
    /// Number of steps between the base point and its antipode.
    #[arg(long, default_value_t = 8)]
    steps: usize,
    #[arg(long, default_value_t = 2)]
    spectral_dim: u32,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct WeylArgs {
    triple: PathBuf,
    /// Spinor rank (defaults to 1 on the circle, 2 on the sphere).
    #[arg(long)]
    rank: Option<u32>,
}

fn load_triple(path: &Path) -> Result<TruncatedTriple, CliError> {
    Ok(TruncatedTriple::load(path)?)
}

fn load_graph(path: &Path) -> Result<MetricGraph, CliError> {
    Ok(MetricGraph::load(path)?)
}

fn cmd_build(args: &BuildArgs) -> CliResult {
    let builder = geometry_registry().get(&args.geometry)?;
    let t = builder.build(&BuildParams {
        cutoff: args.cutoff,
        convention: args.convention,
        coupling: args.c,
    })?;
    println!("geometry: {}", t.name);
    println!("dim H = {}", t.dim());
    println!("algebra dim = {}", t.algebra_basis.len());
    if let Some(out) = &args.out {
        let config = json!({
            "command": "build",
            "geometry": args.geometry,
            "cutoff": args.cutoff,
            "convention": format!("{:?}", args.convention),
            "c": args.c,
        });
        let value: Value = serde_json::from_str(&t.to_json()?).map_err(|e| CliError::Input(e.to_string()))?;
        write_json(out, &value, &config)?;
    }
    Ok(())
}

fn cmd_forge(args: &ForgeArgs) -> CliResult {
    let t = load_triple(&args.triple)?;
    let cfg = ForgeConfig {
        target_count_override: args.count,
        g_e: args.g_e,
        seed: args.seed,
        spectral_dim: args.spectral_dim.or(t.spectral_dim_hint).unwrap_or(2),
        volume: args.volume,
        solver: args.solver.solver.clone(),
        solver_options: args.solver.options(),
        minimizer: MinimizerConfig {
            max_iter: args.minimizer_iter,
            grad_tol: args.grad_tol,
            restarts: args.restarts,
            ..MinimizerConfig::default()
        },
        ..ForgeConfig::default()
    };
    let (mut graph, report) = forge_with_progress(&t, &cfg, |p| match p {
        Progress::State { of, record } => eprintln!(
            "state {}/{of}: eta {:.5} energy {:.6} iterations {}{}",
            record.index + 1,
            record.eta,
            record.energy,
            record.iterations,
            if record.converged { "" } else { " (not converged)" }
        ),
        Progress::Distances { pairs } => eprintln!("solving {pairs} distances"),
    })?;
    let config = json!({
        "command": "forge",
        "triple": args.triple,
        "forge": cfg,
    });
    graph.metadata = json!({ "triple": t.name, "config": config });
    graph.save(&args.out)?;
    write_json(&sibling(&args.out, "report.json"), &report, &config)?;
    write_csv(&sibling(&args.out, "csv"), &config, |w| graph.distances.write_csv(w))?;
    println!("states = {}", graph.len());
    println!("pairs = {}", report.pairs.len());
    println!("max triangle violation = {:e}", report.max_triangle_violation);

    let unconverged = report.unconverged();
    let unsolved = report
        .pairs
        .iter()
        .filter(|p| p.status != SolveStatus::Optimal || !p.certified)
        .count();
    if unconverged + unsolved > 0 {
        return Err(CliError::NotConverged(format!(
            "{unconverged} state minimizations and {unsolved} distance solves did not converge"
        )));
    }
    Ok(())
}

fn cmd_distances(args: &DistancesArgs) -> CliResult {
    let t = load_triple(&args.triple)?;
    let mut graph = load_graph(&args.graph)?;
    if graph.len() < 2 {
        return Err(CliError::Input("graph needs at least two states".into()));
    }
    let solver = solver_registry().get(&args.solver.solver)?;
    let report = distance_matrix(&t, &graph.states, solver.as_ref(), &args.solver.options())?;
    let config = json!({
        "command": "distances",
        "triple": args.triple,
        "graph": args.graph,
        "solver": args.solver.solver,
        "solver_options": args.solver.options(),
    });
    graph.distances = report.distances.clone();
    graph.metadata = json!({ "triple": t.name, "config": config, "source": graph.metadata });
    graph.save(&args.out)?;
    write_csv(&sibling(&args.out, "csv"), &config, |w| graph.distances.write_csv(w))?;
    println!("pairs = {}", report.pairs.len());
    println!("max triangle violation = {:e}", report.max_triangle_violation);
    if !report.all_optimal() {
        return Err(CliError::NotConverged("some distance solves did not converge".into()));
    }
    Ok(())
}

fn cmd_embed(args: &EmbedArgs) -> CliResult {
    let graph = load_graph(&args.graph)?;
    let scheme = weight_registry().get(&args.weights)?;
    let weights = scheme.weights(&graph.distances)?;
    let problem = StressProblem::new(&graph.distances, weights, args.dim)?;
    let opts = SmacofOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        seed: args.seed,
        random_start: args.random_start,
    };
    let result = smacof(&problem, None, &opts)?;
    let radii = result.radii();
    let mean = radii.iter().sum::<f64>() / radii.len() as f64;
    let min = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let max = radii.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let config = json!({
        "command": "embed",
        "graph": args.graph,
        "dim": args.dim,
        "weights": args.weights,
        "smacof": opts,
    });
    write_csv(&args.out, &config, |w| result.write_csv(w))?;
    let summary = json!({
        "coords": result.coords,
        "stress": result.stress,
        "iterations": result.iterations,
        "converged": result.converged,
        "radii": radii,
        "radius_mean": mean,
        "radius_min": min,
        "radius_max": max,
    });
    write_json(&sibling(&args.out, "json"), &summary, &config)?;
    let data = sibling(&args.out, "dat");
    let mut dat = format!("# {config}\n");
    for x in &result.coords {
        dat.push_str(&x.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(","));
        dat.push('\n');
    }
    write_file(&data, dat.as_bytes())?;
    write_file(&sibling(&args.out, "gp"), output::embedding_script(&data).as_bytes())?;
    println!("stress = {:e}", result.stress);
    println!("iterations = {}", result.iterations);
    println!("radius mean = {mean:.6}");
    println!("radius range = [{min:.6}, {max:.6}]");
    if !result.converged {
        return Err(CliError::NotConverged(format!(
            "smacof stopped after {} iterations",
            result.iterations
        )));
    }
    Ok(())
}

fn cmd_dispersion_scan(args: &ScanArgs) -> CliResult {
    let scan = dispersion_scan(&args.cutoffs, args.convention, args.spectral_dim)?;
    let config = json!({
        "command": "dispersion-scan",
        "cutoffs": args.cutoffs,
        "convention": format!("{:?}", args.convention),
        "spectral_dim": args.spectral_dim,
        "fit": scan.fit,
    });
    write_csv(&args.out, &config, |w| scan.write_csv(w))?;
    write_file(
        &sibling(&args.out, "gp"),
        output::dispersion_script(&args.out).as_bytes(),
    )?;
    for s in &scan.samples {
        println!("cutoff {} dim {} eta {:.6}", s.cutoff, s.dim, s.eta);
    }
    if scan.fit.degenerate {
        println!("fit degenerate: a single cutoff determines a exactly");
    }
    println!("a = {:.6}", scan.fit.a);
    println!("max relative residual = {:.4}", scan.fit.max_relative_residual);
    Ok(())
}

fn cmd_bounds(args: &BoundsArgs) -> CliResult {
    let (rows, source): (Vec<BoundRow>, Value) = match (&args.graph, &args.triple) {
        (Some(g), _) => (graph_bounds(&load_graph(g)?)?, json!({ "graph": g })),
        (None, Some(path)) => {
            let t = load_triple(path)?;
            let angles = default_sweep_angles(args.steps.max(2));
            let rows = great_circle_sweep(&t, &angles, args.spectral_dim, &args.solver.options())?;
            (
                rows,
                json!({
                    "triple": path,
                    "angles": angles,
                    "spectral_dim": args.spectral_dim,
                    "solver_options": args.solver.options(),
                }),
            )
        }
        (None, None) => unreachable!("clap enforces one source"),
    };
    let config = json!({ "command": "bounds", "source": source });
    write_csv(&args.out, &config, |w| write_bounds_csv(&rows, w))?;
    write_file(&sibling(&args.out, "gp"), output::bounds_script(&args.out).as_bytes())?;
    let flagged = rows.iter().filter(|r| r.degenerate).count();
    let positive = rows.iter().filter(|r| !r.degenerate && r.signed_error() > 0.0).count();
    println!("rows = {}", rows.len());
    println!("degenerate = {flagged}");
    println!("truncated above geodesic = {positive}");
    println!(
        "lower bound respected = {}",
        rows.iter().filter(|r| !r.degenerate).all(|r| r.lower <= r.truncated)
    );
    Ok(())
}

fn cmd_weyl(args: &WeylArgs) -> CliResult {
    let t = load_triple(&args.triple)?;
    let rank = match (args.rank, t.manifold) {
        (Some(r), _) => r,
        (None, Some(Manifold::Circle)) => 1,
        (None, Some(Manifold::Sphere)) => 2,
        (None, None) => {
            return Err(CliError::Input(
                "pass --rank for a triple without a model manifold".into(),
            ))
        }
    };
    let w = weyl_estimate(&t.dirac_eigenvalues, rank)?;
    println!("dim estimate = {:.6}", w.dim_estimate);
    println!("dim = {}", w.dim);
    println!("volume estimate = {:.6}", w.vol_estimate);
    Ok(())
}

fn run(cli: &Cli) -> CliResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Forge(a) => cmd_forge(a),
        Command::Distances(a) => cmd_distances(a),
        Command::Embed(a) => cmd_embed(a),
        Command::DispersionScan(a) => cmd_dispersion_scan(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Weyl(a) => cmd_weyl(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
