//! Batch front door: solve instances, run stability and approximation
//! sweeps, emit CSV and SVG reports.

mod csvout;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lipdp::baker::BakerSolver;
use lipdp::dp_engine::ExtractConfig;
use lipdp::graph::{Graph, WeightVector};
use lipdp::lab::{self, SweepOptions};
use lipdp::pipeline::Pipeline;
use lipdp::problems::{build_incidence_graph, MaxOnesInstance};
use lipdp::soft_select::substream;
use lipdp::tree_decomp::{balance, decompose_heuristic, BALANCE_HEIGHT_C};
use lipdp::{Error, Problem};

#[derive(Parser)]
#[command(
    name = "lipdp",
    version,
    about = "Stable DP solvers on bounded-treewidth graphs"
)]
struct Cli {
    /// Cap the worker thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Mwis,
    Vc,
    Ds,
    Maxones,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Problem {
        match p {
            ProblemArg::Mwis => Problem::Mwis,
            ProblemArg::Vc => Problem::MinVertexCover,
            ProblemArg::Ds => Problem::MinDominatingSet,
            ProblemArg::Maxones => Problem::MaxOnes,
        }
    }
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, value_enum, default_value = "mwis")]
    problem: ProblemArg,
    /// Edge-list graph file ("n m", edge lines, optional weight lines).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// DIMACS CNF file (max-ones only).
    #[arg(long)]
    cnf: Option<PathBuf>,
    /// Whitespace-delimited weights, one real per vertex or variable.
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Lipschitz,
    Approx,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance end to end and print the solution.
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Use hard selectors (exact, non-stable reference mode).
        #[arg(long)]
        deterministic: bool,
    },
    /// Run stability or approximation sweeps and write CSV reports.
    Measure {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum)]
        sweep: SweepKind,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        runs: usize,
        /// Also compute the optimal-transport EM estimate per row.
        #[arg(long)]
        ot: bool,
        /// Check the reference optimum with the brute-force oracle
        /// (refuses instances beyond the enumeration limit).
        #[arg(long)]
        brute_oracle: bool,
        /// Use hard selectors in the sweep.
        #[arg(long)]
        deterministic: bool,
        /// Output directory for CSV/SVG files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also emit an SVG chart of max em/delta versus eps.
        #[arg(long)]
        svg: bool,
    },
    /// Layered planar-style solve for maximum weight independent set.
    Baker {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// BFS root for the layering.
        #[arg(long, default_value_t = 0)]
        root: usize,
        /// Number of replicated solves to average.
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
    /// Emit a balanced tree decomposition and its statistics.
    Decompose {
        #[arg(long)]
        graph: PathBuf,
        /// Write the balanced decomposition to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_instance(args: &InstanceArgs) -> Result<(Problem, Graph, WeightVector), Error> {
    let problem: Problem = args.problem.into();
    match problem {
        Problem::MaxOnes => {
            let path = args
                .cnf
                .as_ref()
                .ok_or_else(|| Error::parse("max-ones requires --cnf"))?;
            let inst = MaxOnesInstance::parse_dimacs(&std::fs::read_to_string(path)?)?;
            let vw = match &args.weights {
                Some(p) => WeightVector::parse(&std::fs::read_to_string(p)?, inst.num_vars)?,
                None => WeightVector::ones(inst.num_vars),
            };
            let (g, w) = build_incidence_graph(&inst, &vw)?;
            Ok((problem, g, w))
        }
        _ => {
            let path = args
                .graph
                .as_ref()
                .ok_or_else(|| Error::parse("this problem requires --graph"))?;
            let (g, inline_w) = Graph::parse_file(path)?;
            let w = match (&args.weights, inline_w) {
                (Some(p), _) => WeightVector::parse(&std::fs::read_to_string(p)?, g.n())?,
                (None, Some(w)) => w,
                (None, None) => WeightVector::ones(g.n()),
            };
            Ok((problem, g, w))
        }
    }
}

fn effective_seed(seed: u64) -> u64 {
    match std::env::var("LIPDP_SEED") {
        Ok(v) => v.parse().unwrap_or(seed),
        Err(_) => seed,
    }
}

fn cmd_solve(
    instance: &InstanceArgs,
    eps: f64,
    seed: u64,
    deterministic: bool,
) -> Result<(), Error> {
    let (problem, g, w) = load_instance(instance)?;
    let pipeline = Pipeline::build(&g, problem)?;
    let table = pipeline.table(&w)?;
    let cfg = if deterministic {
        ExtractConfig::hard()
    } else {
        ExtractConfig::soft(pipeline.epsilon_per_node(eps)?, seed)
    };
    let x = pipeline.extract(&w, &table, &cfg)?;
    let valid = problem.validate_solution(&g, &x);
    println!("problem: {}", problem.name());
    println!("solution: {x}");
    if problem == Problem::MaxOnes {
        // Decode: variable i is true iff its vertex was chosen (1-based,
        // matching DIMACS numbering).
        let true_vars: Vec<String> = x.iter().map(|v| (v + 1).to_string()).collect();
        println!("true_vars: {}", true_vars.join(" "));
    }
    println!("weight: {}", w.weight_of(&x));
    println!("opt: {}", table.root_opt().unwrap());
    println!("valid: {valid}");
    println!(
        "width: heuristic={} balanced={} height={} term_height={}",
        pipeline.heuristic_width,
        pipeline.td_width,
        pipeline.td_height,
        pipeline.tree.height()
    );
    println!("p_max: {}", table.p_max());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_measure(
    instance: &InstanceArgs,
    sweep: SweepKind,
    eps: f64,
    seed: u64,
    runs: usize,
    ot: bool,
    brute_oracle: bool,
    deterministic: bool,
    out: &std::path::Path,
    svg: bool,
) -> Result<(), Error> {
    let (problem, g, w) = load_instance(instance)?;
    if brute_oracle {
        // Refuses with exit code 3 when the instance exceeds the
        // enumeration limit; otherwise cross-checks the exact-DP optimum.
        let (oracle, _) = lab::brute_force_opt(&g, &w, problem)?;
        let dp = lab::exact_opt(&g, problem, &w)?;
        match (oracle, dp) {
            (Some(a), Some(b)) if (a - b).abs() <= 1e-9 => {
                println!("oracle: brute-force optimum {a} matches exact DP");
            }
            (None, None) => println!("oracle: infeasible by both routes"),
            (a, b) => {
                return Err(Error::contract(format!(
                    "oracle disagreement: brute-force {a:?} vs DP {b:?}"
                )))
            }
        }
    }
    std::fs::create_dir_all(out)?;
    let config_line = format!(
        "measure problem={} sweep={} eps={eps} seed={seed} runs={runs} ot={ot} hard={deterministic}",
        problem.name(),
        match sweep {
            SweepKind::Lipschitz => "lipschitz",
            SweepKind::Approx => "approx",
        }
    );
    match sweep {
        SweepKind::Lipschitz => {
            let opts = SweepOptions {
                eps_total: eps,
                n_runs: runs,
                delta_grid: None,
                seed,
                with_transport: ot,
                hard: deterministic,
            };
            let result = lab::lipschitz_sweep(&g, &w, problem, &opts)?;
            let mut rows = Vec::new();
            for r in &result.reports {
                rows.push(vec![
                    r.u.to_string(),
                    r.delta.to_string(),
                    "coupled".to_string(),
                    r.em_coupled.to_string(),
                    r.em_per_delta.to_string(),
                    r.n_runs.to_string(),
                    r.theory_bound.to_string(),
                ]);
                if let Some(ot_em) = r.em_ot {
                    rows.push(vec![
                        r.u.to_string(),
                        r.delta.to_string(),
                        "ot".to_string(),
                        ot_em.to_string(),
                        (ot_em / r.delta).to_string(),
                        r.n_runs.to_string(),
                        r.theory_bound.to_string(),
                    ]);
                }
            }
            let path = out.join("lipschitz.csv");
            csvout::write_csv(
                &path,
                &[
                    "u",
                    "delta",
                    "mode",
                    "em",
                    "em_per_delta",
                    "n_runs",
                    "theory_bound",
                ],
                &rows,
                seed,
                &config_line,
            )?;
            println!(
                "lipschitz sweep: max em/delta = {} theory = {} rows = {} -> {}",
                result.max_em_per_delta,
                result.theory_bound,
                result.reports.len(),
                path.display()
            );
            if svg {
                let chart = sweep_chart(&g, &w, problem, runs.min(100), seed)?;
                let path = out.join("lipschitz.svg");
                svg::line_chart(&path, "max em/delta vs eps", "eps", "em/delta", &chart)?;
                println!("chart -> {}", path.display());
            }
        }
        SweepKind::Approx => {
            let rep = lab::approx_sweep(&g, &w, problem, eps, runs, seed)?;
            let rows = vec![vec![
                rep.opt.to_string(),
                rep.mean.to_string(),
                rep.se.to_string(),
                (rep.mean - 1.96 * rep.se).to_string(),
                (rep.mean + 1.96 * rep.se).to_string(),
                rep.target.to_string(),
                rep.n_runs.to_string(),
                rep.holds.to_string(),
            ]];
            let path = out.join("approx.csv");
            csvout::write_csv(
                &path,
                &[
                    "opt", "mean", "se", "ci_lo", "ci_hi", "target", "n_runs", "holds",
                ],
                &rows,
                seed,
                &config_line,
            )?;
            println!(
                "approx sweep: opt = {} mean = {} target = {} holds = {} -> {}",
                rep.opt,
                rep.mean,
                rep.target,
                rep.holds,
                path.display()
            );
        }
    }
    Ok(())
}

/// Max em/delta and theory line over a small eps grid, for the chart.
fn sweep_chart(
    g: &Graph,
    w: &WeightVector,
    problem: Problem,
    runs: usize,
    seed: u64,
) -> Result<Vec<svg::Series>, Error> {
    let grid = [0.1, 0.2, 0.5, 1.0];
    let mut measured = Vec::new();
    let mut theory = Vec::new();
    for &eps in &grid {
        let opts = SweepOptions {
            eps_total: eps,
            n_runs: runs,
            delta_grid: None,
            seed,
            with_transport: false,
            hard: false,
        };
        let s = lab::lipschitz_sweep(g, w, problem, &opts)?;
        measured.push((eps, s.max_em_per_delta));
        theory.push((eps, s.theory_bound));
    }
    Ok(vec![
        ("measured".to_string(), measured),
        ("theory".to_string(), theory),
    ])
}

fn cmd_baker(
    instance: &InstanceArgs,
    eps: f64,
    seed: u64,
    root: usize,
    runs: usize,
) -> Result<(), Error> {
    let (problem, g, w) = load_instance(instance)?;
    if problem != Problem::Mwis {
        return Err(Error::invalid("the layered solver handles mwis only"));
    }
    if g.n() == 0 {
        println!("empty graph: solution {{}} weight 0");
        return Ok(());
    }
    let solver = BakerSolver::prepare(&g, &w, root, eps)?;
    println!("m: {}", solver.plan.m);
    println!("layers: {}", solver.plan.layers.len());
    println!("reference treewidth bound for layered planar subgraphs: {}", 3 * solver.plan.m - 2);
    for (j, opt) in solver.opts.iter().enumerate() {
        println!("opt[{j}]: {opt} (achieved width {})", solver.achieved_widths[j]);
    }
    let (j, x) = solver.solve_seeded(seed)?;
    let valid = problem.validate_solution(&g, &x);
    println!("chosen: {j}");
    println!("solution: {x}");
    println!("weight: {}", w.weight_of(&x));
    println!("valid: {valid}");
    if runs > 1 {
        let mut weights = Vec::with_capacity(runs);
        for i in 0..runs {
            let (_, x) = solver.solve_seeded(substream(seed, 4, i as u64))?;
            weights.push(w.weight_of(&x));
        }
        let (mean, se) = lab::mean_se(&weights);
        println!("replicated: runs={runs} mean={mean} se={se}");
    }
    Ok(())
}

fn cmd_decompose(graph: &std::path::Path, out: Option<&std::path::Path>) -> Result<(), Error> {
    let (g, _) = Graph::parse_file(graph)?;
    let td = decompose_heuristic(&g);
    let report = lipdp::tree_decomp::validate(&td, &g);
    let balanced = balance(&td)?;
    let report2 = lipdp::tree_decomp::validate(&balanced, &g);
    let bound = BALANCE_HEIGHT_C * ((g.n() as f64) + 1.0).log2();
    println!("n: {} m: {}", g.n(), g.edges().len());
    println!(
        "heuristic: width={} bags={} valid={}",
        td.width(),
        td.len(),
        report.is_valid()
    );
    println!(
        "balanced: width={} bags={} height={} height_bound={} valid={}",
        balanced.width(),
        balanced.len(),
        balanced.height(),
        bound,
        report2.is_valid()
    );
    if let Some(path) = out {
        std::fs::write(path, balanced.to_text())?;
        println!("decomposition -> {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match &cli.command {
        Command::Solve {
            instance,
            eps,
            seed,
            deterministic,
        } => cmd_solve(instance, *eps, effective_seed(*seed), *deterministic),
        Command::Measure {
            instance,
            sweep,
            eps,
            seed,
            runs,
            ot,
            brute_oracle,
            deterministic,
            out,
            svg,
        } => cmd_measure(
            instance,
            *sweep,
            *eps,
            effective_seed(*seed),
            *runs,
            *ot,
            *brute_oracle,
            *deterministic,
            out,
            *svg,
        ),
        Command::Baker {
            instance,
            eps,
            seed,
            root,
            runs,
        } => cmd_baker(instance, *eps, effective_seed(*seed), *root, *runs),
        Command::Decompose { graph, out } => cmd_decompose(graph, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version exits are successes; usage errors exit 1.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Infeasible { .. } => ExitCode::from(2),
                Error::TooLarge { .. } => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}
