use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gvi::bench::{emit_obstacle_table, emit_table, obstacle_table, run_suite, Format, ProblemSpec, RunConfig};
use gvi::convexity::{
    builtin, check_exp_concave, check_exp_convex, check_gradient_char, check_hierarchy, check_hos_affine,
    check_hos_convex, check_parallelogram, default_t_grid, CertReport,
};
use gvi::obstacle::BoundaryVariant;
use gvi::Result;

#[derive(Parser)]
#[command(name = "gvi", about = "Variational inequality solvers, obstacle splines and convexity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run algorithms on benchmark problems and print an iteration table.
    Bench(BenchArgs),
    /// Grid errors of the spline scheme on the reference obstacle instance.
    Obstacle {
        #[arg(long, value_delimiter = ',', default_value = "15,31,63,127")]
        n: Vec<usize>,
        #[arg(long, default_value = "corrected")]
        variant: BoundaryVariant,
        #[arg(long, default_value = "markdown")]
        format: Format,
    },
    /// Sample a built-in function against a convexity class.
    Certify {
        #[arg(long)]
        function: Option<String>,
        /// hos-convex, hos-affine, gradient, exp-convex, exp-convex-strong,
        /// exp-concave, hierarchy or parallelogram
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Dimension for the parallelogram laws.
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
}

#[derive(clap::Args)]
struct BenchArgs {
    /// Flat key = value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    alg: Option<Vec<String>>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Leave the time column empty for reproducible output.
    #[arg(long)]
    no_time: bool,
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let file = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let cfg = file.merged(RunConfig {
        problem: args.problem,
        n: args.n,
        alg: args.alg,
        rho: args.rho,
        tol: args.tol,
        max_iters: args.max_iters,
        sigma: args.sigma,
        gamma: args.gamma,
        seed: args.seed,
        out: args.out,
        format: args.format,
    });
    let specs = cfg.specs()?;
    if specs.iter().any(|s| matches!(s, ProblemSpec::Obstacle(_))) {
        return Err(gvi::GviError::Invalid("use `gvi obstacle` for the obstacle problem".into()));
    }
    let results = run_suite(&specs, &cfg.algorithms()?, &cfg.bench_config());
    let table = emit_table(&results, cfg.output_format()?, !args.no_time);
    match &cfg.out {
        Some(path) => std::fs::write(path, &table)?,
        None => print!("{table}"),
    }
    for r in results.iter().filter(|r| r.error.is_some()) {
        eprintln!("{} n={:?} {}: {}", r.problem, r.n, r.algorithm, r.error.as_deref().unwrap_or_default());
    }
    Ok(if results.iter().all(|r| r.converged) { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn print_report(label: &str, r: &CertReport) {
    println!(
        "{label}: {} (checked {}, worst violation {:.3e}, threshold {:.1e})",
        r.verdict(),
        r.checked_count,
        r.worst_violation,
        r.threshold
    );
    if let (false, Some(w)) = (r.passed, &r.witness) {
        println!("  witness u = {:?}, v = {:?}, t = {:?}", w.u.as_slice(), w.v.as_slice(), w.t);
    }
}

fn certify(
    function: Option<String>,
    class: &str,
    (p, mu): (f64, f64),
    samples: usize,
    seed: u64,
    dim: usize,
) -> Result<ExitCode> {
    if class == "parallelogram" {
        let r = check_parallelogram(p, mu, dim, samples, seed)?;
        println!("largest mu for the lower law: {:.6}", r.mu_lower);
        println!("smallest mu for the upper law: {:.6}", r.mu_upper);
        println!("lower law at mu = {mu}: worst violation {:.3e}", r.lower_violation);
        if let Some(d) = r.equality_defect {
            println!("parallelogram identity defect: {d:.3e}");
        }
        return Ok(if r.lower_holds(1e-12) { ExitCode::SUCCESS } else { ExitCode::from(2) });
    }
    let id = function.ok_or_else(|| gvi::GviError::Invalid("--function is required".into()))?;
    let fut = builtin(&id)?.with_class(p, mu)?.with_seed(seed);
    let grid = default_t_grid();
    let passed = match class {
        "hos-convex" => {
            let r = check_hos_convex(&fut, samples, &grid);
            print_report("higher order strongly convex", &r);
            r.passed
        }
        "hos-affine" => {
            let r = check_hos_affine(&fut, samples, &grid);
            print_report("higher order strongly affine", &r);
            r.passed
        }
        "gradient" => {
            let r = check_gradient_char(&fut, samples);
            print_report("gradient inequality", &r.gradient);
            print_report("gradient monotonicity", &r.monotone);
            r.passed()
        }
        "exp-convex" | "exp-convex-strong" | "exp-concave" => {
            let r = match class {
                "exp-concave" => check_exp_concave(&fut, samples, &grid),
                _ => check_exp_convex(&fut, samples, &grid, class == "exp-convex-strong"),
            };
            print_report("exponential convexity", &r.definition);
            if let Some(g) = &r.gradient {
                print_report("exponential gradient inequality", g);
            }
            r.passed()
        }
        "hierarchy" => {
            let r = check_hierarchy(&fut, samples, &grid);
            print_report("exponentially log-convex", &r.log_convex);
            print_report("exponentially convex", &r.convex);
            print_report("exponentially quasi-convex", &r.quasi_convex);
            println!("chain counterexamples: {}", r.counterexamples.len());
            r.consistent()
        }
        other => return Err(gvi::GviError::Invalid(format!("unknown class {other:?}"))),
    };
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Bench(args) => bench(args),
        Command::Obstacle { n, variant, format } => {
            let rows = obstacle_table(&n, variant)?;
            print!("{}", emit_obstacle_table(&rows, format));
            let ratios: Vec<String> = rows.iter().filter_map(|r| r.ratio).map(|q| format!("{q:.3}")).collect();
            println!("variant {}; successive error ratios: {}", variant.name(), ratios.join(", "));
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify { function, class, p, mu, samples, seed, dim } => {
            certify(function, &class, (p, mu), samples, seed, dim)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
