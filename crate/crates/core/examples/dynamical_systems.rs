//! Implicit discretisations of the projected dynamical system and the
//! decay of the Lyapunov function `‖g(u*) − g(uₙ)‖²` along the trajectory.

use gvi::bench::example3;
use gvi::solvers::{solve_dynamical, solve_projection};
use gvi::{DynamicalVariant, Result, SolveConfig};

pub fn run_example() -> Result<()> {
    // a tightly converged projection solve serves as the reference point
    let p = example3(10)?;
    let tight = SolveConfig { tol: 1e-14, max_iters: 10_000, ..SolveConfig::for_problem(&p)? };
    let reference = solve_projection(&p, &tight)?.solution;
    let p = p.with_solution(reference);
    for variant in [DynamicalVariant::ForwardT, DynamicalVariant::FullImplicit, DynamicalVariant::ExplicitT] {
        for h in [0.5, 1.0, 2.0] {
            let cfg = SolveConfig { h, variant, ..SolveConfig::for_problem(&p)? };
            let rep = solve_dynamical(&p, &cfg)?;
            let lyap: Vec<f64> = rep.trace.iter().filter_map(|r| r.lyapunov).collect();
            let monotone = lyap.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            println!(
                "{:<14} h = {h:<4} iterations {:>4}  converged {:<5}  Lyapunov nonincreasing {monotone}",
                variant.name(),
                rep.iterations,
                rep.converged
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
