//! Fixed-point projection, extragradient and two-step methods on the
//! tridiagonal and diagonal benchmark problems.

use gvi::bench::{example3, example4};
use gvi::solvers::{solve_extragradient, solve_projection, solve_two_step};
use gvi::{Result, SolveConfig, TwoStepScheme};

pub fn run_example() -> Result<()> {
    let p = example4(10)?;
    let cfg = SolveConfig::for_problem(&p)?;
    println!("example4(10), rho = {:.3}", cfg.rho);
    for (name, rep) in [
        ("projection", solve_projection(&p, &cfg)?),
        ("extragradient", solve_extragradient(&p, &cfg)?),
        ("two-step (1/2, 1/2)", solve_two_step(&p, &cfg.clone().with_scheme(TwoStepScheme::HALF_HALF))?),
    ] {
        let err = rep.solution.add_scalar(-1.0).amax();
        println!("  {name:<20} iterations {:>4}  |u - e|_inf = {err:.2e}", rep.iterations);
    }

    let p = example3(20)?;
    let cfg = SolveConfig::for_problem(&p)?;
    let rep = solve_projection(&p, &cfg)?;
    println!("example3(20): {} iterations, residual {:.2e}", rep.iterations, rep.residual_norm);
    println!("  first components {:?}", &rep.solution.as_slice()[..4]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
