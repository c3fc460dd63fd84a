//! Three-step auxiliary iteration, descent on the regularized gap function
//! and the gap of a state-control problem with a nonlinear feasibility map.

use gvi::auxiliary::{gap_n, p1_gap_closed_form, p1_instance, solve_gap_descent, solve_three_step};
use gvi::bench::example4;
use gvi::{Result, SolveConfig};
use nalgebra::dvector;

pub fn run_example() -> Result<()> {
    let p = example4(10)?;
    let rho = p.default_rho()?;
    let three = SolveConfig { mu_step: rho, beta_step: rho, ..SolveConfig::default().with_rho(rho) };
    let rep = solve_three_step(&p, &three)?;
    println!("three-step: {} iterations, |u - e|_inf = {:.2e}", rep.iterations, rep.solution.add_scalar(-1.0).amax());

    let gap = gap_n(&p, &p.start, rho)?;
    println!("gap at the start point: {:.4}", gap.value);
    let rep = solve_gap_descent(&p, &SolveConfig::default().with_rho(rho))?;
    let merits: Vec<f64> = rep.trace.iter().filter_map(|r| r.merit).collect();
    println!(
        "gap descent: {} iterations, merit {:.3e} -> {:.3e}",
        rep.iterations,
        merits.first().copied().unwrap_or(f64::NAN),
        merits.last().copied().unwrap_or(f64::NAN)
    );

    let cp = p1_instance();
    println!("state-control instance, rho = 1:");
    for (u, z) in [(0.0, 0.5), (0.75, 0.5), (1.0, 0.0), (2.0, 2.0), (-1.0, 2.0)] {
        let h = cp.regularized_gap(&dvector![u], &dvector![z], 1.0)?.value;
        let grad = cp.regularized_gap_gradient(&dvector![u], &dvector![z], 1.0)?[0];
        println!(
            "  u = {u:>5}, z = {z:>4}: h = {h:.4} (closed form {:.4}), dh/du = {grad:.4}",
            p1_gap_closed_form(u, z)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
