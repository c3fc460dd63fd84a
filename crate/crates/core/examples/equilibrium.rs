//! Equilibrium, variational-like and higher-order problems driven by
//! auxiliary-subproblem oracles.

use gvi::bench::{example3, example4};
use gvi::equilibrium::{
    fejer_defect, solve_eq_inertial, solve_eq_predictor_corrector, solve_higher_order, solve_higher_order_implicit,
    solve_varlike, EquilibriumProblem, HigherOrderProblem, VarLikeProblem,
};
use gvi::solvers::solve_projection;
use gvi::{AlphaSchedule, Result, SolveConfig};
use nalgebra::DVector;

pub fn run_example() -> Result<()> {
    let base = example4(10)?;
    let rho = base.default_rho()?;
    let cfg = SolveConfig { tol: 1e-9, beta_step: rho, ..SolveConfig::default().with_rho(rho) };
    let err = |u: &DVector<f64>| u.add_scalar(-1.0).amax();

    let ep = EquilibriumProblem::from_gvi(base.clone());
    let rep = solve_eq_predictor_corrector(&ep, &cfg)?;
    println!("equilibrium predictor-corrector: {} iterations, error {:.1e}", rep.iterations, err(&rep.solution));
    let inertial = SolveConfig { alpha_schedule: AlphaSchedule::Constant(0.3), ..cfg.clone() };
    let rep = solve_eq_inertial(&ep, &inertial)?;
    println!("equilibrium inertial (alpha = 0.3): {} iterations, error {:.1e}", rep.iterations, err(&rep.solution));

    let d = DVector::from_fn(10, |i, _| 1.0 + 0.1 * i as f64);
    let vp = VarLikeProblem::diagonal(base.clone(), d)?;
    let rep = solve_varlike(&vp, &cfg)?;
    println!("variational-like, diagonal kernel: {} iterations, error {:.1e}", rep.iterations, err(&rep.solution));

    let p3 = example3(10)?;
    let rho3 = p3.default_rho()?;
    let tight = SolveConfig { tol: 1e-14, max_iters: 10_000, ..SolveConfig::default().with_rho(rho3) };
    let p3 = p3.clone().with_solution(solve_projection(&p3, &tight)?.solution);
    let hcfg = SolveConfig { tol: 1e-9, ..SolveConfig::default().with_rho(rho3) };
    for (p, mu) in [(2.0, 0.0), (2.0, 0.1), (3.0, 0.1)] {
        let hp = HigherOrderProblem::new(p3.clone(), p, mu)?;
        let rep = solve_higher_order(&hp, &hcfg)?;
        let margin = hp.sampled_margin(&rep.solution, 500, 3)?;
        println!(
            "higher order p = {p}, mu = {mu}: {} iterations, sampled margin {margin:.2e}, Fejer defect {:.1e}",
            rep.iterations,
            fejer_defect(&rep).unwrap_or(f64::NAN)
        );
    }
    let hp = HigherOrderProblem::new(p3, 2.0, 0.0)?;
    let rep = solve_higher_order_implicit(&hp, &hcfg)?;
    println!("proximal point variant: {} iterations", rep.iterations);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
