//! Complementarity problems on the orthant and a quasi-variational
//! inequality with a moving set posed as a general inequality.

use gvi::solvers::solve_projection;
use gvi::{operator, quasi_to_general, ConvexSet, GviProblem, Result, SolveConfig};
use nalgebra::{dmatrix, dvector, DVector};

pub fn run_example() -> Result<()> {
    let m = dmatrix![2.0, 1.0; 1.0, 2.0];
    let q = dvector![-1.0, 1.0];
    let t = operator(move |u: &DVector<f64>| &m * u + &q);
    let p = GviProblem::new(2, t, ConvexSet::NonnegOrthant)?;
    let rep = solve_projection(&p, &SolveConfig::for_problem(&p)?)?;
    let gap = p.complementarity_gap(&rep.solution)?;
    println!("LCP solution {:.6?}", rep.solution.as_slice());
    println!(
        "  primal violation {:.1e}, dual violation {:.1e}, <Tu, u> = {:.1e}",
        gap.primal_violation.abs(), gap.dual_violation, gap.pairing
    );

    // K(u) = 0.5 u + [0, 1]^2, so g(u) = u / 2 must lie in the unit box.
    let t = operator(|u: &DVector<f64>| u.add_scalar(-3.0));
    let qvi = quasi_to_general(2, operator(|u: &DVector<f64>| u * 0.5), ConvexSet::unit_box(2), t)?
        .with_g_inverse(operator(|w: &DVector<f64>| w * 2.0))?;
    let rep = solve_projection(&qvi, &SolveConfig::default().with_rho(0.25))?;
    println!("quasi-variational solution {:.6?} after {} iterations", rep.solution.as_slice(), rep.iterations);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
