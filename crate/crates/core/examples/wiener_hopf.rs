//! Wiener-Hopf predictor-corrector iteration with a relaxation schedule,
//! and the Wiener-Hopf residual of the final point.

use gvi::bench::example4;
use gvi::wiener_hopf::solve_whe;
use gvi::{AlphaSchedule, Result, SolveConfig};
use std::sync::Arc;

pub fn run_example() -> Result<()> {
    let p = example4(10)?;
    for (label, schedule) in [
        ("alpha = 1", AlphaSchedule::Constant(1.0)),
        ("alpha = 0.6", AlphaSchedule::Constant(0.6)),
        ("alpha_n = 1/2 + 1/(n+2)", AlphaSchedule::Custom(Arc::new(|n| 0.5 + 1.0 / (n as f64 + 2.0)))),
    ] {
        let cfg = SolveConfig { alpha_schedule: schedule, ..SolveConfig::default().with_rho(0.5) };
        let rep = solve_whe(&p, &cfg)?;
        let z = p.g(&rep.solution)? - p.op(&rep.solution)? * cfg.rho;
        let whr = p.wiener_hopf_residual(&z, cfg.rho)?.norm();
        println!("{label:<26} {:>4} iterations, Wiener-Hopf residual {whr:.2e}", rep.iterations);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
