//! Cubic spline scheme for the third-order obstacle problem: banded
//! assembly, grid errors against the analytic solution and spline checks.

use gvi::bench::{emit_obstacle_table, obstacle_table, Format};
use gvi::obstacle::{solve_grid, AnalyticSolution, BoundaryVariant, ObstacleProblem};
use gvi::Result;

pub fn run_example() -> Result<()> {
    let exact = AnalyticSolution::new();
    println!("analytic coefficient system residual {:.1e}", exact.system_residual());
    println!("u(1/4) = {:.6}, u(1/2) = {:.6}, u(3/4) = {:.6}", exact.value(0.25), exact.value(0.5), exact.value(0.75));

    for variant in [BoundaryVariant::Corrected, BoundaryVariant::Verbatim] {
        let rows = obstacle_table(&[15, 31, 63, 127], variant)?;
        println!("variant {}", variant.name());
        print!("{}", emit_obstacle_table(&rows, Format::Markdown));
        let ratios: Vec<String> = rows.iter().filter_map(|r| r.ratio).map(|q| format!("{q:.2}")).collect();
        println!("error ratios {}", ratios.join(", "));
    }

    let problem = ObstacleProblem::reference_instance();
    let grid = solve_grid(&problem, 31, BoundaryVariant::Corrected)?;
    println!(
        "n = 31: C2 defect {:.1e}, boundary defect {:.1e}, end slope {:.1e}",
        grid.smoothness_defect(),
        grid.boundary_defect(&problem),
        grid.slope.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
