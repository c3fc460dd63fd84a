//! Sampled certification of higher-order strong convexity, exponential
//! convexity classes and the parallelogram laws.

use gvi::convexity::{
    builtin, check_exp_concave, check_exp_convex, check_gradient_char, check_hierarchy, check_hos_affine,
    check_hos_convex, check_parallelogram, default_t_grid, FunctionUnderTest,
};
use gvi::Result;

pub fn run_example() -> Result<()> {
    let grid = default_t_grid();
    let q = builtin("quadratic")?.with_class(2.0, 1.0)?;
    println!("quadratic, p = 2, mu = 1: {}", check_hos_convex(&q, 1000, &grid).verdict());
    let q = builtin("quadratic")?.with_class(2.0, 1.5)?;
    let r = check_hos_convex(&q, 1000, &grid);
    println!("quadratic, p = 2, mu = 1.5: {} (worst {:.3})", r.verdict(), r.worst_violation);
    println!("linear is strongly affine with mu = 0: {}", check_hos_affine(&builtin("linear")?, 500, &grid).verdict());
    let g = check_gradient_char(&builtin("quartic")?, 1000);
    println!("quartic gradient inequality {}, monotone gradient {}", g.gradient.verdict(), g.monotone.verdict());
    println!("sine fails convexity: {}", check_hos_convex(&builtin("sine")?, 1000, &grid).verdict());

    let e = check_exp_convex(&builtin("log-one-plus-square")?, 1000, &grid, false);
    println!("log(1 + x^2) exponentially convex: {}", e.definition.verdict());
    let erf = builtin("erf-sqrt")?;
    println!(
        "erf(sqrt x): exponentially convex {}, exponentially concave {}",
        check_exp_convex(&erf, 1000, &grid, false).definition.verdict(),
        check_exp_concave(&erf, 1000, &grid).definition.verdict()
    );
    let h = check_hierarchy(&builtin("shifted-quadratic")?, 1000, &grid);
    println!(
        "hierarchy on (x - 1)^2 + 1: log-convex {}, convex {}, quasi-convex {}, consistent {}",
        h.log_convex.verdict(),
        h.convex.verdict(),
        h.quasi_convex.verdict(),
        h.consistent()
    );

    let custom = FunctionUnderTest::scalar(-2.0, 2.0, |x: f64| x.abs().powi(3)).with_class(3.0, 0.25)?;
    println!("|x|^3 with p = 3, mu = 1/4: {}", check_hos_convex(&custom, 2000, &grid).verdict());

    for p in [2.0, 3.0, 4.0] {
        let r = check_parallelogram(p, 0.0, 3, 2000, 5)?;
        println!("parallelogram laws, p = {p}: mu_lower {:.4}, mu_upper {:.4}", r.mu_lower, r.mu_upper);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
