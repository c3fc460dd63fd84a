//! Armijo-searched double-projection methods: the basic corrector and the
//! corrector projecting onto the cut hyperplane.

use gvi::bench::{example2, example3, example4};
use gvi::wiener_hopf::{armijo_search, double_projection_data, solve_double_projection_basic, solve_double_projection_optimal};
use gvi::{Result, SolveConfig};

pub fn run_example() -> Result<()> {
    let cfg = SolveConfig::default();
    let p = example3(10)?;
    let u = p.start.clone();
    let r = p.residual(&u, 1.0)?;
    let a = armijo_search(&p, &u, &r, cfg.gamma, cfg.sigma)?;
    println!("first Armijo search: m = {}, eta = {}", a.m, a.eta);
    let s = double_projection_data(&p, &u, &cfg)?;
    println!("first step length alpha = {:.4}, cut offset {:.4}", s.alpha, s.gain);

    println!("{:<12} {:>6} {:>12} {:>12}", "problem", "n", "basic", "optimal");
    let mut rows = vec![("example2".to_string(), 4, example2()?)];
    for n in [10, 20, 50, 100] {
        rows.push(("example3".into(), n, example3(n)?));
    }
    rows.push(("example4".into(), 10, example4(10)?));
    for (name, n, p) in rows {
        let show = |r: Result<gvi::SolveReport>| match r {
            Ok(r) if r.converged => r.iterations.to_string(),
            Ok(r) => format!("({:.1e})", r.residual_norm),
            Err(e) => format!("error: {e}"),
        };
        let basic = show(solve_double_projection_basic(&p, &cfg));
        let optimal = show(solve_double_projection_optimal(&p, &cfg));
        println!("{name:<12} {n:>6} {basic:>12} {optimal:>12}");
    }
    println!("parenthesised entries did not reach the tolerance; they show the final residual");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
