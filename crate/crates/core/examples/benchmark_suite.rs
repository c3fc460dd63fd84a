//! Every algorithm on the benchmark problems, driven through a flat
//! key = value configuration and printed as a table.

use gvi::bench::{emit_table, run_suite, Algorithm, Format, RunConfig};
use gvi::Result;

pub fn run_example() -> Result<()> {
    let cfg = RunConfig::parse("problem = example4\nn = 10\nalg = all\ntol = 1e-7\n# sigma and gamma keep their defaults\n")?;
    let results = run_suite(&cfg.specs()?, &Algorithm::ALL, &cfg.bench_config());
    print!("{}", emit_table(&results, Format::Markdown, false));
    let failed: Vec<&str> = results.iter().filter(|r| !r.converged).map(|r| r.algorithm.as_str()).collect();
    println!("not converged: {failed:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
