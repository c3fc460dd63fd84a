//! Band storage and pivoted elimination, compared with a dense solve.

use gvi::banded::BandMatrix;
use gvi::Result;
use nalgebra::DVector;

pub fn run_example() -> Result<()> {
    let n = 200;
    let mut m = BandMatrix::zeros(n, 2, 1);
    for i in 0..n {
        m.add(i, i, 6.0)?;
        if i >= 1 {
            m.add(i, i - 1, -4.0)?;
        }
        if i >= 2 {
            m.add(i, i - 2, 1.0)?;
        }
        if i + 1 < n {
            m.add(i, i + 1, 1.0)?;
        }
    }
    let b = DVector::from_fn(n, |i, _| (i as f64 * 0.1).sin());
    let x = m.solve(&b)?;
    let dense = m.to_dense().lu().solve(&b).expect("nonsingular");
    println!("n = {n}, bandwidth {:?}", m.bandwidth());
    println!("residual {:.1e}, difference from dense LU {:.1e}", (m.mul_vec(&x) - &b).amax(), (&x - dense).amax());
    println!("entry outside the band rejected: {}", m.add(0, 5, 1.0).is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
