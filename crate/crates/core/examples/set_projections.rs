//! Euclidean projections onto boxes, simplices, half-spaces and a box cut
//! by a hyperplane.

use gvi::{project_intersection, ConvexSet, Result};
use nalgebra::dvector;

pub fn run_example() -> Result<()> {
    let z = dvector![0.9, -0.4, 1.7, 0.2];
    let sets = [
        ("unit box", ConvexSet::unit_box(4)),
        ("orthant", ConvexSet::NonnegOrthant),
        ("simplex", ConvexSet::simplex(1.0)?),
        ("half-space sum <= 1", ConvexSet::halfspace(dvector![1.0, 1.0, 1.0, 1.0], 1.0)?),
        ("hyperplane sum = 1", ConvexSet::hyperplane(dvector![1.0, 1.0, 1.0, 1.0], 1.0)?),
    ];
    for (name, set) in &sets {
        let p = set.project(&z)?;
        println!("{name:<22} {:.4?}  distance {:.4}", p.as_slice(), set.distance(&z)?);
    }
    let cut = project_intersection(&ConvexSet::unit_box(4), &dvector![1.0, 2.0, 0.0, 1.0], 1.5, &z)?;
    println!("box with <a, x> = 1.5    {:.4?}", cut.as_slice());
    let far = project_intersection(&ConvexSet::unit_box(2), &dvector![1.0, 1.0], 5.0, &dvector![0.0, 0.0]);
    println!("box with x1 + x2 = 5     {far:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
