//! Cross-checks between solvers on random strongly monotone affine problems.

use gvi::bench::Algorithm;
use gvi::{operator, ConvexSet, GviProblem, SolveConfig};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn affine_problem(n: usize, vals: &[f64], set: ConvexSet) -> GviProblem {
    let mut it = vals.iter().cycle();
    let b = DMatrix::from_fn(n, n, |_, _| *it.next().unwrap());
    // symmetric part is I + BᵀB, so T is strongly monotone
    let m = DMatrix::identity(n, n) + b.transpose() * &b + (&b - b.transpose()) * 0.5;
    let q = DVector::from_fn(n, |i, _| vals[i % vals.len()] * 2.0);
    GviProblem::new(n, operator(move |u| &m * u + &q), set).unwrap()
}

fn reference(p: &GviProblem) -> DVector<f64> {
    let cfg = SolveConfig { tol: 1e-13, max_iters: 100_000, ..SolveConfig::for_problem(p).unwrap() };
    let r = Algorithm::Projection.run(p, &cfg).unwrap();
    assert!(r.converged);
    r.solution
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn converged_solvers_agree(vals in prop::collection::vec(-1.0f64..1.0, 9), n in 2usize..5, which in 0usize..3) {
        let set = match which {
            0 => ConvexSet::unit_box(n),
            1 => ConvexSet::NonnegOrthant,
            _ => ConvexSet::simplex(1.0).unwrap(),
        };
        let p = affine_problem(n, &vals, set);
        let u = reference(&p);
        let rho = p.default_rho().unwrap();
        for alg in Algorithm::ALL {
            let cfg = SolveConfig { tol: 1e-9, max_iters: 20_000, ..SolveConfig::default().with_rho(if alg.uses_rho() { rho } else { 1.0 }) };
            let Ok(r) = alg.run(&p, &cfg) else { continue };
            if r.converged {
                prop_assert!((&r.solution - &u).amax() <= 1e-5, "{} deviates by {}", alg.name(), (&r.solution - &u).amax());
            }
        }
        prop_assert!(p.residual(&u, 1.0).unwrap().norm() <= 1e-8);
    }
}

#[test]
fn lcp_complementarity_at_solution() {
    let p = affine_problem(4, &[0.3, -0.7, 0.2, 0.9, -0.4, 0.1, 0.5, -0.2, 0.6], ConvexSet::NonnegOrthant);
    let u = reference(&p);
    let gap = p.complementarity_gap(&u).unwrap();
    assert!(gap.primal_violation <= 1e-12);
    assert!(gap.dual_violation <= 1e-8);
    assert!(gap.pairing.abs() <= 1e-8);
}
