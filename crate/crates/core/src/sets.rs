//! Convex sets with exact Euclidean projections.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{GviError, Result};

const BISECTION_TOL: f64 = 1e-12;
const MAX_BRACKET_DOUBLINGS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    WholeSpace,
    NonnegOrthant,
    Box { lo: DVector<f64>, hi: DVector<f64> },
    /// `{x >= 0, sum x = total}`
    Simplex { total: f64 },
    /// `{x : a.x <= b}`
    Halfspace { a: DVector<f64>, b: f64 },
    /// `{x : a.x = b}`
    Hyperplane { a: DVector<f64>, b: f64 },
    /// `base ∩ {x : a.x = b}` where base is a box, orthant or simplex.
    Intersection {
        base: Arc<ConvexSet>,
        a: DVector<f64>,
        b: f64,
    },
}

impl ConvexSet {
    pub fn boxed(lo: DVector<f64>, hi: DVector<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(GviError::Invalid("box bounds differ in length".into()));
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| !(l <= h)) {
            return Err(GviError::Invalid("box requires lo <= hi".into()));
        }
        Ok(ConvexSet::Box { lo, hi })
    }

    pub fn unit_box(n: usize) -> Self {
        ConvexSet::Box {
            lo: DVector::zeros(n),
            hi: DVector::from_element(n, 1.0),
        }
    }

    pub fn simplex(total: f64) -> Result<Self> {
        if !(total > 0.0) {
            return Err(GviError::Invalid("simplex total must be positive".into()));
        }
        Ok(ConvexSet::Simplex { total })
    }

    pub fn halfspace(a: DVector<f64>, b: f64) -> Result<Self> {
        nonzero(&a)?;
        Ok(ConvexSet::Halfspace { a, b })
    }

    pub fn hyperplane(a: DVector<f64>, b: f64) -> Result<Self> {
        nonzero(&a)?;
        Ok(ConvexSet::Hyperplane { a, b })
    }

    pub fn intersection(base: ConvexSet, a: DVector<f64>, b: f64) -> Result<Self> {
        check_base(&base)?;
        nonzero(&a)?;
        Ok(ConvexSet::Intersection {
            base: Arc::new(base),
            a,
            b,
        })
    }

    pub fn is_cone(&self) -> bool {
        matches!(self, ConvexSet::NonnegOrthant)
    }

    /// True when projection acts coordinate by coordinate.
    pub fn is_separable(&self) -> bool {
        matches!(
            self,
            ConvexSet::WholeSpace | ConvexSet::NonnegOrthant | ConvexSet::Box { .. }
        )
    }

    pub fn project(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            ConvexSet::WholeSpace => Ok(z.clone()),
            ConvexSet::NonnegOrthant => Ok(z.map(|v| v.max(0.0))),
            ConvexSet::Box { lo, hi } => {
                let mut x = z.clone();
                for i in 0..x.len() {
                    x[i] = x[i].max(lo[i]).min(hi[i]);
                }
                Ok(x)
            }
            ConvexSet::Simplex { total } => Ok(project_simplex(z, *total)),
            ConvexSet::Halfspace { a, b } => {
                let excess = a.dot(z) - b;
                if excess <= 0.0 {
                    Ok(z.clone())
                } else {
                    Ok(z - a * (excess / a.norm_squared()))
                }
            }
            ConvexSet::Hyperplane { a, b } => Ok(z - a * ((a.dot(z) - b) / a.norm_squared())),
            ConvexSet::Intersection { base, a, b } => project_intersection(base, a, *b, z),
        }
    }

    pub fn distance(&self, z: &DVector<f64>) -> Result<f64> {
        Ok((z - self.project(z)?).norm())
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        match self {
            ConvexSet::WholeSpace => true,
            ConvexSet::NonnegOrthant => x.iter().all(|&v| v >= -tol),
            ConvexSet::Box { lo, hi } => (0..x.len()).all(|i| x[i] >= lo[i] - tol && x[i] <= hi[i] + tol),
            ConvexSet::Simplex { total } => {
                x.iter().all(|&v| v >= -tol) && (x.sum() - total).abs() <= tol * x.len().max(1) as f64
            }
            ConvexSet::Halfspace { a, b } => a.dot(x) <= b + tol,
            ConvexSet::Hyperplane { a, b } => (a.dot(x) - b).abs() <= tol,
            ConvexSet::Intersection { base, a, b } => base.contains(x, tol) && (a.dot(x) - b).abs() <= tol,
        }
    }
}

fn nonzero(a: &DVector<f64>) -> Result<()> {
    if a.iter().all(|&v| v == 0.0) {
        return Err(GviError::Invalid("normal vector must be nonzero".into()));
    }
    Ok(())
}

fn check_base(base: &ConvexSet) -> Result<()> {
    match base {
        ConvexSet::Box { .. } | ConvexSet::NonnegOrthant | ConvexSet::Simplex { .. } => Ok(()),
        _ => Err(GviError::UnsupportedSet("intersection base must be a box, orthant or simplex")),
    }
}

fn project_simplex(z: &DVector<f64>, total: f64) -> DVector<f64> {
    // shifting by a multiple of e leaves the projection unchanged and keeps
    // the threshold search well scaled for huge inputs
    let top = z.max();
    let z = z.add_scalar(-top);
    let mut sorted: Vec<f64> = z.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - total) / (k + 1) as f64;
        if v - t > 0.0 {
            tau = t;
        }
    }
    z.map(|v| (v - tau).max(0.0))
}

/// Projection onto `base ∩ {a.x = b}` through the multiplier of the
/// equality: `x(θ) = P_base(z − θa)` and `a.x(θ)` is nonincreasing in θ.
pub fn project_intersection(
    base: &ConvexSet,
    a: &DVector<f64>,
    b: f64,
    z: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_base(base)?;
    let phi = |theta: f64| -> Result<(f64, DVector<f64>)> {
        let x = base.project(&(z - a * theta))?;
        Ok((a.dot(&x) - b, x))
    };
    let tol = BISECTION_TOL * b.abs().max(1.0);

    let (p0, x0) = phi(0.0)?;
    if p0.abs() <= tol {
        return Ok(x0);
    }

    let scale = 1.0 / a.norm().max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = if p0 > 0.0 { (0.0, scale) } else { (-scale, 0.0) };
    let mut grown = 0;
    loop {
        let (p, x) = if p0 > 0.0 { phi(hi)? } else { phi(lo)? };
        if p.abs() <= tol {
            return Ok(x);
        }
        let bracketed = if p0 > 0.0 { p < 0.0 } else { p > 0.0 };
        if bracketed {
            break;
        }
        grown += 1;
        if grown > MAX_BRACKET_DOUBLINGS || !lo.is_finite() || !hi.is_finite() {
            return Err(GviError::Infeasible);
        }
        if p0 > 0.0 {
            lo = hi;
            hi *= 2.0;
        } else {
            hi = lo;
            lo *= 2.0;
        }
    }

    loop {
        let mid = 0.5 * (lo + hi);
        let (p, x) = phi(mid)?;
        if p.abs() <= tol || mid <= lo || mid >= hi {
            return Ok(x);
        }
        if p > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use proptest::prelude::*;

    fn close(a: &DVector<f64>, b: &DVector<f64>, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn box_clamp() {
        let k = ConvexSet::unit_box(3);
        let p = k.project(&dvector![1.5, -0.2, 0.7]).unwrap();
        assert_eq!(p, dvector![1.0, 0.0, 0.7]);
    }

    #[test]
    fn simplex_cases() {
        let k = ConvexSet::simplex(1.0).unwrap();
        assert!(close(&k.project(&dvector![2.0, 0.0]).unwrap(), &dvector![1.0, 0.0], 1e-15));
        assert!(close(&k.project(&dvector![0.0, 0.0]).unwrap(), &dvector![0.5, 0.5], 1e-15));
    }

    #[test]
    fn simplex_matches_grid_search() {
        let k = ConvexSet::simplex(1.0).unwrap();
        let z = dvector![0.3, 0.9];
        let p = k.project(&z).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=10_000 {
            let t = i as f64 * 1e-4;
            let d = (t - z[0]).powi(2) + (1.0 - t - z[1]).powi(2);
            if d < best.0 {
                best = (d, t);
            }
        }
        assert!((p[0] - best.1).abs() <= 1e-4);
    }

    #[test]
    fn distances() {
        assert_eq!(ConvexSet::unit_box(1).distance(&dvector![2.0]).unwrap(), 1.0);
        assert_eq!(ConvexSet::NonnegOrthant.distance(&dvector![-3.0, 4.0]).unwrap(), 3.0);
        assert_eq!(ConvexSet::unit_box(2).distance(&dvector![0.2, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn intersection_examples() {
        let base = ConvexSet::unit_box(2);
        let p = project_intersection(&base, &dvector![1.0, 1.0], 1.0, &dvector![1.0, 1.0]).unwrap();
        assert!(close(&p, &dvector![0.5, 0.5], 1e-12));
        let p = project_intersection(&base, &dvector![1.0, 0.0], 0.25, &dvector![1.0, 0.5]).unwrap();
        assert!(close(&p, &dvector![0.25, 0.5], 1e-12));
        let z = dvector![0.2, 0.3];
        let p = project_intersection(&base, &dvector![1.0, 1.0], 0.5, &z).unwrap();
        assert_eq!(p, z);
    }

    #[test]
    fn intersection_infeasible() {
        let base = ConvexSet::unit_box(2);
        let r = project_intersection(&base, &dvector![1.0, 1.0], 3.0, &dvector![0.0, 0.0]);
        assert!(matches!(r, Err(GviError::Infeasible)));
        let simplex = ConvexSet::simplex(1.0).unwrap();
        let r = project_intersection(&simplex, &dvector![1.0, 1.0], 2.0, &dvector![0.0, 0.0]);
        assert!(matches!(r, Err(GviError::Infeasible)));
    }

    #[test]
    fn constructors_validate() {
        assert!(ConvexSet::boxed(dvector![1.0], dvector![0.0]).is_err());
        assert!(ConvexSet::simplex(0.0).is_err());
        assert!(ConvexSet::hyperplane(dvector![0.0, 0.0], 1.0).is_err());
        assert!(ConvexSet::intersection(ConvexSet::WholeSpace, dvector![1.0], 0.0).is_err());
    }

    #[test]
    fn halfspace_and_hyperplane() {
        let h = ConvexSet::halfspace(dvector![1.0, 1.0], 1.0).unwrap();
        assert!(close(&h.project(&dvector![1.0, 1.0]).unwrap(), &dvector![0.5, 0.5], 1e-15));
        assert_eq!(h.project(&dvector![0.0, 0.0]).unwrap(), dvector![0.0, 0.0]);
        let p = ConvexSet::hyperplane(dvector![0.0, 2.0], 2.0).unwrap();
        assert!(close(&p.project(&dvector![3.0, -1.0]).unwrap(), &dvector![3.0, 1.0], 1e-15));
    }

    fn vec3() -> impl Strategy<Value = DVector<f64>> {
        prop::collection::vec(-3.0f64..3.0, 3).prop_map(DVector::from_vec)
    }

    fn sets() -> Vec<ConvexSet> {
        vec![
            ConvexSet::WholeSpace,
            ConvexSet::NonnegOrthant,
            ConvexSet::boxed(dvector![-1.0, 0.0, 0.5], dvector![1.0, 2.0, 0.5]).unwrap(),
            ConvexSet::simplex(2.0).unwrap(),
            ConvexSet::halfspace(dvector![1.0, -2.0, 0.5], 0.3).unwrap(),
            ConvexSet::hyperplane(dvector![1.0, 1.0, 1.0], 1.0).unwrap(),
            ConvexSet::intersection(ConvexSet::unit_box(3), dvector![1.0, 2.0, 3.0], 2.5).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn nonexpansive(z1 in vec3(), z2 in vec3()) {
            for k in sets() {
                let d = (k.project(&z1).unwrap() - k.project(&z2).unwrap()).norm();
                prop_assert!(d <= (&z1 - &z2).norm() + 1e-10);
            }
        }

        #[test]
        fn idempotent_and_variational(z in vec3(), w in vec3()) {
            for k in sets() {
                let p = k.project(&z).unwrap();
                prop_assert!(close(&k.project(&p).unwrap(), &p, 1e-12));
                let v = k.project(&w).unwrap();
                prop_assert!((&p - &z).dot(&(&v - &p)) >= -1e-10);
            }
        }
    }
}
