//! Wiener–Hopf predictor–corrector and double-projection methods.

use nalgebra::DVector;

use crate::error::{GviError, Result};
use crate::problem::{drive, residual_measure, GviProblem, SolveConfig, SolveReport, Step, StepDenominator};
use crate::sets::{project_intersection, ConvexSet};

const MAX_ARMIJO: u32 = 64;

/// Predictor `g(y) = P_K[g(u) − ρTu]`, then
/// `g(u⁺) = (1−αₙ)g(u) + αₙ P_K[2g(y) − ρTy − g(u) + ρTu]`.
pub fn solve_whe(problem: &GviProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    drive(problem, cfg, residual_measure(problem, cfg.rho, cfg.norm), |u, k| {
        let alpha = cfg.alpha_schedule.at(k);
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(GviError::Invalid(format!("alpha_{k} = {alpha} outside (0, 1]")));
        }
        let gu = problem.g(u)?;
        let tu = problem.op(u)? * cfg.rho;
        let gy = problem.project(&(&gu - &tu))?;
        let y = problem.recover(u, gy.clone())?;
        let ty = problem.op(&y)? * cfg.rho;
        let target = problem.project(&(&gy * 2.0 - ty - &gu + tu))?;
        let next = gu * (1.0 - alpha) + target * alpha;
        Ok(Step::to(problem.recover(u, next)?))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmijoResult {
    pub m: u32,
    pub eta: f64,
    pub trial_point: DVector<f64>,
}

/// Smallest `m >= 0` with `<T(u) − T(u − γᵐR), R> <= σ‖R‖²`.
pub fn armijo_search(
    problem: &GviProblem,
    u: &DVector<f64>,
    r: &DVector<f64>,
    gamma: f64,
    sigma: f64,
) -> Result<ArmijoResult> {
    let tu = problem.op(u)?;
    let bound = sigma * r.norm_squared();
    let mut eta = 1.0;
    for m in 0..=MAX_ARMIJO {
        let trial = u - r * eta;
        if (&tu - problem.op(&trial)?).dot(r) <= bound {
            return Ok(ArmijoResult { m, eta, trial_point: trial });
        }
        eta *= gamma;
    }
    Err(GviError::LineSearch(MAX_ARMIJO))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepData {
    pub z: DVector<f64>,
    pub r: DVector<f64>,
    pub y: DVector<f64>,
    pub eta: f64,
    /// `−(ηR − ηTu + Ty)`
    pub d: DVector<f64>,
    /// `η<R, R − Tu + Ty>`
    pub gain: f64,
    pub alpha: f64,
}

/// Predictor and search direction shared by both double-projection methods.
pub fn double_projection_data(problem: &GviProblem, u: &DVector<f64>, cfg: &SolveConfig) -> Result<StepData> {
    let gu = problem.g(u)?;
    let tu = problem.op(u)?;
    let z = problem.project(&(&gu - &tu))?;
    let r = &gu - &z;
    let armijo = armijo_search(problem, u, &r, cfg.gamma, cfg.sigma)?;
    let eta = armijo.eta;
    let y = armijo.trial_point;
    let ty = problem.op(&y)?;
    let d = -(&r * eta - &tu * eta + &ty);
    let gain = eta * r.dot(&(&r - &tu + &ty));
    let dn = match cfg.denominator {
        StepDenominator::Squared => d.norm_squared(),
        StepDenominator::Plain => d.norm(),
    };
    Ok(StepData {
        z,
        r,
        y,
        eta,
        alpha: gain / dn,
        d,
        gain,
    })
}

/// Basic corrector `u⁺ = P_K[u + αd]`.
pub fn solve_double_projection_basic(problem: &GviProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    drive(problem, cfg, residual_measure(problem, 1.0, cfg.norm), |u, k| {
        let s = checked_data(problem, u, cfg, k)?;
        let w = problem.project(&(problem.g(u)? + &s.d * s.alpha))?;
        Ok(Step::to(problem.recover(u, w)?))
    })
}

/// Corrector projecting `u + αd` onto `K ∩ {v : <d, v − u> = η<R, R − Tu + Ty>}`.
/// When that intersection is empty the basic corrector is used and the
/// trace record is tagged `"fallback"`.
pub fn solve_double_projection_optimal(problem: &GviProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    drive(problem, cfg, residual_measure(problem, 1.0, cfg.norm), |u, k| {
        let s = checked_data(problem, u, cfg, k)?;
        let gu = problem.g(u)?;
        let point = &gu + &s.d * s.alpha;
        let b = s.gain + gu.dot(&s.d);
        let projected = match &problem.set {
            ConvexSet::WholeSpace => Some(&point - &s.d * ((s.d.dot(&point) - b) / s.d.norm_squared())),
            base @ (ConvexSet::Box { .. } | ConvexSet::NonnegOrthant | ConvexSet::Simplex { .. }) => {
                match project_intersection(base, &s.d, b, &point) {
                    Ok(x) => Some(x),
                    Err(GviError::Infeasible) => None,
                    Err(e) => return Err(e),
                }
            }
            _ => None,
        };
        match projected {
            Some(w) => Ok(Step::to(problem.recover(u, w)?)),
            None => {
                let w = problem.project(&point)?;
                Ok(Step {
                    event: Some("fallback"),
                    ..Step::to(problem.recover(u, w)?)
                })
            }
        }
    })
}

fn checked_data(problem: &GviProblem, u: &DVector<f64>, cfg: &SolveConfig, k: usize) -> Result<StepData> {
    let s = double_projection_data(problem, u, cfg)?;
    if !(s.gain > 0.0) || !s.alpha.is_finite() {
        return Err(GviError::Stall(k));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::operator;
    use nalgebra::{dvector, DMatrix};

    fn scaled(c: f64) -> GviProblem {
        GviProblem::new(3, operator(move |u: &DVector<f64>| u * c), ConvexSet::WholeSpace).unwrap()
    }

    fn example3(n: usize) -> GviProblem {
        let m = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 4.0,
            1 => -1.0,
            _ => 0.0,
        });
        GviProblem::new(n, operator(move |u| &m * u - DVector::from_element(n, 1.0)), ConvexSet::unit_box(n)).unwrap()
    }

    fn example4(n: usize) -> GviProblem {
        let m = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| (i + 1) as f64 / n as f64));
        GviProblem::new(n, operator(move |u| &m * u - DVector::from_element(n, 1.0)), ConvexSet::unit_box(n)).unwrap()
    }

    #[test]
    fn armijo_examples() {
        let u = dvector![0.3, -1.0, 2.0];
        let r = dvector![1.0, 0.5, -0.25];
        assert_eq!(armijo_search(&scaled(0.1), &u, &r, 0.8, 0.5).unwrap().m, 0);
        assert_eq!(armijo_search(&scaled(0.0), &u, &r, 0.8, 0.5).unwrap().m, 0);
        let res = armijo_search(&scaled(10.0), &u, &r, 0.8, 0.5).unwrap();
        assert_eq!(res.m, 14);
        assert!(10.0 * 0.8f64.powi(13) > 0.5);
        assert_eq!(res.trial_point, &u - &r * res.eta);
    }

    #[test]
    fn armijo_gives_up() {
        let r = dvector![1.0, 0.0, 0.0];
        assert!(matches!(
            armijo_search(&scaled(1e30), &DVector::zeros(3), &r, 0.5, 0.5),
            Err(GviError::LineSearch(_))
        ));
    }

    #[test]
    fn zero_operator_stops_at_start() {
        let p = GviProblem::new(2, operator(|u: &DVector<f64>| DVector::zeros(u.len())), ConvexSet::unit_box(2))
            .unwrap()
            .with_start(dvector![0.5, 0.5]);
        let rep = solve_double_projection_basic(&p, &SolveConfig::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(solve_whe(&p, &SolveConfig::default()).unwrap().iterations <= 1);
    }

    #[test]
    fn basic_on_example3() {
        let rep = solve_double_projection_basic(&example3(10), &SolveConfig::default()).unwrap();
        assert!(rep.converged);
        assert!((33..=61).contains(&rep.iterations), "{}", rep.iterations);
    }

    #[test]
    fn optimal_stays_on_hyperplane() {
        let p = example3(10);
        let cfg = SolveConfig::default();
        let mut u = p.start.clone();
        for _ in 0..10 {
            let s = double_projection_data(&p, &u, &cfg).unwrap();
            assert!(s.gain > 0.0);
            let b = s.gain + u.dot(&s.d);
            let next = project_intersection(&p.set, &s.d, b, &(&u + &s.d * s.alpha)).unwrap();
            assert!(((&next - &u).dot(&s.d) - s.gain).abs() <= 1e-8);
            u = next;
        }
        let rep = solve_double_projection_optimal(&p, &cfg).unwrap();
        assert!(rep.converged);
    }

    #[test]
    fn whe_examples() {
        let rep = solve_whe(&example4(10), &SolveConfig::default().with_rho(0.5)).unwrap();
        assert!(rep.solution.add_scalar(-1.0).amax() <= 1e-6);
        let rep = solve_whe(&example3(10), &SolveConfig::default().with_rho(0.2)).unwrap();
        assert!(rep.converged);
    }

    #[test]
    fn whe_rejects_bad_alpha() {
        let cfg = SolveConfig {
            alpha_schedule: crate::problem::AlphaSchedule::Constant(1.5),
            ..SolveConfig::default().with_rho(0.5)
        };
        assert!(solve_whe(&example4(3), &cfg).is_err());
    }
}
