//! Auxiliary-principle iterations and gap (merit) functions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GviError, Result};
use crate::problem::{drive, residual_measure, GviProblem, SolveConfig, SolveReport, Step};
use crate::sets::ConvexSet;

const MAX_HALVINGS: u32 = 64;

/// Three successive projections with steps `μ`, `β`, `ρ`.
pub fn solve_three_step(problem: &GviProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    let (mu, beta, rho) = (cfg.mu_step, cfg.beta_step, cfg.rho);
    drive(problem, cfg, residual_measure(problem, rho, cfg.norm), |u, _| {
        let y = half_step(problem, u, mu)?;
        let w = half_step(problem, &y, beta)?;
        Ok(Step::to(half_step(problem, &w, rho)?))
    })
}

fn half_step(problem: &GviProblem, u: &DVector<f64>, step: f64) -> Result<DVector<f64>> {
    let gu = problem.g(u)?;
    let w = problem.project(&(gu - problem.op(u)? * step))?;
    problem.recover(u, w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapEvaluation {
    pub value: f64,
    pub minimizer_point: DVector<f64>,
    pub distance_part: f64,
}

/// `N[u] = ½{‖ρTu‖² − ‖P_K[g(u) − ρTu] − (g(u) − ρTu)‖²}`
pub fn gap_n(problem: &GviProblem, u: &DVector<f64>, rho: f64) -> Result<GapEvaluation> {
    let rt = problem.op(u)? * rho;
    let shifted = problem.g(u)? - &rt;
    let p = problem.project(&shifted)?;
    let dist = (&p - &shifted).norm();
    Ok(GapEvaluation {
        value: 0.5 * (rt.norm_squared() - dist * dist),
        minimizer_point: problem.recover(u, p)?,
        distance_part: dist,
    })
}

/// Descent on `N` along `d = P_K[u − ρTu] − u` with the rule
/// `N[u + βˡd] <= N[u] − αβˡ‖d‖²`.
pub fn solve_gap_descent(problem: &GviProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    if !problem.g_is_identity() {
        return Err(GviError::Capability("gap descent needs g = identity"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) || !(cfg.beta > 0.0 && cfg.beta < 1.0) {
        return Err(GviError::Invalid("gap descent needs alpha, beta in (0, 1)".into()));
    }
    let rho = cfg.rho;
    drive(problem, cfg, residual_measure(problem, rho, cfg.norm), |u, k| {
        let d = problem.project(&(u - problem.op(u)? * rho))? - u;
        let dd = d.norm_squared();
        let n0 = gap_n(problem, u, rho)?.value;
        let mut t = 1.0;
        for _ in 0..=MAX_HALVINGS {
            // a step that no longer moves the iterate cannot certify decrease
            if t * d.amax() <= f64::EPSILON * (1.0 + u.amax()) {
                break;
            }
            let trial = u + &d * t;
            let n1 = gap_n(problem, &trial, rho)?.value;
            if n1 <= n0 - cfg.alpha * t * dd {
                return Ok(Step {
                    merit: Some(n1),
                    ..Step::to(trial)
                });
            }
            t *= cfg.beta;
        }
        Err(GviError::Stall(k))
    })
}

pub type BiOperator = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type BiJacobian = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// State–control operator `T(u, z)` with an optional Jacobian in `u`.
#[derive(Clone)]
pub struct ControlledOperator {
    pub t: BiOperator,
    pub t_jac: Option<BiJacobian>,
}

/// Variational constraint `<T(u,z), g(v) − g(u)> >= 0` of a control problem.
#[derive(Clone)]
pub struct ControlledProblem {
    pub op: ControlledOperator,
    pub g: BiOperator,
    pub g_jac: Option<BiJacobian>,
    pub set: ConvexSet,
}

impl ControlledProblem {
    /// `h_ρ(u,z) = ½{ρ²‖T(u,z)‖² − d_K²(g(u) − ρT(u,z))}`
    pub fn regularized_gap(&self, u: &DVector<f64>, z: &DVector<f64>, rho: f64) -> Result<GapEvaluation> {
        let t = (self.op.t)(u, z);
        let x = (self.g)(u, z) - &t * rho;
        let p = self.set.project(&x)?;
        let dist = (&x - &p).norm();
        Ok(GapEvaluation {
            value: 0.5 * (rho * rho * t.norm_squared() - dist * dist),
            minimizer_point: p,
            distance_part: dist,
        })
    }

    /// `ρ²J_Tᵀ T − (J_gᵀ − ρJ_Tᵀ)(I − P_K)[g(u) − ρT(u,z)]`
    pub fn regularized_gap_gradient(&self, u: &DVector<f64>, z: &DVector<f64>, rho: f64) -> Result<DVector<f64>> {
        let (Some(jt), Some(jg)) = (&self.op.t_jac, &self.g_jac) else {
            return Err(GviError::Capability("jacobians of T and g"));
        };
        let t = (self.op.t)(u, z);
        let x = (self.g)(u, z) - &t * rho;
        let excess = &x - self.set.project(&x)?;
        let jt = jt(u, z);
        let jg = jg(u, z);
        Ok(jt.transpose() * &t * (rho * rho) - (jg.transpose() - jt.transpose() * rho) * excess)
    }
}

/// Scalar instance with `T(u,z) = u + z − 1`, feasibility map
/// `g(u,z) = u + z²` and `K = [1, ∞)`. Its solution set is
/// `u = 1 − z` for `z ∉ (0,1)` and `u = 1 − z²` for `z ∈ (0,1)`.
pub fn p1_instance() -> ControlledProblem {
    ControlledProblem {
        op: ControlledOperator {
            t: Arc::new(|u, z| DVector::from_element(1, u[0] + z[0] - 1.0)),
            t_jac: Some(Arc::new(|_, _| DMatrix::from_element(1, 1, 1.0))),
        },
        g: Arc::new(|u, z| DVector::from_element(1, u[0] + z[0] * z[0])),
        g_jac: Some(Arc::new(|_, _| DMatrix::from_element(1, 1, 1.0))),
        set: ConvexSet::Box {
            lo: DVector::from_element(1, 1.0),
            hi: DVector::from_element(1, f64::INFINITY),
        },
    }
}

/// Closed form of `h₁` on the P1 instance.
pub fn p1_gap_closed_form(u: f64, z: f64) -> f64 {
    let t = z + u - 1.0;
    if z > 0.0 && z < 1.0 {
        0.5 * t * t - 0.5 * (z * z - z).powi(2)
    } else {
        0.5 * t * t
    }
}
