//! Projection fixed-point methods and discretized projected dynamics.

use nalgebra::DVector;

use crate::error::{GviError, Result};
use crate::problem::{drive, implicit_solve, residual_measure, DynamicalVariant, GviProblem, SolveConfig, SolveReport, Step};

/// `u⁺ = u − g(u) + P_K[g(u) − ρTu]`
pub fn solve_projection(problem: &GviProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    drive(problem, cfg, residual_measure(problem, cfg.rho, cfg.norm), |u, _| {
        Ok(Step::to(projection_step(problem, u, cfg.rho)?))
    })
}

pub(crate) fn projection_step(problem: &GviProblem, u: &DVector<f64>, rho: f64) -> Result<DVector<f64>> {
    let gu = problem.g(u)?;
    let w = problem.project(&(gu - problem.op(u)? * rho))?;
    problem.recover(u, w)
}

/// Predictor `g(y) = P_K[g(u) − ρTu]`, corrector `u⁺ = u − g(u) + P_K[g(u) − ρTy]`.
pub fn solve_extragradient(problem: &GviProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    if !problem.g_is_identity() && problem.g_inverse.is_none() {
        return Err(GviError::Capability("g_inverse"));
    }
    drive(problem, cfg, residual_measure(problem, cfg.rho, cfg.norm), |u, _| {
        let gu = problem.g(u)?;
        let gy = problem.project(&(&gu - problem.op(u)? * cfg.rho))?;
        let y = problem.recover_exact(u, gy)?;
        let w = problem.project(&(gu - problem.op(&y)? * cfg.rho))?;
        Ok(Step::to(problem.recover(u, w)?))
    })
}

/// Two-step family with weights `λ` (g-values) and `ξ` (evaluation point).
pub fn solve_two_step(problem: &GviProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    let (lambda, xi) = (cfg.lambda, cfg.xi);
    drive(problem, cfg, residual_measure(problem, cfg.rho, cfg.norm), |u, _| {
        let gu = problem.g(u)?;
        let gy = problem.project(&(&gu - problem.op(u)? * cfg.rho))?;
        let y = problem.recover(u, gy.clone())?;
        let point = u * (1.0 - xi) + &y * xi;
        let blend = &gu * (1.0 - lambda) + &gy * lambda;
        let w = problem.project(&(blend - problem.op(&point)? * cfg.rho))?;
        Ok(Step::to(problem.recover(u, w)?))
    })
}

/// Implicit and explicit discretizations of the projected dynamics
/// `dg(u)/dt = P_K[g(u) − ρTu] − g(u)` with step `h`.
pub fn solve_dynamical(problem: &GviProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    let variant = cfg.variant;
    let kappa = match variant {
        DynamicalVariant::FullImplicit => cfg.h * cfg.rho,
        DynamicalVariant::ForwardT | DynamicalVariant::ExplicitT => cfg.h * cfg.rho / (1.0 + cfg.h),
    };
    drive(problem, cfg, residual_measure(problem, cfg.rho, cfg.norm), |u, k| {
        let gu = problem.g(u)?;
        if variant == DynamicalVariant::ExplicitT {
            let w = problem.project(&(&gu - problem.op(u)? * kappa))?;
            return Ok(Step::to(problem.recover(u, w)?));
        }
        let oracle = |x: &DVector<f64>, c: &DVector<f64>, r: f64| {
            let ux = problem.recover_exact(u, x.clone())?;
            problem.project(&(c - problem.op(&ux)? * r))
        };
        let w = implicit_solve(oracle, &gu, kappa, gu.clone(), cfg).ok_or(GviError::InnerDivergence {
            variant: variant.name(),
            outer: k,
        })?;
        Ok(Step::to(problem.recover_exact(u, w)?))
    })
}
