//! Equilibrium, variational-like and higher-order problems solved through
//! auxiliary-subproblem oracles.

use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GviError, Result};
use crate::problem::{drive, implicit_solve, GviProblem, SolveConfig, SolveReport, Step};

const FEASIBILITY_TOL: f64 = 1e-10;

pub type Bifunction = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> f64 + Send + Sync>;
pub type BiMap = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;

pub type Gradient = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

/// `(anchor w, center c, ρ) ↦ g(u⁺)` solving the auxiliary subproblem.
pub type AuxOracle = Arc<dyn Fn(&DVector<f64>, &DVector<f64>, f64) -> Result<DVector<f64>> + Send + Sync>;

/// Find `u` with `F(u, g(v)) >= 0` for all `g(v) ∈ K`.
///
/// `base` supplies the dimension, `g`, `K`, the start point and an optional
/// known solution; its operator is only used by [`EquilibriumProblem::from_gvi`].
#[derive(Clone)]
pub struct EquilibriumProblem {
    pub base: GviProblem,
    pub f: Bifunction,
    pub oracle: AuxOracle,
}

impl EquilibriumProblem {
    pub fn new(base: GviProblem, f: Bifunction, oracle: AuxOracle) -> Self {
        Self { base, f, oracle }
    }

    /// `F(u, y) = <Tu, y − g(u)>` with the projection oracle `P_K[c − ρT(w)]`.
    pub fn from_gvi(base: GviProblem) -> Self {
        let fp = base.clone();
        let op = base.clone();
        Self {
            f: Arc::new(move |u, y| {
                let (Ok(t), Ok(gu)) = (fp.op(u), fp.g(u)) else {
                    return f64::NAN;
                };
                t.dot(&(y - gu))
            }),
            oracle: Arc::new(move |w, c, rho| op.project(&(c - op.op(w)? * rho))),
            base,
        }
    }

    pub fn value(&self, u: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (self.f)(u, y)
    }

    fn call(&self, w: &DVector<f64>, c: &DVector<f64>, rho: f64, k: usize) -> Result<DVector<f64>> {
        let out = (self.oracle)(w, c, rho)?;
        if out.len() != self.base.dim || !self.base.set.contains(&out, FEASIBILITY_TOL) {
            return Err(GviError::OracleContract(k));
        }
        Ok(out)
    }
}

/// `‖g(uₙ) − g(uₙ₋₁)‖`, infinite before the first step.
fn displacement(problem: &GviProblem) -> impl FnMut(&DVector<f64>, Option<&DVector<f64>>) -> Result<f64> + '_ {
    move |u, prev| match prev {
        None => Ok(f64::INFINITY),
        Some(p) => Ok((problem.g(u)? - problem.g(p)?).norm()),
    }
}

/// `g(wₙ) = O(uₙ, g(uₙ), β)`, then `g(uₙ₊₁) = O(wₙ, g(wₙ), ρ)`.
pub fn solve_eq_predictor_corrector(ep: &EquilibriumProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    if !(cfg.beta_step > 0.0) {
        return Err(GviError::Invalid("beta_step must be positive".into()));
    }
    let p = &ep.base;
    drive(p, cfg, displacement(p), |u, k| {
        let gw = ep.call(u, &p.g(u)?, cfg.beta_step, k)?;
        let w = p.recover(u, gw.clone())?;
        let gn = ep.call(&w, &gw, cfg.rho, k)?;
        Ok(Step::to(p.recover(u, gn)?))
    })
}

/// Inertial proximal point: `g(uₙ₊₁) = O(uₙ₊₁, g(uₙ) + αₙ(g(uₙ) − g(uₙ₋₁)), ρ)`.
/// With `αₙ ≡ 0` this is the plain proximal method.
pub fn solve_eq_inertial(ep: &EquilibriumProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    let p = &ep.base;
    let mut previous: Option<DVector<f64>> = None;
    drive(p, cfg, displacement(p), |u, k| {
        let alpha = cfg.alpha_schedule.at(k);
        if !(0.0..1.0).contains(&alpha) {
            return Err(GviError::Invalid(format!("alpha_{k} = {alpha} outside [0, 1)")));
        }
        let gu = p.g(u)?;
        let center = match &previous {
            Some(prev) => &gu + (&gu - prev) * alpha,
            None => gu.clone(),
        };
        let oracle = |x: &DVector<f64>, c: &DVector<f64>, r: f64| {
            let ux = p.recover_exact(u, x.clone())?;
            ep.call(&ux, c, r, k)
        };
        let gn = implicit_solve(oracle, &center, cfg.rho, gu.clone(), cfg)
            .ok_or(GviError::InnerDivergence { variant: "inertial-proximal", outer: k })?;
        let next = p.recover_exact(u, gn)?;
        previous = Some(gu);
        Ok(Step::to(next))
    })
}

/// Variational-like inequality `<Tu, η(g(v), g(u))> >= 0` with auxiliary
/// kernel gradient `E′`. The oracle returns `g(uₙ₊₁)` solving
/// `<ρTuₙ + E′(g(uₙ₊₁)) − E′(g(uₙ)), η(g(v), g(uₙ₊₁))> >= 0`.
#[derive(Clone)]
pub struct VarLikeProblem {
    pub base: GviProblem,
    pub eta: BiMap,
    pub e_grad: Gradient,
    pub oracle: AuxOracle,
}

impl VarLikeProblem {
    /// Rejects kernels with `η(y, y) ≠ 0` at sampled `y`.
    pub fn new(
        base: GviProblem,
        eta: BiMap,
        e_grad: Gradient,
        oracle: AuxOracle,
    ) -> Result<Self> {
        let vp = Self { base, eta, e_grad, oracle };
        let defect = vp.eta_defect(16, 11);
        if !(defect <= 1e-12) {
            return Err(GviError::Invalid(format!("eta(y, y) reaches norm {defect:e}")));
        }
        Ok(vp)
    }

    /// `η(y₁, y₂) = y₁ − y₂`, `E(y) = ½yᵀDy` with positive diagonal `D`,
    /// solved in closed form on separable sets.
    pub fn diagonal(base: GviProblem, d: DVector<f64>) -> Result<Self> {
        if d.len() != base.dim || d.iter().any(|x| !(*x > 0.0)) {
            return Err(GviError::Invalid("kernel diagonal must be positive with matching length".into()));
        }
        if !base.set.is_separable() {
            return Err(GviError::UnsupportedSet("closed-form kernel step needs a separable set"));
        }
        let op = base.clone();
        let dd = d.clone();
        let oracle: AuxOracle = Arc::new(move |w, c, rho| {
            let t = op.op(w)?;
            op.project(&(c - t.component_div(&dd) * rho))
        });
        Self::new(
            base,
            Arc::new(|a, b| a - b),
            Arc::new(move |y| y.component_mul(&d)),
            oracle,
        )
    }

    /// Largest `‖η(y, y)‖` over sampled points.
    pub fn eta_defect(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| {
                let y = DVector::from_fn(self.base.dim, |_, _| rng.gen_range(-2.0..2.0));
                (self.eta)(&y, &y).norm()
            })
            .fold(0.0, f64::max)
    }
}

pub fn solve_varlike(vp: &VarLikeProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    let p = &vp.base;
    let measure = |u: &DVector<f64>, prev: Option<&DVector<f64>>| match prev {
        None => Ok(f64::INFINITY),
        Some(q) => Ok((vp.eta)(&p.g(u)?, &p.g(q)?).norm()),
    };
    drive(p, cfg, measure, |u, k| {
        let gn = (vp.oracle)(u, &p.g(u)?, cfg.rho)?;
        if !p.set.contains(&gn, FEASIBILITY_TOL) {
            return Err(GviError::OracleContract(k));
        }
        Ok(Step::to(p.recover(u, gn)?))
    })
}

/// Higher-order inequality `<Tu, g(v) − g(u)> + μ‖g(v) − g(u)‖^p >= 0`.
/// `nu` weighs the power term of the regularized subproblem.
#[derive(Debug, Clone)]
pub struct HigherOrderProblem {
    pub base: GviProblem,
    pub p: f64,
    pub mu: f64,
    pub nu: f64,
}

impl HigherOrderProblem {
    /// Sets `ν = μ`.
    pub fn new(base: GviProblem, p: f64, mu: f64) -> Result<Self> {
        if !(p > 1.0) || !(mu >= 0.0) {
            return Err(GviError::Invalid("need p > 1 and mu >= 0".into()));
        }
        Ok(Self { base, p, mu, nu: mu })
    }

    pub fn with_nu(mut self, nu: f64) -> Result<Self> {
        if !(nu >= 0.0) {
            return Err(GviError::Invalid("nu must be nonnegative".into()));
        }
        self.nu = nu;
        Ok(self)
    }

    /// Smallest `<Tu, g(v) − g(u)> + μ‖g(v) − g(u)‖^p` over random feasible `v`.
    pub fn sampled_margin(&self, u: &DVector<f64>, samples: usize, seed: u64) -> Result<f64> {
        let b = &self.base;
        let t = b.op(u)?;
        let gu = b.g(u)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let v = b.project(&DVector::from_fn(b.dim, |_, _| rng.gen_range(-2.0..2.0)))?;
            let diff = b.g(&v)? - &gu;
            worst = worst.min(t.dot(&diff) + self.mu * diff.norm().powf(self.p));
        }
        Ok(worst)
    }

    /// `argmin_K ρ<a, v> + ½‖v − c‖² + (ν/p)‖v − c‖^p` by projected gradient.
    fn subproblem(&self, a: &DVector<f64>, c: &DVector<f64>, rho: f64, cfg: &SolveConfig) -> Option<DVector<f64>> {
        let b = &self.base;
        let mut v = b.project(&(c - a * rho)).ok()?;
        if self.nu == 0.0 {
            return Some(v);
        }
        let (nu, p) = (self.nu, self.p);
        let phi = |v: &DVector<f64>| {
            let r = (v - c).norm();
            rho * a.dot(v) + 0.5 * r * r + nu / p * r.powf(p)
        };
        let grad = |v: &DVector<f64>| {
            let diff = v - c;
            let r = diff.norm();
            let w = if r > 0.0 { 1.0 + nu * r.powf(p - 2.0) } else { 1.0 };
            a * rho + diff * w
        };
        let mut s = 1.0;
        for _ in 0..cfg.inner_max_iters {
            let gv = grad(&v);
            let fv = phi(&v);
            let next = loop {
                let cand = b.project(&(&v - &gv * s)).ok()?;
                let step = &cand - &v;
                if phi(&cand) <= fv + gv.dot(&step) + step.norm_squared() / (2.0 * s) + 1e-15 * fv.abs() {
                    break cand;
                }
                s *= 0.5;
                if s < 1e-14 {
                    return None;
                }
            };
            let moved = (&next - &v).norm();
            v = next;
            if moved <= cfg.inner_tol {
                return Some(v);
            }
            s = (s * 2.0).min(1.0);
        }
        None
    }
}

/// Two half-steps, each a regularized subproblem centered at its anchor:
/// `y = S(Tuₙ, uₙ)`, `uₙ₊₁ = S(Ty, y)`.
pub fn solve_higher_order(hp: &HigherOrderProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    let b = &hp.base;
    if !b.g_is_identity() {
        return Err(GviError::Capability("higher-order subproblem solver needs g = identity"));
    }
    drive(b, cfg, displacement(b), |u, k| {
        let fail = GviError::InnerDivergence { variant: "higher-order", outer: k };
        let y = hp.subproblem(&b.op(u)?, u, cfg.rho, cfg).ok_or(fail)?;
        let fail = GviError::InnerDivergence { variant: "higher-order", outer: k };
        Ok(Step::to(hp.subproblem(&b.op(&y)?, &y, cfg.rho, cfg).ok_or(fail)?))
    })
}

/// Implicit step `uₙ₊₁ = P_K[uₙ − ρTuₙ₊₁]`; the power term anchored at
/// `uₙ₊₁` has zero gradient there, so this is a proximal point step.
pub fn solve_higher_order_implicit(hp: &HigherOrderProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    let b = &hp.base;
    if !b.g_is_identity() {
        return Err(GviError::Capability("higher-order subproblem solver needs g = identity"));
    }
    drive(b, cfg, displacement(b), |u, k| {
        let oracle = |x: &DVector<f64>, c: &DVector<f64>, r: f64| b.project(&(c - b.op(x)? * r));
        let next = implicit_solve(oracle, u, cfg.rho, u.clone(), cfg)
            .ok_or(GviError::InnerDivergence { variant: "higher-order-implicit", outer: k })?;
        Ok(Step::to(next))
    })
}

/// Largest `‖uₙ₊₁ − u*‖² − ‖uₙ − u*‖² + ‖uₙ₊₁ − uₙ‖²` along a trace that
/// carries distances to a known solution.
pub fn fejer_defect(report: &SolveReport) -> Option<f64> {
    let mut worst = f64::NEG_INFINITY;
    for w in report.trace.windows(2) {
        worst = worst.max(w[1].lyapunov? - w[0].lyapunov? + w[1].step_sq);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxiliary::solve_three_step;
    use crate::problem::{operator, AlphaSchedule};
    use crate::sets::ConvexSet;
    use crate::solvers::{solve_projection, solve_two_step};
    use nalgebra::{dvector, DMatrix};

    fn affine(m: DMatrix<f64>) -> GviProblem {
        let n = m.nrows();
        GviProblem::new(n, operator(move |u| &m * u - DVector::from_element(n, 1.0)), ConvexSet::unit_box(n)).unwrap()
    }

    fn example3(n: usize) -> GviProblem {
        affine(DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 4.0,
            1 => -1.0,
            _ => 0.0,
        }))
    }

    fn example4(n: usize) -> GviProblem {
        affine(DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| (i + 1) as f64 / n as f64)))
    }

    fn zero(n: usize) -> GviProblem {
        GviProblem::new(n, operator(|u: &DVector<f64>| DVector::zeros(u.len())), ConvexSet::unit_box(n))
            .unwrap()
            .with_start(DVector::from_element(n, 0.3))
    }

    fn fixed(iters: usize, rho: f64) -> SolveConfig {
        SolveConfig { max_iters: iters, tol: 1e-30, rho, ..Default::default() }
    }

    #[test]
    fn predictor_corrector_matches_three_step() {
        let ep = EquilibriumProblem::from_gvi(example3(10));
        let cfg = SolveConfig { mu_step: 0.0, beta_step: 0.2, ..fixed(10, 0.2) };
        let a = solve_eq_predictor_corrector(&ep, &cfg).unwrap();
        let b = solve_three_step(&ep.base, &cfg).unwrap();
        assert!((a.solution - b.solution).amax() <= 1e-10);
    }

    #[test]
    fn predictor_corrector_reduces_to_two_step() {
        let p = example4(5);
        let ep = EquilibriumProblem::from_gvi(p.clone());
        let cfg = SolveConfig { beta_step: 0.5, ..fixed(10, 0.5) };
        let a = solve_eq_predictor_corrector(&ep, &cfg).unwrap();
        // predictor then corrector evaluated at the predictor
        let b = solve_two_step(&p, &SolveConfig { lambda: 1.0, xi: 1.0, ..cfg.clone() }).unwrap();
        assert!((a.solution - b.solution).amax() <= 1e-10);
    }

    #[test]
    fn strongly_monotone_bifunction() {
        let n = 4;
        let base = zero(n).with_start(DVector::zeros(n));
        let e = DVector::from_element(n, 1.0);
        let set = base.set.clone();
        let ee = e.clone();
        let f: Bifunction = Arc::new(move |u, y| (u - &ee).dot(&(y - u)));
        let oracle: AuxOracle = Arc::new(move |w, c, rho| set.project(&(c - (w - &e) * rho)));
        let ep = EquilibriumProblem::new(base, f, oracle);
        let rep = solve_eq_predictor_corrector(&ep, &SolveConfig { beta_step: 0.5, ..SolveConfig::default().with_rho(0.5) })
            .unwrap();
        assert!(rep.converged);
        assert!(rep.solution.add_scalar(-1.0).amax() <= 1e-6);
        assert!(ep.value(&rep.solution, &DVector::zeros(n)) <= 1e-6);
    }

    #[test]
    fn zero_bifunction_is_stationary() {
        let ep = EquilibriumProblem::from_gvi(zero(3));
        let cfg = SolveConfig { beta_step: 0.5, ..SolveConfig::default() };
        let rep = solve_eq_predictor_corrector(&ep, &cfg).unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.solution, ep.base.start);
        let rep = solve_eq_inertial(&ep, &SolveConfig { alpha_schedule: AlphaSchedule::Constant(0.0), ..cfg }).unwrap();
        assert!(rep.iterations <= 1);
        assert_eq!(rep.solution, ep.base.start);
    }

    #[test]
    fn oracle_contract_is_enforced() {
        let mut ep = EquilibriumProblem::from_gvi(example4(3));
        ep.oracle = Arc::new(|_, c, _| Ok(c.add_scalar(5.0)));
        let cfg = SolveConfig { beta_step: 0.5, ..SolveConfig::default() };
        assert!(matches!(solve_eq_predictor_corrector(&ep, &cfg), Err(GviError::OracleContract(0))));
    }

    #[test]
    fn inertial_and_proximal_agree() {
        let ep = EquilibriumProblem::from_gvi(example3(10));
        let prox_cfg = SolveConfig { alpha_schedule: AlphaSchedule::Constant(0.0), ..SolveConfig::default().with_rho(0.5) };
        let prox = solve_eq_inertial(&ep, &prox_cfg).unwrap();
        assert!(prox.converged);
        let cfg = SolveConfig { alpha_schedule: AlphaSchedule::Constant(0.3), ..SolveConfig::default().with_rho(0.5) };
        let inertial = solve_eq_inertial(&ep, &cfg).unwrap();
        assert!(inertial.converged);
        assert!((prox.solution - inertial.solution).amax() <= 1e-6);
        let bad = SolveConfig { alpha_schedule: AlphaSchedule::Constant(1.0), ..cfg };
        assert!(solve_eq_inertial(&ep, &bad).is_err());
    }

    #[test]
    fn varlike_identity_kernel_is_projection() {
        let p = example4(5);
        let vp = VarLikeProblem::diagonal(p.clone(), DVector::from_element(5, 1.0)).unwrap();
        let a = solve_varlike(&vp, &fixed(10, 0.5)).unwrap();
        let b = solve_projection(&p, &fixed(10, 0.5)).unwrap();
        assert!((a.solution - b.solution).amax() <= 1e-10);
    }

    #[test]
    fn varlike_weighted_kernel_agrees() {
        let p = example3(2);
        let vp = VarLikeProblem::diagonal(p.clone(), dvector![1.0, 2.0]).unwrap();
        let a = solve_varlike(&vp, &SolveConfig::default().with_rho(0.2)).unwrap();
        let b = solve_projection(&p, &SolveConfig::default().with_rho(0.2)).unwrap();
        assert!(a.converged);
        assert!((a.solution - b.solution).amax() <= 1e-5);
        let z = VarLikeProblem::diagonal(zero(2), dvector![1.0, 2.0]).unwrap();
        assert!(solve_varlike(&z, &SolveConfig::default()).unwrap().iterations <= 1);
    }

    #[test]
    fn varlike_rejects_bad_kernel() {
        let p = example4(2);
        let eta: BiMap = Arc::new(|a, _| a.clone());
        let oracle: AuxOracle = Arc::new(|_, c, _| Ok(c.clone()));
        assert!(VarLikeProblem::new(p.clone(), eta, Arc::new(|y| y.clone()), oracle).is_err());
        let simplex = p.clone();
        let simplex = GviProblem { set: ConvexSet::simplex(1.0).unwrap(), ..simplex };
        assert!(matches!(
            VarLikeProblem::diagonal(simplex, dvector![1.0, 1.0]),
            Err(GviError::UnsupportedSet(_))
        ));
    }

    #[test]
    fn higher_order_degenerates_to_two_step() {
        let hp = HigherOrderProblem::new(example4(5), 2.0, 0.0).unwrap();
        let cfg = SolveConfig { mu_step: 0.0, beta_step: 0.5, ..fixed(10, 0.5) };
        let a = solve_higher_order(&hp, &cfg).unwrap();
        let b = solve_three_step(&hp.base, &cfg).unwrap();
        assert!((a.solution - b.solution).amax() <= 1e-10);
    }

    #[test]
    fn higher_order_cubic_regularization() {
        let hp = HigherOrderProblem::new(example4(5), 3.0, 0.1).unwrap();
        let rep = solve_higher_order(&hp, &SolveConfig::default().with_rho(0.5)).unwrap();
        assert!(rep.converged);
        assert!(hp.sampled_margin(&rep.solution, 1000, 3).unwrap() >= -1e-8);
        let z = HigherOrderProblem::new(zero(3), 3.0, 0.1).unwrap();
        assert!(solve_higher_order(&z, &SolveConfig::default()).unwrap().iterations <= 1);
        assert!(HigherOrderProblem::new(example4(2), 1.0, 0.0).is_err());
    }

    #[test]
    fn implicit_steps_are_fejer() {
        let p = example3(10);
        let star = solve_projection(&p, &SolveConfig { tol: 1e-14, ..SolveConfig::default().with_rho(0.2) }).unwrap();
        let hp = HigherOrderProblem::new(p.with_solution(star.solution), 2.0, 0.0).unwrap();
        let rep = solve_higher_order_implicit(&hp, &SolveConfig { ..SolveConfig::default().with_rho(0.5) })
            .unwrap();
        assert!(rep.converged);
        assert!(fejer_defect(&rep).unwrap() <= 1e-8);
    }
}
