//! Problem model, residual maps and the shared iteration driver.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GviError, Result};
use crate::sets::ConvexSet;

pub type Operator = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

pub fn operator<F>(f: F) -> Operator
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
{
    Arc::new(f)
}

const DIVERGENCE_NORM: f64 = 1e12;
const G_INVERSE_TOL: f64 = 1e-10;

/// Find `u` with `g(u) ∈ K` and `<T(u) − A(u), g(v) − g(u)> >= 0` for all `g(v) ∈ K`.
#[derive(Clone)]
pub struct GviProblem {
    pub dim: usize,
    pub t: Operator,
    /// `None` means the identity.
    pub g: Option<Operator>,
    pub g_inverse: Option<Operator>,
    pub a: Option<Operator>,
    pub set: ConvexSet,
    pub known_solution: Option<DVector<f64>>,
    pub start: DVector<f64>,
}

impl fmt::Debug for GviProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GviProblem")
            .field("dim", &self.dim)
            .field("g_identity", &self.g.is_none())
            .field("has_g_inverse", &self.g_inverse.is_some())
            .field("has_a", &self.a.is_some())
            .field("set", &self.set)
            .finish()
    }
}

impl GviProblem {
    pub fn new(dim: usize, t: Operator, set: ConvexSet) -> Result<Self> {
        if dim == 0 {
            return Err(GviError::Invalid("dimension must be at least 1".into()));
        }
        Ok(GviProblem {
            dim,
            t,
            g: None,
            g_inverse: None,
            a: None,
            set,
            known_solution: None,
            start: DVector::zeros(dim),
        })
    }

    pub fn with_g(mut self, g: Operator) -> Self {
        self.g = Some(g);
        self
    }

    /// Attaches `g⁻¹` after checking `g⁻¹(g(u)) = u` on a few probe points.
    pub fn with_g_inverse(mut self, g_inverse: Operator) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e37);
        for _ in 0..8 {
            let u = DVector::from_fn(self.dim, |_, _| rng.gen_range(-1.0..1.0));
            let back = g_inverse(&self.g(&u)?);
            if (&back - &u).norm() > G_INVERSE_TOL * (1.0 + u.norm()) {
                return Err(GviError::Invalid("g_inverse does not invert g on probe points".into()));
            }
        }
        self.g_inverse = Some(g_inverse);
        Ok(self)
    }

    pub fn with_a(mut self, a: Operator) -> Self {
        self.a = Some(a);
        self
    }

    pub fn with_solution(mut self, u: DVector<f64>) -> Self {
        self.known_solution = Some(u);
        self
    }

    pub fn with_start(mut self, u: DVector<f64>) -> Self {
        self.start = u;
        self
    }

    pub fn g_is_identity(&self) -> bool {
        self.g.is_none()
    }

    pub fn t(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        finite("T", (self.t)(u))
    }

    pub fn g(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.g {
            None => Ok(u.clone()),
            Some(g) => finite("g", g(u)),
        }
    }

    /// `T(u) − A(u)`, the operator every solver actually steps with.
    pub fn op(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let tu = self.t(u)?;
        match &self.a {
            None => Ok(tu),
            Some(a) => Ok(tu - finite("A", a(u))?),
        }
    }

    pub fn project(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.set.project(z)
    }

    /// Maps a point `w` of g-space back to iterate space by `u − g(u) + w`.
    pub fn recover(&self, u: &DVector<f64>, w: DVector<f64>) -> Result<DVector<f64>> {
        if self.g.is_none() {
            return Ok(w);
        }
        Ok(u - self.g(u)? + w)
    }

    /// Like [`recover`](Self::recover) but uses `g⁻¹` when it is available.
    pub fn recover_exact(&self, u: &DVector<f64>, w: DVector<f64>) -> Result<DVector<f64>> {
        match &self.g_inverse {
            Some(inv) if self.g.is_some() => finite("g_inverse", inv(&w)),
            _ => self.recover(u, w),
        }
    }

    /// `R(u) = g(u) − P_K[g(u) − ρ(T(u) − A(u))]`.
    pub fn residual(&self, u: &DVector<f64>, rho: f64) -> Result<DVector<f64>> {
        let gu = self.g(u)?;
        let p = self.project(&(&gu - self.op(u)? * rho))?;
        Ok(gu - p)
    }

    pub fn is_solution(&self, u: &DVector<f64>, rho: f64, tol: f64) -> Result<bool> {
        Ok(self.residual(u, rho)?.norm() <= tol)
    }

    pub fn complementarity_gap(&self, u: &DVector<f64>) -> Result<ComplementarityGap> {
        if !self.set.is_cone() {
            return Err(GviError::UnsupportedSet("complementarity needs the nonnegative orthant"));
        }
        let gu = self.g(u)?;
        let tu = self.op(u)?;
        let neg = |v: &DVector<f64>| v.iter().fold(0.0f64, |m, &x| m.max(-x.min(0.0)));
        Ok(ComplementarityGap {
            primal_violation: neg(&gu),
            dual_violation: neg(&tu),
            pairing: tu.dot(&gu),
        })
    }

    /// `ρT(g⁻¹(P_K z)) + z − P_K z`.
    pub fn wiener_hopf_residual(&self, z: &DVector<f64>, rho: f64) -> Result<DVector<f64>> {
        let pz = self.project(z)?;
        let u = match (&self.g, &self.g_inverse) {
            (None, _) => pz.clone(),
            (Some(_), Some(inv)) => finite("g_inverse", inv(&pz))?,
            (Some(_), None) => return Err(GviError::Capability("g_inverse")),
        };
        Ok(self.op(&u)? * rho + z - pz)
    }

    /// Largest difference quotient of `T − A` over random feasible base points.
    pub fn estimate_lipschitz(&self, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = 0.0f64;
        for _ in 0..samples {
            let z = DVector::from_fn(self.dim, |_, _| rng.gen_range(-1.0..1.0));
            let u = self.project(&z)?;
            let dir = DVector::from_fn(self.dim, |_, _| rng.gen_range(-1.0..1.0));
            let dir = if dir.norm() > 0.0 { dir.normalize() } else { DVector::from_element(self.dim, 1.0) };
            let step = 1e-4;
            let v = &u + &dir * step;
            let q = (self.op(&v)? - self.op(&u)?).norm() / step;
            best = best.max(q);
        }
        Ok(best)
    }

    /// `0.5 / L` with `L` from twenty random difference quotients.
    pub fn default_rho(&self) -> Result<f64> {
        let l = self.estimate_lipschitz(20, 7)?;
        Ok(if l > 0.0 { 0.5 / l } else { 1.0 })
    }
}

fn finite(component: &'static str, v: DVector<f64>) -> Result<DVector<f64>> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(GviError::NumericDomain { component, index }),
        None => Ok(v),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementarityGap {
    pub primal_violation: f64,
    pub dual_violation: f64,
    pub pairing: f64,
}

/// Quasi-variational inequality with `K(u) = m(u) + K`, posed through `g(u) = u − m(u)`.
pub fn quasi_to_general(dim: usize, m: Operator, set: ConvexSet, t: Operator) -> Result<GviProblem> {
    let g = operator(move |u| u - m(u));
    Ok(GviProblem::new(dim, t, set)?.with_g(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    Euclidean,
    Max,
}

impl Norm {
    pub fn of(self, v: &DVector<f64>) -> f64 {
        match self {
            Norm::Euclidean => v.norm(),
            Norm::Max => v.amax(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicalVariant {
    /// `g(u⁺) = P_K[g(uₙ) − hρ/(1+h)·T(u⁺)]`
    ForwardT,
    /// `g(u⁺) = P_K[g(uₙ) − hρ·T(u⁺)]`
    FullImplicit,
    /// `g(u⁺) = P_K[g(uₙ) − hρ/(1+h)·T(uₙ)]`
    ExplicitT,
}

impl DynamicalVariant {
    pub fn name(self) -> &'static str {
        match self {
            DynamicalVariant::ForwardT => "forward-t",
            DynamicalVariant::FullImplicit => "full-implicit",
            DynamicalVariant::ExplicitT => "explicit-t",
        }
    }
}

/// Weights of the two-step family: `λ` blends g-values, `ξ` blends the
/// point where `T` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStepScheme {
    pub lambda: f64,
    pub xi: f64,
}

impl TwoStepScheme {
    pub const PROJECTION: TwoStepScheme = TwoStepScheme { lambda: 0.0, xi: 0.0 };
    pub const TRAPEZOID: TwoStepScheme = TwoStepScheme { lambda: 0.5, xi: 1.0 };
    pub const MIDPOINT: TwoStepScheme = TwoStepScheme { lambda: 0.0, xi: 0.5 };
    pub const HALF_HALF: TwoStepScheme = TwoStepScheme { lambda: 0.5, xi: 0.5 };
}

/// Denominator of the basic double-projection step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepDenominator {
    /// `‖d‖²`, projection of `u` onto the separating hyperplane.
    Squared,
    /// `‖d‖`, as literally printed.
    Plain,
}

#[derive(Clone)]
pub enum AlphaSchedule {
    Constant(f64),
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl AlphaSchedule {
    pub fn at(&self, n: usize) -> f64 {
        match self {
            AlphaSchedule::Constant(a) => *a,
            AlphaSchedule::Custom(f) => f(n),
        }
    }
}

impl fmt::Debug for AlphaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSchedule::Constant(a) => write!(f, "Constant({a})"),
            AlphaSchedule::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub rho: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub lambda: f64,
    pub xi: f64,
    pub h: f64,
    pub variant: DynamicalVariant,
    pub mu_step: f64,
    pub beta_step: f64,
    pub sigma: f64,
    pub gamma: f64,
    /// Sufficient-decrease constant of the gap descent rule.
    pub alpha: f64,
    /// Backtracking ratio of the gap descent rule.
    pub beta: f64,
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    pub alpha_schedule: AlphaSchedule,
    pub nu: f64,
    pub p: f64,
    pub norm: Norm,
    pub denominator: StepDenominator,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            rho: 1.0,
            tol: 1e-7,
            max_iters: 1000,
            lambda: 0.5,
            xi: 0.5,
            h: 1.0,
            variant: DynamicalVariant::ForwardT,
            mu_step: 0.0,
            beta_step: 0.0,
            sigma: 0.5,
            gamma: 0.8,
            alpha: 0.1,
            beta: 0.5,
            inner_tol: 1e-10,
            inner_max_iters: 10_000,
            alpha_schedule: AlphaSchedule::Constant(1.0),
            nu: 0.0,
            p: 2.0,
            norm: Norm::Euclidean,
            denominator: StepDenominator::Squared,
        }
    }
}

impl SolveConfig {
    /// Defaults with `ρ` set from the problem's estimated Lipschitz constant.
    pub fn for_problem(problem: &GviProblem) -> Result<Self> {
        Ok(SolveConfig {
            rho: problem.default_rho()?,
            ..Default::default()
        })
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_scheme(mut self, s: TwoStepScheme) -> Self {
        self.lambda = s.lambda;
        self.xi = s.xi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(GviError::Invalid(m.to_string()));
        if !(self.rho > 0.0) {
            return bad("rho must be positive");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad("sigma must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.lambda) || !(0.0..=1.0).contains(&self.xi) {
            return bad("lambda and xi must lie in [0, 1]");
        }
        if !(self.h > 0.0) {
            return bad("h must be positive");
        }
        if self.mu_step < 0.0 || self.beta_step < 0.0 {
            return bad("step weights must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iterate_norm: f64,
    pub residual_norm: f64,
    /// `‖g(u*) − g(uₙ)‖²` when the problem carries a known solution.
    pub lyapunov: Option<f64>,
    /// `‖g(uₙ) − g(uₙ₋₁)‖²`, zero for the first record.
    pub step_sq: f64,
    pub event: Option<&'static str>,
    /// Merit value for descent methods.
    pub merit: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: DVector<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
    pub trace: Vec<TraceRecord>,
}

pub(crate) struct Step {
    pub next: DVector<f64>,
    pub event: Option<&'static str>,
    pub merit: Option<f64>,
}

impl Step {
    pub fn to(next: DVector<f64>) -> Self {
        Step { next, event: None, merit: None }
    }
}

/// Runs `step` until `measure(uₙ, uₙ₋₁) <= tol` or the iteration cap.
/// The stopping test happens before each step, so the trace holds
/// `iterations + 1` records.
pub(crate) fn drive<M, S>(problem: &GviProblem, cfg: &SolveConfig, mut measure: M, mut step: S) -> Result<SolveReport>
where
    M: FnMut(&DVector<f64>, Option<&DVector<f64>>) -> Result<f64>,
    S: FnMut(&DVector<f64>, usize) -> Result<Step>,
{
    cfg.validate()?;
    let target = match &problem.known_solution {
        Some(s) => Some(problem.g(s)?),
        None => None,
    };
    let mut u = problem.start.clone();
    let mut prev: Option<(DVector<f64>, DVector<f64>)> = None;
    let mut trace = Vec::new();
    let mut event = None;
    let mut merit = None;
    for k in 0..=cfg.max_iters {
        let norm = u.norm();
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            return Err(GviError::Divergence { iterations: k, last: u });
        }
        let r = measure(&u, prev.as_ref().map(|p| &p.0))?;
        let gu = problem.g(&u)?;
        trace.push(TraceRecord {
            iterate_norm: norm,
            residual_norm: r,
            lyapunov: target.as_ref().map(|t| (t - &gu).norm_squared()),
            step_sq: prev.as_ref().map_or(0.0, |p| (&gu - &p.1).norm_squared()),
            event: event.take(),
            merit: merit.take(),
        });
        if r <= cfg.tol || k == cfg.max_iters {
            return Ok(SolveReport {
                solution: u,
                iterations: k,
                residual_norm: r,
                converged: r <= cfg.tol,
                trace,
            });
        }
        let s = step(&u, k)?;
        event = s.event;
        merit = s.merit;
        prev = Some((std::mem::replace(&mut u, s.next), gu));
    }
    unreachable!("loop returns at max_iters")
}

/// Residual-norm stopping measure shared by the projection families.
pub(crate) fn residual_measure<'a>(
    problem: &'a GviProblem,
    rho: f64,
    norm: Norm,
) -> impl FnMut(&DVector<f64>, Option<&DVector<f64>>) -> Result<f64> + 'a {
    move |u, _| Ok(norm.of(&problem.residual(u, rho)?))
}

/// Solves `x = oracle(x, c, ρ)` by the relaxation
/// `x ← oracle(x, (1−τ)x + τc, τρ)`, which has the same fixed points and
/// reduces to projected gradient steps on `x − c + ρT` for projection
/// oracles. `τ` halves whenever the fixed-point gap fails to shrink.
pub(crate) fn implicit_solve<F>(
    oracle: F,
    center: &DVector<f64>,
    rho: f64,
    start: DVector<f64>,
    cfg: &SolveConfig,
) -> Option<DVector<f64>>
where
    F: Fn(&DVector<f64>, &DVector<f64>, f64) -> Result<DVector<f64>>,
{
    let mut x = start;
    let mut tau = 1.0;
    let mut gap = f64::INFINITY;
    for _ in 0..cfg.inner_max_iters {
        let c = &x * (1.0 - tau) + center * tau;
        let next = oracle(&x, &c, tau * rho).ok()?;
        let g = (&next - &x).norm();
        if !g.is_finite() {
            return None;
        }
        if g <= cfg.inner_tol {
            // one undamped evaluation so the result is an exact oracle image
            return oracle(&next, center, rho).ok();
        }
        if g >= gap {
            tau *= 0.5;
            if tau < 1e-12 {
                return None;
            }
        }
        gap = g;
        x = next;
    }
    None
}
