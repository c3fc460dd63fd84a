//! Sampling certificates for strongly and exponentially convex function
//! classes. A passing report means no violation was found on the samples.

use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GviError, Result};
use crate::problem::Operator;

pub type ScalarField = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type Gradient = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type Sampler = Arc<dyn Fn(&mut ChaCha8Rng) -> DVector<f64> + Send + Sync>;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const FD_STEP: f64 = 1e-6;

#[derive(Clone)]
pub struct FunctionUnderTest {
    pub f: ScalarField,
    pub grad: Option<Gradient>,
    /// Defaults to the identity.
    pub g: Option<Operator>,
    pub sampler: Sampler,
    pub p: f64,
    pub mu: f64,
    pub seed: u64,
    pub tolerance: f64,
}

impl std::fmt::Debug for FunctionUnderTest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionUnderTest")
            .field("p", &self.p)
            .field("mu", &self.mu)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl FunctionUnderTest {
    /// `F` sampled uniformly on `[lo, hi]^dim`, with `p = 2`, `μ = 0`.
    pub fn on_box<F>(dim: usize, lo: f64, hi: f64, f: F) -> Self
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            grad: None,
            g: None,
            sampler: Arc::new(move |rng| DVector::from_fn(dim, |_, _| rng.gen_range(lo..=hi))),
            p: 2.0,
            mu: 0.0,
            seed: 42,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    /// Scalar `F` on `[lo, hi]`.
    pub fn scalar<F>(lo: f64, hi: f64, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::on_box(1, lo, hi, move |x| f(x[0]))
    }

    pub fn with_grad<G>(mut self, grad: G) -> Self
    where
        G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_g(mut self, g: Operator) -> Self {
        self.g = Some(g);
        self
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn with_class(mut self, p: f64, mu: f64) -> Result<Self> {
        if !(p > 1.0) || !(mu >= 0.0) {
            return Err(GviError::Invalid("need p > 1 and mu >= 0".into()));
        }
        self.p = p;
        self.mu = mu;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `x ↦ −F(x)`, with the gradient negated as well.
    pub fn negated(&self) -> Self {
        let f = self.f.clone();
        let mut out = self.clone();
        out.f = Arc::new(move |x| -f(x));
        out.grad = self.grad.clone().map(|g| -> Gradient { Arc::new(move |x| -g(x)) });
        out
    }

    fn image(&self, u: &DVector<f64>) -> DVector<f64> {
        match &self.g {
            Some(g) => g(u),
            None => u.clone(),
        }
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        (self.f)(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        if let Some(g) = &self.grad {
            return g(x);
        }
        DVector::from_fn(x.len(), |i, _| {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += FD_STEP;
            b[i] -= FD_STEP;
            (self.value(&a) - self.value(&b)) / (2.0 * FD_STEP)
        })
    }
}

/// Inequalities that can be certified; each violation is `LHS − RHS` of the
/// `<=` form, so positive values are violations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inequality {
    /// `F(x_t) <= (1−t)F(x) + tF(y) − μ{tᵖ(1−t) + t(1−t)ᵖ}‖y − x‖ᵖ`
    HosConvex,
    /// Absolute defect of the same relation taken as an equality.
    HosAffine,
    /// `<F′(x), y − x> + μ‖y − x‖ᵖ <= F(y) − F(x)`
    GradientInequality,
    /// `2μ‖y − x‖ᵖ <= <F′(x) − F′(y), x − y>`
    Monotonicity,
    /// `e^{F(x_t)} <= (1−t)e^{F(x)} + te^{F(y)}`, minus `μt(1−t)‖y − x‖²` when strong.
    ExpConvex { strong: bool },
    /// `e^{F(x)}<F′(x), y − x> (+ μ‖y − x‖²) <= e^{F(y)} − e^{F(x)}`
    ExpGradient { strong: bool },
    /// `e^{F(x_t)} <= (e^{F(x)})^{1−t}(e^{F(y)})^t`, only where `F > 0`.
    ExpLogConvex,
    /// `e^{F(x_t)} <= max{e^{F(x)}, e^{F(y)}}`
    ExpQuasiConvex,
}

impl Inequality {
    fn uses_t(self) -> bool {
        !matches!(self, Self::GradientInequality | Self::Monotonicity | Self::ExpGradient { .. })
    }

    /// Violation at `(u, v, t)` in the original variables, or `None` when the
    /// inequality does not apply there.
    pub fn violation(self, fut: &FunctionUnderTest, u: &DVector<f64>, v: &DVector<f64>, t: f64) -> Option<f64> {
        let x = fut.image(u);
        let y = fut.image(v);
        let d = &y - &x;
        let dn = d.norm();
        let xt = &x + &d * t;
        let (fx, fy) = (fut.value(&x), fut.value(&y));
        let (p, mu) = (fut.p, fut.mu);
        let weight = t.powf(p) * (1.0 - t) + t * (1.0 - t).powf(p);
        Some(match self {
            Self::HosConvex => fut.value(&xt) - ((1.0 - t) * fx + t * fy - mu * weight * dn.powf(p)),
            Self::HosAffine => (fut.value(&xt) - ((1.0 - t) * fx + t * fy - mu * weight * dn.powf(p))).abs(),
            Self::GradientInequality => fut.gradient(&x).dot(&d) + mu * dn.powf(p) - (fy - fx),
            Self::Monotonicity => 2.0 * mu * dn.powf(p) - (fut.gradient(&x) - fut.gradient(&y)).dot(&(&x - &y)),
            Self::ExpConvex { strong } => {
                let m = if strong { mu * t * (1.0 - t) * dn * dn } else { 0.0 };
                fut.value(&xt).exp() - ((1.0 - t) * fx.exp() + t * fy.exp() - m)
            }
            Self::ExpGradient { strong } => {
                let m = if strong { mu * dn * dn } else { 0.0 };
                fx.exp() * fut.gradient(&x).dot(&d) + m - (fy.exp() - fx.exp())
            }
            Self::ExpLogConvex => {
                if !(fx > 0.0 && fy > 0.0 && fut.value(&xt) > 0.0) {
                    return None;
                }
                fut.value(&xt).exp() - ((1.0 - t) * fx + t * fy).exp()
            }
            Self::ExpQuasiConvex => fut.value(&xt).exp() - fx.exp().max(fy.exp()),
        })
    }

    fn exponential(self) -> bool {
        matches!(
            self,
            Self::ExpConvex { .. } | Self::ExpGradient { .. } | Self::ExpLogConvex | Self::ExpQuasiConvex
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertReport {
    pub inequality: Inequality,
    pub checked_count: usize,
    pub worst_violation: f64,
    pub witness: Option<Witness>,
    /// Absolute threshold after scaling by the largest sampled magnitude.
    pub threshold: f64,
    pub passed: bool,
}

impl CertReport {
    /// Recomputes the violation at the stored witness.
    pub fn recheck(&self, fut: &FunctionUnderTest) -> Option<f64> {
        let w = self.witness.as_ref()?;
        self.inequality.violation(fut, &w.u, &w.v, w.t.unwrap_or(0.0))
    }

    pub fn verdict(&self) -> &'static str {
        if self.passed {
            "no violation found"
        } else {
            "violated"
        }
    }
}

/// `{0, 0.1, …, 1}`; the midpoint is already included.
pub fn default_t_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

fn sample_pairs(fut: &FunctionUnderTest, samples: usize) -> Vec<(DVector<f64>, DVector<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(fut.seed);
    (0..samples).map(|_| ((fut.sampler)(&mut rng), (fut.sampler)(&mut rng))).collect()
}

/// Worst violation of `ineq` over sampled pairs and the `t` grid.
pub fn certify(fut: &FunctionUnderTest, ineq: Inequality, samples: usize, t_grid: &[f64]) -> CertReport {
    let pairs = sample_pairs(fut, samples);
    let ts: Vec<Option<f64>> = if ineq.uses_t() { t_grid.iter().map(|t| Some(*t)).collect() } else { vec![None] };
    let mut scale = 1.0f64;
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    let mut count = 0;
    for (u, v) in &pairs {
        for &t in &ts {
            let Some(viol) = ineq.violation(fut, u, v, t.unwrap_or(0.0)) else {
                continue;
            };
            count += 1;
            for z in [u, v] {
                let fz = fut.value(&fut.image(z));
                scale = scale.max(if ineq.exponential() { fz.exp() } else { fz.abs() });
            }
            if viol > worst || witness.is_none() {
                worst = viol;
                witness = Some(Witness { u: u.clone(), v: v.clone(), t });
            }
        }
    }
    let threshold = fut.tolerance * scale;
    CertReport {
        inequality: ineq,
        checked_count: count,
        worst_violation: if count == 0 { 0.0 } else { worst },
        witness,
        threshold,
        passed: count == 0 || worst <= threshold,
    }
}

pub fn check_hos_convex(fut: &FunctionUnderTest, samples: usize, t_grid: &[f64]) -> CertReport {
    certify(fut, Inequality::HosConvex, samples, t_grid)
}

/// The convexity relation read as an equality.
pub fn check_hos_affine(fut: &FunctionUnderTest, samples: usize, t_grid: &[f64]) -> CertReport {
    certify(fut, Inequality::HosAffine, samples, t_grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCharReport {
    pub gradient: CertReport,
    pub monotone: CertReport,
}

impl GradientCharReport {
    pub fn passed(&self) -> bool {
        self.gradient.passed && self.monotone.passed
    }
}

/// First-order characterization and monotonicity of the gradient.
pub fn check_gradient_char(fut: &FunctionUnderTest, samples: usize) -> GradientCharReport {
    GradientCharReport {
        gradient: certify(fut, Inequality::GradientInequality, samples, &[]),
        monotone: certify(fut, Inequality::Monotonicity, samples, &[]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpConvexReport {
    pub definition: CertReport,
    /// Present when an analytic gradient is supplied.
    pub gradient: Option<CertReport>,
}

impl ExpConvexReport {
    pub fn passed(&self) -> bool {
        self.definition.passed && self.gradient.as_ref().is_none_or(|g| g.passed)
    }
}

pub fn check_exp_convex(fut: &FunctionUnderTest, samples: usize, t_grid: &[f64], strong: bool) -> ExpConvexReport {
    ExpConvexReport {
        definition: certify(fut, Inequality::ExpConvex { strong }, samples, t_grid),
        gradient: fut
            .grad
            .as_ref()
            .map(|_| certify(fut, Inequality::ExpGradient { strong }, samples, &[])),
    }
}

/// `F` is exponentially concave when `−F` is exponentially convex.
pub fn check_exp_concave(fut: &FunctionUnderTest, samples: usize, t_grid: &[f64]) -> ExpConvexReport {
    check_exp_convex(&fut.negated(), samples, t_grid, false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyReport {
    pub log_convex: CertReport,
    pub convex: CertReport,
    pub quasi_convex: CertReport,
    /// Triples where a stronger leg held but a weaker one failed.
    pub counterexamples: Vec<Witness>,
}

impl HierarchyReport {
    pub fn consistent(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Checks log-convex ⟹ convex ⟹ quasi-convex for the exponential classes,
/// triple by triple.
pub fn check_hierarchy(fut: &FunctionUnderTest, samples: usize, t_grid: &[f64]) -> HierarchyReport {
    let legs = [Inequality::ExpLogConvex, Inequality::ExpConvex { strong: false }, Inequality::ExpQuasiConvex];
    let reports: Vec<CertReport> = legs.iter().map(|l| certify(fut, *l, samples, t_grid)).collect();
    let mut counterexamples = Vec::new();
    for (u, v) in sample_pairs(fut, samples) {
        for &t in t_grid {
            let holds: Vec<Option<bool>> = legs
                .iter()
                .zip(&reports)
                .map(|(l, r)| l.violation(fut, &u, &v, t).map(|x| x <= r.threshold))
                .collect();
            let broken = matches!((holds[0], holds[1]), (Some(true), Some(false)))
                || matches!((holds[1], holds[2]), (Some(true), Some(false)));
            if broken {
                counterexamples.push(Witness { u: u.clone(), v: v.clone(), t: Some(t) });
            }
        }
    }
    let mut it = reports.into_iter();
    HierarchyReport {
        log_convex: it.next().unwrap(),
        convex: it.next().unwrap(),
        quasi_convex: it.next().unwrap(),
        counterexamples,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelogramReport {
    pub p: f64,
    pub mu: f64,
    /// Largest `μ` with `‖u+v‖ᵖ + μ‖v−u‖ᵖ <= 2^{p−1}(‖u‖ᵖ + ‖v‖ᵖ)` on all samples.
    pub mu_lower: f64,
    /// Smallest `μ` with the reversed inequality on all samples.
    pub mu_upper: f64,
    /// Worst violation of the lower law at the requested `μ`.
    pub lower_violation: f64,
    pub lower_witness: Option<(DVector<f64>, DVector<f64>)>,
    /// Worst violation of the upper law at the requested `μ`.
    pub upper_violation: f64,
    /// `max |‖u+v‖² + ‖u−v‖² − 2(‖u‖² + ‖v‖²)|`, only for `p = 2`.
    pub equality_defect: Option<f64>,
}

impl ParallelogramReport {
    pub fn lower_holds(&self, tol: f64) -> bool {
        self.lower_violation <= tol
    }
}

/// Parallelogram laws for the `p`-th power of the Euclidean norm on `[−1, 1]^dim`.
pub fn check_parallelogram(p: f64, mu: f64, dim: usize, samples: usize, seed: u64) -> Result<ParallelogramReport> {
    if !(p > 1.0) || dim == 0 {
        return Err(GviError::Invalid("need p > 1 and dim >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ParallelogramReport {
        p,
        mu,
        mu_lower: f64::INFINITY,
        mu_upper: f64::NEG_INFINITY,
        lower_violation: f64::NEG_INFINITY,
        lower_witness: None,
        upper_violation: f64::NEG_INFINITY,
        equality_defect: (p == 2.0).then_some(0.0),
    };
    for _ in 0..samples {
        let u: DVector<f64> = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..=1.0));
        let v: DVector<f64> = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..=1.0));
        let sum = (&u + &v).norm().powf(p);
        let diff = (&v - &u).norm().powf(p);
        let bound = 2f64.powf(p - 1.0) * (u.norm().powf(p) + v.norm().powf(p));
        if diff > 0.0 {
            let ratio = (bound - sum) / diff;
            report.mu_lower = report.mu_lower.min(ratio);
            report.mu_upper = report.mu_upper.max(ratio);
        }
        let lower = sum + mu * diff - bound;
        if lower > report.lower_violation {
            report.lower_violation = lower;
            report.lower_witness = Some((u.clone(), v.clone()));
        }
        report.upper_violation = report.upper_violation.max(bound - sum - mu * diff);
        if let Some(defect) = report.equality_defect.as_mut() {
            let e = (&u + &v).norm_squared() + (&u - &v).norm_squared() - 2.0 * (u.norm_squared() + v.norm_squared());
            *defect = defect.max(e.abs());
        }
    }
    Ok(report)
}

/// Identifiers accepted by [`builtin`].
pub const BUILTINS: &[&str] = &[
    "quadratic",
    "linear",
    "quartic",
    "sine",
    "exp-square",
    "log-one-plus-square",
    "erf-sqrt",
    "shifted-quadratic",
    "sqrt-abs",
    "constant",
];

/// Built-in test functions with their natural sampling domains.
pub fn builtin(id: &str) -> Result<FunctionUnderTest> {
    Ok(match id {
        "quadratic" => FunctionUnderTest::on_box(3, -2.0, 2.0, |x| x.norm_squared()).with_grad(|x| x * 2.0),
        "linear" => FunctionUnderTest::scalar(-2.0, 2.0, |x| x).with_grad(|_| DVector::from_element(1, 1.0)),
        "quartic" => FunctionUnderTest::scalar(-1.0, 1.0, |x| x.powi(4)).with_grad(|x| x.map(|v| 4.0 * v.powi(3))),
        "sine" => FunctionUnderTest::scalar(0.0, std::f64::consts::PI, f64::sin).with_grad(|x| x.map(f64::cos)),
        "exp-square" => FunctionUnderTest::scalar(0.0, 2.0, |x| (x * x).exp())
            .with_g(crate::problem::operator(|u: &DVector<f64>| u.map(|v| v * v))),
        "log-one-plus-square" => FunctionUnderTest::scalar(-1.0, 1.0, |x| (1.0 + x * x).ln())
            .with_grad(|x| x.map(|v| 2.0 * v / (1.0 + v * v))),
        "erf-sqrt" => FunctionUnderTest::scalar(0.0, 4.0, |x| libm::erf(x.sqrt()))
            .with_sampler(Arc::new(|rng: &mut ChaCha8Rng| DVector::from_element(1, 4.0 - rng.gen_range(0.0..4.0)))),
        "shifted-quadratic" => FunctionUnderTest::scalar(-2.0, 2.0, |x| x * x + 1.0).with_grad(|x| x * 2.0),
        "sqrt-abs" => FunctionUnderTest::scalar(-2.0, 2.0, |x| x.abs().sqrt()),
        "constant" => FunctionUnderTest::scalar(-2.0, 2.0, |_| 3.0).with_grad(|_| DVector::zeros(1)),
        _ => return Err(GviError::Invalid(format!("unknown function {id:?}; known: {}", BUILTINS.join(", ")))),
    })
}
