//! Cubic-spline scheme for the third-order obstacle boundary value problem
//! written as the piecewise system
//! `u‴ = f` outside `(c, d]`, `u‴ = pu + f + r` inside,
//! with `u(a) = α`, `u′(a) = β₁`, `u′(b) = β₂`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::banded::BandMatrix;
use crate::error::{GviError, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct ObstacleProblem {
    pub a: f64,
    pub b: f64,
    pub f: ScalarFn,
    pub p: ScalarFn,
    pub r: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub psi: ScalarFn,
    pub c: f64,
    pub d: f64,
    /// Closed-form solution used for error measurement.
    pub exact: Option<ScalarFn>,
}

impl std::fmt::Debug for ObstacleProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObstacleProblem")
            .field("interval", &(self.a, self.b))
            .field("interfaces", &(self.c, self.d))
            .field("r", &self.r)
            .field("boundary", &(self.alpha, self.beta1, self.beta2))
            .finish_non_exhaustive()
    }
}

impl ObstacleProblem {
    /// Interfaces default to the quartiles of `[a, b]`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        b: f64,
        f: ScalarFn,
        p: ScalarFn,
        r: f64,
        (alpha, beta1, beta2): (f64, f64, f64),
        psi: ScalarFn,
    ) -> Result<Self> {
        if !(a < b) {
            return Err(GviError::Invalid("need a < b".into()));
        }
        Ok(Self {
            a,
            b,
            f,
            p,
            r,
            alpha,
            beta1,
            beta2,
            psi,
            c: (3.0 * a + b) / 4.0,
            d: (a + 3.0 * b) / 4.0,
            exact: None,
        })
    }

    pub fn with_interfaces(mut self, c: f64, d: f64) -> Result<Self> {
        if !(self.a < c && c < d && d < self.b) {
            return Err(GviError::Invalid("need a < c < d < b".into()));
        }
        self.c = c;
        self.d = d;
        Ok(self)
    }

    pub fn with_exact(mut self, u: ScalarFn) -> Self {
        self.exact = Some(u);
        self
    }

    /// Obstacle `ψ = −1` outside `[1/4, 3/4]` and `1` inside, `f = 0`, on `[0, 1]`
    /// with homogeneous boundary data; inside the contact zone `u‴ = u − 1`.
    pub fn reference_instance() -> Self {
        let sol = AnalyticSolution::new();
        Self::new(
            0.0,
            1.0,
            Arc::new(|_| 0.0),
            Arc::new(|_| 1.0),
            -1.0,
            (0.0, 0.0, 0.0),
            Arc::new(|x| if (0.25..=0.75).contains(&x) { 1.0 } else { -1.0 }),
        )
        .expect("valid interval")
        .with_exact(Arc::new(move |x| sol.value(x)))
    }

    /// All data zero and `ψ = −1`; the solution is `u ≡ 0`.
    pub fn homogeneous() -> Self {
        Self::new(
            0.0,
            1.0,
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
            0.0,
            (0.0, 0.0, 0.0),
            Arc::new(|_| -1.0),
        )
        .expect("valid interval")
        .with_exact(Arc::new(|_| 0.0))
    }

    fn h(&self, n: usize) -> f64 {
        (self.b - self.a) / (n + 1) as f64
    }

    fn x(&self, n: usize, i: usize) -> f64 {
        self.a + i as f64 * self.h(n)
    }

    /// `T_i = cᵢsᵢ + eᵢ`, split into the part multiplying `s_i` and the rest.
    fn t_parts(&self, n: usize, i: usize) -> (f64, f64) {
        let x = self.x(n, i);
        let slack = 1e-9 * self.h(n);
        let fi = (self.f)(x);
        if x > self.c + slack && x <= self.d + slack {
            ((self.p)(x), fi + self.r)
        } else {
            (0.0, fi)
        }
    }
}

/// Weight of `T_n` in the right boundary row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryVariant {
    /// Weight 31, as printed.
    Verbatim,
    /// Weight 3, matching the left boundary row.
    #[default]
    Corrected,
}

impl BoundaryVariant {
    pub fn weight(self) -> f64 {
        match self {
            Self::Verbatim => 31.0,
            Self::Corrected => 3.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Verbatim => "verbatim",
            Self::Corrected => "corrected",
        }
    }
}

impl std::str::FromStr for BoundaryVariant {
    type Err = GviError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "verbatim" => Ok(Self::Verbatim),
            "corrected" => Ok(Self::Corrected),
            _ => Err(GviError::Invalid(format!("unknown boundary variant {s:?}"))),
        }
    }
}

/// Banded linear system in the unknowns `s₁ … sₙ`.
#[derive(Debug, Clone)]
pub struct SplineSystem {
    pub n: usize,
    pub h: f64,
    pub matrix: BandMatrix,
    pub rhs: DVector<f64>,
    pub variant: BoundaryVariant,
}

pub fn check_grid(n: usize) -> Result<()> {
    if n < 3 || !(n + 1).is_multiple_of(4) {
        return Err(GviError::Grid(n));
    }
    Ok(())
}

/// Rows: left boundary `3s₀ − 4s₁ + s₂ = −2hD₀ + k[3T₀ + 4T₁ + T₂]`,
/// interior `−s_{i−2} + 3s_{i−1} − 3sᵢ + s_{i+1} = k[T_{i−2} + 5T_{i−1} + 5Tᵢ + T_{i+1}]`,
/// right boundary `−3s_{n−2} + 8s_{n−1} − 5sₙ = −2hD_{n+1} + k[3T_{n−2} + 10T_{n−1} + wTₙ]`,
/// with `k = h³/12`, `D₀ = β₁`, `D_{n+1} = β₂` and `s₀ = α`.
pub fn assemble(problem: &ObstacleProblem, n: usize, variant: BoundaryVariant) -> Result<SplineSystem> {
    check_grid(n)?;
    let h = problem.h(n);
    let k = h.powi(3) / 12.0;
    let mut matrix = BandMatrix::zeros(n, 2, 1);
    let mut rhs = DVector::zeros(n);
    let mut put = |row: usize, j: usize, coef: f64, weight: f64| -> Result<()> {
        let (cj, ej) = problem.t_parts(n, j);
        let on_s = coef - k * weight * cj;
        rhs[row] += k * weight * ej;
        if j == 0 {
            rhs[row] -= on_s * problem.alpha;
            Ok(())
        } else {
            matrix.add(row, j - 1, on_s)
        }
    };
    for (j, coef, weight) in [(0, 3.0, 3.0), (1, -4.0, 4.0), (2, 1.0, 1.0)] {
        put(0, j, coef, weight)?;
    }
    for i in 2..n {
        for (j, coef, weight) in [(i - 2, -1.0, 1.0), (i - 1, 3.0, 5.0), (i, -3.0, 5.0), (i + 1, 1.0, 1.0)] {
            put(i - 1, j, coef, weight)?;
        }
    }
    for (j, coef, weight) in [(n - 2, -3.0, 3.0), (n - 1, 8.0, 10.0), (n, -5.0, variant.weight())] {
        put(n - 1, j, coef, weight)?;
    }
    rhs[0] -= 2.0 * h * problem.beta1;
    rhs[n - 1] -= 2.0 * h * problem.beta2;
    Ok(SplineSystem { n, h, matrix, rhs, variant })
}

/// Grid solution with everything needed to rebuild the spline.
#[derive(Debug, Clone)]
pub struct SplineGrid {
    pub x: Vec<f64>,
    /// `s₀ … sₙ₊₁`; the last value comes from the central relation at `xₙ`.
    pub s: Vec<f64>,
    /// `T₀ … Tₙ₊₁`.
    pub t: Vec<f64>,
    /// Slopes `D₀ … Dₙ₊₁`.
    pub slope: Vec<f64>,
    pub h: f64,
    pub variant: BoundaryVariant,
}

/// Cubic piece `aᵢ(x − xᵢ)³ + bᵢ(x − xᵢ)² + cᵢ(x − xᵢ) + dᵢ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicPiece {
    pub x0: f64,
    pub coef: [f64; 4],
}

impl CubicPiece {
    /// Derivative of order `m` at `x`.
    pub fn eval(&self, x: f64, m: u32) -> f64 {
        let [a, b, c, d] = self.coef;
        let z = x - self.x0;
        match m {
            0 => ((a * z + b) * z + c) * z + d,
            1 => (3.0 * a * z + 2.0 * b) * z + c,
            2 => 6.0 * a * z + 2.0 * b,
            3 => 6.0 * a,
            _ => 0.0,
        }
    }
}

pub fn solve_grid(problem: &ObstacleProblem, n: usize, variant: BoundaryVariant) -> Result<SplineGrid> {
    let sys = assemble(problem, n, variant)?;
    let inner = sys.matrix.solve(&sys.rhs)?;
    let h = sys.h;
    let k = h.powi(3) / 12.0;
    let mut s = Vec::with_capacity(n + 2);
    s.push(problem.alpha);
    s.extend(inner.iter().copied());
    let t_at = |s: &[f64], i: usize| {
        let (c, e) = problem.t_parts(n, i);
        c * s[i] + e
    };
    let mut t: Vec<f64> = (0..=n).map(|i| t_at(&s, i)).collect();
    let mut slope = vec![problem.beta1];
    for i in 0..n {
        slope.push(-slope[i] + (2.0 * (s[i + 1] - s[i]) + k * (t[i] + t[i + 1])) / h);
    }
    // x_{n+1} = b lies outside the contact zone, so T_{n+1} = f(b)
    let t_end = (problem.f)(problem.b);
    s.push(2.0 * h * slope[n] + s[n - 1] + k * (t_end + 2.0 * t[n] + t[n - 1]));
    t.push(t_end);
    slope.push(-slope[n] + (2.0 * (s[n + 1] - s[n]) + k * (t[n + 1] + t[n])) / h);
    Ok(SplineGrid {
        x: (0..n + 2).map(|i| problem.x(n, i)).collect(),
        s,
        t,
        slope,
        h,
        variant,
    })
}

impl SplineGrid {
    pub fn n(&self) -> usize {
        self.s.len() - 2
    }

    /// Pieces on `[xᵢ, xᵢ₊₁]` for `i = 0 … n`.
    pub fn pieces(&self) -> Vec<CubicPiece> {
        let h = self.h;
        (0..=self.n())
            .map(|i| {
                let a = (self.t[i] + self.t[i + 1]) / 12.0;
                let c = self.slope[i];
                let b = (self.s[i + 1] - self.s[i] - c * h - a * h.powi(3)) / (h * h);
                CubicPiece { x0: self.x[i], coef: [a, b, c, self.s[i]] }
            })
            .collect()
    }

    /// Largest jump in value, slope or curvature across interior knots,
    /// scaled by `h^m` for the derivative of order `m`.
    pub fn smoothness_defect(&self) -> f64 {
        let pieces = self.pieces();
        let mut worst = 0.0f64;
        for w in pieces.windows(2) {
            let x = w[1].x0;
            for m in 0..3 {
                let jump = (w[0].eval(x, m) - w[1].eval(x, m)).abs() * self.h.powi(m as i32);
                worst = worst.max(jump);
            }
        }
        worst
    }

    /// `max(|s(a) − α|, |s′(a) − β₁|, |s′(b) − β₂|)` on the rebuilt spline.
    pub fn boundary_defect(&self, problem: &ObstacleProblem) -> f64 {
        let pieces = self.pieces();
        let first = pieces[0];
        let last = pieces[pieces.len() - 1];
        [
            (first.eval(problem.a, 0) - problem.alpha).abs(),
            (first.eval(problem.a, 1) - problem.beta1).abs(),
            (last.eval(problem.b, 1) - problem.beta2).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `max |sᵢ − u(xᵢ)|` over the unknown nodes `1 … n`.
pub fn max_error(problem: &ObstacleProblem, n: usize, variant: BoundaryVariant) -> Result<f64> {
    let exact = problem.exact.as_ref().ok_or(GviError::Capability("closed-form solution"))?;
    let grid = solve_grid(problem, n, variant)?;
    Ok((1..=n).map(|i| (grid.s[i] - exact(grid.x[i])).abs()).fold(0.0, f64::max))
}

/// Closed-form solution of the reference instance: a quadratic on `[0, 1/4]`,
/// `1 + a₂eˣ + e^{−x/2}(a₃cos(√3x/2) + a₄sin(√3x/2))` on `[1/4, 3/4]`
/// and `½a₅x(x − 2) + a₆` on `[3/4, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticSolution {
    pub coeffs: [f64; 6],
}

impl Default for AnalyticSolution {
    fn default() -> Self {
        Self::new()
    }
}

impl AnalyticSolution {
    /// Matching conditions for `u, u′, u″` at both interfaces.
    pub fn system() -> (DMatrix<f64>, DVector<f64>) {
        let r3 = 3f64.sqrt();
        let (s1, s2, s3, s4) = (0.25f64.exp(), (-0.125f64).exp(), 0.75f64.exp(), (-0.375f64).exp());
        let (cs1, sc1) = ((r3 / 8.0).cos(), (r3 / 8.0).sin());
        let (cs2, sc2) = ((3.0 * r3 / 8.0).cos(), (3.0 * r3 / 8.0).sin());
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(6, 6, &[
            1.0 / 32.0, -s1, -s2 * cs1, -s2 * sc1, 0.0, 0.0,
            0.25, -s1, 0.5 * s2 * (r3 * sc1 + cs1), -0.5 * s2 * (r3 * cs1 - sc1), 0.0, 0.0,
            1.0, -s1, -0.5 * s2 * (r3 * sc1 - cs1), 0.5 * s2 * (r3 * cs1 + sc1), 0.0, 0.0,
            0.0, s3, s4 * cs2, s4 * sc2, 15.0 / 32.0, -1.0,
            0.0, s3, -0.5 * s4 * (r3 * sc2 + cs2), 0.5 * s4 * (r3 * cs2 - sc2), 0.25, 0.0,
            0.0, s3, 0.5 * s4 * (r3 * sc2 - cs2), 0.5 * s4 * (-r3 * cs2 - sc2), -1.0, 0.0,
        ]);
        (m, DVector::from_vec(vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0]))
    }

    pub fn new() -> Self {
        let (m, rhs) = Self::system();
        let a = m.lu().solve(&rhs).expect("matching system is nonsingular");
        Self { coeffs: [a[0], a[1], a[2], a[3], a[4], a[5]] }
    }

    pub fn system_residual(&self) -> f64 {
        let (m, rhs) = Self::system();
        (m * DVector::from_row_slice(&self.coeffs) - rhs).amax()
    }

    /// Derivative of order `m <= 2` of piece `k ∈ {0, 1, 2}` at `x`.
    pub fn piece(&self, k: usize, x: f64, m: u32) -> f64 {
        let [a1, a2, a3, a4, a5, a6] = self.coeffs;
        let w = 3f64.sqrt() / 2.0;
        match k {
            0 => match m {
                0 => 0.5 * a1 * x * x,
                1 => a1 * x,
                _ => a1,
            },
            1 => {
                // e^{−x/2}(a₃cos wx + a₄sin wx) written as Re/Im of e^{λx}, λ = −½ + iw
                let e = (-0.5 * x).exp();
                let (c, s) = ((w * x).cos(), (w * x).sin());
                let (mut p, mut q) = (a3, a4);
                for _ in 0..m {
                    (p, q) = (-0.5 * p + w * q, -w * p - 0.5 * q);
                }
                let base = if m == 0 { 1.0 } else { 0.0 };
                base + a2 * x.exp() + e * (p * c + q * s)
            }
            _ => match m {
                0 => 0.5 * a5 * x * (x - 2.0) + a6,
                1 => a5 * (x - 1.0),
                _ => a5,
            },
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let k = if x <= 0.25 {
            0
        } else if x <= 0.75 {
            1
        } else {
            2
        };
        self.piece(k, x, 0)
    }
}

/// `∫(v″)² − 2∫fv′` by the trapezoid rule on a uniform grid over `[a, b]`
/// including both endpoints; end values reuse the nearest interior difference.
pub fn discrete_energy(problem: &ObstacleProblem, v: &[f64]) -> Result<f64> {
    let m = v.len();
    if m < 3 {
        return Err(GviError::Invalid("energy needs at least three grid values".into()));
    }
    let h = (problem.b - problem.a) / (m - 1) as f64;
    let d2 = |i: usize| {
        let i = i.clamp(1, m - 2);
        (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h)
    };
    let d1 = |i: usize| match i {
        0 => (v[1] - v[0]) / h,
        _ if i == m - 1 => (v[m - 1] - v[m - 2]) / h,
        _ => (v[i + 1] - v[i - 1]) / (2.0 * h),
    };
    let integrand = |i: usize| d2(i).powi(2) - 2.0 * (problem.f)(problem.a + i as f64 * h) * d1(i);
    let inner: f64 = (1..m - 1).map(integrand).sum();
    Ok(h * (inner + 0.5 * (integrand(0) + integrand(m - 1))))
}

/// `max |(−D³sᵢ − fᵢ)(sᵢ − ψᵢ)|` with the five-point third difference.
pub fn complementarity_check(problem: &ObstacleProblem, s: &[f64]) -> f64 {
    let m = s.len();
    if m < 5 {
        return 0.0;
    }
    let h = (problem.b - problem.a) / (m - 1) as f64;
    (2..m - 2)
        .map(|i| {
            let x = problem.a + i as f64 * h;
            let d3 = (s[i + 2] - 2.0 * s[i + 1] + 2.0 * s[i - 1] - s[i - 2]) / (2.0 * h.powi(3));
            ((-d3 - (problem.f)(x)) * (s[i] - (problem.psi)(x))).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_divisibility() {
        assert!(matches!(assemble(&ObstacleProblem::homogeneous(), 14, BoundaryVariant::Corrected), Err(GviError::Grid(14))));
        assert!(assemble(&ObstacleProblem::homogeneous(), 15, BoundaryVariant::Corrected).is_ok());
    }

    #[test]
    fn interior_stencil() {
        // with p = 0 the matrix carries only the difference stencil
        let p = ObstacleProblem { p: Arc::new(|_| 0.0), ..ObstacleProblem::reference_instance() };
        let sys = assemble(&p, 15, BoundaryVariant::Corrected).unwrap();
        let row = 5;
        let got: Vec<f64> = (row - 2..=row + 1).map(|j| sys.matrix.get(row, j)).collect();
        assert_eq!(got, vec![-1.0, 3.0, -3.0, 1.0]);
        let k = sys.h.powi(3) / 12.0;
        // row 5 couples T_4 … T_7; T_4 sits on the interface x = 1/4 and stays outside
        assert!((sys.rhs[row] - -11.0 * k).abs() <= 1e-18);
    }

    #[test]
    fn contact_rows_fold_p_into_matrix() {
        let p = ObstacleProblem::reference_instance();
        let sys = assemble(&p, 15, BoundaryVariant::Corrected).unwrap();
        let k = sys.h.powi(3) / 12.0;
        // unknown i = 6 sits inside (4, 12]; row i − 1 = 5 has weight 5 on T_6
        assert!((sys.matrix.get(5, 5) - (-3.0 - 5.0 * k)).abs() <= 1e-15);
        // unknown i = 2 is outside, so row 1 keeps the bare coefficient
        assert_eq!(sys.matrix.get(1, 1), -3.0);
    }

    #[test]
    fn homogeneous_solution_is_zero() {
        let p = ObstacleProblem::homogeneous();
        let sys = assemble(&p, 15, BoundaryVariant::Verbatim).unwrap();
        assert_eq!(sys.rhs.amax(), 0.0);
        let grid = solve_grid(&p, 15, BoundaryVariant::Verbatim).unwrap();
        assert!(grid.s.iter().all(|v| *v == 0.0));
        assert_eq!(max_error(&p, 15, BoundaryVariant::Corrected).unwrap(), 0.0);
        assert!(complementarity_check(&p, &grid.s) <= 1e-8);
    }

    #[test]
    fn analytic_solution_properties() {
        let u = AnalyticSolution::new();
        assert!(u.system_residual() <= 1e-10);
        assert_eq!(u.value(0.0), 0.0);
        let e = 1e-6;
        assert!(((u.value(e) - u.value(-e)) / (2.0 * e)).abs() <= 1e-8);
        assert!(((u.value(1.0 + e) - u.value(1.0 - e)) / (2.0 * e)).abs() <= 1e-8);
        for (x, l, r) in [(0.25, 0, 1), (0.75, 1, 2)] {
            for m in 0..3 {
                assert!((u.piece(l, x, m) - u.piece(r, x, m)).abs() <= 1e-10, "x={x} m={m}");
            }
        }
        // the middle piece solves u‴ = u − 1
        for x in [0.3, 0.5, 0.7] {
            let d = 1e-3;
            let third = (u.value(x + 2.0 * d) - 2.0 * u.value(x + d) + 2.0 * u.value(x - d) - u.value(x - 2.0 * d))
                / (2.0 * d * d * d);
            assert!((third - (u.value(x) - 1.0)).abs() <= 1e-5);
        }
    }

    #[test]
    fn error_decreases_with_grid() {
        let p = ObstacleProblem::reference_instance();
        let errs: Vec<f64> = [15, 31, 63, 127].iter().map(|&n| max_error(&p, n, BoundaryVariant::Corrected).unwrap()).collect();
        assert!((errs[0] / 1.23e-3 - 1.0).abs() <= 0.05, "{errs:?}");
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.8..=4.5).contains(&ratio), "{errs:?}");
        }
    }

    #[test]
    fn spline_is_smooth_and_meets_boundary_data() {
        let p = ObstacleProblem::reference_instance();
        for n in [15, 63] {
            for variant in [BoundaryVariant::Verbatim, BoundaryVariant::Corrected] {
                let grid = solve_grid(&p, n, variant).unwrap();
                assert!(grid.smoothness_defect() <= 1e-8);
                assert!(grid.boundary_defect(&p) <= 1e-8);
            }
        }
    }

    #[test]
    fn energy_examples() {
        let p = ObstacleProblem::homogeneous();
        assert_eq!(discrete_energy(&p, &[0.0; 10]).unwrap(), 0.0);
        let v: Vec<f64> = (0..=64).map(|i| (i as f64 / 64.0).powi(2)).collect();
        assert!((discrete_energy(&p, &v).unwrap() - 4.0).abs() <= 1e-2);
        assert!(discrete_energy(&p, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn boundary_variants() {
        assert_eq!("verbatim".parse::<BoundaryVariant>().unwrap(), BoundaryVariant::Verbatim);
        assert!("other".parse::<BoundaryVariant>().is_err());
        let p = ObstacleProblem::homogeneous();
        assert!(p.clone().with_interfaces(0.5, 0.4).is_err());
        assert!(p.with_interfaces(0.2, 0.8).is_ok());
    }
}
