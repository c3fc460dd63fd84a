//! Benchmark problems, algorithm registry, suite runner and table output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::auxiliary::{solve_gap_descent, solve_three_step};
use crate::error::{GviError, Result};
use crate::obstacle::{check_grid, max_error, BoundaryVariant, ObstacleProblem};
use crate::problem::{operator, DynamicalVariant, GviProblem, SolveConfig, SolveReport, TwoStepScheme};
use crate::sets::ConvexSet;
use crate::solvers::{solve_dynamical, solve_extragradient, solve_projection, solve_two_step};
use crate::wiener_hopf::{solve_double_projection_basic, solve_double_projection_optimal, solve_whe};

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Example2,
    Example3(usize),
    Example4(usize),
    Obstacle(usize),
    /// Affine problem `Tu = Mu + q` read from a flat file.
    Custom(PathBuf),
}

impl ProblemSpec {
    /// `id` is one of `example2`, `example3`, `example4`, `obstacle` or
    /// `custom:<path>`; `n` is required for the sized families.
    pub fn parse(id: &str, n: Option<usize>) -> Result<Self> {
        let need = |n: Option<usize>| n.filter(|&n| n >= 1).ok_or_else(|| GviError::Invalid(format!("{id} needs n >= 1")));
        let spec = match id {
            "example2" => Self::Example2,
            "example3" => Self::Example3(need(n)?),
            "example4" => Self::Example4(need(n)?),
            "obstacle" => Self::Obstacle(need(n)?),
            _ => match id.strip_prefix("custom:") {
                Some(path) => Self::Custom(PathBuf::from(path)),
                None => return Err(GviError::Invalid(format!("unknown problem {id:?}"))),
            },
        };
        if let Self::Obstacle(n) = spec {
            check_grid(n)?;
        }
        Ok(spec)
    }

    pub fn name(&self) -> String {
        match self {
            Self::Example2 => "example2".into(),
            Self::Example3(_) => "example3".into(),
            Self::Example4(_) => "example4".into(),
            Self::Obstacle(_) => "obstacle".into(),
            Self::Custom(p) => format!("custom:{}", p.display()),
        }
    }

    pub fn n(&self) -> Option<usize> {
        match self {
            Self::Example2 => Some(4),
            Self::Example3(n) | Self::Example4(n) | Self::Obstacle(n) => Some(*n),
            Self::Custom(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum BuiltProblem {
    Gvi(GviProblem),
    Obstacle { problem: ObstacleProblem, n: usize },
}

impl BuiltProblem {
    pub fn gvi(self) -> Result<GviProblem> {
        match self {
            Self::Gvi(p) => Ok(p),
            Self::Obstacle { .. } => Err(GviError::Invalid("obstacle instances are not variational inequalities here".into())),
        }
    }
}

fn affine(m: DMatrix<f64>, q: DVector<f64>, set: ConvexSet) -> Result<GviProblem> {
    let n = m.nrows();
    GviProblem::new(n, operator(move |u| &m * u + &q), set)
}

pub fn example3(n: usize) -> Result<GviProblem> {
    let m = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 4.0,
        1 => -1.0,
        _ => 0.0,
    });
    affine(m, DVector::from_element(n, -1.0), ConvexSet::unit_box(n))
}

pub fn example4(n: usize) -> Result<GviProblem> {
    let m = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| (i + 1) as f64 / n as f64));
    Ok(affine(m, DVector::from_element(n, -1.0), ConvexSet::unit_box(n))?.with_solution(DVector::from_element(n, 1.0)))
}

/// Four-dimensional nonlinear problem on the unit simplex with solution
/// `(1, 0, 0, 0)`, started from the barycenter.
pub fn example2() -> Result<GviProblem> {
    let t = operator(|x: &DVector<f64>| {
        DVector::from_vec(vec![
            -x[1] + x[2] + x[3],
            x[0] - (4.5 * x[2] + 2.7 * x[3]) / (x[1] + 1.0),
            5.0 - x[0] - (0.5 * x[2] + 0.3 * x[3]) / (x[2] + 1.0),
            3.0 - x[0],
        ])
    });
    Ok(GviProblem::new(4, t, ConvexSet::simplex(1.0)?)?
        .with_start(DVector::from_element(4, 0.25))
        .with_solution(DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0])))
}

/// Custom affine problems: lines `m: <row>` (one per row), `q: <values>`
/// and `set: unit-box | orthant | simplex | whole`.
pub fn parse_custom(text: &str) -> Result<GviProblem> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut q = None;
    let mut set = "unit-box".to_string();
    let nums = |s: &str| -> Result<Vec<f64>> {
        s.split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|e| GviError::Invalid(format!("bad number {v:?}: {e}"))))
            .collect()
    };
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (key, value) = line.split_once(':').ok_or_else(|| GviError::Invalid(format!("expected key: value, got {line:?}")))?;
        match key.trim() {
            "m" => rows.push(nums(value)?),
            "q" => q = Some(nums(value)?),
            "set" => set = value.trim().to_string(),
            other => return Err(GviError::Invalid(format!("unknown key {other:?}"))),
        }
    }
    let n = rows.len();
    let q = q.ok_or_else(|| GviError::Invalid("missing q".into()))?;
    if n == 0 || q.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(GviError::Invalid("m must be square and match q".into()));
    }
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let set = match set.as_str() {
        "unit-box" => ConvexSet::unit_box(n),
        "orthant" => ConvexSet::NonnegOrthant,
        "simplex" => ConvexSet::simplex(1.0)?,
        "whole" => ConvexSet::WholeSpace,
        other => return Err(GviError::Invalid(format!("unknown set {other:?}"))),
    };
    let start = set.project(&DVector::zeros(n))?;
    Ok(affine(m, DVector::from_vec(q), set)?.with_start(start))
}

pub fn build_problem(spec: &ProblemSpec) -> Result<BuiltProblem> {
    Ok(match spec {
        ProblemSpec::Example2 => BuiltProblem::Gvi(example2()?),
        ProblemSpec::Example3(n) => BuiltProblem::Gvi(example3(*n)?),
        ProblemSpec::Example4(n) => BuiltProblem::Gvi(example4(*n)?),
        ProblemSpec::Obstacle(n) => {
            check_grid(*n)?;
            BuiltProblem::Obstacle { problem: ObstacleProblem::reference_instance(), n: *n }
        }
        ProblemSpec::Custom(path) => BuiltProblem::Gvi(parse_custom(&std::fs::read_to_string(path)?)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Projection,
    Extragradient,
    TwoStep,
    Whe,
    DpBasic,
    DpOptimal,
    ThreeStep,
    GapDescent,
    Dynamical,
    DynamicalImplicit,
    DynamicalExplicit,
}

impl Algorithm {
    pub const ALL: [Algorithm; 11] = [
        Self::Projection,
        Self::Extragradient,
        Self::TwoStep,
        Self::Whe,
        Self::DpBasic,
        Self::DpOptimal,
        Self::ThreeStep,
        Self::GapDescent,
        Self::Dynamical,
        Self::DynamicalImplicit,
        Self::DynamicalExplicit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Projection => "projection",
            Self::Extragradient => "extragradient",
            Self::TwoStep => "two-step",
            Self::Whe => "whe",
            Self::DpBasic => "dp-basic",
            Self::DpOptimal => "dp-optimal",
            Self::ThreeStep => "three-step",
            Self::GapDescent => "gap-descent",
            Self::Dynamical => "dynamical",
            Self::DynamicalImplicit => "dynamical-implicit",
            Self::DynamicalExplicit => "dynamical-explicit",
        }
    }

    /// The double-projection methods fix `ρ = 1` in the predictor.
    pub fn uses_rho(self) -> bool {
        !matches!(self, Self::DpBasic | Self::DpOptimal)
    }

    /// Runs with the per-algorithm settings layered over `cfg`: two-step uses
    /// `λ = ξ = ½` and three-step uses `μ = β = ρ`.
    pub fn run(self, problem: &GviProblem, cfg: &SolveConfig) -> Result<SolveReport> {
        match self {
            Self::Projection => solve_projection(problem, cfg),
            Self::Extragradient => solve_extragradient(problem, cfg),
            Self::TwoStep => solve_two_step(problem, &cfg.clone().with_scheme(TwoStepScheme::HALF_HALF)),
            Self::Whe => solve_whe(problem, cfg),
            Self::DpBasic => solve_double_projection_basic(problem, cfg),
            Self::DpOptimal => solve_double_projection_optimal(problem, cfg),
            Self::ThreeStep => solve_three_step(problem, &SolveConfig { mu_step: cfg.rho, beta_step: cfg.rho, ..cfg.clone() }),
            Self::GapDescent => solve_gap_descent(problem, cfg),
            Self::Dynamical => solve_dynamical(problem, &SolveConfig { variant: DynamicalVariant::ForwardT, ..cfg.clone() }),
            Self::DynamicalImplicit => {
                solve_dynamical(problem, &SolveConfig { variant: DynamicalVariant::FullImplicit, ..cfg.clone() })
            }
            Self::DynamicalExplicit => {
                solve_dynamical(problem, &SolveConfig { variant: DynamicalVariant::ExplicitT, ..cfg.clone() })
            }
        }
    }
}

impl FromStr for Algorithm {
    type Err = GviError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| GviError::Invalid(format!("unknown algorithm {s:?}")))
    }
}

/// Suite-wide settings; `rho = None` picks each problem's default step.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub rho: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { rho: None, tol: 1e-7, max_iters: 1000, sigma: 0.5, gamma: 0.8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub problem: String,
    pub n: Option<usize>,
    pub algorithm: String,
    pub iterations: usize,
    pub converged: bool,
    pub residual_norm: f64,
    pub wall_time: Duration,
    /// Step size actually used, for re-running the row.
    pub rho: f64,
    pub error: Option<String>,
}

fn run_one(spec: &ProblemSpec, alg: Algorithm, config: &BenchConfig) -> BenchResult {
    let mut row = BenchResult {
        problem: spec.name(),
        n: spec.n(),
        algorithm: alg.name().into(),
        iterations: 0,
        converged: false,
        residual_norm: f64::NAN,
        wall_time: Duration::ZERO,
        rho: 1.0,
        error: None,
    };
    let started = Instant::now();
    let outcome = (|| -> Result<SolveReport> {
        let problem = build_problem(spec)?.gvi()?;
        let rho = match (alg.uses_rho(), config.rho) {
            (false, _) => 1.0,
            (true, Some(r)) => r,
            (true, None) => problem.default_rho()?,
        };
        row.rho = rho;
        let cfg = SolveConfig {
            rho,
            tol: config.tol,
            max_iters: config.max_iters,
            sigma: config.sigma,
            gamma: config.gamma,
            ..SolveConfig::default()
        };
        alg.run(&problem, &cfg)
    })();
    row.wall_time = started.elapsed();
    match outcome {
        Ok(rep) => {
            row.iterations = rep.iterations;
            row.converged = rep.converged;
            row.residual_norm = rep.residual_norm;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Every problem against every algorithm, in input order. Failures are
/// recorded on their row.
pub fn run_suite(specs: &[ProblemSpec], algorithms: &[Algorithm], config: &BenchConfig) -> Vec<BenchResult> {
    specs
        .iter()
        .flat_map(|s| algorithms.iter().map(move |a| run_one(s, *a, config)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = GviError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            _ => Err(GviError::Invalid(format!("unknown format {s:?}"))),
        }
    }
}

fn write_rows(header: &[&str], rows: &[Vec<String>], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            let _ = writeln!(out, "{}", header.join(","));
            for r in rows {
                let _ = writeln!(out, "{}", r.join(","));
            }
        }
        Format::Markdown => {
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
            for r in rows {
                let _ = writeln!(out, "| {} |", r.join(" | "));
            }
        }
    }
    out
}

/// Columns: problem, n, algorithm, iterations, converged, residual, time.
/// Rows that did not converge show `-` for iterations. With `timing = false`
/// the time column is left empty so output is byte-reproducible.
pub fn emit_table(results: &[BenchResult], format: Format, timing: bool) -> String {
    let header = ["problem", "n", "algorithm", "iterations", "converged", "residual", "time"];
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.problem.clone(),
                r.n.map_or(String::new(), |n| n.to_string()),
                r.algorithm.clone(),
                if r.converged { r.iterations.to_string() } else { "-".into() },
                r.converged.to_string(),
                if r.residual_norm.is_nan() { "-".into() } else { format!("{:.3e}", r.residual_norm) },
                if timing { format!("{:.6}", r.wall_time.as_secs_f64()) } else { String::new() },
            ]
        })
        .collect();
    write_rows(&header, &rows, format)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleRow {
    pub n: usize,
    pub h: f64,
    pub max_error: f64,
    /// Error at the previous (coarser) grid divided by this one.
    pub ratio: Option<f64>,
}

pub fn obstacle_table(ns: &[usize], variant: BoundaryVariant) -> Result<Vec<ObstacleRow>> {
    let problem = ObstacleProblem::reference_instance();
    let mut rows: Vec<ObstacleRow> = Vec::new();
    for &n in ns {
        let e = max_error(&problem, n, variant)?;
        let ratio = rows.last().map(|r| r.max_error / e);
        rows.push(ObstacleRow { n, h: (problem.b - problem.a) / (n + 1) as f64, max_error: e, ratio });
    }
    Ok(rows)
}

/// Columns: h, max error.
pub fn emit_obstacle_table(rows: &[ObstacleRow], format: Format) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![format!("1/{}", r.n + 1), format!("{:.4e}", r.max_error)])
        .collect();
    write_rows(&["h", "max error"], &body, format)
}

/// Values from a flat `key = value` file; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub n: Option<Vec<usize>>,
    pub alg: Option<Vec<String>>,
    pub rho: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| GviError::Invalid(format!("{key}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',').map(|s| parse_value(key, s.trim())).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| GviError::Invalid(format!("line {}: expected key = value", no + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "problem" => c.problem = Some(value.into()),
                "n" => c.n = Some(parse_list(key, value)?),
                "alg" => c.alg = Some(value.split(',').map(|s| s.trim().to_string()).collect()),
                "rho" => c.rho = Some(parse_value(key, value)?),
                "tol" => c.tol = Some(parse_value(key, value)?),
                "max_iters" => c.max_iters = Some(parse_value(key, value)?),
                "sigma" => c.sigma = Some(parse_value(key, value)?),
                "gamma" => c.gamma = Some(parse_value(key, value)?),
                "seed" => c.seed = Some(parse_value(key, value)?),
                "out" => c.out = Some(PathBuf::from(value)),
                "format" => c.format = Some(value.into()),
                other => return Err(GviError::Invalid(format!("line {}: unknown key {other:?}", no + 1))),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `over` win.
    pub fn merged(self, over: RunConfig) -> Self {
        Self {
            problem: over.problem.or(self.problem),
            n: over.n.or(self.n),
            alg: over.alg.or(self.alg),
            rho: over.rho.or(self.rho),
            tol: over.tol.or(self.tol),
            max_iters: over.max_iters.or(self.max_iters),
            sigma: over.sigma.or(self.sigma),
            gamma: over.gamma.or(self.gamma),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
        }
    }

    pub fn bench_config(&self) -> BenchConfig {
        let d = BenchConfig::default();
        BenchConfig {
            rho: self.rho,
            tol: self.tol.unwrap_or(d.tol),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            sigma: self.sigma.unwrap_or(d.sigma),
            gamma: self.gamma.unwrap_or(d.gamma),
            seed: self.seed.unwrap_or(d.seed),
        }
    }

    /// One spec per listed `n` (example2 ignores `n`).
    pub fn specs(&self) -> Result<Vec<ProblemSpec>> {
        let id = self.problem.as_deref().ok_or_else(|| GviError::Invalid("no problem given".into()))?;
        match (&self.n, id) {
            (_, "example2") => Ok(vec![ProblemSpec::Example2]),
            (None, _) if id.starts_with("custom:") => Ok(vec![ProblemSpec::parse(id, None)?]),
            (None, _) => Err(GviError::Invalid(format!("{id} needs n"))),
            (Some(ns), _) => ns.iter().map(|&n| ProblemSpec::parse(id, Some(n))).collect(),
        }
    }

    pub fn algorithms(&self) -> Result<Vec<Algorithm>> {
        match &self.alg {
            None => Err(GviError::Invalid("no algorithm given".into())),
            Some(list) => list.iter().map(|a| a.parse()).collect(),
        }
    }

    pub fn output_format(&self) -> Result<Format> {
        self.format.as_deref().map_or(Ok(Format::Csv), str::parse)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn registry_examples() {
        let p = example3(3).unwrap();
        let t = p.t(&DVector::zeros(3)).unwrap();
        assert_eq!(t, dvector![-1.0, -1.0, -1.0]);
        assert_eq!(p.t(&dvector![1.0, 0.0, 0.0]).unwrap(), dvector![3.0, -2.0, -1.0]);
        let p = example4(2).unwrap();
        assert_eq!(p.t(&dvector![1.0, 1.0]).unwrap(), dvector![-0.5, 0.0]);
        let p = example2().unwrap();
        assert_eq!(p.t(&dvector![1.0, 0.0, 0.0, 0.0]).unwrap(), dvector![0.0, 1.0, 4.0, 2.0]);
        assert!(ProblemSpec::parse("example9", Some(3)).is_err());
        assert!(ProblemSpec::parse("example3", Some(0)).is_err());
        assert!(matches!(ProblemSpec::parse("obstacle", Some(14)), Err(GviError::Grid(14))));
    }

    #[test]
    fn empty_suite() {
        assert!(run_suite(&[], &[Algorithm::DpBasic], &BenchConfig::default()).is_empty());
    }

    #[test]
    fn table_markers() {
        let rows = run_suite(&[ProblemSpec::Example4(5)], &[Algorithm::Projection], &BenchConfig::default());
        let csv = emit_table(&rows, Format::Csv, false);
        assert_eq!(csv.lines().count(), 2);
        let short = BenchConfig { max_iters: 2, ..BenchConfig::default() };
        let rows = run_suite(&[ProblemSpec::Example4(5)], &[Algorithm::Projection], &short);
        let md = emit_table(&rows, Format::Markdown, false);
        assert!(md.contains("| - |"));
        assert_eq!(md.lines().count(), 3);
    }

    #[test]
    fn deterministic_output() {
        let specs = [ProblemSpec::Example3(10), ProblemSpec::Example4(10)];
        let algs = [Algorithm::DpBasic, Algorithm::GapDescent];
        let a = emit_table(&run_suite(&specs, &algs, &BenchConfig::default()), Format::Csv, false);
        let b = emit_table(&run_suite(&specs, &algs, &BenchConfig::default()), Format::Csv, false);
        assert_eq!(a, b);
    }

    #[test]
    fn config_parsing_and_override() {
        let file = RunConfig::parse("problem = example3\nn = 10, 20 # two sizes\nalg = dp-basic\ntol = 1e-6\n").unwrap();
        assert_eq!(file.n, Some(vec![10, 20]));
        let merged = file.merged(RunConfig { tol: Some(1e-8), ..RunConfig::default() });
        assert_eq!(merged.bench_config().tol, 1e-8);
        assert_eq!(merged.specs().unwrap(), vec![ProblemSpec::Example3(10), ProblemSpec::Example3(20)]);
        assert_eq!(merged.algorithms().unwrap(), vec![Algorithm::DpBasic]);
        assert!(RunConfig::parse("colour = red").is_err());
        assert!(RunConfig::parse("tol").is_err());
    }

    #[test]
    fn custom_problem() {
        let p = parse_custom("m: 2 0\nm: 0 2\nq: -1 -1\nset: unit-box\n").unwrap();
        let rep = solve_projection(&p, &SolveConfig::default().with_rho(0.25)).unwrap();
        assert!((rep.solution - dvector![0.5, 0.5]).amax() <= 1e-6);
        assert!(parse_custom("m: 1 2\nq: 1").is_err());
    }

    #[test]
    fn obstacle_rows() {
        let rows = obstacle_table(&[15, 31], BoundaryVariant::Corrected).unwrap();
        assert!(rows[1].ratio.unwrap() > 1.8);
        let text = emit_obstacle_table(&rows, Format::Csv);
        assert!(text.starts_with("h,max error\n1/16,"));
    }
}
