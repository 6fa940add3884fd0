//! Portfolio generating functions (measures of diversity), the portfolios they
//! generate, the Hessian drift `Θ`, and numerical checks of the master
//! equation
//!
//! ```text
//! ln Z_π(t) = ln S(μ(t))/S(μ(0)) + Θ(t),
//! Θ(t)      = Σ_k −1/(2 S(μ_{k−1})) Σ_{i,j} D_ij S(μ_{k−1}) Δμ_i Δμ_j
//! ```
//!
//! together with its special cases for the quadratic, entropy and `D_p`
//! generators.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::convergence::trend_holds;
use crate::error::{Error, Result};
use crate::fgp::{excess_growth_approx, value_process, Portfolio};
use crate::itocalc::ProcessSeries;
use crate::pathkit::{PartitionSequence, WeightPath};

/// A `C²` function on a neighbourhood of the simplex with value, gradient and
/// row-major Hessian evaluators.
pub trait SmoothFunction: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
    fn hessian(&self, x: &[f64], out: &mut [f64]);
}

impl<F: SmoothFunction + ?Sized> SmoothFunction for &F {
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        (**self).gradient(x, out)
    }
    fn hessian(&self, x: &[f64], out: &mut [f64]) {
        (**self).hessian(x, out)
    }
}

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A user-supplied generator. Missing derivatives fall back to central
/// differences. Callbacks must be pure; they may be called concurrently.
#[derive(Clone)]
pub struct CustomGenerator {
    name: String,
    value: ValueFn,
    gradient: Option<VectorFn>,
    hessian: Option<VectorFn>,
}

impl fmt::Debug for CustomGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomGenerator")
            .field("name", &self.name)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .finish()
    }
}

impl CustomGenerator {
    pub fn new(name: impl Into<String>, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        CustomGenerator {
            name: name.into(),
            value: Arc::new(value),
            gradient: None,
            hessian: None,
        }
    }

    pub fn with_gradient(mut self, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(f));
        self
    }

    pub fn with_hessian(mut self, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(f));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_numeric_derivatives(&self) -> bool {
        self.gradient.is_none() || self.hessian.is_none()
    }
}

/// Central-difference step for coordinate value `xj` with relative scale
/// `scale`, kept small enough that `xj ± h` stays inside `(0, 1)`.
fn fd_step(xj: f64, scale: f64) -> f64 {
    let h = scale.max(scale * xj.abs());
    h.min(0.5 * xj).min(0.5 * (1.0 - xj)).max(f64::MIN_POSITIVE)
}

const GRADIENT_STEP: f64 = 1e-6;
const SECOND_DIFFERENCE_STEP: f64 = 1e-4;

fn numeric_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], out: &mut [f64]) {
    let mut y = x.to_vec();
    for j in 0..x.len() {
        let h = fd_step(x[j], GRADIENT_STEP);
        y[j] = x[j] + h;
        let up = f(&y);
        y[j] = x[j] - h;
        let down = f(&y);
        y[j] = x[j];
        out[j] = (up - down) / (2.0 * h);
    }
}

fn numeric_hessian_from_gradient(g: &dyn Fn(&[f64], &mut [f64]), x: &[f64], out: &mut [f64]) {
    let n = x.len();
    let mut y = x.to_vec();
    let mut up = vec![0.0; n];
    let mut down = vec![0.0; n];
    for j in 0..n {
        let h = fd_step(x[j], GRADIENT_STEP);
        y[j] = x[j] + h;
        g(&y, &mut up);
        y[j] = x[j] - h;
        g(&y, &mut down);
        y[j] = x[j];
        for i in 0..n {
            out[i * n + j] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    symmetrize(out, n);
}

fn numeric_hessian_from_value(f: &dyn Fn(&[f64]) -> f64, x: &[f64], out: &mut [f64]) {
    let n = x.len();
    let mut y = x.to_vec();
    let f0 = f(x);
    let steps: Vec<f64> = x.iter().map(|&v| fd_step(v, SECOND_DIFFERENCE_STEP)).collect();
    for i in 0..n {
        let hi = steps[i];
        y[i] = x[i] + hi;
        let up = f(&y);
        y[i] = x[i] - hi;
        let down = f(&y);
        y[i] = x[i];
        out[i * n + i] = (up - 2.0 * f0 + down) / (hi * hi);
        for j in (i + 1)..n {
            let hj = steps[j];
            let mut corner = |si: f64, sj: f64| {
                y[i] = x[i] + si * hi;
                y[j] = x[j] + sj * hj;
                let v = f(&y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            let mixed =
                (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0)) / (4.0 * hi * hj);
            out[i * n + j] = mixed;
            out[j * n + i] = mixed;
        }
    }
}

fn symmetrize(m: &mut [f64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
}

impl SmoothFunction for CustomGenerator {
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match &self.gradient {
            Some(g) => g(x, out),
            None => numeric_gradient(&*self.value, x, out),
        }
    }

    fn hessian(&self, x: &[f64], out: &mut [f64]) {
        match (&self.hessian, &self.gradient) {
            (Some(h), _) => h(x, out),
            (None, Some(g)) => numeric_hessian_from_gradient(&**g, x, out),
            (None, None) => numeric_hessian_from_value(&*self.value, x, out),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Quadratic,
    Entropy,
    Diversity,
    Custom,
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(GeneratorKind::Quadratic),
            "entropy" => Ok(GeneratorKind::Entropy),
            "diversity" => Ok(GeneratorKind::Diversity),
            other => Err(Error::domain(format!("unknown generator {other:?}"))),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorKind::Quadratic => "quadratic",
            GeneratorKind::Entropy => "entropy",
            GeneratorKind::Diversity => "diversity",
            GeneratorKind::Custom => "custom",
        })
    }
}

/// A positive portfolio generating function `S`.
#[derive(Clone, Debug)]
pub enum Generator {
    /// `S(x) = 1 − ½ Σ x_j²`.
    Quadratic,
    /// `S(x) = −Σ x_j ln x_j`.
    Entropy,
    /// `D_p(x) = (Σ x_j^p)^{1/p}`, `p ∈ (0, 1)`.
    Diversity {
        p: f64,
    },
    Custom(CustomGenerator),
}

impl Generator {
    pub fn diversity(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Generator::Diversity { p })
    }

    pub fn from_kind(kind: GeneratorKind, p: f64) -> Result<Self> {
        match kind {
            GeneratorKind::Quadratic => Ok(Generator::Quadratic),
            GeneratorKind::Entropy => Ok(Generator::Entropy),
            GeneratorKind::Diversity => Generator::diversity(p),
            GeneratorKind::Custom => Err(Error::domain("custom generators need a function")),
        }
    }

    pub fn kind(&self) -> GeneratorKind {
        match self {
            Generator::Quadratic => GeneratorKind::Quadratic,
            Generator::Entropy => GeneratorKind::Entropy,
            Generator::Diversity { .. } => GeneratorKind::Diversity,
            Generator::Custom(_) => GeneratorKind::Custom,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Generator::Diversity { p } => check_p(*p),
            _ => Ok(()),
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("diversity parameter p = {p} must lie in (0, 1)")))
    }
}

impl SmoothFunction for Generator {
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            Generator::Quadratic => 1.0 - 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            Generator::Entropy => -x.iter().map(|v| v * v.ln()).sum::<f64>(),
            Generator::Diversity { p } => x.iter().map(|v| v.powf(*p)).sum::<f64>().powf(1.0 / p),
            Generator::Custom(c) => c.value(x),
        }
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Generator::Quadratic => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = -v;
                }
            }
            Generator::Entropy => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = -v.ln() - 1.0;
                }
            }
            Generator::Diversity { p } => {
                let s: f64 = x.iter().map(|v| v.powf(*p)).sum();
                let scale = s.powf(1.0 / p - 1.0);
                for (o, v) in out.iter_mut().zip(x) {
                    *o = scale * v.powf(p - 1.0);
                }
            }
            Generator::Custom(c) => c.gradient(x, out),
        }
    }

    fn hessian(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        match self {
            Generator::Quadratic => {
                out.fill(0.0);
                for i in 0..n {
                    out[i * n + i] = -1.0;
                }
            }
            Generator::Entropy => {
                out.fill(0.0);
                for i in 0..n {
                    out[i * n + i] = -1.0 / x[i];
                }
            }
            Generator::Diversity { p } => {
                let p = *p;
                let s: f64 = x.iter().map(|v| v.powf(p)).sum();
                let cross = (1.0 - p) * s.powf(1.0 / p - 2.0);
                let diag = (p - 1.0) * s.powf(1.0 / p - 1.0);
                let pw: Vec<f64> = x.iter().map(|v| v.powf(p - 1.0)).collect();
                for i in 0..n {
                    for j in 0..n {
                        out[i * n + j] = cross * pw[i] * pw[j];
                    }
                    out[i * n + i] += diag * x[i].powf(p - 2.0);
                }
            }
            Generator::Custom(c) => c.hessian(x, out),
        }
    }
}

/// `ln S` for a positive generator `S`.
pub struct LogGenerator<'a>(pub &'a Generator);

impl SmoothFunction for LogGenerator<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x).ln()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let s = self.0.value(x);
        self.0.gradient(x, out);
        for o in out.iter_mut() {
            *o /= s;
        }
    }

    fn hessian(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        let s = self.0.value(x);
        let mut g = vec![0.0; n];
        self.0.gradient(x, &mut g);
        self.0.hessian(x, out);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = out[i * n + j] / s - g[i] * g[j] / (s * s);
            }
        }
    }
}

/// Rejects points outside the open simplex (sum tolerance `1e-9`).
pub fn check_open_simplex(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::domain("simplex points need at least 2 coordinates"));
    }
    if x.iter().any(|v| !(v.is_finite() && *v > 0.0 && *v < 1.0)) {
        return Err(Error::domain(format!("{x:?} is outside the open simplex")));
    }
    let sum: f64 = x.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("{x:?} sums to {sum}, not 1")));
    }
    Ok(())
}

/// `π_j(x) = (D_j ln S(x) + 1 − Σ_k x_k D_k ln S(x)) x_j`.
pub fn generated_portfolio(gen: &Generator, x: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; x.len()];
    generated_portfolio_into(gen, x, &mut out)?;
    Ok(out)
}

fn generated_portfolio_into(gen: &Generator, x: &[f64], out: &mut [f64]) -> Result<()> {
    check_open_simplex(x)?;
    gen.validate()?;
    let s = gen.value(x);
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("generator value {s} is not positive at {x:?}")));
    }
    gen.gradient(x, out);
    let mut normalizer = 1.0;
    for (g, v) in out.iter_mut().zip(x) {
        *g /= s;
        normalizer -= v * *g;
    }
    for (g, v) in out.iter_mut().zip(x) {
        *g = (*g + normalizer) * v;
    }
    Ok(())
}

/// The portfolio generated by a [`Generator`], usable wherever a
/// [`Portfolio`] is expected.
#[derive(Clone, Debug)]
pub struct GeneratedPortfolio<'a>(pub &'a Generator);

impl Portfolio for GeneratedPortfolio<'_> {
    fn weights(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        generated_portfolio_into(self.0, x, out)
    }
}

/// The hand-derived closed forms for the three built-in generators.
pub fn closed_form_portfolio(gen: &Generator, x: &[f64]) -> Result<Vec<f64>> {
    check_open_simplex(x)?;
    gen.validate()?;
    match gen {
        Generator::Quadratic => {
            let s = gen.value(x);
            Ok(x.iter().map(|v| ((2.0 - v) / s - 1.0) * v).collect())
        }
        Generator::Entropy => {
            let s = gen.value(x);
            Ok(x.iter().map(|v| -v * v.ln() / s).collect())
        }
        Generator::Diversity { p } => {
            let pw: Vec<f64> = x.iter().map(|v| v.powf(*p)).collect();
            let total: f64 = pw.iter().sum();
            Ok(pw.iter().map(|v| v / total).collect())
        }
        Generator::Custom(_) => Err(Error::domain("custom generators have no closed-form portfolio")),
    }
}

/// `(2 − x_j)/S(x) − 1`: how many times the market weight the quadratic
/// portfolio holds in asset `j`.
pub fn quadratic_leverage(x: &[f64]) -> Result<Vec<f64>> {
    check_open_simplex(x)?;
    let s = Generator::Quadratic.value(x);
    Ok(x.iter().map(|v| (2.0 - v) / s - 1.0).collect())
}

/// `S(x)` on the open simplex.
pub fn diversity_value(gen: &Generator, x: &[f64]) -> Result<f64> {
    check_open_simplex(x)?;
    gen.validate()?;
    let s = gen.value(x);
    match gen {
        Generator::Quadratic => debug_assert!((0.5 - 1e-12..=1.0).contains(&s)),
        Generator::Diversity { p } => {
            let upper = (x.len() as f64).powf((1.0 - p) / p);
            debug_assert!(s >= 1.0 - 1e-12 && s <= upper * (1.0 + 1e-12));
        }
        _ => {}
    }
    Ok(s)
}

/// `ln S(μ(t)) / S(μ(0))`.
pub fn log_generator_ratio(gen: &Generator, path: &WeightPath) -> Result<ProcessSeries> {
    let values = generator_values(gen, path)?;
    let s0 = values[0];
    ProcessSeries::new(path.times().to_vec(), values.iter().map(|s| (s / s0).ln()).collect())
}

fn generator_values(gen: &Generator, path: &WeightPath) -> Result<Vec<f64>> {
    gen.validate()?;
    path.rows()
        .enumerate()
        .map(|(k, row)| {
            let s = gen.value(row);
            if s > 0.0 && s.is_finite() {
                Ok(s)
            } else {
                Err(Error::domain(format!(
                    "generator value {s} is not positive at index {k}"
                )))
            }
        })
        .collect()
}

/// `Σ_{i,j} H_ij Δμ_i Δμ_j` for a row-major Hessian.
pub(crate) fn hessian_form(hess: &[f64], dmu: &[f64]) -> f64 {
    let n = dmu.len();
    let mut acc = 0.0;
    for i in 0..n {
        let row = &hess[i * n..(i + 1) * n];
        acc += dmu[i] * row.iter().zip(dmu).map(|(h, d)| h * d).sum::<f64>();
    }
    acc
}

/// `Θ(t) = Σ_k −1/(2 S(μ_{k−1})) Σ_{i,j} D_ij S(μ_{k−1}) Δμ_{i,k} Δμ_{j,k}`.
pub fn theta_drift(gen: &Generator, path: &WeightPath) -> Result<ProcessSeries> {
    let values = generator_values(gen, path)?;
    let n = path.assets();
    let mut hess = vec![0.0; n * n];
    let mut dmu = vec![0.0; n];
    let steps = (1..path.len()).map(|k| {
        let prev = path.weights_at(k - 1);
        let next = path.weights_at(k);
        for i in 0..n {
            dmu[i] = next[i] - prev[i];
        }
        gen.hessian(prev, &mut hess);
        -hessian_form(&hess, &dmu) / (2.0 * values[k - 1])
    });
    let steps: Vec<f64> = steps.collect();
    ProcessSeries::cumulative(path.times(), steps.into_iter())
}

/// Master-equation terms at the finest level plus residuals at every level.
#[derive(Clone, Debug)]
pub struct MasterReport {
    pub levels: Vec<u32>,
    /// `ln Z_π` at the finest level.
    pub lhs: ProcessSeries,
    /// `ln S(μ_t)/S(μ_0)` at the finest level.
    pub diversity_term: ProcessSeries,
    pub theta: ProcessSeries,
    /// `max_t |lhs − diversity_term − theta|` per level, coarsest first.
    pub residual_by_level: Vec<f64>,
}

impl MasterReport {
    pub fn residual(&self) -> ProcessSeries {
        let rhs = self.diversity_term.combine(1.0, &self.theta, 1.0).expect("aligned");
        self.lhs.combine(1.0, &rhs, -1.0).expect("aligned")
    }

    pub fn converges(&self) -> bool {
        trend_holds(&self.residual_by_level)
    }
}

/// The three master-equation terms on one grid.
pub fn master_terms(gen: &Generator, path: &WeightPath) -> Result<(ProcessSeries, ProcessSeries, ProcessSeries)> {
    let lhs = value_process(&GeneratedPortfolio(gen), path)?.map(f64::ln)?;
    let div = log_generator_ratio(gen, path)?;
    let theta = theta_drift(gen, path)?;
    Ok((lhs, div, theta))
}

pub fn verify_master(gen: &Generator, partitions: &PartitionSequence<'_>) -> Result<MasterReport> {
    let mut levels = Vec::new();
    let mut residual_by_level = Vec::new();
    let mut finest = None;
    for n in partitions.level_numbers() {
        let path = partitions.level_path(n)?;
        let (lhs, div, theta) = master_terms(gen, &path)?;
        let rhs = div.combine(1.0, &theta, 1.0)?;
        residual_by_level.push(lhs.max_abs_diff(&rhs)?);
        levels.push(n);
        finest = Some((lhs, div, theta));
    }
    let (lhs, diversity_term, theta) = finest.ok_or_else(|| Error::domain("no partition levels"))?;
    Ok(MasterReport {
        levels,
        lhs,
        diversity_term,
        theta,
        residual_by_level,
    })
}

/// Absolute slack on the simplified lower bounds for grid effects.
pub const BOUND_TOL: f64 = 1e-2;

/// Relative slack on the quadratic portfolio's drawdown floor `Z_π ≥ ½`.
pub const DRAWDOWN_TOL: f64 = 1e-2;

/// The quadratic portfolio never holds more than this multiple of an asset's
/// market weight.
pub const LEVERAGE_CAP: f64 = 3.0;

/// Largest [`quadratic_leverage`] entry along the path.
pub fn max_quadratic_leverage(path: &WeightPath) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for row in path.rows() {
        for l in quadratic_leverage(row)? {
            worst = worst.max(l);
        }
    }
    Ok(worst)
}

/// A lower bound `ln Z_π ≥ rhs` checked at every grid time.
#[derive(Clone, Debug)]
pub struct BoundCheck {
    /// The constant part of the bound (`−ln 2`, or `−((1−p)/p) ln J`).
    pub floor: f64,
    pub rhs: ProcessSeries,
    /// `min_t (ln Z_π − rhs)`.
    pub min_slack: f64,
}

#[derive(Clone, Debug)]
pub struct CorollaryReport {
    pub kind: GeneratorKind,
    pub ln_value: ProcessSeries,
    /// Right-hand side of the identity corollary for this generator.
    pub identity_rhs: ProcessSeries,
    /// `max_t |ln Z_π − identity_rhs|`.
    pub identity_residual: f64,
    /// The simplified lower bound, for the quadratic and `D_p` generators.
    pub bound: Option<BoundCheck>,
    /// Quadratic generator only: `min_t Z_π / (½ exp(½ Σ_j [μ_j]))`.
    pub drawdown_ratio: Option<f64>,
    /// `min_t Z_π`.
    pub min_value: f64,
}

impl CorollaryReport {
    /// Bound slack is above `-tol` (vacuously true without a bound).
    pub fn bound_holds(&self, tol: f64) -> bool {
        self.bound.as_ref().is_none_or(|b| b.min_slack >= -tol)
    }
}

/// Checks the special-case corollaries of the master equation on one grid.
///
/// * quadratic: `ln Z = ln S ratio + Σ_j ∫ d[μ_j]/(2S)` and `ln Z ≥ −ln 2 + ½ Σ_j [μ_j]`;
/// * entropy: `ln Z = ln S ratio + ∫ dΓ*_μ / S`;
/// * `D_p`: `ln Z = ln D_p ratio + (1−p) Γ*_π` and `ln Z ≥ (1−p) Γ*_π − ((1−p)/p) ln J`.
pub fn corollary_check(gen: &Generator, path: &WeightPath) -> Result<CorollaryReport> {
    gen.validate()?;
    let z = value_process(&GeneratedPortfolio(gen), path)?;
    let ln_value = z.map(f64::ln)?;
    let min_value = z.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let div = log_generator_ratio(gen, path)?;
    let s_values = generator_values(gen, path)?;
    let times = path.times();
    let j = path.assets();

    let step_qv: Vec<f64> = (1..path.len())
        .map(|k| {
            let prev = path.weights_at(k - 1);
            let next = path.weights_at(k);
            prev.iter().zip(next).map(|(a, b)| (b - a) * (b - a)).sum()
        })
        .collect();

    let (identity_rhs, bound, drawdown_ratio) = match gen {
        Generator::Quadratic => {
            let drift = ProcessSeries::cumulative(times, step_qv.iter().zip(&s_values).map(|(q, s)| q / (2.0 * s)))?;
            let qv = ProcessSeries::cumulative(times, step_qv.iter().copied())?;
            let floor = -std::f64::consts::LN_2;
            let rhs = qv.map(|q| floor + 0.5 * q)?;
            let drawdown = z
                .values()
                .iter()
                .zip(qv.values())
                .map(|(zv, q)| zv / (0.5 * (0.5 * q).exp()))
                .fold(f64::INFINITY, f64::min);
            let min_slack = min_diff(&ln_value, &rhs);
            (
                div.combine(1.0, &drift, 1.0)?,
                Some(BoundCheck { floor, rhs, min_slack }),
                Some(drawdown),
            )
        }
        Generator::Entropy => {
            // Stepwise ∫ dΓ*_μ / S(μ) with left-point S.
            let market = excess_growth_approx(&crate::fgp::MarketPortfolio, path)?;
            let dgamma: Vec<f64> = market.gamma.increments().collect();
            let drift = ProcessSeries::cumulative(times, dgamma.iter().zip(&s_values).map(|(g, s)| g / s))?;
            (div.combine(1.0, &drift, 1.0)?, None, None)
        }
        Generator::Diversity { p } => {
            let gamma = excess_growth_approx(&GeneratedPortfolio(gen), path)?.gamma;
            let identity = div.combine(1.0, &gamma, 1.0 - p)?;
            let floor = -((1.0 - p) / p) * (j as f64).ln();
            let rhs = gamma.map(|g| (1.0 - p) * g + floor)?;
            let min_slack = min_diff(&ln_value, &rhs);
            (identity, Some(BoundCheck { floor, rhs, min_slack }), None)
        }
        Generator::Custom(_) => {
            return Err(Error::domain(
                "corollary checks need a quadratic, entropy or diversity generator",
            ))
        }
    };
    let identity_residual = ln_value.max_abs_diff(&identity_rhs)?;
    Ok(CorollaryReport {
        kind: gen.kind(),
        ln_value,
        identity_rhs,
        identity_residual,
        bound,
        drawdown_ratio,
        min_value,
    })
}

fn min_diff(a: &ProcessSeries, b: &ProcessSeries) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x - y)
        .fold(f64::INFINITY, f64::min)
}
