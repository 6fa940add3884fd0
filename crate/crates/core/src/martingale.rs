//! Stroock–Varadhan martingales, the multiplicative master martingale, the
//! quadratic-variation clock `τ_A`, and the guaranteed-capital curves compared
//! at `τ_A`:
//!
//! * `½ e^{A/2}` from the quadratic generated portfolio,
//! * `A` from the quadratic Stroock–Varadhan martingale `X = 2Y + 1`,
//! * `1.25 J^{−3/2} A^{1/2}` from the hitting-time argument.

use crate::error::{Error, Result};
use crate::fgp::value_process;
use crate::itocalc::{doleans_exp, DoleansMode, ProcessSeries};
use crate::master::{hessian_form, GeneratedPortfolio, Generator, LogGenerator, SmoothFunction};
use crate::pathkit::WeightPath;

/// Constant in the hitting-time bound.
pub const APPENDIX_CONSTANT: f64 = 1.25;

/// Relative slack allowed on `Z_π(τ_A) ≥ ½ e^{A/2}` for mesh error and
/// first-passage overshoot.
pub const FERNHOLZ_BOUND_SLACK: f64 = 0.10;

/// Absolute slack on `X(τ_A) ≥ A`; that bound is exact on any grid.
pub const SV_BOUND_TOL: f64 = 1e-12;

/// Both sides of the pathwise Itô formula for `f(μ)`.
#[derive(Clone, Debug)]
pub struct SvReport {
    /// `f(μ_t) − f(μ_0) − ½ Σ_{i,j} ∫ D_ij f(μ) d[μ_i, μ_j]`.
    pub lhs: ProcessSeries,
    /// `Σ_j ∫ D_j f(μ) dμ_j`.
    pub rhs: ProcessSeries,
    /// `max_t |lhs − rhs|`.
    pub residual: f64,
}

pub fn sv_martingale(f: &dyn SmoothFunction, path: &WeightPath) -> Result<SvReport> {
    let n = path.assets();
    let mut hess = vec![0.0; n * n];
    let mut grad = vec![0.0; n];
    let mut dmu = vec![0.0; n];
    let f0 = f.value(path.weights_at(0));
    let mut drift = 0.0;
    let mut integral = 0.0;
    let mut lhs = vec![0.0];
    let mut rhs = vec![0.0];
    for k in 1..path.len() {
        let prev = path.weights_at(k - 1);
        let next = path.weights_at(k);
        for i in 0..n {
            dmu[i] = next[i] - prev[i];
        }
        f.hessian(prev, &mut hess);
        f.gradient(prev, &mut grad);
        drift += 0.5 * hessian_form(&hess, &dmu);
        integral += grad.iter().zip(&dmu).map(|(g, d)| g * d).sum::<f64>();
        lhs.push(f.value(next) - f0 - drift);
        rhs.push(integral);
    }
    let lhs = ProcessSeries::new(path.times().to_vec(), lhs)?;
    let rhs = ProcessSeries::new(path.times().to_vec(), rhs)?;
    Ok(SvReport {
        residual: lhs.max_abs_diff(&rhs)?,
        lhs,
        rhs,
    })
}

/// `f(x) = −½ Σ x_j²`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NegHalfSquaredNorm;

impl SmoothFunction for NegHalfSquaredNorm {
    fn value(&self, x: &[f64]) -> f64 {
        -0.5 * x.iter().map(|v| v * v).sum::<f64>()
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = -v;
        }
    }
    fn hessian(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        out.fill(0.0);
        for i in 0..n {
            out[i * n + i] = -1.0;
        }
    }
}

/// `f(x) = c + Σ a_j x_j`.
#[derive(Clone, Debug)]
pub struct LinearFunction {
    pub constant: f64,
    pub coefficients: Vec<f64>,
}

impl SmoothFunction for LinearFunction {
    fn value(&self, x: &[f64]) -> f64 {
        self.constant + self.coefficients.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
    }
    fn gradient(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.coefficients);
    }
    fn hessian(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// `X = 2Y + 1` with `Y = ½ Σ μ_j(0)² − ½ Σ μ_j(t)² + ½ Σ [μ_j](t)`.
pub fn sv_quadratic_x(path: &WeightPath) -> ProcessSeries {
    let sq = |row: &[f64]| row.iter().map(|v| v * v).sum::<f64>();
    let start = sq(path.weights_at(0));
    let qv = path.total_quadratic_variation();
    let values = path
        .rows()
        .zip(qv.values())
        .map(|(row, q)| 1.0 + start - sq(row) + q)
        .collect();
    ProcessSeries::from_parts(path.times().to_vec(), values)
}

#[derive(Clone, Debug)]
pub struct FernholzReport {
    /// `S(μ_t)/S(μ_0) · exp(−½ Σ_{i,j} ∫ (D_ij S / S)(μ) d[μ_i, μ_j])`.
    pub values: ProcessSeries,
    /// `max_t |F − Z_π| / Z_π` against the generated portfolio's wealth.
    pub value_process_gap: f64,
    /// `max_t |ℰ(SV(ln S)) − F| / F`, product-mode Doléans exponential.
    pub doleans_sv_gap: f64,
}

pub fn fernholz_martingale(gen: &Generator, path: &WeightPath) -> Result<FernholzReport> {
    gen.validate()?;
    let n = path.assets();
    let mut hess = vec![0.0; n * n];
    let mut dmu = vec![0.0; n];
    let s0 = gen.value(path.weights_at(0));
    let mut exponent = 0.0;
    let mut values = vec![1.0];
    for k in 1..path.len() {
        let prev = path.weights_at(k - 1);
        let next = path.weights_at(k);
        let s_prev = gen.value(prev);
        if s_prev.is_nan() || s_prev <= 0.0 {
            return Err(Error::domain(format!("generator value {s_prev} at index {}", k - 1)));
        }
        for i in 0..n {
            dmu[i] = next[i] - prev[i];
        }
        gen.hessian(prev, &mut hess);
        exponent -= 0.5 * hessian_form(&hess, &dmu) / s_prev;
        values.push(gen.value(next) / s0 * exponent.exp());
    }
    let values = ProcessSeries::new(path.times().to_vec(), values)?;

    let z = value_process(&GeneratedPortfolio(gen), path)?;
    let sv = sv_martingale(&LogGenerator(gen), path)?;
    let exp_sv = doleans_exp(&sv.lhs, DoleansMode::Product)?;
    Ok(FernholzReport {
        value_process_gap: max_rel_gap(&values, &z),
        doleans_sv_gap: max_rel_gap(&exp_sv, &values),
        values,
    })
}

fn max_rel_gap(a: &ProcessSeries, reference: &ProcessSeries) -> f64 {
    a.values()
        .iter()
        .zip(reference.values())
        .map(|(x, r)| ((x - r) / r).abs())
        .fold(0.0, f64::max)
}

/// First grid time at which `Σ_j [μ_j]` reaches `A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StoppingTime {
    Reached {
        index: usize,
        time: f64,
        /// `Σ_j [μ_j](τ_A)`.
        qv: f64,
        /// `Σ_j [μ_j](τ_A) − A`, at most the last step's increment.
        overshoot: f64,
    },
    NotReached {
        total_qv: f64,
    },
}

impl StoppingTime {
    pub fn index(&self) -> Option<usize> {
        match self {
            StoppingTime::Reached { index, .. } => Some(*index),
            StoppingTime::NotReached { .. } => None,
        }
    }
}

pub fn stopping_time(path: &WeightPath, a: f64) -> Result<StoppingTime> {
    let qv = path.total_quadratic_variation();
    stopping_time_on(&qv, a)
}

fn stopping_time_on(qv: &ProcessSeries, a: f64) -> Result<StoppingTime> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("stopping level A = {a} must be positive")));
    }
    let values = qv.values();
    // QV is nondecreasing, so the first passage is a partition point.
    let index = values.partition_point(|&q| q < a);
    Ok(if index < values.len() {
        StoppingTime::Reached {
            index,
            time: qv.times()[index],
            qv: values[index],
            overshoot: values[index] - a,
        }
    } else {
        StoppingTime::NotReached { total_qv: qv.last() }
    })
}

/// `n` log-spaced points on `[min, max]`.
pub fn log_spaced_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && max.is_finite()) || count < 2 {
        return Err(Error::domain(format!(
            "A-grid needs 0 < min < max and at least 2 points (got [{min}, {max}], {count})"
        )));
    }
    let (lo, hi) = (min.ln(), max.ln());
    let step = (hi - lo) / (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count).map(|i| (lo + step * i as f64).exp()).collect();
    grid[0] = min;
    grid[count - 1] = max;
    Ok(grid)
}

pub fn check_a_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("empty A-grid"));
    }
    if grid.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::domain("A-grid values must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("A-grid must be strictly increasing"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCrossings {
    /// Lower root of `½ e^{A/2} = A`.
    pub lower: f64,
    /// Upper root of `½ e^{A/2} = A`.
    pub upper: f64,
    /// `(1.25 J^{−3/2})²`, where the hitting-time bound meets the line `A`.
    pub appendix: f64,
    /// `J < 2`: formula evaluated but no market exists.
    pub degenerate: bool,
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    assert!(f_lo * f(hi) < 0.0, "bracket [{lo}, {hi}] has no sign change");
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (f_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn fernholz_bound(a: f64) -> f64 {
    0.5 * (0.5 * a).exp()
}

pub fn bound_crossings(assets: usize) -> BoundCrossings {
    let g = |a: f64| fernholz_bound(a) - a;
    let c = APPENDIX_CONSTANT;
    let j = assets as f64;
    BoundCrossings {
        lower: bisect(g, 0.1, 1.0),
        upper: bisect(g, 3.0, 6.0),
        appendix: c * c / (j * j * j),
        degenerate: assets < 2,
    }
}

/// `1.25 J^{−3/2} A^{1/2}`.
pub fn appendix_bound(assets: usize, a: f64) -> Result<f64> {
    check_appendix_inputs(assets, a)?;
    Ok(APPENDIX_CONSTANT * (assets as f64).powf(-1.5) * a.sqrt())
}

/// `√(2/π) (J/A)^{1/2}`: the upper bound on the probability that a Brownian
/// motion started at 1 avoids zero for time `A/J`.
pub fn gaussian_tail_ingredient(assets: usize, a: f64) -> Result<f64> {
    check_appendix_inputs(assets, a)?;
    Ok((2.0 / std::f64::consts::PI).sqrt() * (assets as f64 / a).sqrt())
}

/// `√(π/2) > 1.25`, which lets the rounded constant replace the exact one.
pub fn appendix_constant_is_conservative() -> bool {
    (std::f64::consts::PI / 2.0).sqrt() > APPENDIX_CONSTANT
}

fn check_appendix_inputs(assets: usize, a: f64) -> Result<()> {
    if assets < 1 {
        return Err(Error::domain("number of assets must be at least 1"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("A = {a} must be positive")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub a: f64,
    pub tau: StoppingTime,
    /// `Z_π(τ_A)`.
    pub fernholz_value: Option<f64>,
    /// `X(τ_A)`.
    pub sv_value: Option<f64>,
    /// `1 + Σ μ_j(0)² − Σ μ_j(τ_A)²`, the part of `X(τ_A) − Σ[μ_j](τ_A)` that is not QV.
    pub sv_gap: Option<f64>,
    pub bound_fernholz: f64,
    pub bound_line: f64,
    pub bound_appendix: f64,
}

impl ComparisonRow {
    pub fn fernholz_bound_holds(&self) -> Option<bool> {
        self.fernholz_value
            .map(|z| z >= self.bound_fernholz * (1.0 - FERNHOLZ_BOUND_SLACK))
    }

    pub fn sv_bound_holds(&self) -> Option<bool> {
        self.sv_value.map(|x| x >= self.a - SV_BOUND_TOL)
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub assets: usize,
    pub rows: Vec<ComparisonRow>,
    pub crossings: BoundCrossings,
}

impl ComparisonReport {
    pub fn reached(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(|r| r.tau.index().is_some())
    }

    pub fn not_reached(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(|r| r.tau.index().is_none())
    }

    /// Every reachable row satisfies both stopping-time bounds.
    pub fn all_bounds_hold(&self) -> bool {
        self.reached()
            .all(|r| r.fernholz_bound_holds() == Some(true) && r.sv_bound_holds() == Some(true))
    }

    /// Fraction of reachable rows where `½ e^{A/2} > A` exactly when `A` lies
    /// outside the crossing interval.
    pub fn bound_ordering_agreement(&self) -> f64 {
        self.agreement(|r| r.bound_fernholz > r.bound_line)
    }

    /// The same ordering test applied to the realised `Z_π(τ_A)` and `X(τ_A)`.
    pub fn empirical_ordering_agreement(&self) -> f64 {
        self.agreement(|r| r.fernholz_value.unwrap() > r.sv_value.unwrap())
    }

    fn agreement(&self, fernholz_above: impl Fn(&ComparisonRow) -> bool) -> f64 {
        let rows: Vec<_> = self.reached().collect();
        if rows.is_empty() {
            return 1.0;
        }
        let (lo, hi) = (self.crossings.lower, self.crossings.upper);
        let agree = rows
            .iter()
            .filter(|r| fernholz_above(r) == !(lo..=hi).contains(&r.a))
            .count();
        agree as f64 / rows.len() as f64
    }
}

/// Values of the quadratic portfolio's wealth and of `X` at `τ_A` for each `A`.
pub fn compare_at_tau(path: &WeightPath, a_grid: &[f64]) -> Result<ComparisonReport> {
    compare_at_tau_with(&Generator::Quadratic, path, a_grid)
}

pub fn compare_at_tau_with(gen: &Generator, path: &WeightPath, a_grid: &[f64]) -> Result<ComparisonReport> {
    check_a_grid(a_grid)?;
    let z = value_process(&GeneratedPortfolio(gen), path)?;
    let x = sv_quadratic_x(path);
    let qv = path.total_quadratic_variation();
    let sq0: f64 = path.weights_at(0).iter().map(|v| v * v).sum();
    let assets = path.assets();
    let mut rows = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        let tau = stopping_time_on(&qv, a)?;
        let at = tau.index();
        rows.push(ComparisonRow {
            a,
            tau,
            fernholz_value: at.map(|k| z.values()[k]),
            sv_value: at.map(|k| x.values()[k]),
            sv_gap: at.map(|k| 1.0 + sq0 - path.weights_at(k).iter().map(|v| v * v).sum::<f64>()),
            bound_fernholz: fernholz_bound(a),
            bound_line: a,
            bound_appendix: appendix_bound(assets, a)?,
        });
    }
    Ok(ComparisonReport {
        assets,
        rows,
        crossings: bound_crossings(assets),
    })
}
