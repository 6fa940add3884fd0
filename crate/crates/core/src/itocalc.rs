//! Pathwise Itô calculus along one partition level.
//!
//! Every operation works on a [`ProcessSeries`] sampled at the points of a
//! single partition level. Integrals are left-point (non-anticipating) sums,
//! so the discrete identities below hold exactly up to float rounding:
//!
//! ```text
//! ∫X dX        = ½(X_t² − X_0² − [X]_t)
//! ℰ(ℒ(Y))·Y_0  = Y                      (product mode)
//! ```
//!
//! The continuous-time identities `ℰ(X) = exp(X − [X]/2)`, `ℒ(Y) = ln Y + ½[ln Y]`
//! and `[ℒ(Y)] = [ln Y]` only hold in the refinement limit; the residual
//! helpers at the bottom of this module measure how far a given level is
//! from them.

use crate::error::{Error, Result};

/// A scalar process sampled on the times of one partition level.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl ProcessSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: times.len(),
                right: values.len(),
            });
        }
        if times.is_empty() {
            return Err(Error::domain("process series must have at least one sample"));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite process value {} at index {k}",
                values[k]
            )));
        }
        Ok(ProcessSeries { times, values })
    }

    /// Builds a series without re-validating; callers guarantee finiteness.
    pub(crate) fn from_parts(times: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(times.len(), values.len());
        ProcessSeries { times, values }
    }

    pub fn constant(times: &[f64], value: f64) -> Self {
        ProcessSeries::from_parts(times.to_vec(), vec![value; times.len()])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `X_k − X_{k−1}` for `k = 1..len`.
    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ProcessSeries> {
        ProcessSeries::new(self.times.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Elementwise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &ProcessSeries, b: f64) -> Result<ProcessSeries> {
        check_aligned(self, other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        ProcessSeries::new(self.times.clone(), values)
    }

    /// `max_k |self_k − other_k|`.
    pub fn max_abs_diff(&self, other: &ProcessSeries) -> Result<f64> {
        check_aligned(self, other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max))
    }

    /// Restriction to the given sample indices (e.g. a coarser partition level).
    pub fn subsample(&self, indices: &[usize]) -> Result<ProcessSeries> {
        if let Some(&k) = indices.iter().find(|&&k| k >= self.len()) {
            return Err(Error::domain(format!(
                "index {k} outside series of length {}",
                self.len()
            )));
        }
        ProcessSeries::new(
            indices.iter().map(|&k| self.times[k]).collect(),
            indices.iter().map(|&k| self.values[k]).collect(),
        )
    }

    /// Running sum of `steps`, starting at 0, on the given time grid.
    pub(crate) fn cumulative(times: &[f64], steps: impl Iterator<Item = f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        values.push(acc);
        for step in steps {
            acc += step;
            values.push(acc);
        }
        ProcessSeries::new(times.to_vec(), values)
    }
}

fn check_aligned(x: &ProcessSeries, y: &ProcessSeries) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.times != y.times {
        return Err(Error::domain("series are sampled on different time grids"));
    }
    Ok(())
}

/// `[X]_k = Σ_{i≤k} (X_i − X_{i−1})²`.
pub fn quadratic_variation(x: &ProcessSeries) -> ProcessSeries {
    let mut values = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    values.push(acc);
    for dx in x.increments() {
        acc += dx * dx;
        values.push(acc);
    }
    ProcessSeries::from_parts(x.times.clone(), values)
}

/// `[X, Y]_k = Σ_{i≤k} ΔX_i ΔY_i`.
pub fn covariation(x: &ProcessSeries, y: &ProcessSeries) -> Result<ProcessSeries> {
    check_aligned(x, y)?;
    ProcessSeries::cumulative(&x.times, x.increments().zip(y.increments()).map(|(a, b)| a * b))
}

/// Left-point integral `(∫H dX)_k = Σ_{i≤k} H_{i−1}(X_i − X_{i−1})`.
pub fn ito_integral(h: &ProcessSeries, x: &ProcessSeries) -> Result<ProcessSeries> {
    check_aligned(h, x)?;
    ProcessSeries::cumulative(&x.times, h.values.iter().zip(x.increments()).map(|(hv, dx)| hv * dx))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DoleansMode {
    /// `Π (1 + ΔX)`: the exactly self-financing discrete wealth.
    #[default]
    Product,
    /// `exp(X − X_0 − ½[X])`.
    Exponential,
}

/// Doléans exponential `ℰ(X)`, starting at 1.
pub fn doleans_exp(x: &ProcessSeries, mode: DoleansMode) -> Result<ProcessSeries> {
    match mode {
        DoleansMode::Product => {
            let mut values = Vec::with_capacity(x.len());
            let mut acc = 1.0;
            values.push(acc);
            for (k, dx) in x.increments().enumerate() {
                let factor = 1.0 + dx;
                if factor <= 0.0 {
                    return Err(Error::domain(format!(
                        "product-mode Doléans exponential: 1 + ΔX = {factor} at index {}",
                        k + 1
                    )));
                }
                acc *= factor;
                values.push(acc);
            }
            ProcessSeries::new(x.times.clone(), values)
        }
        DoleansMode::Exponential => {
            let qv = quadratic_variation(x);
            let x0 = x.first();
            let values = x
                .values
                .iter()
                .zip(&qv.values)
                .map(|(v, q)| (v - x0 - 0.5 * q).exp())
                .collect();
            ProcessSeries::new(x.times.clone(), values)
        }
    }
}

/// Doléans logarithm `ℒ(Y) = ∫ dY / Y` as left-point sums.
pub fn doleans_log(y: &ProcessSeries) -> Result<ProcessSeries> {
    check_positive(y)?;
    ProcessSeries::cumulative(&y.times, y.values.windows(2).map(|w| (w[1] - w[0]) / w[0]))
}

fn check_positive(y: &ProcessSeries) -> Result<()> {
    match y.values.iter().position(|&v| v <= 0.0) {
        Some(k) => Err(Error::domain(format!(
            "process must be strictly positive, got {} at index {k}",
            y.values[k]
        ))),
        None => Ok(()),
    }
}

fn log_series(y: &ProcessSeries) -> Result<ProcessSeries> {
    check_positive(y)?;
    y.map(f64::ln)
}

/// `max_t |[ℒ(Y)]_t − [ln Y]_t|`.
pub fn bracket_log_identity(y: &ProcessSeries) -> Result<f64> {
    let bracket_l = quadratic_variation(&doleans_log(y)?);
    let bracket_ln = quadratic_variation(&log_series(y)?);
    bracket_l.max_abs_diff(&bracket_ln)
}

/// `max_t |ℰ_prod(X) − ℰ_exp(X)| / ℰ_exp(X)`.
pub fn exponential_identity_residual(x: &ProcessSeries) -> Result<f64> {
    let product = doleans_exp(x, DoleansMode::Product)?;
    let exponential = doleans_exp(x, DoleansMode::Exponential)?;
    Ok(product
        .values
        .iter()
        .zip(&exponential.values)
        .map(|(p, e)| ((p - e) / e).abs())
        .fold(0.0, f64::max))
}

/// `max_t |ℒ(Y)_t − ln(Y_t/Y_0) − ½[ln Y]_t|`.
pub fn log_identity_residual(y: &ProcessSeries) -> Result<f64> {
    let l = doleans_log(y)?;
    let ln_y = log_series(y)?;
    let bracket = quadratic_variation(&ln_y);
    let ln0 = ln_y.first();
    Ok(l.values
        .iter()
        .zip(&ln_y.values)
        .zip(&bracket.values)
        .map(|((lv, lnv), q)| (lv - (lnv - ln0) - 0.5 * q).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64]) -> ProcessSeries {
        let times = (0..values.len()).map(|k| k as f64).collect();
        ProcessSeries::new(times, values.to_vec()).unwrap()
    }

    fn pseudo_random(n: usize, seed: u64) -> ProcessSeries {
        let mut state = seed;
        let mut v = 0.0;
        let values = (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                v += ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.1;
                v
            })
            .collect::<Vec<_>>();
        series(&values)
    }

    #[test]
    fn qv_of_constant_is_zero() {
        let qv = quadratic_variation(&series(&[3.0; 5]));
        assert!(qv.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn qv_of_unit_zigzag() {
        let qv = quadratic_variation(&series(&[0.0, 1.0, 0.0, 1.0]));
        assert_eq!(qv.values(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn qv_of_linear_series_vanishes_under_refinement() {
        // X_k = k h on N steps with N h = 1: [X]_end = N h² = h.
        for n in [8usize, 64, 512] {
            let h = 1.0 / n as f64;
            let x = series(&(0..=n).map(|k| k as f64 * h).collect::<Vec<_>>());
            let end = quadratic_variation(&x).last();
            assert!((end - n as f64 * h * h).abs() < 1e-12);
        }
    }

    #[test]
    fn covariation_identities() {
        let x = pseudo_random(200, 1);
        let y = pseudo_random(200, 2);
        let qv = quadratic_variation(&x);
        assert!(covariation(&x, &x).unwrap().max_abs_diff(&qv).unwrap() < 1e-15);
        let neg = x.map(|v| -v).unwrap();
        let c = covariation(&x, &neg).unwrap();
        assert!(c
            .combine(1.0, &qv, 1.0)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.abs() < 1e-15));
        // polarization
        let sum = x.combine(1.0, &y, 1.0).unwrap();
        let diff = x.combine(1.0, &y, -1.0).unwrap();
        let polar = quadratic_variation(&sum)
            .combine(0.25, &quadratic_variation(&diff), -0.25)
            .unwrap();
        assert!(polar.max_abs_diff(&covariation(&x, &y).unwrap()).unwrap() < 1e-12);
        assert!(covariation(&x, &y).unwrap() == covariation(&y, &x).unwrap());
    }

    #[test]
    fn covariation_rejects_mismatched_levels() {
        let err = covariation(&pseudo_random(10, 1), &pseudo_random(11, 1)).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { left: 10, right: 11 }));
        assert!(ito_integral(&pseudo_random(3, 1), &pseudo_random(4, 1)).is_err());
    }

    #[test]
    fn integral_of_constants_telescopes() {
        let x = pseudo_random(50, 3);
        let one = ProcessSeries::constant(x.times(), 1.0);
        let i = ito_integral(&one, &x).unwrap();
        for (iv, xv) in i.values().iter().zip(x.values()) {
            assert!((iv - (xv - x.first())).abs() < 1e-14);
        }
        let c = ProcessSeries::constant(x.times(), -2.5);
        let i = ito_integral(&c, &x).unwrap();
        for (iv, xv) in i.values().iter().zip(x.values()) {
            assert!((iv + 2.5 * (xv - x.first())).abs() < 1e-13);
        }
    }

    #[test]
    fn discrete_ito_identity_is_exact() {
        let x = pseudo_random(1000, 4);
        let i = ito_integral(&x, &x).unwrap();
        let qv = quadratic_variation(&x);
        let x0 = x.first();
        for k in 0..x.len() {
            let rhs = 0.5 * (x.values()[k].powi(2) - x0 * x0 - qv.values()[k]);
            assert!((i.values()[k] - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn doleans_of_zero_is_one() {
        let z = series(&[0.0; 6]);
        for mode in [DoleansMode::Product, DoleansMode::Exponential] {
            assert!(doleans_exp(&z, mode).unwrap().values().iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn product_mode_rejects_wipeout() {
        assert!(doleans_exp(&series(&[0.0, -1.0]), DoleansMode::Product).is_err());
        assert!(doleans_exp(&series(&[0.0, -1.0]), DoleansMode::Exponential).is_ok());
    }

    #[test]
    fn log_then_exp_round_trips() {
        let y = pseudo_random(300, 5).map(|v| 2.0 + v).unwrap();
        let back = doleans_exp(&doleans_log(&y).unwrap(), DoleansMode::Product).unwrap();
        for (b, yv) in back.values().iter().zip(y.values()) {
            assert!((b * y.first() - yv).abs() < 1e-12);
        }
    }

    #[test]
    fn doleans_log_of_constant_is_zero() {
        let y = series(&[4.0; 7]);
        assert!(doleans_log(&y).unwrap().values().iter().all(|&v| v == 0.0));
        assert_eq!(bracket_log_identity(&y).unwrap(), 0.0);
        assert!(doleans_log(&series(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn smooth_process_identities_on_fine_grid() {
        let n = 1 << 14;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let x = ProcessSeries::new(
            times.clone(),
            times.iter().map(|t| 0.3 * (std::f64::consts::TAU * t).sin()).collect(),
        )
        .unwrap();
        let prod = doleans_exp(&x, DoleansMode::Product).unwrap();
        let exact = x.map(|v| v.exp()).unwrap();
        assert!(prod.max_abs_diff(&exact).unwrap() < 1e-4);
        let y = x.map(|v| 1.5 + v).unwrap();
        assert!(bracket_log_identity(&y).unwrap() < 1e-6);
    }
}
