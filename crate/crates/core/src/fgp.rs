//! Portfolios as maps on the simplex, their value processes relative to the
//! market, and the excess growth term.

use crate::error::{Error, Result};
use crate::itocalc::{covariation, ito_integral, quadratic_variation, ProcessSeries};
use crate::pathkit::{PartitionSequence, WeightPath};

/// A Markovian portfolio: current market weights in, wealth fractions out.
///
/// Implementations must be pure; they are evaluated concurrently.
pub trait Portfolio: Send + Sync {
    /// Writes `π(x)` into `out`. `x` lies in the open simplex.
    fn weights(&self, x: &[f64], out: &mut [f64]) -> Result<()>;
}

impl<P: Portfolio + ?Sized> Portfolio for &P {
    fn weights(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).weights(x, out)
    }
}

/// `π = μ`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MarketPortfolio;

impl Portfolio for MarketPortfolio {
    fn weights(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(x);
        Ok(())
    }
}

/// A fixed allocation, rebalanced at every grid point.
#[derive(Clone, Debug)]
pub struct ConstantPortfolio {
    weights: Vec<f64>,
}

impl ConstantPortfolio {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_closed_simplex(&weights)?;
        Ok(ConstantPortfolio { weights })
    }

    pub fn equal(assets: usize) -> Self {
        ConstantPortfolio {
            weights: vec![1.0 / assets as f64; assets],
        }
    }

    /// Everything in asset `j` (0-based).
    pub fn single(assets: usize, j: usize) -> Self {
        let mut weights = vec![0.0; assets];
        weights[j] = 1.0;
        ConstantPortfolio { weights }
    }
}

impl Portfolio for ConstantPortfolio {
    fn weights(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.weights.len() {
            return Err(Error::LengthMismatch {
                left: self.weights.len(),
                right: x.len(),
            });
        }
        out.copy_from_slice(&self.weights);
        Ok(())
    }
}

/// Wraps a closure `x ↦ π(x)`.
pub struct FnPortfolio<F>(pub F);

impl<F> Portfolio for FnPortfolio<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn weights(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let w = (self.0)(x);
        if w.len() != out.len() {
            return Err(Error::LengthMismatch {
                left: out.len(),
                right: w.len(),
            });
        }
        out.copy_from_slice(&w);
        Ok(())
    }
}

/// Components in `[0, 1]` summing to 1 within `1e-12`.
pub fn check_closed_simplex(w: &[f64]) -> Result<()> {
    if w.iter().any(|v| !(v.is_finite() && (0.0..=1.0).contains(v))) {
        return Err(Error::domain(format!("portfolio weights {w:?} leave [0, 1]")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("portfolio weights sum to {sum}")));
    }
    Ok(())
}

/// `π(μ(t_k))` for every grid point, row-major.
pub fn weights_along<P: Portfolio + ?Sized>(pi: &P, path: &WeightPath) -> Result<Vec<f64>> {
    let j = path.assets();
    let mut out = vec![0.0; path.len() * j];
    for (row, dst) in path.rows().zip(out.chunks_exact_mut(j)) {
        pi.weights(row, dst)?;
    }
    Ok(out)
}

/// Relative value `Z_π` of `π` with the market as numéraire, as the exact
/// self-financing product `Π_k (1 + Σ_j π_j(μ_{k−1}) Δμ_{j,k} / μ_{j,k−1})`.
pub fn value_process<P: Portfolio + ?Sized>(pi: &P, path: &WeightPath) -> Result<ProcessSeries> {
    let j = path.assets();
    let pis = weights_along(pi, path)?;
    let mut values = Vec::with_capacity(path.len());
    let mut wealth = 1.0;
    values.push(wealth);
    for k in 1..path.len() {
        let prev = path.weights_at(k - 1);
        let next = path.weights_at(k);
        let pk = &pis[(k - 1) * j..k * j];
        let ret: f64 = (0..j).map(|i| pk[i] / prev[i] * (next[i] - prev[i])).sum();
        let factor = 1.0 + ret;
        if factor <= 0.0 || !factor.is_finite() {
            return Err(Error::WealthNonpositive {
                index: k,
                time: path.times()[k],
            });
        }
        wealth *= factor;
        values.push(wealth);
    }
    ProcessSeries::new(path.times().to_vec(), values)
}

/// `ln Z_π = naive + Γ*_π` split, with the discrete residual.
#[derive(Clone, Debug)]
pub struct LogValueDecomposition {
    pub ln_value: ProcessSeries,
    /// `Σ_j ∫ π_j(μ) d ln μ_j`.
    pub naive: ProcessSeries,
    /// `Γ*_π`.
    pub gamma: ProcessSeries,
    /// `max_t |ln Z_π − naive − Γ*_π|`.
    pub residual: f64,
}

pub fn log_value_decomposition<P: Portfolio + ?Sized>(pi: &P, path: &WeightPath) -> Result<LogValueDecomposition> {
    let ln_value = value_process(pi, path)?.map(f64::ln)?;
    let j = path.assets();
    let pis = weights_along(pi, path)?;
    let logs: Vec<ProcessSeries> = (0..j).map(|i| path.log_component(i)).collect();
    let mut naive = ProcessSeries::constant(path.times(), 0.0);
    for (i, ln_mu) in logs.iter().enumerate() {
        let h = column(&pis, j, i, path.times());
        naive = naive.combine(1.0, &ito_integral(&h, ln_mu)?, 1.0)?;
    }
    let gamma = excess_growth_from(&pis, &logs, path)?;
    let predicted = naive.combine(1.0, &gamma, 1.0)?;
    let residual = ln_value.max_abs_diff(&predicted)?;
    Ok(LogValueDecomposition {
        ln_value,
        naive,
        gamma,
        residual,
    })
}

fn column(rows: &[f64], j: usize, i: usize, times: &[f64]) -> ProcessSeries {
    ProcessSeries::from_parts(times.to_vec(), rows.iter().skip(i).step_by(j).copied().collect())
}

/// Excess growth term
/// `Γ*_π = ½ Σ_j ∫ π_j d[ln μ_j] − ½ Σ_{i,j} ∫ π_i π_j d[ln μ_i, ln μ_j]`,
/// assembled from brackets of `ln μ` on the given grid.
pub fn excess_growth_exact<P: Portfolio + ?Sized>(pi: &P, path: &WeightPath) -> Result<ProcessSeries> {
    let pis = weights_along(pi, path)?;
    let logs: Vec<ProcessSeries> = (0..path.assets()).map(|i| path.log_component(i)).collect();
    excess_growth_from(&pis, &logs, path)
}

fn excess_growth_from(pis: &[f64], logs: &[ProcessSeries], path: &WeightPath) -> Result<ProcessSeries> {
    let j = path.assets();
    let times = path.times();
    let cols: Vec<ProcessSeries> = (0..j).map(|i| column(pis, j, i, times)).collect();
    let mut gamma = ProcessSeries::constant(times, 0.0);
    for i in 0..j {
        let own = ito_integral(&cols[i], &quadratic_variation(&logs[i]))?;
        gamma = gamma.combine(1.0, &own, 0.5)?;
        for l in 0..j {
            let bracket = covariation(&logs[i], &logs[l])?;
            let prod = ProcessSeries::new(
                times.to_vec(),
                cols[i]
                    .values()
                    .iter()
                    .zip(cols[l].values())
                    .map(|(a, b)| a * b)
                    .collect(),
            )?;
            gamma = gamma.combine(1.0, &ito_integral(&prod, &bracket)?, -0.5)?;
        }
    }
    Ok(gamma)
}

/// Level-`n` approximation `Γ^{*,n}_π` built directly from log-increments.
#[derive(Clone, Debug)]
pub struct ExcessGrowthApprox {
    /// `Γ^{*,n}_π` (half of the cumulative sum).
    pub gamma: ProcessSeries,
    /// The same quantity as a cumulative `π`-weighted variance of log-returns.
    pub variance_form: ProcessSeries,
    /// `max_t |gamma − variance_form|`.
    pub variance_form_residual: f64,
    /// The variant whose first addend uses `Δμ²` instead of `(Δ ln μ)²`.
    pub linear_increment_variant: ProcessSeries,
    /// `max_t |gamma − linear_increment_variant|`.
    pub linear_increment_gap: f64,
}

pub fn excess_growth_approx<P: Portfolio + ?Sized>(pi: &P, path: &WeightPath) -> Result<ExcessGrowthApprox> {
    let j = path.assets();
    let pis = weights_along(pi, path)?;
    let mut sum = 0.0;
    let mut var_sum = 0.0;
    let mut linear_sum = 0.0;
    let mut gamma = vec![0.0];
    let mut variance = vec![0.0];
    let mut linear = vec![0.0];
    let mut dlog = vec![0.0; j];
    for k in 1..path.len() {
        let prev = path.weights_at(k - 1);
        let next = path.weights_at(k);
        let pk = &pis[(k - 1) * j..k * j];
        for i in 0..j {
            dlog[i] = next[i].ln() - prev[i].ln();
        }
        let mean: f64 = (0..j).map(|i| pk[i] * dlog[i]).sum();
        let second: f64 = (0..j).map(|i| pk[i] * dlog[i] * dlog[i]).sum();
        let second_linear: f64 = (0..j).map(|i| pk[i] * (next[i] - prev[i]).powi(2)).sum();
        let var: f64 = (0..j).map(|i| pk[i] * (dlog[i] - mean).powi(2)).sum();
        sum += second - mean * mean;
        var_sum += var;
        linear_sum += second_linear - mean * mean;
        gamma.push(0.5 * sum);
        variance.push(0.5 * var_sum);
        linear.push(0.5 * linear_sum);
    }
    let times = path.times().to_vec();
    let gamma = ProcessSeries::new(times.clone(), gamma)?;
    let variance_form = ProcessSeries::new(times.clone(), variance)?;
    let linear_increment_variant = ProcessSeries::new(times, linear)?;
    Ok(ExcessGrowthApprox {
        variance_form_residual: gamma.max_abs_diff(&variance_form)?,
        linear_increment_gap: gamma.max_abs_diff(&linear_increment_variant)?,
        gamma,
        variance_form,
        linear_increment_variant,
    })
}

/// One partition level's approximation, remembered with its base-grid indices.
#[derive(Clone, Debug)]
pub struct LevelSeries {
    pub level: u32,
    pub indices: Vec<usize>,
    pub series: ProcessSeries,
}

#[derive(Clone, Debug)]
pub struct ExcessGrowthReport {
    /// `Γ*_π` from brackets at the finest level.
    pub gamma_exact: ProcessSeries,
    pub gamma_approx_by_level: Vec<LevelSeries>,
    /// Largest `|nth form − variance form|` over all levels.
    pub variance_form_residual: f64,
    /// Largest gap between the `Δ ln μ` and `Δμ` readings over all levels.
    pub linear_increment_gap: f64,
}

impl ExcessGrowthReport {
    /// `sup_t |Γ^{*,n+1} − Γ^{*,n}|` over the times of level `n`, for each pair
    /// of successive levels.
    pub fn successive_gaps(&self) -> Vec<f64> {
        self.gamma_approx_by_level
            .windows(2)
            .map(|w| sup_gap_on_coarse(&w[0], &w[1]))
            .collect()
    }

    /// `sup_t |Γ^{*,n} − Γ^{*,finest}|` over the times of level `n`.
    pub fn gaps_to_finest(&self) -> Vec<f64> {
        let finest = self.gamma_approx_by_level.last().expect("at least one level");
        self.gamma_approx_by_level
            .iter()
            .map(|l| sup_gap_on_coarse(l, finest))
            .collect()
    }
}

/// Sup of `|coarse − fine|` on the coarse grid; levels must be nested.
pub fn sup_gap_on_coarse(coarse: &LevelSeries, fine: &LevelSeries) -> f64 {
    let mut gap: f64 = 0.0;
    let mut f = 0;
    for (c, &idx) in coarse.indices.iter().enumerate() {
        while fine.indices[f] < idx {
            f += 1;
        }
        debug_assert_eq!(fine.indices[f], idx, "levels are not nested");
        gap = gap.max((coarse.series.values()[c] - fine.series.values()[f]).abs());
    }
    gap
}

pub fn excess_growth_report<P: Portfolio + ?Sized>(
    pi: &P,
    partitions: &PartitionSequence<'_>,
) -> Result<ExcessGrowthReport> {
    let mut by_level = Vec::new();
    let mut variance_form_residual: f64 = 0.0;
    let mut linear_increment_gap: f64 = 0.0;
    for n in partitions.level_numbers() {
        let path = partitions.level_path(n)?;
        let approx = excess_growth_approx(pi, &path)?;
        variance_form_residual = variance_form_residual.max(approx.variance_form_residual);
        linear_increment_gap = linear_increment_gap.max(approx.linear_increment_gap);
        by_level.push(LevelSeries {
            level: n,
            indices: partitions.indices(n)?.to_vec(),
            series: approx.gamma,
        });
    }
    let finest = partitions.level_path(partitions.finest_level())?;
    Ok(ExcessGrowthReport {
        gamma_exact: excess_growth_exact(pi, &finest)?,
        gamma_approx_by_level: by_level,
        variance_form_residual,
        linear_increment_gap,
    })
}
