//! Sampled market-weight paths, dyadic partition sequences, CSV ingestion and
//! synthetic path generation.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::itocalc::ProcessSeries;

/// Rows whose weights sum further than this from 1 are rejected on ingestion.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Smallest admissible market weight.
pub const MIN_WEIGHT: f64 = 1e-12;

/// Market weights `μ_j(t_k)` on a strictly increasing time grid.
///
/// Weights are stored row-major (`len × assets`); every row lies in the open
/// simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightPath {
    times: Vec<f64>,
    weights: Vec<f64>,
    assets: usize,
}

impl WeightPath {
    /// Validates a grid of weight rows. Rows within [`ROW_SUM_TOLERANCE`] of 1
    /// are renormalized; anything else is a domain error.
    pub fn new(times: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        if times.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: times.len(),
                right: rows.len(),
            });
        }
        if times.len() < 2 {
            return Err(Error::domain("a weight path needs at least two time points"));
        }
        check_times(&times)?;
        let assets = rows[0].len();
        if assets < 2 {
            return Err(Error::domain(format!("need at least 2 assets, got {assets}")));
        }
        let mut weights = Vec::with_capacity(rows.len() * assets);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != assets {
                return Err(Error::LengthMismatch {
                    left: assets,
                    right: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|w| !w.is_finite() || *w < MIN_WEIGHT) {
                return Err(Error::domain(format!(
                    "weight {} of asset {} at index {k} is outside the open simplex",
                    row[j],
                    j + 1
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::domain(format!("weights at index {k} sum to {sum}, not 1")));
            }
            // Leave rows already summing to 1 up to rounding untouched so that
            // written paths re-ingest bit for bit.
            if (sum - 1.0).abs() <= 4.0 * f64::EPSILON {
                weights.extend_from_slice(row);
            } else {
                weights.extend(row.iter().map(|w| w / sum));
            }
        }
        Ok(WeightPath { times, weights, assets })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn assets(&self) -> usize {
        self.assets
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The weight vector `μ(t_k)`.
    pub fn weights_at(&self, k: usize) -> &[f64] {
        &self.weights[k * self.assets..(k + 1) * self.assets]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.weights.chunks_exact(self.assets)
    }

    /// The coordinate process `μ_j`.
    pub fn component(&self, j: usize) -> ProcessSeries {
        let values = self.rows().map(|row| row[j]).collect();
        ProcessSeries::from_parts(self.times.clone(), values)
    }

    /// The coordinate process `ln μ_j`.
    pub fn log_component(&self, j: usize) -> ProcessSeries {
        let values = self.rows().map(|row| row[j].ln()).collect();
        ProcessSeries::from_parts(self.times.clone(), values)
    }

    /// `Σ_j [μ_j]` along this grid.
    pub fn total_quadratic_variation(&self) -> ProcessSeries {
        let steps = self
            .rows()
            .zip(self.rows().skip(1))
            .map(|(prev, next)| prev.iter().zip(next).map(|(a, b)| (b - a) * (b - a)).sum::<f64>());
        ProcessSeries::cumulative(&self.times, steps).expect("finite weights")
    }

    /// `[μ_j](t_end)` for every asset.
    pub fn quadratic_variation_per_asset(&self) -> Vec<f64> {
        let mut qv = vec![0.0; self.assets];
        for (prev, next) in self.rows().zip(self.rows().skip(1)) {
            for (q, (a, b)) in qv.iter_mut().zip(prev.iter().zip(next)) {
                *q += (b - a) * (b - a);
            }
        }
        qv
    }

    /// The path restricted to a strictly increasing subset of grid indices.
    pub fn subsample(&self, indices: &[usize]) -> Result<WeightPath> {
        if indices.len() < 2 {
            return Err(Error::domain("a sub-grid needs at least two points"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("sub-grid indices must be strictly increasing"));
        }
        if let Some(&bad) = indices.iter().find(|&&k| k >= self.len()) {
            return Err(Error::domain(format!(
                "sub-grid index {bad} out of range for a path of length {}",
                self.len()
            )));
        }
        let mut weights = Vec::with_capacity(indices.len() * self.assets);
        for &k in indices {
            weights.extend_from_slice(self.weights_at(k));
        }
        Ok(WeightPath {
            times: indices.iter().map(|&k| self.times[k]).collect(),
            weights,
            assets: self.assets,
        })
    }

    /// Reads the weight or capitalization CSV format (see [`read_csv`]).
    pub fn from_csv_reader<R: Read>(reader: R, source: &str) -> Result<WeightPath> {
        read_csv_from(reader, source)
    }

    /// Writes `time,mu1,...,muJ` with shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec!["time".to_string()];
        header.extend((1..=self.assets).map(|j| format!("mu{j}")));
        out.write_record(&header)?;
        let mut record = Vec::with_capacity(self.assets + 1);
        for (k, row) in self.rows().enumerate() {
            record.clear();
            record.push(self.times[k].to_string());
            record.extend(row.iter().map(|w| w.to_string()));
            out.write_record(&record)?;
        }
        out.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(k) = times.iter().position(|t| !t.is_finite()) {
        return Err(Error::domain(format!("non-finite time at index {k}")));
    }
    if let Some(k) = times.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::domain(format!(
            "times must be strictly increasing (index {} -> {})",
            k,
            k + 1
        )));
    }
    Ok(())
}

/// `μ_j = S_j / Σ_k S_k` at every time.
pub fn weights_from_caps(times: Vec<f64>, caps: &[Vec<f64>]) -> Result<WeightPath> {
    if caps.len() < 2 {
        return Err(Error::domain("capitalization data needs at least two rows"));
    }
    let mut rows = Vec::with_capacity(caps.len());
    for (k, row) in caps.iter().enumerate() {
        if let Some(j) = row.iter().position(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::domain(format!(
                "capitalization {} of asset {} at index {k} must be positive and finite",
                row[j],
                j + 1
            )));
        }
        let total: f64 = row.iter().sum();
        rows.push(row.iter().map(|s| s / total).collect::<Vec<_>>());
    }
    WeightPath::new(times, &rows)
}

/// A nested family of dyadic sub-grids of a path with `2^m + 1` samples.
///
/// Level `n` (1-based) keeps every `2^(m−n)`-th index, so level `m` is the full
/// grid.
#[derive(Clone, Debug)]
pub struct PartitionSequence<'a> {
    base: &'a WeightPath,
    exponent: u32,
    levels: Vec<Vec<usize>>,
}

impl<'a> PartitionSequence<'a> {
    pub fn base(&self) -> &'a WeightPath {
        self.base
    }

    /// `m` such that the base grid has `2^m + 1` points.
    pub fn grid_exponent(&self) -> u32 {
        self.exponent
    }

    /// Level numbers held by this sequence, coarsest first.
    pub fn level_numbers(&self) -> impl Iterator<Item = u32> + '_ {
        1..=self.levels.len() as u32
    }

    pub fn depth(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn finest_level(&self) -> u32 {
        self.depth()
    }

    /// Grid indices of level `n`.
    pub fn indices(&self, n: u32) -> Result<&[usize]> {
        if n == 0 || n as usize > self.levels.len() {
            return Err(Error::domain(format!(
                "partition level {n} not in 1..={}",
                self.levels.len()
            )));
        }
        Ok(&self.levels[n as usize - 1])
    }

    /// The base path restricted to level `n`.
    pub fn level_path(&self, n: u32) -> Result<WeightPath> {
        self.base.subsample(self.indices(n)?)
    }
}

/// Builds dyadic levels `1..=min(depth, m)` for a path of `2^m + 1` samples.
pub fn dyadic_partitions(path: &WeightPath, depth: u32) -> Result<PartitionSequence<'_>> {
    if depth < 1 {
        return Err(Error::domain("partition depth must be at least 1"));
    }
    let steps = path.len() - 1;
    if !steps.is_power_of_two() || steps < 2 {
        return Err(Error::domain(format!(
            "dyadic partitioning needs 2^m + 1 grid points with m >= 1, got {}",
            path.len()
        )));
    }
    let exponent = steps.trailing_zeros();
    let depth = depth.min(exponent);
    let levels = (1..=depth)
        .map(|n| {
            let stride = 1usize << (exponent - n);
            (0..=steps).step_by(stride).collect()
        })
        .collect();
    Ok(PartitionSequence {
        base: path,
        exponent,
        levels,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathModel {
    /// Independent geometric Brownian motions for the capitalizations.
    Gbm,
    /// Log-capitalizations move by `±σ·√h` coin flips.
    RoughWalk,
    /// Smooth sinusoidal log-capitalizations; zero quadratic variation in the limit.
    Deterministic,
}

impl std::str::FromStr for PathModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gbm" => Ok(PathModel::Gbm),
            "roughwalk" => Ok(PathModel::RoughWalk),
            "deterministic" => Ok(PathModel::Deterministic),
            other => Err(Error::domain(format!("unknown path model {other:?}"))),
        }
    }
}

/// Parameters for [`simulate_path`].
#[derive(Clone, Debug, PartialEq)]
pub struct PathGenSpec {
    pub model: PathModel,
    pub assets: usize,
    /// Number of steps; must be a power of two so the grid is dyadic.
    pub steps: usize,
    pub step_size: f64,
    /// Per-asset volatility (amplitude for the deterministic model).
    pub volatilities: Vec<f64>,
    pub drifts: Vec<f64>,
    pub seed: u64,
    /// Independent stream index, e.g. the path number in a batch.
    pub stream: u64,
}

impl PathGenSpec {
    /// Same volatility and zero drift for every asset.
    pub fn uniform(model: PathModel, assets: usize, steps: usize, step_size: f64, vol: f64, seed: u64) -> Self {
        PathGenSpec {
            model,
            assets,
            steps,
            step_size,
            volatilities: vec![vol; assets],
            drifts: vec![0.0; assets],
            seed,
            stream: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.assets < 2 {
            return Err(Error::domain("need at least 2 assets"));
        }
        if self.steps < 1 || !self.steps.is_power_of_two() {
            return Err(Error::domain(format!(
                "steps must be a positive power of two, got {}",
                self.steps
            )));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::domain("step size must be positive and finite"));
        }
        for (name, v) in [("volatility", &self.volatilities), ("drift", &self.drifts)] {
            if v.len() != self.assets {
                return Err(Error::domain(format!(
                    "{name} vector has {} entries for {} assets",
                    v.len(),
                    self.assets
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::domain(format!("{name} entries must be finite")));
            }
        }
        if self.volatilities.iter().any(|&s| s < 0.0) {
            return Err(Error::domain("volatilities must be nonnegative"));
        }
        Ok(())
    }
}

/// Generates a weight path of `steps + 1` samples, deterministic in
/// `(seed, stream)`. All capitalizations start equal.
pub fn simulate_path(spec: &PathGenSpec) -> Result<WeightPath> {
    spec.validate()?;
    let j = spec.assets;
    let h = spec.step_size;
    let sqrt_h = h.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(spec.stream);

    let horizon = spec.steps as f64 * h;
    let mut log_caps = vec![0.0; j];
    let mut times = Vec::with_capacity(spec.steps + 1);
    let mut rows = Vec::with_capacity(spec.steps + 1);
    for k in 0..=spec.steps {
        let t = k as f64 * h;
        match spec.model {
            PathModel::Gbm if k > 0 => {
                for (x, (&sigma, &drift)) in log_caps.iter_mut().zip(spec.volatilities.iter().zip(&spec.drifts)) {
                    let z: f64 = rng.sample(StandardNormal);
                    *x += (drift - 0.5 * sigma * sigma) * h + sigma * sqrt_h * z;
                }
            }
            PathModel::RoughWalk if k > 0 => {
                for (x, (&sigma, &drift)) in log_caps.iter_mut().zip(spec.volatilities.iter().zip(&spec.drifts)) {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    *x += drift * h + sign * sigma * sqrt_h;
                }
            }
            PathModel::Deterministic => {
                for (i, x) in log_caps.iter_mut().enumerate() {
                    let phase = std::f64::consts::TAU * (i + 1) as f64 * t / horizon + i as f64;
                    *x = spec.volatilities[i] * (phase.sin() - (i as f64).sin()) + spec.drifts[i] * t;
                }
            }
            _ => {}
        }
        times.push(t);
        rows.push(normalize_log_caps(&log_caps));
    }
    WeightPath::new(times, &rows)
}

fn normalize_log_caps(log_caps: &[f64]) -> Vec<f64> {
    let max = log_caps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let caps: Vec<f64> = log_caps.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = caps.iter().sum();
    caps.iter().map(|c| c / total).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CsvKind {
    Caps,
    Weights,
}

/// Reads `time,s1,...,sJ` (capitalizations) or `time,mu1,...,muJ` (weights).
pub fn read_csv(path: impl AsRef<Path>) -> Result<WeightPath> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file, &path.display().to_string())
}

fn read_csv_from<R: Read>(reader: R, source: &str) -> Result<WeightPath> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let parse_err = |line: u64, message: String| Error::Parse {
        file: source.to_string(),
        line,
        message,
    };
    let kind = classify_header(&header).map_err(|m| parse_err(1, m))?;
    let assets = header.len() - 1;

    let mut times = Vec::new();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != assets + 1 {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", assets + 1, record.len()),
            ));
        }
        let mut values = Vec::with_capacity(assets + 1);
        for field in record.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("not a number: {field:?}")))?;
            values.push(v);
        }
        times.push(values[0]);
        rows.push(values[1..].to_vec());
    }
    match kind {
        CsvKind::Caps => weights_from_caps(times, &rows),
        CsvKind::Weights => WeightPath::new(times, &rows),
    }
}

fn classify_header(header: &csv::StringRecord) -> std::result::Result<CsvKind, String> {
    if header.len() < 3 || &header[0] != "time" {
        return Err("header must be time,s1,...,sJ or time,mu1,...,muJ with J >= 2".into());
    }
    let matches = |prefix: &str| (1..header.len()).all(|j| header[j] == format!("{prefix}{j}"));
    if matches("s") {
        Ok(CsvKind::Caps)
    } else if matches("mu") {
        Ok(CsvKind::Weights)
    } else {
        Err(format!("unrecognised header {:?}", header.iter().collect::<Vec<_>>()))
    }
}
