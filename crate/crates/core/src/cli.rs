//! `pathspt` command line: simulate or ingest weight paths, verify the master
//! equation and its corollaries, and compare the stopping-time bounds.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::martingale::{check_a_grid, compare_at_tau_with, log_spaced_grid, ComparisonReport};
use crate::master::{
    corollary_check, max_quadratic_leverage, verify_master, Generator, GeneratorKind, BOUND_TOL, DRAWDOWN_TOL,
    LEVERAGE_CAP,
};
use crate::pathkit::{dyadic_partitions, read_csv, simulate_path, PathGenSpec, PathModel, WeightPath};
use crate::plot::comparison_svg;

#[derive(Debug, Parser)]
#[command(
    name = "pathspt",
    version,
    about = "Pathwise stochastic portfolio theory on sampled weight paths"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a market-weight path and write it as CSV.
    Simulate(SimulateArgs),
    /// Check the master equation and the generator's corollaries across partition levels.
    Verify(VerifyArgs),
    /// Compare portfolio wealth and the quadratic martingale at the QV stopping times.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Gbm,
    Roughwalk,
    Deterministic,
}

impl From<ModelArg> for PathModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Gbm => PathModel::Gbm,
            ModelArg::Roughwalk => PathModel::RoughWalk,
            ModelArg::Deterministic => PathModel::Deterministic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    Quadratic,
    Entropy,
    Diversity,
}

impl From<GeneratorArg> for GeneratorKind {
    fn from(g: GeneratorArg) -> Self {
        match g {
            GeneratorArg::Quadratic => GeneratorKind::Quadratic,
            GeneratorArg::Entropy => GeneratorKind::Entropy,
            GeneratorArg::Diversity => GeneratorKind::Diversity,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Clone, Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "gbm")]
    pub model: ModelArg,
    /// Number of assets.
    #[arg(long, default_value_t = 3)]
    pub j: usize,
    /// Number of steps (a power of two).
    #[arg(long, default_value_t = 4096)]
    pub steps: usize,
    /// Time horizon; the step size is horizon / steps.
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Volatilities, one value or one per asset.
    #[arg(long, value_delimiter = ',', default_value = "0.3", allow_negative_numbers = true)]
    pub vol: Vec<f64>,
    /// Drifts, one value or one per asset.
    #[arg(long, value_delimiter = ',', default_value = "0", allow_negative_numbers = true)]
    pub drift: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, Args)]
pub struct InputArgs {
    /// Read the path from a CSV file instead of simulating one.
    #[arg(long, conflicts_with_all = ["model", "j", "steps", "horizon", "vol", "drift", "seed"])]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Clone, Debug, Args)]
pub struct GeneratorArgs {
    #[arg(long, value_enum, default_value = "quadratic")]
    pub generator: GeneratorArg,
    /// Exponent of the diversity generator.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
}

#[derive(Clone, Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// Number of dyadic partition levels.
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, default_value_t = 0.05)]
    pub a_min: f64,
    #[arg(long, default_value_t = 6.0)]
    pub a_max: f64,
    #[arg(long, default_value_t = 64)]
    pub a_count: usize,
    #[arg(long, value_enum, default_value = "log")]
    pub a_spacing: Spacing,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Output formats.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,svg")]
    pub format: Vec<Format>,
}

/// Result of a command whose files were written. Failed assertions make the
/// process exit nonzero.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl Outcome {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            self.notes.push(format!("ok: {name}: {detail}"));
        } else {
            self.failures.push(format!("{name}: {detail}"));
        }
    }
}

fn broadcast(name: &str, values: &[f64], assets: usize) -> Result<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; assets]),
        n if n == assets => Ok(values.to_vec()),
        n => Err(Error::Domain(format!("--{name} has {n} values for {assets} assets"))),
    }
}

impl ModelArgs {
    pub fn spec(&self) -> Result<PathGenSpec> {
        if self.steps == 0 {
            return Err(Error::Domain("--steps must be positive".into()));
        }
        Ok(PathGenSpec {
            model: self.model.into(),
            assets: self.j,
            steps: self.steps,
            step_size: self.horizon / self.steps as f64,
            volatilities: broadcast("vol", &self.vol, self.j)?,
            drifts: broadcast("drift", &self.drift, self.j)?,
            seed: self.seed,
            stream: 0,
        })
    }
}

impl InputArgs {
    pub fn load(&self) -> Result<WeightPath> {
        match &self.input {
            Some(file) => read_csv(file),
            None => simulate_path(&self.model.spec()?),
        }
    }
}

impl GeneratorArgs {
    pub fn generator(&self) -> Result<Generator> {
        Generator::from_kind(self.generator.into(), self.p)
    }
}

impl CompareArgs {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let grid = match self.a_spacing {
            Spacing::Log => log_spaced_grid(self.a_min, self.a_max, self.a_count)?,
            Spacing::Linear => {
                if !(self.a_min > 0.0 && self.a_max > self.a_min) || self.a_count < 2 {
                    return Err(Error::Domain(format!(
                        "A-grid needs 0 < min < max and at least 2 points (got [{}, {}], {})",
                        self.a_min, self.a_max, self.a_count
                    )));
                }
                let step = (self.a_max - self.a_min) / (self.a_count - 1) as f64;
                let mut g: Vec<f64> = (0..self.a_count).map(|i| self.a_min + step * i as f64).collect();
                g[self.a_count - 1] = self.a_max;
                g
            }
        };
        check_a_grid(&grid)?;
        Ok(grid)
    }
}

/// Writes through a temporary file in `dir` and renames it into place.
fn write_atomic(dir: &Path, name: &str, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<PathBuf> {
    let target = dir.join(name);
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush().map_err(|e| Error::Io {
            path: target.clone(),
            source: e,
        })?;
    }
    tmp.persist(&target).map_err(|e| Error::Io {
        path: target.clone(),
        source: e.error,
    })?;
    Ok(target)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_rows(w: &mut dyn Write, header: &str, rows: impl Iterator<Item = Vec<String>>) -> std::io::Result<()> {
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Outcome> {
    let path = simulate_path(&args.model.spec()?)?;
    prepare_dir(&args.out)?;
    let file = write_atomic(&args.out, "path.csv", |w| path.write_csv(w))?;
    let qv = path.quadratic_variation_per_asset();
    let mut outcome = Outcome {
        written: vec![file],
        ..Outcome::default()
    };
    outcome
        .notes
        .push(format!("J = {}, steps = {}", path.assets(), path.len() - 1));
    for (j, q) in qv.iter().enumerate() {
        outcome.notes.push(format!("[mu{}] = {q}", j + 1));
    }
    Ok(outcome)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Outcome> {
    let path = args.input.load()?;
    let gen = args.generator.generator()?;
    let partitions = dyadic_partitions(&path, args.depth)?;
    let report = verify_master(&gen, &partitions)?;
    let corollary = corollary_check(&gen, &path)?;
    prepare_dir(&args.out)?;
    let mut outcome = Outcome::default();

    let residual = report.residual();
    let master = write_atomic(&args.out, "master.csv", |w| {
        write_rows(
            w,
            "time,ln_Z,ln_S_ratio,theta,residual",
            (0..residual.len()).map(|k| {
                vec![
                    residual.times()[k].to_string(),
                    report.lhs.values()[k].to_string(),
                    report.diversity_term.values()[k].to_string(),
                    report.theta.values()[k].to_string(),
                    residual.values()[k].to_string(),
                ]
            }),
        )
        .map_err(io_err(&args.out.join("master.csv")))
    })?;
    let levels = write_atomic(&args.out, "master_levels.csv", |w| {
        write_rows(
            w,
            "level,points,max_residual",
            report.levels.iter().zip(&report.residual_by_level).map(|(n, r)| {
                let points = partitions.indices(*n).map_or(0, |i| i.len());
                vec![n.to_string(), points.to_string(), r.to_string()]
            }),
        )
        .map_err(io_err(&args.out.join("master_levels.csv")))
    })?;
    let cor = write_atomic(&args.out, "corollary.csv", |w| {
        let bound = corollary.bound.as_ref();
        write_rows(
            w,
            "time,ln_Z,identity_rhs,bound_rhs",
            (0..corollary.ln_value.len()).map(|k| {
                vec![
                    corollary.ln_value.times()[k].to_string(),
                    corollary.ln_value.values()[k].to_string(),
                    corollary.identity_rhs.values()[k].to_string(),
                    bound.map_or("NA".to_string(), |b| b.rhs.values()[k].to_string()),
                ]
            }),
        )
        .map_err(io_err(&args.out.join("corollary.csv")))
    })?;
    outcome.written.extend([master, levels, cor]);

    outcome.check(
        "master residual decreases under refinement",
        report.converges(),
        format!("max residual by level {:?}", report.residual_by_level),
    );
    outcome
        .notes
        .push(format!("corollary identity residual {}", corollary.identity_residual));
    if let Some(b) = &corollary.bound {
        outcome.check(
            "corollary lower bound",
            corollary.bound_holds(BOUND_TOL),
            format!("min slack {} (tolerance {BOUND_TOL})", b.min_slack),
        );
    }
    if gen.kind() == GeneratorKind::Quadratic {
        outcome.check(
            "drawdown floor",
            corollary.min_value >= 0.5 * (1.0 - DRAWDOWN_TOL),
            format!("min Z = {}", corollary.min_value),
        );
        let lev = max_quadratic_leverage(&path)?;
        outcome.check("leverage cap", lev <= LEVERAGE_CAP, format!("max leverage {lev}"));
    }
    Ok(outcome)
}

fn comparison_rows(report: &ComparisonReport) -> impl Iterator<Item = Vec<String>> + '_ {
    let opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| x.to_string());
    report.rows.iter().map(move |r| {
        let tau = match r.tau {
            crate::martingale::StoppingTime::Reached { time, .. } => time.to_string(),
            crate::martingale::StoppingTime::NotReached { .. } => "NA".to_string(),
        };
        vec![
            r.a.to_string(),
            tau,
            opt(r.fernholz_value),
            opt(r.sv_value),
            r.bound_fernholz.to_string(),
            r.bound_line.to_string(),
            r.bound_appendix.to_string(),
        ]
    })
}

pub fn cmd_compare(args: &CompareArgs) -> Result<Outcome> {
    let grid = args.grid()?;
    let path = args.input.load()?;
    let gen = args.generator.generator()?;
    let report = compare_at_tau_with(&gen, &path, &grid)?;
    prepare_dir(&args.out)?;
    let mut outcome = Outcome::default();
    if args.format.contains(&Format::Csv) {
        let file = write_atomic(&args.out, "comparison.csv", |w| {
            write_rows(
                w,
                "A,tau_time_or_NA,Z_pi_at_tau,X_at_tau,bound_fernholz,bound_line,bound_appendix",
                comparison_rows(&report),
            )
            .map_err(io_err(&args.out.join("comparison.csv")))
        })?;
        outcome.written.push(file);
    }
    if args.format.contains(&Format::Svg) {
        let svg = comparison_svg(&report);
        let file = write_atomic(&args.out, "comparison.svg", |w| {
            w.write_all(svg.as_bytes())
                .map_err(io_err(&args.out.join("comparison.svg")))
        })?;
        outcome.written.push(file);
    }

    let c = report.crossings;
    outcome.notes.push(format!(
        "crossings of ½e^(A/2) and A: {} and {}; appendix curve meets A at {}",
        c.lower, c.upper, c.appendix
    ));
    let reached = report.reached().count();
    outcome
        .notes
        .push(format!("{reached} of {} grid values reached", report.rows.len()));
    let sv_ok = report.reached().all(|r| r.sv_bound_holds() == Some(true));
    outcome.check("X(tau_A) >= A", sv_ok, format!("{reached} reached values"));
    if gen.kind() == GeneratorKind::Quadratic {
        let worst = report
            .reached()
            .filter_map(|r| r.fernholz_value.map(|z| z / r.bound_fernholz))
            .fold(f64::INFINITY, f64::min);
        let ok = report.reached().all(|r| r.fernholz_bound_holds() == Some(true));
        outcome.check("Z(tau_A) >= 0.9 * exp(A/2)/2", ok, format!("min ratio {worst}"));
        if reached > 0 {
            outcome.notes.push(format!(
                "ordering agreement: bounds {}, realised values {}",
                report.bound_ordering_agreement(),
                report.empirical_ordering_agreement()
            ));
        }
    }
    Ok(outcome)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 on success, 1 if an assertion failed, 2 on usage, input or I/O errors.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
        Ok(outcome) => {
            for note in &outcome.notes {
                println!("{note}");
            }
            for file in &outcome.written {
                println!("wrote {}", file.display());
            }
            for failure in &outcome.failures {
                eprintln!("assertion failed: {failure}");
            }
            if outcome.failures.is_empty() {
                0
            } else {
                1
            }
        }
    }
}
