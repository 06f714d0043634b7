//! Command-line front end: `diagnose`, `operator`, `certify`, `counterexample`
//! and `verify-bounds`.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 on
//! input errors. Reports are deterministic for a fixed space file, flags and seed.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{ArgAction, Parser, Subcommand};
use serde::Serialize;

use crate::compactness::{
    build_net_certificate, covering_number, unit_ball_sample, verify_certificate, CertificateCheck,
    CertificateOutcome, FunctionFamily, ModulusConfig, ModulusFailure,
};
use crate::counterexample::{
    dichotomy_sweep, plateau_check, verify_separation, PlateauCheck, SeparationCheck, SweepRow, WitnessFamily,
    WitnessMode,
};
use crate::error::{Error, Result};
use crate::operator::{AveragingOperator, Exponent, FunctionVec};
use crate::regularity::{delta_grid, doubling_constant, inf_ball, regularity_report, sup_ball, RegularityReport};
use crate::report::{fmt_f64, to_report_string};
use crate::space::{BallIndex, IndexSet, MetricMeasureSpace};
use crate::verify::{verify_bounds, verify_bounds_with, BatteryConfig, BatteryReport};

#[derive(Debug, Parser)]
#[command(name = "avgop", version, about = "Averaging operators on finite metric measure spaces")]
pub struct Cli {
    /// Space file (JSON).
    #[arg(long, global = true)]
    pub space: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Also write a flat CSV table.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Check the triangle inequality of the distance matrix (O(n^3)).
    #[arg(long, global = true)]
    pub validate_triangle: bool,
    /// Subdivisions for delta/sigma grids.
    #[arg(long, global = true, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Doubling constant, annulus and symmetric-difference moduli, inverse-measure gaps.
    Diagnose {
        /// Scales, comma separated.
        #[arg(long = "s", required = true, value_delimiter = ',')]
        s: Vec<f64>,
        /// `all` or `ball:center:radius`.
        #[arg(long, default_value = "all")]
        subset: SubsetArg,
    },
    /// Operator statistics and optional sparse triplet export.
    Operator {
        #[arg(long = "r")]
        r: f64,
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Build and verify an epsilon-net certificate for a family's images.
    Certify {
        #[arg(long = "r")]
        r: f64,
        #[arg(long = "p")]
        p: Exponent,
        #[arg(long)]
        epsilon: f64,
        /// A family file `{"functions": [...]}` or `sample:count:seed`.
        #[arg(long, default_value = "sample:50:0")]
        family: FamilyArg,
        #[arg(long, default_value = "all")]
        subset: SubsetArg,
        /// Include the full certificate in the report.
        #[arg(long)]
        full: bool,
    },
    /// Separated witness families and their pairwise image distances.
    Counterexample {
        #[arg(long = "s")]
        s: f64,
        #[arg(long, default_value = "l1")]
        mode: WitnessMode,
        /// Unit-grid lengths to sweep instead of using `--space`.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<usize>>,
        /// Include the separation matrix.
        #[arg(long)]
        full: bool,
    },
    /// Randomized inequality battery.
    VerifyBounds {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubsetArg {
    All,
    Ball { center: usize, radius: f64 },
}

impl FromStr for SubsetArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(SubsetArg::All);
        }
        let bad = || Error::arg(format!("subset must be `all` or `ball:center:radius`, got {s:?}"));
        match s.split(':').collect::<Vec<_>>().as_slice() {
            ["ball", c, r] => Ok(SubsetArg::Ball {
                center: c.parse().map_err(|_| bad())?,
                radius: r.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

impl SubsetArg {
    fn resolve(self, space: &MetricMeasureSpace) -> Result<IndexSet> {
        match self {
            SubsetArg::All => Ok(space.all()),
            SubsetArg::Ball { center, radius } => {
                if center >= space.len() {
                    return Err(Error::IndexOutOfRange {
                        index: center,
                        n: space.len(),
                    });
                }
                if !(radius >= 0.0) {
                    return Err(Error::arg(format!("subset radius must be nonnegative, got {radius}")));
                }
                Ok(space.ball(center, radius))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyArg {
    File(PathBuf),
    Sample { count: usize, seed: u64 },
}

impl FromStr for FamilyArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("sample:") {
            Some(rest) => {
                let bad = || Error::arg(format!("family sample must be `sample:count:seed`, got {s:?}"));
                let (count, seed) = rest.split_once(':').ok_or_else(bad)?;
                Ok(FamilyArg::Sample {
                    count: count.parse().map_err(|_| bad())?,
                    seed: seed.parse().map_err(|_| bad())?,
                })
            }
            None => Ok(FamilyArg::File(PathBuf::from(s))),
        }
    }
}

/// Everything a run needs. Built from [`Cli`]; `inject_fault` is only
/// reachable from code and corrupts the operator in `verify-bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub space_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub csv_path: Option<PathBuf>,
    pub validate_triangle: bool,
    pub grid: usize,
    pub seed: u64,
    pub verbosity: u8,
    pub inject_fault: bool,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        Self {
            command: cli.command,
            space_path: cli.space,
            output_path: cli.output,
            csv_path: cli.csv,
            validate_triangle: cli.validate_triangle,
            grid: cli.grid,
            seed: cli.seed,
            verbosity: cli.verbose,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    CheckFailed,
}

impl Status {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::CheckFailed
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::CheckFailed => 1,
        }
    }
}

/// The rendered outputs of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub status: Status,
    pub report: String,
    pub csv: Option<String>,
}

#[derive(Serialize)]
struct SpaceSummary {
    n: usize,
    total_mass: f64,
    diameter: f64,
}

impl SpaceSummary {
    fn of(space: &MetricMeasureSpace) -> Self {
        Self {
            n: space.len(),
            total_mass: space.total_mass(),
            diameter: space.diameter(),
        }
    }
}

#[derive(Serialize)]
struct Document<T: Serialize> {
    command: &'static str,
    seed: u64,
    grid: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    space: Option<SpaceSummary>,
    result: T,
    pass: bool,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn render(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields"))
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn load_space(config: &RunConfig) -> Result<MetricMeasureSpace> {
    let path = config
        .space_path
        .as_ref()
        .ok_or_else(|| Error::arg("--space is required for this command"))?;
    let space = MetricMeasureSpace::load(path)?;
    if config.validate_triangle {
        space.validate_triangle()?;
    }
    Ok(space)
}

fn finish<T: Serialize>(
    config: &RunConfig,
    command: &'static str,
    space: Option<&MetricMeasureSpace>,
    result: T,
    pass: bool,
    table: Option<Table>,
) -> Result<RunOutput> {
    let report = to_report_string(&Document {
        command,
        seed: config.seed,
        grid: config.grid,
        space: space.map(SpaceSummary::of),
        result,
        pass,
    })?;
    Ok(RunOutput {
        status: Status::from_pass(pass),
        report,
        csv: table.map(|t| t.render()).transpose()?,
    })
}

/// Executes one command. Errors are input errors (exit status 2).
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    if config.grid < 2 {
        return Err(Error::arg("--grid must be at least 2"));
    }
    match &config.command {
        Command::Diagnose { s, subset } => diagnose(config, s, *subset),
        Command::Operator { r, export } => operator(config, *r, export.as_ref()),
        Command::Certify {
            r,
            p,
            epsilon,
            family,
            subset,
            full,
        } => certify(config, *r, *p, *epsilon, family, *subset, *full),
        Command::Counterexample { s, mode, sweep, full } => counterexample(config, *s, *mode, sweep.as_deref(), *full),
        Command::VerifyBounds { trials } => verify(config, *trials),
    }
}

fn diagnose(config: &RunConfig, scales: &[f64], subset: SubsetArg) -> Result<RunOutput> {
    let space = load_space(config)?;
    let subset = subset.resolve(&space)?;
    if subset.is_empty() {
        return Err(Error::arg("subset is empty"));
    }
    let index = BallIndex::new(&space);
    let sections = scales
        .iter()
        .map(|&s| regularity_report(&space, s, config.grid, &subset, Some(&index)))
        .collect::<Result<Vec<RegularityReport>>>()?;
    let pass = sections.iter().all(|sec| sec.containment.violations == 0);
    let mut table = Table {
        header: vec!["s", "table", "delta", "value", "argmax", "max_inverse_gap", "inverse_gap_bound"],
        rows: Vec::new(),
    };
    for sec in &sections {
        for row in &sec.star_modulus {
            table.rows.push(vec![
                fmt_f64(sec.s),
                "star".into(),
                fmt_f64(row.delta),
                fmt_f64(row.value),
                row.argmax.to_string(),
                String::new(),
                String::new(),
            ]);
        }
        for row in &sec.symdiff_modulus {
            table.rows.push(vec![
                fmt_f64(sec.s),
                "symdiff".into(),
                fmt_f64(row.delta),
                fmt_f64(row.symdiff),
                row.symdiff_pair.map(|(x, y)| format!("{x}-{y}")).unwrap_or_default(),
                fmt_f64(row.max_inverse_gap),
                fmt_f64(row.inverse_gap_bound),
            ]);
        }
    }
    finish(config, "diagnose", Some(&space), sections, pass, Some(table))
}

#[derive(Serialize)]
struct OperatorSummary {
    r: f64,
    nnz: usize,
    norm_1: f64,
    norm_inf: f64,
    gamma: f64,
    min_ball_mass: f64,
    max_ball_mass: f64,
    export: Option<String>,
}

fn operator(config: &RunConfig, r: f64, export: Option<&PathBuf>) -> Result<RunOutput> {
    let space = load_space(config)?;
    let op = AveragingOperator::assemble(&space, r)?;
    if let Some(path) = export {
        let file = fs::File::create(path)?;
        op.write_triplets(std::io::BufWriter::new(file))?;
    }
    let norm_1 = op.operator_norm(Exponent::ONE)?;
    let gamma = doubling_constant(&space, r)?.gamma;
    let summary = OperatorSummary {
        r,
        nnz: op.nnz(),
        norm_1,
        norm_inf: op.operator_norm(Exponent::INFINITY)?,
        gamma,
        min_ball_mass: inf_ball(&space, r).value,
        max_ball_mass: sup_ball(&space, r).value,
        export: export.map(|p| p.display().to_string()),
    };
    // passes iff ||A_r||_{1->1} <= gamma(r)
    let pass = norm_1 <= gamma * (1.0 + 1e-12);
    finish(config, "operator", Some(&space), summary, pass, None)
}

#[derive(Serialize)]
struct CertifySummary {
    r: f64,
    p: Exponent,
    epsilon: f64,
    family_size: usize,
    subset_size: usize,
    net_size: Option<usize>,
    delta: Option<f64>,
    sigma: Option<f64>,
    achieved_radius: Option<f64>,
    verification: Option<CertificateCheck>,
    failure: Option<ModulusFailure>,
    covering_number: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<crate::compactness::NetCertificate>,
}

fn load_family(space: &MetricMeasureSpace, arg: &FamilyArg, p: Exponent) -> Result<FunctionFamily> {
    match arg {
        FamilyArg::Sample { count, seed } => unit_ball_sample(space, p, *count, *seed),
        FamilyArg::File(path) => fs::read_to_string(path)
            .map_err(Error::from)
            .and_then(|text| FunctionFamily::from_json_str(space, &text, p))
            .map_err(|e| Error::in_file(path, e)),
    }
}

#[allow(clippy::too_many_arguments)]
fn certify(
    config: &RunConfig,
    r: f64,
    p: Exponent,
    epsilon: f64,
    family: &FamilyArg,
    subset: SubsetArg,
    full: bool,
) -> Result<RunOutput> {
    let space = load_space(config)?;
    let subset = subset.resolve(&space)?;
    let family = load_family(&space, family, p)?;
    let modulus = ModulusConfig {
        grid: config.grid,
        sigma_grid: delta_grid(r, config.grid, config.grid),
    };
    let op = AveragingOperator::assemble(&space, r)?;
    let images = family.images(&op)?;
    let covering = covering_number(
        &space,
        &images.iter().map(|g| g.restricted(&subset)).collect::<Vec<FunctionVec>>(),
        p,
        epsilon,
    )?;
    let outcome = build_net_certificate(&space, r, &family, &subset, epsilon, &modulus)?;
    let mut summary = CertifySummary {
        r,
        p,
        epsilon,
        family_size: family.len(),
        subset_size: subset.len(),
        net_size: None,
        delta: None,
        sigma: None,
        achieved_radius: None,
        verification: None,
        failure: None,
        covering_number: covering,
        certificate: None,
    };
    let pass = match outcome {
        CertificateOutcome::Built(cert) => {
            let check = verify_certificate(&space, &op, &family, &cert)?;
            let pass = check.passed;
            summary.net_size = Some(cert.net_size());
            summary.delta = Some(cert.delta);
            summary.sigma = cert.sigma;
            summary.achieved_radius = Some(cert.achieved_radius);
            summary.verification = Some(check);
            summary.certificate = full.then_some(cert);
            pass
        }
        CertificateOutcome::Failed(failure) => {
            summary.failure = Some(failure);
            false
        }
    };
    finish(config, "certify", Some(&space), summary, pass, None)
}

#[derive(Serialize)]
struct CounterexampleSummary {
    family: WitnessFamily,
    separation: SeparationCheck,
    plateau: PlateauCheck,
}

fn counterexample(config: &RunConfig, s: f64, mode: WitnessMode, sweep: Option<&[usize]>, full: bool) -> Result<RunOutput> {
    if let Some(lengths) = sweep {
        let rows: Vec<SweepRow> = dichotomy_sweep(lengths, s, mode)?;
        let pass = rows
            .iter()
            .all(|row| row.min_pairwise.map_or(true, |m| m >= row.bound - crate::counterexample::SEPARATION_TOL));
        let table = Table {
            header: vec!["length", "n_points", "num_centers", "min_pairwise", "bound", "covering_number"],
            rows: rows
                .iter()
                .map(|row| {
                    vec![
                        row.length.to_string(),
                        row.n_points.to_string(),
                        row.num_centers.to_string(),
                        opt_f64(row.min_pairwise),
                        fmt_f64(row.bound),
                        row.covering_number.to_string(),
                    ]
                })
                .collect(),
        };
        return finish(config, "counterexample", None, rows, pass, Some(table));
    }
    let space = load_space(config)?;
    let mut family = match mode {
        WitnessMode::L1 => crate::counterexample::l1_witnesses(&space, s)?,
        WitnessMode::Linf => crate::counterexample::linf_witnesses(&space, s)?,
    };
    let separation = verify_separation(&family);
    let plateau = plateau_check(&space, &family);
    let table = Table {
        header: vec!["n", "center", "min_distance_to_others"],
        rows: family
            .separation_matrix
            .iter()
            .enumerate()
            .map(|(a, row)| {
                let m = row
                    .iter()
                    .enumerate()
                    .filter(|&(b, _)| b != a)
                    .map(|(_, &v)| v)
                    .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |x| x.min(v))));
                vec![a.to_string(), family.centers[a].to_string(), opt_f64(m)]
            })
            .collect(),
    };
    if !full {
        family.separation_matrix.clear();
    }
    let pass = separation.pass;
    finish(
        config,
        "counterexample",
        Some(&space),
        CounterexampleSummary {
            family,
            separation,
            plateau,
        },
        pass,
        Some(table),
    )
}

fn verify(config: &RunConfig, trials: usize) -> Result<RunOutput> {
    let space = load_space(config)?;
    let battery = BatteryConfig {
        seed: config.seed,
        trials,
        ..BatteryConfig::default()
    };
    let report: BatteryReport = if config.inject_fault {
        let corrupt = |op: &AveragingOperator, f: &FunctionVec| op.apply(f).map(|g| g.scaled(1.5));
        verify_bounds_with(&space, &battery, &corrupt)?
    } else {
        verify_bounds(&space, &battery)?
    };
    let pass = report.pass;
    finish(config, "verify-bounds", Some(&space), report, pass, None)
}

/// Runs a configuration and writes its outputs, returning the exit code.
pub fn execute(config: &RunConfig) -> ExitCode {
    let output = match run(config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = (|| -> Result<()> {
        match &config.output_path {
            Some(path) => fs::write(path, &output.report)?,
            None => print!("{}", output.report),
        }
        if let (Some(path), Some(csv)) = (&config.csv_path, &output.csv) {
            fs::write(path, csv)?;
        }
        Ok(())
    })();
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if config.verbosity > 0 {
        eprintln!("status: {:?}", output.status);
    }
    ExitCode::from(output.status.code())
}

pub fn main() -> ExitCode {
    execute(&RunConfig::from(Cli::parse()))
}
