use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use gjlab_core::cayley::{bfs_ball_with_budget, CheegerStrategy, DEFAULT_VERTEX_BUDGET};
use gjlab_core::estimators::{
    cheeger_report, connective_constant, curve_csv, entropy, growth_rate, percolation,
    spectral_radius, speed_exact, speed_monte_carlo, EstimateReport, PercolationConfig,
    PercolationMode,
};
use gjlab_core::family::separation_witness;
use gjlab_core::{GroupError, OmegaWord, ParseError, ResourceError};

use crate::config;
use crate::expr;
use crate::verify;
use crate::{BallFormat, Cli, Command, EstimateArgs, OutputArgs, Parameter, SweepParameter};

pub const SWEEP_SCHEMA: &str = "gjlab.sweep/1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("in {expr:?}: {err}")]
    Parse { expr: String, err: ParseError },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error("{path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },
    #[error("verification failed")]
    VerificationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerificationFailed => 1,
            CliError::Resource(_) => 3,
            CliError::Usage(_)
            | CliError::Parse { .. }
            | CliError::Group(_)
            | CliError::Io { .. } => 2,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Flag values after the config file has filled the gaps.
#[derive(Debug, Clone, Default)]
struct Settings {
    n: Option<usize>,
    radius: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    samples: Option<usize>,
    json: Option<PathBuf>,
    csv: Option<PathBuf>,
    timing: bool,
}

impl Settings {
    fn new(est: EstimateArgs, out: OutputArgs, cfg: &Cfg) -> Result<Settings, CliError> {
        let mut s = Settings {
            n: est.n,
            radius: est.radius,
            trials: est.trials,
            seed: est.seed,
            samples: est.samples,
            json: out.json,
            csv: out.csv,
            timing: out.timing,
        };
        config::fill(&mut s.n, cfg, "n").map_err(usage)?;
        config::fill(&mut s.radius, cfg, "R").map_err(usage)?;
        config::fill(&mut s.trials, cfg, "trials").map_err(usage)?;
        config::fill(&mut s.seed, cfg, "seed").map_err(usage)?;
        config::fill(&mut s.samples, cfg, "samples").map_err(usage)?;
        config::fill(&mut s.json, cfg, "json").map_err(usage)?;
        config::fill(&mut s.csv, cfg, "csv").map_err(usage)?;
        if !s.timing {
            let mut t: Option<bool> = None;
            config::fill(&mut t, cfg, "timing").map_err(usage)?;
            s.timing = t.unwrap_or(false);
        }
        Ok(s)
    }
}

type Cfg = std::collections::BTreeMap<String, String>;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|err| CliError::Io {
        path: path.to_path_buf(),
        err,
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes the requested artifacts and echoes the JSON on stdout.
fn emit(settings: &Settings, json: &str, csv: &str) -> Result<(), CliError> {
    if let Some(p) = &settings.json {
        write_file(p, json)?;
    }
    if let Some(p) = &settings.csv {
        write_file(p, csv)?;
    }
    print!("{json}");
    Ok(())
}

fn parse_omega(s: Option<String>, cfg: &Cfg) -> Result<OmegaWord, CliError> {
    let mut s = s;
    config::fill(&mut s, cfg, "omega").map_err(usage)?;
    match s {
        None => Ok(OmegaWord::first_grigorchuk()),
        Some(text) => OmegaWord::parse(&text).map_err(|err| CliError::Parse { expr: text, err }),
    }
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => config::load(p).map_err(usage)?,
        None => Cfg::new(),
    };
    let mut threads = cli.threads;
    config::fill(&mut threads, &cfg, "threads").map_err(usage)?;
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Verify {
            suite,
            m,
            k,
            omega,
            out,
        } => {
            let (mut m, mut k) = (m, k);
            config::fill(&mut m, &cfg, "m").map_err(usage)?;
            config::fill(&mut k, &cfg, "k").map_err(usage)?;
            let omega = parse_omega(omega, &cfg)?;
            let settings = Settings::new(EstimateArgs::default(), out, &cfg)?;
            let report = verify::run(suite, &omega, m.unwrap_or(3), k.unwrap_or(3));
            for c in &report.checks {
                eprintln!(
                    "[{}] {} {}: {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.suite,
                    c.name,
                    c.detail
                );
            }
            emit(&settings, &to_json(&report), &report.to_csv())?;
            if report.pass {
                Ok(())
            } else {
                Err(CliError::VerificationFailed)
            }
        }
        Command::Estimate {
            group,
            parameter,
            est,
            out,
        } => {
            let settings = Settings::new(est, out, &cfg)?;
            let (report, csv) = estimate(&group, parameter, &settings)?;
            emit(&settings, &to_json(&report), &csv)
        }
        Command::Sweep {
            parameter,
            groups,
            family_file,
            universe,
            omega,
            est,
            out,
        } => {
            let settings = Settings::new(est, out, &cfg)?;
            if parameter == SweepParameter::EtaWitness {
                let mut universe = universe;
                config::fill(&mut universe, &cfg, "universe").map_err(usage)?;
                let omega = parse_omega(omega, &cfg)?;
                return eta_sweep(&omega, universe.unwrap_or(2), &settings);
            }
            let mut family = groups;
            if let Some(p) = family_file {
                let text = std::fs::read_to_string(&p).map_err(|err| CliError::Io {
                    path: p.clone(),
                    err,
                })?;
                family.extend(
                    text.lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with('#'))
                        .map(String::from),
                );
            }
            sweep(&family, sweep_parameter(parameter), &settings)
        }
        Command::Ball {
            group,
            n,
            format,
            budget,
            out,
        } => {
            let mut n = n;
            config::fill(&mut n, &cfg, "n").map_err(usage)?;
            let g = build(&group)?;
            let ball = bfs_ball_with_budget(
                g.as_ref(),
                n.unwrap_or(3),
                budget.unwrap_or(DEFAULT_VERTEX_BUDGET),
            )?;
            let text = match format {
                BallFormat::Edges => ball.to_edge_list(),
                BallFormat::Dot => ball.to_dot(),
            };
            match out {
                Some(p) => write_file(&p, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn sweep_parameter(p: SweepParameter) -> Parameter {
    match p {
        SweepParameter::Rho => Parameter::Rho,
        SweepParameter::PcSite => Parameter::PcSite,
        SweepParameter::PcBond => Parameter::PcBond,
        SweepParameter::Entropy => Parameter::Entropy,
        SweepParameter::Speed => Parameter::Speed,
        SweepParameter::Mu => Parameter::Mu,
        SweepParameter::Cheeger => Parameter::Cheeger,
        SweepParameter::Growth => Parameter::Growth,
        SweepParameter::EtaWitness => unreachable!("handled by eta_sweep"),
    }
}

fn build(text: &str) -> Result<gjlab_core::Group, CliError> {
    let e = expr::parse(text).map_err(|err| CliError::Parse {
        expr: text.to_string(),
        err,
    })?;
    Ok(e.build()?)
}

fn positive(v: usize, flag: &str) -> Result<usize, CliError> {
    if v == 0 {
        Err(usage(format!("--{flag} must be at least 1")))
    } else {
        Ok(v)
    }
}

/// Runs one estimator; returns the report and its CSV table.
fn estimate(
    text: &str,
    parameter: Parameter,
    s: &Settings,
) -> Result<(EstimateReport, String), CliError> {
    let parsed = expr::parse(text).map_err(|err| CliError::Parse {
        expr: text.to_string(),
        err,
    })?;
    let g = parsed.build()?;
    let g = g.as_ref();
    let start = Instant::now();
    let seed = s.seed.unwrap_or(0);
    let n = |default: usize| positive(s.n.unwrap_or(default), "n");
    let (mut report, csv) = match parameter {
        Parameter::Rho => {
            let r = spectral_radius(g, n(24)?)?;
            let csv = r.sequence_csv();
            (r, csv)
        }
        Parameter::PcSite | Parameter::PcBond => {
            let mode = if parameter == Parameter::PcSite {
                PercolationMode::Site
            } else {
                PercolationMode::Bond
            };
            let cfg = PercolationConfig::new(
                mode,
                positive(s.radius.unwrap_or(64), "R")?,
                positive(s.trials.unwrap_or(2000), "trials")?,
                seed,
            );
            let res = percolation(g, &cfg)?;
            (res.report, curve_csv(&res.curve))
        }
        Parameter::Entropy => {
            let r = entropy(g, n(50)?)?;
            let csv = r.sequence_csv();
            (r, csv)
        }
        Parameter::Speed => {
            let r = match s.samples {
                Some(samples) => speed_monte_carlo(g, n(20)?, positive(samples, "samples")?, seed)?,
                None => speed_exact(g, n(20)?)?,
            };
            let csv = r.sequence_csv();
            (r, csv)
        }
        Parameter::Mu => {
            let r = connective_constant(g, n(12)?)?;
            let csv = r.sequence_csv();
            (r, csv)
        }
        Parameter::Cheeger => {
            let r = cheeger_report(g, &CheegerStrategy::Balls, n(8)?)?;
            let csv = r.sequence_csv();
            (r, csv)
        }
        Parameter::Growth => {
            let (r, series) = growth_rate(g, n(8)?)?;
            (r, series.to_csv())
        }
    };
    report.group = parsed.to_string();
    if s.timing {
        report = report.with_runtime(start.elapsed().as_secs_f64());
    }
    Ok((report, csv))
}

#[derive(Serialize)]
struct SweepRow {
    group: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<EstimateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepTable {
    schema: &'static str,
    parameter: String,
    rows: Vec<Value>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12}")).unwrap_or_default()
}

fn sweep(family: &[String], parameter: Parameter, s: &Settings) -> Result<(), CliError> {
    let name = parameter
        .to_possible_value()
        .expect("named")
        .get_name()
        .to_string();
    let mut rows = Vec::new();
    let mut csv = String::from("group,estimate,certified,ci_lo,ci_hi,error\n");
    for text in family {
        let row = match estimate(text, parameter, s) {
            Ok((report, _)) => {
                csv.push_str(&format!(
                    "{},{},{},{},{},\n",
                    csv_field(&report.group),
                    opt(report.estimate),
                    opt(report.certified.as_ref().map(|c| c.value)),
                    opt(report.ci.as_ref().map(|c| c.lo)),
                    opt(report.ci.as_ref().map(|c| c.hi)),
                ));
                SweepRow {
                    group: report.group.clone(),
                    report: Some(report),
                    error: None,
                }
            }
            Err(e) => {
                eprintln!("gjlab: row {text:?}: {e}");
                csv.push_str(&format!(
                    "{},,,,,{}\n",
                    csv_field(text),
                    csv_field(&e.to_string())
                ));
                SweepRow {
                    group: text.clone(),
                    report: None,
                    error: Some(e.to_string()),
                }
            }
        };
        rows.push(serde_json::to_value(row).expect("rows serialize"));
    }
    let table = SweepTable {
        schema: SWEEP_SCHEMA,
        parameter: name,
        rows,
    };
    emit(s, &to_json(&table), &csv)
}

#[derive(Serialize)]
struct WitnessCell {
    #[serde(rename = "J")]
    j: Vec<usize>,
    #[serde(rename = "J_prime")]
    jp: Vec<usize>,
    /// `J ⊊ J'`: the only pairs where a witness is expected.
    expected: bool,
    witnessed: bool,
    level: Option<usize>,
}

fn subsets(universe: usize) -> Vec<BTreeSet<usize>> {
    (0..1u64 << universe)
        .map(|mask| {
            (1..=universe)
                .filter(|i| mask >> (i - 1) & 1 == 1)
                .collect()
        })
        .collect()
}

fn set_label(s: &[usize]) -> String {
    let parts: Vec<String> = s.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(" "))
}

/// For every ordered pair of subsets of `{1..universe}`, looks for a level
/// `i ∈ J' ∖ J` whose eta word separates `G_{J'}` from `G_J`.
fn eta_sweep(omega: &OmegaWord, universe: usize, s: &Settings) -> Result<(), CliError> {
    if universe > 4 {
        return Err(usage("--universe is limited to 4"));
    }
    let sets = subsets(universe);
    let mut cells = Vec::new();
    let mut csv = String::from("J,J_prime,expected,witnessed,level\n");
    let mut all_match = true;
    for j in &sets {
        for jp in &sets {
            let expected = j != jp && j.is_subset(jp);
            let mut level = None;
            if expected {
                for &i in jp.difference(j) {
                    if separation_witness(omega, j, jp, i)?.success {
                        level = Some(i);
                        break;
                    }
                }
            }
            let witnessed = level.is_some();
            all_match &= witnessed == expected;
            let cell = WitnessCell {
                j: j.iter().copied().collect(),
                jp: jp.iter().copied().collect(),
                expected,
                witnessed,
                level,
            };
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                set_label(&cell.j),
                set_label(&cell.jp),
                expected,
                witnessed,
                level.map(|l| l.to_string()).unwrap_or_default()
            ));
            cells.push(serde_json::to_value(cell).expect("cells serialize"));
        }
    }
    let table = SweepTable {
        schema: SWEEP_SCHEMA,
        parameter: "eta-witness".into(),
        rows: cells,
    };
    emit(s, &to_json(&table), &csv)?;
    if all_match {
        Ok(())
    } else {
        Err(CliError::VerificationFailed)
    }
}
