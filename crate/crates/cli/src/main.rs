//! `combkit`: sample, evolve, verify and render combs.
//!
//! Exit codes: 0 on success, 1 on a failed verification or runtime error,
//! 2 on a usage error.

mod output;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use combkit::backbone::{sample_distance_matrix, FiniteUms, Metric};
use combkit::bridge::flow_comb;
use combkit::comb::sample_kingman_comb;
use combkit::evolve::evolving_kingman_step;
use combkit::lambda::{simulate_composition_chain, simulate_partition_chain, LambdaMeasure, RateTable};
use combkit::paintbox::{ordered_paintbox, paintbox_sample};
use combkit::replicate::rng_from_seed;
use combkit::verify::Suite;
use combkit::{Comb, ToothComb};
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<combkit::Error> for CliError {
    fn from(e: combkit::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "combkit", version, about = "Combs, coalescents and ultrametric spaces")]
struct Cli {
    /// Master seed; identical arguments give identical output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format (render always writes SVG).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    All,
    Intertwining,
    Projection,
    KingmanPair,
    EmpiricalConvergence,
    Semigroup,
    UniformOrdering,
    EvolveStationarity,
    Figure2,
    StarMetric,
    Properties,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        let one = match self {
            SuiteArg::All => return Suite::ALL.to_vec(),
            SuiteArg::Intertwining => Suite::Intertwining,
            SuiteArg::Projection => Suite::Projection,
            SuiteArg::KingmanPair => Suite::KingmanPair,
            SuiteArg::EmpiricalConvergence => Suite::EmpiricalConvergence,
            SuiteArg::Semigroup => Suite::Semigroup,
            SuiteArg::UniformOrdering => Suite::UniformOrdering,
            SuiteArg::EvolveStationarity => Suite::EvolveStationarity,
            SuiteArg::Figure2 => Suite::Figure2,
            SuiteArg::StarMetric => Suite::StarMetric,
            SuiteArg::Properties => Suite::Properties,
        };
        vec![one]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Plain,
    Star,
}

fn parse_lambda(s: &str) -> Result<LambdaMeasure, String> {
    s.parse::<LambdaMeasure>().map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a Kingman comb.
    KingmanComb {
        #[arg(long, default_value_t = 100)]
        n_teeth: usize,
    },
    /// Simulate the Λ-coalescent on [n], or its composition chain.
    LambdaSim {
        /// kingman, uniform, dirac:p, beta:a,b or mix:[...], optionally *mass
        #[arg(long, default_value = "kingman", value_parser = parse_lambda)]
        lambda: LambdaMeasure,
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Run the chain where only adjacent blocks merge.
        #[arg(long)]
        ordered: bool,
    },
    /// Paintbox sample from a comb file, or from a fresh Kingman comb.
    Paintbox {
        #[arg(long)]
        comb: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        n_teeth: usize,
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Keep the left-to-right order of blocks.
        #[arg(long)]
        ordered: bool,
    },
    /// A Λ-comb on a time grid, from `m` equal initial components.
    LambdaComb {
        #[arg(long, default_value = "kingman", value_parser = parse_lambda)]
        lambda: LambdaMeasure,
        #[arg(long, default_value_t = 1000)]
        m: usize,
        /// Comma-separated increasing times starting at 0.
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.25,0.5,1,2")]
        times: Vec<f64>,
    },
    /// Run the evolving Kingman comb for some steps.
    Evolve {
        /// Starting comb with teeth; a fresh Kingman comb when absent.
        #[arg(long)]
        comb: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        n_teeth: usize,
        #[arg(long, default_value_t = 0.3)]
        s: f64,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// Also write every draw of every step as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Height function, star metric and backbone distances of a finite space.
    Backbone {
        /// JSON {"dist", "weights"}, or CSV: the matrix rows then a weights row.
        #[arg(long)]
        space: PathBuf,
        /// Instead, sample this many points and write their distance matrix.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, value_enum, default_value_t = MetricArg::Plain)]
        metric: MetricArg,
    },
    /// Run verification suites; exits 1 unless every check passes.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
    /// Render a comb file as SVG.
    Render {
        #[arg(long)]
        comb: PathBuf,
    },
}

struct Outcome {
    bytes: Vec<u8>,
    failed: bool,
}

impl From<Vec<u8>> for Outcome {
    fn from(bytes: Vec<u8>) -> Self {
        Outcome { bytes, failed: false }
    }
}

fn unsupported(command: &str, format: Format) -> CliError {
    CliError::Usage(format!("{command} cannot write {format:?} output").to_lowercase())
}

fn write_comb(comb: &Comb, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => output::json(comb),
        Format::Csv => output::comb_csv(comb),
        Format::Svg => Ok(render::render_comb(comb).into_bytes()),
    }
}

#[derive(Serialize)]
struct PaintboxOutput<T: Serialize> {
    positions: Vec<f64>,
    trajectory: T,
}

#[derive(Serialize)]
struct BackboneOutput {
    height: Vec<f64>,
    star: Vec<Vec<f64>>,
    backbone: Vec<Vec<f64>>,
}

fn read_tooth_comb(path: &std::path::Path) -> Result<ToothComb, CliError> {
    let comb: Comb = output::read_json(path)?;
    let teeth = comb
        .teeth()
        .ok_or_else(|| CliError::Runtime(format!("{}: comb has no teeth", path.display())))?;
    Ok(ToothComb::new(teeth.to_vec())?)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let mut rng = rng_from_seed(cli.seed);
    let format = cli.format;
    let fmt = |default: Format| format.unwrap_or(default);
    match &cli.command {
        Command::KingmanComb { n_teeth } => {
            if *n_teeth == 0 {
                return Err(CliError::Usage("--n-teeth must be at least 1".to_string()));
            }
            let comb = sample_kingman_comb(&mut rng, *n_teeth)?.to_comb();
            Ok(write_comb(&comb, fmt(Format::Json))?.into())
        }
        Command::LambdaSim { lambda, n, ordered } => {
            if *n == 0 {
                return Err(CliError::Usage("--n must be at least 1".to_string()));
            }
            let f = fmt(Format::Json);
            let bytes = if *ordered {
                let traj = simulate_composition_chain(lambda, *n, &mut rng)?;
                match f {
                    Format::Json => output::json(&traj)?,
                    Format::Csv => output::nested_csv(&traj)?,
                    Format::Svg => return Err(unsupported("lambda-sim", f)),
                }
            } else {
                let traj = simulate_partition_chain(lambda, *n, &mut rng)?;
                match f {
                    Format::Json => output::json(&traj)?,
                    Format::Csv => output::trajectory_csv(&traj)?,
                    Format::Svg => return Err(unsupported("lambda-sim", f)),
                }
            };
            Ok(bytes.into())
        }
        Command::Paintbox {
            comb,
            n_teeth,
            n,
            ordered,
        } => {
            if *n == 0 {
                return Err(CliError::Usage("--n must be at least 1".to_string()));
            }
            let f = fmt(Format::Json);
            if f == Format::Svg {
                return Err(unsupported("paintbox", f));
            }
            let source: Comb = match comb {
                Some(path) => output::read_json(path)?,
                None => sample_kingman_comb(&mut rng, *n_teeth)?.to_comb(),
            };
            let bytes = if *ordered {
                let (positions, trajectory) = ordered_paintbox(&source, *n, &mut rng)?;
                match f {
                    Format::Csv => output::nested_csv(&trajectory)?,
                    _ => output::json(&PaintboxOutput { positions, trajectory })?,
                }
            } else {
                let (positions, trajectory) = paintbox_sample(&source, *n, &mut rng)?;
                match f {
                    Format::Csv => output::trajectory_csv(&trajectory)?,
                    _ => output::json(&PaintboxOutput { positions, trajectory })?,
                }
            };
            Ok(bytes.into())
        }
        Command::LambdaComb { lambda, m, times } => {
            if *m == 0 {
                return Err(CliError::Usage("--m must be at least 1".to_string()));
            }
            let table = RateTable::new(lambda.clone(), *m)?;
            let comb = flow_comb(&table, times, *m, &mut rng)?;
            Ok(write_comb(&comb, fmt(Format::Json))?.into())
        }
        Command::Evolve {
            comb,
            n_teeth,
            s,
            steps,
            trace,
        } => {
            let mut current = match comb {
                Some(path) => read_tooth_comb(path)?,
                None => sample_kingman_comb(&mut rng, *n_teeth)?,
            };
            let mut records = Vec::with_capacity(*steps);
            for _ in 0..*steps {
                let (next, record) = evolving_kingman_step(&current, *s, *n_teeth, &mut rng)?;
                current = next;
                records.push(record);
            }
            if let Some(path) = trace {
                write_file(path, &output::json(&records)?)?;
            }
            Ok(write_comb(&current.to_comb(), fmt(Format::Json))?.into())
        }
        Command::Backbone {
            space,
            samples,
            metric,
        } => {
            let space: FiniteUms = output::read_space(space)?;
            let f = fmt(Format::Json);
            let bytes = match samples {
                Some(k) => {
                    let metric = match metric {
                        MetricArg::Plain => Metric::Plain,
                        MetricArg::Star => Metric::Star,
                    };
                    let matrix = sample_distance_matrix(&space, *k, &mut rng, metric)?;
                    match f {
                        Format::Json => output::json(&serde_json::json!({ "dist": matrix }))?,
                        Format::Csv => output::matrix_csv(&matrix)?,
                        Format::Svg => return Err(unsupported("backbone", f)),
                    }
                }
                None => match f {
                    Format::Json => output::json(&BackboneOutput {
                        height: space.height_function(),
                        star: space.star_metric(),
                        backbone: space.backbone_matrix(),
                    })?,
                    Format::Csv => output::space_csv(&space.star_space()?)?,
                    Format::Svg => return Err(unsupported("backbone", f)),
                },
            };
            Ok(bytes.into())
        }
        Command::Verify { suite } => {
            let f = fmt(Format::Json);
            let mut reports = Vec::new();
            for s in suite.suites() {
                reports.extend(s.run(cli.seed)?);
            }
            let failed = reports.iter().any(|r| !r.pass);
            let bytes = match f {
                Format::Json => output::json(&reports)?,
                Format::Csv => output::reports_csv(&reports)?,
                Format::Svg => return Err(unsupported("verify", f)),
            };
            Ok(Outcome { bytes, failed })
        }
        Command::Render { comb } => {
            if let Some(f) = format.filter(|f| *f != Format::Svg) {
                return Err(unsupported("render", f));
            }
            let comb: Comb = output::read_json(comb)?;
            Ok(render::render_comb(&comb).into_bytes().into())
        }
    }
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|o| {
        match &cli.out {
            Some(path) => write_file(path, &o.bytes)?,
            None => std::io::stdout()
                .write_all(&o.bytes)
                .map_err(|e| CliError::Runtime(e.to_string()))?,
        }
        Ok(o.failed)
    });
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("combkit: verification failed");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("combkit: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("combkit: {msg}");
            ExitCode::from(2)
        }
    }
}
