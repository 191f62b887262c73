//! `graphkms`: inspect the KMS states of the gauge action on a graph's
//! Toeplitz algebra from the command line.

mod report;
mod text;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use graphkms::kms::perron_analysis;
use graphkms::oracle::verify_simplex;
use graphkms::{parse_graph, BetaSpec, KmsSystem, SimplexDescriptor, TAU};

#[derive(Parser, Debug)]
#[command(name = "graphkms", version, about = "KMS states of graph algebras, computed from the graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Components, spectral radii, periods and critical temperatures.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Extreme KMS states at one inverse temperature.
    States {
        file: PathBuf,
        #[command(flatten)]
        beta: BetaArgs,
        #[arg(long)]
        json: bool,
        /// Also run the oracle checks; exits with status 2 if any fail.
        #[arg(long)]
        verify: bool,
        #[arg(long, hide = true)]
        corrupt: Option<usize>,
    },
    /// CSV of simplex dimensions over a range of inverse temperatures.
    PhaseDiagram {
        file: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        beta_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta_max: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Whether the root of a monic integer polynomial nearest ROOT is a Perron number.
    Perron {
        /// Coefficients, highest degree first.
        #[arg(required = true, allow_negative_numbers = true, num_args = 1..)]
        coeffs: Vec<i64>,
        /// Approximate root; its decimal places set the matching tolerance.
        #[arg(long, allow_negative_numbers = true)]
        root: String,
    },
    /// Check every extreme state against the independent oracles.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        beta: BetaArgs,
        /// Perturb the measure of the given extreme state before checking.
        #[arg(long, hide = true)]
        corrupt: Option<usize>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct BetaArgs {
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Index into the ascending list of critical temperatures.
    #[arg(long)]
    critical: Option<usize>,
}

fn load(path: &Path) -> Result<KmsSystem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let graph = parse_graph(&text).with_context(|| format!("{}", path.display()))?;
    Ok(KmsSystem::new(graph))
}

fn resolve(system: &KmsSystem, args: &BetaArgs) -> Result<BetaSpec> {
    match (args.beta, args.critical) {
        (Some(b), None) => {
            if !b.is_finite() {
                bail!("beta must be finite");
            }
            Ok(BetaSpec::Numeric(b))
        }
        (None, Some(k)) => {
            let criticals = system.critical_temperatures();
            match criticals.get(k) {
                Some(beta) => Ok(*beta),
                None if criticals.is_empty() => bail!("the graph has no critical temperatures"),
                None => bail!("--critical {k} out of range; there are {} critical temperatures", criticals.len()),
            }
        }
        _ => unreachable!("clap enforces exactly one of --beta and --critical"),
    }
}

fn simplex_for(system: &KmsSystem, args: &BetaArgs, corrupt: Option<usize>) -> Result<SimplexDescriptor> {
    let beta = resolve(system, args)?;
    let mut simplex = system.simplex(&beta)?;
    if let Some(i) = corrupt {
        let state = simplex.extremes.get_mut(i).with_context(|| format!("no extreme state {i} to corrupt"))?;
        state.m[0] += 0.1;
    }
    Ok(simplex)
}

/// Prints the report and returns whether every check passed.
fn run_verification(system: &KmsSystem, simplex: &SimplexDescriptor) -> bool {
    let report = verify_simplex(system, simplex);
    let labels: Vec<String> = simplex.extremes.iter().map(|s| report::label(system, s)).collect();
    print!("{}", text::verification(&report, &labels));
    report.passed()
}

/// The grid `β_min + i·step`, with grid points within τ of a critical value
/// replaced by that exact critical value and the remaining critical values
/// in range inserted.
fn phase_grid(system: &KmsSystem, min: f64, max: f64, steps: usize) -> Vec<BetaSpec> {
    let criticals: Vec<(f64, BetaSpec)> = system
        .critical_temperatures()
        .into_iter()
        .map(|b| (system.beta_value(&b).expect("critical"), b))
        .filter(|&(v, _)| v >= min - TAU && v <= max + TAU)
        .collect();
    let grid = (0..steps).map(|i| {
        if steps == 1 {
            min
        } else {
            min + (max - min) * i as f64 / (steps - 1) as f64
        }
    });
    let mut points: Vec<(f64, BetaSpec)> = grid
        .filter(|x| criticals.iter().all(|(c, _)| (x - c).abs() > TAU))
        .map(|x| (x, BetaSpec::Numeric(x)))
        .chain(criticals.iter().copied())
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points.into_iter().map(|(_, b)| b).collect()
}

/// Half a unit in the last typed decimal place of `root`, never below the
/// library's default matching tolerance.
fn typed_tolerance(root: &str) -> f64 {
    let lower = root.to_ascii_lowercase();
    let (mantissa, exponent) = match lower.split_once('e') {
        Some((m, e)) => (m, e.parse::<i32>().unwrap_or(0)),
        None => (lower.as_str(), 0),
    };
    let decimals = mantissa.split_once('.').map_or(0, |(_, frac)| frac.len()) as i32;
    (0.5 * 10f64.powi(exponent - decimals)).max(graphkms::kms::ROOT_MATCH_TOLERANCE)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze { file, json } => {
            let system = load(&file)?;
            let report = report::analysis(&system, None);
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", text::analysis(&report));
            }
        }
        Command::States { file, beta, json, verify, corrupt } => {
            let system = load(&file)?;
            let simplex = simplex_for(&system, &beta, corrupt)?;
            let report = report::analysis(&system, Some(&simplex));
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                let s = report.simplex.as_ref().expect("simplex requested");
                print!("{}", text::simplex_text(s, &report.graph.vertices));
            }
            if verify {
                if !json {
                    println!();
                }
                let passed = if json {
                    verify_simplex(&system, &simplex).passed()
                } else {
                    run_verification(&system, &simplex)
                };
                if !passed {
                    return Ok(ExitCode::from(2));
                }
            }
        }
        Command::PhaseDiagram { file, beta_min, beta_max, steps } => {
            if !(beta_min.is_finite() && beta_max.is_finite() && beta_min < beta_max) {
                bail!("need finite --beta-min < --beta-max, got {beta_min} and {beta_max}");
            }
            if steps == 0 {
                bail!("--steps must be at least 1");
            }
            let system = load(&file)?;
            println!("beta,case,dim_toeplitz,dim_graph_algebra");
            for beta in phase_grid(&system, beta_min, beta_max, steps) {
                let simplex = system.simplex(&beta)?;
                println!(
                    "{},{},{},{}",
                    report::round12(simplex.beta_value),
                    report::case_name(simplex.case),
                    simplex.dimension(),
                    simplex.graph_algebra_dimension()
                );
            }
        }
        Command::Perron { coeffs, root } => {
            let value: f64 = root.trim().parse().with_context(|| format!("invalid root `{root}`"))?;
            let analysis = perron_analysis(&coeffs, value, typed_tolerance(root.trim()))?;
            println!("{}", if analysis.is_perron { "Perron" } else { "NOT Perron" });
        }
        Command::Verify { file, beta, corrupt } => {
            let system = load(&file)?;
            let simplex = simplex_for(&system, &beta, corrupt)?;
            if !run_verification(&system, &simplex) {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_follows_typed_digits() {
        assert_eq!(typed_tolerance("1.382"), 5e-4);
        assert_eq!(typed_tolerance("3"), 0.5);
        assert!((typed_tolerance("3.618e1") - 5e-3).abs() < 1e-15);
        assert_eq!(typed_tolerance("1.38196601125"), graphkms::kms::ROOT_MATCH_TOLERANCE);
    }

    #[test]
    fn grid_inserts_criticals_exactly() {
        let system = KmsSystem::new(parse_graph("vertices: v w\nedge v v 2\nedge w w 3\nedge w v\n").unwrap());
        let grid = phase_grid(&system, 0.0, 2.0, 3);
        assert_eq!(
            grid,
            vec![
                BetaSpec::Numeric(0.0),
                BetaSpec::CriticalOf(0),
                BetaSpec::Numeric(1.0),
                BetaSpec::CriticalOf(1),
                BetaSpec::Numeric(2.0),
            ]
        );
        assert_eq!(phase_grid(&system, 1.2, 2.0, 1), vec![BetaSpec::Numeric(1.2)]);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
