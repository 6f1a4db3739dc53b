use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qcoin::harness::{
    check_bias_bound, monte_carlo, naive_monte_carlo, sweep_attack, verify_all, write_sweep_csv,
    McEstimate, VerifyConfig,
};
use qcoin::naive::NaiveStrategy;
use qcoin::protocol::{derive_params, run_session, ProtocolParams, Transcript, Variant};
use qcoin::strategies::StrategySpec;
use qcoin::Error;

const DEFAULT_THETA: f64 = std::f64::consts::PI / 9.0;

#[derive(Parser)]
#[command(
    name = "qcoin",
    version,
    about = "Quantum coin-tossing simulator and analysis harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the oracle and bound suites plus a reduced honest Monte Carlo.
    Verify {
        #[arg(long, default_value_t = 8)]
        max_m: usize,
        #[arg(long, default_value_t = 50)]
        omega_points: usize,
        #[arg(long, default_value_t = 20_000)]
        honest_trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Monte Carlo estimate of the final-bit distribution.
    Run {
        #[command(flatten)]
        session: SessionArgs,
        #[arg(long, default_value_t = 400_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Also write the estimate as JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Analytic attack figures (and optional Monte Carlo) over several m.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        m_list: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_THETA)]
        theta: f64,
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Write the replayable log of a single session.
    Transcript {
        #[command(flatten)]
        session: SessionArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run a transcript from its header and compare it byte for byte.
    Replay {
        #[arg(long)]
        input: PathBuf,
    },
    /// Check max_c (1/2)c^m(1 − c²) against its closed form and 1/m.
    Bound {
        #[arg(long, default_value_t = 1000)]
        m_max: usize,
    },
}

#[derive(Args)]
struct SessionArgs {
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_THETA)]
    theta: f64,
    /// Particles per side per procedure; derived from m and θ when absent.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value = "with-return")]
    variant: Variant,
    #[arg(long, default_value = "honest")]
    alice: String,
    #[arg(long, default_value = "honest")]
    bob: String,
    /// Target bit for strategies that take one.
    #[arg(long)]
    target: Option<u8>,
    /// Measurement round for the conclusive and best-guess attacks.
    #[arg(long)]
    round: Option<usize>,
}

impl SessionArgs {
    fn params(&self) -> Result<ProtocolParams, Error> {
        let derived = derive_params(self.m, self.theta)?.with_variant(self.variant);
        match self.n {
            Some(n) => derived.with_n(n),
            None => Ok(derived),
        }
    }

    fn spec(&self, name: &str) -> Result<StrategySpec, Error> {
        let spec: StrategySpec = name.parse()?;
        Ok(match spec {
            StrategySpec::Conclusive { target, round } => StrategySpec::Conclusive {
                target: self.target.unwrap_or(target),
                round: self.round.or(round),
            },
            StrategySpec::BestGuess { target, round } => StrategySpec::BestGuess {
                target: self.target.unwrap_or(target),
                round: self.round.or(round),
            },
            StrategySpec::SelectiveAbort { target } => StrategySpec::SelectiveAbort {
                target: self.target.unwrap_or(target),
            },
            other => other,
        })
    }

    fn naive_bob(&self) -> Result<Option<NaiveStrategy>, Error> {
        if !self.bob.starts_with("naive-") {
            return Ok(None);
        }
        if !matches!(self.alice.as_str(), "honest" | "naive-honest") {
            return Err(Error::InvalidParameter(
                "the EPR-based protocol only supports an honest Alice".into(),
            ));
        }
        let bob: NaiveStrategy = self.bob.parse()?;
        Ok(Some(match (bob, self.target) {
            (NaiveStrategy::Reroll { .. }, Some(target)) if target <= 1 => {
                NaiveStrategy::Reroll { target }
            }
            (_, Some(target)) if target > 1 => {
                return Err(Error::InvalidParameter(format!(
                    "target must be 0 or 1, got {target}"
                )))
            }
            (bob, _) => bob,
        }))
    }
}

enum Failure {
    Check(String),
    Usage(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn print_estimate(estimate: &McEstimate, json: Option<&PathBuf>) -> Result<(), Failure> {
    let text = estimate.to_json();
    println!("{text}");
    if let Some(path) = json {
        let mut f = File::create(path)?;
        writeln!(f, "{text}")?;
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Verify {
            max_m,
            omega_points,
            honest_trials,
            seed,
            workers,
        } => {
            let report = verify_all(&VerifyConfig {
                max_m,
                omega_points,
                honest_trials,
                seed,
                workers,
            })?;
            for c in &report.checks {
                let status = match (c.passed, c.gating) {
                    (true, _) => "PASS",
                    (false, true) => "FAIL",
                    (false, false) => "WARN",
                };
                println!("{status} {}: {}", c.name, c.detail);
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Check("verification failed".into()))
            }
        }
        Command::Run {
            session,
            trials,
            seed,
            workers,
            json,
        } => {
            let estimate = match session.naive_bob()? {
                Some(bob) => naive_monte_carlo(session.m, bob, trials, seed, workers)?,
                None => {
                    let params = session.params()?;
                    let alice = session.spec(&session.alice)?;
                    let bob = session.spec(&session.bob)?;
                    monte_carlo(&params, &alice, &bob, trials, seed, workers)?
                }
            };
            print_estimate(&estimate, json.as_ref())
        }
        Command::Sweep {
            m_list,
            theta,
            trials,
            seed,
            workers,
            csv,
        } => {
            let rows = sweep_attack(&m_list, theta, trials, seed, workers)?;
            write_sweep_csv(&rows, BufWriter::new(File::create(&csv)?))?;
            let broken: Vec<usize> = rows
                .iter()
                .filter(|r| !r.bounds_hold())
                .map(|r| r.m)
                .collect();
            println!("{} rows written to {}", rows.len(), csv.display());
            if broken.is_empty() {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "bias bounds violated for m in {broken:?}"
                )))
            }
        }
        Command::Transcript { session, seed, out } => {
            let params = session.params()?;
            let alice = session.spec(&session.alice)?;
            let bob = session.spec(&session.bob)?;
            let outcome = run_session(&params, &alice, &bob, seed)?;
            let mut w = BufWriter::new(File::create(&out)?);
            outcome.transcript.write_to(&mut w)?;
            w.flush()?;
            println!(
                "{:?} alice_bit={:?} bob_bit={:?} messages={}",
                outcome.result,
                outcome.alice_bit,
                outcome.bob_bit,
                outcome.transcript.messages.len()
            );
            Ok(())
        }
        Command::Replay { input } => {
            let text = std::fs::read_to_string(&input)?;
            let recorded = Transcript::read_from(BufReader::new(text.as_bytes()))?;
            let header = &recorded.header;
            let alice: StrategySpec = header.alice.parse()?;
            let bob: StrategySpec = header.bob.parse()?;
            let outcome = run_session(&header.params()?, &alice, &bob, header.seed)?;
            if outcome.transcript.to_jsonl() == text {
                println!("identical: {} messages", recorded.messages.len());
                Ok(())
            } else {
                Err(Failure::Check(
                    "replay differs from the recorded transcript".into(),
                ))
            }
        }
        Command::Bound { m_max } => {
            if m_max < 1 {
                return Err(Failure::Usage(Error::InvalidParameter(
                    "m-max must be at least 1".into(),
                )));
            }
            let rows = check_bias_bound(m_max)?;
            let failing: Vec<usize> = rows.iter().filter(|r| !r.passed).map(|r| r.m).collect();
            let worst = rows
                .iter()
                .map(|r| (r.grid_max - r.closed_form).abs())
                .fold(0.0, f64::max);
            for r in rows.iter().take(3) {
                println!(
                    "m={} closed_form={:.12} argmax={:.9} grid_max={:.12} 1/m={:.6}",
                    r.m, r.closed_form, r.argmax, r.grid_max, r.inverse_m
                );
            }
            println!(
                "m=1..={m_max}: max |grid − closed form| = {worst:.3e}, {} failing",
                failing.len()
            );
            if failing.is_empty() {
                Ok(())
            } else {
                Err(Failure::Check(format!("bound fails for m in {failing:?}")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
