//! `afl-calc`: sweeps and single evaluations over the ati-core verifiers.
//!
//! Exit codes: 0 when every row passes, 1 when some row fails, 2 on a
//! configuration error.

mod commands;
mod range;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use ati_core::field::Sign;
use ati_core::orbital::OrbitData;
use ati_core::{FieldSetup, Function};
use commands::{Failure, Outcome, Report};
use range::{BoolList, IntList};

#[derive(Debug, Parser)]
#[command(
    name = "afl-calc",
    version,
    about = "Exact orbital integral and deformation length sweeps"
)]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Levels {
    /// Levels of both lattices at once (overrides --i and --j).
    #[arg(long)]
    ij: Option<IntList>,
    #[arg(long)]
    i: Option<IntList>,
    #[arg(long)]
    j: Option<IntList>,
}

impl Levels {
    fn resolve(&self, default: &str) -> Outcome<(Vec<u32>, Vec<u32>)> {
        let d: IntList = default.parse().expect("default range");
        let pick = |x: &Option<IntList>, flag| {
            self.ij
                .as_ref()
                .or(x.as_ref())
                .unwrap_or(&d)
                .values::<u32>(flag)
                .map_err(Failure::Config)
        };
        Ok((pick(&self.i, "i")?, pick(&self.j, "j")?))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Unramified level-zero identity (odd t) and transfer statement (even t).
    Afl {
        #[arg(long, default_value = "3,5,7")]
        q: IntList,
        /// Explicit list of t; overrides --t-odd-max.
        #[arg(long)]
        t: Option<IntList>,
        /// Use every odd t from 1 to this bound.
        #[arg(long, default_value_t = 21)]
        t_odd_max: u32,
        #[arg(long, default_value = "-8..8", allow_hyphen_values = true)]
        vb: IntList,
    },
    /// Deformation lengths by the closed formula, optionally against the recursion.
    Deform {
        #[arg(long, default_value = "both")]
        ram: BoolList,
        #[arg(long, default_value = "2..5")]
        q: IntList,
        #[command(flatten)]
        levels: Levels,
        /// Ramification over the larger level's ring.
        #[arg(long, default_value = "1..3")]
        e: IntList,
        #[arg(long, default_value = "0..25")]
        l: IntList,
        #[arg(long)]
        oracle_cross_check: bool,
    },
    /// Orbital integral, its value and derivative at s = 0, and the transfer factor.
    Orb {
        /// Orbit JSON (an object or a list), or @path.
        #[arg(long)]
        orbit: String,
        /// Function JSON, or @path. Defaults to the characteristic function of K.
        #[arg(long)]
        function: Option<String>,
    },
    /// Germ coefficients of a function vanishing on the diagonal torus.
    Germ {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value = "false")]
        ram: String,
        /// η(π_F) for ramified setups: +1 or -1.
        #[arg(long, allow_hyphen_values = true)]
        eta_pi: Option<String>,
        #[arg(long)]
        function: String,
        /// Remove the B0 value first instead of rejecting the function.
        #[arg(long)]
        regularize: bool,
    },
    /// Growth of Int(g) in t, and optionally the end-to-end transfer check.
    Ati {
        #[arg(long, default_value = "both")]
        ram: BoolList,
        #[arg(long, default_value = "2,3")]
        q: IntList,
        #[command(flatten)]
        levels: Levels,
        #[arg(long, default_value = "1,2")]
        e: IntList,
        /// Largest t sampled (default i + j + 24).
        #[arg(long)]
        t: Option<u32>,
        #[arg(long)]
        end_to_end: bool,
        /// Number of t values in the end-to-end window.
        #[arg(long, default_value_t = 10)]
        span: u32,
        /// |v(b)| bound of the end-to-end window.
        #[arg(long, default_value_t = 3)]
        vb_abs: i64,
    },
}

fn threads() -> Outcome<()> {
    let Ok(raw) = std::env::var("AFL_CALC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Config(format!(
            "AFL_CALC_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn orbits_from(text: &str) -> Outcome<Vec<OrbitData>> {
    let v: Value = commands::parse_json("orbit", text)?;
    let list = match v {
        Value::Array(items) => items,
        other => vec![other],
    };
    list.into_iter()
        .map(|x| {
            serde_json::from_value(x).map_err(|e| Failure::Config(format!("invalid orbit: {e}")))
        })
        .collect()
}

fn run(cli: &Cli) -> Outcome<Report> {
    threads()?;
    match &cli.command {
        Command::Afl {
            q,
            t,
            t_odd_max,
            vb,
        } => {
            let ts = match t {
                Some(t) => t.values::<u32>("t").map_err(Failure::Config)?,
                None => (1..=*t_odd_max).step_by(2).collect(),
            };
            if ts.is_empty() {
                return Err(Failure::Config("no values of t".into()));
            }
            commands::afl(&q.values::<u64>("q").map_err(Failure::Config)?, &ts, &vb.0)
        }
        Command::Deform {
            ram,
            q,
            levels,
            e,
            l,
            oracle_cross_check,
        } => {
            let (i, j) = levels.resolve("0..5")?;
            commands::deform(&commands::DeformArgs {
                ram: ram.0.clone(),
                q: q.values("q").map_err(Failure::Config)?,
                i,
                j,
                e: e.values("e").map_err(Failure::Config)?,
                l: l.values("l").map_err(Failure::Config)?,
                cross_check: *oracle_cross_check,
            })
        }
        Command::Orb { orbit, function } => {
            let f: Function = match function {
                Some(text) => commands::parse_json("function", text)?,
                None => Function::unit_k(),
            };
            commands::orb(&orbits_from(orbit)?, &f)
        }
        Command::Germ {
            q,
            ram,
            eta_pi,
            function,
            regularize,
        } => {
            let ramified: BoolList = ram.parse().map_err(Failure::Config)?;
            let [ramified] = ramified.0[..] else {
                return Err(Failure::Config("germ takes a single --ram value".into()));
            };
            let eta = match eta_pi.as_deref().map(str::trim) {
                None => None,
                Some("+1" | "1") => Some(Sign::Plus),
                Some("-1") => Some(Sign::Minus),
                Some(s) => {
                    return Err(Failure::Config(format!(
                        "--eta-pi must be +1 or -1, got {s:?}"
                    )))
                }
            };
            let setup = match (ramified, eta) {
                (true, Some(e)) => FieldSetup::new(*q, true, e)?,
                (true, None) => FieldSetup::ramified(*q)?,
                (false, None) => FieldSetup::unramified(*q)?,
                (false, Some(_)) => {
                    return Err(Failure::Config(
                        "--eta-pi applies to ramified setups".into(),
                    ))
                }
            };
            let f: Function = commands::parse_json("function", function)?;
            commands::germ(setup, &f, *regularize)
        }
        Command::Ati {
            ram,
            q,
            levels,
            e,
            t,
            end_to_end,
            span,
            vb_abs,
        } => {
            let (i, j) = levels.resolve("0..4")?;
            commands::ati(&commands::AtiArgs {
                ram: ram.0.clone(),
                q: q.values("q").map_err(Failure::Config)?,
                i,
                j,
                e: e.values("e").map_err(Failure::Config)?,
                t_max: *t,
                end_to_end: *end_to_end,
                span: *span,
                vb_abs: *vb_abs,
            })
        }
    }
}

fn emit(report: &Report, out: Option<&PathBuf>) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if let Err(e) = emit(&report, cli.out.as_ref()) {
                eprintln!("afl-calc: cannot write report: {e}");
                return ExitCode::from(2);
            }
            let s = &report.summary;
            eprintln!(
                "{}: {} rows, {} passed, {} failed, {} skipped",
                report.command, s.rows, s.passed, s.failed, s.skipped
            );
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Config(msg)) => {
            eprintln!("afl-calc: {msg}");
            ExitCode::from(2)
        }
    }
}
