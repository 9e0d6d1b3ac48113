//! `fcmj` command-line front end.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 bad input,
//! 3 infeasible or mismatched schedule, 4 search budget exhausted.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fcmj::model::{validate, warnings, Instance, Schedule, TriggerMode};
use fcmj::numtheory::PosInt;
use fcmj::objective::{cost_rate_with_cap, schedule_period, simulated_cost, DEFAULT_SUBSET_CAP};
use fcmj::rational::ExactRational;
use fcmj::reduction::{
    factorize_with, verify_reduction_with, FactorTrace, ReductionReport, DEFAULT_VERIFY_CAP,
};
use fcmj::solver::{SolverConfig, DEFAULT_BUDGET};
use fcmj::Error;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "fcmj", version, about = "Exact maintenance-cycle optimization and the factoring reduction")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Maximum objective evaluations for a search.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,

    /// Override the instance's trigger mode.
    #[arg(long, global = true, value_enum)]
    trigger_mode: Option<Mode>,

    /// Largest number of distinct cycle times per module for inclusion-exclusion.
    #[arg(long, global = true, default_value_t = DEFAULT_SUBSET_CAP)]
    subset_cap: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Descendants,
    DirectChildren,
}

impl From<Mode> for TriggerMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Descendants => TriggerMode::Descendants,
            Mode::DirectChildren => TriggerMode::DirectChildren,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact cost rate of a schedule.
    Eval {
        instance: String,
        /// Schedule file, or inline JSON such as '{"1":4,"2":6}'.
        schedule: String,
    },
    /// Optimal schedule by exhaustive branch and bound.
    Solve { instance: String },
    /// Average cost of a schedule replayed period by period.
    Simulate {
        instance: String,
        schedule: String,
        /// Number of periods; defaults to one full period (lcm of the cycle times).
        #[arg(long)]
        horizon: Option<String>,
    },
    /// Prime factorization through the maintenance-problem oracle.
    Factor {
        n: String,
        /// Dump every split, including the instance that was solved.
        #[arg(long)]
        trace: bool,
    },
    /// Exhaustively check the two steps of the factoring reduction for one M.
    Verify {
        m: String,
        #[arg(long, default_value_t = DEFAULT_VERIFY_CAP)]
        cap: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::Infeasible { .. } | Error::MissingCycleTime(_) | Error::UnexpectedScheduleEntry(_) => 3,
            Error::BudgetExceeded { .. } => 4,
            _ => 2,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: 2, message }
}

fn approx(x: &ExactRational) -> String {
    format!("{x} (≈{:.4})", x.approx_f64())
}

fn read_instance(path: &str, mode: Option<Mode>) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{path}: {e}")))?;
    let mut instance = Instance::from_json(&text).map_err(|e| input_error(format!("{path}: {e}")))?;
    if let Some(mode) = mode {
        instance.trigger_mode = mode.into();
    }
    let violations = validate(&instance);
    if !violations.is_empty() {
        return Err(Error::InvalidInstance(violations).into());
    }
    for w in warnings(&instance) {
        eprintln!("warning: {w}");
    }
    Ok(instance)
}

fn read_schedule(arg: &str) -> Result<Schedule, Failure> {
    let text = if arg.trim_start().starts_with('{') || !Path::new(arg).exists() {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| input_error(format!("{arg}: {e}")))?
    };
    Schedule::from_json(&text).map_err(|e| input_error(format!("schedule: {e}")))
}

fn parse_pos(arg: &str, what: &str) -> Result<PosInt, Failure> {
    arg.parse()
        .map_err(|_| input_error(format!("{what} must be a positive decimal integer, got {arg:?}")))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

#[derive(Serialize)]
struct FactorOutput<'a> {
    n: &'a PosInt,
    factors: &'a [PosInt],
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a FactorTrace>,
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    horizon: &'a PosInt,
    average_cost: &'a ExactRational,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    #[serde(flatten)]
    report: &'a ReductionReport,
    all_ok: bool,
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let config = SolverConfig {
        budget: cli.budget,
        subset_cap: cli.subset_cap,
    };
    match cli.command {
        Command::Eval { instance, schedule } => {
            let instance = read_instance(&instance, cli.trigger_mode)?;
            let schedule = read_schedule(&schedule)?;
            let breakdown = cost_rate_with_cap(&instance, &schedule, cli.subset_cap)?;
            if cli.json {
                print_json(&breakdown);
            } else {
                for (id, v) in &breakdown.per_component {
                    println!("component {id}: {}", approx(v));
                }
                for (id, v) in &breakdown.per_module {
                    println!("module {id}: {}", approx(v));
                }
                println!("total = {}", approx(&breakdown.total));
            }
        }
        Command::Solve { instance } => {
            let instance = read_instance(&instance, cli.trigger_mode)?;
            let report = config.solve_exact(&instance)?;
            if cli.json {
                print_json(&report);
            } else {
                let (names, values): (Vec<String>, Vec<String>) = report
                    .optimal_schedule
                    .iter()
                    .map(|(id, q)| (format!("q{id}"), q.to_string()))
                    .unzip();
                println!(
                    "optimal ({})=({}), value {}",
                    names.join(","),
                    values.join(","),
                    approx(&report.optimal_value)
                );
                println!("evaluations: {}, pruned: {}", report.evaluations, report.pruned);
            }
        }
        Command::Simulate {
            instance,
            schedule,
            horizon,
        } => {
            let instance = read_instance(&instance, cli.trigger_mode)?;
            let schedule = read_schedule(&schedule)?;
            schedule.check_against(&instance)?;
            let horizon = match horizon {
                Some(h) => parse_pos(&h, "horizon")?,
                None => schedule_period(&schedule)?,
            };
            let average = simulated_cost(&instance, &schedule, &horizon)?;
            if cli.json {
                print_json(&SimulateOutput {
                    horizon: &horizon,
                    average_cost: &average,
                });
            } else {
                println!("average cost over horizon {horizon} = {}", approx(&average));
            }
        }
        Command::Factor { n, trace } => {
            let n = parse_pos(&n, "N")?;
            let result = factorize_with(&n, &config)?;
            if cli.json {
                print_json(&FactorOutput {
                    n: &n,
                    factors: &result.factors,
                    trace: trace.then_some(&result.trace),
                });
            } else {
                if result.factors.is_empty() {
                    println!("{n} = (empty product)");
                } else if result.factors.len() == 1 {
                    println!("{n} is prime");
                } else {
                    let parts: Vec<String> = result.factors.iter().map(ToString::to_string).collect();
                    println!("{n} = {}", parts.join(" · "));
                }
                if trace {
                    print_json(&result.trace);
                }
            }
        }
        Command::Verify { m, cap } => {
            let m = parse_pos(&m, "M")?;
            let rep = verify_reduction_with(&m, cap, &config)?;
            let ok = rep.all_ok();
            if cli.json {
                print_json(&VerifyOutput {
                    report: &rep,
                    all_ok: ok,
                });
            } else {
                let verdict = |b: bool| if b { "ok" } else { "FAILED" };
                let mv = m.get();
                let m_sq = mv * mv;
                println!("M = {m} ({})", if rep.composite { "composite" } else { "prime" });
                println!(
                    "step 1: {} (solver q1 = {}; min U over q1 < M = {} >= M^2 = {}; U(M, q2*) = {} <= M^2 - M + 1 = {})",
                    verdict(rep.step1_ok),
                    rep.solver_q1,
                    rep.step1_margin.0,
                    m_sq,
                    rep.step1_margin.1,
                    &m_sq - mv + 1u32,
                );
                match rep.lemma_ok {
                    Some(lemma) => println!(
                        "lemma: {} (min V over q2 coprime with M = {} > 1/M = 1/{m})",
                        verdict(lemma),
                        rep.coprime_min_v
                    ),
                    None => println!(
                        "lemma: not applicable, M is prime (min V over coprime q2 = {})",
                        rep.coprime_min_v
                    ),
                }
                println!(
                    "optimum: {} (solver q2 = {}, exhaustive min V = {})",
                    verdict(rep.solver_optimal),
                    rep.solver_q2,
                    rep.optimal_v
                );
                match (&rep.divisor, rep.divisor_ok) {
                    (Some(d), Some(d_ok)) => {
                        println!("divisor: {} (gcd({}, {m}) = {d})", verdict(d_ok), rep.solver_q2)
                    }
                    _ => println!("divisor: none, M is prime"),
                }
            }
            if !ok {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
