use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use plc_enforce::bench::{
    fit_quadratic, ladder, loglog_slope, max_relative_deviation, measure_complexity,
};
use plc_enforce::dsl::{parse_action, parse_trace, Definition};
use plc_enforce::explore_parallel;
use plc_enforce::export;
use plc_enforce::gen::{self, Monitors, WtnParams};
use plc_enforce::sysref::{parse_infection, read_source, resolve, Resolved};
use plc_enforce_core::{
    check_syntactic_determinism, detect_on_trace, execute, find_deadlocks, synthesize,
    trace_equivalent, weakly_bisimilar, weakly_simulated_by, Alphabet, EquivError, ExploreError,
    Explored, Schedule, System, Validate, ValidateOptions, DEFAULT_PAIR_BUDGET,
};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "plc-enforce",
    version,
    about = "Monitor synthesis and enforcement checking for PLC networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ExploreOpts {
    /// State budget for exploration.
    #[arg(long, env = "PLC_ENFORCE_BUDGET", default_value_t = plc_enforce_core::DEFAULT_BUDGET)]
    budget: usize,
    /// Worker threads for exploration.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Enable the mitigation rule on every monitored node.
    #[arg(long, conflicts_with = "no_mitigation")]
    mitigation: bool,
    /// Disable the mitigation rule on every node.
    #[arg(long)]
    no_mitigation: bool,
}

impl ExploreOpts {
    fn mitigation(&self) -> Option<bool> {
        match (self.mitigation, self.no_mitigation) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        }
    }

    fn load(&self, reference: &str) -> Result<Resolved> {
        let mut r = resolve(reference)?;
        r.set_mitigation(self.mitigation());
        Ok(r)
    }
}

#[derive(Args, Clone)]
struct ScheduleOpts {
    /// Scripted choices, `step:choice` pairs separated by commas.
    #[arg(long, conflicts_with_all = ["seed", "exhaustive"])]
    script: Option<String>,
    /// Resolve choices with a seeded random generator.
    #[arg(long, conflicts_with = "exhaustive")]
    seed: Option<u64>,
    /// Enumerate every run up to the step count.
    #[arg(long)]
    exhaustive: bool,
    /// Number of steps per run.
    #[arg(long, default_value_t = 20)]
    steps: usize,
}

impl ScheduleOpts {
    fn schedule(&self) -> Result<Schedule> {
        if self.exhaustive {
            return Ok(Schedule::Exhaustive);
        }
        if let Some(seed) = self.seed {
            return Ok(Schedule::Random { seed });
        }
        let mut choices = Vec::new();
        if let Some(s) = &self.script {
            for item in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (step, choice) = item
                    .split_once(':')
                    .with_context(|| format!("expected step:choice, found `{item}`"))?;
                choices.push((step.trim().parse()?, choice.trim().parse()?));
            }
        }
        Ok(Schedule::Scripted(choices))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    Trace,
    Sim,
    Bisim,
}

#[derive(Clone, Copy, ValueEnum)]
enum MonitorArg {
    Synth,
    Go,
}

#[derive(Subcommand)]
enum Command {
    /// Check every definition of a file.
    Validate {
        file: PathBuf,
        /// Also require distinct guards in every sum.
        #[arg(long)]
        deterministic: bool,
    },
    /// Print the monitor synthesized from a controller, `file.plc:Name`.
    Synth {
        controller: String,
        /// Materialize suppressions as explicit branches.
        #[arg(long)]
        expand: bool,
    },
    /// Explore a system and print its state graph.
    Lts {
        system: String,
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        explore: ExploreOpts,
    },
    /// Execute a single monitored controller and print its event log.
    Simulate {
        system: String,
        #[command(flatten)]
        schedule: ScheduleOpts,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        explore: ExploreOpts,
    },
    /// Report detections; exits with 1 when any anomaly is detected.
    Detect {
        system: String,
        /// Genuine weak trace, comma separated; with `--alpha`, query a
        /// single attempted action instead of running the system.
        #[arg(long, requires = "alpha")]
        trace: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        #[command(flatten)]
        schedule: ScheduleOpts,
        #[command(flatten)]
        explore: ExploreOpts,
    },
    /// Decide a behavioural relation between two systems.
    Check {
        relation: RelationArg,
        left: String,
        right: String,
        /// Budget on product states for the decision procedure.
        #[arg(long, default_value_t = DEFAULT_PAIR_BUDGET)]
        pair_budget: usize,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        explore: ExploreOpts,
    },
    /// Print the water transmission network as a `.plc` file.
    Wtn {
        n: usize,
        /// clean, malware, or malware@I+J
        #[arg(long, default_value = "clean")]
        malware: String,
        #[arg(long, value_enum, default_value = "synth")]
        monitors: MonitorArg,
        #[arg(long)]
        mitigation: bool,
    },
    /// Print a random time-guarded malware term.
    Randmal {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Take the alphabet from this file instead of a one-tank network.
        #[arg(long)]
        alphabet: Option<PathBuf>,
    },
    /// Measure synthesis output size and time on a ladder of controllers.
    BenchSynth {
        #[arg(long, default_value_t = 10)]
        from: usize,
        #[arg(long, default_value_t = 200)]
        to: usize,
        #[arg(long, default_value_t = 10)]
        step: usize,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

fn explore_system(r: &Resolved, opts: &ExploreOpts) -> Result<(System, Explored)> {
    let system = System::new(&r.network, &r.alphabet)?;
    let explored = explore_parallel(&system, opts.budget, opts.jobs)?;
    Ok((system, explored))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate {
            file,
            deterministic,
        } => {
            let source = read_source(&file)?;
            let opts = if deterministic {
                ValidateOptions::deterministic()
            } else {
                ValidateOptions::default()
            };
            let mut bad = 0;
            for v in source.alphabet.violations(&source.alphabet, opts) {
                println!("alphabet: {v}");
                bad += 1;
            }
            for (name, def) in &source.definitions {
                let violations = match def {
                    Definition::Controller(p) => p.violations(&source.alphabet, opts),
                    Definition::Malware(m) => m.violations(&source.alphabet, opts),
                    Definition::Automaton(e) => e.violations(&source.alphabet, opts),
                    Definition::Network(_) => {
                        source.network(name)?.violations(&source.alphabet, opts)
                    }
                };
                for v in &violations {
                    println!("{name}: {v}");
                }
                bad += violations.len();
            }
            if bad == 0 {
                println!("ok");
                Ok(0)
            } else {
                Ok(EXIT_FAIL)
            }
        }
        Command::Synth { controller, expand } => {
            let (path, name) = controller.rsplit_once(':').unwrap_or((&controller, ""));
            let source = read_source(path.as_ref())?;
            let p = if name.is_empty() {
                let mut ps = source.definitions.iter().filter_map(|(_, d)| match d {
                    Definition::Controller(p) => Some(p),
                    _ => None,
                });
                match (ps.next(), ps.next()) {
                    (Some(p), None) => p,
                    _ => bail!("name the controller to synthesize: {path}:Name"),
                }
            } else {
                source.controller(name)?
            };
            let report = synthesize(p, &source.alphabet)?;
            let e = if expand {
                report.automaton.expand(&source.alphabet)
            } else {
                report.automaton.clone()
            };
            println!("{e}");
            eprintln!(
                "size {} -> {} branches, deterministic: {}",
                report.input_size,
                report.output_branch_count,
                check_syntactic_determinism(&report.automaton)
            );
            Ok(0)
        }
        Command::Lts {
            system,
            dot,
            json,
            explore,
        } => {
            let r = explore.load(&system)?;
            let (sys, ex) = explore_system(&r, &explore)?;
            if dot {
                print!("{}", export::lts_dot(&ex));
            } else if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&export::lts_json(&sys, &ex))?
                );
            } else {
                let deadlocks = find_deadlocks(&ex.lts);
                println!("states {}", ex.lts.num_states());
                println!("edges {}", ex.lts.num_edges());
                println!("deadlocks {}", deadlocks.len());
                if let Some(&d) = deadlocks.first() {
                    let path: Vec<String> = ex
                        .lts
                        .path_to(d)
                        .unwrap_or_default()
                        .iter()
                        .map(ToString::to_string)
                        .collect();
                    println!("first deadlock after: {}", path.join(", "));
                }
            }
            Ok(0)
        }
        Command::Simulate {
            system,
            schedule,
            json,
            explore,
        } => {
            let r = explore.load(&system)?;
            let sys = System::new(&r.network, &r.alphabet)?;
            let runs = execute(&sys, &schedule.schedule()?, schedule.steps)?;
            if json {
                let out: Vec<_> = runs.iter().map(export::run_json).collect();
                println!("{}", serde_json::to_string_pretty(&out)?);
            } else {
                for run in &runs {
                    print!("{}", export::run_text(run));
                }
            }
            Ok(0)
        }
        Command::Detect {
            system,
            trace,
            alpha,
            schedule,
            explore,
        } => {
            let r = explore.load(&system)?;
            if let Some(alpha) = alpha {
                let [node] = &r.network.nodes[..] else {
                    bail!("detection queries need a single monitored controller");
                };
                let Some(m) = &node.body.malware else {
                    bail!("detection queries need a compromised controller");
                };
                let t = parse_trace(trace.as_deref().unwrap_or(""), Some(&r.alphabet))?;
                let a = parse_action(&alpha, Some(&r.alphabet))?;
                let d = detect_on_trace(
                    &node.body.controller,
                    m,
                    &t,
                    &a,
                    &r.alphabet,
                    node.mitigation,
                )?;
                println!("detected {}", d.detected);
                println!("false-positive {}", d.false_positive);
                for (kind, action) in &d.responses {
                    println!("response {kind} {action}");
                }
                return Ok(if d.detected { EXIT_FAIL } else { 0 });
            }
            let sys = System::new(&r.network, &r.alphabet)?;
            let runs = execute(&sys, &schedule.schedule()?, schedule.steps)?;
            let mut detections = 0;
            for run in &runs {
                for e in run.events.iter().filter(|e| {
                    e.kind.is_detection() || e.kind == plc_enforce_core::EventKind::FalsePositive
                }) {
                    println!("run {} {}", run.id, export::event_line(e));
                    detections += 1;
                }
            }
            println!("{detections} detection events in {} runs", runs.len());
            Ok(if detections > 0 { EXIT_FAIL } else { 0 })
        }
        Command::Check {
            relation,
            left,
            right,
            pair_budget,
            json,
            explore,
        } => {
            let l = explore.load(&left)?;
            let r = explore.load(&right)?;
            let (_, lx) = explore_system(&l, &explore)?;
            let (_, rx) = explore_system(&r, &explore)?;
            let verdict = match relation {
                RelationArg::Trace => trace_equivalent(&lx.lts, &rx.lts, pair_budget)?,
                RelationArg::Sim => weakly_simulated_by(&lx.lts, &rx.lts, pair_budget)?,
                RelationArg::Bisim => weakly_bisimilar(&lx.lts, &rx.lts, pair_budget)?,
            };
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&export::verdict_json(&verdict))?
                );
            } else {
                print!("{}", export::verdict_text(&verdict, 200));
                println!(
                    "left {} states, right {} states",
                    lx.lts.num_states(),
                    rx.lts.num_states()
                );
            }
            Ok(if verdict.holds { 0 } else { EXIT_FAIL })
        }
        Command::Wtn {
            n,
            malware,
            monitors,
            mitigation,
        } => {
            let params = WtnParams {
                n,
                infection: parse_infection(&malware)?,
                monitors: match monitors {
                    MonitorArg::Synth => Monitors::Synthesized,
                    MonitorArg::Go => Monitors::Go,
                },
                mitigation,
            };
            print!("{}", gen::wtn(&params)?);
            Ok(0)
        }
        Command::Randmal {
            seed,
            depth,
            alphabet,
        } => {
            if depth == 0 {
                bail!("depth must be at least 1");
            }
            let a: Alphabet = match alphabet {
                Some(path) => read_source(&path)?.alphabet,
                None => gen::wtn_alphabet(1),
            };
            println!("{}", gen::random_malware(&a, &mut gen::rng(seed), depth));
            Ok(0)
        }
        Command::BenchSynth {
            from,
            to,
            step,
            repeats,
        } => {
            if from < 3 || step == 0 || to < from {
                bail!("need 3 <= from <= to and step > 0");
            }
            let sizes: Vec<usize> = (from..=to).step_by(step).collect();
            let rows = measure_complexity(&ladder(&sizes), repeats)?;
            println!("{:>6} {:>10} {:>12}", "n", "branches", "micros");
            for row in &rows {
                println!(
                    "{:>6} {:>10} {:>12.1}",
                    row.n,
                    row.branches,
                    row.elapsed.as_secs_f64() * 1e6
                );
            }
            let c = fit_quadratic(&rows);
            println!(
                "fitted c = {c:.4}, max deviation {:.1}%",
                100.0 * max_relative_deviation(&rows, c)
            );
            println!("log-log time slope {:.3}", loglog_slope(&rows));
            Ok(0)
        }
    }
}

fn budget_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<ExploreError>().is_some()
            || c.downcast_ref::<EquivError>().is_some()
            || matches!(
                c.downcast_ref::<plc_enforce_core::ExecuteError>(),
                Some(plc_enforce_core::ExecuteError::Oracle(_))
            )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if budget_error(&e) {
                EXIT_BUDGET
            } else {
                EXIT_USAGE
            })
        }
    }
}
