//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured figures. Exits non-zero if any criterion fails.

use std::collections::{BTreeSet, HashSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use plc_enforce::bench::{
    fit_quadratic, ladder, loglog_slope, max_relative_deviation, measure_complexity,
};
use plc_enforce::dsl::{parse_automaton, parse_controller, parse_malware, parse_network};
use plc_enforce::explore_parallel;
use plc_enforce::gen::{
    mimic_malware, random_controller, random_malware, rng, wtn, wtn_alphabet, wtn_controller,
    wtn_malware, Infection, Monitors, WtnParams,
};
use plc_enforce_core::hml::{Formula, Hml};
use plc_enforce_core::{
    check_syntactic_determinism, ctrl_step, execute, explore, find_deadlocks, synthesize,
    trace_equivalent, weakly_bisimilar, weakly_simulated_by, Action, Alphabet, CompromisedTerm,
    ControllerTerm, Counterexample, EditAutomaton, EventKind, FieldNetwork, Lts, MalwareTerm,
    MonitoredController, NodeRule, Schedule, System, DEFAULT_BUDGET, DEFAULT_PAIR_BUDGET,
};

const TRANSPARENCY_LIMIT: Duration = Duration::from_secs(10);
const SIMULATION_LIMIT: Duration = Duration::from_secs(30);
const COLLUSION_LIMIT: Duration = Duration::from_secs(300);
const QUADRATIC_TOLERANCE: f64 = 0.25;
const SLOPE_LIMIT: f64 = 2.3;

const RANDOM_CONTROLLERS: u64 = 50;
const RANDOM_PAIRS: u64 = 100;
const RANDOM_MALWARE: u64 = 100;
const ROUND_TRIP_TERMS: usize = 1000;
const NEVER_DEADLOCK_CONTROLLERS: u64 = 500;
const ANOMALY_DEPTH: usize = 12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_alphabet() -> Alphabet {
    Alphabet::new(["s0", "s1", "s2"], ["a0", "a1"], ["c0", "c1"])
}

fn node(
    monitor: EditAutomaton,
    p: &ControllerTerm,
    m: Option<&MalwareTerm>,
    mitigation: bool,
) -> FieldNetwork {
    let body = match m {
        Some(m) => CompromisedTerm::infected(p.clone(), m.clone()),
        None => CompromisedTerm::genuine(p.clone()),
    };
    FieldNetwork::single(MonitoredController::new(monitor, body).with_mitigation(mitigation))
}

fn monitor_of(p: &ControllerTerm, alphabet: &Alphabet) -> EditAutomaton {
    synthesize(p, alphabet)
        .expect("controller synthesizes")
        .automaton
}

fn lts(net: &FieldNetwork, alphabet: &Alphabet) -> Lts {
    let sys = System::new(net, alphabet).expect("valid system");
    explore(&sys, DEFAULT_BUDGET).expect("within budget").lts
}

fn wtn_net(
    n: usize,
    infection: Infection,
    monitors: Monitors,
    mitigation: bool,
) -> (FieldNetwork, Alphabet) {
    let file = wtn(&WtnParams {
        n,
        infection,
        monitors,
        mitigation,
    })
    .expect("n > 0");
    (file.entry().expect("entry network"), file.alphabet)
}

fn random_controllers(alphabet: &Alphabet, count: u64, salt: u64) -> Vec<ControllerTerm> {
    (0..count)
        .map(|seed| random_controller(alphabet, &mut rng(salt + seed), 3))
        .collect()
}

fn slowest(times: &[Duration]) -> Duration {
    times.iter().copied().max().unwrap_or_default()
}

/// Weak satisfaction, evaluated top-down from one state.
struct Replay<'a> {
    lts: &'a Lts,
}

impl Replay<'_> {
    fn closure(&self, s: u32) -> Vec<u32> {
        let mut seen = BTreeSet::from([s]);
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &(a, t) in self.lts.successors(x) {
                if *self.lts.action(a) == Action::Tau && seen.insert(t) {
                    stack.push(t);
                }
            }
        }
        seen.into_iter().collect()
    }

    fn weak_succ(&self, s: u32, a: &Action) -> Vec<u32> {
        let before = self.closure(s);
        if *a == Action::Tau {
            return before;
        }
        let mut out = BTreeSet::new();
        for x in before {
            for &(b, t) in self.lts.successors(x) {
                if self.lts.action(b) == a {
                    out.extend(self.closure(t));
                }
            }
        }
        out.into_iter().collect()
    }

    fn sat(&self, h: &Hml, f: usize, s: u32) -> bool {
        match h.node(f) {
            Formula::True => true,
            Formula::False => false,
            Formula::Diamond(a, c) => self.weak_succ(s, a).into_iter().any(|t| self.sat(h, *c, t)),
            Formula::Box(a, c) => self.weak_succ(s, a).into_iter().all(|t| self.sat(h, *c, t)),
            Formula::And(cs) => cs.iter().all(|&c| self.sat(h, c, s)),
            Formula::Or(cs) => cs.iter().any(|&c| self.sat(h, c, s)),
        }
    }
}

fn replays(h: &Hml, left: &Lts, right: &Lts) -> bool {
    Replay { lts: left }.sat(h, h.root(), left.initial())
        && !Replay { lts: right }.sat(h, h.root(), right.initial())
}

fn transparency() -> Outcome {
    let mut cases: Vec<(ControllerTerm, Alphabet)> = (1..=3)
        .map(|i| (wtn_controller(i), wtn_alphabet(3)))
        .collect();
    let a = random_alphabet();
    cases.extend(
        random_controllers(&a, RANDOM_CONTROLLERS, 1_000)
            .into_iter()
            .map(|p| (p, a.clone())),
    );
    let mut failures = 0;
    let mut times = Vec::new();
    for (p, alphabet) in &cases {
        let start = Instant::now();
        let monitored = lts(&node(monitor_of(p, alphabet), p, None, false), alphabet);
        let reference = lts(&node(EditAutomaton::Go, p, None, false), alphabet);
        let v =
            weakly_bisimilar(&monitored, &reference, DEFAULT_PAIR_BUDGET).expect("within budget");
        times.push(start.elapsed());
        if !v.holds {
            failures += 1;
        }
    }
    let max = slowest(&times);
    outcome(
        failures == 0 && max < TRANSPARENCY_LIMIT,
        format!(
            "{} controllers, {failures} not bisimilar, slowest {max:.2?} (limit {TRANSPARENCY_LIMIT:?})",
            cases.len()
        ),
    )
}

fn simulation() -> Outcome {
    let a = random_alphabet();
    let mut failures = Vec::new();
    let mut times = Vec::new();
    for seed in 0..RANDOM_PAIRS {
        let mut r = rng(2_000 + seed);
        let p = random_controller(&a, &mut r, 3);
        let m = random_malware(&a, &mut r, 3);
        let start = Instant::now();
        let e = monitor_of(&p, &a);
        let attacked = lts(&node(e.clone(), &p, Some(&m), false), &a);
        let clean = lts(&node(e, &p, None, false), &a);
        let reference = lts(&node(EditAutomaton::Go, &p, None, false), &a);
        let checks = [
            weakly_simulated_by(&attacked, &clean, DEFAULT_PAIR_BUDGET),
            weakly_simulated_by(&clean, &attacked, DEFAULT_PAIR_BUDGET),
            weakly_simulated_by(&attacked, &reference, DEFAULT_PAIR_BUDGET),
            weakly_simulated_by(&reference, &attacked, DEFAULT_PAIR_BUDGET),
        ];
        times.push(start.elapsed());
        if !checks
            .iter()
            .all(|c| c.as_ref().map(|v| v.holds).unwrap_or(false))
        {
            failures.push(seed);
        }
    }
    let max = slowest(&times);
    outcome(
        failures.is_empty() && max < SIMULATION_LIMIT,
        format!(
            "{RANDOM_PAIRS} pairs, failing seeds {failures:?}, slowest {max:.2?} (limit {SIMULATION_LIMIT:?})"
        ),
    )
}

fn trace_soundness() -> Outcome {
    let a = wtn_alphabet(1);
    let p = wtn_controller(1);
    let e = monitor_of(&p, &a);
    let reference = lts(&node(EditAutomaton::Go, &p, None, false), &a);
    let mut malware = vec![wtn_malware(1), mimic_malware(1)];
    malware.extend((0..RANDOM_MALWARE).map(|seed| random_malware(&a, &mut rng(3_000 + seed), 3)));
    let mut failures = Vec::new();
    for (k, m) in malware.iter().enumerate() {
        let attacked = lts(&node(e.clone(), &p, Some(m), false), &a);
        let v =
            trace_equivalent(&attacked, &reference, DEFAULT_PAIR_BUDGET).expect("within budget");
        if !v.holds {
            if let Some(Counterexample::Trace { trace, .. }) = v.counterexample {
                failures.push((k, trace.len()));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} malware terms on tank 1, failures (index, shortest trace) {failures:?}",
            malware.len()
        ),
    )
}

struct Scenario {
    name: &'static str,
    p: ControllerTerm,
    m: MalwareTerm,
    alphabet: Alphabet,
}

fn scenarios() -> Vec<Scenario> {
    vec![
        Scenario {
            name: "mimic",
            p: wtn_controller(1),
            m: mimic_malware(1),
            alphabet: wtn_alphabet(1),
        },
        Scenario {
            name: "drop-then-end",
            p: wtn_controller(1),
            m: wtn_malware(1),
            alphabet: wtn_alphabet(1),
        },
    ]
}

fn unmitigated_failures() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for s in scenarios() {
        let e = monitor_of(&s.p, &s.alphabet);
        let sys = System::new(&node(e, &s.p, Some(&s.m), false), &s.alphabet).expect("valid");
        let attacked = explore(&sys, DEFAULT_BUDGET).expect("within budget").lts;
        let reference = lts(&node(EditAutomaton::Go, &s.p, None, false), &s.alphabet);
        let deadlocks = find_deadlocks(&attacked);
        let replayed = deadlocks
            .first()
            .and_then(|&d| attacked.path_to(d))
            .is_some_and(|path| {
                let mut state = attacked.initial();
                for a in &path {
                    let label = attacked.label_of(a).expect("known action");
                    match attacked
                        .successors(state)
                        .iter()
                        .find(|&&(b, _)| b == label)
                    {
                        Some(&(_, t)) => state = t,
                        None => return false,
                    }
                }
                deadlocks.contains(&state) && attacked.successors(state).is_empty()
            });
        let v =
            weakly_bisimilar(&attacked, &reference, DEFAULT_PAIR_BUDGET).expect("within budget");
        let formula = match &v.counterexample {
            Some(Counterexample::Formula(h)) => replays(h, &attacked, &reference),
            _ => false,
        };
        pass &= !deadlocks.is_empty() && replayed && !v.holds && formula;
        notes.push(format!(
            "{}: {} deadlocks, path replayed {replayed}, bisimilar {}, formula replayed {formula}",
            s.name,
            deadlocks.len(),
            v.holds
        ));
    }
    outcome(pass, notes.join("; "))
}

fn mitigated_recovery() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for s in scenarios() {
        let e = monitor_of(&s.p, &s.alphabet);
        let attacked = lts(&node(e, &s.p, Some(&s.m), true), &s.alphabet);
        let reference = lts(&node(EditAutomaton::Go, &s.p, None, false), &s.alphabet);
        let deadlocks = find_deadlocks(&attacked).len();
        let v =
            weakly_bisimilar(&attacked, &reference, DEFAULT_PAIR_BUDGET).expect("within budget");
        pass &= deadlocks == 0 && v.holds;
        notes.push(format!(
            "{}: {deadlocks} deadlocks, bisimilar {}",
            s.name, v.holds
        ));
    }
    outcome(pass, notes.join("; "))
}

fn collusion() -> Outcome {
    let start = Instant::now();
    let (attacked, a) = wtn_net(2, Infection::All, Monitors::Synthesized, true);
    let (reference, _) = wtn_net(2, Infection::Clean, Monitors::Go, false);
    let sys = System::new(&attacked, &a).expect("valid");
    let left = match explore(&sys, DEFAULT_BUDGET) {
        Ok(x) => x.lts,
        Err(e) => return outcome(false, format!("exploration failed: {e}")),
    };
    let right = lts(&reference, &a);
    let trace = trace_equivalent(&left, &right, DEFAULT_PAIR_BUDGET);
    let bisim = weakly_bisimilar(&left, &right, DEFAULT_PAIR_BUDGET);
    let elapsed = start.elapsed();
    match (trace, bisim) {
        (Ok(t), Ok(b)) => outcome(
            t.holds && b.holds && elapsed < COLLUSION_LIMIT,
            format!(
                "{} states, trace equivalent {}, bisimilar {} ({} pairs), {elapsed:.2?} (limit {COLLUSION_LIMIT:?})",
                left.num_states(),
                t.holds,
                b.holds,
                b.pairs
            ),
        ),
        (t, b) => outcome(false, format!("checker error: {:?} / {:?}", t.err(), b.err())),
    }
}

fn determinism() -> Outcome {
    let mut corpus: Vec<(ControllerTerm, Alphabet)> = (1..=4)
        .map(|i| (wtn_controller(i), wtn_alphabet(4)))
        .collect();
    let a = random_alphabet();
    corpus.extend(
        random_controllers(&a, 500, 4_000)
            .into_iter()
            .map(|p| (p, a.clone())),
    );
    let deterministic = corpus
        .iter()
        .filter(|(p, alphabet)| check_syntactic_determinism(&monitor_of(p, alphabet)))
        .count();
    outcome(
        deterministic == corpus.len(),
        format!(
            "{deterministic}/{} synthesized automata deterministic",
            corpus.len()
        ),
    )
}

fn complexity() -> Outcome {
    let sizes: Vec<usize> = (10..=200).step_by(10).collect();
    let rows = measure_complexity(&ladder(&sizes), 5).expect("ladder synthesizes");
    let c = fit_quadratic(&rows);
    let deviation = max_relative_deviation(&rows, c);
    let slope = loglog_slope(&rows);
    outcome(
        deviation <= QUADRATIC_TOLERANCE && slope <= SLOPE_LIMIT,
        format!(
            "n = 10..200, max deviation from c*n^2 {:.1}% (limit {:.0}%), log-log slope {slope:.2} (limit {SLOPE_LIMIT})",
            deviation * 100.0,
            QUADRATIC_TOLERANCE * 100.0
        ),
    )
}

/// Genuine weak traces, as a set of states of the reference system.
struct Genuine {
    replay: Lts,
}

impl Genuine {
    fn after(&self, observed: &[Action]) -> Vec<u32> {
        let r = Replay { lts: &self.replay };
        let mut set = r.closure(self.replay.initial());
        for a in observed {
            let mut next = BTreeSet::new();
            for s in set {
                next.extend(r.weak_succ(s, a));
            }
            set = next.into_iter().collect();
        }
        set
    }

    fn allows(&self, observed: &[Action], a: &Action) -> bool {
        if !a.is_observable() {
            return true;
        }
        let r = Replay { lts: &self.replay };
        self.after(observed)
            .into_iter()
            .any(|s| !r.weak_succ(s, a).is_empty())
    }
}

#[derive(Default)]
struct DetectionTally {
    runs: usize,
    anomalous: usize,
    misplaced: Vec<String>,
    false_positives: usize,
    unanswered: usize,
}

fn check_run(
    tally: &mut DetectionTally,
    sys: &System,
    genuine: &Genuine,
    label: &str,
    run: &plc_enforce_core::Run,
) {
    tally.runs += 1;
    tally.false_positives += run
        .events
        .iter()
        .filter(|e| e.kind == EventKind::FalsePositive)
        .count();
    let observed = |upto: usize| -> Vec<Action> {
        run.trace[..upto]
            .iter()
            .filter(|a| a.is_observable())
            .cloned()
            .collect()
    };
    // first position whose attempts include an off-genuine observable action
    let mut first = None;
    for (pos, &state) in run.states.iter().enumerate() {
        let prefix = observed(pos.min(run.trace.len()));
        let mut attempts = Vec::new();
        sys.compromised_moves(state.ctrl, state.mal, &mut attempts);
        let chosen = run
            .events
            .iter()
            .find(|e| e.position == pos && e.state_after.is_some())
            .map(|e| e.attempted.clone());
        let blocked: Vec<Action> = run
            .events
            .iter()
            .filter(|e| e.position == pos && e.state_after.is_none())
            .map(|e| e.attempted.clone())
            .collect();
        let offending: Vec<Action> = chosen
            .into_iter()
            .chain(blocked)
            .filter(|a| !genuine.allows(&prefix, a))
            .collect();
        if !offending.is_empty() {
            first = Some((pos, offending));
            break;
        }
    }
    let early = run
        .events
        .iter()
        .find(|e| e.kind.is_detection() && first.as_ref().is_none_or(|(p, _)| e.position < *p));
    if let Some(e) = early {
        tally.misplaced.push(format!(
            "{label} run {}: early {} at {}",
            run.id, e.kind, e.position
        ));
        return;
    }
    let Some((pos, offending)) = first else {
        return;
    };
    tally.anomalous += 1;
    let hits: Vec<_> = run
        .events
        .iter()
        .filter(|e| e.position == pos && e.kind.is_detection() && offending.contains(&e.attempted))
        .collect();
    if hits.is_empty() {
        tally
            .misplaced
            .push(format!("{label} run {}: no detection at {pos}", run.id));
        return;
    }
    let answered = hits.iter().any(|e| match e.kind {
        EventKind::Corrected | EventKind::Suppressed | EventKind::Mitigated => true,
        _ => sys.node_moves(0, e.state_before).iter().any(|m| {
            m.rule == NodeRule::Mitigation || sys.action(m.emitted) != sys.action(m.attempted)
        }),
    });
    if !answered {
        tally.unanswered += 1;
    }
}

fn detection() -> Outcome {
    let mut tally = DetectionTally::default();
    let a = wtn_alphabet(1);
    let p = wtn_controller(1);
    let e = monitor_of(&p, &a);
    let genuine = Genuine {
        replay: lts(&node(EditAutomaton::Go, &p, None, false), &a),
    };
    let mut jobs: Vec<(String, MalwareTerm, Schedule, usize)> = vec![
        (
            "drop-then-end".into(),
            wtn_malware(1),
            Schedule::Exhaustive,
            ANOMALY_DEPTH,
        ),
        (
            "mimic".into(),
            mimic_malware(1),
            Schedule::Exhaustive,
            ANOMALY_DEPTH,
        ),
    ];
    for seed in 0..RANDOM_MALWARE {
        let m = random_malware(&a, &mut rng(5_000 + seed), 3);
        for run_seed in 0..5 {
            jobs.push((
                format!("random {seed}"),
                m.clone(),
                Schedule::Random { seed: run_seed },
                30,
            ));
        }
    }
    for (label, m, schedule, steps) in &jobs {
        let sys = System::new(&node(e.clone(), &p, Some(m), true), &a).expect("valid");
        let runs = execute(&sys, schedule, *steps).expect("single node");
        for run in &runs {
            check_run(&mut tally, &sys, &genuine, label, run);
        }
    }
    let pass = tally.anomalous > 0
        && tally.misplaced.is_empty()
        && tally.false_positives == 0
        && tally.unanswered == 0;
    let shown: Vec<&String> = tally.misplaced.iter().take(3).collect();
    outcome(
        pass,
        format!(
            "{} runs, {} anomalous, {} misplaced {shown:?}, {} false positives, {} without response",
            tally.runs,
            tally.anomalous,
            tally.misplaced.len(),
            tally.false_positives,
            tally.unanswered
        ),
    )
}

fn round_trip() -> Outcome {
    let a = random_alphabet();
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut seed = 6_000;
    while checked < ROUND_TRIP_TERMS {
        let mut r = rng(seed);
        let p = random_controller(&a, &mut r, 3);
        let m = random_malware(&a, &mut r, 4);
        let e = monitor_of(&p, &a);
        let net = node(e.clone(), &p, Some(&m), seed % 2 == 0);
        let ok = [
            parse_controller(&p.to_string(), Some(&a)).ok() == Some(p.clone()),
            parse_malware(&m.to_string(), Some(&a)).ok() == Some(m.clone()),
            parse_automaton(&e.to_string(), Some(&a)).ok() == Some(e.clone()),
            parse_network(&net.to_string(), Some(&a)).ok() == Some(net),
        ];
        for (k, good) in ok.into_iter().enumerate() {
            if !good {
                failures.push((seed, k));
            }
        }
        checked += ok.len();
        seed += 1;
    }
    outcome(
        failures.is_empty(),
        format!("{checked} terms printed and parsed back, mismatches {failures:?}"),
    )
}

fn maximal_progress() -> Outcome {
    let mut bad = 0;
    let mut states = 0;
    let systems = [
        wtn_net(2, Infection::All, Monitors::Synthesized, true),
        wtn_net(2, Infection::All, Monitors::Synthesized, false),
        wtn_net(2, Infection::Clean, Monitors::Go, false),
    ];
    for (net, a) in &systems {
        let l = lts(net, a);
        states += l.num_states();
        for s in 0..l.num_states() as u32 {
            let acts: HashSet<&Action> =
                l.successors(s).iter().map(|&(x, _)| l.action(x)).collect();
            if acts.contains(&Action::Tau) && acts.contains(&Action::Tick) {
                bad += 1;
            }
        }
    }
    outcome(
        bad == 0,
        format!("{states} states, {bad} with both tau and tick"),
    )
}

fn never_deadlock() -> Outcome {
    let a = random_alphabet();
    let mut stuck = Vec::new();
    for (k, p) in random_controllers(&a, NEVER_DEADLOCK_CONTROLLERS, 7_000)
        .iter()
        .enumerate()
    {
        let mut seen = HashSet::from([p.clone()]);
        let mut stack = vec![p.clone()];
        while let Some(z) = stack.pop() {
            let next = ctrl_step(&z);
            if next.is_empty() {
                stuck.push(k);
                break;
            }
            for (_, z2) in next {
                if seen.insert(z2.clone()) {
                    stack.push(z2);
                }
            }
        }
    }
    outcome(
        stuck.is_empty(),
        format!("{NEVER_DEADLOCK_CONTROLLERS} controllers, stuck {stuck:?}"),
    )
}

fn jobs_determinism() -> Outcome {
    let (net, a) = wtn_net(2, Infection::All, Monitors::Synthesized, true);
    let sys = System::new(&net, &a).expect("valid");
    let base = explore_parallel(&sys, DEFAULT_BUDGET, 1).expect("within budget");
    let base_edges: Vec<_> = base
        .lts
        .edges()
        .map(|(s, x, t)| (s, x.clone(), t))
        .collect();
    let mut differing = Vec::new();
    for jobs in [2, 4, 8] {
        let other = explore_parallel(&sys, DEFAULT_BUDGET, jobs).expect("within budget");
        let edges: Vec<_> = other
            .lts
            .edges()
            .map(|(s, x, t)| (s, x.clone(), t))
            .collect();
        if other.states != base.states || edges != base_edges {
            differing.push(jobs);
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} states, {} edges, identical for jobs 1, 2, 4, 8 (differing: {differing:?})",
            base.states.len(),
            base_edges.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("1 transparency of synthesized monitors", transparency),
        ("2 mutual weak simulation under attack", simulation),
        (
            "3 trace equivalence under arbitrary malware",
            trace_soundness,
        ),
        (
            "4 deadlock and divergence without mitigation",
            unmitigated_failures,
        ),
        ("5 recovery with mitigation", mitigated_recovery),
        ("6 colluding malware on two tanks", collusion),
        ("7 determinism of synthesized automata", determinism),
        ("8 quadratic synthesis cost", complexity),
        ("9 detection at the first off-genuine action", detection),
        ("10a print/parse round trip", round_trip),
        ("10b maximal progress", maximal_progress),
        ("10c controllers never deadlock", never_deadlock),
        ("10d exploration independent of job count", jobs_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.2?}]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 13 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
