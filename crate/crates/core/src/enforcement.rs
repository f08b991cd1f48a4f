//! Step-by-step execution of a monitored controller with an event log that
//! classifies every monitor decision.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Action, Alphabet};
use crate::explore::{explore, ExploreError, DEFAULT_BUDGET};
use crate::lts::Lts;
use crate::synthesis::{synthesize, SynthesisError};
use crate::system::{NodeMove, NodeRule, NodeState, System, SystemError};
use crate::term::{
    CompromisedTerm, ControllerTerm, EditAutomaton, MalwareTerm, MonitoredController,
};

/// How nondeterministic choices are resolved. Successors are ordered by
/// emitted action, rule, attempted action and target state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Every run up to the step count.
    Exhaustive,
    Random {
        seed: u64,
    },
    /// `(step, choice)` pairs; unlisted steps take choice 0.
    Scripted(Vec<(usize, usize)>),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EventKind {
    Allowed,
    Detected,
    Corrected,
    Suppressed,
    Mitigated,
    FalsePositive,
}

impl EventKind {
    /// Whether the event records a reaction to an anomaly.
    pub fn is_detection(self) -> bool {
        matches!(
            self,
            EventKind::Detected
                | EventKind::Corrected
                | EventKind::Suppressed
                | EventKind::Mitigated
        )
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Allowed => "allowed",
            EventKind::Detected => "detected",
            EventKind::Corrected => "corrected",
            EventKind::Suppressed => "suppressed",
            EventKind::Mitigated => "mitigated",
            EventKind::FalsePositive => "false-positive",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EnforcementEvent {
    /// Index of the step in the run.
    pub position: usize,
    pub attempted: Action,
    /// `None` when the monitor offers no transition for `attempted`.
    pub emitted: Option<Action>,
    pub kind: EventKind,
    pub rule: Option<NodeRule>,
    pub state_before: NodeState,
    pub state_after: Option<NodeState>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Stop {
    StepLimit,
    Deadlock,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Run {
    pub id: usize,
    /// Emitted actions, `tau` included.
    pub trace: Vec<Action>,
    pub events: Vec<EnforcementEvent>,
    /// Visited states; one more than the number of steps.
    pub states: Vec<NodeState>,
    pub stop: Stop,
}

impl Run {
    pub fn steps(&self) -> impl Iterator<Item = &EnforcementEvent> {
        self.events.iter().filter(|e| e.state_after.is_some())
    }
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum ExecuteError {
    #[error("execution needs a single monitored controller, got {0} nodes")]
    NotSingleNode(usize),
    #[error("scripted choice {choice} at step {step} is out of range ({available} successors)")]
    ChoiceOutOfRange {
        step: usize,
        choice: usize,
        available: usize,
    },
    #[error("genuine behaviour could not be explored: {0}")]
    Oracle(ExploreError),
}

/// Weak states of the genuine controller consistent with the observable
/// part of the emitted trace.
struct Oracle {
    lts: Lts,
}

impl Oracle {
    fn new(system: &System) -> Result<Oracle, ExecuteError> {
        let genuine = System::monitored(&system.genuine_node(0), system.alphabet())
            .expect("genuine part of a valid system is valid");
        let ex = explore(&genuine, DEFAULT_BUDGET).map_err(ExecuteError::Oracle)?;
        Ok(Oracle { lts: ex.lts })
    }

    fn start(&self) -> Vec<u32> {
        self.lts.tau_closure(&[self.lts.initial()])
    }

    fn allows(&self, set: &[u32], a: &Action) -> bool {
        !a.is_observable() || !self.lts.weak_image(set, a).is_empty()
    }

    fn advance(&self, set: &[u32], a: &Action) -> Vec<u32> {
        if a.is_observable() {
            self.lts.weak_image(set, a)
        } else {
            set.to_vec()
        }
    }
}

fn classify(system: &System, m: &NodeMove, genuine: bool) -> EventKind {
    let attempted = system.action(m.attempted);
    let emitted = system.action(m.emitted);
    if m.rule == NodeRule::Mitigation {
        EventKind::Mitigated
    } else if emitted == attempted {
        EventKind::Allowed
    } else if genuine {
        EventKind::FalsePositive
    } else if *emitted == Action::Tau {
        EventKind::Suppressed
    } else {
        EventKind::Corrected
    }
}

/// Observable actions the compromised controller can attempt but the monitor
/// cannot take, each logged once.
fn blocked(system: &System, state: NodeState, moves: &[NodeMove]) -> Vec<u16> {
    let mut attempts = Vec::new();
    system.compromised_moves(state.ctrl, state.mal, &mut attempts);
    let mut out: Vec<u16> = attempts
        .iter()
        .map(|&(a, ..)| a)
        .filter(|&a| system.action(a).is_observable())
        .filter(|&a| {
            !moves
                .iter()
                .any(|m| m.rule != NodeRule::Mitigation && m.attempted == a)
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

struct Runner<'a> {
    system: &'a System,
    oracle: Oracle,
}

impl Runner<'_> {
    /// Events for one step from `state`, given the chosen move.
    fn step_events(
        &self,
        position: usize,
        state: NodeState,
        moves: &[NodeMove],
        chosen: Option<&NodeMove>,
        genuine: &[u32],
        out: &mut Vec<EnforcementEvent>,
    ) {
        for a in blocked(self.system, state, moves) {
            let action = self.system.action(a).clone();
            let kind = if self.oracle.allows(genuine, &action) {
                EventKind::FalsePositive
            } else {
                EventKind::Detected
            };
            out.push(EnforcementEvent {
                position,
                attempted: action,
                emitted: None,
                kind,
                rule: None,
                state_before: state,
                state_after: None,
            });
        }
        if let Some(m) = chosen {
            let attempted = self.system.action(m.attempted).clone();
            let ok = m.rule != NodeRule::Mitigation && self.oracle.allows(genuine, &attempted);
            out.push(EnforcementEvent {
                position,
                kind: classify(self.system, m, ok),
                attempted,
                emitted: Some(self.system.action(m.emitted).clone()),
                rule: Some(m.rule),
                state_before: state,
                state_after: Some(m.target),
            });
        }
    }

    fn run(
        &self,
        id: usize,
        steps: usize,
        mut choose: impl FnMut(usize, usize) -> Result<usize, ExecuteError>,
    ) -> Result<Run, ExecuteError> {
        let mut state = self.system.initial()[0];
        let mut genuine = self.oracle.start();
        let mut run = Run {
            id,
            trace: Vec::new(),
            events: Vec::new(),
            states: vec![state],
            stop: Stop::StepLimit,
        };
        for position in 0..steps {
            let moves = self.system.node_moves(0, state);
            if moves.is_empty() {
                self.step_events(position, state, &moves, None, &genuine, &mut run.events);
                run.stop = Stop::Deadlock;
                return Ok(run);
            }
            let k = choose(position, moves.len())?;
            let m = moves[k];
            self.step_events(position, state, &moves, Some(&m), &genuine, &mut run.events);
            let emitted = self.system.action(m.emitted).clone();
            genuine = self.oracle.advance(&genuine, &emitted);
            run.trace.push(emitted);
            state = m.target;
            run.states.push(state);
        }
        Ok(run)
    }

    fn exhaustive(&self, steps: usize) -> Result<Vec<Run>, ExecuteError> {
        // depth-first over choice vectors, in successor order
        let mut runs = Vec::new();
        let mut script: Vec<usize> = Vec::new();
        loop {
            let fixed = script.clone();
            let mut taken: Vec<(usize, usize)> = Vec::new();
            let run = self.run(runs.len(), steps, |pos, n| {
                let c = fixed.get(pos).copied().unwrap_or(0);
                taken.push((c, n));
                Ok(c)
            })?;
            runs.push(run);
            // next choice vector: bump the deepest position with a sibling left
            let mut next = None;
            for pos in (0..taken.len()).rev() {
                let (c, n) = taken[pos];
                if c + 1 < n {
                    let mut v: Vec<usize> = taken[..pos].iter().map(|&(c, _)| c).collect();
                    v.push(c + 1);
                    next = Some(v);
                    break;
                }
            }
            match next {
                Some(v) => script = v,
                None => return Ok(runs),
            }
        }
    }
}

/// Execute a single monitored controller for up to `steps` steps.
pub fn execute(
    system: &System,
    schedule: &Schedule,
    steps: usize,
) -> Result<Vec<Run>, ExecuteError> {
    if system.num_nodes() != 1 {
        return Err(ExecuteError::NotSingleNode(system.num_nodes()));
    }
    let runner = Runner {
        system,
        oracle: Oracle::new(system)?,
    };
    match schedule {
        Schedule::Exhaustive => runner.exhaustive(steps),
        Schedule::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let run = runner.run(0, steps, |_, n| Ok((rng.next_u64() % n as u64) as usize))?;
            Ok(vec![run])
        }
        Schedule::Scripted(script) => {
            let run = runner.run(0, steps, |pos, n| {
                let c = script
                    .iter()
                    .find(|(s, _)| *s == pos)
                    .map(|&(_, c)| c)
                    .unwrap_or(0);
                if c >= n {
                    Err(ExecuteError::ChoiceOutOfRange {
                        step: pos,
                        choice: c,
                        available: n,
                    })
                } else {
                    Ok(c)
                }
            })?;
            Ok(vec![run])
        }
    }
}

/// Outcome of a detection query.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Detection {
    pub detected: bool,
    /// The genuine controller could perform `alpha` after `t`.
    pub false_positive: bool,
    /// What the monitored controller can do instead, after `t`, when the
    /// compromised controller attempts `alpha`: suppressions, corrections and
    /// mitigation insertions.
    pub responses: Vec<(EventKind, Action)>,
}

impl Detection {
    pub fn mitigation(&self) -> Option<&Action> {
        self.responses
            .iter()
            .find(|(k, _)| *k == EventKind::Mitigated)
            .map(|(_, a)| a)
    }
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum DetectError {
    #[error("trace is not a trace of the genuine controller")]
    NotGenuine,
    #[error("the compromised controller cannot perform the trace followed by the action")]
    NotPerformable,
    #[error("the probed action must be observable")]
    Unobservable,
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Explore(#[from] ExploreError),
}

/// Whether the synthesized monitor of `p` detects `alpha` after the genuine
/// weak trace `t` when `p` runs with `m`.
pub fn detect_on_trace(
    p: &ControllerTerm,
    m: &MalwareTerm,
    t: &[Action],
    alpha: &Action,
    alphabet: &Alphabet,
    mitigation: bool,
) -> Result<Detection, DetectError> {
    if !alpha.is_observable() {
        return Err(DetectError::Unobservable);
    }
    let mut t_alpha = t.to_vec();
    t_alpha.push(alpha.clone());
    let genuine = MonitoredController::new(EditAutomaton::Go, CompromisedTerm::genuine(p.clone()));
    let g = explore(&System::monitored(&genuine, alphabet)?, DEFAULT_BUDGET)?;
    if !g.lts.accepts_weak(t) {
        return Err(DetectError::NotGenuine);
    }
    let bare = MonitoredController::new(
        EditAutomaton::Go,
        CompromisedTerm::infected(p.clone(), m.clone()),
    );
    let j = explore(&System::monitored(&bare, alphabet)?, DEFAULT_BUDGET)?;
    if !j.lts.accepts_weak(&t_alpha) {
        return Err(DetectError::NotPerformable);
    }
    let monitor = synthesize(p, alphabet)?.automaton;
    let node = MonitoredController::new(monitor, CompromisedTerm::infected(p.clone(), m.clone()))
        .with_mitigation(mitigation);
    let sys = System::monitored(&node, alphabet)?;
    let ex = explore(&sys, DEFAULT_BUDGET)?;
    let reached = ex.lts.weak_run(t);
    let detected = !reached.is_empty() && !ex.lts.accepts_weak(&t_alpha);
    let label = sys.label_of(alpha);
    let mut responses = Vec::new();
    for s in reached {
        let state = ex.states[s as usize][0];
        for mv in sys.node_moves(0, state) {
            let kind = classify(&sys, &mv, false);
            let relevant = mv.rule == NodeRule::Mitigation || Some(mv.attempted) == label;
            if relevant && kind != EventKind::Allowed {
                responses.push((kind, sys.action(mv.emitted).clone()));
            }
        }
    }
    responses.sort();
    responses.dedup();
    Ok(Detection {
        detected,
        false_positive: detected && g.lts.accepts_weak(&t_alpha),
        responses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{ControllerTerm as C, MalwareTerm as M};

    fn setup(mitigation: bool) -> (System, ControllerTerm, MalwareTerm, Alphabet) {
        let a = Alphabet::new([], ["a"], ["c"]);
        let p = C::fix("X", C::sleep(C::cmd("a", C::end("X"))));
        let m = M::fix(
            "X",
            M::tick(M::timeout(
                vec![
                    (Action::send("c"), M::var("X")),
                    (Action::drop("a"), M::var("X")),
                ],
                M::var("X"),
            )),
        );
        let e = synthesize(&p, &a).unwrap().automaton;
        let node = MonitoredController::new(e, CompromisedTerm::infected(p.clone(), m.clone()))
            .with_mitigation(mitigation);
        (System::monitored(&node, &a).unwrap(), p, m, a)
    }

    #[test]
    fn clean_runs_are_all_allowed() {
        let a = Alphabet::new([], ["a"], []);
        let p = C::fix("X", C::sleep(C::cmd("a", C::end("X"))));
        let e = synthesize(&p, &a).unwrap().automaton;
        let sys = System::monitored(
            &MonitoredController::new(e, CompromisedTerm::genuine(p)),
            &a,
        )
        .unwrap();
        let runs = execute(&sys, &Schedule::Exhaustive, 9).unwrap();
        assert_eq!(runs.len(), 1);
        assert!(runs[0].events.iter().all(|e| e.kind == EventKind::Allowed));
        assert_eq!(runs[0].trace.len(), 9);
    }

    #[test]
    fn injection_is_suppressed() {
        let (sys, ..) = setup(false);
        let s1 = sys.node_moves(0, sys.initial()[0])[0].target;
        let send = sys.label_of(&Action::send("c")).unwrap();
        let k = sys
            .node_moves(0, s1)
            .iter()
            .position(|m| m.attempted == send)
            .unwrap();
        let runs = execute(&sys, &Schedule::Scripted(vec![(1, k)]), 2).unwrap();
        let ev: Vec<_> = runs[0].steps().collect();
        assert_eq!(ev[0].kind, EventKind::Allowed);
        assert_eq!(ev[1].attempted, Action::send("c"));
        assert_eq!(ev[1].emitted, Some(Action::Tau));
        assert_eq!(ev[1].kind, EventKind::Suppressed);
    }

    #[test]
    fn drop_then_end_is_mitigated() {
        let (sys, ..) = setup(true);
        let s1 = sys.node_moves(0, sys.initial()[0])[0].target;
        let moves = sys.node_moves(0, s1);
        let drop = moves
            .iter()
            .position(|m| m.rule == NodeRule::DropAct)
            .unwrap();
        let runs = execute(&sys, &Schedule::Scripted(vec![(1, drop)]), 3).unwrap();
        let run = &runs[0];
        let detected: Vec<_> = run
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Detected)
            .collect();
        assert_eq!(detected.len(), 1);
        assert_eq!(detected[0].attempted, Action::End);
        assert_eq!(detected[0].position, 2);
        let last = run.steps().last().unwrap();
        assert_eq!(last.kind, EventKind::Mitigated);
        assert_eq!(last.emitted, Some(Action::cmd("a")));
        assert!(run
            .events
            .iter()
            .all(|e| e.kind != EventKind::FalsePositive));
    }

    #[test]
    fn without_mitigation_the_run_stalls() {
        let (sys, ..) = setup(false);
        let s1 = sys.node_moves(0, sys.initial()[0])[0].target;
        let drop = sys
            .node_moves(0, s1)
            .iter()
            .position(|m| m.rule == NodeRule::DropAct)
            .unwrap();
        let runs = execute(&sys, &Schedule::Scripted(vec![(1, drop)]), 5).unwrap();
        assert_eq!(runs[0].stop, Stop::Deadlock);
    }

    #[test]
    fn scripted_choice_out_of_range() {
        let (sys, ..) = setup(false);
        assert!(matches!(
            execute(&sys, &Schedule::Scripted(vec![(0, 7)]), 1),
            Err(ExecuteError::ChoiceOutOfRange {
                step: 0,
                choice: 7,
                available: 1
            })
        ));
    }

    #[test]
    fn random_schedule_is_reproducible() {
        let (sys, ..) = setup(true);
        let a = execute(&sys, &Schedule::Random { seed: 7 }, 40).unwrap();
        let b = execute(&sys, &Schedule::Random { seed: 7 }, 40).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn detection_queries() {
        let (_, p, m, a) = setup(true);
        let genuine =
            detect_on_trace(&p, &m, &[Action::Tick], &Action::cmd("a"), &a, true).unwrap();
        assert!(!genuine.detected);
        let inj = detect_on_trace(&p, &m, &[Action::Tick], &Action::send("c"), &a, true).unwrap();
        assert!(inj.detected);
        assert!(!inj.false_positive);
        assert!(inj
            .responses
            .contains(&(EventKind::Suppressed, Action::Tau)));
        assert!(matches!(
            detect_on_trace(&p, &m, &[Action::End], &Action::Tick, &a, true),
            Err(DetectError::NotGenuine)
        ));
    }
}
