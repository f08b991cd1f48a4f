//! Well-formedness checks and the controller size metric.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::alphabet::{Action, Alphabet, Name, NameKind, Var};
use crate::term::{
    CompromisedTerm, ControllerTerm, EditAutomaton, FieldNetwork, MalwareTerm, MonitoredController,
};

/// The four syntactic categories of controllers.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Phase {
    Initial,
    Sensing,
    Communication,
    Actuation,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Initial => "initial",
            Phase::Sensing => "sensing",
            Phase::Communication => "communication",
            Phase::Actuation => "actuation",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    UnguardedRecursion {
        var: Var,
    },
    PhaseViolation {
        expected: Phase,
        found: &'static str,
    },
    UnknownName {
        kind: NameKind,
        name: Name,
    },
    FreeVariable {
        var: Var,
    },
    EndContInSource,
    DuplicateGuard {
        action: Action,
    },
    EmptySum,
    InvalidMalwarePrefix {
        action: Action,
    },
    AlphabetOverlap {
        name: Name,
    },
    EmptyNetwork,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnguardedRecursion { var } => {
                write!(f, "recursion not time-guarded: {var}")
            }
            Violation::PhaseViolation { expected, found } => {
                write!(
                    f,
                    "phase violation: {found} where a {expected} term is expected"
                )
            }
            Violation::UnknownName { kind, name } => write!(f, "unknown name: {kind} {name}"),
            Violation::FreeVariable { var } => write!(f, "free variable: {var}"),
            Violation::EndContInSource => {
                f.write_str("end.P is runtime-only and cannot appear in source")
            }
            Violation::DuplicateGuard { action } => write!(f, "duplicate guard: {action}"),
            Violation::EmptySum => f.write_str("empty branch sum"),
            Violation::InvalidMalwarePrefix { action } => {
                write!(f, "invalid malware prefix: {action}")
            }
            Violation::AlphabetOverlap { name } => {
                write!(f, "name declared in more than one set: {name}")
            }
            Violation::EmptyNetwork => f.write_str("network has no nodes"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Flag duplicate guards in sensing and receiving sums.
    pub deterministic: bool,
    /// Source-program mode: controllers must start with `fix` and may not
    /// contain `end.P`.
    pub source: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            deterministic: false,
            source: true,
        }
    }
}

impl ValidateOptions {
    pub fn deterministic() -> Self {
        ValidateOptions {
            deterministic: true,
            source: true,
        }
    }

    pub fn runtime() -> Self {
        ValidateOptions {
            deterministic: false,
            source: false,
        }
    }
}

/// Anything that can be checked against an alphabet.
pub trait Validate {
    fn violations(&self, alphabet: &Alphabet, opts: ValidateOptions) -> Vec<Violation>;

    fn is_valid(&self, alphabet: &Alphabet) -> bool {
        self.violations(alphabet, ValidateOptions::default())
            .is_empty()
    }
}

/// Validate a term with default options.
pub fn validate<T: Validate + ?Sized>(term: &T, alphabet: &Alphabet) -> Result<(), Vec<Violation>> {
    let v = term.violations(alphabet, ValidateOptions::default());
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Bound variables with a flag recording whether a time step separates the
/// binder from the current position.
#[derive(Clone, Default)]
struct Scope(Vec<(Var, bool)>);

impl Scope {
    fn bind(&self, v: &Var) -> Scope {
        let mut s = self.clone();
        s.0.push((v.clone(), false));
        s
    }

    fn guard(&self) -> Scope {
        Scope(self.0.iter().map(|(v, _)| (v.clone(), true)).collect())
    }

    fn lookup(&self, v: &Var) -> Option<bool> {
        self.0.iter().rev().find(|(w, _)| w == v).map(|(_, g)| *g)
    }

    fn check(&self, v: &Var, out: &mut Vec<Violation>) {
        match self.lookup(v) {
            None => out.push(Violation::FreeVariable { var: v.clone() }),
            Some(false) => out.push(Violation::UnguardedRecursion { var: v.clone() }),
            Some(true) => {}
        }
    }
}

fn check_name(alphabet: &Alphabet, kind: NameKind, name: &Name, out: &mut Vec<Violation>) {
    let declared = match kind {
        NameKind::Sensor => &alphabet.sensors,
        NameKind::Actuator => &alphabet.actuators,
        NameKind::Channel => &alphabet.channels,
    };
    if !declared.contains(name) {
        out.push(Violation::UnknownName {
            kind,
            name: name.clone(),
        });
    }
}

fn check_action(alphabet: &Alphabet, a: &Action, out: &mut Vec<Violation>) {
    match a {
        Action::Sense(n) => check_name(alphabet, NameKind::Sensor, n, out),
        Action::Cmd(n) | Action::Drop(n) => check_name(alphabet, NameKind::Actuator, n, out),
        Action::Send(n) | Action::Recv(n) => check_name(alphabet, NameKind::Channel, n, out),
        _ => {}
    }
}

struct CtrlChecker<'a> {
    alphabet: &'a Alphabet,
    opts: ValidateOptions,
    out: Vec<Violation>,
}

fn node_name(t: &ControllerTerm) -> &'static str {
    match t {
        ControllerTerm::Fix { .. } => "fix",
        ControllerTerm::SensTimeout { .. } => "sensing timeout",
        ControllerTerm::Sleep(_) => "tick prefix",
        ControllerTerm::CommTimeoutIn { .. } => "receive timeout",
        ControllerTerm::CommTimeoutOut { .. } => "send timeout",
        ControllerTerm::ActCmdPrefix { .. } => "actuator command",
        ControllerTerm::EndVar(_) => "end.X",
        ControllerTerm::EndCont(_) => "end.P",
    }
}

impl CtrlChecker<'_> {
    fn guards(&mut self, guards: impl Iterator<Item = Action>) {
        let mut seen = BTreeSet::new();
        for g in guards {
            if !seen.insert(g.clone()) && self.opts.deterministic {
                self.out.push(Violation::DuplicateGuard { action: g });
            }
        }
    }

    fn initial(&mut self, t: &ControllerTerm, scope: &Scope) {
        match t {
            ControllerTerm::Fix { var, body } => self.sensing(body, &scope.bind(var)),
            other => self.out.push(Violation::PhaseViolation {
                expected: Phase::Initial,
                found: node_name(other),
            }),
        }
    }

    fn sensing(&mut self, t: &ControllerTerm, scope: &Scope) {
        match t {
            ControllerTerm::SensTimeout { branches, timeout } => {
                if branches.is_empty() {
                    self.out.push(Violation::EmptySum);
                }
                self.guards(branches.iter().map(|(s, _)| Action::Sense(s.clone())));
                for (s, next) in branches {
                    check_name(self.alphabet, NameKind::Sensor, s, &mut self.out);
                    self.sensing(next, scope);
                }
                self.sensing(timeout, &scope.guard());
            }
            ControllerTerm::Sleep(next) => self.sensing(next, &scope.guard()),
            other => self.communication(other, scope),
        }
    }

    fn communication(&mut self, t: &ControllerTerm, scope: &Scope) {
        match t {
            ControllerTerm::CommTimeoutIn { branches, timeout } => {
                if branches.is_empty() {
                    self.out.push(Violation::EmptySum);
                }
                self.guards(branches.iter().map(|(c, _)| Action::Recv(c.clone())));
                for (c, next) in branches {
                    check_name(self.alphabet, NameKind::Channel, c, &mut self.out);
                    self.communication(next, scope);
                }
                self.communication(timeout, &scope.guard());
            }
            ControllerTerm::CommTimeoutOut {
                channel,
                then,
                timeout,
            } => {
                check_name(self.alphabet, NameKind::Channel, channel, &mut self.out);
                self.communication(then, scope);
                self.communication(timeout, &scope.guard());
            }
            other => self.actuation(other, scope),
        }
    }

    fn actuation(&mut self, t: &ControllerTerm, scope: &Scope) {
        match t {
            ControllerTerm::ActCmdPrefix { actuator, then } => {
                check_name(self.alphabet, NameKind::Actuator, actuator, &mut self.out);
                self.actuation(then, scope);
            }
            ControllerTerm::EndVar(x) => scope.check(x, &mut self.out),
            ControllerTerm::EndCont(p) => {
                if self.opts.source {
                    self.out.push(Violation::EndContInSource);
                }
                // `P` is a complete program, closed on its own.
                self.initial(p, &Scope::default());
            }
            other => self.out.push(Violation::PhaseViolation {
                expected: Phase::Actuation,
                found: node_name(other),
            }),
        }
    }
}

impl Validate for ControllerTerm {
    fn violations(&self, alphabet: &Alphabet, opts: ValidateOptions) -> Vec<Violation> {
        let mut c = CtrlChecker {
            alphabet,
            opts,
            out: Vec::new(),
        };
        let scope = Scope::default();
        if opts.source || matches!(self, ControllerTerm::Fix { .. }) {
            c.initial(self, &scope);
        } else {
            c.sensing(self, &scope);
        }
        c.out
    }
}

fn malware_violations(
    m: &MalwareTerm,
    alphabet: &Alphabet,
    scope: &Scope,
    out: &mut Vec<Violation>,
) {
    match m {
        MalwareTerm::Timeout { branches, timeout } => {
            if branches.is_empty() {
                out.push(Violation::EmptySum);
            }
            for (mu, next) in branches {
                if !mu.is_malicious_prefix() {
                    out.push(Violation::InvalidMalwarePrefix { action: mu.clone() });
                }
                check_action(alphabet, mu, out);
                malware_violations(next, alphabet, scope, out);
            }
            malware_violations(timeout, alphabet, &scope.guard(), out);
        }
        MalwareTerm::Fix { var, body } => malware_violations(body, alphabet, &scope.bind(var), out),
        MalwareTerm::Var(x) => scope.check(x, out),
        MalwareTerm::TickPrefix(next) => malware_violations(next, alphabet, &scope.guard(), out),
        MalwareTerm::Nil => {}
    }
}

impl Validate for MalwareTerm {
    fn violations(&self, alphabet: &Alphabet, _opts: ValidateOptions) -> Vec<Violation> {
        let mut out = Vec::new();
        malware_violations(self, alphabet, &Scope::default(), &mut out);
        out
    }
}

fn edit_violations(
    e: &EditAutomaton,
    alphabet: &Alphabet,
    scope: &Scope,
    out: &mut Vec<Violation>,
) {
    match e {
        EditAutomaton::Go => {}
        EditAutomaton::Var(x) => scope.check(x, out),
        EditAutomaton::Fix { var, body } => edit_violations(body, alphabet, &scope.bind(var), out),
        EditAutomaton::Sum { branches, suppress } => {
            if branches.is_empty() && suppress.is_none() {
                out.push(Violation::EmptySum);
            }
            // Any branch prefix is enough to keep unfolding finite.
            let inner = scope.guard();
            for b in branches {
                check_action(alphabet, &b.input, out);
                check_action(alphabet, &b.output, out);
                edit_violations(&b.next, alphabet, &inner, out);
            }
            if let Some(s) = suppress {
                for a in &s.except {
                    check_action(alphabet, a, out);
                }
                edit_violations(&s.next, alphabet, &inner, out);
            }
        }
    }
}

impl Validate for EditAutomaton {
    fn violations(&self, alphabet: &Alphabet, _opts: ValidateOptions) -> Vec<Violation> {
        let mut out = Vec::new();
        edit_violations(self, alphabet, &Scope::default(), &mut out);
        out
    }
}

impl Validate for CompromisedTerm {
    fn violations(&self, alphabet: &Alphabet, opts: ValidateOptions) -> Vec<Violation> {
        let mut out = self.controller.violations(alphabet, opts);
        if let Some(m) = &self.malware {
            out.extend(m.violations(alphabet, opts));
        }
        out
    }
}

impl Validate for MonitoredController {
    fn violations(&self, alphabet: &Alphabet, opts: ValidateOptions) -> Vec<Violation> {
        let mut out = self.monitor.violations(alphabet, opts);
        out.extend(self.body.violations(alphabet, opts));
        out
    }
}

impl Validate for FieldNetwork {
    fn violations(&self, alphabet: &Alphabet, opts: ValidateOptions) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            out.push(Violation::EmptyNetwork);
        }
        for n in &self.nodes {
            out.extend(n.violations(alphabet, opts));
        }
        out
    }
}

impl Validate for Alphabet {
    fn violations(&self, _alphabet: &Alphabet, _opts: ValidateOptions) -> Vec<Violation> {
        self.overlaps()
            .into_iter()
            .map(|name| Violation::AlphabetOverlap { name })
            .collect()
    }
}

/// Whether every sensing and receiving sum has pairwise-distinct guards.
pub fn is_deterministic(p: &ControllerTerm) -> bool {
    fn distinct(names: impl Iterator<Item = Name>) -> bool {
        let mut seen = BTreeSet::new();
        names.into_iter().all(|n| seen.insert(n))
    }
    match p {
        ControllerTerm::Fix { body, .. } => is_deterministic(body),
        ControllerTerm::SensTimeout { branches, timeout }
        | ControllerTerm::CommTimeoutIn { branches, timeout } => {
            distinct(branches.iter().map(|(n, _)| n.clone()))
                && branches.iter().all(|(_, t)| is_deterministic(t))
                && is_deterministic(timeout)
        }
        ControllerTerm::Sleep(next) => is_deterministic(next),
        ControllerTerm::CommTimeoutOut { then, timeout, .. } => {
            is_deterministic(then) && is_deterministic(timeout)
        }
        ControllerTerm::ActCmdPrefix { then, .. } => is_deterministic(then),
        ControllerTerm::EndVar(_) => true,
        ControllerTerm::EndCont(p) => is_deterministic(p),
    }
}

/// Size of a controller: the number of sensor, channel, command, `tick` and
/// `end` prefixes it contains.
pub fn size(t: &ControllerTerm) -> usize {
    match t {
        ControllerTerm::Fix { body, .. } => size(body),
        ControllerTerm::SensTimeout { branches, timeout }
        | ControllerTerm::CommTimeoutIn { branches, timeout } => {
            branches.len() + branches.iter().map(|(_, s)| size(s)).sum::<usize>() + size(timeout)
        }
        ControllerTerm::Sleep(next) => 1 + size(next),
        ControllerTerm::CommTimeoutOut { then, timeout, .. } => 1 + size(then) + size(timeout),
        ControllerTerm::ActCmdPrefix { then, .. } => 1 + size(then),
        ControllerTerm::EndVar(_) => 1,
        ControllerTerm::EndCont(p) => 1 + size(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::ControllerTerm as C;
    use alloc::string::ToString;
    use alloc::vec;

    fn alpha() -> Alphabet {
        Alphabet::new(["l", "h"], ["a"], [])
    }

    #[test]
    fn guarded_program_is_ok() {
        // fix X. tick.[l.cmd a.end.X] else (end.X)
        let p = C::fix(
            "X",
            C::sleep(C::sense(vec![("l", C::cmd("a", C::end("X")))], C::end("X"))),
        );
        assert_eq!(
            p.violations(&Alphabet::new(["l"], ["a"], []), ValidateOptions::default()),
            vec![]
        );
    }

    #[test]
    fn unguarded_recursion_is_flagged() {
        let p = C::fix("X", C::end("X"));
        let v = p.violations(&alpha(), ValidateOptions::default());
        assert_eq!(
            v,
            vec![Violation::UnguardedRecursion { var: Var::new("X") }]
        );
        assert!(v[0].to_string().starts_with("recursion not time-guarded"));
    }

    #[test]
    fn undeclared_channel_is_flagged() {
        let p = C::fix("X", C::recv(vec![("c", C::end("X"))], C::end("X")));
        let v = p.violations(&alpha(), ValidateOptions::default());
        assert!(v.contains(&Violation::UnknownName {
            kind: NameKind::Channel,
            name: Name::new("c")
        }));
        assert!(v.iter().any(|x| x.to_string().starts_with("unknown name")));
    }

    #[test]
    fn receive_branch_does_not_guard() {
        // The receive branch reaches X without a tick; only the timeout does.
        let p = C::fix("X", C::recv(vec![("c", C::end("X"))], C::end("X")));
        let a = Alphabet::new([], [], ["c"]);
        assert_eq!(
            p.violations(&a, ValidateOptions::default()),
            vec![Violation::UnguardedRecursion { var: Var::new("X") }]
        );
    }

    #[test]
    fn phase_violations() {
        // actuation followed by sensing
        let p = C::fix(
            "X",
            C::sleep(C::cmd("a", C::sense(vec![("l", C::end("X"))], C::end("X")))),
        );
        let v = p.violations(&alpha(), ValidateOptions::default());
        assert!(matches!(
            v[0],
            Violation::PhaseViolation {
                expected: Phase::Actuation,
                ..
            }
        ));

        let nested = C::fix("X", C::sleep(C::fix("Y", C::sleep(C::end("Y")))));
        assert!(!nested
            .violations(&alpha(), ValidateOptions::default())
            .is_empty());

        let not_program = C::sleep(C::end("X"));
        assert!(matches!(
            not_program.violations(&alpha(), ValidateOptions::default())[0],
            Violation::PhaseViolation {
                expected: Phase::Initial,
                ..
            }
        ));
    }

    #[test]
    fn free_variable_and_end_cont() {
        let p = C::fix("X", C::sleep(C::end("Z")));
        assert_eq!(
            p.violations(&alpha(), ValidateOptions::default()),
            vec![Violation::FreeVariable { var: Var::new("Z") }]
        );
        let prog = C::fix("X", C::sleep(C::end("X")));
        let unfolded = C::EndCont(alloc::boxed::Box::new(prog.clone()));
        assert_eq!(
            unfolded.violations(&alpha(), ValidateOptions::default()),
            vec![Violation::PhaseViolation {
                expected: Phase::Initial,
                found: "end.P"
            }]
        );
        assert!(unfolded
            .violations(&alpha(), ValidateOptions::runtime())
            .is_empty());
        let inside = C::fix(
            "X",
            C::sleep(C::cmd("a", C::EndCont(alloc::boxed::Box::new(prog)))),
        );
        assert_eq!(
            inside.violations(&alpha(), ValidateOptions::default()),
            vec![Violation::EndContInSource]
        );
    }

    #[test]
    fn duplicate_guards_only_in_deterministic_mode() {
        let p = C::fix(
            "X",
            C::sleep(C::sense(
                vec![("l", C::end("X")), ("l", C::cmd("a", C::end("X")))],
                C::end("X"),
            )),
        );
        assert!(p
            .violations(&alpha(), ValidateOptions::default())
            .is_empty());
        assert_eq!(
            p.violations(&alpha(), ValidateOptions::deterministic()),
            vec![Violation::DuplicateGuard {
                action: Action::sense("l")
            }]
        );
        assert!(!is_deterministic(&p));
    }

    #[test]
    fn empty_sums_are_rejected() {
        let p = C::fix("X", C::sleep(C::sense(vec![], C::end("X"))));
        assert!(p
            .violations(&alpha(), ValidateOptions::default())
            .contains(&Violation::EmptySum));
        let e = EditAutomaton::Sum {
            branches: vec![],
            suppress: None,
        };
        assert_eq!(
            e.violations(&alpha(), ValidateOptions::default()),
            vec![Violation::EmptySum]
        );
    }

    #[test]
    fn malware_checks() {
        let a = Alphabet::new([], ["a"], ["c"]);
        let ok = MalwareTerm::fix(
            "X",
            MalwareTerm::tick(MalwareTerm::timeout(
                vec![(
                    Action::send("c"),
                    MalwareTerm::timeout(
                        vec![(Action::drop("a"), MalwareTerm::var("X"))],
                        MalwareTerm::var("X"),
                    ),
                )],
                MalwareTerm::var("X"),
            )),
        );
        assert!(ok.violations(&a, ValidateOptions::default()).is_empty());
        let zeno = MalwareTerm::fix(
            "X",
            MalwareTerm::timeout(
                vec![(Action::send("c"), MalwareTerm::var("X"))],
                MalwareTerm::Nil,
            ),
        );
        assert_eq!(
            zeno.violations(&a, ValidateOptions::default()),
            vec![Violation::UnguardedRecursion { var: Var::new("X") }]
        );
        let bad = MalwareTerm::timeout(vec![(Action::Tick, MalwareTerm::Nil)], MalwareTerm::Nil);
        assert_eq!(
            bad.violations(&a, ValidateOptions::default()),
            vec![Violation::InvalidMalwarePrefix {
                action: Action::Tick
            }]
        );
    }

    #[test]
    fn edit_recursion_needs_a_branch() {
        let e = EditAutomaton::fix("Y", EditAutomaton::var("Y"));
        assert_eq!(
            e.violations(&alpha(), ValidateOptions::default()),
            vec![Violation::UnguardedRecursion { var: Var::new("Y") }]
        );
    }

    #[test]
    fn size_examples() {
        assert_eq!(size(&C::end("X")), 1);
        assert_eq!(size(&C::cmd("a", C::end("X"))), 2);
        // tick.[l.cmd a.end.X + h.end.X] else (end.X)
        let t = C::sleep(C::sense(
            vec![("l", C::cmd("a", C::end("X"))), ("h", C::end("X"))],
            C::end("X"),
        ));
        assert_eq!(size(&t), 7);
    }

    #[test]
    fn validate_is_idempotent() {
        let p = C::fix("X", C::recv(vec![("c", C::end("X"))], C::end("Q")));
        let a = alpha();
        assert_eq!(
            p.violations(&a, ValidateOptions::default()),
            p.violations(&a, ValidateOptions::default())
        );
    }
}
