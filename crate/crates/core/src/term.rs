//! Term languages: controllers, malware, compromised controllers, edit
//! automata, monitored controllers and field networks.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::alphabet::{Action, Name, Var};

/// A controller in any phase of its scan cycle.
///
/// One enum covers the four syntactic categories (initial, sensing,
/// communication, actuation); the phase discipline is checked by
/// [`crate::validate`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ControllerTerm {
    /// `fix X . S`
    Fix { var: Var, body: Box<ControllerTerm> },
    /// `[s1 . S1 + ... ] else (S)`
    SensTimeout {
        branches: Vec<(Name, ControllerTerm)>,
        timeout: Box<ControllerTerm>,
    },
    /// `tick . S`
    Sleep(Box<ControllerTerm>),
    /// `[rcv c1 . C1 + ...] else (C)`
    CommTimeoutIn {
        branches: Vec<(Name, ControllerTerm)>,
        timeout: Box<ControllerTerm>,
    },
    /// `[snd c . C1] else (C2)`
    CommTimeoutOut {
        channel: Name,
        then: Box<ControllerTerm>,
        timeout: Box<ControllerTerm>,
    },
    /// `cmd a . A`
    ActCmdPrefix {
        actuator: Name,
        then: Box<ControllerTerm>,
    },
    /// `end . X`
    EndVar(Var),
    /// `end . P`, only produced by unfolding.
    EndCont(Box<ControllerTerm>),
}

impl ControllerTerm {
    pub fn fix(var: &str, body: ControllerTerm) -> Self {
        ControllerTerm::Fix {
            var: Var::new(var),
            body: Box::new(body),
        }
    }

    pub fn sleep(next: ControllerTerm) -> Self {
        ControllerTerm::Sleep(Box::new(next))
    }

    pub fn sense(branches: Vec<(&str, ControllerTerm)>, timeout: ControllerTerm) -> Self {
        ControllerTerm::SensTimeout {
            branches: branches
                .into_iter()
                .map(|(s, t)| (Name::new(s), t))
                .collect(),
            timeout: Box::new(timeout),
        }
    }

    pub fn recv(branches: Vec<(&str, ControllerTerm)>, timeout: ControllerTerm) -> Self {
        ControllerTerm::CommTimeoutIn {
            branches: branches
                .into_iter()
                .map(|(c, t)| (Name::new(c), t))
                .collect(),
            timeout: Box::new(timeout),
        }
    }

    pub fn send(channel: &str, then: ControllerTerm, timeout: ControllerTerm) -> Self {
        ControllerTerm::CommTimeoutOut {
            channel: Name::new(channel),
            then: Box::new(then),
            timeout: Box::new(timeout),
        }
    }

    pub fn cmd(actuator: &str, then: ControllerTerm) -> Self {
        ControllerTerm::ActCmdPrefix {
            actuator: Name::new(actuator),
            then: Box::new(then),
        }
    }

    pub fn end(var: &str) -> Self {
        ControllerTerm::EndVar(Var::new(var))
    }
}

/// Injected malicious code.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum MalwareTerm {
    /// `[mu1 . M1 + ...] else (M)` with `mu` a send, receive, command or drop.
    Timeout {
        branches: Vec<(Action, MalwareTerm)>,
        timeout: Box<MalwareTerm>,
    },
    Fix {
        var: Var,
        body: Box<MalwareTerm>,
    },
    Var(Var),
    TickPrefix(Box<MalwareTerm>),
    Nil,
}

impl MalwareTerm {
    pub fn fix(var: &str, body: MalwareTerm) -> Self {
        MalwareTerm::Fix {
            var: Var::new(var),
            body: Box::new(body),
        }
    }

    pub fn var(var: &str) -> Self {
        MalwareTerm::Var(Var::new(var))
    }

    pub fn tick(next: MalwareTerm) -> Self {
        MalwareTerm::TickPrefix(Box::new(next))
    }

    pub fn timeout(branches: Vec<(Action, MalwareTerm)>, timeout: MalwareTerm) -> Self {
        MalwareTerm::Timeout {
            branches,
            timeout: Box::new(timeout),
        }
    }
}

/// `Z` or `Z | M`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CompromisedTerm {
    pub controller: ControllerTerm,
    pub malware: Option<MalwareTerm>,
}

impl CompromisedTerm {
    pub fn genuine(controller: ControllerTerm) -> Self {
        CompromisedTerm {
            controller,
            malware: None,
        }
    }

    pub fn infected(controller: ControllerTerm, malware: MalwareTerm) -> Self {
        CompromisedTerm {
            controller,
            malware: Some(malware),
        }
    }
}

/// One `input/output . next` branch of an edit automaton sum.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EditBranch {
    pub input: Action,
    pub output: Action,
    pub next: EditAutomaton,
}

/// Intensional form of `Σ α/τ . next` for every `α ∈ Act* ∪ Chn*` not in `except`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Suppression {
    pub except: Vec<Action>,
    pub next: Box<EditAutomaton>,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EditAutomaton {
    Go,
    Sum {
        branches: Vec<EditBranch>,
        suppress: Option<Suppression>,
    },
    Fix {
        var: Var,
        body: Box<EditAutomaton>,
    },
    Var(Var),
}

impl EditAutomaton {
    pub fn fix(var: &str, body: EditAutomaton) -> Self {
        EditAutomaton::Fix {
            var: Var::new(var),
            body: Box::new(body),
        }
    }

    pub fn var(var: &str) -> Self {
        EditAutomaton::Var(Var::new(var))
    }

    pub fn sum(branches: Vec<(Action, Action, EditAutomaton)>) -> Self {
        EditAutomaton::Sum {
            branches: branches
                .into_iter()
                .map(|(input, output, next)| EditBranch {
                    input,
                    output,
                    next,
                })
                .collect(),
            suppress: None,
        }
    }

    /// Replace every intensional suppression with explicit branches over
    /// `alphabet`.
    pub fn expand(&self, alphabet: &crate::Alphabet) -> EditAutomaton {
        match self {
            EditAutomaton::Go | EditAutomaton::Var(_) => self.clone(),
            EditAutomaton::Fix { var, body } => EditAutomaton::Fix {
                var: var.clone(),
                body: Box::new(body.expand(alphabet)),
            },
            EditAutomaton::Sum { branches, suppress } => {
                let mut out: Vec<EditBranch> = branches
                    .iter()
                    .map(|b| EditBranch {
                        input: b.input.clone(),
                        output: b.output.clone(),
                        next: b.next.expand(alphabet),
                    })
                    .collect();
                if let Some(s) = suppress {
                    let next = s.next.expand(alphabet);
                    for a in alphabet.suppressible() {
                        if !s.except.contains(&a) {
                            out.push(EditBranch {
                                input: a,
                                output: Action::Tau,
                                next: next.clone(),
                            });
                        }
                    }
                }
                EditAutomaton::Sum {
                    branches: out,
                    suppress: None,
                }
            }
        }
    }

    /// Number of branches once every suppression is materialized.
    pub fn branch_count(&self, alphabet: &crate::Alphabet) -> usize {
        let universe = alphabet.suppressible();
        fn go(e: &EditAutomaton, universe: &[Action]) -> usize {
            match e {
                EditAutomaton::Go | EditAutomaton::Var(_) => 0,
                EditAutomaton::Fix { body, .. } => go(body, universe),
                EditAutomaton::Sum { branches, suppress } => {
                    let own = branches.len()
                        + suppress.as_ref().map_or(0, |s| {
                            universe.iter().filter(|a| !s.except.contains(a)).count()
                        });
                    own + branches
                        .iter()
                        .map(|b| go(&b.next, universe))
                        .sum::<usize>()
                        + suppress.as_ref().map_or(0, |s| go(&s.next, universe))
                }
            }
        }
        go(self, &universe)
    }
}

/// `E ⊢ J`, with a switch for the mitigation rule.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MonitoredController {
    pub monitor: EditAutomaton,
    pub body: CompromisedTerm,
    pub mitigation: bool,
}

impl MonitoredController {
    pub fn new(monitor: EditAutomaton, body: CompromisedTerm) -> Self {
        MonitoredController {
            monitor,
            body,
            mitigation: false,
        }
    }

    pub fn with_mitigation(mut self, on: bool) -> Self {
        self.mitigation = on;
        self
    }
}

/// `N1 ∥ ... ∥ Nk`, flattened.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FieldNetwork {
    pub nodes: Vec<MonitoredController>,
}

impl FieldNetwork {
    pub fn new(nodes: Vec<MonitoredController>) -> Self {
        FieldNetwork { nodes }
    }

    pub fn single(node: MonitoredController) -> Self {
        FieldNetwork {
            nodes: alloc::vec![node],
        }
    }
}

impl From<MonitoredController> for FieldNetwork {
    fn from(node: MonitoredController) -> Self {
        FieldNetwork::single(node)
    }
}
