//! Monitor synthesis: from a deterministic controller to a syntactically
//! deterministic edit automaton enforcing its behaviour.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::alphabet::{Action, Alphabet, Var};
use crate::term::{ControllerTerm, EditAutomaton, EditBranch, Suppression};
use crate::validate::{is_deterministic, size, Validate, ValidateOptions, Violation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisReport {
    pub automaton: EditAutomaton,
    /// Size of the input controller.
    pub input_size: usize,
    /// Branch count of the automaton with every suppression materialized.
    pub output_branch_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SynthesisError {
    #[error("controller is not valid: {}", first(.0))]
    Invalid(Vec<Violation>),
    #[error("controller is not deterministic")]
    Nondeterministic,
}

fn first(v: &[Violation]) -> alloc::string::String {
    v.first().map(|x| format!("{x}")).unwrap_or_default()
}

struct Fresh {
    next: usize,
    avoid: Var,
}

impl Fresh {
    fn var(&mut self) -> Var {
        loop {
            let v = Var::new(&format!("Y{}", self.next));
            self.next += 1;
            if v != self.avoid {
                return v;
            }
        }
    }
}

fn recursive(y: Var, branches: Vec<EditBranch>, except: Vec<Action>) -> EditAutomaton {
    EditAutomaton::Fix {
        var: y.clone(),
        body: Box::new(EditAutomaton::Sum {
            branches,
            suppress: Some(Suppression {
                except,
                next: Box::new(EditAutomaton::Var(y)),
            }),
        }),
    }
}

fn branch(input: Action, output: Action, next: EditAutomaton) -> EditBranch {
    EditBranch {
        input,
        output,
        next,
    }
}

fn allow(a: Action, next: EditAutomaton) -> EditBranch {
    branch(a.clone(), a, next)
}

fn synth(t: &ControllerTerm, fresh: &mut Fresh) -> EditAutomaton {
    use ControllerTerm as C;
    match t {
        C::Fix { var, body } => EditAutomaton::Fix {
            var: var.clone(),
            body: Box::new(synth(body, fresh)),
        },
        C::SensTimeout { branches, timeout } => {
            let y = fresh.var();
            let mut bs: Vec<EditBranch> = branches
                .iter()
                .map(|(s, next)| allow(Action::Sense(s.clone()), synth(next, fresh)))
                .collect();
            bs.push(allow(Action::Tick, synth(timeout, fresh)));
            recursive(y, bs, Vec::new())
        }
        C::Sleep(next) => {
            let y = fresh.var();
            recursive(y, vec![allow(Action::Tick, synth(next, fresh))], Vec::new())
        }
        C::CommTimeoutIn { branches, timeout } => {
            let y = fresh.var();
            let mut bs: Vec<EditBranch> = branches
                .iter()
                .map(|(c, next)| allow(Action::Recv(c.clone()), synth(next, fresh)))
                .collect();
            bs.push(allow(Action::Tick, synth(timeout, fresh)));
            let except = branches
                .iter()
                .map(|(c, _)| Action::Recv(c.clone()))
                .collect();
            recursive(y, bs, except)
        }
        C::CommTimeoutOut {
            channel,
            then,
            timeout,
        } => {
            let y = fresh.var();
            let bs = vec![
                allow(Action::Send(channel.clone()), synth(then, fresh)),
                allow(Action::Tick, synth(timeout, fresh)),
            ];
            recursive(y, bs, vec![Action::Send(channel.clone())])
        }
        C::ActCmdPrefix { actuator, then } => {
            let y = fresh.var();
            let bs = vec![
                allow(Action::Cmd(actuator.clone()), synth(then, fresh)),
                allow(Action::Tau, EditAutomaton::Var(y.clone())),
            ];
            recursive(
                y,
                bs,
                vec![
                    Action::Cmd(actuator.clone()),
                    Action::Drop(actuator.clone()),
                ],
            )
        }
        C::EndVar(x) => {
            let y = fresh.var();
            recursive(
                y,
                vec![allow(Action::End, EditAutomaton::Var(x.clone()))],
                Vec::new(),
            )
        }
        // Rejected by validation before synthesis starts.
        C::EndCont(p) => synth(p, fresh),
    }
}

fn top_var(p: &ControllerTerm) -> Var {
    match p {
        ControllerTerm::Fix { var, .. } => var.clone(),
        _ => Var::new(""),
    }
}

/// Synthesize the enforcing edit automaton of a valid deterministic
/// controller. Binders introduced for inner recursion are `Y0`, `Y1`, ... in
/// pre-order, so the output is reproducible.
pub fn synthesize(
    p: &ControllerTerm,
    alphabet: &Alphabet,
) -> Result<SynthesisReport, SynthesisError> {
    let violations = p.violations(alphabet, ValidateOptions::default());
    if !violations.is_empty() {
        return Err(SynthesisError::Invalid(violations));
    }
    if !is_deterministic(p) {
        return Err(SynthesisError::Nondeterministic);
    }
    let mut fresh = Fresh {
        next: 0,
        avoid: top_var(p),
    };
    let automaton = synth(p, &mut fresh);
    Ok(SynthesisReport {
        output_branch_count: automaton.branch_count(alphabet),
        input_size: size(p),
        automaton,
    })
}

/// Whether every sum of `e` has pairwise-distinct input actions. A
/// suppression covers every actuator and channel action outside its
/// exceptions, whatever the alphabet.
pub fn check_syntactic_determinism(e: &EditAutomaton) -> bool {
    match e {
        EditAutomaton::Go | EditAutomaton::Var(_) => true,
        EditAutomaton::Fix { body, .. } => check_syntactic_determinism(body),
        EditAutomaton::Sum { branches, suppress } => {
            let mut seen = BTreeSet::new();
            for b in branches {
                if !seen.insert(&b.input) {
                    return false;
                }
                if let Some(s) = suppress {
                    if b.input.is_actuator_or_channel() && !s.except.contains(&b.input) {
                        return false;
                    }
                }
            }
            branches
                .iter()
                .all(|b| check_syntactic_determinism(&b.next))
                && suppress
                    .as_ref()
                    .is_none_or(|s| check_syntactic_determinism(&s.next))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{ControllerTerm as C, EditAutomaton as E};
    use alloc::string::ToString;

    #[test]
    fn end_row() {
        let a = Alphabet::new([], ["a"], ["c"]);
        let p = C::fix("X", C::sleep(C::end("X")));
        let r = synthesize(&p, &a).unwrap();
        let E::Fix { body, .. } = &r.automaton else {
            panic!()
        };
        let E::Fix { body: tick_sum, .. } = &**body else {
            panic!()
        };
        let E::Sum { branches, .. } = &**tick_sum else {
            panic!()
        };
        let end_state = &branches[0].next;
        // end/end.X plus one suppression per actuator and channel action
        assert_eq!(end_state.branch_count(&a), a.suppressible().len() + 1);
        assert_eq!(
            end_state.to_string(),
            "fix Y1 . end/end . X + others/tau . Y1"
        );
    }

    #[test]
    fn tick_end_example() {
        let a = Alphabet::new([], ["a"], []);
        let p = C::fix("X", C::sleep(C::end("X")));
        let r = synthesize(&p, &a).unwrap();
        let expected = E::fix(
            "X",
            E::fix(
                "Y0",
                E::sum(vec![
                    (
                        Action::Tick,
                        Action::Tick,
                        E::fix(
                            "Y1",
                            E::sum(vec![
                                (Action::End, Action::End, E::var("X")),
                                (Action::drop("a"), Action::Tau, E::var("Y1")),
                                (Action::cmd("a"), Action::Tau, E::var("Y1")),
                            ]),
                        ),
                    ),
                    (Action::drop("a"), Action::Tau, E::var("Y0")),
                    (Action::cmd("a"), Action::Tau, E::var("Y0")),
                ]),
            ),
        );
        let mut got = r.automaton.expand(&a);
        sort_branches(&mut got);
        let mut want = expected;
        sort_branches(&mut want);
        assert_eq!(got, want);
        assert_eq!(r.input_size, 2);
        assert_eq!(r.output_branch_count, 6);
    }

    fn sort_branches(e: &mut E) {
        match e {
            E::Fix { body, .. } => sort_branches(body),
            E::Sum { branches, .. } => {
                for b in branches.iter_mut() {
                    sort_branches(&mut b.next);
                }
                branches.sort();
            }
            _ => {}
        }
    }

    #[test]
    fn determinism_check() {
        assert!(check_syntactic_determinism(&E::Go));
        let dup = E::sum(vec![
            (Action::cmd("a"), Action::Tau, E::Go),
            (Action::cmd("a"), Action::cmd("a"), E::Go),
        ]);
        assert!(!check_syntactic_determinism(&dup));
        let a = Alphabet::new(["l"], ["a"], ["c"]);
        let p = C::fix(
            "X",
            C::sleep(C::sense(
                vec![("l", C::send("c", C::cmd("a", C::end("X")), C::end("X")))],
                C::end("X"),
            )),
        );
        let r = synthesize(&p, &a).unwrap();
        assert!(check_syntactic_determinism(&r.automaton));
        assert!(check_syntactic_determinism(&r.automaton.expand(&a)));
    }

    #[test]
    fn rejects_bad_input() {
        let a = Alphabet::new(["l"], [], []);
        let p = C::fix("X", C::end("X"));
        assert!(matches!(
            synthesize(&p, &a),
            Err(SynthesisError::Invalid(_))
        ));
        let nd = C::fix(
            "X",
            C::sleep(C::sense(
                vec![("l", C::end("X")), ("l", C::end("X"))],
                C::end("X"),
            )),
        );
        assert_eq!(synthesize(&nd, &a), Err(SynthesisError::Nondeterministic));
    }

    #[test]
    fn fresh_names_avoid_the_cycle_variable() {
        let a = Alphabet::default();
        let p = C::fix("Y0", C::sleep(C::end("Y0")));
        let r = synthesize(&p, &a).unwrap();
        assert_eq!(
            r.automaton.to_string(),
            "fix Y0 . fix Y1 . tick/tick . (fix Y2 . end/end . Y0 + others/tau . Y2) + others/tau . Y1"
        );
    }
}
