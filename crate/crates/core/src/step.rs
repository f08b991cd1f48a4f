//! Reference operational semantics over syntax trees.
//!
//! Every function returns the complete, sorted and duplicate-free set of
//! one-step successors. Recursion is handled by substitution, exactly as the
//! rules are stated; [`crate::system`] builds its compiled transition tables
//! from these functions.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::alphabet::{Action, Alphabet, Var};
use crate::term::{
    CompromisedTerm, ControllerTerm, EditAutomaton, EditBranch, FieldNetwork, MalwareTerm,
    MonitoredController,
};

fn normalize<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v.dedup();
    v
}

impl ControllerTerm {
    /// Replace `end.X` by `end.P` for free occurrences of `x`.
    pub fn subst_end(&self, x: &Var, p: &ControllerTerm) -> ControllerTerm {
        use ControllerTerm as C;
        match self {
            C::Fix { var, .. } if var == x => self.clone(),
            C::Fix { var, body } => C::Fix {
                var: var.clone(),
                body: Box::new(body.subst_end(x, p)),
            },
            C::SensTimeout { branches, timeout } => C::SensTimeout {
                branches: branches
                    .iter()
                    .map(|(s, t)| (s.clone(), t.subst_end(x, p)))
                    .collect(),
                timeout: Box::new(timeout.subst_end(x, p)),
            },
            C::Sleep(next) => C::Sleep(Box::new(next.subst_end(x, p))),
            C::CommTimeoutIn { branches, timeout } => C::CommTimeoutIn {
                branches: branches
                    .iter()
                    .map(|(c, t)| (c.clone(), t.subst_end(x, p)))
                    .collect(),
                timeout: Box::new(timeout.subst_end(x, p)),
            },
            C::CommTimeoutOut {
                channel,
                then,
                timeout,
            } => C::CommTimeoutOut {
                channel: channel.clone(),
                then: Box::new(then.subst_end(x, p)),
                timeout: Box::new(timeout.subst_end(x, p)),
            },
            C::ActCmdPrefix { actuator, then } => C::ActCmdPrefix {
                actuator: actuator.clone(),
                then: Box::new(then.subst_end(x, p)),
            },
            C::EndVar(y) if y == x => C::EndCont(Box::new(p.clone())),
            C::EndVar(_) | C::EndCont(_) => self.clone(),
        }
    }
}

impl MalwareTerm {
    pub fn subst(&self, x: &Var, m: &MalwareTerm) -> MalwareTerm {
        use MalwareTerm as M;
        match self {
            M::Timeout { branches, timeout } => M::Timeout {
                branches: branches
                    .iter()
                    .map(|(mu, t)| (mu.clone(), t.subst(x, m)))
                    .collect(),
                timeout: Box::new(timeout.subst(x, m)),
            },
            M::Fix { var, .. } if var == x => self.clone(),
            M::Fix { var, body } => M::Fix {
                var: var.clone(),
                body: Box::new(body.subst(x, m)),
            },
            M::Var(y) if y == x => m.clone(),
            M::Var(_) | M::Nil => self.clone(),
            M::TickPrefix(next) => M::TickPrefix(Box::new(next.subst(x, m))),
        }
    }
}

impl EditAutomaton {
    pub fn subst(&self, x: &Var, e: &EditAutomaton) -> EditAutomaton {
        use EditAutomaton as E;
        match self {
            E::Go => E::Go,
            E::Var(y) if y == x => e.clone(),
            E::Var(_) => self.clone(),
            E::Fix { var, .. } if var == x => self.clone(),
            E::Fix { var, body } => E::Fix {
                var: var.clone(),
                body: Box::new(body.subst(x, e)),
            },
            E::Sum { branches, suppress } => E::Sum {
                branches: branches
                    .iter()
                    .map(|b| EditBranch {
                        input: b.input.clone(),
                        output: b.output.clone(),
                        next: b.next.subst(x, e),
                    })
                    .collect(),
                suppress: suppress.as_ref().map(|s| crate::term::Suppression {
                    except: s.except.clone(),
                    next: Box::new(s.next.subst(x, e)),
                }),
            },
        }
    }
}

/// Controller transitions.
pub fn ctrl_step(z: &ControllerTerm) -> Vec<(Action, ControllerTerm)> {
    use ControllerTerm as C;
    let mut out = Vec::new();
    match z {
        C::Fix { var, body } => return ctrl_step(&body.subst_end(var, z)),
        C::SensTimeout { branches, timeout } => {
            for (s, next) in branches {
                out.push((Action::Sense(s.clone()), next.clone()));
            }
            out.push((Action::Tick, (**timeout).clone()));
        }
        C::Sleep(next) => out.push((Action::Tick, (**next).clone())),
        C::CommTimeoutIn { branches, timeout } => {
            for (c, next) in branches {
                out.push((Action::Recv(c.clone()), next.clone()));
            }
            out.push((Action::Tick, (**timeout).clone()));
        }
        C::CommTimeoutOut {
            channel,
            then,
            timeout,
        } => {
            out.push((Action::Send(channel.clone()), (**then).clone()));
            out.push((Action::Tick, (**timeout).clone()));
        }
        C::ActCmdPrefix { actuator, then } => {
            out.push((Action::Cmd(actuator.clone()), (**then).clone()));
        }
        C::EndVar(_) => {}
        C::EndCont(p) => out.push((Action::End, (**p).clone())),
    }
    normalize(out)
}

/// Malware transitions.
pub fn malware_step(m: &MalwareTerm) -> Vec<(Action, MalwareTerm)> {
    use MalwareTerm as M;
    let mut out = Vec::new();
    match m {
        M::Timeout { branches, timeout } => {
            for (mu, next) in branches {
                out.push((mu.clone(), next.clone()));
            }
            out.push((Action::Tick, (**timeout).clone()));
        }
        M::Fix { var, body } => return malware_step(&body.subst(var, m)),
        M::Var(_) => {}
        M::TickPrefix(next) => out.push((Action::Tick, (**next).clone())),
        M::Nil => out.push((Action::Tick, M::Nil)),
    }
    normalize(out)
}

/// Compromised controller transitions.
pub fn compromised_step(j: &CompromisedTerm) -> Vec<(Action, CompromisedTerm)> {
    let z_moves = ctrl_step(&j.controller);
    let Some(m) = &j.malware else {
        return z_moves
            .into_iter()
            .map(|(a, z)| (a, CompromisedTerm::genuine(z)))
            .collect();
    };
    let m_moves = malware_step(m);
    let mut out = Vec::new();
    for (a, z) in &z_moves {
        if *a != Action::Tick {
            out.push((a.clone(), CompromisedTerm::infected(z.clone(), m.clone())));
        }
    }
    for (a, m2) in &m_moves {
        if !matches!(a, Action::Tick | Action::Drop(_)) {
            out.push((
                a.clone(),
                CompromisedTerm::infected(j.controller.clone(), m2.clone()),
            ));
        }
    }
    for (a, z) in &z_moves {
        for (b, m2) in &m_moves {
            match (a, b) {
                (Action::Cmd(x), Action::Drop(y)) if x == y => out.push((
                    Action::Tau,
                    CompromisedTerm::infected(z.clone(), m2.clone()),
                )),
                (Action::Tick, Action::Tick) => out.push((
                    Action::Tick,
                    CompromisedTerm::infected(z.clone(), m2.clone()),
                )),
                _ => {}
            }
        }
    }
    normalize(out)
}

/// Edit automaton transitions `(input, output, next)`. Rule Go ranges over
/// every action of `alphabet`, including `tau`, `tick` and `end`.
pub fn edit_step(e: &EditAutomaton, alphabet: &Alphabet) -> Vec<(Action, Action, EditAutomaton)> {
    use EditAutomaton as E;
    let mut out = Vec::new();
    match e {
        E::Go => {
            for a in alphabet.universe() {
                out.push((a.clone(), a, E::Go));
            }
        }
        E::Sum { branches, suppress } => {
            for b in branches {
                out.push((b.input.clone(), b.output.clone(), b.next.clone()));
            }
            if let Some(s) = suppress {
                for a in alphabet.suppressible() {
                    if !s.except.contains(&a) {
                        out.push((a, Action::Tau, (*s.next).clone()));
                    }
                }
            }
        }
        E::Fix { var, body } => return edit_step(&body.subst(var, e), alphabet),
        E::Var(_) => {}
    }
    normalize(out)
}

/// Monitored controller transitions: rule Enforce, plus rule Mitigation when
/// the controller's flag is set.
pub fn monitored_step(
    n: &MonitoredController,
    alphabet: &Alphabet,
) -> Vec<(Action, MonitoredController)> {
    let j_moves = compromised_step(&n.body);
    let e_moves = edit_step(&n.monitor, alphabet);
    let mut out = Vec::new();
    for (a, j2) in &j_moves {
        for (input, output, e2) in &e_moves {
            if input == a {
                out.push((
                    output.clone(),
                    MonitoredController {
                        monitor: e2.clone(),
                        body: j2.clone(),
                        mitigation: n.mitigation,
                    },
                ));
            }
        }
    }
    if n.mitigation && j_moves.iter().any(|(a, _)| *a == Action::End) {
        for (input, output, e2) in &e_moves {
            if input == output && input.is_insertable() {
                out.push((
                    output.clone(),
                    MonitoredController {
                        monitor: e2.clone(),
                        body: n.body.clone(),
                        mitigation: n.mitigation,
                    },
                ));
            }
        }
    }
    normalize(out)
}

/// Network transitions, with maximal progress on time.
pub fn network_step(net: &FieldNetwork, alphabet: &Alphabet) -> Vec<(Action, FieldNetwork)> {
    if net.nodes.len() == 1 {
        return monitored_step(&net.nodes[0], alphabet)
            .into_iter()
            .map(|(a, n)| (a, FieldNetwork::single(n)))
            .collect();
    }
    let moves: Vec<_> = net
        .nodes
        .iter()
        .map(|n| monitored_step(n, alphabet))
        .collect();
    let with = |updates: &[(usize, &MonitoredController)]| {
        let mut nodes = net.nodes.clone();
        for (i, n) in updates {
            nodes[*i] = (*n).clone();
        }
        FieldNetwork::new(nodes)
    };
    let mut out = Vec::new();
    for (i, ms) in moves.iter().enumerate() {
        for (a, n) in ms {
            if *a != Action::Tick {
                out.push((a.clone(), with(&[(i, n)])));
            }
        }
    }
    for (i, mi) in moves.iter().enumerate() {
        for (j, mj) in moves.iter().enumerate() {
            if i == j {
                continue;
            }
            for (a, ni) in mi {
                let Action::Recv(c) = a else { continue };
                for (b, nj) in mj {
                    if matches!(b, Action::Send(d) if d == c) {
                        out.push((Action::Tau, with(&[(i, ni), (j, nj)])));
                    }
                }
            }
        }
    }
    if !out.iter().any(|(a, _)| *a == Action::Tau) {
        let ticks: Vec<Vec<&MonitoredController>> = moves
            .iter()
            .map(|ms| {
                ms.iter()
                    .filter(|(a, _)| *a == Action::Tick)
                    .map(|(_, n)| n)
                    .collect()
            })
            .collect();
        if ticks.iter().all(|t| !t.is_empty()) {
            let mut idx = alloc::vec![0usize; ticks.len()];
            'product: loop {
                let nodes = idx
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| ticks[i][k].clone())
                    .collect();
                out.push((Action::Tick, FieldNetwork::new(nodes)));
                for pos in (0..idx.len()).rev() {
                    idx[pos] += 1;
                    if idx[pos] < ticks[pos].len() {
                        continue 'product;
                    }
                    idx[pos] = 0;
                }
                break;
            }
        }
    }
    normalize(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{ControllerTerm as C, EditAutomaton as E, MalwareTerm as M};
    use alloc::vec;

    #[test]
    fn sensing_timeout_successors() {
        let t = C::sense(
            vec![("s1", C::end("X")), ("s2", C::cmd("a", C::end("X")))],
            C::sleep(C::end("X")),
        );
        let got = ctrl_step(&t);
        assert_eq!(
            got,
            vec![
                (Action::sense("s1"), C::end("X")),
                (Action::sense("s2"), C::cmd("a", C::end("X"))),
                (Action::Tick, C::sleep(C::end("X"))),
            ]
        );
    }

    #[test]
    fn recursion_unfolds_to_end_continuation() {
        let p = C::fix("X", C::sleep(C::end("X")));
        let s1 = ctrl_step(&p);
        assert_eq!(s1, vec![(Action::Tick, C::EndCont(Box::new(p.clone())))]);
        assert_eq!(ctrl_step(&s1[0].1), vec![(Action::End, p)]);
    }

    #[test]
    fn malware_rules() {
        assert_eq!(malware_step(&M::Nil), vec![(Action::Tick, M::Nil)]);
        assert_eq!(malware_step(&M::tick(M::Nil)), vec![(Action::Tick, M::Nil)]);
        let m = M::timeout(vec![(Action::cmd("a"), M::Nil)], M::tick(M::Nil));
        assert_eq!(
            malware_step(&m),
            vec![(Action::cmd("a"), M::Nil), (Action::Tick, M::tick(M::Nil))]
        );
    }

    #[test]
    fn drop_synchronizes_with_command() {
        let m = M::timeout(vec![(Action::drop("a"), M::Nil)], M::tick(M::Nil));
        let j = CompromisedTerm::infected(C::cmd("a", C::end("X")), m.clone());
        let got = compromised_step(&j);
        assert!(got.contains(&(Action::Tau, CompromisedTerm::infected(C::end("X"), M::Nil))));
        assert!(got.contains(&(Action::cmd("a"), CompromisedTerm::infected(C::end("X"), m))));
        // the drop itself is never visible, and nothing ticks
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn end_does_not_let_time_pass() {
        let p = C::fix("X", C::sleep(C::end("X")));
        let j = CompromisedTerm::infected(C::EndCont(Box::new(p.clone())), M::Nil);
        assert_eq!(
            compromised_step(&j),
            vec![(Action::End, CompromisedTerm::infected(p, M::Nil))]
        );
    }

    #[test]
    fn inject_channel_send() {
        let m = M::timeout(vec![(Action::send("c"), M::Nil)], M::Nil);
        let j = CompromisedTerm::infected(C::sleep(C::end("X")), m);
        let got = compromised_step(&j);
        assert!(got.contains(&(
            Action::send("c"),
            CompromisedTerm::infected(C::sleep(C::end("X")), M::Nil)
        )));
        assert!(got.contains(&(Action::Tick, CompromisedTerm::infected(C::end("X"), M::Nil))));
    }

    #[test]
    fn go_admits_every_action() {
        let a = Alphabet::new(["s"], ["a"], ["c"]);
        let got = edit_step(&E::Go, &a);
        assert_eq!(got.len(), 8);
        assert!(got.iter().all(|(i, o, e)| i == o && *e == E::Go));
    }

    #[test]
    fn edit_fix_unfolds() {
        let e = E::fix("Y", E::sum(vec![(Action::Tick, Action::Tick, E::var("Y"))]));
        assert_eq!(
            edit_step(&e, &Alphabet::default()),
            vec![(Action::Tick, Action::Tick, e.clone())]
        );
    }

    #[test]
    fn go_is_transparent_on_commands() {
        let a = Alphabet::new([], ["a"], []);
        let n = MonitoredController::new(E::Go, CompromisedTerm::genuine(C::cmd("a", C::end("X"))));
        let got = monitored_step(&n, &a);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, Action::cmd("a"));
        assert_eq!(got[0].1.body.controller, C::end("X"));
    }

    #[test]
    fn maximal_progress_blocks_tick() {
        let a = Alphabet::new([], [], ["c"]);
        let sender = C::fix("X", C::send("c", C::end("X"), C::end("X")));
        let receiver = C::fix("X", C::recv(vec![("c", C::end("X"))], C::end("X")));
        let net = FieldNetwork::new(vec![
            MonitoredController::new(E::Go, CompromisedTerm::genuine(sender)),
            MonitoredController::new(E::Go, CompromisedTerm::genuine(receiver)),
        ]);
        let got = network_step(&net, &a);
        assert!(got.iter().any(|(a, _)| *a == Action::Tau));
        assert!(got.iter().all(|(a, _)| *a != Action::Tick));
    }

    #[test]
    fn time_advances_jointly() {
        let a = Alphabet::default();
        let p = C::fix("X", C::sleep(C::end("X")));
        let node = MonitoredController::new(E::Go, CompromisedTerm::genuine(p));
        let net = FieldNetwork::new(vec![node.clone(), node]);
        let got = network_step(&net, &a);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, Action::Tick);
    }
}
