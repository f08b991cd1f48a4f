//! Canonical concrete syntax.
//!
//! Every term prints to the text accepted by the `.plc` parser, and parsing
//! the printed text yields the same tree.

use core::fmt::{self, Display, Formatter, Write};

use crate::term::{
    CompromisedTerm, ControllerTerm, EditAutomaton, FieldNetwork, MalwareTerm, MonitoredController,
};

impl Display for ControllerTerm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            ControllerTerm::Fix { var, body } => write!(f, "fix {var} . {body}"),
            ControllerTerm::Sleep(next) => write!(f, "tick . {next}"),
            ControllerTerm::SensTimeout { branches, timeout } => {
                f.write_char('[')?;
                for (i, (s, next)) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{s} . {next}")?;
                }
                write!(f, "] else ({timeout})")
            }
            ControllerTerm::CommTimeoutIn { branches, timeout } => {
                f.write_char('[')?;
                for (i, (c, next)) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "rcv {c} . {next}")?;
                }
                write!(f, "] else ({timeout})")
            }
            ControllerTerm::CommTimeoutOut {
                channel,
                then,
                timeout,
            } => write!(f, "[snd {channel} . {then}] else ({timeout})"),
            ControllerTerm::ActCmdPrefix { actuator, then } => write!(f, "cmd {actuator} . {then}"),
            ControllerTerm::EndVar(x) => write!(f, "end . {x}"),
            ControllerTerm::EndCont(p) => write!(f, "end . ({p})"),
        }
    }
}

impl Display for MalwareTerm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            MalwareTerm::Fix { var, body } => write!(f, "fix {var} . {body}"),
            MalwareTerm::Var(x) => write!(f, "{x}"),
            MalwareTerm::TickPrefix(next) => write!(f, "tick . {next}"),
            MalwareTerm::Nil => f.write_str("nil"),
            MalwareTerm::Timeout { branches, timeout } => {
                f.write_char('[')?;
                for (i, (mu, next)) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{} . {next}", MaliciousPrefix(mu))?;
                }
                write!(f, "] else ({timeout})")
            }
        }
    }
}

/// Malware prefixes use the `inj-` keywords so they read differently from
/// controller prefixes.
pub struct MaliciousPrefix<'a>(pub &'a crate::Action);

impl Display for MaliciousPrefix<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        use crate::Action;
        match self.0 {
            Action::Send(c) => write!(f, "inj-snd {c}"),
            Action::Recv(c) => write!(f, "inj-rcv {c}"),
            Action::Cmd(a) => write!(f, "inj-cmd {a}"),
            Action::Drop(a) => write!(f, "drop {a}"),
            other => write!(f, "{other}"),
        }
    }
}

fn needs_parens(e: &EditAutomaton) -> bool {
    match e {
        EditAutomaton::Fix { .. } => true,
        EditAutomaton::Sum { branches, suppress } => {
            branches.len() + usize::from(suppress.is_some()) != 1
        }
        _ => false,
    }
}

struct Continuation<'a>(&'a EditAutomaton);

impl Display for Continuation<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if needs_parens(self.0) {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Display for EditAutomaton {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            EditAutomaton::Go => f.write_str("go"),
            EditAutomaton::Var(x) => write!(f, "{x}"),
            EditAutomaton::Fix { var, body } => write!(f, "fix {var} . {body}"),
            EditAutomaton::Sum { branches, suppress } => {
                if branches.is_empty() && suppress.is_none() {
                    return f.write_str("none");
                }
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{}/{} . {}", b.input, b.output, Continuation(&b.next))?;
                }
                if let Some(s) = suppress {
                    if !branches.is_empty() {
                        f.write_str(" + ")?;
                    }
                    f.write_str("others")?;
                    if !s.except.is_empty() {
                        f.write_char('{')?;
                        for (i, a) in s.except.iter().enumerate() {
                            if i > 0 {
                                f.write_str(", ")?;
                            }
                            write!(f, "{a}")?;
                        }
                        f.write_char('}')?;
                    }
                    write!(f, "/tau . {}", Continuation(&s.next))?;
                }
                Ok(())
            }
        }
    }
}

impl Display for CompromisedTerm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match &self.malware {
            None => write!(f, "({{{}}})", self.controller),
            Some(m) => write!(f, "({{{}}} | {{{}}})", self.controller, m),
        }
    }
}

impl Display for MonitoredController {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}} |- {}", self.monitor, self.body)?;
        if self.mitigation {
            f.write_str(" mitigate")?;
        }
        Ok(())
    }
}

impl Display for FieldNetwork {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(" || ")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Action;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn go_prints_as_keyword() {
        assert_eq!(EditAutomaton::Go.to_string(), "go");
    }

    #[test]
    fn controller_text() {
        let p = ControllerTerm::fix(
            "X",
            ControllerTerm::sleep(ControllerTerm::sense(
                vec![("l", ControllerTerm::cmd("a", ControllerTerm::end("X")))],
                ControllerTerm::end("X"),
            )),
        );
        assert_eq!(
            p.to_string(),
            "fix X . tick . [l . cmd a . end . X] else (end . X)"
        );
    }

    #[test]
    fn nested_sums_are_parenthesized() {
        let inner = EditAutomaton::sum(vec![
            (Action::Tick, Action::Tick, EditAutomaton::var("Y")),
            (Action::End, Action::End, EditAutomaton::var("X")),
        ]);
        let e = EditAutomaton::sum(vec![(Action::cmd("a"), Action::cmd("a"), inner)]);
        assert_eq!(e.to_string(), "cmd a/cmd a . (tick/tick . Y + end/end . X)");
    }
}
