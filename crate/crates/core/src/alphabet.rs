//! Names, actions and the declared alphabet of a system.

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

/// A sensor, actuator or channel name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A process variable bound by `fix`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(s: &str) -> Self {
        Var(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The label alphabet.
///
/// `Cmd(a)` is the actuator command (written with an overbar in the calculus),
/// `Drop(a)` the malware's drop of that command. `Send(c)` and `Recv(c)` are
/// the two directions of channel `c`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Action {
    Sense(Name),
    Cmd(Name),
    Drop(Name),
    Send(Name),
    Recv(Name),
    Tau,
    Tick,
    End,
}

impl Action {
    pub fn sense(n: &str) -> Self {
        Action::Sense(Name::new(n))
    }
    pub fn cmd(n: &str) -> Self {
        Action::Cmd(Name::new(n))
    }
    pub fn drop(n: &str) -> Self {
        Action::Drop(Name::new(n))
    }
    pub fn send(n: &str) -> Self {
        Action::Send(Name::new(n))
    }
    pub fn recv(n: &str) -> Self {
        Action::Recv(Name::new(n))
    }

    pub fn is_observable(&self) -> bool {
        !matches!(self, Action::Tau)
    }

    /// Member of `Act* ∪ Chn*`, the actions synthesized monitors suppress.
    pub fn is_actuator_or_channel(&self) -> bool {
        matches!(
            self,
            Action::Cmd(_) | Action::Drop(_) | Action::Send(_) | Action::Recv(_)
        )
    }

    /// Actions a monitor may insert through mitigation: channel actions,
    /// actuator commands and `tick`.
    pub fn is_insertable(&self) -> bool {
        matches!(
            self,
            Action::Cmd(_) | Action::Send(_) | Action::Recv(_) | Action::Tick
        )
    }

    /// Prefixes malware is allowed to use.
    pub fn is_malicious_prefix(&self) -> bool {
        self.is_actuator_or_channel()
    }

    pub fn name(&self) -> Option<&Name> {
        match self {
            Action::Sense(n)
            | Action::Cmd(n)
            | Action::Drop(n)
            | Action::Send(n)
            | Action::Recv(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Sense(n) => write!(f, "{n}"),
            Action::Cmd(n) => write!(f, "cmd {n}"),
            Action::Drop(n) => write!(f, "drop {n}"),
            Action::Send(n) => write!(f, "snd {n}"),
            Action::Recv(n) => write!(f, "rcv {n}"),
            Action::Tau => f.write_str("tau"),
            Action::Tick => f.write_str("tick"),
            Action::End => f.write_str("end"),
        }
    }
}

/// Which declared set a name belongs to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum NameKind {
    Sensor,
    Actuator,
    Channel,
}

impl fmt::Display for NameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameKind::Sensor => "sensor",
            NameKind::Actuator => "actuator",
            NameKind::Channel => "channel",
        })
    }
}

/// Declared sensor, actuator and channel names.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Alphabet {
    pub sensors: BTreeSet<Name>,
    pub actuators: BTreeSet<Name>,
    pub channels: BTreeSet<Name>,
}

impl Alphabet {
    pub fn new<'a>(
        sensors: impl IntoIterator<Item = &'a str>,
        actuators: impl IntoIterator<Item = &'a str>,
        channels: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        Alphabet {
            sensors: sensors.into_iter().map(Name::new).collect(),
            actuators: actuators.into_iter().map(Name::new).collect(),
            channels: channels.into_iter().map(Name::new).collect(),
        }
    }

    pub fn kind_of(&self, name: &Name) -> Option<NameKind> {
        if self.sensors.contains(name) {
            Some(NameKind::Sensor)
        } else if self.actuators.contains(name) {
            Some(NameKind::Actuator)
        } else if self.channels.contains(name) {
            Some(NameKind::Channel)
        } else {
            None
        }
    }

    /// Names declared in more than one set.
    pub fn overlaps(&self) -> Vec<Name> {
        let mut out: Vec<Name> = self
            .sensors
            .intersection(&self.actuators)
            .chain(self.sensors.intersection(&self.channels))
            .chain(self.actuators.intersection(&self.channels))
            .cloned()
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Whether the name carried by `action` is declared in the right set.
    pub fn admits(&self, action: &Action) -> bool {
        match action {
            Action::Sense(n) => self.sensors.contains(n),
            Action::Cmd(n) | Action::Drop(n) => self.actuators.contains(n),
            Action::Send(n) | Action::Recv(n) => self.channels.contains(n),
            Action::Tau | Action::Tick | Action::End => true,
        }
    }

    /// `Act* = Act ∪ Act̄`, in action order.
    pub fn act_star(&self) -> Vec<Action> {
        let mut v: Vec<Action> = self
            .actuators
            .iter()
            .map(|a| Action::Cmd(a.clone()))
            .collect();
        v.extend(self.actuators.iter().map(|a| Action::Drop(a.clone())));
        v
    }

    /// `Chn* = Chn ∪ Chn̄`, in action order.
    pub fn chn_star(&self) -> Vec<Action> {
        let mut v: Vec<Action> = self
            .channels
            .iter()
            .map(|c| Action::Send(c.clone()))
            .collect();
        v.extend(self.channels.iter().map(|c| Action::Recv(c.clone())));
        v
    }

    /// `Act* ∪ Chn*`, sorted.
    pub fn suppressible(&self) -> Vec<Action> {
        let mut v = self.act_star();
        v.extend(self.chn_star());
        v.sort();
        v
    }

    /// Every action over this alphabet, including `tau`, `tick` and `end`, sorted.
    pub fn universe(&self) -> Vec<Action> {
        let mut v: Vec<Action> = self
            .sensors
            .iter()
            .map(|s| Action::Sense(s.clone()))
            .collect();
        v.extend(self.suppressible());
        v.push(Action::Tau);
        v.push(Action::Tick);
        v.push(Action::End);
        v.sort();
        v
    }

    /// Union of two alphabets.
    pub fn merge(&self, other: &Alphabet) -> Alphabet {
        Alphabet {
            sensors: self.sensors.union(&other.sensors).cloned().collect(),
            actuators: self.actuators.union(&other.actuators).cloned().collect(),
            channels: self.channels.union(&other.channels).cloned().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universe_counts_each_kind_once() {
        let a = Alphabet::new(["s"], ["a"], ["c"]);
        let u = a.universe();
        // s, cmd a, drop a, snd c, rcv c, tau, tick, end
        assert_eq!(u.len(), 8);
        assert!(u.contains(&Action::drop("a")));
        assert_eq!(a.suppressible().len(), 4);
    }

    #[test]
    fn overlaps_are_reported() {
        let a = Alphabet::new(["x"], ["x", "y"], ["y"]);
        assert_eq!(a.overlaps(), alloc::vec![Name::new("x"), Name::new("y")]);
    }
}
