//! Compiled systems.
//!
//! A [`System`] precomputes the transition tables of every controller,
//! malware and edit automaton state reachable from a network. Component
//! states are the terms produced by the reference semantics in
//! [`crate::step`], interned to integer ids, so a system state is a small
//! vector of id triples and the composition rules work on integers.

use alloc::vec::Vec;
use core::fmt;
use core::hash::Hash;

use hashbrown::HashMap;
use smallvec::SmallVec;

use crate::alphabet::{Action, Alphabet};
use crate::step::{ctrl_step, edit_step, malware_step};
use crate::term::{
    CompromisedTerm, ControllerTerm, EditAutomaton, FieldNetwork, MalwareTerm, MonitoredController,
};
use crate::validate::{Validate, ValidateOptions, Violation};

/// Marks a node without malware.
pub const NO_MALWARE: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeState {
    pub edit: u32,
    pub ctrl: u32,
    pub mal: u32,
}

pub type SysState = SmallVec<[NodeState; 2]>;

/// Which rule produced a monitored-controller step.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum NodeRule {
    /// Enforce over a controller move.
    Ctrl,
    /// Enforce over an injected malware action.
    Inject,
    /// Enforce over a dropped actuator command.
    DropAct,
    /// Enforce over a joint time step.
    TimePar,
    Mitigation,
}

/// One step of a monitored controller with its derivation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeMove {
    pub emitted: u16,
    pub rule: NodeRule,
    /// Action of the compromised controller; `end` for mitigation.
    pub attempted: u16,
    pub target: NodeState,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("invalid system: {}", .0.first().map(|v| alloc::format!("{v}")).unwrap_or_default())]
    Invalid(Vec<Violation>),
    #[error("network has no nodes")]
    Empty,
}

/// Interned terms with their outgoing moves.
struct Table<T> {
    terms: Vec<T>,
    index: HashMap<T, u32>,
}

impl<T: Clone + Eq + Hash> Table<T> {
    fn new() -> Self {
        Table {
            terms: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn intern(&mut self, t: &T, pending: &mut Vec<u32>) -> u32 {
        if let Some(&id) = self.index.get(t) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push(t.clone());
        self.index.insert(t.clone(), id);
        pending.push(id);
        id
    }
}

struct Actions {
    table: Vec<Action>,
    index: HashMap<Action, u16>,
}

impl Actions {
    fn new(alphabet: &Alphabet) -> Self {
        let table = alphabet.universe();
        let index = table
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i as u16))
            .collect();
        Actions { table, index }
    }

    fn id(&self, a: &Action) -> u16 {
        self.index[a]
    }
}

struct Labels {
    tau: u16,
    tick: u16,
    end: u16,
}

/// A network compiled for exploration.
pub struct System {
    alphabet: Alphabet,
    actions: Actions,
    labels: Labels,
    /// For each action id, the matching drop or send/receive partner id.
    partner: Vec<Option<u16>>,
    ctrl: Table<ControllerTerm>,
    ctrl_moves: Vec<Vec<(u16, u32)>>,
    mal: Table<MalwareTerm>,
    mal_moves: Vec<Vec<(u16, u32)>>,
    edit: Table<EditAutomaton>,
    /// Sorted by input; empty for `go`.
    edit_moves: Vec<Vec<(u16, u16, u32)>>,
    edit_go: Vec<bool>,
    mitigation: Vec<bool>,
    initial: SysState,
}

impl fmt::Debug for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("System")
            .field("nodes", &self.initial.len())
            .field("controller_states", &self.ctrl.terms.len())
            .field("malware_states", &self.mal.terms.len())
            .field("monitor_states", &self.edit.terms.len())
            .finish()
    }
}

impl System {
    /// Compile a network. Terms are checked in runtime mode, so states
    /// reached by earlier execution are accepted as initial terms.
    pub fn new(network: &FieldNetwork, alphabet: &Alphabet) -> Result<System, SystemError> {
        if network.nodes.is_empty() {
            return Err(SystemError::Empty);
        }
        let mut violations = alphabet.violations(alphabet, ValidateOptions::runtime());
        violations.extend(network.violations(alphabet, ValidateOptions::runtime()));
        if !violations.is_empty() {
            return Err(SystemError::Invalid(violations));
        }
        let actions = Actions::new(alphabet);
        let labels = Labels {
            tau: actions.id(&Action::Tau),
            tick: actions.id(&Action::Tick),
            end: actions.id(&Action::End),
        };
        let partner = actions
            .table
            .iter()
            .map(|a| {
                let p = match a {
                    Action::Cmd(n) => Action::Drop(n.clone()),
                    Action::Drop(n) => Action::Cmd(n.clone()),
                    Action::Send(n) => Action::Recv(n.clone()),
                    Action::Recv(n) => Action::Send(n.clone()),
                    _ => return None,
                };
                Some(actions.id(&p))
            })
            .collect();
        let mut sys = System {
            alphabet: alphabet.clone(),
            actions,
            labels,
            partner,
            ctrl: Table::new(),
            ctrl_moves: Vec::new(),
            mal: Table::new(),
            mal_moves: Vec::new(),
            edit: Table::new(),
            edit_moves: Vec::new(),
            edit_go: Vec::new(),
            mitigation: Vec::new(),
            initial: SysState::new(),
        };
        for node in &network.nodes {
            let edit = sys.add_edit(&node.monitor);
            let ctrl = sys.add_ctrl(&node.body.controller);
            let mal = match &node.body.malware {
                Some(m) => sys.add_mal(m),
                None => NO_MALWARE,
            };
            sys.initial.push(NodeState { edit, ctrl, mal });
            sys.mitigation.push(node.mitigation);
        }
        Ok(sys)
    }

    pub fn monitored(
        node: &MonitoredController,
        alphabet: &Alphabet,
    ) -> Result<System, SystemError> {
        System::new(&FieldNetwork::single(node.clone()), alphabet)
    }

    fn add_ctrl(&mut self, t: &ControllerTerm) -> u32 {
        let mut pending = Vec::new();
        let root = self.ctrl.intern(t, &mut pending);
        while let Some(id) = pending.pop() {
            let term = self.ctrl.terms[id as usize].clone();
            let moves = ctrl_step(&term)
                .iter()
                .map(|(a, next)| (self.actions.id(a), self.ctrl.intern(next, &mut pending)))
                .collect();
            store(&mut self.ctrl_moves, id, moves);
        }
        root
    }

    fn add_mal(&mut self, t: &MalwareTerm) -> u32 {
        let mut pending = Vec::new();
        let root = self.mal.intern(t, &mut pending);
        while let Some(id) = pending.pop() {
            let term = self.mal.terms[id as usize].clone();
            let moves = malware_step(&term)
                .iter()
                .map(|(a, next)| (self.actions.id(a), self.mal.intern(next, &mut pending)))
                .collect();
            store(&mut self.mal_moves, id, moves);
        }
        root
    }

    fn add_edit(&mut self, t: &EditAutomaton) -> u32 {
        let mut pending = Vec::new();
        let root = self.edit.intern(t, &mut pending);
        while let Some(id) = pending.pop() {
            let term = self.edit.terms[id as usize].clone();
            let go = term == EditAutomaton::Go;
            let mut moves: Vec<(u16, u16, u32)> = if go {
                Vec::new()
            } else {
                edit_step(&term, &self.alphabet)
                    .iter()
                    .map(|(i, o, next)| {
                        (
                            self.actions.id(i),
                            self.actions.id(o),
                            self.edit.intern(next, &mut pending),
                        )
                    })
                    .collect()
            };
            moves.sort_unstable();
            moves.dedup();
            store(&mut self.edit_moves, id, moves);
            if self.edit_go.len() <= id as usize {
                self.edit_go.resize(id as usize + 1, false);
            }
            self.edit_go[id as usize] = go;
        }
        root
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Action table; labels in successor lists index into it.
    pub fn actions(&self) -> &[Action] {
        &self.actions.table
    }

    pub fn action(&self, label: u16) -> &Action {
        &self.actions.table[label as usize]
    }

    pub fn label_of(&self, a: &Action) -> Option<u16> {
        self.actions.index.get(a).copied()
    }

    pub fn initial(&self) -> &SysState {
        &self.initial
    }

    pub fn num_nodes(&self) -> usize {
        self.initial.len()
    }

    pub fn mitigation(&self, node: usize) -> bool {
        self.mitigation[node]
    }

    /// Moves of the compromised controller `(ctrl, mal)`.
    pub fn compromised_moves(&self, ctrl: u32, mal: u32, out: &mut Vec<(u16, u32, u32, NodeRule)>) {
        let z = &self.ctrl_moves[ctrl as usize];
        if mal == NO_MALWARE {
            out.extend(z.iter().map(|&(a, c)| (a, c, mal, NodeRule::Ctrl)));
            return;
        }
        let m = &self.mal_moves[mal as usize];
        let tick = self.labels.tick;
        for &(a, c) in z {
            if a != tick {
                out.push((a, c, mal, NodeRule::Ctrl));
            }
        }
        for &(a, m2) in m {
            if a != tick && !matches!(self.actions.table[a as usize], Action::Drop(_)) {
                out.push((a, ctrl, m2, NodeRule::Inject));
            }
        }
        for &(a, c) in z {
            for &(b, m2) in m {
                if a == tick && b == tick {
                    out.push((tick, c, m2, NodeRule::TimePar));
                } else if matches!(self.actions.table[a as usize], Action::Cmd(_))
                    && self.partner[a as usize] == Some(b)
                {
                    out.push((self.labels.tau, c, m2, NodeRule::DropAct));
                }
            }
        }
    }

    /// Steps of one monitored controller with provenance, sorted.
    pub fn node_moves(&self, node: usize, n: NodeState) -> Vec<NodeMove> {
        let mut j = Vec::new();
        self.compromised_moves(n.ctrl, n.mal, &mut j);
        let mut out = Vec::new();
        let go = self.edit_go[n.edit as usize];
        let edits = &self.edit_moves[n.edit as usize];
        for &(a, c, m, rule) in &j {
            let target = |edit| NodeState {
                edit,
                ctrl: c,
                mal: m,
            };
            if go {
                out.push(NodeMove {
                    emitted: a,
                    rule,
                    attempted: a,
                    target: target(n.edit),
                });
                continue;
            }
            let lo = edits.partition_point(|&(i, _, _)| i < a);
            for &(_, o, e2) in edits[lo..].iter().take_while(|&&(i, _, _)| i == a) {
                out.push(NodeMove {
                    emitted: o,
                    rule,
                    attempted: a,
                    target: target(e2),
                });
            }
        }
        if self.mitigation[node] && j.iter().any(|&(a, _, _, _)| a == self.labels.end) {
            let mut insert = |a: u16, e2: u32| {
                out.push(NodeMove {
                    emitted: a,
                    rule: NodeRule::Mitigation,
                    attempted: self.labels.end,
                    target: NodeState { edit: e2, ..n },
                })
            };
            if go {
                for (a, act) in self.actions.table.iter().enumerate() {
                    if act.is_insertable() {
                        insert(a as u16, n.edit);
                    }
                }
            } else {
                for &(i, o, e2) in edits {
                    if i == o && self.actions.table[i as usize].is_insertable() {
                        insert(i, e2);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Labelled successors of a network state, sorted and duplicate-free.
    pub fn successors(&self, s: &SysState, out: &mut Vec<(u16, SysState)>) {
        out.clear();
        let k = s.len();
        let moves: SmallVec<[Vec<NodeMove>; 2]> = s
            .iter()
            .enumerate()
            .map(|(i, &n)| self.node_moves(i, n))
            .collect();
        if k == 1 {
            out.extend(
                moves[0]
                    .iter()
                    .map(|m| (m.emitted, SmallVec::from_elem(m.target, 1))),
            );
            out.sort_unstable();
            out.dedup();
            return;
        }
        let tick = self.labels.tick;
        let tau = self.labels.tau;
        for (i, ms) in moves.iter().enumerate() {
            for m in ms {
                if m.emitted != tick {
                    let mut t = s.clone();
                    t[i] = m.target;
                    out.push((m.emitted, t));
                }
            }
        }
        for (i, mi) in moves.iter().enumerate() {
            for recv in mi
                .iter()
                .filter(|m| matches!(self.actions.table[m.emitted as usize], Action::Recv(_)))
            {
                let send = self.partner[recv.emitted as usize];
                for (j, mj) in moves.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    for m in mj.iter().filter(|m| Some(m.emitted) == send) {
                        let mut t = s.clone();
                        t[i] = recv.target;
                        t[j] = m.target;
                        out.push((tau, t));
                    }
                }
            }
        }
        if !out.iter().any(|(a, _)| *a == tau) {
            let ticks: SmallVec<[Vec<NodeState>; 2]> = moves
                .iter()
                .map(|ms| {
                    ms.iter()
                        .filter(|m| m.emitted == tick)
                        .map(|m| m.target)
                        .collect()
                })
                .collect();
            if ticks.iter().all(|t: &Vec<NodeState>| !t.is_empty()) {
                let mut idx: SmallVec<[usize; 2]> = SmallVec::from_elem(0, k);
                'product: loop {
                    let t: SysState = idx.iter().enumerate().map(|(i, &x)| ticks[i][x]).collect();
                    out.push((tick, t));
                    for pos in (0..k).rev() {
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
        out.sort_unstable();
        out.dedup();
    }

    pub fn controller_term(&self, id: u32) -> &ControllerTerm {
        &self.ctrl.terms[id as usize]
    }

    pub fn malware_term(&self, id: u32) -> Option<&MalwareTerm> {
        (id != NO_MALWARE).then(|| &self.mal.terms[id as usize])
    }

    pub fn edit_term(&self, id: u32) -> &EditAutomaton {
        &self.edit.terms[id as usize]
    }

    pub fn render_node(&self, node: usize, n: NodeState) -> MonitoredController {
        MonitoredController {
            monitor: self.edit_term(n.edit).clone(),
            body: CompromisedTerm {
                controller: self.controller_term(n.ctrl).clone(),
                malware: self.malware_term(n.mal).cloned(),
            },
            mitigation: self.mitigation[node],
        }
    }

    /// The network term a state stands for.
    pub fn render(&self, s: &SysState) -> FieldNetwork {
        FieldNetwork::new(
            s.iter()
                .enumerate()
                .map(|(i, &n)| self.render_node(i, n))
                .collect(),
        )
    }

    /// The same system with every node's malware removed and its monitor
    /// replaced by `go`, mitigation off.
    pub fn genuine_node(&self, node: usize) -> MonitoredController {
        let n = self.initial[node];
        MonitoredController::new(
            EditAutomaton::Go,
            CompromisedTerm::genuine(self.controller_term(n.ctrl).clone()),
        )
    }
}

fn store<T>(v: &mut Vec<Vec<T>>, id: u32, moves: Vec<T>) {
    if v.len() <= id as usize {
        v.resize_with(id as usize + 1, Vec::new);
    }
    v[id as usize] = moves;
}
