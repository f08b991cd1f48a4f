//! Weak trace equivalence, weak simulation and weak bisimulation between
//! explored LTSs. `tau` is the only unobservable action; `tick` and `end` are
//! observed like any other action.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;

use crate::alphabet::Action;
use crate::hml::{Formula, Hml};
use crate::lts::Lts;

pub const DEFAULT_PAIR_BUDGET: usize = 10_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Relation {
    TraceEquivalence,
    WeakSimulation,
    WeakBisimulation,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::TraceEquivalence => "trace-eq",
            Relation::WeakSimulation => "weak-sim",
            Relation::WeakBisimulation => "weak-bisim",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Counterexample {
    /// A weak trace of exactly one side.
    Trace {
        trace: Vec<Action>,
        accepted_by: Side,
    },
    /// Satisfied by the left initial state and not by the right one.
    Formula(Hml),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EquivVerdict {
    pub relation: Relation,
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
    /// Product states visited by the decision procedure.
    pub pairs: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
pub enum EquivError {
    #[error("pair budget of {0} exceeded")]
    BudgetExceeded(usize),
}

/// A weak edge: `tau*` for `tau`, `tau* a tau*` otherwise. `strong` marks
/// edges that are also single transitions of the original LTS.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct WeakEdge {
    pub src: u32,
    pub label: u16,
    pub dst: u32,
    pub strong: bool,
}

/// The saturation of an LTS, with the same action table.
#[derive(Clone, Debug)]
pub struct WeakLts {
    pub actions: Vec<Action>,
    pub num_states: usize,
    pub edges: Vec<WeakEdge>,
}

/// Saturate `lts` with every weak transition. The reflexive `tau` edge of
/// each state is included.
pub fn weak_transitions(lts: &Lts) -> WeakLts {
    let mut edges = Vec::new();
    let tau = lts.label_of(&Action::Tau);
    for s in 0..lts.num_states() as u32 {
        let strong = lts.successors(s);
        let closure = lts.tau_closure(&[s]);
        if let Some(tau) = tau {
            for &t in &closure {
                edges.push(WeakEdge {
                    src: s,
                    label: tau,
                    dst: t,
                    strong: strong.binary_search(&(tau, t)).is_ok(),
                });
            }
        }
        let mut obs: Vec<(u16, u32)> = Vec::new();
        for &c in &closure {
            for &(a, t) in lts.successors(c) {
                if !lts.is_tau(a) {
                    obs.extend(lts.tau_closure(&[t]).into_iter().map(|u| (a, u)));
                }
            }
        }
        obs.sort_unstable();
        obs.dedup();
        for (a, t) in obs {
            edges.push(WeakEdge {
                src: s,
                label: a,
                dst: t,
                strong: strong.binary_search(&(a, t)).is_ok(),
            });
        }
    }
    WeakLts {
        actions: lts.actions().to_vec(),
        num_states: lts.num_states(),
        edges,
    }
}

/// Both action tables mapped into one.
struct Labels {
    actions: Vec<Action>,
    left: Vec<u16>,
    right: Vec<u16>,
    tau: u16,
}

impl Labels {
    fn new(a: &Lts, b: &Lts) -> Labels {
        let mut actions: Vec<Action> = a.actions().iter().chain(b.actions()).cloned().collect();
        actions.push(Action::Tau);
        actions.sort();
        actions.dedup();
        let find = |x: &Action| actions.binary_search(x).unwrap() as u16;
        Labels {
            left: a.actions().iter().map(find).collect(),
            right: b.actions().iter().map(find).collect(),
            tau: find(&Action::Tau),
            actions,
        }
    }
}

/// Lazily computed weak moves of one LTS, in merged labels.
struct WeakIndex<'a> {
    lts: &'a Lts,
    map: &'a [u16],
    tau: u16,
    closure: Vec<Option<Vec<u32>>>,
    moves: Vec<Option<Vec<(u16, u32)>>>,
}

impl<'a> WeakIndex<'a> {
    fn new(lts: &'a Lts, map: &'a [u16], tau: u16) -> Self {
        WeakIndex {
            lts,
            map,
            tau,
            closure: vec![None; lts.num_states()],
            moves: vec![None; lts.num_states()],
        }
    }

    fn strong(&self, s: u32) -> impl Iterator<Item = (u16, u32)> + '_ {
        self.lts
            .successors(s)
            .iter()
            .map(|&(a, t)| (self.map[a as usize], t))
    }

    fn closure(&mut self, s: u32) -> &[u32] {
        if self.closure[s as usize].is_none() {
            self.closure[s as usize] = Some(self.lts.tau_closure(&[s]));
        }
        self.closure[s as usize].as_deref().unwrap()
    }

    /// Weak moves of `s`, including `tau*` moves, sorted by label.
    fn moves(&mut self, s: u32) -> &[(u16, u32)] {
        if self.moves[s as usize].is_none() {
            let closure = self.closure(s).to_vec();
            let mut out: Vec<(u16, u32)> = closure.iter().map(|&t| (self.tau, t)).collect();
            for &c in &closure {
                let strong: Vec<(u16, u32)> = self.strong(c).collect();
                for (a, t) in strong {
                    if a != self.tau {
                        let after = self.closure(t).to_vec();
                        out.extend(after.into_iter().map(|u| (a, u)));
                    }
                }
            }
            out.sort_unstable();
            out.dedup();
            self.moves[s as usize] = Some(out);
        }
        self.moves[s as usize].as_deref().unwrap()
    }

    fn answers(&mut self, s: u32, a: u16) -> Vec<u32> {
        let m = self.moves(s);
        let lo = m.partition_point(|&(b, _)| b < a);
        m[lo..]
            .iter()
            .take_while(|&&(b, _)| b == a)
            .map(|&(_, t)| t)
            .collect()
    }
}

/// Weak trace equivalence by on-the-fly subset construction over both
/// sides. The counterexample is a shortest distinguishing trace.
pub fn trace_equivalent(a: &Lts, b: &Lts, budget: usize) -> Result<EquivVerdict, EquivError> {
    let labels = Labels::new(a, b);
    let mut left = Subsets::new(a, &labels.left, labels.tau);
    let mut right = Subsets::new(b, &labels.right, labels.tau);
    let start = (left.initial(), right.initial());
    let mut index: HashMap<(u32, u32), u32> = HashMap::new();
    let mut parent: Vec<Option<(u32, u16)>> = vec![None];
    let mut pairs = vec![start];
    index.insert(start, 0);
    let mut queue = VecDeque::from([0u32]);
    while let Some(p) = queue.pop_front() {
        let (x, y) = pairs[p as usize];
        let mx = left.moves(x).to_vec();
        let my = right.moves(y).to_vec();
        let (mut i, mut j) = (0, 0);
        while i < mx.len() || j < my.len() {
            let la = mx.get(i).map(|m| m.0).unwrap_or(u16::MAX);
            let lb = my.get(j).map(|m| m.0).unwrap_or(u16::MAX);
            let (label, next, differs) = if la == lb {
                i += 1;
                j += 1;
                (la, (mx[i - 1].1, my[j - 1].1), None)
            } else if la < lb {
                i += 1;
                (la, (0, 0), Some(Side::Left))
            } else {
                j += 1;
                (lb, (0, 0), Some(Side::Right))
            };
            if let Some(side) = differs {
                let mut trace = vec![labels.actions[label as usize].clone()];
                let mut cur = p;
                while let Some((q, l)) = parent[cur as usize] {
                    trace.push(labels.actions[l as usize].clone());
                    cur = q;
                }
                trace.reverse();
                return Ok(EquivVerdict {
                    relation: Relation::TraceEquivalence,
                    holds: false,
                    counterexample: Some(Counterexample::Trace {
                        trace,
                        accepted_by: side,
                    }),
                    pairs: pairs.len(),
                });
            }
            if !index.contains_key(&next) {
                if pairs.len() >= budget {
                    return Err(EquivError::BudgetExceeded(budget));
                }
                let id = pairs.len() as u32;
                index.insert(next, id);
                pairs.push(next);
                parent.push(Some((p, label)));
                queue.push_back(id);
            }
        }
    }
    Ok(EquivVerdict {
        relation: Relation::TraceEquivalence,
        holds: true,
        counterexample: None,
        pairs: pairs.len(),
    })
}

/// Interned `tau`-closed state sets of one LTS with their observable moves.
struct Subsets<'a> {
    lts: &'a Lts,
    map: &'a [u16],
    tau: u16,
    sets: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, u32>,
    moves: Vec<Option<Vec<(u16, u32)>>>,
}

impl<'a> Subsets<'a> {
    fn new(lts: &'a Lts, map: &'a [u16], tau: u16) -> Self {
        Subsets {
            lts,
            map,
            tau,
            sets: Vec::new(),
            index: HashMap::new(),
            moves: Vec::new(),
        }
    }

    fn intern(&mut self, set: Vec<u32>) -> u32 {
        if let Some(&id) = self.index.get(&set) {
            return id;
        }
        let id = self.sets.len() as u32;
        self.index.insert(set.clone(), id);
        self.sets.push(set);
        self.moves.push(None);
        id
    }

    fn initial(&mut self) -> u32 {
        let set = self.lts.tau_closure(&[self.lts.initial()]);
        self.intern(set)
    }

    /// Observable successors by merged label, sorted.
    fn moves(&mut self, id: u32) -> &[(u16, u32)] {
        if self.moves[id as usize].is_none() {
            let mut strong: Vec<(u16, u32)> = Vec::new();
            for &s in &self.sets[id as usize] {
                for &(a, t) in self.lts.successors(s) {
                    let l = self.map[a as usize];
                    if l != self.tau {
                        strong.push((l, t));
                    }
                }
            }
            strong.sort_unstable();
            strong.dedup();
            let mut out = Vec::new();
            let mut k = 0;
            while k < strong.len() {
                let l = strong[k].0;
                let end = k + strong[k..].iter().take_while(|m| m.0 == l).count();
                let targets: Vec<u32> = strong[k..end].iter().map(|m| m.1).collect();
                let closed = self.lts.tau_closure(&targets);
                let next = self.intern(closed);
                out.push((l, next));
                k = end;
            }
            self.moves[id as usize] = Some(out);
        }
        self.moves[id as usize].as_deref().unwrap()
    }
}

struct Attack {
    owner: u32,
    side: Side,
    label: u16,
    options: Vec<u32>,
    remaining: u32,
}

/// The simulation game between two LTSs, restricted to pairs reachable from
/// the initial pair.
struct Game {
    pairs: Vec<(u32, u32)>,
    attacks: Vec<Attack>,
    by_pair: Vec<Vec<u32>>,
    failed: Vec<bool>,
}

impl Game {
    fn build(
        a: &Lts,
        b: &Lts,
        labels: &Labels,
        symmetric: bool,
        budget: usize,
    ) -> Result<Game, EquivError> {
        let mut wa = WeakIndex::new(a, &labels.left, labels.tau);
        let mut wb = WeakIndex::new(b, &labels.right, labels.tau);
        let mut index: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs = vec![(a.initial(), b.initial())];
        index.insert(pairs[0], 0);
        let mut attacks: Vec<Attack> = Vec::new();
        let mut by_pair: Vec<Vec<u32>> = vec![Vec::new()];
        let mut uses: Vec<Vec<u32>> = vec![Vec::new()];
        let mut next = 0usize;
        while next < pairs.len() {
            let owner = next as u32;
            let (p, q) = pairs[next];
            next += 1;
            let mut pending: Vec<Pending> = Vec::new();
            let left: Vec<(u16, u32)> = wa.strong(p).collect();
            for (l, p2) in left {
                let opts = wb.answers(q, l).into_iter().map(|q2| (p2, q2)).collect();
                pending.push((Side::Left, l, opts));
            }
            if symmetric {
                let right: Vec<(u16, u32)> = wb.strong(q).collect();
                for (l, q2) in right {
                    let opts = wa.answers(p, l).into_iter().map(|p2| (p2, q2)).collect();
                    pending.push((Side::Right, l, opts));
                }
            }
            for (side, label, opts) in pending {
                let id = attacks.len() as u32;
                let mut options = Vec::with_capacity(opts.len());
                for pair in opts {
                    let pid = match index.get(&pair) {
                        Some(&x) => x,
                        None => {
                            if pairs.len() >= budget {
                                return Err(EquivError::BudgetExceeded(budget));
                            }
                            let x = pairs.len() as u32;
                            index.insert(pair, x);
                            pairs.push(pair);
                            by_pair.push(Vec::new());
                            uses.push(Vec::new());
                            x
                        }
                    };
                    options.push(pid);
                    uses[pid as usize].push(id);
                }
                by_pair[owner as usize].push(id);
                attacks.push(Attack {
                    owner,
                    side,
                    label,
                    remaining: options.len() as u32,
                    options,
                });
            }
        }
        let mut failed = vec![false; pairs.len()];
        let mut stack: Vec<u32> = Vec::new();
        for at in &attacks {
            if at.remaining == 0 && !failed[at.owner as usize] {
                failed[at.owner as usize] = true;
                stack.push(at.owner);
            }
        }
        while let Some(x) = stack.pop() {
            for &at in &uses[x as usize] {
                let at = &mut attacks[at as usize];
                at.remaining -= 1;
                if at.remaining == 0 && !failed[at.owner as usize] {
                    failed[at.owner as usize] = true;
                    stack.push(at.owner);
                }
            }
        }
        Ok(Game {
            pairs,
            attacks,
            by_pair,
            failed,
        })
    }

    /// A distinguishing formula of minimal modal depth for the initial pair.
    fn formula(&self, labels: &Labels) -> Hml {
        let n = self.pairs.len();
        let mut level: Vec<u32> = vec![u32::MAX; n];
        let mut witness: Vec<u32> = vec![u32::MAX; n];
        let failed: Vec<u32> = (0..n as u32).filter(|&p| self.failed[p as usize]).collect();
        let mut round = 0u32;
        while level[0] == u32::MAX {
            round += 1;
            let mut assigned = Vec::new();
            for &p in &failed {
                if level[p as usize] != u32::MAX {
                    continue;
                }
                let win = self.by_pair[p as usize].iter().copied().find(|&at| {
                    self.attacks[at as usize]
                        .options
                        .iter()
                        .all(|&o| level[o as usize] < round)
                });
                if let Some(at) = win {
                    assigned.push((p, at));
                }
            }
            if assigned.is_empty() {
                break;
            }
            for (p, at) in assigned {
                level[p as usize] = round;
                witness[p as usize] = at;
            }
        }
        let mut hml = Hml::new();
        let mut memo: HashMap<u32, usize> = HashMap::new();
        let mut tt = None;
        let mut ff = None;
        self.formula_of(0, &witness, labels, &mut hml, &mut memo, &mut tt, &mut ff);
        hml
    }

    #[allow(clippy::too_many_arguments)]
    fn formula_of(
        &self,
        p: u32,
        witness: &[u32],
        labels: &Labels,
        hml: &mut Hml,
        memo: &mut HashMap<u32, usize>,
        tt: &mut Option<usize>,
        ff: &mut Option<usize>,
    ) -> usize {
        if let Some(&f) = memo.get(&p) {
            return f;
        }
        let at = &self.attacks[witness[p as usize] as usize];
        let subs: Vec<usize> = at
            .options
            .iter()
            .map(|&o| self.formula_of(o, witness, labels, hml, memo, tt, ff))
            .collect();
        let action = labels.actions[at.label as usize].clone();
        let f = match at.side {
            Side::Left => {
                let inner = if subs.is_empty() {
                    *tt.get_or_insert_with(|| hml.push(Formula::True))
                } else if subs.len() == 1 {
                    subs[0]
                } else {
                    hml.push(Formula::And(subs))
                };
                hml.push(Formula::Diamond(action, inner))
            }
            Side::Right => {
                let inner = if subs.is_empty() {
                    *ff.get_or_insert_with(|| hml.push(Formula::False))
                } else if subs.len() == 1 {
                    subs[0]
                } else {
                    hml.push(Formula::Or(subs))
                };
                hml.push(Formula::Box(action, inner))
            }
        };
        memo.insert(p, f);
        f
    }
}

fn game_verdict(
    a: &Lts,
    b: &Lts,
    relation: Relation,
    budget: usize,
) -> Result<EquivVerdict, EquivError> {
    let labels = Labels::new(a, b);
    let game = Game::build(
        a,
        b,
        &labels,
        relation == Relation::WeakBisimulation,
        budget,
    )?;
    let holds = !game.failed[0];
    Ok(EquivVerdict {
        relation,
        holds,
        counterexample: (!holds).then(|| Counterexample::Formula(game.formula(&labels))),
        pairs: game.pairs.len(),
    })
}

/// Whether the initial state of `a` is weakly simulated by that of `b`.
/// A challenge and the pairs that could answer it.
type Pending = (Side, u16, Vec<(u32, u32)>);

pub fn weakly_simulated_by(a: &Lts, b: &Lts, budget: usize) -> Result<EquivVerdict, EquivError> {
    game_verdict(a, b, Relation::WeakSimulation, budget)
}

/// Whether the initial states of `a` and `b` are weakly bisimilar.
pub fn weakly_bisimilar(a: &Lts, b: &Lts, budget: usize) -> Result<EquivVerdict, EquivError> {
    game_verdict(a, b, Relation::WeakBisimulation, budget)
}
