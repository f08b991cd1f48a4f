//! Explicit labelled transition systems.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::alphabet::Action;

/// A finite LTS in compressed sparse row form. Labels index into `actions`;
/// the outgoing edges of each state are sorted by `(label, target)` and
/// contain no duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    actions: Vec<Action>,
    offsets: Vec<u32>,
    edges: Vec<(u16, u32)>,
    initial: u32,
}

impl Lts {
    /// Build from an edge list. Edges are sorted and deduplicated.
    pub fn from_edges(
        actions: Vec<Action>,
        num_states: usize,
        mut edges: Vec<(u32, u16, u32)>,
        initial: u32,
    ) -> Lts {
        edges.sort_unstable();
        edges.dedup();
        let mut offsets = vec![0u32; num_states + 1];
        for &(s, _, _) in &edges {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..num_states {
            offsets[i + 1] += offsets[i];
        }
        Lts {
            actions,
            offsets,
            edges: edges.into_iter().map(|(_, a, t)| (a, t)).collect(),
            initial,
        }
    }

    /// Build from per-state successor lists that are already in state order.
    pub fn from_adjacency(
        actions: Vec<Action>,
        adjacency: Vec<Vec<(u16, u32)>>,
        initial: u32,
    ) -> Lts {
        let mut offsets = Vec::with_capacity(adjacency.len() + 1);
        let mut edges = Vec::new();
        offsets.push(0);
        for mut succ in adjacency {
            succ.sort_unstable();
            succ.dedup();
            edges.extend(succ);
            offsets.push(edges.len() as u32);
        }
        Lts {
            actions,
            offsets,
            edges,
            initial,
        }
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, label: u16) -> &Action {
        &self.actions[label as usize]
    }

    pub fn label_of(&self, a: &Action) -> Option<u16> {
        self.actions.iter().position(|b| b == a).map(|i| i as u16)
    }

    pub fn initial(&self) -> u32 {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn successors(&self, s: u32) -> &[(u16, u32)] {
        let lo = self.offsets[s as usize] as usize;
        let hi = self.offsets[s as usize + 1] as usize;
        &self.edges[lo..hi]
    }

    /// All edges as `(source, action, target)`, ordered by source.
    pub fn edges(&self) -> impl Iterator<Item = (u32, &Action, u32)> + '_ {
        (0..self.num_states() as u32).flat_map(move |s| {
            self.successors(s)
                .iter()
                .map(move |&(a, t)| (s, &self.actions[a as usize], t))
        })
    }

    pub fn is_tau(&self, label: u16) -> bool {
        self.actions[label as usize] == Action::Tau
    }

    /// States reachable through zero or more `tau` edges from `from`.
    pub fn tau_closure(&self, from: &[u32]) -> Vec<u32> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<u32> = from.to_vec();
        while let Some(s) = stack.pop() {
            if seen.insert(s) {
                for &(a, t) in self.successors(s) {
                    if self.is_tau(a) && !seen.contains(&t) {
                        stack.push(t);
                    }
                }
            }
        }
        seen.into_iter().collect()
    }

    /// States reachable from `from` through one `a` edge.
    pub fn strong_image(&self, from: &[u32], a: &Action) -> Vec<u32> {
        let Some(label) = self.label_of(a) else {
            return Vec::new();
        };
        let mut out: Vec<u32> = from
            .iter()
            .flat_map(|&s| {
                self.successors(s)
                    .iter()
                    .filter(move |&&(b, _)| b == label)
                    .map(|&(_, t)| t)
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// States reachable from `from` by the weak move on `a`: `tau*` when `a`
    /// is `tau`, `tau* a tau*` otherwise.
    pub fn weak_image(&self, from: &[u32], a: &Action) -> Vec<u32> {
        let pre = self.tau_closure(from);
        if *a == Action::Tau {
            return pre;
        }
        self.tau_closure(&self.strong_image(&pre, a))
    }

    /// Whether `trace` is a weak trace from the initial state. `tau` entries
    /// in the trace are ignored.
    pub fn accepts_weak(&self, trace: &[Action]) -> bool {
        !self.weak_run(trace).is_empty()
    }

    /// States reached after the weak trace `trace`.
    pub fn weak_run(&self, trace: &[Action]) -> Vec<u32> {
        let mut cur = self.tau_closure(&[self.initial]);
        for a in trace.iter().filter(|a| a.is_observable()) {
            if cur.is_empty() {
                break;
            }
            cur = self.weak_image(&cur, a);
        }
        cur
    }

    /// Shortest action path from the initial state to `target`.
    pub fn path_to(&self, target: u32) -> Option<Vec<Action>> {
        let n = self.num_states();
        let mut parent: Vec<Option<(u32, u16)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = alloc::collections::VecDeque::new();
        seen[self.initial as usize] = true;
        queue.push_back(self.initial);
        while let Some(s) = queue.pop_front() {
            if s == target {
                let mut path = Vec::new();
                let mut cur = s;
                while let Some((p, a)) = parent[cur as usize] {
                    path.push(self.actions[a as usize].clone());
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for &(a, t) in self.successors(s) {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    parent[t as usize] = Some((s, a));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// States that have both a `tau` and a `tick` edge.
    pub fn maximal_progress_violations(&self) -> Vec<u32> {
        (0..self.num_states() as u32)
            .filter(|&s| {
                let succ = self.successors(s);
                succ.iter().any(|&(a, _)| self.is_tau(a))
                    && succ
                        .iter()
                        .any(|&(a, _)| self.actions[a as usize] == Action::Tick)
            })
            .collect()
    }

    /// A cycle that never crosses a `tick` or `end` edge, if any.
    pub fn zeno_cycle(&self) -> Option<Vec<u32>> {
        let n = self.num_states();
        let timed = |a: u16| matches!(self.actions[a as usize], Action::Tick | Action::End);
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut colour = vec![0u8; n];
        let mut stack: Vec<(u32, usize)> = Vec::new();
        for root in 0..n as u32 {
            if colour[root as usize] != 0 {
                continue;
            }
            colour[root as usize] = 1;
            stack.push((root, 0));
            while let Some(&mut (s, ref mut i)) = stack.last_mut() {
                let succ = self.successors(s);
                if *i >= succ.len() {
                    colour[s as usize] = 2;
                    stack.pop();
                    continue;
                }
                let (a, t) = succ[*i];
                *i += 1;
                if timed(a) {
                    continue;
                }
                match colour[t as usize] {
                    0 => {
                        colour[t as usize] = 1;
                        stack.push((t, 0));
                    }
                    1 => {
                        let start = stack.iter().position(|&(u, _)| u == t).unwrap_or(0);
                        return Some(stack[start..].iter().map(|&(u, _)| u).collect());
                    }
                    _ => {}
                }
            }
        }
        None
    }
}

/// States reachable from the initial state by exactly `trace`, action for
/// action. Empty when `trace` is not a trace of the LTS.
pub fn run_trace(lts: &Lts, trace: &[Action]) -> Vec<u32> {
    let mut cur = vec![lts.initial];
    for a in trace {
        if cur.is_empty() {
            break;
        }
        cur = lts.strong_image(&cur, a);
    }
    cur
}

/// States with no outgoing edge.
pub fn find_deadlocks(lts: &Lts) -> Vec<u32> {
    (0..lts.num_states() as u32)
        .filter(|&s| lts.successors(s).is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle() -> Lts {
        // 0 -tick-> 1 -end-> 0
        Lts::from_edges(
            vec![Action::Tick, Action::End],
            2,
            vec![(0, 0, 1), (1, 1, 0)],
            0,
        )
    }

    #[test]
    fn strong_runs() {
        let l = cycle();
        assert_eq!(run_trace(&l, &[Action::Tick, Action::End]), vec![0]);
        assert!(run_trace(&l, &[Action::End]).is_empty());
        assert!(find_deadlocks(&l).is_empty());
        assert!(l.zeno_cycle().is_none());
    }

    #[test]
    fn tau_cycle_is_zeno() {
        let l = Lts::from_edges(
            vec![Action::Tau, Action::Tick],
            3,
            vec![(0, 0, 1), (1, 0, 0), (1, 1, 2)],
            0,
        );
        assert_eq!(l.zeno_cycle(), Some(vec![0, 1]));
        assert_eq!(l.tau_closure(&[0]), vec![0, 1]);
        assert_eq!(l.maximal_progress_violations(), vec![1]);
        assert_eq!(find_deadlocks(&l), vec![2]);
        assert_eq!(l.weak_image(&[0], &Action::Tick), vec![2]);
        assert_eq!(l.path_to(2), Some(vec![Action::Tau, Action::Tick]));
    }
}
