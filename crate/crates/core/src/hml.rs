//! Hennessy-Milner formulas with weak modalities, used as distinguishing
//! counterexamples for weak (bi)simulation.
//!
//! `<a>f` holds in a state with some weak `a` successor satisfying `f`
//! (`tau*` for `a = tau`, `tau* a tau*` otherwise); `[a]f` holds when every
//! weak `a` successor satisfies `f`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::alphabet::Action;
use crate::lts::Lts;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Formula {
    True,
    False,
    Diamond(Action, usize),
    Box(Action, usize),
    And(Vec<usize>),
    Or(Vec<usize>),
}

/// A formula DAG. Children always have smaller ids than their parents.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Hml {
    nodes: Vec<Formula>,
}

impl Hml {
    pub fn new() -> Self {
        Hml { nodes: Vec::new() }
    }

    pub fn push(&mut self, f: Formula) -> usize {
        self.nodes.push(f);
        self.nodes.len() - 1
    }

    pub fn root(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn node(&self, id: usize) -> &Formula {
        &self.nodes[id]
    }

    /// Nesting depth of modalities.
    pub fn depth(&self) -> usize {
        let mut d = vec![0usize; self.nodes.len()];
        for (i, f) in self.nodes.iter().enumerate() {
            d[i] = match f {
                Formula::True | Formula::False => 0,
                Formula::Diamond(_, c) | Formula::Box(_, c) => 1 + d[*c],
                Formula::And(cs) | Formula::Or(cs) => cs.iter().map(|&c| d[c]).max().unwrap_or(0),
            };
        }
        d.last().copied().unwrap_or(0)
    }

    /// Textual form, truncated with `...` after roughly `cap` subformulas.
    pub fn render(&self, cap: usize) -> String {
        let mut out = String::new();
        let mut budget = cap;
        if !self.nodes.is_empty() {
            let _ = self.write_node(&mut out, self.root(), &mut budget);
        }
        out
    }

    fn write_node(&self, out: &mut String, id: usize, budget: &mut usize) -> fmt::Result {
        if *budget == 0 {
            return out.write_str("...");
        }
        *budget -= 1;
        match &self.nodes[id] {
            Formula::True => out.write_str("tt"),
            Formula::False => out.write_str("ff"),
            Formula::Diamond(a, c) => {
                write!(out, "<{a}>")?;
                self.write_node(out, *c, budget)
            }
            Formula::Box(a, c) => {
                write!(out, "[{a}]")?;
                self.write_node(out, *c, budget)
            }
            Formula::And(cs) | Formula::Or(cs) if cs.len() == 1 => {
                self.write_node(out, cs[0], budget)
            }
            Formula::And(cs) | Formula::Or(cs) => {
                let op = if matches!(self.nodes[id], Formula::And(_)) {
                    " & "
                } else {
                    " | "
                };
                out.write_char('(')?;
                for (i, &c) in cs.iter().enumerate() {
                    if i > 0 {
                        out.write_str(op)?;
                    }
                    self.write_node(out, c, budget)?;
                }
                out.write_char(')')
            }
        }
    }

    /// Satisfaction of the root formula in every state of `lts`.
    pub fn eval(&self, lts: &Lts) -> Vec<bool> {
        let n = lts.num_states();
        let mut pred: Vec<Vec<(u16, u32)>> = vec![Vec::new(); n];
        for s in 0..n as u32 {
            for &(a, t) in lts.successors(s) {
                pred[t as usize].push((a, s));
            }
        }
        let back_tau = |set: &[bool]| -> Vec<bool> {
            let mut out = set.to_vec();
            let mut stack: Vec<u32> = (0..n as u32).filter(|&s| set[s as usize]).collect();
            while let Some(s) = stack.pop() {
                for &(a, p) in &pred[s as usize] {
                    if lts.is_tau(a) && !out[p as usize] {
                        out[p as usize] = true;
                        stack.push(p);
                    }
                }
            }
            out
        };
        let weak_pre = |a: &Action, set: &[bool]| -> Vec<bool> {
            let after = back_tau(set);
            if *a == Action::Tau {
                return after;
            }
            let mut mid = vec![false; n];
            if let Some(label) = lts.label_of(a) {
                for t in 0..n {
                    if after[t] {
                        for &(b, p) in &pred[t] {
                            if b == label {
                                mid[p as usize] = true;
                            }
                        }
                    }
                }
            }
            back_tau(&mid)
        };
        let mut sat: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for f in &self.nodes {
            let v = match f {
                Formula::True => vec![true; n],
                Formula::False => vec![false; n],
                Formula::Diamond(a, c) => weak_pre(a, &sat[*c]),
                Formula::Box(a, c) => {
                    let neg: Vec<bool> = sat[*c].iter().map(|b| !b).collect();
                    weak_pre(a, &neg).into_iter().map(|b| !b).collect()
                }
                Formula::And(cs) => (0..n).map(|s| cs.iter().all(|&c| sat[c][s])).collect(),
                Formula::Or(cs) => (0..n).map(|s| cs.iter().any(|&c| sat[c][s])).collect(),
            };
            sat.push(v);
        }
        sat.pop().unwrap_or_else(|| vec![true; n])
    }

    /// Whether the initial state of `lts` satisfies the formula.
    pub fn holds_initially(&self, lts: &Lts) -> bool {
        self.eval(lts)[lts.initial() as usize]
    }
}

impl fmt::Display for Hml {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(usize::MAX))
    }
}
