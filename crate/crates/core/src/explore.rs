//! Reachable state-space exploration.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::lts::Lts;
use crate::system::{SysState, System};

pub const DEFAULT_BUDGET: usize = 1_000_000;

/// An explored system: the LTS plus the state each index stands for.
#[derive(Clone, Debug)]
pub struct Explored {
    pub lts: Lts,
    pub states: Vec<SysState>,
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum ExploreError {
    /// More than `budget` states are reachable. `partial` holds the states
    /// found so far; those never expanded have no outgoing edges.
    #[error("state budget of {budget} exceeded")]
    BudgetExceeded { budget: usize, partial: Explored },
}

/// Explore sequentially.
pub fn explore(system: &System, budget: usize) -> Result<Explored, ExploreError> {
    explore_with(system, budget, |batch| {
        let mut buf = Vec::new();
        batch
            .iter()
            .map(|s| {
                system.successors(s, &mut buf);
                buf.clone()
            })
            .collect()
    })
}

/// Breadth-first exploration, one level at a time. `expand` maps a batch of
/// states to their successor lists and may compute them in parallel; ids are
/// assigned sequentially in frontier order, so the result does not depend on
/// how `expand` schedules its work.
pub fn explore_with<F>(
    system: &System,
    budget: usize,
    mut expand: F,
) -> Result<Explored, ExploreError>
where
    F: FnMut(&[SysState]) -> Vec<Vec<(u16, SysState)>>,
{
    let mut index: HashMap<SysState, u32> = HashMap::new();
    let mut states: Vec<SysState> = Vec::new();
    let mut adjacency: Vec<Vec<(u16, u32)>> = Vec::new();
    let initial = system.initial().clone();
    index.insert(initial.clone(), 0);
    states.push(initial);
    adjacency.push(Vec::new());
    let mut level_start = 0usize;
    let mut exceeded = false;
    while level_start < states.len() && !exceeded {
        let level_end = states.len();
        let succ = expand(&states[level_start..level_end]);
        for (offset, list) in succ.into_iter().enumerate() {
            let src = level_start + offset;
            let mut edges = Vec::with_capacity(list.len());
            for (a, t) in list {
                let id = match index.get(&t) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= budget {
                            exceeded = true;
                            continue;
                        }
                        let id = states.len() as u32;
                        index.insert(t.clone(), id);
                        states.push(t);
                        adjacency.push(Vec::new());
                        id
                    }
                };
                edges.push((a, id));
            }
            adjacency[src] = edges;
        }
        level_start = level_end;
    }
    let explored = Explored {
        lts: Lts::from_adjacency(system.actions().to_vec(), adjacency, 0),
        states,
    };
    if exceeded {
        Err(ExploreError::BudgetExceeded {
            budget,
            partial: explored,
        })
    } else {
        Ok(explored)
    }
}
