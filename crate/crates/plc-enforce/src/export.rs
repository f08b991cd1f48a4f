//! JSON and Graphviz renderings of explored systems, verdicts and event logs.

use std::fmt::Write;

use serde::Serialize;

use plc_enforce_core::{
    Counterexample, EnforcementEvent, EquivVerdict, Explored, NodeState, Run, Side, System,
};

#[derive(Serialize)]
pub struct StateJson {
    pub id: usize,
    pub term: String,
}

#[derive(Serialize)]
pub struct EdgeJson {
    pub src: u32,
    pub action: String,
    pub dst: u32,
}

#[derive(Serialize)]
pub struct LtsJson {
    pub initial: u32,
    pub states: Vec<StateJson>,
    pub edges: Vec<EdgeJson>,
}

pub fn lts_json(system: &System, explored: &Explored) -> LtsJson {
    LtsJson {
        initial: explored.lts.initial(),
        states: explored
            .states
            .iter()
            .enumerate()
            .map(|(id, s)| StateJson {
                id,
                term: system.render(s).to_string(),
            })
            .collect(),
        edges: explored
            .lts
            .edges()
            .map(|(src, a, dst)| EdgeJson {
                src,
                action: a.to_string(),
                dst,
            })
            .collect(),
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz digraph; states are labelled by id, edges by action.
pub fn lts_dot(explored: &Explored) -> String {
    let mut out = String::from("digraph lts {\n  node [shape=circle];\n  init [shape=point];\n");
    let _ = writeln!(out, "  init -> s{};", explored.lts.initial());
    for s in 0..explored.lts.num_states() {
        let _ = writeln!(out, "  s{s} [label=\"{s}\"];");
    }
    for (src, a, dst) in explored.lts.edges() {
        let _ = writeln!(
            out,
            "  s{src} -> s{dst} [label=\"{}\"];",
            escape(&a.to_string())
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum CounterexampleJson {
    Trace {
        trace: Vec<String>,
        accepted_by: &'static str,
    },
    Formula {
        formula: String,
        depth: usize,
    },
}

#[derive(Serialize)]
pub struct VerdictJson {
    pub relation: String,
    pub holds: bool,
    pub pairs: usize,
    pub counterexample: Option<CounterexampleJson>,
}

pub fn verdict_json(v: &EquivVerdict) -> VerdictJson {
    VerdictJson {
        relation: v.relation.to_string(),
        holds: v.holds,
        pairs: v.pairs,
        counterexample: v.counterexample.as_ref().map(|c| match c {
            Counterexample::Trace { trace, accepted_by } => CounterexampleJson::Trace {
                trace: trace.iter().map(ToString::to_string).collect(),
                accepted_by: side(*accepted_by),
            },
            Counterexample::Formula(f) => CounterexampleJson::Formula {
                formula: f.to_string(),
                depth: f.depth(),
            },
        }),
    }
}

fn side(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

/// Human-readable verdict, with formulas cut after `cap` subformulas.
pub fn verdict_text(v: &EquivVerdict, cap: usize) -> String {
    let mut out = format!(
        "{} {} ({} pairs)\n",
        v.relation,
        if v.holds { "holds" } else { "fails" },
        v.pairs
    );
    match &v.counterexample {
        Some(Counterexample::Trace { trace, accepted_by }) => {
            let t: Vec<String> = trace.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                out,
                "trace only on the {} side: {}",
                side(*accepted_by),
                t.join(", ")
            );
        }
        Some(Counterexample::Formula(f)) => {
            let _ = writeln!(
                out,
                "distinguishing formula (left satisfies, right does not):\n{}",
                f.render(cap)
            );
        }
        None => {}
    }
    out
}

fn state(n: NodeState) -> String {
    if n.mal == plc_enforce_core::system::NO_MALWARE {
        format!("e{}.c{}", n.edit, n.ctrl)
    } else {
        format!("e{}.c{}.m{}", n.edit, n.ctrl, n.mal)
    }
}

/// `pos kind attempted->emitted before->after`, one line per event.
pub fn event_line(e: &EnforcementEvent) -> String {
    format!(
        "{} {} {}->{} {}->{}",
        e.position,
        e.kind,
        e.attempted,
        e.emitted
            .as_ref()
            .map_or("-".to_string(), ToString::to_string),
        state(e.state_before),
        e.state_after.map_or("-".to_string(), state),
    )
}

pub fn run_text(run: &Run) -> String {
    let mut out = format!(
        "run {} ({:?}, {} steps)\n",
        run.id,
        run.stop,
        run.steps().count()
    );
    for e in &run.events {
        out.push_str(&event_line(e));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
pub struct EventJson {
    pub position: usize,
    pub kind: String,
    pub attempted: String,
    pub emitted: Option<String>,
    pub rule: Option<String>,
    pub state_before: String,
    pub state_after: Option<String>,
}

#[derive(Serialize)]
pub struct RunJson {
    pub id: usize,
    pub stop: String,
    pub trace: Vec<String>,
    pub events: Vec<EventJson>,
}

pub fn run_json(run: &Run) -> RunJson {
    RunJson {
        id: run.id,
        stop: format!("{:?}", run.stop),
        trace: run.trace.iter().map(ToString::to_string).collect(),
        events: run
            .events
            .iter()
            .map(|e| EventJson {
                position: e.position,
                kind: e.kind.to_string(),
                attempted: e.attempted.to_string(),
                emitted: e.emitted.as_ref().map(ToString::to_string),
                rule: e.rule.map(|r| format!("{r:?}")),
                state_before: state(e.state_before),
                state_after: e.state_after.map(state),
            })
            .collect(),
    }
}
