//! System references accepted on the command line:
//!
//! * `path.plc` or `path.plc:Name`: the entry network of a file, or a named
//!   network (a controller name stands for `go |- P`);
//! * `wtn(N,clean)`, `wtn(N,malware)`, `wtn(N,malware@1+3)`: the water
//!   network with synthesized monitors;
//! * `golden(N)` and `goldenP` (= `golden(1)`): the clean water network
//!   under `go` monitors;
//! * `mimic`: tank 1 with mimicking malware.

use std::path::Path;

use anyhow::{bail, Context, Result};

use plc_enforce_core::{Alphabet, EditAutomaton, FieldNetwork};

use crate::dsl::{parse, SourceFile};
use crate::gen::{mimic, wtn, Infection, Monitors, WtnParams};

#[derive(Clone, Debug)]
pub struct Resolved {
    pub network: FieldNetwork,
    pub alphabet: Alphabet,
    /// The source the network came from, for `synth` and `detect`.
    pub source: SourceFile,
}

impl Resolved {
    /// Force the mitigation rule on or off for every node that is not `go`.
    pub fn set_mitigation(&mut self, on: Option<bool>) {
        if let Some(on) = on {
            for n in &mut self.network.nodes {
                n.mitigation = on && n.monitor != EditAutomaton::Go;
            }
        }
    }
}

fn call<'a>(s: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let rest = s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')?;
    Some(rest.split(',').map(str::trim).collect())
}

fn count(s: &str) -> Result<usize> {
    s.parse()
        .with_context(|| format!("expected a node count, found `{s}`"))
}

pub fn parse_infection(s: &str) -> Result<Infection> {
    Ok(match s {
        "clean" | "none" => Infection::Clean,
        "malware" | "all" => Infection::All,
        _ => {
            let list = s
                .strip_prefix("malware@")
                .with_context(|| format!("expected clean, malware or malware@I+J, found `{s}`"))?;
            Infection::Nodes(list.split('+').map(count).collect::<Result<_>>()?)
        }
    })
}

fn from_source(source: SourceFile, name: Option<&str>) -> Result<Resolved> {
    let network = match name {
        Some(n) => source.network(n)?,
        None => source.entry()?,
    };
    Ok(Resolved {
        network,
        alphabet: source.alphabet.clone(),
        source,
    })
}

pub fn read_source(path: &Path) -> Result<SourceFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text).with_context(|| format!("in {}", path.display()))
}

/// Resolve a system reference.
pub fn resolve(reference: &str) -> Result<Resolved> {
    let r = reference.trim();
    if let Some(args) = call(r, "wtn") {
        let [n, inf] = args[..] else {
            bail!("wtn takes two arguments: wtn(N,clean|malware|malware@I+J)");
        };
        let params = WtnParams {
            n: count(n)?,
            infection: parse_infection(inf)?,
            monitors: Monitors::Synthesized,
            mitigation: false,
        };
        return from_source(wtn(&params)?, None);
    }
    if let Some(args) = call(r, "golden") {
        let [n] = args[..] else {
            bail!("golden takes one argument: golden(N)");
        };
        return golden(count(n)?);
    }
    if r == "goldenP" {
        return golden(1);
    }
    if r == "mimic" {
        return from_source(mimic(false), None);
    }
    let (path, name) = match r.rsplit_once(':') {
        Some((p, n)) if !n.contains('/') && !n.is_empty() => (p, Some(n)),
        _ => (r, None),
    };
    from_source(read_source(Path::new(path))?, name)
}

fn golden(n: usize) -> Result<Resolved> {
    let params = WtnParams {
        n,
        infection: Infection::Clean,
        monitors: Monitors::Go,
        mitigation: false,
    };
    from_source(wtn(&params)?, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_references() {
        let r = resolve("wtn(2,malware@2)").unwrap();
        assert_eq!(r.network.nodes.len(), 2);
        assert!(r.network.nodes[0].body.malware.is_none());
        assert!(r.network.nodes[1].body.malware.is_some());
        let g = resolve("goldenP").unwrap();
        assert_eq!(g.network.nodes[0].monitor, EditAutomaton::Go);
        let mut m = resolve("mimic").unwrap();
        m.set_mitigation(Some(true));
        assert!(m.network.nodes[0].mitigation);
        assert!(resolve("wtn(0,clean)").is_err());
        assert!(resolve("wtn(2)").is_err());
        assert!(resolve("golden(x)").is_err());
    }

    #[test]
    fn file_references() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sys.plc");
        std::fs::write(
            &path,
            "alphabet sensors{l} actuators{a}
             controller P = fix X . tick . [l . cmd a . end] else (end)
             network N = synth(P) |- (P)",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let whole = resolve(p).unwrap();
        assert_ne!(whole.network.nodes[0].monitor, EditAutomaton::Go);
        let named = resolve(&format!("{p}:P")).unwrap();
        assert_eq!(named.network.nodes[0].monitor, EditAutomaton::Go);
        assert!(resolve(&format!("{p}:Q")).is_err());
    }
}
