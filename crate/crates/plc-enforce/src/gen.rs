//! Generators: the water transmission network, the mimicking-malware
//! scenario, random controllers and malware, and the synthesis size ladder.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use plc_enforce_core::{Action, Alphabet, ControllerTerm as C, MalwareTerm as M, Name};

use crate::dsl::{Definition, MonitorRef, NodeDef, SourceFile, TermRef};

/// Malware placement for [`wtn`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Infection {
    Clean,
    All,
    /// 1-based node indices.
    Nodes(Vec<usize>),
}

impl Infection {
    fn infects(&self, i: usize) -> bool {
        match self {
            Infection::Clean => false,
            Infection::All => true,
            Infection::Nodes(v) => v.contains(&i),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Monitors {
    /// `go` everywhere: the reference behaviour.
    Go,
    Synthesized,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WtnParams {
    pub n: usize,
    pub infection: Infection,
    pub monitors: Monitors,
    pub mitigation: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("a network needs at least one tank, got n = {0}")]
    NoTanks(usize),
    #[error("node {node} does not exist in a network of {n}")]
    NoSuchNode { node: usize, n: usize },
}

fn sensors(i: usize) -> [String; 3] {
    [format!("l_{i}"), format!("h_{i}"), format!("m_{i}")]
}

fn actuators(i: usize) -> [String; 4] {
    [
        format!("pump_on_{i}"),
        format!("pump_off_{i}"),
        format!("valve_open_{i}"),
        format!("valve_close_{i}"),
    ]
}

/// Names used by tanks `1..=n`. Request channels run from `0` to `n`: node
/// `i` sends on `req_*_{i-1}` and listens on `req_*_i`.
pub fn wtn_alphabet(n: usize) -> Alphabet {
    let mut a = Alphabet::default();
    for i in 1..=n {
        a.sensors.extend(sensors(i).iter().map(|s| Name::new(s)));
        a.actuators
            .extend(actuators(i).iter().map(|s| Name::new(s)));
    }
    for k in 0..=n {
        a.channels.insert(Name::new(&format!("req_on_{k}")));
        a.channels.insert(Name::new(&format!("req_off_{k}")));
    }
    a
}

/// The controller of tank `i`.
pub fn wtn_controller(i: usize) -> C {
    let [l, h, m] = sensors(i);
    let [on, off, open, close] = actuators(i);
    let up = i - 1;
    let end = || C::end("X");
    let serve = |valve: &str| {
        C::recv(
            vec![
                (&format!("req_on_{i}"), C::cmd(&on, C::cmd(valve, end()))),
                (&format!("req_off_{i}"), C::cmd(&off, C::cmd(valve, end()))),
            ],
            C::cmd(valve, end()),
        )
    };
    let request = |req: &str, valve: &str| {
        C::send(&format!("{req}_{up}"), serve(valve), C::cmd(valve, end()))
    };
    C::fix(
        "X",
        C::sleep(C::sense(
            vec![
                (&l, request("req_on", &close)),
                (&h, request("req_off", &open)),
                (
                    &m,
                    C::recv(
                        vec![
                            (&format!("req_on_{i}"), C::cmd(&on, end())),
                            (&format!("req_off_{i}"), C::cmd(&off, end())),
                        ],
                        end(),
                    ),
                ),
            ],
            end(),
        )),
    )
}

/// The malware of tank `i`: ask the upstream pump to stop, then drop the
/// valve closure.
pub fn wtn_malware(i: usize) -> M {
    let x = || M::var("X");
    M::fix(
        "X",
        M::tick(M::timeout(
            vec![(
                Action::send(&format!("req_off_{}", i - 1)),
                M::timeout(vec![(Action::drop(&format!("valve_close_{i}")), x())], x()),
            )],
            x(),
        )),
    )
}

/// Malware that mimics the controller's receipt of `req_on_i` and then
/// waits, leaving the monitor ahead of the controller.
pub fn mimic_malware(i: usize) -> M {
    M::fix(
        "X",
        M::tick(M::timeout(
            vec![(Action::recv(&format!("req_on_{i}")), M::tick(M::var("X")))],
            M::var("X"),
        )),
    )
}

/// A water transmission network of `n` tanks as a source file with main
/// network `WTN`.
pub fn wtn(params: &WtnParams) -> Result<SourceFile, GenError> {
    let n = params.n;
    if n == 0 {
        return Err(GenError::NoTanks(n));
    }
    if let Infection::Nodes(v) = &params.infection {
        if let Some(&node) = v.iter().find(|&&k| k == 0 || k > n) {
            return Err(GenError::NoSuchNode { node, n });
        }
    }
    let mut file = SourceFile {
        alphabet: wtn_alphabet(n),
        ..SourceFile::default()
    };
    let mut nodes = Vec::new();
    for i in 1..=n {
        file.definitions
            .push((format!("P{i}"), Definition::Controller(wtn_controller(i))));
        let malware = params.infection.infects(i).then(|| {
            file.definitions
                .push((format!("M{i}"), Definition::Malware(wtn_malware(i))));
            TermRef::Named(format!("M{i}"))
        });
        nodes.push(NodeDef {
            monitor: match params.monitors {
                Monitors::Go => MonitorRef::Inline(plc_enforce_core::EditAutomaton::Go),
                Monitors::Synthesized => MonitorRef::Synth(format!("P{i}")),
            },
            controller: TermRef::Named(format!("P{i}")),
            malware,
            mitigation: params.mitigation && params.monitors == Monitors::Synthesized,
        });
    }
    file.definitions
        .push(("WTN".into(), Definition::Network(nodes)));
    file.main = Some("WTN".into());
    Ok(file)
}

/// Tank 1 under its synthesized monitor, infected with [`mimic_malware`].
pub fn mimic(mitigation: bool) -> SourceFile {
    let mut file = SourceFile {
        alphabet: wtn_alphabet(1),
        ..SourceFile::default()
    };
    file.definitions
        .push(("P1".into(), Definition::Controller(wtn_controller(1))));
    file.definitions
        .push(("R".into(), Definition::Malware(mimic_malware(1))));
    file.definitions.push((
        "MIMIC".into(),
        Definition::Network(vec![NodeDef {
            monitor: MonitorRef::Synth("P1".into()),
            controller: TermRef::Named("P1".into()),
            malware: Some(TermRef::Named("R".into())),
            mitigation,
        }]),
    ));
    file.main = Some("MIMIC".into());
    file
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pick<'a, R: Rng>(rng: &mut R, names: &'a [Name], max: usize) -> Vec<&'a Name> {
    let k = rng.gen_range(1..=max.min(names.len()));
    let mut v: Vec<&Name> = names.choose_multiple(rng, k).collect();
    v.sort();
    v
}

/// A random deterministic controller `fix X . tick . S` over `alphabet`.
/// `depth` bounds the nesting of each phase.
pub fn random_controller<R: Rng>(alphabet: &Alphabet, rng: &mut R, depth: usize) -> C {
    let sensors: Vec<Name> = alphabet.sensors.iter().cloned().collect();
    let actuators: Vec<Name> = alphabet.actuators.iter().cloned().collect();
    let channels: Vec<Name> = alphabet.channels.iter().cloned().collect();

    fn act<R: Rng>(rng: &mut R, actuators: &[Name], d: usize) -> C {
        if d == 0 || actuators.is_empty() || rng.gen_bool(0.3) {
            return C::end("X");
        }
        let a = actuators.choose(rng).expect("non-empty");
        C::cmd(a.as_str(), act(rng, actuators, d - 1))
    }

    fn comm<R: Rng>(rng: &mut R, actuators: &[Name], channels: &[Name], d: usize) -> C {
        if d == 0 || channels.is_empty() || rng.gen_bool(0.35) {
            return act(rng, actuators, 3);
        }
        if rng.gen_bool(0.5) {
            let c = channels.choose(rng).expect("non-empty");
            C::send(
                c.as_str(),
                comm(rng, actuators, channels, d - 1),
                comm(rng, actuators, channels, d - 1),
            )
        } else {
            let branches = pick(rng, channels, 2)
                .into_iter()
                .map(|c| (c.as_str(), comm(rng, actuators, channels, d - 1)))
                .collect();
            C::recv(branches, comm(rng, actuators, channels, d - 1))
        }
    }

    struct Names<'a> {
        sensors: &'a [Name],
        actuators: &'a [Name],
        channels: &'a [Name],
    }

    fn sens<R: Rng>(rng: &mut R, n: &Names, d: usize) -> C {
        if d == 0 || rng.gen_bool(0.3) {
            return comm(rng, n.actuators, n.channels, 2);
        }
        if n.sensors.is_empty() || rng.gen_bool(0.2) {
            return C::sleep(sens(rng, n, d - 1));
        }
        let branches = pick(rng, n.sensors, 3)
            .into_iter()
            .map(|s| (s.as_str(), sens(rng, n, d - 1)))
            .collect();
        C::sense(branches, sens(rng, n, d - 1))
    }

    let names = Names {
        sensors: &sensors,
        actuators: &actuators,
        channels: &channels,
    };
    C::fix("X", C::sleep(sens(rng, &names, depth)))
}

/// A random closed, time-guarded malware term of nesting at most `depth`.
/// Depth 1 yields `nil`, `tick . nil` or a one-branch timeout over `nil`.
pub fn random_malware<R: Rng>(alphabet: &Alphabet, rng: &mut R, depth: usize) -> M {
    let mut prefixes: Vec<Action> = alphabet.suppressible();
    prefixes.sort();

    /// Binders in scope, with whether a time step separates them from here.
    fn go<R: Rng>(
        rng: &mut R,
        prefixes: &[Action],
        scope: &mut Vec<(String, bool)>,
        d: usize,
    ) -> M {
        let guarded: Vec<String> = scope
            .iter()
            .filter(|(_, g)| *g)
            .map(|(x, _)| x.clone())
            .collect();
        if d <= 1 {
            let leaf = |rng: &mut R| match guarded.choose(rng) {
                Some(x) if rng.gen_bool(0.7) => M::var(x),
                _ => M::Nil,
            };
            return match rng.gen_range(0..3) {
                0 => leaf(rng),
                1 => {
                    let x = scope.iter().map(|(x, _)| x.clone()).collect::<Vec<_>>();
                    match x.choose(rng) {
                        Some(x) if rng.gen_bool(0.7) => M::tick(M::var(x)),
                        _ => M::tick(M::Nil),
                    }
                }
                _ if prefixes.is_empty() => M::tick(M::Nil),
                _ => {
                    let mu = prefixes.choose(rng).expect("non-empty").clone();
                    let branch = leaf(rng);
                    let timeout = match scope.last() {
                        Some((x, _)) if rng.gen_bool(0.7) => M::var(x),
                        _ => M::Nil,
                    };
                    M::timeout(vec![(mu, branch)], timeout)
                }
            };
        }
        match rng.gen_range(0..4) {
            0 => {
                let x = format!("X{}", scope.len());
                scope.push((x.clone(), false));
                let body = {
                    let len = scope.len();
                    scope[len - 1].1 = true;
                    let b = go(rng, prefixes, scope, d - 1);
                    scope[len - 1].1 = false;
                    b
                };
                scope.pop();
                M::fix(&x, M::tick(body))
            }
            1 => {
                let saved: Vec<bool> = scope.iter().map(|(_, g)| *g).collect();
                scope.iter_mut().for_each(|(_, g)| *g = true);
                let next = go(rng, prefixes, scope, d - 1);
                scope.iter_mut().zip(saved).for_each(|((_, g), s)| *g = s);
                M::tick(next)
            }
            _ if !prefixes.is_empty() => {
                let k = rng.gen_range(1..=2usize.min(prefixes.len()));
                let mut mus: Vec<Action> = prefixes.choose_multiple(rng, k).cloned().collect();
                mus.sort();
                let branches = mus
                    .into_iter()
                    .map(|mu| (mu, go(rng, prefixes, scope, d - 1)))
                    .collect();
                let saved: Vec<bool> = scope.iter().map(|(_, g)| *g).collect();
                scope.iter_mut().for_each(|(_, g)| *g = true);
                let timeout = go(rng, prefixes, scope, d - 1);
                scope.iter_mut().zip(saved).for_each(|((_, g), s)| *g = s);
                M::timeout(branches, timeout)
            }
            _ => M::tick(go(rng, prefixes, scope, d - 1)),
        }
    }

    go(rng, &prefixes, &mut Vec::new(), depth.max(1))
}

/// A straight-line controller `fix X . tick . cmd a0 . ... . cmd a(k-1) . end . X`
/// over `k` actuators, of size `k + 2`.
pub fn chain(k: usize) -> (C, Alphabet) {
    let names: Vec<String> = (0..k).map(|j| format!("a{j}")).collect();
    let alphabet = Alphabet::new(
        std::iter::empty(),
        names.iter().map(String::as_str),
        std::iter::empty(),
    );
    let mut body = C::end("X");
    for a in names.iter().rev() {
        body = C::cmd(a, body);
    }
    (C::fix("X", C::sleep(body)), alphabet)
}
