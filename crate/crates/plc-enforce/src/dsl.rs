//! The `.plc` source format.
//!
//! A file declares one alphabet and a list of named definitions:
//!
//! ```text
//! alphabet sensors{l, h} actuators{pump} channels{req}
//!
//! controller P = fix X . tick . [l . cmd pump . end] else (end)
//! malware M = fix X . tick . [drop pump . X] else (X)
//! network N = synth(P) |- (P | M) mitigate
//! main N
//! ```
//!
//! Term syntax is the one produced by the `Display` impls of the core crate,
//! plus the sugar `end` for `end . X` with `X` the innermost `fix` binder.

use std::collections::BTreeSet;
use std::fmt;

use plc_enforce_core::{
    synthesize, Action, Alphabet, CompromisedTerm, ControllerTerm, EditAutomaton, EditBranch,
    FieldNetwork, MalwareTerm, MonitoredController, Name, NameKind, Suppression, SynthesisError,
    Var,
};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum ParseError {
    #[error("{pos}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        pos: Pos,
        expected: Vec<String>,
        found: String,
    },
    #[error("{pos}: duplicate definition {name}")]
    Duplicate { pos: Pos, name: String },
    #[error("{pos}: unknown {kind} {name}")]
    UnknownName {
        pos: Pos,
        kind: String,
        name: String,
    },
    #[error("{pos}: {message}")]
    Invalid { pos: Pos, message: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::Duplicate { pos, .. }
            | ParseError::UnknownName { pos, .. }
            | ParseError::Invalid { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Lower(String),
    Upper(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lower(s) | Tok::Upper(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const SYMBOLS: [&str; 16] = [
    "||", "|-", ".", "+", "[", "]", "(", ")", "{", "}", ",", "/", "|", "=", ";", ":",
];

const KEYWORDS: [&str; 27] = [
    "fix",
    "tick",
    "end",
    "else",
    "cmd",
    "snd",
    "rcv",
    "drop",
    "inj-snd",
    "inj-rcv",
    "inj-cmd",
    "nil",
    "go",
    "tau",
    "others",
    "none",
    "mitigate",
    "synth",
    "alphabet",
    "sensors",
    "actuators",
    "channels",
    "controller",
    "malware",
    "automaton",
    "network",
    "main",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let bump = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                let ch = chars[i];
                bump(&mut i, &mut line, &mut col, ch);
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                let ch = chars[i];
                bump(&mut i, &mut line, &mut col, ch);
            }
            let mut word: String = chars[start..i].iter().collect();
            if word == "inj"
                && chars.get(i) == Some(&'-')
                && chars.get(i + 1).is_some_and(|c| c.is_ascii_lowercase())
            {
                bump(&mut i, &mut line, &mut col, '-');
                let rest = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    let ch = chars[i];
                    bump(&mut i, &mut line, &mut col, ch);
                }
                word.push('-');
                word.extend(&chars[rest..i]);
            }
            let tok = if c.is_ascii_uppercase() {
                Tok::Upper(word)
            } else {
                Tok::Lower(word)
            };
            out.push((tok, pos));
            continue;
        }
        let sym = SYMBOLS.iter().find(|s| {
            s.chars()
                .enumerate()
                .all(|(k, sc)| chars.get(i + k) == Some(&sc))
        });
        match sym {
            Some(s) => {
                for _ in 0..s.len() {
                    let ch = chars[i];
                    bump(&mut i, &mut line, &mut col, ch);
                }
                out.push((Tok::Sym(s), pos));
            }
            None => {
                return Err(ParseError::Syntax {
                    pos,
                    expected: vec!["a name, keyword or symbol".into()],
                    found: format!("`{c}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// A reference to a definition or an inline term.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TermRef<T> {
    Named(String),
    Inline(T),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MonitorRef {
    /// The automaton synthesized from the named controller.
    Synth(String),
    Named(String),
    Inline(EditAutomaton),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NodeDef {
    pub monitor: MonitorRef,
    pub controller: TermRef<ControllerTerm>,
    pub malware: Option<TermRef<MalwareTerm>>,
    pub mitigation: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Definition {
    Controller(ControllerTerm),
    Malware(MalwareTerm),
    Automaton(EditAutomaton),
    Network(Vec<NodeDef>),
}

impl Definition {
    fn kind(&self) -> &'static str {
        match self {
            Definition::Controller(_) => "controller",
            Definition::Malware(_) => "malware",
            Definition::Automaton(_) => "automaton",
            Definition::Network(_) => "network",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SourceFile {
    pub alphabet: Alphabet,
    pub definitions: Vec<(String, Definition)>,
    pub main: Option<String>,
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum ResolveError {
    #[error("no definition named {0}")]
    Missing(String),
    #[error("{name} is a {found}, expected a {expected}")]
    WrongKind {
        name: String,
        found: &'static str,
        expected: &'static str,
    },
    #[error("file has no main definition and no single network")]
    NoEntry,
    #[error("cannot synthesize a monitor for {name}: {source}")]
    Synthesis {
        name: String,
        #[source]
        source: SynthesisError,
    },
}

impl SourceFile {
    pub fn get(&self, name: &str) -> Option<&Definition> {
        self.definitions
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, d)| d)
    }

    pub fn controller(&self, name: &str) -> Result<&ControllerTerm, ResolveError> {
        match self.get(name) {
            Some(Definition::Controller(p)) => Ok(p),
            Some(d) => Err(wrong(name, d, "controller")),
            None => Err(ResolveError::Missing(name.into())),
        }
    }

    pub fn malware(&self, name: &str) -> Result<&MalwareTerm, ResolveError> {
        match self.get(name) {
            Some(Definition::Malware(m)) => Ok(m),
            Some(d) => Err(wrong(name, d, "malware")),
            None => Err(ResolveError::Missing(name.into())),
        }
    }

    fn automaton(&self, name: &str) -> Result<&EditAutomaton, ResolveError> {
        match self.get(name) {
            Some(Definition::Automaton(e)) => Ok(e),
            Some(d) => Err(wrong(name, d, "automaton")),
            None => Err(ResolveError::Missing(name.into())),
        }
    }

    /// The network called `name`. A controller name stands for `go |- P`.
    pub fn network(&self, name: &str) -> Result<FieldNetwork, ResolveError> {
        let nodes = match self.get(name) {
            Some(Definition::Network(nodes)) => nodes,
            Some(Definition::Controller(p)) => {
                return Ok(FieldNetwork::single(MonitoredController::new(
                    EditAutomaton::Go,
                    CompromisedTerm::genuine(p.clone()),
                )))
            }
            Some(d) => return Err(wrong(name, d, "network")),
            None => return Err(ResolveError::Missing(name.into())),
        };
        let mut out = Vec::with_capacity(nodes.len());
        for node in nodes {
            let monitor = match &node.monitor {
                MonitorRef::Inline(e) => e.clone(),
                MonitorRef::Named(n) => self.automaton(n)?.clone(),
                MonitorRef::Synth(n) => {
                    synthesize(self.controller(n)?, &self.alphabet)
                        .map_err(|source| ResolveError::Synthesis {
                            name: n.clone(),
                            source,
                        })?
                        .automaton
                }
            };
            let controller = match &node.controller {
                TermRef::Inline(p) => p.clone(),
                TermRef::Named(n) => self.controller(n)?.clone(),
            };
            let malware = match &node.malware {
                None => None,
                Some(TermRef::Inline(m)) => Some(m.clone()),
                Some(TermRef::Named(n)) => Some(self.malware(n)?.clone()),
            };
            out.push(MonitoredController {
                monitor,
                body: CompromisedTerm {
                    controller,
                    malware,
                },
                mitigation: node.mitigation,
            });
        }
        Ok(FieldNetwork::new(out))
    }

    /// The network named by `main`, or the only network in the file.
    pub fn entry(&self) -> Result<FieldNetwork, ResolveError> {
        if let Some(m) = &self.main {
            return self.network(m);
        }
        let mut nets = self
            .definitions
            .iter()
            .filter(|(_, d)| matches!(d, Definition::Network(_)));
        match (nets.next(), nets.next()) {
            (Some((n, _)), None) => self.network(n),
            _ => Err(ResolveError::NoEntry),
        }
    }
}

fn wrong(name: &str, d: &Definition, expected: &'static str) -> ResolveError {
    ResolveError::WrongKind {
        name: name.into(),
        found: d.kind(),
        expected,
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    alphabet: Option<&'a Alphabet>,
    /// Enclosing controller binders, innermost last.
    binders: Vec<Var>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn new(src: &str, alphabet: Option<&'a Alphabet>) -> PResult<Self> {
        Ok(Parser {
            toks: lex(src)?,
            at: 0,
            alphabet,
            binders: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Lower(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(&[&format!("`{s}`")])
        }
    }

    fn kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.fail(&[&format!("`{k}`")])
        }
    }

    fn upper(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Upper(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.fail(&[what]),
        }
    }

    fn lower(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Lower(s) if !KEYWORDS.contains(&s.as_str()) => {
                let pos = self.pos();
                self.advance();
                Ok((s, pos))
            }
            _ => self.fail(&[what]),
        }
    }

    fn name(&mut self, kind: NameKind) -> PResult<Name> {
        let (s, pos) = self.lower(&format!("{kind} name"))?;
        let name = Name::new(&s);
        if let Some(a) = self.alphabet {
            if a.kind_of(&name) != Some(kind) {
                return Err(ParseError::UnknownName {
                    pos,
                    kind: kind.to_string(),
                    name: s,
                });
            }
        }
        Ok(name)
    }

    fn eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.fail(&["end of input"])
        }
    }

    fn controller(&mut self) -> PResult<ControllerTerm> {
        use ControllerTerm as C;
        if self.eat_kw("fix") {
            let var = Var::new(&self.upper("a variable")?);
            self.sym(".")?;
            self.binders.push(var.clone());
            let body = self.controller();
            self.binders.pop();
            return Ok(C::Fix {
                var,
                body: Box::new(body?),
            });
        }
        if self.eat_kw("tick") {
            self.sym(".")?;
            return Ok(C::Sleep(Box::new(self.controller()?)));
        }
        if self.eat_kw("cmd") {
            let actuator = self.name(NameKind::Actuator)?;
            self.sym(".")?;
            return Ok(C::ActCmdPrefix {
                actuator,
                then: Box::new(self.controller()?),
            });
        }
        if self.is_kw("end") {
            let pos = self.pos();
            self.advance();
            if !self.eat_sym(".") {
                return match self.binders.last() {
                    Some(x) => Ok(C::EndVar(x.clone())),
                    None => Err(ParseError::Invalid {
                        pos,
                        message: "`end` without `. X` outside of any `fix`".into(),
                    }),
                };
            }
            if self.eat_sym("(") {
                let p = self.controller()?;
                self.sym(")")?;
                return Ok(C::EndCont(Box::new(p)));
            }
            return Ok(C::EndVar(Var::new(&self.upper("a variable or `(`")?)));
        }
        if self.eat_sym("[") {
            return self.controller_sum();
        }
        self.fail(&["`fix`", "`tick`", "`[`", "`cmd`", "`end`"])
    }

    fn controller_sum(&mut self) -> PResult<ControllerTerm> {
        use ControllerTerm as C;
        let term = if self.eat_kw("snd") {
            let channel = self.name(NameKind::Channel)?;
            self.sym(".")?;
            let then = self.controller()?;
            self.sym("]")?;
            let timeout = self.else_branch(|p| p.controller())?;
            C::CommTimeoutOut {
                channel,
                then: Box::new(then),
                timeout: Box::new(timeout),
            }
        } else if self.is_kw("rcv") {
            let mut branches = Vec::new();
            loop {
                self.kw("rcv")?;
                let c = self.name(NameKind::Channel)?;
                self.sym(".")?;
                branches.push((c, self.controller()?));
                if !self.eat_sym("+") {
                    break;
                }
            }
            self.sym("]")?;
            let timeout = self.else_branch(|p| p.controller())?;
            C::CommTimeoutIn {
                branches,
                timeout: Box::new(timeout),
            }
        } else if matches!(self.peek(), Tok::Lower(s) if !KEYWORDS.contains(&s.as_str())) {
            let mut branches = Vec::new();
            loop {
                let s = self.name(NameKind::Sensor)?;
                self.sym(".")?;
                branches.push((s, self.controller()?));
                if !self.eat_sym("+") {
                    break;
                }
            }
            self.sym("]")?;
            let timeout = self.else_branch(|p| p.controller())?;
            C::SensTimeout {
                branches,
                timeout: Box::new(timeout),
            }
        } else {
            return self.fail(&["sensor name", "`rcv`", "`snd`"]);
        };
        Ok(term)
    }

    fn else_branch<T>(&mut self, inner: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        self.kw("else")?;
        self.sym("(")?;
        let t = inner(self)?;
        self.sym(")")?;
        Ok(t)
    }

    fn malware(&mut self) -> PResult<MalwareTerm> {
        use MalwareTerm as M;
        if self.eat_kw("fix") {
            let var = Var::new(&self.upper("a variable")?);
            self.sym(".")?;
            return Ok(M::Fix {
                var,
                body: Box::new(self.malware()?),
            });
        }
        if self.eat_kw("tick") {
            self.sym(".")?;
            return Ok(M::TickPrefix(Box::new(self.malware()?)));
        }
        if self.eat_kw("nil") {
            return Ok(M::Nil);
        }
        if let Tok::Upper(x) = self.peek().clone() {
            self.advance();
            return Ok(M::Var(Var::new(&x)));
        }
        if self.eat_sym("[") {
            let mut branches = Vec::new();
            loop {
                let mu = self.malicious_prefix()?;
                self.sym(".")?;
                branches.push((mu, self.malware()?));
                if !self.eat_sym("+") {
                    break;
                }
            }
            self.sym("]")?;
            let timeout = self.else_branch(|p| p.malware())?;
            return Ok(M::Timeout {
                branches,
                timeout: Box::new(timeout),
            });
        }
        self.fail(&["`fix`", "`tick`", "`nil`", "`[`", "a variable"])
    }

    fn malicious_prefix(&mut self) -> PResult<Action> {
        if self.eat_kw("inj-snd") {
            return Ok(Action::Send(self.name(NameKind::Channel)?));
        }
        if self.eat_kw("inj-rcv") {
            return Ok(Action::Recv(self.name(NameKind::Channel)?));
        }
        if self.eat_kw("inj-cmd") {
            return Ok(Action::Cmd(self.name(NameKind::Actuator)?));
        }
        if self.eat_kw("drop") {
            return Ok(Action::Drop(self.name(NameKind::Actuator)?));
        }
        self.fail(&["`inj-snd`", "`inj-rcv`", "`inj-cmd`", "`drop`"])
    }

    fn action(&mut self) -> PResult<Action> {
        let a = match self.peek().clone() {
            Tok::Lower(k) => match k.as_str() {
                "cmd" | "drop" | "snd" | "rcv" => {
                    self.advance();
                    let kind = if k == "cmd" || k == "drop" {
                        NameKind::Actuator
                    } else {
                        NameKind::Channel
                    };
                    let n = self.name(kind)?;
                    match k.as_str() {
                        "cmd" => Action::Cmd(n),
                        "drop" => Action::Drop(n),
                        "snd" => Action::Send(n),
                        _ => Action::Recv(n),
                    }
                }
                "tau" => {
                    self.advance();
                    Action::Tau
                }
                "tick" => {
                    self.advance();
                    Action::Tick
                }
                "end" => {
                    self.advance();
                    Action::End
                }
                _ => Action::Sense(self.name(NameKind::Sensor)?),
            },
            _ => return self.fail(&["an action"]),
        };
        Ok(a)
    }

    /// Parse a whole edit automaton: `fix Y . E` or a sum.
    fn automaton(&mut self) -> PResult<EditAutomaton> {
        if self.eat_kw("fix") {
            let var = Var::new(&self.upper("a variable")?);
            self.sym(".")?;
            return Ok(EditAutomaton::Fix {
                var,
                body: Box::new(self.automaton()?),
            });
        }
        let start = self.pos();
        let first = self.edit_item()?;
        if !self.is_sym("+") {
            return Ok(first.into_automaton());
        }
        let mut items = vec![first];
        while self.eat_sym("+") {
            items.push(self.edit_item()?);
        }
        let mut branches = Vec::new();
        let mut suppress = None;
        for item in items {
            match item {
                Item::Branch(b) => branches.push(b),
                Item::Others(s) if suppress.is_none() => suppress = Some(s),
                Item::Others(_) => {
                    return Err(ParseError::Invalid {
                        pos: start,
                        message: "more than one `others` branch in a sum".into(),
                    })
                }
                Item::Whole(_) => {
                    return Err(ParseError::Invalid {
                        pos: start,
                        message: "only `a/b . E` and `others` branches can be summed".into(),
                    })
                }
            }
        }
        Ok(EditAutomaton::Sum { branches, suppress })
    }

    fn edit_item(&mut self) -> PResult<Item> {
        if self.eat_kw("go") {
            return Ok(Item::Whole(EditAutomaton::Go));
        }
        if self.eat_kw("none") {
            return Ok(Item::Whole(EditAutomaton::Sum {
                branches: Vec::new(),
                suppress: None,
            }));
        }
        if let Tok::Upper(x) = self.peek().clone() {
            self.advance();
            return Ok(Item::Whole(EditAutomaton::Var(Var::new(&x))));
        }
        if self.eat_sym("(") {
            let e = self.automaton()?;
            self.sym(")")?;
            return Ok(Item::Whole(e));
        }
        if self.eat_kw("others") {
            let mut except = Vec::new();
            if self.eat_sym("{") {
                loop {
                    except.push(self.action()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.sym("}")?;
            }
            self.sym("/")?;
            self.kw("tau")?;
            self.sym(".")?;
            let next = self.edit_continuation()?;
            return Ok(Item::Others(Suppression {
                except,
                next: Box::new(next),
            }));
        }
        if matches!(self.peek(), Tok::Lower(_)) {
            let input = self.action()?;
            self.sym("/")?;
            let output = self.action()?;
            self.sym(".")?;
            let next = self.edit_continuation()?;
            return Ok(Item::Branch(EditBranch {
                input,
                output,
                next,
            }));
        }
        self.fail(&[
            "`go`",
            "`none`",
            "`others`",
            "`(`",
            "a variable",
            "an action",
        ])
    }

    fn edit_continuation(&mut self) -> PResult<EditAutomaton> {
        Ok(self.edit_item()?.into_automaton())
    }

    fn network(&mut self, file: Option<&SourceFile>) -> PResult<Vec<NodeDef>> {
        let mut nodes = vec![self.node(file)?];
        while self.eat_sym("||") {
            nodes.push(self.node(file)?);
        }
        Ok(nodes)
    }

    fn reference(&mut self, file: Option<&SourceFile>, expected: &'static str) -> PResult<String> {
        let pos = self.pos();
        let name = self.upper(&format!("a {expected} name"))?;
        match file.and_then(|f| f.get(&name)) {
            Some(d) if d.kind() == expected => Ok(name),
            Some(d) => Err(ParseError::Invalid {
                pos,
                message: format!("{name} is a {}, expected a {expected}", d.kind()),
            }),
            None => Err(ParseError::UnknownName {
                pos,
                kind: expected.into(),
                name,
            }),
        }
    }

    fn node(&mut self, file: Option<&SourceFile>) -> PResult<NodeDef> {
        let monitor = if self.eat_kw("go") {
            MonitorRef::Inline(EditAutomaton::Go)
        } else if self.eat_sym("{") {
            let e = self.automaton()?;
            self.sym("}")?;
            MonitorRef::Inline(e)
        } else if self.eat_kw("synth") {
            self.sym("(")?;
            let n = self.reference(file, "controller")?;
            self.sym(")")?;
            MonitorRef::Synth(n)
        } else if matches!(self.peek(), Tok::Upper(_)) && file.is_some() {
            MonitorRef::Named(self.reference(file, "automaton")?)
        } else {
            return self.fail(&["`go`", "`{`", "`synth`", "an automaton name"]);
        };
        self.sym("|-")?;
        let parens = self.eat_sym("(");
        let controller = if self.eat_sym("{") {
            let p = self.controller()?;
            self.sym("}")?;
            TermRef::Inline(p)
        } else if file.is_some() {
            TermRef::Named(self.reference(file, "controller")?)
        } else {
            return self.fail(&["`{`"]);
        };
        let mut malware = None;
        if parens {
            if self.eat_sym("|") {
                malware = Some(if self.eat_sym("{") {
                    let m = self.malware()?;
                    self.sym("}")?;
                    TermRef::Inline(m)
                } else if file.is_some() {
                    TermRef::Named(self.reference(file, "malware")?)
                } else {
                    return self.fail(&["`{`"]);
                });
            }
            self.sym(")")?;
        }
        let mitigation = self.eat_kw("mitigate");
        Ok(NodeDef {
            monitor,
            controller,
            malware,
            mitigation,
        })
    }

    fn name_set(&mut self, kind: &str) -> PResult<BTreeSet<Name>> {
        self.sym("{")?;
        let mut out = BTreeSet::new();
        if self.eat_sym("}") {
            return Ok(out);
        }
        loop {
            let (s, pos) = self.lower(&format!("{kind} name"))?;
            if !out.insert(Name::new(&s)) {
                return Err(ParseError::Duplicate { pos, name: s });
            }
            if !self.eat_sym(",") {
                break;
            }
        }
        self.sym("}")?;
        Ok(out)
    }

    fn alphabet_block(&mut self) -> PResult<Alphabet> {
        let pos = self.pos();
        self.kw("alphabet")?;
        let mut a = Alphabet::default();
        let mut seen = [false; 3];
        loop {
            let idx = match self.peek() {
                Tok::Lower(k) if k == "sensors" => 0,
                Tok::Lower(k) if k == "actuators" => 1,
                Tok::Lower(k) if k == "channels" => 2,
                _ => break,
            };
            if seen[idx] {
                return self.fail(&["a definition"]);
            }
            seen[idx] = true;
            let kind = ["sensor", "actuator", "channel"][idx];
            self.advance();
            let set = self.name_set(kind)?;
            match idx {
                0 => a.sensors = set,
                1 => a.actuators = set,
                _ => a.channels = set,
            }
        }
        if let Some(n) = a.overlaps().first() {
            return Err(ParseError::Invalid {
                pos,
                message: format!("name {n} is declared in more than one set"),
            });
        }
        Ok(a)
    }
}

enum Item {
    Whole(EditAutomaton),
    Branch(EditBranch),
    Others(Suppression),
}

impl Item {
    fn into_automaton(self) -> EditAutomaton {
        match self {
            Item::Whole(e) => e,
            Item::Branch(b) => EditAutomaton::Sum {
                branches: vec![b],
                suppress: None,
            },
            Item::Others(s) => EditAutomaton::Sum {
                branches: Vec::new(),
                suppress: Some(s),
            },
        }
    }
}

/// Parse a complete `.plc` file.
pub fn parse(src: &str) -> Result<SourceFile, ParseError> {
    let mut probe = Parser::new(src, None)?;
    let alphabet = probe.alphabet_block()?;
    let mut p = Parser::new(src, Some(&alphabet))?;
    p.at = probe.at;
    let mut file = SourceFile {
        alphabet: alphabet.clone(),
        ..SourceFile::default()
    };
    loop {
        if *p.peek() == Tok::Eof {
            break;
        }
        if p.eat_kw("main") {
            let pos = p.pos();
            let name = p.upper("a definition name")?;
            if file.get(&name).is_none() {
                return Err(ParseError::UnknownName {
                    pos,
                    kind: "definition".into(),
                    name,
                });
            }
            if file.main.is_some() {
                return Err(ParseError::Duplicate { pos, name });
            }
            file.main = Some(name);
            p.eat_sym(";");
            continue;
        }
        let kind = match p.peek() {
            Tok::Lower(k)
                if matches!(
                    k.as_str(),
                    "controller" | "malware" | "automaton" | "network"
                ) =>
            {
                k.clone()
            }
            _ => {
                return p.fail(&[
                    "`controller`",
                    "`malware`",
                    "`automaton`",
                    "`network`",
                    "`main`",
                ])
            }
        };
        p.advance();
        let pos = p.pos();
        let name = p.upper("a definition name")?;
        if file.get(&name).is_some() {
            return Err(ParseError::Duplicate { pos, name });
        }
        p.sym("=")?;
        let def = match kind.as_str() {
            "controller" => Definition::Controller(p.controller()?),
            "malware" => Definition::Malware(p.malware()?),
            "automaton" => Definition::Automaton(p.automaton()?),
            _ => Definition::Network(p.network(Some(&file))?),
        };
        p.eat_sym(";");
        file.definitions.push((name, def));
    }
    Ok(file)
}

fn parse_with<T>(
    src: &str,
    alphabet: Option<&Alphabet>,
    f: impl FnOnce(&mut Parser) -> PResult<T>,
) -> Result<T, ParseError> {
    let mut p = Parser::new(src, alphabet)?;
    let t = f(&mut p)?;
    p.eof()?;
    Ok(t)
}

/// Parse a single controller term. Names are checked against `alphabet`
/// when one is given.
pub fn parse_controller(
    src: &str,
    alphabet: Option<&Alphabet>,
) -> Result<ControllerTerm, ParseError> {
    parse_with(src, alphabet, |p| p.controller())
}

pub fn parse_malware(src: &str, alphabet: Option<&Alphabet>) -> Result<MalwareTerm, ParseError> {
    parse_with(src, alphabet, |p| p.malware())
}

pub fn parse_automaton(
    src: &str,
    alphabet: Option<&Alphabet>,
) -> Result<EditAutomaton, ParseError> {
    parse_with(src, alphabet, |p| p.automaton())
}

pub fn parse_action(src: &str, alphabet: Option<&Alphabet>) -> Result<Action, ParseError> {
    parse_with(src, alphabet, |p| p.action())
}

/// Parse a comma-separated action list such as `tick, l, snd c`.
pub fn parse_trace(src: &str, alphabet: Option<&Alphabet>) -> Result<Vec<Action>, ParseError> {
    parse_with(src, alphabet, |p| {
        let mut out = Vec::new();
        if *p.peek() == Tok::Eof {
            return Ok(out);
        }
        loop {
            out.push(p.action()?);
            if !p.eat_sym(",") {
                return Ok(out);
            }
        }
    })
}

/// Parse a network written with inline terms only, as printed by
/// `FieldNetwork`'s `Display`.
pub fn parse_network(src: &str, alphabet: Option<&Alphabet>) -> Result<FieldNetwork, ParseError> {
    let nodes = parse_with(src, alphabet, |p| p.network(None))?;
    Ok(FieldNetwork::new(
        nodes
            .into_iter()
            .map(|n| {
                let inline = |r: TermRef<_>| match r {
                    TermRef::Inline(t) => t,
                    TermRef::Named(_) => unreachable!("named references need a file"),
                };
                MonitoredController {
                    monitor: match n.monitor {
                        MonitorRef::Inline(e) => e,
                        _ => unreachable!("named references need a file"),
                    },
                    body: CompromisedTerm {
                        controller: inline(n.controller),
                        malware: n.malware.map(|m| match m {
                            TermRef::Inline(t) => t,
                            TermRef::Named(_) => unreachable!("named references need a file"),
                        }),
                    },
                    mitigation: n.mitigation,
                }
            })
            .collect(),
    ))
}

fn write_set(f: &mut fmt::Formatter<'_>, label: &str, set: &BTreeSet<Name>) -> fmt::Result {
    write!(f, "  {label} {{")?;
    for (i, n) in set.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{n}")?;
    }
    f.write_str("}\n")
}

impl fmt::Display for NodeDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.monitor {
            MonitorRef::Inline(EditAutomaton::Go) => f.write_str("go")?,
            MonitorRef::Inline(e) => write!(f, "{{{e}}}")?,
            MonitorRef::Named(n) => f.write_str(n)?,
            MonitorRef::Synth(n) => write!(f, "synth({n})")?,
        }
        f.write_str(" |- (")?;
        match &self.controller {
            TermRef::Named(n) => f.write_str(n)?,
            TermRef::Inline(p) => write!(f, "{{{p}}}")?,
        }
        match &self.malware {
            None => {}
            Some(TermRef::Named(n)) => write!(f, " | {n}")?,
            Some(TermRef::Inline(m)) => write!(f, " | {{{m}}}")?,
        }
        f.write_str(")")?;
        if self.mitigation {
            f.write_str(" mitigate")?;
        }
        Ok(())
    }
}

impl fmt::Display for SourceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("alphabet\n")?;
        write_set(f, "sensors", &self.alphabet.sensors)?;
        write_set(f, "actuators", &self.alphabet.actuators)?;
        write_set(f, "channels", &self.alphabet.channels)?;
        for (name, def) in &self.definitions {
            write!(f, "\n{} {name} =\n  ", def.kind())?;
            match def {
                Definition::Controller(p) => write!(f, "{p}")?,
                Definition::Malware(m) => write!(f, "{m}")?,
                Definition::Automaton(e) => write!(f, "{e}")?,
                Definition::Network(nodes) => {
                    for (i, n) in nodes.iter().enumerate() {
                        if i > 0 {
                            f.write_str("\n  || ")?;
                        }
                        write!(f, "{n}")?;
                    }
                }
            }
            f.write_str("\n")?;
        }
        if let Some(m) = &self.main {
            write!(f, "\nmain {m}\n")?;
        }
        Ok(())
    }
}
