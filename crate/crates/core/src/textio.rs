//! Line-oriented text formats for diagrams, trees, ribbon descriptors and
//! move scripts.
//!
//! Every format is a sequence of lines of whitespace-separated tokens; `#`
//! starts a comment. Tokens containing whitespace, `#`, `"` or `\` are
//! written in double quotes with backslash escapes. Serialization is
//! canonical and `parse(serialize(v)) == v` for every value.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::diagram::{Component, ComponentKind, KirbyDiagram, PairKind, Side};
use crate::homology::AbelianGroup;
use crate::middle::{AccessoryLoop, Cap, Finger, MiddleLevelData, RibbonDescriptor};
use crate::tree::{Edge, SignedTree};
use crate::Sign;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

type Result<T> = std::result::Result<T, ParseError>;

#[derive(Debug, Clone)]
struct Tok {
    text: String,
    line: usize,
    col: usize,
}

impl Tok {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(ParseError { line: self.line, column: self.col, message: message.into() })
    }

    fn int(&self, what: &str) -> Result<i64> {
        self.text
            .parse()
            .or_else(|_| self.err(format!("expected an integer {what}, found `{}`", self.text)))
    }

    fn count(&self, what: &str) -> Result<usize> {
        self.text
            .parse()
            .or_else(|_| self.err(format!("expected a nonnegative integer {what}, found `{}`", self.text)))
    }

    fn sign(&self) -> Result<Sign> {
        self.text.parse().or_else(|e: String| self.err(e))
    }
}

struct Line {
    no: usize,
    toks: Vec<Tok>,
    /// Column just past the last character, for "missing token" errors.
    end: usize,
}

impl Line {
    fn at(&self, i: usize, what: &str) -> Result<&Tok> {
        self.toks.get(i).ok_or_else(|| ParseError {
            line: self.no,
            column: self.end,
            message: format!("missing {what}"),
        })
    }

    fn exactly(&self, n: usize) -> Result<()> {
        match self.toks.get(n) {
            Some(t) => t.err(format!("unexpected token `{}`", t.text)),
            None => Ok(()),
        }
    }

    fn keyword(&self) -> &str {
        &self.toks[0].text
    }
}

fn tokenize_line(no: usize, line: &str) -> Result<Line> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        let start = i;
        let mut text = String::new();
        if c == '"' {
            i += 1;
            loop {
                match chars.get(i) {
                    None => {
                        return Err(ParseError { line: no, column: start + 1, message: "unterminated string".into() })
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        let esc = chars.get(i + 1).copied();
                        text.push(match esc {
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('\\') => '\\',
                            Some('"') => '"',
                            _ => {
                                return Err(ParseError {
                                    line: no,
                                    column: i + 1,
                                    message: "invalid escape in string".into(),
                                })
                            }
                        });
                        i += 2;
                    }
                    Some(&ch) => {
                        text.push(ch);
                        i += 1;
                    }
                }
            }
        } else {
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '#' {
                if chars[i] == '"' || chars[i] == '\\' {
                    return Err(ParseError { line: no, column: i + 1, message: "stray quote or backslash".into() });
                }
                text.push(chars[i]);
                i += 1;
            }
        }
        toks.push(Tok { text, line: no, col: start + 1 });
    }
    Ok(Line { no, toks, end: chars.len() + 1 })
}

fn lines(text: &str) -> Result<Vec<Line>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = tokenize_line(i + 1, raw)?;
        if !line.toks.is_empty() {
            out.push(line);
        }
    }
    Ok(out)
}

fn eof_error<T>(text: &str, message: impl Into<String>) -> Result<T> {
    Err(ParseError { line: text.lines().count().max(1), column: 1, message: message.into() })
}

/// A token as it must be written to parse back to `s`.
pub fn word(s: &str) -> String {
    let plain = !s.is_empty() && s.chars().all(|c| !c.is_whitespace() && !matches!(c, '#' | '"' | '\\'));
    if plain {
        return s.to_string();
    }
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn header<'a>(ls: &'a [Line], text: &str, keyword: &str) -> Result<&'a Tok> {
    let Some(first) = ls.first() else {
        return eof_error(text, format!("expected `{keyword} <name>`"));
    };
    if first.keyword() != keyword {
        return first.toks[0].err(format!("expected `{keyword} <name>`, found `{}`", first.keyword()));
    }
    let name = first.at(1, "name")?;
    first.exactly(2)?;
    Ok(name)
}

// -------------------------------------------------------------------------
// Diagrams

pub fn parse_diagram(text: &str) -> Result<KirbyDiagram> {
    let ls = lines(text)?;
    let name = header(&ls, text, "diagram")?;
    let mut d = KirbyDiagram::new(name.text.clone());
    let mut linked: HashSet<(usize, usize)> = HashSet::new();
    for l in &ls[1..] {
        let kw = &l.toks[0];
        match kw.text.as_str() {
            "dual" => {
                l.exactly(1)?;
                d.dual = true;
            }
            "component" => {
                let id = l.at(1, "component id")?;
                let kind_tok = l.at(2, "component kind")?;
                let (kind, next) = match kind_tok.text.as_str() {
                    "dotted" => (ComponentKind::Dotted, 3),
                    "framed" => (ComponentKind::Framed(l.at(3, "framing")?.int("framing")?), 4),
                    "paren" => (ComponentKind::ParenFramed(l.at(3, "framing")?.int("framing")?), 4),
                    other => return kind_tok.err(format!("expected dotted, framed or paren, found `{other}`")),
                };
                let label = match l.toks.get(next) {
                    None => None,
                    Some(t) if t.text == "label" => {
                        let v = l.at(next + 1, "label text")?;
                        l.exactly(next + 2)?;
                        Some(v.text.clone())
                    }
                    Some(t) => return t.err(format!("unexpected token `{}`", t.text)),
                };
                if d.index_of(&id.text).is_ok() {
                    return id.err(format!("duplicate component id `{}`", id.text));
                }
                d.push_component(Component { id: id.text.clone(), kind, label }).expect("id checked");
            }
            "link" => {
                let a = l.at(1, "component id")?;
                let b = l.at(2, "component id")?;
                let alg = l.at(3, "algebraic linking")?.int("linking")?;
                let geom = match l.toks.get(4) {
                    Some(t) => t.int("geometric linking")?,
                    None => alg.abs(),
                };
                l.exactly(5)?;
                let ai = d.index_of(&a.text).or_else(|_| a.err(format!("unknown component `{}`", a.text)))?;
                let bi = d.index_of(&b.text).or_else(|_| b.err(format!("unknown component `{}`", b.text)))?;
                if ai == bi {
                    return b.err("a component cannot link itself; use its framing");
                }
                if !linked.insert((ai.min(bi), ai.max(bi))) {
                    return kw.err(format!("duplicate link between `{}` and `{}`", a.text, b.text));
                }
                d.set_linking(ai, bi, alg, geom);
            }
            "threehandles" | "fourhandles" | "hidden1" => {
                let n = l.at(1, "count")?.count("count")?;
                l.exactly(2)?;
                match kw.text.as_str() {
                    "threehandles" => d.three_handles = n,
                    "fourhandles" => d.four_handles = n,
                    _ => d.hidden_one_handles = n,
                }
            }
            "note" => {
                let t = l.at(1, "note text")?;
                l.exactly(2)?;
                d.notes.push(t.text.clone());
            }
            other => return kw.err(format!("unknown diagram keyword `{other}`")),
        }
    }
    Ok(d)
}

pub fn serialize_diagram(d: &KirbyDiagram) -> String {
    let mut out = format!("diagram {}\n", word(&d.name));
    if d.dual {
        out.push_str("dual\n");
    }
    for c in d.components() {
        out.push_str(&format!("component {} {}", word(&c.id), c.kind));
        if let Some(label) = &c.label {
            out.push_str(&format!(" label {}", word(label)));
        }
        out.push('\n');
    }
    let cs = d.components();
    for i in 0..cs.len() {
        for j in (i + 1)..cs.len() {
            let (a, g) = (d.alg(i, j), d.geom(i, j));
            if a != 0 || g != 0 {
                out.push_str(&format!("link {} {} {a} {g}\n", word(&cs[i].id), word(&cs[j].id)));
            }
        }
    }
    if d.three_handles != 0 {
        out.push_str(&format!("threehandles {}\n", d.three_handles));
    }
    if d.four_handles != 0 {
        out.push_str(&format!("fourhandles {}\n", d.four_handles));
    }
    if d.hidden_one_handles != 0 {
        out.push_str(&format!("hidden1 {}\n", d.hidden_one_handles));
    }
    for n in &d.notes {
        out.push_str(&format!("note {}\n", word(n)));
    }
    out
}

// -------------------------------------------------------------------------
// Trees

struct TreeBuilder {
    tree: SignedTree,
    ids: HashMap<String, usize>,
    root: Option<usize>,
    header: Tok,
}

impl TreeBuilder {
    fn new(header: &Tok) -> Self {
        TreeBuilder {
            tree: SignedTree { name: header.text.clone(), nodes: Vec::new(), root: 0, edges: Vec::new(), finite: false },
            ids: HashMap::new(),
            root: None,
            header: header.clone(),
        }
    }

    fn node(&self, t: &Tok) -> Result<usize> {
        self.ids.get(&t.text).copied().ok_or_else(|| ParseError {
            line: t.line,
            column: t.col,
            message: format!("unknown node `{}`", t.text),
        })
    }

    /// Handles a tree keyword; `Ok(false)` if the line is not one.
    fn line(&mut self, l: &Line) -> Result<bool> {
        match l.keyword() {
            "node" => {
                let id = l.at(1, "node id")?;
                l.exactly(2)?;
                if self.ids.contains_key(&id.text) {
                    return id.err(format!("duplicate node id `{}`", id.text));
                }
                self.ids.insert(id.text.clone(), self.tree.nodes.len());
                self.tree.nodes.push(id.text.clone());
            }
            "edge" => {
                let p = self.node(l.at(1, "parent node")?)?;
                let c = self.node(l.at(2, "child node")?)?;
                let sign = l.at(3, "sign")?.sign()?;
                l.exactly(4)?;
                self.tree.edges.push(Edge { parent: p, child: c, sign });
            }
            "root" => {
                let r = self.node(l.at(1, "root node")?)?;
                l.exactly(2)?;
                if self.root.is_some() {
                    return l.toks[0].err("root declared twice");
                }
                self.root = Some(r);
            }
            "finite" => {
                l.exactly(1)?;
                self.tree.finite = true;
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn finish(mut self) -> Result<SignedTree> {
        match self.root {
            Some(r) => {
                self.tree.root = r;
                Ok(self.tree)
            }
            None => self.header.err(format!("tree `{}` has no root", self.tree.name)),
        }
    }
}

pub fn parse_tree(text: &str) -> Result<SignedTree> {
    let ls = lines(text)?;
    let name = header(&ls, text, "tree")?;
    let mut b = TreeBuilder::new(name);
    for l in &ls[1..] {
        if !b.line(l)? {
            return l.toks[0].err(format!("unknown tree keyword `{}`", l.keyword()));
        }
    }
    b.finish()
}

pub fn serialize_tree(t: &SignedTree) -> String {
    let mut out = format!("tree {}\n", word(&t.name));
    for n in &t.nodes {
        out.push_str(&format!("node {}\n", word(n)));
    }
    for e in &t.edges {
        out.push_str(&format!("edge {} {} {}\n", word(&t.nodes[e.parent]), word(&t.nodes[e.child]), e.sign));
    }
    if !t.nodes.is_empty() {
        out.push_str(&format!("root {}\n", word(&t.nodes[t.root])));
    }
    if t.finite {
        out.push_str("finite\n");
    }
    out
}

// -------------------------------------------------------------------------
// Middle-level data with caps and embedded trees

/// Parses a middle-level file: sphere pairs, fingers, accessory loops,
/// caps, and any number of `tree` blocks used by the caps.
pub fn parse_middle(text: &str) -> Result<RibbonDescriptor> {
    let ls = lines(text)?;
    let name = header(&ls, text, "middle")?;
    let mut m = MiddleLevelData::new(name.text.clone(), 0);
    let mut pairs_seen = false;
    let mut caps: BTreeMap<String, Cap> = BTreeMap::new();
    let mut cap_refs: Vec<Tok> = Vec::new();
    let mut loop_ids: HashSet<String> = HashSet::new();
    let mut whitney_ids: HashSet<String> = HashSet::new();
    let mut trees: BTreeMap<String, SignedTree> = BTreeMap::new();
    let mut current: Option<TreeBuilder> = None;

    let close = |current: &mut Option<TreeBuilder>, trees: &mut BTreeMap<String, SignedTree>| -> Result<()> {
        if let Some(b) = current.take() {
            let t = b.finish()?;
            trees.insert(t.name.clone(), t);
        }
        Ok(())
    };

    for l in &ls[1..] {
        if let Some(b) = current.as_mut() {
            if b.line(l)? {
                continue;
            }
        }
        let kw = &l.toks[0];
        match kw.text.as_str() {
            "tree" => {
                close(&mut current, &mut trees)?;
                let n = l.at(1, "tree name")?;
                l.exactly(2)?;
                if trees.contains_key(&n.text) {
                    return n.err(format!("duplicate tree name `{}`", n.text));
                }
                current = Some(TreeBuilder::new(n));
            }
            "pairs" => {
                if pairs_seen {
                    return kw.err("pairs declared twice");
                }
                m.pairs = l.at(1, "pair count")?.count("pair count")?;
                l.exactly(2)?;
                pairs_seen = true;
            }
            "finger" => {
                let id = l.at(1, "finger id")?;
                let a = l.at(2, "source sphere")?.count("sphere index")?;
                let b = l.at(3, "pierced sphere")?.count("sphere index")?;
                let w = l.at(4, "Whitney loop id")?;
                l.exactly(5)?;
                if m.finger(&id.text).is_some() {
                    return id.err(format!("duplicate finger id `{}`", id.text));
                }
                if loop_ids.contains(&w.text) || !whitney_ids.insert(w.text.clone()) {
                    return w.err(format!("duplicate loop id `{}`", w.text));
                }
                m.fingers.push(Finger { id: id.text.clone(), from_a: a, through_b: b, whitney: w.text.clone() });
            }
            "loop" => {
                let id = l.at(1, "loop id")?;
                if whitney_ids.contains(&id.text) || !loop_ids.insert(id.text.clone()) {
                    return id.err(format!("duplicate loop id `{}`", id.text));
                }
                let mut fingers = Vec::new();
                for t in &l.toks[2..] {
                    if m.finger(&t.text).is_none() {
                        return t.err(format!("unknown finger `{}`", t.text));
                    }
                    fingers.push(t.text.clone());
                }
                if fingers.is_empty() {
                    l.at(2, "finger list")?;
                }
                m.loops.push(AccessoryLoop { id: id.text.clone(), fingers });
            }
            "cap" => {
                let id = l.at(1, "loop id")?;
                let kind = l.at(2, "cap kind")?;
                let cap = match kind.text.as_str() {
                    "standard" => {
                        l.exactly(3)?;
                        Cap::Standard
                    }
                    "tree" => {
                        let t = l.at(3, "tree name")?;
                        l.exactly(4)?;
                        cap_refs.push(t.clone());
                        Cap::Tree(t.text.clone())
                    }
                    other => return kind.err(format!("expected standard or tree, found `{other}`")),
                };
                if !whitney_ids.contains(&id.text) && !loop_ids.contains(&id.text) {
                    return id.err(format!("unknown loop `{}`", id.text));
                }
                if caps.insert(id.text.clone(), cap).is_some() {
                    return id.err(format!("loop `{}` capped twice", id.text));
                }
            }
            other => return kw.err(format!("unknown middle-level keyword `{other}`")),
        }
    }
    close(&mut current, &mut trees)?;
    if !pairs_seen {
        return eof_error(text, "missing `pairs <k>`");
    }
    for t in cap_refs {
        if !trees.contains_key(&t.text) {
            return t.err(format!("unknown tree `{}`", t.text));
        }
    }
    Ok(RibbonDescriptor { middle: m, caps, trees })
}

pub fn serialize_middle(r: &RibbonDescriptor) -> String {
    let m = &r.middle;
    let mut out = format!("middle {}\npairs {}\n", word(&m.name), m.pairs);
    for f in &m.fingers {
        out.push_str(&format!("finger {} {} {} {}\n", word(&f.id), f.from_a, f.through_b, word(&f.whitney)));
    }
    for l in &m.loops {
        let fs: Vec<String> = l.fingers.iter().map(|f| word(f)).collect();
        out.push_str(&format!("loop {} {}\n", word(&l.id), fs.join(" ")));
    }
    for (id, cap) in &r.caps {
        match cap {
            Cap::Standard => out.push_str(&format!("cap {} standard\n", word(id))),
            Cap::Tree(t) => out.push_str(&format!("cap {} tree {}\n", word(id), word(t))),
        }
    }
    for t in r.trees.values() {
        out.push('\n');
        out.push_str(&serialize_tree(t));
    }
    out
}

// -------------------------------------------------------------------------
// Move scripts

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountKind {
    Components,
    Three,
    Four,
    Hidden1,
}

impl fmt::Display for CountKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountKind::Components => "components",
            CountKind::Three => "three",
            CountKind::Four => "four",
            CountKind::Hidden1 => "hidden1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Slide { moving: String, over: String, sign: Sign },
    BlowUp { sign: Sign, id: Option<String> },
    TwistBlowUp { sign: Sign, strands: Vec<(String, i64)>, id: Option<String> },
    BlowDown { id: String },
    Swap { id: String },
    /// `ids` holds the dotted and framed ids of a 1-2 pair, or the framed id
    /// of a 2-3 pair.
    AddPair { kind: PairKind, ids: Option<Vec<String>> },
    Cancel { dotted: Option<String>, framed: String },
    Dualize,
    AssertHomology { side: Side, group: AbelianGroup },
    AssertEuler(i64),
    AssertSignature(i64),
    AssertGeom { a: String, b: String, geom: i64, note: Option<String> },
    AssertCount { what: CountKind, n: usize },
}

impl Command {
    pub fn is_assertion(&self) -> bool {
        matches!(
            self,
            Command::AssertHomology { .. }
                | Command::AssertEuler(_)
                | Command::AssertSignature(_)
                | Command::AssertCount { .. }
        )
    }
}

fn sign_word(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "+1",
        Sign::Minus => "-1",
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let as_id = |id: &Option<String>| id.as_ref().map(|i| format!(" as {}", word(i))).unwrap_or_default();
        match self {
            Command::Slide { moving, over, sign } => write!(f, "slide {} {} {sign}", word(moving), word(over)),
            Command::BlowUp { sign, id } => write!(f, "blowup {}{}", sign_word(*sign), as_id(id)),
            Command::TwistBlowUp { sign, strands, id } => {
                write!(f, "twistblowup {}", sign_word(*sign))?;
                for (c, m) in strands {
                    write!(f, " {}", word(&format!("{c}:{m}")))?;
                }
                write!(f, "{}", as_id(id))
            }
            Command::BlowDown { id } => write!(f, "blowdown {}", word(id)),
            Command::Swap { id } => write!(f, "swap {}", word(id)),
            Command::AddPair { kind, ids } => {
                let k = match kind {
                    PairKind::OneTwo => "12",
                    PairKind::TwoThree => "23",
                };
                write!(f, "addpair {k}")?;
                if let Some(ids) = ids {
                    f.write_str(" as")?;
                    for i in ids {
                        write!(f, " {}", word(i))?;
                    }
                }
                Ok(())
            }
            Command::Cancel { dotted, framed } => match dotted {
                Some(a) => write!(f, "cancel {} {}", word(a), word(framed)),
                None => write!(f, "cancel {}", word(framed)),
            },
            Command::Dualize => f.write_str("dualize"),
            Command::AssertHomology { side, group } => write!(f, "assert-homology {side} {group}"),
            Command::AssertEuler(n) => write!(f, "assert-euler {n}"),
            Command::AssertSignature(n) => write!(f, "assert-signature {n}"),
            Command::AssertGeom { a, b, geom, note } => {
                write!(f, "assert-geom {} {} {geom}", word(a), word(b))?;
                if let Some(n) = note {
                    write!(f, " {}", word(n))?;
                }
                Ok(())
            }
            Command::AssertCount { what, n } => write!(f, "assert-count {what} {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MoveScript {
    pub name: Option<String>,
    pub commands: Vec<Command>,
}

fn optional_as(l: &Line, from: usize) -> Result<Option<String>> {
    match l.toks.get(from) {
        None => Ok(None),
        Some(t) if t.text == "as" => {
            let id = l.at(from + 1, "id")?;
            l.exactly(from + 2)?;
            Ok(Some(id.text.clone()))
        }
        Some(t) => t.err(format!("unexpected token `{}`", t.text)),
    }
}

fn parse_command(l: &Line) -> Result<Command> {
    let kw = &l.toks[0];
    let id = |i: usize, what: &str| l.at(i, what).map(|t| t.text.clone());
    let cmd = match kw.text.as_str() {
        "slide" => {
            let moving = id(1, "moving component")?;
            let over = id(2, "target component")?;
            let sign = match l.toks.get(3) {
                Some(t) => t.sign()?,
                None => Sign::Plus,
            };
            l.exactly(4)?;
            Command::Slide { moving, over, sign }
        }
        "blowup" => Command::BlowUp { sign: l.at(1, "sign")?.sign()?, id: optional_as(l, 2)? },
        "twistblowup" => {
            let sign = l.at(1, "sign")?.sign()?;
            let mut strands = Vec::new();
            let mut i = 2;
            while let Some(t) = l.toks.get(i) {
                if t.text == "as" {
                    break;
                }
                let Some((c, m)) = t.text.rsplit_once(':') else {
                    return t.err(format!("expected <component>:<multiplicity>, found `{}`", t.text));
                };
                let m = m.parse().or_else(|_| t.err(format!("expected an integer multiplicity in `{}`", t.text)))?;
                strands.push((c.to_string(), m));
                i += 1;
            }
            Command::TwistBlowUp { sign, strands, id: optional_as(l, i)? }
        }
        "blowdown" => {
            l.exactly(2)?;
            Command::BlowDown { id: id(1, "component")? }
        }
        "swap" => {
            l.exactly(2)?;
            Command::Swap { id: id(1, "component")? }
        }
        "addpair" => {
            let k = l.at(1, "pair kind")?;
            let kind = match k.text.as_str() {
                "12" => PairKind::OneTwo,
                "23" => PairKind::TwoThree,
                other => return k.err(format!("expected 12 or 23, found `{other}`")),
            };
            let ids = match l.toks.get(2) {
                None => None,
                Some(t) if t.text == "as" => {
                    let n = if kind == PairKind::OneTwo { 2 } else { 1 };
                    let ids = (0..n).map(|i| id(3 + i, "id")).collect::<Result<Vec<_>>>()?;
                    l.exactly(3 + n)?;
                    Some(ids)
                }
                Some(t) => return t.err(format!("unexpected token `{}`", t.text)),
            };
            Command::AddPair { kind, ids }
        }
        "cancel" => {
            let a = id(1, "component")?;
            match l.toks.get(2) {
                None => Command::Cancel { dotted: None, framed: a },
                Some(b) => {
                    l.exactly(3)?;
                    Command::Cancel { dotted: Some(a), framed: b.text.clone() }
                }
            }
        }
        "dualize" => {
            l.exactly(1)?;
            Command::Dualize
        }
        "assert-homology" => {
            let s = l.at(1, "side")?;
            let side = s.text.parse().or_else(|e: String| s.err(e))?;
            let g = l.at(2, "group")?;
            let text: Vec<&str> = l.toks[2..].iter().map(|t| t.text.as_str()).collect();
            let group = text.join(" ").parse().or_else(|e: String| g.err(e))?;
            Command::AssertHomology { side, group }
        }
        "assert-euler" => {
            l.exactly(2)?;
            Command::AssertEuler(l.at(1, "Euler characteristic")?.int("Euler characteristic")?)
        }
        "assert-signature" => {
            l.exactly(2)?;
            Command::AssertSignature(l.at(1, "signature")?.int("signature")?)
        }
        "assert-geom" => {
            let a = id(1, "component")?;
            let b = id(2, "component")?;
            let geom = l.at(3, "geometric linking")?.int("geometric linking")?;
            let note = l.toks.get(4).map(|t| t.text.clone());
            l.exactly(5)?;
            Command::AssertGeom { a, b, geom, note }
        }
        "assert-count" => {
            let w = l.at(1, "count kind")?;
            let what = match w.text.as_str() {
                "components" => CountKind::Components,
                "three" => CountKind::Three,
                "four" => CountKind::Four,
                "hidden1" => CountKind::Hidden1,
                other => return w.err(format!("expected components, three, four or hidden1, found `{other}`")),
            };
            let n = l.at(2, "count")?.count("count")?;
            l.exactly(3)?;
            Command::AssertCount { what, n }
        }
        other => return kw.err(format!("unknown script command `{other}`")),
    };
    Ok(cmd)
}

pub fn parse_script(text: &str) -> Result<MoveScript> {
    let ls = lines(text)?;
    let mut s = MoveScript::default();
    let mut rest = &ls[..];
    if let Some(first) = ls.first() {
        if first.keyword() == "script" {
            s.name = Some(first.at(1, "script name")?.text.clone());
            first.exactly(2)?;
            rest = &ls[1..];
        }
    }
    for l in rest {
        s.commands.push(parse_command(l)?);
    }
    Ok(s)
}

pub fn serialize_script(s: &MoveScript) -> String {
    let mut out = String::new();
    if let Some(n) = &s.name {
        out.push_str(&format!("script {}\n", word(n)));
    }
    for c in &s.commands {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    out
}

/// What a file declares in its first line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Document {
    Diagram(KirbyDiagram),
    Tree(SignedTree),
    Middle(RibbonDescriptor),
    Script(MoveScript),
}

/// Parses any of the four formats, dispatching on the first keyword.
pub fn parse_document(text: &str) -> Result<Document> {
    let ls = lines(text)?;
    match ls.first().map(Line::keyword) {
        Some("diagram") => parse_diagram(text).map(Document::Diagram),
        Some("tree") => parse_tree(text).map(Document::Tree),
        Some("middle") => parse_middle(text).map(Document::Middle),
        _ => parse_script(text).map(Document::Script),
    }
}
