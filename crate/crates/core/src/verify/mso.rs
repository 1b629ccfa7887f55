// SPDX-License-Identifier: Apache-2.0

//! Brute-force monadic second-order model checking over `{=, ->}`.
//!
//! Text syntax: `exists x (...)`, `forall X (...)`, `x -> y`, `x = y`,
//! `x in X`, `!`, `&`, `|`, `=>`, `true`, `false`. Identifiers starting with
//! an uppercase letter are set variables. `exists x: φ` binds as far right
//! as possible.

use std::fmt;

use serde::Serialize;

use super::SemanticGraph;
use crate::error::{Error, Result};

pub const DEFAULT_MSO_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MsoFormula {
    True,
    False,
    Arc(String, String),
    Eq(String, String),
    Mem(String, String),
    Not(Box<MsoFormula>),
    And(Box<MsoFormula>, Box<MsoFormula>),
    Or(Box<MsoFormula>, Box<MsoFormula>),
    Implies(Box<MsoFormula>, Box<MsoFormula>),
    Exists(String, Box<MsoFormula>),
    Forall(String, Box<MsoFormula>),
}

fn is_set_var(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_uppercase())
}

impl MsoFormula {
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = lex(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let f = p.formula()?;
        if p.pos != p.tokens.len() {
            return Err(p.error("trailing input"));
        }
        f.check_closed()?;
        Ok(f)
    }

    pub fn negate(self) -> Self {
        MsoFormula::Not(Box::new(self))
    }

    /// Rejects free variables and sort clashes.
    pub fn check_closed(&self) -> Result<()> {
        fn walk<'a>(f: &'a MsoFormula, bound: &mut Vec<&'a str>) -> Result<()> {
            let need = |name: &str, set: bool, bound: &[&str]| -> Result<()> {
                if is_set_var(name) != set {
                    let want = if set { "a set" } else { "a vertex" };
                    return Err(Error::Mso(format!("{name} is used where {want} variable is expected")));
                }
                if !bound.contains(&name) {
                    return Err(Error::Mso(format!("free variable {name}")));
                }
                Ok(())
            };
            match f {
                MsoFormula::True | MsoFormula::False => Ok(()),
                MsoFormula::Arc(x, y) | MsoFormula::Eq(x, y) => {
                    need(x, false, bound)?;
                    need(y, false, bound)
                }
                MsoFormula::Mem(x, s) => {
                    need(x, false, bound)?;
                    need(s, true, bound)
                }
                MsoFormula::Not(a) => walk(a, bound),
                MsoFormula::And(a, b) | MsoFormula::Or(a, b) | MsoFormula::Implies(a, b) => {
                    walk(a, bound)?;
                    walk(b, bound)
                }
                MsoFormula::Exists(v, body) | MsoFormula::Forall(v, body) => {
                    bound.push(v);
                    let r = walk(body, bound);
                    bound.pop();
                    r
                }
            }
        }
        walk(self, &mut Vec::new())
    }

    /// Upper bound on atom evaluations over a graph with `n` vertices.
    pub fn cost(&self, n: usize) -> u128 {
        match self {
            MsoFormula::True | MsoFormula::False => 1,
            MsoFormula::Arc(..) | MsoFormula::Eq(..) | MsoFormula::Mem(..) => 1,
            MsoFormula::Not(a) => a.cost(n),
            MsoFormula::And(a, b) | MsoFormula::Or(a, b) | MsoFormula::Implies(a, b) => {
                a.cost(n).saturating_add(b.cost(n))
            }
            MsoFormula::Exists(v, body) | MsoFormula::Forall(v, body) => {
                let width = if is_set_var(v) {
                    1u128.checked_shl(n as u32).filter(|_| n < 128).unwrap_or(u128::MAX)
                } else {
                    n as u128
                };
                width.max(1).saturating_mul(body.cost(n))
            }
        }
    }
}

impl fmt::Display for MsoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MsoFormula::True => f.write_str("true"),
            MsoFormula::False => f.write_str("false"),
            MsoFormula::Arc(x, y) => write!(f, "{x} -> {y}"),
            MsoFormula::Eq(x, y) => write!(f, "{x} = {y}"),
            MsoFormula::Mem(x, s) => write!(f, "{x} in {s}"),
            MsoFormula::Not(a) => write!(f, "!({a})"),
            MsoFormula::And(a, b) => write!(f, "({a}) & ({b})"),
            MsoFormula::Or(a, b) => write!(f, "({a}) | ({b})"),
            MsoFormula::Implies(a, b) => write!(f, "({a}) => ({b})"),
            MsoFormula::Exists(v, body) => write!(f, "exists {v} ({body})"),
            MsoFormula::Forall(v, body) => write!(f, "forall {v} ({body})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Exists,
    Forall,
    In,
    True,
    False,
    Arrow,
    Implies,
    Equal,
    Not,
    And,
    Or,
    Open,
    Close,
    Colon,
}

fn lex(text: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Token::Open,
            b')' => Token::Close,
            b'!' | b'~' => Token::Not,
            b'&' => Token::And,
            b'|' => Token::Or,
            b':' => Token::Colon,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Token::Arrow
            }
            b'=' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Token::Implies
            }
            b'=' => Token::Equal,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || matches!(bytes[i + 1], b'_' | b'\'')) {
                    i += 1;
                }
                match &text[start..=i] {
                    "exists" => Token::Exists,
                    "forall" => Token::Forall,
                    "in" => Token::In,
                    "true" => Token::True,
                    "false" => Token::False,
                    word => Token::Ident(word.to_string()),
                }
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(Error::Mso(format!("unexpected character {ch:?} at offset {i}")));
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn error(&self, what: &str) -> Error {
        match self.tokens.get(self.pos) {
            Some((at, tok)) => Error::Mso(format!("{what} at offset {at} (found {tok:?})")),
            None => Error::Mso(format!("{what} at end of input")),
        }
    }

    fn eat(&mut self, t: &Token) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Token) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {t:?}")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Token::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.error("expected a variable")),
        }
    }

    fn formula(&mut self) -> Result<MsoFormula> {
        let lhs = self.disjunction()?;
        if self.eat(&Token::Implies) {
            let rhs = self.formula()?;
            return Ok(MsoFormula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<MsoFormula> {
        let mut acc = self.conjunction()?;
        while self.eat(&Token::Or) {
            let rhs = self.conjunction()?;
            acc = MsoFormula::Or(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<MsoFormula> {
        let mut acc = self.unary()?;
        while self.eat(&Token::And) {
            let rhs = self.unary()?;
            acc = MsoFormula::And(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MsoFormula> {
        match self.peek() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(MsoFormula::Not(Box::new(self.unary()?)))
            }
            Some(Token::Exists) | Some(Token::Forall) => {
                let exists = self.peek() == Some(&Token::Exists);
                self.pos += 1;
                let var = self.ident()?;
                let body = if self.eat(&Token::Colon) { self.formula()? } else { self.unary()? };
                Ok(if exists {
                    MsoFormula::Exists(var, Box::new(body))
                } else {
                    MsoFormula::Forall(var, Box::new(body))
                })
            }
            Some(Token::Open) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Token::Close)?;
                Ok(f)
            }
            Some(Token::True) => {
                self.pos += 1;
                Ok(MsoFormula::True)
            }
            Some(Token::False) => {
                self.pos += 1;
                Ok(MsoFormula::False)
            }
            Some(Token::Ident(_)) => {
                let x = self.ident()?;
                let op = self.peek().cloned();
                self.pos += 1;
                let y = self.ident()?;
                match op {
                    Some(Token::Arrow) => Ok(MsoFormula::Arc(x, y)),
                    Some(Token::Equal) => Ok(MsoFormula::Eq(x, y)),
                    Some(Token::In) => Ok(MsoFormula::Mem(x, y)),
                    _ => {
                        self.pos -= 2;
                        Err(self.error("expected ->, = or in"))
                    }
                }
            }
            _ => Err(self.error("expected a formula")),
        }
    }
}

/// Formula with variables resolved to environment slots.
enum Node {
    Const(bool),
    Arc(usize, usize),
    Eq(usize, usize),
    Mem(usize, usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Vertex { exists: bool, slot: usize, body: Box<Node> },
    Set { exists: bool, slot: usize, body: Box<Node> },
}

fn resolve(f: &MsoFormula, scope: &mut Vec<(String, usize)>, vslots: &mut usize, sslots: &mut usize) -> Node {
    let find = |scope: &[(String, usize)], name: &str| {
        scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|&(_, s)| s)
            .expect("closed formula")
    };
    match f {
        MsoFormula::True => Node::Const(true),
        MsoFormula::False => Node::Const(false),
        MsoFormula::Arc(x, y) => Node::Arc(find(scope, x), find(scope, y)),
        MsoFormula::Eq(x, y) => Node::Eq(find(scope, x), find(scope, y)),
        MsoFormula::Mem(x, s) => Node::Mem(find(scope, x), find(scope, s)),
        MsoFormula::Not(a) => Node::Not(Box::new(resolve(a, scope, vslots, sslots))),
        MsoFormula::And(a, b) => Node::And(
            Box::new(resolve(a, scope, vslots, sslots)),
            Box::new(resolve(b, scope, vslots, sslots)),
        ),
        MsoFormula::Or(a, b) => Node::Or(
            Box::new(resolve(a, scope, vslots, sslots)),
            Box::new(resolve(b, scope, vslots, sslots)),
        ),
        MsoFormula::Implies(a, b) => Node::Or(
            Box::new(Node::Not(Box::new(resolve(a, scope, vslots, sslots)))),
            Box::new(resolve(b, scope, vslots, sslots)),
        ),
        MsoFormula::Exists(v, body) | MsoFormula::Forall(v, body) => {
            let exists = matches!(f, MsoFormula::Exists(..));
            let set = is_set_var(v);
            let counter = if set { &mut *sslots } else { &mut *vslots };
            let slot = *counter;
            *counter += 1;
            scope.push((v.clone(), slot));
            let body = Box::new(resolve(body, scope, vslots, sslots));
            scope.pop();
            if set {
                Node::Set { exists, slot, body }
            } else {
                Node::Vertex { exists, slot, body }
            }
        }
    }
}

struct Env<'g> {
    graph: &'g SemanticGraph,
    vertices: Vec<usize>,
    sets: Vec<Vec<u64>>,
}

impl Env<'_> {
    fn eval(&mut self, node: &Node) -> bool {
        match node {
            Node::Const(b) => *b,
            Node::Arc(x, y) => self.graph.has_arc(self.vertices[*x], self.vertices[*y]),
            Node::Eq(x, y) => self.vertices[*x] == self.vertices[*y],
            Node::Mem(x, s) => {
                let v = self.vertices[*x];
                (self.sets[*s][v / 64] >> (v % 64)) & 1 == 1
            }
            Node::Not(a) => !self.eval(a),
            Node::And(a, b) => self.eval(a) && self.eval(b),
            Node::Or(a, b) => self.eval(a) || self.eval(b),
            Node::Vertex { exists, slot, body } => {
                for v in 0..self.graph.vertex_count() {
                    self.vertices[*slot] = v;
                    if self.eval(body) == *exists {
                        return *exists;
                    }
                }
                !*exists
            }
            Node::Set { exists, slot, body } => {
                let n = self.graph.vertex_count();
                self.sets[*slot].iter_mut().for_each(|w| *w = 0);
                if self.eval(body) == *exists {
                    return *exists;
                }
                // Gray code: step k flips the bit at k's lowest set position
                for k in 1u128..(1u128 << n) {
                    let v = k.trailing_zeros() as usize;
                    self.sets[*slot][v / 64] ^= 1 << (v % 64);
                    if self.eval(body) == *exists {
                        return *exists;
                    }
                }
                !*exists
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MsoVerdict {
    pub result: bool,
    /// Values of the leading existential vertex variables, when true.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<(String, usize)>>,
    #[serde(serialize_with = "cost_as_string")]
    pub cost: u128,
}

fn cost_as_string<S: serde::Serializer>(cost: &u128, s: S) -> std::result::Result<S::Ok, S::Error> {
    if *cost <= u64::MAX as u128 {
        s.serialize_u64(*cost as u64)
    } else {
        s.serialize_str(&cost.to_string())
    }
}

/// Evaluates the closed formula `phi` on `g` by brute force, refusing when
/// the estimated number of atom evaluations exceeds `budget`.
pub fn mso_check(g: &SemanticGraph, phi: &MsoFormula, budget: u128) -> Result<MsoVerdict> {
    phi.check_closed()?;
    let n = g.vertex_count();
    let cost = phi.cost(n);
    if cost > budget || cost == u128::MAX {
        return Err(Error::MsoBudget {
            estimated: cost,
            budget,
        });
    }
    let (mut vslots, mut sslots) = (0, 0);
    let root = resolve(phi, &mut Vec::new(), &mut vslots, &mut sslots);
    let mut env = Env {
        graph: g,
        vertices: vec![0; vslots],
        sets: vec![vec![0u64; n.div_ceil(64).max(1)]; sslots],
    };
    let result = env.eval(&root);
    let witness = if result { existential_witness(phi, &root, &mut env) } else { None };
    Ok(MsoVerdict { result, witness, cost })
}

fn existential_witness(phi: &MsoFormula, root: &Node, env: &mut Env<'_>) -> Option<Vec<(String, usize)>> {
    let mut out = Vec::new();
    let (mut f, mut node) = (phi, root);
    while let (MsoFormula::Exists(name, fbody), Node::Vertex { exists: true, slot, body }) = (f, node) {
        let v = (0..env.graph.vertex_count()).find(|&v| {
            env.vertices[*slot] = v;
            env.eval(body)
        })?;
        env.vertices[*slot] = v;
        out.push((name.clone(), v));
        f = fbody;
        node = body;
    }
    (!out.is_empty()).then_some(out)
}
