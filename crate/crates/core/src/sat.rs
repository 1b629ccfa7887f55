// SPDX-License-Identifier: Apache-2.0

//! Propositional formulas: DIMACS and expression parsing, brute-force
//! evaluation, the `S̄` word, and compilation into a subcircuit.
//!
//! Assignment `i` gives variable `v` the value of bit `v - 1` of `i`.

use std::fmt;
use std::mem::size_of;

use crate::circuit::{Emitter, GateId, GateSink};
use crate::error::{Error, Result};

/// Largest `s` for which `S̄` (length `2^s`) is materialized.
pub const MAX_SBAR_VARS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(usize),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn eval(&self, assignment: u64) -> bool {
        match self {
            Expr::Var(v) => (assignment >> (v - 1)) & 1 == 1,
            Expr::Not(a) => !a.eval(assignment),
            Expr::And(a, b) => a.eval(assignment) && b.eval(assignment),
            Expr::Or(a, b) => a.eval(assignment) || b.eval(assignment),
        }
    }

    fn max_var(&self) -> usize {
        match self {
            Expr::Var(v) => *v,
            Expr::Not(a) => a.max_var(),
            Expr::And(a, b) | Expr::Or(a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn size(&self) -> usize {
        match self {
            Expr::Var(_) => 1,
            Expr::Not(a) => 1 + a.size(),
            Expr::And(a, b) | Expr::Or(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "x{v}"),
            Expr::Not(a) => write!(f, "!{a}"),
            Expr::And(a, b) => write!(f, "({a} & {b})"),
            Expr::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Body {
    /// Signed, non-zero literals.
    Cnf(Vec<Vec<i64>>),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropFormula {
    vars: usize,
    body: Body,
}

/// Bit `i` is set iff the formula is false under assignment `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SBarWord(Vec<bool>);

impl SBarWord {
    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for SBarWord {
    /// In index order: the character at position `i` is bit `i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl PropFormula {
    pub fn cnf(vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self> {
        if vars == 0 {
            return Err(Error::FormulaParse {
                line: 0,
                reason: "at least one variable is required".into(),
            });
        }
        for clause in &clauses {
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > vars {
                    return Err(Error::FormulaParse {
                        line: 0,
                        reason: format!("literal {lit} out of range 1..={vars}"),
                    });
                }
            }
        }
        Ok(PropFormula {
            vars,
            body: Body::Cnf(clauses),
        })
    }

    pub fn expr(vars: usize, expr: Expr) -> Result<Self> {
        let needed = expr.max_var();
        if vars == 0 || needed > vars {
            return Err(Error::FormulaParse {
                line: 0,
                reason: format!("expression uses x{needed} but only {vars} variables are declared"),
            });
        }
        Ok(PropFormula {
            vars,
            body: Body::Expr(expr),
        })
    }

    /// DIMACS if the text has a `p cnf` header, expression syntax otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text
            .lines()
            .any(|l| l.trim_start().starts_with("p ") || l.trim_start().starts_with("p\t"))
        {
            parse_dimacs(text)
        } else {
            parse_expr(text)
        }
    }

    /// Same formula over more variables (unused ones pad the assignment space).
    pub fn with_vars(mut self, vars: usize) -> Result<Self> {
        if vars < self.vars {
            return Err(Error::FormulaParse {
                line: 0,
                reason: format!("cannot shrink from {} to {vars} variables", self.vars),
            });
        }
        self.vars = vars;
        Ok(self)
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Literal/node count, the formula's contribution to circuit size.
    pub fn size(&self) -> usize {
        match &self.body {
            Body::Cnf(clauses) => clauses.iter().map(|c| c.len() + 1).sum(),
            Body::Expr(e) => e.size(),
        }
    }

    pub fn eval(&self, assignment: u64) -> Result<bool> {
        if self.vars < 64 && assignment >> self.vars != 0 {
            return Err(Error::AssignmentRange {
                index: assignment,
                vars: self.vars,
            });
        }
        Ok(match &self.body {
            Body::Cnf(clauses) => clauses.iter().all(|clause| {
                clause.iter().any(|&lit| {
                    let value = (assignment >> (lit.unsigned_abs() - 1)) & 1 == 1;
                    value == (lit > 0)
                })
            }),
            Body::Expr(e) => e.eval(assignment),
        })
    }

    fn check_enumerable(&self) -> Result<()> {
        if self.vars > MAX_SBAR_VARS {
            return Err(Error::Bound {
                what: "variable count",
                actual: self.vars.to_string(),
                bound: MAX_SBAR_VARS.to_string(),
            });
        }
        Ok(())
    }

    pub fn sbar(&self) -> Result<SBarWord> {
        self.check_enumerable()?;
        (0..1u64 << self.vars)
            .map(|i| self.eval(i).map(|b| !b))
            .collect::<Result<Vec<_>>>()
            .map(SBarWord)
    }

    /// Brute force over all `2^s` assignments.
    pub fn is_satisfiable(&self) -> Result<bool> {
        self.check_enumerable()?;
        for i in 0..1u64 << self.vars {
            if self.eval(i)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Emits a subcircuit computing the formula on `assignment` (bit `v - 1`
    /// is variable `v`); returns the output wire.
    pub fn compile<S: GateSink>(&self, e: &mut Emitter<S>, assignment: &[GateId]) -> Result<GateId> {
        if assignment.len() < self.vars {
            return Err(Error::Construction(format!(
                "assignment bus has {} wires, formula needs {}",
                assignment.len(),
                self.vars
            )));
        }
        Ok(match &self.body {
            Body::Cnf(clauses) => {
                let mut acc = e.constant(true);
                for clause in clauses {
                    let mut c = e.constant(false);
                    for &lit in clause {
                        let wire = assignment[lit.unsigned_abs() as usize - 1];
                        let lit = if lit > 0 { wire } else { e.not(wire) };
                        c = e.or(c, lit);
                    }
                    acc = e.and(acc, c);
                }
                acc
            }
            Body::Expr(x) => compile_expr(e, x, assignment),
        })
    }
}

fn compile_expr<S: GateSink>(e: &mut Emitter<S>, x: &Expr, bus: &[GateId]) -> GateId {
    let _frame = e.scratch(size_of::<(usize, GateId)>());
    match x {
        Expr::Var(v) => bus[v - 1],
        Expr::Not(a) => {
            let a = compile_expr(e, a, bus);
            e.not(a)
        }
        Expr::And(a, b) => {
            let a = compile_expr(e, a, bus);
            let b = compile_expr(e, b, bus);
            e.and(a, b)
        }
        Expr::Or(a, b) => {
            let a = compile_expr(e, a, bus);
            let b = compile_expr(e, b, bus);
            e.or(a, b)
        }
    }
}

impl fmt::Display for PropFormula {
    /// DIMACS for CNF bodies, expression syntax otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Body::Cnf(clauses) => {
                writeln!(f, "p cnf {} {}", self.vars, clauses.len())?;
                for clause in clauses {
                    for lit in clause {
                        write!(f, "{lit} ")?;
                    }
                    writeln!(f, "0")?;
                }
                Ok(())
            }
            Body::Expr(e) => write!(f, "{e}"),
        }
    }
}

pub fn parse_dimacs(text: &str) -> Result<PropFormula> {
    let err = |line: usize, reason: String| Error::FormulaParse { line, reason };
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    let mut last_line = 0;
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(err(lineno, "duplicate header".into()));
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(err(lineno, format!("malformed header {trimmed:?}")));
            }
            let vars = fields[2]
                .parse()
                .map_err(|_| err(lineno, format!("bad variable count {:?}", fields[2])))?;
            let count = fields[3]
                .parse()
                .map_err(|_| err(lineno, format!("bad clause count {:?}", fields[3])))?;
            if vars == 0 {
                return Err(err(lineno, "at least one variable is required".into()));
            }
            header = Some((vars, count));
            continue;
        }
        let Some((vars, count)) = header else {
            return Err(err(lineno, "clause before the \"p cnf\" header".into()));
        };
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| err(lineno, format!("unexpected token {tok:?}")))?;
            if lit == 0 {
                if clauses.len() == count {
                    return Err(err(lineno, format!("more than the declared {count} clauses")));
                }
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > vars {
                return Err(err(lineno, format!("literal {lit} out of range 1..={vars}")));
            } else {
                current.push(lit);
            }
        }
    }
    let Some((vars, count)) = header else {
        return Err(err(last_line, "missing \"p cnf\" header".into()));
    };
    if !current.is_empty() {
        return Err(err(last_line, "unterminated final clause".into()));
    }
    if clauses.len() != count {
        return Err(err(
            last_line,
            format!("declared {count} clauses, found {}", clauses.len()),
        ));
    }
    PropFormula::cnf(vars, clauses)
}

/// Parses `&`, `|`, `!`, parentheses and variables `x<k>` (`!` binds
/// tightest, then `&`, then `|`). The variable count is the largest index.
pub fn parse_expr(text: &str) -> Result<PropFormula> {
    let mut p = ExprParser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let e = p.disjunction()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error(format!("trailing input at column {}", p.pos + 1)));
    }
    PropFormula::expr(e.max_var(), e)
}

struct ExprParser {
    chars: Vec<char>,
    pos: usize,
}

impl ExprParser {
    fn error(&self, reason: String) -> Error {
        let line = 1 + self.chars[..self.pos.min(self.chars.len())]
            .iter()
            .filter(|&&c| c == '\n')
            .count();
        Error::FormulaParse { line, reason }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn disjunction(&mut self) -> Result<Expr> {
        let mut e = self.conjunction()?;
        while self.eat('|') {
            e = Expr::Or(Box::new(e), Box::new(self.conjunction()?));
        }
        Ok(e)
    }

    fn conjunction(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        while self.eat('&') {
            e = Expr::And(Box::new(e), Box::new(self.unary()?));
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('!') {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        if self.eat('(') {
            let e = self.disjunction()?;
            if !self.eat(')') {
                return Err(self.error("expected ')'".into()));
            }
            return Ok(e);
        }
        if self.eat('x') {
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits: String = self.chars[start..self.pos].iter().collect();
            return match digits.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(Expr::Var(v)),
                _ => Err(self.error(format!("bad variable x{digits}"))),
            };
        }
        Err(self.error(format!(
            "unexpected {} at column {}",
            self.chars
                .get(self.pos)
                .map_or("end of input".to_string(), |c| format!("{c:?}")),
            self.pos + 1
        )))
    }
}
