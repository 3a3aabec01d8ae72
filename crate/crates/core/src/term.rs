//! Terms of the ReLU-polynomial ring over the rationals: construction,
//! parsing, exact evaluation and the structural measures (degree, atomic
//! length, subterms, proto-neuron test).
//!
//! Terms are immutable trees behind [`Arc`] handles. Equality and hashing are
//! structural; the `Arc` sharing only exists so that unfolded neural networks
//! (which duplicate every lower layer in each neuron) stay linear in memory,
//! with all walks memoized on node identity.

use crate::rational::{format_rational, Rational};
use crate::ParseError;
use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub type TermRef = Arc<Term>;

/// A ReLU-polynomial: rational constants, variables, `+`, `*` and `ReLU`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Rational),
    Var(u32),
    Add(TermRef, TermRef),
    Mul(TermRef, TermRef),
    Relu(TermRef),
}

pub fn cnst(r: Rational) -> TermRef {
    Arc::new(Term::Const(r))
}

pub fn int_const(n: i64) -> TermRef {
    cnst(crate::rational::int(n))
}

pub fn var(index: u32) -> TermRef {
    Arc::new(Term::Var(index))
}

pub fn add(left: TermRef, right: TermRef) -> TermRef {
    Arc::new(Term::Add(left, right))
}

pub fn mul(left: TermRef, right: TermRef) -> TermRef {
    Arc::new(Term::Mul(left, right))
}

pub fn relu(arg: TermRef) -> TermRef {
    Arc::new(Term::Relu(arg))
}

/// `-t`, desugared to `-1 * t`; a bare constant folds into its negation.
pub fn neg(t: TermRef) -> TermRef {
    match &*t {
        Term::Const(r) => cnst(-r),
        _ => mul(int_const(-1), t),
    }
}

/// `t - t'`, desugared to `t + (-t')`.
pub fn sub(left: TermRef, right: TermRef) -> TermRef {
    add(left, neg(right))
}

/// Finite map from variable indices to rational values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvaluationMap(BTreeMap<u32, Rational>);

impl EvaluationMap {
    pub fn new() -> Self {
        EvaluationMap(BTreeMap::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, Rational)>) -> Self {
        EvaluationMap(pairs.into_iter().collect())
    }

    pub fn set(&mut self, index: u32, value: Rational) {
        self.0.insert(index, value);
    }

    pub fn get(&self, index: u32) -> Option<&Rational> {
        self.0.get(&index)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&u32, &Rational)> {
        self.0.iter()
    }
}

impl From<BTreeMap<u32, Rational>> for EvaluationMap {
    fn from(map: BTreeMap<u32, Rational>) -> Self {
        EvaluationMap(map)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no binding for variable x{0}")]
    UnboundVar(u32),
}

fn memo_key(t: &TermRef) -> *const Term {
    Arc::as_ptr(t)
}

/// Exact value of `t` under `env`, by the recursive field semantics with
/// `ReLU(v) = max(0, v)`.
pub fn eval_term(t: &TermRef, env: &EvaluationMap) -> Result<Rational, EvalError> {
    fn go(
        t: &TermRef,
        env: &EvaluationMap,
        memo: &mut HashMap<*const Term, Rational>,
    ) -> Result<Rational, EvalError> {
        if let Some(v) = memo.get(&memo_key(t)) {
            return Ok(v.clone());
        }
        let value = match &**t {
            Term::Const(r) => r.clone(),
            Term::Var(i) => env.get(*i).cloned().ok_or(EvalError::UnboundVar(*i))?,
            Term::Add(a, b) => go(a, env, memo)? + go(b, env, memo)?,
            Term::Mul(a, b) => go(a, env, memo)? * go(b, env, memo)?,
            Term::Relu(a) => {
                let v = go(a, env, memo)?;
                if v.is_negative() {
                    Rational::zero()
                } else {
                    v
                }
            }
        };
        memo.insert(memo_key(t), value.clone());
        Ok(value)
    }
    go(t, env, &mut HashMap::new())
}

/// Degree: constants 0, variables 1, `+` max, `*` sum, `ReLU` transparent.
pub fn degree(t: &TermRef) -> u64 {
    fn go(t: &TermRef, memo: &mut HashMap<*const Term, u64>) -> u64 {
        if let Some(&d) = memo.get(&memo_key(t)) {
            return d;
        }
        let d = match &**t {
            Term::Const(_) => 0,
            Term::Var(_) => 1,
            Term::Add(a, b) => go(a, memo).max(go(b, memo)),
            Term::Mul(a, b) => go(a, memo).saturating_add(go(b, memo)),
            Term::Relu(a) => go(a, memo),
        };
        memo.insert(memo_key(t), d);
        d
    }
    go(t, &mut HashMap::new())
}

/// Number of constant and variable leaves; `ReLU` is transparent. The count
/// is taken on the logical tree, so shared subterms count every time they
/// occur.
pub fn atomic_length(t: &TermRef) -> BigUint {
    fn go(t: &TermRef, memo: &mut HashMap<*const Term, BigUint>) -> BigUint {
        if let Some(n) = memo.get(&memo_key(t)) {
            return n.clone();
        }
        let n = match &**t {
            Term::Const(_) | Term::Var(_) => BigUint::one(),
            Term::Add(a, b) | Term::Mul(a, b) => go(a, memo) + go(b, memo),
            Term::Relu(a) => go(a, memo),
        };
        memo.insert(memo_key(t), n.clone());
        n
    }
    go(t, &mut HashMap::new())
}

/// All subterms of `t`, deduplicated under structural equality; contains `t`.
pub fn subterms(t: &TermRef) -> HashSet<TermRef> {
    let mut seen_nodes: HashSet<*const Term> = HashSet::new();
    let mut out: HashSet<TermRef> = HashSet::new();
    fn go(t: &TermRef, seen: &mut HashSet<*const Term>, out: &mut HashSet<TermRef>) {
        if !seen.insert(memo_key(t)) {
            return;
        }
        out.insert(t.clone());
        match &**t {
            Term::Const(_) | Term::Var(_) => {}
            Term::Add(a, b) | Term::Mul(a, b) => {
                go(a, seen, out);
                go(b, seen, out);
            }
            Term::Relu(a) => go(a, seen, out),
        }
    }
    go(t, &mut seen_nodes, &mut out);
    out
}

/// Indices of the variables occurring in `t`.
pub fn vars(t: &TermRef) -> BTreeSet<u32> {
    let mut seen: HashSet<*const Term> = HashSet::new();
    let mut out = BTreeSet::new();
    fn go(t: &TermRef, seen: &mut HashSet<*const Term>, out: &mut BTreeSet<u32>) {
        if !seen.insert(memo_key(t)) {
            return;
        }
        match &**t {
            Term::Const(_) => {}
            Term::Var(i) => {
                out.insert(*i);
            }
            Term::Add(a, b) | Term::Mul(a, b) => {
                go(a, seen, out);
                go(b, seen, out);
            }
            Term::Relu(a) => go(a, seen, out),
        }
    }
    go(t, &mut seen, &mut out);
    out
}

/// Largest `|r|` over the constant leaves of `t`; zero when there are none.
pub fn max_const_abs(t: &TermRef) -> Rational {
    let mut seen: HashSet<*const Term> = HashSet::new();
    let mut best = Rational::zero();
    fn go(t: &TermRef, seen: &mut HashSet<*const Term>, best: &mut Rational) {
        if !seen.insert(memo_key(t)) {
            return;
        }
        match &**t {
            Term::Const(r) => {
                let a = r.abs();
                if a > *best {
                    *best = a;
                }
            }
            Term::Var(_) => {}
            Term::Add(a, b) | Term::Mul(a, b) => {
                go(a, seen, best);
                go(b, seen, best);
            }
            Term::Relu(a) => go(a, seen, best),
        }
    }
    go(t, &mut seen, &mut best);
    best
}

/// A term is a proto-neuron exactly when no variable is ever multiplied by a
/// variable-containing factor, i.e. when its degree is at most 1.
pub fn is_proto_neuron(t: &TermRef) -> bool {
    degree(t) <= 1
}

/// Exact pointwise comparison of two terms on a finite list of evaluation
/// maps. Equality certified this way is a sample statement only.
pub fn terms_equal_on_grid(
    t1: &TermRef,
    t2: &TermRef,
    grid: &[EvaluationMap],
) -> Result<bool, EvalError> {
    for env in grid {
        if eval_term(t1, env)? != eval_term(t2, env)? {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Parsing
//
// term     := sum
// sum      := prod (('+' | '-') prod)*
// prod     := unary ('*' unary)*
// unary    := '-' unary | atom
// atom     := RATIONAL | VARIABLE | 'ReLU' '(' sum ')' | '(' sum ')'
// RATIONAL := DIGITS ('/' DIGITS)?      (zero denominator rejected)
// VARIABLE := 'x' DIGITS
//
// Whitespace is insignificant. `-` folds into a directly following rational
// literal (so `-5/7` is one constant); applied to anything else it desugars
// to `-1 * t`, and `a - b` desugars to `a + (-b)`.
// ---------------------------------------------------------------------------

struct TermParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> TermParser<'a> {
    fn new(text: &'a str) -> Self {
        TermParser {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(self.pos, message))
    }

    fn parse_digits(&mut self) -> Result<BigUint, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected digits");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(text.parse().unwrap())
    }

    fn parse_sum(&mut self) -> Result<TermRef, ParseError> {
        let mut acc = self.parse_prod()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.parse_prod()?;
                    acc = add(acc, rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.parse_prod()?;
                    acc = add(acc, neg(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_prod(&mut self) -> Result<TermRef, ParseError> {
        let mut acc = self.parse_unary()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                let rhs = self.parse_unary()?;
                acc = mul(acc, rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_unary(&mut self) -> Result<TermRef, ParseError> {
        self.skip_ws();
        if self.eat(b'-') {
            let inner = self.parse_unary()?;
            Ok(neg(inner))
        } else {
            self.parse_atom()
        }
    }

    fn parse_atom(&mut self) -> Result<TermRef, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_sum()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            Some(b'x') => {
                self.pos += 1;
                let index_offset = self.pos;
                let digits = self.parse_digits()?;
                let index: u32 = digits
                    .try_into()
                    .map_err(|_| ParseError::new(index_offset, "variable index too large"))?;
                Ok(var(index))
            }
            Some(b'R') => {
                let keyword = b"ReLU";
                if self.src[self.pos..].starts_with(keyword) {
                    self.pos += keyword.len();
                    self.skip_ws();
                    if !self.eat(b'(') {
                        return self.err("expected '(' after ReLU");
                    }
                    let inner = self.parse_sum()?;
                    self.skip_ws();
                    if !self.eat(b')') {
                        return self.err("expected ')'");
                    }
                    Ok(relu(inner))
                } else {
                    self.err("expected 'ReLU'")
                }
            }
            Some(b) if b.is_ascii_digit() => {
                let numer = self.parse_digits()?;
                let denom = if self.eat(b'/') {
                    let denom_offset = self.pos;
                    let d = self.parse_digits()?;
                    if d.is_zero() {
                        return Err(ParseError::new(
                            denom_offset,
                            "rational has zero denominator",
                        ));
                    }
                    d
                } else {
                    BigUint::one()
                };
                Ok(cnst(Rational::new(numer.into(), denom.into())))
            }
            _ => self.err("expected a rational, a variable, 'ReLU(..)' or '('"),
        }
    }
}

/// Parses the ASCII term grammar. Errors carry the byte offset of the failure.
pub fn parse_term(text: &str) -> Result<TermRef, ParseError> {
    let mut p = TermParser::new(text);
    let t = p.parse_sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("unexpected trailing input");
    }
    Ok(t)
}

// Printing uses the minimal parentheses the grammar needs; `parse_term` of the
// output is structurally identical to the input.
fn fmt_term(t: &Term, parent_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = match t {
        Term::Add(..) => 1,
        Term::Mul(..) => 2,
        _ => 3,
    };
    let parens = prec < parent_prec;
    if parens {
        f.write_str("(")?;
    }
    match t {
        Term::Const(r) => f.write_str(&format_rational(r))?,
        Term::Var(i) => write!(f, "x{i}")?,
        Term::Add(a, b) => {
            fmt_term(a, 1, f)?;
            f.write_str(" + ")?;
            fmt_term(b, 2, f)?;
        }
        Term::Mul(a, b) => {
            fmt_term(a, 2, f)?;
            f.write_str("*")?;
            fmt_term(b, 3, f)?;
        }
        Term::Relu(a) => {
            f.write_str("ReLU(")?;
            fmt_term(a, 0, f)?;
            f.write_str(")")?;
        }
    }
    if parens {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, 0, f)
    }
}
