//! Formulas of the Łukasiewicz-family fuzzy logics, as a hash-consed DAG.
//!
//! One global interner guarantees that structurally equal subformulas share a
//! node, so formula equality is an id comparison and evaluation memoizes over
//! the DAG. Two iterated connectives are kept as first-class abbreviation
//! nodes ([`FormulaKind::IterStrongSum`], [`FormulaKind::IterScaledSum`])
//! because the translations need repetition counts far beyond what a literal
//! expansion could materialize; their evaluation recurses on the count
//! instead.

mod classify;
mod constants;
mod parse;

pub use classify::{classify, FragmentInfo, LogicId};
pub use constants::{rational_constant, underline};
pub use parse::{parse_formula, parse_formula_with_style};

use crate::rational::{format_rational, in_unit_interval, Rational};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

/// Which flavor of rational constant a scaled connective emits: `TruthConst`
/// for the RPL family, the proposition-free `underline` construction for the
/// LPi1/2 family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstStyle {
    TruthConst,
    Underline,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FormulaKind {
    /// The truth constant 0.
    Zero,
    /// The truth constant 1/2 of LPi1/2.
    Half,
    /// An RPL truth constant in [0,1].
    TruthConst(Rational),
    /// Proposition symbol `p{i}`.
    Prop(u32),
    /// Łukasiewicz implication, `min(1, 1 - a + b)`.
    ImpL(Formula, Formula),
    /// Product conjunction, `a * b`.
    Prod(Formula, Formula),
    /// Product implication: 1 when `a <= b`, else `b / a`.
    ImpP(Formula, Formula),
    /// n-fold strong disjunction of the body with itself; value
    /// `min(1, n * v)`.
    IterStrongSum(BigUint, Formula),
    /// n-fold scaled sum of the body with itself, split along powers of two.
    IterScaledSum(BigUint, Formula, ConstStyle),
}

#[derive(Debug)]
pub struct FormulaNode {
    id: u64,
    kind: FormulaKind,
}

/// Handle to an interned formula node. Cloning is cheap; equality, hashing
/// and ordering all go through the node id, which coincides with structural
/// equality thanks to hash-consing.
#[derive(Clone)]
pub struct Formula(Arc<FormulaNode>);

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}
impl Eq for Formula {}
impl std::hash::Hash for Formula {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.id.hash(state);
    }
}
impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Formula {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.id.cmp(&other.0.id)
    }
}
impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Formula[{}]({})", self.0.id, self)
    }
}

struct Interner {
    map: HashMap<FormulaKind, Formula>,
    next_id: u64,
}

fn interner() -> &'static Mutex<Interner> {
    static STORE: OnceLock<Mutex<Interner>> = OnceLock::new();
    STORE.get_or_init(|| {
        Mutex::new(Interner {
            map: HashMap::new(),
            next_id: 0,
        })
    })
}

pub(crate) fn intern(kind: FormulaKind) -> Formula {
    // A written 0 is the Łukasiewicz constant, whichever grammar produced it.
    let kind = match kind {
        FormulaKind::TruthConst(r) if r.is_zero() => FormulaKind::Zero,
        k => k,
    };
    let mut store = interner().lock().unwrap();
    if let Some(f) = store.map.get(&kind) {
        return f.clone();
    }
    let id = store.next_id;
    store.next_id += 1;
    let formula = Formula(Arc::new(FormulaNode {
        id,
        kind: kind.clone(),
    }));
    store.map.insert(kind, formula.clone());
    formula
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("truth constant {0} outside [0,1]")]
    ConstantOutOfRange(String),
    #[error("logic {0:?} cannot express the rational constant {1}")]
    UnsupportedConstant(LogicId, String),
}

impl Formula {
    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn kind(&self) -> &FormulaKind {
        &self.0.kind
    }

    pub fn zero() -> Formula {
        intern(FormulaKind::Zero)
    }

    pub fn half() -> Formula {
        intern(FormulaKind::Half)
    }

    pub fn truth_const(r: Rational) -> Result<Formula, FormulaError> {
        if !in_unit_interval(&r) {
            return Err(FormulaError::ConstantOutOfRange(format_rational(&r)));
        }
        Ok(intern(FormulaKind::TruthConst(r)))
    }

    /// Truth constant for a value already known to lie in [0,1].
    pub(crate) fn truth_const_unit(r: Rational) -> Formula {
        debug_assert!(in_unit_interval(&r));
        intern(FormulaKind::TruthConst(r))
    }

    pub fn prop(index: u32) -> Formula {
        intern(FormulaKind::Prop(index))
    }

    pub fn imp_l(&self, other: &Formula) -> Formula {
        intern(FormulaKind::ImpL(self.clone(), other.clone()))
    }

    pub fn prod(&self, other: &Formula) -> Formula {
        intern(FormulaKind::Prod(self.clone(), other.clone()))
    }

    pub fn imp_p(&self, other: &Formula) -> Formula {
        intern(FormulaKind::ImpP(self.clone(), other.clone()))
    }

    pub fn strong_sum(n: BigUint, body: &Formula) -> Formula {
        intern(FormulaKind::IterStrongSum(n, body.clone()))
    }

    pub fn scaled_sum(n: BigUint, body: &Formula, style: ConstStyle) -> Formula {
        intern(FormulaKind::IterScaledSum(n, body.clone(), style))
    }

    // Derived connectives, expanded definitionally into the primitives.

    /// `~L a := a ->L 0`; value `1 - v(a)`.
    pub fn neg_l(&self) -> Formula {
        self.imp_l(&Formula::zero())
    }

    /// `a (+) b := ~L a ->L b`; value `min(1, v(a) + v(b))`.
    pub fn oplus(&self, other: &Formula) -> Formula {
        self.neg_l().imp_l(other)
    }

    /// `a (x) b := ~L (a ->L ~L b)`; value `max(0, v(a) + v(b) - 1)`.
    pub fn otimes(&self, other: &Formula) -> Formula {
        self.imp_l(&other.neg_l()).neg_l()
    }

    /// `a (-) b := a (x) ~L b`; value `max(0, v(a) - v(b))`.
    pub fn ominus(&self, other: &Formula) -> Formula {
        self.otimes(&other.neg_l())
    }

    /// `a /\ b := a (x) (a ->L b)`; value `min(v(a), v(b))`.
    pub fn meet(&self, other: &Formula) -> Formula {
        self.otimes(&self.imp_l(other))
    }

    /// `a \/ b := (a ->L b) ->L b`; value `max(v(a), v(b))`.
    pub fn join(&self, other: &Formula) -> Formula {
        self.imp_l(other).imp_l(other)
    }

    /// `a <->L b := (a ->L b) /\ (b ->L a)`; value `1 - |v(a) - v(b)|`.
    pub fn iff_l(&self, other: &Formula) -> Formula {
        self.imp_l(other).meet(&other.imp_l(self))
    }
}

/// Proposition indices occurring in `phi`, after resolving the abbreviation
/// nodes: an iterated connective with count 0 is a constant and hides its
/// body.
pub fn props(phi: &Formula) -> BTreeSet<u32> {
    let mut seen: HashSet<u64> = HashSet::new();
    let mut out = BTreeSet::new();
    fn go(phi: &Formula, seen: &mut HashSet<u64>, out: &mut BTreeSet<u32>) {
        if !seen.insert(phi.id()) {
            return;
        }
        match phi.kind() {
            FormulaKind::Zero | FormulaKind::Half | FormulaKind::TruthConst(_) => {}
            FormulaKind::Prop(i) => {
                out.insert(*i);
            }
            FormulaKind::ImpL(a, b) | FormulaKind::Prod(a, b) | FormulaKind::ImpP(a, b) => {
                go(a, seen, out);
                go(b, seen, out);
            }
            FormulaKind::IterStrongSum(n, b) | FormulaKind::IterScaledSum(n, b, _) => {
                if !n.is_zero() {
                    go(b, seen, out);
                }
            }
        }
    }
    go(phi, &mut seen, &mut out);
    out
}

pub fn prop_free(phi: &Formula) -> bool {
    props(phi).is_empty()
}

/// The constant value of a proposition-free formula; `None` when `phi`
/// mentions a proposition.
pub fn constant_value(phi: &Formula) -> Option<Rational> {
    if prop_free(phi) {
        Some(eval_formula(phi, &Valuation::empty()).expect("proposition-free formula"))
    } else {
        None
    }
}

/// Finite map from proposition indices into [0,1].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation(BTreeMap<u32, Rational>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("valuation value {value} for p{index} outside [0,1]")]
pub struct ValuationError {
    pub index: u32,
    pub value: String,
}

impl Valuation {
    pub fn empty() -> Self {
        Valuation(BTreeMap::new())
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (u32, Rational)>,
    ) -> Result<Self, ValuationError> {
        let mut map = BTreeMap::new();
        for (index, value) in pairs {
            if !in_unit_interval(&value) {
                return Err(ValuationError {
                    index,
                    value: format_rational(&value),
                });
            }
            map.insert(index, value);
        }
        Ok(Valuation(map))
    }

    pub fn get(&self, index: u32) -> Option<&Rational> {
        self.0.get(&index)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&u32, &Rational)> {
        self.0.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no binding for proposition p{0}")]
    UnboundProp(u32),
}

fn min_one(v: Rational) -> Rational {
    if v > Rational::one() {
        Rational::one()
    } else {
        v
    }
}

fn max_zero(v: Rational) -> Rational {
    if v < Rational::zero() {
        Rational::zero()
    } else {
        v
    }
}

/// Value of `(+)'` on already-computed operand values.
fn plus_prime_value(a: &Rational, b: &Rational) -> Rational {
    let quarter = crate::rational::rat(1, 4);
    min_one(max_zero(a - &quarter) + max_zero(b - &quarter))
}

/// `2^(j-1)` where `j` is the smallest integer with `n <= 2^j`; needs `n >= 2`.
pub(crate) fn scaled_sum_split(n: &BigUint) -> BigUint {
    debug_assert!(*n >= BigUint::from(2u32));
    let bits = n.bits();
    let j = if n.count_ones() == 1 { bits - 1 } else { bits };
    BigUint::one() << (j - 1)
}

fn scaled_sum_value(n: &BigUint, base: &Rational) -> Rational {
    fn go(n: &BigUint, base: &Rational, memo: &mut HashMap<BigUint, Rational>) -> Rational {
        if n.is_zero() {
            return crate::rational::rat(1, 2);
        }
        if n.is_one() {
            return base.clone();
        }
        if let Some(v) = memo.get(n) {
            return v.clone();
        }
        let high = scaled_sum_split(n);
        let rest = n - &high;
        let a = go(&high, base, memo);
        let b = go(&rest, base, memo);
        let v = plus_prime_value(&a, &b);
        memo.insert(n.clone(), v.clone());
        v
    }
    go(n, base, &mut HashMap::new())
}

/// Exact truth value of `phi` under `v`, in [0,1]. Shared nodes are evaluated
/// once; the iterated connectives recurse on their counts without expansion.
pub fn eval_formula(phi: &Formula, v: &Valuation) -> Result<Rational, EvalError> {
    fn go(
        phi: &Formula,
        v: &Valuation,
        memo: &mut HashMap<u64, Rational>,
    ) -> Result<Rational, EvalError> {
        if let Some(val) = memo.get(&phi.id()) {
            return Ok(val.clone());
        }
        let value = match phi.kind() {
            FormulaKind::Zero => Rational::zero(),
            FormulaKind::Half => crate::rational::rat(1, 2),
            FormulaKind::TruthConst(r) => r.clone(),
            FormulaKind::Prop(i) => v.get(*i).cloned().ok_or(EvalError::UnboundProp(*i))?,
            FormulaKind::ImpL(a, b) => {
                let va = go(a, v, memo)?;
                let vb = go(b, v, memo)?;
                min_one(Rational::one() - va + vb)
            }
            FormulaKind::Prod(a, b) => go(a, v, memo)? * go(b, v, memo)?,
            FormulaKind::ImpP(a, b) => {
                let va = go(a, v, memo)?;
                let vb = go(b, v, memo)?;
                if va <= vb {
                    Rational::one()
                } else {
                    vb / va
                }
            }
            FormulaKind::IterStrongSum(n, b) => {
                if n.is_zero() {
                    Rational::zero()
                } else {
                    let vb = go(b, v, memo)?;
                    min_one(crate::rational::biguint_to_rational(n) * vb)
                }
            }
            FormulaKind::IterScaledSum(n, b, _) => {
                if n.is_zero() {
                    crate::rational::rat(1, 2)
                } else {
                    let vb = go(b, v, memo)?;
                    scaled_sum_value(n, &vb)
                }
            }
        };
        memo.insert(phi.id(), value.clone());
        Ok(value)
    }
    go(phi, v, &mut HashMap::new())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            FormulaKind::Zero => f.write_str("0"),
            FormulaKind::Half => f.write_str("half"),
            FormulaKind::TruthConst(r) => f.write_str(&format_rational(r)),
            FormulaKind::Prop(i) => write!(f, "p{i}"),
            FormulaKind::ImpL(a, b) => write!(f, "({a} ->L {b})"),
            FormulaKind::Prod(a, b) => write!(f, "({a} (.) {b})"),
            FormulaKind::ImpP(a, b) => write!(f, "({a} ->P {b})"),
            FormulaKind::IterStrongSum(n, b) => write!(f, "SSUM[{n}]({b})"),
            FormulaKind::IterScaledSum(n, b, ConstStyle::TruthConst) => {
                write!(f, "SCSUM[{n}]({b})")
            }
            FormulaKind::IterScaledSum(n, b, ConstStyle::Underline) => {
                write!(f, "SCSUM_L[{n}]({b})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn val(pairs: &[(u32, Rational)]) -> Valuation {
        Valuation::from_pairs(pairs.iter().cloned()).unwrap()
    }

    #[test]
    fn interning_shares_structurally_equal_nodes() {
        let a = Formula::prop(0).imp_l(&Formula::half());
        let b = Formula::prop(0).imp_l(&Formula::half());
        assert_eq!(a.id(), b.id());
        let c = Formula::half().imp_l(&Formula::prop(0));
        assert_ne!(a.id(), c.id());
    }

    #[test]
    fn truth_const_zero_interns_to_zero_node() {
        let z = Formula::truth_const(int(0)).unwrap();
        assert_eq!(z, Formula::zero());
        assert!(Formula::truth_const(rat(3, 2)).is_err());
        assert!(Formula::truth_const(rat(-1, 2)).is_err());
    }

    #[test]
    fn imp_l_semantics() {
        let phi = Formula::prop(0).imp_l(&Formula::prop(1));
        let v = val(&[(0, rat(7, 10)), (1, rat(1, 2))]);
        assert_eq!(eval_formula(&phi, &v).unwrap(), rat(4, 5));
    }

    #[test]
    fn prod_and_imp_p_semantics() {
        let prod = Formula::prop(0).prod(&Formula::prop(1));
        let v = val(&[(0, rat(1, 2)), (1, rat(1, 3))]);
        assert_eq!(eval_formula(&prod, &v).unwrap(), rat(1, 6));

        let impp = Formula::prop(0).imp_p(&Formula::prop(1));
        let v = val(&[(0, rat(1, 2)), (1, rat(1, 4))]);
        assert_eq!(eval_formula(&impp, &v).unwrap(), rat(1, 2));

        let from_zero = Formula::zero().imp_p(&Formula::prop(1));
        let v = val(&[(1, rat(1, 4))]);
        assert_eq!(eval_formula(&from_zero, &v).unwrap(), int(1));
    }

    #[test]
    fn derived_connective_values() {
        let p = Formula::prop(0);
        let q = Formula::prop(1);
        let v = val(&[(0, rat(1, 2)), (1, rat(3, 4))]);
        assert_eq!(eval_formula(&p.ominus(&q), &v).unwrap(), int(0));
        assert_eq!(eval_formula(&q.ominus(&p), &v).unwrap(), rat(1, 4));
        assert_eq!(eval_formula(&p.oplus(&q), &v).unwrap(), int(1));
        assert_eq!(eval_formula(&p.otimes(&q), &v).unwrap(), rat(1, 4));
        assert_eq!(eval_formula(&p.neg_l(), &v).unwrap(), rat(1, 2));

        let v = val(&[(0, rat(1, 3)), (1, rat(2, 3))]);
        assert_eq!(eval_formula(&p.meet(&q), &v).unwrap(), rat(1, 3));
        assert_eq!(eval_formula(&p.join(&q), &v).unwrap(), rat(2, 3));
        assert_eq!(eval_formula(&p.iff_l(&q), &v).unwrap(), rat(2, 3));

        let v = val(&[(0, rat(2, 5)), (1, rat(2, 5))]);
        assert_eq!(eval_formula(&p.iff_l(&q), &v).unwrap(), int(1));
    }

    #[test]
    fn boolean_endpoints_recover_classical_tables() {
        let p = Formula::prop(0);
        let q = Formula::prop(1);
        for a in [0i64, 1] {
            for b in [0i64, 1] {
                let v = val(&[(0, int(a)), (1, int(b))]);
                let imp = eval_formula(&p.imp_l(&q), &v).unwrap();
                assert_eq!(imp, int(i64::from(a == 0 || b == 1)));
                let conj = eval_formula(&p.meet(&q), &v).unwrap();
                assert_eq!(conj, int(a.min(b)));
                let disj = eval_formula(&p.join(&q), &v).unwrap();
                assert_eq!(disj, int(a.max(b)));
                let neg = eval_formula(&p.neg_l(), &v).unwrap();
                assert_eq!(neg, int(1 - a));
            }
        }
    }

    #[test]
    fn strong_sum_value_is_clamped_multiple() {
        let p = Formula::prop(0);
        let v = val(&[(0, rat(2, 5))]);
        let n0 = Formula::strong_sum(0u32.into(), &p);
        assert_eq!(eval_formula(&n0, &v).unwrap(), int(0));
        let n2 = Formula::strong_sum(2u32.into(), &p);
        assert_eq!(eval_formula(&n2, &v).unwrap(), rat(4, 5));
        let n3 = Formula::strong_sum(3u32.into(), &p);
        let v_half = val(&[(0, rat(1, 2))]);
        assert_eq!(eval_formula(&n3, &v_half).unwrap(), int(1));
    }

    #[test]
    fn iterated_nodes_with_count_zero_hide_their_body() {
        let p = Formula::prop(0);
        let s = Formula::scaled_sum(0u32.into(), &p, ConstStyle::TruthConst);
        assert!(prop_free(&s));
        assert_eq!(eval_formula(&s, &Valuation::empty()).unwrap(), rat(1, 2));
        let s1 = Formula::scaled_sum(1u32.into(), &p, ConstStyle::TruthConst);
        assert_eq!(props(&s1).into_iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn valuation_rejects_out_of_range_values() {
        let err = Valuation::from_pairs([(3, rat(5, 4))]).unwrap_err();
        assert_eq!(err.index, 3);
    }

    #[test]
    fn missing_proposition_is_reported() {
        let p = Formula::prop(7);
        assert_eq!(
            eval_formula(&p, &Valuation::empty()).unwrap_err(),
            EvalError::UnboundProp(7)
        );
    }
}
