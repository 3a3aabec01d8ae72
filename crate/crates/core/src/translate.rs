//! The scaling translations between ReLU polynomials and the logics.
//!
//! * terms -> RPL(.) / LPi1/2(->P-), exact up to `scale_k` once `k` clears a
//!   constructively computed bound `K`,
//! * formulas -> terms, value-preserving on the nose,
//! * proto-neurons -> RPL / LPi1/2(.-,->P-), via integer inflation and the
//!   iterated scaled sum instead of the full product connective,
//! * the zero-free Łukasiewicz fragment <-> its proto-neurons over `k`, a
//!   syntactic bijection.

use crate::formula::{constant_value, ConstStyle, Formula, FormulaKind, LogicId};
use crate::network::{inflate_to_integers, InflationResult, NeuralNetwork};
use crate::rational::{
    biguint_to_rational, ceil_div, ceil_to_biguint, format_rational, is_integer, rat, Rational,
};
use crate::scaled::{
    expand_abbreviations, iter_scaled_sum_styled, scaled_add_styled, scaled_mul_styled,
    styled_const,
};
use crate::term::{
    atomic_length, cnst, degree, eval_term, is_proto_neuron, max_const_abs, mul, relu, sub, var,
    EvaluationMap, Term, TermRef,
};
use num_bigint::BigUint;
use num_traits::{One, Signed};
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("the input bound i must be positive")]
    NonPositiveBound,
    #[error("scaling factor k must be a positive integer, got {0}")]
    NonIntegerScale(String),
    #[error("scaling factor k = {k} is below the certified minimum K = {k_min}")]
    ScaleBelowMinimum { k: String, k_min: BigUint },
    #[error("target logic {0:?} is not supported by this translation")]
    UnsupportedTarget(LogicId),
    #[error("proposition in the scope of ->P at subformula {0}")]
    PropUnderImpP(String),
    #[error("term is not a proto-neuron")]
    NotProtoNeuron,
    #[error("certified bound K is too large to materialize")]
    BoundTooLarge,
    #[error("abbreviation expansion exceeds the size cap")]
    ExpansionTooLarge,
    #[error("(i,k)-equivalence requires 0 < i <= k")]
    BadIkBounds,
    #[error("term does not match the Łukasiewicz proto-neuron grammar over k = {0}")]
    MalformedLukProto(String),
    #[error("subformula {0} is outside the zero-free Łukasiewicz fragment")]
    OutsideLukNoZero(String),
}

/// A formula together with the scaling contract it was produced under: for
/// every evaluation map `E` into [-i,i] and the valuation pairing
/// `V(p) = scale_{input_scale}(E(x_p))`, the formula's value is
/// `scale_{k_value}` of the source term's value.
///
/// The term route keeps `input_scale == k_value`, which is plain
/// `(i,k)`-equivalence. The proto-neuron route into the product-free logics
/// first clears denominators with an integer `D` and pairs its propositions
/// at `input_scale = k_value * D`; equivalently, the formula is
/// `(i, k*D)`-equivalent to the inflated term stored in `inflation`. The two
/// scales coincide exactly when `D = 1`. They cannot coincide otherwise: a
/// product-free formula computes a piecewise-linear function with integer
/// slopes, while a proto-neuron with non-integer weights does not.
#[derive(Debug, Clone)]
pub struct ScaledTranslation {
    pub formula: Formula,
    pub i_bound: Rational,
    pub k_value: Rational,
    pub k_min: BigUint,
    pub target: LogicId,
    /// Scale at which propositions are paired with inputs; `k_value` unless
    /// the translation went through integer inflation.
    pub input_scale: Rational,
    /// The integer-inflated term the formula tracks, when inflation ran.
    pub inflation: Option<InflationResult>,
}

/// Translation of a whole network: one formula per output neuron, all under
/// one shared `k` (the maximum of the per-component bounds).
#[derive(Debug, Clone)]
pub struct NetworkTranslation {
    pub components: Vec<ScaledTranslation>,
    pub i_bound: Rational,
    pub k_value: Rational,
    pub k_min: BigUint,
    pub target: LogicId,
}

// Cap on the bit size of the materialized bound K; beyond this the numbers
// themselves stop being desk-scale.
const MAX_K_BITS: u64 = 4_000_000;

const EXPANSION_CAP: u64 = 1 << 16;

/// The certified scaling bound for translating `t` with inputs in [-i,i]:
/// `max(j^(2 len(t)), 8)` where `j = max(ceil(i), ceil(r_max), 2)` and
/// `r_max` is the largest constant magnitude in `t` (0 when there is none).
pub fn compute_k_term(t: &TermRef, i: &Rational) -> Result<BigUint, TranslateError> {
    if !i.is_positive() {
        return Err(TranslateError::NonPositiveBound);
    }
    let j = ceil_to_biguint(i)
        .max(ceil_to_biguint(&max_const_abs(t)))
        .max(BigUint::from(2u32));
    let exponent_big = atomic_length(t) * 2u32;
    let exponent: u64 = exponent_big
        .try_into()
        .map_err(|_| TranslateError::BoundTooLarge)?;
    if exponent.saturating_mul(j.bits()) > MAX_K_BITS {
        return Err(TranslateError::BoundTooLarge);
    }
    let power = num_traits::pow::pow(j, exponent as usize);
    Ok(power.max(BigUint::from(8u32)))
}

fn resolve_k(k: Option<&Rational>, k_min: &BigUint) -> Result<BigUint, TranslateError> {
    match k {
        None => Ok(k_min.clone()),
        Some(value) => {
            if !is_integer(value) || !value.is_positive() {
                return Err(TranslateError::NonIntegerScale(format_rational(value)));
            }
            let k_big = value.numer().magnitude().clone();
            if k_big < *k_min {
                return Err(TranslateError::ScaleBelowMinimum {
                    k: format_rational(value),
                    k_min: k_min.clone(),
                });
            }
            Ok(k_big)
        }
    }
}

fn scale_by(k: &BigUint, x: &Rational) -> Rational {
    let k_rat = biguint_to_rational(k);
    (&k_rat + x) / (k_rat * rat(2, 1))
}

fn style_for_term_target(target: LogicId) -> Result<ConstStyle, TranslateError> {
    match target {
        LogicId::RplProd => Ok(ConstStyle::TruthConst),
        LogicId::LPiHalfImpPMinus => Ok(ConstStyle::Underline),
        other => Err(TranslateError::UnsupportedTarget(other)),
    }
}

fn style_for_proto_target(target: LogicId) -> Result<ConstStyle, TranslateError> {
    match target {
        LogicId::Rpl => Ok(ConstStyle::TruthConst),
        LogicId::LPiHalfProdMinusImpPMinus => Ok(ConstStyle::Underline),
        other => Err(TranslateError::UnsupportedTarget(other)),
    }
}

fn relu_sandwich(phi: &Formula, style: ConstStyle) -> Formula {
    let half = styled_const(&rat(1, 2), style);
    phi.ominus(&half).oplus(&half)
}

fn translate_term_rec(t: &TermRef, k: &BigUint, style: ConstStyle) -> Formula {
    fn go(
        t: &TermRef,
        k: &BigUint,
        style: ConstStyle,
        memo: &mut HashMap<*const Term, Formula>,
    ) -> Formula {
        let key = Arc::as_ptr(t);
        if let Some(f) = memo.get(&key) {
            return f.clone();
        }
        let out = match &**t {
            Term::Const(r) => styled_const(&scale_by(k, r), style),
            Term::Var(v) => Formula::prop(*v),
            Term::Add(a, b) => {
                scaled_add_styled(&go(a, k, style, memo), &go(b, k, style, memo), style)
            }
            Term::Mul(a, b) => {
                scaled_mul_styled(k, &go(a, k, style, memo), &go(b, k, style, memo), style)
                    .expect("k >= 8 once it clears the certified bound")
            }
            Term::Relu(a) => relu_sandwich(&go(a, k, style, memo), style),
        };
        memo.insert(key, out.clone());
        out
    }
    go(t, k, style, &mut HashMap::new())
}

/// Translates a term into an `(i,k)`-equivalent formula of RPL(.) or of
/// LPi1/2(->P-): constants scale, variables become propositions, sums become
/// scaled sums, products the scaled product, and ReLU clamps at 1/2. With
/// `k = None` the minimal certified `k = K` is used; an explicit `k` must be
/// an integer at least `K`.
pub fn term_to_formula(
    t: &TermRef,
    i: &Rational,
    k: Option<&Rational>,
    target: LogicId,
) -> Result<ScaledTranslation, TranslateError> {
    let style = style_for_term_target(target)?;
    let k_min = compute_k_term(t, i)?;
    let k_big = resolve_k(k, &k_min)?;
    let formula = translate_term_rec(t, &k_big, style);
    let k_value = biguint_to_rational(&k_big);
    Ok(ScaledTranslation {
        formula,
        i_bound: i.clone(),
        input_scale: k_value.clone(),
        k_value,
        k_min,
        target,
        inflation: None,
    })
}

/// Translates a formula of RPL(.) or LPi1/2(->P-) into an equivalent term:
/// constants and propositions map straight across, `a ->L b` becomes
/// `1 - ReLU(t_a - t_b)`, the product becomes multiplication. Subformulas
/// under `->P` must be proposition-free and are folded to their constant;
/// iterated connectives fold likewise or expand.
pub fn formula_to_term(phi: &Formula) -> Result<TermRef, TranslateError> {
    fn go(phi: &Formula, memo: &mut HashMap<u64, TermRef>) -> Result<TermRef, TranslateError> {
        if let Some(t) = memo.get(&phi.id()) {
            return Ok(t.clone());
        }
        let out = match phi.kind() {
            FormulaKind::Zero => cnst(rat(0, 1)),
            FormulaKind::Half => cnst(rat(1, 2)),
            FormulaKind::TruthConst(r) => cnst(r.clone()),
            FormulaKind::Prop(p) => var(*p),
            FormulaKind::ImpL(a, b) => {
                let ta = go(a, memo)?;
                let tb = go(b, memo)?;
                sub(cnst(rat(1, 1)), relu(sub(ta, tb)))
            }
            FormulaKind::Prod(a, b) => mul(go(a, memo)?, go(b, memo)?),
            FormulaKind::ImpP(..) => match constant_value(phi) {
                Some(r) => cnst(r),
                None => return Err(TranslateError::PropUnderImpP(phi.to_string())),
            },
            FormulaKind::IterStrongSum(..) | FormulaKind::IterScaledSum(..) => {
                match constant_value(phi) {
                    Some(r) => cnst(r),
                    None => {
                        let expanded = expand_abbreviations(phi, EXPANSION_CAP)
                            .map_err(|_| TranslateError::ExpansionTooLarge)?;
                        go(&expanded, memo)?
                    }
                }
            }
        };
        memo.insert(phi.id(), out.clone());
        Ok(out)
    }
    go(phi, &mut HashMap::new())
}

fn translate_proto_rec(
    s: &TermRef,
    kappa: &BigUint,
    style: ConstStyle,
) -> Result<Formula, TranslateError> {
    fn constant_of(t: &TermRef) -> Rational {
        eval_term(t, &EvaluationMap::new()).expect("degree-0 term has no variables")
    }
    fn by_integer(z: &Rational, phi: &Formula, style: ConstStyle) -> Formula {
        let n = z.numer().magnitude().clone();
        let scaled = iter_scaled_sum_styled(n, phi, style);
        if z.is_negative() {
            scaled.neg_l()
        } else {
            scaled
        }
    }
    fn go(
        s: &TermRef,
        kappa: &BigUint,
        style: ConstStyle,
        memo: &mut HashMap<*const Term, Formula>,
    ) -> Result<Formula, TranslateError> {
        let key = Arc::as_ptr(s);
        if let Some(f) = memo.get(&key) {
            return Ok(f.clone());
        }
        let out = match &**s {
            Term::Const(r) => styled_const(&scale_by(kappa, r), style),
            Term::Var(v) => Formula::prop(*v),
            Term::Add(a, b) => scaled_add_styled(
                &go(a, kappa, style, memo)?,
                &go(b, kappa, style, memo)?,
                style,
            ),
            Term::Mul(a, b) => {
                let (deg_a, deg_b) = (degree(a), degree(b));
                if deg_a == 0 && deg_b == 0 {
                    styled_const(&scale_by(kappa, &constant_of(s)), style)
                } else if deg_b == 0 {
                    by_integer(&constant_of(b), &go(a, kappa, style, memo)?, style)
                } else if deg_a == 0 {
                    by_integer(&constant_of(a), &go(b, kappa, style, memo)?, style)
                } else {
                    return Err(TranslateError::NotProtoNeuron);
                }
            }
            Term::Relu(a) => relu_sandwich(&go(a, kappa, style, memo)?, style),
        };
        memo.insert(key, out.clone());
        Ok(out)
    }
    go(s, kappa, style, &mut HashMap::new())
}

/// Translates a proto-neuron into a formula of RPL or of LPi1/2(.-,->P-),
/// using iterated scaled sums for the integer coefficients (negative ones
/// pass through Łukasiewicz negation) instead of the product connective.
///
/// The pipeline clears denominators (multiplier `D`, term `s ~ D*t`),
/// computes the bound `L` for the integer-only `s`, certifies
/// `K = max(ceil(L / D), ceil(i))`, and builds the formula over `k * D`. The
/// resulting formula is `(i, k*D)`-equivalent to `s`: under
/// `V(p) = scale_{kD}(E(x_p))` its value is `scale_{kD}(E(s)) =
/// scale_k(E(t))`. When `D = 1` (every constant of `t` an integer) this is
/// exactly `(i,k)`-equivalence to `t`; for `D > 1` no product-free formula
/// can pair inputs and outputs at one common scale, because its slopes are
/// integers while those of `t` are not.
pub fn proto_neuron_to_logic(
    t: &TermRef,
    i: &Rational,
    k: Option<&Rational>,
    target: LogicId,
) -> Result<ScaledTranslation, TranslateError> {
    let style = style_for_proto_target(target)?;
    if !is_proto_neuron(t) {
        return Err(TranslateError::NotProtoNeuron);
    }
    let inflation = inflate_to_integers(t).map_err(|_| TranslateError::NotProtoNeuron)?;
    let l_bound = compute_k_term(&inflation.term, i)?;
    let k_min = ceil_div(&l_bound, &inflation.multiplier).max(ceil_to_biguint(i));
    let k_big = resolve_k(k, &k_min)?;
    let kappa = &k_big * &inflation.multiplier;
    let formula = translate_proto_rec(&inflation.term, &kappa, style)?;
    Ok(ScaledTranslation {
        formula,
        i_bound: i.clone(),
        k_value: biguint_to_rational(&k_big),
        k_min,
        target,
        input_scale: biguint_to_rational(&kappa),
        inflation: Some(inflation),
    })
}

/// Translates every output neuron of a network under one shared `k`: the
/// maximum of the per-component certified bounds (tuple translations must
/// share their scaling). RPL and LPi1/2(.-,->P-) targets go through the
/// proto-neuron pipeline, RPL(.) and LPi1/2(->P-) through the term one.
pub fn network_to_logic(
    net: &NeuralNetwork,
    i: &Rational,
    k: Option<&Rational>,
    target: LogicId,
) -> Result<NetworkTranslation, TranslateError> {
    let proto_route = match target {
        LogicId::Rpl | LogicId::LPiHalfProdMinusImpPMinus => true,
        LogicId::RplProd | LogicId::LPiHalfImpPMinus => false,
        other => return Err(TranslateError::UnsupportedTarget(other)),
    };
    let terms = net.output_terms();
    let translate_one = |t: &TermRef, k: Option<&Rational>| {
        if proto_route {
            proto_neuron_to_logic(t, i, k, target)
        } else {
            term_to_formula(t, i, k, target)
        }
    };
    let mut k_min = BigUint::one();
    for t in &terms {
        k_min = k_min.max(translate_one(t, None)?.k_min);
    }
    let k_big = resolve_k(k, &k_min)?;
    let shared = biguint_to_rational(&k_big);
    let components = terms
        .iter()
        .map(|t| translate_one(t, Some(&shared)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NetworkTranslation {
        components,
        i_bound: i.clone(),
        k_value: shared,
        k_min,
        target,
    })
}

/// A term of the restricted grammar `x | k - ReLU(t - t')`, the exact image
/// of the zero-free Łukasiewicz formulas under the term translation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LukProtoNeuron {
    term: TermRef,
    scale_bound: Rational,
}

fn match_k_minus_relu_diff<'a>(
    t: &'a TermRef,
    k: &Rational,
) -> Option<(&'a TermRef, &'a TermRef)> {
    let minus_one = rat(-1, 1);
    let Term::Add(head, tail) = &**t else {
        return None;
    };
    let Term::Const(c) = &**head else {
        return None;
    };
    if c != k {
        return None;
    }
    let Term::Mul(m, wrapped) = &**tail else {
        return None;
    };
    if !matches!(&**m, Term::Const(c) if *c == minus_one) {
        return None;
    }
    let Term::Relu(diff) = &**wrapped else {
        return None;
    };
    let Term::Add(a, negated) = &**diff else {
        return None;
    };
    let Term::Mul(m2, b) = &**negated else {
        return None;
    };
    if !matches!(&**m2, Term::Const(c) if *c == minus_one) {
        return None;
    }
    Some((a, b))
}

fn validate_luk_proto(t: &TermRef, k: &Rational) -> Result<(), TranslateError> {
    match &**t {
        Term::Var(_) => Ok(()),
        _ => match match_k_minus_relu_diff(t, k) {
            Some((a, b)) => {
                validate_luk_proto(a, k)?;
                validate_luk_proto(b, k)
            }
            None => Err(TranslateError::MalformedLukProto(format_rational(k))),
        },
    }
}

impl LukProtoNeuron {
    pub fn new(term: TermRef, scale_bound: Rational) -> Result<Self, TranslateError> {
        if !scale_bound.is_positive() {
            return Err(TranslateError::NonPositiveBound);
        }
        validate_luk_proto(&term, &scale_bound)?;
        Ok(LukProtoNeuron { term, scale_bound })
    }

    pub fn term(&self) -> &TermRef {
        &self.term
    }

    pub fn scale_bound(&self) -> &Rational {
        &self.scale_bound
    }
}

/// Translates a Łukasiewicz proto-neuron over `k` into an `(i,k)`-equivalent
/// zero-free Łukasiewicz formula, for any `0 < i <= k`: variables become
/// propositions and each `k - ReLU(t - t')` becomes an implication.
pub fn luk_proto_to_formula(
    neuron: &LukProtoNeuron,
    i: &Rational,
) -> Result<Formula, TranslateError> {
    if !i.is_positive() {
        return Err(TranslateError::NonPositiveBound);
    }
    if i > &neuron.scale_bound {
        return Err(TranslateError::BadIkBounds);
    }
    fn go(t: &TermRef, k: &Rational) -> Formula {
        match &**t {
            Term::Var(v) => Formula::prop(*v),
            _ => {
                let (a, b) = match_k_minus_relu_diff(t, k).expect("validated grammar");
                go(a, k).imp_l(&go(b, k))
            }
        }
    }
    Ok(go(&neuron.term, &neuron.scale_bound))
}

/// Translates a zero-free Łukasiewicz formula (propositions and `->L` only)
/// into an equivalent proto-neuron over 1. Composing with
/// [`luk_proto_to_formula`] at `i = 1` returns the identical formula.
pub fn formula_to_luk_proto(phi: &Formula) -> Result<LukProtoNeuron, TranslateError> {
    fn go(phi: &Formula) -> Result<TermRef, TranslateError> {
        match phi.kind() {
            FormulaKind::Prop(p) => Ok(var(*p)),
            FormulaKind::ImpL(a, b) => {
                let ta = go(a)?;
                let tb = go(b)?;
                Ok(sub(cnst(rat(1, 1)), relu(sub(ta, tb))))
            }
            _ => Err(TranslateError::OutsideLukNoZero(phi.to_string())),
        }
    }
    LukProtoNeuron::new(go(phi)?, rat(1, 1))
}
