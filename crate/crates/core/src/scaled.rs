//! The scaled-arithmetic connectives: simulating sums and products of reals
//! from an interval [-k,k] inside the truth-value interval [0,1].
//!
//! `iter_strong_sum` multiplies a truth value by a natural number (clamped at
//! 1). The remaining three work on `scale_k`-encoded values: `scaled_add`
//! adds, `iter_scaled_sum` multiplies by a natural number, and `scaled_mul`
//! multiplies two encoded values, each exact under the documented input
//! ranges. All of them are definitional abbreviations over the primitive
//! connectives; `expand_abbreviations` materializes them.

use crate::formula::{underline, ConstStyle, Formula, FormulaKind, LogicId};
use crate::rational::{rat, Rational};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScaledError {
    #[error("logic {0:?} has no rational constants for the scaled connectives")]
    UnsupportedLogic(LogicId),
    #[error("scaled multiplication requires k >= 8, got {0}")]
    ScaleTooSmall(BigUint),
    #[error("expansion exceeds the cap of {0} strong-sum steps")]
    ExpansionTooLarge(u64),
}

/// Constant flavor a logic can express: truth constants for the RPL family,
/// underline constructions for the LPi1/2 family.
pub fn style_for(logic: LogicId) -> Result<ConstStyle, ScaledError> {
    match logic {
        LogicId::Rpl | LogicId::RplProd => Ok(ConstStyle::TruthConst),
        LogicId::LPiHalf | LogicId::LPiHalfImpPMinus | LogicId::LPiHalfProdMinusImpPMinus => {
            Ok(ConstStyle::Underline)
        }
        LogicId::Luk | LogicId::LukNoZero => Err(ScaledError::UnsupportedLogic(logic)),
    }
}

/// The constant `r` (in [0,1]) in the given flavor.
pub(crate) fn styled_const(r: &Rational, style: ConstStyle) -> Formula {
    match style {
        ConstStyle::TruthConst => Formula::truth_const_unit(r.clone()),
        ConstStyle::Underline => underline(r).expect("constant lies in [0,1]"),
    }
}

/// n-fold strong disjunction of `phi` with itself; evaluates to
/// `min(1, n * v(phi))` for every valuation, no preconditions.
pub fn iter_strong_sum(n: BigUint, phi: &Formula) -> Formula {
    Formula::strong_sum(n, phi)
}

pub(crate) fn scaled_add_styled(a: &Formula, b: &Formula, style: ConstStyle) -> Formula {
    let quarter = styled_const(&rat(1, 4), style);
    a.ominus(&quarter).oplus(&b.ominus(&quarter))
}

/// `(+)~`: whenever the operands carry `scale_k(l)` and `scale_k(l')` with
/// `l, l'` in [-k/2, k/2], the value is `scale_k(l + l')`.
pub fn scaled_add(a: &Formula, b: &Formula, logic: LogicId) -> Result<Formula, ScaledError> {
    Ok(scaled_add_styled(a, b, style_for(logic)?))
}

/// n-fold scaled sum: whenever the operand carries `scale_k(l)` with `l` in
/// [-k/2^j, k/2^j] (`j` smallest with `n <= 2^j`), the value is
/// `scale_k(n * l)`. For `n = 1` this is `phi` itself by definition.
pub fn iter_scaled_sum(n: BigUint, phi: &Formula, logic: LogicId) -> Result<Formula, ScaledError> {
    let style = style_for(logic)?;
    Ok(iter_scaled_sum_styled(n, phi, style))
}

pub(crate) fn iter_scaled_sum_styled(n: BigUint, phi: &Formula, style: ConstStyle) -> Formula {
    if n.is_one() {
        phi.clone()
    } else {
        Formula::scaled_sum(n, phi, style)
    }
}

pub(crate) fn scaled_mul_styled(
    k: &BigUint,
    a: &Formula,
    b: &Formula,
    style: ConstStyle,
) -> Result<Formula, ScaledError> {
    if *k < BigUint::from(8u32) {
        return Err(ScaledError::ScaleTooSmall(k.clone()));
    }
    let inv_2k = Rational::new(BigInt::one(), BigInt::from(k * 2u32));
    let left = iter_strong_sum(2u32.into(), &a.prod(b)).oplus(&styled_const(&inv_2k, style));
    let right = scaled_add_styled(a, b, style);
    Ok(iter_strong_sum(k.clone(), &left.ominus(&right)))
}

/// `(.)^k` for integer `k >= 8`: whenever the operands carry `scale_k(l)` and
/// `scale_k(l')` with `l^2 <= k` and `l'^2 <= k`, the value is
/// `scale_k(l * l')`.
pub fn scaled_mul(
    k: &BigUint,
    a: &Formula,
    b: &Formula,
    logic: LogicId,
) -> Result<Formula, ScaledError> {
    scaled_mul_styled(k, a, b, style_for(logic)?)
}

fn scaled_sum_expand(
    n: &BigUint,
    body: &Formula,
    style: ConstStyle,
    memo: &mut HashMap<BigUint, Formula>,
) -> Formula {
    if n.is_zero() {
        return styled_const(&rat(1, 2), style);
    }
    if n.is_one() {
        return body.clone();
    }
    if let Some(f) = memo.get(n) {
        return f.clone();
    }
    let high = crate::formula::scaled_sum_split(n);
    let rest = n - &high;
    let left = scaled_sum_expand(&high, body, style, memo);
    let right = scaled_sum_expand(&rest, body, style, memo);
    let f = scaled_add_styled(&left, &right, style);
    memo.insert(n.clone(), f.clone());
    f
}

/// Replaces every `SSUM`/`SCSUM` node by its definitional expansion over the
/// primitive connectives. A strong sum unfolds into `n` steps, so `n` is
/// capped; the scaled sum splits along powers of two and shares its pieces.
pub fn expand_abbreviations(phi: &Formula, strong_sum_cap: u64) -> Result<Formula, ScaledError> {
    fn go(
        phi: &Formula,
        cap: u64,
        memo: &mut HashMap<u64, Formula>,
    ) -> Result<Formula, ScaledError> {
        if let Some(f) = memo.get(&phi.id()) {
            return Ok(f.clone());
        }
        let out = match phi.kind() {
            FormulaKind::Zero
            | FormulaKind::Half
            | FormulaKind::TruthConst(_)
            | FormulaKind::Prop(_) => phi.clone(),
            FormulaKind::ImpL(a, b) => go(a, cap, memo)?.imp_l(&go(b, cap, memo)?),
            FormulaKind::Prod(a, b) => go(a, cap, memo)?.prod(&go(b, cap, memo)?),
            FormulaKind::ImpP(a, b) => go(a, cap, memo)?.imp_p(&go(b, cap, memo)?),
            FormulaKind::IterStrongSum(n, b) => {
                let steps: u64 = n
                    .try_into()
                    .map_err(|_| ScaledError::ExpansionTooLarge(cap))?;
                if steps > cap {
                    return Err(ScaledError::ExpansionTooLarge(cap));
                }
                if steps == 0 {
                    Formula::zero()
                } else {
                    let body = go(b, cap, memo)?;
                    let mut acc = Formula::zero();
                    for _ in 0..steps {
                        acc = acc.oplus(&body);
                    }
                    acc
                }
            }
            FormulaKind::IterScaledSum(n, b, style) => {
                if n.is_zero() {
                    styled_const(&rat(1, 2), *style)
                } else {
                    let body = go(b, cap, memo)?;
                    scaled_sum_expand(n, &body, *style, &mut HashMap::new())
                }
            }
        };
        memo.insert(phi.id(), out.clone());
        Ok(out)
    }
    go(phi, strong_sum_cap, &mut HashMap::new())
}

/// Node count of the fully expanded logical tree (shared subformulas counted
/// once per occurrence). Guards `--expand` output against blowup.
pub fn logical_size(phi: &Formula) -> BigUint {
    fn quarter_size(style: ConstStyle) -> BigUint {
        match style {
            ConstStyle::TruthConst => BigUint::one(),
            // underline(1/4) = (half (.) half)
            ConstStyle::Underline => BigUint::from(3u32),
        }
    }
    fn scsum_size(
        n: &BigUint,
        body_size: &BigUint,
        style: ConstStyle,
        memo: &mut HashMap<BigUint, BigUint>,
    ) -> BigUint {
        if n.is_zero() {
            return BigUint::one();
        }
        if n.is_one() {
            return body_size.clone();
        }
        if let Some(s) = memo.get(n) {
            return s.clone();
        }
        let high = crate::formula::scaled_sum_split(n);
        let rest = n - &high;
        let left = scsum_size(&high, body_size, style, memo);
        let right = scsum_size(&rest, body_size, style, memo);
        // (+)~ adds two (-) wrappers of 7 nodes each around the quarter
        // constants plus a 3-node (+).
        let s = left + right + BigUint::from(2u32) * quarter_size(style) + BigUint::from(17u32);
        memo.insert(n.clone(), s.clone());
        s
    }
    fn go(phi: &Formula, memo: &mut HashMap<u64, BigUint>) -> BigUint {
        if let Some(s) = memo.get(&phi.id()) {
            return s.clone();
        }
        let s = match phi.kind() {
            FormulaKind::Zero
            | FormulaKind::Half
            | FormulaKind::TruthConst(_)
            | FormulaKind::Prop(_) => BigUint::one(),
            FormulaKind::ImpL(a, b) | FormulaKind::Prod(a, b) | FormulaKind::ImpP(a, b) => {
                BigUint::one() + go(a, memo) + go(b, memo)
            }
            FormulaKind::IterStrongSum(n, b) => {
                if n.is_zero() {
                    BigUint::one()
                } else {
                    // Each strong-sum step wraps the accumulator in a 3-node
                    // (+) with the body.
                    BigUint::one() + n * (go(b, memo) + BigUint::from(3u32))
                }
            }
            FormulaKind::IterScaledSum(n, b, style) => {
                let body = go(b, memo);
                scsum_size(n, &body, *style, &mut HashMap::new())
            }
        };
        memo.insert(phi.id(), s.clone());
        s
    }
    go(phi, &mut HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{classify, eval_formula, Valuation};
    use crate::rational::int;

    fn scale(k: i64, x: Rational) -> Rational {
        (int(k) + x) / int(2 * k)
    }

    fn val(pairs: &[(u32, Rational)]) -> Valuation {
        Valuation::from_pairs(pairs.iter().cloned()).unwrap()
    }

    #[test]
    fn strong_sum_examples() {
        let p = Formula::prop(0);
        let v = val(&[(0, rat(2, 5))]);
        assert_eq!(
            eval_formula(&iter_strong_sum(0u32.into(), &p), &v).unwrap(),
            int(0)
        );
        assert_eq!(
            eval_formula(&iter_strong_sum(2u32.into(), &p), &v).unwrap(),
            rat(4, 5)
        );
        let v = val(&[(0, rat(1, 2))]);
        assert_eq!(
            eval_formula(&iter_strong_sum(3u32.into(), &p), &v).unwrap(),
            int(1)
        );
    }

    #[test]
    fn scaled_add_simulates_addition_in_range() {
        // k = 8, l = 2, l' = -1.
        let p = Formula::prop(0);
        let q = Formula::prop(1);
        let f = scaled_add(&p, &q, LogicId::RplProd).unwrap();
        let v = val(&[(0, scale(8, int(2))), (1, scale(8, int(-1)))]);
        assert_eq!(eval_formula(&f, &v).unwrap(), rat(9, 16));
        assert_eq!(rat(9, 16), scale(8, int(1)));

        let v = val(&[(0, rat(1, 2)), (1, rat(1, 2))]);
        assert_eq!(eval_formula(&f, &v).unwrap(), rat(1, 2));

        // Outside the precondition the raw semantics clamps to 0.
        let v = val(&[(0, int(0)), (1, int(0))]);
        assert_eq!(eval_formula(&f, &v).unwrap(), int(0));
    }

    #[test]
    fn naive_shifted_sum_is_not_a_substitute_for_scaled_add() {
        // (a (+) b) (-) 1/2 agrees with (+)~ for nonpositive offsets but
        // fails for l = l' = 1 at k = 8, where saturation hits first.
        let p = Formula::prop(0);
        let q = Formula::prop(1);
        let naive = p
            .oplus(&q)
            .ominus(&Formula::truth_const(rat(1, 2)).unwrap());
        let good = scaled_add(&p, &q, LogicId::RplProd).unwrap();
        let v = val(&[(0, scale(8, int(1))), (1, scale(8, int(1)))]);
        let expected = scale(8, int(2));
        assert_eq!(eval_formula(&good, &v).unwrap(), expected);
        assert_eq!(eval_formula(&naive, &v).unwrap(), rat(1, 2));
        assert_ne!(rat(1, 2), expected);
    }

    #[test]
    fn iter_scaled_sum_examples() {
        let p = Formula::prop(0);
        let zero_fold = iter_scaled_sum(0u32.into(), &p, LogicId::RplProd).unwrap();
        let v = val(&[(0, rat(9, 10))]);
        assert_eq!(eval_formula(&zero_fold, &v).unwrap(), rat(1, 2));

        let one_fold = iter_scaled_sum(1u32.into(), &p, LogicId::RplProd).unwrap();
        assert_eq!(one_fold, p);

        // n = 3, k = 8, l = 1: scale_8(1) = 9/16 maps to scale_8(3) = 11/16.
        let three = iter_scaled_sum(3u32.into(), &p, LogicId::RplProd).unwrap();
        let v = val(&[(0, scale(8, int(1)))]);
        assert_eq!(eval_formula(&three, &v).unwrap(), rat(11, 16));
    }

    #[test]
    fn scaled_mul_golden_values() {
        let p = Formula::prop(0);
        let q = Formula::prop(1);

        let f = scaled_mul(&8u32.into(), &p, &q, LogicId::RplProd).unwrap();
        let v = val(&[(0, scale(8, int(2))), (1, scale(8, int(-1)))]);
        assert_eq!(eval_formula(&f, &v).unwrap(), rat(3, 8));
        assert_eq!(rat(3, 8), scale(8, int(-2)));

        let v = val(&[(0, scale(8, int(2))), (1, rat(1, 2))]);
        assert_eq!(eval_formula(&f, &v).unwrap(), rat(1, 2));

        // Boundary case l = l' = sqrt(k) at k = 9.
        let f = scaled_mul(&9u32.into(), &p, &q, LogicId::RplProd).unwrap();
        let v = val(&[(0, rat(2, 3)), (1, rat(2, 3))]);
        assert_eq!(rat(2, 3), scale(9, int(3)));
        assert_eq!(eval_formula(&f, &v).unwrap(), int(1));

        assert!(matches!(
            scaled_mul(&7u32.into(), &p, &q, LogicId::RplProd),
            Err(ScaledError::ScaleTooSmall(_))
        ));
    }

    #[test]
    fn plain_lukasiewicz_has_no_scaled_connectives() {
        let p = Formula::prop(0);
        assert!(scaled_add(&p, &p, LogicId::Luk).is_err());
        assert!(iter_scaled_sum(2u32.into(), &p, LogicId::LukNoZero).is_err());
    }

    #[test]
    fn expansion_matches_node_evaluation() {
        let p = Formula::prop(0);
        for style in [ConstStyle::TruthConst, ConstStyle::Underline] {
            for n in [0u32, 1, 2, 3, 5, 8, 13, 32] {
                let node_s = Formula::strong_sum(n.into(), &p);
                let node_c = Formula::scaled_sum(n.into(), &p, style);
                for num in 0..=8i64 {
                    let v = val(&[(0, rat(num, 8))]);
                    for node in [&node_s, &node_c] {
                        let expanded = expand_abbreviations(node, 1 << 20).unwrap();
                        assert_eq!(
                            eval_formula(node, &v).unwrap(),
                            eval_formula(&expanded, &v).unwrap(),
                            "n={n} value={num}/8"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn logical_size_agrees_with_literal_expansion() {
        let p = Formula::prop(0);
        for style in [ConstStyle::TruthConst, ConstStyle::Underline] {
            for n in [0u32, 1, 2, 3, 4, 7, 12] {
                for node in [
                    Formula::strong_sum(n.into(), &p),
                    Formula::scaled_sum(n.into(), &p, style),
                ] {
                    let expanded = expand_abbreviations(&node, 1 << 20).unwrap();
                    assert_eq!(
                        logical_size(&node),
                        logical_size(&expanded),
                        "n={n} style={style:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn fragment_degrees_survive_the_scaled_connectives() {
        let p = Formula::prop(0);
        let q = Formula::prop(1);
        let pq = p.prod(&q);
        let scaled = iter_scaled_sum(5u32.into(), &pq, LogicId::RplProd).unwrap();
        assert_eq!(
            classify(&scaled).min_prod_degree,
            classify(&pq).min_prod_degree
        );
        let product = scaled_mul(&16u32.into(), &p, &pq, LogicId::RplProd).unwrap();
        assert_eq!(classify(&product).min_prod_degree, Some(3));
    }

    use crate::rational::rat;
}
