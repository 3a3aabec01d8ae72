//! Proposition-free definitions of the rational truth constants.
//!
//! RPL carries a truth constant for every rational in [0,1] directly; LPi1/2
//! only has 0 and 1/2 and builds the rest. The construction here follows the
//! recursive scheme: dyadic fractions come from halving products and strong
//! sums, everything else from one product implication between two dyadics.

use super::{Formula, FormulaError, LogicId};
use crate::rational::{in_unit_interval, format_rational, Rational};
use num_bigint::BigUint;
use num_traits::One;

fn is_power_of_two(n: &BigUint) -> bool {
    n.count_ones() == 1
}

/// Smallest `m` with `n < 2^m`, for `n >= 1`.
fn bits_needed(n: &BigUint) -> u64 {
    n.bits()
}

/// `1/2^j` for `j >= 1`.
fn underline_half_power(j: u64) -> Formula {
    if j == 1 {
        Formula::half()
    } else {
        underline_half_power(j - 1).prod(&Formula::half())
    }
}

/// `a/2^j` in lowest terms (`a` odd, `1 <= a < 2^j`).
fn underline_dyadic(a: &BigUint, j: u64) -> Formula {
    if a.is_one() {
        underline_half_power(j)
    } else {
        // a odd and > 1: peel off 1/2^j and recurse on the reduced (a-1)/2^j.
        let prev = Rational::new((a - BigUint::one()).into(), (BigUint::one() << j).into());
        underline_rational(&prev).oplus(&underline_half_power(j))
    }
}

fn underline_rational(r: &Rational) -> Formula {
    debug_assert!(in_unit_interval(r));
    if r == &Rational::from_integer(0.into()) {
        return Formula::zero();
    }
    if r == &Rational::one() {
        return Formula::zero().neg_l();
    }
    let numer = r.numer().magnitude().clone();
    let denom = r.denom().magnitude().clone();
    if is_power_of_two(&denom) {
        underline_dyadic(&numer, denom.bits() - 1)
    } else {
        let m = bits_needed(&numer).max(bits_needed(&denom));
        let pow = BigUint::one() << m;
        let left = Rational::new(denom.into(), pow.clone().into());
        let right = Rational::new(numer.into(), pow.into());
        underline_rational(&left).imp_p(&underline_rational(&right))
    }
}

/// Proposition-free LPi1/2 formula whose value is exactly `r`, for any
/// rational `r` in [0,1].
pub fn underline(r: &Rational) -> Result<Formula, FormulaError> {
    if !in_unit_interval(r) {
        return Err(FormulaError::ConstantOutOfRange(format_rational(r)));
    }
    Ok(underline_rational(r))
}

/// The constant `r` in the requested logic: a truth-constant node for the
/// RPL family, the underline construction for the LPi1/2 family. Plain
/// Łukasiewicz logic has no rational constants.
pub fn rational_constant(r: &Rational, logic: LogicId) -> Result<Formula, FormulaError> {
    match logic {
        LogicId::Rpl | LogicId::RplProd => Formula::truth_const(r.clone()),
        LogicId::LPiHalf | LogicId::LPiHalfImpPMinus | LogicId::LPiHalfProdMinusImpPMinus => {
            underline(r)
        }
        LogicId::Luk | LogicId::LukNoZero => Err(FormulaError::UnsupportedConstant(
            logic,
            format_rational(r),
        )),
    }
}
