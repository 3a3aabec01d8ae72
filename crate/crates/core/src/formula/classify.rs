//! Syntactic classification: which logics admit a formula, and where it sits
//! in the hierarchy that counts proposition symbols nested under the product
//! conjunction.

use super::{Formula, FormulaKind};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};

/// The grammars handled by this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LogicId {
    /// Łukasiewicz logic: 0, propositions, ->L.
    #[serde(rename = "luk")]
    Luk,
    /// Łukasiewicz logic without the truth constant 0.
    #[serde(rename = "luknozero")]
    LukNoZero,
    /// Rational Pavelka Logic: adds a truth constant for every rational in [0,1].
    #[serde(rename = "rpl")]
    Rpl,
    /// RPL extended with the product conjunction.
    #[serde(rename = "rplprod")]
    RplProd,
    /// Łukasiewicz logic with product conjunction, product implication and 1/2.
    #[serde(rename = "lpihalf")]
    LPiHalf,
    /// LPi1/2 with no propositions in the scope of ->P.
    #[serde(rename = "lpihalf-impp-")]
    LPiHalfImpPMinus,
    /// LPi1/2 with no propositions in the scope of ->P or of the product.
    #[serde(rename = "lpihalf-prod-impp-")]
    LPiHalfProdMinusImpPMinus,
}

impl LogicId {
    pub const ALL: [LogicId; 7] = [
        LogicId::Luk,
        LogicId::LukNoZero,
        LogicId::Rpl,
        LogicId::RplProd,
        LogicId::LPiHalf,
        LogicId::LPiHalfImpPMinus,
        LogicId::LPiHalfProdMinusImpPMinus,
    ];
}

/// Result of [`classify`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FragmentInfo {
    /// Every grammar that generates the formula.
    pub logic_memberships: BTreeSet<LogicId>,
    /// No proposition symbol occurs (iterated connectives with count 0 hide
    /// their body).
    pub prop_free: bool,
    /// Minimal `n` with the formula in the hierarchy level `<= n`; `None`
    /// when a proposition occurs under `->P`, which the hierarchy does not
    /// grade.
    pub min_prod_degree: Option<u64>,
    /// Every `->P` has proposition-free operands.
    pub impp_scopes_prop_free: bool,
    /// Every product conjunction has proposition-free operands.
    pub prod_scopes_prop_free: bool,
}

#[derive(Clone)]
struct Facts {
    has_prop: bool,
    uses_zero: bool,
    uses_half: bool,
    uses_truth_const: bool,
    uses_prod: bool,
    uses_impp: bool,
    prop_under_impp: bool,
    prop_under_prod: bool,
    // None when a proposition occurs under ->P.
    min_prod_degree: Option<u64>,
}

impl Facts {
    fn constant() -> Facts {
        Facts {
            has_prop: false,
            uses_zero: false,
            uses_half: false,
            uses_truth_const: false,
            uses_prod: false,
            uses_impp: false,
            prop_under_impp: false,
            prop_under_prod: false,
            min_prod_degree: Some(0),
        }
    }

    fn merge(a: &Facts, b: &Facts) -> Facts {
        Facts {
            has_prop: a.has_prop || b.has_prop,
            uses_zero: a.uses_zero || b.uses_zero,
            uses_half: a.uses_half || b.uses_half,
            uses_truth_const: a.uses_truth_const || b.uses_truth_const,
            uses_prod: a.uses_prod || b.uses_prod,
            uses_impp: a.uses_impp || b.uses_impp,
            prop_under_impp: a.prop_under_impp || b.prop_under_impp,
            prop_under_prod: a.prop_under_prod || b.prop_under_prod,
            min_prod_degree: Some(0), // callers overwrite
        }
    }
}

fn opt_max(a: Option<u64>, b: Option<u64>) -> Option<u64> {
    Some(a?.max(b?))
}

fn opt_sum(a: Option<u64>, b: Option<u64>) -> Option<u64> {
    Some(a?.saturating_add(b?))
}

fn facts(phi: &Formula, memo: &mut HashMap<u64, Facts>) -> Facts {
    if let Some(f) = memo.get(&phi.id()) {
        return f.clone();
    }
    let out = match phi.kind() {
        FormulaKind::Zero => Facts {
            uses_zero: true,
            ..Facts::constant()
        },
        FormulaKind::Half => Facts {
            uses_half: true,
            ..Facts::constant()
        },
        FormulaKind::TruthConst(_) => Facts {
            uses_truth_const: true,
            ..Facts::constant()
        },
        FormulaKind::Prop(_) => Facts {
            has_prop: true,
            min_prod_degree: Some(1),
            ..Facts::constant()
        },
        FormulaKind::ImpL(a, b) => {
            let fa = facts(a, memo);
            let fb = facts(b, memo);
            let degree = opt_max(fa.min_prod_degree, fb.min_prod_degree);
            Facts {
                min_prod_degree: degree,
                ..Facts::merge(&fa, &fb)
            }
        }
        FormulaKind::Prod(a, b) => {
            let fa = facts(a, memo);
            let fb = facts(b, memo);
            let degree = opt_sum(fa.min_prod_degree, fb.min_prod_degree);
            Facts {
                uses_prod: true,
                prop_under_prod: fa.prop_under_prod
                    || fb.prop_under_prod
                    || fa.has_prop
                    || fb.has_prop,
                min_prod_degree: degree,
                ..Facts::merge(&fa, &fb)
            }
        }
        FormulaKind::ImpP(a, b) => {
            let fa = facts(a, memo);
            let fb = facts(b, memo);
            let scoped_prop = fa.has_prop || fb.has_prop;
            Facts {
                uses_impp: true,
                prop_under_impp: fa.prop_under_impp || fb.prop_under_impp || scoped_prop,
                min_prod_degree: if scoped_prop {
                    None
                } else {
                    opt_max(fa.min_prod_degree, fb.min_prod_degree)
                },
                ..Facts::merge(&fa, &fb)
            }
        }
        // The iterated connectives are definitional abbreviations; their
        // facts are those of the expansion. Count 0 is a bare constant,
        // count 1 is the body itself.
        FormulaKind::IterStrongSum(n, b) => {
            if n == &0u32.into() {
                Facts {
                    uses_zero: true,
                    ..Facts::constant()
                }
            } else {
                let fb = facts(b, memo);
                Facts {
                    uses_zero: true,
                    min_prod_degree: fb.min_prod_degree,
                    ..fb
                }
            }
        }
        FormulaKind::IterScaledSum(n, b, style) => {
            let quarter_facts = match style {
                super::ConstStyle::TruthConst => Facts {
                    uses_truth_const: true,
                    ..Facts::constant()
                },
                super::ConstStyle::Underline => Facts {
                    uses_half: true,
                    uses_prod: true,
                    ..Facts::constant()
                },
            };
            if n == &0u32.into() {
                quarter_facts
            } else if n == &1u32.into() {
                facts(b, memo)
            } else {
                let fb = facts(b, memo);
                let merged = Facts::merge(&fb, &quarter_facts);
                Facts {
                    uses_zero: true,
                    min_prod_degree: fb.min_prod_degree,
                    ..merged
                }
            }
        }
    };
    memo.insert(phi.id(), out.clone());
    out
}

/// Grammar memberships and hierarchy position of `phi`.
pub fn classify(phi: &Formula) -> FragmentInfo {
    let f = facts(phi, &mut HashMap::new());
    let mut memberships = BTreeSet::new();
    let luk = !f.uses_truth_const && !f.uses_half && !f.uses_prod && !f.uses_impp;
    if luk {
        memberships.insert(LogicId::Luk);
        if !f.uses_zero {
            memberships.insert(LogicId::LukNoZero);
        }
    }
    if !f.uses_prod && !f.uses_impp {
        memberships.insert(LogicId::Rpl);
    }
    if !f.uses_impp {
        memberships.insert(LogicId::RplProd);
    }
    if !f.uses_truth_const {
        memberships.insert(LogicId::LPiHalf);
        if !f.prop_under_impp {
            memberships.insert(LogicId::LPiHalfImpPMinus);
            if !f.prop_under_prod {
                memberships.insert(LogicId::LPiHalfProdMinusImpPMinus);
            }
        }
    }
    let min_prod_degree = if f.has_prop { f.min_prod_degree } else { Some(0) };
    FragmentInfo {
        logic_memberships: memberships,
        prop_free: !f.has_prop,
        min_prod_degree,
        impp_scopes_prop_free: !f.prop_under_impp,
        prod_scopes_prop_free: !f.prop_under_prod,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn product_of_propositions_has_degree_two() {
        let phi = parse_formula("p0 (.) p1").unwrap();
        let info = classify(&phi);
        assert_eq!(info.min_prod_degree, Some(2));
        assert!(info.logic_memberships.contains(&LogicId::RplProd));
        assert!(!info.logic_memberships.contains(&LogicId::Rpl));
        assert!(!info.prod_scopes_prop_free);
    }

    #[test]
    fn figure_three_formula_sits_at_level_one() {
        let phi = parse_formula("1/3 ->L (p0 (.) 1/2)").unwrap();
        let info = classify(&phi);
        assert_eq!(info.min_prod_degree, Some(1));
        assert!(info.logic_memberships.contains(&LogicId::RplProd));
        assert!(!info.logic_memberships.contains(&LogicId::LPiHalf));
    }

    #[test]
    fn prop_free_lpi_formula_is_level_zero() {
        let phi = parse_formula("(half (.) half) ->P half").unwrap();
        let info = classify(&phi);
        assert!(info.prop_free);
        assert_eq!(info.min_prod_degree, Some(0));
        assert!(info
            .logic_memberships
            .contains(&LogicId::LPiHalfProdMinusImpPMinus));
        assert!(!info.logic_memberships.contains(&LogicId::RplProd));
    }

    #[test]
    fn zero_free_lukasiewicz_formula() {
        let phi = parse_formula("(p0 ->L p1) ->L p0").unwrap();
        let info = classify(&phi);
        assert!(info.logic_memberships.contains(&LogicId::LukNoZero));
        assert!(info.logic_memberships.contains(&LogicId::Luk));
        assert_eq!(info.min_prod_degree, Some(1));
    }

    #[test]
    fn negation_introduces_the_zero_constant() {
        let phi = parse_formula("~L p0").unwrap();
        let info = classify(&phi);
        assert!(info.logic_memberships.contains(&LogicId::Luk));
        assert!(!info.logic_memberships.contains(&LogicId::LukNoZero));
    }

    #[test]
    fn prop_under_impp_is_ungraded() {
        let phi = parse_formula("p0 ->P half").unwrap();
        let info = classify(&phi);
        assert_eq!(info.min_prod_degree, None);
        assert!(!info.impp_scopes_prop_free);
        assert!(info.logic_memberships.contains(&LogicId::LPiHalf));
        assert!(!info.logic_memberships.contains(&LogicId::LPiHalfImpPMinus));
    }

    #[test]
    fn hierarchy_levels_are_monotone_under_imp_l() {
        let level2 = parse_formula("p0 (.) p1").unwrap();
        let level1 = parse_formula("p2").unwrap();
        let combined = level2.imp_l(&level1);
        assert_eq!(classify(&combined).min_prod_degree, Some(2));
    }
}
