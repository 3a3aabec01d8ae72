//! Parser for the ASCII formula grammar.
//!
//! ```text
//! formula := imp
//! imp     := addsub (('->L' | '->P' | '<->L') imp)?              right-assoc
//! addsub  := prodlvl (('(+)~' | '(+)' | '(x)' | '(-)' | '/\' | '\/') prodlvl)*
//! prodlvl := unary (('(.)^' NAT | '(.)') unary)*
//! unary   := '~L' unary | atom
//! atom    := 'half' | RATIONAL | 'p' NAT | '(' formula ')'
//!          | 'SSUM' '[' NAT ']' '(' formula ')'
//!          | 'SCSUM' '[' NAT ']' '(' formula ')'
//!          | 'SCSUM_L' '[' NAT ']' '(' formula ')'
//! ```
//!
//! The derived connectives `(+) (x) (-) /\ \/ ~L <->L` and the scaled
//! connectives `(+)~` and `(.)^k` expand at parse time; only `SSUM`/`SCSUM`
//! survive as abbreviation nodes. `SCSUM` emits RPL-style quarter constants,
//! `SCSUM_L` the underline constants of LPi1/2; the parser style argument
//! picks the flavor used by `(+)~` and `(.)^k`.

use super::{ConstStyle, Formula};
use crate::rational::in_unit_interval;
use crate::scaled::{scaled_add_styled, scaled_mul_styled};
use crate::ParseError;
use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Parses with RPL-style constants in the scaled connectives.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_with_style(text, ConstStyle::TruthConst)
}

pub fn parse_formula_with_style(text: &str, style: ConstStyle) -> Result<Formula, ParseError> {
    let mut p = FormulaParser {
        src: text.as_bytes(),
        pos: 0,
        style,
    };
    let phi = p.parse_imp()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("unexpected trailing input");
    }
    Ok(phi)
}

struct FormulaParser<'a> {
    src: &'a [u8],
    pos: usize,
    style: ConstStyle,
}

impl<'a> FormulaParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(self.pos, message))
    }

    /// Matches `tok` at the cursor, consuming it on success.
    fn try_tok(&mut self, tok: &str) -> bool {
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), ParseError> {
        if self.try_tok(tok) {
            Ok(())
        } else {
            self.err(format!("expected '{tok}'"))
        }
    }

    fn parse_nat(&mut self) -> Result<BigUint, ParseError> {
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

    fn parse_imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.parse_addsub()?;
        self.skip_ws();
        if self.try_tok("<->L") {
            let rhs = self.parse_imp()?;
            Ok(lhs.iff_l(&rhs))
        } else if self.try_tok("->L") {
            let rhs = self.parse_imp()?;
            Ok(lhs.imp_l(&rhs))
        } else if self.try_tok("->P") {
            let rhs = self.parse_imp()?;
            Ok(lhs.imp_p(&rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_addsub(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.parse_prod_level()?;
        loop {
            self.skip_ws();
            if self.try_tok("(+)~") {
                let rhs = self.parse_prod_level()?;
                acc = scaled_add_styled(&acc, &rhs, self.style);
            } else if self.try_tok("(+)") {
                let rhs = self.parse_prod_level()?;
                acc = acc.oplus(&rhs);
            } else if self.try_tok("(x)") {
                let rhs = self.parse_prod_level()?;
                acc = acc.otimes(&rhs);
            } else if self.try_tok("(-)") {
                let rhs = self.parse_prod_level()?;
                acc = acc.ominus(&rhs);
            } else if self.try_tok("/\\") {
                let rhs = self.parse_prod_level()?;
                acc = acc.meet(&rhs);
            } else if self.try_tok("\\/") {
                let rhs = self.parse_prod_level()?;
                acc = acc.join(&rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_prod_level(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.parse_unary()?;
        loop {
            self.skip_ws();
            if self.try_tok("(.)^") {
                self.skip_ws();
                let k_offset = self.pos;
                let k = self.parse_nat()?;
                let rhs = self.parse_unary()?;
                acc = scaled_mul_styled(&k, &acc, &rhs, self.style)
                    .map_err(|e| ParseError::new(k_offset, e.to_string()))?;
            } else if self.try_tok("(.)") {
                let rhs = self.parse_unary()?;
                acc = acc.prod(&rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        if self.try_tok("~L") {
            let inner = self.parse_unary()?;
            Ok(inner.neg_l())
        } else {
            self.parse_atom()
        }
    }

    fn keyword_boundary(&self) -> bool {
        match self.peek() {
            Some(b) => !b.is_ascii_alphanumeric() && b != b'_',
            None => true,
        }
    }

    fn parse_iterated(&mut self) -> Result<Formula, ParseError> {
        let style = if self.try_tok("SCSUM_L") {
            Some(ConstStyle::Underline)
        } else if self.try_tok("SCSUM") {
            Some(ConstStyle::TruthConst)
        } else if self.try_tok("SSUM") {
            None
        } else {
            return self.err("expected 'SSUM', 'SCSUM' or 'SCSUM_L'");
        };
        self.skip_ws();
        self.expect("[")?;
        self.skip_ws();
        let n = self.parse_nat()?;
        self.skip_ws();
        self.expect("]")?;
        self.skip_ws();
        self.expect("(")?;
        let body = self.parse_imp()?;
        self.skip_ws();
        self.expect(")")?;
        Ok(match style {
            None => Formula::strong_sum(n, &body),
            Some(s) => Formula::scaled_sum(n, &body, s),
        })
    }

    fn parse_atom(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_imp()?;
                self.skip_ws();
                self.expect(")")?;
                Ok(inner)
            }
            Some(b'h') => {
                if self.try_tok("half") && self.keyword_boundary() {
                    Ok(Formula::half())
                } else {
                    self.err("expected 'half'")
                }
            }
            Some(b'p') => {
                let start = self.pos;
                self.pos += 1;
                if !matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                    self.pos = start;
                    return self.err("expected proposition index after 'p'");
                }
                let digits = self.parse_nat()?;
                let index: u32 = digits
                    .try_into()
                    .map_err(|_| ParseError::new(start + 1, "proposition index too large"))?;
                Ok(Formula::prop(index))
            }
            Some(b'S') => self.parse_iterated(),
            Some(b) if b.is_ascii_digit() => {
                let start = self.pos;
                let numer = self.parse_nat()?;
                let denom = if self.try_tok("/") {
                    let denom_offset = self.pos;
                    let d = self.parse_nat()?;
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
                let value = crate::Rational::new(numer.into(), denom.into());
                if !in_unit_interval(&value) {
                    return Err(ParseError::new(
                        start,
                        format!(
                            "truth constant {} outside [0,1]",
                            crate::rational::format_rational(&value)
                        ),
                    ));
                }
                Ok(Formula::truth_const_unit(value))
            }
            _ => self.err("expected a formula atom"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{eval_formula, FormulaKind, Valuation};
    use crate::rational::rat;

    #[test]
    fn parses_the_running_example() {
        let phi = parse_formula("1/3 ->L (p0 (.) 1/2)").unwrap();
        let expected = Formula::truth_const(rat(1, 3))
            .unwrap()
            .imp_l(&Formula::prop(0).prod(&Formula::truth_const(rat(1, 2)).unwrap()));
        assert_eq!(phi, expected);
    }

    #[test]
    fn negation_desugars_to_implication_into_zero() {
        let phi = parse_formula("~L p0").unwrap();
        assert_eq!(phi, Formula::prop(0).imp_l(&Formula::zero()));
    }

    #[test]
    fn constants_outside_the_unit_interval_are_rejected() {
        let e = parse_formula("3/2").unwrap_err();
        assert!(e.message.contains("outside [0,1]"));
        assert!(parse_formula("1/0").is_err());
    }

    #[test]
    fn implication_is_right_associative_and_binds_loosest() {
        let phi = parse_formula("p0 ->L p1 ->L p2").unwrap();
        let expected = Formula::prop(0).imp_l(&Formula::prop(1).imp_l(&Formula::prop(2)));
        assert_eq!(phi, expected);

        let phi = parse_formula("p0 (.) p1 ->L p2 (+) p3").unwrap();
        let expected = Formula::prop(0)
            .prod(&Formula::prop(1))
            .imp_l(&Formula::prop(2).oplus(&Formula::prop(3)));
        assert_eq!(phi, expected);
    }

    #[test]
    fn iterated_nodes_parse_with_their_flavor() {
        let s = parse_formula("SSUM[17](p0)").unwrap();
        assert!(matches!(s.kind(), FormulaKind::IterStrongSum(n, _) if *n == 17u32.into()));
        let c = parse_formula("SCSUM[3](p0)").unwrap();
        assert!(matches!(
            c.kind(),
            FormulaKind::IterScaledSum(_, _, ConstStyle::TruthConst)
        ));
        let c = parse_formula("SCSUM_L[3](p0)").unwrap();
        assert!(matches!(
            c.kind(),
            FormulaKind::IterScaledSum(_, _, ConstStyle::Underline)
        ));
    }

    #[test]
    fn display_round_trips_structurally() {
        for text in [
            "1/3 ->L (p0 (.) 1/2)",
            "~L p0",
            "p0 (+) p1 (-) 1/4",
            "p0 (x) (p1 \\/ half)",
            "SSUM[5](p0 (+) half)",
            "SCSUM[9](p0)",
            "SCSUM_L[9](p0)",
            "p0 <->L p1",
            "(half (.) half) ->P half",
            "0 ->L p2",
            "p0 (+)~ p1",
            "p0 (.)^8 p1",
        ] {
            let phi = parse_formula(text).unwrap();
            let printed = phi.to_string();
            let back = parse_formula(&printed).unwrap();
            assert_eq!(phi, back, "round-trip failed for '{text}' -> '{printed}'");
        }
    }

    #[test]
    fn half_keyword_evaluates_to_one_half() {
        let phi = parse_formula("half (.) half").unwrap();
        assert_eq!(
            eval_formula(&phi, &Valuation::empty()).unwrap(),
            rat(1, 4)
        );
    }
}
