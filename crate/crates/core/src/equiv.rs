//! The scaling bijection and the three exact equivalence oracles.
//!
//! Every check compares exact rationals on a finite list of assignments and
//! reports the first mismatch in grid order; there is no tolerance anywhere.
//! A passing report certifies equality on the sampled points only.

use crate::formula::{eval_formula, EvalError as FormulaEvalError, Formula, Valuation, ValuationError};
use crate::rational::{format_rational, in_unit_interval, rat, Rational};
use crate::term::{eval_term, EvalError as TermEvalError, EvaluationMap, TermRef};
use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("scale requires k > 0")]
    NonPositiveScale,
    #[error("(i,k)-equivalence requires 0 < i <= k")]
    BadIkBounds,
    #[error("k-equivalence requires k >= 1")]
    BadKBound,
    #[error("grid needs a nonempty list of values")]
    EmptyValues,
    #[error("grid would contain {points} points, over the cap of {cap}")]
    GridTooLarge { points: BigUint, cap: u64 },
    #[error("grid value {0} outside the range required by this check")]
    ValueOutOfRange(String),
    #[error(transparent)]
    Term(#[from] TermEvalError),
    #[error(transparent)]
    Formula(#[from] FormulaEvalError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
}

/// `scale_k(x) = (k + x) / 2k`, the increasing bijection taking [-k,k] onto
/// [0,1].
pub fn scale(k: &Rational, x: &Rational) -> Result<Rational, EquivError> {
    if !k.is_positive() {
        return Err(EquivError::NonPositiveScale);
    }
    Ok((k + x) / (k * rat(2, 1)))
}

/// Inverse of [`scale`]: `2k*y - k`.
pub fn unscale(k: &Rational, y: &Rational) -> Result<Rational, EquivError> {
    if !k.is_positive() {
        return Err(EquivError::NonPositiveScale);
    }
    Ok(k * rat(2, 1) * y - k)
}

/// One sample point: a finite map from indices to rationals, read as an
/// evaluation map on variables or as a valuation on propositions under the
/// index bijection `p_i <-> x_i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<u32, Rational>);

impl Assignment {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, Rational)>) -> Self {
        Assignment(pairs.into_iter().collect())
    }

    pub fn get(&self, index: u32) -> Option<&Rational> {
        self.0.get(&index)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&u32, &Rational)> {
        self.0.iter()
    }

    pub fn to_evaluation_map(&self) -> EvaluationMap {
        EvaluationMap::from_pairs(self.0.iter().map(|(k, v)| (*k, v.clone())))
    }

    pub fn to_valuation(&self) -> Result<Valuation, ValuationError> {
        Valuation::from_pairs(self.0.iter().map(|(k, v)| (*k, v.clone())))
    }

    fn rendered(&self, prefix: char) -> BTreeMap<String, String> {
        self.0
            .iter()
            .map(|(k, v)| (format!("{prefix}{k}"), format_rational(v)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckMode {
    #[serde(rename = "plain")]
    Plain,
    #[serde(rename = "ik")]
    Ik,
    #[serde(rename = "k01")]
    K01,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub assignment: BTreeMap<String, String>,
    pub lhs: String,
    pub rhs: String,
}

/// Outcome of an exact sample check. `passed` holds exactly when no mismatch
/// was found; `points_checked` counts the assignments evaluated before the
/// check stopped (all of them on success).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivReport {
    pub mode: CheckMode,
    #[serde(rename = "points")]
    pub points_checked: u64,
    pub passed: bool,
    #[serde(rename = "witness")]
    pub first_mismatch: Option<Mismatch>,
}

impl EquivReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn run(
        mode: CheckMode,
        grid: &[Assignment],
        prefix: char,
        mut point: impl FnMut(&Assignment) -> Result<(Rational, Rational), EquivError>,
    ) -> Result<EquivReport, EquivError> {
        let mut checked = 0u64;
        for assignment in grid {
            let (lhs, rhs) = point(assignment)?;
            checked += 1;
            if lhs != rhs {
                return Ok(EquivReport {
                    mode,
                    points_checked: checked,
                    passed: false,
                    first_mismatch: Some(Mismatch {
                        assignment: assignment.rendered(prefix),
                        lhs: format_rational(&lhs),
                        rhs: format_rational(&rhs),
                    }),
                });
            }
        }
        Ok(EquivReport {
            mode,
            points_checked: checked,
            passed: true,
            first_mismatch: None,
        })
    }
}

/// Default sample values for checks over [0,1]: the endpoints, the midpoint
/// and the quartiles.
pub fn unit_grid_values() -> Vec<Rational> {
    vec![rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)]
}

/// Default sample values for checks over [-i,i]: endpoints, half-way points
/// and 0 (the ReLU breakpoint).
pub fn symmetric_grid_values(i: &Rational) -> Vec<Rational> {
    vec![
        -i.clone(),
        -(i / rat(2, 1)),
        Rational::zero(),
        i / rat(2, 1),
        i.clone(),
    ]
}

pub const DEFAULT_GRID_CAP: u64 = 100_000;

/// Cartesian product of `values` over `vars`, in deterministic order (the
/// largest variable index cycles fastest). Zero variables yield the single
/// empty assignment.
pub fn make_grid(
    vars: &BTreeSet<u32>,
    values: &[Rational],
    cap: u64,
) -> Result<Vec<Assignment>, EquivError> {
    if values.is_empty() {
        return Err(EquivError::EmptyValues);
    }
    let points = num_traits::pow::pow(BigUint::from(values.len()), vars.len());
    if points > BigUint::from(cap) {
        return Err(EquivError::GridTooLarge { points, cap });
    }
    let vars: Vec<u32> = vars.iter().copied().collect();
    let mut grid = Vec::new();
    let mut counters = vec![0usize; vars.len()];
    loop {
        grid.push(Assignment::from_pairs(
            vars.iter()
                .zip(&counters)
                .map(|(&v, &c)| (v, values[c].clone())),
        ));
        let mut position = vars.len();
        loop {
            if position == 0 {
                return Ok(grid);
            }
            position -= 1;
            counters[position] += 1;
            if counters[position] < values.len() {
                break;
            }
            counters[position] = 0;
        }
    }
}

/// Uniform rational with denominator at most `max_denom` in `[lo, hi]`.
pub fn sample_rational(
    rng: &mut impl Rng,
    lo: &Rational,
    hi: &Rational,
    max_denom: u32,
) -> Rational {
    let denom = rng.gen_range(1..=max_denom.max(1));
    let scaled_lo = (lo * rat(denom as i64, 1)).ceil().to_integer();
    let scaled_hi = (hi * rat(denom as i64, 1)).floor().to_integer();
    if scaled_hi < scaled_lo {
        return lo.clone();
    }
    let numer = rng.gen_bigint_range(&scaled_lo, &(&scaled_hi + 1));
    Rational::new(numer, denom.into())
}

/// `count` pseudo-random assignments over `vars`, reproducible from `seed`.
pub fn sample_assignments(
    vars: &BTreeSet<u32>,
    count: usize,
    lo: &Rational,
    hi: &Rational,
    max_denom: u32,
    seed: u64,
) -> Vec<Assignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            Assignment::from_pairs(
                vars.iter()
                    .map(|&v| (v, sample_rational(&mut rng, lo, hi, max_denom))),
            )
        })
        .collect()
}

/// Plain equivalence: with `E(x_i) = V(p_i)` taken from the assignment, the
/// formula and the term must take the same value. Assignments must lie in
/// [0,1].
pub fn check_plain_equivalence(
    phi: &Formula,
    t: &TermRef,
    grid: &[Assignment],
) -> Result<EquivReport, EquivError> {
    EquivReport::run(CheckMode::Plain, grid, 'p', |assignment| {
        let valuation = assignment.to_valuation()?;
        let env = assignment.to_evaluation_map();
        Ok((
            eval_formula(phi, &valuation)?,
            eval_term(t, &env)?,
        ))
    })
}

/// `(i,k)`-equivalence: for assignments `E` into [-i,i] and the induced
/// valuation `V(p_j) = scale_k(E(x_j))`, the formula's value must equal
/// `scale_k` of the term's value.
pub fn check_ik_equivalence(
    phi: &Formula,
    t: &TermRef,
    i: &Rational,
    k: &Rational,
    grid: &[Assignment],
) -> Result<EquivReport, EquivError> {
    if !i.is_positive() || i > k {
        return Err(EquivError::BadIkBounds);
    }
    EquivReport::run(CheckMode::Ik, grid, 'x', |assignment| {
        let mut scaled = Vec::new();
        for (&index, value) in assignment.entries() {
            if value.abs() > *i {
                return Err(EquivError::ValueOutOfRange(format_rational(value)));
            }
            scaled.push((index, scale(k, value)?));
        }
        let valuation = Valuation::from_pairs(scaled)?;
        let env = assignment.to_evaluation_map();
        Ok((
            eval_formula(phi, &valuation)?,
            scale(k, &eval_term(t, &env)?)?,
        ))
    })
}

/// `k`-equivalence of `psi` to `phi`: for valuations `V` from the grid and
/// `V'(p) = scale_k(V(p))`, the value of `psi` under `V'` must equal
/// `scale_k` of the value of `phi` under `V`. Needs `k >= 1` so that the
/// scaled valuation stays in [0,1].
pub fn check_k_equivalence(
    psi: &Formula,
    phi: &Formula,
    k: &Rational,
    grid: &[Assignment],
) -> Result<EquivReport, EquivError> {
    if *k < Rational::one() {
        return Err(EquivError::BadKBound);
    }
    EquivReport::run(CheckMode::K01, grid, 'p', |assignment| {
        let valuation = assignment.to_valuation()?;
        let mut scaled = Vec::new();
        for (&index, value) in assignment.entries() {
            if !in_unit_interval(value) {
                return Err(EquivError::ValueOutOfRange(format_rational(value)));
            }
            scaled.push((index, scale(k, value)?));
        }
        let scaled_valuation = Valuation::from_pairs(scaled)?;
        Ok((
            eval_formula(psi, &scaled_valuation)?,
            scale(k, &eval_formula(phi, &valuation)?)?,
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::rational::int;
    use crate::term::parse_term;

    #[test]
    fn scale_hits_the_three_anchor_points() {
        let k = int(8);
        assert_eq!(scale(&k, &int(-8)).unwrap(), int(0));
        assert_eq!(scale(&k, &int(0)).unwrap(), rat(1, 2));
        assert_eq!(scale(&k, &int(8)).unwrap(), int(1));
        assert_eq!(scale(&int(3), &int(1)).unwrap(), rat(2, 3));
        assert!(scale(&int(0), &int(1)).is_err());
        assert!(scale(&int(-2), &int(1)).is_err());
    }

    #[test]
    fn scale_and_unscale_invert_each_other() {
        let k = rat(7, 3);
        for x in [int(-2), rat(5, 9), int(0), rat(-13, 6)] {
            let y = scale(&k, &x).unwrap();
            assert_eq!(unscale(&k, &y).unwrap(), x);
            let back = scale(&k, &unscale(&k, &y).unwrap()).unwrap();
            assert_eq!(back, y);
        }
    }

    #[test]
    fn grid_sizes() {
        let vars: BTreeSet<u32> = [0, 1].into_iter().collect();
        let grid = make_grid(&vars, &[int(0), rat(1, 2), int(1)], 100).unwrap();
        assert_eq!(grid.len(), 9);
        let empty: BTreeSet<u32> = BTreeSet::new();
        assert_eq!(make_grid(&empty, &[int(0)], 100).unwrap().len(), 1);
        let three: BTreeSet<u32> = [0, 1, 2].into_iter().collect();
        assert_eq!(
            make_grid(&three, &unit_grid_values(), 1000).unwrap().len(),
            125
        );
        assert!(matches!(
            make_grid(&three, &unit_grid_values(), 100),
            Err(EquivError::GridTooLarge { .. })
        ));
        assert!(matches!(
            make_grid(&three, &[], 100),
            Err(EquivError::EmptyValues)
        ));
    }

    #[test]
    fn grid_order_is_deterministic() {
        let vars: BTreeSet<u32> = [0, 1].into_iter().collect();
        let grid = make_grid(&vars, &[int(0), int(1)], 100).unwrap();
        let rendered: Vec<String> = grid
            .iter()
            .map(|a| format!("{},{}", a.get(0).unwrap(), a.get(1).unwrap()))
            .collect();
        assert_eq!(rendered, ["0,0", "0,1", "1,0", "1,1"]);
    }

    #[test]
    fn sampling_is_reproducible_and_in_range() {
        let vars: BTreeSet<u32> = [0, 1].into_iter().collect();
        let a = sample_assignments(&vars, 10, &int(-2), &int(2), 8, 42);
        let b = sample_assignments(&vars, 10, &int(-2), &int(2), 8, 42);
        assert_eq!(a, b);
        for assignment in &a {
            for (_, value) in assignment.entries() {
                assert!(value.abs() <= int(2));
                assert!(*value.denom() <= 8.into());
            }
        }
        let c = sample_assignments(&vars, 10, &int(-2), &int(2), 8, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn plain_check_examples() {
        let grid: Vec<Assignment> = make_grid(
            &[0].into_iter().collect(),
            &unit_grid_values(),
            100,
        )
        .unwrap();
        let p = parse_formula("p0").unwrap();
        let x = parse_term("x0").unwrap();
        assert!(check_plain_equivalence(&p, &x, &grid).unwrap().passed);

        // ReLU is inert on nonnegative inputs.
        let relu = parse_term("ReLU(x0)").unwrap();
        assert!(check_plain_equivalence(&p, &relu, &grid).unwrap().passed);

        let two = make_grid(
            &[0, 1].into_iter().collect(),
            &unit_grid_values(),
            100,
        )
        .unwrap();
        let imp = parse_formula("p0 ->L p1").unwrap();
        let t = parse_term("1 - ReLU(x0 - x1)").unwrap();
        assert!(check_plain_equivalence(&imp, &t, &two).unwrap().passed);
    }

    #[test]
    fn ik_check_flags_a_wrong_scale() {
        let p = parse_formula("p0").unwrap();
        let x = parse_term("x0").unwrap();
        let grid = make_grid(
            &[0].into_iter().collect(),
            &symmetric_grid_values(&int(1)),
            100,
        )
        .unwrap();
        let ok = check_ik_equivalence(&p, &x, &int(1), &int(1), &grid).unwrap();
        assert!(ok.passed);
        assert_eq!(ok.points_checked, 5);

        // Under k' = 2 the proposition still carries scale_2 of the input,
        // so p0 remains fine; a genuinely k-sensitive formula fails.
        let neg = parse_formula("~L p0").unwrap();
        let neg_term = parse_term("-x0").unwrap();
        assert!(
            check_ik_equivalence(&neg, &neg_term, &int(1), &int(2), &grid)
                .unwrap()
                .passed
        );
        let shifted = parse_term("-x0 + 1").unwrap();
        let report =
            check_ik_equivalence(&neg, &shifted, &int(1), &int(2), &grid).unwrap();
        assert!(!report.passed);
        assert!(report.first_mismatch.is_some());

        assert!(matches!(
            check_ik_equivalence(&p, &x, &int(2), &int(1), &grid),
            Err(EquivError::BadIkBounds)
        ));
    }

    #[test]
    fn k_check_spec_counterexample() {
        // psi = phi = ~L p0 is not 2-equivalent to itself: at V(p0) = 1 the
        // scaled side reads 1 - 3/4 = 1/4 while scale_2(0) = 1/2.
        let phi = parse_formula("~L p0").unwrap();
        let grid = vec![Assignment::from_pairs([(0, int(1))])];
        let report = check_k_equivalence(&phi, &phi, &int(2), &grid).unwrap();
        assert!(!report.passed);
        let witness = report.first_mismatch.unwrap();
        assert_eq!(witness.lhs, "1/4");
        assert_eq!(witness.rhs, "1/2");

        // Zero-free formulas are 1-equivalent to themselves.
        let grid = make_grid(
            &[0, 1].into_iter().collect(),
            &unit_grid_values(),
            100,
        )
        .unwrap();
        let imp = parse_formula("p0 ->L p1").unwrap();
        assert!(check_k_equivalence(&imp, &imp, &int(1), &grid).unwrap().passed);

        assert!(matches!(
            check_k_equivalence(&phi, &phi, &rat(1, 2), &grid),
            Err(EquivError::BadKBound)
        ));
    }

    #[test]
    fn report_json_shape() {
        let phi = parse_formula("p0").unwrap();
        let t = parse_term("x0").unwrap();
        let grid = vec![Assignment::from_pairs([(0, rat(1, 2))])];
        let report = check_plain_equivalence(&phi, &t, &grid).unwrap();
        let json = report.to_json();
        assert!(json.contains("\"mode\": \"plain\""));
        assert!(json.contains("\"points\": 1"));
        assert!(json.contains("\"passed\": true"));
        assert!(json.contains("\"witness\": null"));
    }
}
