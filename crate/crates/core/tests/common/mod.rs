//! Seeded generators shared by the property and acceptance suites.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use relu_logic::formula::Formula;
use relu_logic::rational::{rat, Rational};
use relu_logic::term::{add, cnst, mul, relu, var, TermRef};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform rational in [lo, hi] with denominator at most `max_denom`.
pub fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64, max_denom: i64) -> Rational {
    let q = rng.gen_range(1..=max_denom);
    let n = rng.gen_range(lo * q..=hi * q);
    rat(n, q)
}

pub fn random_unit_rational(rng: &mut ChaCha8Rng, max_denom: i64) -> Rational {
    let q = rng.gen_range(1..=max_denom);
    let n = rng.gen_range(0..=q);
    rat(n, q)
}

/// Random term with exactly `leaves` atomic leaves over `x0..x{vars-1}`,
/// constants in `[-const_bound, const_bound]` with denominators at most
/// `const_denom`, and occasional ReLU wrappers.
pub fn random_term(
    rng: &mut ChaCha8Rng,
    leaves: u32,
    vars: u32,
    const_bound: i64,
    const_denom: i64,
) -> TermRef {
    let base = if leaves <= 1 {
        if rng.gen_bool(0.5) {
            cnst(random_rational(rng, -const_bound, const_bound, const_denom))
        } else {
            var(rng.gen_range(0..vars))
        }
    } else {
        let left = rng.gen_range(1..leaves);
        let a = random_term(rng, left, vars, const_bound, const_denom);
        let b = random_term(rng, leaves - left, vars, const_bound, const_denom);
        if rng.gen_bool(0.5) {
            add(a, b)
        } else {
            mul(a, b)
        }
    };
    if rng.gen_bool(0.3) {
        relu(base)
    } else {
        base
    }
}

/// Random RPL(.) formula of AST depth at most `depth` over `p0..p{props-1}`.
pub fn random_rplprod_formula(
    rng: &mut ChaCha8Rng,
    depth: u32,
    props: u32,
    max_denom: i64,
) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        if props > 0 && rng.gen_bool(0.5) {
            Formula::prop(rng.gen_range(0..props))
        } else {
            Formula::truth_const(random_unit_rational(rng, max_denom)).unwrap()
        }
    } else {
        let a = random_rplprod_formula(rng, depth - 1, props, max_denom);
        let b = random_rplprod_formula(rng, depth - 1, props, max_denom);
        if rng.gen_bool(0.5) {
            a.imp_l(&b)
        } else {
            a.prod(&b)
        }
    }
}

/// Random formula of the level-1 fragment of RPL(.): products only ever pair
/// a proposition-free side with a level-1 side.
pub fn random_rpl1_formula(
    rng: &mut ChaCha8Rng,
    depth: u32,
    props: u32,
    max_denom: i64,
) -> Formula {
    fn constant(rng: &mut ChaCha8Rng, max_denom: i64) -> Formula {
        Formula::truth_const(random_unit_rational(rng, max_denom)).unwrap()
    }
    if depth == 0 || rng.gen_bool(0.2) {
        return if props > 0 && rng.gen_bool(0.6) {
            Formula::prop(rng.gen_range(0..props))
        } else {
            constant(rng, max_denom)
        };
    }
    match rng.gen_range(0..4) {
        0 => {
            let a = random_rpl1_formula(rng, depth - 1, props, max_denom);
            let b = random_rpl1_formula(rng, depth - 1, props, max_denom);
            a.imp_l(&b)
        }
        1 => constant(rng, max_denom).prod(&random_rpl1_formula(rng, depth - 1, props, max_denom)),
        2 => random_rpl1_formula(rng, depth - 1, props, max_denom).prod(&constant(rng, max_denom)),
        _ => {
            let a = random_rpl1_formula(rng, depth - 1, props, max_denom);
            let b = random_rpl1_formula(rng, depth - 1, props, max_denom);
            b.imp_l(&a)
        }
    }
}

/// Random zero-free Łukasiewicz formula (propositions and ->L only).
pub fn random_luk_nozero_formula(rng: &mut ChaCha8Rng, depth: u32, props: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        Formula::prop(rng.gen_range(0..props))
    } else {
        let a = random_luk_nozero_formula(rng, depth - 1, props);
        let b = random_luk_nozero_formula(rng, depth - 1, props);
        a.imp_l(&b)
    }
}
