//! Ordinals below ω^5 as coefficient vectors `[c_0, …, c_4]` (c_i on ω^i), with addition by the
//! absorption rule and multiplication by repeated addition. The CNF implementation has to agree on
//! random pairs below ω^3.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use szlenk_core::ordinal::{ord_add, ord_cmp, ord_mul, ord_sub, Ordinal};

const WIDTH: usize = 5;
type Vector = [u64; WIDTH];

fn lead(a: &Vector) -> Option<usize> {
    (0..WIDTH).rev().find(|&i| a[i] > 0)
}

fn vadd(a: &Vector, b: &Vector) -> Vector {
    let Some(e) = lead(b) else { return *a };
    let mut out = *b;
    out[e] += a[e];
    out[e + 1..].copy_from_slice(&a[e + 1..]);
    out
}

fn vcmp(a: &Vector, b: &Vector) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

fn power(e: usize) -> Vector {
    let mut v = [0; WIDTH];
    v[e] = 1;
    v
}

/// `a·b` as `Σ_i a·ω^i` repeated `b_i` times from the top down, with `a·ω^i = ω^{lead(a)+i}` for
/// `i ≥ 1` and `a·1 = a`.
fn vmul(a: &Vector, b: &Vector) -> Vector {
    let Some(e) = lead(a) else { return [0; WIDTH] };
    let mut out = [0; WIDTH];
    for i in (0..WIDTH).rev().filter(|&i| b[i] > 0) {
        let block = if i == 0 { *a } else { power(e + i) };
        for _ in 0..b[i] {
            out = vadd(&out, &block);
        }
    }
    out
}

fn to_ordinal(v: &Vector) -> Ordinal {
    (0..WIDTH)
        .rev()
        .filter(|&i| v[i] > 0)
        .fold(Ordinal::zero(), |acc, i| {
            ord_add(&acc, &Ordinal::monomial(Ordinal::finite(i as u64), v[i]))
        })
}

fn random_below_cube(rng: &mut impl Rng) -> Vector {
    let mut v = [0; WIDTH];
    for c in v.iter_mut().take(3) {
        // zeros are common so that absorption cases show up often
        *c = if rng.gen_bool(0.35) {
            0
        } else {
            rng.gen_range(1..=6)
        };
    }
    v
}

#[test]
fn addition_matches_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let (a, b) = (random_below_cube(&mut rng), random_below_cube(&mut rng));
        assert_eq!(
            ord_add(&to_ordinal(&a), &to_ordinal(&b)),
            to_ordinal(&vadd(&a, &b)),
            "{a:?} + {b:?}"
        );
    }
}

#[test]
fn comparison_matches_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10_000 {
        let (a, b) = (random_below_cube(&mut rng), random_below_cube(&mut rng));
        assert_eq!(
            ord_cmp(&to_ordinal(&a), &to_ordinal(&b)),
            vcmp(&a, &b),
            "{a:?} vs {b:?}"
        );
    }
}

#[test]
fn multiplication_matches_repeated_addition() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10_000 {
        let (a, b) = (random_below_cube(&mut rng), random_below_cube(&mut rng));
        assert_eq!(
            ord_mul(&to_ordinal(&a), &to_ordinal(&b)),
            to_ordinal(&vmul(&a, &b)),
            "{a:?} * {b:?}"
        );
    }
}

#[test]
fn left_subtraction_inverts_addition() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..10_000 {
        let (a, b) = (random_below_cube(&mut rng), random_below_cube(&mut rng));
        let sum = vadd(&a, &b);
        let rest = ord_sub(&to_ordinal(&sum), &to_ordinal(&a)).unwrap();
        // the difference is unique, though it need not be b when b is absorbed
        assert_eq!(ord_add(&to_ordinal(&a), &rest), to_ordinal(&sum));
        assert!(rest <= to_ordinal(&b));
    }
}

#[test]
fn multiplication_by_finite_is_repeated_addition() {
    let w = Ordinal::omega();
    let a = ord_add(&ord_mul(&w, &w), &Ordinal::finite(3));
    let mut sum = Ordinal::zero();
    for n in 1..=5u64 {
        sum = ord_add(&sum, &a);
        assert_eq!(ord_mul(&a, &Ordinal::finite(n)), sum);
    }
}
