//! Exhaustive ε-area search over compression chains.
//!
//! Works on the distribution of a function (level value ↦ measure) rather than on pieces, so it
//! shares no code with the rearrangement path in [`super::area`]. A non-increasing function is
//! determined by its distribution; compressing by γ lowers every value in the top ε of mass.

use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;

use super::{check_eps, StepFunction};
use crate::error::{Error, Result};
use crate::ordinal::Ordinal;
use crate::rational::Rational;

/// Positive values with their masses, largest value first.
type Distribution = Vec<(Ordinal, Rational)>;

struct Search<'a> {
    eps: &'a Rational,
    candidates: Vec<Ordinal>,
    memo: HashMap<Distribution, (Ordinal, usize)>,
}

impl Search<'_> {
    fn value_at_eps(&self, dist: &Distribution) -> Ordinal {
        let mut mass = Rational::zero();
        for (v, m) in dist {
            mass += m;
            if mass >= *self.eps {
                return v.clone();
            }
        }
        Ordinal::zero()
    }

    /// Lowers the top `ε` of mass by `γ`.
    fn compress(&self, dist: &Distribution, gamma: &Ordinal) -> Distribution {
        let mut remaining = self.eps.clone();
        let mut out: Vec<(Ordinal, Rational)> = Vec::with_capacity(dist.len() + 1);
        for (v, m) in dist {
            if remaining.is_zero() {
                out.push((v.clone(), m.clone()));
                continue;
            }
            let taken = if *m <= remaining {
                m.clone()
            } else {
                remaining.clone()
            };
            remaining -= &taken;
            let lowered = v.sub(gamma).expect("γ is at most the value at ε");
            if &taken < m {
                out.push((v.clone(), m - &taken));
            }
            out.push((lowered, taken));
        }
        normalize(out)
    }

    /// Best reachable height at ε, and the fewest compressions that reach it.
    fn best(&mut self, dist: &Distribution) -> (Ordinal, usize) {
        if let Some(hit) = self.memo.get(dist) {
            return hit.clone();
        }
        let at = self.value_at_eps(dist);
        let mut best = (at.clone(), 0);
        for gamma in self.candidates.clone() {
            if gamma > at {
                continue;
            }
            let next = self.compress(dist, &gamma);
            if next == *dist {
                continue;
            }
            let (tail, depth) = self.best(&next);
            let value = gamma.add(&tail);
            if value > best.0 || (value == best.0 && depth + 1 < best.1) {
                best = (value, depth + 1);
            }
        }
        self.memo.insert(dist.clone(), best.clone());
        best
    }
}

fn normalize(mut entries: Vec<(Ordinal, Rational)>) -> Distribution {
    entries.retain(|(v, m)| !v.is_zero() && !m.is_zero());
    entries.sort_by(|a, b| b.0.cmp(&a.0));
    let mut out: Distribution = Vec::with_capacity(entries.len());
    for (v, m) in entries {
        match out.last_mut() {
            Some((lv, lm)) if *lv == v => *lm += m,
            _ => out.push((v, m)),
        }
    }
    out
}

/// Supremum of `H(ε)` over chains of ε-compressions starting from `g`.
///
/// Each step compresses the current remainder by some `ω^β·c` not exceeding its value at ε,
/// where `β` ranges over the exponents and `c` up to the largest coefficient occurring in `g`.
/// Fails with [`Error::DepthExceeded`] when the supremum needs more than `max_depth` steps.
pub fn c_area_oracle(g: &StepFunction, eps: &Rational, max_depth: usize) -> Result<Ordinal> {
    check_eps(eps)?;
    if !g.is_non_increasing() {
        return Err(Error::NotNonIncreasing);
    }
    let mut exponents = BTreeSet::from([Ordinal::zero()]);
    let mut max_coefficient = 1;
    for p in g.pieces() {
        for t in p.value.terms() {
            exponents.insert(t.exponent.clone());
            max_coefficient = max_coefficient.max(t.coefficient);
        }
    }
    let candidates = exponents
        .into_iter()
        .flat_map(|e| (1..=max_coefficient).map(move |c| Ordinal::monomial(e.clone(), c)))
        .collect();
    let mut search = Search {
        eps,
        candidates,
        memo: HashMap::new(),
    };
    let start = normalize(g.level_sets().into_iter().collect());
    let (value, depth) = search.best(&start);
    if depth > max_depth {
        return Err(Error::DepthExceeded {
            needed: depth,
            limit: max_depth,
        });
    }
    Ok(value)
}
