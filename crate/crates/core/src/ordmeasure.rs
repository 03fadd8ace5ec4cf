//! Atomic positive measures on ordinal intervals `[1, ω^{ω^γ·k}]`.
//!
//! The Cantor–Bendixson rank of a point in an ordinal interval is the exponent of the final term
//! of its Cantor normal form, so the derived sets never need to be materialized: the mass of
//! `K^{(α)}` is the weight of the atoms of rank at least α.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordinal::Ordinal;
use crate::rational::{self, floor_u64, Rational};
use crate::stepfn::{c_area, check_eps, StepFunction};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrdinalSpace {
    pub gamma: Ordinal,
    pub k: u64,
}

impl OrdinalSpace {
    pub fn new(gamma: Ordinal, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidMeasure("space multiplier k must be ≥ 1".into()));
        }
        Ok(OrdinalSpace { gamma, k })
    }

    /// `ω^γ·k`, the rank of the top point.
    pub fn top_rank(&self) -> Ordinal {
        Ordinal::monomial(self.gamma.clone(), self.k)
    }

    /// `ω^{ω^γ·k}`.
    pub fn top(&self) -> Ordinal {
        Ordinal::omega_pow(self.top_rank())
    }

    pub fn contains(&self, p: &Ordinal) -> bool {
        !p.is_zero() && *p <= self.top()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Ordinal,
    #[serde(with = "rational::serde_str")]
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrdinalMeasure {
    pub space: OrdinalSpace,
    atoms: Vec<Atom>,
}

impl<'de> Deserialize<'de> for OrdinalMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            space: OrdinalSpace,
            atoms: Vec<Atom>,
        }
        let raw = Raw::deserialize(d)?;
        if raw.space.k == 0 {
            return Err(serde::de::Error::custom("space multiplier k must be ≥ 1"));
        }
        OrdinalMeasure::new(raw.space, raw.atoms).map_err(serde::de::Error::custom)
    }
}

impl OrdinalMeasure {
    /// Atoms must have distinct points in `[1, top]` and positive weights.
    pub fn new(space: OrdinalSpace, atoms: Vec<Atom>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for a in &atoms {
            if !space.contains(&a.point) {
                return Err(Error::OutOfSpace {
                    point: a.point.clone(),
                    top: space.top(),
                });
            }
            if !a.weight.is_positive() {
                return Err(Error::InvalidMeasure(format!(
                    "weight at {} must be positive",
                    a.point
                )));
            }
            if !seen.insert(a.point.clone()) {
                return Err(Error::InvalidMeasure(format!("duplicate point {}", a.point)));
            }
        }
        Ok(OrdinalMeasure { space, atoms })
    }

    /// The Dirac mass at `point`.
    pub fn dirac(space: OrdinalSpace, point: Ordinal) -> Result<Self> {
        Self::new(
            space,
            vec![Atom {
                point,
                weight: Rational::one(),
            }],
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms.iter().map(|a| a.weight.clone()).sum()
    }

    pub fn is_probability(&self) -> bool {
        self.total_mass() <= Rational::one()
    }
}

/// Cantor–Bendixson rank of `p` in `[1, top]`: the exponent of its final CNF term.
pub fn cb_rank(p: &Ordinal, space: &OrdinalSpace) -> Result<Ordinal> {
    if !space.contains(p) {
        return Err(Error::OutOfSpace {
            point: p.clone(),
            top: space.top(),
        });
    }
    Ok(p.last_exponent())
}

fn height_from_ranked(ranked: impl IntoIterator<Item = (Ordinal, Rational)>) -> Result<StepFunction> {
    let mut by_rank: BTreeMap<Ordinal, Rational> = BTreeMap::new();
    for (rank, w) in ranked {
        *by_rank.entry(rank).or_insert_with(Rational::zero) += w;
    }
    if by_rank.values().all(|w| w.is_zero()) {
        return Err(Error::EmptyMeasure);
    }
    let mut end = Rational::zero();
    let pairs: Vec<_> = by_rank
        .into_iter()
        .rev()
        .map(|(rank, w)| {
            end += w;
            (end.clone(), rank)
        })
        .collect();
    StepFunction::from_pairs(pairs)
}

/// `g(t) = sup{α : μ(K^{(α)}) ≥ t}`.
pub fn derived_height(mu: &OrdinalMeasure) -> Result<StepFunction> {
    let ranked = mu
        .atoms
        .iter()
        .map(|a| Ok((cb_rank(&a.point, &mu.space)?, a.weight.clone())))
        .collect::<Result<Vec<_>>>()?;
    height_from_ranked(ranked)
}

/// `ω^γ·[k/ε] + 1`.
pub fn szlenk_formula(space: &OrdinalSpace, eps: &Rational) -> Result<Ordinal> {
    Ok(area_bound(space, eps)?.succ())
}

/// `ω^γ·[k/ε]`, the largest ε-area of a probability measure on the space.
pub fn area_bound(space: &OrdinalSpace, eps: &Rational) -> Result<Ordinal> {
    check_eps(eps)?;
    let q = floor_u64(&(Rational::from_integer(space.k.into()) / eps));
    Ok(Ordinal::monomial(space.gamma.clone(), q))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AreaBoundCheck {
    pub area: Ordinal,
    pub bound: Ordinal,
    pub holds: bool,
}

/// Compares the ε-area of `mu`'s derived height with `ω^γ·[k/ε]`.
pub fn check_area_bound(mu: &OrdinalMeasure, eps: &Rational) -> Result<AreaBoundCheck> {
    if !mu.is_probability() {
        return Err(Error::InvalidMeasure("total mass exceeds 1".into()));
    }
    let (area, _) = c_area(&derived_height(mu)?, eps)?;
    let bound = area_bound(&mu.space, eps)?;
    Ok(AreaBoundCheck {
        holds: area <= bound,
        area,
        bound,
    })
}

/// Which copy of `[1, top]` an atom of a signed measure lives on after splitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sheet {
    Plus,
    Minus,
}

/// A finitely supported signed measure; nonzero weights of either sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedMeasure {
    pub space: OrdinalSpace,
    pub atoms: Vec<Atom>,
}

impl SignedMeasure {
    /// The positive measure on `[1, top] ∪ −[1, top]` carrying `μ⁺` on the first copy and `μ⁻`
    /// on the second.
    pub fn split(&self) -> Result<Vec<(Sheet, Atom)>> {
        self.atoms
            .iter()
            .map(|a| {
                if a.weight.is_zero() {
                    return Err(Error::InvalidMeasure("zero weight atom".into()));
                }
                let sheet = if a.weight.is_positive() {
                    Sheet::Plus
                } else {
                    Sheet::Minus
                };
                Ok((
                    sheet,
                    Atom {
                        point: a.point.clone(),
                        weight: a.weight.abs(),
                    },
                ))
            })
            .collect()
    }

    /// Derived height of the split measure on the doubled space.
    pub fn derived_height(&self) -> Result<StepFunction> {
        let ranked = self
            .split()?
            .into_iter()
            .map(|(_, a)| Ok((cb_rank(&a.point, &self.space)?, a.weight)))
            .collect::<Result<Vec<_>>>()?;
        height_from_ranked(ranked)
    }

    /// `|μ|` as a positive measure on a single copy.
    pub fn abs(&self) -> Result<OrdinalMeasure> {
        OrdinalMeasure::new(
            self.space.clone(),
            self.atoms
                .iter()
                .map(|a| Atom {
                    point: a.point.clone(),
                    weight: a.weight.abs(),
                })
                .collect(),
        )
    }
}
