//! Left-continuous ordinal-valued simple functions on (0, ∞).
//!
//! A [`StepFunction`] is a list of pieces `(end, value)`; each value holds on the half-open
//! interval `(previous end, end]`, the first interval starts at 0, and the function is 0
//! beyond the last end. Pieces are kept canonical: ends strictly increasing, adjacent values
//! distinct, no trailing zero piece. Structural equality is therefore function equality.

mod area;
mod oracle;

pub use area::{c_area, epsilon_compression, multi_epsilon_area, CompressionTrace};
pub use oracle::c_area_oracle;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordinal::Ordinal;
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Piece {
    #[serde(with = "rational::serde_str")]
    pub end: Rational,
    pub value: Ordinal,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct StepFunction {
    pieces: Vec<Piece>,
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            pieces: Vec<Piece>,
        }
        let raw = Raw::deserialize(d)?;
        StepFunction::new(raw.pieces).map_err(serde::de::Error::custom)
    }
}

impl StepFunction {
    pub fn zero() -> Self {
        StepFunction { pieces: Vec::new() }
    }

    /// Validates breakpoints and canonicalizes.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let mut prev = Rational::zero();
        for p in &pieces {
            if p.end <= prev {
                return Err(Error::InvalidBreakpoints);
            }
            prev = p.end.clone();
        }
        Ok(Self::canonical(pieces))
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Ordinal)>,
    {
        Self::new(
            pairs
                .into_iter()
                .map(|(end, value)| Piece { end, value })
                .collect(),
        )
    }

    /// `value · 1_{(0, end]}`.
    pub fn constant(value: Ordinal, end: Rational) -> Result<Self> {
        Self::from_pairs([(end, value)])
    }

    fn canonical(pieces: Vec<Piece>) -> Self {
        let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
        for p in pieces {
            match out.last_mut() {
                Some(last) if last.value == p.value => last.end = p.end,
                _ => out.push(p),
            }
        }
        while out.last().is_some_and(|p| p.value.is_zero()) {
            out.pop();
        }
        StepFunction { pieces: out }
    }

    /// Builds a function from consecutive cells `(lo, hi]` starting at 0.
    fn from_cells(cells: impl IntoIterator<Item = (Rational, Ordinal)>) -> Self {
        Self::canonical(
            cells
                .into_iter()
                .map(|(end, value)| Piece { end, value })
                .collect(),
        )
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Right end of the support; 0 for the zero function.
    pub fn support_end(&self) -> Rational {
        self.pieces
            .last()
            .map(|p| p.end.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, t: &Rational) -> Result<Ordinal> {
        if !t.is_positive() {
            return Err(Error::NonpositivePoint(t.clone()));
        }
        Ok(self.value_at(t))
    }

    fn value_at(&self, t: &Rational) -> Ordinal {
        let idx = self.pieces.partition_point(|p| p.end < *t);
        self.pieces.get(idx).map(|p| p.value.clone()).unwrap_or_default()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.pieces.windows(2).all(|w| w[0].value >= w[1].value)
    }

    pub fn max_value(&self) -> Ordinal {
        self.pieces
            .iter()
            .map(|p| p.value.clone())
            .max()
            .unwrap_or_default()
    }

    /// Splits the function at the given extra points, returning consecutive cells
    /// `(hi, value)` covering `(0, max]` where `max` is the largest point or end.
    fn cells_with(&self, points: &[&Rational]) -> Vec<(Rational, Ordinal)> {
        let mut cuts: Vec<Rational> = self.pieces.iter().map(|p| p.end.clone()).collect();
        cuts.extend(points.iter().filter(|p| p.is_positive()).map(|p| (*p).clone()));
        cuts.sort();
        cuts.dedup();
        cuts.into_iter()
            .map(|hi| {
                let v = self.value_at(&hi);
                (hi, v)
            })
            .collect()
    }

    /// Lebesgue measure of each positive level set `{t : f(t) = α}`.
    pub fn level_sets(&self) -> BTreeMap<Ordinal, Rational> {
        let mut out: BTreeMap<Ordinal, Rational> = BTreeMap::new();
        let mut lo = Rational::zero();
        for p in &self.pieces {
            if !p.value.is_zero() {
                *out.entry(p.value.clone()).or_insert_with(Rational::zero) += &p.end - &lo;
            }
            lo = p.end.clone();
        }
        out
    }

    /// Lebesgue measure of `{t ≤ A : pred(self(t), other(t))}` where `A` is the larger support end.
    pub fn measure_where<F>(&self, other: &StepFunction, mut pred: F) -> Rational
    where
        F: FnMut(&Ordinal, &Ordinal) -> bool,
    {
        let ends: Vec<&Rational> = other.pieces.iter().map(|p| &p.end).collect();
        let mut lo = Rational::zero();
        let mut total = Rational::zero();
        for (hi, v) in self.cells_with(&ends) {
            if pred(&v, &other.value_at(&hi)) {
                total += &hi - &lo;
            }
            lo = hi;
        }
        total
    }

    /// `λ{t : f(t) ≥ x}`.
    pub fn mass_at_least(&self, x: &Ordinal) -> Rational {
        let mut lo = Rational::zero();
        let mut total = Rational::zero();
        for p in &self.pieces {
            if p.value >= *x {
                total += &p.end - &lo;
            }
            lo = p.end.clone();
        }
        total
    }

    /// `self(t) ≤ other(t)` for every `t > 0`.
    pub fn le_pointwise(&self, other: &StepFunction) -> bool {
        let ends: Vec<&Rational> = other.pieces.iter().map(|p| &p.end).collect();
        self.cells_with(&ends)
            .iter()
            .all(|(hi, v)| *v <= other.value_at(hi))
    }

    /// Applies `f` to the values on `(lo, hi]`, leaving the rest untouched.
    fn try_map_on<F>(&self, lo: &Rational, hi: &Rational, mut f: F) -> Result<StepFunction>
    where
        F: FnMut(&Ordinal) -> Result<Ordinal>,
    {
        let cells = self.cells_with(&[lo, hi]);
        let mut out = Vec::with_capacity(cells.len());
        for (end, v) in cells {
            let inside = end > *lo && end <= *hi;
            out.push((end, if inside { f(&v)? } else { v }));
        }
        Ok(Self::from_cells(out))
    }
}

/// Pointwise `f(t) − γ` on `(lo, hi]` (ordinal left subtraction), unchanged elsewhere.
pub fn sub_on_interval(
    g: &StepFunction,
    gamma: &Ordinal,
    lo: &Rational,
    hi: &Rational,
) -> Result<StepFunction> {
    if gamma.is_zero() {
        return Ok(g.clone());
    }
    g.try_map_on(lo, hi, |v| v.sub(gamma))
}

/// `g − γ·1_{(0,ε]}`, possibly no longer monotone.
pub fn sub_indicator(g: &StepFunction, gamma: &Ordinal, eps: &Rational) -> Result<StepFunction> {
    check_eps(eps)?;
    sub_on_interval(g, gamma, &Rational::zero(), eps)
}

/// The decreasing rearrangement of `g − γ·1_{(0,ε]}`.
pub fn compress_remainder(g: &StepFunction, gamma: &Ordinal, eps: &Rational) -> Result<StepFunction> {
    Ok(decreasing_rearrangement(&sub_indicator(g, gamma, eps)?))
}

/// `γ·1_{(0,ε]} + f` with the constant on the left: `γ + f(t)` for `t ≤ ε`.
pub fn add_prefix(gamma: &Ordinal, eps: &Rational, f: &StepFunction) -> StepFunction {
    if gamma.is_zero() {
        return f.clone();
    }
    f.try_map_on(&Rational::zero(), eps, |v| Ok(gamma.add(v)))
        .expect("ordinal addition is total")
}

/// Non-increasing left-continuous rearrangement preserving every level-set measure.
pub fn decreasing_rearrangement(f: &StepFunction) -> StepFunction {
    let mut end = Rational::zero();
    let cells: Vec<_> = f
        .level_sets()
        .into_iter()
        .rev()
        .map(|(value, len)| {
            end += len;
            (end.clone(), value)
        })
        .collect();
    StepFunction::from_cells(cells)
}

pub fn sf_eval(g: &StepFunction, t: &Rational) -> Result<Ordinal> {
    g.eval(t)
}

pub(crate) fn check_eps(eps: &Rational) -> Result<()> {
    if eps.is_positive() {
        Ok(())
    } else {
        Err(Error::NonpositiveEpsilon(eps.clone()))
    }
}

/// Indicator-sum rendering, e.g. `w*1_(0,1/4] + 1_(1/4,1]`.
impl fmt::Display for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut lo = Rational::zero();
        for p in &self.pieces {
            if !p.value.is_zero() {
                if !first {
                    f.write_str(" + ")?;
                }
                first = false;
                let v = p.value.to_string();
                let interval = format!("1_({},{}]", lo, p.end);
                if p.value == Ordinal::one() {
                    f.write_str(&interval)?;
                } else if v.contains(['+', '*']) {
                    write!(f, "({v})*{interval}")?;
                } else {
                    write!(f, "{v}*{interval}")?;
                }
            }
            lo = p.end.clone();
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn sf(pairs: &[(Rational, &str)]) -> StepFunction {
        StepFunction::from_pairs(pairs.iter().map(|(e, v)| (e.clone(), o(v)))).unwrap()
    }

    fn example() -> StepFunction {
        sf(&[(rat(1, 4), "w"), (int(1), "1")])
    }

    #[test]
    fn evaluation_is_left_continuous() {
        let g = example();
        assert_eq!(sf_eval(&g, &rat(1, 4)).unwrap(), o("w"));
        assert_eq!(sf_eval(&g, &rat(1, 2)).unwrap(), o("1"));
        assert_eq!(sf_eval(&g, &int(1)).unwrap(), o("1"));
        assert_eq!(sf_eval(&g, &int(2)).unwrap(), Ordinal::zero());
        assert!(matches!(sf_eval(&g, &int(0)), Err(Error::NonpositivePoint(_))));
        assert!(sf_eval(&g, &rat(-1, 2)).is_err());
    }

    #[test]
    fn canonical_form_merges_and_trims() {
        let g = sf(&[(rat(1, 4), "2"), (rat(1, 2), "2"), (int(1), "1"), (int(2), "0")]);
        assert_eq!(g.pieces().len(), 2);
        assert_eq!(g, sf(&[(rat(1, 2), "2"), (int(1), "1")]));
        assert!(StepFunction::from_pairs([(int(1), o("1")), (rat(1, 2), o("1"))]).is_err());
        assert!(StepFunction::from_pairs([(int(0), o("1"))]).is_err());
    }

    #[test]
    fn sub_indicator_examples() {
        let g = example();
        let out = sub_indicator(&g, &o("1"), &rat(1, 2)).unwrap();
        assert_eq!(out, sf(&[(rat(1, 4), "w"), (rat(1, 2), "0"), (int(1), "1")]));
        assert_eq!(sub_indicator(&g, &Ordinal::zero(), &rat(1, 2)).unwrap(), g);
        let h = sf(&[(int(1), "w")]);
        assert!(sub_indicator(&h, &o("w"), &int(1)).unwrap().is_zero());
        assert!(matches!(
            sub_indicator(&g, &o("2"), &rat(1, 2)),
            Err(Error::UndefinedSubtraction { .. })
        ));
    }

    #[test]
    fn sub_indicator_past_support_is_undefined() {
        let g = sf(&[(rat(1, 2), "1")]);
        assert!(sub_indicator(&g, &o("1"), &int(1)).is_err());
    }

    #[test]
    fn rearrangement_examples() {
        let f = sf(&[(rat(1, 4), "0"), (int(1), "1")]);
        assert_eq!(decreasing_rearrangement(&f), sf(&[(rat(3, 4), "1")]));
        let g = example();
        assert_eq!(decreasing_rearrangement(&g), g);
        let f = sf(&[(rat(1, 4), "w"), (rat(1, 2), "0"), (int(1), "1")]);
        assert_eq!(
            decreasing_rearrangement(&f),
            sf(&[(rat(1, 4), "w"), (rat(3, 4), "1")])
        );
    }

    #[test]
    fn compression_examples() {
        let g = example();
        let h = epsilon_compression(&g, &rat(1, 4), &o("w")).unwrap();
        assert_eq!(h, sf(&[(rat(1, 4), "w+1"), (rat(3, 4), "1")]));
        assert_eq!(epsilon_compression(&g, &rat(1, 4), &Ordinal::zero()).unwrap(), g);
        let g2 = sf(&[(int(1), "2")]);
        let h2 = epsilon_compression(&g2, &rat(1, 2), &o("1")).unwrap();
        assert_eq!(h2, sf(&[(rat(1, 2), "3"), (int(1), "1")]));
        let rest = compress_remainder(&g2, &o("1"), &rat(1, 2)).unwrap();
        assert_eq!(rest, sf(&[(rat(1, 2), "2"), (int(1), "1")]));
    }

    #[test]
    fn absorbed_mass_stays_in_place() {
        // 1 + w = w, so the top quarter keeps its value and the strip loses a quarter
        let g = example();
        assert_eq!(
            compress_remainder(&g, &o("1"), &rat(1, 2)).unwrap(),
            sf(&[(rat(1, 4), "w"), (rat(3, 4), "1")])
        );
        let h = epsilon_compression(&g, &rat(1, 2), &o("1")).unwrap();
        assert_eq!(h.to_string(), "w*1_(0,1/4] + 2*1_(1/4,1/2] + 1_(1/2,3/4]");
        assert!(compress_remainder(&g, &o("2"), &rat(1, 2)).is_err());
    }

    #[test]
    fn display_uses_indicator_sums() {
        assert_eq!(example().to_string(), "w*1_(0,1/4] + 1_(1/4,1]");
        let h = sf(&[(rat(1, 4), "w+1"), (rat(3, 4), "1")]);
        assert_eq!(h.to_string(), "(w+1)*1_(0,1/4] + 1_(1/4,3/4]");
        let k = sf(&[(rat(1, 4), "0"), (rat(1, 2), "2")]);
        assert_eq!(k.to_string(), "2*1_(1/4,1/2]");
        assert_eq!(StepFunction::zero().to_string(), "0");
    }

    #[test]
    fn json_shape() {
        let json = serde_json::to_string(&example()).unwrap();
        assert_eq!(
            json,
            r#"{"pieces":[{"end":"1/4","value":{"terms":[[1,1]]}},{"end":"1","value":1}]}"#
        );
        let back: StepFunction =
            serde_json::from_str(r#"{"pieces":[{"end":"1/4","value":"w"},{"end":1,"value":1}]}"#).unwrap();
        assert_eq!(back, example());
        assert!(serde_json::from_str::<StepFunction>(r#"{"pieces":[{"end":0.25,"value":1}]}"#).is_err());
    }

    #[test]
    fn measure_where_counts_strict_dominance() {
        let g = sf(&[(rat(1, 2), "1")]);
        let h = sf(&[(int(1), "1")]);
        assert_eq!(h.measure_where(&g, |a, b| b.succ() <= *a), rat(1, 2));
        assert!(g.le_pointwise(&h));
        assert!(!h.le_pointwise(&g));
    }

    proptest! {
        #[test]
        fn rearrangement_preserves_level_sets(f in strategies::arbitrary()) {
            let r = decreasing_rearrangement(&f);
            prop_assert!(r.is_non_increasing());
            prop_assert_eq!(r.level_sets(), f.level_sets());
        }

        #[test]
        fn rearrangement_is_idempotent(f in strategies::arbitrary()) {
            let r = decreasing_rearrangement(&f);
            prop_assert_eq!(decreasing_rearrangement(&r), r);
        }

        #[test]
        fn json_round_trip(f in strategies::arbitrary()) {
            let json = serde_json::to_string(&f).unwrap();
            prop_assert_eq!(serde_json::from_str::<StepFunction>(&json).unwrap(), f);
        }

        #[test]
        fn too_small_gamma_has_no_effect(g in strategies::non_increasing(), e in 1i64..=8) {
            let eps = rat(e, 8);
            let at = g.eval(&eps).unwrap();
            prop_assume!(!at.is_zero());
            let lead = at.leading_power().unwrap();
            // every ω-power strictly below the leading one is absorbed at ε and to its left
            if !lead.leading_exponent().is_zero() {
                let small = Ordinal::one();
                prop_assert!(at.absorbs(&small));
                prop_assert_eq!(sub_indicator(&g, &small, &eps).unwrap(), g.clone());
            }
        }
    }
}
