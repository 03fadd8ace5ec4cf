//! Ordinals below ε₀ in hereditary Cantor normal form.
//!
//! An [`Ordinal`] is a finite sum `ω^{e₁}·c₁ + … + ω^{eₙ}·cₙ` with strictly decreasing
//! exponents (themselves ordinals) and positive integer coefficients. The empty sum is 0.
//! Because the representation is canonical, structural equality is ordinal equality.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub exponent: Ordinal,
    pub coefficient: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Ordinal {
    terms: Vec<Term>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Ordinal::finite(1)
    }

    pub fn finite(n: u64) -> Self {
        if n == 0 {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: vec![Term {
                    exponent: Ordinal::zero(),
                    coefficient: n,
                }],
            }
        }
    }

    pub fn omega() -> Self {
        Ordinal::omega_pow(Ordinal::one())
    }

    /// `ω^exponent`.
    pub fn omega_pow(exponent: Ordinal) -> Self {
        Ordinal::monomial(exponent, 1)
    }

    /// `ω^exponent · coefficient`; zero when `coefficient == 0`.
    pub fn monomial(exponent: Ordinal, coefficient: u64) -> Self {
        if coefficient == 0 {
            return Ordinal::zero();
        }
        Ordinal {
            terms: vec![Term {
                exponent,
                coefficient,
            }],
        }
    }

    /// Builds an ordinal from CNF terms, checking the normal-form invariants.
    pub fn from_terms(terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.coefficient == 0 {
                return Err(Error::Parse("CNF coefficients must be positive".into()));
            }
        }
        for w in terms.windows(2) {
            if w[0].exponent <= w[1].exponent {
                return Err(Error::Parse("CNF exponents must be strictly decreasing".into()));
            }
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.exponent.is_zero())
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.exponent.is_zero() => Some(t.coefficient),
            _ => None,
        }
    }

    pub fn is_successor(&self) -> bool {
        self.terms.last().is_some_and(|t| t.exponent.is_zero())
    }

    pub fn is_limit(&self) -> bool {
        !self.is_zero() && !self.is_successor()
    }

    /// Exponent of the leading CNF term; 0 for the ordinal 0.
    pub fn leading_exponent(&self) -> Ordinal {
        self.terms.first().map(|t| t.exponent.clone()).unwrap_or_default()
    }

    /// Exponent of the final CNF term; 0 for the ordinal 0.
    pub fn last_exponent(&self) -> Ordinal {
        self.terms.last().map(|t| t.exponent.clone()).unwrap_or_default()
    }

    /// Largest coefficient appearing anywhere in the hereditary normal form.
    pub fn max_coefficient(&self) -> u64 {
        self.terms
            .iter()
            .map(|t| t.coefficient.max(t.exponent.max_coefficient()))
            .max()
            .unwrap_or(0)
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::one())
    }

    /// Ordinal sum `self + rhs`; terms of `self` below the leading exponent of `rhs` are absorbed.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(lead) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let mut merged = None;
        for t in &self.terms {
            match t.exponent.cmp(&lead.exponent) {
                Ordering::Greater => terms.push(t.clone()),
                Ordering::Equal => {
                    merged = Some(t.coefficient);
                    break;
                }
                Ordering::Less => break,
            }
        }
        let mut rest = rhs.terms.iter();
        let first = rest.next().expect("rhs is nonzero");
        let coefficient = match merged {
            Some(c) => c
                .checked_add(first.coefficient)
                .expect("ordinal coefficient overflow"),
            None => first.coefficient,
        };
        terms.push(Term {
            exponent: first.exponent.clone(),
            coefficient,
        });
        terms.extend(rest.cloned());
        Ordinal { terms }
    }

    /// The unique `ρ` with `rhs + ρ = self`.
    pub fn sub(&self, rhs: &Ordinal) -> Result<Ordinal> {
        let undefined = || Error::UndefinedSubtraction {
            minuend: self.clone(),
            subtrahend: rhs.clone(),
        };
        let mut i = 0;
        while i < self.terms.len() && i < rhs.terms.len() && self.terms[i] == rhs.terms[i] {
            i += 1;
        }
        if i == rhs.terms.len() {
            return Ok(Ordinal {
                terms: self.terms[i..].to_vec(),
            });
        }
        if i == self.terms.len() {
            return Err(undefined());
        }
        let (g, b) = (&self.terms[i], &rhs.terms[i]);
        match g.exponent.cmp(&b.exponent) {
            Ordering::Greater => Ok(Ordinal {
                terms: self.terms[i..].to_vec(),
            }),
            Ordering::Less => Err(undefined()),
            Ordering::Equal if g.coefficient > b.coefficient => {
                let mut terms = vec![Term {
                    exponent: g.exponent.clone(),
                    coefficient: g.coefficient - b.coefficient,
                }];
                terms.extend_from_slice(&self.terms[i + 1..]);
                Ok(Ordinal { terms })
            }
            Ordering::Equal => Err(undefined()),
        }
    }

    /// Ordinal product `self · rhs`, left-distributive over the CNF of `rhs`.
    pub fn mul(&self, rhs: &Ordinal) -> Ordinal {
        if self.is_zero() || rhs.is_zero() {
            return Ordinal::zero();
        }
        let lead = &self.terms[0];
        let mut acc = Ordinal::zero();
        for t in &rhs.terms {
            let piece = if t.exponent.is_zero() {
                let mut terms = self.terms.clone();
                terms[0].coefficient = lead
                    .coefficient
                    .checked_mul(t.coefficient)
                    .expect("ordinal coefficient overflow");
                Ordinal { terms }
            } else {
                Ordinal::monomial(lead.exponent.add(&t.exponent), t.coefficient)
            };
            acc = acc.add(&piece);
        }
        acc
    }

    pub fn mul_finite(&self, n: u64) -> Ordinal {
        self.mul(&Ordinal::finite(n))
    }

    /// `ω^{β₁}` for the leading exponent `β₁`: the largest power of ω not exceeding `self`.
    pub fn leading_power(&self) -> Result<Ordinal> {
        match self.terms.first() {
            Some(t) => Ok(Ordinal::omega_pow(t.exponent.clone())),
            None => Err(Error::LeadingPowerOfZero),
        }
    }

    /// Whether `gamma + self == self`, i.e. `self ≥ gamma · ω`.
    pub fn absorbs(&self, gamma: &Ordinal) -> bool {
        *self >= gamma.mul(&Ordinal::omega())
    }
}

pub fn ord_cmp(a: &Ordinal, b: &Ordinal) -> Ordering {
    a.cmp(b)
}

pub fn ord_add(a: &Ordinal, b: &Ordinal) -> Ordinal {
    a.add(b)
}

pub fn ord_sub(g: &Ordinal, b: &Ordinal) -> Result<Ordinal> {
    g.sub(b)
}

pub fn ord_mul(a: &Ordinal, b: &Ordinal) -> Ordinal {
    a.mul(b)
}

pub fn ord_pow_omega(b: &Ordinal) -> Ordinal {
    Ordinal::omega_pow(b.clone())
}

pub fn leading_power(a: &Ordinal) -> Result<Ordinal> {
    a.leading_power()
}

/// True iff `a ≥ g·ω`.
pub fn absorbs(g: &Ordinal, a: &Ordinal) -> bool {
    a.absorbs(g)
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let ord = a
                .exponent
                .cmp(&b.exponent)
                .then(a.coefficient.cmp(&b.coefficient));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::finite(n)
    }
}

impl std::ops::Add for &Ordinal {
    type Output = Ordinal;
    fn add(self, rhs: &Ordinal) -> Ordinal {
        Ordinal::add(self, rhs)
    }
}

impl std::ops::Mul for &Ordinal {
    type Output = Ordinal;
    fn mul(self, rhs: &Ordinal) -> Ordinal {
        Ordinal::mul(self, rhs)
    }
}

// Text form: "w^{E}*c + ...", braces dropped when the exponent is an integer or plain w.

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, t) in self.terms.iter().enumerate() {
            if idx > 0 {
                f.write_str("+")?;
            }
            if t.exponent.is_zero() {
                write!(f, "{}", t.coefficient)?;
                continue;
            }
            f.write_str("w")?;
            if t.exponent != Ordinal::one() {
                if t.exponent.is_finite() || t.exponent == Ordinal::omega() {
                    write!(f, "^{}", t.exponent)?;
                } else {
                    write!(f, "^{{{}}}", t.exponent)?;
                }
            }
            if t.coefficient > 1 {
                write!(f, "*{}", t.coefficient)?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, what: &str) -> Error {
        Error::Parse(format!(
            "ordinal: {what} at byte {} in {:?}",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number too large"))
    }

    fn sum(&mut self) -> Result<Ordinal> {
        let mut acc = self.term()?;
        while self.eat(b'+') {
            let t = self.term()?;
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Ordinal> {
        let base = match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let exponent = if self.eat(b'^') {
                    if self.eat(b'{') {
                        let e = self.sum()?;
                        if !self.eat(b'}') {
                            return Err(self.err("expected '}'"));
                        }
                        e
                    } else if self.peek() == Some(b'w') {
                        self.pos += 1;
                        Ordinal::omega()
                    } else {
                        Ordinal::finite(self.number()?)
                    }
                } else {
                    Ordinal::one()
                };
                Ordinal::omega_pow(exponent)
            }
            Some(c) if c.is_ascii_digit() => Ordinal::finite(self.number()?),
            _ => return Err(self.err("expected 'w' or a number")),
        };
        if self.eat(b'*') {
            let c = self.number()?;
            Ok(base.mul_finite(c))
        } else {
            Ok(base)
        }
    }
}

impl FromStr for Ordinal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
        };
        let o = p.sum()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(o)
    }
}

// JSON: a non-negative integer for finite ordinals, otherwise {"terms": [[<exponent>, c], ...]}.

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if let Some(n) = self.as_finite() {
            return s.serialize_u64(n);
        }
        struct Terms<'a>(&'a [Term]);
        impl Serialize for Terms<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for t in self.0 {
                    seq.serialize_element(&(&t.exponent, t.coefficient))?;
                }
                seq.end()
            }
        }
        let mut st = s.serialize_struct("Ordinal", 1)?;
        st.serialize_field("terms", &Terms(&self.terms))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Finite(u64),
            Text(String),
            Terms { terms: Vec<(Ordinal, u64)> },
        }
        match Repr::deserialize(d)? {
            Repr::Finite(n) => Ok(Ordinal::finite(n)),
            Repr::Text(s) => s.parse().map_err(de::Error::custom),
            Repr::Terms { terms } => Ordinal::from_terms(
                terms
                    .into_iter()
                    .map(|(exponent, coefficient)| Term {
                        exponent,
                        coefficient,
                    })
                    .collect(),
            )
            .map_err(de::Error::custom),
        }
    }
}

#[cfg(test)]
pub(crate) mod strategies {
    use super::*;
    use proptest::prelude::*;

    /// Random CNF ordinals with hereditary depth up to `depth`.
    pub fn ordinal(depth: u32) -> BoxedStrategy<Ordinal> {
        if depth == 0 {
            return (0u64..6).prop_map(Ordinal::finite).boxed();
        }
        prop::collection::vec((ordinal(depth - 1), 1u64..4), 0..4)
            .prop_map(|raw| {
                raw.into_iter()
                    .fold(Ordinal::zero(), |acc, (e, c)| acc.add(&Ordinal::monomial(e, c)))
            })
            .boxed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn comparisons() {
        assert_eq!(ord_cmp(&Ordinal::omega(), &Ordinal::finite(5)), Ordering::Greater);
        assert_eq!(ord_cmp(&o("w^2+w"), &o("w^2+w")), Ordering::Equal);
        assert_eq!(ord_cmp(&o("w+3"), &o("w*2")), Ordering::Less);
        assert!(o("w^w") > o("w^5*100+w"));
    }

    #[test]
    fn addition_examples() {
        assert_eq!(ord_add(&o("w^2+1"), &o("w")), o("w^2+w"));
        let chain = ord_add(&ord_add(&o("w^2"), &o("w")), &o("1"));
        assert_eq!(chain, o("w^2+w+1"));
        assert_ne!(chain, o("w^2+w"));
        let a = o("w^w+3");
        assert_eq!(ord_add(&Ordinal::zero(), &a), a);
        assert_eq!(ord_add(&a, &Ordinal::zero()), a);
        assert_eq!(ord_add(&o("3"), &o("w")), o("w"));
    }

    #[test]
    fn subtraction_examples() {
        assert_eq!(ord_sub(&o("w"), &o("3")).unwrap(), o("w"));
        let r = ord_sub(&o("w^2+w"), &o("w^2")).unwrap();
        assert_eq!(r, o("w"));
        assert_eq!(ord_add(&o("w^2"), &r), o("w^2+w"));
        assert_eq!(ord_sub(&o("5"), &o("2")).unwrap(), o("3"));
        assert_eq!(ord_sub(&o("w+1"), &o("w+1")).unwrap(), Ordinal::zero());
        assert_eq!(ord_sub(&o("w*3+2"), &o("w+5")).unwrap(), o("w*2+2"));
    }

    #[test]
    fn subtraction_error_when_subtrahend_larger() {
        assert!(matches!(
            ord_sub(&o("2"), &o("5")),
            Err(Error::UndefinedSubtraction { .. })
        ));
        assert!(ord_sub(&o("w"), &o("w+1")).is_err());
        assert!(ord_sub(&Ordinal::zero(), &o("1")).is_err());
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(ord_mul(&o("w"), &o("2")), o("w*2"));
        assert_eq!(o("w*2").terms().len(), 1);
        assert_eq!(o("w*2").terms()[0].coefficient, 2);
        assert_eq!(ord_mul(&o("1"), &o("w")), o("w"));
        assert_eq!(ord_mul(&o("2"), &o("w")), o("w"));
        assert_eq!(ord_mul(&o("w+1"), &o("w")), o("w^2"));
        assert_eq!(ord_mul(&o("w+1"), &o("2")), o("w*2+1"));
        assert_eq!(ord_mul(&o("w^2+w"), &o("w+3")), o("w^3+w^2*3+w"));
    }

    #[test]
    fn omega_powers() {
        assert_eq!(ord_pow_omega(&Ordinal::zero()), Ordinal::one());
        assert_eq!(ord_pow_omega(&Ordinal::one()), Ordinal::omega());
        assert_eq!(ord_pow_omega(&Ordinal::omega()).to_string(), "w^w");
    }

    #[test]
    fn leading_powers() {
        let a = o("w^2*3+w+4");
        let lp = leading_power(&a).unwrap();
        assert_eq!(lp, o("w^2"));
        assert!(lp <= a && a < o("w^3"));
        assert_eq!(leading_power(&o("7")).unwrap(), Ordinal::one());
        assert_eq!(leading_power(&o("w")).unwrap(), o("w"));
        assert_eq!(leading_power(&Ordinal::zero()), Err(Error::LeadingPowerOfZero));
    }

    #[test]
    fn absorption() {
        assert!(absorbs(&o("1"), &o("w")));
        assert!(!absorbs(&o("w"), &o("w*5")));
        assert!(!absorbs(&o("3"), &Ordinal::zero()));
        assert!(absorbs(&o("w"), &o("w^2+1")));
    }

    #[test]
    fn text_round_trip_and_forms() {
        for s in ["0", "7", "w", "w*2", "w^2*3+w+4", "w^w", "w^{w+1}*2+5", "w^{w^w}"] {
            assert_eq!(o(s).to_string(), s);
        }
        assert_eq!(o("w^{2}"), o("w^2"));
        assert_eq!(o(" w ^ 2 * 3 + w + 4 "), o("w^2*3+w+4"));
        assert!("w^".parse::<Ordinal>().is_err());
        assert!("w+".parse::<Ordinal>().is_err());
        assert!("x".parse::<Ordinal>().is_err());
    }

    #[test]
    fn json_forms() {
        assert_eq!(serde_json::to_string(&o("5")).unwrap(), "5");
        assert_eq!(
            serde_json::to_string(&o("w^2+3")).unwrap(),
            r#"{"terms":[[2,1],[0,3]]}"#
        );
        let back: Ordinal = serde_json::from_str(r#"{"terms":[[{"terms":[[1,1]]},2],[0,1]]}"#).unwrap();
        assert_eq!(back, o("w^w*2+1"));
        let text: Ordinal = serde_json::from_str(r#""w+3""#).unwrap();
        assert_eq!(text, o("w+3"));
        assert!(serde_json::from_str::<Ordinal>(r#"{"terms":[[0,1],[1,1]]}"#).is_err());
    }

    proptest! {
        #[test]
        fn addition_is_associative(a in strategies::ordinal(2), b in strategies::ordinal(2), c in strategies::ordinal(2)) {
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        }

        #[test]
        fn multiplication_is_associative_and_left_distributive(a in strategies::ordinal(1), b in strategies::ordinal(1), c in strategies::ordinal(1)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn subtraction_inverts_addition(a in strategies::ordinal(2), b in strategies::ordinal(2)) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let rho = hi.sub(&lo).unwrap();
            prop_assert_eq!(lo.add(&rho), hi);
        }

        #[test]
        fn addition_monotone_in_right_argument(a in strategies::ordinal(2), b in strategies::ordinal(2), g in strategies::ordinal(2)) {
            let (lo, hi) = if b <= g { (b, g) } else { (g, b) };
            prop_assert!(a.add(&lo) <= a.add(&hi));
        }

        #[test]
        fn leading_power_brackets(a in strategies::ordinal(2)) {
            prop_assume!(!a.is_zero());
            let lp = a.leading_power().unwrap();
            prop_assert!(lp <= a);
            prop_assert!(a < lp.mul(&Ordinal::omega()));
        }

        #[test]
        fn absorbs_matches_subtraction(g in strategies::ordinal(2), a in strategies::ordinal(2)) {
            prop_assume!(!g.is_zero());
            if g <= a {
                prop_assert_eq!(a.absorbs(&g), a.sub(&g).unwrap() == a);
            } else {
                prop_assert!(!a.absorbs(&g));
            }
            prop_assert_eq!(a.absorbs(&g), g.add(&a) == a);
        }

        #[test]
        fn display_parse_round_trip(a in strategies::ordinal(3)) {
            prop_assert_eq!(a.to_string().parse::<Ordinal>().unwrap(), a.clone());
            let json = serde_json::to_string(&a).unwrap();
            prop_assert_eq!(serde_json::from_str::<Ordinal>(&json).unwrap(), a);
        }
    }
}
