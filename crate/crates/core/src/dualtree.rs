//! Binary-tree representation of the dual basis `e_k*`.
//!
//! Every node of the full binary tree receives a value `(c, ω·m + ℓ)`. The root of `g_k` carries
//! `(1, ω·0 + k)`, and a node whose `ℓ` exceeds 2 splits along `φ(ℓ)` into its `a`-part and its
//! `b`-part. Pairing a node against `x` multiplies the coefficients on the path with
//! `((I − P_m)x)_ℓ`, so the values at the two children always add up to the value at the parent.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bdspace::BDSpace;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeNode {
    path: Vec<u8>,
}

impl TreeNode {
    pub fn root() -> Self {
        TreeNode::default()
    }

    pub fn new(path: Vec<u8>) -> Result<Self> {
        if path.iter().any(|&d| d > 1) {
            return Err(Error::Parse(format!(
                "node path {path:?} has a digit other than 0/1"
            )));
        }
        Ok(TreeNode { path })
    }

    pub fn path(&self) -> &[u8] {
        &self.path
    }

    /// `L(N)`. The empty path is the root, see [`TreeNode::is_root`].
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_root(&self) -> bool {
        self.path.is_empty()
    }

    /// `I(N, t)`, the first `t` steps of the path.
    pub fn truncate(&self, t: usize) -> TreeNode {
        TreeNode {
            path: self.path[..t.min(self.path.len())].to_vec(),
        }
    }

    pub fn child(&self, digit: u8) -> TreeNode {
        let mut path = self.path.clone();
        path.push(digit);
        TreeNode { path }
    }

    pub fn is_prefix_of(&self, other: &TreeNode) -> bool {
        other.path.starts_with(&self.path)
    }

    pub fn comparable(&self, other: &TreeNode) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            return f.write_str("()");
        }
        for d in &self.path {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Accepts a 0/1 string; the empty string and `()` denote the root.
impl FromStr for TreeNode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "()" {
            return Ok(TreeNode::root());
        }
        let path = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("bad node {s:?}: use a string of 0s and 1s"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(TreeNode { path })
    }
}

impl Serialize for TreeNode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.path.iter().map(u8::to_string).collect::<String>())
    }
}

impl<'de> Deserialize<'de> for TreeNode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WValue {
    Inf,
    Finite { c: Rational, m: usize, l: usize },
}

impl WValue {
    pub fn finite(c: Rational, m: usize, l: usize) -> Self {
        WValue::Finite { c, m, l }
    }

    /// `V`.
    pub fn v(&self) -> Option<&Rational> {
        match self {
            WValue::Finite { c, .. } => Some(c),
            WValue::Inf => None,
        }
    }

    /// `Q`.
    pub fn q(&self) -> Option<usize> {
        match self {
            WValue::Finite { m, .. } => Some(*m),
            WValue::Inf => None,
        }
    }

    /// `R`.
    pub fn r(&self) -> Option<usize> {
        match self {
            WValue::Finite { l, .. } => Some(*l),
            WValue::Inf => None,
        }
    }
}

impl fmt::Display for WValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WValue::Inf => f.write_str("inf"),
            WValue::Finite { c, m, l } => write!(f, "({}, w*{}+{})", rational::format_rational(c), m, l),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WValueRepr {
    Inf {
        inf: bool,
    },
    Finite {
        #[serde(with = "rational::serde_str")]
        c: Rational,
        m: usize,
        l: usize,
    },
}

impl Serialize for WValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.clone() {
            WValue::Inf => WValueRepr::Inf { inf: true },
            WValue::Finite { c, m, l } => WValueRepr::Finite { c, m, l },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match WValueRepr::deserialize(d)? {
            WValueRepr::Inf { inf: true } => Ok(WValue::Inf),
            WValueRepr::Inf { inf: false } => Err(serde::de::Error::custom("\"inf\" must be true")),
            WValueRepr::Finite { c, m, l } => Ok(WValue::Finite { c, m, l }),
        }
    }
}

/// `g_k` on a fixed space, with every node evaluated so far cached.
pub struct TreeValuation<'a> {
    space: &'a BDSpace,
    k: usize,
    memo: HashMap<TreeNode, (Rational, usize, usize)>,
}

impl<'a> TreeValuation<'a> {
    pub fn new(space: &'a BDSpace, k: usize) -> Result<Self> {
        let hi = *space.dims().last().expect("a built space has a level");
        if k == 0 || k > hi {
            return Err(Error::IndexOutOfRange { index: k, lo: 1, hi });
        }
        let mut memo = HashMap::new();
        memo.insert(TreeNode::root(), (Rational::one(), 0, k));
        Ok(TreeValuation { space, k, memo })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn value(&mut self, node: &TreeNode) -> Result<WValue> {
        let (c, m, l) = self.triple(node)?;
        Ok(WValue::finite(c, m, l))
    }

    fn triple(&mut self, node: &TreeNode) -> Result<(Rational, usize, usize)> {
        if let Some(hit) = self.memo.get(node) {
            return Ok(hit.clone());
        }
        let parent = node.truncate(node.len() - 1);
        let (_, m, l) = self.triple(&parent)?;
        let digit = node.path()[node.len() - 1];
        let value = if l <= 2 {
            (Rational::zero(), m, 0)
        } else {
            let t = self.space.phi(l)?;
            let sigma = |s: i8| if s > 0 { Rational::one() } else { -Rational::one() };
            let p = self.space.params();
            if digit == 0 {
                (sigma(t.sigma1) * &p.a, m, t.i)
            } else {
                (sigma(t.sigma2) * &p.b, m.max(t.m), t.j)
            }
        };
        self.memo.insert(node.clone(), value.clone());
        Ok(value)
    }

    /// `∏_{t=1}^{L} V(g_k(I(N, t)))`; the root contributes nothing.
    pub fn path_product(&mut self, node: &TreeNode) -> Result<Rational> {
        let mut prod = Rational::one();
        for t in 1..=node.len() {
            let (c, _, _) = self.triple(&node.truncate(t))?;
            if c.is_zero() {
                return Ok(c);
            }
            prod *= c;
        }
        Ok(prod)
    }

    /// `⟨g_k, N, x⟩`.
    pub fn eval(&mut self, node: &TreeNode, x: &XWindow) -> Result<Rational> {
        let prod = self.path_product(node)?;
        if prod.is_zero() {
            return Ok(prod);
        }
        let (_, m, r) = self.triple(node)?;
        if r == 0 {
            return Ok(Rational::zero());
        }
        Ok(prod * x.residual_coord(self.space, m, r)?)
    }

    /// Least `t` with `R(g_k(I(B, t))) ≤ d_s`.
    pub fn stopping_depth(&mut self, branch: &TreeNode, s: usize) -> Result<usize> {
        let ds = self.space.dim(s)?;
        for t in 0..=branch.len() {
            let (_, _, r) = self.triple(&branch.truncate(t))?;
            if r <= ds {
                return Ok(t);
            }
        }
        Err(Error::BranchTooShort(branch.len()))
    }

    /// The frontier of first nodes with `R ≤ d_s`, in left-to-right order.
    pub fn maximal_antichain(&mut self, s: usize) -> Result<Vec<TreeNode>> {
        let ds = self.space.dim(s)?;
        let mut out = Vec::new();
        let mut stack = vec![TreeNode::root()];
        while let Some(node) = stack.pop() {
            let (_, _, r) = self.triple(&node)?;
            if r <= ds {
                out.push(node);
            } else {
                stack.push(node.child(1));
                stack.push(node.child(0));
            }
        }
        Ok(out)
    }
}

pub fn g_value(space: &BDSpace, k: usize, node: &TreeNode) -> Result<WValue> {
    TreeValuation::new(space, k)?.value(node)
}

pub fn node_eval(space: &BDSpace, k: usize, node: &TreeNode, x: &XWindow) -> Result<Rational> {
    TreeValuation::new(space, k)?.eval(node, x)
}

pub fn stopping_depth(space: &BDSpace, k: usize, branch: &TreeNode, s: usize) -> Result<usize> {
    TreeValuation::new(space, k)?.stopping_depth(branch, s)
}

pub fn maximal_antichain(space: &BDSpace, k: usize, s: usize) -> Result<Vec<TreeNode>> {
    TreeValuation::new(space, k)?.maximal_antichain(s)
}

/// The coordinates of a vector of `X` on the first `d_N` places.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct XWindow {
    pub level: usize,
    #[serde(with = "rational::serde_vec")]
    pub coords: Vec<Rational>,
}

impl XWindow {
    pub fn new(space: &BDSpace, level: usize, coords: Vec<Rational>) -> Result<Self> {
        let d = space.dim(level)?;
        if coords.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "window E_{level} has {d} coordinates, got {}",
                coords.len()
            )));
        }
        Ok(XWindow { level, coords })
    }

    /// The window of `i_s z` on `E_N`, an element of `P_s X`.
    pub fn from_level(space: &BDSpace, s: usize, z: &[Rational], level: usize) -> Result<Self> {
        let coords = space.embed(s, level)?.mul_vec(z)?;
        XWindow::new(space, level, coords)
    }

    /// `e_r*(x)`.
    pub fn coord(&self, r: usize) -> Result<&Rational> {
        self.coords
            .get(r.wrapping_sub(1))
            .ok_or_else(|| Error::WindowTooSmall(format!("coordinate {r} is outside E_{}", self.level)))
    }

    /// `((I − P_m) x)_r`. The first `d_N` coordinates of `P_m x` agree with `x` once `m ≥ N`.
    pub fn residual_coord(&self, space: &BDSpace, m: usize, r: usize) -> Result<Rational> {
        let xr = self.coord(r)?.clone();
        if m == 0 {
            return Ok(xr);
        }
        if m >= self.level {
            return Ok(Rational::zero());
        }
        let e = space.embed(m, self.level)?;
        let dm = e.cols();
        let pr: Rational = e
            .row(r - 1)
            .iter()
            .zip(&self.coords[..dm])
            .filter(|(a, b)| !a.is_zero() && !b.is_zero())
            .map(|(a, b)| a * b)
            .sum();
        Ok(xr - pr)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitFailure {
    pub node: TreeNode,
    #[serde(with = "rational::serde_str")]
    pub parent: Rational,
    #[serde(with = "rational::serde_str")]
    pub children: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AntichainReport {
    pub k: usize,
    pub s: usize,
    pub antichain: Vec<TreeNode>,
    #[serde(with = "rational::serde_str")]
    pub coordinate: Rational,
    #[serde(with = "rational::serde_str")]
    pub antichain_sum: Rational,
    pub splits_checked: usize,
    pub split_failures: Vec<SplitFailure>,
    pub holds: bool,
}

/// Compares `e_k*(x)` with the sum over the stopping antichain and checks the two-child split at
/// every node above it.
pub fn antichain_identity_check(space: &BDSpace, k: usize, s: usize, x: &XWindow) -> Result<AntichainReport> {
    let mut tv = TreeValuation::new(space, k)?;
    let antichain = tv.maximal_antichain(s)?;
    let ds = space.dim(s)?;
    let coordinate = x.coord(k)?.clone();
    let mut antichain_sum = Rational::zero();
    for node in &antichain {
        antichain_sum += tv.eval(node, x)?;
    }
    let mut splits_checked = 0;
    let mut split_failures = Vec::new();
    let mut stack = vec![TreeNode::root()];
    while let Some(node) = stack.pop() {
        let (_, _, r) = tv.triple(&node)?;
        if r <= ds {
            continue;
        }
        let parent = tv.eval(&node, x)?;
        let (c0, c1) = (node.child(0), node.child(1));
        let children = tv.eval(&c0, x)? + tv.eval(&c1, x)?;
        splits_checked += 1;
        if parent != children {
            split_failures.push(SplitFailure {
                node: node.clone(),
                parent,
                children,
            });
        }
        stack.push(c1);
        stack.push(c0);
    }
    let holds = coordinate == antichain_sum && split_failures.is_empty();
    Ok(AntichainReport {
        k,
        s,
        antichain,
        coordinate,
        antichain_sum,
        splits_checked,
        split_failures,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SzlenkBound {
    #[serde(with = "rational::serde_str")]
    pub eps: Rational,
    /// The constant used for `sup ‖(I − P_m)* e_k*‖`, namely `1 + λ`.
    #[serde(with = "rational::serde_str")]
    pub s: Rational,
    pub n: u32,
    /// `a^N · S / (1 − a)`.
    #[serde(with = "rational::serde_str")]
    pub tail: Rational,
    #[serde(with = "rational::serde_str")]
    pub threshold: Rational,
    #[serde(serialize_with = "serialize_biguint")]
    pub bound: BigUint,
}

impl SzlenkBound {
    /// Re-checks the strict tail inequality and the bound value.
    pub fn certificate_holds(&self, a: &Rational) -> bool {
        let one = Rational::one();
        let tail = pow(a, self.n) * &self.s / (&one - a);
        let previous_fails = self.n == 1 || pow(a, self.n - 1) * &self.s / (&one - a) >= self.threshold;
        tail == self.tail
            && self.tail < self.threshold
            && previous_fails
            && self.bound == (BigUint::one() << (self.n + 1)) + BigUint::one()
    }
}

fn serialize_biguint<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match u64::try_from(v) {
        Ok(small) => s.serialize_u64(small),
        Err(_) => s.collect_str(v),
    }
}

fn pow(r: &Rational, n: u32) -> Rational {
    (0..n).fold(Rational::one(), |acc, _| acc * r)
}

/// `2^{N+1} + 1` for the least `N ≥ 1` with `a^N (1+λ)/(1 − a) < ε/4`.
pub fn szlenk_bound_c(space: &BDSpace, eps: &Rational) -> Result<SzlenkBound> {
    let p = space.params();
    let one = Rational::one();
    if p.a >= one {
        return Err(Error::ParamInvalid(format!(
            "a = {} must be < 1 for a Szlenk bound",
            p.a
        )));
    }
    if *eps <= Rational::zero() {
        return Err(Error::NonpositiveEpsilon(eps.clone()));
    }
    let s = &one + &p.lambda;
    let threshold = eps / Rational::from_integer(4.into());
    let scale = &s / (&one - &p.a);
    let mut n = 1u32;
    let mut tail = &p.a * &scale;
    while tail >= threshold {
        n += 1;
        tail *= &p.a;
    }
    Ok(SzlenkBound {
        eps: eps.clone(),
        s,
        n,
        tail,
        threshold,
        bound: (BigUint::one() << (n + 1)) + BigUint::one(),
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// `Σ_j c_j ((I − P_{m_j}) x)_{r_j}` for a truncated series with `|c_j| ≤ a^{j-1}`.
    pub fn truncated_series_eval(
        space: &BDSpace,
        terms: &[(Rational, usize, usize)],
        x: &XWindow,
    ) -> Result<Rational> {
        let a = &space.params().a;
        let mut total = Rational::zero();
        let mut cap = Rational::one();
        for (c, m, r) in terms {
            assert!(crate::rational::abs(c) <= cap, "coefficient exceeds a^(j-1)");
            total += c * x.residual_coord(space, *m, *r)?;
            cap *= a;
        }
        Ok(total)
    }
}
