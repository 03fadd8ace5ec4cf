//! The Bourgain–Delbaen construction over exact rationals.
//!
//! `E_n` is the span of the first `d_n` unit vectors of ℓ∞. Each new coordinate
//! `k ∈ (d_n, d_{n+1}]` is labelled by a tuple `φ(k) = (σ′, i, m, σ″, j)` and carries the
//! functional `f_{φ(k)}(x) = aσ′x_i + bσ″(x − i_{m,n}π_m x)_j` on `E_n`. The extension
//! `i_{n,n+1}` keeps the old coordinates and appends these functionals; composing extensions gives
//! `i_{m,n}`, and `P_m` is seen through finite windows `E_N` as `i_{m,N}π_m`.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm_inf, Matrix};
use crate::par::{self, Mode};
use crate::rational::{self, sign, Rational};

/// Largest level built unless the caller raises the cap explicitly.
pub const DEFAULT_LEVEL_CAP: usize = 5;

/// Within a level, tuples are enumerated lexicographically on `(m, i, σ′, j, σ″)`, +1 before −1.
pub const PHI_ORDERING: &str = "lexicographic on (m, i, sigma1, j, sigma2); +1 before -1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BDParams {
    #[serde(with = "rational::serde_str")]
    pub a: Rational,
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
    #[serde(with = "rational::serde_str")]
    pub lambda: Rational,
}

impl BDParams {
    /// Requires `0 < b < a < 1`, `λ > 1` and `a + 2bλ < λ`.
    pub fn new(a: Rational, b: Rational, lambda: Rational) -> Result<Self> {
        let p = Self::exploratory(a, b, lambda)?;
        if p.a >= Rational::one() {
            return Err(Error::ParamInvalid(format!(
                "a = {} must be < 1 (a = 1 is only allowed for exploration)",
                p.a
            )));
        }
        Ok(p)
    }

    /// As [`BDParams::new`] but admits `a = 1`, for matrix exploration only.
    pub fn exploratory(a: Rational, b: Rational, lambda: Rational) -> Result<Self> {
        let bad = |msg: String| Err(Error::ParamInvalid(msg));
        if !b.is_positive() {
            return bad(format!("b = {b} must be positive"));
        }
        if b >= a {
            return bad(format!("b = {b} must be < a = {a}"));
        }
        if a > Rational::one() {
            return bad(format!("a = {a} must be ≤ 1"));
        }
        if lambda <= Rational::one() {
            return bad(format!("lambda = {lambda} must be > 1"));
        }
        let lhs = &a + Rational::from_integer(2.into()) * &b * &lambda;
        if lhs >= lambda {
            return bad(format!("a + 2*b*lambda = {lhs} must be < lambda = {lambda}"));
        }
        Ok(BDParams { a, b, lambda })
    }

    /// `(1/2, 1/4, 2)`.
    pub fn standard() -> Self {
        BDParams::new(rational::rat(1, 2), rational::rat(1, 4), rational::int(2))
            .expect("standard triple is valid")
    }

    /// Parses `"a,b,lambda"`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').collect();
        let [a, b, l] = parts.as_slice() else {
            return Err(Error::Parse(format!("expected a,b,lambda, got {text:?}")));
        };
        BDParams::new(
            rational::parse_rational(a)?,
            rational::parse_rational(b)?,
            rational::parse_rational(l)?,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PhiTuple {
    pub sigma1: i8,
    pub i: usize,
    pub m: usize,
    pub sigma2: i8,
    pub j: usize,
}

impl PhiTuple {
    pub fn negated(&self) -> PhiTuple {
        PhiTuple {
            sigma1: -self.sigma1,
            sigma2: -self.sigma2,
            ..*self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhiEntry {
    pub k: usize,
    pub level: usize,
    pub tuple: PhiTuple,
}

#[derive(Debug, Clone)]
pub struct BDSpace {
    params: BDParams,
    /// `dims[n - 1] = d_n`.
    dims: Vec<usize>,
    /// `phi[k - 3]` for `2 < k ≤ d_N`.
    phi: Vec<PhiEntry>,
    /// `i_{m,n}` for `1 ≤ m < n ≤ N`, as `d_n × d_m` matrices.
    embeds: HashMap<(usize, usize), Matrix>,
}

/// `d_1, …, d_levels` without building anything else.
pub fn dimension_sequence(levels: usize) -> Vec<usize> {
    let mut dims = Vec::with_capacity(levels);
    for n in 1..=levels {
        let d = match n {
            1 => 1,
            2 => 2,
            _ => {
                let dn = dims[n - 2];
                let below: usize = dims[..n - 2].iter().sum();
                dn + 4 * dn * below
            }
        };
        dims.push(d);
    }
    dims
}

fn enumerate_level(n: usize, dims: &[usize], first_k: usize) -> Vec<PhiEntry> {
    let dn = dims[n - 1];
    let mut out = Vec::new();
    for m in 1..n {
        for i in 1..=dims[m - 1] {
            for s1 in [1i8, -1] {
                for j in 1..=dn {
                    for s2 in [1i8, -1] {
                        out.push(PhiEntry {
                            k: first_k + out.len(),
                            level: n,
                            tuple: PhiTuple {
                                sigma1: s1,
                                i,
                                m,
                                sigma2: s2,
                                j,
                            },
                        });
                    }
                }
            }
        }
    }
    out
}

impl BDSpace {
    pub fn build(params: BDParams, levels: usize) -> Result<Self> {
        Self::build_with(params, levels, DEFAULT_LEVEL_CAP, Mode::default())
    }

    /// Builds levels `1..=levels`; rows within a level are computed under `mode`.
    pub fn build_with(params: BDParams, levels: usize, cap: usize, mode: Mode) -> Result<Self> {
        if levels == 0 || levels > cap {
            return Err(Error::LevelOutOfRange {
                level: levels,
                max: cap,
            });
        }
        let dims = dimension_sequence(levels);
        let mut phi = Vec::new();
        for n in 2..levels {
            phi.extend(enumerate_level(n, &dims, dims[n - 1] + 1));
        }
        let mut space = BDSpace {
            params,
            dims,
            phi,
            embeds: HashMap::new(),
        };
        if levels >= 2 {
            let mut e12 = Matrix::zeros(2, 1);
            e12.set(0, 0, Rational::one());
            space.embeds.insert((1, 2), e12);
        }
        for n in 2..levels {
            for m in 1..=n {
                let next = space.extend_rows(m, n, mode)?;
                space.embeds.insert((m, n + 1), next);
            }
        }
        Ok(space)
    }

    /// `i_{m,n+1}` from `i_{m,n}` (identity when `m = n`).
    fn extend_rows(&self, m: usize, n: usize, mode: Mode) -> Result<Matrix> {
        let dm = self.dim(m)?;
        let dn = self.dim(n)?;
        let dn1 = self.dim(n + 1)?;
        let base = self.embed(m, n)?;
        let new_rows = par::map_range(mode, dn..dn1, |row| -> Result<Vec<Rational>> {
            let f = self.functional_row(row + 1)?;
            let mut out = vec![Rational::zero(); dm];
            for (c, coef) in f.iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                for (o, b) in out.iter_mut().zip(base.row(c)) {
                    if !b.is_zero() {
                        *o += coef * b;
                    }
                }
            }
            Ok(out)
        });
        let mut rows: Vec<Vec<Rational>> = base.row_vectors().map(<[Rational]>::to_vec).collect();
        for r in new_rows {
            rows.push(r?);
        }
        Matrix::from_rows(rows)
    }

    pub fn params(&self) -> &BDParams {
        &self.params
    }

    pub fn levels(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `d_n`.
    pub fn dim(&self, n: usize) -> Result<usize> {
        if n == 0 || n > self.dims.len() {
            return Err(Error::LevelOutOfRange {
                level: n,
                max: self.dims.len(),
            });
        }
        Ok(self.dims[n - 1])
    }

    /// The level `n` with `d_n < k ≤ d_{n+1}`.
    pub fn level_of(&self, k: usize) -> Result<usize> {
        Ok(self.phi_entry(k)?.level)
    }

    pub fn phi_entry(&self, k: usize) -> Result<&PhiEntry> {
        let hi = *self.dims.last().unwrap();
        if k < 3 || k > hi {
            return Err(Error::IndexOutOfRange { index: k, lo: 3, hi });
        }
        Ok(&self.phi[k - 3])
    }

    pub fn phi(&self, k: usize) -> Result<PhiTuple> {
        Ok(self.phi_entry(k)?.tuple)
    }

    pub fn phi_table(&self) -> &[PhiEntry] {
        &self.phi
    }

    /// Row vector of `f_{φ(k)}` on `E_n`, where `d_n < k ≤ d_{n+1}`.
    pub fn functional_row(&self, k: usize) -> Result<Vec<Rational>> {
        let entry = self.phi_entry(k)?;
        let n = entry.level;
        let t = entry.tuple;
        let dn = self.dim(n)?;
        let dm = self.dim(t.m)?;
        let sigma = |s: i8| if s > 0 { Rational::one() } else { -Rational::one() };
        let ca = sigma(t.sigma1) * &self.params.a;
        let cb = sigma(t.sigma2) * &self.params.b;
        let mut row = vec![Rational::zero(); dn];
        row[t.i - 1] += ca;
        row[t.j - 1] += &cb;
        // (i_{m,n} π_m x)_j = Σ_{c ≤ d_m} i_{m,n}[j][c] x_c
        let lift = self.embed(t.m, n)?;
        for (c, v) in lift.row(t.j - 1).iter().enumerate().take(dm) {
            if !v.is_zero() {
                row[c] -= &cb * v;
            }
        }
        Ok(row)
    }

    /// `i_{m,n}` as a `d_n × d_m` matrix; the identity when `m = n`.
    pub fn embed(&self, m: usize, n: usize) -> Result<Matrix> {
        self.embed_ref(m, n).map(|c| c.into_owned())
    }

    fn embed_ref(&self, m: usize, n: usize) -> Result<std::borrow::Cow<'_, Matrix>> {
        let max = self.levels();
        for level in [m, n] {
            if level == 0 || level > max {
                return Err(Error::LevelOutOfRange { level, max });
            }
        }
        if m > n {
            return Err(Error::LevelOutOfRange { level: m, max: n });
        }
        if m == n {
            return Ok(std::borrow::Cow::Owned(Matrix::identity(self.dim(n)?)));
        }
        Ok(std::borrow::Cow::Borrowed(&self.embeds[&(m, n)]))
    }

    /// `P_m` on the window `E_N`: `i_{m,N}π_m`. `m = 0` gives 0 and `m = N` the identity.
    pub fn proj_window(&self, m: usize, window: usize) -> Result<Matrix> {
        let dn = self.dim(window)?;
        let mut p = Matrix::zeros(dn, dn);
        if m == 0 {
            return Ok(p);
        }
        let e = self.embed_ref(m, window)?;
        for r in 0..dn {
            for c in 0..e.cols() {
                p.set(r, c, e.get(r, c).clone());
            }
        }
        Ok(p)
    }

    /// `(P_m x)` for a window vector `x` on `E_N`, without forming the full projection.
    pub fn apply_proj(&self, m: usize, x: &[Rational]) -> Result<Vec<Rational>> {
        let window = self
            .dims
            .iter()
            .position(|&d| d == x.len())
            .map(|i| i + 1)
            .ok_or_else(|| Error::DimensionMismatch(format!("no level has dimension {}", x.len())))?;
        if m == 0 {
            return Ok(vec![Rational::zero(); x.len()]);
        }
        let e = self.embed_ref(m, window)?;
        e.mul_vec(&x[..e.cols()])
    }

    /// `‖i_{m,n}‖ ≤ λ` for every `1 ≤ m < n ≤ levels`.
    pub fn verify_lambda_bound(&self, levels: usize) -> Result<LambdaReport> {
        self.dim(levels)?;
        let mut entries = Vec::new();
        for n in 2..=levels {
            for m in 1..n {
                let norm = self.embed_ref(m, n)?.op_norm_inf();
                if norm > self.params.lambda {
                    return Err(Error::BoundViolation {
                        m,
                        n,
                        norm: Box::new(norm),
                        lambda: Box::new(self.params.lambda.clone()),
                    });
                }
                entries.push(NormEntry { m, n, norm });
            }
        }
        Ok(LambdaReport {
            lambda: self.params.lambda.clone(),
            entries,
        })
    }

    /// Certifies `‖Σ a_k e_k*‖ ≥ λ⁻¹ Σ|a_k|` by pairing against `P_m(sign a)` seen on `E_N`.
    pub fn l1_lower_witness(&self, coeffs: &[Rational], m: usize, window: usize) -> Result<L1Witness> {
        if m >= window {
            return Err(Error::LevelOutOfRange {
                level: m,
                max: window - 1,
            });
        }
        let dm = self.dim(m)?;
        if coeffs.len() != dm {
            return Err(Error::DimensionMismatch(format!(
                "expected {dm} coefficients on E_{m}, got {}",
                coeffs.len()
            )));
        }
        let signs: Vec<Rational> = coeffs.iter().map(sign).collect();
        let x = self.embed_ref(m, window)?.mul_vec(&signs)?;
        let l1: Rational = coeffs.iter().map(|a| a.abs()).sum();
        let pairing = dot(coeffs, &x[..dm]);
        let window_norm = norm_inf(&x);
        let certified = if window_norm.is_zero() {
            Rational::zero()
        } else {
            &pairing / &window_norm
        };
        let lower = &l1 / &self.params.lambda;
        Ok(L1Witness {
            holds: certified >= lower,
            l1,
            pairing,
            window_norm,
            certified,
            lower,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormEntry {
    pub m: usize,
    pub n: usize,
    #[serde(with = "rational::serde_str")]
    pub norm: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LambdaReport {
    #[serde(with = "rational::serde_str")]
    pub lambda: Rational,
    pub entries: Vec<NormEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct L1Witness {
    #[serde(with = "rational::serde_str")]
    pub l1: Rational,
    #[serde(with = "rational::serde_str")]
    pub pairing: Rational,
    #[serde(with = "rational::serde_str")]
    pub window_norm: Rational,
    #[serde(with = "rational::serde_str")]
    pub certified: Rational,
    #[serde(with = "rational::serde_str")]
    pub lower: Rational,
    pub holds: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn std_space(levels: usize) -> BDSpace {
        BDSpace::build(BDParams::standard(), levels).unwrap()
    }

    #[test]
    fn dimensions() {
        let s = std_space(4);
        assert_eq!(s.dim(1).unwrap(), 1);
        assert_eq!(s.dim(2).unwrap(), 2);
        assert_eq!(s.dim(3).unwrap(), 10);
        assert_eq!(s.dim(4).unwrap(), 130);
        assert_eq!(dimension_sequence(5), vec![1, 2, 10, 130, 6890]);
        assert!(matches!(s.dim(5), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn phi_enumeration() {
        let s = std_space(3);
        let t = |s1, i, m, s2, j| PhiTuple {
            sigma1: s1,
            i,
            m,
            sigma2: s2,
            j,
        };
        assert_eq!(s.phi(3).unwrap(), t(1, 1, 1, 1, 1));
        assert_eq!(s.phi(5).unwrap(), t(1, 1, 1, 1, 2));
        assert_eq!(s.phi(9).unwrap(), t(-1, 1, 1, 1, 2));
        assert_eq!(s.phi(10).unwrap(), t(-1, 1, 1, -1, 2));
        assert!(matches!(s.phi(2), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(s.phi(11), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn phi_is_a_bijection_per_level() {
        let s = std_space(4);
        for n in 2..4 {
            let tuples: std::collections::HashSet<_> = s
                .phi_table()
                .iter()
                .filter(|e| e.level == n)
                .map(|e| e.tuple)
                .collect();
            let expected = 4 * s.dim(n).unwrap() * (1..n).map(|m| s.dim(m).unwrap()).sum::<usize>();
            assert_eq!(tuples.len(), expected);
            assert_eq!(tuples.len(), s.dim(n + 1).unwrap() - s.dim(n).unwrap());
            for t in &tuples {
                assert!(t.m < n && t.i <= s.dim(t.m).unwrap() && t.j <= s.dim(n).unwrap());
            }
        }
    }

    #[test]
    fn functional_rows() {
        let s = std_space(3);
        assert_eq!(s.functional_row(5).unwrap(), vec![rat(1, 2), rat(1, 4)]);
        assert_eq!(s.functional_row(3).unwrap(), vec![rat(1, 2), int(0)]);
        assert_eq!(s.functional_row(9).unwrap(), vec![rat(-1, 2), rat(1, 4)]);
    }

    #[test]
    fn embeddings() {
        let s = std_space(3);
        let e12 = s.embed(1, 2).unwrap();
        assert_eq!(e12, Matrix::from_rows(vec![vec![int(1)], vec![int(0)]]).unwrap());
        let e23 = s.embed(2, 3).unwrap();
        assert_eq!((e23.rows(), e23.cols()), (10, 2));
        assert_eq!(e23.row(0), &[int(1), int(0)]);
        assert_eq!(e23.row(1), &[int(0), int(1)]);
        for k in 3..=10 {
            assert_eq!(e23.row(k - 1), s.functional_row(k).unwrap().as_slice());
        }
        assert_eq!(s.embed(1, 3).unwrap(), e23.mul(&e12).unwrap());
        assert_eq!(e23.op_norm_inf(), int(1));
    }

    #[test]
    fn projection_windows() {
        let s = std_space(3);
        let p = s.proj_window(1, 3).unwrap();
        let mut e1 = vec![int(0); 10];
        e1[0] = int(1);
        let col = p.mul_vec(&e1).unwrap();
        let h = rat(1, 2);
        let expected = [
            int(1),
            int(0),
            h.clone(),
            h.clone(),
            h.clone(),
            h.clone(),
            -&h,
            -&h,
            -&h,
            -h,
        ];
        assert_eq!(col, expected);
        for m in 1..3 {
            let p = s.proj_window(m, 3).unwrap();
            assert_eq!(p.mul(&p).unwrap(), p);
            let e = s.embed(m, 3).unwrap();
            assert_eq!(p.mul(&e).unwrap(), e);
        }
        assert_eq!(s.apply_proj(1, &e1).unwrap(), col);
    }

    #[test]
    fn lambda_bound() {
        let s = std_space(4);
        let report = s.verify_lambda_bound(4).unwrap();
        assert_eq!(report.entries.len(), 6);
        assert!(report.entries.iter().all(|e| e.norm <= int(2)));
        let two = std_space(2).verify_lambda_bound(2).unwrap();
        assert_eq!(
            two.entries,
            vec![NormEntry {
                m: 1,
                n: 2,
                norm: int(1)
            }]
        );
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(
            BDParams::new(int(1), rat(1, 2), int(2)),
            Err(Error::ParamInvalid(_))
        ));
        assert!(BDParams::new(rat(1, 2), rat(1, 2), int(2)).is_err());
        assert!(BDParams::new(rat(1, 2), rat(1, 4), int(1)).is_err());
        assert!(BDParams::new(int(1), rat(1, 8), int(2)).is_err());
        assert!(BDParams::exploratory(int(1), rat(1, 8), int(2)).is_ok());
        assert_eq!(BDParams::parse("1/2,1/4,2").unwrap(), BDParams::standard());
        assert!(BDParams::parse("0.5,0.25,2").is_err());
        assert!(BDParams::parse("1/2,1/4").is_err());
    }

    #[test]
    fn level_cap() {
        assert!(matches!(
            BDSpace::build(BDParams::standard(), 6),
            Err(Error::LevelOutOfRange { level: 6, max: 5 })
        ));
        assert!(BDSpace::build(BDParams::standard(), 0).is_err());
    }

    #[test]
    fn l1_witness_examples() {
        let s = std_space(3);
        let w = s.l1_lower_witness(&[int(1)], 1, 3).unwrap();
        assert_eq!(w.window_norm, int(1));
        assert_eq!(w.certified, int(1));
        assert!(w.holds);
        let w = s.l1_lower_witness(&[int(1), int(-1)], 2, 3).unwrap();
        assert!(w.holds && w.certified >= int(1));
        let w = s.l1_lower_witness(&[int(0)], 1, 3).unwrap();
        assert_eq!(w.certified, int(0));
        assert!(w.holds);
        assert!(s.l1_lower_witness(&[int(1)], 3, 3).is_err());
    }

    #[test]
    fn sequential_and_parallel_builds_agree() {
        let a = BDSpace::build_with(BDParams::standard(), 4, 5, Mode::Sequential).unwrap();
        let b = BDSpace::build_with(BDParams::standard(), 4, 5, Mode::Parallel).unwrap();
        for n in 2..=4 {
            for m in 1..n {
                assert_eq!(a.embed(m, n).unwrap(), b.embed(m, n).unwrap());
            }
        }
    }
}
