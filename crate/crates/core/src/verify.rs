//! Finite invariant suites run by `verify-all`. Each suite enumerates a deterministic family of
//! instances and records a witness for every failed check.

use std::collections::HashSet;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::bdspace::{BDParams, BDSpace, PhiTuple};
use crate::dualtree::{antichain_identity_check, szlenk_bound_c, XWindow};
use crate::error::Result;
use crate::ordinal::Ordinal;
use crate::ordmeasure::{derived_height, szlenk_formula, OrdinalMeasure, OrdinalSpace};
use crate::par::{self, Mode};
use crate::rational::{self, int, rat, Rational};
use crate::stepfn::{c_area, c_area_oracle, compress_remainder, sub_indicator, StepFunction};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(name: &'static str, checks: usize, failures: Vec<String>) -> Self {
        SuiteReport {
            name,
            checks,
            passed: failures.is_empty(),
            failures,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub params: BDParams,
    pub max_level: usize,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

type Suite = fn(&BDSpace) -> Result<SuiteReport>;

const SUITES: [Suite; 12] = [
    ordinal_laws,
    worked_example,
    rearrangement,
    area_oracle,
    dominance,
    corollary,
    bd_dimensions,
    bd_norms,
    bd_embeddings,
    bd_l1,
    tree_antichain,
    szlenk_bound,
];

/// Builds the space once and runs every suite on it, independent suites in parallel under
/// [`Mode::Parallel`].
pub fn verify_all(params: BDParams, max_level: usize, cap: usize, mode: Mode) -> Result<VerifyReport> {
    let space = BDSpace::build_with(params.clone(), max_level, cap, mode)?;
    let results = par::map(mode, &SUITES, |suite| suite(&space));
    let mut suites = Vec::with_capacity(results.len());
    for r in results {
        suites.push(r?);
    }
    Ok(VerifyReport {
        passed: suites.iter().all(|s| s.passed),
        params,
        max_level,
        suites,
    })
}

fn o(text: &str) -> Ordinal {
    text.parse().expect("literal ordinal")
}

fn ordinal_pool() -> Vec<Ordinal> {
    [
        "0",
        "1",
        "2",
        "w",
        "w+1",
        "w*2",
        "w*2+3",
        "w^2",
        "w^2+w",
        "w^w",
        "w^{w+1}*2+w^3+5",
    ]
    .iter()
    .map(|s| o(s))
    .collect()
}

fn ordinal_laws(_: &BDSpace) -> Result<SuiteReport> {
    let pool = ordinal_pool();
    let mut checks = 0;
    let mut failures = Vec::new();
    for a in &pool {
        for b in &pool {
            for c in &pool {
                checks += 3;
                if a.add(b).add(c) != a.add(&b.add(c)) {
                    failures.push(format!("({a}+{b})+{c} != {a}+({b}+{c})"));
                }
                if a.mul(b).mul(c) != a.mul(&b.mul(c)) {
                    failures.push(format!("({a}*{b})*{c} != {a}*({b}*{c})"));
                }
                if a.mul(&b.add(c)) != a.mul(b).add(&a.mul(c)) {
                    failures.push(format!("{a}*({b}+{c}) != {a}*{b}+{a}*{c}"));
                }
            }
            checks += 1;
            if b <= a {
                match a.sub(b) {
                    Ok(rest) if b.add(&rest) == *a => {}
                    other => failures.push(format!("{b} + ({a} - {b}) gave {other:?}")),
                }
            } else if a.sub(b).is_ok() {
                failures.push(format!("{a} - {b} should be undefined"));
            }
        }
    }
    let w2 = o("w^2");
    checks += 1;
    if w2.add(&Ordinal::one()).add(&Ordinal::omega()) != o("w^2+w") {
        failures.push("(w^2+1)+w != w^2+w".into());
    }
    Ok(SuiteReport::new("ordinal-laws", checks, failures))
}

fn worked_example(_: &BDSpace) -> Result<SuiteReport> {
    let g = StepFunction::from_pairs([(rat(1, 4), Ordinal::omega()), (int(1), Ordinal::one())])?;
    let mut failures = Vec::new();
    let cases = [(rat(3, 4), "1"), (rat(1, 2), "3"), (rat(1, 4), "w+3")];
    for (eps, want) in &cases {
        let got = c_area(&g, eps)?.0;
        if got != o(want) {
            failures.push(format!("C(g,{eps}) = {got}, expected {want}"));
        }
    }
    Ok(SuiteReport::new("worked-example", cases.len(), failures))
}

/// Non-increasing step functions with at most `max_pieces` pieces, breakpoints on `{k/grid}`
/// for `k ≤ grid` and strictly decreasing values from `values` (given in decreasing order).
fn enumerate(grid: i64, max_pieces: usize, values: &[Ordinal]) -> Vec<StepFunction> {
    fn choose(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            choose(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![StepFunction::zero()];
    for pieces in 1..=max_pieces {
        let (mut ends, mut vals) = (Vec::new(), Vec::new());
        choose(grid as usize, pieces, 0, &mut Vec::new(), &mut ends);
        choose(values.len(), pieces, 0, &mut Vec::new(), &mut vals);
        for e in &ends {
            for v in &vals {
                let pairs = e
                    .iter()
                    .zip(v)
                    .map(|(e, v)| (rat(*e as i64 + 1, grid), values[*v].clone()));
                out.push(StepFunction::from_pairs(pairs).expect("increasing breakpoints"));
            }
        }
    }
    out
}

fn small_values() -> Vec<Ordinal> {
    ["w*2", "w+1", "w", "2", "1"].iter().map(|s| o(s)).collect()
}

fn rearrangement(_: &BDSpace) -> Result<SuiteReport> {
    let corpus = enumerate(4, 3, &small_values());
    let mut checks = 0;
    let mut failures = Vec::new();
    for g in &corpus {
        for eps in [rat(1, 4), rat(1, 2)] {
            let at = g.eval(&eps)?;
            if at.is_zero() {
                continue;
            }
            let gamma = at.leading_power()?;
            let lowered = sub_indicator(g, &gamma, &eps)?;
            let f = compress_remainder(g, &gamma, &eps)?;
            checks += 1;
            if !f.is_non_increasing() || f.level_sets() != lowered.level_sets() {
                failures.push(format!(
                    "rearranging {g} lowered by {gamma} on (0,{eps}] gave {f}"
                ));
            }
        }
    }
    Ok(SuiteReport::new("rearrangement", checks, failures))
}

fn area_oracle(_: &BDSpace) -> Result<SuiteReport> {
    let corpus = enumerate(8, 3, &small_values());
    let mut checks = 0;
    let mut failures = Vec::new();
    for g in &corpus {
        for eps in [rat(1, 4), rat(1, 2)] {
            checks += 1;
            let fast = c_area(g, &eps)?.0;
            let slow = c_area_oracle(g, &eps, 64)?;
            if fast != slow {
                failures.push(format!("g={g} eps={eps}: greedy {fast}, search {slow}"));
            }
        }
    }
    Ok(SuiteReport::new("area-oracle", checks, failures))
}

fn dominance(_: &BDSpace) -> Result<SuiteReport> {
    let corpus = enumerate(4, 2, &small_values());
    let mut checks = 0;
    let mut failures = Vec::new();
    for g in &corpus {
        for h in &corpus {
            if !g.le_pointwise(h) {
                continue;
            }
            let gap = g.measure_where(h, |a, b| a.succ() <= *b);
            for eps in [rat(1, 4), rat(1, 2), int(1)] {
                if eps > gap {
                    continue;
                }
                checks += 1;
                let (cg, ch) = (c_area(g, &eps)?.0, c_area(h, &eps)?.0);
                if cg.succ() > ch {
                    failures.push(format!("g={g} h={h} eps={eps}: {cg}+1 > {ch}"));
                }
            }
        }
    }
    Ok(SuiteReport::new("dominance", checks, failures))
}

fn corollary(_: &BDSpace) -> Result<SuiteReport> {
    let mut checks = 0;
    let mut failures = Vec::new();
    for gamma in [Ordinal::zero(), Ordinal::one()] {
        for k in 1..=4 {
            let space = OrdinalSpace::new(gamma.clone(), k)?;
            let g = derived_height(&OrdinalMeasure::dirac(space.clone(), space.top())?)?;
            for eps in [rat(1, 4), rat(1, 3), rat(1, 2), rat(3, 4)] {
                checks += 1;
                let area = c_area(&g, &eps)?.0;
                let formula = szlenk_formula(&space, &eps)?;
                // the index is one more than the area of the top Dirac mass
                if area.succ() != formula {
                    failures.push(format!(
                        "gamma={gamma} k={k} eps={eps}: area {area}, index {formula}"
                    ));
                }
            }
        }
    }
    Ok(SuiteReport::new("szlenk-formula", checks, failures))
}

fn bd_dimensions(space: &BDSpace) -> Result<SuiteReport> {
    let expected = [1usize, 2, 10, 130, 6890];
    let mut failures = Vec::new();
    for (n, d) in space.dims().iter().enumerate() {
        if expected[n] != *d {
            failures.push(format!("d_{} = {d}, expected {}", n + 1, expected[n]));
        }
    }
    let mut checks = space.dims().len();
    // every level of the φ table is closed under (σ′, σ″) ↦ (−σ′, −σ″) and has no repeats
    for group in space.phi_table().chunk_by(|a, b| a.level == b.level) {
        checks += 1;
        let set: HashSet<PhiTuple> = group.iter().map(|e| e.tuple).collect();
        if set.len() != group.len() || set.iter().any(|t| !set.contains(&t.negated())) {
            failures.push(format!(
                "phi table block starting at {} is not a symmetric enumeration",
                group[0].k
            ));
        }
    }
    Ok(SuiteReport::new("bd-dimensions", checks, failures))
}

fn bd_norms(space: &BDSpace) -> Result<SuiteReport> {
    let report = match space.verify_lambda_bound(space.levels()) {
        Ok(r) => r,
        Err(e) => return Ok(SuiteReport::new("bd-norms", 1, vec![e.to_string()])),
    };
    Ok(SuiteReport::new("bd-norms", report.entries.len(), Vec::new()))
}

fn bd_embeddings(space: &BDSpace) -> Result<SuiteReport> {
    let top = space.levels();
    let mut checks = 0;
    let mut failures = Vec::new();
    for n in 1..=top {
        for m in 1..=n {
            let e = space.embed(m, n)?;
            let dm = space.dim(m)?;
            checks += 1;
            let block_ok = (0..dm).all(|r| {
                (0..dm).all(|c| {
                    let v = e.get(r, c);
                    if r == c {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            });
            if !block_ok {
                failures.push(format!("i_({m},{n}) is not the identity on E_{m}"));
            }
            for l in 1..m {
                checks += 1;
                if e.mul(&space.embed(l, m)?)? != space.embed(l, n)? {
                    failures.push(format!("i_({m},{n}) i_({l},{m}) != i_({l},{n})"));
                }
            }
        }
    }
    Ok(SuiteReport::new("bd-embeddings", checks, failures))
}

fn bd_l1(space: &BDSpace) -> Result<SuiteReport> {
    let window = space.levels();
    let mut checks = 0;
    let mut failures = Vec::new();
    for m in 1..window.min(4) {
        let d = space.dim(m)?;
        for mask in 0u32..(1 << d) {
            let coeffs: Vec<Rational> = (0..d)
                .map(|i| if mask >> i & 1 == 1 { int(1) } else { int(-1) })
                .collect();
            checks += 1;
            let w = space.l1_lower_witness(&coeffs, m, window)?;
            if !w.holds {
                failures.push(format!(
                    "E_{m} signs {mask:b}: certified {} < {}",
                    rational::format_rational(&w.certified),
                    rational::format_rational(&w.lower)
                ));
            }
        }
    }
    Ok(SuiteReport::new("bd-l1", checks, failures))
}

/// Antichain identities on the basis vectors of `P_s X`, seen on `E_3` at most.
fn tree_antichain(space: &BDSpace) -> Result<SuiteReport> {
    let window = space.levels().min(3);
    let mut checks = 0;
    let mut failures = Vec::new();
    for s in 1..window.min(3) {
        let ds = space.dim(s)?;
        for c in 0..ds {
            let mut z = vec![Rational::zero(); ds];
            z[c] = Rational::one();
            let x = XWindow::from_level(space, s, &z, window)?;
            for k in 1..=space.dim(window)?.min(10) {
                checks += 1;
                let r = antichain_identity_check(space, k, s, &x)?;
                if !r.holds {
                    failures.push(format!(
                        "k={k} s={s} e_{}: {} != {}",
                        c + 1,
                        r.coordinate,
                        r.antichain_sum
                    ));
                }
            }
        }
    }
    Ok(SuiteReport::new("tree-antichain", checks, failures))
}

fn szlenk_bound(space: &BDSpace) -> Result<SuiteReport> {
    let mut checks = 0;
    let mut failures = Vec::new();
    if space.params().a < Rational::one() {
        let mut previous = None;
        for k in 1..=16 {
            checks += 1;
            let b = szlenk_bound_c(space, &rat(k, 8))?;
            if !b.certificate_holds(&space.params().a) || previous.as_ref().is_some_and(|p| b.bound > *p) {
                failures.push(format!("Szlenk bound certificate at eps={}", b.eps));
            }
            previous = Some(b.bound);
        }
    }
    Ok(SuiteReport::new("szlenk-bound", checks, failures))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_params_pass_at_level_three() {
        let report = verify_all(BDParams::standard(), 3, 5, Mode::Parallel).unwrap();
        for s in &report.suites {
            assert!(s.passed, "{}: {:?}", s.name, s.failures);
            assert!(s.checks > 0, "{} ran nothing", s.name);
        }
        assert!(report.passed);
    }

    #[test]
    fn level_zero_is_rejected() {
        assert!(verify_all(BDParams::standard(), 0, 5, Mode::Sequential).is_err());
    }
}
