use serde::Serialize;

use super::{
    add_prefix, check_eps, compress_remainder, decreasing_rearrangement, sub_indicator, StepFunction,
};
use crate::error::{Error, Result};
use crate::ordinal::Ordinal;
use crate::rational::{self, Rational};

/// The sequences produced while computing an ε-area.
///
/// `stages[0]` is the input; `stages[i + 1]` is the decreasing rearrangement of
/// `stages[i] − gammas[i]·1_{(0,ε]}`. The last stage vanishes at ε.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompressionTrace {
    #[serde(with = "rational::serde_str")]
    pub eps: Rational,
    pub gammas: Vec<Ordinal>,
    pub stages: Vec<StepFunction>,
    pub area: Ordinal,
}

impl CompressionTrace {
    /// `h_i = (γ_0 + … + γ_{i-1})·1_{(0,ε]} + g_i`, the compressed function after `i` steps.
    pub fn compressed(&self, i: usize) -> StepFunction {
        let prefix = self.gammas[..i].iter().fold(Ordinal::zero(), |acc, g| acc.add(g));
        add_prefix(&prefix, &self.eps, &self.stages[i])
    }

    /// Distinct compressed functions `h_1, h_2, …` in order; the chain stops changing once the
    /// remainder lies inside `(0, ε]`.
    pub fn distinct_compressions(&self) -> Vec<StepFunction> {
        let mut out: Vec<StepFunction> = Vec::new();
        for i in 0..self.stages.len() {
            let h = self.compressed(i);
            if out.last() != Some(&h) {
                out.push(h);
            }
        }
        out
    }

    /// Checks the structural invariants: pure ω-powers, non-increasing, final stage zero at ε.
    pub fn check_invariants(&self) -> bool {
        let powers = self
            .gammas
            .iter()
            .all(|g| g.terms().len() == 1 && g.terms()[0].coefficient == 1);
        let monotone = self.gammas.windows(2).all(|w| w[0] >= w[1]);
        let vanishes = self
            .stages
            .last()
            .is_some_and(|g| g.eval(&self.eps).is_ok_and(|v| v.is_zero()));
        let sum = self.gammas.iter().fold(Ordinal::zero(), |acc, g| acc.add(g));
        powers && monotone && vanishes && sum == self.area && self.stages.len() == self.gammas.len() + 1
    }
}

/// The ε-compression `γ·1_{(0,ε]} + f`, with `f` from [`compress_remainder`].
pub fn epsilon_compression(g: &StepFunction, eps: &Rational, gamma: &Ordinal) -> Result<StepFunction> {
    if !g.is_non_increasing() {
        return Err(Error::NotNonIncreasing);
    }
    let rest = compress_remainder(g, gamma, eps)?;
    Ok(add_prefix(gamma, eps, &rest))
}

/// ε-area by repeated compression with the largest ω-power not exceeding the value at ε.
pub fn c_area(g: &StepFunction, eps: &Rational) -> Result<(Ordinal, CompressionTrace)> {
    check_eps(eps)?;
    if !g.is_non_increasing() {
        return Err(Error::NotNonIncreasing);
    }
    let mut stages = vec![g.clone()];
    let mut gammas = Vec::new();
    let mut area = Ordinal::zero();
    loop {
        let current = stages.last().expect("at least one stage");
        let at = current.eval(eps)?;
        if at.is_zero() {
            break;
        }
        let gamma = at.leading_power()?;
        let next = compress_remainder(current, &gamma, eps)?;
        area = area.add(&gamma);
        gammas.push(gamma);
        stages.push(next);
    }
    let trace = CompressionTrace {
        eps: eps.clone(),
        gammas,
        stages,
        area: area.clone(),
    };
    Ok((area, trace))
}

/// Multi-ε area with unit heights: `eps_seq.len()` if every difference
/// `g_i − 1_{(0,ε_{i+1}]}` stays non-negative, otherwise 0.
pub fn multi_epsilon_area(g: &StepFunction, eps_seq: &[Rational]) -> Result<usize> {
    if !g.is_non_increasing() {
        return Err(Error::NotNonIncreasing);
    }
    let one = Ordinal::one();
    let mut current = g.clone();
    for eps in eps_seq {
        match sub_indicator(&current, &one, eps) {
            Ok(diff) => current = decreasing_rearrangement(&diff),
            Err(Error::UndefinedSubtraction { .. }) => return Ok(0),
            Err(e) => return Err(e),
        }
    }
    Ok(eps_seq.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::stepfn::strategies;
    use proptest::prelude::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn example() -> StepFunction {
        StepFunction::from_pairs([(rat(1, 4), o("w")), (int(1), o("1"))]).unwrap()
    }

    #[test]
    fn worked_example_areas() {
        let g = example();
        assert_eq!(c_area(&g, &rat(1, 2)).unwrap().0, o("3"));
        assert_eq!(c_area(&g, &rat(1, 4)).unwrap().0, o("w+3"));
        assert_eq!(c_area(&g, &rat(3, 4)).unwrap().0, o("1"));
    }

    #[test]
    fn constant_omega_at_half() {
        let g = StepFunction::constant(o("w"), int(1)).unwrap();
        let (area, trace) = c_area(&g, &rat(1, 2)).unwrap();
        assert_eq!(area, o("w*2"));
        assert_eq!(trace.gammas, vec![o("w"), o("w")]);
    }

    #[test]
    fn quarter_trace_reproduces_chain() {
        let (_, trace) = c_area(&example(), &rat(1, 4)).unwrap();
        let chain: Vec<String> = trace
            .distinct_compressions()
            .iter()
            .map(|h| h.to_string())
            .collect();
        assert_eq!(
            chain,
            [
                "w*1_(0,1/4] + 1_(1/4,1]",
                "(w+1)*1_(0,1/4] + 1_(1/4,3/4]",
                "(w+2)*1_(0,1/4] + 1_(1/4,1/2]",
                "(w+3)*1_(0,1/4]",
            ]
        );
        assert!(trace.check_invariants());
    }

    #[test]
    fn half_trace_keeps_the_tail() {
        let (_, trace) = c_area(&example(), &rat(1, 2)).unwrap();
        let chain: Vec<String> = trace
            .distinct_compressions()
            .iter()
            .map(|h| h.to_string())
            .collect();
        assert_eq!(
            chain,
            [
                "w*1_(0,1/4] + 1_(1/4,1]",
                "w*1_(0,1/4] + 2*1_(1/4,1/2] + 1_(1/2,3/4]",
                "w*1_(0,1/4] + 3*1_(1/4,1/2]",
            ]
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let up = StepFunction::from_pairs([(rat(1, 2), o("1")), (int(1), o("2"))]).unwrap();
        assert_eq!(c_area(&up, &rat(1, 2)), Err(Error::NotNonIncreasing));
        assert!(matches!(
            c_area(&example(), &int(0)),
            Err(Error::NonpositiveEpsilon(_))
        ));
    }

    #[test]
    fn zero_function_has_zero_area() {
        let (area, trace) = c_area(&StepFunction::zero(), &rat(1, 2)).unwrap();
        assert!(area.is_zero());
        assert!(trace.gammas.is_empty());
        assert_eq!(trace.distinct_compressions().len(), 1);
    }

    #[test]
    fn multi_epsilon_examples() {
        let g = StepFunction::constant(o("1"), int(1)).unwrap();
        assert_eq!(multi_epsilon_area(&g, &[rat(1, 2), rat(1, 2)]).unwrap(), 2);
        assert_eq!(
            multi_epsilon_area(&g, &[rat(1, 2), rat(1, 2), rat(1, 2)]).unwrap(),
            0
        );
        assert_eq!(multi_epsilon_area(&g, &[]).unwrap(), 0);
        assert_eq!(multi_epsilon_area(&g, &[rat(1, 4), rat(3, 4)]).unwrap(), 2);
    }

    proptest! {
        #[test]
        fn trace_invariants_hold(g in strategies::non_increasing(), e in 1i64..=8) {
            let (_, trace) = c_area(&g, &rat(e, 8)).unwrap();
            prop_assert!(trace.check_invariants());
        }

        #[test]
        fn area_monotone_in_epsilon(g in strategies::non_increasing(), a in 1i64..=8, b in 1i64..=8) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let small = c_area(&g, &rat(lo, 8)).unwrap().0;
            let large = c_area(&g, &rat(hi, 8)).unwrap().0;
            prop_assert!(small >= large);
        }

        #[test]
        fn heights_at_eps_never_drop(g in strategies::non_increasing(), e in 1i64..=8) {
            let eps = rat(e, 8);
            let (area, trace) = c_area(&g, &eps).unwrap();
            let heights: Vec<Ordinal> = (0..trace.stages.len())
                .map(|i| trace.compressed(i).eval(&eps).unwrap())
                .collect();
            prop_assert!(heights.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(heights.last().unwrap(), &area);
        }

        #[test]
        fn each_step_is_a_compression(g in strategies::non_increasing(), e in 1i64..=8) {
            let eps = rat(e, 8);
            let (_, trace) = c_area(&g, &eps).unwrap();
            for (i, gamma) in trace.gammas.iter().enumerate() {
                let step = epsilon_compression(&trace.stages[i], &eps, gamma).unwrap();
                let prefix = trace.gammas[..i].iter().fold(Ordinal::zero(), |a, x| a.add(x));
                prop_assert_eq!(add_prefix(&prefix, &eps, &step), trace.compressed(i + 1));
            }
        }
    }
}
