//! Rendering of ε-area traces.

use serde::Serialize;

use crate::ordinal::Ordinal;
use crate::rational::{self, Rational};
use crate::stepfn::{CompressionTrace, StepFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFormat {
    Table,
    Json,
}

#[derive(Serialize)]
struct Stage<'a> {
    index: usize,
    text: String,
    function: &'a StepFunction,
}

#[derive(Serialize)]
struct TraceJson<'a> {
    #[serde(with = "rational::serde_str")]
    eps: Rational,
    area: &'a Ordinal,
    area_text: String,
    gammas: &'a [Ordinal],
    compressions: Vec<Stage<'a>>,
}

/// One line per distinct compressed function `h_i`; the last is marked `H` and carries the area.
/// A trace without compressions renders as `C = 0`.
pub fn emit_trace(trace: &CompressionTrace, format: TraceFormat) -> String {
    let chain = trace.distinct_compressions();
    match format {
        TraceFormat::Table => {
            if trace.gammas.is_empty() {
                return format!("C = {}\n", trace.area);
            }
            let mut out = String::new();
            for (i, h) in chain.iter().enumerate() {
                if i + 1 == chain.len() {
                    out.push_str(&format!("H = h_{} = {}, C = {}\n", i + 1, h, trace.area));
                } else {
                    out.push_str(&format!("h_{} = {}\n", i + 1, h));
                }
            }
            out
        }
        TraceFormat::Json => {
            let compressions = chain
                .iter()
                .enumerate()
                .map(|(i, h)| Stage {
                    index: i + 1,
                    text: h.to_string(),
                    function: h,
                })
                .collect();
            let doc = TraceJson {
                eps: trace.eps.clone(),
                area: &trace.area,
                area_text: trace.area.to_string(),
                gammas: &trace.gammas,
                compressions,
            };
            serde_json::to_string_pretty(&doc).expect("trace serializes") + "\n"
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::stepfn::c_area;

    fn example() -> StepFunction {
        StepFunction::from_pairs([(rat(1, 4), "w".parse().unwrap()), (int(1), Ordinal::one())]).unwrap()
    }

    #[test]
    fn quarter_chain() {
        let (_, trace) = c_area(&example(), &rat(1, 4)).unwrap();
        assert_eq!(
            emit_trace(&trace, TraceFormat::Table),
            "h_1 = w*1_(0,1/4] + 1_(1/4,1]\n\
             h_2 = (w+1)*1_(0,1/4] + 1_(1/4,3/4]\n\
             h_3 = (w+2)*1_(0,1/4] + 1_(1/4,1/2]\n\
             H = h_4 = (w+3)*1_(0,1/4], C = w+3\n"
        );
    }

    #[test]
    fn half_chain() {
        let (_, trace) = c_area(&example(), &rat(1, 2)).unwrap();
        assert_eq!(
            emit_trace(&trace, TraceFormat::Table),
            "h_1 = w*1_(0,1/4] + 1_(1/4,1]\n\
             h_2 = w*1_(0,1/4] + 2*1_(1/4,1/2] + 1_(1/2,3/4]\n\
             H = h_3 = w*1_(0,1/4] + 3*1_(1/4,1/2], C = 3\n"
        );
    }

    #[test]
    fn trivial_chain() {
        let (_, trace) = c_area(&StepFunction::zero(), &rat(1, 2)).unwrap();
        assert_eq!(emit_trace(&trace, TraceFormat::Table), "C = 0\n");
        let small = StepFunction::constant(Ordinal::one(), rat(1, 4)).unwrap();
        let (_, trace) = c_area(&small, &rat(1, 2)).unwrap();
        assert_eq!(emit_trace(&trace, TraceFormat::Table), "C = 0\n");
    }

    #[test]
    fn json_lists_every_compression() {
        let (_, trace) = c_area(&example(), &rat(1, 4)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&emit_trace(&trace, TraceFormat::Json)).unwrap();
        assert_eq!(v["eps"], "1/4");
        assert_eq!(v["area_text"], "w+3");
        assert_eq!(v["compressions"].as_array().unwrap().len(), 4);
        assert_eq!(v["compressions"][1]["text"], "(w+1)*1_(0,1/4] + 1_(1/4,3/4]");
        let back: StepFunction = serde_json::from_value(v["compressions"][3]["function"].clone()).unwrap();
        assert_eq!(back.to_string(), "(w+3)*1_(0,1/4]");
    }
}
