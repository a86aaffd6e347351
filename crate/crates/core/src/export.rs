//! File formats: PPS set JSON, general-state JSON, density JSON and the
//! correlation CSV. Floats are rounded to 12 significant digits so identical
//! inputs give byte-identical files.

use serde::{Deserialize, Serialize};

use crate::ensemble::{CorrelationResult, DensityMatrix};
use crate::error::Result;
use crate::gf::{FieldElement, PpsParams};
use crate::pps::{PhaseSequence, PpsSet};
use crate::state::GeneralState;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Round to [`SIGNIFICANT_DIGITS`] significant digits; `-0.0` becomes `0.0`.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let r: f64 = s.parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Text form of a float for CSV cells.
pub fn fmt_float(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        "0".to_string()
    } else if (1e-5..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceJson {
    pub label: Vec<u32>,
    pub symbols: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpsSetJson {
    pub p: u32,
    pub s: u32,
    pub poly: Vec<u32>,
    pub sequences: Vec<SequenceJson>,
}

impl PpsSetJson {
    pub fn from_set(set: &PpsSet) -> Self {
        let params = set.params();
        Self {
            p: params.p(),
            s: params.s(),
            poly: params.poly().to_vec(),
            sequences: set
                .sequences_sorted()
                .into_iter()
                .map(|seq| SequenceJson {
                    label: seq.label().coeffs().to_vec(),
                    symbols: seq.symbols().to_vec(),
                })
                .collect(),
        }
    }

    /// Rebuild a set; shape is validated, algebra is not.
    pub fn into_set(self) -> Result<PpsSet> {
        let params = PpsParams::new(self.p, self.s, self.poly)?;
        let p = params.p();
        let seqs = self
            .sequences
            .into_iter()
            .map(|s| PhaseSequence::new(s.symbols, FieldElement::from_coeffs(s.label), p))
            .collect();
        PpsSet::from_sequences(params, seqs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub bits: String,
    pub label: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralStateJson {
    #[serde(rename = "F")]
    pub field_count: usize,
    pub global_label: Vec<u32>,
    pub terms: Vec<TermJson>,
}

impl GeneralStateJson {
    /// Terms come out sorted by `(bits, label)`.
    pub fn from_state(state: &GeneralState) -> Self {
        use crate::state::Ensemble;
        Self {
            field_count: state.field_count(),
            global_label: state.global_label().coeffs().to_vec(),
            terms: state
                .terms()
                .map(|((bits, label), c)| TermJson {
                    bits: state.bits_string(*bits),
                    label: label.coeffs().to_vec(),
                    re: round_sig(c.re),
                    im: round_sig(c.im),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl DensityJson {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let n = rho.dim();
        let grid = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| round_sig(f(i, j))).collect())
                .collect()
        };
        Self {
            dim: n,
            re: grid(&|i, j| rho.get(i, j).re),
            im: grid(&|i, j| rho.get(i, j).im),
        }
    }
}

/// CSV with header `theta_1,...,theta_F,E_time,E_trace,E_formula`; the formula
/// cell is empty when no closed form applies.
pub fn correlation_csv(field_count: usize, rows: &[CorrelationResult]) -> String {
    let mut out = String::new();
    for j in 1..=field_count {
        out.push_str(&format!("theta_{j},"));
    }
    out.push_str("E_time,E_trace,E_formula\n");
    for r in rows {
        for t in &r.angles {
            out.push_str(&fmt_float(*t));
            out.push(',');
        }
        out.push_str(&fmt_float(r.e_time));
        out.push(',');
        out.push_str(&fmt_float(r.e_trace));
        out.push(',');
        if let Some(f) = r.e_formula {
            out.push_str(&fmt_float(f));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pps::build_pps_set;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(2.0f64.sqrt() * 2.0), 2.82842712475);
        assert_eq!(round_sig(-0.0), 0.0);
        assert!(round_sig(-0.0).is_sign_positive());
        assert_eq!(fmt_float(1.0), "1");
        assert_eq!(fmt_float(-0.5), "-0.5");
        assert_eq!(fmt_float(6.123233995736766e-17), "6.12323399574e-17");
        assert_eq!(fmt_float(0.0), "0");
    }

    #[test]
    fn set_json_shape_and_order() {
        let set = build_pps_set(PpsParams::from_table(2, 3).unwrap()).unwrap();
        let json = PpsSetJson::from_set(&set);
        let v: serde_json::Value = serde_json::to_value(&json).unwrap();
        assert_eq!(v["p"], 2);
        assert_eq!(v["poly"], serde_json::json!([1, 1, 0, 1]));
        let labels: Vec<_> = json.sequences.iter().map(|s| s.label.clone()).collect();
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(labels, sorted);
        assert_eq!(json.sequences[0].symbols, vec![0; 8]);
        let back = json.into_set().unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn csv_header() {
        let row = CorrelationResult {
            angles: vec![0.0, 0.5],
            e_time: 1.0,
            e_trace: 1.0,
            e_formula: None,
            normalization: 0.5,
        };
        let csv = correlation_csv(2, &[row]);
        assert_eq!(
            csv,
            "theta_1,theta_2,E_time,E_trace,E_formula\n0,0.5,1,1,\n"
        );
    }
}
