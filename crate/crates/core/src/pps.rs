//! Pseudorandom phase sequence sets.
//!
//! A set holds `L = p^s` sequences of length `L`: the all-zero sequence and the
//! `L - 1` cyclic shifts of one m-sequence, each with a single zero symbol
//! appended in the last slot. Shift `j` carries label `alpha^j`, so adding
//! labels adds symbol vectors modulo `p`. Symbol `m` maps to phase `2*pi*m/p`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{generate_m_sequence, verify_primitive, FieldElement, GaloisField, PpsParams};

/// Default numeric tolerance for all floating-point checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSequence {
    symbols: Vec<u32>,
    label: FieldElement,
    p: u32,
}

impl PhaseSequence {
    pub fn new(symbols: Vec<u32>, label: FieldElement, p: u32) -> Self {
        Self { symbols, label, p }
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn label(&self) -> &FieldElement {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Phase units `lambda_k = 2*pi*m_k/p` in radians.
    pub fn phases(&self) -> Vec<f64> {
        self.symbols
            .iter()
            .map(|&m| 2.0 * PI * m as f64 / self.p as f64)
            .collect()
    }
}

/// `(1/L) * sum_k exp(i(lambda_k^x - lambda_k^y))`.
pub fn normalized_correlation(x: &PhaseSequence, y: &PhaseSequence) -> Result<Complex64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let sum = x
        .phases()
        .iter()
        .zip(y.phases())
        .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| {
            acc + Complex64::from_polar(1.0, a - b)
        });
    Ok(sum / x.len() as f64)
}

#[derive(Debug, Clone)]
pub struct PpsSet {
    field: GaloisField,
    /// Indexed by `GaloisField::index` of the label.
    sequences: Vec<PhaseSequence>,
    roots: Vec<Complex64>,
}

impl PartialEq for PpsSet {
    fn eq(&self, other: &Self) -> bool {
        self.field.params() == other.field.params() && self.sequences == other.sequences
    }
}

/// Steps: LFSR base sequence, cyclic shifts, zero padding, phase mapping.
pub fn build_pps_set(params: PpsParams) -> Result<PpsSet> {
    let base = generate_m_sequence(&params)?;
    let field = GaloisField::new(params)?;
    let p = field.params().p();
    let period = base.len();
    let mut sequences: Vec<Option<PhaseSequence>> = vec![None; field.order()];

    let zero = field.zero();
    let zero_idx = field.index(&zero);
    sequences[zero_idx] = Some(PhaseSequence::new(vec![0; period + 1], zero, p));
    for shift in 0..period {
        let label = field.alpha_pow(shift);
        let mut symbols: Vec<u32> = (0..period).map(|k| base[(k + shift) % period]).collect();
        symbols.push(0);
        let idx = field.index(&label);
        sequences[idx] = Some(PhaseSequence::new(symbols, label, p));
    }
    let sequences = sequences
        .into_iter()
        .map(|s| s.expect("antilog table covers every nonzero element"))
        .collect();
    Ok(PpsSet::assemble(field, sequences))
}

impl PpsSet {
    fn assemble(field: GaloisField, sequences: Vec<PhaseSequence>) -> Self {
        let p = field.params().p();
        let roots = (0..p)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / p as f64))
            .collect();
        Self {
            field,
            sequences,
            roots,
        }
    }

    /// Assemble a set from externally supplied sequences.
    ///
    /// Only shape is checked (one sequence per field element, length `p^s`,
    /// symbols in range). Algebraic properties are left to [`verify_properties`].
    pub fn from_sequences(params: PpsParams, sequences: Vec<PhaseSequence>) -> Result<Self> {
        let field = GaloisField::new(params)?;
        let order = field.order();
        if sequences.len() != order {
            return Err(Error::DimensionMismatch {
                expected: order,
                got: sequences.len(),
            });
        }
        let p = field.params().p();
        let mut slots: Vec<Option<PhaseSequence>> = vec![None; order];
        for seq in sequences {
            if !field.contains(seq.label()) {
                return Err(Error::UnknownLabel(seq.label().coeffs().to_vec()));
            }
            if seq.len() != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    got: seq.len(),
                });
            }
            if seq.symbols().iter().any(|&m| m >= p) {
                return Err(Error::InvalidParameter(format!(
                    "symbol outside [0, {p}) in sequence {:?}",
                    seq.label()
                )));
            }
            let idx = field.index(seq.label());
            if slots[idx].is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate label {:?}",
                    seq.label()
                )));
            }
            slots[idx] = Some(PhaseSequence { p, ..seq });
        }
        let sequences = slots.into_iter().map(Option::unwrap).collect();
        Ok(Self::assemble(field, sequences))
    }

    pub fn params(&self) -> &PpsParams {
        self.field.params()
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    /// Number of sequences, equal to the sequence length `L = p^s`.
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn sequence(&self, label: &FieldElement) -> Result<&PhaseSequence> {
        if !self.field.contains(label) {
            return Err(Error::UnknownLabel(label.coeffs().to_vec()));
        }
        Ok(&self.sequences[self.field.index(label)])
    }

    /// Sequences in label-lexicographic order.
    pub fn sequences_sorted(&self) -> Vec<&PhaseSequence> {
        let mut v: Vec<_> = self.sequences.iter().collect();
        v.sort_by(|a, b| a.label().cmp(b.label()));
        v
    }

    /// `exp(i * lambda_k)` of the sequence carrying `label`.
    pub fn phasor(&self, label: &FieldElement, k: usize) -> Result<Complex64> {
        let seq = self.sequence(label)?;
        let m = *seq.symbols().get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            limit: seq.len(),
        })?;
        Ok(self.roots[m as usize])
    }

    /// Label of the element-wise product of two phase sequences.
    pub fn sequence_product(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.sequence(a)?;
        self.sequence(b)?;
        Ok(self.field.add(a, b))
    }

    /// Unit phasor for symbol `m`.
    pub fn root(&self, m: u32) -> Complex64 {
        self.roots[m as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub closure_ok: bool,
    pub balance_max_dev: f64,
    pub orthogonality_max_dev: f64,
    pub primitive_ok: bool,
    /// Every nonzero sequence holds each symbol exactly `p^(s-1)` times.
    pub census_ok: bool,
    pub set_size_ok: bool,
}

impl VerificationReport {
    /// Name of the first failing check at the given tolerance.
    pub fn first_failure(&self, tol: f64, len: usize) -> Option<&'static str> {
        if !self.primitive_ok {
            Some("primitive")
        } else if !self.set_size_ok {
            Some("set-size")
        } else if !self.closure_ok {
            Some("closure")
        } else if !self.census_ok {
            Some("census")
        } else if self.balance_max_dev > tol * len as f64 {
            Some("balance")
        } else if self.orthogonality_max_dev > tol {
            Some("orthogonality")
        } else {
            None
        }
    }

    pub fn passes(&self, tol: f64, len: usize) -> bool {
        self.first_failure(tol, len).is_none()
    }
}

/// Check closure, balance and orthogonality of a set.
pub fn verify_properties(set: &PpsSet) -> VerificationReport {
    let params = set.params();
    let field = set.field();
    let p = params.p();
    let len = set.len();
    let elements = field.elements();

    let closure_ok = elements.iter().all(|a| {
        elements.iter().all(|b| {
            let sa = set.sequence(a).unwrap().symbols();
            let sb = set.sequence(b).unwrap().symbols();
            let sc = set.sequence(&field.add(a, b)).unwrap().symbols();
            sa.iter()
                .zip(sb)
                .zip(sc)
                .all(|((x, y), z)| (x + y) % p == *z)
        })
    });

    let per_symbol = len / p as usize;
    let census_ok = set
        .sequences
        .iter()
        .filter(|s| !s.label().is_zero())
        .all(|s| {
            let mut counts = vec![0usize; p as usize];
            s.symbols().iter().for_each(|&m| counts[m as usize] += 1);
            counts.iter().all(|&c| c == per_symbol)
        })
        && set
            .sequences
            .iter()
            .filter(|s| s.label().is_zero())
            .all(|s| s.symbols().iter().all(|&m| m == 0));

    let balance_max_dev = set
        .sequences
        .iter()
        .filter(|s| !s.label().is_zero())
        .map(|s| {
            s.phases()
                .iter()
                .fold(Complex64::new(0.0, 0.0), |acc, &l| {
                    acc + Complex64::from_polar(1.0, l)
                })
                .norm()
        })
        .fold(0.0, f64::max);

    let mut orthogonality_max_dev: f64 = 0.0;
    for x in &set.sequences {
        for y in &set.sequences {
            let target = if x.label() == y.label() { 1.0 } else { 0.0 };
            let c = normalized_correlation(x, y).expect("equal lengths within a set");
            orthogonality_max_dev = orthogonality_max_dev.max((c - target).norm());
        }
    }

    VerificationReport {
        closure_ok,
        balance_max_dev,
        orthogonality_max_dev,
        primitive_ok: verify_primitive(params),
        census_ok,
        set_size_ok: len == params.len() && set.sequences.iter().all(|s| s.len() == len),
    }
}
