//! Labeled superposition states of classical fields.
//!
//! A [`FieldState`] is one field with two modes, each mode a sum of
//! `amplitude * exp(i lambda^(label))` terms. A [`GeneralState`] is the
//! flattened tensor product over `F` fields: a sparse map from
//! `(bitstring, label)` to a complex coefficient. Instantiating either at slot
//! `k` replaces every label by its phase unit `exp(i lambda_k)` and yields an
//! ordinary state vector; that per-slot view is the reference all closed forms
//! are checked against.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::FieldElement;
use crate::pps::{PpsSet, DEFAULT_TOLERANCE};

const UNITARY_TOLERANCE: f64 = 1e-12;

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Anything that can be instantiated slot by slot.
pub trait Ensemble {
    fn pps_set(&self) -> &Arc<PpsSet>;

    fn field_count(&self) -> usize;

    /// The ordinary state vector at slot `k` (length `2^F`, field 0 most significant).
    fn instantiate_slot(&self, k: usize) -> Result<SlotVector>;

    fn slot_count(&self) -> usize {
        self.pps_set().len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotVector {
    pub amplitudes: Vec<Complex64>,
    pub slot: usize,
}

impl SlotVector {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn dot(&self, other: &SlotVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(c0(), |acc, (a, b)| acc + a.conj() * b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub amplitude: Complex64,
    pub label: FieldElement,
}

impl Term {
    pub fn new(amplitude: Complex64, label: FieldElement) -> Self {
        Self { amplitude, label }
    }
}

pub(crate) fn same_set(a: &Arc<PpsSet>, b: &Arc<PpsSet>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn check_slot(set: &PpsSet, k: usize) -> Result<()> {
    if k >= set.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            limit: set.len(),
        });
    }
    Ok(())
}

/// One classical field: `sum_i a_i e^{i lambda^(i)} |0> + sum_j b_j e^{i lambda^(j)} |1>`.
#[derive(Debug, Clone)]
pub struct FieldState {
    set: Arc<PpsSet>,
    modes: [Vec<Term>; 2],
}

impl PartialEq for FieldState {
    fn eq(&self, other: &Self) -> bool {
        same_set(&self.set, &other.set) && self.modes == other.modes
    }
}

impl FieldState {
    /// General single-field state with any number of labels per mode.
    ///
    /// Labels must be set members and distinct within a mode; the ensemble
    /// self inner product (`sum |amplitude|^2`) must be 1.
    pub fn new(set: Arc<PpsSet>, mode0: Vec<Term>, mode1: Vec<Term>) -> Result<Self> {
        for mode in [&mode0, &mode1] {
            for (i, t) in mode.iter().enumerate() {
                set.sequence(&t.label)?;
                if mode[..i].iter().any(|u| u.label == t.label) {
                    return Err(Error::InvalidParameter(format!(
                        "label {:?} repeated within one mode",
                        t.label.coeffs()
                    )));
                }
            }
        }
        let norm_sq: f64 = mode0
            .iter()
            .chain(&mode1)
            .map(|t| t.amplitude.norm_sqr())
            .sum();
        if (norm_sq - 1.0).abs() > DEFAULT_TOLERANCE {
            return Err(Error::Normalization { norm_sq });
        }
        Ok(Self {
            set,
            modes: [mode0, mode1],
        })
    }

    pub fn pps(&self) -> &Arc<PpsSet> {
        &self.set
    }

    pub fn mode(&self, m: usize) -> &[Term] {
        &self.modes[m]
    }

    pub fn term_count(&self) -> usize {
        self.modes[0].len() + self.modes[1].len()
    }

    /// Single term per mode (the form produced by [`make_field_state`] and mode exchange).
    pub fn is_single_term(&self) -> bool {
        self.modes.iter().all(|m| m.len() == 1)
    }

    /// Label of the first mode-0 term, or of the first mode-1 term if mode 0 is empty.
    pub fn reference_label(&self) -> FieldElement {
        self.modes[0]
            .first()
            .or_else(|| self.modes[1].first())
            .map(|t| t.label.clone())
            .unwrap_or_else(|| self.set.field().zero())
    }

    /// `gamma = label(mode 1) - label(mode 0)` for single-term fields.
    pub fn relative_phase_label(&self) -> Option<FieldElement> {
        if !self.is_single_term() {
            return None;
        }
        Some(
            self.set
                .field()
                .sub(&self.modes[1][0].label, &self.modes[0][0].label),
        )
    }

    /// Both modes carry amplitude magnitude `1/sqrt 2`.
    pub fn is_balanced(&self) -> bool {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        self.modes.iter().all(|m| {
            let total: Complex64 = m.iter().map(|t| t.amplitude).sum();
            m.len() == 1 && (total.norm() - h).abs() <= DEFAULT_TOLERANCE
        })
    }

    /// Multiply every amplitude of one mode by `factor` (a unit-modulus phase).
    pub fn scale_mode(&self, mode: usize, factor: Complex64) -> Result<Self> {
        let mut modes = self.modes.clone();
        modes
            .get_mut(mode)
            .ok_or(Error::IndexOutOfRange {
                index: mode,
                limit: 2,
            })?
            .iter_mut()
            .for_each(|t| t.amplitude *= factor);
        let [m0, m1] = modes;
        Self::new(self.set.clone(), m0, m1)
    }

    /// Apply a single-field gate, merging terms that share a label.
    pub fn apply_gate(&self, gate: &UnitaryGate) -> Result<Self> {
        let mut out: [Vec<Term>; 2] = [Vec::new(), Vec::new()];
        for (to, row) in out.iter_mut().enumerate() {
            for from in 0..2 {
                let u = gate.matrix[to][from];
                if u == c0() {
                    continue;
                }
                for t in &self.modes[from] {
                    match row.iter_mut().find(|r| r.label == t.label) {
                        Some(r) => r.amplitude += u * t.amplitude,
                        None => row.push(Term::new(u * t.amplitude, t.label.clone())),
                    }
                }
            }
        }
        let [m0, m1] = out;
        Self::new(self.set.clone(), m0, m1)
    }
}

impl Ensemble for FieldState {
    fn pps_set(&self) -> &Arc<PpsSet> {
        &self.set
    }

    fn field_count(&self) -> usize {
        1
    }

    fn instantiate_slot(&self, k: usize) -> Result<SlotVector> {
        check_slot(&self.set, k)?;
        let mut amplitudes = vec![c0(); 2];
        for (m, terms) in self.modes.iter().enumerate() {
            for t in terms {
                amplitudes[m] += t.amplitude * self.set.phasor(&t.label, k)?;
            }
        }
        Ok(SlotVector {
            amplitudes,
            slot: k,
        })
    }
}

/// `e^{i lambda^(label)} (alpha|0> + beta|1>)`.
pub fn make_field_state(
    set: Arc<PpsSet>,
    alpha: Complex64,
    beta: Complex64,
    label: FieldElement,
) -> Result<FieldState> {
    FieldState::new(
        set,
        vec![Term::new(alpha, label.clone())],
        vec![Term::new(beta, label)],
    )
}

/// Ensemble inner product `(1/L) sum_k <x_k|y_k>`, evaluated slot by slot.
pub fn inner_product(x: &FieldState, y: &FieldState) -> Result<Complex64> {
    if !same_set(&x.set, &y.set) {
        return Err(Error::IncompatibleSets);
    }
    let mut acc = c0();
    for k in 0..x.set.len() {
        acc += x.instantiate_slot(k)?.dot(&y.instantiate_slot(k)?);
    }
    Ok(acc / x.set.len() as f64)
}

/// Closed form of [`inner_product`]: only equal-label term pairs survive.
pub fn inner_product_analytic(x: &FieldState, y: &FieldState) -> Result<Complex64> {
    if !same_set(&x.set, &y.set) {
        return Err(Error::IncompatibleSets);
    }
    let mut acc = c0();
    for m in 0..2 {
        for a in &x.modes[m] {
            for b in y.modes[m].iter().filter(|b| b.label == a.label) {
                acc += a.amplitude.conj() * b.amplitude;
            }
        }
    }
    Ok(acc)
}

/// 2x2 unitary acting on one field; `matrix[out][in]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryGate {
    matrix: [[Complex64; 2]; 2],
}

impl UnitaryGate {
    pub fn new(matrix: [[Complex64; 2]; 2]) -> Result<Self> {
        let mut deviation: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let uu: Complex64 = (0..2).map(|l| matrix[i][l] * matrix[j][l].conj()).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((uu - target).norm());
            }
        }
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity() -> Self {
        let (o, l) = (c0(), Complex64::new(1.0, 0.0));
        Self {
            matrix: [[l, o], [o, l]],
        }
    }

    /// Mode swap `|0> <-> |1>`.
    pub fn not() -> Self {
        let (o, l) = (c0(), Complex64::new(1.0, 0.0));
        Self {
            matrix: [[o, l], [l, o]],
        }
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            matrix: [[h, h], [h, -h]],
        }
    }

    /// `diag(1, e^{i phi})`.
    pub fn phase(phi: f64) -> Self {
        let (o, l) = (c0(), Complex64::new(1.0, 0.0));
        Self {
            matrix: [[l, o], [o, Complex64::from_polar(1.0, phi)]],
        }
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.matrix
    }

    pub fn compose(&self, after: &UnitaryGate) -> UnitaryGate {
        let mut m = [[c0(); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..2).map(|l| after.matrix[i][l] * self.matrix[l][j]).sum();
            }
        }
        UnitaryGate { matrix: m }
    }
}

/// Apply `gate` to field `field_index` of a dense `2^F` vector.
pub fn apply_gate_dense(
    amplitudes: &[Complex64],
    field_count: usize,
    field_index: usize,
    gate: &UnitaryGate,
) -> Vec<Complex64> {
    let shift = field_count - 1 - field_index;
    let mut out = vec![c0(); amplitudes.len()];
    for (idx, &a) in amplitudes.iter().enumerate() {
        let bit = (idx >> shift) & 1;
        for to in 0..2 {
            let target = (idx & !(1 << shift)) | (to << shift);
            out[target] += gate.matrix[to][bit] * a;
        }
    }
    out
}

/// Flattened multi-field state.
///
/// Coefficients are keyed by `(bits, label)` where `bits` has field 0 as the
/// most significant bit and `label` is relative to `global_label`; the term's
/// phase sequence is `global_label + label`.
#[derive(Debug, Clone)]
pub struct GeneralState {
    set: Arc<PpsSet>,
    field_count: usize,
    global_label: FieldElement,
    terms: BTreeMap<(usize, FieldElement), Complex64>,
}

impl GeneralState {
    pub fn from_terms(
        set: Arc<PpsSet>,
        field_count: usize,
        global_label: FieldElement,
        terms: impl IntoIterator<Item = ((usize, FieldElement), Complex64)>,
    ) -> Result<Self> {
        if field_count == 0 || field_count >= usize::BITS as usize {
            return Err(Error::InvalidParameter(format!(
                "field count {field_count} out of range"
            )));
        }
        set.sequence(&global_label)?;
        let mut map = BTreeMap::new();
        for ((bits, label), c) in terms {
            if bits >> field_count != 0 {
                return Err(Error::IndexOutOfRange {
                    index: bits,
                    limit: 1 << field_count,
                });
            }
            set.sequence(&label)?;
            if c != c0() {
                *map.entry((bits, label)).or_insert_with(c0) += c;
            }
        }
        Ok(Self {
            set,
            field_count,
            global_label,
            terms: map,
        })
    }

    pub fn global_label(&self) -> &FieldElement {
        &self.global_label
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, FieldElement), &Complex64)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, bits: usize, label: &FieldElement) -> Complex64 {
        self.terms
            .get(&(bits, label.clone()))
            .copied()
            .unwrap_or_else(c0)
    }

    /// Counts of entries whose relative label is the identity and of the rest.
    pub fn partition_counts(&self) -> (usize, usize) {
        let identity = self.terms.keys().filter(|(_, l)| l.is_zero()).count();
        (identity, self.terms.len() - identity)
    }

    /// Absolute phase-sequence labels of all entries.
    pub fn absolute_labels(&self) -> Vec<FieldElement> {
        let f = self.set.field();
        self.terms
            .keys()
            .map(|(_, l)| f.add(&self.global_label, l))
            .collect()
    }

    pub fn bits_string(&self, bits: usize) -> String {
        (0..self.field_count)
            .map(|j| {
                if (bits >> (self.field_count - 1 - j)) & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    /// `(1/L) sum_k |Psi_k|^2`.
    pub fn ensemble_norm(&self) -> Result<f64> {
        let mut acc = 0.0;
        for k in 0..self.set.len() {
            acc += self.instantiate_slot(k)?.norm_sqr();
        }
        Ok(acc / self.set.len() as f64)
    }

    /// Transform coefficients of one field by `gate`; labels are untouched.
    pub fn apply_unitary(&self, field_index: usize, gate: &UnitaryGate) -> Result<Self> {
        if field_index >= self.field_count {
            return Err(Error::IndexOutOfRange {
                index: field_index,
                limit: self.field_count,
            });
        }
        let shift = self.field_count - 1 - field_index;
        let mut terms = BTreeMap::new();
        for ((bits, label), &c) in &self.terms {
            let from = (bits >> shift) & 1;
            for to in 0..2 {
                let u = gate.matrix[to][from];
                if u == c0() {
                    continue;
                }
                let key = ((bits & !(1 << shift)) | (to << shift), label.clone());
                *terms.entry(key).or_insert_with(c0) += u * c;
            }
        }
        terms.retain(|_, c| *c != c0());
        Ok(Self {
            set: self.set.clone(),
            field_count: self.field_count,
            global_label: self.global_label.clone(),
            terms,
        })
    }
}

impl Ensemble for GeneralState {
    fn pps_set(&self) -> &Arc<PpsSet> {
        &self.set
    }

    fn field_count(&self) -> usize {
        self.field_count
    }

    fn instantiate_slot(&self, k: usize) -> Result<SlotVector> {
        check_slot(&self.set, k)?;
        let f = self.set.field();
        let mut amplitudes = vec![c0(); 1 << self.field_count];
        for ((bits, label), c) in &self.terms {
            amplitudes[*bits] += c * self.set.phasor(&f.add(&self.global_label, label), k)?;
        }
        Ok(SlotVector {
            amplitudes,
            slot: k,
        })
    }
}

/// Direct product of fields. Labels of each product term are group sums of the
/// chosen per-mode labels; the sum of the fields' reference labels is factored
/// out as the global label.
pub fn tensor_product(fields: &[FieldState]) -> Result<GeneralState> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidParameter("tensor product of zero fields".into()))?;
    let set = first.set.clone();
    if fields.iter().any(|f| !same_set(&f.set, &set)) {
        return Err(Error::IncompatibleSets);
    }
    let gf = set.field();
    let global = fields
        .iter()
        .fold(gf.zero(), |acc, f| gf.add(&acc, &f.reference_label()));

    let mut acc: BTreeMap<(usize, FieldElement), Complex64> = BTreeMap::new();
    acc.insert((0, gf.neg(&global)), Complex64::new(1.0, 0.0));
    for field in fields {
        let mut next = BTreeMap::new();
        for ((bits, label), c) in &acc {
            for (m, terms) in field.modes.iter().enumerate() {
                for t in terms.iter().filter(|t| t.amplitude != c0()) {
                    let key = ((bits << 1) | m, gf.add(label, &t.label));
                    *next.entry(key).or_insert_with(c0) += c * t.amplitude;
                }
            }
        }
        acc = next;
    }
    acc.retain(|(_, label), c| {
        debug_assert!(gf.contains(label));
        *c != c0()
    });
    Ok(GeneralState {
        set,
        field_count: fields.len(),
        global_label: global,
        terms: acc,
    })
}

/// `(j + 1) mod F`: field `j` receives the mode-1 term of field `j + 1`.
pub fn cyclic_permutation(field_count: usize) -> Vec<usize> {
    (0..field_count).map(|j| (j + 1) % field_count).collect()
}

/// Exchange mode-1 terms among fields: field `j` receives the mode-1
/// `(amplitude, label)` of field `cycle[j]`, keeping its own mode-0 term.
pub fn mode_exchange(fields: &[FieldState], cycle: &[usize]) -> Result<Vec<FieldState>> {
    if cycle.len() != fields.len() {
        return Err(Error::DimensionMismatch {
            expected: fields.len(),
            got: cycle.len(),
        });
    }
    let mut seen = vec![false; fields.len()];
    for &c in cycle {
        if c >= fields.len() || std::mem::replace(&mut seen[c], true) {
            return Err(Error::InvalidParameter(format!(
                "{cycle:?} is not a permutation of 0..{}",
                fields.len()
            )));
        }
    }
    if let Some(f) = fields.first() {
        if fields.iter().any(|g| !same_set(&g.set, &f.set)) {
            return Err(Error::IncompatibleSets);
        }
    }
    if let Some(j) = fields.iter().position(|f| !f.is_single_term()) {
        return Err(Error::UnsupportedForm(format!(
            "field {j} has more than one term in a mode; exchange needs one (amplitude, label) per mode"
        )));
    }
    fields
        .iter()
        .zip(cycle)
        .map(|(own, &src)| {
            FieldState::new(
                own.set.clone(),
                own.modes[0].clone(),
                fields[src].modes[1].clone(),
            )
        })
        .collect()
}

/// Relative phase labels `gamma^(j)` of exchanged single-term fields.
pub fn rps_labels(fields: &[FieldState]) -> Result<Vec<FieldElement>> {
    fields
        .iter()
        .enumerate()
        .map(|(j, f)| {
            f.relative_phase_label().ok_or_else(|| {
                Error::UnsupportedForm(format!("field {j} is not in single-term form"))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::PpsParams;
    use crate::pps::build_pps_set;

    fn set(p: u32, s: u32) -> Arc<PpsSet> {
        Arc::new(build_pps_set(PpsParams::from_table(p, s).unwrap()).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn field_state_construction() {
        let set = set(3, 2);
        let beta = set.field().alpha_pow(2);
        let pure = make_field_state(set.clone(), c(1.0, 0.0), c(0.0, 0.0), beta.clone()).unwrap();
        assert_eq!(pure.mode(0)[0].label, beta);
        let v =
            make_field_state(set.clone(), c(0.6, 0.0), c(0.8, 0.0), set.field().zero()).unwrap();
        assert!((inner_product(&v, &v).unwrap() - 1.0).norm() < 1e-12);
        assert!(matches!(
            make_field_state(set, c(0.6, 0.0), c(0.6, 0.0), beta),
            Err(Error::Normalization { .. })
        ));
    }

    #[test]
    fn repeated_label_rejected() {
        let set = set(3, 2);
        let l = set.field().one();
        let r = FieldState::new(
            set.clone(),
            vec![
                Term::new(c(0.5, 0.0), l.clone()),
                Term::new(c(0.5, 0.0), l.clone()),
            ],
            vec![Term::new(c(H, 0.0), l)],
        );
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn inner_products() {
        let set = set(3, 3);
        let f = set.field();
        let a = make_field_state(set.clone(), c(H, 0.0), c(H, 0.0), f.alpha_pow(1)).unwrap();
        let b = make_field_state(set.clone(), c(H, 0.0), c(H, 0.0), f.alpha_pow(7)).unwrap();
        assert!((inner_product(&a, &a).unwrap() - 1.0).norm() < 1e-12);
        assert!(inner_product(&a, &b).unwrap().norm() < 1e-9);
        let up = make_field_state(set.clone(), c(1.0, 0.0), c(0.0, 0.0), f.one()).unwrap();
        let down = make_field_state(set.clone(), c(0.0, 0.0), c(1.0, 0.0), f.one()).unwrap();
        assert!(inner_product(&up, &down).unwrap().norm() < 1e-15);

        let other = Arc::new(build_pps_set(PpsParams::from_table(2, 3).unwrap()).unwrap());
        let x =
            make_field_state(other.clone(), c(1.0, 0.0), c(0.0, 0.0), other.field().one()).unwrap();
        assert!(matches!(
            inner_product(&a, &x),
            Err(Error::IncompatibleSets)
        ));
    }

    #[test]
    fn eq1_slot_structure() {
        let set = set(3, 2);
        let label = set.field().alpha_pow(3);
        let (al, be) = (c(0.6, 0.0), c(0.0, 0.8));
        let st = make_field_state(set.clone(), al, be, label.clone()).unwrap();
        for k in 0..set.len() {
            let ph = set.phasor(&label, k).unwrap();
            let v = st.instantiate_slot(k).unwrap();
            assert!((v.amplitudes[0] - al * ph).norm() < 1e-15);
            assert!((v.amplitudes[1] - be * ph).norm() < 1e-15);
        }
        assert!(matches!(
            st.instantiate_slot(9),
            Err(Error::IndexOutOfRange { index: 9, limit: 9 })
        ));
    }

    #[test]
    fn zero_label_slot_is_coefficients() {
        let set = set(3, 2);
        let st =
            make_field_state(set.clone(), c(0.6, 0.0), c(0.8, 0.0), set.field().zero()).unwrap();
        let g = tensor_product(&[st]).unwrap();
        for k in 0..set.len() {
            assert_eq!(
                g.instantiate_slot(k).unwrap().amplitudes,
                vec![c(0.6, 0.0), c(0.8, 0.0)]
            );
        }
    }

    #[test]
    fn tensor_single_field_identity() {
        let set = set(3, 2);
        let l = set.field().alpha_pow(5);
        let st = make_field_state(set, c(0.6, 0.0), c(0.8, 0.0), l.clone()).unwrap();
        let g = tensor_product(std::slice::from_ref(&st)).unwrap();
        assert_eq!(g.term_count(), 2);
        assert_eq!(g.global_label(), &l);
        for k in 0..9 {
            assert_eq!(
                g.instantiate_slot(k).unwrap(),
                st.instantiate_slot(k).unwrap()
            );
        }
    }

    #[test]
    fn tensor_all_zero_modes() {
        let set = set(3, 2);
        let fields: Vec<_> = (0..4)
            .map(|j| {
                make_field_state(
                    set.clone(),
                    c(1.0, 0.0),
                    c(0.0, 0.0),
                    set.field().alpha_pow(j),
                )
                .unwrap()
            })
            .collect();
        let g = tensor_product(&fields).unwrap();
        assert_eq!(g.term_count(), 1);
        assert_eq!(g.terms().next().unwrap().0 .0, 0);
    }

    #[test]
    fn tensor_two_fields_symbolic() {
        // Symbolic expansion: (a0|0>+a1|1>)e^{la} x (b0|0>+b1|1>)e^{lb}
        // gives four terms all on label la+lb, i.e. relative label zero.
        let set = set(3, 3);
        let f = set.field();
        let (la, lb) = (f.alpha_pow(2), f.alpha_pow(9));
        let a = make_field_state(set.clone(), c(H, 0.0), c(0.0, H), la.clone()).unwrap();
        let b = make_field_state(set.clone(), c(0.6, 0.0), c(0.8, 0.0), lb.clone()).unwrap();
        let g = tensor_product(&[a, b]).unwrap();
        assert_eq!(g.global_label(), &f.add(&la, &lb));
        assert_eq!(g.partition_counts(), (4, 0));
        let z = f.zero();
        assert!((g.coefficient(0b00, &z) - c(H * 0.6, 0.0)).norm() < 1e-15);
        assert!((g.coefficient(0b01, &z) - c(H * 0.8, 0.0)).norm() < 1e-15);
        assert!((g.coefficient(0b10, &z) - c(0.0, H * 0.6)).norm() < 1e-15);
        assert!((g.coefficient(0b11, &z) - c(0.0, H * 0.8)).norm() < 1e-15);
        assert!((g.ensemble_norm().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn not_gate_on_eq1() {
        let set = set(3, 2);
        let l = set.field().alpha_pow(1);
        let st = make_field_state(set.clone(), c(0.6, 0.0), c(0.0, 0.8), l.clone()).unwrap();
        let flipped = st.apply_gate(&UnitaryGate::not()).unwrap();
        let expect = make_field_state(set.clone(), c(0.0, 0.8), c(0.6, 0.0), l).unwrap();
        assert_eq!(flipped, expect);

        let g = tensor_product(&[st]).unwrap();
        let g2 = g.apply_unitary(0, &UnitaryGate::not()).unwrap();
        let g_expect = tensor_product(&[expect]).unwrap();
        for k in 0..set.len() {
            assert_eq!(
                g2.instantiate_slot(k).unwrap(),
                g_expect.instantiate_slot(k).unwrap()
            );
        }
        assert!(matches!(
            g.apply_unitary(1, &UnitaryGate::not()),
            Err(Error::IndexOutOfRange { index: 1, limit: 1 })
        ));
    }

    #[test]
    fn identity_and_hadamard_squared() {
        let set = set(3, 2);
        let f = set.field();
        let a = make_field_state(set.clone(), c(0.6, 0.0), c(0.0, 0.8), f.alpha_pow(1)).unwrap();
        let b = make_field_state(set.clone(), c(H, 0.0), c(-H, 0.0), f.alpha_pow(4)).unwrap();
        let g = tensor_product(&[a, b]).unwrap();
        let id = g.apply_unitary(1, &UnitaryGate::identity()).unwrap();
        let hh = g
            .apply_unitary(0, &UnitaryGate::hadamard())
            .unwrap()
            .apply_unitary(0, &UnitaryGate::hadamard())
            .unwrap();
        for k in 0..set.len() {
            let v = g.instantiate_slot(k).unwrap().amplitudes;
            assert_eq!(id.instantiate_slot(k).unwrap().amplitudes, v);
            for (x, y) in hh.instantiate_slot(k).unwrap().amplitudes.iter().zip(&v) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn non_unitary_rejected() {
        let m = [[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert!(matches!(UnitaryGate::new(m), Err(Error::NotUnitary { .. })));
        assert!(UnitaryGate::new(*UnitaryGate::phase(0.3).matrix()).is_ok());
    }

    #[test]
    fn swap_gives_opposite_rps() {
        let set = set(3, 2);
        let f = set.field();
        let (la, lb) = (f.alpha_pow(0), f.alpha_pow(3));
        let fields = vec![
            make_field_state(set.clone(), c(H, 0.0), c(H, 0.0), la.clone()).unwrap(),
            make_field_state(set.clone(), c(H, 0.0), c(H, 0.0), lb.clone()).unwrap(),
        ];
        let ex = mode_exchange(&fields, &[1, 0]).unwrap();
        let g = rps_labels(&ex).unwrap();
        assert_eq!(g[0], f.sub(&lb, &la));
        assert_eq!(g[0], f.neg(&g[1]));
        assert_eq!(mode_exchange(&ex, &[1, 0]).unwrap(), fields);
        assert_eq!(mode_exchange(&fields, &[0, 1]).unwrap(), fields);
    }

    #[test]
    fn three_cycle_rps_sum_zero() {
        let set = set(3, 2);
        let f = set.field();
        let fields: Vec<_> = [1, 4, 6]
            .iter()
            .map(|&j| make_field_state(set.clone(), c(H, 0.0), c(H, 0.0), f.alpha_pow(j)).unwrap())
            .collect();
        let ex = mode_exchange(&fields, &cyclic_permutation(3)).unwrap();
        let sum = rps_labels(&ex)
            .unwrap()
            .iter()
            .fold(f.zero(), |acc, g| f.add(&acc, g));
        assert!(sum.is_zero());
    }

    #[test]
    fn exchange_errors() {
        let set = set(3, 2);
        let f = set.field();
        let a = make_field_state(set.clone(), c(H, 0.0), c(H, 0.0), f.alpha_pow(0)).unwrap();
        let multi = FieldState::new(
            set.clone(),
            vec![
                Term::new(c(0.5, 0.0), f.alpha_pow(1)),
                Term::new(c(0.5, 0.0), f.alpha_pow(2)),
            ],
            vec![Term::new(c(H, 0.0), f.alpha_pow(1))],
        )
        .unwrap();
        assert!(matches!(
            mode_exchange(&[a.clone(), multi], &[1, 0]),
            Err(Error::UnsupportedForm(_))
        ));
        assert!(matches!(
            mode_exchange(&[a.clone(), a.clone()], &[0, 0]),
            Err(Error::InvalidParameter(_))
        ));
        let lopsided =
            make_field_state(set.clone(), c(0.6, 0.0), c(0.8, 0.0), f.alpha_pow(2)).unwrap();
        assert!(matches!(
            mode_exchange(&[a, lopsided], &[1, 0]),
            Err(Error::Normalization { .. })
        ));
    }

    #[test]
    fn dense_gate_matches_bit_order() {
        // |10> (field 0 set) under NOT on field 1 becomes |11>
        let mut v = vec![c0(); 4];
        v[0b10] = c(1.0, 0.0);
        let out = apply_gate_dense(&v, 2, 1, &UnitaryGate::not());
        assert_eq!(out[0b11], c(1.0, 0.0));
    }
}
