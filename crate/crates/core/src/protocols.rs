//! Prepared states: Bell variants, GHZ over `F` fields, the NOT-gate
//! decomposition and resource accounting.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::ClosedForm;
use crate::error::{Error, Result};
use crate::gf::{FieldElement, GaloisField, PpsParams};
use crate::pps::{build_pps_set, PpsSet};
use crate::state::{
    apply_gate_dense, cyclic_permutation, make_field_state, mode_exchange, rps_labels,
    tensor_product, Ensemble, FieldState, UnitaryGate,
};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;
const SEARCH_BUDGET: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellKind {
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PsiPlus,
        BellKind::PsiMinus,
        BellKind::PhiPlus,
        BellKind::PhiMinus,
    ];

    /// Predicted correlation for `p >= 3`.
    pub fn closed_form(&self) -> ClosedForm {
        match self {
            BellKind::PsiPlus => ClosedForm::CosSum,
            BellKind::PsiMinus => ClosedForm::NegCosSum,
            BellKind::PhiPlus => ClosedForm::CosDiff,
            BellKind::PhiMinus => ClosedForm::NegCosDiff,
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
        })
    }
}

impl FromStr for BellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psi+" | "psi-plus" => Ok(BellKind::PsiPlus),
            "psi-" | "psi-minus" => Ok(BellKind::PsiMinus),
            "phi+" | "phi-plus" => Ok(BellKind::PhiPlus),
            "phi-" | "phi-minus" => Ok(BellKind::PhiMinus),
            other => Err(Error::InvalidParameter(format!(
                "unknown Bell variant {other:?} (expected psi+, psi-, phi+ or phi-)"
            ))),
        }
    }
}

fn check_capacity(set: &PpsSet, fields: usize) -> Result<()> {
    let available = set.len() - 1;
    if available < fields {
        return Err(Error::Capacity { fields, available });
    }
    Ok(())
}

fn check_labels(set: &PpsSet, labels: &[FieldElement]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        set.sequence(l)?;
        if l.is_zero() {
            return Err(Error::InvalidParameter(format!(
                "label {i} is the zero element; prepared fields need nonzero labels"
            )));
        }
        if labels[..i].contains(l) {
            return Err(Error::DegeneratePreparation(format!(
                "label {:?} used twice; the relative phase sequence would be all-zero",
                l.coeffs()
            )));
        }
    }
    Ok(())
}

/// The first `count` nonzero labels in antilog order.
pub fn default_labels(set: &PpsSet, count: usize) -> Result<Vec<FieldElement>> {
    check_capacity(set, count)?;
    Ok(set.field().nonzero_antilog()[..count].to_vec())
}

/// Cyclic relative phase labels `gamma_j = lambda_(j+1) - lambda_j`.
pub fn cyclic_rps(field: &GaloisField, labels: &[FieldElement]) -> Vec<FieldElement> {
    let n = labels.len();
    (0..n)
        .map(|j| field.sub(&labels[(j + 1) % n], &labels[j]))
        .collect()
}

/// True when no proper nonempty subset of the cyclic RPS labels sums to zero.
///
/// For odd `p` this is exactly the condition under which the slot average of
/// `prod_j cos(theta_j + gamma_j,k)` collapses to `C cos(sum theta)`: every other
/// sign pattern of the cosine expansion carries a nonzero label and averages out.
pub fn rps_zero_sum_free(field: &GaloisField, labels: &[FieldElement]) -> bool {
    let gammas = cyclic_rps(field, labels);
    let Some((_, head)) = gammas.split_last() else {
        return true;
    };
    let mut sums: HashSet<FieldElement> = HashSet::new();
    for g in head {
        if !extend_sums(field, &mut sums, g) {
            return false;
        }
    }
    true
}

/// Add `g` to the subset-sum set; false if zero becomes reachable.
fn extend_sums(field: &GaloisField, sums: &mut HashSet<FieldElement>, g: &FieldElement) -> bool {
    let mut fresh: Vec<FieldElement> = sums.iter().map(|x| field.add(x, g)).collect();
    fresh.push(g.clone());
    if fresh.iter().any(FieldElement::is_zero) {
        return false;
    }
    sums.extend(fresh);
    true
}

/// Labels for an `F`-party GHZ preparation.
///
/// Searches (antilog order first) for distinct nonzero labels whose cyclic RPS
/// labels are zero-sum-free, so that `E = cos(sum theta)` holds exactly. When the
/// field is too small for such a choice, the first `F` antilog labels are used.
pub fn ghz_labels(set: &PpsSet, count: usize) -> Result<Vec<FieldElement>> {
    check_capacity(set, count)?;
    Ok(search_zero_sum_free(set.field(), count)
        .unwrap_or_else(|| set.field().nonzero_antilog()[..count].to_vec()))
}

fn search_zero_sum_free(field: &GaloisField, count: usize) -> Option<Vec<FieldElement>> {
    let candidates = field.nonzero_antilog();
    let mut budget = SEARCH_BUDGET;
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    for first in 0..candidates.len() {
        chosen.push(first);
        if extend(
            field,
            candidates,
            count,
            &mut chosen,
            &HashSet::new(),
            &mut budget,
        ) {
            return Some(chosen.iter().map(|&i| candidates[i].clone()).collect());
        }
        chosen.pop();
        if budget == 0 {
            break;
        }
    }
    None
}

fn extend(
    field: &GaloisField,
    candidates: &[FieldElement],
    count: usize,
    chosen: &mut Vec<usize>,
    sums: &HashSet<FieldElement>,
    budget: &mut usize,
) -> bool {
    if chosen.len() == count {
        return true;
    }
    let last = &candidates[*chosen.last().expect("seeded")];
    for next in 0..candidates.len() {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if chosen.contains(&next) {
            continue;
        }
        let gamma = field.sub(&candidates[next], last);
        let mut grown = sums.clone();
        if !extend_sums(field, &mut grown, &gamma) {
            continue;
        }
        chosen.push(next);
        if extend(field, candidates, count, chosen, &grown, budget) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn balanced(set: &Arc<PpsSet>, labels: &[FieldElement]) -> Result<Vec<FieldState>> {
    labels
        .iter()
        .map(|l| {
            make_field_state(
                set.clone(),
                Complex64::new(H, 0.0),
                Complex64::new(H, 0.0),
                l.clone(),
            )
        })
        .collect()
}

/// Two exchanged fields simulating one of the four Bell states.
///
/// `psi+` is the plain mode exchange; `psi-` multiplies field b's mode-1 term by
/// `e^{i pi}`; `phi+-` additionally swap field b's modes.
pub fn prepare_bell(
    kind: BellKind,
    set: &Arc<PpsSet>,
    label_a: &FieldElement,
    label_b: &FieldElement,
) -> Result<Vec<FieldState>> {
    check_labels(set, &[label_a.clone(), label_b.clone()])?;
    let mut fields = mode_exchange(
        &balanced(set, &[label_a.clone(), label_b.clone()])?,
        &[1, 0],
    )?;
    if matches!(kind, BellKind::PsiMinus | BellKind::PhiMinus) {
        fields[1] = fields[1].scale_mode(1, Complex64::new(-1.0, 0.0))?;
    }
    if matches!(kind, BellKind::PhiPlus | BellKind::PhiMinus) {
        fields[1] = fields[1].apply_gate(&UnitaryGate::not())?;
    }
    Ok(fields)
}

/// Bell preparation with the first two antilog labels.
pub fn prepare_bell_default(kind: BellKind, set: &Arc<PpsSet>) -> Result<Vec<FieldState>> {
    let labels = default_labels(set, 2)?;
    prepare_bell(kind, set, &labels[0], &labels[1])
}

/// `F >= 3` fields with their mode-1 terms exchanged cyclically.
pub fn prepare_ghz(
    field_count: usize,
    set: &Arc<PpsSet>,
    labels: Option<&[FieldElement]>,
) -> Result<Vec<FieldState>> {
    if field_count < 3 {
        return Err(Error::InvalidParameter(format!(
            "GHZ preparation needs at least 3 fields, got {field_count}"
        )));
    }
    check_capacity(set, field_count)?;
    let labels = match labels {
        Some(l) => {
            if l.len() != field_count {
                return Err(Error::DimensionMismatch {
                    expected: field_count,
                    got: l.len(),
                });
            }
            l.to_vec()
        }
        None => ghz_labels(set, field_count)?,
    };
    check_labels(set, &labels)?;
    mode_exchange(&balanced(set, &labels)?, &cyclic_permutation(field_count))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NotGateReport {
    pub label: FieldElement,
    pub before: [Complex64; 2],
    pub after: [Complex64; 2],
    pub slot_operations: usize,
    /// Largest per-slot difference between the slot-wise and the coefficient-law paths.
    pub max_path_deviation: f64,
    /// Largest per-slot difference from `e^{i lambda_k} (beta, alpha)`.
    pub max_expected_deviation: f64,
    pub double_application_identity: bool,
}

/// NOT applied per slot and through the coefficient law, compared slot by slot.
pub fn not_gate_demo(
    set: &Arc<PpsSet>,
    alpha: Complex64,
    beta: Complex64,
    label: &FieldElement,
) -> Result<NotGateReport> {
    let gate = UnitaryGate::not();
    let state = make_field_state(set.clone(), alpha, beta, label.clone())?;
    let flipped = tensor_product(std::slice::from_ref(&state))?.apply_unitary(0, &gate)?;

    let mut max_path_deviation: f64 = 0.0;
    let mut max_expected_deviation: f64 = 0.0;
    for k in 0..set.len() {
        let slot = state.instantiate_slot(k)?;
        let per_slot = apply_gate_dense(&slot.amplitudes, 1, 0, &gate);
        let by_law = flipped.instantiate_slot(k)?.amplitudes;
        let phase = set.phasor(label, k)?;
        let expected = [phase * beta, phase * alpha];
        for m in 0..2 {
            max_path_deviation = max_path_deviation.max((per_slot[m] - by_law[m]).norm());
            max_expected_deviation = max_expected_deviation.max((per_slot[m] - expected[m]).norm());
        }
    }

    let after = state.apply_gate(&gate)?;
    let twice = after.apply_gate(&gate)?;
    Ok(NotGateReport {
        label: label.clone(),
        before: [alpha, beta],
        after: [after.mode(0)[0].amplitude, after.mode(1)[0].amplitude],
        slot_operations: set.len(),
        max_path_deviation,
        max_expected_deviation,
        double_application_identity: twice == state,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceReport {
    pub field_count: usize,
    pub sequences_used: usize,
    pub sequence_length: usize,
    /// Slot-level operations for one single-field gate.
    pub slot_operations_per_gate: usize,
    /// Stored terms across the per-field representation of the prepared state.
    pub per_field_terms: usize,
    /// Entries of the flattened tensor-product representation of the same state.
    pub general_state_terms: usize,
}

/// Resources of an `F`-field exchanged preparation (Bell for `F = 2`, GHZ above).
pub fn resource_report(field_count: usize, params: PpsParams) -> Result<ResourceReport> {
    if field_count == 0 {
        return Err(Error::InvalidParameter("field count must be >= 1".into()));
    }
    let set = Arc::new(build_pps_set(params)?);
    let labels = if field_count >= 3 {
        ghz_labels(&set, field_count)?
    } else {
        default_labels(&set, field_count)?
    };
    let fields = mode_exchange(&balanced(&set, &labels)?, &cyclic_permutation(field_count))?;
    let distinct: HashSet<FieldElement> = fields
        .iter()
        .flat_map(|f| (0..2).flat_map(move |m| f.mode(m).iter().map(|t| t.label.clone())))
        .collect();
    Ok(ResourceReport {
        field_count,
        sequences_used: distinct.len(),
        sequence_length: set.len(),
        slot_operations_per_gate: set.len(),
        per_field_terms: fields.iter().map(FieldState::term_count).sum(),
        general_state_terms: tensor_product(&fields)?.term_count(),
    })
}

/// `sum_j gamma_j` over the exchanged fields.
pub fn rps_sum(fields: &[FieldState]) -> Result<FieldElement> {
    let set = fields
        .first()
        .ok_or_else(|| Error::InvalidParameter("no fields".into()))?
        .pps();
    let f = set.field();
    Ok(rps_labels(fields)?
        .iter()
        .fold(f.zero(), |acc, g| f.add(&acc, g)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{correlation_time_average, CorrelationSession};
    use crate::state::tensor_product;

    fn set(p: u32, s: u32) -> Arc<PpsSet> {
        Arc::new(build_pps_set(PpsParams::from_table(p, s).unwrap()).unwrap())
    }

    #[test]
    fn psi_plus_coefficients() {
        let set = set(3, 3);
        let f = set.field();
        let (la, lb) = (f.alpha_pow(1), f.alpha_pow(4));
        let fields = prepare_bell(BellKind::PsiPlus, &set, &la, &lb).unwrap();
        let g = tensor_product(&fields).unwrap();
        assert_eq!(g.global_label(), &f.add(&la, &lb));
        let ga = f.sub(&lb, &la);
        let gb = f.neg(&ga);
        let half = Complex64::new(0.5, 0.0);
        assert!((g.coefficient(0b00, &f.zero()) - half).norm() < 1e-15);
        assert!((g.coefficient(0b11, &f.zero()) - half).norm() < 1e-15);
        assert!((g.coefficient(0b10, &ga) - half).norm() < 1e-15);
        assert!((g.coefficient(0b01, &gb) - half).norm() < 1e-15);
        assert_eq!(g.term_count(), 4);
        assert_eq!(g.partition_counts(), (2, 2));
    }

    #[test]
    fn bell_variants_closed_forms() {
        let set = set(3, 3);
        for kind in BellKind::ALL {
            let fields = prepare_bell_default(kind, &set).unwrap();
            let session = CorrelationSession::new(&fields, Some(kind.closed_form())).unwrap();
            for (a, b) in [(0.1, 0.7), (1.3, -2.2), (3.0, 0.5)] {
                let r = session.evaluate(&[a, b]).unwrap();
                assert!(r.formula_deviation().unwrap() < 1e-9, "{kind} {a} {b}");
                assert!(r.path_deviation() < 1e-9);
            }
        }
    }

    #[test]
    fn bell_errors() {
        let set = set(3, 2);
        let f = set.field();
        assert!(matches!(
            prepare_bell(BellKind::PsiPlus, &set, &f.one(), &f.one()),
            Err(Error::DegeneratePreparation(_))
        ));
        assert!(matches!(
            prepare_bell(BellKind::PsiPlus, &set, &f.zero(), &f.one()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn ghz3_rps_and_sign() {
        let set = set(3, 2);
        let fields = prepare_ghz(3, &set, None).unwrap();
        assert!(rps_sum(&fields).unwrap().is_zero());
        let t = std::f64::consts::PI / 3.0;
        let r = correlation_time_average(&fields, &[t, t, t]).unwrap();
        assert!((r.e_time + 1.0).abs() < 1e-9);
    }

    #[test]
    fn ghz_capacity() {
        let set = set(3, 2);
        assert!(prepare_ghz(6, &set, None).is_ok());
        assert!(prepare_ghz(8, &set, None).is_ok());
        assert!(matches!(
            prepare_ghz(10, &set, None),
            Err(Error::Capacity {
                fields: 10,
                available: 8
            })
        ));
        assert!(prepare_ghz(2, &set, None).is_err());
    }

    #[test]
    fn ghz_labels_for_three_follow_antilog_order() {
        let set = set(3, 2);
        assert_eq!(
            ghz_labels(&set, 3).unwrap(),
            default_labels(&set, 3).unwrap()
        );
    }

    #[test]
    fn zero_sum_free_search_limits() {
        // Any 6+ elements of GF(3)^2 contain a zero-sum subsequence (Davenport constant 5).
        let gf9 = set(3, 2);
        for f in 3..=5 {
            assert!(
                rps_zero_sum_free(gf9.field(), &ghz_labels(&gf9, f).unwrap()),
                "F={f}"
            );
        }
        for f in 6..=8 {
            assert!(
                !rps_zero_sum_free(gf9.field(), &ghz_labels(&gf9, f).unwrap()),
                "F={f}"
            );
        }
        let gf25 = set(5, 2);
        for f in 3..=8 {
            assert!(
                rps_zero_sum_free(gf25.field(), &ghz_labels(&gf25, f).unwrap()),
                "F={f}"
            );
        }
    }

    #[test]
    fn not_demo_paths_agree() {
        let set = set(3, 2);
        let l = set.field().alpha_pow(2);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let r = not_gate_demo(&set, one, zero, &l).unwrap();
        assert_eq!(r.after, [zero, one]);
        assert!(r.max_path_deviation <= 1e-12);
        assert!(r.double_application_identity);
        assert_eq!(r.slot_operations, 9);

        let h = Complex64::new(H, 0.0);
        let r = not_gate_demo(&set, h, -h, &l).unwrap();
        assert_eq!(r.after, [-h, h]);
        assert_eq!(r.label, l);
        assert!(r.max_expected_deviation <= 1e-12);
    }

    #[test]
    fn resources_linear() {
        let r3 = resource_report(3, PpsParams::from_table(3, 2).unwrap()).unwrap();
        assert_eq!((r3.sequences_used, r3.sequence_length), (3, 9));
        let r4 = resource_report(4, PpsParams::from_table(3, 2).unwrap()).unwrap();
        let r8 = resource_report(8, PpsParams::from_table(3, 2).unwrap()).unwrap();
        assert_eq!((r8.sequences_used, r8.sequence_length), (8, 9));
        assert_eq!(r8.sequences_used, 2 * r4.sequences_used);
        assert_eq!(r8.per_field_terms, 16);
        assert_eq!(r8.general_state_terms, 256);
        assert!(matches!(
            resource_report(9, PpsParams::from_table(3, 2).unwrap()),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn bell_kind_parse() {
        for kind in BellKind::ALL {
            assert_eq!(kind.to_string().parse::<BellKind>().unwrap(), kind);
        }
        assert!("chi".parse::<BellKind>().is_err());
    }
}
