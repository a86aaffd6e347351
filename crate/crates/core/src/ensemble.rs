//! Per-slot and ensemble-averaged density matrices, the correlation operator
//! and correlation functions.
//!
//! Three routes to the correlation `E`:
//!
//! * time average: `(1/(L C)) sum_k prod_j <psi_j,k| P(theta_j) |psi_j,k>`
//! * trace: `(1/C) Tr[rho_mean P(theta_1..theta_F)]`
//! * closed form, e.g. `cos(theta_1 + ... + theta_F)`
//!
//! with `C = 2^(1-F)` on every route.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pps::{PpsSet, DEFAULT_TOLERANCE};
use crate::state::{same_set, tensor_product, Ensemble, FieldState, SlotVector};

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Normalization `C = 2^(1-F)` that maps perfect correlation to +-1.
pub fn normalization(field_count: usize) -> f64 {
    2f64.powi(1 - field_count as i32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_slot(v: &SlotVector) -> Self {
        let n = v.amplitudes.len();
        let entries = DMatrix::from_fn(n, n, |i, j| v.amplitudes[i] * v.amplitudes[j].conj());
        Self { entries }
    }

    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `max |rho - rho^dagger|` entry-wise.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                dev = dev.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.entries + self.entries.adjoint()).scale(0.5);
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalues greater than `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        let herm = (&self.entries + self.entries.adjoint()).scale(0.5);
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .filter(|&&e| e > tol)
            .count()
    }

    /// Name of the first violated density-matrix invariant, if any.
    pub fn check(&self, tol: f64) -> Option<&'static str> {
        if self.hermitian_deviation() > 1e-12 {
            Some("hermitian")
        } else if (self.trace() - 1.0).norm() > tol {
            Some("unit-trace")
        } else if self.min_eigenvalue() < -tol {
            Some("positive-semidefinite")
        } else {
            None
        }
    }

    /// `Tr[self * op]`.
    pub fn trace_with(&self, op: &CorrelationOperator) -> Result<Complex64> {
        trace_product(&self.entries, &op.matrix)
    }

    /// Largest off-diagonal magnitude outside the listed positions.
    pub fn max_offdiag_excluding(&self, keep: &[(usize, usize)]) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j && !keep.contains(&(i, j)) {
                    m = m.max(self.entries[(i, j)].norm());
                }
            }
        }
        m
    }
}

fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Result<Complex64> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    let n = a.nrows();
    let mut acc = c0();
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc)
}

/// `|Psi_k><Psi_k|`.
pub fn slot_density<S: Ensemble>(state: &S, k: usize) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_slot(&state.instantiate_slot(k)?))
}

/// Mean of the slot densities over `k = 0..L`, summed in ascending `k`.
pub fn mean_reduced_density<S: Ensemble>(state: &S) -> Result<DensityMatrix> {
    let n = 1usize << state.field_count();
    let mut acc = DMatrix::from_element(n, n, c0());
    let l = state.slot_count();
    for k in 0..l {
        acc += slot_density(state, k)?.entries;
    }
    Ok(DensityMatrix {
        entries: acc.unscale(l as f64),
    })
}

/// `P(theta_1) (x) ... (x) P(theta_F)` with `P(theta) = [[0, e^{i theta}], [e^{-i theta}, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationOperator {
    angles: Vec<f64>,
    matrix: DMatrix<Complex64>,
}

impl CorrelationOperator {
    pub fn new(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::AngleCount {
                expected: 1,
                got: 0,
            });
        }
        let matrix = angles
            .iter()
            .map(|&t| Self::block(t))
            .reduce(|acc, b| acc.kronecker(&b))
            .expect("nonempty");
        Ok(Self {
            angles: angles.to_vec(),
            matrix,
        })
    }

    pub fn block(theta: f64) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                c0(),
                Complex64::from_polar(1.0, theta),
                Complex64::from_polar(1.0, -theta),
                c0(),
            ],
        )
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
}

fn check_angles<S: Ensemble>(state: &S, angles: &[f64]) -> Result<()> {
    if angles.len() != state.field_count() {
        return Err(Error::AngleCount {
            expected: state.field_count(),
            got: angles.len(),
        });
    }
    Ok(())
}

/// `(1/L) sum_k Tr[rho_k P]`, no normalization.
pub fn slot_trace_average<S: Ensemble>(state: &S, angles: &[f64]) -> Result<f64> {
    check_angles(state, angles)?;
    let op = CorrelationOperator::new(angles)?;
    let mut acc = c0();
    for k in 0..state.slot_count() {
        acc += slot_density(state, k)?.trace_with(&op)?;
    }
    Ok(acc.re / state.slot_count() as f64)
}

/// `(1/C) Tr[rho_mean P(angles)]`.
pub fn correlation_trace<S: Ensemble>(state: &S, angles: &[f64]) -> Result<f64> {
    check_angles(state, angles)?;
    let rho = mean_reduced_density(state)?;
    let op = CorrelationOperator::new(angles)?;
    Ok(rho.trace_with(&op)?.re / normalization(angles.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotExpectation {
    pub value: f64,
    /// The field is in balanced single-term form, where `value = cos(theta + gamma_k)`.
    pub cos_identity: bool,
}

/// `<psi_k| P(theta) |psi_k>` for one field at slot `k`.
pub fn slot_expectation(field: &FieldState, theta: f64, k: usize) -> Result<SlotExpectation> {
    let v = field.instantiate_slot(k)?;
    Ok(SlotExpectation {
        value: pair_expectation(&v.amplitudes, theta),
        cos_identity: field.is_balanced(),
    })
}

fn pair_expectation(v: &[Complex64], theta: f64) -> f64 {
    (v[0].conj() * v[1] * Complex64::from_polar(1.0, theta)
        + v[1].conj() * v[0] * Complex64::from_polar(1.0, -theta))
    .re
}

/// Closed-form predictions for prepared states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedForm {
    /// `cos(sum theta)`
    CosSum,
    /// `-cos(sum theta)`
    NegCosSum,
    /// `cos(theta_1 - theta_2)`
    CosDiff,
    /// `-cos(theta_1 - theta_2)`
    NegCosDiff,
}

impl ClosedForm {
    pub fn evaluate(&self, angles: &[f64]) -> f64 {
        let sum: f64 = angles.iter().sum();
        let diff =
            angles.first().copied().unwrap_or(0.0) - angles.iter().skip(1).copied().sum::<f64>();
        match self {
            ClosedForm::CosSum => sum.cos(),
            ClosedForm::NegCosSum => -sum.cos(),
            ClosedForm::CosDiff => diff.cos(),
            ClosedForm::NegCosDiff => -diff.cos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub angles: Vec<f64>,
    pub e_time: f64,
    pub e_trace: f64,
    pub e_formula: Option<f64>,
    pub normalization: f64,
}

impl CorrelationResult {
    pub fn path_deviation(&self) -> f64 {
        (self.e_time - self.e_trace).abs()
    }

    pub fn formula_deviation(&self) -> Option<f64> {
        self.e_formula.map(|f| (self.e_time - f).abs())
    }
}

/// Precomputed slot vectors and mean density for repeated correlation queries
/// over one set of fields.
#[derive(Debug, Clone)]
pub struct CorrelationSession {
    set: Arc<PpsSet>,
    /// `slots[k][j]` is field `j` at slot `k`.
    slots: Vec<Vec<[Complex64; 2]>>,
    rho: DensityMatrix,
    formula: Option<ClosedForm>,
}

impl CorrelationSession {
    /// `formula` is attached to results only when `p >= 3`.
    pub fn new(fields: &[FieldState], formula: Option<ClosedForm>) -> Result<Self> {
        let general = tensor_product(fields)?;
        let set = fields[0].pps().clone();
        if fields.iter().any(|f| !same_set(f.pps(), &set)) {
            return Err(Error::IncompatibleSets);
        }
        let mut slots = Vec::with_capacity(set.len());
        for k in 0..set.len() {
            let row = fields
                .iter()
                .map(|f| {
                    f.instantiate_slot(k)
                        .map(|v| [v.amplitudes[0], v.amplitudes[1]])
                })
                .collect::<Result<Vec<_>>>()?;
            slots.push(row);
        }
        Ok(Self {
            rho: mean_reduced_density(&general)?,
            set,
            slots,
            formula,
        })
    }

    pub fn field_count(&self) -> usize {
        self.slots[0].len()
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.rho
    }

    fn check(&self, angles: &[f64]) -> Result<()> {
        if angles.len() != self.field_count() {
            return Err(Error::AngleCount {
                expected: self.field_count(),
                got: angles.len(),
            });
        }
        Ok(())
    }

    /// Time-average route only.
    pub fn e_time(&self, angles: &[f64]) -> Result<f64> {
        self.check(angles)?;
        let mut acc = 0.0;
        for row in &self.slots {
            acc += row
                .iter()
                .zip(angles)
                .map(|(v, &t)| pair_expectation(v, t))
                .product::<f64>();
        }
        Ok(acc / (self.slots.len() as f64 * normalization(angles.len())))
    }

    pub fn e_trace(&self, angles: &[f64]) -> Result<f64> {
        self.check(angles)?;
        let op = CorrelationOperator::new(angles)?;
        Ok(self.rho.trace_with(&op)?.re / normalization(angles.len()))
    }

    pub fn evaluate(&self, angles: &[f64]) -> Result<CorrelationResult> {
        let e_formula = if self.set.params().p() >= 3 {
            self.formula.map(|f| f.evaluate(angles))
        } else {
            None
        };
        Ok(CorrelationResult {
            angles: angles.to_vec(),
            e_time: self.e_time(angles)?,
            e_trace: self.e_trace(angles)?,
            e_formula,
            normalization: normalization(angles.len()),
        })
    }
}

/// Correlation of exchanged fields by slot time-average, with the trace route
/// and (for `p >= 3`) `cos(sum theta)` attached.
pub fn correlation_time_average(
    fields: &[FieldState],
    angles: &[f64],
) -> Result<CorrelationResult> {
    if angles.len() != fields.len() {
        return Err(Error::AngleCount {
            expected: fields.len(),
            got: angles.len(),
        });
    }
    CorrelationSession::new(fields, Some(ClosedForm::CosSum))?.evaluate(angles)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshResult {
    pub e_ab: f64,
    pub e_ab_prime: f64,
    pub e_a_prime_b_prime: f64,
    pub e_a_prime_b: f64,
    pub b: f64,
    pub abs_b: f64,
    /// Largest `|E_time - E_trace|` over the four settings.
    pub max_path_deviation: f64,
}

/// `B = E(a,b) - E(a,b') + E(a',b') + E(a',b)` from the time-average route.
pub fn chsh(
    fields: &[FieldState],
    a: f64,
    a_prime: f64,
    b: f64,
    b_prime: f64,
) -> Result<ChshResult> {
    if fields.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: fields.len(),
        });
    }
    chsh_session(
        &CorrelationSession::new(fields, None)?,
        a,
        a_prime,
        b,
        b_prime,
    )
}

pub fn chsh_session(
    session: &CorrelationSession,
    a: f64,
    a_prime: f64,
    b: f64,
    b_prime: f64,
) -> Result<ChshResult> {
    let r = [
        session.evaluate(&[a, b])?,
        session.evaluate(&[a, b_prime])?,
        session.evaluate(&[a_prime, b_prime])?,
        session.evaluate(&[a_prime, b])?,
    ];
    let value = r[0].e_time - r[1].e_time + r[2].e_time + r[3].e_time;
    Ok(ChshResult {
        e_ab: r[0].e_time,
        e_ab_prime: r[1].e_time,
        e_a_prime_b_prime: r[2].e_time,
        e_a_prime_b: r[3].e_time,
        b: value,
        abs_b: value.abs(),
        max_path_deviation: r.iter().map(|x| x.path_deviation()).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(x: f64, tol: f64) -> Self {
        if x > tol {
            Sign::Positive
        } else if x < -tol {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhzSignReport {
    pub e: f64,
    pub sign: Sign,
    pub predicted: f64,
    pub predicted_sign: Sign,
    pub nonlocal_consistent: bool,
}

/// Sign of the multi-party correlation against the `cos(sum theta)` prediction.
pub fn ghz_sign_criterion(fields: &[FieldState], angles: &[f64]) -> Result<GhzSignReport> {
    if fields.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "GHZ sign criterion needs at least 3 fields, got {}",
            fields.len()
        )));
    }
    let r = correlation_time_average(fields, angles)?;
    let predicted = ClosedForm::CosSum.evaluate(angles);
    let sign = Sign::of(r.e_time, DEFAULT_TOLERANCE);
    let predicted_sign = Sign::of(predicted, DEFAULT_TOLERANCE);
    Ok(GhzSignReport {
        e: r.e_time,
        sign,
        predicted,
        predicted_sign,
        nonlocal_consistent: sign == predicted_sign,
    })
}
