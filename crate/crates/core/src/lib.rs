//! Simulation of entangled states with classical fields whose modes are
//! modulated by pseudorandom phase sequences (PPS).
//!
//! The crate is organized bottom-up:
//!
//! * [`gf`]: GF(p^s) arithmetic and maximal-length LFSR sequences
//! * [`pps`]: PPS sets and their closure, balance and orthogonality checks
//! * [`state`]: labeled field states, tensor products, gates, mode exchange
//! * [`ensemble`]: slot and ensemble-averaged density matrices, correlations
//! * [`protocols`]: Bell and GHZ preparations, NOT-gate demo, resource counts
//! * [`export`]: JSON and CSV interchange formats
//!
//! ```
//! use std::sync::Arc;
//! use ppsim::{build_pps_set, prepare_bell, BellKind, PpsParams, chsh};
//!
//! let set = Arc::new(build_pps_set(PpsParams::from_table(3, 3)?)?);
//! let f = set.field();
//! let fields = prepare_bell(BellKind::PsiPlus, &set, &f.alpha_pow(0), &f.alpha_pow(1))?;
//! let q = std::f64::consts::FRAC_PI_4;
//! let r = chsh(&fields, q, -q, 0.0, 2.0 * q)?;
//! assert!((r.abs_b - 2.0 * 2f64.sqrt()).abs() < 1e-9);
//! # Ok::<(), ppsim::Error>(())
//! ```

pub mod ensemble;
pub mod error;
pub mod export;
pub mod gf;
pub mod pps;
pub mod protocols;
pub mod state;

pub use ensemble::{
    chsh, chsh_session, correlation_time_average, correlation_trace, ghz_sign_criterion,
    mean_reduced_density, normalization, slot_density, slot_expectation, slot_trace_average,
    ChshResult, ClosedForm, CorrelationOperator, CorrelationResult, CorrelationSession,
    DensityMatrix, GhzSignReport, Sign, SlotExpectation,
};
pub use error::{Error, Result};
pub use gf::{generate_m_sequence, verify_primitive, FieldElement, GaloisField, PpsParams};
pub use num_complex::Complex64;
pub use pps::{
    build_pps_set, normalized_correlation, verify_properties, PhaseSequence, PpsSet,
    VerificationReport, DEFAULT_TOLERANCE,
};
pub use protocols::{
    default_labels, ghz_labels, not_gate_demo, prepare_bell, prepare_bell_default, prepare_ghz,
    resource_report, rps_sum, rps_zero_sum_free, BellKind, NotGateReport, ResourceReport,
};
pub use state::{
    cyclic_permutation, inner_product, inner_product_analytic, make_field_state, mode_exchange,
    rps_labels, tensor_product, Ensemble, FieldState, GeneralState, SlotVector, Term, UnitaryGate,
};
