//! Shared workloads for the criterion benches.

use std::sync::Arc;

use ppsim::{build_pps_set, prepare_ghz, FieldState, PpsParams, PpsSet};

pub fn set(p: u32, s: u32) -> Arc<PpsSet> {
    Arc::new(build_pps_set(PpsParams::from_table(p, s).expect("table entry")).expect("primitive"))
}

pub fn ghz_fields(set: &Arc<PpsSet>, parties: usize) -> Vec<FieldState> {
    prepare_ghz(parties, set, None).expect("capacity")
}
