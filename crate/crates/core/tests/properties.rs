use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use ppsim::state::apply_gate_dense;
use ppsim::{
    build_pps_set, correlation_trace, inner_product, inner_product_analytic, make_field_state,
    mean_reduced_density, mode_exchange, prepare_bell_default, prepare_ghz, rps_labels,
    slot_trace_average, tensor_product, BellKind, CorrelationSession, Ensemble, FieldState,
    PpsParams, PpsSet, UnitaryGate,
};

fn set(p: u32, s: u32) -> Arc<PpsSet> {
    Arc::new(build_pps_set(PpsParams::from_table(p, s).unwrap()).unwrap())
}

/// Normalized amplitude pair from two magnitudes and two phases.
fn amps(x: f64, y: f64, px: f64, py: f64) -> (Complex64, Complex64) {
    let n = (x * x + y * y).sqrt();
    (
        Complex64::from_polar(x / n, px),
        Complex64::from_polar(y / n, py),
    )
}

fn field(set: &Arc<PpsSet>, raw: (f64, f64, f64, f64, usize)) -> FieldState {
    let (a, b) = amps(raw.0, raw.1, raw.2, raw.3);
    let label = set.field().from_index(raw.4 % set.len());
    make_field_state(set.clone(), a, b, label).unwrap()
}

fn raw_field() -> impl Strategy<Value = (f64, f64, f64, f64, usize)> {
    (
        0.05f64..1.0,
        0.05f64..1.0,
        0.0..2.0 * PI,
        0.0..2.0 * PI,
        0usize..1000,
    )
}

/// `<psi| P(theta_1..F) |psi>` straight from the amplitude vector.
fn expectation_direct(psi: &[Complex64], angles: &[f64]) -> f64 {
    let f = angles.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, a) in psi.iter().enumerate() {
        // P maps |b> to prod_j e^{-+i theta_j} |b xor 1..1>.
        let j = i ^ ((1 << f) - 1);
        let mut phase = Complex64::new(1.0, 0.0);
        for (q, t) in angles.iter().enumerate() {
            let bit = (i >> (f - 1 - q)) & 1;
            let sign = if bit == 0 { -1.0 } else { 1.0 };
            phase *= Complex64::from_polar(1.0, sign * t);
        }
        acc += psi[j].conj() * phase * a;
    }
    acc.re
}

#[test]
fn gram_matrix_is_identity() {
    for (p, s) in [(2, 3), (3, 2), (5, 1)] {
        let set = set(p, s);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let basis: Vec<FieldState> = set
            .field()
            .elements()
            .into_iter()
            .map(|l| make_field_state(set.clone(), one, zero, l).unwrap())
            .collect();
        for (i, x) in basis.iter().enumerate() {
            for (j, y) in basis.iter().enumerate() {
                let g = inner_product(x, y).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).norm() <= 1e-9, "({p},{s}) [{i},{j}] = {g}");
            }
        }
    }
}

#[test]
fn bell_variants_on_grid() {
    let set = set(3, 3);
    for kind in BellKind::ALL {
        let fields = prepare_bell_default(kind, &set).unwrap();
        let session = CorrelationSession::new(&fields, Some(kind.closed_form())).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let angles = [2.0 * PI * i as f64 / 16.0, 2.0 * PI * j as f64 / 16.0];
                let r = session.evaluate(&angles).unwrap();
                assert!(r.path_deviation() <= 1e-9, "{kind} {angles:?}");
                assert!(r.formula_deviation().unwrap() <= 1e-9, "{kind} {angles:?}");
            }
        }
    }
}

#[test]
fn ghz_up_to_eight_parties_where_field_allows() {
    let set = set(5, 2);
    for parties in 3..=8 {
        let fields = prepare_ghz(parties, &set, None).unwrap();
        let session = CorrelationSession::new(&fields, None).unwrap();
        for t in 0..10 {
            let angles: Vec<f64> = (0..parties)
                .map(|j| 0.37 * (t * parties + j) as f64 + 0.1)
                .collect();
            let e = session.e_time(&angles).unwrap();
            let want = angles.iter().sum::<f64>().cos();
            assert!((e - want).abs() <= 1e-9, "F={parties}: {e} vs {want}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn analytic_inner_product_matches_slots(x in raw_field(), y in raw_field(), p in prop::sample::select(vec![2u32, 3])) {
        let set = set(p, 2);
        let (a, b) = (field(&set, x), field(&set, y));
        let slot = inner_product(&a, &b).unwrap();
        let closed = inner_product_analytic(&a, &b).unwrap();
        prop_assert!((slot - closed).norm() <= 1e-9);
    }

    #[test]
    fn gate_commutes_with_slot_instantiation(x in raw_field(), phi in 0.0..2.0 * PI, k in 0usize..9) {
        let set = set(3, 2);
        let a = field(&set, x);
        let gate = UnitaryGate::hadamard().compose(&UnitaryGate::phase(phi));
        let law = a.apply_gate(&gate).unwrap().instantiate_slot(k).unwrap();
        let direct = apply_gate_dense(&a.instantiate_slot(k).unwrap().amplitudes, 1, 0, &gate);
        for (x, y) in law.amplitudes.iter().zip(&direct) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn exchange_twice_is_identity(x in raw_field(), y in raw_field()) {
        // Equal mode magnitudes keep the exchanged fields normalized.
        let set = set(3, 2);
        let fields = vec![field(&set, x), field(&set, (x.0, x.1, y.2, y.3, y.4))];
        let back = mode_exchange(&mode_exchange(&fields, &[1, 0]).unwrap(), &[1, 0]).unwrap();
        prop_assert_eq!(back, fields);
    }

    #[test]
    fn tensor_labels_stay_in_set(raws in prop::collection::vec(raw_field(), 1..4)) {
        let set = set(3, 2);
        let fields: Vec<FieldState> = raws.into_iter().map(|r| field(&set, r)).collect();
        let g = tensor_product(&fields).unwrap();
        for l in g.absolute_labels() {
            prop_assert!(set.field().contains(&l));
        }
        prop_assert!((g.ensemble_norm().unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn relative_phases_sum_to_zero(parties in 3usize..6) {
        let set = set(5, 2);
        let fields = prepare_ghz(parties, &set, None).unwrap();
        let gammas = rps_labels(&fields).unwrap();
        let f = set.field();
        let total = gammas.iter().fold(f.zero(), |acc, g| f.add(&acc, g));
        prop_assert!(total.is_zero());
    }

    #[test]
    fn mean_density_is_a_state(raws in prop::collection::vec(raw_field(), 1..4), p in prop::sample::select(vec![2u32, 3])) {
        let set = set(p, 2);
        let fields: Vec<FieldState> = raws.into_iter().map(|r| field(&set, r)).collect();
        let rho = mean_reduced_density(&tensor_product(&fields).unwrap()).unwrap();
        prop_assert!(rho.check(1e-9).is_none());
    }

    #[test]
    fn slot_traces_match_mean_trace(raws in prop::collection::vec(raw_field(), 1..4), seed in 0.0..2.0 * PI) {
        let set = set(3, 2);
        let fields: Vec<FieldState> = raws.into_iter().map(|r| field(&set, r)).collect();
        let angles: Vec<f64> = (0..fields.len()).map(|j| seed * (j + 1) as f64).collect();
        let g = tensor_product(&fields).unwrap();
        let slotwise = slot_trace_average(&g, &angles).unwrap();
        let c = ppsim::normalization(angles.len());
        let mean = correlation_trace(&g, &angles).unwrap() * c;
        prop_assert!((slotwise - mean).abs() <= 1e-12);

        let direct: f64 = (0..set.len())
            .map(|k| expectation_direct(&g.instantiate_slot(k).unwrap().amplitudes, &angles))
            .sum::<f64>() / set.len() as f64;
        prop_assert!((direct - slotwise).abs() <= 1e-12);
    }
}

fn distinct_labels(set: &PpsSet, picks: &[usize], count: usize) -> Vec<ppsim::FieldElement> {
    let mut pool: Vec<usize> = (0..set.len() - 1).collect();
    (0..count)
        .map(|i| set.field().alpha_pow(pool.remove(picks[i] % pool.len())))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bell_correlation_is_label_independent(
        picks in prop::collection::vec(0usize..1000, 2),
        a in 0.0..2.0 * PI,
        b in 0.0..2.0 * PI,
    ) {
        let set = set(3, 3);
        let labels = distinct_labels(&set, &picks, 2);
        for kind in BellKind::ALL {
            let fields = ppsim::prepare_bell(kind, &set, &labels[0], &labels[1]).unwrap();
            let r = CorrelationSession::new(&fields, Some(kind.closed_form()))
                .unwrap()
                .evaluate(&[a, b])
                .unwrap();
            prop_assert!(r.formula_deviation().unwrap() <= 1e-9);
        }
    }

    #[test]
    fn three_party_ghz_is_label_independent(
        picks in prop::collection::vec(0usize..1000, 3),
        angles in prop::collection::vec(0.0..2.0 * PI, 3),
    ) {
        let set = set(3, 2);
        let labels = distinct_labels(&set, &picks, 3);
        let fields = prepare_ghz(3, &set, Some(&labels)).unwrap();
        let e = CorrelationSession::new(&fields, None).unwrap().e_time(&angles).unwrap();
        prop_assert!((e - angles.iter().sum::<f64>().cos()).abs() <= 1e-9);
    }
}
