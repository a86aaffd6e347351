//! Runner behind the `ppsim` binary: turns a [`RunConfig`] into one output
//! document (CSV or JSON) plus the name of the first failed check, if any.

pub mod angles;
pub mod config;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use ppsim::export::{correlation_csv, round_sig, DensityJson, PpsSetJson};
use ppsim::{
    build_pps_set, chsh_session, inner_product, make_field_state, mean_reduced_density,
    not_gate_demo, prepare_bell, prepare_ghz, resource_report, tensor_product, verify_properties,
    ClosedForm, Complex64, CorrelationResult, CorrelationSession, FieldElement, FieldState, PpsSet,
};

pub use config::{AngleSpec, Format, Protocol, RunConfig, MAX_GRID_ROWS, OUTPUT_DIR_ENV};

/// Per-slot tolerance for the gate decomposition checks.
pub const GATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Core(#[from] ppsim::Error),
    #[error("check failed: {check}: {detail}")]
    Check { check: String, detail: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for anything wrong with the request, 1 for failed checks and I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(_) => 2,
            CliError::Check { .. } | CliError::Io { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub check: String,
    pub detail: String,
}

impl Failure {
    fn new(check: &str, detail: String) -> Self {
        Self {
            check: check.to_string(),
            detail,
        }
    }
}

impl From<Failure> for CliError {
    fn from(f: Failure) -> Self {
        CliError::Check {
            check: f.check,
            detail: f.detail,
        }
    }
}

/// Result of one run. The document is complete even when a check failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub content: String,
    pub format: Format,
    pub failure: Option<Failure>,
}

/// Serialize with sorted keys and every float rounded to 12 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = round_floats(serde_json::to_value(value).expect("serializable"));
    let mut text = serde_json::to_string_pretty(&v).expect("serializable");
    text.push('\n');
    text
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

/// Where the document goes: `--out`, else `<dir>/<protocol>.<ext>`, else stdout (`None`).
pub fn output_path(cfg: &RunConfig, out_dir: Option<&Path>) -> Option<PathBuf> {
    cfg.output.clone().or_else(|| {
        out_dir.map(|d| {
            d.join(format!(
                "{}.{}",
                cfg.protocol.name(),
                cfg.format().extension()
            ))
        })
    })
}

/// Write through a temporary sibling so a failed write leaves no partial file.
pub fn write_output(path: &Path, content: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, content).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let set = Arc::new(build_pps_set(cfg.params()?)?);
    let (content, failure) = match cfg.protocol {
        Protocol::Gen => run_gen(&set, cfg)?,
        Protocol::Verify => run_verify(&set, cfg)?,
        Protocol::Bell => run_bell(&set, cfg)?,
        Protocol::Ghz => run_ghz(&set, cfg)?,
        Protocol::Chsh => run_chsh(&set, cfg)?,
        Protocol::Density => run_density(&set, cfg)?,
        Protocol::NotDemo => run_not_demo(&set, cfg)?,
        Protocol::Resources => run_resources(&set, cfg)?,
    };
    Ok(Outcome {
        content,
        format: cfg.format(),
        failure,
    })
}

type Emitted = (String, Option<Failure>);

fn labels(set: &PpsSet, cfg: &RunConfig) -> Option<Vec<FieldElement>> {
    cfg.labels
        .as_ref()
        .map(|ls| ls.iter().map(|&j| set.field().alpha_pow(j)).collect())
}

fn verification(set: &PpsSet, cfg: &RunConfig) -> (ppsim::VerificationReport, Option<Failure>) {
    let report = verify_properties(set);
    let failure = report.first_failure(cfg.tolerance, set.len()).map(|name| {
        Failure::new(
            name,
            format!(
                "balance_max_dev={:e} orthogonality_max_dev={:e}",
                report.balance_max_dev, report.orthogonality_max_dev
            ),
        )
    });
    (report, failure)
}

fn run_gen(set: &Arc<PpsSet>, cfg: &RunConfig) -> Result<Emitted, CliError> {
    let (report, failure) = verification(set, cfg);
    let doc = json!({ "set": PpsSetJson::from_set(set), "report": report });
    Ok((to_json(&doc), failure))
}

/// Largest `|<e_i|e_j> - delta_ij|` over the single-field basis states.
fn gram_max_dev(set: &Arc<PpsSet>) -> Result<f64, CliError> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let basis = set
        .field()
        .elements()
        .into_iter()
        .map(|l| make_field_state(set.clone(), one, zero, l))
        .collect::<ppsim::Result<Vec<_>>>()?;
    let mut dev: f64 = 0.0;
    for (i, x) in basis.iter().enumerate() {
        for (j, y) in basis.iter().enumerate() {
            let want = if i == j { one } else { zero };
            dev = dev.max((inner_product(x, y)? - want).norm());
        }
    }
    Ok(dev)
}

fn run_verify(set: &Arc<PpsSet>, cfg: &RunConfig) -> Result<Emitted, CliError> {
    let (report, mut failure) = verification(set, cfg);
    let gram = gram_max_dev(set)?;
    if failure.is_none() && gram > cfg.tolerance {
        failure = Some(Failure::new("gram", format!("gram_max_dev={gram:e}")));
    }
    let params = set.params();
    let doc = json!({
        "p": params.p(),
        "s": params.s(),
        "poly": params.poly(),
        "length": set.len(),
        "tolerance": cfg.tolerance,
        "closure_ok": report.closure_ok,
        "primitive_ok": report.primitive_ok,
        "census_ok": report.census_ok,
        "set_size_ok": report.set_size_ok,
        "balance_max_dev": report.balance_max_dev,
        "orthogonality_max_dev": report.orthogonality_max_dev,
        "gram_max_dev": gram,
        "first_failure": failure.as_ref().map(|f| f.check.clone()),
        "passes": failure.is_none(),
    });
    Ok((to_json(&doc), failure))
}

/// All grid points `2 pi i / grid` in row-major order, or the single given tuple.
fn angle_rows(cfg: &RunConfig, field_count: usize) -> Result<Vec<Vec<f64>>, CliError> {
    if let Some(a) = cfg.angles()? {
        return Ok(vec![a]);
    }
    let g = cfg.grid;
    let step = 2.0 * PI / g as f64;
    let total = g.pow(field_count as u32);
    Ok((0..total)
        .map(|mut n| {
            let mut row = vec![0.0; field_count];
            for slot in row.iter_mut().rev() {
                *slot = (n % g) as f64 * step;
                n /= g;
            }
            row
        })
        .collect())
}

fn correlation_failure(rows: &[CorrelationResult], tol: f64) -> Option<Failure> {
    if let Some(r) = rows.iter().find(|r| r.path_deviation() > tol) {
        return Some(Failure::new(
            "path-agreement",
            format!(
                "|E_time - E_trace| = {:e} at angles {:?}",
                r.path_deviation(),
                r.angles
            ),
        ));
    }
    rows.iter()
        .find(|r| r.formula_deviation().is_some_and(|d| d > tol))
        .map(|r| {
            Failure::new(
                "closed-form",
                format!(
                    "|E_time - E_formula| = {:e} at angles {:?}",
                    r.formula_deviation().unwrap_or(f64::NAN),
                    r.angles
                ),
            )
        })
}

fn emit_correlations(
    cfg: &RunConfig,
    fields: &[FieldState],
    formula: ClosedForm,
) -> Result<Emitted, CliError> {
    let session = CorrelationSession::new(fields, Some(formula))?;
    let rows = angle_rows(cfg, fields.len())?
        .iter()
        .map(|a| session.evaluate(a))
        .collect::<ppsim::Result<Vec<_>>>()?;
    let failure = correlation_failure(&rows, cfg.tolerance);
    let content = match cfg.format() {
        Format::Csv => correlation_csv(fields.len(), &rows),
        Format::Json => to_json(&rows),
    };
    Ok((content, failure))
}

fn bell_fields(set: &Arc<PpsSet>, cfg: &RunConfig) -> Result<Vec<FieldState>, CliError> {
    let ls = match labels(set, cfg) {
        Some(ls) => ls,
        None => ppsim::default_labels(set, 2)?,
    };
    Ok(prepare_bell(cfg.variant(), set, &ls[0], &ls[1])?)
}

fn ghz_fields(
    set: &Arc<PpsSet>,
    cfg: &RunConfig,
    parties: usize,
) -> Result<Vec<FieldState>, CliError> {
    let ls = labels(set, cfg);
    Ok(prepare_ghz(parties, set, ls.as_deref())?)
}

fn run_bell(set: &Arc<PpsSet>, cfg: &RunConfig) -> Result<Emitted, CliError> {
    let fields = bell_fields(set, cfg)?;
    emit_correlations(cfg, &fields, cfg.variant().closed_form())
}

fn run_ghz(set: &Arc<PpsSet>, cfg: &RunConfig) -> Result<Emitted, CliError> {
    let fields = ghz_fields(set, cfg, cfg.parties.unwrap_or(3))?;
    emit_correlations(cfg, &fields, ClosedForm::CosSum)
}

fn label_exponents(set: &PpsSet, fields: &[FieldState]) -> Vec<Option<usize>> {
    fields
        .iter()
        .map(|f| set.field().log(&f.mode(0)[0].label))
        .collect()
}

fn run_chsh(set: &Arc<PpsSet>, cfg: &RunConfig) -> Result<Emitted, CliError> {
    let fields = bell_fields(set, cfg)?;
    let a = cfg
        .angles()?
        .unwrap_or_else(|| vec![FRAC_PI_4, -FRAC_PI_4, 0.0, FRAC_PI_2]);
    let session = CorrelationSession::new(&fields, None)?;
    let r = chsh_session(&session, a[0], a[1], a[2], a[3])?;
    let failure = (r.max_path_deviation > cfg.tolerance).then(|| {
        Failure::new(
            "path-agreement",
            format!("max |E_time - E_trace| = {:e}", r.max_path_deviation),
        )
    });
    let doc = json!({
        "p": set.params().p(),
        "s": set.params().s(),
        "variant": cfg.variant(),
        "labels": label_exponents(set, &fields),
        "a": a[0],
        "a_prime": a[1],
        "b": a[2],
        "b_prime": a[3],
        "E_ab": r.e_ab,
        "E_ab_prime": r.e_ab_prime,
        "E_a_prime_b_prime": r.e_a_prime_b_prime,
        "E_a_prime_b": r.e_a_prime_b,
        "B": r.b,
        "abs_B": r.abs_b,
        "max_path_deviation": r.max_path_deviation,
    });
    Ok((to_json(&doc), failure))
}

fn run_density(set: &Arc<PpsSet>, cfg: &RunConfig) -> Result<Emitted, CliError> {
    let (state, fields) = match cfg.parties {
        Some(n) => ("ghz".to_string(), ghz_fields(set, cfg, n)?),
        None => (cfg.variant().to_string(), bell_fields(set, cfg)?),
    };
    let rho = mean_reduced_density(&tensor_product(&fields)?)?;
    let failure = rho.check(cfg.tolerance).map(|name| {
        Failure::new(
            name,
            format!(
                "hermitian_deviation={:e} trace={} min_eigenvalue={:e}",
                rho.hermitian_deviation(),
                rho.trace(),
                rho.min_eigenvalue()
            ),
        )
    });
    let doc = json!({
        "p": set.params().p(),
        "s": set.params().s(),
        "state": state,
        "F": fields.len(),
        "labels": label_exponents(set, &fields),
        "density": DensityJson::from_density(&rho),
        "trace": [rho.trace().re, rho.trace().im],
        "hermitian_deviation": rho.hermitian_deviation(),
        "min_eigenvalue": rho.min_eigenvalue(),
        "rank": rho.rank(cfg.tolerance),
    });
    Ok((to_json(&doc), failure))
}

fn run_not_demo(set: &Arc<PpsSet>, cfg: &RunConfig) -> Result<Emitted, CliError> {
    let alpha = Complex64::new(cfg.alpha.unwrap_or(FRAC_1_SQRT_2), 0.0);
    let beta = Complex64::new(cfg.beta.unwrap_or(FRAC_1_SQRT_2), 0.0);
    let label = labels(set, cfg)
        .map(|mut l| l.remove(0))
        .unwrap_or_else(|| set.field().alpha_pow(0));
    let r = not_gate_demo(set, alpha, beta, &label)?;
    let failure = if r.max_path_deviation > GATE_TOLERANCE {
        Some(Failure::new(
            "slot-vs-coefficient",
            format!("max per-slot deviation {:e}", r.max_path_deviation),
        ))
    } else if r.max_expected_deviation > GATE_TOLERANCE {
        Some(Failure::new(
            "swap-amplitudes",
            format!("max per-slot deviation {:e}", r.max_expected_deviation),
        ))
    } else if !r.double_application_identity {
        Some(Failure::new(
            "involution",
            "NOT applied twice changed the state".into(),
        ))
    } else {
        None
    };
    Ok((to_json(&r), failure))
}

fn run_resources(set: &Arc<PpsSet>, cfg: &RunConfig) -> Result<Emitted, CliError> {
    let top = cfg.parties.unwrap_or(8.min(set.len() - 1));
    let reports = (2..=top)
        .map(|f| resource_report(f, set.params().clone()))
        .collect::<ppsim::Result<Vec<_>>>()?;
    let failure = reports.iter().find_map(|r| {
        if r.sequences_used != r.field_count {
            Some(Failure::new(
                "sequences-linear",
                format!("F={} uses {} sequences", r.field_count, r.sequences_used),
            ))
        } else if r.per_field_terms != 2 * r.field_count {
            Some(Failure::new(
                "per-field-terms",
                format!("F={} stores {} terms", r.field_count, r.per_field_terms),
            ))
        } else {
            None
        }
    });
    let doc = json!({
        "p": set.params().p(),
        "s": set.params().s(),
        "reports": reports,
    });
    Ok((to_json(&doc), failure))
}
