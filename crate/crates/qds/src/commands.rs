//! The six report-producing commands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qds_core::classical;
use qds_core::ergodicity::{self, DensityMatrix};
use qds_core::linalg;
use qds_core::model;
use qds_core::picard;
use qds_core::projection;
use qds_core::resolution::{self, Certificate, Classification, ComplementStatus};
use qds_core::spectral::{self, Time};
use qds_core::{CMat, ModelKind, Picture, Projection, QuantumModel, Tolerances};
use serde_json::{json, Value};

use crate::format::{self, matrix_value, FormatError};
use crate::report::{finite, hash_bytes, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qds_core::Error),
}

pub type CliResult<T> = Result<T, CliError>;

/// Settings shared by every command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flags {
    pub tol: Tolerances,
    pub seed: u64,
}

/// A report and the verdict gated on by `--strict`.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub verdict: bool,
}

struct Loaded {
    model: QuantumModel,
    hash: String,
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn text(path: &Path, bytes: Vec<u8>) -> CliResult<String> {
    String::from_utf8(bytes).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        source: FormatError {
            path: "$".into(),
            message: e.to_string(),
        },
    })
}

fn load_model(path: &Path) -> CliResult<Loaded> {
    let bytes = read(path)?;
    let hash = hash_bytes(&bytes);
    let model = format::parse_model(&text(path, bytes)?).map_err(|source| CliError::Format {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Loaded { model, hash })
}

fn load_operator(path: &Path, dim: usize) -> CliResult<CMat> {
    let body = text(path, read(path)?)?;
    format::parse_operator(&body, dim).map_err(|source| CliError::Format {
        path: path.to_path_buf(),
        source,
    })
}

fn load_projection(path: &Path, dim: usize) -> CliResult<Projection> {
    let body = text(path, read(path)?)?;
    format::parse_projection(&body, dim).map_err(|source| CliError::Format {
        path: path.to_path_buf(),
        source,
    })
}

type Residuals = BTreeMap<String, Option<f64>>;

fn finish(
    command: &str,
    loaded: &Loaded,
    flags: &Flags,
    started: Instant,
    verdict: bool,
    mut payload: Value,
    residuals: Residuals,
) -> Outcome {
    payload["verdict"] = json!(verdict);
    Outcome {
        report: Report {
            model_hash: loaded.hash.clone(),
            command: command.into(),
            seed: flags.seed,
            tolerances: flags.tol.into(),
            verdict,
            payload,
            residuals,
            timing_ms: started.elapsed().as_secs_f64() * 1e3,
        },
        verdict,
    }
}

fn start(flags: &Flags) -> CliResult<Instant> {
    flags.tol.validate()?;
    Ok(Instant::now())
}

fn model_summary(model: &QuantumModel) -> Value {
    json!({ "kind": model.kind().name(), "dim": model.dim() })
}

fn opt_matrix(m: Option<&CMat>) -> Value {
    m.map(matrix_value).unwrap_or(Value::Null)
}

fn complement_value(c: &ComplementStatus) -> Value {
    json!({
        "transient": c.transient,
        "metastable": c.metastable,
        "min_eig_y": c.min_eig_y,
        "closure_dim": c.closure_dim,
        "distance_to_one": c.distance_to_one,
    })
}

fn certificate_value(c: &Certificate) -> Value {
    json!({
        "subharmonic_residual": c.subharmonic_residual,
        "minimality": c.minimality.as_ref().map(|m| json!({
            "dim": m.dim,
            "algebra_dimension": m.algebra_dimension,
            "random_closures": m.random_closures,
            "retries": m.retries,
        })),
        "invariant_state": opt_matrix(c.invariant_state.as_ref()),
        "complement": c.complement.as_ref().map(complement_value),
    })
}

fn classification_value(c: &Classification) -> Value {
    json!({ "label": c.label.name(), "certificate": certificate_value(&c.certificate) })
}

fn time_value(t: Time) -> Value {
    match t {
        Time::Continuous(t) => json!({ "t": finite(t) }),
        Time::Discrete(n) => json!({ "n": n }),
    }
}

/// Model validation: every defining identity with its residual.
pub fn cmd_check(model_path: &Path, flags: &Flags) -> CliResult<Outcome> {
    let started = start(flags)?;
    let loaded = load_model(model_path)?;
    let report = model::validate_model(&loaded.model, &flags.tol);
    let residuals = report
        .residuals
        .iter()
        .map(|r| (r.name.clone(), finite(r.value)))
        .collect();
    let payload = json!({ "model": model_summary(&loaded.model), "ok": report.ok });
    Ok(finish("check", &loaded, flags, started, report.ok, payload, residuals))
}

/// Sub-harmonicity, harmonicity, recurrence label and complement status of
/// a projection. The verdict is whether the projection is positive
/// recurrent.
pub fn cmd_classify(model_path: &Path, projection_path: &Path, flags: &Flags) -> CliResult<Outcome> {
    let started = start(flags)?;
    let loaded = load_model(model_path)?;
    let model = &loaded.model;
    let p = load_projection(projection_path, model.dim())?;
    let tol = &flags.tol;

    let sub = projection::is_subharmonic(model, &p, tol)?;
    let harmonic = projection::is_harmonic(model, &p, tol)?;
    let classification = resolution::classify_projection(model, &p, tol)?;
    let complement = if sub.verdict && !p.is_zero() {
        Some(resolution::is_transient_complement(model, &p, tol)?)
    } else {
        None
    };
    let verdict = classification.label == resolution::RecurrenceLabel::PositiveRecurrent;

    let mut residuals = Residuals::new();
    residuals.insert("subharmonic".into(), finite(sub.residual));
    residuals.insert("order_min_eig".into(), finite(sub.order_min_eig));
    if let Some(c) = &complement {
        residuals.insert("y_distance_to_one".into(), finite(c.distance_to_one));
    }
    let payload = json!({
        "model": model_summary(model),
        "projection": matrix_value(p.matrix()),
        "rank": p.rank(),
        "subharmonic": {
            "verdict": sub.verdict,
            "residual": sub.residual,
            "witness": sub.witness.as_ref().map(|(i, label)| json!({ "index": i, "generator": label })),
            "order_min_eig": sub.order_min_eig,
            "order_verdict": sub.order_verdict,
        },
        "harmonic": harmonic,
        "classification": classification_value(&classification),
        "complement": complement.as_ref().map(complement_value),
    });
    Ok(finish("classify", &loaded, flags, started, verdict, payload, residuals))
}

/// Decomposition of the identity into recurrent projections and a
/// metastable remainder; stochastic models are also compared with the
/// graph classification of the chain.
pub fn cmd_resolve(model_path: &Path, flags: &Flags) -> CliResult<Outcome> {
    let started = start(flags)?;
    let loaded = load_model(model_path)?;
    let model = &loaded.model;
    let tol = &flags.tol;

    let result = resolution::resolve(model, flags.seed, tol)?;
    let comparison = match model.stochastic_matrix() {
        Some(p) => Some(classical::compare_resolutions(p, flags.seed, tol)?),
        None => None,
    };
    let verdict = comparison.as_ref().is_none_or(|c| c.agree);

    let projections: Vec<Value> = result
        .recurrent_projections
        .iter()
        .zip(&result.certificates)
        .map(|(p, c)| {
            json!({
                "matrix": matrix_value(p.matrix()),
                "rank": p.rank(),
                "classification": classification_value(c),
            })
        })
        .collect();
    let mut residuals = Residuals::new();
    residuals.insert("orthogonality".into(), finite(result.orthogonality_residual()));
    residuals.insert("completeness".into(), finite(result.completeness_residual()));
    residuals.insert(
        "y_total_min_eig".into(),
        finite(linalg::min_eigenvalue(&result.y_total)),
    );
    let payload = json!({
        "model": model_summary(model),
        "recurrent": projections,
        "remainder": {
            "matrix": matrix_value(result.metastable_remainder.matrix()),
            "rank": result.metastable_remainder.rank(),
            "classification": result.remainder.as_ref().map(classification_value),
        },
        "y_total": matrix_value(&result.y_total),
        "summary": resolution::describe(&result),
        "classical": comparison.as_ref().map(|c| json!({
            "agree": c.agree,
            "closed_classes": c.classical.closed_classes,
            "transient_states": c.classical.transient_states,
            "recurrent_supports": c.recurrent_supports,
            "remainder_support": c.remainder_support,
            "detail": c.detail,
        })),
    });
    Ok(finish("resolve", &loaded, flags, started, verdict, payload, residuals))
}

/// Time argument of `evolve`: a duration for generators or a number of
/// steps for maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeArg {
    Duration(f64),
    Steps(u64),
}

fn resolve_time(model: &QuantumModel, time: TimeArg) -> CliResult<Time> {
    let continuous = model.kind() == ModelKind::Lindblad;
    match (time, continuous) {
        (TimeArg::Duration(t), _) if t < 0.0 || t.is_nan() => Err(qds_core::Error::NegativeTime.into()),
        (TimeArg::Duration(t), true) => Ok(Time::Continuous(t)),
        (TimeArg::Steps(n), false) => Ok(Time::Discrete(n)),
        (TimeArg::Duration(_), false) => Err(CliError::Usage(format!(
            "{} models evolve in steps; use --n",
            model.kind().name()
        ))),
        (TimeArg::Steps(_), true) => Err(CliError::Usage("lindblad models evolve in continuous time; use --t".into())),
    }
}

/// `τ_t(x)` in the Heisenberg picture or `τ_{*t}(ρ)` in the Schrödinger
/// picture.
pub fn cmd_evolve(
    model_path: &Path,
    operator_path: &Path,
    time: TimeArg,
    picture: Picture,
    flags: &Flags,
) -> CliResult<Outcome> {
    let started = start(flags)?;
    let loaded = load_model(model_path)?;
    let model = &loaded.model;
    let x = load_operator(operator_path, model.dim())?;
    let time = resolve_time(model, time)?;
    let tol = &flags.tol;
    let (output, picture_name) = match picture {
        Picture::Heisenberg => (spectral::evolve_heisenberg(model, &x, time, tol)?, "heisenberg"),
        Picture::Schrodinger => (spectral::evolve_predual(model, &x, time, tol)?, "schrodinger"),
    };
    let mut residuals = Residuals::new();
    match picture {
        Picture::Heisenberg => {
            residuals.insert("operator_norm_growth".into(), finite(linalg::op_norm(&output) - linalg::op_norm(&x)));
        }
        Picture::Schrodinger => {
            let drift = (linalg::trace(&output) - linalg::trace(&x)).norm();
            residuals.insert("trace_drift".into(), finite(drift));
        }
    }
    let payload = json!({
        "model": model_summary(model),
        "picture": picture_name,
        "time": time_value(time),
        "input": matrix_value(&x),
        "output": matrix_value(&output),
        "output_norm": linalg::op_norm(&output),
    });
    Ok(finish("evolve", &loaded, flags, started, true, payload, residuals))
}

/// Parameters of the `picard` command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardArgs {
    pub t: f64,
    pub max_n: usize,
    pub steps: usize,
}

/// Monotone iteration of the integral equation, with every iterate.
pub fn cmd_picard(model_path: &Path, operator_path: &Path, args: PicardArgs, flags: &Flags) -> CliResult<Outcome> {
    let started = start(flags)?;
    let loaded = load_model(model_path)?;
    let model = &loaded.model;
    let x = load_operator(operator_path, model.dim())?;
    let limit = picard::picard_limit(model, &x, args.t, flags.tol.conv_tol, args.max_n, args.steps)?;
    let verdict = limit.exponential_gap <= flags.tol.alg_tol.max(limit.quadrature_estimate.unwrap_or(0.0));

    let mut residuals = Residuals::new();
    residuals.insert("last_gap".into(), finite(limit.last_gap));
    residuals.insert("integral".into(), finite(limit.integral_residual));
    residuals.insert("exponential_gap".into(), finite(limit.exponential_gap));
    if let Some(q) = limit.quadrature_estimate {
        residuals.insert("quadrature_estimate".into(), finite(q));
    }
    let iterates: Vec<Value> = limit.trace.iterates.iter().map(matrix_value).collect();
    let payload = json!({
        "model": model_summary(model),
        "t": args.t,
        "steps": args.steps,
        "input": matrix_value(&x),
        "value": matrix_value(&limit.value),
        "iterations": limit.iterations,
        "gaps": limit.trace.gaps(),
        "iterates": iterates,
    });
    Ok(finish("picard", &loaded, flags, started, verdict, payload, residuals))
}

/// Invariant states, strong ergodicity, the support equivalence for each
/// extremal state and irreducibility.
pub fn cmd_ergodic(model_path: &Path, flags: &Flags) -> CliResult<Outcome> {
    let started = start(flags)?;
    let loaded = load_model(model_path)?;
    let model = &loaded.model;
    let tol = &flags.tol;

    let states = ergodicity::invariant_states_seeded(model, flags.seed, tol)?;
    let strong = ergodicity::strong_ergodicity_check(model, tol)?;
    let mut supports = Vec::with_capacity(states.states.len());
    for rho in &states.states {
        let p = ergodicity::support_projection(rho, tol)?;
        let eq = ergodicity::theorem31_equivalence(model, &p, tol)?;
        supports.push(json!({
            "support": matrix_value(p.matrix()),
            "rank": p.rank(),
            "full": eq.full,
            "reduced": eq.reduced,
            "y_is_one": eq.y_is_one,
            "consistent": eq.consistent,
        }));
    }
    let irreducible = resolution::irreducibility(model, tol)?;
    // The chain notion differs: ABS3 has no harmonic projection but two classes.
    let chain = model.stochastic_matrix().map(|p| {
        let c = classical::classical_classify(p);
        json!({
            "irreducible": c.closed_classes.len() == 1 && c.transient_states.is_empty(),
            "closed_classes": c.closed_classes,
            "transient_states": c.transient_states,
        })
    });

    let mut residuals = Residuals::new();
    residuals.insert("invariance".into(), finite(states.residual));
    residuals.insert("dynamic_distance".into(), finite(strong.dynamic_distance));
    let state_values: Vec<Value> = states.states.iter().map(|s| matrix_value(s.matrix())).collect();
    let payload = json!({
        "model": model_summary(model),
        "invariant_space_dim": states.basis.len(),
        "extremal_states": state_values,
        "strong_ergodicity": {
            "holds": strong.holds,
            "gap": finite(strong.gap),
            "decay_rate": finite(strong.decay_rate),
            "phi0": opt_matrix(strong.phi0.as_ref().map(DensityMatrix::matrix)),
            "horizon": time_value(strong.horizon),
            "ergodic_multiplicity": strong.ergodic_multiplicity,
            "peripheral_count": strong.peripheral_count,
        },
        "supports": supports,
        "irreducibility": {
            "irreducible": irreducible.irreducible,
            "commutant_dimension": irreducible.commutant_dimension,
            "harmonic_projection": matrix_value(irreducible.harmonic_projection.matrix()),
            "chain": chain,
        },
    });
    Ok(finish("ergodic", &loaded, flags, started, strong.holds, payload, residuals))
}
