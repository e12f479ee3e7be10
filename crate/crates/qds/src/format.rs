//! JSON file formats: models, operators and projections.
//!
//! Complex entries are `[re, im]` pairs and matrices are lists of rows.
//! A model file looks like
//!
//! ```json
//! {"dim": 2, "kind": "kraus", "kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}
//! ```
//!
//! Lindblad models carry `hamiltonian`, `lindblad` and optionally `drift`;
//! chains carry a real `stochastic` matrix.

use nalgebra::DMatrix;
use qds_core::{CMat, Dynamics, ModelKind, Projection, QuantumModel, C64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A complex matrix as rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

/// Parse failure naming the offending location in the document.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct FormatError {
    pub path: String,
    pub message: String,
}

impl FormatError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Kraus,
    Lindblad,
    Stochastic,
}

/// On-disk model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    pub kind: KindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lindblad: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stochastic: Option<Vec<Vec<f64>>>,
}

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_value(m: &CMat) -> Value {
    serde_json::to_value(matrix_to_json(m)).expect("finite matrices serialize")
}

/// Square matrix of the given dimension from its JSON rows.
pub fn matrix_from_json(rows: &MatrixJson, dim: usize, path: &str) -> Result<CMat, FormatError> {
    if rows.len() != dim {
        return Err(FormatError::new(path, format!("expected {dim} rows, found {}", rows.len())));
    }
    let mut m = CMat::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(FormatError::new(
                format!("{path}[{i}]"),
                format!("expected {dim} entries, found {}", row.len()),
            ));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(FormatError::new(format!("{path}[{i}][{j}]"), "entry is not finite"));
            }
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

fn matrices_from_json(list: &[MatrixJson], dim: usize, path: &str) -> Result<Vec<CMat>, FormatError> {
    list.iter()
        .enumerate()
        .map(|(k, m)| matrix_from_json(m, dim, &format!("{path}[{k}]")))
        .collect()
}

fn require<'a, T>(field: &'a Option<T>, name: &str, kind: &str) -> Result<&'a T, FormatError> {
    field
        .as_ref()
        .ok_or_else(|| FormatError::new(name, format!("required for {kind} models")))
}

fn forbid<T>(field: &Option<T>, name: &str, kind: &str) -> Result<(), FormatError> {
    match field {
        Some(_) => Err(FormatError::new(name, format!("not used by {kind} models"))),
        None => Ok(()),
    }
}

fn core_error(path: &str, e: qds_core::Error) -> FormatError {
    FormatError::new(path, e.to_string())
}

impl ModelFile {
    pub fn to_model(&self) -> Result<QuantumModel, FormatError> {
        let d = self.dim;
        if d == 0 {
            return Err(FormatError::new("dim", "must be positive"));
        }
        match self.kind {
            KindName::Kraus => {
                for (f, n) in [(&self.hamiltonian, "hamiltonian"), (&self.drift, "drift")] {
                    forbid(f, n, "kraus")?;
                }
                forbid(&self.lindblad, "lindblad", "kraus")?;
                forbid(&self.stochastic, "stochastic", "kraus")?;
                let ops = matrices_from_json(require(&self.kraus, "kraus", "kraus")?, d, "kraus")?;
                if ops.is_empty() {
                    return Err(FormatError::new("kraus", "at least one operator is required"));
                }
                QuantumModel::kraus(d, ops).map_err(|e| core_error("kraus", e))
            }
            KindName::Lindblad => {
                forbid(&self.kraus, "kraus", "lindblad")?;
                forbid(&self.stochastic, "stochastic", "lindblad")?;
                let h = matrix_from_json(require(&self.hamiltonian, "hamiltonian", "lindblad")?, d, "hamiltonian")?;
                let jumps = match &self.lindblad {
                    Some(list) => matrices_from_json(list, d, "lindblad")?,
                    None => Vec::new(),
                };
                match &self.drift {
                    Some(y) => {
                        let y = matrix_from_json(y, d, "drift")?;
                        QuantumModel::lindblad_with_drift(h, jumps, y).map_err(|e| core_error("drift", e))
                    }
                    None => QuantumModel::lindblad(h, jumps).map_err(|e| core_error("hamiltonian", e)),
                }
            }
            KindName::Stochastic => {
                forbid(&self.kraus, "kraus", "stochastic")?;
                forbid(&self.hamiltonian, "hamiltonian", "stochastic")?;
                forbid(&self.lindblad, "lindblad", "stochastic")?;
                forbid(&self.drift, "drift", "stochastic")?;
                let rows = require(&self.stochastic, "stochastic", "stochastic")?;
                if rows.len() != d {
                    return Err(FormatError::new(
                        "stochastic",
                        format!("expected {d} rows, found {}", rows.len()),
                    ));
                }
                let mut p = DMatrix::<f64>::zeros(d, d);
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != d {
                        return Err(FormatError::new(
                            format!("stochastic[{i}]"),
                            format!("expected {d} entries, found {}", row.len()),
                        ));
                    }
                    for (j, &x) in row.iter().enumerate() {
                        p[(i, j)] = x;
                    }
                }
                QuantumModel::stochastic(p).map_err(|e| core_error("stochastic", e))
            }
        }
    }

    pub fn from_model(model: &QuantumModel) -> Self {
        let mut file = ModelFile {
            dim: model.dim(),
            kind: match model.kind() {
                ModelKind::Kraus => KindName::Kraus,
                ModelKind::Lindblad => KindName::Lindblad,
                ModelKind::Stochastic => KindName::Stochastic,
            },
            kraus: None,
            hamiltonian: None,
            lindblad: None,
            drift: None,
            stochastic: None,
        };
        match model.dynamics() {
            Dynamics::Kraus { ops } => file.kraus = Some(ops.iter().map(matrix_to_json).collect()),
            Dynamics::Lindblad {
                hamiltonian,
                jumps,
                drift,
                drift_supplied,
            } => {
                file.hamiltonian = Some(matrix_to_json(hamiltonian));
                file.lindblad = Some(jumps.iter().map(matrix_to_json).collect());
                if *drift_supplied {
                    file.drift = Some(matrix_to_json(drift));
                }
            }
            Dynamics::Stochastic { matrix, .. } => {
                file.stochastic = Some(
                    (0..matrix.nrows())
                        .map(|i| matrix.row(i).iter().copied().collect())
                        .collect(),
                );
            }
        }
        file
    }
}

fn deserialize_at<T: serde::de::DeserializeOwned>(value: Value, prefix: &str) -> Result<T, FormatError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, ".") => "$".to_string(),
            (true, _) => inner,
            (false, ".") => prefix.to_string(),
            (false, _) => format!("{prefix}.{inner}"),
        };
        FormatError::new(path, e.into_inner().to_string())
    })
}

fn parse_value(text: &str) -> Result<Value, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::new("$", e.to_string()))
}

pub fn parse_model_file(text: &str) -> Result<ModelFile, FormatError> {
    deserialize_at(parse_value(text)?, "")
}

pub fn parse_model(text: &str) -> Result<QuantumModel, FormatError> {
    parse_model_file(text)?.to_model()
}

pub fn model_to_string(model: &QuantumModel) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(model)).expect("model files serialize")
}

/// An operator file: either a bare matrix or `{"matrix": ...}`.
pub fn parse_operator(text: &str, dim: usize) -> Result<CMat, FormatError> {
    let value = parse_value(text)?;
    let (value, path) = match value {
        Value::Object(mut map) => {
            let inner = map
                .remove("matrix")
                .ok_or_else(|| FormatError::new("matrix", "missing field"))?;
            if let Some(extra) = map.keys().next() {
                return Err(FormatError::new(extra.clone(), "unknown field"));
            }
            (inner, "matrix")
        }
        other => (other, ""),
    };
    let rows: MatrixJson = deserialize_at(value, path)?;
    matrix_from_json(&rows, dim, if path.is_empty() { "$" } else { path })
}

/// A projection file, in the operator format. Entries are snapped to an
/// exact projection or rejected.
pub fn parse_projection(text: &str, dim: usize) -> Result<Projection, FormatError> {
    let m = parse_operator(text, dim)?;
    Projection::new(m).map_err(|e| FormatError::new("$", e.to_string()))
}
