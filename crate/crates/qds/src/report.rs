//! Command reports and their JSON and text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use qds_core::Tolerances;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Serialized copy of [`Tolerances`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSettings {
    pub rank_tol: f64,
    pub alg_tol: f64,
    pub conv_tol: f64,
    pub cluster_radius: f64,
}

impl From<Tolerances> for ToleranceSettings {
    fn from(t: Tolerances) -> Self {
        ToleranceSettings {
            rank_tol: t.rank_tol,
            alg_tol: t.alg_tol,
            conv_tol: t.conv_tol,
            cluster_radius: t.cluster_radius,
        }
    }
}

impl From<ToleranceSettings> for Tolerances {
    fn from(t: ToleranceSettings) -> Self {
        Tolerances {
            rank_tol: t.rank_tol,
            alg_tol: t.alg_tol,
            conv_tol: t.conv_tol,
            cluster_radius: t.cluster_radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    /// SHA-256 of the model file bytes, lowercase hex.
    pub model_hash: String,
    pub command: String,
    pub seed: u64,
    pub tolerances: ToleranceSettings,
    pub verdict: bool,
    pub payload: Value,
    /// Named residual norms. Non-finite values are stored as `null`.
    pub residuals: BTreeMap<String, Option<f64>>,
    pub timing_ms: f64,
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// `Some(x)` for finite `x`, so that JSON never sees an infinity.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Report> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let t = &self.tolerances;
        let _ = writeln!(out, "command:    {}", self.command);
        let _ = writeln!(out, "verdict:    {}", self.verdict);
        let _ = writeln!(out, "model hash: {}", self.model_hash);
        let _ = writeln!(out, "seed:       {}", self.seed);
        let _ = writeln!(
            out,
            "tolerances: rank {} alg {} conv {} cluster {}",
            sig6(t.rank_tol),
            sig6(t.alg_tol),
            sig6(t.conv_tol),
            sig6(t.cluster_radius)
        );
        out.push_str("payload:\n");
        render_fields(&mut out, &self.payload, 1);
        out.push_str("residuals:\n");
        for (name, value) in &self.residuals {
            let v = value.map(sig6).unwrap_or_else(|| "-".into());
            let _ = writeln!(out, "  {name}: {v}");
        }
        let _ = writeln!(out, "timing:     {} ms", sig6(self.timing_ms));
        out
    }
}

/// Six significant digits in the style of C's `%g`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let s = format!("{x:.5e}");
    let (mantissa, e) = s.split_once('e').expect("exponent present");
    let e: i32 = e.parse().expect("integer exponent");
    // Rounding can bump the exponent, e.g. 999999.7 → 1.00000e6.
    let exp = exp.max(e);
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if e < 0 { '-' } else { '+' }, e.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn complex_text(re: f64, im: f64) -> String {
    if im == 0.0 {
        sig6(re)
    } else if re == 0.0 {
        format!("{}i", sig6(im))
    } else {
        let sign = if im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}i", sig6(re), sig6(im.abs()))
    }
}

fn as_entry(v: &Value) -> Option<(f64, f64)> {
    match v.as_array()?.as_slice() {
        [re, im] => Some((re.as_f64()?, im.as_f64()?)),
        _ => None,
    }
}

/// A `[re, im]` matrix, if the value has that shape.
fn as_matrix(v: &Value) -> Option<Vec<Vec<(f64, f64)>>> {
    let rows = v.as_array()?;
    if rows.is_empty() {
        return None;
    }
    let m: Vec<Vec<(f64, f64)>> = rows
        .iter()
        .map(|r| r.as_array()?.iter().map(as_entry).collect::<Option<Vec<_>>>())
        .collect::<Option<_>>()?;
    (m.iter().all(|r| r.len() == m.len())).then_some(m)
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => sig6(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_matrix(out: &mut String, m: &[Vec<(f64, f64)>], depth: usize) {
    let cells: Vec<Vec<String>> = m
        .iter()
        .map(|r| r.iter().map(|&(re, im)| complex_text(re, im)).collect())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    for row in cells {
        let _ = write!(out, "{}[", "  ".repeat(depth));
        for c in row {
            let _ = write!(out, " {c:>width$}");
        }
        out.push_str(" ]\n");
    }
}

fn is_scalar(v: &Value) -> bool {
    !(v.is_array() || v.is_object())
}

fn render_value(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    if let Some(m) = as_matrix(v) {
        let _ = writeln!(out, "{pad}{key}:");
        render_matrix(out, &m, depth + 1);
        return;
    }
    match v {
        Value::Object(_) => {
            let _ = writeln!(out, "{pad}{key}:");
            render_fields(out, v, depth + 1);
        }
        Value::Array(items) if items.iter().all(is_scalar) => {
            let list: Vec<String> = items.iter().map(scalar_text).collect();
            let _ = writeln!(out, "{pad}{key}: [{}]", list.join(", "));
        }
        Value::Array(items) => {
            let _ = writeln!(out, "{pad}{key}:");
            for (i, item) in items.iter().enumerate() {
                render_value(out, &format!("[{i}]"), item, depth + 1);
            }
        }
        _ => {
            let _ = writeln!(out, "{pad}{key}: {}", scalar_text(v));
        }
    }
}

fn render_fields(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                render_value(out, k, item, depth);
            }
        }
        other => render_value(out, "value", other, depth),
    }
}
