//! Dynamical-system models and their superoperator representations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::linalg::{self, re, CMat};
use crate::math;
use crate::{Error, Result};

/// Numerical tolerances threaded through every computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative singular/eigenvalue cutoff used for ranks and supports.
    pub rank_tol: f64,
    /// Residual norm accepted for algebraic identities.
    pub alg_tol: f64,
    /// Convergence threshold for iterations and long-horizon limits.
    pub conv_tol: f64,
    /// Radius used to group numerically equal eigenvalues.
    pub cluster_radius: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: 1e-9,
            alg_tol: 1e-8,
            conv_tol: 1e-10,
            cluster_radius: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.rank_tol, self.alg_tol, self.conv_tol, self.cluster_radius];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidTolerances("tolerances must be finite and positive"));
        }
        if self.rank_tol >= 1.0 {
            return Err(Error::InvalidTolerances("rank_tol must be below 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Kraus,
    Lindblad,
    Stochastic,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Kraus => "kraus",
            ModelKind::Lindblad => "lindblad",
            ModelKind::Stochastic => "stochastic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    /// `τ(x) = Σ l_k† x l_k`.
    Kraus { ops: Vec<CMat> },
    /// `L(x) = Y†x + xY + Σ L_k† x L_k`.
    Lindblad {
        hamiltonian: CMat,
        jumps: Vec<CMat>,
        drift: CMat,
        /// Whether `drift` came from the caller rather than from `H` and the `L_k`.
        drift_supplied: bool,
    },
    /// Row-stochastic matrix; `kraus` holds its diagonal channel embedding.
    Stochastic { matrix: DMatrix<f64>, kraus: Vec<CMat> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumModel {
    dim: usize,
    dynamics: Dynamics,
}

fn check_square(name: &str, m: &CMat, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Structural(format!(
            "{name} is {}×{}, expected {dim}×{dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !linalg::is_finite(m) {
        return Err(Error::Structural(format!("{name} has non-finite entries")));
    }
    Ok(())
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Structural("dimension must be positive".into()));
    }
    Ok(())
}

fn dissipation(jumps: &[CMat], dim: usize) -> CMat {
    jumps
        .iter()
        .fold(CMat::zeros(dim, dim), |acc, l| acc + l.adjoint() * l)
}

fn drift_from(hamiltonian: &CMat, jumps: &[CMat]) -> CMat {
    let dim = hamiltonian.nrows();
    hamiltonian * linalg::c(0.0, -1.0) - dissipation(jumps, dim) * re(0.5)
}

/// `Y = −iH − ½ Σ L_k† L_k`, the unique drift that makes the generator unital
/// for the given Hamiltonian.
pub fn effective_drift(hamiltonian: &CMat, jumps: &[CMat], tol: &Tolerances) -> Result<CMat> {
    let dim = hamiltonian.nrows();
    check_square("hamiltonian", hamiltonian, dim)?;
    for (k, l) in jumps.iter().enumerate() {
        check_square(&format!("lindblad[{k}]"), l, dim)?;
    }
    let residual = linalg::hermiticity_residual(hamiltonian);
    if residual > tol.alg_tol {
        return Err(Error::NotHermitian { residual });
    }
    Ok(drift_from(hamiltonian, jumps))
}

/// Kraus embedding `K_ij = √P(i,j) |j⟩⟨i|` of a row-stochastic matrix.
pub(crate) fn stochastic_kraus(matrix: &DMatrix<f64>) -> Vec<CMat> {
    let d = matrix.nrows();
    let mut ops = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let p = matrix[(i, j)];
            if p > 0.0 {
                let mut k = CMat::zeros(d, d);
                k[(j, i)] = re(math::sqrt(p));
                ops.push(k);
            }
        }
    }
    ops
}

impl QuantumModel {
    pub fn kraus(dim: usize, ops: Vec<CMat>) -> Result<Self> {
        check_dim(dim)?;
        if ops.is_empty() {
            return Err(Error::Structural("kraus model needs at least one operator".into()));
        }
        for (k, op) in ops.iter().enumerate() {
            check_square(&format!("kraus[{k}]"), op, dim)?;
        }
        Ok(QuantumModel {
            dim,
            dynamics: Dynamics::Kraus { ops },
        })
    }

    /// GKSL model with drift derived from `H` and the jump operators.
    pub fn lindblad(hamiltonian: CMat, jumps: Vec<CMat>) -> Result<Self> {
        let dim = hamiltonian.nrows();
        check_dim(dim)?;
        check_square("hamiltonian", &hamiltonian, dim)?;
        for (k, l) in jumps.iter().enumerate() {
            check_square(&format!("lindblad[{k}]"), l, dim)?;
        }
        let drift = drift_from(&hamiltonian, &jumps);
        Ok(QuantumModel {
            dim,
            dynamics: Dynamics::Lindblad {
                hamiltonian,
                jumps,
                drift,
                drift_supplied: false,
            },
        })
    }

    /// GKSL model with a caller-supplied drift `Y`.
    pub fn lindblad_with_drift(hamiltonian: CMat, jumps: Vec<CMat>, drift: CMat) -> Result<Self> {
        let dim = hamiltonian.nrows();
        check_dim(dim)?;
        check_square("hamiltonian", &hamiltonian, dim)?;
        check_square("drift", &drift, dim)?;
        for (k, l) in jumps.iter().enumerate() {
            check_square(&format!("lindblad[{k}]"), l, dim)?;
        }
        Ok(QuantumModel {
            dim,
            dynamics: Dynamics::Lindblad {
                hamiltonian,
                jumps,
                drift,
                drift_supplied: true,
            },
        })
    }

    pub fn stochastic(matrix: DMatrix<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        check_dim(dim)?;
        if matrix.ncols() != dim {
            return Err(Error::Structural(format!(
                "stochastic matrix is {}×{}, expected square",
                dim,
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|p| !p.is_finite()) {
            return Err(Error::Structural("stochastic matrix has non-finite entries".into()));
        }
        let kraus = stochastic_kraus(&matrix);
        Ok(QuantumModel {
            dim,
            dynamics: Dynamics::Stochastic { matrix, kraus },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn kind(&self) -> ModelKind {
        match self.dynamics {
            Dynamics::Kraus { .. } => ModelKind::Kraus,
            Dynamics::Lindblad { .. } => ModelKind::Lindblad,
            Dynamics::Stochastic { .. } => ModelKind::Stochastic,
        }
    }

    pub fn time_kind(&self) -> TimeKind {
        match self.kind() {
            ModelKind::Lindblad => TimeKind::ContinuousGenerator,
            _ => TimeKind::DiscreteStep,
        }
    }

    /// Kraus operators for discrete-time models (including the embedding of
    /// a stochastic matrix).
    pub fn kraus_ops(&self) -> Option<&[CMat]> {
        match &self.dynamics {
            Dynamics::Kraus { ops } => Some(ops),
            Dynamics::Stochastic { kraus, .. } => Some(kraus),
            Dynamics::Lindblad { .. } => None,
        }
    }

    pub fn drift(&self) -> Option<&CMat> {
        match &self.dynamics {
            Dynamics::Lindblad { drift, .. } => Some(drift),
            _ => None,
        }
    }

    pub fn jumps(&self) -> Option<&[CMat]> {
        match &self.dynamics {
            Dynamics::Lindblad { jumps, .. } => Some(jumps),
            _ => None,
        }
    }

    pub fn stochastic_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.dynamics {
            Dynamics::Stochastic { matrix, .. } => Some(matrix),
            _ => None,
        }
    }

    /// The operators whose common invariant subspaces are the ranges of
    /// sub-harmonic projections: the Kraus operators, or `Y` followed by the
    /// jump operators.
    pub fn generators(&self) -> Vec<CMat> {
        match &self.dynamics {
            Dynamics::Kraus { ops } => ops.clone(),
            Dynamics::Stochastic { kraus, .. } => kraus.clone(),
            Dynamics::Lindblad { drift, jumps, .. } => {
                let mut g = Vec::with_capacity(jumps.len() + 1);
                g.push(drift.clone());
                g.extend(jumps.iter().cloned());
                g
            }
        }
    }

    /// Human-readable name of `generators()[index]`.
    pub fn generator_label(&self, index: usize) -> String {
        match self.kind() {
            ModelKind::Lindblad if index == 0 => "drift".into(),
            ModelKind::Lindblad => format!("lindblad[{}]", index - 1),
            _ => format!("kraus[{index}]"),
        }
    }

    /// Hermitian part of the Hamiltonian implied by the drift,
    /// `H = i (Y − Y†) / 2`.
    pub fn effective_hamiltonian(&self) -> Option<CMat> {
        self.drift()
            .map(|y| (y - y.adjoint()) * linalg::c(0.0, 0.5))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    pub residuals: Vec<Residual>,
}

impl ValidationReport {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.value)
    }

    fn describe_failures(&self, tol: f64) -> String {
        let mut s = String::new();
        for r in self.residuals.iter().filter(|r| r.value.is_nan() || r.value > tol) {
            if !s.is_empty() {
                s.push_str(", ");
            }
            s.push_str(&format!("{} residual {:e}", r.name, r.value));
        }
        s
    }
}

/// Checks the defining identities of the model and lists every residual.
pub fn validate_model(model: &QuantumModel, tol: &Tolerances) -> ValidationReport {
    let d = model.dim();
    let eye = linalg::identity(d);
    let mut residuals = Vec::new();
    match model.dynamics() {
        Dynamics::Kraus { ops } => {
            let sum = dissipation(ops, d);
            residuals.push(Residual {
                name: "unitality".into(),
                value: linalg::op_norm(&(sum - eye)),
            });
        }
        Dynamics::Lindblad {
            hamiltonian,
            jumps,
            drift,
            ..
        } => {
            residuals.push(Residual {
                name: "hamiltonian_hermitian".into(),
                value: linalg::hermiticity_residual(hamiltonian),
            });
            residuals.push(Residual {
                name: "unitality".into(),
                value: linalg::op_norm(&(drift + drift.adjoint() + dissipation(jumps, d))),
            });
        }
        Dynamics::Stochastic { matrix, .. } => {
            let negativity = matrix.iter().fold(0.0f64, |m, &p| m.max(-p));
            let row_sum = (0..d)
                .map(|i| (matrix.row(i).sum() - 1.0).abs())
                .fold(0.0, f64::max);
            residuals.push(Residual {
                name: "negativity".into(),
                value: negativity,
            });
            residuals.push(Residual {
                name: "row_sum".into(),
                value: row_sum,
            });
        }
    }
    let ok = residuals.iter().all(|r| r.value <= tol.alg_tol);
    ValidationReport { ok, residuals }
}

pub(crate) fn ensure_valid(model: &QuantumModel, tol: &Tolerances) -> Result<()> {
    let report = validate_model(model, tol);
    if report.ok {
        Ok(())
    } else {
        Err(Error::InvalidModel(report.describe_failures(tol.alg_tol)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Picture {
    Heisenberg,
    Schrodinger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeKind {
    DiscreteStep,
    ContinuousGenerator,
}

impl TimeKind {
    /// 1 for a step map, 0 for a generator.
    pub fn ergodic_eigenvalue(self) -> f64 {
        match self {
            TimeKind::DiscreteStep => 1.0,
            TimeKind::ContinuousGenerator => 0.0,
        }
    }
}

/// A linear map on `d × d` matrices represented as a `d² × d²` matrix
/// acting on column-stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    pub dim: usize,
    pub matrix: CMat,
    pub picture: Picture,
    pub time_kind: TimeKind,
}

impl Superoperator {
    pub fn identity(dim: usize, picture: Picture) -> Self {
        Superoperator {
            dim,
            matrix: linalg::identity(dim * dim),
            picture,
            time_kind: TimeKind::DiscreteStep,
        }
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ S(|i⟩⟨j|)`.
    pub fn choi(&self) -> CMat {
        let d = self.dim;
        let mut choi = CMat::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = CMat::zeros(d, d);
                e[(i, j)] = re(1.0);
                let image = linalg::unvectorize(&(&self.matrix * linalg::vectorize(&e)), d);
                choi += linalg::kron(&e, &image);
            }
        }
        choi
    }
}

/// Heisenberg matrix without validation.
pub(crate) fn heisenberg_matrix(model: &QuantumModel) -> CMat {
    let d = model.dim();
    let eye = linalg::identity(d);
    match model.dynamics() {
        Dynamics::Kraus { ops } | Dynamics::Stochastic { kraus: ops, .. } => ops
            .iter()
            .fold(CMat::zeros(d * d, d * d), |acc, l| {
                acc + linalg::kron(&l.transpose(), &l.adjoint())
            }),
        Dynamics::Lindblad { jumps, drift, .. } => {
            let mut m = linalg::kron(&eye, &drift.adjoint()) + linalg::kron(&drift.transpose(), &eye);
            for l in jumps {
                m += linalg::kron(&l.transpose(), &l.adjoint());
            }
            m
        }
    }
}

/// Predual matrix without validation.
pub(crate) fn predual_matrix(model: &QuantumModel) -> CMat {
    let d = model.dim();
    let eye = linalg::identity(d);
    match model.dynamics() {
        Dynamics::Kraus { ops } | Dynamics::Stochastic { kraus: ops, .. } => ops
            .iter()
            .fold(CMat::zeros(d * d, d * d), |acc, l| {
                acc + linalg::kron(&l.conjugate(), l)
            }),
        Dynamics::Lindblad { jumps, drift, .. } => {
            let mut m = linalg::kron(&eye, drift) + linalg::kron(&drift.conjugate(), &eye);
            for l in jumps {
                m += linalg::kron(&l.conjugate(), l);
            }
            m
        }
    }
}

pub(crate) fn heisenberg_unchecked(model: &QuantumModel) -> Superoperator {
    Superoperator {
        dim: model.dim(),
        matrix: heisenberg_matrix(model),
        picture: Picture::Heisenberg,
        time_kind: model.time_kind(),
    }
}

pub(crate) fn predual_unchecked(model: &QuantumModel) -> Superoperator {
    Superoperator {
        dim: model.dim(),
        matrix: predual_matrix(model),
        picture: Picture::Schrodinger,
        time_kind: model.time_kind(),
    }
}

/// The map `x ↦ Σ l† x l` (discrete) or the generator `x ↦ Y†x + xY + Σ L†xL`.
pub fn heisenberg_superoperator(model: &QuantumModel, tol: &Tolerances) -> Result<Superoperator> {
    ensure_valid(model, tol)?;
    Ok(heisenberg_unchecked(model))
}

/// The trace-dual of [`heisenberg_superoperator`]: `ρ ↦ Σ l ρ l†` or
/// `ρ ↦ Yρ + ρY† + Σ L ρ L†`.
pub fn predual_superoperator(model: &QuantumModel, tol: &Tolerances) -> Result<Superoperator> {
    ensure_valid(model, tol)?;
    Ok(predual_unchecked(model))
}

/// Applies `S` to `x`. Hermitian inputs give re-symmetrized outputs.
pub fn apply_map(s: &Superoperator, x: &CMat, tol: &Tolerances) -> Result<CMat> {
    if x.nrows() != s.dim || x.ncols() != s.dim {
        return Err(Error::Structural(format!(
            "operator is {}×{}, superoperator acts on {}×{}",
            x.nrows(),
            x.ncols(),
            s.dim,
            s.dim
        )));
    }
    let out = linalg::unvectorize(&(&s.matrix * linalg::vectorize(x)), s.dim);
    if linalg::hermiticity_residual(x) <= tol.alg_tol {
        Ok(linalg::hermitian_part(&out))
    } else {
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag_real, from_real_rows, pauli_x, pauli_z};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn amplitude_damping(gamma: f64) -> QuantumModel {
        let k0 = from_real_rows(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()]);
        let k1 = from_real_rows(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0]);
        QuantumModel::kraus(2, alloc::vec![k0, k1]).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_channel_validates_with_zero_residual() {
        let m = QuantumModel::kraus(2, alloc::vec![linalg::identity(2)]).unwrap();
        let r = validate_model(&m, &tol());
        assert!(r.ok);
        assert_eq!(r.residual("unitality"), Some(0.0));
    }

    #[test]
    fn amplitude_damping_validates() {
        let r = validate_model(&amplitude_damping(0.5), &tol());
        assert!(r.ok);
        assert!(r.residual("unitality").unwrap() < 1e-15);
    }

    #[test]
    fn scaled_kraus_operator_breaks_unitality() {
        let k0 = from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.5f64.sqrt()]);
        let k1 = from_real_rows(2, 2, &[0.0, 1.1 * 0.5f64.sqrt(), 0.0, 0.0]);
        let m = QuantumModel::kraus(2, alloc::vec![k0, k1]).unwrap();
        let r = validate_model(&m, &tol());
        assert!(!r.ok);
        assert!((r.residual("unitality").unwrap() - 0.105).abs() < 1e-12);
        assert!(matches!(heisenberg_superoperator(&m, &tol()), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let err = QuantumModel::kraus(2, alloc::vec![linalg::identity(3)]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
        let err = QuantumModel::lindblad(linalg::identity(2), alloc::vec![linalg::identity(3)]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn non_hermitian_hamiltonian_is_listed() {
        let h = from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let m = QuantumModel::lindblad(h.clone(), alloc::vec![]).unwrap();
        let r = validate_model(&m, &tol());
        assert!(!r.ok);
        assert!(r.residual("hamiltonian_hermitian").unwrap() > 0.5);
        assert!(matches!(
            effective_drift(&h, &[], &tol()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn effective_drift_examples() {
        let y = effective_drift(&CMat::zeros(2, 2), &[pauli_x()], &tol()).unwrap();
        assert!((y - linalg::identity(2) * re(-0.5)).norm() < 1e-15);

        let y = effective_drift(&pauli_z(), &[], &tol()).unwrap();
        assert!((y - pauli_z() * c(0.0, -1.0)).norm() < 1e-15);

        let y = effective_drift(&pauli_z(), &[pauli_z()], &tol()).unwrap();
        let expected = pauli_z() * c(0.0, -1.0) - linalg::identity(2) * re(0.5);
        assert!((y - expected).norm() < 1e-15);
    }

    #[test]
    fn heisenberg_examples() {
        let id = QuantumModel::kraus(2, alloc::vec![linalg::identity(2)]).unwrap();
        let s = heisenberg_superoperator(&id, &tol()).unwrap();
        assert_eq!(s.matrix, linalg::identity(4));

        let ad = amplitude_damping(0.5);
        let s = heisenberg_superoperator(&ad, &tol()).unwrap();
        let out = apply_map(&s, &diag_real(&[1.0, 0.0]), &tol()).unwrap();
        assert!((out - diag_real(&[1.0, 0.5])).norm() < 1e-15);
        let out = apply_map(&s, &linalg::identity(2), &tol()).unwrap();
        assert!((out - linalg::identity(2)).norm() < 1e-15);
        let out = apply_map(&s, &diag_real(&[0.0, 1.0]), &tol()).unwrap();
        assert!((out - diag_real(&[0.0, 0.5])).norm() < 1e-15);

        let deph = QuantumModel::lindblad(pauli_z(), alloc::vec![pauli_z()]).unwrap();
        let s = heisenberg_superoperator(&deph, &tol()).unwrap();
        assert_eq!(s.time_kind, TimeKind::ContinuousGenerator);
        let out = apply_map(&s, &linalg::identity(2), &tol()).unwrap();
        assert!(out.norm() < 1e-15);
    }

    #[test]
    fn predual_examples() {
        let ad = amplitude_damping(0.5);
        let s = predual_superoperator(&ad, &tol()).unwrap();
        let out = apply_map(&s, &diag_real(&[0.0, 1.0]), &tol()).unwrap();
        assert!((out - diag_real(&[0.5, 0.5])).norm() < 1e-15);
        let out = apply_map(&s, &diag_real(&[1.0, 0.0]), &tol()).unwrap();
        assert!((out - diag_real(&[1.0, 0.0])).norm() < 1e-15);

        let id = QuantumModel::kraus(2, alloc::vec![linalg::identity(2)]).unwrap();
        let s = predual_superoperator(&id, &tol()).unwrap();
        let rho = from_real_rows(2, 2, &[0.3, 0.1, 0.1, 0.7]);
        assert!((apply_map(&s, &rho, &tol()).unwrap() - rho).norm() < 1e-15);
    }

    #[test]
    fn apply_map_rejects_wrong_dimension() {
        let s = Superoperator::identity(2, Picture::Heisenberg);
        assert!(matches!(
            apply_map(&s, &linalg::identity(3), &tol()),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn trace_duality_and_complete_positivity_on_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let d = 2 + trial % 4;
            let model = if trial % 2 == 0 {
                random::random_kraus_model(&mut rng, d, 1 + trial % 3)
            } else {
                random::random_lindblad_model(&mut rng, d, 1 + trial % 3)
            };
            let h = heisenberg_superoperator(&model, &tol()).unwrap();
            let p = predual_superoperator(&model, &tol()).unwrap();
            for _ in 0..5 {
                let x = random::random_matrix(&mut rng, d, d);
                let rho = random::random_density(&mut rng, d);
                let lhs = (&rho * apply_map(&h, &x, &tol()).unwrap()).trace();
                let rhs = (apply_map(&p, &rho, &tol()).unwrap() * &x).trace();
                assert!((lhs - rhs).norm() < 1e-10);
            }
            // Trace preservation of the predual, or trace annihilation of its generator.
            let rho = random::random_density(&mut rng, d);
            let tr = apply_map(&p, &rho, &tol()).unwrap().trace();
            let expected = p.time_kind.ergodic_eigenvalue();
            assert!((tr.re - expected).abs() < 1e-10 && tr.im.abs() < 1e-10);
            if model.kind() == ModelKind::Kraus {
                assert!(linalg::min_eigenvalue(&h.choi()) >= -1e-10);
            }
        }
    }

    #[test]
    fn effective_drift_satisfies_unitality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..6 {
            let h = random::random_hermitian(&mut rng, d);
            let jumps: Vec<CMat> = (0..3).map(|_| random::random_matrix(&mut rng, d, d)).collect();
            let y = effective_drift(&h, &jumps, &tol()).unwrap();
            let residual = &y + y.adjoint() + dissipation(&jumps, d);
            assert!(linalg::op_norm(&residual) <= 1e-12);
        }
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerances::default().validate().is_ok());
        let bad = Tolerances {
            rank_tol: 1.5,
            ..Tolerances::default()
        };
        assert!(bad.validate().is_err());
        let bad = Tolerances {
            alg_tol: 0.0,
            ..Tolerances::default()
        };
        assert!(bad.validate().is_err());
    }
}
