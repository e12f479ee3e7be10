//! Projections, the sub-harmonic and harmonic tests, range projections and
//! reduction of the dynamics to a sub-harmonic corner.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::linalg::{self, re, CMat};
use crate::model::{self, validate_model, Dynamics, QuantumModel, TimeKind, Tolerances};
use crate::{Error, Result};

/// Inputs this close to a projection are snapped onto it.
pub const SNAP_TOL: f64 = 1e-6;

/// Hermitian idempotent `d × d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    matrix: CMat,
    rank: usize,
}

impl Projection {
    /// Accepts a matrix within [`SNAP_TOL`] of a projection and snaps it to
    /// the nearest one by rounding its eigenvalues to 0 or 1.
    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Structural(format!(
                "projection must be square and nonempty, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::NotProjection("non-finite entries".into()));
        }
        let herm = linalg::hermiticity_residual(&matrix);
        if herm > SNAP_TOL {
            return Err(Error::NotProjection(format!("hermiticity residual {herm:e}")));
        }
        let (values, _) = linalg::hermitian_eigen(&matrix);
        let worst = values
            .iter()
            .map(|&v| v.abs().min((v - 1.0).abs()))
            .fold(0.0, f64::max);
        if worst > SNAP_TOL {
            return Err(Error::NotProjection(format!(
                "eigenvalue {worst:e} away from {{0, 1}}"
            )));
        }
        Ok(Self::from_matrix_unchecked(matrix))
    }

    /// Spectral rounding without the distance check.
    pub fn from_matrix_unchecked(matrix: CMat) -> Self {
        let (values, vectors) = linalg::hermitian_eigen(&matrix);
        let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= 0.5).collect();
        let basis = CMat::from_fn(matrix.nrows(), keep.len(), |i, j| vectors[(i, keep[j])]);
        let mut p = Self::from_orthonormal_basis(&basis, matrix.nrows());
        // Keep exact diagonal inputs exact.
        if is_diagonal_01(&matrix) {
            p.matrix = CMat::from_fn(matrix.nrows(), matrix.ncols(), |i, j| {
                if i == j && matrix[(i, i)].re >= 0.5 {
                    re(1.0)
                } else {
                    re(0.0)
                }
            });
        }
        p
    }

    /// Projection onto the span of orthonormal columns.
    pub fn from_orthonormal_basis(basis: &CMat, dim: usize) -> Self {
        if basis.ncols() == 0 {
            return Self::zero(dim);
        }
        let m = linalg::hermitian_part(&linalg::projector_from_basis(basis));
        Projection {
            matrix: m,
            rank: basis.ncols(),
        }
    }

    /// Projection onto the span of arbitrary columns.
    pub fn from_span(vectors: &CMat, abs_tol: f64) -> Self {
        let basis = linalg::orthonormal_columns(vectors, abs_tol);
        Self::from_orthonormal_basis(&basis, vectors.nrows())
    }

    /// Diagonal projection onto the given coordinates.
    pub fn coordinate(dim: usize, indices: &[usize]) -> Self {
        let matrix = CMat::from_fn(dim, dim, |i, j| {
            if i == j && indices.contains(&i) {
                re(1.0)
            } else {
                re(0.0)
            }
        });
        let rank = (0..dim).filter(|i| indices.contains(i)).count();
        Projection { matrix, rank }
    }

    pub fn zero(dim: usize) -> Self {
        Projection {
            matrix: CMat::zeros(dim, dim),
            rank: 0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Projection {
            matrix: linalg::identity(dim),
            rank: dim,
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    pub fn is_identity(&self) -> bool {
        self.rank == self.dim()
    }

    /// `1 − p`
    pub fn complement(&self) -> Projection {
        let d = self.dim();
        if is_diagonal_01(&self.matrix) {
            let keep: Vec<usize> = (0..d).filter(|&i| self.matrix[(i, i)].re < 0.5).collect();
            return Projection::coordinate(d, &keep);
        }
        Projection {
            matrix: linalg::hermitian_part(&(linalg::identity(d) - &self.matrix)),
            rank: d - self.rank,
        }
    }

    /// Orthonormal basis of the range. Diagonal projections get standard
    /// basis vectors in index order.
    pub fn basis(&self) -> CMat {
        let d = self.dim();
        if is_diagonal_01(&self.matrix) {
            let idx = self.diagonal_support();
            return CMat::from_fn(d, idx.len(), |i, j| if i == idx[j] { re(1.0) } else { re(0.0) });
        }
        let (values, vectors) = linalg::hermitian_eigen(&self.matrix);
        let keep: Vec<usize> = (0..d).filter(|&i| values[i] >= 0.5).collect();
        CMat::from_fn(d, keep.len(), |i, j| vectors[(i, keep[j])])
    }

    /// Indices `i` with `p_ii ≥ ½`.
    pub fn diagonal_support(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.matrix[(i, i)].re >= 0.5)
            .collect()
    }

    /// Largest off-diagonal modulus.
    pub fn off_diagonal_mass(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    m = m.max(self.matrix[(i, j)].norm());
                }
            }
        }
        m
    }

    /// Rounds a numerically diagonal projection to an exact coordinate projection.
    pub fn snap_diagonal(&self, tol: f64) -> Option<Projection> {
        if self.off_diagonal_mass() > tol {
            return None;
        }
        let idx = self.diagonal_support();
        let snapped = Projection::coordinate(self.dim(), &idx);
        if snapped.rank != self.rank {
            return None;
        }
        Some(snapped)
    }

    /// `p + q` for orthogonal projections.
    pub fn orthogonal_sum(&self, other: &Projection) -> Projection {
        Projection::from_matrix_unchecked(&self.matrix + &other.matrix)
    }

    pub fn distance(&self, other: &Projection) -> f64 {
        linalg::op_norm(&(&self.matrix - &other.matrix))
    }
}

fn is_diagonal_01(m: &CMat) -> bool {
    let d = m.nrows();
    (0..d).all(|i| {
        (0..d).all(|j| {
            let z = m[(i, j)];
            if i == j {
                z.im == 0.0 && (z.re == 0.0 || z.re == 1.0)
            } else {
                z.re == 0.0 && z.im == 0.0
            }
        })
    })
}

/// Outcome of [`is_subharmonic`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubharmonicVerdict {
    /// Verdict of the algebraic criterion (authoritative).
    pub verdict: bool,
    /// `max_k ‖(1−p) G_k p‖` over the Kraus operators, or over `Y` and the `L_k`.
    pub residual: f64,
    /// Generator with the largest residual, when the residual is positive.
    pub witness: Option<(usize, String)>,
    /// Smallest eigenvalue of `τ_Δ(p) − p`.
    pub order_min_eig: f64,
    /// Verdict of the order test alone.
    pub order_verdict: bool,
}

/// Step used for the order test of continuous-time models.
pub(crate) fn order_test_step(generator: &CMat) -> f64 {
    1.0 / linalg::one_norm(generator).max(1.0)
}

/// `τ_Δ(p) − p`: one step for discrete time, a short flow for continuous time.
fn order_increment(model: &QuantumModel, p: &CMat) -> CMat {
    let s = model::heisenberg_matrix(model);
    let d = model.dim();
    let v = linalg::vectorize(p);
    let stepped = match model.time_kind() {
        TimeKind::DiscreteStep => &s * v,
        TimeKind::ContinuousGenerator => {
            let delta = order_test_step(&s);
            linalg::expm(&(&s * re(delta))) * v
        }
    };
    linalg::hermitian_part(&(linalg::unvectorize(&stepped, d) - p))
}

fn check_projection_dim(model: &QuantumModel, p: &Projection) -> Result<()> {
    if p.dim() != model.dim() {
        return Err(Error::Structural(format!(
            "projection is {}×{}, model acts on dimension {}",
            p.dim(),
            p.dim(),
            model.dim()
        )));
    }
    Ok(())
}

/// Algebraic residuals `‖(1−p) G_k p‖` of each generator.
pub fn subharmonic_residuals(model: &QuantumModel, p: &Projection) -> Vec<f64> {
    let comp = p.complement();
    model
        .generators()
        .iter()
        .map(|g| linalg::op_norm(&(comp.matrix() * g * p.matrix())))
        .collect()
}

/// Tests `τ_t(p) ≥ p` through the invariance of `range(p)` under every
/// Kraus operator (discrete time) or under `Y` and every `L_k` (continuous
/// time), cross-checked against the order test `τ_Δ(p) − p ≥ 0`.
pub fn is_subharmonic(model: &QuantumModel, p: &Projection, tol: &Tolerances) -> Result<SubharmonicVerdict> {
    check_projection_dim(model, p)?;
    model::ensure_valid(model, tol)?;
    let residuals = subharmonic_residuals(model, p);
    let (worst, residual) = residuals
        .iter()
        .copied()
        .enumerate()
        .fold((0usize, 0.0f64), |best, (k, r)| if r > best.1 { (k, r) } else { best });
    let verdict = residual <= tol.alg_tol;
    let witness = (residual > 0.0).then(|| (worst, model.generator_label(worst)));

    let order_min_eig = linalg::min_eigenvalue(&order_increment(model, p.matrix()));
    let order_verdict = order_min_eig >= -tol.alg_tol;

    // The order test sees a violation only at second order in the residual.
    let jump_residual = match model.time_kind() {
        TimeKind::DiscreteStep => residual,
        TimeKind::ContinuousGenerator => residuals.iter().skip(1).copied().fold(0.0, f64::max),
    };
    let strength = match model.time_kind() {
        TimeKind::DiscreteStep => jump_residual * jump_residual,
        TimeKind::ContinuousGenerator => {
            let s = model::heisenberg_matrix(model);
            0.5 * order_test_step(&s) * jump_residual * jump_residual
        }
    };
    let disagree = (verdict && order_min_eig < -10.0 * tol.alg_tol)
        || (!verdict && strength > 10.0 * tol.alg_tol && order_verdict);
    if disagree {
        return Err(Error::SubharmonicCrossCheck {
            residual,
            order_min_eig,
        });
    }
    Ok(SubharmonicVerdict {
        verdict,
        residual,
        witness,
        order_min_eig,
        order_verdict,
    })
}

/// `τ_t(p) = p`: one step for discrete time, `L(p) = 0` for continuous time.
pub fn is_harmonic(model: &QuantumModel, p: &Projection, tol: &Tolerances) -> Result<bool> {
    check_projection_dim(model, p)?;
    Ok(harmonic_residual(model, p.matrix()) <= tol.alg_tol)
}

pub(crate) fn harmonic_residual(model: &QuantumModel, x: &CMat) -> f64 {
    let s = model::heisenberg_matrix(model);
    let d = model.dim();
    let image = linalg::unvectorize(&(&s * linalg::vectorize(x)), d);
    let target = x * re(model.time_kind().ergodic_eigenvalue());
    linalg::op_norm(&(image - target))
}

/// Projection onto the span of eigenvectors of a positive semidefinite `x`
/// whose eigenvalues exceed `rank_tol · λ_max`.
pub fn range_projection(x: &CMat, tol: &Tolerances) -> Result<Projection> {
    if x.nrows() != x.ncols() || x.nrows() == 0 {
        return Err(Error::Structural("range projection needs a square matrix".into()));
    }
    let scale = linalg::op_norm(x).max(1.0);
    let herm = linalg::hermiticity_residual(x);
    if herm > tol.alg_tol * scale {
        return Err(Error::NotHermitian { residual: herm });
    }
    let (values, vectors) = linalg::hermitian_eigen(x);
    let max = values.last().copied().unwrap_or(0.0);
    let min = values.first().copied().unwrap_or(0.0);
    if min < -tol.alg_tol * scale {
        return Err(Error::NotPositive { min_eig: min });
    }
    if max <= 0.0 {
        return Ok(Projection::zero(x.nrows()));
    }
    let cutoff = tol.rank_tol * max;
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > cutoff).collect();
    let basis = CMat::from_fn(x.nrows(), keep.len(), |i, j| vectors[(i, keep[j])]);
    let p = Projection::from_orthonormal_basis(&basis, x.nrows());
    Ok(p.snap_diagonal(1e-12).unwrap_or(p))
}

/// The compression of a model to `range(p)`.
#[derive(Debug, Clone)]
pub struct Compression {
    pub model: QuantumModel,
    /// Orthonormal basis of `range(p)`, the coordinates of the compressed model.
    pub basis: CMat,
    /// The compression lost unitality (`p` was not sub-harmonic).
    pub sub_markov: bool,
}

fn drop_negligible(ops: Vec<CMat>, tol: f64) -> Vec<CMat> {
    let kept: Vec<CMat> = ops.iter().filter(|m| linalg::op_norm(m) > tol).cloned().collect();
    if kept.is_empty() {
        ops.into_iter().take(1).collect()
    } else {
        kept
    }
}

/// Compression `x ↦ p τ(x) p` written in an orthonormal basis of `range(p)`,
/// without requiring `p` to be sub-harmonic. Non-unital results are flagged
/// with `sub_markov`.
pub fn compress_model(model: &QuantumModel, p: &Projection, tol: &Tolerances) -> Result<Compression> {
    check_projection_dim(model, p)?;
    if p.is_zero() {
        return Err(Error::ZeroProjection);
    }
    let b = p.basis();
    let squeeze = |m: &CMat| b.adjoint() * m * &b;
    let reduced = match model.dynamics() {
        Dynamics::Kraus { ops } => {
            QuantumModel::kraus(b.ncols(), drop_negligible(ops.iter().map(squeeze).collect(), tol.alg_tol))?
        }
        Dynamics::Stochastic { matrix, kraus } => match p.snap_diagonal(0.0) {
            Some(diag) => {
                let idx = diag.diagonal_support();
                let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| matrix[(idx[i], idx[j])]);
                QuantumModel::stochastic(sub)?
            }
            None => QuantumModel::kraus(
                b.ncols(),
                drop_negligible(kraus.iter().map(squeeze).collect(), tol.alg_tol),
            )?,
        },
        Dynamics::Lindblad {
            hamiltonian,
            jumps,
            drift,
            ..
        } => {
            let jumps: Vec<CMat> = jumps
                .iter()
                .map(squeeze)
                .filter(|l| linalg::op_norm(l) > tol.alg_tol)
                .collect();
            QuantumModel::lindblad_with_drift(squeeze(hamiltonian), jumps, squeeze(drift))?
        }
    };
    let sub_markov = !validate_model(&reduced, tol).ok;
    Ok(Compression {
        model: reduced,
        basis: b,
        sub_markov,
    })
}

/// The reduced dynamics `τ^p_t(x) = p τ_t(x) p` on `range(p)`, a semigroup
/// because `p` is sub-harmonic.
pub fn reduce_model(model: &QuantumModel, p: &Projection, tol: &Tolerances) -> Result<QuantumModel> {
    let verdict = is_subharmonic(model, p, tol)?;
    if !verdict.verdict {
        return Err(Error::ReductionRequiresSubharmonic {
            residual: verdict.residual,
        });
    }
    Ok(compress_model(model, p, tol)?.model)
}

/// Embeds a matrix given in the coordinates of `basis` back into the full space.
pub fn embed(basis: &CMat, x: &CMat) -> CMat {
    basis * x * basis.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, from_real_rows, pauli_z};
    use crate::model::ModelKind;
    use crate::random;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn ad() -> QuantumModel {
        let k0 = from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.5f64.sqrt()]);
        let k1 = from_real_rows(2, 2, &[0.0, 0.5f64.sqrt(), 0.0, 0.0]);
        QuantumModel::kraus(2, vec![k0, k1]).unwrap()
    }

    fn abs3() -> QuantumModel {
        QuantumModel::stochastic(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.0, 0.0, 0.5, 0.0, 0.5, 0.0, 0.0, 1.0],
        ))
        .unwrap()
    }

    fn deph() -> QuantumModel {
        QuantumModel::lindblad(pauli_z(), vec![pauli_z()]).unwrap()
    }

    fn proj(entries: &[f64]) -> Projection {
        Projection::new(diag_real(entries)).unwrap()
    }

    #[test]
    fn snapping_and_rejection() {
        let mut m = diag_real(&[1.0, 0.0]);
        m[(0, 0)] = re(1.0 + 5e-7);
        let p = Projection::new(m).unwrap();
        assert_eq!(p.rank(), 1);
        assert!((p.matrix() - diag_real(&[1.0, 0.0])).norm() < 1e-15);
        assert!(matches!(
            Projection::new(diag_real(&[0.9, 0.0])),
            Err(Error::NotProjection(_))
        ));
        assert!(matches!(
            Projection::new(from_real_rows(2, 2, &[1.0, 0.3, 0.0, 0.0])),
            Err(Error::NotProjection(_))
        ));
    }

    #[test]
    fn subharmonic_examples() {
        let v = is_subharmonic(&ad(), &proj(&[1.0, 0.0]), &tol()).unwrap();
        assert!(v.verdict && v.order_verdict);
        assert_eq!(v.residual, 0.0);

        let v = is_subharmonic(&ad(), &proj(&[0.0, 1.0]), &tol()).unwrap();
        assert!(!v.verdict && !v.order_verdict);
        assert!((v.residual - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(v.witness.as_ref().map(|w| w.0), Some(1));

        for model in [ad(), abs3(), deph()] {
            let one = Projection::identity(model.dim());
            assert!(is_subharmonic(&model, &one, &tol()).unwrap().verdict);
        }
    }

    #[test]
    fn harmonic_examples() {
        assert!(is_harmonic(&deph(), &proj(&[1.0, 0.0]), &tol()).unwrap());
        assert!(!is_harmonic(&ad(), &proj(&[1.0, 0.0]), &tol()).unwrap());
        assert!(is_harmonic(&ad(), &Projection::identity(2), &tol()).unwrap());
    }

    #[test]
    fn range_projection_examples() {
        let q = range_projection(&diag_real(&[1.0, 0.5, 0.0]), &tol()).unwrap();
        assert_eq!(q, proj(&[1.0, 1.0, 0.0]));
        let q = range_projection(&CMat::zeros(3, 3), &tol()).unwrap();
        assert!(q.is_zero());
        let q = range_projection(&linalg::identity(3), &tol()).unwrap();
        assert!(q.is_identity());
        assert!(matches!(
            range_projection(&diag_real(&[1.0, -0.5]), &tol()),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn reduce_examples() {
        let r = reduce_model(&ad(), &proj(&[1.0, 0.0]), &tol()).unwrap();
        assert_eq!(r.dim(), 1);
        let ops = r.kraus_ops().unwrap();
        assert_eq!(ops.len(), 1);
        assert!((ops[0][(0, 0)] - re(1.0)).norm() < 1e-15);
        assert!(validate_model(&r, &tol()).ok);

        let r = reduce_model(&ad(), &Projection::identity(2), &tol()).unwrap();
        assert_eq!(r, ad());

        assert!(matches!(
            reduce_model(&abs3(), &proj(&[1.0, 1.0, 0.0]), &tol()),
            Err(Error::ReductionRequiresSubharmonic { .. })
        ));
        let c = compress_model(&abs3(), &proj(&[1.0, 1.0, 0.0]), &tol()).unwrap();
        assert!(c.sub_markov);
        assert_eq!(c.model.kind(), ModelKind::Stochastic);
        assert_eq!(
            c.model.stochastic_matrix().unwrap(),
            &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.0])
        );
    }

    #[test]
    fn subharmonic_corner_identities() {
        // p τ_t(p) = τ_t(p) p = p and τ_t(x(1−p)) p = 0 for sub-harmonic p.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..12 {
            let d = 2 + trial % 4;
            let s = if trial % 2 == 0 {
                random::random_structured_kraus(&mut rng, d, 2)
            } else {
                random::random_structured_lindblad(&mut rng, d, 2)
            };
            let p = &s.subharmonic;
            let sup = model::heisenberg_matrix(&s.model);
            for step in [1.0, 2.5, 7.0] {
                let evolve = |x: &CMat| -> CMat {
                    let m = match s.model.time_kind() {
                        TimeKind::DiscreteStep => linalg::matrix_power(&sup, step as u64),
                        TimeKind::ContinuousGenerator => linalg::expm(&(&sup * re(step))),
                    };
                    linalg::unvectorize(&(m * linalg::vectorize(x)), d)
                };
                let tp = evolve(p.matrix());
                assert!((p.matrix() * &tp - p.matrix()).norm() < 1e-8);
                assert!((&tp * p.matrix() - p.matrix()).norm() < 1e-8);
                let x = random::random_matrix(&mut rng, d, d);
                let xc = &x * p.complement().matrix();
                assert!((evolve(&xc) * p.matrix()).norm() <= 1e-8 * linalg::op_norm(&x));
            }
        }
    }

    #[test]
    fn random_projections_agree_with_order_test() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..20 {
            let d = 2 + trial % 4;
            let s = if trial % 2 == 0 {
                random::random_structured_kraus(&mut rng, d, 2)
            } else {
                random::random_structured_lindblad(&mut rng, d, 2)
            };
            let v = is_subharmonic(&s.model, &s.subharmonic, &tol()).unwrap();
            assert!(v.verdict && v.order_verdict);
            let u = random::random_unitary(&mut rng, d);
            let q = Projection::from_orthonormal_basis(&u.columns(0, 1).into_owned(), d);
            let v = is_subharmonic(&s.model, &q, &tol()).unwrap();
            assert_eq!(v.verdict, v.order_verdict);
        }
    }

    #[test]
    fn range_projection_of_a_projection_is_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for d in 1..6 {
            let u = random::random_unitary(&mut rng, d);
            let r = d / 2 + 1;
            let q = Projection::from_orthonormal_basis(&u.columns(0, r).into_owned(), d);
            let again = range_projection(q.matrix(), &tol()).unwrap();
            assert!(again.distance(&q) < 1e-10);
            assert_eq!(again.rank(), q.rank());
        }
    }
}
