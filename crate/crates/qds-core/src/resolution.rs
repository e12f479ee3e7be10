//! Recurrent projections, transience certificates and the decomposition of
//! the identity into orthogonal recurrent projections plus a metastable
//! remainder.
//!
//! The decomposition repeats: find a minimal sub-harmonic projection inside
//! the part not yet seen by `y`, add it, recompute `y` for the running sum.
//! Minimal projections are not unique, so the search is seeded and the seed
//! is part of every result.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classical;
use crate::closure::{self, MinimalityCertificate};
use crate::ergodicity;
use crate::linalg::{self, CMat};
use crate::math;
use crate::model::{self, ModelKind, QuantumModel, Tolerances};
use crate::projection::{self, Projection};
use crate::spectral;
use crate::{Error, Result, DEFAULT_SEED};

/// Reseedings allowed before a minimality search gives up.
pub const MAX_RETRIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecurrenceLabel {
    PositiveRecurrent,
    NullRecurrent,
    Metastable,
    Transient,
    SubharmonicNonminimal,
    NotSubharmonic,
}

impl RecurrenceLabel {
    pub fn name(self) -> &'static str {
        match self {
            RecurrenceLabel::PositiveRecurrent => "positive_recurrent",
            RecurrenceLabel::NullRecurrent => "null_recurrent",
            RecurrenceLabel::Metastable => "metastable",
            RecurrenceLabel::Transient => "transient",
            RecurrenceLabel::SubharmonicNonminimal => "subharmonic_nonminimal",
            RecurrenceLabel::NotSubharmonic => "not_subharmonic",
        }
    }
}

/// Status of `1 − p` for a sub-harmonic `p`, from both injectivity routes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplementStatus {
    /// `y = 1`.
    pub transient: bool,
    /// `y` injective.
    pub metastable: bool,
    pub min_eig_y: f64,
    /// Dimension of the reachability closure of `range(p)`.
    pub closure_dim: usize,
    /// `‖y − 1‖`.
    pub distance_to_one: f64,
}

/// Evidence attached to a classification.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Certificate {
    pub subharmonic_residual: f64,
    pub minimality: Option<MinimalityCertificate>,
    /// Invariant state whose support is the projection.
    pub invariant_state: Option<CMat>,
    pub complement: Option<ComplementStatus>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: RecurrenceLabel,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionResult {
    pub recurrent_projections: Vec<Projection>,
    pub metastable_remainder: Projection,
    /// `y` for the sum of the recurrent projections.
    pub y_total: CMat,
    /// One classification per recurrent projection, in the same order.
    pub certificates: Vec<Classification>,
    /// Classification of the remainder (transient when nonzero).
    pub remainder: Option<Classification>,
    pub seed: u64,
}

impl ResolutionResult {
    pub fn recurrent_sum(&self) -> CMat {
        let d = self.metastable_remainder.dim();
        self.recurrent_projections
            .iter()
            .fold(CMat::zeros(d, d), |acc, p| acc + p.matrix())
    }

    /// `max_{i≠j} ‖p_i p_j‖`.
    pub fn orthogonality_residual(&self) -> f64 {
        let ps = &self.recurrent_projections;
        let mut worst = 0.0f64;
        for i in 0..ps.len() {
            for j in 0..ps.len() {
                if i != j {
                    worst = worst.max(linalg::op_norm(&(ps[i].matrix() * ps[j].matrix())));
                }
            }
        }
        worst
    }

    /// `‖Σ p_i + q − 1‖`.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.metastable_remainder.dim();
        linalg::op_norm(&(self.recurrent_sum() + self.metastable_remainder.matrix() - linalg::identity(d)))
    }
}

/// Transience and metastability of `1 − p`, computed both from the
/// reachability closure and from the spectrum of `y`.
pub fn is_transient_complement(model: &QuantumModel, p: &Projection, tol: &Tolerances) -> Result<ComplementStatus> {
    let limit = spectral::asymptotic_operator(model, p, tol)?;
    let d = model.dim();
    let min_eig_y = linalg::min_eigenvalue(&limit.y);
    let distance_to_one = linalg::op_norm(&(&limit.y - linalg::identity(d)));
    let closure_dim = closure::reachability_closure(model, p, tol).dim;
    let by_closure = closure_dim == d;
    let by_spectrum = min_eig_y > tol.rank_tol;
    if by_closure != by_spectrum {
        return Err(Error::InjectivityMismatch {
            closure_dim,
            dim: d,
            min_eig_y,
        });
    }
    let transient = distance_to_one <= tol.alg_tol;
    if by_spectrum && !transient {
        return Err(Error::MetastableNotTransient {
            min_eig_y,
            distance: distance_to_one,
        });
    }
    Ok(ComplementStatus {
        transient,
        metastable: by_spectrum,
        min_eig_y,
        closure_dim,
        distance_to_one,
    })
}

fn check_within(model: &QuantumModel, within: &Projection, tol: &Tolerances) -> Result<()> {
    if within.dim() != model.dim() {
        return Err(Error::Structural(format!(
            "projection has dimension {}, model has {}",
            within.dim(),
            model.dim()
        )));
    }
    if within.is_zero() {
        return Err(Error::ZeroProjection);
    }
    let verdict = projection::is_subharmonic(model, within, tol)?;
    if !verdict.verdict {
        return Err(Error::NotSubharmonic {
            residual: verdict.residual,
        });
    }
    Ok(())
}

fn minimal_with_rng(
    model: &QuantumModel,
    within: &Projection,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
) -> Result<(Projection, MinimalityCertificate)> {
    check_within(model, within, tol)?;
    let gens = model.generators();
    let start = within.basis();
    for attempt in 0..=MAX_RETRIES {
        let found = closure::minimal_invariant_subspace(&gens, &start, rng, MAX_RETRIES)?;
        let mut p = Projection::from_orthonormal_basis(&found.basis, model.dim());
        if model.kind() == ModelKind::Stochastic {
            p = p.snap_diagonal(tol.alg_tol).ok_or_else(|| {
                Error::OracleMismatch(format!(
                    "recurrent projection of a chain has off-diagonal mass {:e}",
                    p.off_diagonal_mass()
                ))
            })?;
        }
        if projection::is_subharmonic(model, &p, tol)?.verdict {
            let mut certificate = found.certificate;
            certificate.retries += attempt;
            return Ok((p, certificate));
        }
    }
    Err(Error::MinimalityNotCertified { retries: MAX_RETRIES })
}

/// A minimal sub-harmonic projection below `within`. Deterministic for a
/// given seed; different seeds may return different projections when the
/// minimal one is not unique.
pub fn minimal_subharmonic(model: &QuantumModel, within: &Projection, seed: u64, tol: &Tolerances) -> Result<Projection> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    minimal_with_rng(model, within, &mut rng, tol).map(|(p, _)| p)
}

/// Minimality certificate for a sub-harmonic `p`, or `None` when a smaller
/// nonzero sub-harmonic projection exists.
pub fn minimality(model: &QuantumModel, p: &Projection) -> Option<MinimalityCertificate> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    closure::certify_minimal(&model.generators(), &p.basis(), &mut rng)
}

/// Recurrence class of `p`, with the transience status of `1 − p` for
/// sub-harmonic `p`.
pub fn classify_projection(model: &QuantumModel, p: &Projection, tol: &Tolerances) -> Result<Classification> {
    model::ensure_valid(model, tol)?;
    let verdict = projection::is_subharmonic(model, p, tol)?;
    let mut certificate = Certificate {
        subharmonic_residual: verdict.residual,
        ..Certificate::default()
    };
    if !verdict.verdict {
        return Ok(Classification {
            label: RecurrenceLabel::NotSubharmonic,
            certificate,
        });
    }
    if p.is_zero() {
        return Ok(Classification {
            label: RecurrenceLabel::SubharmonicNonminimal,
            certificate,
        });
    }
    certificate.complement = Some(is_transient_complement(model, p, tol)?);
    let Some(minimal) = minimality(model, p) else {
        return Ok(Classification {
            label: RecurrenceLabel::SubharmonicNonminimal,
            certificate,
        });
    };
    certificate.minimality = Some(minimal);
    match ergodicity::positive_recurrence_witness(model, p, tol)? {
        Some(state) => {
            certificate.invariant_state = Some(state.into_matrix());
            Ok(Classification {
                label: RecurrenceLabel::PositiveRecurrent,
                certificate,
            })
        }
        None => Err(Error::NullRecurrent),
    }
}

fn order_key(p: &Projection) -> (core::cmp::Reverse<usize>, Vec<(i64, i64)>) {
    let m = p.matrix();
    let mut entries = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            entries.push((math::round(z.re * 1e9) as i64, math::round(z.im * 1e9) as i64));
        }
    }
    (core::cmp::Reverse(p.rank()), entries)
}

fn sum_of(projections: &[Projection], d: usize) -> Projection {
    projections
        .iter()
        .fold(Projection::zero(d), |acc, p| acc.orthogonal_sum(p))
}

/// Decomposition without the classical cross-check for chains.
pub(crate) fn resolve_unchecked(model: &QuantumModel, seed: u64, tol: &Tolerances) -> Result<ResolutionResult> {
    model::ensure_valid(model, tol)?;
    let d = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<Projection> = Vec::new();
    let mut within = Projection::identity(d);
    for _ in 0..d {
        let (p, _) = minimal_with_rng(model, &within, &mut rng, tol)?;
        found.push(p);
        let limit = spectral::asymptotic_operator(model, &sum_of(&found, d), tol)?;
        let seen = projection::range_projection(&limit.y, tol)?;
        within = seen.complement();
        if within.is_zero() {
            break;
        }
    }
    if !within.is_zero() {
        return Err(Error::Internal(format!(
            "resolution did not exhaust the space in {d} iterations"
        )));
    }
    found.sort_by_cached_key(order_key);
    let total = sum_of(&found, d);
    let y_total = spectral::asymptotic_operator(model, &total, tol)?.y;
    let remainder = total.complement();

    let mut certificates = Vec::with_capacity(found.len());
    for p in &found {
        let c = classify_projection(model, p, tol)?;
        if c.label != RecurrenceLabel::PositiveRecurrent {
            return Err(Error::Internal(format!(
                "recurrent projection classified as {}",
                c.label.name()
            )));
        }
        certificates.push(c);
    }
    let remainder_class = if remainder.is_zero() {
        None
    } else {
        let status = is_transient_complement(model, &total, tol)?;
        let label = if status.transient {
            RecurrenceLabel::Transient
        } else if status.metastable {
            RecurrenceLabel::Metastable
        } else {
            return Err(Error::Internal("remainder of the resolution is not metastable".into()));
        };
        Some(Classification {
            label,
            certificate: Certificate {
                complement: Some(status),
                ..Certificate::default()
            },
        })
    };

    let result = ResolutionResult {
        recurrent_projections: found,
        metastable_remainder: remainder,
        y_total,
        certificates,
        remainder: remainder_class,
        seed,
    };
    verify(&result, tol)?;
    Ok(result)
}

fn verify(result: &ResolutionResult, tol: &Tolerances) -> Result<()> {
    let ps = &result.recurrent_projections;
    let orth = result.orthogonality_residual();
    if orth > tol.alg_tol {
        return Err(Error::Internal(format!("recurrent projections not orthogonal ({orth:e})")));
    }
    for i in 0..ps.len() {
        for j in (i + 1)..ps.len() {
            let (a, b) = (ps[i].matrix(), ps[j].matrix());
            let comm = linalg::op_norm(&(a * b - b * a));
            if comm > tol.alg_tol {
                return Err(Error::Internal(format!("recurrent projections do not commute ({comm:e})")));
            }
        }
    }
    let complete = result.completeness_residual();
    if complete > tol.alg_tol {
        return Err(Error::Internal(format!("projections do not sum to the identity ({complete:e})")));
    }
    let min_eig = linalg::min_eigenvalue(&result.y_total);
    if min_eig <= tol.rank_tol {
        return Err(Error::Internal(format!("y of the recurrent sum is not injective ({min_eig:e})")));
    }
    Ok(())
}

/// Orthogonal recurrent projections `p_i` and the metastable remainder
/// `q = 1 − Σ p_i`. Chains are cross-checked against the graph oracle.
pub fn resolve(model: &QuantumModel, seed: u64, tol: &Tolerances) -> Result<ResolutionResult> {
    let result = resolve_unchecked(model, seed, tol)?;
    if let Some(matrix) = model.stochastic_matrix() {
        let oracle = classical::classical_classify(matrix);
        if let Some(diff) = classical::resolution_diff(&oracle, &result) {
            return Err(Error::OracleMismatch(diff));
        }
    }
    Ok(result)
}

fn commutation_operators(model: &QuantumModel) -> Vec<CMat> {
    let mut ops = Vec::new();
    match (model.effective_hamiltonian(), model.jumps()) {
        (Some(h), Some(jumps)) => {
            ops.push(h);
            for l in jumps {
                ops.push(l.clone());
                ops.push(l.adjoint());
            }
        }
        _ => {
            for l in model.kraus_ops().unwrap_or(&[]) {
                ops.push(l.clone());
                ops.push(l.adjoint());
            }
        }
    }
    ops
}

/// Dimension of `{x : [x, A] = 0}` over `A ∈ {H, L_k, L_k†}` (generators) or
/// `{l_k, l_k†}` (channels).
pub fn commutant_dimension(model: &QuantumModel, tol: &Tolerances) -> usize {
    let d = model.dim();
    let ops = commutation_operators(model);
    if ops.is_empty() {
        return d * d;
    }
    let id = linalg::identity(d);
    let mut stacked = CMat::zeros(ops.len() * d * d, d * d);
    for (k, a) in ops.iter().enumerate() {
        let block = linalg::kron(&a.transpose(), &id) - linalg::kron(&id, a);
        stacked.view_mut((k * d * d, 0), (d * d, d * d)).copy_from(&block);
    }
    let scale = linalg::op_norm(&stacked).max(1.0);
    linalg::kernel(&stacked, tol.rank_tol * scale).ncols()
}

/// Both irreducibility certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct Irreducibility {
    pub irreducible: bool,
    pub commutant_dimension: usize,
    /// A minimal harmonic projection; the identity when irreducible.
    pub harmonic_projection: Projection,
}

/// Irreducibility from the commutant and from a search for a nontrivial
/// harmonic projection (a minimal subspace invariant under the generators
/// and their adjoints); the two must agree.
pub fn irreducibility(model: &QuantumModel, tol: &Tolerances) -> Result<Irreducibility> {
    model::ensure_valid(model, tol)?;
    let d = model.dim();
    let commutant_dim = commutant_dimension(model, tol);
    let mut gens = model.generators();
    let adjoints: Vec<CMat> = gens.iter().map(|g| g.adjoint()).collect();
    gens.extend(adjoints);
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let found = closure::minimal_invariant_subspace(&gens, &linalg::identity(d), &mut rng, MAX_RETRIES)?;
    let p = Projection::from_orthonormal_basis(&found.basis, d);
    if !projection::is_harmonic(model, &p, tol)? {
        return Err(Error::Internal("reducing subspace is not harmonic".into()));
    }
    let harmonic_rank = p.rank();
    if (commutant_dim == 1) != (harmonic_rank == d) {
        return Err(Error::IrreducibilityMismatch {
            commutant_dim,
            harmonic_rank,
            dim: d,
        });
    }
    Ok(Irreducibility {
        irreducible: harmonic_rank == d,
        commutant_dimension: commutant_dim,
        harmonic_projection: p,
    })
}

pub fn is_irreducible(model: &QuantumModel, tol: &Tolerances) -> Result<bool> {
    irreducibility(model, tol).map(|r| r.irreducible)
}

/// Human-readable summary of a resolution, used in error details.
pub fn describe(result: &ResolutionResult) -> String {
    let ranks: Vec<String> = result
        .recurrent_projections
        .iter()
        .map(|p| format!("{}", p.rank()))
        .collect();
    format!(
        "{} recurrent projection(s) of rank [{}], remainder rank {}",
        ranks.len(),
        ranks.join(", "),
        result.metastable_remainder.rank()
    )
}
