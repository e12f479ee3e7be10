//! Invariant states, positive recurrence and strong ergodicity.
//!
//! Invariant states come from the ergodic projection of the predual: for a
//! sub-harmonic `p` of rank `m`, the projection applied to `p/m` is the
//! invariant state with the largest support inside `p`.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, re, CMat};
use crate::model::{self, QuantumModel, TimeKind, Tolerances};
use crate::projection::{self, Projection};
use crate::random;
use crate::resolution;
use crate::spectral::{self, Spectrum, Time};
use crate::{Error, Result, DEFAULT_SEED};

/// Random initial states used by the dynamic ergodicity check.
const DYNAMIC_SAMPLES: usize = 5;

/// Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
}

impl DensityMatrix {
    pub fn new(matrix: CMat, tol: &Tolerances) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Structural("density matrix must be square and nonempty".into()));
        }
        let residual = linalg::hermiticity_residual(&matrix);
        if residual > tol.alg_tol {
            return Err(Error::NotHermitian { residual });
        }
        let matrix = linalg::hermitian_part(&matrix);
        let min_eig = linalg::min_eigenvalue(&matrix);
        if min_eig < -tol.alg_tol {
            return Err(Error::NotPositive { min_eig });
        }
        let trace = linalg::trace(&matrix).re;
        if (trace - 1.0).abs() > tol.alg_tol {
            return Err(Error::Structural(format!("density matrix has trace {trace}")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `‖S ρ‖` for a generator, `‖S ρ − ρ‖` for a step map.
fn fixed_point_residual(s: &model::Superoperator, rho: &CMat) -> f64 {
    let image = linalg::unvectorize(&(&s.matrix * linalg::vectorize(rho)), s.dim);
    match s.time_kind {
        TimeKind::ContinuousGenerator => linalg::op_norm(&image),
        TimeKind::DiscreteStep => linalg::op_norm(&(image - rho)),
    }
}

fn apply_projection(erg: &CMat, x: &CMat, d: usize) -> CMat {
    linalg::hermitian_part(&linalg::unvectorize(&(erg * linalg::vectorize(x)), d))
}

fn normalized_state(x: CMat, tol: &Tolerances) -> Result<DensityMatrix> {
    let trace = linalg::trace(&x).re;
    if trace <= 0.0 {
        return Err(Error::Internal("invariant state has vanishing trace".into()));
    }
    DensityMatrix::new(x / re(trace), tol)
}

/// Invariant state `P_erg(p / rank p)` carried by a sub-harmonic `p`.
pub fn stationary_state_on(model: &QuantumModel, p: &Projection, tol: &Tolerances) -> Result<DensityMatrix> {
    if p.is_zero() {
        return Err(Error::ZeroProjection);
    }
    let s = model::predual_superoperator(model, tol)?;
    let (erg, _) = spectral::ergodic_projection(&s, tol)?;
    let seed = p.matrix() / re(p.rank() as f64);
    normalized_state(apply_projection(&erg, &seed, model.dim()), tol)
}

/// An invariant state whose support is exactly `p`, if one exists.
pub fn positive_recurrence_witness(
    model: &QuantumModel,
    p: &Projection,
    tol: &Tolerances,
) -> Result<Option<DensityMatrix>> {
    let state = stationary_state_on(model, p, tol)?;
    let support = projection::range_projection(state.matrix(), tol)?;
    Ok((support.distance(p) <= tol.alg_tol).then_some(state))
}

/// Whether the recurrent projection `p` supports an invariant state. Fails
/// when `p` is not minimal sub-harmonic.
pub fn is_positive_recurrent(model: &QuantumModel, p: &Projection, tol: &Tolerances) -> Result<bool> {
    model::ensure_valid(model, tol)?;
    if p.is_zero() || !projection::is_subharmonic(model, p, tol)?.verdict || resolution::minimality(model, p).is_none() {
        return Err(Error::NotRecurrent);
    }
    Ok(positive_recurrence_witness(model, p, tol)?.is_some())
}

/// Range projection of a state.
pub fn support_projection(rho: &DensityMatrix, tol: &Tolerances) -> Result<Projection> {
    projection::range_projection(rho.matrix(), tol)
}

/// Support of an invariant state, asserted sub-harmonic.
pub fn invariant_support(model: &QuantumModel, rho: &DensityMatrix, tol: &Tolerances) -> Result<Projection> {
    let p = support_projection(rho, tol)?;
    let verdict = projection::is_subharmonic(model, &p, tol)?;
    if !verdict.verdict {
        return Err(Error::Internal(format!(
            "support of an invariant state is not sub-harmonic (residual {:e})",
            verdict.residual
        )));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantStates {
    /// Hermitian basis of the predual fixed-point space.
    pub basis: Vec<CMat>,
    /// Extremal invariant states, one per recurrent projection.
    pub states: Vec<DensityMatrix>,
    /// Largest fixed-point residual over basis and states.
    pub residual: f64,
    pub seed: u64,
}

/// Fixed-point space of the predual and its extremal states, using the
/// default seed for the underlying decomposition.
pub fn invariant_states(model: &QuantumModel, tol: &Tolerances) -> Result<InvariantStates> {
    invariant_states_seeded(model, DEFAULT_SEED, tol)
}

pub fn invariant_states_seeded(model: &QuantumModel, seed: u64, tol: &Tolerances) -> Result<InvariantStates> {
    let d = model.dim();
    let s = model::predual_superoperator(model, tol)?;
    let (erg, spectrum) = spectral::ergodic_projection(&s, tol)?;
    let k = spectrum.ergodic_multiplicity();
    let columns = linalg::orthonormal_columns(&erg, 1e-8);
    let mut chosen: Vec<CMat> = Vec::new();
    let mut span = Vec::new();
    for col in linalg::matrix_to_columns(&columns) {
        let x = linalg::unvectorize(&col, d);
        for candidate in [linalg::hermitian_part(&x), linalg::hermitian_part(&(x * linalg::c(0.0, 1.0)))] {
            let n = candidate.norm();
            if chosen.len() < k && n > 1e-8 && linalg::extend_orthonormal(&mut span, &(linalg::vectorize(&candidate) / re(n)), 1e-6) {
                chosen.push(candidate / re(n));
            }
        }
    }
    if chosen.is_empty() {
        return Err(Error::Internal("predual has no fixed points".into()));
    }
    let result = resolution::resolve(model, seed, tol)?;
    let mut states = Vec::with_capacity(result.certificates.len());
    for c in result.certificates {
        let state = c
            .certificate
            .invariant_state
            .ok_or_else(|| Error::Internal("recurrent projection without invariant state".into()))?;
        states.push(DensityMatrix::new(state, tol)?);
    }
    let residual = chosen
        .iter()
        .chain(states.iter().map(|r| r.matrix()))
        .map(|x| fixed_point_residual(&s, x))
        .fold(0.0, f64::max);
    if residual > tol.alg_tol {
        return Err(Error::Internal(format!("invariant state residual {residual:e}")));
    }
    Ok(InvariantStates {
        basis: chosen,
        states,
        residual,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongErgodicity {
    pub holds: bool,
    /// Distance of the sub-peripheral spectrum from the boundary.
    pub gap: f64,
    /// Asymptotic decay rate per unit time (per step for maps).
    pub decay_rate: f64,
    pub phi0: Option<DensityMatrix>,
    pub horizon: Time,
    /// Worst trace-norm distance to `φ₀` at the horizon (when it holds), or
    /// the spread of the evolved samples (when it does not).
    pub dynamic_distance: f64,
    pub ergodic_multiplicity: usize,
    pub peripheral_count: usize,
}

fn spectral_verdict(spectrum: &Spectrum) -> bool {
    spectrum.ergodic_multiplicity() == 1 && spectrum.peripheral.len() == 1
}

/// Strong ergodicity: a simple ergodic eigenvalue and no other peripheral
/// eigenvalue, confirmed by evolving random states to the horizon.
pub fn strong_ergodicity_check(model: &QuantumModel, tol: &Tolerances) -> Result<StrongErgodicity> {
    let d = model.dim();
    let s = model::predual_superoperator(model, tol)?;
    let (erg, spectrum) = spectral::ergodic_projection(&s, tol)?;
    let holds = spectral_verdict(&spectrum);
    let horizon = spectrum.horizon(tol.conv_tol);
    let prop = spectral::propagator(&s, horizon)?;
    let step = match s.time_kind {
        TimeKind::DiscreteStep => Time::Discrete(1),
        TimeKind::ContinuousGenerator => Time::Continuous(1.0 / linalg::one_norm(&s.matrix).max(1.0)),
    };
    let extra = spectral::propagator(&s, step)?;
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let evolved: Vec<CMat> = (0..DYNAMIC_SAMPLES)
        .map(|_| apply_projection(&prop, &random::random_density(&mut rng, d), d))
        .collect();

    let (phi0, dynamic_distance, dynamic_holds) = if holds {
        let phi0 = normalized_state(apply_projection(&erg, &(linalg::identity(d) / re(d as f64)), d), tol)?;
        let worst = evolved
            .iter()
            .map(|r| linalg::trace_norm(&(r - phi0.matrix())))
            .fold(0.0, f64::max);
        (Some(phi0), worst, worst <= tol.alg_tol)
    } else {
        let spread = evolved
            .iter()
            .map(|r| linalg::trace_norm(&(r - &evolved[0])))
            .fold(0.0, f64::max);
        let drift = evolved
            .iter()
            .map(|r| linalg::trace_norm(&(apply_projection(&extra, r, d) - r)))
            .fold(0.0, f64::max);
        let distance = spread.max(drift);
        (None, distance, distance <= tol.alg_tol)
    };
    if holds != dynamic_holds {
        return Err(Error::ErgodicityMismatch {
            spectral: holds,
            distance: dynamic_distance,
        });
    }
    Ok(StrongErgodicity {
        holds,
        gap: spectrum.gap(),
        decay_rate: spectrum.decay_rate(),
        phi0,
        horizon,
        dynamic_distance,
        ergodic_multiplicity: spectrum.ergodic_multiplicity(),
        peripheral_count: spectrum.peripheral.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Theorem31 {
    /// Strong ergodicity of the full dynamics.
    pub full: bool,
    /// Strong ergodicity of the dynamics reduced to `p`.
    pub reduced: bool,
    /// `τ_t(p) → 1`.
    pub y_is_one: bool,
    /// `full == reduced` whenever `y_is_one`.
    pub consistent: bool,
}

/// For the support `p` of an invariant state with `τ_t(p) → 1`, strong
/// ergodicity of the full and of the reduced dynamics coincide.
pub fn theorem31_equivalence(model: &QuantumModel, p: &Projection, tol: &Tolerances) -> Result<Theorem31> {
    model::ensure_valid(model, tol)?;
    if p.is_zero() || !projection::is_subharmonic(model, p, tol)?.verdict {
        return Err(Error::NotInvariantSupport);
    }
    if positive_recurrence_witness(model, p, tol)?.is_none() {
        return Err(Error::NotInvariantSupport);
    }
    let full = strong_ergodicity_check(model, tol)?.holds;
    let reduced_model = projection::reduce_model(model, p, tol)?;
    let reduced = strong_ergodicity_check(&reduced_model, tol)?.holds;
    let y_is_one = resolution::is_transient_complement(model, p, tol)?.transient;
    Ok(Theorem31 {
        full,
        reduced,
        y_is_one,
        consistent: !y_is_one || full == reduced,
    })
}
