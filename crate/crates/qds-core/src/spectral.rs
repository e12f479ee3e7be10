//! Spectral analysis of superoperators: eigenvalue clusters and their
//! projections, time evolution, and the limit `y = lim τ_t(p)` of a
//! sub-harmonic projection.
//!
//! `y` is obtained by applying the ergodic spectral projection (eigenvalue 1
//! for a step map, 0 for a generator) to `p`; the monotone limit coincides
//! with the Cesàro mean. It is cross-checked against direct evolution to a
//! horizon derived from the spectral gap.

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::linalg::Schur;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, re, CMat, C64};
use crate::math;
use crate::model::{self, QuantumModel, Superoperator, TimeKind, Tolerances};
use crate::projection::{self, Projection};
use crate::random;
use crate::{Error, Result};

/// Evolution time: continuous for generators, a step count for maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Time {
    Continuous(f64),
    Discrete(u64),
}

impl Time {
    pub fn as_f64(self) -> f64 {
        match self {
            Time::Continuous(t) => t,
            Time::Discrete(n) => n as f64,
        }
    }
}

/// A group of numerically equal eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub value: C64,
    pub multiplicity: usize,
}

/// Eigenvalues, clusters and the quantities derived from them, without
/// spectral projections.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub time_kind: TimeKind,
    /// All eigenvalues, sorted by descending real part then imaginary part.
    pub eigenvalues: Vec<C64>,
    pub clusters: Vec<Cluster>,
    /// Indices into `clusters` on the boundary (`Re λ = 0` resp. `|λ| = 1`).
    pub peripheral: Vec<usize>,
    /// Index into `clusters` of the ergodic eigenvalue (0 resp. 1).
    pub ergodic: usize,
}

impl Spectrum {
    pub fn ergodic_multiplicity(&self) -> usize {
        self.clusters[self.ergodic].multiplicity
    }

    /// Distance of the non-peripheral spectrum from the boundary:
    /// `−max Re λ` for a generator, `1 − max |λ|` for a step map.
    /// Infinite when every eigenvalue is peripheral.
    pub fn gap(&self) -> f64 {
        match self.time_kind {
            TimeKind::ContinuousGenerator => {
                let m = self.sub_peripheral().map(|c| c.value.re).fold(f64::NEG_INFINITY, f64::max);
                -m
            }
            TimeKind::DiscreteStep => 1.0 - self.sub_peripheral_radius(),
        }
    }

    /// Largest modulus outside the peripheral set (step maps).
    pub fn sub_peripheral_radius(&self) -> f64 {
        self.sub_peripheral().map(|c| c.value.norm()).fold(0.0, f64::max)
    }

    /// Asymptotic decay rate of the non-peripheral part: the gap for a
    /// generator, `−ln r` per step for a map.
    pub fn decay_rate(&self) -> f64 {
        match self.time_kind {
            TimeKind::ContinuousGenerator => self.gap(),
            TimeKind::DiscreteStep => {
                let r = self.sub_peripheral_radius();
                if r > 0.0 {
                    -math::ln(r)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn sub_peripheral(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.peripheral.contains(i))
            .map(|(_, c)| c)
    }

    /// Time after which the non-peripheral part has decayed below `target`.
    ///
    /// Continuous: `max(20, ln(100/target) + 10) / gap`. Discrete:
    /// `ln(target/100) / ln r` steps plus the matrix size, capped at 10⁶.
    pub fn horizon(&self, target: f64) -> Time {
        let n = self.eigenvalues.len() as u64;
        match self.time_kind {
            TimeKind::ContinuousGenerator => {
                let gap = self.gap();
                if !gap.is_finite() {
                    return Time::Continuous(0.0);
                }
                let factor = (math::ln(100.0 / target) + 10.0).max(20.0);
                Time::Continuous(factor / gap)
            }
            TimeKind::DiscreteStep => {
                let r = self.sub_peripheral_radius();
                if r <= f64::MIN_POSITIVE {
                    return Time::Discrete(n.max(1));
                }
                let steps = math::ceil(math::ln(target / 100.0) / math::ln(r)).max(1.0);
                let steps = (steps as u64).saturating_add(n);
                Time::Discrete(steps.min(1_000_000))
            }
        }
    }
}

/// Spectral projection of one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProjection {
    pub cluster: usize,
    pub matrix: CMat,
    /// The cluster carries no Jordan block.
    pub semisimple: bool,
}

/// Full spectral decomposition of a superoperator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub spectrum: Spectrum,
    /// One projection per cluster, in cluster order.
    pub projections: Vec<SpectralProjection>,
}

impl SpectralData {
    pub fn ergodic_projection(&self) -> &CMat {
        &self.projections[self.spectrum.ergodic].matrix
    }
}

pub(crate) fn raw_eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n == 1 {
        return Ok(alloc::vec![m[(0, 0)]]);
    }
    if let Some(values) = schur_diagonal(m) {
        return Ok(values);
    }
    // Shifted QR can cycle on permutation-like matrices; a unitary change
    // of basis breaks the symmetry without moving the eigenvalues.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5343_4855);
    for _ in 0..4 {
        let u = random::random_unitary(&mut rng, n);
        if let Some(values) = schur_diagonal(&(&u * m * u.adjoint())) {
            return Ok(values);
        }
    }
    Err(Error::Internal("eigenvalue iteration did not converge".into()))
}

fn schur_diagonal(m: &CMat) -> Option<Vec<C64>> {
    let n = m.nrows();
    // Deflation at machine epsilon can stall on exactly repeated eigenvalues.
    for eps in [f64::EPSILON, 1e-15, 1e-14, 1e-13, 1e-12] {
        if let Some(schur) = Schur::try_new(m.clone(), eps, 1_000 * n) {
            let (_, t) = schur.unpack();
            return Some((0..n).map(|i| t[(i, i)]).collect());
        }
    }
    None
}

/// Groups eigenvalues closer than `radius` (single linkage).
pub(crate) fn cluster(values: &[C64], radius: f64) -> Vec<Cluster> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(i),
            None => groups.push((root, alloc::vec![i])),
        }
    }
    groups
        .into_iter()
        .map(|(_, members)| {
            let sum = members.iter().fold(re(0.0), |acc, &i| acc + values[i]);
            Cluster {
                value: sum / re(members.len() as f64),
                multiplicity: members.len(),
            }
        })
        .collect()
}

fn sort_key(a: &C64, b: &C64) -> core::cmp::Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

/// Eigenvalues and clusters of a superoperator.
pub fn spectrum(s: &Superoperator, tol: &Tolerances) -> Result<Spectrum> {
    let mut eigenvalues = raw_eigenvalues(&s.matrix)?;
    eigenvalues.sort_by(sort_key);
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let radius = tol.cluster_radius * scale;
    let mut clusters = cluster(&eigenvalues, radius);
    clusters.sort_by(|a, b| sort_key(&a.value, &b.value));
    let target = re(s.time_kind.ergodic_eigenvalue());
    let ergodic = clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| (c.value - target).norm() <= radius * (c.multiplicity as f64).max(1.0))
        .min_by(|a, b| {
            (a.1.value - target)
                .norm()
                .total_cmp(&(b.1.value - target).norm())
        })
        .map(|(i, _)| i)
        .ok_or(Error::MissingErgodicEigenvalue)?;
    let peripheral = clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| match s.time_kind {
            TimeKind::ContinuousGenerator => c.value.re.abs() <= radius,
            TimeKind::DiscreteStep => (c.value.norm() - 1.0).abs() <= radius,
        })
        .map(|(i, _)| i)
        .collect();
    Ok(Spectrum {
        time_kind: s.time_kind,
        eigenvalues,
        clusters,
        peripheral,
        ergodic,
    })
}

/// Riesz projection onto the generalized eigenspace of `value`, whose
/// algebraic multiplicity is `multiplicity`: `V (W†V)⁻¹ W†` with `V`, `W`
/// the right and left kernels of `(S − λ)^k` for the smallest `k` that
/// exposes the full multiplicity.
fn riesz_projection(m: &CMat, value: C64, multiplicity: usize) -> Option<(CMat, bool)> {
    let n = m.nrows();
    let shifted = m - linalg::identity(n) * value;
    let norm = linalg::op_norm(&shifted);
    if norm == 0.0 || multiplicity == n {
        let scale = linalg::op_norm(m).max(1.0);
        return Some((linalg::identity(n), norm <= 1e-7 * scale));
    }
    let step = &shifted * re(1.0 / norm);
    let mut power = step.clone();
    for k in 1..=multiplicity {
        let (right, left, worst) = linalg::smallest_singular_subspaces(&power, multiplicity);
        let top = linalg::op_norm(&power);
        if worst <= 1e-7 * top.max(f64::MIN_POSITIVE) {
            let gram = left.adjoint() * &right;
            let svd = linalg::svd_sorted(&gram);
            let smallest = svd.singular_values.last().copied().unwrap_or(0.0);
            if smallest > 1e-10 {
                let inv = gram.try_inverse()?;
                return Some((&right * inv * left.adjoint(), k == 1));
            }
        }
        if k < multiplicity {
            power = &power * &step;
            let pn = linalg::op_norm(&power);
            if pn > 0.0 {
                power /= re(pn);
            }
        }
    }
    None
}

/// Eigen-decomposition with one projection per eigenvalue cluster.
/// Fails when the ergodic eigenvalue carries a Jordan block.
pub fn spectral_split(s: &Superoperator, tol: &Tolerances) -> Result<SpectralData> {
    let spectrum = spectrum(s, tol)?;
    let mut projections = Vec::with_capacity(spectrum.clusters.len());
    for (i, c) in spectrum.clusters.iter().enumerate() {
        let value = if i == spectrum.ergodic {
            re(s.time_kind.ergodic_eigenvalue())
        } else {
            c.value
        };
        let (matrix, semisimple) = riesz_projection(&s.matrix, value, c.multiplicity).ok_or_else(|| {
            if i == spectrum.ergodic {
                Error::NonDiagonalizablePeripheral
            } else {
                Error::Internal("spectral projection of a cluster failed".into())
            }
        })?;
        if i == spectrum.ergodic && !semisimple {
            return Err(Error::NonDiagonalizablePeripheral);
        }
        projections.push(SpectralProjection {
            cluster: i,
            matrix,
            semisimple,
        });
    }
    Ok(SpectralData {
        spectrum,
        projections,
    })
}

/// Projection onto the fixed points of a step map (kernel of a generator)
/// along the range of `S − λ`.
pub fn ergodic_projection(s: &Superoperator, tol: &Tolerances) -> Result<(CMat, Spectrum)> {
    let spectrum = spectrum(s, tol)?;
    let m = spectrum.ergodic_multiplicity();
    let (matrix, semisimple) = riesz_projection(&s.matrix, re(s.time_kind.ergodic_eigenvalue()), m)
        .ok_or(Error::NonDiagonalizablePeripheral)?;
    if !semisimple {
        return Err(Error::NonDiagonalizablePeripheral);
    }
    Ok((matrix, spectrum))
}

/// Propagator `e^{tS}` or `S^n` of a superoperator.
pub fn propagator(s: &Superoperator, time: Time) -> Result<CMat> {
    match (s.time_kind, time) {
        (TimeKind::ContinuousGenerator, Time::Continuous(t)) => {
            if t.is_nan() {
                return Err(Error::Structural("time is not a number".into()));
            }
            if t < 0.0 {
                return Err(Error::NegativeTime);
            }
            Ok(linalg::expm(&(&s.matrix * re(t))))
        }
        (TimeKind::DiscreteStep, Time::Discrete(n)) => Ok(linalg::matrix_power(&s.matrix, n)),
        (TimeKind::ContinuousGenerator, Time::Discrete(_)) => Err(Error::Structural(
            "continuous-time model needs a real time, not a step count".into(),
        )),
        (TimeKind::DiscreteStep, Time::Continuous(_)) => Err(Error::Structural(
            "discrete-time model needs a step count, not a real time".into(),
        )),
    }
}

fn evolve_with(s: &Superoperator, x: &CMat, time: Time, tol: &Tolerances) -> Result<CMat> {
    let prop = propagator(s, time)?;
    let shifted = Superoperator {
        dim: s.dim,
        matrix: prop,
        picture: s.picture,
        time_kind: TimeKind::DiscreteStep,
    };
    model::apply_map(&shifted, x, tol)
}

/// `τ_t(x)` by exponentiating the generator, or `τ^n(x)` by powers of the step.
pub fn evolve_heisenberg(model: &QuantumModel, x: &CMat, time: Time, tol: &Tolerances) -> Result<CMat> {
    let s = model::heisenberg_superoperator(model, tol)?;
    evolve_with(&s, x, time, tol)
}

/// Predual (Schrödinger picture) evolution of a density matrix.
pub fn evolve_predual(model: &QuantumModel, rho: &CMat, time: Time, tol: &Tolerances) -> Result<CMat> {
    let s = model::predual_superoperator(model, tol)?;
    evolve_with(&s, rho, time, tol)
}

/// The limit `y` of `τ_t(p)` together with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticLimit {
    pub y: CMat,
    /// Horizon used for the evolution cross-check.
    pub horizon: Time,
    /// `‖y − τ_T(p)‖` at the horizon.
    pub disagreement: f64,
    /// `‖py − p‖ + ‖yp − p‖`.
    pub corner_residual: f64,
    /// `‖τ_Δ(y) − y‖` (step map) or `‖L(y)‖` (generator).
    pub invariance_residual: f64,
    pub gap: f64,
}

/// `y = s-lim τ_t(p)` for a sub-harmonic projection `p`.
pub fn asymptotic_operator(model: &QuantumModel, p: &Projection, tol: &Tolerances) -> Result<AsymptoticLimit> {
    let verdict = projection::is_subharmonic(model, p, tol)?;
    if !verdict.verdict {
        return Err(Error::NotSubharmonic {
            residual: verdict.residual,
        });
    }
    let s = model::heisenberg_unchecked(model);
    let d = model.dim();
    let (ergodic, spectrum) = ergodic_projection(&s, tol)?;
    let y = linalg::hermitian_part(&linalg::unvectorize(
        &(&ergodic * linalg::vectorize(p.matrix())),
        d,
    ));
    let horizon = spectrum.horizon(tol.conv_tol);
    let evolved = evolve_with(&s, p.matrix(), horizon, tol)?;
    let disagreement = linalg::op_norm(&(&y - &evolved));
    if disagreement > tol.alg_tol {
        return Err(Error::LimitCrossCheck {
            disagreement,
            spectral: Box::new(y),
            evolved: Box::new(evolved),
        });
    }
    let pm = p.matrix();
    let corner_residual = linalg::op_norm(&(pm * &y - pm)) + linalg::op_norm(&(&y * pm - pm));
    let invariance_residual = projection::harmonic_residual(model, &y);
    Ok(AsymptoticLimit {
        y,
        horizon,
        disagreement,
        corner_residual,
        invariance_residual,
        gap: spectrum.gap(),
    })
}
