//! Invariant-subspace closures of operator families.
//!
//! A subspace is invariant under the generators `{l_k}` (resp. `{Y, L_k}`)
//! exactly when its projection is sub-harmonic, so the smallest sub-harmonic
//! projection above a vector is its forward Krylov closure. Closures under the
//! adjoint family describe which directions `τ_t(p)` can ever see.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::linalg::{self, re, CMat, CVec};
use crate::model::{QuantumModel, Tolerances};
use crate::projection::Projection;
use crate::random;
use crate::spectral;
use crate::{Error, Result};

/// Relative threshold for closures inside the minimal-subspace search, where
/// seed vectors carry eigenvector round-off.
const SEARCH_TOL: f64 = 1e-7;

/// Random interior vectors whose closures must fill a candidate.
const VERIFY_VECTORS: usize = 8;

/// Largest dimension for which the algebra-dimension certificate is computed.
const BURNSIDE_LIMIT: usize = 24;

/// `max(1, max_k ‖g_k‖)`.
pub fn generator_scale(gens: &[CMat]) -> f64 {
    gens.iter().map(linalg::op_norm).fold(1.0, f64::max)
}

/// Orthonormal basis of the smallest subspace containing `seeds` and
/// invariant under every operator in `gens`. Directions with residual below
/// `abs_tol` are treated as already contained.
pub fn invariant_closure(gens: &[CMat], seeds: &[CVec], abs_tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for s in seeds {
        let n = s.norm();
        if n > abs_tol {
            linalg::extend_orthonormal(&mut basis, &(s / re(n)), abs_tol);
        }
    }
    let dim = seeds.first().map_or(0, |s| s.len());
    let mut next = 0;
    while next < basis.len() && basis.len() < dim {
        let v = basis[next].clone();
        for g in gens {
            linalg::extend_orthonormal(&mut basis, &(g * &v), abs_tol);
            if basis.len() == dim {
                break;
            }
        }
        next += 1;
    }
    basis
}

/// Smallest sub-harmonic projection whose range contains the columns of
/// `vectors`.
pub fn forward_closure(model: &QuantumModel, vectors: &CMat, tol: &Tolerances) -> Projection {
    let gens = model.generators();
    let abs_tol = tol.rank_tol * generator_scale(&gens);
    let basis = invariant_closure(&gens, &linalg::matrix_to_columns(vectors), abs_tol);
    Projection::from_orthonormal_basis(&linalg::columns_to_matrix(model.dim(), &basis), model.dim())
}

/// Reachability closure: the smallest subspace containing `range(p)` and
/// invariant under the adjoint generators.
#[derive(Debug, Clone, PartialEq)]
pub struct Reachability {
    pub basis: CMat,
    pub dim: usize,
}

impl Reachability {
    pub fn projection(&self) -> Projection {
        Projection::from_orthonormal_basis(&self.basis, self.basis.nrows())
    }
}

pub fn reachability_closure(model: &QuantumModel, p: &Projection, tol: &Tolerances) -> Reachability {
    let gens: Vec<CMat> = model.generators().iter().map(|g| g.adjoint()).collect();
    let abs_tol = tol.rank_tol * generator_scale(&gens);
    let seeds = linalg::matrix_to_columns(&p.basis());
    let basis = invariant_closure(&gens, &seeds, abs_tol);
    Reachability {
        dim: basis.len(),
        basis: linalg::columns_to_matrix(model.dim(), &basis),
    }
}

/// Dimension of the unital algebra generated by `gens` (capped at `m²`).
/// Equal to `m²` exactly when the family has no proper invariant subspace.
pub fn algebra_dimension(gens: &[CMat]) -> usize {
    algebra_basis(gens).len()
}

fn algebra_basis(gens: &[CMat]) -> Vec<CMat> {
    let m = gens.first().map_or(0, |g| g.nrows());
    if m == 0 {
        return Vec::new();
    }
    let full = m * m;
    let mut vecs: Vec<CVec> = Vec::new();
    let mut words: Vec<CMat> = Vec::new();
    let push = |w: CMat, vecs: &mut Vec<CVec>, words: &mut Vec<CMat>| {
        let v = linalg::vectorize(&w);
        let n = v.norm();
        if n <= 1e-12 {
            return;
        }
        if linalg::extend_orthonormal(vecs, &(v / re(n)), SEARCH_TOL) {
            let last = vecs.last().expect("just pushed");
            words.push(linalg::unvectorize(last, m));
        }
    };
    push(linalg::identity(m), &mut vecs, &mut words);
    let mut next = 0;
    while next < words.len() && words.len() < full {
        let w = words[next].clone();
        for g in gens {
            push(g * &w, &mut vecs, &mut words);
            if words.len() == full {
                break;
            }
        }
        next += 1;
    }
    words
}

/// Evidence that a subspace has no proper invariant subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityCertificate {
    pub dim: usize,
    /// Dimension of the generated algebra on the subspace, when computed.
    pub algebra_dimension: Option<usize>,
    /// Random interior vectors whose closure filled the subspace.
    pub random_closures: usize,
    /// Reseedings used before the certificate was obtained.
    pub retries: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalSubspace {
    /// Orthonormal basis (columns) in the ambient space.
    pub basis: CMat,
    pub certificate: MinimalityCertificate,
}

fn compress(gens: &[CMat], basis: &CMat) -> Vec<CMat> {
    gens.iter().map(|g| basis.adjoint() * g * basis).collect()
}

/// Generic element of the algebra: a seeded combination of the generators
/// and their pairwise products, or of a supplied algebra basis.
fn generic_element<R: Rng + ?Sized>(rng: &mut R, gens: &[CMat], algebra: Option<&[CMat]>) -> CMat {
    let m = gens[0].nrows();
    let mut a = CMat::zeros(m, m);
    match algebra {
        Some(words) => {
            for w in words {
                a += w * random::random_complex(rng);
            }
        }
        None => {
            for g in gens {
                a += g * random::random_complex(rng);
                for h in gens {
                    a += g * h * random::random_complex(rng);
                }
            }
        }
    }
    a
}

/// Eigenvector candidates of `a`: per eigenvalue cluster, the near-kernel of
/// `a − λ`. Degenerate eigenspaces contribute random combinations first,
/// then their basis vectors.
fn eigen_candidates<R: Rng + ?Sized>(rng: &mut R, a: &CMat) -> Result<Vec<CVec>> {
    let m = a.nrows();
    let values = spectral::raw_eigenvalues(a)?;
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let clusters = spectral::cluster(&values, 1e-7 * scale);
    let mut out = Vec::new();
    for c in clusters {
        let shifted = a - linalg::identity(m) * c.value;
        let svd = linalg::svd_sorted(&shifted);
        let cutoff = 1e-6 * linalg::op_norm(a).max(1.0);
        let keep = svd
            .singular_values
            .iter()
            .rev()
            .take(c.multiplicity)
            .filter(|&&s| s <= cutoff)
            .count()
            .max(1);
        let (right, _, _) = linalg::smallest_singular_subspaces(&shifted, keep);
        let cols = linalg::matrix_to_columns(&right);
        if cols.len() > 1 {
            for _ in 0..2 {
                let mut v = CVec::zeros(m);
                for col in &cols {
                    v += col * random::random_complex(rng);
                }
                out.push(v);
            }
        }
        out.extend(cols);
    }
    Ok(out)
}

fn random_interior<R: Rng + ?Sized>(rng: &mut R, m: usize) -> CVec {
    random::random_vector(rng, m)
}

enum Step {
    Shrink(CMat),
    Stuck,
}

/// A smallest closure strictly inside the current subspace among the
/// candidates (in compressed coordinates), chosen at random among ties.
fn shrink<R: Rng + ?Sized>(gens: &[CMat], candidates: &[CVec], abs_tol: f64, rng: &mut R) -> Step {
    let m = gens[0].nrows();
    let mut best: Vec<Vec<CVec>> = Vec::new();
    for v in candidates {
        let closure = invariant_closure(gens, core::slice::from_ref(v), abs_tol);
        if closure.is_empty() || closure.len() >= m {
            continue;
        }
        match best.first().map(|b| b.len()) {
            Some(n) if closure.len() > n => {}
            Some(n) if closure.len() == n => best.push(closure),
            _ => best = vec![closure],
        }
    }
    if best.is_empty() {
        return Step::Stuck;
    }
    let pick = rng.random_range(0..best.len());
    Step::Shrink(linalg::columns_to_matrix(m, &best[pick]))
}

/// A minimal nonzero subspace inside `start` (orthonormal columns, assumed
/// invariant under `gens`) that is invariant under every generator.
///
/// Candidates are the closures of eigenvectors of a seeded generic element;
/// the search recurses into the smallest proper closure until none exists.
/// Minimality is then certified by the generated algebra being the full
/// matrix algebra (small subspaces) and by random interior vectors whose
/// closures fill the subspace.
pub fn minimal_invariant_subspace<R: Rng + ?Sized>(
    gens: &[CMat],
    start: &CMat,
    rng: &mut R,
    max_retries: usize,
) -> Result<MinimalSubspace> {
    if start.ncols() == 0 {
        return Err(Error::ZeroProjection);
    }
    let scale = generator_scale(gens);
    let abs_tol = SEARCH_TOL * scale;
    let mut basis = start.clone();
    let mut retries = 0;
    let mut algebra: Option<Vec<CMat>> = None;
    loop {
        let m = basis.ncols();
        if m == 1 {
            return Ok(MinimalSubspace {
                basis,
                certificate: MinimalityCertificate {
                    dim: 1,
                    algebra_dimension: Some(1),
                    random_closures: 0,
                    retries,
                },
            });
        }
        let local = compress(gens, &basis);
        let local: Vec<CMat> = if local.is_empty() {
            vec![CMat::zeros(m, m)]
        } else {
            local
        };
        let a = generic_element(rng, &local, algebra.as_deref());
        let candidates = eigen_candidates(rng, &a)?;
        if let Step::Shrink(sub) = shrink(&local, &candidates, abs_tol, rng) {
            basis = &basis * sub;
            algebra = None;
            continue;
        }
        let interior: Vec<CVec> = (0..VERIFY_VECTORS).map(|_| random_interior(rng, m)).collect();
        if let Step::Shrink(sub) = shrink(&local, &interior, abs_tol, rng) {
            basis = &basis * sub;
            algebra = None;
            continue;
        }
        let algebra_dimension = if m <= BURNSIDE_LIMIT {
            let words = algebra_basis(&local);
            let dim = words.len();
            if dim < m * m {
                if retries >= max_retries {
                    return Err(Error::MinimalityNotCertified { retries });
                }
                retries += 1;
                algebra = Some(words);
                continue;
            }
            Some(dim)
        } else {
            None
        };
        return Ok(MinimalSubspace {
            basis: linalg::orthonormal_columns(&basis, 1e-12),
            certificate: MinimalityCertificate {
                dim: m,
                algebra_dimension,
                random_closures: VERIFY_VECTORS,
                retries,
            },
        });
    }
}

/// Certificate that the invariant subspace spanned by `basis` has no proper
/// invariant subspace, or `None` when one is found.
pub fn certify_minimal<R: Rng + ?Sized>(
    gens: &[CMat],
    basis: &CMat,
    rng: &mut R,
) -> Option<MinimalityCertificate> {
    let m = basis.ncols();
    if m == 0 {
        return None;
    }
    if m == 1 {
        return Some(MinimalityCertificate {
            dim: 1,
            algebra_dimension: Some(1),
            random_closures: 0,
            retries: 0,
        });
    }
    let local = compress(gens, basis);
    let local = if local.is_empty() { vec![CMat::zeros(m, m)] } else { local };
    let abs_tol = SEARCH_TOL * generator_scale(gens);
    let interior: Vec<CVec> = (0..VERIFY_VECTORS).map(|_| random_interior(rng, m)).collect();
    if let Step::Shrink(_) = shrink(&local, &interior, abs_tol, rng) {
        return None;
    }
    let algebra_dimension = if m <= BURNSIDE_LIMIT {
        let dim = algebra_dimension(&local);
        if dim < m * m {
            return None;
        }
        Some(dim)
    } else {
        None
    };
    Some(MinimalityCertificate {
        dim: m,
        algebra_dimension,
        random_closures: VERIFY_VECTORS,
        retries: 0,
    })
}
