//! Seeded generators of random operators and models.
//!
//! Used by the test suites and by the minimal-subspace search. All
//! randomness comes from an explicit generator; there is no global state.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;

use crate::linalg::{self, c, re, CMat, CVec, C64};
use crate::math;
use crate::model::QuantumModel;
use crate::projection::Projection;

/// Real and imaginary parts uniform on `[-1, 1]`.
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| random_complex(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    linalg::hermitian_part(&random_matrix(rng, d, d))
}

/// Unitary from the QR factorization of a random matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let qr = random_matrix(rng, d, d).qr();
    let (q, r) = qr.unpack();
    let phases = CMat::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / re(z.norm())
            } else {
                re(1.0)
            }
        } else {
            re(0.0)
        }
    });
    q * phases
}

pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let a = random_matrix(rng, d, d);
    let rho = &a * a.adjoint();
    let tr = rho.trace().re;
    linalg::hermitian_part(&(rho / re(tr)))
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let v = random_vector(rng, d);
    let v = &v / re(v.norm());
    &v * v.adjoint()
}

/// `S^{-1/2}` for a hermitian positive definite `S`.
fn inverse_sqrt(s: &CMat) -> CMat {
    let (values, vectors) = linalg::hermitian_eigen(s);
    let d = s.nrows();
    let scale = CMat::from_fn(d, d, |i, j| {
        if i == j {
            re(1.0 / math::sqrt(values[i]))
        } else {
            re(0.0)
        }
    });
    &vectors * scale * vectors.adjoint()
}

/// Random unital channel `l_k = G_k S^{-1/2}` with `S = Σ G_k† G_k`.
pub fn random_kraus_model<R: Rng + ?Sized>(rng: &mut R, d: usize, count: usize) -> QuantumModel {
    let raw: Vec<CMat> = (0..count.max(1)).map(|_| random_matrix(rng, d, d)).collect();
    let s = raw.iter().fold(CMat::zeros(d, d), |acc, g| acc + g.adjoint() * g);
    let norm = inverse_sqrt(&s);
    let ops = raw.iter().map(|g| g * &norm).collect();
    QuantumModel::kraus(d, ops).expect("shapes are consistent")
}

pub fn random_lindblad_model<R: Rng + ?Sized>(rng: &mut R, d: usize, count: usize) -> QuantumModel {
    let h = random_hermitian(rng, d);
    let jumps = (0..count).map(|_| random_matrix(rng, d, d)).collect();
    QuantumModel::lindblad(h, jumps).expect("shapes are consistent")
}

/// A model together with a projection that is sub-harmonic by construction.
#[derive(Debug, Clone)]
pub struct StructuredModel {
    pub model: QuantumModel,
    pub subharmonic: Projection,
    /// Whether `y` for `subharmonic` is injective by construction.
    pub injective: bool,
}

#[derive(Debug, Clone, Copy)]
struct Blocks {
    a: usize,
    b: usize,
    feeds_a: bool,
    p_includes_b: bool,
}

impl Blocks {
    fn random<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Self {
        let a = rng.random_range(1..=d);
        let b = if a < d { rng.random_range(0..=(d - a)) } else { 0 };
        Blocks {
            a,
            b,
            feeds_a: rng.random_bool(0.75),
            p_includes_b: b > 0 && rng.random_bool(0.3),
        }
    }

    fn region(&self, i: usize) -> u8 {
        if i < self.a {
            0
        } else if i < self.a + self.b {
            1
        } else {
            2
        }
    }

    /// Entry (row, col) may be nonzero: closed blocks map into themselves,
    /// the transient block maps anywhere (into the first block only when
    /// `feeds_a`).
    fn allowed(&self, row: usize, col: usize) -> bool {
        match (self.region(row), self.region(col)) {
            (r, c) if c < 2 => r == c,
            (0, 2) => self.feeds_a,
            _ => true,
        }
    }

    fn projection_rank(&self) -> usize {
        if self.p_includes_b {
            self.a + self.b
        } else {
            self.a
        }
    }

    /// Injective exactly when no invariant subspace is orthogonal to range(p):
    /// the transient block must feed the projection and every closed block
    /// must belong to it.
    fn injective(&self, d: usize) -> bool {
        let t = d - self.a - self.b;
        let b_covered = self.b == 0 || self.p_includes_b;
        let t_reaches = t == 0 || self.feeds_a || (self.p_includes_b && self.b > 0);
        b_covered && t_reaches
    }

    fn masked<R: Rng + ?Sized>(&self, rng: &mut R, d: usize) -> CMat {
        CMat::from_fn(d, d, |i, j| {
            if self.allowed(i, j) {
                random_complex(rng)
            } else {
                re(0.0)
            }
        })
    }

    fn projection(&self, d: usize) -> CMat {
        let r = self.projection_rank();
        CMat::from_fn(d, d, |i, j| if i == j && i < r { re(1.0) } else { re(0.0) })
    }
}

fn conjugate(u: &CMat, x: &CMat) -> CMat {
    u * x * u.adjoint()
}

/// Random channel whose Kraus operators leave a random subspace invariant.
///
/// The operators are block triangular in a hidden basis, normalized with the
/// inverse Cholesky factor (which keeps the triangular structure) and then
/// rotated by a random unitary. At least two operators are drawn, since a
/// single unital Kraus operator is unitary and cannot feed `p`.
pub fn random_structured_kraus<R: Rng + ?Sized>(rng: &mut R, d: usize, count: usize) -> StructuredModel {
    loop {
        let blocks = Blocks::random(rng, d);
        let raw: Vec<CMat> = (0..count.max(2)).map(|_| blocks.masked(rng, d)).collect();
        let s = raw.iter().fold(CMat::zeros(d, d), |acc, g| acc + g.adjoint() * g);
        let Some(chol) = s.cholesky() else { continue };
        let upper = chol.l().adjoint();
        let Some(r) = upper.try_inverse() else { continue };
        let u = random_unitary(rng, d);
        let ops = raw.iter().map(|g| conjugate(&u, &(g * &r))).collect();
        let p = conjugate(&u, &blocks.projection(d));
        return StructuredModel {
            model: QuantumModel::kraus(d, ops).expect("shapes are consistent"),
            subharmonic: Projection::from_matrix_unchecked(linalg::hermitian_part(&p)),
            injective: blocks.injective(d),
        };
    }
}

/// Random GKSL model with a sub-harmonic projection built in. The
/// Hamiltonian couples the transient block to the closed blocks exactly so
/// that the drift stays block triangular.
pub fn random_structured_lindblad<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    count: usize,
) -> StructuredModel {
    let blocks = Blocks::random(rng, d);
    let jumps: Vec<CMat> = (0..count).map(|_| blocks.masked(rng, d)).collect();
    let s = jumps.iter().fold(CMat::zeros(d, d), |acc, l| acc + l.adjoint() * l);
    let mut h = CMat::zeros(d, d);
    let base = random_hermitian(rng, d);
    for i in 0..d {
        for j in 0..d {
            let (ri, rj) = (blocks.region(i), blocks.region(j));
            h[(i, j)] = if ri == rj {
                base[(i, j)]
            } else if ri == 2 && rj < 2 {
                c(0.0, 0.5) * s[(i, j)]
            } else if rj == 2 && ri < 2 {
                c(0.0, -0.5) * s[(i, j)]
            } else {
                re(0.0)
            };
        }
    }
    let u = random_unitary(rng, d);
    let h = linalg::hermitian_part(&conjugate(&u, &h));
    let jumps = jumps.iter().map(|l| conjugate(&u, l)).collect();
    let p = conjugate(&u, &blocks.projection(d));
    StructuredModel {
        model: QuantumModel::lindblad(h, jumps).expect("shapes are consistent"),
        subharmonic: Projection::from_matrix_unchecked(linalg::hermitian_part(&p)),
        injective: blocks.injective(d),
    }
}

/// Random row-stochastic matrix with a random sparsity pattern.
pub fn random_stochastic<R: Rng + ?Sized>(rng: &mut R, d: usize, density: f64) -> DMatrix<f64> {
    let mut p = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        loop {
            for j in 0..d {
                p[(i, j)] = if rng.random_bool(density) {
                    rng.random_range(0.05..1.0)
                } else {
                    0.0
                };
            }
            if p.row(i).sum() > 0.0 {
                break;
            }
        }
        let sum = p.row(i).sum();
        for j in 0..d {
            p[(i, j)] /= sum;
        }
    }
    p
}

/// Random chain with a prescribed structure: `classes` closed communicating
/// classes and the remaining states transient. States are shuffled.
pub fn random_structured_chain<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    classes: usize,
) -> DMatrix<f64> {
    let classes = classes.clamp(1, d);
    let recurrent = rng.random_range(classes..=d);
    let mut labels: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    // Split the first `recurrent` shuffled states into `classes` nonempty groups.
    let mut cuts: Vec<usize> = vec![0];
    let mut remaining = recurrent;
    for k in 0..classes {
        let left = classes - k - 1;
        let size = if left == 0 {
            remaining
        } else {
            rng.random_range(1..=(remaining - left))
        };
        cuts.push(cuts[k] + size);
        remaining -= size;
    }
    let mut weights = DMatrix::<f64>::zeros(d, d);
    for k in 0..classes {
        let members = &labels[cuts[k]..cuts[k + 1]];
        let n = members.len();
        for (idx, &s) in members.iter().enumerate() {
            // A cycle makes the class strongly connected.
            weights[(s, members[(idx + 1) % n])] += rng.random_range(0.1..1.0);
            for &t in members {
                if rng.random_bool(0.3) {
                    weights[(s, t)] += rng.random_range(0.1..1.0);
                }
            }
        }
    }
    let transient = &labels[recurrent..];
    for (idx, &s) in transient.iter().enumerate() {
        // Escape edge to a recurrent state or an earlier transient state.
        let pool = recurrent + idx;
        let target = labels[rng.random_range(0..pool)];
        weights[(s, target)] += rng.random_range(0.1..1.0);
        for t in 0..d {
            if rng.random_bool(0.25) {
                weights[(s, t)] += rng.random_range(0.1..1.0);
            }
        }
    }
    for i in 0..d {
        let sum = weights.row(i).sum();
        for j in 0..d {
            weights[(i, j)] /= sum;
        }
    }
    weights
}
