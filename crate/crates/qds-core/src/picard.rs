//! The semigroup of a GKSL generator built by iterating its integral
//! equation:
//!
//! ```text
//! τ⁰_t(x) = e^{tY†} x e^{tY}
//! τⁿ_t(x) = e^{tY†} x e^{tY} + ∫₀ᵗ e^{(t−s)Y†} Φ(τⁿ⁻¹_s(x)) e^{(t−s)Y} ds,   Φ(x) = Σ L_k† x L_k
//! ```
//!
//! Each iterate is tabulated on a uniform grid over `[0, t]` and the integral
//! is evaluated by composite Simpson quadrature, so a table of `steps + 1`
//! matrices is carried from one iterate to the next.

use alloc::vec::Vec;

use crate::linalg::{self, re, CMat};
use crate::model::{QuantumModel, Tolerances};
use crate::spectral::{self, Time};
use crate::{Error, Result};

/// Smallest admissible number of quadrature intervals.
pub const MIN_STEPS: usize = 8;

/// Iterates `τⁿ_t(x)` for `n = 0..=N` at the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardTrace {
    pub iterates: Vec<CMat>,
    pub t: f64,
    pub quadrature_steps: usize,
}

impl PicardTrace {
    /// `‖τⁿ − τⁿ⁻¹‖` for `n ≥ 1`.
    pub fn gaps(&self) -> Vec<f64> {
        self.iterates
            .windows(2)
            .map(|w| linalg::op_norm(&(&w[1] - &w[0])))
            .collect()
    }
}

struct Scheme {
    /// `e^{jhY}` for `j = 0..=steps`, plus `e^{−hY}` at the end.
    propagators: Vec<CMat>,
    back: CMat,
    jumps: Vec<CMat>,
    x: CMat,
    h: f64,
    steps: usize,
}

impl Scheme {
    fn new(model: &QuantumModel, x: &CMat, t: f64, steps: usize) -> Result<Self> {
        let (Some(drift), Some(jumps)) = (model.drift(), model.jumps()) else {
            return Err(Error::PicardContinuousOnly {
                kind: model.kind().name(),
            });
        };
        if t.is_nan() {
            return Err(Error::Structural("time is not a number".into()));
        }
        if t < 0.0 {
            return Err(Error::NegativeTime);
        }
        if steps < MIN_STEPS {
            return Err(Error::Structural(alloc::format!(
                "quadrature needs at least {MIN_STEPS} steps, got {steps}"
            )));
        }
        let d = model.dim();
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::Structural(alloc::format!(
                "operator is {}×{}, model dimension is {d}",
                x.nrows(),
                x.ncols()
            )));
        }
        let residual = linalg::hermiticity_residual(x);
        if residual > Tolerances::default().alg_tol {
            return Err(Error::NotHermitian { residual });
        }
        let h = t / steps as f64;
        let step = linalg::expm(&(drift * re(h)));
        let mut propagators = Vec::with_capacity(steps + 1);
        let mut current = linalg::identity(d);
        propagators.push(current.clone());
        for j in 1..=steps {
            // Direct exponentials every few steps keep round-off from accumulating.
            current = if j % 16 == 0 {
                linalg::expm(&(drift * re(h * j as f64)))
            } else {
                &current * &step
            };
            propagators.push(current.clone());
        }
        Ok(Scheme {
            propagators,
            back: linalg::expm(&(drift * re(-h))),
            jumps: jumps.to_vec(),
            x: linalg::hermitian_part(x),
            h,
            steps,
        })
    }

    fn sandwich(e: &CMat, x: &CMat) -> CMat {
        e.adjoint() * x * e
    }

    fn phi(&self, x: &CMat) -> CMat {
        self.jumps
            .iter()
            .fold(CMat::zeros(x.nrows(), x.ncols()), |acc, l| acc + l.adjoint() * x * l)
    }

    fn initial(&self) -> Vec<CMat> {
        self.propagators.iter().map(|e| Self::sandwich(e, &self.x)).collect()
    }

    /// One Picard step applied to a whole table.
    fn next(&self, previous: &[CMat]) -> Vec<CMat> {
        let phis: Vec<CMat> = previous.iter().map(|x| self.phi(x)).collect();
        let h = self.h;
        (0..=self.steps)
            .map(|j| {
                let free = Self::sandwich(&self.propagators[j], &self.x);
                if j == 0 {
                    return free;
                }
                let f = |i: usize| Self::sandwich(&self.propagators[j - i], &phis[i]);
                let integral = if j == 1 {
                    // Third-order rule on [0, h] using the node at 2h, where
                    // the propagator runs backwards by one step.
                    let f2 = Self::sandwich(&self.back, &phis[2]);
                    (f(0) * re(5.0) + f(1) * re(8.0) - f2) * re(h / 12.0)
                } else if j % 2 == 0 {
                    simpson(&f, 0, j, h)
                } else {
                    simpson(&f, 0, j - 3, h) + three_eighths(&f, j - 3, h)
                };
                linalg::hermitian_part(&(free + integral))
            })
            .collect()
    }
}

/// Composite Simpson rule over nodes `start..=end` (an even number of intervals).
fn simpson(f: &dyn Fn(usize) -> CMat, start: usize, end: usize, h: f64) -> CMat {
    let first = f(start);
    if end == start {
        return first * re(0.0);
    }
    let mut acc = first + f(end);
    for i in (start + 1)..end {
        let w = if (i - start) % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(i) * re(w);
    }
    acc * re(h / 3.0)
}

/// Simpson's 3/8 rule over nodes `start..=start+3`.
fn three_eighths(f: &dyn Fn(usize) -> CMat, start: usize, h: f64) -> CMat {
    (f(start) + f(start + 1) * re(3.0) + f(start + 2) * re(3.0) + f(start + 3)) * re(3.0 * h / 8.0)
}

/// `τ⁰_t(x), …, τⁿ_t(x)`.
pub fn picard_iterate(model: &QuantumModel, x: &CMat, t: f64, n: usize, steps: usize) -> Result<PicardTrace> {
    let scheme = Scheme::new(model, x, t, steps)?;
    let mut table = scheme.initial();
    let mut iterates = Vec::with_capacity(n + 1);
    iterates.push(table[steps].clone());
    for _ in 0..n {
        table = scheme.next(&table);
        iterates.push(table[steps].clone());
    }
    Ok(PicardTrace {
        iterates,
        t,
        quadrature_steps: steps,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardLimit {
    pub value: CMat,
    pub iterations: usize,
    /// `‖τᴺ − τᴺ⁻¹‖` at termination.
    pub last_gap: f64,
    /// Residual of the discretized integral equation at the returned value.
    pub integral_residual: f64,
    /// `‖value − τ_t(x)‖` with `τ_t` from the matrix exponential.
    pub exponential_gap: f64,
    /// Quadrature error estimate from the same run at half the steps.
    pub quadrature_estimate: Option<f64>,
    pub trace: PicardTrace,
}

fn run(scheme: &Scheme, tol: f64, max_n: usize) -> Result<(Vec<CMat>, Vec<CMat>, f64)> {
    let steps = scheme.steps;
    let mut table = scheme.initial();
    let mut iterates = alloc::vec![table[steps].clone()];
    let mut gap = f64::INFINITY;
    for _ in 0..max_n {
        let next = scheme.next(&table);
        gap = next
            .iter()
            .zip(&table)
            .map(|(a, b)| linalg::op_norm(&(a - b)))
            .fold(0.0, f64::max);
        table = next;
        iterates.push(table[steps].clone());
        if gap <= tol {
            return Ok((iterates, table, gap));
        }
    }
    Err(Error::PicardNonConvergence {
        gap,
        iterations: max_n,
    })
}

/// Iterates until successive tables differ by at most `tol`, then reports
/// the integral-equation residual and the distance to the exponential route.
pub fn picard_limit(
    model: &QuantumModel,
    x: &CMat,
    t: f64,
    tol: f64,
    max_n: usize,
    steps: usize,
) -> Result<PicardLimit> {
    let scheme = Scheme::new(model, x, t, steps)?;
    let (iterates, table, last_gap) = run(&scheme, tol, max_n)?;
    let value = table[steps].clone();
    let again = scheme.next(&table);
    let integral_residual = linalg::op_norm(&(&again[steps] - &value));
    let exact = spectral::evolve_heisenberg(model, x, Time::Continuous(t), &Tolerances::default())?;
    let exponential_gap = linalg::op_norm(&(&value - &exact));
    let half = steps / 2;
    let quadrature_estimate = if half >= MIN_STEPS && half.is_multiple_of(2) {
        let coarse = Scheme::new(model, x, t, half)?;
        run(&coarse, tol, max_n)
            .ok()
            .map(|(_, table, _)| linalg::op_norm(&(&table[half] - &value)) / 15.0)
    } else {
        None
    };
    Ok(PicardLimit {
        iterations: iterates.len() - 1,
        trace: PicardTrace {
            iterates,
            t,
            quadrature_steps: steps,
        },
        value,
        last_gap,
        integral_residual,
        exponential_gap,
        quadrature_estimate,
    })
}
