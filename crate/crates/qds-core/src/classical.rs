//! Classical Markov chains as diagonal channels, and the graph-theoretic
//! classification of their states used as an independent oracle.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::linalg::{self, CMat};
use crate::model::{self, QuantumModel, Tolerances};
use crate::resolution::{self, ResolutionResult};
use crate::{Error, Result};

/// Tolerance on row sums and negative entries of a stochastic matrix.
const STOCHASTIC_TOL: f64 = 1e-9;

/// Closed communicating classes and transient states, each sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainClassification {
    pub closed_classes: Vec<Vec<usize>>,
    pub transient_states: Vec<usize>,
}

fn check_stochastic(p: &DMatrix<f64>) -> Result<()> {
    if p.nrows() != p.ncols() || p.nrows() == 0 {
        return Err(Error::Structural("stochastic matrix must be square and nonempty".into()));
    }
    for i in 0..p.nrows() {
        let row = p.row(i);
        if row.iter().any(|&x| !x.is_finite() || x < -STOCHASTIC_TOL) {
            return Err(Error::InvalidModel(format!("row {i} has a negative or non-finite entry")));
        }
        let sum = row.sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidModel(format!("row {i} sums to {sum}")));
        }
    }
    Ok(())
}

/// Kraus channel with `K_ij = √P(i,j) |j⟩⟨i|`, so that
/// `τ(diag f) = diag(P f)`.
pub fn stochastic_to_channel(p: &DMatrix<f64>) -> Result<QuantumModel> {
    check_stochastic(p)?;
    let d = p.nrows();
    let channel = QuantumModel::kraus(d, model::stochastic_kraus(p))?;
    let s = model::heisenberg_superoperator(&channel, &Tolerances::default())?;
    for j in 0..d {
        let mut f = vec_unit(d, j);
        let image = model::apply_map(&s, &diag(&f), &Tolerances::default())?;
        f = p * f;
        let err = linalg::op_norm(&(image - diag(&f)));
        if err > 1e-12 {
            return Err(Error::Internal(format!("chain embedding is off by {err:e} on state {j}")));
        }
    }
    Ok(channel)
}

fn vec_unit(d: usize, j: usize) -> nalgebra::DVector<f64> {
    let mut v = nalgebra::DVector::zeros(d);
    v[j] = 1.0;
    v
}

fn diag(f: &nalgebra::DVector<f64>) -> CMat {
    linalg::diag_real(f.as_slice())
}

/// Closed classes are the strongly connected components of the transition
/// graph with no outgoing edge; every other state is transient.
pub fn classical_classify(p: &DMatrix<f64>) -> ChainClassification {
    let d = p.nrows();
    let mut graph = DiGraph::<(), ()>::with_capacity(d, d * d);
    let nodes: Vec<NodeIndex> = (0..d).map(|_| graph.add_node(())).collect();
    for i in 0..d {
        for j in 0..d {
            if p[(i, j)] > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut closed_classes = Vec::new();
    let mut transient_states = Vec::new();
    for scc in tarjan_scc(&graph) {
        let mut component: Vec<usize> = scc.iter().map(|n| n.index()).collect();
        component.sort_unstable();
        let leaves = component.iter().any(|&i| {
            graph
                .neighbors(nodes[i])
                .any(|j| component.binary_search(&j.index()).is_err())
        });
        if leaves {
            transient_states.extend(component);
        } else {
            closed_classes.push(component);
        }
    }
    closed_classes.sort();
    transient_states.sort_unstable();
    ChainClassification {
        closed_classes,
        transient_states,
    }
}

fn support(m: &CMat) -> Vec<usize> {
    (0..m.nrows()).filter(|&i| m[(i, i)].re >= 0.5).collect()
}

/// Description of how a resolution differs from the graph classification,
/// or `None` when the supports match exactly.
pub fn resolution_diff(oracle: &ChainClassification, result: &ResolutionResult) -> Option<String> {
    let mut classes: Vec<Vec<usize>> = result
        .recurrent_projections
        .iter()
        .map(|p| support(p.matrix()))
        .collect();
    classes.sort();
    let transient = support(result.metastable_remainder.matrix());
    let mut diff = Vec::new();
    if classes != oracle.closed_classes {
        diff.push(format!(
            "recurrent supports {classes:?}, closed classes {:?}",
            oracle.closed_classes
        ));
    }
    if transient != oracle.transient_states {
        diff.push(format!(
            "remainder support {transient:?}, transient states {:?}",
            oracle.transient_states
        ));
    }
    (!diff.is_empty()).then(|| diff.join("; "))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionComparison {
    pub agree: bool,
    pub classical: ChainClassification,
    pub recurrent_supports: Vec<Vec<usize>>,
    pub remainder_support: Vec<usize>,
    /// Empty when the two routes agree.
    pub detail: String,
}

/// Resolution of the embedded chain against the graph classification.
pub fn compare_resolutions(p: &DMatrix<f64>, seed: u64, tol: &Tolerances) -> Result<ResolutionComparison> {
    check_stochastic(p)?;
    let model = QuantumModel::stochastic(p.clone())?;
    let result = resolution::resolve_unchecked(&model, seed, tol)?;
    let classical = classical_classify(p);
    let detail = resolution_diff(&classical, &result).unwrap_or_default();
    let mut recurrent_supports: Vec<Vec<usize>> = result
        .recurrent_projections
        .iter()
        .map(|q| support(q.matrix()))
        .collect();
    recurrent_supports.sort();
    Ok(ResolutionComparison {
        agree: detail.is_empty(),
        classical,
        recurrent_supports,
        remainder_support: support(result.metastable_remainder.matrix()),
        detail,
    })
}
