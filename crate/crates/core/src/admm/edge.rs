use ndarray::{Array2, Axis};

use super::{AdmmError, AdmmState, NetworkProblem};

/// Edge-based ADMM state. `z[i]` and `lambda[i]` hold one row per member of the closed
/// neighborhood of `i`, in ascending node order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAdmmState {
    pub t: usize,
    pub c: f64,
    pub x: Array2<f64>,
    pub z: Vec<Array2<f64>>,
    pub lambda: Vec<Array2<f64>>,
}

impl EdgeAdmmState {
    /// Start matched to a node state: `λ_ij = p_i`, `z_ij = P_ij x_j − y_i`.
    pub fn from_node(node: &AdmmState, problem: &NetworkProblem) -> Self {
        let n = problem.node_count();
        let d = problem.dim();
        let mut z = Vec::with_capacity(n);
        let mut lambda = Vec::with_capacity(n);
        for i in 0..n {
            let hood = problem.closed_neighborhood(i);
            let mut zi = Array2::<f64>::zeros((hood.len(), d));
            let mut li = Array2::<f64>::zeros((hood.len(), d));
            for (k, &j) in hood.iter().enumerate() {
                let row = &node.x.row(j) * problem.comm().get(i, j) - &node.y.row(i);
                zi.row_mut(k).assign(&row);
                li.row_mut(k).assign(&node.p.row(i));
            }
            z.push(zi);
            lambda.push(li);
        }
        EdgeAdmmState {
            t: node.t,
            c: node.c,
            x: node.x.clone(),
            z,
            lambda,
        }
    }
}

/// One round of the edge-based method: `x` by prox, `z` by projection onto
/// `Σ_j z_ij = 0`, then dual ascent on every `λ_ij`. Returns the prox centers.
pub fn edge_step(
    state: &mut EdgeAdmmState,
    problem: &NetworkProblem,
) -> Result<Array2<f64>, AdmmError> {
    let n = problem.node_count();
    let c = state.c;
    let m = problem.m_diag();
    let comm = problem.comm();

    // v_j = (1/M_jj) Σ_{i: j∈N(i)} P_ij (z_ij − λ_ij/c)
    let mut centers = Array2::<f64>::zeros(state.x.dim());
    for i in 0..n {
        for (k, &j) in problem.closed_neighborhood(i).iter().enumerate() {
            let pij = comm.get(i, j);
            let term = &state.z[i].row(k) - &(&state.lambda[i].row(k) / c);
            centers.row_mut(j).scaled_add(pij, &term);
        }
    }
    let mut x_next = Array2::<f64>::zeros(state.x.dim());
    for j in 0..n {
        if m[j] <= 0.0 {
            return Err(AdmmError::ZeroMWeight(j));
        }
        let mut v = centers.row_mut(j);
        v /= m[j];
        let xj = problem.objectives()[j]
            .prox(v.view(), c * m[j])
            .map_err(|source| AdmmError::ProxFailure { node: j, source })?;
        x_next.row_mut(j).assign(&xj);
    }

    for i in 0..n {
        let hood = problem.closed_neighborhood(i);
        let mut unconstrained = Array2::<f64>::zeros(state.z[i].dim());
        for (k, &j) in hood.iter().enumerate() {
            let row = &x_next.row(j) * comm.get(i, j) + &(&state.lambda[i].row(k) / c);
            unconstrained.row_mut(k).assign(&row);
        }
        let mu = unconstrained.mean_axis(Axis(0)).expect("nonempty neighborhood");
        let zi = &unconstrained - &mu;
        for (k, &j) in hood.iter().enumerate() {
            let gap = &x_next.row(j) * comm.get(i, j) - &zi.row(k);
            state.lambda[i].row_mut(k).scaled_add(c, &gap);
        }
        state.z[i] = zi;
    }

    state.x = x_next;
    state.t += 1;
    Ok(centers)
}
