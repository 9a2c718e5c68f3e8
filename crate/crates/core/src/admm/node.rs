use ndarray::Array2;

use super::{AdmmError, EdgeAdmmState, NetworkProblem};

/// Per-node variables of the node-based scheme, stacked as `n×d` arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub t: usize,
    pub c: f64,
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub p: Array2<f64>,
    pub x_sum: Array2<f64>,
    pub ergodic: Array2<f64>,
}

impl AdmmState {
    pub fn new(c: f64, x: Array2<f64>, y: Array2<f64>, p: Array2<f64>) -> Result<Self, AdmmError> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(AdmmError::InvalidPenalty(c));
        }
        let ergodic = Array2::zeros(x.dim());
        Ok(AdmmState {
            t: 0,
            c,
            x_sum: x.clone(),
            x,
            y,
            p,
            ergodic,
        })
    }

    fn advance(&mut self, x: Array2<f64>) {
        self.t += 1;
        self.x_sum += &x;
        let t = self.t as f64;
        self.ergodic = (&self.ergodic * (t - 1.0) + &x) / t;
        self.x = x;
    }

    // Mirror of an edge-engine round in node variables: y = D⁻¹Px, p_i = λ_ii.
    pub(crate) fn absorb_edge(&mut self, edge: &EdgeAdmmState, problem: &NetworkProblem) {
        self.advance(edge.x.clone());
        self.y = problem.neighbor_average(&self.x);
        for i in 0..problem.node_count() {
            let k = problem
                .closed_neighborhood(i)
                .iter()
                .position(|&j| j == i)
                .unwrap_or(0);
            self.p.row_mut(i).assign(&edge.lambda[i].row(k));
        }
    }
}

/// One synchronous round. Returns the prox centers `v_i` used for the `x`-update.
pub fn node_step(state: &mut AdmmState, problem: &NetworkProblem) -> Result<Array2<f64>, AdmmError> {
    let n = problem.node_count();
    let c = state.c;
    let m = problem.m_diag();
    let comm = problem.comm();

    // phase 1: every node has (p_j, y_j) from its neighbors
    let mut centers = Array2::<f64>::zeros(state.x.dim());
    let mut x_next = Array2::<f64>::zeros(state.x.dim());
    for i in 0..n {
        if m[i] <= 0.0 {
            return Err(AdmmError::ZeroMWeight(i));
        }
        let mut v = state.x.row(i).to_owned();
        let scale = 1.0 / (c * m[i]);
        for &j in problem.closed_neighborhood(i) {
            let pji = comm.get(j, i);
            let msg = &state.p.row(j) + &(&state.y.row(j) * c);
            v.scaled_add(-scale * pji, &msg);
        }
        let xi = problem.objectives()[i]
            .prox(v.view(), c * m[i])
            .map_err(|source| AdmmError::ProxFailure { node: i, source })?;
        x_next.row_mut(i).assign(&xi);
        centers.row_mut(i).assign(&v);
    }

    // phase 2: x broadcast, then local averages and dual ascent
    let y = problem.neighbor_average(&x_next);
    state.p.scaled_add(c, &y);
    state.y = y;
    state.advance(x_next);
    Ok(centers)
}
