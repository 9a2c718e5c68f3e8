//! Synchronous simulation of the node-based ADMM and its edge-based reference.

mod edge;
mod node;

use ndarray::{Array1, Array2, Axis};
use thiserror::Error;

use crate::graph::{CommunicationMatrix, Graph};
use crate::objectives::{LocalObjective, ObjectiveError};

pub use edge::{edge_step, EdgeAdmmState};
pub use node::{node_step, AdmmState};

#[derive(Debug, Error, PartialEq)]
pub enum AdmmError {
    #[error("prox evaluation failed at node {node}: {source}")]
    ProxFailure {
        node: usize,
        #[source]
        source: ObjectiveError,
    },
    #[error("node {0} has M_ii = 0 (column of P is zero)")]
    ZeroMWeight(usize),
    #[error("penalty c must be positive and finite, got {0}")]
    InvalidPenalty(f64),
    #[error("iteration count must be at least 1")]
    NoIterations,
    #[error("expected {expected} objectives, got {got}")]
    ObjectiveCount { expected: usize, got: usize },
    #[error("objective {node} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        node: usize,
        expected: usize,
        got: usize,
    },
    #[error("initial {name} has shape {got:?}, expected {expected:?}")]
    InitShape {
        name: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
}

/// Graph, communication matrix and local objectives of one consensus problem.
#[derive(Debug, Clone)]
pub struct NetworkProblem {
    graph: Graph,
    comm: CommunicationMatrix,
    objectives: Vec<LocalObjective>,
    dim: usize,
    // cached per node: M_ii and the closed neighborhood in ascending order
    m_diag: Array1<f64>,
    hoods: Vec<Vec<usize>>,
}

impl NetworkProblem {
    pub fn new(
        graph: Graph,
        comm: CommunicationMatrix,
        objectives: Vec<LocalObjective>,
    ) -> Result<Self, AdmmError> {
        let n = graph.node_count();
        if objectives.len() != n {
            return Err(AdmmError::ObjectiveCount {
                expected: n,
                got: objectives.len(),
            });
        }
        let dim = objectives[0].dim();
        for (node, f) in objectives.iter().enumerate() {
            if f.dim() != dim {
                return Err(AdmmError::DimensionMismatch {
                    node,
                    expected: dim,
                    got: f.dim(),
                });
            }
        }
        let p = comm.matrix();
        let m_diag = p.mapv(|v| v * v).sum_axis(Axis(0));
        if let Some(i) = m_diag.iter().position(|m| *m <= 0.0) {
            return Err(AdmmError::ZeroMWeight(i));
        }
        let hoods = (0..n).map(|i| graph.closed_neighborhood(i)).collect();
        Ok(NetworkProblem {
            graph,
            comm,
            objectives,
            dim,
            m_diag,
            hoods,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn comm(&self) -> &CommunicationMatrix {
        &self.comm
    }

    pub fn objectives(&self) -> &[LocalObjective] {
        &self.objectives
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `M_ii = Σ_j P_ji²`.
    pub fn m_diag(&self) -> &Array1<f64> {
        &self.m_diag
    }

    /// `N(i)` including `i`, ascending.
    pub fn closed_neighborhood(&self, i: usize) -> &[usize] {
        &self.hoods[i]
    }

    /// `D⁻¹ P x` row-wise.
    pub fn neighbor_average(&self, x: &Array2<f64>) -> Array2<f64> {
        let n = self.node_count();
        let mut y = Array2::<f64>::zeros((n, self.dim));
        for i in 0..n {
            let hood = &self.hoods[i];
            let mut row = y.row_mut(i);
            for &j in hood {
                row.scaled_add(self.comm.get(i, j), &x.row(j));
            }
            row /= hood.len() as f64;
        }
        y
    }

    /// `F(x) = Σ_i f_i(x_i)`.
    pub fn total_value(&self, x: &Array2<f64>) -> Result<f64, ObjectiveError> {
        self.objectives
            .iter()
            .enumerate()
            .map(|(i, f)| f.value(x.row(i)))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Node,
    Edge,
}

/// Starting point of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// `x(0) = y(0) = p(0) = 0`.
    Zero,
    /// Given `x(0)`, with `y(0) = D⁻¹P x(0)` and `p(0) = c·y(0)`.
    Primal(Array2<f64>),
    /// Arbitrary `(x(0), y(0), p(0))`.
    Full {
        x: Array2<f64>,
        y: Array2<f64>,
        p: Array2<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmConfig {
    pub c: f64,
    pub iterations: usize,
    pub init: Init,
    pub engine: Engine,
}

impl AdmmConfig {
    pub fn new(c: f64, iterations: usize) -> Self {
        AdmmConfig {
            c,
            iterations,
            init: Init::Zero,
            engine: Engine::Node,
        }
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }
}

/// Node-level variables after round `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: usize,
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub p: Array2<f64>,
    /// `Σ_{s=0}^{t} x(s)`.
    pub x_sum: Array2<f64>,
    /// `(1/t) Σ_{s=1}^{t} x(s)`; zero at `t = 0`.
    pub ergodic: Array2<f64>,
    /// The point `v` whose prox produced `x(t)`; absent at `t = 0`.
    pub prox_center: Option<Array2<f64>>,
}

impl Snapshot {
    fn from_state(s: &AdmmState, prox_center: Option<Array2<f64>>) -> Self {
        Snapshot {
            t: s.t,
            x: s.x.clone(),
            y: s.y.clone(),
            p: s.p.clone(),
            x_sum: s.x_sum.clone(),
            ergodic: s.ergodic.clone(),
            prox_center,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmTrace {
    pub c: f64,
    pub engine: Engine,
    pub initial: Snapshot,
    /// Rounds `1..=T`.
    pub iterates: Vec<Snapshot>,
    pub accounting: RoundAccounting,
}

impl AdmmTrace {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    /// Snapshot at round `t`, `0 ≤ t ≤ T`.
    pub fn at(&self, t: usize) -> &Snapshot {
        if t == 0 {
            &self.initial
        } else {
            &self.iterates[t - 1]
        }
    }

    pub fn last(&self) -> &Snapshot {
        self.iterates.last().unwrap_or(&self.initial)
    }
}

pub(crate) fn initial_state(
    problem: &NetworkProblem,
    c: f64,
    init: &Init,
) -> Result<AdmmState, AdmmError> {
    let shape = (problem.node_count(), problem.dim());
    let check = |name: &'static str, a: &Array2<f64>| {
        if a.dim() != shape {
            Err(AdmmError::InitShape {
                name,
                expected: shape,
                got: a.dim(),
            })
        } else {
            Ok(())
        }
    };
    let (x, y, p) = match init {
        Init::Zero => (
            Array2::zeros(shape),
            Array2::zeros(shape),
            Array2::zeros(shape),
        ),
        Init::Primal(x) => {
            check("x", x)?;
            let y = problem.neighbor_average(x);
            let p = &y * c;
            (x.clone(), y, p)
        }
        Init::Full { x, y, p } => {
            check("x", x)?;
            check("y", y)?;
            check("p", p)?;
            (x.clone(), y.clone(), p.clone())
        }
    };
    AdmmState::new(c, x, y, p)
}

/// Runs `T` synchronous rounds of the chosen engine from the configured start.
pub fn run(problem: &NetworkProblem, config: &AdmmConfig) -> Result<AdmmTrace, AdmmError> {
    if config.iterations == 0 {
        return Err(AdmmError::NoIterations);
    }
    let state = initial_state(problem, config.c, &config.init)?;
    let initial = Snapshot::from_state(&state, None);
    let mut iterates = Vec::with_capacity(config.iterations);
    match config.engine {
        Engine::Node => {
            let mut state = state;
            for _ in 0..config.iterations {
                let v = node_step(&mut state, problem)?;
                iterates.push(Snapshot::from_state(&state, Some(v)));
            }
        }
        Engine::Edge => {
            let mut edge = EdgeAdmmState::from_node(&state, problem);
            let mut shadow = state;
            for _ in 0..config.iterations {
                let v = edge_step(&mut edge, problem)?;
                shadow.absorb_edge(&edge, problem);
                iterates.push(Snapshot::from_state(&shadow, Some(v)));
            }
        }
    }
    Ok(AdmmTrace {
        c: config.c,
        engine: config.engine,
        initial,
        iterates,
        accounting: account(problem),
    })
}

/// Per-round communication and storage of the node-based scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundAccounting {
    /// `x_i, y_i, p_i` at every node.
    pub storage_vectors: usize,
    pub storage_scalars: usize,
    /// Links used by one neighbor broadcast.
    pub messages_per_phase: usize,
    /// Broadcast phases per round: `(p, y)` out, then `x` out.
    pub phases_per_round: usize,
    pub messages_per_round: usize,
    /// `x_j` plus `z_ij, λ_ij` for every `j ∈ N(i)`, for comparison.
    pub edge_storage_vectors: usize,
}

pub fn account(problem: &NetworkProblem) -> RoundAccounting {
    let n = problem.node_count();
    let d = problem.dim();
    let links = problem.graph().edge_count();
    let closed_pairs: usize = (0..n).map(|i| problem.closed_neighborhood(i).len()).sum();
    RoundAccounting {
        storage_vectors: 3 * n,
        storage_scalars: 3 * n * d,
        messages_per_phase: links,
        phases_per_round: 2,
        messages_per_round: 2 * links,
        edge_storage_vectors: n + 2 * closed_pairs,
    }
}

/// `‖x(t+1) + (1/c)M⁻¹h − (I − M⁻¹W)x(t) + M⁻¹W Σ_{s≤t} x(s)‖∞` for every round, with
/// `h_i = c·M_ii·(v_i − x_i(t+1))` recovered from prox optimality.
///
/// The identity is exact for zero initialization and for `Init::Primal`.
pub fn update_identity_residual(trace: &AdmmTrace, problem: &NetworkProblem) -> Vec<f64> {
    let m = problem.m_diag();
    let c = trace.c;
    (1..=trace.len())
        .map(|t| {
            let prev = trace.at(t - 1);
            let cur = trace.at(t);
            let v = match &cur.prox_center {
                Some(v) => v,
                None => return f64::INFINITY,
            };
            let h = implicit_gradient(v, &cur.x, m, c);
            let w_x = apply_w(problem, &prev.x);
            let w_sum = apply_w(problem, &prev.x_sum);
            let mut worst = 0.0f64;
            for i in 0..problem.node_count() {
                for k in 0..problem.dim() {
                    let r = cur.x[[i, k]] + h[[i, k]] / (c * m[i]) - prev.x[[i, k]]
                        + w_x[[i, k]] / m[i]
                        + w_sum[[i, k]] / m[i];
                    worst = worst.max(r.abs());
                }
            }
            worst
        })
        .collect()
}

/// `h_i = c·M_ii·(v_i − x_i)`: the subgradient certified by the prox step.
pub fn implicit_gradient(
    v: &Array2<f64>,
    x: &Array2<f64>,
    m_diag: &Array1<f64>,
    c: f64,
) -> Array2<f64> {
    let mut h = v - x;
    for (i, mut row) in h.rows_mut().into_iter().enumerate() {
        row *= c * m_diag[i];
    }
    h
}

// W x = P' D⁻¹ P x without forming W.
fn apply_w(problem: &NetworkProblem, x: &Array2<f64>) -> Array2<f64> {
    problem.comm().matrix().t().dot(&problem.neighbor_average(x))
}
