//! Network topologies and communication matrices.
//!
//! A [`Graph`] is an undirected, connected simple graph on nodes `0..n`. The closed
//! neighborhood `N(i)` used throughout the crate is the neighbor set plus `i` itself,
//! so `|N(i)| = d_i + 1`. A [`CommunicationMatrix`] is an `n×n` matrix whose sparsity
//! follows those neighborhoods and whose null space is exactly `span{𝟙}`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::spectral::{sym_eig, SpectralError};

/// Attempts made by the Erdős–Rényi generator before giving up on connectivity.
pub const ER_MAX_ATTEMPTS: u64 = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph is disconnected: node {unreached} not reachable from node 0")]
    Disconnected { unreached: usize },
    #[error("infeasible generator parameters: {0}")]
    InfeasibleParams(String),
    #[error("no connected Erdős–Rényi sample after {attempts} attempts")]
    ConnectivityRetryExhausted { attempts: u64 },
    #[error("graph file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("communication matrix is {rows}x{cols}, expected {n}x{n}")]
    MatrixShape { rows: usize, cols: usize, n: usize },
    #[error("P[{row}][{col}] = {value} but node {col} is not in N({row})")]
    SparsityViolation { row: usize, col: usize, value: f64 },
    #[error("null space of P is not span{{1}}: {reason} (index {index})")]
    NullSpaceViolation { index: usize, reason: String },
    #[error("column {0} of P is identically zero")]
    ZeroColumn(usize),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Undirected connected graph with degree bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops, duplicates (in either
    /// orientation), out-of-range endpoints and disconnected topologies.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in edges {
            for node in [i, j] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(i, j));
            }
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let graph = Graph {
            n,
            edges: seen.into_iter().collect(),
            adjacency,
        };
        if let Some(unreached) = graph.first_unreached() {
            return Err(GraphError::Disconnected { unreached });
        }
        Ok(graph)
    }

    fn first_unreached(&self) -> Option<usize> {
        let mut visited = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !visited[v] {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
        visited.iter().position(|v| !v)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Open neighborhood of `i`, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Closed neighborhood `N(i) = neighbors ∪ {i}`, ascending.
    pub fn closed_neighborhood(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.adjacency[i].len() + 1);
        let mut inserted = false;
        for &j in &self.adjacency[i] {
            if !inserted && j > i {
                out.push(i);
                inserted = true;
            }
            out.push(j);
        }
        if !inserted {
            out.push(i);
        }
        out
    }

    pub fn in_closed_neighborhood(&self, i: usize, j: usize) -> bool {
        i == j || self.adjacency[i].binary_search(&j).is_ok()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Parses the `n m` header + `i j` edge-line format.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            message: "missing `n m` header".into(),
        })?;
        let (n, m) = parse_pair(hline, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines.by_ref() {
            if edges.len() == m {
                return Err(GraphError::Parse {
                    line,
                    message: format!("more than the declared {m} edges"),
                });
            }
            let (i, j) = parse_pair(line, l)?;
            edges.push((i, j));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: text.lines().count().max(1),
                message: format!("declared {m} edges, found {}", edges.len()),
            });
        }
        Graph::new(n, &edges)
    }

    pub fn to_file_string(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for (i, j) in &self.edges {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    pub fn read_file(path: &Path) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Graph::parse(&text)
    }

    pub fn write_file(&self, path: &Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_file_string()).map_err(|e| GraphError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize), GraphError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(GraphError::Parse {
            line,
            message: format!("expected two integers, got `{text}`"),
        });
    }
    let parse = |s: &str| {
        s.parse::<usize>().map_err(|_| GraphError::Parse {
            line,
            message: format!("`{s}` is not a non-negative integer"),
        })
    };
    Ok((parse(fields[0])?, parse(fields[1])?))
}

/// Named topology families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    Path,
    Cycle,
    Complete,
    /// `d`-regular circulant: node `i` is joined to `i±1, …, i±d/2 (mod n)`.
    Circulant { degree: usize },
    ErdosRenyi { p: f64, seed: u64 },
}

/// Deterministic generator for the [`GraphKind`] families.
pub fn generate_graph(kind: GraphKind, n: usize) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::TooFewNodes(n));
    }
    match kind {
        GraphKind::Path => Graph::new(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>()),
        GraphKind::Cycle => {
            if n < 3 {
                return Err(GraphError::InfeasibleParams(format!(
                    "cycle needs n >= 3, got {n}"
                )));
            }
            Graph::new(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
        }
        GraphKind::Complete => {
            let edges: Vec<_> = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .collect();
            Graph::new(n, &edges)
        }
        GraphKind::Circulant { degree } => {
            if degree == 0 || degree % 2 != 0 || degree >= n {
                return Err(GraphError::InfeasibleParams(format!(
                    "circulant degree must be even, positive and < n (degree = {degree}, n = {n})"
                )));
            }
            let mut edges = BTreeSet::new();
            for i in 0..n {
                for k in 1..=degree / 2 {
                    let j = (i + k) % n;
                    edges.insert((i.min(j), i.max(j)));
                }
            }
            Graph::new(n, &edges.into_iter().collect::<Vec<_>>())
        }
        GraphKind::ErdosRenyi { p, seed } => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(GraphError::InfeasibleParams(format!(
                    "edge probability must lie in (0, 1], got {p}"
                )));
            }
            for attempt in 0..ER_MAX_ATTEMPTS {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n {
                        if rng.gen::<f64>() < p {
                            edges.push((i, j));
                        }
                    }
                }
                match Graph::new(n, &edges) {
                    Ok(g) => return Ok(g),
                    Err(GraphError::Disconnected { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(GraphError::ConnectivityRetryExhausted {
                attempts: ER_MAX_ATTEMPTS,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixSource {
    Laplacian,
    Custom,
}

/// The matrix `P` that encodes the consensus constraint `Px = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunicationMatrix {
    matrix: Array2<f64>,
    source: MatrixSource,
}

impl CommunicationMatrix {
    /// Wraps a user-supplied `P` after checking it against `g`.
    pub fn custom(matrix: Array2<f64>, g: &Graph) -> Result<Self, GraphError> {
        validate_comm_matrix(matrix.view(), g)?;
        Ok(CommunicationMatrix {
            matrix,
            source: MatrixSource::Custom,
        })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn source(&self) -> MatrixSource {
        self.source
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[[i, j]]
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Graph Laplacian: `P_ii = d_i`, `P_ij = −1` on edges.
pub fn laplacian(g: &Graph) -> CommunicationMatrix {
    let n = g.node_count();
    let mut p = Array2::<f64>::zeros((n, n));
    for &(i, j) in g.edges() {
        p[[i, j]] = -1.0;
        p[[j, i]] = -1.0;
    }
    for i in 0..n {
        p[[i, i]] = g.degree(i) as f64;
    }
    CommunicationMatrix {
        matrix: p,
        source: MatrixSource::Laplacian,
    }
}

/// Summary of a passed [`validate_comm_matrix`] call.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `‖P𝟙‖_∞`.
    pub row_sum_residual: f64,
    /// Singular values of `P`, ascending.
    pub singular_values: Vec<f64>,
}

impl ValidationReport {
    pub fn rank_gap(&self) -> f64 {
        let largest = self.singular_values.last().copied().unwrap_or(0.0);
        if largest == 0.0 {
            0.0
        } else {
            self.singular_values[1] / largest
        }
    }
}

/// Singular values of a square matrix, ascending, via the symmetric embedding
/// `[[0, P], [P', 0]]` whose spectrum is `±σ`. This keeps small singular values
/// resolved to absolute accuracy instead of the `√ε` floor of `eig(P'P)`.
pub fn singular_values(p: ArrayView2<f64>) -> Result<Vec<f64>, SpectralError> {
    let n = p.nrows();
    let mut embed = Array2::<f64>::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            embed[[i, n + j]] = p[[i, j]];
            embed[[n + j, i]] = p[[i, j]];
        }
    }
    let eig = sym_eig(embed.view())?;
    Ok(eig.eigenvalues.iter().skip(n).map(|s| s.max(0.0)).collect())
}

/// Checks neighborhood sparsity, `P𝟙 = 0`, `rank(P) = n − 1` and the absence of zero
/// columns, in that order.
pub fn validate_comm_matrix(p: ArrayView2<f64>, g: &Graph) -> Result<ValidationReport, GraphError> {
    let n = g.node_count();
    if p.nrows() != n || p.ncols() != n {
        return Err(GraphError::MatrixShape {
            rows: p.nrows(),
            cols: p.ncols(),
            n,
        });
    }
    for i in 0..n {
        for j in 0..n {
            let value = p[[i, j]];
            if value != 0.0 && !g.in_closed_neighborhood(i, j) {
                return Err(GraphError::SparsityViolation { row: i, col: j, value });
            }
        }
    }

    let max_abs = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut row_sum_residual = 0.0f64;
    for (i, row) in p.rows().into_iter().enumerate() {
        let sum: f64 = row.sum();
        row_sum_residual = row_sum_residual.max(sum.abs());
        if sum.abs() > 1e-12 * max_abs {
            return Err(GraphError::NullSpaceViolation {
                index: i,
                reason: format!("row {i} sums to {sum:e}"),
            });
        }
    }

    let sv = singular_values(p)?;
    let largest = sv.last().copied().unwrap_or(0.0);
    if !(sv[1] > 1e-9 * largest) {
        return Err(GraphError::NullSpaceViolation {
            index: 1,
            reason: format!(
                "second-smallest singular value {:e} vs largest {:e}",
                sv[1], largest
            ),
        });
    }

    for j in 0..n {
        if p.column(j).iter().all(|v| *v == 0.0) {
            return Err(GraphError::ZeroColumn(j));
        }
    }

    Ok(ValidationReport {
        row_sum_residual,
        singular_values: sv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn triangle_degrees() {
        let g = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(g.degrees(), vec![2, 2, 2]);
        assert_eq!(g.closed_neighborhood(1), vec![0, 1, 2]);
    }

    #[test]
    fn path_degrees() {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.degrees(), vec![1, 2, 1]);
        assert_eq!((g.max_degree(), g.min_degree()), (2, 1));
        assert_eq!(g.closed_neighborhood(0), vec![0, 1]);
        assert_eq!(g.closed_neighborhood(2), vec![1, 2]);
    }

    #[test]
    fn build_errors() {
        assert_eq!(
            Graph::new(4, &[(0, 1), (2, 3)]),
            Err(GraphError::Disconnected { unreached: 2 })
        );
        assert_eq!(Graph::new(3, &[(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            Graph::new(3, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(1, 0))
        );
        assert_eq!(
            Graph::new(3, &[(0, 3)]),
            Err(GraphError::NodeOutOfRange { node: 3, n: 3 })
        );
    }

    #[test]
    fn generators() {
        let k3 = generate_graph(GraphKind::Complete, 3).unwrap();
        assert_eq!(k3, Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap());

        let c5 = generate_graph(GraphKind::Circulant { degree: 2 }, 5).unwrap();
        assert_eq!(c5, generate_graph(GraphKind::Cycle, 5).unwrap());

        let g = generate_graph(GraphKind::Circulant { degree: 4 }, 7).unwrap();
        for i in 0..7 {
            let expect: BTreeSet<usize> = [1, 2, 5, 6].iter().map(|k| (i + k) % 7).collect();
            let got: BTreeSet<usize> = g.neighbors(i).iter().copied().collect();
            assert_eq!(got, expect, "node {i}");
        }
        assert_eq!(g.degrees(), vec![4; 7]);
    }

    #[test]
    fn circulant_rejects_odd_degree() {
        assert!(matches!(
            generate_graph(GraphKind::Circulant { degree: 3 }, 8),
            Err(GraphError::InfeasibleParams(_))
        ));
        assert!(matches!(
            generate_graph(GraphKind::Circulant { degree: 8 }, 8),
            Err(GraphError::InfeasibleParams(_))
        ));
    }

    #[test]
    fn erdos_renyi_is_deterministic() {
        let kind = GraphKind::ErdosRenyi { p: 0.2, seed: 11 };
        let a = generate_graph(kind, 20).unwrap();
        let b = generate_graph(kind, 20).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn erdos_renyi_retry_exhaustion() {
        // With p tiny and n large a connected sample never appears.
        let kind = GraphKind::ErdosRenyi { p: 1e-6, seed: 0 };
        assert_eq!(
            generate_graph(kind, 30),
            Err(GraphError::ConnectivityRetryExhausted {
                attempts: ER_MAX_ATTEMPTS
            })
        );
    }

    #[test]
    fn laplacian_examples() {
        let k3 = generate_graph(GraphKind::Complete, 3).unwrap();
        assert_eq!(
            laplacian(&k3).matrix(),
            &array![[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]]
        );
        let p3 = generate_graph(GraphKind::Path, 3).unwrap();
        assert_eq!(
            laplacian(&p3).matrix(),
            &array![[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]
        );
        let c4 = generate_graph(GraphKind::Cycle, 4).unwrap();
        assert_eq!(
            laplacian(&c4).matrix(),
            &array![
                [2.0, -1.0, 0.0, -1.0],
                [-1.0, 2.0, -1.0, 0.0],
                [0.0, -1.0, 2.0, -1.0],
                [-1.0, 0.0, -1.0, 2.0]
            ]
        );
    }

    #[test]
    fn validation_cases() {
        let k3 = generate_graph(GraphKind::Complete, 3).unwrap();
        let report = validate_comm_matrix(laplacian(&k3).matrix().view(), &k3).unwrap();
        assert_eq!(report.row_sum_residual, 0.0);
        assert!((report.singular_values[1] - 3.0).abs() < 1e-12);

        let p3 = generate_graph(GraphKind::Path, 3).unwrap();
        let zero = Array2::<f64>::zeros((3, 3));
        assert!(matches!(
            validate_comm_matrix(zero.view(), &p3),
            Err(GraphError::NullSpaceViolation { .. })
        ));

        let mut broken = laplacian(&k3).matrix().clone();
        broken[[0, 2]] = 0.0;
        assert!(matches!(
            validate_comm_matrix(broken.view(), &k3),
            Err(GraphError::NullSpaceViolation { index: 0, .. })
        ));

        let mut sparse = laplacian(&p3).matrix().clone();
        sparse[[0, 2]] = 0.5;
        assert!(matches!(
            validate_comm_matrix(sparse.view(), &p3),
            Err(GraphError::SparsityViolation { row: 0, col: 2, .. })
        ));
    }

    #[test]
    fn rank_deficient_with_zero_row_sums() {
        // Rows sum to zero but two eigen-directions are annihilated.
        let c4 = generate_graph(GraphKind::Cycle, 4).unwrap();
        let p = array![
            [1.0, -1.0, 0.0, 0.0],
            [-1.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, -1.0],
            [0.0, 0.0, -1.0, 1.0]
        ];
        assert!(matches!(
            validate_comm_matrix(p.view(), &c4),
            Err(GraphError::NullSpaceViolation { index: 1, .. })
        ));
    }

    #[test]
    fn non_symmetric_custom_matrix_accepted() {
        let p3 = generate_graph(GraphKind::Path, 3).unwrap();
        let p = array![[2.0, -2.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -3.0, 3.0]];
        let cm = CommunicationMatrix::custom(p, &p3).unwrap();
        assert_eq!(cm.source(), MatrixSource::Custom);
    }

    #[test]
    fn graph_file_roundtrip_and_errors() {
        let g = generate_graph(GraphKind::Circulant { degree: 4 }, 9).unwrap();
        assert_eq!(Graph::parse(&g.to_file_string()).unwrap(), g);

        let err = Graph::parse("3 2\n0 1\n1 x\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }), "{err:?}");
        let err = Graph::parse("3 3\n0 1\n1 2\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { .. }));
        assert!(matches!(
            Graph::parse("4 2\n0 1\n2 3\n"),
            Err(GraphError::Disconnected { .. })
        ));
    }
}
