use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::admm::{Engine, Init, NetworkProblem};
use crate::graph::{generate_graph, laplacian, Graph, GraphError, GraphKind};
use crate::objectives::LocalObjective;

use super::ExperimentError;

/// A full experiment description, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Fallback seed for random graph families.
    #[serde(default)]
    pub seed: Option<u64>,
    pub graph: GraphSpec,
    #[serde(default)]
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub admm: AdmmSpec,
    #[serde(default)]
    pub checks: CheckSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Path { n: usize },
    Cycle { n: usize },
    Complete { n: usize },
    Circulant { n: usize, degree: usize },
    ErdosRenyi {
        n: usize,
        p: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Edge-list file: header `n m`, then one `i j` pair per line.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    /// `estimation`: `f_i(x) = ½(x − i)²` for nodes `i = 1..n`.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub nodes: Vec<NodeObjective>,
}

impl Default for ObjectiveSpec {
    fn default() -> Self {
        ObjectiveSpec {
            preset: Some("estimation".into()),
            nodes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeObjective {
    #[serde(default = "default_kind")]
    pub kind: String,
    pub a: Vec<f64>,
    #[serde(default = "one")]
    pub w: f64,
    #[serde(default)]
    pub tau: f64,
}

fn default_kind() -> String {
    "quadratic".into()
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PenaltySpec {
    Value(f64),
    /// Must be the string `"auto"`: use the certificate-optimal `c*`.
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitSpec {
    /// `"zero"`.
    Named(String),
    /// `x(0)` for `d = 1`, with `y(0) = D⁻¹P x(0)` and `p(0) = c·y(0)`.
    Primal(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmmSpec {
    #[serde(default = "default_c")]
    pub c: PenaltySpec,
    /// Multiplies the resolved penalty (useful with `c = "auto"`).
    #[serde(default = "one")]
    pub c_scale: f64,
    #[serde(rename = "T", alias = "iterations", default = "default_t")]
    pub iterations: usize,
    #[serde(default = "default_engine")]
    pub engine: String,
    #[serde(default = "default_init")]
    pub init: InitSpec,
}

fn default_c() -> PenaltySpec {
    PenaltySpec::Value(1.0)
}

fn default_t() -> usize {
    200
}

fn default_engine() -> String {
    "node".into()
}

fn default_init() -> InitSpec {
    InitSpec::Named("zero".into())
}

impl Default for AdmmSpec {
    fn default() -> Self {
        AdmmSpec {
            c: default_c(),
            c_scale: 1.0,
            iterations: default_t(),
            engine: default_engine(),
            init: default_init(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    #[serde(default = "yes")]
    pub update_identity: bool,
    #[serde(default = "yes")]
    pub sublinear: bool,
    #[serde(default = "yes")]
    pub contraction: bool,
    #[serde(default = "yes")]
    pub telescoping: bool,
    /// Re-run with the edge engine and compare iterates.
    #[serde(default)]
    pub equivalence: bool,
    /// Minimum R² of the tail log-error fit; no fit check when absent.
    #[serde(default)]
    pub linear_fit_r2: Option<f64>,
}

fn yes() -> bool {
    true
}

impl Default for CheckSpec {
    fn default() -> Self {
        CheckSpec {
            update_identity: true,
            sublinear: true,
            contraction: true,
            telescoping: true,
            equivalence: false,
            linear_fit_r2: None,
        }
    }
}

impl CheckSpec {
    pub fn all() -> Self {
        CheckSpec {
            equivalence: true,
            ..CheckSpec::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub trace: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

/// Penalty after resolving `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    Fixed(f64),
    Optimal { scale: f64 },
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
            ExperimentError::ConfigParse {
                line,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_toml(&text)?;
        // relative graph files resolve against the config's directory
        if let GraphSpec::File { path: gp } = &mut cfg.graph {
            if gp.is_relative() {
                if let Some(dir) = path.parent() {
                    *gp = dir.join(&*gp);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Structural checks that need no computation.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let invalid = |m: String| Err(ExperimentError::Invalid(m));
        if self.admm.iterations == 0 {
            return invalid("admm.T must be at least 1".into());
        }
        if !(self.admm.c_scale > 0.0) || !self.admm.c_scale.is_finite() {
            return invalid(format!("admm.c_scale must be positive, got {}", self.admm.c_scale));
        }
        self.penalty()?;
        self.engine()?;
        match &self.admm.init {
            InitSpec::Named(s) if s != "zero" => {
                return invalid(format!("admm.init must be \"zero\" or a list of values, got {s:?}"))
            }
            _ => {}
        }
        match (&self.objective.preset, self.objective.nodes.is_empty()) {
            (Some(p), true) if p == "estimation" => {}
            (Some(p), true) => return invalid(format!("unknown objective preset {p:?}")),
            (Some(_), false) => return invalid("objective: give either preset or nodes, not both".into()),
            (None, true) => return invalid("objective: no preset and no nodes".into()),
            (None, false) => {
                for (i, node) in self.objective.nodes.iter().enumerate() {
                    if node.kind != "quadratic" && node.kind != "l1_quadratic" {
                        return invalid(format!("objective.nodes[{i}]: unknown kind {:?}", node.kind));
                    }
                    if node.a.is_empty() {
                        return invalid(format!("objective.nodes[{i}]: empty target"));
                    }
                    if node.w < 0.0 || node.tau < 0.0 {
                        return invalid(format!("objective.nodes[{i}]: w and tau must be nonnegative"));
                    }
                }
            }
        }
        if let Some(r2) = self.checks.linear_fit_r2 {
            if !(0.0..=1.0).contains(&r2) {
                return invalid(format!("checks.linear_fit_r2 must lie in [0, 1], got {r2}"));
            }
        }
        Ok(())
    }

    pub fn penalty(&self) -> Result<Penalty, ExperimentError> {
        match &self.admm.c {
            PenaltySpec::Value(c) if *c > 0.0 && c.is_finite() => {
                Ok(Penalty::Fixed(c * self.admm.c_scale))
            }
            PenaltySpec::Value(c) => Err(ExperimentError::Invalid(format!(
                "admm.c must be positive, got {c}"
            ))),
            PenaltySpec::Named(s) if s == "auto" => Ok(Penalty::Optimal {
                scale: self.admm.c_scale,
            }),
            PenaltySpec::Named(s) => Err(ExperimentError::Invalid(format!(
                "admm.c must be a number or \"auto\", got {s:?}"
            ))),
        }
    }

    pub fn engine(&self) -> Result<Engine, ExperimentError> {
        match self.admm.engine.as_str() {
            "node" => Ok(Engine::Node),
            "edge" => Ok(Engine::Edge),
            other => Err(ExperimentError::Invalid(format!(
                "admm.engine must be \"node\" or \"edge\", got {other:?}"
            ))),
        }
    }

    pub fn is_zero_init(&self) -> bool {
        matches!(&self.admm.init, InitSpec::Named(_))
    }

    pub fn build_graph(&self) -> Result<Graph, ExperimentError> {
        let gen = |kind, n| generate_graph(kind, n).map_err(ExperimentError::from);
        match &self.graph {
            GraphSpec::Path { n } => gen(GraphKind::Path, *n),
            GraphSpec::Cycle { n } => gen(GraphKind::Cycle, *n),
            GraphSpec::Complete { n } => gen(GraphKind::Complete, *n),
            GraphSpec::Circulant { n, degree } => gen(GraphKind::Circulant { degree: *degree }, *n),
            GraphSpec::ErdosRenyi { n, p, seed } => {
                let seed = seed.or(self.seed).unwrap_or(0);
                gen(GraphKind::ErdosRenyi { p: *p, seed }, *n)
            }
            GraphSpec::File { path } => Graph::read_file(path).map_err(|e| match e {
                GraphError::Parse { line, message } => ExperimentError::ConfigParse {
                    line: Some(line),
                    message: format!("graph file {}: {message}", path.display()),
                },
                other => other.into(),
            }),
        }
    }

    pub fn build_objectives(&self, n: usize) -> Result<Vec<LocalObjective>, ExperimentError> {
        if self.objective.preset.is_some() {
            return Ok((1..=n)
                .map(|i| LocalObjective::quadratic(vec![i as f64], 1.0))
                .collect());
        }
        if self.objective.nodes.len() != n {
            return Err(ExperimentError::Invalid(format!(
                "objective.nodes has {} entries for a graph with {n} nodes",
                self.objective.nodes.len()
            )));
        }
        Ok(self
            .objective
            .nodes
            .iter()
            .map(|node| {
                if node.kind == "quadratic" {
                    LocalObjective::quadratic(node.a.clone(), node.w)
                } else {
                    LocalObjective::l1_quadratic(node.a.clone(), node.w, node.tau)
                }
            })
            .collect())
    }

    pub fn build_problem(&self) -> Result<NetworkProblem, ExperimentError> {
        let g = self.build_graph()?;
        let objectives = self.build_objectives(g.node_count())?;
        let p = laplacian(&g);
        Ok(NetworkProblem::new(g, p, objectives)?)
    }

    pub fn build_init(&self, n: usize) -> Result<Init, ExperimentError> {
        match &self.admm.init {
            InitSpec::Named(_) => Ok(Init::Zero),
            InitSpec::Primal(x) if x.len() == n => Ok(Init::Primal(
                ndarray::Array2::from_shape_vec((n, 1), x.clone()).expect("length checked"),
            )),
            InitSpec::Primal(x) => Err(ExperimentError::Invalid(format!(
                "admm.init has {} values for {n} nodes",
                x.len()
            ))),
        }
    }

    /// The worked three-node instance: triangle, `a = (1, 2, 3)`, `c = 1`, 200 rounds.
    pub fn estimation() -> Self {
        ExperimentConfig {
            name: "estimation".into(),
            seed: None,
            graph: GraphSpec::Complete { n: 3 },
            objective: ObjectiveSpec::default(),
            admm: AdmmSpec::default(),
            checks: CheckSpec::default(),
            output: OutputSpec::default(),
        }
    }
}
