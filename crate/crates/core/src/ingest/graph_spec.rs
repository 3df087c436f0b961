use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::causal::graph::topological_order;
use crate::error::{Error, Result};

pub const AGE: &str = "Age";
pub const GENDER: &str = "Gender";
pub const SNR: &str = "SNR";
pub const VOCAB_DIFF: &str = "VocabDiff";
pub const NO_WORDS: &str = "NoWords";
pub const GOP: &str = "GoP";
pub const SUBS_ERR: &str = "SubsErr";
pub const DEL_ERR: &str = "DelErr";
pub const INS_ERR: &str = "InsErr";

/// The three error nodes, in report column order.
pub const ERROR_NODES: [&str; 3] = [SUBS_ERR, DEL_ERR, INS_ERR];

/// Ordinal labels for three-way binned covariates.
pub const THREE_LEVELS: [&str; 3] = ["Low", "Average", "High"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Exogenous,
    Endogenous,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    pub kind: NodeKind,
    pub categories: Vec<String>,
}

/// Validated node and edge declaration of a causal DAG.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraphSpec")]
pub struct GraphSpec {
    nodes: Vec<NodeSpec>,
    edges: Vec<(String, String)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraphSpec {
    nodes: Vec<NodeSpec>,
    edges: Vec<(String, String)>,
}

impl TryFrom<RawGraphSpec> for GraphSpec {
    type Error = Error;

    fn try_from(raw: RawGraphSpec) -> Result<Self> {
        GraphSpec::new(raw.nodes, raw.edges)
    }
}

impl GraphSpec {
    pub fn new(nodes: Vec<NodeSpec>, edges: Vec<(String, String)>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if n.name.is_empty() {
                return Err(Error::InvalidSpec("node with empty name".into()));
            }
            if index.insert(n.name.as_str(), i).is_some() {
                return Err(Error::DuplicateNode(n.name.clone()));
            }
            if n.categories.is_empty() {
                return Err(Error::InvalidSpec(format!(
                    "node `{}` declares no categories",
                    n.name
                )));
            }
            let distinct: HashSet<&String> = n.categories.iter().collect();
            if distinct.len() != n.categories.len() {
                return Err(Error::InvalidSpec(format!(
                    "node `{}` repeats a category",
                    n.name
                )));
            }
        }
        let mut seen = HashSet::new();
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (from, to) in &edges {
            let f = *index
                .get(from.as_str())
                .ok_or_else(|| Error::UnknownNode(from.clone()))?;
            let t = *index
                .get(to.as_str())
                .ok_or_else(|| Error::UnknownNode(to.clone()))?;
            if f == t {
                return Err(Error::SelfLoop(from.clone()));
            }
            if !seen.insert((f, t)) {
                return Err(Error::DuplicateEdge(from.clone(), to.clone()));
            }
            idx_edges.push((f, t));
        }
        let names: Vec<&str> = nodes.iter().map(|n| n.name.as_str()).collect();
        topological_order(&names, &idx_edges)?;
        Ok(GraphSpec { nodes, edges })
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn node(&self, name: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.name == name)
    }

    /// The nine-node graph built from the eight construction rules
    /// (six factors onto each error type, plus Age and VocabDiff onto GoP).
    pub fn paper_default() -> Self {
        Self::builtin_with(true)
    }

    /// Variant matching the printed joint factorization, which drops the
    /// VocabDiff -> error edges.
    pub fn fig3e() -> Self {
        Self::builtin_with(false)
    }

    fn builtin_with(vocab_to_errors: bool) -> Self {
        let three = || THREE_LEVELS.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let node = |name: &str, kind, categories| NodeSpec {
            name: name.to_string(),
            kind,
            categories,
        };
        let nodes = vec![
            node(
                AGE,
                NodeKind::Exogenous,
                crate::ingest::Grade::all().map(|g| g.label()).collect(),
            ),
            node(
                GENDER,
                NodeKind::Exogenous,
                vec!["boy".to_string(), "girl".to_string()],
            ),
            node(SNR, NodeKind::Exogenous, three()),
            node(VOCAB_DIFF, NodeKind::Exogenous, three()),
            node(NO_WORDS, NodeKind::Exogenous, three()),
            node(GOP, NodeKind::Endogenous, three()),
            node(SUBS_ERR, NodeKind::Endogenous, three()),
            node(DEL_ERR, NodeKind::Endogenous, three()),
            node(INS_ERR, NodeKind::Endogenous, three()),
        ];
        let mut edges = Vec::new();
        let mut onto_errors = |cause: &str| {
            for e in ERROR_NODES {
                edges.push((cause.to_string(), e.to_string()));
            }
        };
        onto_errors(AGE);
        onto_errors(GENDER);
        if vocab_to_errors {
            onto_errors(VOCAB_DIFF);
        }
        onto_errors(GOP);
        edges.push((AGE.to_string(), GOP.to_string()));
        edges.push((VOCAB_DIFF.to_string(), GOP.to_string()));
        for cause in [SNR, NO_WORDS] {
            for e in ERROR_NODES {
                edges.push((cause.to_string(), e.to_string()));
            }
        }
        GraphSpec::new(nodes, edges).expect("builtin graph is valid")
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "paper-default" => Some(Self::paper_default()),
            "fig3e" => Some(Self::fig3e()),
            _ => None,
        }
    }
}

/// Where a graph comes from on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphSource {
    PaperDefault,
    Fig3e,
    File(std::path::PathBuf),
}

impl FromStr for GraphSource {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "paper-default" => GraphSource::PaperDefault,
            "fig3e" => GraphSource::Fig3e,
            path => GraphSource::File(path.into()),
        })
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::PaperDefault => f.write_str("paper-default"),
            GraphSource::Fig3e => f.write_str("fig3e"),
            GraphSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl GraphSource {
    pub fn load(&self) -> Result<GraphSpec> {
        match self {
            GraphSource::PaperDefault => Ok(GraphSpec::paper_default()),
            GraphSource::Fig3e => Ok(GraphSpec::fig3e()),
            GraphSource::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io_path(p, e))?;
                parse_graph_spec(&text)
            }
        }
    }
}

/// Parses a JSON graph document with `nodes` and `edges` keys.
pub fn parse_graph_spec(text: &str) -> Result<GraphSpec> {
    let raw: RawGraphSpec =
        serde_json::from_str(text).map_err(|e| Error::schema(e.line(), e.to_string()))?;
    GraphSpec::try_from(raw)
}

pub fn write_graph_spec(spec: &GraphSpec) -> String {
    let mut s = serde_json::to_string_pretty(spec).expect("graph spec serializes");
    s.push('\n');
    s
}
