use rayon::prelude::*;
use serde::Serialize;

use super::ace::{ace, AceOptions, Outcome};
use super::dataset::DiscreteDataset;
use super::graph::CausalGraph;
use super::info::conditional_mutual_information;
use crate::error::Result;
use crate::ingest::{DelimitedTable, ReportValue};

/// Conditioning set used for the CMI of an edge `u -> v`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CmiConditioning {
    /// `parents(v)` without `u`.
    #[default]
    OtherParents,
    Empty,
}

#[derive(Clone, Debug)]
pub struct EdgeOptions {
    pub alpha: f64,
    pub smoothing: Option<f64>,
    pub conditioning: CmiConditioning,
}

impl Default for EdgeOptions {
    fn default() -> Self {
        EdgeOptions {
            alpha: 1.0,
            smoothing: Some(1.0),
            conditioning: CmiConditioning::OtherParents,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeRecord {
    pub cause: String,
    pub effect: String,
    pub outcome: Outcome,
    pub adjustment: Vec<String>,
    pub lo: String,
    pub hi: String,
    pub ace: f64,
    pub ace_per_level: f64,
    pub cmi: f64,
    pub cmi_given: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeReport {
    pub model: String,
    pub edges: Vec<EdgeRecord>,
}

/// ACE and CMI for every edge, in edge declaration order.
pub fn edge_report(graph: &CausalGraph, data: &DiscreteDataset, opts: &EdgeOptions) -> Result<EdgeReport> {
    let edges: Vec<(usize, usize)> = graph.edges().to_vec();
    let records = edges
        .par_iter()
        .map(|&(u, v)| edge_record(graph, data, u, v, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(EdgeReport {
        model: data.label().unwrap_or_default().to_string(),
        edges: records,
    })
}

fn edge_record(
    graph: &CausalGraph,
    data: &DiscreteDataset,
    u: usize,
    v: usize,
    opts: &EdgeOptions,
) -> Result<EdgeRecord> {
    let (cause, effect) = (graph.name(u), graph.name(v));
    let outcome = Outcome::resolve(data, effect)?;
    let est = ace(
        graph,
        data,
        cause,
        &outcome,
        &AceOptions {
            smoothing: opts.smoothing,
            ..Default::default()
        },
    )?;
    let given: Vec<&str> = match opts.conditioning {
        CmiConditioning::OtherParents => graph
            .parents(v)
            .iter()
            .filter(|&&p| p != u)
            .map(|&p| graph.name(p))
            .collect(),
        CmiConditioning::Empty => Vec::new(),
    };
    let cmi = conditional_mutual_information(data, cause, effect, &given, opts.alpha)?;
    Ok(EdgeRecord {
        cause: cause.to_string(),
        effect: effect.to_string(),
        outcome,
        adjustment: est.adjustment,
        lo: est.lo,
        hi: est.hi,
        ace: est.ace,
        ace_per_level: est.ace_per_level,
        cmi,
        cmi_given: given.into_iter().map(String::from).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeMetric {
    Ace,
    AcePerLevel,
    Cmi,
}

impl EdgeMetric {
    fn of(self, e: &EdgeRecord) -> f64 {
        match self {
            EdgeMetric::Ace => e.ace,
            EdgeMetric::AcePerLevel => e.ace_per_level,
            EdgeMetric::Cmi => e.cmi,
        }
    }
}

impl EdgeReport {
    pub fn to_value(&self) -> ReportValue {
        let edges: Vec<ReportValue> = self
            .edges
            .iter()
            .map(|e| {
                let outcome = match &e.outcome {
                    Outcome::Column { name } => format!("column:{name}"),
                    Outcome::Indicator { variable, level } => format!("indicator:{variable}={level}"),
                    Outcome::Ordinal { variable } => format!("ordinal:{variable}"),
                };
                ReportValue::map()
                    .with("cause", e.cause.as_str())
                    .with("effect", e.effect.as_str())
                    .with("outcome", outcome)
                    .with("adjustment", e.adjustment.clone())
                    .with("lo", e.lo.as_str())
                    .with("hi", e.hi.as_str())
                    .with("ace", e.ace)
                    .with("ace_per_level", e.ace_per_level)
                    .with("cmi", e.cmi)
                    .with("cmi_given", e.cmi_given.clone())
            })
            .collect();
        ReportValue::map()
            .with("model", self.model.as_str())
            .with("edge_count", self.edges.len())
            .with("edges", edges)
    }

    /// One row per edge: the DAG annotation consumed by plotters.
    pub fn edges_table(&self) -> DelimitedTable {
        let mut t = DelimitedTable::new(["model", "cause", "effect", "ace", "ace_per_level", "cmi"]);
        for e in &self.edges {
            t.push(vec![
                self.model.as_str().into(),
                e.cause.as_str().into(),
                e.effect.as_str().into(),
                e.ace.into(),
                e.ace_per_level.into(),
                e.cmi.into(),
            ]);
        }
        t
    }
}

/// Rows are `(model, cause)`, columns the effects in graph order; cells
/// without an edge are left empty.
pub fn effect_table(graph: &CausalGraph, reports: &[EdgeReport], metric: EdgeMetric) -> DelimitedTable {
    let mut effects: Vec<usize> = graph.edges().iter().map(|&(_, v)| v).collect();
    effects.sort_unstable();
    effects.dedup();
    let mut causes: Vec<usize> = graph.edges().iter().map(|&(u, _)| u).collect();
    causes.sort_unstable();
    causes.dedup();

    let mut header = vec!["model".to_string(), "cause".to_string()];
    header.extend(effects.iter().map(|&v| graph.name(v).to_string()));
    let mut t = DelimitedTable::new(header);
    for r in reports {
        for &u in &causes {
            let mut row: Vec<ReportValue> = vec![r.model.as_str().into(), graph.name(u).into()];
            for &v in &effects {
                let cell = r
                    .edges
                    .iter()
                    .find(|e| e.cause == graph.name(u) && e.effect == graph.name(v))
                    .map_or(ReportValue::Null, |e| metric.of(e).into());
                row.push(cell);
            }
            t.push(row);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::dataset::Variable;
    use crate::causal::info::mutual_information;
    use crate::ingest::{GraphSpec, NodeKind, NodeSpec};

    fn single_edge() -> CausalGraph {
        let n = |name: &str, kind| NodeSpec {
            name: name.into(),
            kind,
            categories: vec!["a".into(), "b".into()],
        };
        CausalGraph::new(
            GraphSpec::new(
                vec![n("X", NodeKind::Exogenous), n("Y", NodeKind::Endogenous)],
                vec![("X".into(), "Y".into())],
            )
            .unwrap(),
        )
    }

    #[test]
    fn single_edge_cmi_is_mi() {
        let g = single_edge();
        let mut ds = DiscreteDataset::new(vec![Variable::new("X", ["a", "b"]), Variable::new("Y", ["a", "b"])])
            .unwrap()
            .with_label("m1");
        for r in [[0, 0], [0, 0], [1, 1], [1, 0], [0, 1], [1, 1]] {
            ds.push_row(&r).unwrap();
        }
        let rep = edge_report(&g, &ds, &EdgeOptions::default()).unwrap();
        assert_eq!(rep.edges.len(), 1);
        let e = &rep.edges[0];
        assert!(e.cmi_given.is_empty());
        // smoothed counts (3, 2; 2, 3) over 10
        let mi = mutual_information(&[vec![0.3, 0.2], vec![0.2, 0.3]]).unwrap();
        assert!((e.cmi - mi).abs() < 1e-12);
        assert_eq!(rep.model, "m1");

        let t = effect_table(&g, std::slice::from_ref(&rep), EdgeMetric::Cmi).render();
        assert!(t.starts_with("model,cause,Y\nm1,X,"));
        assert_eq!(rep.edges_table().rows.len(), 1);
    }
}
