use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::count::{config_index, count_mapped, for_each_assignment};
use super::dataset::DiscreteDataset;
use super::graph::CausalGraph;
use crate::error::{Error, Result};

const ROW_TOLERANCE: f64 = 1e-9;

/// `P(node | parents)` with one probability row per parent configuration.
/// Configurations are mixed-radix over `parents`, first parent most significant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTable {
    pub node: String,
    pub categories: Vec<String>,
    pub parents: Vec<String>,
    pub parent_cardinalities: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub counts: Vec<Vec<u64>>,
    pub probs: Vec<Vec<f64>>,
}

impl ConditionalTable {
    /// A table with exactly specified probabilities.
    pub fn from_probs(
        node: impl Into<String>,
        categories: Vec<String>,
        parents: Vec<String>,
        parent_cardinalities: Vec<usize>,
        probs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let t = ConditionalTable {
            node: node.into(),
            categories,
            parents,
            parent_cardinalities,
            alpha: None,
            counts: Vec::new(),
            probs,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn cardinality(&self) -> usize {
        self.categories.len()
    }

    pub fn configurations(&self) -> usize {
        self.parent_cardinalities.iter().product()
    }

    pub fn config_of(&self, parent_values: &[usize]) -> usize {
        config_index(parent_values, &self.parent_cardinalities)
    }

    pub fn row(&self, config: usize) -> &[f64] {
        &self.probs[config]
    }

    pub fn prob(&self, config: usize, value: usize) -> f64 {
        self.probs[config][value]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(format!("table `{}`: {m}", self.node)));
        if self.categories.is_empty() {
            return bad("no categories".into());
        }
        if self.parents.len() != self.parent_cardinalities.len() {
            return bad("parent names and cardinalities differ in length".into());
        }
        if self.probs.len() != self.configurations() {
            return bad(format!(
                "expected {} parent configurations, found {}",
                self.configurations(),
                self.probs.len()
            ));
        }
        for (c, row) in self.probs.iter().enumerate() {
            if row.len() != self.cardinality() {
                return bad(format!("row {c} has {} entries", row.len()));
            }
            if row.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                return bad(format!("row {c} has an invalid probability"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::NotNormalized(sum));
            }
        }
        Ok(())
    }
}

/// Maps each dataset code of `var` to the graph category with the same label.
fn category_map(graph: &CausalGraph, node: usize, data: &DiscreteDataset, var: usize) -> Result<Vec<u16>> {
    let cats = graph.categories(node);
    data.variables()[var]
        .categories
        .iter()
        .map(|label| {
            cats.iter()
                .position(|c| c == label)
                .map(|i| i as u16)
                .ok_or_else(|| Error::UnknownLevel {
                    variable: graph.name(node).to_string(),
                    level: label.clone(),
                })
        })
        .collect()
}

/// Laplace-smoothed maximum likelihood tables, one per graph node in
/// declaration order. Dataset categories are matched to graph categories by
/// label; parent configurations without data get the uniform row.
pub fn fit_cpts(graph: &CausalGraph, data: &DiscreteDataset, alpha: f64) -> Result<Vec<ConditionalTable>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidSpec(format!("smoothing alpha {alpha} must be > 0")));
    }
    let vars = (0..graph.len())
        .map(|j| data.require(graph.name(j)))
        .collect::<Result<Vec<_>>>()?;
    let maps = (0..graph.len())
        .map(|j| category_map(graph, j, data, vars[j]))
        .collect::<Result<Vec<_>>>()?;

    let mut tables = Vec::with_capacity(graph.len());
    for j in 0..graph.len() {
        let parents = graph.parents(j);
        let k = graph.cardinality(j);
        let mut columns: Vec<(&[u16], &[u16], usize)> = parents
            .iter()
            .map(|&p| (data.column(vars[p]), maps[p].as_slice(), graph.cardinality(p)))
            .collect();
        columns.push((data.column(vars[j]), maps[j].as_slice(), k));
        let flat = count_mapped(data.len(), &columns);

        let counts: Vec<Vec<u64>> = flat.chunks(k).map(<[u64]>::to_vec).collect();
        let probs = counts
            .iter()
            .map(|row| {
                let total = row.iter().sum::<u64>() as f64 + alpha * k as f64;
                row.iter().map(|&c| (c as f64 + alpha) / total).collect()
            })
            .collect();
        tables.push(ConditionalTable {
            node: graph.name(j).to_string(),
            categories: graph.categories(j).to_vec(),
            parents: parents.iter().map(|&p| graph.name(p).to_string()).collect(),
            parent_cardinalities: parents.iter().map(|&p| graph.cardinality(p)).collect(),
            alpha: Some(alpha),
            counts,
            probs,
        });
    }
    Ok(tables)
}

/// Checks that `tables` line up with the graph's nodes, parents and categories.
pub fn check_tables(graph: &CausalGraph, tables: &[ConditionalTable]) -> Result<()> {
    if tables.len() != graph.len() {
        return Err(Error::InvalidSpec(format!(
            "{} tables for {} nodes",
            tables.len(),
            graph.len()
        )));
    }
    for (j, t) in tables.iter().enumerate() {
        let parents: Vec<&str> = graph.parents(j).iter().map(|&p| graph.name(p)).collect();
        if t.node != graph.name(j)
            || t.parents != parents
            || t.categories != graph.categories(j)
            || t.parent_cardinalities
                != graph.parents(j).iter().map(|&p| graph.cardinality(p)).collect::<Vec<_>>()
        {
            return Err(Error::InvalidSpec(format!(
                "table for `{}` does not match the graph",
                graph.name(j)
            )));
        }
        t.validate()?;
    }
    Ok(())
}

/// `P(x_j | pa_j)` for node `j` under a full assignment of category indices.
pub(crate) fn local_prob(graph: &CausalGraph, tables: &[ConditionalTable], j: usize, assignment: &[usize]) -> f64 {
    let t = &tables[j];
    let config = graph
        .parents(j)
        .iter()
        .zip(&t.parent_cardinalities)
        .fold(0, |acc, (&p, &k)| acc * k + assignment[p]);
    t.probs[config][assignment[j]]
}

/// Product of the local conditionals for a full assignment of category
/// indices in graph node order.
pub fn joint_probability(graph: &CausalGraph, tables: &[ConditionalTable], assignment: &[usize]) -> Result<f64> {
    if assignment.len() < graph.len() {
        return Err(Error::IncompleteAssignment(graph.name(assignment.len()).to_string()));
    }
    for (j, &v) in assignment.iter().enumerate().take(graph.len()) {
        if v >= graph.cardinality(j) {
            return Err(Error::UnknownLevel {
                variable: graph.name(j).to_string(),
                level: v.to_string(),
            });
        }
    }
    Ok((0..graph.len())
        .map(|j| local_prob(graph, tables, j, assignment))
        .product())
}

/// [`joint_probability`] with the assignment given as node name to category label.
pub fn joint_probability_labels(
    graph: &CausalGraph,
    tables: &[ConditionalTable],
    assignment: &BTreeMap<String, String>,
) -> Result<f64> {
    let mut idx = Vec::with_capacity(graph.len());
    for j in 0..graph.len() {
        let name = graph.name(j);
        let label = assignment
            .get(name)
            .ok_or_else(|| Error::IncompleteAssignment(name.to_string()))?;
        let v = graph
            .categories(j)
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLevel {
                variable: name.to_string(),
                level: label.clone(),
            })?;
        idx.push(v);
    }
    joint_probability(graph, tables, &idx)
}

/// Sum of the joint over every assignment.
pub fn total_probability(graph: &CausalGraph, tables: &[ConditionalTable]) -> f64 {
    let cards: Vec<usize> = (0..graph.len()).map(|j| graph.cardinality(j)).collect();
    let mut sum = 0.0;
    for_each_assignment(&cards, |a| {
        sum += (0..graph.len())
            .map(|j| local_prob(graph, tables, j, a))
            .product::<f64>();
    });
    sum
}

pub fn write_cpts(tables: &[ConditionalTable]) -> String {
    let mut s = serde_json::to_string_pretty(tables).expect("tables serialize");
    s.push('\n');
    s
}

pub fn read_cpts(text: &str) -> Result<Vec<ConditionalTable>> {
    let tables: Vec<ConditionalTable> =
        serde_json::from_str(text).map_err(|e| Error::schema(e.line(), e.to_string()))?;
    for t in &tables {
        t.validate()?;
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::dataset::Variable;
    use crate::ingest::{GraphSpec, NodeKind, NodeSpec};

    fn binary(name: &str, kind: NodeKind) -> NodeSpec {
        NodeSpec {
            name: name.into(),
            kind,
            categories: vec!["0".into(), "1".into()],
        }
    }

    fn chain() -> CausalGraph {
        CausalGraph::new(
            GraphSpec::new(
                vec![binary("X", NodeKind::Exogenous), binary("Y", NodeKind::Endogenous)],
                vec![("X".into(), "Y".into())],
            )
            .unwrap(),
        )
    }

    fn xy_data(rows: &[[u16; 2]]) -> DiscreteDataset {
        let mut ds = DiscreteDataset::new(vec![
            Variable::new("X", ["0", "1"]),
            Variable::new("Y", ["0", "1"]),
        ])
        .unwrap();
        for r in rows {
            ds.push_row(r).unwrap();
        }
        ds
    }

    #[test]
    fn laplace_smoothing() {
        let g = chain();
        let t = fit_cpts(&g, &xy_data(&[[0, 0], [0, 0]]), 1.0).unwrap();
        assert_eq!(t[1].counts[0], vec![2, 0]);
        assert_eq!(t[1].prob(0, 0), 0.75);
        assert_eq!(t[1].row(1), &[0.5, 0.5]);
        assert_eq!(t[0].row(0), &[0.75, 0.25]);
        for table in &t {
            for row in &table.probs {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fit_errors() {
        let g = chain();
        let ds = DiscreteDataset::new(vec![Variable::new("X", ["0", "1"])]).unwrap();
        assert_eq!(fit_cpts(&g, &ds, 1.0).unwrap_err().code(), "E_MISSING_VARIABLE");
        assert!(fit_cpts(&g, &xy_data(&[]), 0.0).is_err());
    }

    #[test]
    fn dataset_categories_matched_by_label() {
        let g = chain();
        let mut ds = DiscreteDataset::new(vec![
            Variable::new("Y", ["1", "0"]),
            Variable::new("X", ["1"]),
        ])
        .unwrap();
        ds.push_row(&[0, 0]).unwrap();
        let t = fit_cpts(&g, &ds, 1.0).unwrap();
        assert_eq!(t[0].counts[0], vec![0, 1]);
        assert_eq!(t[1].counts[1], vec![0, 1]);
    }

    #[test]
    fn chain_joint() {
        let g = chain();
        let t = vec![
            ConditionalTable::from_probs("X", vec!["0".into(), "1".into()], vec![], vec![], vec![vec![0.4, 0.6]]).unwrap(),
            ConditionalTable::from_probs(
                "Y",
                vec!["0".into(), "1".into()],
                vec!["X".into()],
                vec![2],
                vec![vec![0.7, 0.3], vec![0.2, 0.8]],
            )
            .unwrap(),
        ];
        check_tables(&g, &t).unwrap();
        assert!((joint_probability(&g, &t, &[1, 1]).unwrap() - 0.48).abs() < 1e-15);
        let labels: BTreeMap<String, String> =
            [("X".to_string(), "1".to_string()), ("Y".to_string(), "1".to_string())].into();
        assert!((joint_probability_labels(&g, &t, &labels).unwrap() - 0.48).abs() < 1e-15);
        let partial: BTreeMap<String, String> = [("X".to_string(), "1".to_string())].into();
        assert_eq!(
            joint_probability_labels(&g, &t, &partial).unwrap_err().code(),
            "E_INCOMPLETE_ASSIGNMENT"
        );
        assert_eq!(
            joint_probability(&g, &t, &[1]).unwrap_err().code(),
            "E_INCOMPLETE_ASSIGNMENT"
        );
        assert!((total_probability(&g, &t) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_uniform_nodes() {
        let g = CausalGraph::new(
            GraphSpec::new(
                vec![
                    binary("A", NodeKind::Exogenous),
                    binary("B", NodeKind::Exogenous),
                    binary("C", NodeKind::Exogenous),
                ],
                vec![],
            )
            .unwrap(),
        );
        let mut ds = DiscreteDataset::new(vec![
            Variable::new("A", ["0", "1"]),
            Variable::new("B", ["0", "1"]),
            Variable::new("C", ["0", "1"]),
        ])
        .unwrap();
        for code in 0..8u16 {
            ds.push_row(&[code >> 2, (code >> 1) & 1, code & 1]).unwrap();
        }
        let t = fit_cpts(&g, &ds, 1.0).unwrap();
        for_each_assignment(&[2, 2, 2], |a| {
            assert_eq!(joint_probability(&g, &t, a).unwrap(), 0.125);
        });
    }

    #[test]
    fn unnormalized_rows_rejected() {
        let e = ConditionalTable::from_probs("X", vec!["0".into(), "1".into()], vec![], vec![], vec![vec![0.4, 0.5]]);
        assert_eq!(e.unwrap_err().code(), "E_NOT_NORMALIZED");
    }

    #[test]
    fn json_round_trip() {
        let g = chain();
        let t = fit_cpts(&g, &xy_data(&[[0, 1], [1, 1]]), 0.5).unwrap();
        assert_eq!(read_cpts(&write_cpts(&t)).unwrap(), t);
    }
}
