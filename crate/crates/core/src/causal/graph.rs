use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::ingest::{GraphSpec, NodeKind};

/// Kahn's algorithm with ready nodes taken in name order, so the result is
/// deterministic for a given node set and edge relation.
pub fn topological_order(names: &[&str], edges: &[(usize, usize)]) -> Result<Vec<usize>> {
    let n = names.len();
    let mut indegree = vec![0usize; n];
    let mut children = vec![Vec::new(); n];
    for &(f, t) in edges {
        indegree[t] += 1;
        children[f].push(t);
    }
    let mut ready: BTreeSet<(&str, usize)> = (0..n)
        .filter(|&i| indegree[i] == 0)
        .map(|i| (names[i], i))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(first) = ready.pop_first() {
        let (_, i) = first;
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert((names[c], c));
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n)
            .filter(|&i| indegree[i] > 0)
            .map(|i| names[i])
            .min()
            .unwrap_or_default();
        return Err(Error::Cycle(stuck.to_string()));
    }
    Ok(order)
}

/// A validated DAG with parent/child lists and a fixed topological order.
#[derive(Clone, Debug)]
pub struct CausalGraph {
    spec: GraphSpec,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    order: Vec<usize>,
}

impl CausalGraph {
    pub fn new(spec: GraphSpec) -> Self {
        let index: HashMap<String, usize> = spec
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.clone(), i))
            .collect();
        let n = spec.nodes().len();
        let edges: Vec<(usize, usize)> = spec
            .edges()
            .iter()
            .map(|(f, t)| (index[f], index[t]))
            .collect();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(f, t) in &edges {
            parents[t].push(f);
            children[f].push(t);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        let names: Vec<&str> = spec.nodes().iter().map(|n| n.name.as_str()).collect();
        let order = topological_order(&names, &edges).expect("GraphSpec is validated acyclic");
        CausalGraph {
            spec,
            index,
            parents,
            children,
            edges,
            order,
        }
    }

    pub fn paper_default() -> Self {
        Self::new(GraphSpec::paper_default())
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub(crate) fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::MissingVariable(name.to_string()))
    }

    pub fn name(&self, node: usize) -> &str {
        &self.spec.nodes()[node].name
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.spec.nodes()[node].kind
    }

    pub fn categories(&self, node: usize) -> &[String] {
        &self.spec.nodes()[node].categories
    }

    pub fn cardinality(&self, node: usize) -> usize {
        self.spec.nodes()[node].categories.len()
    }

    /// Parent indices in node declaration order.
    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn parent_names(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.require(name)?;
        Ok(self.parents[i].iter().map(|&p| self.name(p)).collect())
    }

    pub fn child_names(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.require(name)?;
        Ok(self.children[i].iter().map(|&c| self.name(c)).collect())
    }

    /// Edges in declaration order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    pub fn topological_names(&self) -> Vec<&str> {
        self.order.iter().map(|&i| self.name(i)).collect()
    }

    /// Number of joint configurations over all nodes, saturating.
    pub fn state_space(&self) -> u128 {
        (0..self.len())
            .map(|i| self.cardinality(i) as u128)
            .fold(1u128, |acc, k| acc.saturating_mul(k))
    }
}
