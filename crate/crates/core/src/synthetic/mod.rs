//! Discrete structural causal models with exact ground truth.
//!
//! Rows are sampled ancestrally in topological order. Row `r` draws from its
//! own ChaCha8 stream: the generator is `ChaCha8Rng::seed_from_u64(seed)`
//! (the seed expanded to a 256-bit key with PCG32, as `rand_core` documents)
//! with the stream number set to `r`. Each node then consumes one `f64`
//! uniform on `[0, 1)` built from the top 53 bits of the next `u64`, and
//! takes the first category whose cumulative probability exceeds it. Emitter
//! columns follow in name order, one uniform each, as
//! `mean[category] + spread * (2u - 1)`. Since a row depends only on
//! `(seed, r)`, rows can be generated on any number of threads.

mod fixtures;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::causal::cpt::{check_tables, local_prob};
use crate::causal::info::mutual_information_unchecked;
use crate::causal::{config_index, for_each_assignment, CausalGraph, ConditionalTable, DiscreteDataset, Variable};
use crate::error::{Error, Result};
use crate::ingest::GraphSpec;

pub use fixtures::{builtin_document, copy_pair, paper_shaped, BUILTIN_SPECS};

/// Largest joint state space that truths are enumerated over.
pub const MAX_STATES: u128 = 10_000_000;

/// Graph given by builtin name or inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphRef {
    Builtin(String),
    Inline(GraphSpec),
}

/// `P(Y <= k | s) = logistic(thresholds[k] - s)` with
/// `s = sum_p coefficients[p] * x_p`, where a parent at category `v` of `K`
/// enters as `x_p = 2v / (K - 1) - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdinalLogistic {
    pub coefficients: BTreeMap<String, f64>,
    pub thresholds: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableDoc {
    Probs { probs: Vec<Vec<f64>> },
    Logistic { ordinal_logistic: OrdinalLogistic },
}

/// Continuous outcome emitted for a node: uniform noise around a per-category mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Emitter {
    pub means: Vec<f64>,
    pub spread: f64,
}

/// The on-disk SCM document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScmDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub graph: GraphRef,
    pub seed: u64,
    pub n: usize,
    pub tables: BTreeMap<String, TableDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub emitters: BTreeMap<String, Emitter>,
}

impl ScmDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }
}

/// A validated SCM: graph, exact tables in node order, and emitters.
#[derive(Clone, Debug)]
pub struct ScmSpec {
    pub label: String,
    pub graph: CausalGraph,
    pub tables: Vec<ConditionalTable>,
    pub seed: u64,
    pub n: usize,
    pub emitters: BTreeMap<String, Emitter>,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn expand_logistic(graph: &CausalGraph, j: usize, m: &OrdinalLogistic) -> Result<Vec<Vec<f64>>> {
    let name = graph.name(j);
    let k = graph.cardinality(j);
    if m.thresholds.len() + 1 != k {
        return Err(Error::InvalidSpec(format!(
            "`{name}` has {k} categories but {} thresholds",
            m.thresholds.len()
        )));
    }
    if m.thresholds.windows(2).any(|w| !(w[0] < w[1])) || m.thresholds.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidSpec(format!("`{name}` thresholds must increase")));
    }
    let parents = graph.parents(j);
    let mut beta = vec![0.0; parents.len()];
    for (p, &c) in &m.coefficients {
        let pos = parents
            .iter()
            .position(|&q| graph.name(q) == p)
            .ok_or_else(|| Error::InvalidSpec(format!("`{p}` is not a parent of `{name}`")))?;
        if !c.is_finite() {
            return Err(Error::InvalidSpec(format!("coefficient of `{p}` on `{name}`")));
        }
        beta[pos] = c;
    }
    let cards: Vec<usize> = parents.iter().map(|&p| graph.cardinality(p)).collect();
    let mut rows = Vec::new();
    for_each_assignment(&cards, |cfg| {
        let s: f64 = cfg
            .iter()
            .zip(&cards)
            .zip(&beta)
            .map(|((&v, &kp), b)| {
                let x = if kp > 1 { 2.0 * v as f64 / (kp - 1) as f64 - 1.0 } else { 0.0 };
                b * x
            })
            .sum();
        let mut row = Vec::with_capacity(k);
        let mut prev = 0.0;
        for t in &m.thresholds {
            let c = logistic(t - s);
            row.push(c - prev);
            prev = c;
        }
        row.push(1.0 - prev);
        rows.push(row);
    });
    Ok(rows)
}

impl ScmSpec {
    pub fn from_document(doc: &ScmDocument) -> Result<Self> {
        let invalid = |e: Error| match e {
            Error::InvalidSpec(_) => e,
            other => Error::InvalidSpec(other.to_string()),
        };
        let spec = match &doc.graph {
            GraphRef::Builtin(name) => GraphSpec::builtin(name)
                .ok_or_else(|| Error::InvalidSpec(format!("unknown builtin graph `{name}`")))?,
            GraphRef::Inline(g) => g.clone(),
        };
        let graph = CausalGraph::new(spec);
        if let Some(extra) = doc.tables.keys().find(|k| graph.index_of(k).is_none()) {
            return Err(Error::InvalidSpec(format!("table for unknown node `{extra}`")));
        }
        let mut tables = Vec::with_capacity(graph.len());
        for j in 0..graph.len() {
            let name = graph.name(j);
            let doc_table = doc
                .tables
                .get(name)
                .ok_or_else(|| Error::InvalidSpec(format!("no table for node `{name}`")))?;
            let probs = match doc_table {
                TableDoc::Probs { probs } => probs.clone(),
                TableDoc::Logistic { ordinal_logistic } => expand_logistic(&graph, j, ordinal_logistic)?,
            };
            let parents = graph.parents(j);
            let t = ConditionalTable::from_probs(
                name,
                graph.categories(j).to_vec(),
                parents.iter().map(|&p| graph.name(p).to_string()).collect(),
                parents.iter().map(|&p| graph.cardinality(p)).collect(),
                probs,
            )
            .map_err(invalid)?;
            tables.push(t);
        }
        check_tables(&graph, &tables).map_err(invalid)?;
        for (name, e) in &doc.emitters {
            let j = graph
                .index_of(name)
                .ok_or_else(|| Error::InvalidSpec(format!("emitter for unknown node `{name}`")))?;
            if e.means.len() != graph.cardinality(j) {
                return Err(Error::InvalidSpec(format!(
                    "emitter `{name}` has {} means for {} categories",
                    e.means.len(),
                    graph.cardinality(j)
                )));
            }
            if e.means.iter().any(|m| !m.is_finite()) || !(e.spread >= 0.0) || !e.spread.is_finite() {
                return Err(Error::InvalidSpec(format!("emitter `{name}` has invalid parameters")));
            }
        }
        Ok(ScmSpec {
            label: doc.label.clone().unwrap_or_else(|| "synthetic".into()),
            graph,
            tables,
            seed: doc.seed,
            n: doc.n,
            emitters: doc.emitters.clone(),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_document(&ScmDocument::parse(text)?)
    }

    pub fn builtin(name: &str) -> Option<Self> {
        builtin_document(name).map(|d| Self::from_document(&d).expect("builtin specs are valid"))
    }

    /// Outcome value of each category of `effect`: the emitter means when
    /// the node has an emitter, the indicator of the last category for a
    /// binary node, the category index otherwise.
    pub fn effect_values(&self, effect: &str) -> Result<Vec<f64>> {
        let y = self.graph.require(effect)?;
        let k = self.graph.cardinality(y);
        Ok(match self.emitters.get(effect) {
            Some(e) => e.means.clone(),
            None if k == 2 => vec![0.0, 1.0],
            None => (0..k).map(|v| v as f64).collect(),
        })
    }

    fn check_space(&self) -> Result<()> {
        let states = self.graph.state_space();
        if states > MAX_STATES {
            return Err(Error::StateExplosion(states));
        }
        Ok(())
    }

    fn cards(&self) -> Vec<usize> {
        (0..self.graph.len()).map(|j| self.graph.cardinality(j)).collect()
    }
}

fn sample_row(spec: &ScmSpec, emit: &[(usize, &Emitter)], r: usize) -> (Vec<u16>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(r as u64);
    let g = &spec.graph;
    let mut a = vec![0usize; g.len()];
    for &j in g.topological_order() {
        let parents = g.parents(j);
        let t = &spec.tables[j];
        let cfg = parents
            .iter()
            .zip(&t.parent_cardinalities)
            .fold(0, |acc, (&p, &k)| acc * k + a[p]);
        let row = t.row(cfg);
        let u: f64 = rng.random();
        let mut cum = 0.0;
        let mut v = row.len() - 1;
        for (i, &p) in row.iter().enumerate() {
            cum += p;
            if u < cum {
                v = i;
                break;
            }
        }
        a[j] = v;
    }
    let values = emit
        .iter()
        .map(|&(j, e)| {
            let u: f64 = rng.random();
            e.means[a[j]] + e.spread * (2.0 * u - 1.0)
        })
        .collect();
    (a.into_iter().map(|v| v as u16).collect(), values)
}

/// Samples `spec.n` rows. Variables are the graph nodes in declaration
/// order; each emitter becomes an outcome column named after its node.
pub fn generate(spec: &ScmSpec) -> Result<DiscreteDataset> {
    let g = &spec.graph;
    let vars = (0..g.len())
        .map(|j| Variable::new(g.name(j), g.categories(j).iter().cloned()))
        .collect();
    let mut ds = DiscreteDataset::new(vars)?.with_label(spec.label.clone());
    let emit: Vec<(usize, &Emitter)> = spec
        .emitters
        .iter()
        .map(|(name, e)| (g.index_of(name).expect("validated emitter"), e))
        .collect();
    let rows: Vec<(Vec<u16>, Vec<f64>)> = (0..spec.n)
        .into_par_iter()
        .map(|r| sample_row(spec, &emit, r))
        .collect();
    let mut columns = vec![Vec::with_capacity(spec.n); emit.len()];
    for (row, values) in &rows {
        ds.push_row(row)?;
        for (c, v) in columns.iter_mut().zip(values) {
            c.push(*v);
        }
    }
    for ((name, _), col) in spec.emitters.iter().zip(columns) {
        ds.set_outcome(name.clone(), col)?;
    }
    Ok(ds)
}

/// Exact marginal over `vars` (mixed-radix, first variable most significant).
pub fn marginal(spec: &ScmSpec, vars: &[&str]) -> Result<Vec<f64>> {
    spec.check_space()?;
    let g = &spec.graph;
    let idx = vars.iter().map(|v| g.require(v)).collect::<Result<Vec<_>>>()?;
    let mcards: Vec<usize> = idx.iter().map(|&j| g.cardinality(j)).collect();
    let mut out = vec![0.0; mcards.iter().product()];
    let mut vals = vec![0usize; idx.len()];
    for_each_assignment(&spec.cards(), |a| {
        let p: f64 = (0..g.len()).map(|j| local_prob(g, &spec.tables, j, a)).product();
        for (slot, &j) in vals.iter_mut().zip(&idx) {
            *slot = a[j];
        }
        out[config_index(&vals, &mcards)] += p;
    });
    Ok(out)
}

/// `E[Y | do(X = hi)] - E[Y | do(X = lo)]` by enumerating the mutilated
/// models, with `Y` valued per [`ScmSpec::effect_values`].
pub fn true_ace(spec: &ScmSpec, treatment: &str, effect: &str, lo: &str, hi: &str) -> Result<f64> {
    let values = spec.effect_values(effect)?;
    true_ace_with_values(spec, treatment, effect, &values, lo, hi)
}

pub fn true_ace_with_values(
    spec: &ScmSpec,
    treatment: &str,
    effect: &str,
    values: &[f64],
    lo: &str,
    hi: &str,
) -> Result<f64> {
    spec.check_space()?;
    let g = &spec.graph;
    let t = g.require(treatment)?;
    let y = g.require(effect)?;
    if values.len() != g.cardinality(y) {
        return Err(Error::InvalidSpec(format!("outcome values do not match `{effect}`")));
    }
    let level = |l: &str| {
        g.categories(t).iter().position(|c| c == l).ok_or_else(|| Error::UnknownLevel {
            variable: treatment.to_string(),
            level: l.to_string(),
        })
    };
    let (lo, hi) = (level(lo)?, level(hi)?);
    let mut cards = spec.cards();
    cards[t] = 1;
    let mut buf = vec![0usize; g.len()];
    let mut expect = |xv: usize| {
        let mut e = 0.0;
        for_each_assignment(&cards, |a| {
            buf.copy_from_slice(a);
            buf[t] = xv;
            let p: f64 = (0..g.len())
                .filter(|&j| j != t)
                .map(|j| local_prob(g, &spec.tables, j, &buf))
                .product();
            e += p * values[buf[y]];
        });
        e
    };
    let e_hi = expect(hi);
    let e_lo = expect(lo);
    Ok(e_hi - e_lo)
}

/// Exact `I(X; Y | Z)` from the enumerated joint.
pub fn true_cmi(spec: &ScmSpec, x: &str, y: &str, z: &[&str]) -> Result<f64> {
    if x == y || z.contains(&x) || z.contains(&y) {
        return Err(Error::InvalidSpec("x, y and z must be disjoint".into()));
    }
    let mut vars = z.to_vec();
    vars.push(x);
    vars.push(y);
    let joint = marginal(spec, &vars)?;
    let g = &spec.graph;
    let (kx, ky) = (g.cardinality(g.require(x)?), g.cardinality(g.require(y)?));
    let mut cmi = 0.0;
    let mut table = vec![vec![0.0; ky]; kx];
    for block in joint.chunks(kx * ky) {
        let pz: f64 = block.iter().sum();
        if pz <= 0.0 {
            continue;
        }
        for (i, row) in table.iter_mut().enumerate() {
            for (j, p) in row.iter_mut().enumerate() {
                *p = block[i * ky + j] / pz;
            }
        }
        cmi += pz * mutual_information_unchecked(&table);
    }
    Ok(cmi.max(0.0))
}
