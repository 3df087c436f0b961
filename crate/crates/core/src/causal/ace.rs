//! Average causal effect by backdoor adjustment over the treatment's parents.

use serde::Serialize;

use super::count::{config_index, for_each_assignment};
use super::cpt::{local_prob, ConditionalTable};
use super::dataset::DiscreteDataset;
use super::graph::CausalGraph;
use crate::error::{Error, Result};

/// What `Y` is for an effect.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Outcome {
    /// A continuous per-row outcome column.
    Column { name: String },
    /// `1` when the effect variable takes `level`, else `0`.
    Indicator { variable: String, level: String },
    /// The category index of the effect variable.
    Ordinal { variable: String },
}

impl Outcome {
    /// Continuous column named after the effect if the dataset has one,
    /// otherwise the indicator of the last level for a binary variable,
    /// otherwise the ordinal index.
    pub fn resolve(data: &DiscreteDataset, effect: &str) -> Result<Self> {
        if data.outcome(effect).is_some() {
            return Ok(Outcome::Column { name: effect.into() });
        }
        let v = data.variable(effect)?;
        Ok(if v.categories.len() == 2 {
            Outcome::Indicator {
                variable: effect.into(),
                level: v.categories[1].clone(),
            }
        } else {
            Outcome::Ordinal { variable: effect.into() }
        })
    }

    pub fn values(&self, data: &DiscreteDataset) -> Result<Vec<f64>> {
        match self {
            Outcome::Column { name } => data
                .outcome(name)
                .map(<[f64]>::to_vec)
                .ok_or_else(|| Error::MissingVariable(name.clone())),
            Outcome::Indicator { variable, level } => {
                let i = data.require(variable)?;
                let target = data.variables()[i].level_index(level)? as u16;
                Ok(data.column(i).iter().map(|&c| f64::from(c == target)).collect())
            }
            Outcome::Ordinal { variable } => {
                let i = data.require(variable)?;
                Ok(data.column(i).iter().map(|&c| f64::from(c)).collect())
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct AceOptions {
    pub lo: Option<String>,
    pub hi: Option<String>,
    /// Pseudo-count pulling each `(x, z)` cell mean toward `E[Y | x]`.
    /// `None` makes an empty required cell an error.
    pub smoothing: Option<f64>,
    /// Overrides the default adjustment set (the treatment's parents).
    pub adjustment: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AceEstimate {
    pub treatment: String,
    pub outcome: Outcome,
    pub lo: String,
    pub hi: String,
    pub adjustment: Vec<String>,
    pub levels: usize,
    pub do_lo: f64,
    pub do_hi: f64,
    pub ace: f64,
    /// `ace / (levels - 1)`.
    pub ace_per_level: f64,
}

fn resolve_levels(cats: &[String], treatment: &str, opts: &AceOptions) -> Result<(usize, usize)> {
    let find = |label: &Option<String>, default: usize| -> Result<usize> {
        match label {
            None => Ok(default),
            Some(l) => cats.iter().position(|c| c == l).ok_or_else(|| Error::UnknownLevel {
                variable: treatment.to_string(),
                level: l.clone(),
            }),
        }
    };
    Ok((find(&opts.lo, 0)?, find(&opts.hi, cats.len() - 1)?))
}

fn per_level(ace: f64, levels: usize) -> f64 {
    if levels > 1 {
        ace / (levels - 1) as f64
    } else {
        0.0
    }
}

/// Per-stratum counts and outcome sums for one treatment and adjustment set.
struct Strata {
    kx: usize,
    n: f64,
    n_xz: Vec<u64>,
    s_xz: Vec<f64>,
    n_z: Vec<u64>,
}

impl Strata {
    fn new(data: &DiscreteDataset, x: usize, zs: &[usize], y: &[f64]) -> Self {
        let kx = data.cardinality(x);
        let zcards: Vec<usize> = zs.iter().map(|&v| data.cardinality(v)).collect();
        let kz: usize = zcards.iter().product();
        let mut st = Strata {
            kx,
            n: data.len() as f64,
            n_xz: vec![0; kx * kz],
            s_xz: vec![0.0; kx * kz],
            n_z: vec![0; kz],
        };
        let mut zval = vec![0usize; zs.len()];
        let xcol = data.column(x);
        for (r, &yr) in y.iter().enumerate() {
            for (slot, &v) in zval.iter_mut().zip(zs) {
                *slot = data.column(v)[r] as usize;
            }
            let z = config_index(&zval, &zcards);
            let cell = z * kx + xcol[r] as usize;
            st.n_xz[cell] += 1;
            st.s_xz[cell] += yr;
            st.n_z[z] += 1;
        }
        st
    }

    /// `E[Y | do(x)] = sum_z E[Y | x, z] P(z)` over the empirical strata.
    fn do_mean(&self, xv: usize, smoothing: Option<f64>) -> std::result::Result<f64, Option<usize>> {
        let kx = self.kx;
        let (mut nx, mut sx) = (0u64, 0.0);
        for z in 0..self.n_z.len() {
            nx += self.n_xz[z * kx + xv];
            sx += self.s_xz[z * kx + xv];
        }
        if nx == 0 {
            return Err(None);
        }
        let prior = sx / nx as f64;
        let mut e = 0.0;
        for z in (0..self.n_z.len()).filter(|&z| self.n_z[z] > 0) {
            let (c, s) = (self.n_xz[z * kx + xv], self.s_xz[z * kx + xv]);
            let m = match smoothing {
                Some(a) if a > 0.0 => (s + a * prior) / (c as f64 + a),
                _ if c > 0 => s / c as f64,
                _ => return Err(Some(z)),
            };
            e += m * self.n_z[z] as f64 / self.n;
        }
        Ok(e)
    }
}

/// ACE of `treatment` on `outcome` estimated from data by backdoor adjustment.
pub fn ace(
    graph: &CausalGraph,
    data: &DiscreteDataset,
    treatment: &str,
    outcome: &Outcome,
    opts: &AceOptions,
) -> Result<AceEstimate> {
    let t = graph.require(treatment)?;
    let adjustment: Vec<String> = match &opts.adjustment {
        Some(a) => a.clone(),
        None => graph.parents(t).iter().map(|&p| graph.name(p).to_string()).collect(),
    };
    if let Some(s) = opts.smoothing {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidSpec(format!("smoothing {s} must be >= 0")));
        }
    }
    let x = data.require(treatment)?;
    let zs = adjustment
        .iter()
        .map(|n| data.require(n))
        .collect::<Result<Vec<_>>>()?;
    let cats = &data.variables()[x].categories;
    let (lo, hi) = resolve_levels(cats, treatment, opts)?;
    let y = outcome.values(data)?;

    let strata = Strata::new(data, x, &zs, &y);
    let get = |i: usize| {
        strata.do_mean(i, opts.smoothing).map_err(|z| {
            Error::EmptyStratum(match z {
                None => format!("no rows with {treatment} = {}", cats[i]),
                Some(z) => format!("{treatment} = {} has no rows in stratum {z}", cats[i]),
            })
        })
    };
    let (do_lo, do_hi) = (get(lo)?, get(hi)?);
    let ace = do_hi - do_lo;
    Ok(AceEstimate {
        treatment: treatment.to_string(),
        outcome: outcome.clone(),
        lo: cats[lo].clone(),
        hi: cats[hi].clone(),
        adjustment,
        levels: cats.len(),
        do_lo,
        do_hi,
        ace,
        ace_per_level: per_level(ace, cats.len()),
    })
}

/// ACE from exact tables: the adjustment formula over `parents(treatment)`
/// evaluated on the enumerated joint. `values[k]` is the outcome value of
/// effect category `k`.
pub fn ace_from_tables(
    graph: &CausalGraph,
    tables: &[ConditionalTable],
    treatment: &str,
    effect: &str,
    values: &[f64],
    lo: &str,
    hi: &str,
) -> Result<f64> {
    let t = graph.require(treatment)?;
    let y = graph.require(effect)?;
    if values.len() != graph.cardinality(y) {
        return Err(Error::InvalidSpec(format!(
            "{} outcome values for {} categories of `{effect}`",
            values.len(),
            graph.cardinality(y)
        )));
    }
    let level = |l: &str| {
        graph.categories(t).iter().position(|c| c == l).ok_or_else(|| Error::UnknownLevel {
            variable: treatment.to_string(),
            level: l.to_string(),
        })
    };
    let (lo, hi) = (level(lo)?, level(hi)?);
    let zs = graph.parents(t).to_vec();
    let zcards: Vec<usize> = zs.iter().map(|&p| graph.cardinality(p)).collect();
    let kz: usize = zcards.iter().product();
    let kx = graph.cardinality(t);

    let cards: Vec<usize> = (0..graph.len()).map(|j| graph.cardinality(j)).collect();
    let mut p_z = vec![0.0; kz];
    let mut p_xz = vec![0.0; kz * kx];
    let mut ey_xz = vec![0.0; kz * kx];
    let mut zval = vec![0; zs.len()];
    for_each_assignment(&cards, |a| {
        let p: f64 = (0..graph.len()).map(|j| local_prob(graph, tables, j, a)).product();
        for (slot, &v) in zval.iter_mut().zip(&zs) {
            *slot = a[v];
        }
        let z = config_index(&zval, &zcards);
        p_z[z] += p;
        p_xz[z * kx + a[t]] += p;
        ey_xz[z * kx + a[t]] += p * values[a[y]];
    });
    let do_mean = |xv: usize| -> Result<f64> {
        let mut e = 0.0;
        for z in 0..kz {
            if p_z[z] == 0.0 {
                continue;
            }
            let pxz = p_xz[z * kx + xv];
            if pxz == 0.0 {
                return Err(Error::EmptyStratum(format!(
                    "P({treatment} = {}, stratum {z}) is zero",
                    graph.categories(t)[xv]
                )));
            }
            e += p_z[z] * ey_xz[z * kx + xv] / pxz;
        }
        Ok(e)
    };
    Ok(do_mean(hi)? - do_mean(lo)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::dataset::Variable;
    use crate::ingest::{GraphSpec, NodeKind, NodeSpec};
    use proptest::prelude::*;

    fn node(name: &str, k: usize, kind: NodeKind) -> NodeSpec {
        NodeSpec {
            name: name.into(),
            kind,
            categories: (0..k).map(|i| i.to_string()).collect(),
        }
    }

    fn graph(nodes: Vec<NodeSpec>, edges: &[(&str, &str)]) -> CausalGraph {
        CausalGraph::new(
            GraphSpec::new(
                nodes,
                edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            )
            .unwrap(),
        )
    }

    fn data(names: &[(&str, usize)], rows: &[Vec<u16>]) -> DiscreteDataset {
        let mut ds = DiscreteDataset::new(
            names
                .iter()
                .map(|(n, k)| Variable::new(*n, (0..*k).map(|i| i.to_string())))
                .collect(),
        )
        .unwrap();
        for r in rows {
            ds.push_row(r).unwrap();
        }
        ds
    }

    fn repeat(rows: &[(Vec<u16>, usize)]) -> Vec<Vec<u16>> {
        rows.iter()
            .flat_map(|(r, n)| std::iter::repeat_n(r.clone(), *n))
            .collect()
    }

    #[test]
    fn exogenous_difference_of_means() {
        let g = graph(
            vec![node("X", 2, NodeKind::Exogenous), node("Y", 2, NodeKind::Endogenous)],
            &[("X", "Y")],
        );
        // P(Y=1|X=0) = 0.3, P(Y=1|X=1) = 0.8
        let rows = repeat(&[
            (vec![0, 0], 7),
            (vec![0, 1], 3),
            (vec![1, 0], 2),
            (vec![1, 1], 8),
        ]);
        let ds = data(&[("X", 2), ("Y", 2)], &rows);
        let out = Outcome::resolve(&ds, "Y").unwrap();
        assert_eq!(
            out,
            Outcome::Indicator {
                variable: "Y".into(),
                level: "1".into()
            }
        );
        let est = ace(&g, &ds, "X", &out, &AceOptions::default()).unwrap();
        assert!((est.ace - 0.5).abs() < 1e-12);
        assert!(est.adjustment.is_empty());

        let swapped = AceOptions {
            lo: Some("1".into()),
            hi: Some("0".into()),
            ..Default::default()
        };
        assert!((ace(&g, &ds, "X", &out, &swapped).unwrap().ace + 0.5).abs() < 1e-12);
    }

    #[test]
    fn independent_is_zero() {
        let g = graph(
            vec![node("X", 2, NodeKind::Exogenous), node("Y", 2, NodeKind::Endogenous)],
            &[("X", "Y")],
        );
        let rows = repeat(&[
            (vec![0, 0], 5),
            (vec![0, 1], 5),
            (vec![1, 0], 5),
            (vec![1, 1], 5),
        ]);
        let ds = data(&[("X", 2), ("Y", 2)], &rows);
        let out = Outcome::resolve(&ds, "Y").unwrap();
        assert_eq!(ace(&g, &ds, "X", &out, &AceOptions::default()).unwrap().ace, 0.0);
    }

    #[test]
    fn adjustment_removes_confounding() {
        // Z -> X, Z -> Y, X -> Y with a known effect of X on Y inside each stratum
        let g = graph(
            vec![
                node("Z", 2, NodeKind::Exogenous),
                node("X", 2, NodeKind::Endogenous),
                node("Y", 2, NodeKind::Endogenous),
            ],
            &[("Z", "X"), ("Z", "Y"), ("X", "Y")],
        );
        // z=0: x mostly 0, P(y=1|x=0)=0.1, P(y=1|x=1)=0.3
        // z=1: x mostly 1, P(y=1|x=0)=0.6, P(y=1|x=1)=0.8
        let rows = repeat(&[
            (vec![0, 0, 0], 72),
            (vec![0, 0, 1], 8),
            (vec![0, 1, 0], 14),
            (vec![0, 1, 1], 6),
            (vec![1, 0, 0], 8),
            (vec![1, 0, 1], 12),
            (vec![1, 1, 0], 16),
            (vec![1, 1, 1], 64),
        ]);
        let ds = data(&[("Z", 2), ("X", 2), ("Y", 2)], &rows);
        let out = Outcome::resolve(&ds, "Y").unwrap();
        let est = ace(&g, &ds, "X", &out, &AceOptions::default()).unwrap();
        assert_eq!(est.adjustment, vec!["Z"]);
        assert!((est.ace - 0.2).abs() < 1e-12, "{}", est.ace);
        // the naive difference is much larger
        let naive = AceOptions {
            adjustment: Some(vec![]),
            ..Default::default()
        };
        let n = ace(&g, &ds, "X", &out, &naive).unwrap().ace;
        assert!((n - (70.0 / 100.0 - 20.0 / 100.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_stratum() {
        let g = graph(
            vec![
                node("Z", 2, NodeKind::Exogenous),
                node("X", 2, NodeKind::Endogenous),
                node("Y", 2, NodeKind::Endogenous),
            ],
            &[("Z", "X"), ("X", "Y")],
        );
        let rows = vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1]];
        let ds = data(&[("Z", 2), ("X", 2), ("Y", 2)], &rows);
        let out = Outcome::resolve(&ds, "Y").unwrap();
        let e = ace(&g, &ds, "X", &out, &AceOptions::default()).unwrap_err();
        assert_eq!(e.code(), "E_EMPTY_STRATUM");
        let smoothed = AceOptions {
            smoothing: Some(1.0),
            ..Default::default()
        };
        // the empty (x=1, z=1) cell falls back to E[Y | x=1] = 1
        let est = ace(&g, &ds, "X", &out, &smoothed).unwrap();
        // P(z=0) = 2/3; x=1 cells are (1+1)/2 and (0+1)/1, x=0 cells (0+0.5)/2 and (1+0.5)/2
        let do1 = 1.0;
        let do0 = (2.0 / 3.0) * 0.25 + (1.0 / 3.0) * 0.75;
        assert!((est.do_hi - do1).abs() < 1e-12);
        assert!((est.do_lo - do0).abs() < 1e-12);
    }

    #[test]
    fn unknown_level() {
        let g = graph(
            vec![node("X", 2, NodeKind::Exogenous), node("Y", 2, NodeKind::Endogenous)],
            &[("X", "Y")],
        );
        let ds = data(&[("X", 2), ("Y", 2)], &[vec![0, 0], vec![1, 1]]);
        let out = Outcome::resolve(&ds, "Y").unwrap();
        let opts = AceOptions {
            hi: Some("7".into()),
            ..Default::default()
        };
        assert_eq!(ace(&g, &ds, "X", &out, &opts).unwrap_err().code(), "E_UNKNOWN_LEVEL");
    }

    #[test]
    fn model_route_exogenous() {
        let g = graph(
            vec![node("X", 2, NodeKind::Exogenous), node("Y", 2, NodeKind::Endogenous)],
            &[("X", "Y")],
        );
        let t = vec![
            ConditionalTable::from_probs("X", g.categories(0).to_vec(), vec![], vec![], vec![vec![0.5, 0.5]])
                .unwrap(),
            ConditionalTable::from_probs(
                "Y",
                g.categories(1).to_vec(),
                vec!["X".into()],
                vec![2],
                vec![vec![0.7, 0.3], vec![0.2, 0.8]],
            )
            .unwrap(),
        ];
        let a = ace_from_tables(&g, &t, "X", "Y", &[0.0, 1.0], "0", "1").unwrap();
        assert!((a - 0.5).abs() < 1e-12);
    }

    fn three_level_data(seed: u64) -> DiscreteDataset {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut ds = data(&[("Z", 2), ("X", 3)], &[]);
        let mut y = Vec::new();
        for _ in 0..400 {
            let z: u16 = rng.random_range(0..2);
            let x: u16 = rng.random_range(0..3);
            ds.push_row(&[z, x]).unwrap();
            y.push(rng.random::<f64>() + f64::from(x) * 0.3 + f64::from(z));
        }
        ds.set_outcome("Y", y).unwrap();
        ds
    }

    proptest! {
        #[test]
        fn affine_equivariance(seed in 0u64..1000, c in -50.0f64..50.0, a in 0.1f64..20.0) {
            let g = graph(
                vec![
                    node("Z", 2, NodeKind::Exogenous),
                    node("X", 3, NodeKind::Endogenous),
                    node("Y", 2, NodeKind::Endogenous),
                ],
                &[("Z", "X"), ("X", "Y")],
            );
            let ds = three_level_data(seed);
            let out = Outcome::Column { name: "Y".into() };
            let base = ace(&g, &ds, "X", &out, &AceOptions::default()).unwrap();
            let mut moved = ds.clone();
            let y: Vec<f64> = ds.outcome("Y").unwrap().iter().map(|v| a * v + c).collect();
            moved.set_outcome("Y", y).unwrap();
            let est = ace(&g, &moved, "X", &out, &AceOptions::default()).unwrap();
            prop_assert!((est.ace - a * base.ace).abs() < 1e-9 * (1.0 + c.abs() + a));
            prop_assert!((est.ace_per_level - est.ace / 2.0).abs() < 1e-12);
        }

        #[test]
        fn constant_effect_gives_zero(seed in 0u64..1000, c in -5.0f64..5.0) {
            let g = graph(
                vec![node("Z", 2, NodeKind::Exogenous), node("X", 3, NodeKind::Endogenous)],
                &[("Z", "X")],
            );
            let mut ds = three_level_data(seed);
            ds.set_outcome("Y", vec![c; ds.len()]).unwrap();
            let out = Outcome::Column { name: "Y".into() };
            let est = ace(&g, &ds, "X", &out, &AceOptions::default()).unwrap();
            prop_assert!(est.ace.abs() < 1e-12);
        }
    }
}
