use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A categorical variable with its ordered category labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub categories: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: impl Into<String>, categories: impl IntoIterator<Item = S>) -> Self {
        Variable {
            name: name.into(),
            categories: categories.into_iter().map(Into::into).collect(),
        }
    }

    pub fn level_index(&self, label: &str) -> Result<usize> {
        self.categories
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLevel {
                variable: self.name.clone(),
                level: label.to_string(),
            })
    }
}

/// Column-major table of category indices, plus optional continuous outcome
/// columns (per-row error rates) keyed by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDataset", into = "RawDataset")]
pub struct DiscreteDataset {
    label: Option<String>,
    variables: Vec<Variable>,
    columns: Vec<Vec<u16>>,
    outcomes: BTreeMap<String, Vec<f64>>,
    n_rows: usize,
    index: HashMap<String, usize>,
}

impl DiscreteDataset {
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, v) in variables.iter().enumerate() {
            if v.categories.is_empty() {
                return Err(Error::InvalidSpec(format!(
                    "variable `{}` has no categories",
                    v.name
                )));
            }
            if v.categories.len() > u16::MAX as usize {
                return Err(Error::InvalidSpec(format!(
                    "variable `{}` has too many categories",
                    v.name
                )));
            }
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::DuplicateNode(v.name.clone()));
            }
        }
        Ok(DiscreteDataset {
            label: None,
            columns: vec![Vec::new(); variables.len()],
            variables,
            outcomes: BTreeMap::new(),
            n_rows: 0,
            index,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn len(&self) -> usize {
        self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        Ok(&self.variables[self.require(name)?])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::MissingVariable(name.to_string()))
    }

    pub fn column(&self, var: usize) -> &[u16] {
        &self.columns[var]
    }

    pub fn cardinality(&self, var: usize) -> usize {
        self.variables[var].categories.len()
    }

    /// Appends a row of category indices, one per variable.
    pub fn push_row(&mut self, row: &[u16]) -> Result<()> {
        if row.len() != self.variables.len() {
            return Err(Error::InvalidSpec(format!(
                "row has {} values for {} variables",
                row.len(),
                self.variables.len()
            )));
        }
        for (v, &x) in self.variables.iter().zip(row) {
            if x as usize >= v.categories.len() {
                return Err(Error::UnknownLevel {
                    variable: v.name.clone(),
                    level: x.to_string(),
                });
            }
        }
        for (col, &x) in self.columns.iter_mut().zip(row) {
            col.push(x);
        }
        self.n_rows += 1;
        Ok(())
    }

    /// Appends a row given as category labels.
    pub fn push_labels<S: AsRef<str>>(&mut self, labels: &[S]) -> Result<()> {
        let row = labels
            .iter()
            .zip(&self.variables)
            .map(|(l, v)| v.level_index(l.as_ref()).map(|i| i as u16))
            .collect::<Result<Vec<_>>>()?;
        self.push_row(&row)
    }

    pub fn row(&self, r: usize) -> Vec<u16> {
        self.columns.iter().map(|c| c[r]).collect()
    }

    /// Attaches a continuous per-row column, e.g. an error rate.
    pub fn set_outcome(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.n_rows {
            return Err(Error::InvalidSpec(format!(
                "outcome `{name}` has {} values for {} rows",
                values.len(),
                self.n_rows
            )));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec(format!("outcome `{name}` has value {x}")));
        }
        self.outcomes.insert(name, values);
        Ok(())
    }

    pub fn outcome(&self, name: &str) -> Option<&[f64]> {
        self.outcomes.get(name).map(Vec::as_slice)
    }

    pub fn outcomes(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.outcomes
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawColumn {
    name: String,
    categories: Vec<String>,
    values: Vec<u16>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutcome {
    name: String,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    n_rows: usize,
    variables: Vec<RawColumn>,
    #[serde(default)]
    outcomes: Vec<RawOutcome>,
}

impl TryFrom<RawDataset> for DiscreteDataset {
    type Error = Error;

    fn try_from(raw: RawDataset) -> Result<Self> {
        let vars = raw
            .variables
            .iter()
            .map(|c| Variable::new(c.name.clone(), c.categories.clone()))
            .collect();
        let mut ds = DiscreteDataset::new(vars)?;
        ds.label = raw.label;
        for (i, c) in raw.variables.into_iter().enumerate() {
            if c.values.len() != raw.n_rows {
                return Err(Error::InvalidSpec(format!(
                    "column `{}` has {} values for {} rows",
                    c.name,
                    c.values.len(),
                    raw.n_rows
                )));
            }
            if let Some(&bad) = c.values.iter().find(|&&x| x as usize >= c.categories.len()) {
                return Err(Error::UnknownLevel {
                    variable: c.name,
                    level: bad.to_string(),
                });
            }
            ds.columns[i] = c.values;
        }
        ds.n_rows = raw.n_rows;
        for o in raw.outcomes {
            ds.set_outcome(o.name, o.values)?;
        }
        Ok(ds)
    }
}

impl From<DiscreteDataset> for RawDataset {
    fn from(ds: DiscreteDataset) -> Self {
        RawDataset {
            label: ds.label,
            n_rows: ds.n_rows,
            variables: ds
                .variables
                .into_iter()
                .zip(ds.columns)
                .map(|(v, values)| RawColumn {
                    name: v.name,
                    categories: v.categories,
                    values,
                })
                .collect(),
            outcomes: ds
                .outcomes
                .into_iter()
                .map(|(name, values)| RawOutcome { name, values })
                .collect(),
        }
    }
}
