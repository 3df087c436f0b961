//! Causal DAG, conditional probability tables, information measures and
//! average causal effects.

pub mod ace;
mod count;
pub mod cpt;
pub mod dataset;
pub mod graph;
pub mod info;
pub mod report;

pub use ace::{ace, ace_from_tables, AceEstimate, AceOptions, Outcome};
pub use cpt::{
    check_tables, fit_cpts, joint_probability, joint_probability_labels, read_cpts,
    total_probability, write_cpts, ConditionalTable,
};
pub use dataset::{DiscreteDataset, Variable};
pub use graph::{topological_order, CausalGraph};
pub use info::{conditional_entropy, conditional_mutual_information, entropy, mutual_information};
pub use report::{edge_report, effect_table, CmiConditioning, EdgeMetric, EdgeOptions, EdgeRecord, EdgeReport};

pub(crate) use count::{config_index, for_each_assignment};
