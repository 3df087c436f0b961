//! Parsing, validation and serialization of every external artifact.

pub mod audio;
pub mod frequency;
pub mod graph_spec;
pub mod phones;
pub mod records;
pub mod report;

use std::io::{BufRead, Write};

pub use frequency::{parse_frequency_table, write_frequency_table, FrequencyTable};
pub use graph_spec::{
    parse_graph_spec, write_graph_spec, GraphSource, GraphSpec, NodeKind, NodeSpec,
};
pub use records::{
    parse_utterances, parse_utterances_str, write_utterances, Gender, Grade, UtteranceRecord,
};
pub use report::{
    parse_report, render_report, write_report, DelimitedTable, ReportFormat, ReportValue,
};

use crate::causal::DiscreteDataset;
use crate::discretize::BinningScheme;
use crate::error::{Error, Result};

pub fn read_dataset<R: BufRead>(reader: R) -> Result<DiscreteDataset> {
    serde_json::from_reader(reader).map_err(|e| Error::schema(e.line(), e.to_string()))
}

pub fn write_dataset<W: Write>(mut out: W, ds: &DiscreteDataset) -> Result<()> {
    serde_json::to_writer(&mut out, ds).map_err(|e| Error::io("writing dataset", e.into()))?;
    out.write_all(b"\n").map_err(|e| Error::io("writing dataset", e))
}

pub fn read_schemes(text: &str) -> Result<Vec<BinningScheme>> {
    let schemes: Vec<BinningScheme> =
        serde_json::from_str(text).map_err(|e| Error::schema(e.line(), e.to_string()))?;
    for s in &schemes {
        s.validate()?;
    }
    Ok(schemes)
}

pub fn write_schemes(schemes: &[BinningScheme]) -> String {
    let mut s = serde_json::to_string_pretty(schemes).expect("schemes serialize");
    s.push('\n');
    s
}
