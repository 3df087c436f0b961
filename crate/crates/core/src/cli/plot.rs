//! Plot-ready delimited tables. Rendering is left to external tools.

use std::path::Path;

use crate::alignment::{CorrelationMatrix, ErrorAggregate};
use crate::causal::{effect_table, CausalGraph, EdgeMetric, EdgeReport};
use crate::error::{Error, Result};
use crate::ingest::{DelimitedTable, ReportValue};

pub fn aggregate_value(a: &ErrorAggregate) -> ReportValue {
    ReportValue::map()
        .with("key", a.key.as_str())
        .with("utterances", a.counts.utterances)
        .with("ref_words", a.counts.ref_words)
        .with("substitutions", a.counts.substitutions)
        .with("deletions", a.counts.deletions)
        .with("insertions", a.counts.insertions)
        .with("sub_rate", a.sub_rate)
        .with("del_rate", a.del_rate)
        .with("ins_rate", a.ins_rate)
        .with("wer", a.wer)
}

/// One row per `(model, group)`, rates in percent.
pub fn error_table(rows: &[(String, ErrorAggregate)]) -> DelimitedTable {
    let mut t = DelimitedTable::new([
        "model",
        "group",
        "utterances",
        "ref_words",
        "substitutions",
        "deletions",
        "insertions",
        "sub_rate",
        "del_rate",
        "ins_rate",
        "wer",
    ]);
    for (model, a) in rows {
        t.push(vec![
            model.as_str().into(),
            a.key.as_str().into(),
            a.counts.utterances.into(),
            a.counts.ref_words.into(),
            a.counts.substitutions.into(),
            a.counts.deletions.into(),
            a.counts.insertions.into(),
            a.sub_rate.into(),
            a.del_rate.into(),
            a.ins_rate.into(),
            a.wer.into(),
        ]);
    }
    t
}

/// Square matrix with a `model` header column; undefined entries are empty.
pub fn correlation_table(m: &CorrelationMatrix) -> DelimitedTable {
    let mut header = vec!["model".to_string()];
    header.extend(m.models.iter().cloned());
    let mut t = DelimitedTable::new(header);
    for (name, row) in m.models.iter().zip(&m.values) {
        let mut cells: Vec<ReportValue> = vec![name.as_str().into()];
        cells.extend(row.iter().map(|&v| ReportValue::from(v)));
        t.push(cells);
    }
    t
}

/// Edge annotations plus effect tables for ACE, per-level ACE and CMI.
pub fn edge_tables(graph: &CausalGraph, reports: &[EdgeReport]) -> Vec<(&'static str, DelimitedTable)> {
    let mut edges = DelimitedTable::new(["model", "cause", "effect", "ace", "ace_per_level", "cmi"]);
    for r in reports {
        edges.rows.extend(r.edges_table().rows);
    }
    vec![
        ("edges", edges),
        ("effects_ace", effect_table(graph, reports, EdgeMetric::Ace)),
        ("effects_ace_per_level", effect_table(graph, reports, EdgeMetric::AcePerLevel)),
        ("effects_cmi", effect_table(graph, reports, EdgeMetric::Cmi)),
    ]
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io_path(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io_path(path, e))
}

/// Writes each table to `<dir>/<name>.csv`.
pub fn emit_plot_data(dir: &Path, tables: &[(&str, DelimitedTable)]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io_path(dir, e))?;
    for (name, table) in tables {
        write_text(&dir.join(format!("{name}.csv")), &table.render())?;
    }
    Ok(())
}
