use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::args::*;
use super::plot::{aggregate_value, correlation_table, edge_tables, emit_plot_data, error_table, write_text};
use crate::alignment::{
    model_correlation, model_names, oracle_aggregate, oracle_select, score_dataset, utterance_result,
    CorrelationMatrix, ErrorAggregate,
};
use crate::causal::{
    ace, conditional_mutual_information, edge_report, fit_cpts, write_cpts, AceOptions, CausalGraph,
    CmiConditioning, DiscreteDataset, EdgeOptions, EdgeReport, Outcome, Variable,
};
use crate::covariates::{self, AudioSource, CovariateSources, GopInputs, GopOptions};
use crate::discretize::{self, BinMethod, BinningScheme};
use crate::error::{Error, Result};
use crate::ingest::graph_spec::{AGE, DEL_ERR, GENDER, GOP, INS_ERR, NO_WORDS, SNR, SUBS_ERR, VOCAB_DIFF};
use crate::ingest::{
    self, parse_frequency_table, parse_utterances, render_report, write_utterances, FrequencyTable,
    Gender, Grade, GraphSource, ReportFormat, ReportValue, UtteranceRecord,
};
use crate::synthetic::{self, generate, true_ace, true_cmi, ScmDocument, ScmSpec};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io_path(path, e))
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io_path(path, e))
}

fn read_records(path: &Path) -> Result<Vec<UtteranceRecord>> {
    parse_utterances(open(path)?)
}

fn read_dataset(path: &Path) -> Result<DiscreteDataset> {
    ingest::read_dataset(open(path)?)
}

fn load_graph(source: &GraphSource) -> Result<CausalGraph> {
    Ok(CausalGraph::new(source.load()?))
}

fn emit(out: Option<&Path>, report: &ReportValue, format: FormatArg) -> Result<()> {
    let text = render_report(report, ReportFormat::from(format));
    match out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// True when every output exists and is at least as new as every input.
fn up_to_date(outputs: &[&Path], inputs: &[&Path]) -> bool {
    let mtime = |p: &Path| std::fs::metadata(p).and_then(|m| m.modified()).ok();
    let newest_input = inputs.iter().map(|p| mtime(p)).collect::<Option<Vec<_>>>();
    let oldest_output = outputs.iter().map(|p| mtime(p)).collect::<Option<Vec<_>>>();
    match (newest_input, oldest_output) {
        (Some(i), Some(o)) => match (i.into_iter().max(), o.into_iter().min()) {
            (Some(i), Some(o)) => o >= i,
            _ => false,
        },
        _ => false,
    }
}

fn skip_notice(out: &Path) {
    eprintln!("{} is up to date (use --force to rebuild)", out.display());
}

/// Keeps only the requested models' hypotheses; an empty list keeps all.
fn restrict_models(records: &mut [UtteranceRecord], models: &[String]) -> Result<()> {
    let wanted: Vec<&String> = models.iter().filter(|m| !m.trim().is_empty()).collect();
    if wanted.is_empty() {
        return Ok(());
    }
    for r in records.iter_mut() {
        for m in &wanted {
            if !r.hypotheses.contains_key(m.as_str()) {
                return Err(Error::MissingModel {
                    id: r.id.clone(),
                    model: (*m).clone(),
                });
            }
        }
        r.hypotheses.retain(|k, _| wanted.contains(&k));
        r.scores.retain(|k, _| wanted.contains(&k));
    }
    Ok(())
}

/// Group key ordered by `rank` and shown as `label`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct GroupKey(u16, String);

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.1)
    }
}

fn group_key(by: GroupBy, r: &UtteranceRecord) -> GroupKey {
    match by {
        GroupBy::Grade => match r.grade {
            Some(g) => GroupKey(u16::from(g.level()), g.label()),
            None => GroupKey(u16::MAX, "unknown".into()),
        },
        GroupBy::Gender => match r.gender {
            Some(g) => GroupKey(g as u16, g.to_string()),
            None => GroupKey(u16::MAX, "unknown".into()),
        },
        GroupBy::Speaker => GroupKey(0, r.speaker_id.clone()),
        GroupBy::None => GroupKey(0, "all".into()),
    }
}

fn group_name(by: GroupBy) -> &'static str {
    match by {
        GroupBy::Grade => "grade",
        GroupBy::Gender => "gender",
        GroupBy::Speaker => "speaker",
        GroupBy::None => "none",
    }
}

fn grouped(records: &[UtteranceRecord], models: &[String], by: GroupBy) -> Result<Vec<(String, ErrorAggregate)>> {
    let mut rows = Vec::new();
    for m in models {
        for a in score_dataset(records, m, |r| group_key(by, r))? {
            rows.push((m.clone(), a));
        }
    }
    Ok(rows)
}

/// Runs `f` on every record in parallel and returns results in input order;
/// the reported error is the first failing record in input order.
fn per_record<T, F>(records: &[UtteranceRecord], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&UtteranceRecord) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = records.par_iter().map(&f).collect();
    results.into_iter().collect()
}

pub fn align(a: &AlignArgs) -> Result<()> {
    let mut outputs = vec![a.out.as_path()];
    outputs.extend(a.summary.as_deref());
    let plot_file = a.plot_dir.as_ref().map(|d| d.join("errors_by_group.csv"));
    outputs.extend(plot_file.as_deref());
    if !a.force && up_to_date(&outputs, &[&a.input]) {
        skip_notice(&a.out);
        return Ok(());
    }
    let mut records = read_records(&a.input)?;
    restrict_models(&mut records, &a.models)?;
    let models = model_names(&records)?;
    let scores = per_record(&records, |r| {
        models
            .iter()
            .map(|m| utterance_result(r, m).map(|s| (m.clone(), s)))
            .collect::<Result<BTreeMap<_, _>>>()
    })?;
    for (r, s) in records.iter_mut().zip(scores) {
        r.scores = s;
    }
    let mut buf = Vec::new();
    write_utterances(&mut buf, &records)?;
    write_text(&a.out, std::str::from_utf8(&buf).expect("json is utf-8"))?;

    if a.summary.is_some() || a.plot_dir.is_some() {
        let rows = grouped(&records, &models, a.group_by)?;
        if let Some(path) = &a.summary {
            let mut per_model = Vec::new();
            for m in &models {
                let overall = score_dataset(&records, m, |_| GroupKey(0, "all".into()))?;
                let groups: Vec<ReportValue> = rows
                    .iter()
                    .filter(|(model, _)| model == m)
                    .map(|(_, agg)| aggregate_value(agg))
                    .collect();
                per_model.push(
                    ReportValue::map()
                        .with("model", m.as_str())
                        .with("overall", overall.first().map_or(ReportValue::Null, aggregate_value))
                        .with("groups", groups),
                );
            }
            let report = ReportValue::map()
                .with("utterances", records.len())
                .with("group_by", group_name(a.group_by))
                .with("models", per_model);
            emit(Some(path), &report, a.format)?;
        }
        if let Some(dir) = &a.plot_dir {
            emit_plot_data(dir, &[("errors_by_group", error_table(&rows))])?;
        }
    }
    Ok(())
}

fn load_frequency(paths: &[PathBuf]) -> Result<Option<FrequencyTable>> {
    if paths.is_empty() {
        return Ok(None);
    }
    let mut pooled = FrequencyTable::new();
    for p in paths {
        pooled.merge(&parse_frequency_table(open(p)?)?);
    }
    Ok(Some(pooled))
}

pub fn covariates(a: &CovariateArgs) -> Result<()> {
    let mut inputs: Vec<&Path> = vec![&a.input];
    inputs.extend(a.freq.iter().map(PathBuf::as_path));
    inputs.extend([&a.posteriors, &a.segments, &a.inventory].into_iter().flatten().map(PathBuf::as_path));
    if !a.force && up_to_date(&[&a.out], &inputs) {
        skip_notice(&a.out);
        return Ok(());
    }
    let records = read_records(&a.input)?;
    let gop = match (&a.posteriors, &a.segments, &a.inventory) {
        (Some(p), Some(s), Some(i)) => Some(GopInputs {
            inventory: ingest::phones::parse_inventory(&read_to_string(i)?)?,
            posteriors: ingest::phones::parse_posteriors(open(p)?)?,
            segments: ingest::phones::parse_segments(open(s)?)?,
            options: match a.gop_floor {
                Some(f) => GopOptions { floor: Some(f) },
                None => GopOptions::default(),
            },
        }),
        _ => None,
    };
    let sources = CovariateSources {
        frequency: load_frequency(&a.freq)?,
        gop,
        audio: a.audio_dir.as_ref().map(|d| AudioSource {
            dir: d.clone(),
            sample_rate: a.sample_rate,
        }),
    };
    let annotated = per_record(&records, |r| {
        let mut r = r.clone();
        covariates::annotate(&mut r, &sources).map_err(|e| e.in_record(&r.id))?;
        Ok(r)
    })?;
    let mut buf = Vec::new();
    write_utterances(&mut buf, &annotated)?;
    write_text(&a.out, std::str::from_utf8(&buf).expect("json is utf-8"))
}

fn required(r: &UtteranceRecord, value: Option<f64>, field: &str) -> Result<f64> {
    value.ok_or_else(|| covariates::missing(r, field))
}

pub fn discretize(a: &DiscretizeArgs) -> Result<()> {
    let records = read_records(&a.input)?;
    if records.is_empty() {
        return Err(Error::Empty(a.input.display().to_string()));
    }
    let mut columns: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut ages = Vec::with_capacity(records.len());
    let mut genders = Vec::with_capacity(records.len());
    let mut rates: [Vec<f64>; 3] = Default::default();
    for r in &records {
        ages.push(r.grade.ok_or_else(|| covariates::missing(r, "grade"))?);
        genders.push(r.gender.ok_or_else(|| covariates::missing(r, "gender"))?);
        columns.entry(SNR).or_default().push(required(r, r.snr_db, "snr_db")?);
        columns.entry(VOCAB_DIFF).or_default().push(required(r, r.vocab_difficulty, "vocab_difficulty")?);
        let words = r.word_count.unwrap_or_else(|| covariates::word_count(&r.reference));
        columns.entry(NO_WORDS).or_default().push(words as f64);
        columns.entry(GOP).or_default().push(required(r, r.gop, "gop")?);
        let s = match r.scores.get(&a.model) {
            Some(s) => *s,
            None => utterance_result(r, &a.model)?,
        };
        let pct = |x: u32| 100.0 * f64::from(x) / f64::from(s.ref_len);
        rates[0].push(pct(s.substitutions));
        rates[1].push(pct(s.deletions));
        rates[2].push(pct(s.insertions));
    }
    for (name, col) in [SUBS_ERR, DEL_ERR, INS_ERR].into_iter().zip(&rates) {
        columns.insert(name, col.clone());
    }

    let methods: BTreeMap<&str, BinMethod> = [
        (SNR, a.snr_method),
        (VOCAB_DIFF, a.vocab_method),
        (NO_WORDS, a.words_method),
        (GOP, a.gop_method),
        (SUBS_ERR, a.error_method),
        (DEL_ERR, a.error_method),
        (INS_ERR, a.error_method),
    ]
    .into_iter()
    .map(|(k, m)| (k, BinMethod::from(m)))
    .collect();

    let schemes: Vec<BinningScheme> = match &a.schemes_in {
        Some(p) => {
            let loaded = ingest::read_schemes(&read_to_string(p)?)?;
            for name in methods.keys() {
                if !loaded.iter().any(|s| s.variable == *name) {
                    return Err(Error::MissingVariable(format!("scheme for {name}")));
                }
            }
            loaded
        }
        None => methods
            .iter()
            .map(|(name, &m)| discretize::fit(m, name, &columns[name], a.bins))
            .collect::<Result<_>>()?,
    };
    let scheme = |name: &str| schemes.iter().find(|s| s.variable == name).expect("checked above");

    let order = [AGE, GENDER, SNR, VOCAB_DIFF, NO_WORDS, GOP, SUBS_ERR, DEL_ERR, INS_ERR];
    let vars: Vec<Variable> = order
        .iter()
        .map(|&name| match name {
            AGE => Variable::new(AGE, Grade::all().map(Grade::label)),
            GENDER => Variable::new(GENDER, [Gender::Boy, Gender::Girl].map(|g| g.to_string())),
            _ => Variable::new(name, scheme(name).labels.iter().cloned()),
        })
        .collect();
    let mut ds = DiscreteDataset::new(vars)?.with_label(a.model.clone());
    for (i, r) in records.iter().enumerate() {
        let row: Vec<u16> = order
            .iter()
            .map(|&name| match name {
                AGE => ages[i].level() as u16,
                GENDER => genders[i] as u16,
                _ => scheme(name).apply_index(columns[name][i]) as u16,
            })
            .collect();
        ds.push_row(&row).map_err(|e| e.in_record(&r.id))?;
    }
    for (name, col) in [SUBS_ERR, DEL_ERR, INS_ERR].into_iter().zip(rates) {
        ds.set_outcome(name, col)?;
    }
    let mut buf = Vec::new();
    ingest::write_dataset(&mut buf, &ds)?;
    write_text(&a.out, std::str::from_utf8(&buf).expect("json is utf-8"))?;
    if let Some(p) = &a.schemes_out {
        write_text(p, &ingest::write_schemes(&schemes))?;
    }
    Ok(())
}

pub fn oracle(a: &OracleArgs) -> Result<()> {
    let mut records = read_records(&a.input)?;
    restrict_models(&mut records, &a.models)?;
    let models = model_names(&records)?;
    let selection = oracle_select(&records)?;
    let overall = oracle_aggregate(&records, &selection)?.to_aggregate("oracle");

    let mut by_group: BTreeMap<GroupKey, Vec<UtteranceRecord>> = BTreeMap::new();
    for r in &records {
        by_group.entry(group_key(a.group_by, r)).or_default().push(r.clone());
    }
    let mut groups = Vec::new();
    for (k, rs) in &by_group {
        groups.push(aggregate_value(&oracle_aggregate(rs, &selection)?.to_aggregate(k.to_string())));
    }
    let mut per_model = Vec::new();
    for m in &models {
        let agg = score_dataset(&records, m, |_| GroupKey(0, m.clone()))?;
        per_model.extend(agg.iter().map(aggregate_value));
    }
    let mut chosen: BTreeMap<String, ReportValue> = models.iter().map(|m| (m.clone(), 0usize.into())).collect();
    for m in selection.values() {
        let n = chosen.get(m).and_then(ReportValue::as_f64).unwrap_or(0.0) as usize;
        chosen.insert(m.clone(), (n + 1).into());
    }
    let report = ReportValue::map()
        .with("utterances", records.len())
        .with("models", per_model)
        .with("oracle", aggregate_value(&overall))
        .with("group_by", group_name(a.group_by))
        .with("oracle_groups", groups)
        .with("selected", ReportValue::Map(chosen));
    emit(Some(&a.out), &report, a.format)?;

    if let Some(p) = &a.selection {
        let mut t = ingest::DelimitedTable::new(["id", "model"]);
        for r in &records {
            t.push(vec![r.id.as_str().into(), selection[&r.id].as_str().into()]);
        }
        write_text(p, &t.render())?;
    }
    Ok(())
}

pub fn correlate(a: &CorrelateArgs) -> Result<()> {
    let mut records = read_records(&a.input)?;
    let explicit_empty = !a.models.is_empty() && a.models.iter().all(|m| m.trim().is_empty());
    let matrix = if explicit_empty {
        CorrelationMatrix {
            models: vec![],
            values: vec![],
            utterances: records.len(),
        }
    } else {
        restrict_models(&mut records, &a.models)?;
        model_correlation(&records)?
    };
    write_text(&a.out, &correlation_table(&matrix).render())
}

pub fn fit(a: &FitArgs) -> Result<()> {
    let graph = load_graph(&a.graph.graph)?;
    let data = read_dataset(&a.input)?;
    let tables = fit_cpts(&graph, &data, a.alpha)?;
    write_text(&a.out, &write_cpts(&tables))
}

pub fn ace_cmd(a: &AceArgs) -> Result<()> {
    let graph = load_graph(&a.graph.graph)?;
    let data = read_dataset(&a.input)?;
    let outcome = Outcome::resolve(&data, &a.effect)?;
    let est = ace(
        &graph,
        &data,
        &a.treatment,
        &outcome,
        &AceOptions {
            lo: a.lo.clone(),
            hi: a.hi.clone(),
            smoothing: a.smoothing.value(),
            adjustment: None,
        },
    )?;
    let report = ReportValue::map()
        .with("treatment", est.treatment.as_str())
        .with("effect", a.effect.as_str())
        .with("lo", est.lo.as_str())
        .with("hi", est.hi.as_str())
        .with("adjustment", est.adjustment.clone())
        .with("do_lo", est.do_lo)
        .with("do_hi", est.do_hi)
        .with("ace", est.ace)
        .with("ace_per_level", est.ace_per_level);
    emit(a.out.as_deref(), &report, a.format)
}

pub fn cmi(a: &CmiArgs) -> Result<()> {
    let data = read_dataset(&a.input)?;
    let given: Vec<&str> = a.given.iter().map(String::as_str).filter(|s| !s.is_empty()).collect();
    let value = conditional_mutual_information(&data, &a.x, &a.y, &given, a.alpha)?;
    let report = ReportValue::map()
        .with("x", a.x.as_str())
        .with("y", a.y.as_str())
        .with("given", given.iter().map(|s| s.to_string()).collect::<Vec<_>>())
        .with("alpha", a.alpha)
        .with("cmi", value);
    emit(a.out.as_deref(), &report, a.format)
}

pub fn report(a: &ReportArgs) -> Result<()> {
    let graph = load_graph(&a.graph.graph)?;
    let opts = EdgeOptions {
        alpha: a.alpha,
        smoothing: a.smoothing.value(),
        conditioning: match a.cmi_given {
            ConditioningArg::OtherParents => CmiConditioning::OtherParents,
            ConditioningArg::Empty => CmiConditioning::Empty,
        },
    };
    let mut reports: Vec<EdgeReport> = Vec::new();
    for p in &a.inputs {
        let data = read_dataset(p)?;
        let mut r = edge_report(&graph, &data, &opts)?;
        if r.model.is_empty() {
            r.model = p.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        }
        reports.push(r);
    }
    let value = ReportValue::map()
        .with("graph", a.graph.graph.to_string())
        .with("alpha", a.alpha)
        .with("smoothing", a.smoothing.value())
        .with("reports", reports.iter().map(EdgeReport::to_value).collect::<Vec<_>>());
    emit(Some(&a.out), &value, a.format)?;
    if let Some(dir) = &a.plot_dir {
        emit_plot_data(dir, &edge_tables(&graph, &reports))?;
    }
    Ok(())
}

fn load_scm(spec: &str) -> Result<ScmDocument> {
    match synthetic::builtin_document(spec) {
        Some(d) => Ok(d),
        None => ScmDocument::parse(&read_to_string(Path::new(spec))?),
    }
}

/// Exact ACE (first vs last level) and CMI given the effect's other parents for every edge.
pub fn truths(spec: &ScmSpec) -> Result<ReportValue> {
    let g = &spec.graph;
    let mut edges = Vec::new();
    for &(u, v) in g.edges() {
        let cats = g.categories(u);
        let (lo, hi) = (&cats[0], &cats[cats.len() - 1]);
        let a = true_ace(spec, g.name(u), g.name(v), lo, hi)?;
        let given: Vec<&str> = g.parents(v).iter().filter(|&&p| p != u).map(|&p| g.name(p)).collect();
        let c = true_cmi(spec, g.name(u), g.name(v), &given)?;
        edges.push(
            ReportValue::map()
                .with("cause", g.name(u))
                .with("effect", g.name(v))
                .with("lo", lo.as_str())
                .with("hi", hi.as_str())
                .with("ace", a)
                .with("ace_per_level", if cats.len() > 1 { a / (cats.len() - 1) as f64 } else { 0.0 })
                .with("cmi", c)
                .with("cmi_given", given.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
        );
    }
    Ok(ReportValue::map()
        .with("spec", spec.label.as_str())
        .with("edge_count", edges.len())
        .with("edges", edges))
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let mut doc = load_scm(&a.spec)?;
    if let Some(n) = a.n {
        doc.n = n;
    }
    if let Some(s) = a.seed {
        doc.seed = s;
    }
    let spec = ScmSpec::from_document(&doc)?;
    if let Some(p) = &a.write_spec {
        write_text(p, &doc.render())?;
    }
    let ds = generate(&spec)?;
    let mut buf = Vec::new();
    ingest::write_dataset(&mut buf, &ds)?;
    write_text(&a.out, std::str::from_utf8(&buf).expect("json is utf-8"))?;
    if let Some(p) = &a.truths {
        emit(Some(p), &truths(&spec)?, a.format)?;
    }
    Ok(())
}
