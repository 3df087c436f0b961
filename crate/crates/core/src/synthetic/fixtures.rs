use std::collections::BTreeMap;

use super::{Emitter, GraphRef, OrdinalLogistic, ScmDocument, TableDoc};
use crate::ingest::graph_spec::{
    AGE, DEL_ERR, GENDER, GOP, INS_ERR, NO_WORDS, SNR, SUBS_ERR, THREE_LEVELS, VOCAB_DIFF,
};
use crate::ingest::{GraphSpec, NodeKind, NodeSpec};

pub const BUILTIN_SPECS: [&str; 2] = ["paper-shaped", "copy-pair"];

pub fn builtin_document(name: &str) -> Option<ScmDocument> {
    match name {
        "paper-shaped" => Some(paper_shaped()),
        "copy-pair" => Some(copy_pair()),
        _ => None,
    }
}

fn probs(rows: &[&[f64]]) -> TableDoc {
    TableDoc::Probs {
        probs: rows.iter().map(|r| r.to_vec()).collect(),
    }
}

fn logit(coefficients: &[(&str, f64)], thresholds: [f64; 2]) -> TableDoc {
    TableDoc::Logistic {
        ordinal_logistic: OrdinalLogistic {
            coefficients: coefficients.iter().map(|&(p, c)| (p.to_string(), c)).collect(),
            thresholds: thresholds.to_vec(),
        },
    }
}

/// The nine-node default graph with declared effect sizes. Error nodes
/// carry emitters in fraction units (0.15 = 15% of reference words).
pub fn paper_shaped() -> ScmDocument {
    let mut tables = BTreeMap::new();
    tables.insert(
        AGE.to_string(),
        probs(&[&[0.08, 0.09, 0.09, 0.10, 0.09, 0.09, 0.09, 0.09, 0.09, 0.10, 0.09]]),
    );
    tables.insert(GENDER.to_string(), probs(&[&[0.5, 0.5]]));
    tables.insert(SNR.to_string(), probs(&[&[0.2, 0.5, 0.3]]));
    tables.insert(VOCAB_DIFF.to_string(), probs(&[&[0.3, 0.4, 0.3]]));
    tables.insert(NO_WORDS.to_string(), probs(&[&[0.4, 0.35, 0.25]]));
    tables.insert(GOP.to_string(), logit(&[(AGE, 1.2), (VOCAB_DIFF, -0.5)], [-0.7, 0.7]));
    tables.insert(
        SUBS_ERR.to_string(),
        logit(
            &[(AGE, -1.0), (GENDER, 0.2), (SNR, -0.5), (VOCAB_DIFF, 0.4), (NO_WORDS, -1.2), (GOP, -0.6)],
            [-0.5, 1.0],
        ),
    );
    tables.insert(
        DEL_ERR.to_string(),
        logit(
            &[(AGE, -0.8), (GENDER, 0.1), (SNR, -0.3), (VOCAB_DIFF, 0.2), (NO_WORDS, -0.9), (GOP, -0.4)],
            [0.0, 1.5],
        ),
    );
    tables.insert(
        INS_ERR.to_string(),
        logit(
            &[(AGE, -0.6), (GENDER, -0.1), (SNR, -0.8), (VOCAB_DIFF, 0.1), (NO_WORDS, -0.5), (GOP, -0.3)],
            [0.2, 1.6],
        ),
    );
    let emitter = |means: [f64; 3], spread| Emitter {
        means: means.to_vec(),
        spread,
    };
    let emitters = [
        (SUBS_ERR, emitter([0.05, 0.15, 0.35], 0.03)),
        (DEL_ERR, emitter([0.01, 0.03, 0.08], 0.01)),
        (INS_ERR, emitter([0.02, 0.06, 0.15], 0.02)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    ScmDocument {
        label: Some("paper-shaped".into()),
        graph: GraphRef::Builtin("paper-default".into()),
        seed: 20240901,
        n: 200_000,
        tables,
        emitters,
    }
}

/// `Y` is an exact copy of a three-level `X`; `W` is independent noise.
pub fn copy_pair() -> ScmDocument {
    let node = |name: &str, kind| NodeSpec {
        name: name.to_string(),
        kind,
        categories: THREE_LEVELS.iter().map(|s| s.to_string()).collect(),
    };
    let graph = GraphSpec::new(
        vec![
            node("X", NodeKind::Exogenous),
            node("Y", NodeKind::Endogenous),
            node("W", NodeKind::Exogenous),
        ],
        vec![("X".into(), "Y".into())],
    )
    .expect("copy graph is valid");
    let tables = [
        ("X", probs(&[&[0.2, 0.3, 0.5]])),
        ("Y", probs(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]])),
        ("W", probs(&[&[0.6, 0.3, 0.1]])),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    ScmDocument {
        label: Some("copy-pair".into()),
        graph: GraphRef::Inline(graph),
        seed: 7,
        n: 200_000,
        tables,
        emitters: BTreeMap::new(),
    }
}
