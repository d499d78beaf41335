use std::collections::BTreeMap;

use enlab_core::dataset::{write_records, SyntheticStrokeDataset};
use enlab_core::{
    classify, diversity, readout, train_concept, ConceptStore, OrderedStructure, Verdict,
};
use serde_json::{json, Value};

use super::{
    detector, joined, load_records, num, perceive_all, read, reduction_config, Ctx, REDUCTION_KEYS,
};
use crate::error::{CliError, CliResult};
use crate::output::{Report, Table};

const DEFAULT_STORE: &str = "concepts.json";

fn load_store(ctx: &Ctx) -> CliResult<ConceptStore> {
    let path = ctx.config.require_path("store")?;
    let text = read(&path)?;
    ConceptStore::from_json(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Trains one concept per class label and writes the store.
pub fn concept_train(ctx: &Ctx) -> CliResult<Report> {
    let cfg = &ctx.config;
    let mut keys = REDUCTION_KEYS.to_vec();
    keys.push("store");
    cfg.allow(&keys)?;
    let rc = reduction_config(cfg)?;
    let records = load_records(cfg)?;
    let structures = perceive_all(&records, &detector(cfg)?)?;
    let mut by_class: BTreeMap<&str, Vec<OrderedStructure>> = BTreeMap::new();
    for (i, (r, s)) in records.iter().zip(structures).enumerate() {
        let class = r.class.as_deref().ok_or_else(|| {
            CliError::Validation(format!("record {i} (`{}`) has no class label", r.id))
        })?;
        by_class.entry(class).or_default().push(s);
    }
    if by_class.is_empty() {
        return Err(CliError::Validation(
            "training needs at least one labeled record".into(),
        ));
    }

    let mut store = ConceptStore::new(&rc);
    let mut table = Table::new(&[
        "class",
        "parameter",
        "samples",
        "nodes",
        "links",
        "is_chain",
        "readout",
    ]);
    for (class, samples) in &by_class {
        let con = train_concept(samples, class, &rc)?;
        table.push(vec![
            json!(class),
            json!(con.parameter),
            json!(con.sample_count),
            json!(con.nodes.len()),
            json!(con.links.len()),
            json!(con.is_chain()),
            readout(&con).map_or(Value::Null, |r| num(r.value)),
        ]);
        store.insert(con)?;
    }
    let name = cfg.str("store").unwrap_or(DEFAULT_STORE);
    let mut report = Report {
        table,
        files: vec![(name.to_string(), store.to_json())],
        ..Report::default()
    };
    report
        .summary
        .insert("classes".into(), json!(by_class.len()));
    Ok(report)
}

/// Interprets every record against every stored concept.
pub fn concept_infer(ctx: &Ctx) -> CliResult<Report> {
    let cfg = &ctx.config;
    cfg.allow(&["store", "dataset", "scales"])?;
    let store = load_store(ctx)?;
    let records = load_records(cfg)?;
    let structures = perceive_all(&records, &detector(cfg)?)?;

    let mut table = Table::new(&[
        "index",
        "id",
        "class",
        "concept",
        "verdict",
        "diversity",
        "response",
        "winner",
    ]);
    let (mut labeled, mut correct, mut unrecognized) = (0usize, 0usize, 0usize);
    for (i, (r, s)) in records.iter().zip(&structures).enumerate() {
        let c = classify(s, &store)?;
        if r.class.is_some() {
            labeled += 1;
            correct += usize::from(c.winner == r.class);
        }
        unrecognized += usize::from(c.winner.is_none());
        for sc in &c.scores {
            table.push(vec![
                json!(i),
                json!(r.id),
                json!(r.class),
                json!(sc.class_label),
                json!(sc.result.verdict.as_str()),
                json!(sc.result.diversity),
                sc.response.map_or(Value::Null, num),
                json!(c.winner),
            ]);
        }
    }
    let recognized = table
        .rows
        .iter()
        .filter(|row| row[4] == json!(Verdict::Recognized.as_str()))
        .count();
    let mut report = Report {
        table,
        ..Report::default()
    };
    report.summary.insert("inputs".into(), json!(records.len()));
    report.summary.insert("labeled".into(), json!(labeled));
    report
        .summary
        .insert("winner_matches_class".into(), json!(correct));
    report
        .summary
        .insert("no_winner".into(), json!(unrecognized));
    report
        .summary
        .insert("recognized_pairs".into(), json!(recognized));
    Ok(report)
}

/// Edit distance between stored concepts: the pair `a`, `b` or every pair.
pub fn concept_diversity(ctx: &Ctx) -> CliResult<Report> {
    let cfg = &ctx.config;
    cfg.allow(&["store", "a", "b"])?;
    let store = load_store(ctx)?;
    let lookup = |key: &str| -> CliResult<Option<usize>> {
        cfg.str(key)
            .map(|label| {
                store
                    .concepts
                    .iter()
                    .position(|c| c.class_label == label)
                    .ok_or_else(|| CliError::Validation(format!("no concept `{label}` in store")))
            })
            .transpose()
    };
    let pairs: Vec<(usize, usize)> = match (lookup("a")?, lookup("b")?) {
        (Some(a), Some(b)) => vec![(a, b)],
        (None, None) => {
            let n = store.concepts.len();
            (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .collect()
        }
        _ => {
            return Err(CliError::Validation(
                "set both `a` and `b`, or neither".into(),
            ))
        }
    };
    let mut table = Table::new(&["a", "b", "diversity"]);
    for (a, b) in pairs {
        let (ca, cb) = (&store.concepts[a], &store.concepts[b]);
        table.push(vec![
            json!(ca.class_label),
            json!(cb.class_label),
            json!(diversity(ca, cb)?),
        ]);
    }
    Ok(Report {
        table,
        ..Report::default()
    })
}

/// Synthetic stroke records plus their segmentation.
pub fn gen_dataset(ctx: &Ctx) -> CliResult<Report> {
    let cfg = &ctx.config;
    cfg.allow(&["noise", "samples_per_class", "dataset", "segmentation"])?;
    let noise: f64 = cfg.or("noise", 0.0)?;
    let spc: usize = cfg.or("samples_per_class", 50)?;
    let strokes = SyntheticStrokeDataset::builtin(noise, spc, ctx.seed);
    let gen = strokes.generate()?;
    let data_name = cfg.str("dataset").unwrap_or("strokes.jsonl");
    let seg_name = cfg.str("segmentation").unwrap_or("segmentation.json");
    let mut seg = serde_json::to_string_pretty(&gen.segmentation).expect("segmentations serialize");
    seg.push('\n');

    let mut table = Table::new(&["class", "prototype", "samples"]);
    for c in &strokes.classes {
        table.push(vec![json!(c.label), joined(&c.prototype), json!(spc)]);
    }
    let mut report = Report {
        table,
        files: vec![
            (data_name.to_string(), write_records(&gen.records)),
            (seg_name.to_string(), seg),
        ],
        ..Report::default()
    };
    report
        .summary
        .insert("records".into(), json!(gen.records.len()));
    report.summary.insert("noise".into(), num(noise));
    report.summary.insert("margin".into(), num(gen.margin));
    report
        .summary
        .insert("label_preserving".into(), json!(gen.label_preserving));
    report.summary.insert(
        "warning".into(),
        if gen.label_preserving {
            Value::Null
        } else {
            json!(format!(
                "noise {noise} is not below the threshold margin {}; labels may not survive reduction",
                gen.margin
            ))
        },
    );
    Ok(report)
}
