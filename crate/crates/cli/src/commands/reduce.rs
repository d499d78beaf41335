use enlab_core::{composite_reduce, structure_energy};
use serde_json::json;

use super::{detector, load_records, num, perceive_all, reduction_config, Ctx, REDUCTION_KEYS};
use crate::error::{CliError, CliResult};
use crate::output::{Report, Table};

/// Per-structure energy ledger of the composite reduction.
pub fn reduce(ctx: &Ctx) -> CliResult<Report> {
    let cfg = &ctx.config;
    cfg.allow(&REDUCTION_KEYS)?;
    let rc = reduction_config(cfg)?;
    let records = load_records(cfg)?;
    let structures = perceive_all(&records, &detector(cfg)?)?;

    let mut table = Table::new(&[
        "index",
        "id",
        "class",
        "parameter",
        "input_elements",
        "output_nodes",
        "output_links",
        "input_energy",
        "output_energy",
        "monotone",
        "labels",
    ]);
    for (i, (rec, s)) in records.iter().zip(&structures).enumerate() {
        let out = composite_reduce(s, &rc, None).map_err(|e| {
            CliError::from_kind(e.kind(), format!("record {i} (`{}`): {e}", rec.id))
        })?;
        let before = structure_energy(s, &rc.scale_table).total;
        let after = structure_energy(&out, &rc.scale_table).total;
        if after > before {
            return Err(CliError::Invariant(format!(
                "record {i} (`{}`): energy rose from {before} to {after}",
                rec.id
            )));
        }
        let labels: Vec<String> = out.link_labels().iter().map(ToString::to_string).collect();
        table.push(vec![
            json!(i),
            json!(rec.id),
            json!(rec.class),
            json!(out.parameter),
            json!(s.len()),
            json!(out.node_count()),
            json!(out.links.len()),
            num(before),
            num(after),
            json!(after <= before),
            json!(labels.join(" ")),
        ]);
    }
    let mut report = Report {
        table,
        ..Report::default()
    };
    report
        .summary
        .insert("structures".into(), json!(records.len()));
    Ok(report)
}
