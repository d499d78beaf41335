//! One function per CLI command. Each validates its config keys, runs the
//! experiment and returns a [`Report`] for the output layer.

mod concept;
mod mcp;
mod reduce;
mod spins;

use std::path::Path;

use enlab_core::dataset::{
    parse_records, parse_segmentations, perceive, DetectorConfig, SequenceRecord,
};
use enlab_core::entropy::PhysicalConstants;
use enlab_core::{OrderedStructure, ReductionConfig, Scale, ScaleTable};
use serde_json::{json, Value};

use crate::config::KvConfig;
use crate::error::{CliError, CliResult};
use crate::output::Report;

pub use concept::{concept_diversity, concept_infer, concept_train, gen_dataset};
pub use mcp::{entropy_sweep, mcp_census};
pub use reduce::reduce;
pub use spins::{hopfield, ising};

pub struct Ctx {
    pub config: KvConfig,
    pub seed: u64,
}

pub type Command = fn(&Ctx) -> CliResult<Report>;

pub(crate) fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn units(cfg: &KvConfig) -> CliResult<PhysicalConstants> {
    match cfg.str("units").unwrap_or("natural") {
        "natural" => Ok(PhysicalConstants::natural()),
        "si" => Ok(PhysicalConstants::si()),
        other => Err(CliError::Validation(format!(
            "config key `units`: expected natural or si, got `{other}`"
        ))),
    }
}

/// f64 cell; non-finite values become null.
pub(crate) fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub(crate) fn joined(xs: &[f64]) -> Value {
    Value::String(xs.iter().map(f64::to_string).collect::<Vec<_>>().join(" "))
}

/// `name=scale` pairs, comma-separated. Absent means every parameter is on
/// the ratio scale.
pub(crate) fn detector(cfg: &KvConfig) -> CliResult<DetectorConfig> {
    let Some(text) = cfg.str("scales") else {
        return Ok(DetectorConfig::default());
    };
    let mut pairs = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, scale) = item.split_once('=').ok_or_else(|| {
            CliError::Validation(format!(
                "config key `scales`: expected `name=scale`, got `{item}`"
            ))
        })?;
        let scale: Scale = scale
            .trim()
            .parse()
            .map_err(|e| CliError::Validation(format!("config key `scales`: {e}")))?;
        pairs.push((name.trim(), scale));
    }
    Ok(DetectorConfig::declared(&pairs))
}

pub(crate) fn load_records(cfg: &KvConfig) -> CliResult<Vec<SequenceRecord>> {
    let path = cfg.require_path("dataset")?;
    let text = read(&path)?;
    parse_records(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub(crate) fn perceive_all(
    records: &[SequenceRecord],
    det: &DetectorConfig,
) -> CliResult<Vec<OrderedStructure>> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| perceive(r, i, det).map_err(CliError::from))
        .collect()
}

/// Reduction settings shared by `reduce` and `concept-train`.
pub(crate) fn reduction_config(cfg: &KvConfig) -> CliResult<ReductionConfig> {
    let mut rc = ReductionConfig {
        parameter: cfg.str("parameter").map(String::from),
        ..ReductionConfig::default()
    };
    if let Some(path) = cfg.path("segmentation") {
        let text = read(&path)?;
        rc.segmentations = parse_segmentations(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    }
    rc.gamma_sig = cfg.or("gamma_sig", rc.gamma_sig)?;
    rc.zero_tol = cfg.or("zero_tol", rc.zero_tol)?;
    if let Some(e) = cfg.reals("scale_energies")? {
        let [r, i, o, n] = e[..] else {
            return Err(CliError::Validation(
                "config key `scale_energies`: expected four values (ratio, interval, ordinal, nominal)".into(),
            ));
        };
        rc.scale_table = ScaleTable::new(r, i, o, n)?;
    }
    Ok(rc)
}

pub(crate) const REDUCTION_KEYS: [&str; 7] = [
    "dataset",
    "segmentation",
    "scales",
    "parameter",
    "gamma_sig",
    "zero_tol",
    "scale_energies",
];
