//! Sequence record and segmentation file formats, the detector that turns
//! records into structures, and the synthetic stroke generator.
//!
//! Records are JSON Lines, one structure per line:
//!
//! ```text
//! {"id":"s1","class":"rise","elements":[{"params":{"orientation":20}}, ...]}
//! ```
//!
//! A segmentation file holds one segmentation object or an array of them.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reduction::{
    OrderedStructure, ParamValue, ReductionError, Scale, Segmentation, StructElement,
};
use crate::rng::substream;
use crate::ErrorKind;

/// Parameter carried by synthetic strokes.
pub const ORIENTATION: &str = "orientation";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("record {index} (`{id}`) has no elements")]
    EmptyRecord { index: usize, id: String },
    #[error("record {index} (`{id}`): unknown parameter `{name}`")]
    UnknownParameter {
        index: usize,
        id: String,
        name: String,
    },
    #[error("record {index} (`{id}`): {source}")]
    Structure {
        index: usize,
        id: String,
        source: ReductionError,
    },
    #[error("segmentation file: {0}")]
    Segmentation(String),
    #[error("stroke dataset: {0}")]
    Generator(String),
}

impl DatasetError {
    pub fn kind(&self) -> ErrorKind {
        ErrorKind::Validation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordElement {
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    pub elements: Vec<RecordElement>,
}

impl SequenceRecord {
    pub fn from_values(id: &str, class: Option<&str>, name: &str, values: &[f64]) -> Self {
        Self {
            id: id.to_string(),
            class: class.map(String::from),
            elements: values
                .iter()
                .map(|&v| RecordElement {
                    params: BTreeMap::from([(name.to_string(), v)]),
                })
                .collect(),
        }
    }
}

/// Parses JSON Lines; blank lines are skipped and errors carry the 1-based
/// line number.
pub fn parse_records(text: &str) -> Result<Vec<SequenceRecord>, DatasetError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| DatasetError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_records(records: &[SequenceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(Segmentation),
    Many(Vec<Segmentation>),
}

pub fn parse_segmentations(text: &str) -> Result<Vec<Segmentation>, DatasetError> {
    let segs =
        match serde_json::from_str(text).map_err(|e| DatasetError::Segmentation(e.to_string()))? {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        };
    for s in &segs {
        s.validate()
            .map_err(|e| DatasetError::Segmentation(format!("`{}`: {e}", s.parameter)))?;
    }
    Ok(segs)
}

/// Maps record readings onto internal parameters. The identity detector
/// accepts every parameter on the ratio scale; a declared parameter list
/// rejects anything else.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectorConfig {
    pub declared: Option<BTreeMap<String, Scale>>,
}

impl DetectorConfig {
    pub fn declared(params: &[(&str, Scale)]) -> Self {
        Self {
            declared: Some(params.iter().map(|&(n, s)| (n.to_string(), s)).collect()),
        }
    }

    fn scale_of(&self, name: &str) -> Option<Scale> {
        match &self.declared {
            None => Some(Scale::Ratio),
            Some(m) => m.get(name).copied(),
        }
    }
}

/// Turns record `index` into an ordered structure.
pub fn perceive(
    record: &SequenceRecord,
    index: usize,
    detector: &DetectorConfig,
) -> Result<OrderedStructure, DatasetError> {
    if record.elements.is_empty() {
        return Err(DatasetError::EmptyRecord {
            index,
            id: record.id.clone(),
        });
    }
    let mut elements = Vec::with_capacity(record.elements.len());
    for e in &record.elements {
        let mut params = BTreeMap::new();
        for (name, &value) in &e.params {
            let scale = detector
                .scale_of(name)
                .ok_or_else(|| DatasetError::UnknownParameter {
                    index,
                    id: record.id.clone(),
                    name: name.clone(),
                })?;
            params.insert(name.clone(), ParamValue::new(value, scale));
        }
        elements.push(StructElement { params });
    }
    OrderedStructure::new(elements).map_err(|source| DatasetError::Structure {
        index,
        id: record.id.clone(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeClass {
    pub label: String,
    /// Orientation of each stroke segment.
    pub prototype: Vec<f64>,
}

/// Noisy copies of orientation prototypes under quadrant segmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticStrokeDataset {
    pub classes: Vec<StrokeClass>,
    /// Half-width of the uniform noise added to every reading.
    pub noise: f64,
    pub samples_per_class: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDataset {
    pub records: Vec<SequenceRecord>,
    pub segmentation: Segmentation,
    /// Noise strictly below this preserves every gradient sign and segment.
    pub margin: f64,
    pub label_preserving: bool,
}

impl SyntheticStrokeDataset {
    /// Three prototypes: a rising sweep through three quadrants, an arch that
    /// turns back in the second quadrant, and a falling sweep.
    pub fn builtin(noise: f64, samples_per_class: usize, seed: u64) -> Self {
        let class = |label: &str, prototype: [f64; 5]| StrokeClass {
            label: label.to_string(),
            prototype: prototype.to_vec(),
        };
        Self {
            classes: vec![
                class("rise", [20.0, 50.0, 110.0, 140.0, 200.0]),
                class("arch", [30.0, 70.0, 120.0, 65.0, 25.0]),
                class("fall", [250.0, 210.0, 160.0, 120.0, 50.0]),
            ],
            noise,
            samples_per_class,
            seed,
        }
    }

    pub fn segmentation(&self) -> Segmentation {
        Segmentation::quadrants(ORIENTATION)
    }

    /// Smallest of: distance of any prototype reading to a threshold, and
    /// half of any prototype step.
    pub fn margin(&self) -> f64 {
        let seg = self.segmentation();
        let mut m = f64::INFINITY;
        for c in &self.classes {
            for &v in &c.prototype {
                m = m.min(seg.distance_to_threshold(v));
            }
            for w in c.prototype.windows(2) {
                m = m.min((w[1] - w[0]).abs() / 2.0);
            }
        }
        m
    }

    pub fn generate(&self) -> Result<GeneratedDataset, DatasetError> {
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(DatasetError::Generator(format!(
                "noise {} must be non-negative",
                self.noise
            )));
        }
        if let Some(c) = self.classes.iter().find(|c| c.prototype.len() < 2) {
            return Err(DatasetError::Generator(format!(
                "prototype `{}` needs at least two readings",
                c.label
            )));
        }
        let mut rng = substream(self.seed, "dataset.strokes");
        let mut records = Vec::with_capacity(self.classes.len() * self.samples_per_class);
        for c in &self.classes {
            for k in 0..self.samples_per_class {
                let values: Vec<f64> = c
                    .prototype
                    .iter()
                    .map(|&v| {
                        if self.noise > 0.0 {
                            v + rng.random_range(-self.noise..=self.noise)
                        } else {
                            v
                        }
                    })
                    .collect();
                records.push(SequenceRecord::from_values(
                    &format!("{}-{k:03}", c.label),
                    Some(&c.label),
                    ORIENTATION,
                    &values,
                ));
            }
        }
        let margin = self.margin();
        Ok(GeneratedDataset {
            records,
            segmentation: self.segmentation(),
            margin,
            label_preserving: self.noise < margin,
        })
    }
}
