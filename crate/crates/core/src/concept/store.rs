//! Persisted set of concepts and winner-take-all classification.

use serde::{Deserialize, Serialize};

use super::{interpret, readout, wta, ConceptError, ConceptGraph, InterpretationResult, Verdict};
use crate::reduction::{OrderedStructure, ReductionConfig, ScaleTable, Segmentation};

pub const STORE_FORMAT_VERSION: u32 = 1;

/// Concepts plus the reduction settings they were trained with, stored as
/// JSON. Concepts are kept sorted by class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptStore {
    pub format_version: u32,
    #[serde(default)]
    pub parameter: Option<String>,
    pub segmentations: Vec<Segmentation>,
    pub gamma_sig: f64,
    pub zero_tol: f64,
    pub scale_table: ScaleTable,
    pub concepts: Vec<ConceptGraph>,
}

impl ConceptStore {
    pub fn new(cfg: &ReductionConfig) -> Self {
        Self {
            format_version: STORE_FORMAT_VERSION,
            parameter: cfg.parameter.clone(),
            segmentations: cfg.segmentations.clone(),
            gamma_sig: cfg.gamma_sig,
            zero_tol: cfg.zero_tol,
            scale_table: cfg.scale_table,
            concepts: Vec::new(),
        }
    }

    pub fn config(&self) -> ReductionConfig {
        ReductionConfig {
            parameter: self.parameter.clone(),
            segmentations: self.segmentations.clone(),
            zero_tol: self.zero_tol,
            gamma_sig: self.gamma_sig,
            scale_table: self.scale_table,
        }
    }

    pub fn insert(&mut self, con: ConceptGraph) -> Result<(), ConceptError> {
        match self
            .concepts
            .binary_search_by(|c| c.class_label.as_str().cmp(&con.class_label))
        {
            Ok(_) => Err(ConceptError::DuplicateClass(con.class_label)),
            Err(pos) => {
                self.concepts.insert(pos, con);
                Ok(())
            }
        }
    }

    pub fn get(&self, class_label: &str) -> Option<&ConceptGraph> {
        self.concepts.iter().find(|c| c.class_label == class_label)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("store serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ConceptError> {
        let store: Self =
            serde_json::from_str(text).map_err(|e| ConceptError::Store(e.to_string()))?;
        if store.format_version != STORE_FORMAT_VERSION {
            return Err(ConceptError::UnsupportedVersion(store.format_version));
        }
        Ok(store)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub class_label: String,
    pub result: InterpretationResult,
    /// `readout − diversity`; `None` for unrecognized inputs, which do not
    /// compete.
    pub response: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub scores: Vec<Scored>,
    pub winner: Option<String>,
}

/// Interprets `input` against every stored concept and picks the winner
/// among the concepts that matched.
pub fn classify(
    input: &OrderedStructure,
    store: &ConceptStore,
) -> Result<Classification, ConceptError> {
    let cfg = store.config();
    let mut scores = Vec::with_capacity(store.concepts.len());
    for con in &store.concepts {
        let result = interpret(input, con, &cfg)?;
        let response = match result.verdict {
            Verdict::Unrecognized => None,
            _ => Some(readout(con)?.value - result.diversity as f64),
        };
        scores.push(Scored {
            class_label: con.class_label.clone(),
            result,
            response,
        });
    }
    let competing: Vec<(String, f64)> = scores
        .iter()
        .filter_map(|s| s.response.map(|r| (s.class_label.clone(), r)))
        .collect();
    let winner = if competing.is_empty() {
        None
    } else {
        Some(wta(&competing)?)
    };
    Ok(Classification { scores, winner })
}
