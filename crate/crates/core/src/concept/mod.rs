//! Concepts: significance-weighted chains learned from reduced samples.
//!
//! Training reduces every sample and folds the reduced chains into a prefix
//! tree keyed by node value and link label, counting how many samples pass
//! through each node. Interpretation reduces an input and matches its chain
//! against the concept's root-to-leaf paths.

mod ged;
mod interpret;
mod store;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reduction::{ReducedStructure, ReductionError, RelationLabel, SignificanceStats};
use crate::ErrorKind;

pub use ged::{graph_edit_distance, LabeledGraph, MAX_GED_NODES};
pub use interpret::{interpret, InterpretationResult, Verdict};
pub use store::{classify, Classification, ConceptStore, Scored, STORE_FORMAT_VERSION};
pub use train::train_concept;

/// Graph over qualitative node values and relation labels.
pub type ChainGraph = LabeledGraph<i64, RelationLabel>;

/// General container for concept topologies beyond chains; currently the
/// same directed labeled graph.
pub type HyperGraph = ChainGraph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConceptError {
    #[error("training needs at least one sample")]
    NoSamples,
    #[error("concept is empty")]
    EmptyConcept,
    #[error("no responses to compare")]
    NoResponses,
    #[error("response for `{0}` is not a number")]
    NanResponse(String),
    #[error("graph has {nodes} nodes; exact edit distance is limited to {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error("input lacks the concept parameter `{0}`")]
    Incompatible(String),
    #[error("unsupported concept store version {0}")]
    UnsupportedVersion(u32),
    #[error("duplicate concept class `{0}`")]
    DuplicateClass(String),
    #[error("concept store: {0}")]
    Store(String),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

impl ConceptError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            ConceptError::TooLarge { .. } => ErrorKind::Capacity,
            ConceptError::EmptyConcept => ErrorKind::Domain,
            ConceptError::Reduction(e) => e.kind(),
            _ => ErrorKind::Validation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptNode {
    /// Qualitative value (segment index).
    pub value: i64,
    pub stats: SignificanceStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptLink {
    pub from: usize,
    pub to: usize,
    pub label: RelationLabel,
    pub stats: SignificanceStats,
}

/// Prefix tree of reduced chains. Every node has at most one incoming link;
/// a link carries the stats of the node it enters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptGraph {
    pub class_label: String,
    pub parameter: String,
    pub nodes: Vec<ConceptNode>,
    pub links: Vec<ConceptLink>,
    pub sample_count: u64,
}

impl ConceptGraph {
    pub fn children(&self, v: usize) -> impl Iterator<Item = &ConceptLink> {
        self.links.iter().filter(move |l| l.from == v)
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&v| self.links.iter().all(|l| l.to != v))
    }

    /// Unbranched: one root and at most one child per node.
    pub fn is_chain(&self) -> bool {
        self.roots().count() == 1 && (0..self.nodes.len()).all(|v| self.children(v).count() <= 1)
    }

    /// Every root-to-leaf path as node indices.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack: Vec<Vec<usize>> = self.roots().map(|r| vec![r]).collect();
        stack.reverse();
        while let Some(path) = stack.pop() {
            let last = *path.last().expect("paths are non-empty");
            let kids: Vec<usize> = self.children(last).map(|l| l.to).collect();
            if kids.is_empty() {
                out.push(path);
            } else {
                for &k in kids.iter().rev() {
                    let mut p = path.clone();
                    p.push(k);
                    stack.push(p);
                }
            }
        }
        out
    }

    pub fn link_between(&self, a: usize, b: usize) -> Option<&ConceptLink> {
        self.links.iter().find(|l| l.from == a && l.to == b)
    }
}

/// Conversion into the graph compared by [`diversity`].
pub trait AsGraph {
    fn as_graph(&self) -> ChainGraph;
}

impl AsGraph for ReducedStructure {
    fn as_graph(&self) -> ChainGraph {
        LabeledGraph {
            nodes: self.nodes.iter().map(|n| n.value).collect(),
            edges: self.links.iter().map(|l| (l.from, l.to, l.label)).collect(),
        }
    }
}

impl AsGraph for ConceptGraph {
    fn as_graph(&self) -> ChainGraph {
        LabeledGraph {
            nodes: self.nodes.iter().map(|n| n.value).collect(),
            edges: self.links.iter().map(|l| (l.from, l.to, l.label)).collect(),
        }
    }
}

impl AsGraph for ChainGraph {
    fn as_graph(&self) -> ChainGraph {
        self.clone()
    }
}

/// Unit-cost graph edit distance.
pub fn diversity<A: AsGraph + ?Sized, B: AsGraph + ?Sized>(
    a: &A,
    b: &B,
) -> Result<usize, ConceptError> {
    graph_edit_distance(&a.as_graph(), &b.as_graph())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadoutKind {
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub value: f64,
    pub kind: ReadoutKind,
}

/// Constant response: the number of structural elements in the concept.
pub fn readout(con: &ConceptGraph) -> Result<Readout, ConceptError> {
    if con.nodes.is_empty() {
        return Err(ConceptError::EmptyConcept);
    }
    Ok(Readout {
        value: con.nodes.len() as f64,
        kind: ReadoutKind::Constant,
    })
}

/// Id with the largest response; the smallest id wins ties.
pub fn wta<I: Ord + Clone + std::fmt::Debug>(responses: &[(I, f64)]) -> Result<I, ConceptError> {
    let mut best: Option<&(I, f64)> = None;
    for r in responses {
        if r.1.is_nan() {
            return Err(ConceptError::NanResponse(format!("{:?}", r.0)));
        }
        best = match best {
            Some(b) if b.1 > r.1 || (b.1 == r.1 && b.0 <= r.0) => Some(b),
            _ => Some(r),
        };
    }
    best.map(|b| b.0.clone()).ok_or(ConceptError::NoResponses)
}
