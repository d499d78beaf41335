//! Matching a reduced input against a concept.

use serde::{Deserialize, Serialize};

use super::train::chains;
use super::{diversity, ConceptError, ConceptGraph};
use crate::reduction::{
    composite_reduce, OrderedStructure, ReducedStructure, ReductionConfig, RelationLabel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The concept is a single chain identical to the input chain.
    Recognized,
    /// A concept path occurs as a contiguous sub-chain of the input.
    AssociativeInput,
    /// The input occurs as a contiguous sub-chain of a concept path.
    AssociativeConcept,
    Unrecognized,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Recognized => "recognized",
            Verdict::AssociativeInput => "associative_input",
            Verdict::AssociativeConcept => "associative_concept",
            Verdict::Unrecognized => "unrecognized",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationResult {
    pub verdict: Verdict,
    /// `(input node, concept node)` pairs of the match; empty when
    /// unrecognized.
    pub mapping: Vec<(usize, usize)>,
    /// Edit distance between the reduced input and the whole concept.
    pub diversity: usize,
    pub reduced: ReducedStructure,
}

type Chain = (Vec<i64>, Vec<RelationLabel>);

/// Offset at which `needle` occurs contiguously inside `hay`.
fn find_subchain(hay: &Chain, needle: &Chain) -> Option<usize> {
    let (hv, hl) = hay;
    let (nv, nl) = needle;
    if nv.is_empty() || nv.len() > hv.len() {
        return None;
    }
    (0..=hv.len() - nv.len())
        .find(|&k| hv[k..k + nv.len()] == nv[..] && hl[k..k + nl.len()] == nl[..])
}

fn path_chain(con: &ConceptGraph, path: &[usize]) -> Chain {
    let values = path.iter().map(|&v| con.nodes[v].value).collect();
    let labels = path
        .windows(2)
        .map(|w| {
            con.link_between(w[0], w[1])
                .expect("consecutive path nodes are linked")
                .label
        })
        .collect();
    (values, labels)
}

/// Reduces `input` with the concept's parameter and matches its chain.
pub fn interpret(
    input: &OrderedStructure,
    con: &ConceptGraph,
    cfg: &ReductionConfig,
) -> Result<InterpretationResult, ConceptError> {
    if !input.has_parameter(&con.parameter) {
        return Err(ConceptError::Incompatible(con.parameter.clone()));
    }
    let cfg = ReductionConfig {
        parameter: Some(con.parameter.clone()),
        ..cfg.clone()
    };
    let reduced = composite_reduce(input, &cfg, None)?;
    let diversity = diversity(&reduced, con)?;
    let chain = chains(&reduced).into_iter().next().unwrap_or_default();
    let paths = con.paths();
    let path_chains: Vec<Chain> = paths.iter().map(|p| path_chain(con, p)).collect();

    let (verdict, mapping) = if con.is_chain() && path_chains[0] == chain {
        (
            Verdict::Recognized,
            paths[0].iter().copied().enumerate().collect(),
        )
    } else if let Some((p, k)) = paths
        .iter()
        .zip(&path_chains)
        .find_map(|(p, pc)| find_subchain(&chain, pc).map(|k| (p, k)))
    {
        (
            Verdict::AssociativeInput,
            p.iter().enumerate().map(|(j, &c)| (k + j, c)).collect(),
        )
    } else if let Some((p, k)) = paths
        .iter()
        .zip(&path_chains)
        .find_map(|(p, pc)| find_subchain(pc, &chain).map(|k| (p, k)))
    {
        (
            Verdict::AssociativeConcept,
            (0..chain.0.len()).map(|j| (j, p[k + j])).collect(),
        )
    } else {
        (Verdict::Unrecognized, Vec::new())
    };
    Ok(InterpretationResult {
        verdict,
        mapping,
        diversity,
        reduced,
    })
}
