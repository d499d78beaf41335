//! Folding reduced samples into a concept prefix tree.

use std::collections::{BTreeMap, BTreeSet};

use super::{ConceptError, ConceptGraph, ConceptLink, ConceptNode};
use crate::reduction::{
    composite_reduce, principal_parameter, structural_weight, OrderedStructure, ReducedStructure,
    ReductionConfig, RelationLabel, SignificanceStats,
};

/// Node-value and link-label sequences of each maximal chain in `r`.
pub(crate) fn chains(r: &ReducedStructure) -> Vec<(Vec<i64>, Vec<RelationLabel>)> {
    let mut out = Vec::new();
    for start in (0..r.nodes.len()).filter(|&v| r.links.iter().all(|l| l.to != v)) {
        let mut values = vec![r.nodes[start].value];
        let mut labels = Vec::new();
        let mut cur = start;
        while let Some(l) = r.links.iter().find(|l| l.from == cur) {
            labels.push(l.label);
            values.push(r.nodes[l.to].value);
            cur = l.to;
        }
        out.push((values, labels));
    }
    out
}

/// Reduces each sample with [`composite_reduce`], aligns the reduced chains
/// position by position from their first node, and keeps the tree nodes
/// seen in at least `gamma_sig` of the samples.
///
/// Without a configured parameter, the principal parameter most samples
/// agree on is used (the first name on ties).
pub fn train_concept(
    samples: &[OrderedStructure],
    class_label: &str,
    cfg: &ReductionConfig,
) -> Result<ConceptGraph, ConceptError> {
    if samples.is_empty() {
        return Err(ConceptError::NoSamples);
    }
    let parameter = match &cfg.parameter {
        Some(p) => p.clone(),
        None => {
            let mut votes: BTreeMap<String, usize> = BTreeMap::new();
            for s in samples {
                *votes.entry(principal_parameter(s, cfg, None)?).or_default() += 1;
            }
            let top = votes.values().copied().max().unwrap_or(0);
            votes
                .into_iter()
                .find(|&(_, v)| v == top)
                .map(|(k, _)| k)
                .expect("at least one vote")
        }
    };
    let cfg = ReductionConfig {
        parameter: Some(parameter.clone()),
        ..cfg.clone()
    };

    let mut counts: Vec<u64> = Vec::new();
    let mut g = ConceptGraph {
        class_label: class_label.to_string(),
        parameter: parameter.clone(),
        nodes: Vec::new(),
        links: Vec::new(),
        sample_count: samples.len() as u64,
    };
    for s in samples {
        let reduced = composite_reduce(s, &cfg, None)?;
        let mut seen = BTreeSet::new();
        for (values, labels) in chains(&reduced) {
            let root = g.roots().find(|&r| g.nodes[r].value == values[0]);
            let mut cur = match root {
                Some(r) => r,
                None => push_node(&mut g, &mut counts, values[0], None),
            };
            seen.insert(cur);
            for (label, &value) in labels.iter().zip(&values[1..]) {
                let next = g
                    .children(cur)
                    .find(|l| l.label == *label && g.nodes[l.to].value == value)
                    .map(|l| l.to);
                cur = match next {
                    Some(n) => n,
                    None => push_node(&mut g, &mut counts, value, Some((cur, *label))),
                };
                seen.insert(cur);
            }
        }
        for v in seen {
            counts[v] += 1;
        }
    }

    for (v, &c) in counts.iter().enumerate() {
        let mut stats = structural_weight(c, g.sample_count)?;
        stats.gamma_sig = cfg.gamma_sig;
        g.nodes[v].stats = stats;
    }
    for l in &mut g.links {
        l.stats = g.nodes[l.to].stats;
    }
    Ok(prune_subtrees(&g, cfg.gamma_sig))
}

fn push_node(
    g: &mut ConceptGraph,
    counts: &mut Vec<u64>,
    value: i64,
    parent: Option<(usize, RelationLabel)>,
) -> usize {
    let v = g.nodes.len();
    g.nodes.push(ConceptNode {
        value,
        stats: SignificanceStats::certain(),
    });
    counts.push(0);
    if let Some((from, label)) = parent {
        g.links.push(ConceptLink {
            from,
            to: v,
            label,
            stats: SignificanceStats::certain(),
        });
    }
    v
}

/// Removes nodes below `gamma` together with their descendants.
pub(crate) fn prune_subtrees(g: &ConceptGraph, gamma: f64) -> ConceptGraph {
    let n = g.nodes.len();
    let mut keep = vec![true; n];
    // Parents precede children in insertion order.
    for v in 0..n {
        let parent_dropped = g
            .links
            .iter()
            .find(|l| l.to == v)
            .is_some_and(|l| !keep[l.from]);
        if parent_dropped || g.nodes[v].stats.below(gamma) {
            keep[v] = false;
        }
    }
    let mut index = vec![usize::MAX; n];
    let mut nodes = Vec::new();
    for v in 0..n {
        if keep[v] {
            index[v] = nodes.len();
            nodes.push(g.nodes[v].clone());
        }
    }
    let links = g
        .links
        .iter()
        .filter(|l| keep[l.from] && keep[l.to])
        .map(|l| ConceptLink {
            from: index[l.from],
            to: index[l.to],
            ..l.clone()
        })
        .collect();
    ConceptGraph {
        nodes,
        links,
        ..g.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::readout;
    use crate::reduction::{Scale, Segmentation, Sign};

    fn cfg() -> ReductionConfig {
        ReductionConfig {
            segmentations: vec![Segmentation::quadrants("a")],
            ..ReductionConfig::default()
        }
    }

    fn stroke(v: &[f64]) -> OrderedStructure {
        OrderedStructure::from_values("a", v, Scale::Ratio).unwrap()
    }

    #[test]
    fn identical_samples_give_their_reduction() {
        let s = stroke(&[10.0, 40.0, 100.0, 60.0]);
        let samples = vec![s.clone(); 10];
        let c = train_concept(&samples, "x", &cfg()).unwrap();
        let r = composite_reduce(&s, &cfg(), None).unwrap();
        assert!(c.is_chain());
        assert_eq!(c.nodes.len(), r.node_count());
        assert!(c.nodes.iter().all(|n| n.stats.w_f64() == 1.0));
        let labels: Vec<_> = c.links.iter().map(|l| l.label).collect();
        assert_eq!(labels, r.link_labels());
        assert_eq!(c.parameter, "a");
    }

    #[test]
    fn minority_branch_is_pruned() {
        let mut samples = vec![stroke(&[10.0, 40.0, 100.0]); 8];
        samples.extend(vec![stroke(&[10.0, 40.0, 10.0]); 2]);
        let c = train_concept(&samples, "x", &cfg()).unwrap();
        assert_eq!(c.nodes.len(), 3);
        assert_eq!(c.nodes[2].stats.n_true, 8);
        assert_eq!(c.nodes[2].stats.w_f64(), 0.8);
        assert!(c.links.iter().all(|l| l.label.sign == Sign::Pos));

        let loose = ReductionConfig {
            gamma_sig: 0.1,
            ..cfg()
        };
        let c = train_concept(&samples, "x", &loose).unwrap();
        assert_eq!(c.nodes.len(), 4);
        assert!(!c.is_chain());
        assert_eq!(c.paths().len(), 2);
        assert_eq!(readout(&c).unwrap().value, 4.0);
    }

    #[test]
    fn single_sample_equals_its_reduction() {
        let s = stroke(&[300.0, 200.0, 100.0, 120.0]);
        let c = train_concept(std::slice::from_ref(&s), "x", &cfg()).unwrap();
        let r = composite_reduce(&s, &cfg(), None).unwrap();
        let (values, labels) = chains(&r).remove(0);
        assert_eq!(c.nodes.iter().map(|n| n.value).collect::<Vec<_>>(), values);
        assert_eq!(c.links.iter().map(|l| l.label).collect::<Vec<_>>(), labels);
    }

    #[test]
    fn rejects_empty_sample_list() {
        assert_eq!(
            train_concept(&[], "x", &cfg()),
            Err(ConceptError::NoSamples)
        );
    }

    #[test]
    fn training_is_deterministic() {
        let samples = vec![
            stroke(&[10.0, 40.0, 100.0]),
            stroke(&[200.0, 100.0, 10.0]),
            stroke(&[10.0, 40.0, 100.0]),
        ];
        let a = train_concept(&samples, "x", &cfg()).unwrap();
        assert_eq!(a, train_concept(&samples, "x", &cfg()).unwrap());
        assert_eq!(a.nodes.len(), 3);
    }
}
