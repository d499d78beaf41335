//! Significance weights, structural pruning, the composite reduction and the
//! entropy and energy laws of the weight coefficient.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::sp::{demote_ratio, sp_reduce};
use super::{
    structure_energy, OrderedStructure, ReducedStructure, ReductionConfig, ReductionError,
};
use crate::entropy::{boltzmann_entropy, EntropyError, PhysicalConstants};

pub const DEFAULT_GAMMA_SIG: f64 = 0.5;
pub const DEFAULT_GAMMA_EXP: f64 = 1.0;

/// Count of true observations of a component over all samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceStats {
    pub n_true: u64,
    pub n_total: u64,
    /// Pruning threshold.
    pub gamma_sig: f64,
    /// Microstate exponent in `Ω(w) = Ω₀ w^γ`.
    pub gamma_exp: f64,
}

impl SignificanceStats {
    /// `w = 1` from a single observation.
    pub fn certain() -> Self {
        Self {
            n_true: 1,
            n_total: 1,
            gamma_sig: DEFAULT_GAMMA_SIG,
            gamma_exp: DEFAULT_GAMMA_EXP,
        }
    }

    pub fn w(&self) -> Ratio<u64> {
        Ratio::new(self.n_true, self.n_total)
    }

    pub fn w_f64(&self) -> f64 {
        self.n_true as f64 / self.n_total as f64
    }

    /// `w < gamma`, evaluated as `n_true < gamma · n_total`.
    pub fn below(&self, gamma: f64) -> bool {
        (self.n_true as f64) < gamma * self.n_total as f64
    }

    /// Whichever of the two has the smaller weight (`self` on ties).
    pub fn min_with(&self, other: &Self) -> Self {
        if other.w() < self.w() {
            *other
        } else {
            *self
        }
    }
}

/// `w = observed / total` as an exact rational.
pub fn structural_weight(observed: u64, total: u64) -> Result<SignificanceStats, ReductionError> {
    if total == 0 {
        return Err(ReductionError::NoSamples);
    }
    if observed > total {
        return Err(ReductionError::ObservedExceedsTotal { observed, total });
    }
    Ok(SignificanceStats {
        n_true: observed,
        n_total: total,
        ..SignificanceStats::certain()
    })
}

fn check_gamma(gamma: f64) -> Result<(), ReductionError> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(ReductionError::BadGamma(gamma))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneOutcome {
    pub structure: ReducedStructure,
    pub removed_nodes: usize,
    pub removed_links: usize,
    /// Set when a non-empty input lost every node.
    pub emptied: bool,
}

/// Drops every node and link with `w < gamma_sig`. A removed interior node
/// whose flanking links carry the same label is bridged by one link;
/// otherwise the chain splits there.
pub fn structural_prune(
    g: &ReducedStructure,
    gamma_sig: f64,
) -> Result<PruneOutcome, ReductionError> {
    check_gamma(gamma_sig)?;
    let mut s = g.clone();
    s.links.retain(|l| !l.stats.below(gamma_sig));
    let mut removed_nodes = 0;
    while let Some(v) = s.nodes.iter().position(|n| n.stats.below(gamma_sig)) {
        let a = s.links.iter().position(|l| l.to == v);
        let b = s.links.iter().position(|l| l.from == v);
        if let (Some(a), Some(b)) = (a, b) {
            if s.links[a].label == s.links[b].label {
                let stats = s.links[a].stats.min_with(&s.links[b].stats);
                s.links[a].to = s.links[b].to;
                s.links[a].stats = stats;
                s.links.remove(b);
            }
        }
        s.remove_node(v);
        removed_nodes += 1;
    }
    let emptied = !g.nodes.is_empty() && s.nodes.is_empty();
    Ok(PruneOutcome {
        removed_links: g.links.len() - s.links.len(),
        removed_nodes,
        emptied,
        structure: s,
    })
}

fn attach_stats(r: &mut ReducedStructure, stats: Option<&[SignificanceStats]>) {
    let Some(stats) = stats else { return };
    for n in &mut r.nodes {
        n.stats = stats[n.source_index];
    }
    for k in 0..r.links.len() {
        let (a, b) = (r.links[k].from, r.links[k].to);
        r.links[k].stats = r.nodes[a].stats.min_with(&r.nodes[b].stats);
    }
}

fn mean_link_w(r: &ReducedStructure) -> f64 {
    if r.links.is_empty() {
        return 0.0;
    }
    r.links.iter().map(|l| l.stats.w_f64()).sum::<f64>() / r.links.len() as f64
}

/// Parameter whose reduced chain has the highest mean link weight; the first
/// name wins ties.
pub fn principal_parameter(
    s: &OrderedStructure,
    cfg: &ReductionConfig,
    stats: Option<&[SignificanceStats]>,
) -> Result<String, ReductionError> {
    let mut best: Option<(String, f64)> = None;
    for name in s.parameter_names() {
        let mut r = sp_reduce(s, name, cfg.segmentation_for(name), cfg.zero_tol)?;
        attach_stats(&mut r, stats);
        let m = mean_link_w(&r);
        if best.as_ref().is_none_or(|(_, b)| m > *b) {
            best = Some((name.to_string(), m));
        }
    }
    best.map(|(n, _)| n)
        .ok_or_else(|| ReductionError::MissingParameter(String::new()))
}

/// Demotes ratio parameters to interval, compresses the chosen parameter's
/// runs, then prunes by significance. Fails with an invariant error if the
/// ledger energy rose, or did not fall although the structure was compressed,
/// demoted or stripped of parameters.
///
/// `stats` holds one entry per input element; `None` means every element has
/// `w = 1`. Node stats come from their source element, link stats are the
/// weaker of the two endpoints.
pub fn composite_reduce(
    s: &OrderedStructure,
    cfg: &ReductionConfig,
    stats: Option<&[SignificanceStats]>,
) -> Result<ReducedStructure, ReductionError> {
    check_gamma(cfg.gamma_sig)?;
    if let Some(st) = stats {
        if st.len() != s.len() {
            return Err(ReductionError::StatsLength {
                expected: s.len(),
                got: st.len(),
            });
        }
    }
    let demoted = demote_ratio(s);
    let parameter = match &cfg.parameter {
        Some(p) => p.clone(),
        None => principal_parameter(&demoted, cfg, stats)?,
    };
    let mut reduced = sp_reduce(
        &demoted,
        &parameter,
        cfg.segmentation_for(&parameter),
        cfg.zero_tol,
    )?;
    attach_stats(&mut reduced, stats);
    let out = structural_prune(&reduced, cfg.gamma_sig)?.structure;

    let before = structure_energy(s, &cfg.scale_table).total;
    let after = structure_energy(&out, &cfg.scale_table).total;
    if after > before {
        return Err(ReductionError::EnergyIncreased { before, after });
    }
    let source_scale = s.scale_of(&parameter).expect("parameter reduced above");
    let compressed = out.node_count() < s.len()
        || s.parameter_names().len() > 1
        || out
            .nodes
            .iter()
            .any(|n| n.scale.is_weaker_than(source_scale));
    if compressed && after >= before {
        return Err(ReductionError::NoStrictDecrease(after));
    }
    Ok(out)
}

fn check_exponent(gamma_exp: f64) -> Result<(), ReductionError> {
    if gamma_exp.is_finite() && gamma_exp > 0.0 {
        Ok(())
    } else {
        Err(ReductionError::BadExponent(gamma_exp))
    }
}

/// `S(w) = k_B ln Ω₀ + k_B γ ln w`.
pub fn entropy_of_w_raw(
    w: f64,
    gamma_exp: f64,
    omega0: u64,
    consts: &PhysicalConstants,
) -> Result<f64, ReductionError> {
    check_exponent(gamma_exp)?;
    if w.is_nan() || w <= 0.0 {
        return Err(ReductionError::ZeroWeight);
    }
    let s0 = boltzmann_entropy(omega0, *consts)?;
    Ok(s0 + consts.k_b * gamma_exp * w.ln())
}

pub fn entropy_of_w(
    stats: &SignificanceStats,
    omega0: u64,
    consts: &PhysicalConstants,
) -> Result<f64, ReductionError> {
    entropy_of_w_raw(stats.w_f64(), stats.gamma_exp, omega0, consts)
}

/// `E(w) = e0 − T S(w)`.
pub fn energy_vs_w_raw(
    w: f64,
    gamma_exp: f64,
    e0: f64,
    temperature: f64,
    omega0: u64,
    consts: &PhysicalConstants,
) -> Result<f64, ReductionError> {
    if temperature.is_nan() || temperature < 0.0 {
        return Err(EntropyError::NegativeTemperature(temperature).into());
    }
    Ok(e0 - temperature * entropy_of_w_raw(w, gamma_exp, omega0, consts)?)
}

pub fn energy_vs_w(
    stats: &SignificanceStats,
    e0: f64,
    temperature: f64,
    omega0: u64,
    consts: &PhysicalConstants,
) -> Result<f64, ReductionError> {
    energy_vs_w_raw(
        stats.w_f64(),
        stats.gamma_exp,
        e0,
        temperature,
        omega0,
        consts,
    )
}

/// `dE/dw = −k_B T γ / w`.
pub fn energy_vs_w_slope(
    w: f64,
    gamma_exp: f64,
    temperature: f64,
    consts: &PhysicalConstants,
) -> f64 {
    -consts.k_b * temperature * gamma_exp / w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{
        sp_reduce, structure_energy, ReducedLink, ReducedNode, RelationLabel, Scale, ScaleTable,
        Segmentation, Sign, StructElement,
    };
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn st(n: u64, t: u64) -> SignificanceStats {
        structural_weight(n, t).unwrap()
    }

    fn chain(values: &[f64]) -> OrderedStructure {
        OrderedStructure::from_values("u", values, Scale::Ratio).unwrap()
    }

    fn label(sign: Sign) -> RelationLabel {
        RelationLabel { sign, segment: 0 }
    }

    /// Chain with the given node weights and link labels, link weights 1.
    fn weighted(node_w: &[(u64, u64)], labels: &[RelationLabel]) -> ReducedStructure {
        ReducedStructure {
            parameter: "u".into(),
            nodes: node_w
                .iter()
                .enumerate()
                .map(|(i, &(n, t))| ReducedNode {
                    source_index: i,
                    value: 0,
                    scale: Scale::Ordinal,
                    stats: st(n, t),
                })
                .collect(),
            links: labels
                .iter()
                .enumerate()
                .map(|(k, &label)| ReducedLink {
                    from: k,
                    to: k + 1,
                    label,
                    scale: Scale::Ordinal,
                    stats: SignificanceStats::certain(),
                })
                .collect(),
        }
    }

    #[test]
    fn weight_examples() {
        assert_eq!(st(8, 10).w(), Ratio::new(4, 5));
        assert_eq!(st(0, 10).w_f64(), 0.0);
        assert_eq!(st(10, 10).w(), Ratio::from_integer(1));
        assert_eq!(structural_weight(1, 0), Err(ReductionError::NoSamples));
        assert!(structural_weight(3, 2).is_err());
    }

    #[test]
    fn prune_examples() {
        let g = weighted(
            &[(1, 1), (1, 1), (1, 1)],
            &[label(Sign::Pos), label(Sign::Neg)],
        );
        let out = structural_prune(&g, 0.5).unwrap();
        assert_eq!(out.structure, g);

        let g = weighted(
            &[(8, 10), (3, 10), (8, 10)],
            &[label(Sign::Pos), label(Sign::Neg)],
        );
        let out = structural_prune(&g, 0.5).unwrap();
        assert_eq!(out.structure.node_count(), 2);
        assert_eq!(out.removed_nodes, 1);
        assert!(out.structure.links.is_empty());
        let t = ScaleTable::default();
        assert!(structure_energy(&out.structure, &t).total < structure_energy(&g, &t).total);

        let g = weighted(
            &[(9, 10), (1, 1), (1, 1)],
            &[label(Sign::Pos), label(Sign::Neg)],
        );
        let out = structural_prune(&g, 1.0).unwrap();
        assert!(out.structure.nodes.iter().all(|n| n.stats.w_f64() == 1.0));
        assert_eq!(out.structure.node_count(), 2);

        let all_low = weighted(&[(1, 10), (1, 10)], &[label(Sign::Pos)]);
        let out = structural_prune(&all_low, 0.5).unwrap();
        assert!(out.emptied && out.structure.is_empty());
        assert!(structural_prune(&g, 0.0).is_err());
    }

    #[test]
    fn prune_bridges_equal_labels() {
        let g = weighted(
            &[(1, 1), (1, 5), (1, 1)],
            &[label(Sign::Pos), label(Sign::Pos)],
        );
        let out = structural_prune(&g, 0.5).unwrap().structure;
        assert_eq!(out.node_count(), 2);
        assert_eq!(out.links.len(), 1);
        assert_eq!((out.links[0].from, out.links[0].to), (0, 1));
    }

    #[test]
    fn composite_examples() {
        let cfg = ReductionConfig::default();
        let t = ScaleTable::default();

        let s = chain(&[1.0, 2.0, 3.0, 2.0, 1.0]);
        let r = composite_reduce(&s, &cfg, None).unwrap();
        assert_eq!(r.node_count(), 3);
        assert!(structure_energy(&r, &t).total < structure_energy(&s, &t).total);

        let ten: Vec<f64> = (0..10).map(f64::from).collect();
        let s = chain(&ten);
        let r = composite_reduce(&s, &cfg, None).unwrap();
        assert_eq!(r.node_count(), 2);
        let (ein, eout) = (structure_energy(&s, &t), structure_energy(&r, &t));
        assert_abs_diff_eq!(r.node_count() as f64 / s.len() as f64, 0.2);
        assert_abs_diff_eq!(eout.unit_energy / ein.unit_energy, 0.1);

        assert_eq!(r.composite_reduce(0.5).unwrap(), r);

        let ord = OrderedStructure::from_values("u", &[0.0, 1.0], Scale::Ordinal).unwrap();
        let r = composite_reduce(&ord, &cfg, None).unwrap();
        assert_eq!(
            structure_energy(&r, &t).total,
            structure_energy(&ord, &t).total
        );
    }

    #[test]
    fn nominal_input_without_compression_keeps_energy() {
        let s = OrderedStructure::from_values("u", &[0.0, 1.0, 0.0, 1.0], Scale::Nominal).unwrap();
        let t = ScaleTable::default();
        let r = composite_reduce(&s, &ReductionConfig::default(), None).unwrap();
        assert_eq!(r.node_count(), 4);
        assert_eq!(
            structure_energy(&r, &t).total,
            structure_energy(&s, &t).total
        );
    }

    #[test]
    fn composite_prunes_weak_elements() {
        let s = chain(&[1.0, 2.0, 3.0, 2.0, 1.0]);
        let mut stats = vec![SignificanceStats::certain(); 5];
        stats[2] = st(1, 10);
        let r = composite_reduce(&s, &ReductionConfig::default(), Some(&stats)).unwrap();
        assert_eq!(r.node_count(), 2);
        assert!(r.links.is_empty());
        assert!(composite_reduce(&s, &ReductionConfig::default(), Some(&stats[..2])).is_err());
    }

    #[test]
    fn principal_parameter_prefers_significant_links() {
        let mk = |a: f64, b: f64| {
            let mut e = StructElement::single("a", a, Scale::Ratio);
            e.params
                .extend(StructElement::single("b", b, Scale::Ratio).params);
            e
        };
        // `a` reduces to one link from element 0 to 3; `b` has a critical
        // point at the weak element 1.
        let s = OrderedStructure::new(vec![mk(0.0, 0.0), mk(1.0, 1.0), mk(2.0, 0.0), mk(3.0, 1.0)])
            .unwrap();
        let mut stats = vec![SignificanceStats::certain(); 4];
        stats[1] = st(6, 10);
        let cfg = ReductionConfig::default();
        assert_eq!(principal_parameter(&s, &cfg, Some(&stats)).unwrap(), "a");
        assert_eq!(principal_parameter(&s, &cfg, None).unwrap(), "a");
        stats[1] = SignificanceStats::certain();
        stats[0] = st(6, 10);
        stats[3] = st(6, 10);
        // Both chains end at the weak endpoints; `b` has an interior link at
        // w = 1, raising its mean.
        assert_eq!(principal_parameter(&s, &cfg, Some(&stats)).unwrap(), "b");
    }

    #[test]
    fn entropy_law_examples() {
        let k = PhysicalConstants::natural();
        assert_abs_diff_eq!(
            entropy_of_w(&st(1, 1), 16, &k).unwrap(),
            16f64.ln(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            entropy_of_w(&st(1, 2), 16, &k).unwrap(),
            2.0794415416798357,
            epsilon = 1e-12
        );
        assert_eq!(
            entropy_of_w(&st(0, 2), 16, &k),
            Err(ReductionError::ZeroWeight)
        );
        assert_abs_diff_eq!(
            energy_vs_w(&st(1, 1), 5.0, 2.0, 16, &k).unwrap(),
            5.0 - 2.0 * 16f64.ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(energy_vs_w_slope(0.5, 1.0, 1.0, &k), -2.0);
    }

    proptest! {
        #[test]
        fn microstate_count_round_trips(w in 0.001f64..1.0, g in 0.1f64..3.0, o in 1u64..1000) {
            let k = PhysicalConstants::natural();
            let s = entropy_of_w_raw(w, g, o, &k).unwrap();
            let back = ((s - (o as f64).ln()) / g).exp();
            prop_assert!((back - w).abs() < 1e-9 * w.max(1e-3));
        }

        #[test]
        fn pruned_output_has_no_weak_components(
            v in proptest::collection::vec(-5i32..6, 2..30),
            ws in proptest::collection::vec(0u64..=10, 30),
            gamma in 0.05f64..1.0,
        ) {
            let values: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
            let s = chain(&values);
            let stats: Vec<SignificanceStats> = (0..s.len()).map(|i| st(ws[i], 10)).collect();
            let cfg = ReductionConfig { gamma_sig: gamma, ..ReductionConfig::default() };
            let r = composite_reduce(&s, &cfg, Some(&stats)).unwrap();
            prop_assert!(r.nodes.iter().all(|n| !n.stats.below(gamma)));
            prop_assert!(r.links.iter().all(|l| !l.stats.below(gamma)));
            prop_assert!(r.check_chain());
        }

        #[test]
        fn no_label_preserving_removal_lowers_energy(
            v in proptest::collection::vec(-30.0f64..400.0, 2..30),
        ) {
            let q = Segmentation::quadrants("u");
            let cfg = ReductionConfig { segmentations: vec![q], ..ReductionConfig::default() };
            let r = composite_reduce(&chain(&v), &cfg, None).unwrap();
            let reference = (r.node_values(), r.link_labels());
            for victim in 0..r.node_count() {
                let mut stats: Vec<_> = r.nodes.iter().map(|n| n.stats).collect();
                stats[victim] = st(0, 1);
                let mut g = r.clone();
                for (n, s) in g.nodes.iter_mut().zip(stats) {
                    n.stats = s;
                }
                let cut = structural_prune(&g, 0.5).unwrap().structure;
                prop_assert_ne!((cut.node_values(), cut.link_labels()), reference.clone());
            }
            let again = sp_reduce(&chain(&v), "u", cfg.segmentations.first(), cfg.zero_tol).unwrap();
            prop_assert_eq!(again.link_labels(), r.link_labels());
        }
    }
}
