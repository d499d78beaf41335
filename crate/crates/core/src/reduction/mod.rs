//! Reduction of ordered structures into qualitative chains.
//!
//! An [`OrderedStructure`] is a sequence of elements that all carry the same
//! named numeric parameters, each on a measurement [`Scale`]. Consecutive
//! elements are implicitly linked once per parameter. Three operators lower
//! the structure's ledger energy:
//!
//! - parametric reduction demotes parameter scales ([`param_reduce`]);
//! - structural-parametric reduction compresses each run of equal gradient
//!   sign and segment into its two endpoints ([`sp_reduce`]);
//! - structural reduction drops components whose significance weight falls
//!   below a threshold ([`structural_prune`]).
//!
//! [`composite_reduce`] chains all three and checks that the energy did not
//! rise.

mod prune;
mod sp;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::EntropyError;
use crate::ErrorKind;

pub use prune::{
    composite_reduce, energy_vs_w, energy_vs_w_raw, energy_vs_w_slope, entropy_of_w,
    entropy_of_w_raw, principal_parameter, structural_prune, structural_weight, PruneOutcome,
    SignificanceStats, DEFAULT_GAMMA_EXP, DEFAULT_GAMMA_SIG,
};
pub use sp::{
    compare, gradient_sign, param_reduce, relation_vector, segment_index, sp_reduce,
    DEFAULT_ZERO_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("structure needs at least {needed} elements, has {got}")]
    TooShort { needed: usize, got: usize },
    #[error("parameter `{0}` is not present")]
    MissingParameter(String),
    #[error("element {index} has a different parameter set than element 0")]
    Heterogeneous { index: usize },
    #[error("non-finite value for parameter `{param}` at element {index}")]
    NonFinite { param: String, index: usize },
    #[error("non-finite value {0} in comparison")]
    NotFinite(f64),
    #[error("segmentation thresholds must be finite and strictly increasing")]
    BadThresholds,
    #[error("cyclic segmentation needs a period larger than the threshold span")]
    BadPeriod,
    #[error("value {0} lies below the lowest segment threshold")]
    BelowSegments(f64),
    #[error("target scale {target} is not weaker than the {current} scale of `{param}`")]
    NotWeaker {
        param: String,
        current: Scale,
        target: Scale,
    },
    #[error("scale energies must be positive and strictly decreasing from ratio to nominal")]
    BadScaleTable,
    #[error("significance threshold {0} outside (0, 1]")]
    BadGamma(f64),
    #[error("microstate exponent {0} must be positive")]
    BadExponent(f64),
    #[error("{observed} observations exceed {total} samples")]
    ObservedExceedsTotal { observed: u64, total: u64 },
    #[error("significance needs at least one sample")]
    NoSamples,
    #[error("weight w = 0 has no finite entropy")]
    ZeroWeight,
    #[error("expected {expected} significance entries, got {got}")]
    StatsLength { expected: usize, got: usize },
    #[error("reduction raised ledger energy from {before} to {after}")]
    EnergyIncreased { before: f64, after: f64 },
    #[error("reduction compressed the structure but energy stayed at {0}")]
    NoStrictDecrease(f64),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

impl ReductionError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            ReductionError::BelowSegments(_)
            | ReductionError::NoSamples
            | ReductionError::ZeroWeight => ErrorKind::Domain,
            ReductionError::EnergyIncreased { .. } | ReductionError::NoStrictDecrease(_) => {
                ErrorKind::Invariant
            }
            ReductionError::NotFinite(_) => ErrorKind::Numeric,
            ReductionError::Entropy(e) => e.kind(),
            _ => ErrorKind::Validation,
        }
    }
}

/// Measurement scale, strongest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Ratio,
    Interval,
    Ordinal,
    Nominal,
}

impl Scale {
    pub const ALL: [Scale; 4] = [
        Scale::Ratio,
        Scale::Interval,
        Scale::Ordinal,
        Scale::Nominal,
    ];

    /// 3 for ratio down to 0 for nominal.
    pub fn strength(self) -> u8 {
        match self {
            Scale::Ratio => 3,
            Scale::Interval => 2,
            Scale::Ordinal => 1,
            Scale::Nominal => 0,
        }
    }

    /// The next weaker scale, `None` for nominal.
    pub fn demoted(self) -> Option<Scale> {
        match self {
            Scale::Ratio => Some(Scale::Interval),
            Scale::Interval => Some(Scale::Ordinal),
            Scale::Ordinal => Some(Scale::Nominal),
            Scale::Nominal => None,
        }
    }

    pub fn is_weaker_than(self, other: Scale) -> bool {
        self.strength() < other.strength()
    }

    pub fn weakest(self, other: Scale) -> Scale {
        if self.strength() <= other.strength() {
            self
        } else {
            other
        }
    }

    /// Scale of the comparison between two consecutive values: differences of
    /// ratio or interval values live on an interval scale; weaker scales
    /// compare on their own scale.
    pub fn link_scale(self) -> Scale {
        self.weakest(Scale::Interval)
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Ratio => "ratio",
            Scale::Interval => "interval",
            Scale::Ordinal => "ordinal",
            Scale::Nominal => "nominal",
        })
    }
}

impl std::str::FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ratio" => Ok(Scale::Ratio),
            "interval" => Ok(Scale::Interval),
            "ordinal" => Ok(Scale::Ordinal),
            "nominal" => Ok(Scale::Nominal),
            other => Err(format!("unknown scale `{other}`")),
        }
    }
}

/// Energy carried by one parameter or link on each scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleTable {
    pub ratio: f64,
    pub interval: f64,
    pub ordinal: f64,
    pub nominal: f64,
}

impl Default for ScaleTable {
    fn default() -> Self {
        Self {
            ratio: 4.0,
            interval: 3.0,
            ordinal: 2.0,
            nominal: 1.0,
        }
    }
}

impl ScaleTable {
    pub fn new(
        ratio: f64,
        interval: f64,
        ordinal: f64,
        nominal: f64,
    ) -> Result<Self, ReductionError> {
        let t = Self {
            ratio,
            interval,
            ordinal,
            nominal,
        };
        let ok = [ratio, interval, ordinal, nominal]
            .iter()
            .all(|x| x.is_finite())
            && ratio > interval
            && interval > ordinal
            && ordinal > nominal
            && nominal > 0.0;
        if ok {
            Ok(t)
        } else {
            Err(ReductionError::BadScaleTable)
        }
    }

    pub fn energy(&self, s: Scale) -> f64 {
        match s {
            Scale::Ratio => self.ratio,
            Scale::Interval => self.interval,
            Scale::Ordinal => self.ordinal,
            Scale::Nominal => self.nominal,
        }
    }
}

/// Ordinal gradient label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            -1 => Ok(Sign::Neg),
            0 => Ok(Sign::Zero),
            1 => Ok(Sign::Pos),
            other => Err(format!("sign must be -1, 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Neg => "-",
            Sign::Zero => "0",
            Sign::Pos => "+",
        })
    }
}

/// Label of a reduced link: gradient sign of the run and segment index of
/// the run's members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationLabel {
    pub sign: Sign,
    pub segment: usize,
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sign, self.segment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamValue {
    pub value: f64,
    pub scale: Scale,
    /// Original reading, kept unchanged through demotions; segments are
    /// looked up on it.
    pub measured: f64,
}

impl ParamValue {
    pub fn new(value: f64, scale: Scale) -> Self {
        Self {
            value,
            scale,
            measured: value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StructElement {
    pub params: BTreeMap<String, ParamValue>,
}

impl StructElement {
    pub fn single(name: &str, value: f64, scale: Scale) -> Self {
        let mut params = BTreeMap::new();
        params.insert(name.to_string(), ParamValue::new(value, scale));
        Self { params }
    }
}

/// Homogeneous sequence of elements.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OrderedStructure {
    elements: Vec<StructElement>,
}

impl OrderedStructure {
    pub fn new(elements: Vec<StructElement>) -> Result<Self, ReductionError> {
        if let Some(first) = elements.first() {
            for (index, e) in elements.iter().enumerate() {
                if !e.params.keys().eq(first.params.keys()) {
                    return Err(ReductionError::Heterogeneous { index });
                }
                for (param, p) in &e.params {
                    if !(p.value.is_finite() && p.measured.is_finite()) {
                        return Err(ReductionError::NonFinite {
                            param: param.clone(),
                            index,
                        });
                    }
                }
            }
        }
        Ok(Self { elements })
    }

    /// Single-parameter structure.
    pub fn from_values(name: &str, values: &[f64], scale: Scale) -> Result<Self, ReductionError> {
        Self::new(
            values
                .iter()
                .map(|&v| StructElement::single(name, v, scale))
                .collect(),
        )
    }

    pub fn elements(&self) -> &[StructElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn parameter_names(&self) -> Vec<&str> {
        self.elements
            .first()
            .map(|e| e.params.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn has_parameter(&self, name: &str) -> bool {
        self.elements
            .first()
            .is_some_and(|e| e.params.contains_key(name))
    }

    pub fn scale_of(&self, name: &str) -> Option<Scale> {
        self.elements.first()?.params.get(name).map(|p| p.scale)
    }

    pub fn values(&self, name: &str) -> Result<Vec<f64>, ReductionError> {
        self.column(name, |p| p.value)
    }

    pub fn measured_values(&self, name: &str) -> Result<Vec<f64>, ReductionError> {
        self.column(name, |p| p.measured)
    }

    fn column(
        &self,
        name: &str,
        f: impl Fn(&ParamValue) -> f64,
    ) -> Result<Vec<f64>, ReductionError> {
        if !self.has_parameter(name) {
            return Err(ReductionError::MissingParameter(name.to_string()));
        }
        Ok(self.elements.iter().map(|e| f(&e.params[name])).collect())
    }

    pub(crate) fn elements_mut(&mut self) -> &mut [StructElement] {
        &mut self.elements
    }
}

/// Half-open threshold partition of one parameter's axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub parameter: String,
    pub thresholds: Vec<f64>,
    #[serde(default)]
    pub cyclic: bool,
    /// Wrap period for cyclic segmentations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

impl Segmentation {
    pub fn new(
        parameter: &str,
        thresholds: Vec<f64>,
        cyclic: bool,
        period: Option<f64>,
    ) -> Result<Self, ReductionError> {
        let s = Self {
            parameter: parameter.to_string(),
            thresholds,
            cyclic,
            period,
        };
        s.validate()?;
        Ok(s)
    }

    /// Cyclic quadrants `0/90/180/270` of a 360-unit circle.
    pub fn quadrants(parameter: &str) -> Self {
        Self {
            parameter: parameter.to_string(),
            thresholds: vec![0.0, 90.0, 180.0, 270.0],
            cyclic: true,
            period: Some(360.0),
        }
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        let t = &self.thresholds;
        if t.is_empty() || t.iter().any(|x| !x.is_finite()) || t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ReductionError::BadThresholds);
        }
        if self.cyclic {
            match self.period {
                Some(p) if p.is_finite() && p > t[t.len() - 1] - t[0] => {}
                _ => return Err(ReductionError::BadPeriod),
            }
        }
        Ok(())
    }

    pub fn segment_count(&self) -> usize {
        self.thresholds.len()
    }

    /// Distance from `value` to the nearest threshold, wrapping for cyclic
    /// segmentations.
    pub fn distance_to_threshold(&self, value: f64) -> f64 {
        self.thresholds
            .iter()
            .map(|&t| {
                let d = (value - t).abs();
                match (self.cyclic, self.period) {
                    (true, Some(p)) => {
                        let r = d.rem_euclid(p);
                        r.min(p - r)
                    }
                    _ => d,
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Significance-weighted node of a reduced chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedNode {
    /// Index of the originating element in the input structure.
    pub source_index: usize,
    /// Qualitative value: the segment index of the element.
    pub value: i64,
    pub scale: Scale,
    pub stats: SignificanceStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedLink {
    pub from: usize,
    pub to: usize,
    pub label: RelationLabel,
    pub scale: Scale,
    pub stats: SignificanceStats,
}

/// Qualitative chain (or, after pruning splits it, disjoint chains) over one
/// parameter. Links point from a node to a later node; every node has at
/// most one incoming and one outgoing link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedStructure {
    pub parameter: String,
    pub nodes: Vec<ReducedNode>,
    pub links: Vec<ReducedLink>,
}

impl ReducedStructure {
    pub fn empty(parameter: &str) -> Self {
        Self {
            parameter: parameter.to_string(),
            nodes: Vec::new(),
            links: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Link labels along the chain, in link order.
    pub fn link_labels(&self) -> Vec<RelationLabel> {
        self.links.iter().map(|l| l.label).collect()
    }

    /// Node values along the chain, in node order.
    pub fn node_values(&self) -> Vec<i64> {
        self.nodes.iter().map(|n| n.value).collect()
    }

    pub fn is_single_chain(&self) -> bool {
        !self.nodes.is_empty()
            && self.links.len() + 1 == self.nodes.len()
            && self
                .links
                .iter()
                .enumerate()
                .all(|(k, l)| l.from == k && l.to == k + 1)
    }

    /// Checks the chain invariants: links reference nodes and point forward,
    /// no node has two incoming or two outgoing links, adjacent links carry
    /// different labels.
    pub fn check_chain(&self) -> bool {
        let n = self.nodes.len();
        let mut inc = vec![None; n];
        let mut out = vec![None; n];
        for (k, l) in self.links.iter().enumerate() {
            if l.from >= n || l.to >= n || l.from >= l.to {
                return false;
            }
            if out[l.from].replace(k).is_some() || inc[l.to].replace(k).is_some() {
                return false;
            }
        }
        (0..n).all(|v| match (inc[v], out[v]) {
            (Some(a), Some(b)) => self.links[a].label != self.links[b].label,
            _ => true,
        })
    }

    /// Merges every interior node whose incoming and outgoing links carry the
    /// same label. A structure produced by [`sp_reduce`] is a fixed point.
    pub fn merge_runs(&self) -> Self {
        let mut s = self.clone();
        loop {
            let mut merged = false;
            for v in 0..s.nodes.len() {
                let a = s.links.iter().position(|l| l.to == v);
                let b = s.links.iter().position(|l| l.from == v);
                if let (Some(a), Some(b)) = (a, b) {
                    if s.links[a].label == s.links[b].label {
                        let stats = s.links[a].stats.min_with(&s.links[b].stats);
                        s.links[a].to = s.links[b].to;
                        s.links[a].stats = stats;
                        s.links.remove(b);
                        s.remove_node(v);
                        merged = true;
                        break;
                    }
                }
            }
            if !merged {
                return s;
            }
        }
    }

    /// Removes node `v`, dropping links incident to it.
    pub(crate) fn remove_node(&mut self, v: usize) {
        self.nodes.remove(v);
        self.links.retain(|l| l.from != v && l.to != v);
        for l in &mut self.links {
            if l.from > v {
                l.from -= 1;
            }
            if l.to > v {
                l.to -= 1;
            }
        }
    }

    /// Demotes node scales to `target`; ordinal node values become presence
    /// labels (1 if nonzero) on the nominal scale.
    pub fn param_reduce(&self, target: Scale) -> Result<Self, ReductionError> {
        let mut s = self.clone();
        for n in &mut s.nodes {
            if !target.is_weaker_than(n.scale) {
                return Err(ReductionError::NotWeaker {
                    param: self.parameter.clone(),
                    current: n.scale,
                    target,
                });
            }
            if target == Scale::Nominal {
                n.value = i64::from(n.value != 0);
            }
            n.scale = target;
        }
        Ok(s)
    }

    /// Composite reduction of an already reduced structure: merge equal runs,
    /// then prune. With all weights at or above `gamma_sig` this is identity.
    pub fn composite_reduce(&self, gamma_sig: f64) -> Result<Self, ReductionError> {
        Ok(structural_prune(&self.merge_runs(), gamma_sig)?.structure)
    }
}

/// A structure whose ledger energy can be tallied.
pub trait LedgerSource {
    /// Scale of every unit-level term.
    fn unit_scales(&self) -> Vec<Scale>;
    /// Scale of every connection term.
    fn link_scales(&self) -> Vec<Scale>;
}

impl LedgerSource for OrderedStructure {
    fn unit_scales(&self) -> Vec<Scale> {
        self.elements
            .iter()
            .flat_map(|e| e.params.values().map(|p| p.scale))
            .collect()
    }

    fn link_scales(&self) -> Vec<Scale> {
        let per_pair: Vec<Scale> = self
            .elements
            .first()
            .map(|e| e.params.values().map(|p| p.scale.link_scale()).collect())
            .unwrap_or_default();
        let pairs = self.elements.len().saturating_sub(1);
        (0..pairs).flat_map(|_| per_pair.iter().copied()).collect()
    }
}

impl LedgerSource for ReducedStructure {
    fn unit_scales(&self) -> Vec<Scale> {
        self.nodes.iter().map(|n| n.scale).collect()
    }
    fn link_scales(&self) -> Vec<Scale> {
        self.links.iter().map(|l| l.scale).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LevelCount {
    pub units: usize,
    pub links: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub unit_energy: f64,
    pub connection_energy: f64,
    pub total: f64,
    pub by_scale: BTreeMap<Scale, LevelCount>,
}

pub fn structure_energy<S: LedgerSource + ?Sized>(s: &S, table: &ScaleTable) -> EnergyLedger {
    let mut by_scale: BTreeMap<Scale, LevelCount> = BTreeMap::new();
    let mut unit_energy = 0.0;
    for sc in s.unit_scales() {
        unit_energy += table.energy(sc);
        by_scale.entry(sc).or_default().units += 1;
    }
    let mut connection_energy = 0.0;
    for sc in s.link_scales() {
        connection_energy += table.energy(sc);
        by_scale.entry(sc).or_default().links += 1;
    }
    EnergyLedger {
        unit_energy,
        connection_energy,
        total: unit_energy + connection_energy,
        by_scale,
    }
}

/// Settings for [`composite_reduce`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionConfig {
    /// Reduction parameter; `None` selects the principal parameter.
    #[serde(default)]
    pub parameter: Option<String>,
    /// Segmentations by parameter; the one matching the reduction parameter
    /// applies.
    #[serde(default)]
    pub segmentations: Vec<Segmentation>,
    pub zero_tol: f64,
    pub gamma_sig: f64,
    pub scale_table: ScaleTable,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            parameter: None,
            segmentations: Vec::new(),
            zero_tol: DEFAULT_ZERO_TOL,
            gamma_sig: DEFAULT_GAMMA_SIG,
            scale_table: ScaleTable::default(),
        }
    }
}

impl ReductionConfig {
    pub fn segmentation_for(&self, parameter: &str) -> Option<&Segmentation> {
        self.segmentations.iter().find(|s| s.parameter == parameter)
    }
}
