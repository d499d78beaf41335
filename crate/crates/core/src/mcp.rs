//! McCulloch-Pitts neuron as a small thermodynamic system.
//!
//! Microstates are the `2^N` binary input vectors under the uniform measure;
//! the two macrostates are the outputs `Y ∈ {0, 1}`. The unit fires iff
//! `V = V⁺ + V⁻ > Q` (strict). Activation probabilities are exact rationals.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::{binary_entropy_bits, landauer_energy, EntropyError, PhysicalConstants};
use crate::ErrorKind;

/// Largest input count the exhaustive census accepts.
pub const MAX_INPUTS: usize = 24;

/// Perceptron learning rate when none is configured.
pub const DEFAULT_LEARNING_RATE: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McpError {
    #[error("a neuron needs at least one input")]
    NoInputs,
    #[error("{n} inputs exceed the enumeration bound of {MAX_INPUTS}")]
    TooManyInputs { n: usize },
    #[error("weight {value} at index {index} is outside [-1, 1]")]
    WeightOutOfRange { index: usize, value: f64 },
    #[error("threshold {0} is not finite")]
    InvalidThreshold(f64),
    #[error("input has length {got}, neuron has {expected} inputs")]
    LengthMismatch { expected: usize, got: usize },
    #[error("input entry {value} at index {index} is not binary")]
    NonBinaryInput { index: usize, value: u8 },
    #[error("label {0} is not binary")]
    NonBinaryLabel(u8),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

impl McpError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            McpError::TooManyInputs { .. } => ErrorKind::Capacity,
            McpError::Entropy(e) => e.kind(),
            _ => ErrorKind::Validation,
        }
    }
}

/// Threshold unit with weights in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McpNeuron {
    weights: Vec<f64>,
    threshold: f64,
}

/// `V⁺`, `V⁻` and their sum for one input vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSplit {
    pub v_plus: f64,
    pub v_minus: f64,
    pub v_total: f64,
}

/// Exhaustive count of activating input vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicrostateCensus {
    pub n: usize,
    pub omega_act: u64,
    pub omega_nonact: u64,
    pub p_act: Ratio<u64>,
}

/// One inhibitory-sum group of the conditional decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct InhibitoryGroup {
    pub v_minus: f64,
    /// `P(V⁻ = v_minus)`.
    pub p_group: Ratio<u64>,
    /// `P(V⁺ + V⁻ > Q | V⁻ = v_minus)`.
    pub p_fire_given_group: Ratio<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalActivation {
    pub p_act: Ratio<u64>,
    /// Sorted by descending `v_minus` (the no-inhibition group first).
    pub groups: Vec<InhibitoryGroup>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    /// Binary Shannon entropy of `P_act`, in bits.
    pub h_bits: f64,
    /// `k_B (N ln 2 + ln P_act)`; `None` when `P_act = 0`.
    pub s_act: Option<f64>,
    /// Same for the non-activating macrostate; `None` when `P_act = 1`.
    pub s_nonact: Option<f64>,
}

/// Split of the output energy into structured and dissipated parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsReport {
    pub e_total: f64,
    pub e_str: f64,
    pub e_unstr: f64,
    pub s_total: f64,
}

impl McpNeuron {
    pub fn new(weights: Vec<f64>, threshold: f64) -> Result<Self, McpError> {
        if weights.is_empty() {
            return Err(McpError::NoInputs);
        }
        if weights.len() > MAX_INPUTS {
            return Err(McpError::TooManyInputs { n: weights.len() });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value.abs() <= 1.0) {
                return Err(McpError::WeightOutOfRange { index, value });
            }
        }
        if !threshold.is_finite() {
            return Err(McpError::InvalidThreshold(threshold));
        }
        Ok(Self { weights, threshold })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn input_count(&self) -> usize {
        self.weights.len()
    }

    fn check_input(&self, x: &[u8]) -> Result<(), McpError> {
        if x.len() != self.weights.len() {
            return Err(McpError::LengthMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        match x.iter().position(|&v| v > 1) {
            Some(index) => Err(McpError::NonBinaryInput {
                index,
                value: x[index],
            }),
            None => Ok(()),
        }
    }

    // Both the census and the grouped decomposition sum in index order, so
    // they see bit-identical potentials.
    fn split_bits(&self, bits: u32) -> PotentialSplit {
        let mut v_plus = 0.0;
        let mut v_minus = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            if bits >> i & 1 == 1 {
                if w > 0.0 {
                    v_plus += w;
                } else if w < 0.0 {
                    v_minus += w;
                }
            }
        }
        PotentialSplit {
            v_plus,
            v_minus,
            v_total: v_plus + v_minus,
        }
    }

    fn bits_of(x: &[u8]) -> u32 {
        x.iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u32::from(b) << i))
    }

    pub fn activation_potential(&self, x: &[u8]) -> Result<PotentialSplit, McpError> {
        self.check_input(x)?;
        Ok(self.split_bits(Self::bits_of(x)))
    }

    /// Depth of the resting well: the sum of the negative weights.
    pub fn resting_potential(&self) -> f64 {
        self.weights.iter().filter(|&&w| w < 0.0).sum()
    }

    pub fn fire(&self, x: &[u8]) -> Result<u8, McpError> {
        let v = self.activation_potential(x)?;
        Ok(u8::from(v.v_total > self.threshold))
    }

    pub fn microstate_census(&self) -> Result<MicrostateCensus, McpError> {
        let n = self.input_count();
        if n > MAX_INPUTS {
            return Err(McpError::TooManyInputs { n });
        }
        let total = 1u64 << n;
        let omega_act = (0..total as u32)
            .filter(|&bits| self.split_bits(bits).v_total > self.threshold)
            .count() as u64;
        Ok(MicrostateCensus {
            n,
            omega_act,
            omega_nonact: total - omega_act,
            p_act: Ratio::new(omega_act, total),
        })
    }

    /// `P_act = Σ_{V⁻} P(V⁻) · P(V⁺ + V⁻ > Q | V⁻)`.
    ///
    /// Excitatory and inhibitory inputs are independent under the uniform
    /// measure, so each factor is counted over its own input subset; inputs
    /// with zero weight drop out.
    pub fn conditional_activation(&self) -> Result<ConditionalActivation, McpError> {
        let n = self.input_count();
        if n > MAX_INPUTS {
            return Err(McpError::TooManyInputs { n });
        }
        let subset_sums = |pick: &dyn Fn(f64) -> bool| -> Vec<f64> {
            let idx: Vec<usize> = (0..n).filter(|&i| pick(self.weights[i])).collect();
            (0..1u32 << idx.len())
                .map(|sub| {
                    idx.iter()
                        .enumerate()
                        .filter(|(k, _)| sub >> k & 1 == 1)
                        .map(|(_, &i)| self.weights[i])
                        .sum()
                })
                .collect()
        };
        let excitatory = subset_sums(&|w| w > 0.0);
        let inhibitory = subset_sums(&|w| w < 0.0);

        let mut counts: BTreeMap<u64, (f64, u64)> = BTreeMap::new();
        for v in inhibitory.iter().copied() {
            // order by descending value using the bit pattern of -v
            let key = OrderedBits::key(-v);
            counts.entry(key).or_insert((v, 0)).1 += 1;
        }
        let n_inh = inhibitory.len() as u64;
        let n_exc = excitatory.len() as u64;
        let mut p_act = Ratio::new(0u64, 1);
        let mut groups = Vec::with_capacity(counts.len());
        for (_, (v_minus, c)) in counts {
            let fired = excitatory
                .iter()
                .filter(|&&vp| vp + v_minus > self.threshold)
                .count() as u64;
            let p_group = Ratio::new(c, n_inh);
            let p_fire_given_group = Ratio::new(fired, n_exc);
            p_act += p_group * p_fire_given_group;
            groups.push(InhibitoryGroup {
                v_minus,
                p_group,
                p_fire_given_group,
            });
        }
        Ok(ConditionalActivation { p_act, groups })
    }

    pub fn entropy_report(&self, consts: PhysicalConstants) -> Result<EntropyReport, McpError> {
        let census = self.microstate_census()?;
        let p = ratio_to_f64(census.p_act);
        let n_ln2 = census.n as f64 * std::f64::consts::LN_2;
        let s = |q: f64| (q > 0.0).then(|| consts.k_b * (n_ln2 + q.ln()));
        Ok(EntropyReport {
            h_bits: binary_entropy_bits(p),
            s_act: s(p),
            s_nonact: s(ratio_to_f64(Ratio::from_integer(1) - census.p_act)),
        })
    }

    /// Structured output is one normalized energy unit per activating
    /// microstate; the dissipated part is `2^N · |V⁻_rest|` Landauer erasures.
    pub fn gibbs_decomposition(
        &self,
        temperature: f64,
        consts: PhysicalConstants,
    ) -> Result<GibbsReport, McpError> {
        let census = self.microstate_census()?;
        let omega = (1u64 << census.n) as f64;
        let depth = self.resting_potential().abs();
        let e_unstr = omega * depth * landauer_energy(temperature, consts)?;
        let e_str = census.omega_act as f64;
        Ok(GibbsReport {
            e_total: e_str + e_unstr,
            e_str,
            e_unstr,
            s_total: omega * depth * consts.k_b * std::f64::consts::LN_2,
        })
    }
}

/// Total order key for finite floats.
struct OrderedBits;

impl OrderedBits {
    fn key(v: f64) -> u64 {
        let v = if v == 0.0 { 0.0 } else { v };
        let b = v.to_bits();
        if b >> 63 == 1 {
            !b
        } else {
            b | 1 << 63
        }
    }
}

pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// One labelled binary example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub input: Vec<u8>,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    pub epochs: usize,
    /// Online misclassifications per epoch.
    pub error_history: Vec<usize>,
    /// Distinct input vectors in the dataset, `|T|`.
    pub effective_set_size: usize,
    pub census_history: Vec<MicrostateCensus>,
    pub entropy_history: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingOutcome {
    pub neuron: McpNeuron,
    pub trace: TrainingTrace,
}

/// Rosenblatt updates on weights and threshold; weights are clamped to
/// `[-1, 1]`. Stops after the first epoch without a misclassification.
pub fn train_perceptron(
    neuron: &McpNeuron,
    dataset: &[Example],
    max_epochs: usize,
    learning_rate: f64,
) -> Result<TrainingOutcome, McpError> {
    for ex in dataset {
        neuron.check_input(&ex.input)?;
        if ex.label > 1 {
            return Err(McpError::NonBinaryLabel(ex.label));
        }
    }
    let distinct: BTreeSet<&[u8]> = dataset.iter().map(|e| e.input.as_slice()).collect();
    let mut trace = TrainingTrace {
        epochs: 0,
        error_history: Vec::new(),
        effective_set_size: distinct.len(),
        census_history: Vec::new(),
        entropy_history: Vec::new(),
        converged: false,
    };
    let mut current = neuron.clone();
    if dataset.is_empty() {
        return Ok(TrainingOutcome {
            neuron: current,
            trace,
        });
    }
    for _ in 0..max_epochs {
        let mut errors = 0;
        for ex in dataset {
            let y = current.fire(&ex.input)?;
            if y != ex.label {
                errors += 1;
                let delta = learning_rate * (f64::from(ex.label) - f64::from(y));
                for (w, &xi) in current.weights.iter_mut().zip(&ex.input) {
                    *w = (*w + delta * f64::from(xi)).clamp(-1.0, 1.0);
                }
                current.threshold -= delta;
            }
        }
        trace.epochs += 1;
        trace.error_history.push(errors);
        let census = current.microstate_census()?;
        trace
            .entropy_history
            .push(binary_entropy_bits(ratio_to_f64(census.p_act)));
        trace.census_history.push(census);
        if errors == 0 {
            trace.converged = true;
            break;
        }
    }
    Ok(TrainingOutcome {
        neuron: current,
        trace,
    })
}
