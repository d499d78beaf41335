//! Hopfield associative memory and the Ising model.
//!
//! Both share the quadratic energy `−½ Σ_{i≠j} w_ij s_i s_j − Σ_i b_i s_i`.
//! Hopfield recall is deterministic and asynchronous: each flip aligns a spin
//! with its local field `Σ_j w_ij s_j + θ_i`, which is the field that makes
//! every flip lower the energy by exactly `2 |field|`. Recall stops after a
//! full sweep without flips (the classical model has no halting rule; this
//! one is added). The Ising model evolves by single-spin Metropolis moves.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::PhysicalConstants;
use crate::rng::substream;
use crate::ErrorKind;

/// Local fields with magnitude at or below this are treated as zero, so
/// rounding noise in Hebbian sums never triggers a flip.
pub const FIELD_TOL: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HopfieldError {
    #[error("spin value {value} at index {index} is not ±1")]
    InvalidSpin { index: usize, value: i8 },
    #[error("spin character `{value}` at index {index} is not `+` or `-`")]
    InvalidSpinChar { index: usize, value: char },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("diagonal entry {i} is nonzero")]
    NonZeroDiagonal { i: usize },
    #[error("non-finite matrix or vector entry")]
    NonFinite,
    #[error("temperature {0} must be positive")]
    NonPositiveTemperature(f64),
}

impl HopfieldError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            HopfieldError::NonPositiveTemperature(_) => ErrorKind::Domain,
            _ => ErrorKind::Validation,
        }
    }
}

/// A configuration of ±1 spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinState(Vec<i8>);

impl SpinState {
    pub fn new(spins: Vec<i8>) -> Result<Self, HopfieldError> {
        if let Some(index) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(HopfieldError::InvalidSpin {
                index,
                value: spins[index],
            });
        }
        Ok(Self(spins))
    }

    pub fn uniform(n: usize, spin: i8) -> Self {
        Self(vec![if spin < 0 { -1 } else { 1 }; n])
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self(
            (0..n)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.0[i] = -s.0[i];
        s
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    /// `Σ s_i / N`.
    pub fn magnetization(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().map(|&s| f64::from(s)).sum::<f64>() / self.0.len() as f64
    }
}

impl std::fmt::Display for SpinState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.0 {
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Parses the `+`/`-` form written by `Display`.
impl std::str::FromStr for SpinState {
    type Err = HopfieldError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        text.trim()
            .chars()
            .enumerate()
            .map(|(index, value)| match value {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(HopfieldError::InvalidSpinChar { index, value }),
            })
            .collect::<Result<Vec<i8>, _>>()
            .map(SpinState)
    }
}

/// Dense symmetric matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    n: usize,
    data: Vec<f64>,
}

impl Couplings {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// All off-diagonal entries equal to `j`.
    pub fn uniform(n: usize, j: f64) -> Self {
        let mut c = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    c.data[i * n + k] = j;
                }
            }
        }
        c
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, HopfieldError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(HopfieldError::NotSquare);
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        if data.iter().any(|x| !x.is_finite()) {
            return Err(HopfieldError::NonFinite);
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(HopfieldError::NonZeroDiagonal { i });
            }
            for j in i + 1..n {
                if (data[i * n + j] - data[j * n + i]).abs() > SYMMETRY_TOL {
                    return Err(HopfieldError::NotSymmetric { i, j });
                }
            }
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `Σ_{i≠j} w_ij`.
    pub fn off_diagonal_sum(&self) -> f64 {
        self.data.iter().sum()
    }

    fn quadratic_energy(&self, bias: &[f64], s: &SpinState) -> Result<f64, HopfieldError> {
        if s.len() != self.n {
            return Err(HopfieldError::DimensionMismatch {
                expected: self.n,
                got: s.len(),
            });
        }
        let s = s.as_slice();
        let mut pair = 0.0;
        for i in 0..self.n {
            let row = self.row(i);
            let si = f64::from(s[i]);
            for j in 0..self.n {
                pair += row[j] * si * f64::from(s[j]);
            }
        }
        let linear: f64 = bias.iter().zip(s).map(|(b, &x)| b * f64::from(x)).sum();
        Ok(-0.5 * pair - linear)
    }

    /// `Σ_j w_ij s_j + bias_i`.
    pub fn local_field(&self, i: usize, bias: f64, s: &[i8]) -> f64 {
        self.row(i)
            .iter()
            .zip(s)
            .map(|(w, &x)| w * f64::from(x))
            .sum::<f64>()
            + bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfieldNet {
    weights: Couplings,
    thresholds: Vec<f64>,
}

impl HopfieldNet {
    pub fn new(weights: Couplings, thresholds: Vec<f64>) -> Result<Self, HopfieldError> {
        if thresholds.len() != weights.size() {
            return Err(HopfieldError::DimensionMismatch {
                expected: weights.size(),
                got: thresholds.len(),
            });
        }
        if thresholds.iter().any(|t| !t.is_finite()) {
            return Err(HopfieldError::NonFinite);
        }
        Ok(Self {
            weights,
            thresholds,
        })
    }

    pub fn weights(&self) -> &Couplings {
        &self.weights
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn size(&self) -> usize {
        self.weights.size()
    }

    pub fn local_field(&self, i: usize, s: &[i8]) -> f64 {
        self.weights.local_field(i, self.thresholds[i], s)
    }
}

/// `w_ij = (1/N) Σ_k x_i^k x_j^k`, zero diagonal, zero thresholds.
pub fn hebbian_weights(patterns: &[SpinState], n: usize) -> Result<HopfieldNet, HopfieldError> {
    if let Some(p) = patterns.iter().find(|p| p.len() != n) {
        return Err(HopfieldError::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    let mut w = Couplings::zeros(n);
    let scale = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let corr: i32 = patterns
                    .iter()
                    .map(|p| i32::from(p.0[i]) * i32::from(p.0[j]))
                    .sum();
                w.data[i * n + j] = f64::from(corr) * scale;
            }
        }
    }
    Ok(HopfieldNet {
        weights: w,
        thresholds: vec![0.0; n],
    })
}

pub fn hopfield_energy(net: &HopfieldNet, s: &SpinState) -> Result<f64, HopfieldError> {
    net.weights.quadratic_energy(&net.thresholds, s)
}

/// `E_min = −½ Σ_{i≠j} w_ij`, a bound that need not be attained.
pub fn energy_floor(net: &HopfieldNet) -> f64 {
    -0.5 * net.weights.off_diagonal_sum()
}

/// Neuron visiting order within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UpdateOrder {
    #[default]
    Sequential,
    /// A fresh seeded permutation each sweep.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecallTrace {
    /// Initial state followed by the state after every flip.
    pub states: Vec<SpinState>,
    /// Energy of each entry in `states`.
    pub energies: Vec<f64>,
    /// Index of the neuron flipped at each step.
    pub flips: Vec<usize>,
    pub converged: bool,
    /// Number of flips performed.
    pub steps: usize,
    pub sweeps: usize,
}

impl RecallTrace {
    pub fn final_state(&self) -> &SpinState {
        self.states
            .last()
            .expect("trace always holds the initial state")
    }
}

pub fn recall(
    net: &HopfieldNet,
    initial: &SpinState,
    order: UpdateOrder,
    max_sweeps: usize,
    seed: u64,
) -> Result<RecallTrace, HopfieldError> {
    let n = net.size();
    let mut energy = hopfield_energy(net, initial)?;
    let mut state = initial.clone();
    let mut trace = RecallTrace {
        states: vec![state.clone()],
        energies: vec![energy],
        flips: Vec::new(),
        converged: false,
        steps: 0,
        sweeps: 0,
    };
    let mut rng = substream(seed, "hopfield.recall");
    let mut visit: Vec<usize> = (0..n).collect();
    while trace.sweeps < max_sweeps {
        if order == UpdateOrder::Random {
            visit.shuffle(&mut rng);
        }
        let mut flipped = false;
        for &i in &visit {
            let h = net.local_field(i, &state.0);
            if h.abs() <= FIELD_TOL {
                continue;
            }
            let target: i8 = if h > 0.0 { 1 } else { -1 };
            if target != state.0[i] {
                state.0[i] = target;
                energy -= 2.0 * h.abs();
                trace.states.push(state.clone());
                trace.energies.push(energy);
                trace.flips.push(i);
                trace.steps += 1;
                flipped = true;
            }
        }
        trace.sweeps += 1;
        if !flipped {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    couplings: Couplings,
    fields: Vec<f64>,
    temperature: f64,
    consts: PhysicalConstants,
}

impl IsingModel {
    pub fn new(
        couplings: Couplings,
        fields: Vec<f64>,
        temperature: f64,
        consts: PhysicalConstants,
    ) -> Result<Self, HopfieldError> {
        if fields.len() != couplings.size() {
            return Err(HopfieldError::DimensionMismatch {
                expected: couplings.size(),
                got: fields.len(),
            });
        }
        if fields.iter().any(|h| !h.is_finite()) {
            return Err(HopfieldError::NonFinite);
        }
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(HopfieldError::NonPositiveTemperature(temperature));
        }
        Ok(Self {
            couplings,
            fields,
            temperature,
            consts,
        })
    }

    /// Ferromagnet with all pairs coupled by `j` and no external field.
    pub fn uniform(n: usize, j: f64, temperature: f64) -> Result<Self, HopfieldError> {
        Self::new(
            Couplings::uniform(n, j),
            vec![0.0; n],
            temperature,
            PhysicalConstants::natural(),
        )
    }

    pub fn size(&self) -> usize {
        self.couplings.size()
    }

    pub fn thermal_energy(&self) -> f64 {
        self.consts.k_b * self.temperature
    }

    /// Energy change from flipping spin `i`.
    pub fn flip_delta(&self, i: usize, s: &[i8]) -> f64 {
        2.0 * f64::from(s[i]) * self.couplings.local_field(i, self.fields[i], s)
    }
}

pub fn ising_energy(m: &IsingModel, s: &SpinState) -> Result<f64, HopfieldError> {
    m.couplings.quadratic_energy(&m.fields, s)
}

/// Accept iff `ΔE ≤ 0` or `u < exp(−ΔE / k_B T)`.
pub fn metropolis_accept(delta_e: f64, m: &IsingModel, uniform_draw: f64) -> bool {
    delta_e <= 0.0 || uniform_draw < (-delta_e / m.thermal_energy()).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetropolisRun {
    pub final_state: SpinState,
    /// Energy before the first sweep and after each sweep.
    pub energies: Vec<f64>,
    /// Magnetization before the first sweep and after each sweep.
    pub magnetizations: Vec<f64>,
    /// Mean of `|m|` over the post-sweep samples (the initial state when
    /// `sweeps = 0`).
    pub mean_abs_magnetization: f64,
    pub accepted: u64,
}

/// Seeded single-spin-flip Metropolis; one sweep is `N` random-site proposals.
pub fn metropolis_run(
    m: &IsingModel,
    initial: &SpinState,
    sweeps: usize,
    seed: u64,
) -> Result<MetropolisRun, HopfieldError> {
    let n = m.size();
    let mut energy = ising_energy(m, initial)?;
    let mut s = initial.clone();
    let mut rng = substream(seed, "ising.metropolis");
    let mut energies = vec![energy];
    let mut magnetizations = vec![s.magnetization()];
    let mut accepted = 0;
    for _ in 0..sweeps {
        for _ in 0..n {
            let i = rng.random_range(0..n);
            let delta = m.flip_delta(i, &s.0);
            let u: f64 = rng.random();
            if metropolis_accept(delta, m, u) {
                s.0[i] = -s.0[i];
                energy += delta;
                accepted += 1;
            }
        }
        energies.push(energy);
        magnetizations.push(s.magnetization());
    }
    let samples = if sweeps == 0 {
        &magnetizations[..]
    } else {
        &magnetizations[1..]
    };
    let mean_abs_magnetization =
        samples.iter().map(|x| x.abs()).sum::<f64>() / samples.len() as f64;
    Ok(MetropolisRun {
        final_state: s,
        energies,
        magnetizations,
        mean_abs_magnetization,
        accepted,
    })
}
