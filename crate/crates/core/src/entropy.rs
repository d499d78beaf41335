//! Entropy and information primitives.
//!
//! Informational quantities default to bits, thermodynamic ones use the
//! natural log scaled by `k_B`. `0 · log 0` is taken as 0 throughout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ErrorKind;

/// Tolerance on `Σ p = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// SI Boltzmann constant in J/K.
pub const BOLTZMANN_SI: f64 = 1.380_649e-23;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("distribution is empty")]
    Empty,
    #[error("probability {value} at index {index} is negative or not finite")]
    InvalidProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("joint distribution rows have unequal lengths")]
    Ragged,
    #[error("microstate count must be at least 1")]
    NoMicrostates,
    #[error("temperature {0} is negative")]
    NegativeTemperature(f64),
    #[error("Boltzmann constant {0} must be positive and finite")]
    InvalidBoltzmann(f64),
}

impl EntropyError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            EntropyError::NoMicrostates | EntropyError::NegativeTemperature(_) => ErrorKind::Domain,
            _ => ErrorKind::Validation,
        }
    }
}

/// Logarithm base for informational entropies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    /// Bits.
    #[default]
    Two,
    /// Nats.
    E,
}

impl LogBase {
    #[inline]
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
        }
    }
}

/// A validated discrete distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self, EntropyError> {
        validate_cells(&p)?;
        Ok(Self(p))
    }

    pub fn uniform(n: usize) -> Result<Self, EntropyError> {
        if n == 0 {
            return Err(EntropyError::Empty);
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn validate_cells(cells: &[f64]) -> Result<(), EntropyError> {
    if cells.is_empty() {
        return Err(EntropyError::Empty);
    }
    for (index, &value) in cells.iter().enumerate() {
        if !(value.is_finite() && value >= 0.0) {
            return Err(EntropyError::InvalidProbability { index, value });
        }
    }
    let sum: f64 = cells.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(EntropyError::NotNormalized { sum });
    }
    Ok(())
}

/// Joint distribution of two discrete variables; rows index `X`, columns `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
}

impl JointDistribution {
    pub fn new(cells: Vec<Vec<f64>>) -> Result<Self, EntropyError> {
        let rows = cells.len();
        let cols = cells.first().map_or(0, Vec::len);
        if cells.iter().any(|r| r.len() != cols) {
            return Err(EntropyError::Ragged);
        }
        let flat: Vec<f64> = cells.into_iter().flatten().collect();
        validate_cells(&flat)?;
        Ok(Self {
            rows,
            cols,
            cells: flat,
        })
    }

    /// Outer product of two marginals.
    pub fn product(px: &ProbabilityVector, py: &ProbabilityVector) -> Self {
        let cells = px
            .as_slice()
            .iter()
            .flat_map(|&a| py.as_slice().iter().map(move |&b| a * b))
            .collect();
        Self {
            rows: px.len(),
            cols: py.len(),
            cells,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.cells[x * self.cols + y]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn transpose(&self) -> Self {
        let mut cells = Vec::with_capacity(self.cells.len());
        for y in 0..self.cols {
            for x in 0..self.rows {
                cells.push(self.get(x, y));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            cells,
        }
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|x| (0..self.cols).map(|y| self.get(x, y)).sum())
            .collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|y| (0..self.rows).map(|x| self.get(x, y)).sum())
            .collect()
    }

    /// `H(X,Y)`.
    pub fn joint_entropy(&self, base: LogBase) -> f64 {
        raw_entropy(&self.cells, base)
    }

    /// `H(X|Y) = −Σ p(x,y) log p(x|y)`.
    pub fn conditional_entropy_x_given_y(&self, base: LogBase) -> f64 {
        let py = self.marginal_y();
        let mut h = 0.0;
        for x in 0..self.rows {
            for (y, &m) in py.iter().enumerate() {
                let p = self.get(x, y);
                if p > 0.0 {
                    h -= p * base.log(p / m);
                }
            }
        }
        h
    }

    /// `H(Y|X) = −Σ p(x,y) log p(y|x)`.
    pub fn conditional_entropy_y_given_x(&self, base: LogBase) -> f64 {
        let px = self.marginal_x();
        let mut h = 0.0;
        for (x, &m) in px.iter().enumerate() {
            for y in 0..self.cols {
                let p = self.get(x, y);
                if p > 0.0 {
                    h -= p * base.log(p / m);
                }
            }
        }
        h
    }
}

/// Physical constants used by the thermodynamic quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub k_b: f64,
}

impl PhysicalConstants {
    pub fn new(k_b: f64) -> Result<Self, EntropyError> {
        if !(k_b.is_finite() && k_b > 0.0) {
            return Err(EntropyError::InvalidBoltzmann(k_b));
        }
        Ok(Self { k_b })
    }

    /// Natural units, `k_B = 1`.
    pub const fn natural() -> Self {
        Self { k_b: 1.0 }
    }

    /// `k_B = 1.380649e-23 J/K`.
    pub const fn si() -> Self {
        Self { k_b: BOLTZMANN_SI }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural()
    }
}

/// Never `-0.0`: a certain outcome has entropy `+0`.
fn raw_entropy(p: &[f64], base: LogBase) -> f64 {
    0.0 - p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * base.log(x))
        .sum::<f64>()
}

/// `H = −Σ p_i log p_i`.
pub fn shannon_entropy(p: &ProbabilityVector, base: LogBase) -> f64 {
    raw_entropy(p.as_slice(), base)
}

/// Binary entropy in bits of a single probability; `p` outside `[0, 1]` is clamped.
pub fn binary_entropy_bits(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    raw_entropy(&[p, 1.0 - p], LogBase::Two)
}

/// `S = k_B ln Ω`.
pub fn boltzmann_entropy(omega: u64, consts: PhysicalConstants) -> Result<f64, EntropyError> {
    if omega == 0 {
        return Err(EntropyError::NoMicrostates);
    }
    Ok(consts.k_b * (omega as f64).ln())
}

/// `S = −k_B Σ p_i ln p_i`.
pub fn gibbs_entropy(p: &ProbabilityVector, consts: PhysicalConstants) -> f64 {
    consts.k_b * raw_entropy(p.as_slice(), LogBase::E)
}

/// Entropy in nats of a density matrix given its eigenvalues.
pub fn von_neumann_entropy(eigenvalues: &ProbabilityVector) -> f64 {
    raw_entropy(eigenvalues.as_slice(), LogBase::E)
}

/// Which identity is used to evaluate `I(X;Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiRoute {
    /// `H(X) − H(X|Y)`
    ConditionalX,
    /// `H(Y) − H(Y|X)`
    ConditionalY,
    /// `H(X) + H(Y) − H(X,Y)`
    Joint,
}

/// `I(X;Y) = H(X) + H(Y) − H(X,Y)`.
pub fn mutual_information(j: &JointDistribution, base: LogBase) -> f64 {
    mutual_information_by(j, base, MiRoute::Joint)
}

pub fn mutual_information_by(j: &JointDistribution, base: LogBase, route: MiRoute) -> f64 {
    match route {
        MiRoute::ConditionalX => {
            raw_entropy(&j.marginal_x(), base) - j.conditional_entropy_x_given_y(base)
        }
        MiRoute::ConditionalY => {
            raw_entropy(&j.marginal_y(), base) - j.conditional_entropy_y_given_x(base)
        }
        MiRoute::Joint => {
            raw_entropy(&j.marginal_x(), base) + raw_entropy(&j.marginal_y(), base)
                - j.joint_entropy(base)
        }
    }
}

/// Minimum heat released by erasing one bit, `k_B T ln 2`.
pub fn landauer_energy(temperature: f64, consts: PhysicalConstants) -> Result<f64, EntropyError> {
    if temperature < 0.0 || temperature.is_nan() {
        return Err(EntropyError::NegativeTemperature(temperature));
    }
    Ok(consts.k_b * temperature * std::f64::consts::LN_2)
}
