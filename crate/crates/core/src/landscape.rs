//! Energy landscape: units sitting in potential wells, bonds between them, and
//! the thresholds at which units activate and bonds break.
//!
//! A bond sees the sum of the additional energy held by its two endpoint
//! units. Broken bonds stay broken and contribute nothing to the total.

use std::collections::{BTreeMap, BTreeSet};

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::substream;
use crate::ErrorKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LandscapeError {
    #[error("unit {id}: activation threshold {tr2} must exceed resting energy {u_rest}")]
    NoCapacity { id: usize, u_rest: f64, tr2: f64 },
    #[error("bond {from}-{to}: stability threshold {tr3} below resting energy {w_rest}")]
    BondThreshold {
        from: usize,
        to: usize,
        w_rest: f64,
        tr3: f64,
    },
    #[error("unknown unit id {0}")]
    UnknownUnit(usize),
    #[error("duplicate unit id {0}")]
    DuplicateUnit(usize),
    #[error("duplicate bond between {0} and {1}")]
    DuplicateBond(usize, usize),
    #[error("bond cannot join unit {0} to itself")]
    SelfBond(usize),
    #[error("negative allocation {value} for unit {id}")]
    NegativeAllocation { id: usize, value: f64 },
    #[error("unit {0} holds additional energy; the system is not at rest")]
    NotAtRest(usize),
    #[error("non-finite value in landscape definition")]
    NonFinite,
    #[error("step size must be positive, got {0}")]
    InvalidStep(f64),
    #[error("noise scale must be non-negative, got {0}")]
    InvalidNoise(f64),
    #[error("non-finite state or potential at step {step}")]
    NonFiniteAt { step: usize },
}

impl LandscapeError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            LandscapeError::NonFiniteAt { .. } => ErrorKind::Numeric,
            LandscapeError::NotAtRest(_) => ErrorKind::Domain,
            _ => ErrorKind::Validation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeUnit {
    pub id: usize,
    pub u_rest: f64,
    pub tr2: f64,
    pub delta_u: f64,
}

impl LandscapeUnit {
    pub fn new(id: usize, u_rest: f64, tr2: f64) -> Result<Self, LandscapeError> {
        let u = Self {
            id,
            u_rest,
            tr2,
            delta_u: 0.0,
        };
        u.validate()?;
        Ok(u)
    }

    fn validate(&self) -> Result<(), LandscapeError> {
        if !(self.u_rest.is_finite() && self.tr2.is_finite() && self.delta_u.is_finite()) {
            return Err(LandscapeError::NonFinite);
        }
        if self.tr2 <= self.u_rest {
            return Err(LandscapeError::NoCapacity {
                id: self.id,
                u_rest: self.u_rest,
                tr2: self.tr2,
            });
        }
        Ok(())
    }

    pub fn energy(&self) -> f64 {
        self.u_rest + self.delta_u
    }

    /// Strict: a unit exactly at its threshold is not activated.
    pub fn is_activated(&self) -> bool {
        self.energy() > self.tr2
    }

    /// Additional energy the well absorbs before activating.
    pub fn capacity(&self) -> f64 {
        self.tr2 - self.u_rest
    }
}

pub fn is_activated(u: &LandscapeUnit) -> bool {
    u.is_activated()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeBond {
    pub from: usize,
    pub to: usize,
    pub w_rest: f64,
    pub tr3: f64,
    pub intact: bool,
}

impl LandscapeBond {
    pub fn new(from: usize, to: usize, w_rest: f64, tr3: f64) -> Result<Self, LandscapeError> {
        if !(w_rest.is_finite() && tr3.is_finite()) {
            return Err(LandscapeError::NonFinite);
        }
        if tr3 < w_rest {
            return Err(LandscapeError::BondThreshold {
                from,
                to,
                w_rest,
                tr3,
            });
        }
        if from == to {
            return Err(LandscapeError::SelfBond(from));
        }
        Ok(Self {
            from,
            to,
            w_rest,
            tr3,
            intact: true,
        })
    }

    /// Inclusive: a bond exactly at its threshold holds.
    pub fn is_stable_under(&self, delta_u: f64) -> bool {
        self.w_rest + delta_u <= self.tr3
    }

    fn key(&self) -> (usize, usize) {
        (self.from.min(self.to), self.from.max(self.to))
    }
}

/// Stability test that also marks the bond broken on failure.
pub fn bond_stable(b: &mut LandscapeBond, delta_u: f64) -> bool {
    let stable = b.is_stable_under(delta_u);
    if !stable {
        b.intact = false;
    }
    stable
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LandscapeEvent {
    Activated { unit: usize },
    BondBroken { from: usize, to: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionOutcome {
    pub landscape: EnergyLandscape,
    /// Newly activated units and newly broken bonds, in id order.
    pub events: Vec<LandscapeEvent>,
    pub broken_bonds: usize,
    /// Broken bonds over all bonds; 0 for a landscape without bonds.
    pub broken_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyLandscape {
    units: Vec<LandscapeUnit>,
    bonds: Vec<LandscapeBond>,
}

impl EnergyLandscape {
    pub fn new(
        units: Vec<LandscapeUnit>,
        bonds: Vec<LandscapeBond>,
    ) -> Result<Self, LandscapeError> {
        let mut ids = BTreeSet::new();
        for u in &units {
            u.validate()?;
            if !ids.insert(u.id) {
                return Err(LandscapeError::DuplicateUnit(u.id));
            }
        }
        let mut pairs = BTreeSet::new();
        for b in &bonds {
            for end in [b.from, b.to] {
                if !ids.contains(&end) {
                    return Err(LandscapeError::UnknownUnit(end));
                }
            }
            let (a, c) = b.key();
            if !pairs.insert((a, c)) {
                return Err(LandscapeError::DuplicateBond(a, c));
            }
        }
        Ok(Self { units, bonds })
    }

    /// Layer of threshold neurons: unit `j` rests at `Σ_i w_ij` and
    /// activates `capacity` above that.
    pub fn from_weight_columns(
        columns: &[Vec<f64>],
        capacity: f64,
    ) -> Result<Self, LandscapeError> {
        let units = columns
            .iter()
            .enumerate()
            .map(|(j, col)| {
                LandscapeUnit::new(j, col.iter().sum(), col.iter().sum::<f64>() + capacity)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(units, Vec::new())
    }

    pub fn units(&self) -> &[LandscapeUnit] {
        &self.units
    }

    pub fn bonds(&self) -> &[LandscapeBond] {
        &self.bonds
    }

    pub fn unit(&self, id: usize) -> Option<&LandscapeUnit> {
        self.units.iter().find(|u| u.id == id)
    }

    pub fn total_energy(&self) -> f64 {
        let units: f64 = self.units.iter().map(LandscapeUnit::energy).sum();
        let bonds: f64 = self
            .bonds
            .iter()
            .filter(|b| b.intact)
            .map(|b| b.w_rest)
            .sum();
        units + bonds
    }

    pub fn rest_threshold(&self) -> Result<f64, LandscapeError> {
        if let Some(u) = self.units.iter().find(|u| u.delta_u != 0.0) {
            return Err(LandscapeError::NotAtRest(u.id));
        }
        Ok(self.units.iter().map(|u| u.u_rest).sum::<f64>()
            + self.bonds.iter().map(|b| b.w_rest).sum::<f64>())
    }

    fn delta_of(&self, id: usize) -> f64 {
        self.unit(id).map_or(0.0, |u| u.delta_u)
    }

    /// Energy a bond sees: the sum of its endpoints' additional energy.
    pub fn bond_load(&self, b: &LandscapeBond) -> f64 {
        self.delta_of(b.from) + self.delta_of(b.to)
    }

    pub fn inject_energy(
        &self,
        allocation: &BTreeMap<usize, f64>,
    ) -> Result<InjectionOutcome, LandscapeError> {
        for (&id, &value) in allocation {
            if self.unit(id).is_none() {
                return Err(LandscapeError::UnknownUnit(id));
            }
            if !value.is_finite() {
                return Err(LandscapeError::NonFinite);
            }
            if value < 0.0 {
                return Err(LandscapeError::NegativeAllocation { id, value });
            }
        }
        let mut next = self.clone();
        let mut events = Vec::new();
        for u in &mut next.units {
            let was = u.is_activated();
            if let Some(&a) = allocation.get(&u.id) {
                u.delta_u += a;
            }
            if !was && u.is_activated() {
                events.push(LandscapeEvent::Activated { unit: u.id });
            }
        }
        let loads: Vec<f64> = next.bonds.iter().map(|b| next.bond_load(b)).collect();
        for (b, load) in next.bonds.iter_mut().zip(loads) {
            if b.intact && !bond_stable(b, load) {
                events.push(LandscapeEvent::BondBroken {
                    from: b.from,
                    to: b.to,
                });
            }
        }
        let broken_bonds = next.bonds.iter().filter(|b| !b.intact).count();
        let broken_fraction = if next.bonds.is_empty() {
            0.0
        } else {
            broken_bonds as f64 / next.bonds.len() as f64
        };
        Ok(InjectionOutcome {
            landscape: next,
            events,
            broken_bonds,
            broken_fraction,
        })
    }
}

/// A one-dimensional potential with its derivative.
pub trait Potential {
    fn value(&self, x: f64) -> f64;
    fn gradient(&self, x: f64) -> f64;
}

/// `V(x) = a (x − c)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub a: f64,
    pub center: f64,
}

impl Potential for Quadratic {
    fn value(&self, x: f64) -> f64 {
        self.a * (x - self.center).powi(2)
    }
    fn gradient(&self, x: f64) -> f64 {
        2.0 * self.a * (x - self.center)
    }
}

/// `V(x) = a (x² − 1)²`, minima at ±1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleWell {
    pub a: f64,
}

impl Potential for DoubleWell {
    fn value(&self, x: f64) -> f64 {
        self.a * (x * x - 1.0).powi(2)
    }
    fn gradient(&self, x: f64) -> f64 {
        4.0 * self.a * x * (x * x - 1.0)
    }
}

/// Potential from a pair of closures.
pub struct FnPotential<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V: Fn(f64) -> f64, G: Fn(f64) -> f64> Potential for FnPotential<V, G> {
    fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: f64) -> f64 {
        (self.gradient)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangevinConfig {
    pub dt: f64,
    pub noise_scale: f64,
    pub seed: u64,
    pub steps: usize,
}

impl LangevinConfig {
    pub fn new(dt: f64, noise_scale: f64, seed: u64, steps: usize) -> Result<Self, LandscapeError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(LandscapeError::InvalidStep(dt));
        }
        if !(noise_scale.is_finite() && noise_scale >= 0.0) {
            return Err(LandscapeError::InvalidNoise(noise_scale));
        }
        Ok(Self {
            dt,
            noise_scale,
            seed,
            steps,
        })
    }
}

/// Euler-Maruyama: `x ← x − V′(x) dt + σ √dt ξ`, `ξ ~ N(0, 1)`. Returns
/// `steps + 1` points starting at `x0`.
pub fn langevin_descent<P: Potential + ?Sized>(
    potential: &P,
    cfg: &LangevinConfig,
    x0: f64,
) -> Result<Vec<f64>, LandscapeError> {
    if !(x0.is_finite() && potential.value(x0).is_finite()) {
        return Err(LandscapeError::NonFiniteAt { step: 0 });
    }
    let mut rng = substream(cfg.seed, "landscape.langevin");
    let amp = cfg.noise_scale * cfg.dt.sqrt();
    let mut x = x0;
    let mut path = Vec::with_capacity(cfg.steps + 1);
    path.push(x);
    for step in 1..=cfg.steps {
        let xi: f64 = if amp > 0.0 {
            StandardNormal.sample(&mut rng)
        } else {
            0.0
        };
        x = x - potential.gradient(x) * cfg.dt + amp * xi;
        if !(x.is_finite() && potential.value(x).is_finite()) {
            return Err(LandscapeError::NonFiniteAt { step });
        }
        path.push(x);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pair() -> EnergyLandscape {
        EnergyLandscape::new(
            vec![
                LandscapeUnit::new(0, -1.0, 0.0).unwrap(),
                LandscapeUnit::new(1, -1.0, 0.0).unwrap(),
            ],
            vec![LandscapeBond::new(0, 1, -0.5, 0.5).unwrap()],
        )
        .unwrap()
    }

    fn alloc(items: &[(usize, f64)]) -> BTreeMap<usize, f64> {
        items.iter().copied().collect()
    }

    #[test]
    fn total_energy_examples() {
        assert_eq!(EnergyLandscape::default().total_energy(), 0.0);
        let l = pair();
        assert_eq!(l.total_energy(), -2.5);
        let mut broken = l.clone();
        broken.bonds[0].intact = false;
        assert_eq!(broken.total_energy(), -2.0);
    }

    #[test]
    fn rest_threshold_examples() {
        assert_eq!(EnergyLandscape::default().rest_threshold().unwrap(), 0.0);
        assert_eq!(pair().rest_threshold().unwrap(), -2.5);
        let out = pair().inject_energy(&alloc(&[(0, 0.1)])).unwrap();
        assert_eq!(
            out.landscape.rest_threshold(),
            Err(LandscapeError::NotAtRest(0))
        );
    }

    #[test]
    fn weight_columns_rest_at_column_sums() {
        let cols = vec![vec![0.5, -0.25, 0.25], vec![-1.0, -1.0, 0.5]];
        let l = EnergyLandscape::from_weight_columns(&cols, 1.0).unwrap();
        let oracle: f64 = cols.iter().flatten().sum();
        assert_abs_diff_eq!(l.rest_threshold().unwrap(), oracle);
        assert_abs_diff_eq!(l.units()[1].u_rest, -1.5);
    }

    #[test]
    fn activation_examples() {
        let mut u = LandscapeUnit::new(0, -1.0, 0.0).unwrap();
        assert!(!is_activated(&u));
        u.delta_u = 1.5;
        assert!(is_activated(&u));
        u.delta_u = 1.0;
        assert!(!is_activated(&u));
        assert!(LandscapeUnit::new(0, 1.0, 1.0).is_err());
    }

    #[test]
    fn bond_examples() {
        let mut b = LandscapeBond::new(0, 1, -0.5, 0.5).unwrap();
        assert!(bond_stable(&mut b, 0.0));
        assert!(bond_stable(&mut b, 1.0));
        assert!(b.intact);
        assert!(!bond_stable(&mut b, 2.0));
        assert!(!b.intact);
        assert!(LandscapeBond::new(0, 1, 0.5, 0.0).is_err());
    }

    #[test]
    fn landscape_validation() {
        let u = |id| LandscapeUnit::new(id, -1.0, 0.0).unwrap();
        let b = |f, t| LandscapeBond::new(f, t, -0.5, 0.5).unwrap();
        assert_eq!(
            EnergyLandscape::new(vec![u(0)], vec![b(0, 1)]),
            Err(LandscapeError::UnknownUnit(1))
        );
        assert_eq!(
            EnergyLandscape::new(vec![u(0), u(1)], vec![b(0, 1), b(1, 0)]),
            Err(LandscapeError::DuplicateBond(0, 1))
        );
        assert_eq!(
            EnergyLandscape::new(vec![u(0), u(0)], vec![]),
            Err(LandscapeError::DuplicateUnit(0))
        );
    }

    #[test]
    fn injection_examples() {
        let l = pair();
        assert!(l
            .inject_energy(&alloc(&[(0, 0.0)]))
            .unwrap()
            .events
            .is_empty());
        let out = l.inject_energy(&alloc(&[(0, 1.2)])).unwrap();
        assert_eq!(
            out.events,
            vec![
                LandscapeEvent::Activated { unit: 0 },
                LandscapeEvent::BondBroken { from: 0, to: 1 }
            ]
        );
        assert_eq!(out.broken_bonds, 1);
        assert_eq!(out.broken_fraction, 1.0);

        let out = l.inject_energy(&alloc(&[(0, 0.6), (1, 0.6)])).unwrap();
        assert_eq!(
            out.events,
            vec![LandscapeEvent::BondBroken { from: 0, to: 1 }]
        );
        assert_abs_diff_eq!(out.landscape.total_energy(), -2.5 + 1.2 + 0.5);

        assert_eq!(
            l.inject_energy(&alloc(&[(7, 1.0)])).unwrap_err(),
            LandscapeError::UnknownUnit(7)
        );
        assert!(l.inject_energy(&alloc(&[(0, -1.0)])).is_err());
    }

    #[test]
    fn langevin_examples() {
        let q = Quadratic {
            a: 1.0,
            center: 0.0,
        };
        let cfg = LangevinConfig::new(0.1, 0.0, 0, 0).unwrap();
        assert_eq!(langevin_descent(&q, &cfg, 3.0).unwrap(), vec![3.0]);
        let cfg = LangevinConfig::new(0.1, 0.0, 0, 200).unwrap();
        let path = langevin_descent(&q, &cfg, 1.0).unwrap();
        assert!(path.last().unwrap().abs() < 1e-8);
        assert_abs_diff_eq!(path[1], 0.8, epsilon = 1e-15);
        let dw = DoubleWell { a: 1.0 };
        assert!(langevin_descent(&dw, &cfg, 1.0)
            .unwrap()
            .iter()
            .all(|&x| x == 1.0));
        assert!(LangevinConfig::new(0.0, 0.0, 0, 1).is_err());
    }

    #[test]
    fn langevin_reports_divergence_step() {
        let steep = FnPotential {
            value: |x: f64| x.powi(4),
            gradient: |x: f64| 4.0 * x.powi(3),
        };
        let cfg = LangevinConfig::new(1.0, 0.0, 0, 50).unwrap();
        assert!(matches!(
            langevin_descent(&steep, &cfg, 10.0),
            Err(LandscapeError::NonFiniteAt { step }) if step > 0
        ));
    }

    #[test]
    fn langevin_noise_is_seeded() {
        let q = Quadratic {
            a: 0.5,
            center: 1.0,
        };
        let cfg = LangevinConfig::new(0.01, 0.3, 42, 100).unwrap();
        let a = langevin_descent(&q, &cfg, 0.0).unwrap();
        assert_eq!(a, langevin_descent(&q, &cfg, 0.0).unwrap());
        let other = LangevinConfig { seed: 43, ..cfg };
        assert_ne!(a, langevin_descent(&q, &other, 0.0).unwrap());
    }

    fn landscape_strategy() -> impl Strategy<Value = EnergyLandscape> {
        (2usize..6)
            .prop_flat_map(|n| {
                (
                    proptest::collection::vec((-2.0f64..0.0, 0.1f64..2.0), n),
                    proptest::collection::vec(
                        (any::<bool>(), -1.0f64..0.0, 0.0f64..2.0),
                        n * (n - 1) / 2,
                    ),
                )
            })
            .prop_map(|(us, bs)| {
                let n = us.len();
                let units = us
                    .iter()
                    .enumerate()
                    .map(|(i, &(r, c))| LandscapeUnit::new(i, r, r + c).unwrap())
                    .collect();
                let mut bonds = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        let (keep, w, gap) = bs[k];
                        k += 1;
                        if keep {
                            bonds.push(LandscapeBond::new(i, j, w, w + gap).unwrap());
                        }
                    }
                }
                EnergyLandscape::new(units, bonds).unwrap()
            })
    }

    proptest! {
        #[test]
        fn injection_bookkeeping(l in landscape_strategy(), raw in proptest::collection::vec(0.0f64..3.0, 6)) {
            let a: BTreeMap<usize, f64> = (0..l.units().len()).map(|i| (i, raw[i])).collect();
            let out = l.inject_energy(&a).unwrap();
            let removed: f64 = l.bonds().iter().zip(out.landscape.bonds())
                .filter(|(b0, b1)| b0.intact && !b1.intact)
                .map(|(b0, _)| b0.w_rest)
                .sum();
            let expected = l.total_energy() + a.values().sum::<f64>() - removed;
            prop_assert!((out.landscape.total_energy() - expected).abs() < 1e-9);
        }

        #[test]
        fn inter_threshold_allocations_are_silent(l in landscape_strategy(), frac in proptest::collection::vec(0.0f64..1.0, 6)) {
            // Scale each allocation so every unit stays within its well and every
            // bond load stays under its threshold.
            let mut slack = f64::INFINITY;
            for b in l.bonds() {
                slack = slack.min((b.tr3 - b.w_rest) / 2.0);
            }
            let a: BTreeMap<usize, f64> = l.units().iter().enumerate()
                .map(|(i, u)| (u.id, frac[i] * u.capacity().min(slack)))
                .collect();
            prop_assert!(l.inject_energy(&a).unwrap().events.is_empty());
        }

        #[test]
        fn activation_is_monotone(r in -3.0f64..0.0, c in 0.01f64..3.0, d in 0.0f64..5.0, e in 0.0f64..5.0) {
            let mut u = LandscapeUnit::new(0, r, r + c).unwrap();
            u.delta_u = d;
            let before = u.is_activated();
            u.delta_u = d + e;
            prop_assert!(!before || u.is_activated());
        }

        #[test]
        fn noiseless_convex_descent_is_monotone(a in 0.1f64..4.0, c in -2.0f64..2.0, x0 in -5.0f64..5.0, dt in 0.001f64..0.2) {
            let q = Quadratic { a, center: c };
            let cfg = LangevinConfig::new(dt, 0.0, 0, 100).unwrap();
            let path = langevin_descent(&q, &cfg, x0).unwrap();
            for w in path.windows(2) {
                prop_assert!(q.value(w[1]) <= q.value(w[0]) + 1e-15);
            }
        }
    }
}
