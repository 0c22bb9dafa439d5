//! Finite-support non-negative measures over opaque outcomes.

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numeric::{compensated_sum, CompensatedSum};
use crate::{Error, Result};

/// Masses strictly below this are dropped when a measure is built.
pub const PRUNE_THRESHOLD: f64 = 1e-15;
/// Tolerance on total mass for a measure to count as a probability measure.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Opaque outcome identifier. Multisets use the canonical `elem:count|...` encoding
/// produced by [`crate::oracle::Dataset::encode`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Outcome(String);

impl Outcome {
    pub fn new(id: impl Into<String>) -> Self {
        Outcome(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Outcome {
    fn from(s: &str) -> Self {
        Outcome(s.to_owned())
    }
}

impl From<String> for Outcome {
    fn from(s: String) -> Self {
        Outcome(s)
    }
}

impl Borrow<str> for Outcome {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// A non-negative measure with finite support.
///
/// Outcomes with zero (or pruned) mass are never stored, so `support()` is exactly
/// the set of outcomes with positive mass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteMeasure {
    masses: BTreeMap<Outcome, f64>,
    total: f64,
}

impl DiscreteMeasure {
    /// Builds a measure from `(outcome, mass)` pairs. Repeated outcomes are merged.
    pub fn new<I, O>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (O, f64)>,
        O: Into<Outcome>,
    {
        let mut acc: BTreeMap<Outcome, CompensatedSum> = BTreeMap::new();
        for (outcome, mass) in entries {
            let outcome = outcome.into();
            if !mass.is_finite() {
                return Err(Error::NonFiniteMass(outcome.0));
            }
            if mass < -PRUNE_THRESHOLD {
                return Err(Error::NegativeMass {
                    outcome: outcome.0,
                    mass,
                });
            }
            acc.entry(outcome).or_default().add(mass);
        }
        Ok(Self::from_sums(acc))
    }

    fn from_sums(acc: BTreeMap<Outcome, CompensatedSum>) -> Self {
        let masses: BTreeMap<Outcome, f64> = acc
            .into_iter()
            .map(|(o, s)| (o, s.value()))
            .filter(|&(_, m)| m >= PRUNE_THRESHOLD)
            .collect();
        let total = compensated_sum(masses.values().copied());
        DiscreteMeasure { masses, total }
    }

    /// Like [`DiscreteMeasure::new`] but requires total mass 1.
    pub fn probability<I, O>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (O, f64)>,
        O: Into<Outcome>,
    {
        let m = Self::new(entries)?;
        m.require_normalized()?;
        Ok(m)
    }

    /// The zero measure.
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn point(outcome: impl Into<Outcome>) -> Self {
        let mut masses = BTreeMap::new();
        masses.insert(outcome.into(), 1.0);
        DiscreteMeasure { masses, total: 1.0 }
    }

    /// Distribution on `{"0", "1"}` putting mass `p` on `"1"`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadParams(format!("Bernoulli parameter {p} outside [0, 1]")));
        }
        Self::probability([("1", p), ("0", 1.0 - p)])
    }

    pub fn mass(&self, outcome: &str) -> f64 {
        self.masses.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, outcome: &str) -> bool {
        self.masses.contains_key(outcome)
    }

    pub fn support(&self) -> impl Iterator<Item = &Outcome> {
        self.masses.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, f64)> {
        self.masses.iter().map(|(o, &m)| (o, m))
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn is_normalized(&self) -> bool {
        (self.total - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.total))
        }
    }

    /// `a · self` for `a ≥ 0`.
    pub fn scale(&self, a: f64) -> Result<Self> {
        Self::new(self.iter().map(|(o, m)| (o.clone(), a * m)))
    }

    /// Rescales to total mass one. The zero measure cannot be normalized.
    pub fn normalize(&self) -> Result<Self> {
        if self.total <= 0.0 {
            return Err(Error::NotNormalized(self.total));
        }
        self.scale(1.0 / self.total)
    }

    /// `Σ_i w_i · μ_i` with non-negative weights.
    pub fn mixture<'a, I>(components: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, &'a DiscreteMeasure)>,
    {
        let mut acc: BTreeMap<Outcome, CompensatedSum> = BTreeMap::new();
        for (w, m) in components {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::BadParams(format!("mixture weight {w} is not a finite non-negative number")));
            }
            if w == 0.0 {
                continue;
            }
            for (o, mass) in m.iter() {
                acc.entry(o.clone()).or_default().add(w * mass);
            }
        }
        Ok(Self::from_sums(acc))
    }

    /// `true` when every outcome of `self` has positive mass under `other`.
    pub fn support_within(&self, other: &DiscreteMeasure) -> bool {
        self.support().all(|o| other.contains(o.as_str()))
    }

    /// Largest per-outcome absolute difference over the union of supports.
    pub fn max_abs_diff(&self, other: &DiscreteMeasure) -> f64 {
        let a = self.iter().map(|(o, m)| (m - other.mass(o.as_str())).abs());
        let b = other.iter().map(|(o, m)| (m - self.mass(o.as_str())).abs());
        a.chain(b).fold(0.0, f64::max)
    }
}
