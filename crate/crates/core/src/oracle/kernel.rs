//! Mechanisms on subsamples, represented as Markov kernels keyed by the
//! canonical multiset encoding.

use std::borrow::Cow;
use std::collections::BTreeMap;

use rand::Rng;

use crate::divergence::Kernel;
use crate::measure::{DiscreteMeasure, Outcome};
use crate::oracle::dataset::{encoding_contains, Dataset};
use crate::{Error, Result};

/// An explicit table `input encoding → output distribution`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MechanismKernel {
    outputs: BTreeMap<Outcome, DiscreteMeasure>,
}

impl MechanismKernel {
    /// Every output must be a probability distribution.
    pub fn new(outputs: BTreeMap<Outcome, DiscreteMeasure>) -> Result<Self> {
        for mu in outputs.values() {
            mu.require_normalized()?;
        }
        Ok(MechanismKernel { outputs })
    }

    /// Evaluates `f` on every dataset of `domain`.
    pub fn tabulate<F>(domain: &[Dataset], mut f: F) -> Result<Self>
    where
        F: FnMut(&Dataset) -> Result<DiscreteMeasure>,
    {
        let mut outputs = BTreeMap::new();
        for y in domain {
            outputs.insert(y.outcome(), f(y)?);
        }
        Self::new(outputs)
    }

    /// Independent random output distributions on `z0..z{k−1}` for each input.
    /// About one weight in five is zeroed so that supports differ between inputs.
    pub fn random<R: Rng + ?Sized>(domain: &[Dataset], outputs: usize, rng: &mut R) -> Result<Self> {
        if outputs == 0 {
            return Err(Error::BadParams("a kernel needs at least one output".into()));
        }
        Self::tabulate(domain, |_| random_distribution(outputs, rng))
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Outcome> {
        self.outputs.keys()
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }
}

impl Kernel for MechanismKernel {
    fn output(&self, input: &Outcome) -> Option<Cow<'_, DiscreteMeasure>> {
        self.outputs.get(input).map(Cow::Borrowed)
    }
}

/// Random distribution on `z0..z{k−1}`.
pub fn random_distribution<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<DiscreteMeasure> {
    let mut w: Vec<f64> = (0..k)
        .map(|_| {
            if k > 1 && rng.random_bool(0.2) {
                0.0
            } else {
                rng.random::<f64>().powi(2) + 1e-3
            }
        })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        w[rng.random_range(0..k)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    DiscreteMeasure::new(w.iter().enumerate().map(|(i, &v)| (format!("z{i}"), v / total)))?.normalize()
}

/// Randomized membership: reports the bit `I[v ∈ y]`, kept with probability
/// `p` and flipped otherwise. Outputs are `"1"` and `"0"`.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipKernel {
    element: String,
    present: DiscreteMeasure,
    absent: DiscreteMeasure,
}

impl MembershipKernel {
    pub fn element(&self) -> &str {
        &self.element
    }
}

pub fn membership_kernel(v: &str, p: f64) -> Result<MembershipKernel> {
    if !(0.5..=1.0).contains(&p) {
        return Err(Error::POutOfRange(p));
    }
    Ok(MembershipKernel {
        element: v.to_owned(),
        present: DiscreteMeasure::bernoulli(p)?,
        absent: DiscreteMeasure::bernoulli(1.0 - p)?,
    })
}

impl Kernel for MembershipKernel {
    fn output(&self, input: &Outcome) -> Option<Cow<'_, DiscreteMeasure>> {
        let m = if encoding_contains(input.as_str(), &self.element) {
            &self.present
        } else {
            &self.absent
        };
        Some(Cow::Borrowed(m))
    }
}
