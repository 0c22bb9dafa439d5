//! Datasets as multisets over a finite, ordered universe, and their canonical
//! string encoding `elem:count|elem:count`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::amplification::NeighborRelation;
use crate::measure::Outcome;
use crate::{Error, Result};

/// Ordered list of element names. Order fixes the canonical encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Universe(Arc<[String]>);

impl Universe {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::BadParams("universe is empty".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.contains([':', '|']) || n.chars().any(char::is_whitespace) {
                return Err(Error::BadParams(format!("invalid element name {n:?}")));
            }
            if names[..i].contains(n) {
                return Err(Error::BadParams(format!("duplicate element {n:?}")));
            }
        }
        Ok(Universe(names.into()))
    }

    /// `u0, u1, …` with `size` elements.
    pub fn indexed(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| format!("u{i}")))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::BadParams(format!("element {name:?} is not in the universe")))
    }

    /// Canonical encoding of a count vector aligned with this universe.
    pub fn encode(&self, counts: &[u32]) -> String {
        let mut out = String::new();
        for (name, &c) in self.0.iter().zip(counts) {
            if c == 0 {
                continue;
            }
            if !out.is_empty() {
                out.push('|');
            }
            out.push_str(name);
            out.push(':');
            out.push_str(&c.to_string());
        }
        out
    }
}

/// A multiset over a [`Universe`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dataset {
    universe: Universe,
    counts: Vec<u32>,
}

impl Dataset {
    pub fn empty(universe: &Universe) -> Self {
        Dataset {
            universe: universe.clone(),
            counts: vec![0; universe.len()],
        }
    }

    pub fn from_counts(universe: &Universe, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != universe.len() {
            return Err(Error::BadParams(format!(
                "{} counts for a universe of {} elements",
                counts.len(),
                universe.len()
            )));
        }
        Ok(Dataset {
            universe: universe.clone(),
            counts,
        })
    }

    /// Repeated names add multiplicity.
    pub fn from_elements<S: AsRef<str>>(universe: &Universe, elements: &[S]) -> Result<Self> {
        let mut d = Self::empty(universe);
        for e in elements {
            let i = universe.require(e.as_ref())?;
            d.counts[i] += 1;
        }
        Ok(d)
    }

    /// Parses the canonical encoding (order of terms is not checked).
    pub fn decode(universe: &Universe, encoding: &str) -> Result<Self> {
        let mut d = Self::empty(universe);
        for (name, count) in parse_encoding(encoding)? {
            d.counts[universe.require(name)?] += count;
        }
        Ok(d)
    }

    pub fn encode(&self) -> String {
        self.universe.encode(&self.counts)
    }

    pub fn outcome(&self) -> Outcome {
        Outcome::new(self.encode())
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, name: &str) -> u32 {
        self.universe.index_of(name).map_or(0, |i| self.counts[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.count(name) > 0
    }

    pub fn size(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    pub fn support_size(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn is_set(&self) -> bool {
        self.counts.iter().all(|&c| c <= 1)
    }

    /// Copy with one more occurrence of `name`.
    pub fn with(&self, name: &str) -> Result<Self> {
        let mut d = self.clone();
        d.counts[self.universe.require(name)?] += 1;
        Ok(d)
    }

    /// Copy with one occurrence of `name` removed.
    pub fn without(&self, name: &str) -> Result<Self> {
        let i = self.universe.require(name)?;
        if self.counts[i] == 0 {
            return Err(Error::BadParams(format!("{name:?} is not in the dataset")));
        }
        let mut d = self.clone();
        d.counts[i] -= 1;
        Ok(d)
    }

    /// Multiset intersection.
    pub fn intersection(&self, other: &Dataset) -> Result<Self> {
        self.same_universe(other)?;
        let counts = self.counts.iter().zip(&other.counts).map(|(&a, &b)| a.min(b)).collect();
        Ok(Dataset {
            universe: self.universe.clone(),
            counts,
        })
    }

    /// Elements with a larger count here than in `other`, one name per extra copy.
    pub fn excess_over(&self, other: &Dataset) -> Result<Vec<String>> {
        self.same_universe(other)?;
        let mut out = Vec::new();
        for (i, (&a, &b)) in self.counts.iter().zip(&other.counts).enumerate() {
            for _ in b..a {
                out.push(self.universe.0[i].clone());
            }
        }
        Ok(out)
    }

    fn same_universe(&self, other: &Dataset) -> Result<()> {
        if self.universe != other.universe {
            return Err(Error::BadParams("datasets live in different universes".into()));
        }
        Ok(())
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.encode())
    }
}

fn parse_encoding(encoding: &str) -> Result<Vec<(&str, u32)>> {
    if encoding.is_empty() {
        return Ok(Vec::new());
    }
    encoding
        .split('|')
        .map(|term| {
            let (name, count) = term
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("bad multiset term {term:?}")))?;
            let count: u32 = count
                .parse()
                .map_err(|_| Error::Parse(format!("bad multiplicity in {term:?}")))?;
            if name.is_empty() || count == 0 {
                return Err(Error::Parse(format!("bad multiset term {term:?}")));
            }
            Ok((name, count))
        })
        .collect()
}

/// Element counts of an encoded multiset, without needing its universe.
pub fn decode_counts(encoding: &str) -> Result<BTreeMap<&str, u32>> {
    let mut out = BTreeMap::new();
    for (name, count) in parse_encoding(encoding)? {
        *out.entry(name).or_insert(0) += count;
    }
    Ok(out)
}

/// Whether the encoded multiset contains `name`.
pub fn encoding_contains(encoding: &str, name: &str) -> bool {
    !encoding.is_empty()
        && encoding
            .split('|')
            .any(|term| term.split_once(':').is_some_and(|(n, _)| n == name))
}

/// Path distance under `relation`: `‖x − x'‖₁` for remove/add, `‖x − x'‖₁ / 2`
/// for substitution (which needs `|x| = |x'|`).
pub fn path_distance(x: &Dataset, x_prime: &Dataset, relation: NeighborRelation) -> Result<usize> {
    x.same_universe(x_prime)?;
    let l1: u64 = x
        .counts
        .iter()
        .zip(&x_prime.counts)
        .map(|(&a, &b)| u64::from(a.abs_diff(b)))
        .sum();
    finish_distance(l1, x.size() as u64, x_prime.size() as u64, relation)
}

/// [`path_distance`] on canonical encodings.
pub fn encoded_distance(a: &str, b: &str, relation: NeighborRelation) -> Result<usize> {
    let ca = decode_counts(a)?;
    let cb = decode_counts(b)?;
    let mut l1 = 0u64;
    for (name, &x) in &ca {
        l1 += u64::from(x.abs_diff(cb.get(name).copied().unwrap_or(0)));
    }
    for (name, &y) in &cb {
        if !ca.contains_key(name) {
            l1 += u64::from(y);
        }
    }
    let size = |m: &BTreeMap<&str, u32>| m.values().map(|&c| u64::from(c)).sum::<u64>();
    finish_distance(l1, size(&ca), size(&cb), relation)
}

fn finish_distance(l1: u64, size_a: u64, size_b: u64, relation: NeighborRelation) -> Result<usize> {
    match relation {
        NeighborRelation::RemoveAdd => Ok(l1 as usize),
        NeighborRelation::Substitute if size_a != size_b => {
            Err(Error::Unreachable("substitute"))
        }
        NeighborRelation::Substitute => Ok((l1 / 2) as usize),
    }
}
