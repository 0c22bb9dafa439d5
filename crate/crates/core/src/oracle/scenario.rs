//! JSON scenario files for the oracle and their CSV report
//! `scenario,epsilon,exact,bound,gap`.
//!
//! A scenario names a universe, two neighbouring datasets, a scheme, a
//! relation, a list of `ε`, and either a membership probability `p` or an
//! explicit kernel mapping encoded subsamples to output distributions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::amplification::{GroupProfiles, NeighborRelation, SubsamplingScheme};
use crate::measure::{DiscreteMeasure, Outcome};
use crate::numeric::format_significant;
use crate::oracle::{
    check_bound, empirical_group_profiles, verify_tightness, BoundCheck, Dataset, MechanismKernel, Universe,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub universe: Vec<String>,
    pub x: Vec<String>,
    pub x_prime: Vec<String>,
    pub scheme: SubsamplingScheme,
    pub relation: NeighborRelation,
    /// Randomized-membership probability; the distinguishing element of `x` is tracked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Explicit kernel: encoded subsample → (output → probability).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<BTreeMap<String, BTreeMap<String, f64>>>,
    pub epsilons: Vec<f64>,
}

/// A file holds a single scenario object or an array of them.
#[derive(Deserialize)]
#[serde(untagged)]
enum ScenarioFile {
    One(Box<Scenario>),
    Many(Vec<Scenario>),
}

/// Parses and validates scenarios.
pub fn load_scenarios(text: &str) -> Result<Vec<Scenario>> {
    let parsed: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let list = match parsed {
        ScenarioFile::One(s) => vec![*s],
        ScenarioFile::Many(v) => v,
    };
    if list.is_empty() {
        return Err(Error::Parse("scenario file contains no scenarios".into()));
    }
    for s in &list {
        s.validate()?;
    }
    Ok(list)
}

struct Prepared {
    x: Dataset,
    x_prime: Dataset,
    kernel: Option<(MechanismKernel, Vec<Dataset>)>,
}

impl Scenario {
    fn prepare(&self) -> Result<Prepared> {
        let named = |what: &str, e: Error| Error::Parse(format!("scenario {:?}, {what}: {e}", self.name));
        if self.name.is_empty() || self.name.contains([',', '\n', '"']) {
            return Err(Error::Parse(format!("scenario name {:?} is empty or not CSV-safe", self.name)));
        }
        self.scheme.validate().map_err(|e| named("scheme", e))?;
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::Parse(format!(
                "scenario {:?}: epsilons must be a non-empty list of finite non-negative numbers",
                self.name
            )));
        }
        let universe = Universe::new(self.universe.iter().cloned()).map_err(|e| named("universe", e))?;
        let x = Dataset::from_elements(&universe, &self.x).map_err(|e| named("x", e))?;
        let x_prime = Dataset::from_elements(&universe, &self.x_prime).map_err(|e| named("x_prime", e))?;
        let kernel = match (&self.p, &self.kernel) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(Error::Parse(format!(
                    "scenario {:?}: give exactly one of `p` and `kernel`",
                    self.name
                )))
            }
            (Some(p), None) => {
                if !(0.5..=1.0).contains(p) {
                    return Err(named("p", Error::POutOfRange(*p)));
                }
                None
            }
            (None, Some(rows)) => {
                let mut outputs = BTreeMap::new();
                let mut domain = Vec::with_capacity(rows.len());
                for (input, row) in rows {
                    let y = Dataset::decode(&universe, input).map_err(|e| named("kernel input", e))?;
                    let mu = DiscreteMeasure::new(row.iter().map(|(z, &m)| (z.as_str(), m)))
                        .map_err(|e| named(&format!("kernel row {input:?}"), e))?;
                    mu.require_normalized()
                        .map_err(|e| named(&format!("kernel row {input:?}"), e))?;
                    outputs.insert(Outcome::new(y.encode()), mu);
                    domain.push(y);
                }
                Some((MechanismKernel::new(outputs)?, domain))
            }
        };
        Ok(Prepared { x, x_prime, kernel })
    }

    /// Checks the scenario without running the enumeration.
    pub fn validate(&self) -> Result<()> {
        self.prepare().map(|_| ())
    }

    /// One [`BoundCheck`] per `ε`, in file order.
    pub fn run(&self) -> Result<Vec<BoundCheck>> {
        let prep = self.prepare()?;
        match &prep.kernel {
            None => {
                let p = self.p.expect("validated");
                self.epsilons
                    .iter()
                    .map(|&eps| verify_tightness(&self.scheme, self.relation, p, eps, &prep.x, &prep.x_prime))
                    .collect()
            }
            Some((kernel, domain)) => {
                let (group_relation, max_k) = match self.scheme {
                    SubsamplingScheme::Poisson { .. } => (self.relation, 1),
                    SubsamplingScheme::Wor { .. } => (NeighborRelation::Substitute, 1),
                    SubsamplingScheme::Wr { m, .. } => (NeighborRelation::Substitute, m),
                };
                let groups = GroupProfiles::Explicit(empirical_group_profiles(kernel, domain, group_relation, max_k)?);
                self.epsilons
                    .iter()
                    .map(|&eps| check_bound(&self.scheme, self.relation, kernel, &groups, &prep.x, &prep.x_prime, eps))
                    .collect()
            }
        }
    }
}

/// CSV header used by [`report_csv`].
pub const REPORT_HEADER: &str = "scenario,epsilon,exact,bound,gap";

/// Renders results as CSV with 15 significant digits and LF line endings.
pub fn report_csv<'a, I>(rows: I) -> String
where
    I: IntoIterator<Item = (&'a str, &'a BoundCheck)>,
{
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for (name, r) in rows {
        let cells = [r.eps, r.exact, r.bound, r.gap].map(|v| format_significant(v, 15));
        out.push_str(name);
        for c in cells {
            out.push(',');
            out.push_str(&c);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MEMBERSHIP: &str = r#"{
        "name": "poisson-membership",
        "universe": ["a", "b", "c", "d"],
        "x": ["a", "b", "c", "d"],
        "x_prime": ["a", "b", "c"],
        "scheme": {"kind": "poisson", "gamma": 0.3},
        "relation": "remove-add",
        "p": 0.8,
        "epsilons": [0, 0.6931471805599453]
    }"#;

    #[test]
    fn membership_scenario_is_tight() {
        let s = load_scenarios(MEMBERSHIP).unwrap();
        let rows = s[0].run().unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert!(r.gap.abs() < 1e-12);
        }
        let csv = report_csv(rows.iter().map(|r| ("poisson-membership", r)));
        assert!(csv.starts_with("scenario,epsilon,exact,bound,gap\npoisson-membership,0,"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn kernel_scenario_dominates() {
        let text = r#"[{
            "name": "wor-kernel",
            "universe": ["a", "b", "c"],
            "x": ["a", "b"],
            "x_prime": ["a", "c"],
            "scheme": {"kind": "wor", "n": 2, "m": 1},
            "relation": "substitute",
            "kernel": {
                "a:1": {"z0": 0.7, "z1": 0.3},
                "b:1": {"z0": 0.2, "z1": 0.8},
                "c:1": {"z0": 0.5, "z1": 0.5}
            },
            "epsilons": [0, 0.5]
        }]"#;
        let s = load_scenarios(text).unwrap();
        for r in s[0].run().unwrap() {
            assert!(r.gap >= -1e-12, "{r:?}");
        }
    }

    #[test]
    fn mass_sum_is_validated() {
        let text = MEMBERSHIP.replace(r#""p": 0.8,"#, r#""kernel": {"": {"z": 0.9}},"#);
        assert!(matches!(load_scenarios(&text), Err(Error::Parse(msg)) if msg.contains("not normalized")));
        let both = MEMBERSHIP.replace(r#""p": 0.8,"#, r#""p": 0.8, "kernel": {},"#);
        assert!(load_scenarios(&both).is_err());
        assert!(load_scenarios("{").is_err());
        assert!(load_scenarios("[]").is_err());
        let unknown = MEMBERSHIP.replace(r#""p": 0.8,"#, r#""p": 0.8, "extra": 1,"#);
        assert!(load_scenarios(&unknown).is_err());
    }
}
