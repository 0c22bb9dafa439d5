//! Optimal transport between finite distributions: min-cost couplings by
//! successive shortest paths and distance-compatibility by max-flow.

use std::collections::{BTreeMap, VecDeque};

use crate::amplification::NeighborRelation;
use crate::divergence::TransportPlan;
use crate::measure::{DiscreteMeasure, Outcome};
use crate::numeric::CompensatedSum;
use crate::oracle::dataset::encoded_distance;
use crate::{Error, Result};

/// Largest support size on either side.
pub const MAX_SUPPORT: usize = 300;
/// Allowed difference between the total masses of the two marginals.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;
/// Residual capacities at or below this count as saturated.
const CAPACITY_EPS: f64 = 1e-18;
/// Slack allowed in the complementary-slackness certificate.
const CERTIFICATE_TOLERANCE: f64 = 1e-9;

/// An optimal coupling together with its cost and a dual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct CostedCoupling {
    pub plan: TransportPlan,
    /// `Σ π(y, y')·c(y, y')`.
    pub value: f64,
    /// Objective of the dual solution read off the shortest-path potentials.
    pub dual_value: f64,
    /// Dual feasibility, complementary slackness and a zero duality gap all hold.
    pub certified: bool,
}

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    rev: usize,
    cap: f64,
    cost: f64,
}

struct Graph {
    adj: Vec<Vec<Edge>>,
}

impl Graph {
    fn new(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64, cost: f64) {
        let rev_from = self.adj[to].len();
        let rev_to = self.adj[from].len();
        self.adj[from].push(Edge {
            to,
            rev: rev_from,
            cap,
            cost,
        });
        self.adj[to].push(Edge {
            to: from,
            rev: rev_to,
            cap: 0.0,
            cost: -cost,
        });
    }

    fn push(&mut self, from: usize, idx: usize, amount: f64) {
        let (to, rev) = {
            let e = &mut self.adj[from][idx];
            e.cap -= amount;
            (e.to, e.rev)
        };
        self.adj[to][rev].cap += amount;
    }
}

fn check_marginals(nu: &DiscreteMeasure, nu_prime: &DiscreteMeasure) -> Result<()> {
    if (nu.total_mass() - nu_prime.total_mass()).abs() > MARGINAL_TOLERANCE {
        return Err(Error::InfeasibleMarginals(nu.total_mass(), nu_prime.total_mass()));
    }
    for m in [nu, nu_prime] {
        if m.len() > MAX_SUPPORT {
            return Err(Error::InstanceTooLarge {
                what: "transport support",
                cardinality: m.len() as u128,
            });
        }
    }
    Ok(())
}

/// Minimum of `Σ π(y, y')·c(y, y')` over couplings `π` of `ν` and `ν'`.
///
/// Solved as min-cost flow with successive shortest paths (Dijkstra on reduced
/// costs). Ties are broken by the lexicographic order of the outcomes, so the
/// plan is deterministic.
pub fn min_cost_coupling<F>(nu: &DiscreteMeasure, nu_prime: &DiscreteMeasure, mut cost: F) -> Result<CostedCoupling>
where
    F: FnMut(&Outcome, &Outcome) -> f64,
{
    check_marginals(nu, nu_prime)?;
    let left: Vec<(&Outcome, f64)> = nu.iter().collect();
    let right: Vec<(&Outcome, f64)> = nu_prime.iter().collect();
    let (a, b) = (left.len(), right.len());
    let source = 0;
    let sink = a + b + 1;
    let mut g = Graph::new(a + b + 2);
    let mut costs = vec![vec![0.0; b]; a];
    for (i, &(y, m)) in left.iter().enumerate() {
        g.add_edge(source, 1 + i, m, 0.0);
        for (j, &(yp, _)) in right.iter().enumerate() {
            let c = cost(y, yp);
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::InvalidCost {
                    from: y.to_string(),
                    to: yp.to_string(),
                    cost: c,
                });
            }
            costs[i][j] = c;
            g.add_edge(1 + i, 1 + a + j, f64::INFINITY, c);
        }
    }
    for (j, &(_, m)) in right.iter().enumerate() {
        g.add_edge(1 + a + j, sink, m, 0.0);
    }

    let nodes = a + b + 2;
    let mut pot = vec![0.0; nodes];
    let target = nu.total_mass().min(nu_prime.total_mass());
    let mut sent = CompensatedSum::new();
    let max_rounds = 4 * nodes * nodes + 16;
    for _ in 0..max_rounds {
        if target - sent.value() <= 1e-15 {
            break;
        }
        let Some((dist, prev)) = dijkstra(&g, source, &pot) else {
            break;
        };
        if !dist[sink].is_finite() {
            break;
        }
        let reach_max = dist.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max);
        for (p, d) in pot.iter_mut().zip(&dist) {
            *p += if d.is_finite() { *d } else { reach_max };
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = sink;
        while v != source {
            let (u, idx) = prev[v].expect("path");
            bottleneck = bottleneck.min(g.adj[u][idx].cap);
            v = u;
        }
        let mut v = sink;
        while v != source {
            let (u, idx) = prev[v].expect("path");
            g.push(u, idx, bottleneck);
            v = u;
        }
        sent.add(bottleneck);
    }

    let mut joint = BTreeMap::new();
    let mut value = CompensatedSum::new();
    let mut violation: f64 = 0.0;
    for i in 0..a {
        for e in &g.adj[1 + i] {
            if e.to < 1 + a || e.to > a + b {
                continue;
            }
            let j = e.to - 1 - a;
            let flow = g.adj[e.to][e.rev].cap;
            let reduced = costs[i][j] + pot[1 + i] - pot[e.to];
            violation = violation.max(-reduced);
            if flow > CAPACITY_EPS {
                violation = violation.max(reduced.abs());
                joint.insert((left[i].0.clone(), right[j].0.clone()), flow);
                value.add(flow * costs[i][j]);
            }
        }
    }
    let mut dual = CompensatedSum::new();
    for (i, &(_, m)) in left.iter().enumerate() {
        dual.add(-m * pot[1 + i]);
    }
    for (j, &(_, m)) in right.iter().enumerate() {
        dual.add(m * pot[1 + a + j]);
    }
    let plan = TransportPlan { joint };
    let marginal_error = plan.marginal_error(nu, nu_prime)?;
    if marginal_error > MARGINAL_TOLERANCE {
        return Err(Error::InfeasibleMarginals(nu.total_mass(), nu_prime.total_mass()));
    }
    let value = value.value();
    let dual_value = dual.value();
    let certified = violation <= CERTIFICATE_TOLERANCE && (value - dual_value).abs() <= CERTIFICATE_TOLERANCE;
    Ok(CostedCoupling {
        plan,
        value,
        dual_value,
        certified,
    })
}

type Prev = Vec<Option<(usize, usize)>>;

/// Dense Dijkstra on reduced costs; returns `None` if nothing is reachable.
fn dijkstra(g: &Graph, source: usize, pot: &[f64]) -> Option<(Vec<f64>, Prev)> {
    let n = g.adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev: Prev = vec![None; n];
    let mut done = vec![false; n];
    dist[source] = 0.0;
    loop {
        let mut u = None;
        for v in 0..n {
            if !done[v] && dist[v].is_finite() && u.is_none_or(|w: usize| dist[v] < dist[w]) {
                u = Some(v);
            }
        }
        let Some(u) = u else { break };
        done[u] = true;
        for (idx, e) in g.adj[u].iter().enumerate() {
            if e.cap <= CAPACITY_EPS || done[e.to] {
                continue;
            }
            // Rounding can make reduced costs slightly negative; clamp at zero.
            let reduced = (e.cost + pot[u] - pot[e.to]).max(0.0);
            let nd = dist[u] + reduced;
            if nd < dist[e.to] {
                dist[e.to] = nd;
                prev[e.to] = Some((u, idx));
            }
        }
    }
    Some((dist, prev))
}

/// `Σ_{k ≥ 1} ν(Y_k)·δ_k` where `Y_k` holds the support points of `ν` at
/// distance `k` from `supp(ν')`.
pub fn distance_class_bound<D, G>(nu: &DiscreteMeasure, nu_prime: &DiscreteMeasure, mut distance: D, mut delta: G) -> Result<f64>
where
    D: FnMut(&Outcome, &Outcome) -> Result<Option<usize>>,
    G: FnMut(usize) -> f64,
{
    let mut acc = CompensatedSum::new();
    for (y, m) in nu.iter() {
        let mut best: Option<usize> = None;
        for yp in nu_prime.support() {
            if let Some(d) = distance(y, yp)? {
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        match best {
            Some(0) => {}
            Some(k) => acc.add(m * delta(k)),
            None => return Err(Error::Unreachable("given")),
        }
    }
    Ok(acc.value())
}

/// Distance between encoded multisets, with unreachable pairs mapped to `None`.
pub fn relation_distance(relation: NeighborRelation) -> impl Fn(&Outcome, &Outcome) -> Result<Option<usize>> {
    move |a, b| match encoded_distance(a.as_str(), b.as_str(), relation) {
        Ok(d) => Ok(Some(d)),
        Err(Error::Unreachable(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Whether some coupling of `ν` and `ν'` only uses pairs `(y, y')` with
/// `d(y, y') = d(y, supp ν')`.
///
/// Decided by max-flow on the bipartite graph of admissible pairs: compatible
/// exactly when the flow saturates `ν`. A support point with no reachable
/// partner makes the pair incompatible.
pub fn is_distance_compatible(nu: &DiscreteMeasure, nu_prime: &DiscreteMeasure, relation: NeighborRelation) -> Result<bool> {
    is_compatible_with(nu, nu_prime, relation_distance(relation))
}

/// [`is_distance_compatible`] for an arbitrary distance.
pub fn is_compatible_with<D>(nu: &DiscreteMeasure, nu_prime: &DiscreteMeasure, mut distance: D) -> Result<bool>
where
    D: FnMut(&Outcome, &Outcome) -> Result<Option<usize>>,
{
    check_marginals(nu, nu_prime)?;
    let left: Vec<(&Outcome, f64)> = nu.iter().collect();
    let right: Vec<(&Outcome, f64)> = nu_prime.iter().collect();
    let (a, b) = (left.len(), right.len());
    let source = 0;
    let sink = a + b + 1;
    let mut g = Graph::new(a + b + 2);
    for (i, &(y, m)) in left.iter().enumerate() {
        g.add_edge(source, 1 + i, m, 0.0);
        let dists: Vec<Option<usize>> = right.iter().map(|(yp, _)| distance(y, yp)).collect::<Result<_>>()?;
        let Some(best) = dists.iter().flatten().min().copied() else {
            return Ok(false);
        };
        for (j, d) in dists.iter().enumerate() {
            if *d == Some(best) {
                g.add_edge(1 + i, 1 + a + j, f64::INFINITY, 0.0);
            }
        }
    }
    for (j, &(_, m)) in right.iter().enumerate() {
        g.add_edge(1 + a + j, sink, m, 0.0);
    }
    let flow = dinic(&mut g, source, sink);
    Ok((flow - nu.total_mass()).abs() <= MARGINAL_TOLERANCE)
}

fn dinic(g: &mut Graph, source: usize, sink: usize) -> f64 {
    let n = g.adj.len();
    let mut total = CompensatedSum::new();
    loop {
        let mut level = vec![usize::MAX; n];
        level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for e in &g.adj[u] {
                if e.cap > CAPACITY_EPS && level[e.to] == usize::MAX {
                    level[e.to] = level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        if level[sink] == usize::MAX {
            return total.value();
        }
        let mut next = vec![0usize; n];
        loop {
            let pushed = augment(g, source, sink, f64::INFINITY, &level, &mut next);
            if pushed <= CAPACITY_EPS {
                break;
            }
            total.add(pushed);
        }
    }
}

fn augment(g: &mut Graph, u: usize, sink: usize, limit: f64, level: &[usize], next: &mut [usize]) -> f64 {
    if u == sink {
        return limit;
    }
    while next[u] < g.adj[u].len() {
        let idx = next[u];
        let (to, cap) = (g.adj[u][idx].to, g.adj[u][idx].cap);
        if cap > CAPACITY_EPS && level[to] == level[u] + 1 {
            let pushed = augment(g, to, sink, limit.min(cap), level, next);
            if pushed > CAPACITY_EPS {
                g.push(u, idx, pushed);
                return pushed;
            }
        }
        next[u] += 1;
    }
    0.0
}
