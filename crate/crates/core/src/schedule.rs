//! Mode configurations, cuts, and schedules over them.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::net::{Network, NodeId, NodeSet};

/// Normalization tolerance for schedules and local distributions.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Maximum allowed disagreement between overlapping local marginals.
pub const CONSISTENCY_TOL: f64 = 1e-7;

/// One transmit/receive assignment for every node. A node in `tx` transmits; all others receive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeConfig {
    num_nodes: usize,
    tx: NodeSet,
}

impl ModeConfig {
    pub fn new(num_nodes: usize, transmitters: NodeSet) -> Result<Self> {
        if !transmitters.is_subset_of(NodeSet::full(num_nodes)) {
            return Err(Error::InvalidSchedule(format!(
                "mode {transmitters:?} names nodes outside 0..{num_nodes}"
            )));
        }
        Ok(ModeConfig { num_nodes, tx: transmitters })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn transmitters(&self) -> NodeSet {
        self.tx
    }

    pub fn receivers(&self) -> NodeSet {
        self.tx.complement(self.num_nodes)
    }

    pub fn is_transmitting(&self, v: NodeId) -> bool {
        self.tx.contains(v)
    }

    /// Bit string with character `v` equal to `'1'` iff node `v` transmits.
    pub fn to_bit_string(&self) -> String {
        (0..self.num_nodes).map(|v| if self.tx.contains(v) { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(s: &str) -> Result<Self> {
        let mut tx = NodeSet::EMPTY;
        for (v, c) in s.chars().enumerate() {
            match c {
                '1' => tx = tx.with(v),
                '0' => {}
                _ => return Err(Error::InvalidSchedule(format!("bad mode character {c:?} in {s:?}"))),
            }
        }
        ModeConfig::new(s.chars().count(), tx)
    }
}

/// A source-destination cut: the source is inside, the destination outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cut {
    omega: NodeSet,
}

impl Cut {
    pub fn new(net: &Network, omega: NodeSet) -> Result<Self> {
        if !omega.contains(net.source()) {
            return Err(Error::InvalidCut(format!("{omega:?} does not contain the source")));
        }
        if omega.contains(net.destination()) {
            return Err(Error::InvalidCut(format!("{omega:?} contains the destination")));
        }
        if !omega.is_subset_of(net.all_nodes()) {
            return Err(Error::InvalidCut(format!("{omega:?} names nodes outside the network")));
        }
        Ok(Cut { omega })
    }

    /// The cut `{S} ∪ relays` for a subset of relays.
    pub fn from_relays(net: &Network, relays: NodeSet) -> Result<Self> {
        Cut::new(net, relays.with(net.source()))
    }

    pub(crate) fn new_unchecked(omega: NodeSet) -> Self {
        Cut { omega }
    }

    pub fn omega(&self) -> NodeSet {
        self.omega
    }
}

/// A probability distribution over mode configurations, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    num_nodes: usize,
    entries: BTreeMap<NodeSet, f64>,
}

impl Schedule {
    /// Builds a schedule from `(transmitter set, probability)` pairs. Repeated modes are merged
    /// and zero entries dropped. Fails on negative mass or a total off from 1 by more than 1e-9.
    pub fn new<I>(num_nodes: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeSet, f64)>,
    {
        let full = NodeSet::full(num_nodes);
        let mut map = BTreeMap::new();
        for (m, p) in entries {
            if !m.is_subset_of(full) {
                return Err(Error::InvalidSchedule(format!("mode {m:?} outside 0..{num_nodes}")));
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidSchedule(format!("mode {m:?} has probability {p}")));
            }
            if p > 0.0 {
                *map.entry(m).or_insert(0.0) += p;
            }
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidSchedule(format!("probabilities sum to {total}")));
        }
        Ok(Schedule { num_nodes, entries: map })
    }

    pub fn point(num_nodes: usize, transmitters: NodeSet) -> Result<Self> {
        Schedule::new(num_nodes, [(transmitters, 1.0)])
    }

    /// Uniform over all `2^num_nodes` modes. Dense; intended for small networks.
    pub fn uniform(num_nodes: usize) -> Result<Self> {
        let count = 1u64 << num_nodes;
        let p = 1.0 / count as f64;
        Schedule::new(num_nodes, (0..count).map(|m| (NodeSet(m), p)))
    }

    /// Cleans an approximately valid vector (e.g. an LP solution): clamps small negatives to
    /// zero, drops entries below `1e-13`, and renormalizes.
    pub(crate) fn from_approximate<I>(num_nodes: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeSet, f64)>,
    {
        let cleaned: Vec<(NodeSet, f64)> =
            entries.into_iter().filter(|&(_, p)| p > 1e-13).collect();
        let total: f64 = cleaned.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidSchedule(format!("LP mass {total} far from 1")));
        }
        Schedule::new(num_nodes, cleaned.into_iter().map(|(m, p)| (m, p / total)))
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// `(transmitter set, probability)` pairs in increasing mask order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeSet, f64)> + '_ {
        self.entries.iter().map(|(&m, &p)| (m, p))
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn prob(&self, transmitters: NodeSet) -> f64 {
        self.entries.get(&transmitters).copied().unwrap_or(0.0)
    }

    /// Fraction of time node `v` transmits.
    pub fn duty_cycle(&self, v: NodeId) -> f64 {
        self.iter().filter(|(m, _)| m.contains(v)).map(|(_, p)| p).sum()
    }

    /// Sum of all nodes' duty cycles.
    pub fn total_duty(&self) -> f64 {
        self.iter().map(|(m, p)| p * m.len() as f64).sum()
    }

    /// Marginal over `subset`, keyed by the transmitters inside `subset`.
    pub fn marginal(&self, subset: NodeSet) -> BTreeMap<NodeSet, f64> {
        let mut out = BTreeMap::new();
        for (m, p) in self.iter() {
            *out.entry(m.intersect(subset)).or_insert(0.0) += p;
        }
        out
    }
}

/// Local distributions over group-restricted modes, one per group.
///
/// Local keys are transmitter sets restricted to the group's nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSchedule {
    groups: Vec<Vec<NodeId>>,
    locals: Vec<BTreeMap<NodeSet, f64>>,
}

impl GroupSchedule {
    /// Checks shape, nonnegativity, and normalization of every local distribution.
    /// Overlap consistency is checked separately by [`GroupSchedule::validate`].
    pub fn new(groups: Vec<Vec<NodeId>>, locals: Vec<BTreeMap<NodeSet, f64>>) -> Result<Self> {
        if groups.len() != locals.len() {
            return Err(Error::InvalidSchedule(format!(
                "{} groups but {} local distributions",
                groups.len(),
                locals.len()
            )));
        }
        let mut cleaned = Vec::with_capacity(locals.len());
        for (i, (g, local)) in groups.iter().zip(locals).enumerate() {
            let gset = NodeSet::from_nodes(g.iter().copied());
            if gset.len() != g.len() || g.iter().any(|&v| v >= crate::net::MAX_NODES) {
                return Err(Error::InvalidSchedule(format!("group {i} has repeated or out-of-range nodes")));
            }
            let mut total = 0.0;
            let mut map = BTreeMap::new();
            for (m, p) in local {
                if !m.is_subset_of(gset) {
                    return Err(Error::InvalidSchedule(format!("local mode {m:?} outside group {i}")));
                }
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(Error::InvalidSchedule(format!("group {i} mode {m:?} has probability {p}")));
                }
                total += p;
                if p > 0.0 {
                    map.insert(m, p);
                }
            }
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidSchedule(format!("group {i} sums to {total}")));
            }
            cleaned.push(map);
        }
        Ok(GroupSchedule { groups, locals: cleaned })
    }

    /// Marginalizes a joint schedule onto each group.
    pub fn from_joint(q: &Schedule, groups: Vec<Vec<NodeId>>) -> Result<Self> {
        let locals = groups
            .iter()
            .map(|g| q.marginal(NodeSet::from_nodes(g.iter().copied())))
            .collect();
        GroupSchedule::new(groups, locals)
    }

    pub fn groups(&self) -> &[Vec<NodeId>] {
        &self.groups
    }

    pub fn group_set(&self, i: usize) -> NodeSet {
        NodeSet::from_nodes(self.groups[i].iter().copied())
    }

    pub fn local(&self, i: usize) -> &BTreeMap<NodeSet, f64> {
        &self.locals[i]
    }

    /// Marginal of group `i`'s local distribution onto `subset ⊆ group`.
    pub fn local_marginal(&self, i: usize, subset: NodeSet) -> BTreeMap<NodeSet, f64> {
        let mut out = BTreeMap::new();
        for (&m, &p) in &self.locals[i] {
            *out.entry(m.intersect(subset)).or_insert(0.0) += p;
        }
        out
    }

    /// Duty cycle of node `v` read from the first group containing it.
    pub fn duty_cycle(&self, v: NodeId) -> Option<f64> {
        let i = self.groups.iter().position(|g| g.contains(&v))?;
        Some(self.locals[i].iter().filter(|(m, _)| m.contains(v)).map(|(_, p)| p).sum())
    }

    /// Largest absolute disagreement between the marginals of any two overlapping groups.
    pub fn max_consistency_discrepancy(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.groups.len() {
            for l in i + 1..self.groups.len() {
                let overlap = self.group_set(i).intersect(self.group_set(l));
                if overlap.is_empty() {
                    continue;
                }
                let a = self.local_marginal(i, overlap);
                let b = self.local_marginal(l, overlap);
                for key in a.keys().chain(b.keys()) {
                    let d = (a.get(key).unwrap_or(&0.0) - b.get(key).unwrap_or(&0.0)).abs();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    /// Full validation including pairwise overlap consistency.
    pub fn validate(&self) -> Result<()> {
        let d = self.max_consistency_discrepancy();
        if d > CONSISTENCY_TOL {
            return Err(Error::InconsistentMarginals { max_discrepancy: d });
        }
        Ok(())
    }
}
