//! Cut graphs, their connected components, and a caching cut-value evaluator shared by the
//! Gaussian and linear deterministic models.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::net::{ChannelModel, Network, NodeId, NodeSet};
use crate::schedule::{Cut, GroupSchedule, Schedule};
use crate::{gauss, lindet};

/// Subgraph keeping only the edges from `Ω` to `Ω^c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutGraph {
    pub omega: NodeSet,
    pub kept_edges: Vec<(NodeId, NodeId)>,
    /// Connected components of the undirected kept edges, ordered by smallest member.
    /// Only nodes incident to a kept edge appear.
    pub components: Vec<NodeSet>,
}

pub fn cut_graph(net: &Network, cut: &Cut) -> CutGraph {
    let omega = cut.omega();
    let kept_edges = omega
        .iter()
        .flat_map(|u| net.out_neighbors(u).minus(omega).iter().map(move |v| (u, v)))
        .collect();
    CutGraph { omega, kept_edges, components: components(net, omega) }
}

pub(crate) fn components(net: &Network, omega: NodeSet) -> Vec<NodeSet> {
    let n = net.num_nodes();
    let outside = omega.complement(n);
    let adj = |v: NodeId| {
        if omega.contains(v) {
            net.out_neighbors(v).intersect(outside)
        } else {
            net.in_neighbors(v).intersect(omega)
        }
    };
    let mut seen = NodeSet::EMPTY;
    let mut comps = Vec::new();
    for v in 0..n {
        if seen.contains(v) || adj(v).is_empty() {
            continue;
        }
        let mut comp = NodeSet::singleton(v);
        let mut frontier = comp;
        while !frontier.is_empty() {
            let mut next = NodeSet::EMPTY;
            for u in frontier.iter() {
                next = next.union(adj(u));
            }
            frontier = next.minus(comp);
            comp = comp.union(next);
        }
        seen = seen.union(comp);
        comps.push(comp);
    }
    comps
}

/// Evaluates set-to-set cut values for one network, memoizing on `(transmitters, receivers)`.
///
/// Values are bits for Gaussian models and ranks for linear deterministic ones.
pub struct CutEvaluator<'a> {
    net: &'a Network,
    cache: RefCell<HashMap<(NodeSet, NodeSet), f64>>,
}

const CACHE_LIMIT: usize = 1 << 21;

impl<'a> CutEvaluator<'a> {
    pub fn new(net: &'a Network) -> Self {
        CutEvaluator { net, cache: RefCell::new(HashMap::new()) }
    }

    pub fn network(&self) -> &'a Network {
        self.net
    }

    /// Value of the channel from `tx` to `rx`.
    pub fn set_value(&self, tx: NodeSet, rx: NodeSet) -> f64 {
        if tx.is_empty() || rx.is_empty() {
            return 0.0;
        }
        if let Some(&v) = self.cache.borrow().get(&(tx, rx)) {
            return v;
        }
        let v = match self.net.model() {
            ChannelModel::LinearDeterministic { .. } => lindet::set_rank(self.net, tx, rx) as f64,
            _ => gauss::set_mutual_info(self.net, tx, rx),
        };
        let mut cache = self.cache.borrow_mut();
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert((tx, rx), v);
        v
    }

    /// Half-duplex value of `omega` when `tx` transmits and everybody else receives.
    pub fn mode_value(&self, omega: NodeSet, tx: NodeSet) -> f64 {
        let n = self.net.num_nodes();
        self.set_value(omega.intersect(tx), omega.complement(n).minus(tx))
    }

    /// Full-duplex value of `omega`: every node both transmits and receives.
    pub fn full_duplex_value(&self, omega: NodeSet) -> f64 {
        self.set_value(omega, omega.complement(self.net.num_nodes()))
    }

    pub fn expected(&self, omega: NodeSet, q: &Schedule) -> f64 {
        q.iter().map(|(m, p)| p * self.mode_value(omega, m)).sum()
    }

    pub fn components(&self, omega: NodeSet) -> Vec<NodeSet> {
        components(self.net, omega)
    }

    /// Value of one component under a local distribution restricted to it.
    pub(crate) fn component_value(&self, omega: NodeSet, comp: NodeSet, local: &BTreeMap<NodeSet, f64>) -> f64 {
        let mut marg: BTreeMap<NodeSet, f64> = BTreeMap::new();
        for (&m, &p) in local {
            *marg.entry(m.intersect(comp)).or_insert(0.0) += p;
        }
        let inside = comp.intersect(omega);
        let outside = comp.minus(omega);
        marg.iter()
            .map(|(&m, &p)| p * self.set_value(inside.intersect(m), outside.minus(m)))
            .sum()
    }

    /// Decomposed value given group node sets and their local distributions.
    pub(crate) fn decomposed(
        &self,
        omega: NodeSet,
        groups: &[NodeSet],
        locals: &[BTreeMap<NodeSet, f64>],
    ) -> Result<f64> {
        let mut total = 0.0;
        for comp in self.components(omega) {
            let r = covering_group(groups, comp)
                .ok_or(Error::ComponentNotCovered { cut: omega, component: comp })?;
            total += self.component_value(omega, comp, &locals[r]);
        }
        Ok(total)
    }
}

/// Index of the first group containing `comp`.
pub(crate) fn covering_group(groups: &[NodeSet], comp: NodeSet) -> Option<usize> {
    groups.iter().position(|&g| comp.is_subset_of(g))
}

pub(crate) fn decomposed_cut_value_any(net: &Network, cut: &Cut, locals: &GroupSchedule) -> Result<f64> {
    let groups: Vec<NodeSet> = (0..locals.groups().len()).map(|i| locals.group_set(i)).collect();
    let maps: Vec<BTreeMap<NodeSet, f64>> = (0..groups.len()).map(|i| locals.local(i).clone()).collect();
    CutEvaluator::new(net).decomposed(cut.omega(), &groups, &maps)
}
