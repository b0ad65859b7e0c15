//! Node groupings whose members cover every cut-graph component, and tree decompositions
//! that let consistent local schedules extend to a joint one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cutgraph::{components, covering_group};
use crate::error::{Error, Result};
use crate::net::{Network, NodeId, NodeSet};
use crate::schedule::{GroupSchedule, Schedule, CONSISTENCY_TOL};

/// Largest relay count for exhaustive cut enumeration and dense joint reconstruction.
pub const EXHAUSTIVE_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeGrouping {
    groups: Vec<NodeSet>,
}

impl NodeGrouping {
    /// Groups must jointly cover all `num_nodes` nodes.
    pub fn new(num_nodes: usize, groups: Vec<NodeSet>) -> Result<Self> {
        let covered = groups.iter().fold(NodeSet::EMPTY, |a, &g| a.union(g));
        let missing = NodeSet::full(num_nodes).minus(covered);
        if !missing.is_empty() {
            return Err(Error::GroupingInvalid(format!("nodes {missing:?} are in no group")));
        }
        if let Some(g) = groups.iter().find(|g| !g.is_subset_of(NodeSet::full(num_nodes))) {
            return Err(Error::GroupingInvalid(format!("group {g:?} names nodes outside the network")));
        }
        Ok(NodeGrouping { groups })
    }

    pub fn groups(&self) -> &[NodeSet] {
        &self.groups
    }

    pub fn max_group_size(&self) -> usize {
        self.groups.iter().map(|g| g.len()).max().unwrap_or(0)
    }
}

/// Members of `g` with an edge to another member.
fn transmitters_in(net: &Network, g: NodeSet) -> NodeSet {
    g.iter().filter(|&v| !net.out_neighbors(v).intersect(g).is_empty()).collect()
}

/// Members of `g` with an edge from another member.
fn receivers_in(net: &Network, g: NodeSet) -> NodeSet {
    g.iter().filter(|&v| !net.in_neighbors(v).intersect(g).is_empty()).collect()
}

/// Closure grouping: seed a node that is not yet a transmitter anywhere, pull in its
/// out-neighbors, then alternately add in-neighbors of receivers and out-neighbors of
/// transmitters until nothing changes.
///
/// Nodes without out-edges can never be transmitters; any such node left uncovered gets a
/// singleton group.
pub fn heuristic_grouping(net: &Network) -> NodeGrouping {
    let n = net.num_nodes();
    let mut groups = Vec::new();
    let mut done = NodeSet::EMPTY;
    for v in 0..n {
        if done.contains(v) || net.out_neighbors(v).is_empty() {
            continue;
        }
        let mut g = NodeSet::singleton(v).union(net.out_neighbors(v));
        loop {
            let mut next = g;
            for u in receivers_in(net, g).iter() {
                next = next.union(net.in_neighbors(u));
            }
            for u in transmitters_in(net, next).iter() {
                next = next.union(net.out_neighbors(u));
            }
            if next == g {
                break;
            }
            g = next;
        }
        done = done.union(transmitters_in(net, g));
        groups.push(g);
    }
    let covered = groups.iter().fold(NodeSet::EMPTY, |a, &g| a.union(g));
    for v in NodeSet::full(n).minus(covered).iter() {
        groups.push(NodeSet::singleton(v));
    }
    NodeGrouping { groups }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionViolation {
    NotCovered { node: NodeId },
    NeverTransmitter { node: NodeId },
    MissingOutNeighbor { group: usize, transmitter: NodeId, missing: NodeId },
    MissingInNeighbor { group: usize, receiver: NodeId, missing: NodeId },
}

/// Checks the three structural bullets (transmitter somewhere, out-closure, in-closure)
/// and returns every violation. The first bullet only applies to nodes with out-edges.
pub fn check_sufficient_conditions(net: &Network, grouping: &NodeGrouping) -> (bool, Vec<ConditionViolation>) {
    let mut out = Vec::new();
    let n = net.num_nodes();
    let covered = grouping.groups.iter().fold(NodeSet::EMPTY, |a, &g| a.union(g));
    for v in NodeSet::full(n).minus(covered).iter() {
        out.push(ConditionViolation::NotCovered { node: v });
    }
    let mut tx_any = NodeSet::EMPTY;
    for (gi, &g) in grouping.groups.iter().enumerate() {
        let tx = transmitters_in(net, g);
        tx_any = tx_any.union(tx);
        for t in tx.iter() {
            for missing in net.out_neighbors(t).minus(g).iter() {
                out.push(ConditionViolation::MissingOutNeighbor { group: gi, transmitter: t, missing });
            }
        }
        for r in receivers_in(net, g).iter() {
            for missing in net.in_neighbors(r).minus(g).iter() {
                out.push(ConditionViolation::MissingInNeighbor { group: gi, receiver: r, missing });
            }
        }
    }
    for v in 0..n {
        if !net.out_neighbors(v).is_empty() && !tx_any.contains(v) {
            out.push(ConditionViolation::NeverTransmitter { node: v });
        }
    }
    (out.is_empty(), out)
}

/// Enumerates every cut and checks that each cut-graph component lies in some group.
pub fn check_p1_exhaustive(net: &Network, grouping: &NodeGrouping) -> Result<bool> {
    let relays = net.relays().to_vec();
    if relays.len() > EXHAUSTIVE_CAP {
        return Err(Error::GroundSetTooLarge { size: relays.len(), cap: EXHAUSTIVE_CAP });
    }
    let s = NodeSet::singleton(net.source());
    for bits in 0..1u64 << relays.len() {
        let omega = relays.iter().enumerate().filter(|(j, _)| bits >> j & 1 == 1).fold(s, |a, (_, &v)| a.with(v));
        if components(net, omega).into_iter().any(|c| covering_group(&grouping.groups, c).is_none()) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    adj: Vec<NodeSet>,
}

impl UndirectedGraph {
    pub fn new(num_nodes: usize) -> Self {
        UndirectedGraph { adj: vec![NodeSet::EMPTY; num_nodes] }
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) {
        if u != v {
            self.adj[u] = self.adj[u].with(v);
            self.adj[v] = self.adj[v].with(u);
        }
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u].contains(v)
    }

    pub fn neighbors(&self, v: NodeId) -> NodeSet {
        self.adj[v]
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        (0..self.adj.len()).flat_map(|u| self.adj[u].iter().filter(move |&v| v > u).map(move |v| (u, v))).collect()
    }
}

/// Undirected version of the network with every group turned into a clique.
pub fn build_clique_graph(net: &Network, grouping: &NodeGrouping) -> UndirectedGraph {
    let mut g = UndirectedGraph::new(net.num_nodes());
    for e in net.edges() {
        g.add_edge(e.from, e.to);
    }
    for grp in &grouping.groups {
        let members = grp.to_vec();
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                g.add_edge(u, v);
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<NodeSet>,
    pub tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(1).saturating_sub(1)
    }

    pub fn grouping(&self) -> NodeGrouping {
        NodeGrouping { groups: self.bags.clone() }
    }

    /// Path decomposition over `bags` in the given order.
    pub fn path(bags: Vec<NodeSet>) -> Self {
        let tree_edges = (1..bags.len()).map(|i| (i - 1, i)).collect();
        TreeDecomposition { bags, tree_edges }
    }

    /// Checks coverage, edge containment, running intersection, and that the tree is a tree.
    pub fn verify(&self, graph: &UndirectedGraph) -> std::result::Result<(), String> {
        let k = self.bags.len();
        if k == 0 {
            return Err("no bags".into());
        }
        if self.tree_edges.len() != k - 1 {
            return Err(format!("{} tree edges for {k} bags", self.tree_edges.len()));
        }
        let mut tree_adj = vec![Vec::new(); k];
        for &(a, b) in &self.tree_edges {
            if a >= k || b >= k || a == b {
                return Err(format!("bad tree edge ({a}, {b})"));
            }
            tree_adj[a].push(b);
            tree_adj[b].push(a);
        }
        if reach(&tree_adj, 0, |_| true).len() != k {
            return Err("tree is disconnected".into());
        }
        let covered = self.bags.iter().fold(NodeSet::EMPTY, |a, &b| a.union(b));
        if covered != NodeSet::full(graph.num_nodes()) {
            return Err(format!("bags miss {:?}", NodeSet::full(graph.num_nodes()).minus(covered)));
        }
        for (u, v) in graph.edges() {
            if !self.bags.iter().any(|b| b.contains(u) && b.contains(v)) {
                return Err(format!("edge ({u}, {v}) not inside any bag"));
            }
        }
        for v in 0..graph.num_nodes() {
            let holding: Vec<usize> = (0..k).filter(|&i| self.bags[i].contains(v)).collect();
            if reach(&tree_adj, holding[0], |i| self.bags[i].contains(v)).len() != holding.len() {
                return Err(format!("bags holding {v} are not connected"));
            }
        }
        Ok(())
    }

    /// Per-bag tree neighbors.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.tree_edges
            .iter()
            .filter_map(|&(a, b)| if a == i { Some(b) } else if b == i { Some(a) } else { None })
            .collect()
    }
}

fn reach(adj: &[Vec<usize>], start: usize, allowed: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    let mut out = Vec::new();
    seen[start] = true;
    while let Some(i) = stack.pop() {
        out.push(i);
        for &j in &adj[i] {
            if !seen[j] && allowed(j) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    out
}

/// Tree decomposition by min-fill node elimination.
///
/// Ties go to smaller degree, then lower index. Each bag's parent is the bag of its
/// earliest-eliminated neighbor; bags contained in a tree neighbor are merged into it and
/// separate trees are chained at their roots.
pub fn tree_decompose(graph: &UndirectedGraph) -> Result<TreeDecomposition> {
    let n = graph.num_nodes();
    let mut adj: Vec<NodeSet> = (0..n).map(|v| graph.neighbors(v)).collect();
    let mut remaining = NodeSet::full(n);
    let mut order = Vec::with_capacity(n);
    let mut bag_of = vec![NodeSet::EMPTY; n];
    let mut nbrs_at_elim = vec![NodeSet::EMPTY; n];
    while !remaining.is_empty() {
        let v = remaining
            .iter()
            .min_by_key(|&v| {
                let nb = adj[v].intersect(remaining).to_vec();
                let mut fill = 0usize;
                for (i, &a) in nb.iter().enumerate() {
                    for &b in &nb[i + 1..] {
                        if !adj[a].contains(b) {
                            fill += 1;
                        }
                    }
                }
                (fill, nb.len(), v)
            })
            .expect("nonempty");
        let nb = adj[v].intersect(remaining);
        for a in nb.iter() {
            adj[a] = adj[a].union(nb.without(a));
        }
        bag_of[v] = nb.with(v);
        nbrs_at_elim[v] = nb;
        remaining = remaining.without(v);
        order.push(v);
    }
    let mut pos = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    // Bag i belongs to order[i].
    let mut bags: Vec<NodeSet> = order.iter().map(|&v| bag_of[v]).collect();
    let mut parent: Vec<Option<usize>> = order
        .iter()
        .map(|&v| nbrs_at_elim[v].iter().map(|u| pos[u]).min())
        .collect();
    let mut alive = vec![true; n];

    // Merge bags contained in a tree neighbor.
    loop {
        let mut merged = false;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            let Some(p) = parent[i] else { continue };
            let (keep, drop) = if bags[i].is_subset_of(bags[p]) {
                (p, i)
            } else if bags[p].is_subset_of(bags[i]) {
                (i, p)
            } else {
                continue;
            };
            alive[drop] = false;
            let new_parent = if drop == p { parent[p] } else { parent[i] };
            let new_parent = new_parent.filter(|&x| x != keep);
            for j in 0..n {
                if alive[j] && j != keep && parent[j] == Some(drop) {
                    parent[j] = Some(keep);
                }
            }
            parent[keep] = new_parent;
            bags[drop] = NodeSet::EMPTY;
            merged = true;
        }
        if !merged {
            break;
        }
    }

    let live: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    let mut index = vec![usize::MAX; n];
    for (k, &i) in live.iter().enumerate() {
        index[i] = k;
    }
    let mut tree_edges = Vec::new();
    let mut roots = Vec::new();
    for &i in &live {
        match parent[i] {
            Some(p) => tree_edges.push((index[i], index[p])),
            None => roots.push(index[i]),
        }
    }
    for w in roots.windows(2) {
        tree_edges.push((w[0], w[1]));
    }
    let td = TreeDecomposition { bags: live.iter().map(|&i| bags[i]).collect(), tree_edges };
    td.verify(graph).map_err(Error::InternalVerificationFailure)?;
    Ok(td)
}

/// Heuristic grouping followed by a min-fill tree decomposition of its clique graph.
pub fn decompose(net: &Network, grouping: &NodeGrouping) -> Result<TreeDecomposition> {
    tree_decompose(&build_clique_graph(net, grouping))
}

/// Groups `𝒱_i ∪ 𝒱_{i+1}` over consecutive layers.
pub fn layered_grouping(net: &Network) -> Result<NodeGrouping> {
    let layers = net.layers().ok_or(Error::NotLayered)?;
    let sets: Vec<NodeSet> = layers.iter().map(|l| NodeSet::from_nodes(l.iter().copied())).collect();
    Ok(NodeGrouping { groups: sets.windows(2).map(|w| w[0].union(w[1])).collect() })
}

/// Path decomposition over the consecutive-layer groups.
pub fn layered_decomposition(net: &Network) -> Result<TreeDecomposition> {
    Ok(TreeDecomposition::path(layered_grouping(net)?.groups))
}

fn is_line_two_hop(net: &Network) -> bool {
    net.edges().iter().all(|e| e.to > e.from && e.to - e.from <= 2)
}

/// Windows `{i, …, i+3}` for networks whose edges only skip ahead by one or two nodes.
pub fn line_two_hop_grouping(net: &Network) -> Result<NodeGrouping> {
    if !is_line_two_hop(net) {
        return Err(Error::GroupingInvalid("edges must go from i to i+1 or i+2".into()));
    }
    let n = net.num_nodes();
    let groups = if n <= 4 {
        vec![NodeSet::full(n)]
    } else {
        (0..=n - 4).map(|i| NodeSet::from_nodes(i..i + 4)).collect()
    };
    Ok(NodeGrouping { groups })
}

pub fn line_two_hop_decomposition(net: &Network) -> Result<TreeDecomposition> {
    Ok(TreeDecomposition::path(line_two_hop_grouping(net)?.groups))
}

/// Layered decomposition when the network is layered, otherwise heuristic plus min-fill.
pub fn auto_decomposition(net: &Network) -> Result<TreeDecomposition> {
    match layered_decomposition(net) {
        Ok(td) => Ok(td),
        Err(_) => decompose(net, &heuristic_grouping(net)),
    }
}

/// Joint schedule `Π_i q_i / Π_{tree edges} q_sep`, with `0/0 = 0`.
pub fn reconstruct_joint(td: &TreeDecomposition, locals: &GroupSchedule) -> Result<Schedule> {
    if locals.groups().len() != td.bags.len()
        || (0..td.bags.len()).any(|i| locals.group_set(i) != td.bags[i])
    {
        return Err(Error::GroupingInvalid("local schedules are not indexed by the bags".into()));
    }
    let universe = td.bags.iter().fold(NodeSet::EMPTY, |a, &b| a.union(b));
    let n = universe.iter().max().map_or(0, |v| v + 1);
    if universe.len() > EXHAUSTIVE_CAP {
        return Err(Error::GroundSetTooLarge { size: universe.len(), cap: EXHAUSTIVE_CAP });
    }
    let mut worst: f64 = 0.0;
    let mut seps: Vec<(NodeSet, BTreeMap<NodeSet, f64>)> = Vec::new();
    for &(a, b) in &td.tree_edges {
        let s = td.bags[a].intersect(td.bags[b]);
        let ma = locals.local_marginal(a, s);
        let mb = locals.local_marginal(b, s);
        for key in ma.keys().chain(mb.keys()) {
            let d = (ma.get(key).unwrap_or(&0.0) - mb.get(key).unwrap_or(&0.0)).abs();
            worst = worst.max(d);
        }
        seps.push((s, ma));
    }
    if worst > CONSISTENCY_TOL {
        return Err(Error::InconsistentMarginals { max_discrepancy: worst });
    }
    let mut entries = Vec::new();
    let members = universe.to_vec();
    for bits in 0..1u64 << members.len() {
        let m: NodeSet = members.iter().enumerate().filter(|(j, _)| bits >> j & 1 == 1).map(|(_, &v)| v).collect();
        let mut num = 1.0;
        for (i, &bag) in td.bags.iter().enumerate() {
            num *= locals.local(i).get(&m.intersect(bag)).copied().unwrap_or(0.0);
            if num == 0.0 {
                break;
            }
        }
        if num == 0.0 {
            continue;
        }
        let mut den = 1.0;
        for (s, marg) in &seps {
            den *= marg.get(&m.intersect(*s)).copied().unwrap_or(0.0);
        }
        if den > 0.0 {
            entries.push((m, num / den));
        }
    }
    Schedule::from_approximate(n, entries)
}
