//! Relay network data model: nodes, channel gains, and random generators.
//!
//! Node sets are stored as 64-bit masks, so a network holds at most 64 nodes.
//! Dense schedule paths are capped far below that anyway.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, NetworkViolation, Result};
use crate::lindet::FieldMatrix;

pub type NodeId = usize;

pub const MAX_NODES: usize = 64;

/// A set of nodes, bit `v` set iff node `v` is a member.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeSet(pub u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn singleton(v: NodeId) -> Self {
        NodeSet(1 << v)
    }

    /// The set `{0, 1, .., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    pub fn from_nodes<I: IntoIterator<Item = NodeId>>(nodes: I) -> Self {
        nodes.into_iter().fold(NodeSet::EMPTY, |s, v| s.with(v))
    }

    #[inline]
    pub fn contains(self, v: NodeId) -> bool {
        self.0 >> v & 1 == 1
    }

    #[inline]
    pub fn with(self, v: NodeId) -> Self {
        NodeSet(self.0 | 1 << v)
    }

    #[inline]
    pub fn without(self, v: NodeId) -> Self {
        NodeSet(self.0 & !(1 << v))
    }

    #[inline]
    pub fn union(self, other: NodeSet) -> Self {
        NodeSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersect(self, other: NodeSet) -> Self {
        NodeSet(self.0 & other.0)
    }

    #[inline]
    pub fn minus(self, other: NodeSet) -> Self {
        NodeSet(self.0 & !other.0)
    }

    /// Complement within `{0, .., n-1}`.
    #[inline]
    pub fn complement(self, n: usize) -> Self {
        NodeSet::full(n).minus(self)
    }

    #[inline]
    pub fn is_subset_of(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = NodeId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(v)
            }
        })
    }

    pub fn to_vec(self) -> Vec<NodeId> {
        self.iter().collect()
    }
}

impl std::fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        NodeSet::from_nodes(iter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    GaussianReal,
    GaussianComplex,
    /// Vectors of length `k` over the prime field `F_p`.
    LinearDeterministic { p: u64, k: usize },
}

impl ChannelModel {
    pub fn is_gaussian(&self) -> bool {
        matches!(self, Self::GaussianReal | Self::GaussianComplex)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GainValue {
    Real(f64),
    Complex { re: f64, im: f64 },
    /// ADT shift level `n`, expanding to `S^(k-n)`.
    Shift(usize),
    /// Explicit `k x k` matrix over `F_p`, row-major.
    Matrix(Vec<Vec<u64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub gain: GainValue,
}

impl Edge {
    pub fn new(from: NodeId, to: NodeId, gain: GainValue) -> Self {
        Edge { from, to, gain }
    }
}

/// A validated relay network. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Network {
    num_nodes: usize,
    source: NodeId,
    destination: NodeId,
    model: ChannelModel,
    edges: Vec<Edge>,
    out_nbrs: Vec<NodeSet>,
    in_nbrs: Vec<NodeSet>,
    // Dense gains indexed [to * n + from]; zero where there is no edge.
    gauss: Vec<Complex64>,
    field: Vec<Option<FieldMatrix>>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.num_nodes == other.num_nodes
            && self.source == other.source
            && self.destination == other.destination
            && self.model == other.model
            && self.edges == other.edges
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Network {
    /// Validates and builds a network. Every violation is reported, not just the first.
    pub fn new(
        num_nodes: usize,
        source: NodeId,
        destination: NodeId,
        model: ChannelModel,
        edges: Vec<Edge>,
    ) -> Result<Network> {
        let mut violations = Vec::new();
        if num_nodes > MAX_NODES {
            return Err(Error::InvalidNetwork(vec![NetworkViolation::TooManyNodes(num_nodes)]));
        }
        if source >= num_nodes {
            violations.push(NetworkViolation::NodeOutOfRange(source));
        }
        if destination >= num_nodes {
            violations.push(NetworkViolation::NodeOutOfRange(destination));
        }
        if source == destination {
            violations.push(NetworkViolation::SourceEqualsDestination);
        }
        if let ChannelModel::LinearDeterministic { p, .. } = model {
            if !is_prime(p) {
                violations.push(NetworkViolation::NotPrime(p));
            }
        }

        let n = num_nodes;
        let mut out_nbrs = vec![NodeSet::EMPTY; n];
        let mut in_nbrs = vec![NodeSet::EMPTY; n];
        let mut gauss = vec![Complex64::new(0.0, 0.0); n * n];
        let mut field = vec![None; n * n];

        for e in &edges {
            let (u, v) = (e.from, e.to);
            if u >= n || v >= n {
                violations.push(NetworkViolation::NodeOutOfRange(u.max(v)));
                continue;
            }
            if u == v {
                violations.push(NetworkViolation::SelfLoop(u));
                continue;
            }
            if out_nbrs[u].contains(v) {
                violations.push(NetworkViolation::DuplicateEdge(u, v));
                continue;
            }
            out_nbrs[u] = out_nbrs[u].with(v);
            in_nbrs[v] = in_nbrs[v].with(u);
            match (model, &e.gain) {
                (ChannelModel::GaussianReal, GainValue::Real(h)) => {
                    if !h.is_finite() {
                        violations.push(NetworkViolation::NonFiniteGain(u, v));
                    }
                    gauss[v * n + u] = Complex64::new(*h, 0.0);
                }
                (ChannelModel::GaussianComplex, GainValue::Complex { re, im }) => {
                    if !re.is_finite() || !im.is_finite() {
                        violations.push(NetworkViolation::NonFiniteGain(u, v));
                    }
                    gauss[v * n + u] = Complex64::new(*re, *im);
                }
                (ChannelModel::LinearDeterministic { p, k }, GainValue::Shift(level)) => {
                    if *level > k {
                        violations.push(NetworkViolation::BadShiftLevel(u, v));
                    } else if is_prime(p) {
                        field[v * n + u] = Some(FieldMatrix::shift_power(p, k, k - level));
                    }
                }
                (ChannelModel::LinearDeterministic { p, k }, GainValue::Matrix(rows)) => {
                    let shape_ok = rows.len() == k && rows.iter().all(|r| r.len() == k);
                    let reduced = rows.iter().flatten().all(|&x| x < p);
                    if !shape_ok || !reduced {
                        violations.push(NetworkViolation::BadFieldMatrix(u, v));
                    } else if is_prime(p) {
                        field[v * n + u] = Some(FieldMatrix::from_rows(p, rows));
                    }
                }
                _ => violations.push(NetworkViolation::BadGainVariant(u, v)),
            }
        }

        if !violations.is_empty() {
            return Err(Error::InvalidNetwork(violations));
        }
        Ok(Network {
            num_nodes,
            source,
            destination,
            model,
            edges,
            out_nbrs,
            in_nbrs,
            gauss,
            field,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn destination(&self) -> NodeId {
        self.destination
    }

    pub fn model(&self) -> ChannelModel {
        self.model
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::full(self.num_nodes)
    }

    /// Relays: every node except source and destination.
    pub fn relays(&self) -> NodeSet {
        self.all_nodes().without(self.source).without(self.destination)
    }

    pub fn out_neighbors(&self, v: NodeId) -> NodeSet {
        self.out_nbrs[v]
    }

    pub fn in_neighbors(&self, v: NodeId) -> NodeSet {
        self.in_nbrs[v]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_nbrs[u].contains(v)
    }

    /// Gain of `u -> v` as a complex scalar (zero when absent). Gaussian models only.
    #[inline]
    pub(crate) fn gauss_gain(&self, u: NodeId, v: NodeId) -> Complex64 {
        self.gauss[v * self.num_nodes + u]
    }

    pub(crate) fn field_gain(&self, u: NodeId, v: NodeId) -> Option<&FieldMatrix> {
        self.field[v * self.num_nodes + u].as_ref()
    }

    /// Returns a copy with every Gaussian gain multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Network> {
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let gain = match e.gain {
                    GainValue::Real(h) => GainValue::Real(h * factor),
                    GainValue::Complex { re, im } => GainValue::Complex {
                        re: re * factor,
                        im: im * factor,
                    },
                    ref g => g.clone(),
                };
                Edge::new(e.from, e.to, gain)
            })
            .collect();
        Network::new(self.num_nodes, self.source, self.destination, self.model, edges)
    }

    /// Layer structure when every edge goes from hop-distance `d` to `d + 1`,
    /// the source alone forms the first layer and the destination alone the last.
    pub fn layers(&self) -> Option<Vec<Vec<NodeId>>> {
        let n = self.num_nodes;
        let mut dist = vec![usize::MAX; n];
        dist[self.source] = 0;
        let mut frontier = vec![self.source];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &u in &frontier {
                for v in self.out_nbrs[u].iter() {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        if dist.contains(&usize::MAX) {
            return None;
        }
        if self.edges.iter().any(|e| dist[e.to] != dist[e.from] + 1) {
            return None;
        }
        let depth = dist[self.destination];
        let mut layers = vec![Vec::new(); depth + 1];
        for v in 0..n {
            if dist[v] > depth {
                return None;
            }
            layers[dist[v]].push(v);
        }
        if layers[depth] != vec![self.destination] || layers.iter().any(|l| l.is_empty()) {
            return None;
        }
        Some(layers)
    }
}

/// Gain distribution for random generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainDist {
    /// Every real gain equal to 1.
    Unit,
    /// Real gains drawn i.i.d. `N(0, P)`.
    Gaussian(f64),
    /// Complex gains drawn i.i.d. `CN(0, P)`.
    ComplexGaussian(f64),
    /// ADT shift levels uniform on `0..=k` over `F_p`.
    AdtShift { p: u64, k: usize },
}

impl GainDist {
    fn model(&self) -> ChannelModel {
        match *self {
            GainDist::Unit | GainDist::Gaussian(_) => ChannelModel::GaussianReal,
            GainDist::ComplexGaussian(_) => ChannelModel::GaussianComplex,
            GainDist::AdtShift { p, k } => ChannelModel::LinearDeterministic { p, k },
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> GainValue {
        use rand::RngExt;
        match *self {
            GainDist::Unit => GainValue::Real(1.0),
            GainDist::Gaussian(p) => {
                let z: f64 = StandardNormal.sample(rng);
                GainValue::Real(z * p.sqrt())
            }
            GainDist::ComplexGaussian(p) => {
                let s = (p / 2.0).sqrt();
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                GainValue::Complex { re: re * s, im: im * s }
            }
            GainDist::AdtShift { k, .. } => GainValue::Shift(rng.random_range(0..=k)),
        }
    }
}

/// Layered network with full connections between consecutive layers.
///
/// `widths[0]` and the last width must be 1 (source and destination); nodes are numbered
/// layer by layer, so the source is node 0 and the destination is the last node.
pub fn gen_layered(widths: &[usize], dist: GainDist, seed: u64) -> Result<Network> {
    if widths.len() < 2 {
        return Err(Error::BadWidths(format!("need at least 2 layers, got {}", widths.len())));
    }
    if widths[0] != 1 || widths[widths.len() - 1] != 1 {
        return Err(Error::BadWidths("first and last layers must have width 1".into()));
    }
    if widths.contains(&0) {
        return Err(Error::BadWidths("empty layer".into()));
    }
    let n: usize = widths.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = Vec::with_capacity(widths.len());
    let mut acc = 0;
    for &w in widths {
        starts.push(acc);
        acc += w;
    }
    let mut edges = Vec::new();
    for l in 0..widths.len() - 1 {
        for u in starts[l]..starts[l] + widths[l] {
            for v in starts[l + 1]..starts[l + 1] + widths[l + 1] {
                edges.push(Edge::new(u, v, dist.draw(&mut rng)));
            }
        }
    }
    Network::new(n, 0, n - 1, dist.model(), edges)
}

/// Line network with one- and two-hop links on `n` nodes; source 0, destination `n - 1`.
pub fn gen_line_two_hop(n: usize, dist: GainDist, seed: u64) -> Result<Network> {
    if n < 3 {
        return Err(Error::BadSize(format!("line network needs at least 3 nodes, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n - 1 {
        edges.push(Edge::new(i, i + 1, dist.draw(&mut rng)));
    }
    for i in 0..n - 2 {
        edges.push(Edge::new(i, i + 2, dist.draw(&mut rng)));
    }
    Network::new(n, 0, n - 1, dist.model(), edges)
}

/// The seven-node, five-relay example network: `S=0`, relays `1..=5`, `D=6`.
///
/// Edges: `S->1, S->2, 1->3, 1->5, 2->3, 2->5, 3->4, 4->D, 5->D`.
pub fn gen_five_relay(dist: GainDist, seed: u64) -> Result<Network> {
    let pairs = [(0, 1), (0, 2), (1, 3), (1, 5), (2, 3), (2, 5), (3, 4), (4, 6), (5, 6)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = pairs
        .iter()
        .map(|&(u, v)| Edge::new(u, v, dist.draw(&mut rng)))
        .collect();
    Network::new(7, 0, 6, dist.model(), edges)
}
