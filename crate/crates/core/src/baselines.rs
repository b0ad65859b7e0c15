//! Reference schedules for layered networks and the full-duplex cut-set bound.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cutgraph::CutEvaluator;
use crate::error::{Error, Result};
use crate::net::{Network, NodeId, NodeSet};
use crate::schedule::Schedule;
use crate::sfm::{min_cut, CutFunction, CutObjective, SeparationMethod, DEFAULT_BRUTE_CAP, DEFAULT_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineKind {
    Naive,
    SimpleRandom { seed: u64 },
    FullDuplex,
}

fn layers(net: &Network) -> Result<Vec<Vec<NodeId>>> {
    net.layers().ok_or(Error::NotLayered)
}

fn two_phase(n: usize, first: NodeSet) -> Result<Schedule> {
    let second = NodeSet::full(n).minus(first);
    Schedule::new(n, [(first, 0.5), (second, 0.5)])
}

/// Even layers transmit in one half of the time, odd layers in the other.
pub fn naive_schedule(net: &Network) -> Result<Schedule> {
    let even: NodeSet = layers(net)?.iter().step_by(2).flatten().copied().collect();
    two_phase(net.num_nodes(), even)
}

/// Splits every relay layer into two seeded random halves of sizes `⌈w/2⌉` and `⌊w/2⌋`.
/// The first halves follow the naive parity and the second halves the opposite one; the
/// source always transmits and the destination always receives.
pub fn simple_random_schedule(net: &Network, seed: u64) -> Result<Schedule> {
    let layers = layers(net)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = layers.len() - 1;
    let mut phase_a = NodeSet::singleton(net.source());
    let mut phase_b = NodeSet::singleton(net.source());
    for (l, layer) in layers.iter().enumerate().take(last).skip(1) {
        if layer.len() < 2 {
            return Err(Error::LayerTooThin { layer: l, width: layer.len() });
        }
        let mut nodes = layer.clone();
        nodes.shuffle(&mut rng);
        let (one, two) = nodes.split_at(layer.len().div_ceil(2));
        let (on_a, on_b) = if l % 2 == 0 { (one, two) } else { (two, one) };
        phase_a = phase_a.union(on_a.iter().copied().collect());
        phase_b = phase_b.union(on_b.iter().copied().collect());
    }
    let n = net.num_nodes();
    if phase_a == phase_b {
        return Schedule::point(n, phase_a);
    }
    Schedule::new(n, [(phase_a, 0.5), (phase_b, 0.5)])
}

/// Exact enumeration up to the brute-force cap, min-norm point beyond it.
fn exact_min_cut(obj: &CutObjective) -> Result<f64> {
    let method = if obj.network().relays().len() <= DEFAULT_BRUTE_CAP {
        SeparationMethod::Brute
    } else {
        SeparationMethod::MinNorm
    };
    Ok(min_cut(obj, method, DEFAULT_EPS)?.value)
}

/// Min-cut value of the network under a fixed schedule.
pub fn schedule_rate(net: &Network, q: &Schedule) -> Result<f64> {
    let eval = CutEvaluator::new(net);
    exact_min_cut(&CutObjective::joint(&eval, q))
}

/// Cut-set bound with every node transmitting and receiving at once.
pub fn full_duplex_bound(net: &Network) -> Result<f64> {
    let eval = CutEvaluator::new(net);
    exact_min_cut(&CutObjective::full_duplex(&eval))
}

/// Rate of `q` divided by the full-duplex bound.
pub fn hd_fd_ratio(net: &Network, q: &Schedule) -> Result<f64> {
    let fd = full_duplex_bound(net)?;
    if fd <= 1e-12 {
        return Err(Error::ZeroFullDuplex);
    }
    Ok(schedule_rate(net, q)? / fd)
}
