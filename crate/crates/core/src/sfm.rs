//! Minimization of expected cut values over `Ω ∋ S, Ω ∌ D`.
//!
//! The ground set is the relays `V∖{S,D}`. Small ground sets are enumerated; larger ones use
//! the Fujishige–Wolfe minimum-norm-point algorithm on the base polytope.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cutgraph::CutEvaluator;
use crate::error::{Error, Result};
use crate::net::{Network, NodeId, NodeSet};
use crate::schedule::{Cut, GroupSchedule, Schedule};

pub const DEFAULT_BRUTE_CAP: usize = 16;
pub const DEFAULT_EPS: f64 = 1e-7;
pub const DEFAULT_MAJOR_CAP: usize = 10_000;
/// Ground sizes up to this use enumeration under [`SeparationMethod::Auto`].
pub const AUTO_BRUTE_LIMIT: usize = 10;

/// Anything that assigns a value to a cut `Ω`.
pub trait CutFunction {
    fn network(&self) -> &Network;
    fn value(&self, omega: NodeSet) -> Result<f64>;
}

enum Weights {
    Joint(Vec<(NodeSet, f64)>),
    Grouped { groups: Vec<NodeSet>, locals: Vec<BTreeMap<NodeSet, f64>> },
    FullDuplex,
}

/// Expected cut value under a joint schedule, a grouped schedule, or the full-duplex value.
pub struct CutObjective<'e, 'a> {
    eval: &'e CutEvaluator<'a>,
    weights: Weights,
}

impl<'e, 'a> CutObjective<'e, 'a> {
    pub fn joint(eval: &'e CutEvaluator<'a>, q: &Schedule) -> Self {
        Self::joint_raw(eval, q.iter().collect())
    }

    /// Weighted mode list that need not be normalized.
    pub(crate) fn joint_raw(eval: &'e CutEvaluator<'a>, entries: Vec<(NodeSet, f64)>) -> Self {
        CutObjective { eval, weights: Weights::Joint(entries) }
    }

    pub fn grouped(eval: &'e CutEvaluator<'a>, gs: &GroupSchedule) -> Self {
        let groups = (0..gs.groups().len()).map(|i| gs.group_set(i)).collect();
        let locals = (0..gs.groups().len()).map(|i| gs.local(i).clone()).collect();
        Self::grouped_raw(eval, groups, locals)
    }

    pub(crate) fn grouped_raw(
        eval: &'e CutEvaluator<'a>,
        groups: Vec<NodeSet>,
        locals: Vec<BTreeMap<NodeSet, f64>>,
    ) -> Self {
        CutObjective { eval, weights: Weights::Grouped { groups, locals } }
    }

    pub fn full_duplex(eval: &'e CutEvaluator<'a>) -> Self {
        CutObjective { eval, weights: Weights::FullDuplex }
    }
}

impl CutFunction for CutObjective<'_, '_> {
    fn network(&self) -> &Network {
        self.eval.network()
    }

    fn value(&self, omega: NodeSet) -> Result<f64> {
        match &self.weights {
            Weights::Joint(entries) => Ok(entries.iter().map(|&(m, p)| p * self.eval.mode_value(omega, m)).sum()),
            Weights::Grouped { groups, locals } => self.eval.decomposed(omega, groups, locals),
            Weights::FullDuplex => Ok(self.eval.full_duplex_value(omega)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinCutMethod {
    Brute,
    MinNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationMethod {
    #[default]
    Auto,
    Brute,
    MinNorm,
}

#[derive(Debug, Clone)]
pub struct MinCutResult {
    pub cut: Cut,
    pub value: f64,
    pub method: MinCutMethod,
    /// Proven upper bound on `value − true minimum`.
    pub certificate_gap: f64,
}

fn ground(net: &Network) -> Vec<NodeId> {
    net.relays().to_vec()
}

fn subset(ground: &[NodeId], bits: u64) -> NodeSet {
    NodeSet::from_nodes(ground.iter().enumerate().filter(|(j, _)| bits >> j & 1 == 1).map(|(_, &v)| v))
}

fn lex_less(a: NodeSet, b: NodeSet) -> bool {
    a.to_vec() < b.to_vec()
}

/// Exhaustive minimization with the default cap.
pub fn min_cut_brute<F: CutFunction + ?Sized>(obj: &F) -> Result<MinCutResult> {
    min_cut_brute_capped(obj, DEFAULT_BRUTE_CAP)
}

/// Exhaustive minimization over all `2^|relays|` cuts; ties go to the lexicographically
/// smallest relay list.
pub fn min_cut_brute_capped<F: CutFunction + ?Sized>(obj: &F, cap: usize) -> Result<MinCutResult> {
    let net = obj.network();
    let g = ground(net);
    if g.len() > cap {
        return Err(Error::GroundSetTooLarge { size: g.len(), cap });
    }
    let s = NodeSet::singleton(net.source());
    let mut best: Option<(NodeSet, f64)> = None;
    for bits in 0..1u64 << g.len() {
        let a = subset(&g, bits);
        let v = obj.value(s.union(a))?;
        best = match best {
            None => Some((a, v)),
            Some((ba, bv)) => {
                if v < bv - 1e-12 || ((v - bv).abs() <= 1e-12 && lex_less(a, ba)) {
                    Some((a, v))
                } else {
                    Some((ba, bv))
                }
            }
        };
    }
    let (a, value) = best.expect("at least the empty relay set");
    Ok(MinCutResult { cut: Cut::new_unchecked(s.union(a)), value, method: MinCutMethod::Brute, certificate_gap: 0.0 })
}

/// Normalized set function `g(A) = f({S} ∪ A) − f({S})` on ground indices.
struct Normalized<'f, F: ?Sized> {
    obj: &'f F,
    ground: Vec<NodeId>,
    source: NodeSet,
    base: f64,
}

impl<F: CutFunction + ?Sized> Normalized<'_, F> {
    fn eval(&self, a: NodeSet) -> Result<f64> {
        Ok(self.obj.value(self.source.union(a))? - self.base)
    }

    /// Greedy vertex for increasing `w`, plus the prefix sets and their values.
    fn greedy(&self, w: &[f64]) -> Result<(Vec<f64>, Vec<(NodeSet, f64)>)> {
        let n = self.ground.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| w[i].total_cmp(&w[j]).then(i.cmp(&j)));
        let mut x = vec![0.0; n];
        let mut prefixes = Vec::with_capacity(n + 1);
        prefixes.push((NodeSet::EMPTY, 0.0));
        let mut set = NodeSet::EMPTY;
        let mut prev = 0.0;
        for &i in &order {
            set = set.with(self.ground[i]);
            let v = self.eval(set)?;
            x[i] = v - prev;
            prev = v;
            prefixes.push((set, v));
        }
        Ok((x, prefixes))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Weights of the minimum-norm point in the affine hull of `pts`, or `None` if they are
/// affinely dependent.
fn affine_minimizer(pts: &[Vec<f64>]) -> Option<Vec<f64>> {
    let k = pts.len();
    // (P P^T + 1 1^T) β = 1, α = β / Σβ.
    let mut m = vec![vec![0.0; k + 1]; k];
    let mut scale: f64 = 1.0;
    for i in 0..k {
        for j in 0..=i {
            let v = dot(&pts[i], &pts[j]) + 1.0;
            m[i][j] = v;
            m[j][i] = v;
        }
        m[i][k] = 1.0;
        scale = scale.max(m[i][i]);
    }
    for col in 0..k {
        let p = (col..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[p][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, p);
        for r in 0..k {
            if r != col && m[r][col] != 0.0 {
                let f = m[r][col] / m[col][col];
                for c in col..=k {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let beta: Vec<f64> = (0..k).map(|i| m[i][k] / m[i][i]).collect();
    let total: f64 = beta.iter().sum();
    if !total.is_finite() || total.abs() < 1e-300 {
        return None;
    }
    Some(beta.into_iter().map(|b| b / total).collect())
}

/// Minimum-norm-point minimization with default tolerance and cycle cap.
pub fn min_cut_submodular<F: CutFunction + ?Sized>(obj: &F, eps: f64) -> Result<MinCutResult> {
    min_cut_submodular_capped(obj, eps, DEFAULT_MAJOR_CAP)
}

pub fn min_cut_submodular_capped<F: CutFunction + ?Sized>(obj: &F, eps: f64, major_cap: usize) -> Result<MinCutResult> {
    let net = obj.network();
    let source = NodeSet::singleton(net.source());
    let base = obj.value(source)?;
    let g = Normalized { obj, ground: ground(net), source, base };
    let n = g.ground.len();

    let finish = |set: NodeSet, gval: f64, gap: f64| MinCutResult {
        cut: Cut::new_unchecked(source.union(set)),
        value: gval + base,
        method: MinCutMethod::MinNorm,
        certificate_gap: gap.max(0.0),
    };
    if n == 0 {
        return Ok(finish(NodeSet::EMPTY, 0.0, 0.0));
    }

    let (q0, prefixes) = g.greedy(&vec![0.0; n])?;
    let mut best = best_prefix(&prefixes);
    let mut pts = vec![q0.clone()];
    let mut lambda = vec![1.0];
    let mut x = q0;
    let mut best_gap = f64::INFINITY;

    for iter in 0..major_cap {
        let (q, prefixes) = g.greedy(&x)?;
        // Level sets of x are the greedy prefixes.
        let cand = best_prefix(&prefixes);
        if cand.1 < best.1 - 1e-15 {
            best = cand;
        }
        let lower: f64 = x.iter().map(|&v| v.min(0.0)).sum();
        let gap = best.1 - lower;
        best_gap = best_gap.min(gap);
        if gap <= eps {
            return Ok(finish(best.0, best.1, gap));
        }
        let xx = dot(&x, &x);
        let scale = 1.0 + pts.iter().map(|p| dot(p, p)).fold(xx, f64::max);
        if xx - dot(&x, &q) <= 1e-14 * scale || pts.iter().any(|p| p == &q) {
            // x is the min-norm point to working precision.
            return Err(Error::ConvergenceFailure { iterations: iter + 1, best_gap });
        }
        pts.push(q);
        lambda.push(0.0);

        // Minor cycles.
        loop {
            let Some(alpha) = affine_minimizer(&pts) else {
                pts.pop();
                lambda.pop();
                return Err(Error::ConvergenceFailure { iterations: iter + 1, best_gap });
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                lambda = alpha;
                break;
            }
            let theta = lambda
                .iter()
                .zip(&alpha)
                .filter(|&(_, &a)| a <= 1e-14)
                .map(|(&l, &a)| if l - a > 0.0 { l / (l - a) } else { 0.0 })
                .fold(1.0, f64::min);
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            let mut keep = lambda.iter().map(|&l| l > 1e-14).collect::<Vec<_>>();
            if keep.iter().all(|&k| k) {
                // Guard against a stalled line search.
                let i = lambda.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
                keep[i] = false;
            }
            let mut it = keep.iter();
            pts.retain(|_| *it.next().unwrap());
            let mut it = keep.iter();
            lambda.retain(|_| *it.next().unwrap());
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
        }
        x = vec![0.0; n];
        for (p, &l) in pts.iter().zip(&lambda) {
            for (xi, pi) in x.iter_mut().zip(p) {
                *xi += l * pi;
            }
        }
    }
    Err(Error::ConvergenceFailure { iterations: major_cap, best_gap })
}

fn best_prefix(prefixes: &[(NodeSet, f64)]) -> (NodeSet, f64) {
    let mut best = prefixes[0];
    for &(s, v) in &prefixes[1..] {
        if v < best.1 - 1e-15 {
            best = (s, v);
        }
    }
    best
}

/// Dispatches on `method`; `Auto` enumerates when the ground set is small.
pub fn min_cut<F: CutFunction + ?Sized>(obj: &F, method: SeparationMethod, eps: f64) -> Result<MinCutResult> {
    let n = obj.network().relays().len();
    match method {
        SeparationMethod::Brute => min_cut_brute(obj),
        SeparationMethod::MinNorm => min_cut_submodular(obj, eps),
        SeparationMethod::Auto if n <= AUTO_BRUTE_LIMIT => min_cut_brute(obj),
        SeparationMethod::Auto => min_cut_submodular(obj, eps),
    }
}
