//! Schedule optimization by constraint generation.
//!
//! Every problem is one LP over local mode distributions on a list of bags: the dense joint
//! problems use the single bag `V`, the grouped ones use the bags of a tree decomposition.
//! Cut constraints start from `{S}` and `V∖{D}`; each round solves the restricted LP and asks
//! the min-cut oracle for the most violated cut under the current schedule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cutgraph::{covering_group, CutEvaluator};
use crate::error::{Error, Result};
use crate::grouping::{build_clique_graph, check_p1_exhaustive, check_sufficient_conditions, TreeDecomposition, EXHAUSTIVE_CAP};
use crate::lp::{Constraint, LinearProgram, Relation};
use crate::net::{ChannelModel, Network, NodeId, NodeSet};
use crate::schedule::{Cut, GroupSchedule, Schedule};
use crate::sfm::{min_cut, CutObjective, SeparationMethod};

pub const DEFAULT_PROBLEM1_CAP: usize = 12;
pub const SEPARATION_TOL: f64 = 1e-7;
pub const EQUIVALENCE_TOL: f64 = 1e-5;

/// Minimize `mu1 · R + mu2 · T_tot` subject to `R ≥ c_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub mu1: f64,
    pub mu2: f64,
    pub c_min: f64,
}

impl ObjectiveSpec {
    pub const RATE_MAX: ObjectiveSpec = ObjectiveSpec { mu1: -1.0, mu2: 0.0, c_min: 0.0 };

    pub fn duty_min(c_min: f64) -> Self {
        ObjectiveSpec { mu1: 0.0, mu2: 1.0, c_min }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub separation: SeparationMethod,
    /// A cut is added when it undercuts the current rate by more than this.
    pub separation_tol: f64,
    /// Accuracy requested from the min-norm oracle.
    pub sfm_eps: f64,
    pub max_iterations: usize,
    /// Node cap for the dense problems.
    pub problem1_cap: usize,
    /// Restrict to modes where the source transmits and the destination receives.
    pub fix_endpoints: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            separation: SeparationMethod::Auto,
            separation_tol: SEPARATION_TOL,
            sfm_eps: 1e-9,
            max_iterations: 2_000,
            problem1_cap: DEFAULT_PROBLEM1_CAP,
            fix_endpoints: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    IterationCap,
}

#[derive(Debug, Clone)]
pub enum ScheduleOut {
    Joint(Schedule),
    Grouped(GroupSchedule),
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub rate: f64,
    pub t_tot: f64,
    pub schedule: ScheduleOut,
    pub active_cuts: Vec<Cut>,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Min-cut value under the returned schedule from the last separation round.
    pub min_cut_value: f64,
}

struct Layout {
    bags: Vec<NodeSet>,
    /// Per bag: (mode restricted to the bag, LP column).
    vars: Vec<Vec<(NodeSet, usize)>>,
    r: usize,
    t: usize,
}

impl Layout {
    fn new(net: &Network, bags: Vec<NodeSet>, fix_endpoints: bool) -> Layout {
        let (s, d) = (net.source(), net.destination());
        let mut vars = Vec::with_capacity(bags.len());
        let mut next = 0;
        for &bag in &bags {
            let members = bag.to_vec();
            let mut v = Vec::new();
            for bits in 0..1u64 << members.len() {
                let m: NodeSet = members.iter().enumerate().filter(|(j, _)| bits >> j & 1 == 1).map(|(_, &u)| u).collect();
                if fix_endpoints && ((bag.contains(s) && !m.contains(s)) || m.contains(d)) {
                    continue;
                }
                v.push((m, next));
                next += 1;
            }
            vars.push(v);
        }
        Layout { bags, vars, r: next, t: next + 1 }
    }

    fn num_vars(&self) -> usize {
        self.t + 1
    }

    fn first_bag_with(&self, v: NodeId) -> usize {
        self.bags.iter().position(|b| b.contains(v)).expect("bags cover every node")
    }

    fn locals(&self, x: &[f64]) -> Vec<BTreeMap<NodeSet, f64>> {
        self.vars
            .iter()
            .map(|v| v.iter().map(|&(m, j)| (m, x[j].max(0.0))).filter(|&(_, p)| p > 0.0).collect())
            .collect()
    }
}

fn cut_row(eval: &CutEvaluator, layout: &Layout, omega: NodeSet) -> Result<Constraint> {
    let mut coef = BTreeMap::new();
    for comp in eval.components(omega) {
        let r = covering_group(&layout.bags, comp).ok_or_else(|| {
            Error::GroupingInvalid(format!("cut {omega:?} has component {comp:?} outside every bag"))
        })?;
        let inside = comp.intersect(omega);
        let outside = comp.minus(omega);
        for &(m, j) in &layout.vars[r] {
            let v = eval.set_value(inside.intersect(m), outside.minus(m));
            if v != 0.0 {
                *coef.entry(j).or_insert(0.0) -= v;
            }
        }
    }
    let mut coeffs: Vec<(usize, f64)> = coef.into_iter().collect();
    coeffs.push((layout.r, 1.0));
    Ok(Constraint::new(coeffs, Relation::Le, 0.0))
}

fn solve_bags(net: &Network, bags: Vec<NodeSet>, obj: ObjectiveSpec, opts: &SolveOptions, joint: bool) -> Result<SolveResult> {
    if !(obj.c_min >= 0.0) || !obj.mu1.is_finite() || !obj.mu2.is_finite() {
        return Err(Error::InvalidSchedule(format!("bad objective {obj:?}")));
    }
    let n = net.num_nodes();
    let layout = Layout::new(net, bags, opts.fix_endpoints);
    let eval = CutEvaluator::new(net);
    let mut lp = LinearProgram::new(layout.num_vars());
    lp.objective[layout.r] = obj.mu1;
    lp.objective[layout.t] = obj.mu2;

    for v in &layout.vars {
        lp.add(Constraint::new(v.iter().map(|&(_, j)| (j, 1.0)).collect(), Relation::Eq, 1.0));
    }
    // Agreement on every overlapping pair of bags.
    for i in 0..layout.bags.len() {
        for l in i + 1..layout.bags.len() {
            let sep = layout.bags[i].intersect(layout.bags[l]);
            if sep.is_empty() {
                continue;
            }
            let mut rows: BTreeMap<NodeSet, Vec<(usize, f64)>> = BTreeMap::new();
            for &(m, j) in &layout.vars[i] {
                rows.entry(m.intersect(sep)).or_default().push((j, 1.0));
            }
            for &(m, j) in &layout.vars[l] {
                rows.entry(m.intersect(sep)).or_default().push((j, -1.0));
            }
            for (_, coeffs) in rows {
                lp.add(Constraint::new(coeffs, Relation::Eq, 0.0));
            }
        }
    }
    // T_tot as the sum of per-node duty cycles, each read from the first bag holding the node.
    let mut duty = vec![(layout.t, 1.0)];
    for v in 0..n {
        let b = layout.first_bag_with(v);
        duty.extend(layout.vars[b].iter().filter(|(m, _)| m.contains(v)).map(|&(_, j)| (j, -1.0)));
    }
    lp.add(Constraint::new(duty, Relation::Eq, 0.0));
    lp.add(Constraint::new(vec![(layout.r, 1.0)], Relation::Ge, obj.c_min));
    if obj.mu1 == 0.0 {
        lp.add(Constraint::new(vec![(layout.r, 1.0)], Relation::Le, obj.c_min));
    }

    let mut active: Vec<NodeSet> = Vec::new();
    let s = NodeSet::singleton(net.source());
    for omega in [s, NodeSet::full(n).without(net.destination())] {
        if !active.contains(&omega) {
            lp.add(cut_row(&eval, &layout, omega)?);
            active.push(omega);
        }
    }

    let mut iterations = 0;
    loop {
        iterations += 1;
        let sol = lp.solve()?;
        let rate = sol.x[layout.r];
        let locals = layout.locals(&sol.x);
        let sep = {
            let objective = CutObjective::grouped_raw(&eval, layout.bags.clone(), locals.clone());
            min_cut(&objective, opts.separation, opts.sfm_eps)?
        };
        let violated = sep.value < rate - opts.separation_tol;
        if !violated || iterations >= opts.max_iterations {
            let status = if violated { SolveStatus::IterationCap } else { SolveStatus::Optimal };
            let schedule = if joint {
                ScheduleOut::Joint(Schedule::from_approximate(n, locals[0].clone())?)
            } else {
                let groups = layout.bags.iter().map(|b| b.to_vec()).collect();
                let normalized = locals
                    .into_iter()
                    .map(|l| {
                        let t: f64 = l.values().sum();
                        l.into_iter().filter(|&(_, p)| p > 1e-13).map(|(m, p)| (m, p / t)).collect()
                    })
                    .collect();
                ScheduleOut::Grouped(GroupSchedule::new(groups, normalized)?)
            };
            return Ok(SolveResult {
                rate,
                t_tot: sol.x[layout.t],
                schedule,
                active_cuts: active.iter().map(|&o| Cut::new_unchecked(o)).collect(),
                iterations,
                status,
                min_cut_value: sep.value,
            });
        }
        let omega = sep.cut.omega();
        if active.contains(&omega) {
            return Err(Error::NumericalInstability(format!(
                "cut {omega:?} is active yet undercuts the rate by {:e}",
                rate - sep.value
            )));
        }
        lp.add(cut_row(&eval, &layout, omega)?);
        active.push(omega);
    }
}

fn check_dense_cap(net: &Network, opts: &SolveOptions) -> Result<()> {
    if net.num_nodes() > opts.problem1_cap {
        return Err(Error::NetworkTooLarge { nodes: net.num_nodes(), cap: opts.problem1_cap });
    }
    Ok(())
}

/// Maximum rate over all joint schedules.
pub fn solve_problem1(net: &Network, opts: &SolveOptions) -> Result<SolveResult> {
    solve_problem2(net, ObjectiveSpec::RATE_MAX, opts)
}

/// Rate/duty-cycle objective over all joint schedules.
pub fn solve_problem2(net: &Network, obj: ObjectiveSpec, opts: &SolveOptions) -> Result<SolveResult> {
    check_dense_cap(net, opts)?;
    solve_bags(net, vec![NodeSet::full(net.num_nodes())], obj, opts, true)
}

fn check_decomposition(net: &Network, td: &TreeDecomposition) -> Result<()> {
    let grouping = td.grouping();
    td.verify(&build_clique_graph(net, &grouping)).map_err(Error::GroupingInvalid)?;
    if check_sufficient_conditions(net, &grouping).0 {
        return Ok(());
    }
    if net.relays().len() > EXHAUSTIVE_CAP {
        return Err(Error::GroupingInvalid(
            "bags fail the structural conditions and are too many to check exhaustively".into(),
        ));
    }
    if check_p1_exhaustive(net, &grouping)? {
        Ok(())
    } else {
        Err(Error::GroupingInvalid("some cut-graph component lies in no bag".into()))
    }
}

/// Rate/duty-cycle objective over local schedules on the bags of a tree decomposition.
pub fn solve_problem3(net: &Network, td: &TreeDecomposition, obj: ObjectiveSpec, opts: &SolveOptions) -> Result<SolveResult> {
    check_decomposition(net, td)?;
    solve_bags(net, td.bags.clone(), obj, opts, false)
}

/// Rate maximization for a linear deterministic network over the bags of a tree decomposition.
pub fn solve_problem3_lindet(net: &Network, td: &TreeDecomposition, opts: &SolveOptions) -> Result<SolveResult> {
    if !matches!(net.model(), ChannelModel::LinearDeterministic { .. }) {
        return Err(Error::ModelMismatch { expected: "LinearDeterministic" });
    }
    solve_problem3(net, td, ObjectiveSpec::RATE_MAX, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouping::{layered_decomposition, line_two_hop_decomposition};
    use crate::net::{gen_layered, gen_line_two_hop, Edge, GainDist, GainValue};

    fn line(h1: f64, h2: f64) -> Network {
        Network::new(
            3,
            0,
            2,
            ChannelModel::GaussianReal,
            vec![Edge::new(0, 1, GainValue::Real(h1)), Edge::new(1, 2, GainValue::Real(h2))],
        )
        .unwrap()
    }

    #[test]
    fn unit_line_rate() {
        let r = solve_problem1(&line(1.0, 1.0), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.rate - 0.25).abs() < 1e-9);
        let ScheduleOut::Joint(q) = &r.schedule else { panic!() };
        // Half the time S talks to a listening relay, half the time the relay talks.
        let listen: f64 = q.iter().filter(|(m, _)| m.contains(0) && !m.contains(1)).map(|(_, p)| p).sum();
        let speak: f64 = q.iter().filter(|(m, _)| m.contains(1) && !m.contains(2)).map(|(_, p)| p).sum();
        assert!((listen - 0.5).abs() < 1e-9 && (speak - 0.5).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_line_rate() {
        let r = solve_problem1(&line(1.0, 7f64.sqrt()), &SolveOptions::default()).unwrap();
        assert!((r.rate - 0.375).abs() < 1e-9);
    }

    #[test]
    fn direct_link() {
        let h = 2.0;
        let net = Network::new(2, 0, 1, ChannelModel::GaussianReal, vec![Edge::new(0, 1, GainValue::Real(h))]).unwrap();
        let r = solve_problem1(&net, &SolveOptions::default()).unwrap();
        assert!((r.rate - 0.5 * (1.0 + h * h).log2()).abs() < 1e-12);
        let ScheduleOut::Joint(q) = &r.schedule else { panic!() };
        assert!((q.prob(NodeSet::singleton(0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_max_equals_problem1_through_problem2() {
        let net = gen_layered(&[1, 2, 2, 1], GainDist::Gaussian(5.0), 3).unwrap();
        let a = solve_problem1(&net, &SolveOptions::default()).unwrap();
        let b = solve_problem2(&net, ObjectiveSpec::RATE_MAX, &SolveOptions::default()).unwrap();
        assert_eq!(a.rate, b.rate);
    }

    #[test]
    fn zero_rate_needs_no_transmission() {
        let net = gen_layered(&[1, 2, 1], GainDist::Gaussian(1.0), 1).unwrap();
        let r = solve_problem2(&net, ObjectiveSpec::duty_min(0.0), &SolveOptions::default()).unwrap();
        assert!(r.t_tot.abs() < 1e-12);
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn duty_min_on_unit_line() {
        // Rate 0.125 needs S on a quarter of the time with the relay listening and the relay
        // on a quarter of the time, so T_tot = 0.5.
        let r = solve_problem2(&line(1.0, 1.0), ObjectiveSpec::duty_min(0.125), &SolveOptions::default()).unwrap();
        assert!((r.t_tot - 0.5).abs() < 1e-9);
        assert!((r.rate - 0.125).abs() < 1e-12);
    }

    #[test]
    fn infeasible_floor() {
        let r = solve_problem2(&line(1.0, 1.0), ObjectiveSpec::duty_min(0.26), &SolveOptions::default());
        assert!(matches!(r, Err(Error::Infeasible)));
    }

    #[test]
    fn dense_cap() {
        let net = gen_layered(&[1, 4, 4, 4, 1], GainDist::Unit, 0).unwrap();
        assert!(matches!(
            solve_problem1(&net, &SolveOptions::default()),
            Err(Error::NetworkTooLarge { nodes: 14, cap: 12 })
        ));
    }

    #[test]
    fn grouped_matches_dense_on_layered() {
        let net = gen_layered(&[1, 2, 2, 1], GainDist::Gaussian(10.0), 7).unwrap();
        let td = layered_decomposition(&net).unwrap();
        let dense = solve_problem1(&net, &SolveOptions::default()).unwrap();
        let grouped = solve_problem3(&net, &td, ObjectiveSpec::RATE_MAX, &SolveOptions::default()).unwrap();
        assert!((dense.rate - grouped.rate).abs() < EQUIVALENCE_TOL);
        assert!(grouped.min_cut_value >= grouped.rate - 1e-6);
    }

    #[test]
    fn single_bag_matches_problem2() {
        let net = gen_layered(&[1, 2, 1], GainDist::Gaussian(3.0), 2).unwrap();
        let td = TreeDecomposition::path(vec![NodeSet::full(4)]);
        let obj = ObjectiveSpec::duty_min(0.3);
        let a = solve_problem2(&net, obj, &SolveOptions::default()).unwrap();
        let b = solve_problem3(&net, &td, obj, &SolveOptions::default()).unwrap();
        assert!((a.t_tot - b.t_tot).abs() < 1e-9);
    }

    #[test]
    fn line_two_hop_grouped_matches_dense() {
        let net = gen_line_two_hop(7, GainDist::Gaussian(2.0), 5).unwrap();
        let td = line_two_hop_decomposition(&net).unwrap();
        let dense = solve_problem1(&net, &SolveOptions::default()).unwrap();
        let grouped = solve_problem3(&net, &td, ObjectiveSpec::RATE_MAX, &SolveOptions::default()).unwrap();
        assert!((dense.rate - grouped.rate).abs() < EQUIVALENCE_TOL);
    }

    #[test]
    fn invalid_grouping_rejected() {
        let net = gen_line_two_hop(6, GainDist::Unit, 0).unwrap();
        let pairs: Vec<NodeSet> = (0..5).map(|i| NodeSet::from_nodes([i, i + 1])).collect();
        let td = TreeDecomposition::path(pairs);
        let r = solve_problem3(&net, &td, ObjectiveSpec::RATE_MAX, &SolveOptions::default());
        assert!(matches!(r, Err(Error::GroupingInvalid(_))));
    }

    #[test]
    fn lindet_line_capacity() {
        let net = Network::new(
            3,
            0,
            2,
            ChannelModel::LinearDeterministic { p: 2, k: 2 },
            vec![Edge::new(0, 1, GainValue::Shift(2)), Edge::new(1, 2, GainValue::Shift(2))],
        )
        .unwrap();
        let td = layered_decomposition(&net).unwrap();
        let r = solve_problem3_lindet(&net, &td, &SolveOptions::default()).unwrap();
        assert!((r.rate - 1.0).abs() < 1e-9);
        let single = Network::new(
            2,
            0,
            1,
            ChannelModel::LinearDeterministic { p: 2, k: 3 },
            vec![Edge::new(0, 1, GainValue::Shift(3))],
        )
        .unwrap();
        let td = layered_decomposition(&single).unwrap();
        assert!((solve_problem3_lindet(&single, &td, &SolveOptions::default()).unwrap().rate - 3.0).abs() < 1e-9);
        let gauss = line(1.0, 1.0);
        let td = layered_decomposition(&gauss).unwrap();
        assert!(matches!(
            solve_problem3_lindet(&gauss, &td, &SolveOptions::default()),
            Err(Error::ModelMismatch { .. })
        ));
    }

    #[test]
    fn fixed_endpoints_do_not_change_rate() {
        let net = gen_layered(&[1, 2, 2, 1], GainDist::Gaussian(4.0), 9).unwrap();
        let free = solve_problem1(&net, &SolveOptions::default()).unwrap();
        let fixed = solve_problem1(&net, &SolveOptions { fix_endpoints: true, ..Default::default() }).unwrap();
        assert!((free.rate - fixed.rate).abs() < 1e-9);
    }

    #[test]
    fn duty_read_from_any_bag_agrees() {
        let net = gen_layered(&[1, 2, 2, 1], GainDist::Gaussian(4.0), 9).unwrap();
        let td = layered_decomposition(&net).unwrap();
        let max = solve_problem3(&net, &td, ObjectiveSpec::RATE_MAX, &SolveOptions::default()).unwrap().rate;
        let r = solve_problem3(&net, &td, ObjectiveSpec::duty_min(0.5 * max), &SolveOptions::default()).unwrap();
        let ScheduleOut::Grouped(gs) = &r.schedule else { panic!() };
        for v in 0..6 {
            let readings: Vec<f64> = (0..gs.groups().len())
                .filter(|&i| gs.group_set(i).contains(v))
                .map(|i| gs.local(i).iter().filter(|(m, _)| m.contains(v)).map(|(_, p)| p).sum())
                .collect();
            assert!(readings.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-9), "{readings:?}");
        }
    }
}
