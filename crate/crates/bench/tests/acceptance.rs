//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hdsched::baselines::{hd_fd_ratio, naive_schedule};
use hdsched::cutgraph::CutEvaluator;
use hdsched::gauss::{decomposed_cut_value, expected_cut_value};
use hdsched::grouping::{
    auto_decomposition, layered_decomposition, line_two_hop_decomposition, reconstruct_joint, TreeDecomposition,
};
use hdsched::net::{gen_five_relay, gen_layered, gen_line_two_hop, ChannelModel, Edge, GainDist, GainValue, Network, NodeSet};
use hdsched::opt::{
    solve_problem1, solve_problem2, solve_problem3, solve_problem3_lindet, ObjectiveSpec, SolveOptions, SolveStatus,
};
use hdsched::schedule::{Cut, GroupSchedule, Schedule};
use hdsched::sfm::{min_cut_brute, min_cut_submodular, CutObjective, DEFAULT_EPS};
use hdsched::Error;
use hdsched_bench::{ratio_instances, run_duty_curve, ExperimentKind, ExperimentSpec};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

/// Every cut `Ω = {S} ∪ A` for `A` a subset of the relays.
fn all_cuts(net: &Network) -> Vec<NodeSet> {
    let relays = net.relays().to_vec();
    (0u64..1 << relays.len())
        .map(|bits| {
            let mut omega = NodeSet::singleton(net.source());
            for (i, &r) in relays.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    omega = omega.with(r);
                }
            }
            omega
        })
        .collect()
}

fn random_schedule(rng: &mut ChaCha8Rng, n: usize, support: usize) -> Schedule {
    let mut entries: BTreeMap<NodeSet, f64> = BTreeMap::new();
    for _ in 0..support {
        let m = NodeSet(rng.random_range(0..1u64 << n));
        *entries.entry(m).or_default() += rng.random_range(0.05..1.0);
    }
    let total: f64 = entries.values().sum();
    Schedule::new(n, entries.into_iter().map(|(m, p)| (m, p / total))).unwrap()
}

fn random_digraph(rng: &mut ChaCha8Rng, n: usize, density: f64, dist: GainDist) -> Network {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && v != 0 && u != n - 1 && rng.random_bool(density) {
                let gain = match dist {
                    GainDist::ComplexGaussian(p) => {
                        let s = (p / 2.0).sqrt();
                        GainValue::Complex { re: s * (rng.random::<f64>() * 2.0 - 1.0), im: s * (rng.random::<f64>() * 2.0 - 1.0) }
                    }
                    GainDist::AdtShift { k, .. } => GainValue::Shift(rng.random_range(0..=k)),
                    _ => GainValue::Real(rng.random_range(-3.0..3.0)),
                };
                edges.push(Edge::new(u, v, gain));
            }
        }
    }
    let model = match dist {
        GainDist::ComplexGaussian(_) => ChannelModel::GaussianComplex,
        GainDist::AdtShift { p, k } => ChannelModel::LinearDeterministic { p, k },
        _ => ChannelModel::GaussianReal,
    };
    Network::new(n, 0, n - 1, model, edges).unwrap()
}

fn random_widths(rng: &mut ChaCha8Rng, layers: usize, lo: usize, hi: usize) -> Vec<usize> {
    let mut w: Vec<usize> = (0..layers).map(|_| rng.random_range(lo..=hi)).collect();
    w[0] = 1;
    w[layers - 1] = 1;
    w
}

// Naive schedule halves every cut of a layered network.
fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let powers = [1.0, 10.0, 100.0];
    let mut worst = 0.0f64;
    for i in 0..20 {
        let layers = 3 + i % 3;
        let widths = random_widths(&mut rng, layers, 2, 4);
        let p = powers[i % 3];
        let net = gen_layered(&widths, GainDist::ComplexGaussian(p), 1000 + i as u64).map_err(err)?;
        let r = hd_fd_ratio(&net, &naive_schedule(&net).map_err(err)?).map_err(err)?;
        worst = worst.max((r - 0.5).abs());
        ensure((r - 0.5).abs() <= 1e-9, || format!("widths {widths:?} P={p}: ratio {r}"))?;
    }
    Ok(format!("20 networks, max |ratio - 0.5| = {worst:.2e}"))
}

// Grouped and dense LPs agree.
fn criterion_2() -> Outcome {
    let opts = SolveOptions::default();
    let mut cases: Vec<(String, Network, TreeDecomposition)> = Vec::new();
    for s in 0..10 {
        let net = gen_layered(&[1, 2, 2, 1], GainDist::ComplexGaussian(10.0), 200 + s).map_err(err)?;
        let td = layered_decomposition(&net).map_err(err)?;
        cases.push((format!("layered seed {}", 200 + s), net, td));
    }
    for (s, n) in [5usize, 6, 7, 8, 8].into_iter().enumerate() {
        let net = gen_line_two_hop(n, GainDist::Gaussian(10.0), 300 + s as u64).map_err(err)?;
        let td = line_two_hop_decomposition(&net).map_err(err)?;
        cases.push((format!("line n={n}"), net, td));
    }
    let mut worst = 0.0f64;
    for (name, net, td) in &cases {
        let dense = solve_problem2(net, ObjectiveSpec::RATE_MAX, &opts).map_err(err)?;
        let grouped = solve_problem3(net, td, ObjectiveSpec::RATE_MAX, &opts).map_err(err)?;
        let d = (dense.rate - grouped.rate).abs();
        worst = worst.max(d);
        ensure(d <= 1e-5, || format!("{name} rate: dense {} grouped {}", dense.rate, grouped.rate))?;
        let duty = ObjectiveSpec::duty_min(0.5 * dense.rate);
        let dense = solve_problem2(net, duty, &opts).map_err(err)?;
        let grouped = solve_problem3(net, td, duty, &opts).map_err(err)?;
        let d = (dense.rate - grouped.rate).abs().max((dense.t_tot - grouped.t_tot).abs());
        worst = worst.max(d);
        ensure(d <= 1e-5, || {
            format!(
                "{name} duty: dense (R {}, T {}) grouped (R {}, T {})",
                dense.rate, dense.t_tot, grouped.rate, grouped.t_tot
            )
        })?;
    }
    Ok(format!("{} networks x 2 objectives, max deviation {worst:.2e}", cases.len()))
}

// Min-norm point agrees with enumeration.
fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let seed = 3000 + i as u64;
        let net = match i % 3 {
            0 => {
                let layers = rng.random_range(3..=5);
                let mut w = random_widths(&mut rng, layers, 1, 4);
                while w.iter().sum::<usize>() - 2 > 10 {
                    let j = w.iter().position(|&x| x > 1).unwrap();
                    w[j] -= 1;
                }
                gen_layered(&w, GainDist::ComplexGaussian(10.0), seed)
            }
            1 => gen_line_two_hop(rng.random_range(4..=12), GainDist::Gaussian(5.0), seed),
            _ => {
                let n = rng.random_range(5..=12);
                Ok(random_digraph(&mut rng, n, 0.35, GainDist::ComplexGaussian(10.0)))
            }
        }
        .map_err(err)?;
        ensure(net.relays().len() <= 10, || "too many relays".into())?;
        let support = rng.random_range(1..=4);
        let q = random_schedule(&mut rng, net.num_nodes(), support);
        let eval = CutEvaluator::new(&net);
        let obj = CutObjective::joint(&eval, &q);
        let mn = min_cut_submodular(&obj, DEFAULT_EPS).map_err(err)?;
        let bf = min_cut_brute(&obj).map_err(err)?;
        let d = (mn.value - bf.value).abs();
        worst = worst.max(d);
        ensure(d <= 1e-6, || format!("network {i}: min-norm {} brute {}", mn.value, bf.value))?;
    }
    Ok(format!("50 networks, max deviation {worst:.2e}"))
}

// Pairwise submodularity, exhaustively.
fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut checked = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..10 {
        for dist in [GainDist::ComplexGaussian(10.0), GainDist::AdtShift { p: 2, k: 3 }] {
            let net = random_digraph(&mut rng, 7, 0.45, dist);
            let q = random_schedule(&mut rng, 7, 4);
            let eval = CutEvaluator::new(&net);
            let cuts = all_cuts(&net);
            let mut fns: Vec<Box<dyn Fn(NodeSet) -> f64 + '_>> = vec![Box::new(|o| eval.expected(o, &q))];
            for (m, _) in q.iter() {
                let eval = &eval;
                fns.push(Box::new(move |o| eval.mode_value(o, m)));
            }
            for f in &fns {
                let vals: BTreeMap<NodeSet, f64> = cuts.iter().map(|&o| (o, f(o))).collect();
                for &a in &cuts {
                    for &b in &cuts {
                        let excess = vals[&a.union(b)] + vals[&a.intersect(b)] - vals[&a] - vals[&b];
                        worst = worst.max(excess);
                        checked += 1;
                        ensure(excess <= 1e-9, || {
                            format!("network {i} {dist:?}: A={:?} B={:?} excess {excess:.3e}", a.to_vec(), b.to_vec())
                        })?;
                    }
                }
            }
        }
    }
    Ok(format!("{checked} pairs, worst excess {worst:.2e}"))
}

// Two-hop relay: the optimum balances listen and forward time.
fn criterion_5() -> Outcome {
    const POINTS: usize = 100_000;
    let pairs = [(1.0, 1.0), (3.0, 0.5), (10.0, 100.0), (0.2, 7.0), (50.0, 2.0)];
    let mut worst = 0.0f64;
    for &(g1, g2) in &pairs {
        let gain = |g: f64| GainValue::Complex { re: f64::sqrt(g), im: 0.0 };
        let net = Network::new(
            3,
            0,
            2,
            ChannelModel::GaussianComplex,
            vec![Edge::new(0, 1, gain(g1)), Edge::new(1, 2, gain(g2))],
        )
        .map_err(err)?;
        let (c1, c2) = ((1.0 + g1).log2(), (1.0 + g2).log2());
        let closed = c1 * c2 / (c1 + c2);
        let sweep = (0..=POINTS)
            .map(|i| {
                let t = i as f64 / POINTS as f64;
                (t * c1).min((1.0 - t) * c2)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let resolution = c1.max(c2) / POINTS as f64;
        ensure((sweep - closed).abs() <= resolution, || format!("sweep {sweep} vs closed form {closed}"))?;
        let r = solve_problem1(&net, &SolveOptions::default()).map_err(err)?;
        let d = (r.rate - closed).abs();
        worst = worst.max(d);
        ensure(d <= 1e-6, || format!("gains ({g1}, {g2}): solver {} closed form {closed}", r.rate))?;
        ensure(r.rate >= sweep - 1e-6, || format!("gains ({g1}, {g2}): solver {} below sweep {sweep}", r.rate))?;
    }
    Ok(format!("5 gain pairs, max deviation {worst:.2e}"))
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn field_rank(mut a: Vec<Vec<u64>>, p: u64) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| a[r][c] % p != 0) else { continue };
        a.swap(rank, piv);
        let inv = pow_mod(a[rank][c], p - 2, p);
        for r in 0..rows {
            if r != rank && a[r][c] != 0 {
                let f = a[r][c] * inv % p;
                for j in 0..cols {
                    a[r][j] = (a[r][j] + p * p - f * a[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of the stacked shift-channel matrix from transmitters `tx` inside `omega` to
/// listeners outside it.
fn adt_cut_rank(net: &Network, omega: NodeSet, tx: NodeSet) -> usize {
    let ChannelModel::LinearDeterministic { p, k } = net.model() else { unreachable!() };
    let n = net.num_nodes();
    let a: Vec<usize> = (0..n).filter(|&v| omega.contains(v) && tx.contains(v)).collect();
    let b: Vec<usize> = (0..n).filter(|&v| !omega.contains(v) && !tx.contains(v)).collect();
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut m = vec![vec![0u64; a.len() * k]; b.len() * k];
    for e in net.edges() {
        let (Some(ai), Some(bi)) = (a.iter().position(|&u| u == e.from), b.iter().position(|&v| v == e.to)) else {
            continue;
        };
        let GainValue::Shift(level) = e.gain else { unreachable!() };
        let shift = k - level;
        for r in shift..k {
            m[bi * k + r][ai * k + r - shift] = 1;
        }
    }
    field_rank(m, p)
}

/// Maximizes `c·x` subject to `A x ≤ b`, `x ≥ 0`, with `b ≥ 0`, using Bland's rule.
fn bland_max(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> f64 {
    let (m, n) = (a.len(), c.len());
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row = vec![0.0; width];
            row[..n].copy_from_slice(&a[i]);
            row[n + i] = 1.0;
            row[width - 1] = b[i];
            row
        })
        .collect();
    let mut obj = vec![0.0; width];
    for j in 0..n {
        obj[j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(enter) = (0..n + m).find(|&j| obj[j] < -1e-12) else { break };
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if t[i][enter] > 1e-12 {
                let ratio = t[i][width - 1] / t[i][enter];
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let best = t[l][width - 1] / t[l][enter];
                        if ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let l = leave.expect("bounded");
        let pv = t[l][enter];
        for x in t[l].iter_mut() {
            *x /= pv;
        }
        let pivot_row = t[l].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != l && row[enter].abs() > 0.0 {
                let f = row[enter];
                for j in 0..width {
                    row[j] -= f * pivot_row[j];
                }
            }
        }
        let f = obj[enter];
        for j in 0..width {
            obj[j] -= f * pivot_row[j];
        }
        basis[l] = enter;
    }
    obj[width - 1]
}

/// Capacity of a linear deterministic network as a dense LP over every joint mode.
fn adt_capacity_oracle(net: &Network) -> f64 {
    let n = net.num_nodes();
    let modes = 1usize << n;
    let cuts = all_cuts(net);
    // Variables: q(m) for every mode, then R.
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &omega in &cuts {
        let mut row: Vec<f64> = (0..modes).map(|m| -(adt_cut_rank(net, omega, NodeSet(m as u64)) as f64)).collect();
        row.push(1.0);
        a.push(row);
        b.push(0.0);
    }
    let mut mass = vec![1.0; modes];
    mass.push(0.0);
    a.push(mass);
    b.push(1.0);
    let mut c = vec![0.0; modes];
    c.push(1.0);
    bland_max(&a, &b, &c)
}

// Grouped linear deterministic LP matches the dense oracle.
fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let shapes: [&[usize]; 5] = [&[1, 2, 2, 1], &[1, 3, 2, 1], &[1, 2, 3, 1], &[1, 2, 1, 2, 1], &[1, 1, 2, 1, 1]];
    let mut worst = 0.0f64;
    for i in 0..10 {
        let widths = shapes[i % shapes.len()];
        let p = [2u64, 3][i % 2];
        let k = rng.random_range(1..=3);
        let net = gen_layered(widths, GainDist::AdtShift { p, k }, 6000 + i as u64).map_err(err)?;
        let td = auto_decomposition(&net).map_err(err)?;
        let r = solve_problem3_lindet(&net, &td, &SolveOptions::default()).map_err(err)?;
        let oracle = adt_capacity_oracle(&net);
        let d = (r.rate - oracle).abs();
        worst = worst.max(d);
        ensure(d <= 1e-6, || format!("widths {widths:?} p={p} k={k}: solver {} oracle {oracle}", r.rate))?;
    }
    Ok(format!("10 networks, max deviation {worst:.2e}"))
}

// Minimum duty cycle grows monotonically and convexly in the rate floor.
fn criterion_7() -> Outcome {
    let spec = ExperimentSpec {
        kind: ExperimentKind::DutyCurve,
        layers: vec![4],
        width: 3,
        trials: 5,
        powers: vec![10.0],
        grid_points: 20,
        seed: 7,
        ..Default::default()
    };
    let rows = run_duty_curve(&spec);
    let mut curves: BTreeMap<usize, Vec<(f64, Option<f64>)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.point < spec.grid_points) {
        curves.entry(r.trial).or_default().push((r.c_min, r.t_tot));
    }
    ensure(curves.len() == 5, || format!("expected 5 curves, got {}", curves.len()))?;
    for (trial, pts) in &curves {
        ensure(pts.len() == 20, || format!("trial {trial}: {} grid points", pts.len()))?;
        let t: Vec<f64> = pts
            .iter()
            .map(|&(c, t)| t.ok_or_else(|| format!("trial {trial}: no solution at c_min {c}")))
            .collect::<Result<_, _>>()?;
        ensure(t[0].abs() <= 1e-7, || format!("trial {trial}: T(0) = {}", t[0]))?;
        for j in 1..t.len() {
            ensure(t[j] >= t[j - 1] - 1e-7, || format!("trial {trial}: decrease at point {j}: {:?}", &t[j - 1..=j]))?;
        }
        for j in 1..t.len() - 1 {
            // Evenly spaced grid: second difference must be nonnegative.
            let second = t[j - 1] - 2.0 * t[j] + t[j + 1];
            ensure(second >= -1e-7, || format!("trial {trial}: concave at point {j}: {second:.3e}"))?;
        }
    }
    let probes_infeasible = rows.iter().filter(|r| r.point == spec.grid_points).all(|r| r.status == "infeasible");
    ensure(probes_infeasible, || "rate floor above the maximum was accepted".into())?;
    Ok("5 curves x 20 points monotone and convex".into())
}

// Optimized schedules dominate both baselines.
fn criterion_8() -> Outcome {
    let spec = ExperimentSpec { kind: ExperimentKind::RatioCurve, ..Default::default() };
    let inst = ratio_instances(&spec).map_err(err)?;
    ensure(inst.len() == spec.powers.len() * spec.trials, || format!("{} instances", inst.len()))?;
    let mut violations = Vec::new();
    for r in &inst {
        if r.optimized < r.simple_random - 1e-9 || r.optimized < 0.5 - 1e-9 {
            violations.push(format!("P={} trial {}: opt {} simple {}", r.power, r.trial, r.optimized, r.simple_random));
        }
    }
    ensure(violations.is_empty(), || violations.join("; "))?;
    let margin = inst.iter().map(|r| r.optimized - r.simple_random).fold(f64::INFINITY, f64::min);
    Ok(format!("{} instances, zero violations, min margin over simple-random {margin:.3e}", inst.len()))
}

// Grouped solver handles an instance far beyond the dense solver.
fn criterion_9() -> Outcome {
    let widths = [1, 2, 2, 2, 2, 2, 2, 2, 2, 1];
    let net = gen_layered(&widths, GainDist::ComplexGaussian(10.0), 909).map_err(err)?;
    ensure(net.num_nodes() == 18, || "expected 18 nodes".into())?;
    let opts = SolveOptions::default();
    match solve_problem1(&net, &opts) {
        Err(Error::NetworkTooLarge { .. }) => {}
        other => return Err(format!("dense solver was not refused: {:?}", other.map(|r| r.rate))),
    }
    let td = layered_decomposition(&net).map_err(err)?;
    let start = Instant::now();
    let r = solve_problem3(&net, &td, ObjectiveSpec::RATE_MAX, &opts).map_err(err)?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    ensure(r.status == SolveStatus::Optimal, || format!("status {:?}", r.status))?;
    ensure(r.rate > 0.0 && (r.rate - r.min_cut_value).abs() <= 1e-6, || {
        format!("rate {} min-cut {}", r.rate, r.min_cut_value)
    })?;
    Ok(format!("rate {:.6} in {:.1}s, dense solver refused", r.rate, elapsed.as_secs_f64()))
}

fn marginal_oracle(q: &Schedule, bag: NodeSet) -> BTreeMap<NodeSet, f64> {
    let mut out = BTreeMap::new();
    for (m, p) in q.iter() {
        *out.entry(m.intersect(bag)).or_insert(0.0) += p;
    }
    out
}

fn max_map_diff(a: &BTreeMap<NodeSet, f64>, b: &BTreeMap<NodeSet, f64>) -> f64 {
    a.keys()
        .chain(b.keys())
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

// Reconstructed joints reproduce the local distributions and every cut value.
fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let dist = GainDist::ComplexGaussian(10.0);
    let nets = [
        gen_layered(&[1, 2, 2, 1], dist, 1),
        gen_layered(&[1, 3, 2, 1], dist, 2),
        gen_layered(&[1, 2, 3, 1], dist, 3),
        gen_layered(&[1, 2, 1, 2, 1], dist, 4),
        gen_line_two_hop(5, dist, 5),
        gen_line_two_hop(6, dist, 6),
        gen_line_two_hop(7, dist, 7),
        gen_five_relay(dist, 8),
        gen_layered(&[1, 3, 1], dist, 9),
        gen_layered(&[1, 1, 2, 1, 1], dist, 10),
    ];
    let mut worst = 0.0f64;
    for (i, net) in nets.into_iter().enumerate() {
        let net = net.map_err(err)?;
        let n = net.num_nodes();
        let td = auto_decomposition(&net).map_err(err)?;
        let joint = random_schedule(&mut rng, n, 1 << (n - 1));
        let groups: Vec<Vec<usize>> = td.bags.iter().map(|b| b.to_vec()).collect();
        let gs = GroupSchedule::from_joint(&joint, groups).map_err(err)?;
        let rebuilt = reconstruct_joint(&td, &gs).map_err(err)?;
        for (bi, &bag) in td.bags.iter().enumerate() {
            let d = max_map_diff(&marginal_oracle(&rebuilt, bag), gs.local(bi));
            worst = worst.max(d);
            ensure(d <= 1e-9, || format!("network {i} bag {bi}: marginal off by {d:.3e}"))?;
        }
        for omega in all_cuts(&net) {
            let cut = Cut::new(&net, omega).map_err(err)?;
            let dec = decomposed_cut_value(&net, &cut, &gs).map_err(err)?;
            let exp = expected_cut_value(&net, &cut, &rebuilt).map_err(err)?;
            let d = (dec - exp).abs();
            worst = worst.max(d);
            ensure(d <= 1e-9, || format!("network {i} cut {:?}: decomposed {dec} joint {exp}", omega.to_vec()))?;
        }
    }
    Ok(format!("10 group schedules, max deviation {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("naive schedule ratio is one half", criterion_1),
        ("grouped LP equals dense LP", criterion_2),
        ("min-norm point equals brute force", criterion_3),
        ("cut functions are submodular", criterion_4),
        ("single relay closed form", criterion_5),
        ("linear deterministic capacity", criterion_6),
        ("duty curve monotone and convex", criterion_7),
        ("optimized dominates baselines", criterion_8),
        ("grouped solver scales past dense cap", criterion_9),
        ("joint reconstruction fidelity", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
