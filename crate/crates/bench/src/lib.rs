//! Experiment harness: timing sweeps, duty-cycle curves, and half-duplex/full-duplex ratio
//! comparisons over random layered networks.
//!
//! Every row carries the instance seed and the `git describe` of the build. Rows come back
//! sorted by sweep key and trial regardless of how trials were scheduled.

use std::time::Instant;

use hdsched::baselines::{full_duplex_bound, hd_fd_ratio, naive_schedule, simple_random_schedule};
use hdsched::grouping::layered_decomposition;
use hdsched::net::{gen_layered, GainDist, Network};
use hdsched::opt::{solve_problem2, solve_problem3, ObjectiveSpec, SolveOptions, SolveResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const VERSION: &str = env!("HDSCHED_GIT_DESCRIBE");

/// Slack for the monotonicity and convexity flags on duty curves.
pub const SHAPE_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Timing,
    DutyCurve,
    RatioCurve,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Dense joint LP.
    Brute2,
    /// LP over the bags of the layered decomposition.
    Grouped3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Layer counts including source and destination.
    pub layers: Vec<usize>,
    pub width: usize,
    pub trials: usize,
    pub seed: u64,
    /// Gain powers `P`.
    pub powers: Vec<f64>,
    pub solvers: Vec<SolverKind>,
    pub grid_points: usize,
    /// Node cap for the dense solver.
    pub brute_cap: usize,
    pub separation_tol: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            kind: ExperimentKind::RatioCurve,
            layers: vec![4],
            width: 4,
            trials: 10,
            seed: 1,
            powers: vec![1.0, 10.0, 100.0],
            solvers: vec![SolverKind::Brute2, SolverKind::Grouped3],
            grid_points: 20,
            brute_cap: 12,
            separation_tol: 1e-10,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        if self.layers.is_empty() || self.powers.is_empty() {
            return Err("layer and power sweeps must be nonempty".into());
        }
        if self.layers.iter().any(|&l| l < 2) {
            return Err("every layer count must be at least 2".into());
        }
        if self.width == 0 {
            return Err("width must be at least 1".into());
        }
        if self.powers.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err("powers must be positive".into());
        }
        if self.kind == ExperimentKind::DutyCurve && self.grid_points < 2 {
            return Err("duty curves need at least 2 grid points".into());
        }
        if self.kind == ExperimentKind::Timing && self.solvers.is_empty() {
            return Err("timing needs at least one solver".into());
        }
        Ok(())
    }

    fn options(&self) -> SolveOptions {
        SolveOptions { separation_tol: self.separation_tol, problem1_cap: self.brute_cap, ..Default::default() }
    }
}

/// Widths `[1, w, …, w, 1]` with `layers` entries.
pub fn layered_widths(layers: usize, width: usize) -> Vec<usize> {
    let mut w = vec![width; layers];
    w[0] = 1;
    w[layers - 1] = 1;
    w
}

/// Seed for trial `trial` of sweep point `point`.
pub fn instance_seed(base: u64, point: usize, trial: usize) -> u64 {
    base.wrapping_mul(1_000_003).wrapping_add(((point as u64) << 20) | trial as u64)
}

pub fn instance(layers: usize, width: usize, power: f64, seed: u64) -> hdsched::Result<Network> {
    gen_layered(&layered_widths(layers, width), GainDist::ComplexGaussian(power), seed)
}

fn solve(net: &Network, solver: SolverKind, obj: ObjectiveSpec, opts: &SolveOptions) -> hdsched::Result<SolveResult> {
    match solver {
        SolverKind::Brute2 => solve_problem2(net, obj, opts),
        SolverKind::Grouped3 => solve_problem3(net, &layered_decomposition(net)?, obj, opts),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub layers: usize,
    pub solver: SolverKind,
    pub trials: usize,
    pub mean_ms: Option<f64>,
    pub min_ms: Option<f64>,
    pub max_ms: Option<f64>,
    pub mean_rate: Option<f64>,
    /// Largest rate difference against the other solver on the same instances.
    pub check: Option<f64>,
    pub status: String,
    pub seed: u64,
    pub version: String,
}

/// Wall-clock time of each solver per layer count. Trials run sequentially so timings are
/// not skewed by sharing cores.
pub fn run_timing(spec: &ExperimentSpec) -> Vec<TimingRow> {
    let opts = spec.options();
    let power = spec.powers[0];
    let mut rows = Vec::new();
    for (point, &layers) in spec.layers.iter().enumerate() {
        let mut rates: Vec<Vec<Option<f64>>> = Vec::new();
        let mut point_rows = Vec::new();
        for &solver in &spec.solvers {
            let mut times = Vec::new();
            let mut solver_rates = Vec::new();
            let mut status = "ok".to_string();
            for trial in 0..spec.trials {
                let seed = instance_seed(spec.seed, point, trial);
                let net = match instance(layers, spec.width, power, seed) {
                    Ok(n) => n,
                    Err(e) => {
                        status = format!("error: {e}");
                        solver_rates.push(None);
                        continue;
                    }
                };
                if solver == SolverKind::Brute2 && net.num_nodes() > spec.brute_cap {
                    status = "refused".into();
                    solver_rates.push(None);
                    continue;
                }
                let start = Instant::now();
                match solve(&net, solver, ObjectiveSpec::RATE_MAX, &opts) {
                    Ok(r) => {
                        times.push(start.elapsed().as_secs_f64() * 1e3);
                        solver_rates.push(Some(r.rate));
                    }
                    Err(e) => {
                        status = format!("error: {e}");
                        solver_rates.push(None);
                    }
                }
            }
            let stat = |f: fn(f64, f64) -> f64| times.iter().copied().reduce(f);
            let ok_rates: Vec<f64> = solver_rates.iter().flatten().copied().collect();
            point_rows.push(TimingRow {
                layers,
                solver,
                trials: spec.trials,
                mean_ms: (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64),
                min_ms: stat(f64::min),
                max_ms: stat(f64::max),
                mean_rate: (!ok_rates.is_empty()).then(|| ok_rates.iter().sum::<f64>() / ok_rates.len() as f64),
                check: None,
                status,
                seed: instance_seed(spec.seed, point, 0),
                version: VERSION.to_string(),
            });
            rates.push(solver_rates);
        }
        if rates.len() == 2 {
            let diffs: Vec<f64> = rates[0]
                .iter()
                .zip(&rates[1])
                .filter_map(|(a, b)| Some((a.as_ref()? - b.as_ref()?).abs()))
                .collect();
            let check = diffs.into_iter().reduce(f64::max);
            for row in &mut point_rows {
                row.check = check;
            }
        }
        rows.extend(point_rows);
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DutyRow {
    pub power: f64,
    pub trial: usize,
    pub point: usize,
    pub c_min: f64,
    pub t_tot: Option<f64>,
    pub status: String,
    /// Shape flags for the whole curve this row belongs to.
    pub monotone_ok: bool,
    pub convex_ok: bool,
    pub seed: u64,
    pub version: String,
}

/// Second differences and steps of `t` within [`SHAPE_SLACK`].
pub fn curve_shape(t: &[f64]) -> (bool, bool) {
    let monotone = t.windows(2).all(|w| w[1] >= w[0] - SHAPE_SLACK);
    let convex = t.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] >= -SHAPE_SLACK);
    (monotone, convex)
}

/// Minimum total duty cycle over an evenly spaced grid of rate floors from 0 to the
/// certified maximum rate, plus one probe just above the maximum that must be infeasible.
pub fn run_duty_curve(spec: &ExperimentSpec) -> Vec<DutyRow> {
    let opts = spec.options();
    let layers = spec.layers[0];
    let jobs: Vec<(usize, f64, usize)> = spec
        .powers
        .iter()
        .enumerate()
        .flat_map(|(pi, &p)| (0..spec.trials).map(move |t| (pi, p, t)))
        .collect();
    let curves: Vec<Vec<DutyRow>> = jobs
        .par_iter()
        .map(|&(pi, power, trial)| {
            let seed = instance_seed(spec.seed, pi, trial);
            let row = |point, c_min, t_tot, status: String| DutyRow {
                power,
                trial,
                point,
                c_min,
                t_tot,
                status,
                monotone_ok: false,
                convex_ok: false,
                seed,
                version: VERSION.to_string(),
            };
            let prep = instance(layers, spec.width, power, seed)
                .and_then(|net| Ok((solve(&net, SolverKind::Grouped3, ObjectiveSpec::RATE_MAX, &opts)?, net)));
            let (max, net) = match prep {
                Ok(v) => v,
                Err(e) => return vec![row(0, 0.0, None, format!("error: {e}"))],
            };
            let top = max.min_cut_value.min(max.rate);
            let n = spec.grid_points;
            let mut rows: Vec<DutyRow> = (0..n)
                .map(|j| {
                    let c = top * j as f64 / (n - 1) as f64;
                    match solve(&net, SolverKind::Grouped3, ObjectiveSpec::duty_min(c), &opts) {
                        Ok(r) => row(j, c, Some(r.t_tot), "ok".into()),
                        Err(hdsched::Error::Infeasible) => row(j, c, None, "infeasible".into()),
                        Err(e) => row(j, c, None, format!("error: {e}")),
                    }
                })
                .collect();
            let probe = 1.001 * max.rate;
            rows.push(match solve(&net, SolverKind::Grouped3, ObjectiveSpec::duty_min(probe), &opts) {
                Ok(r) => row(n, probe, Some(r.t_tot), "ok".into()),
                Err(hdsched::Error::Infeasible) => row(n, probe, None, "infeasible".into()),
                Err(e) => row(n, probe, None, format!("error: {e}")),
            });
            let t: Option<Vec<f64>> = rows[..n].iter().map(|r| r.t_tot).collect();
            let (monotone, convex) = t.map_or((false, false), |t| curve_shape(&t));
            for r in &mut rows {
                r.monotone_ok = monotone;
                r.convex_ok = convex;
            }
            rows
        })
        .collect();
    curves.into_iter().flatten().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioInstance {
    pub power: f64,
    pub trial: usize,
    pub seed: u64,
    pub full_duplex: f64,
    pub optimized: f64,
    pub naive: f64,
    pub simple_random: f64,
}

/// Per-instance half-duplex/full-duplex ratios of the three schedulers.
pub fn ratio_instances(spec: &ExperimentSpec) -> hdsched::Result<Vec<RatioInstance>> {
    let opts = spec.options();
    let layers = spec.layers[0];
    let jobs: Vec<(usize, f64, usize)> = spec
        .powers
        .iter()
        .enumerate()
        .flat_map(|(pi, &p)| (0..spec.trials).map(move |t| (pi, p, t)))
        .collect();
    jobs.par_iter()
        .map(|&(pi, power, trial)| {
            let seed = instance_seed(spec.seed, pi, trial);
            let net = instance(layers, spec.width, power, seed)?;
            let fd = full_duplex_bound(&net)?;
            let opt = solve(&net, SolverKind::Grouped3, ObjectiveSpec::RATE_MAX, &opts)?;
            Ok(RatioInstance {
                power,
                trial,
                seed,
                full_duplex: fd,
                optimized: opt.min_cut_value.min(opt.rate) / fd,
                naive: hd_fd_ratio(&net, &naive_schedule(&net)?)?,
                simple_random: hd_fd_ratio(&net, &simple_random_schedule(&net, seed)?)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub power: f64,
    pub scheduler: String,
    pub trials: usize,
    pub mean_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Instances where this scheduler beats the optimized one by more than 1e-9.
    pub dominance_violations: usize,
    pub seed: u64,
    pub version: String,
}

/// Aggregates [`ratio_instances`] per power and scheduler.
pub fn run_ratio_curve(spec: &ExperimentSpec) -> hdsched::Result<Vec<RatioRow>> {
    let instances = ratio_instances(spec)?;
    let mut rows = Vec::new();
    for &power in &spec.powers {
        let group: Vec<&RatioInstance> = instances.iter().filter(|i| i.power == power).collect();
        let columns: [(&str, fn(&RatioInstance) -> f64); 3] = [
            ("optimized", |i| i.optimized),
            ("naive", |i| i.naive),
            ("simple_random", |i| i.simple_random),
        ];
        for (name, get) in columns {
            let vals: Vec<f64> = group.iter().map(|i| get(i)).collect();
            rows.push(RatioRow {
                power,
                scheduler: name.to_string(),
                trials: vals.len(),
                mean_ratio: vals.iter().sum::<f64>() / vals.len() as f64,
                min_ratio: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max_ratio: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                dominance_violations: group.iter().filter(|i| get(i) > i.optimized + 1e-9).count(),
                seed: spec.seed,
                version: VERSION.to_string(),
            });
        }
    }
    Ok(rows)
}
