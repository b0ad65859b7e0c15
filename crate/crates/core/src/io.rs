//! JSON interchange for networks and schedules.
//!
//! Network documents look like
//! `{"nodes": 3, "source": 0, "dest": 2, "model": {"kind": "gaussian_real"},
//!   "edges": [{"u": 0, "v": 1, "gain": "1.0"}]}`.
//! Real gains are decimal strings, complex gains `{"re": "..", "im": ".."}`, ADT shift levels
//! bare integers, and explicit field matrices arrays of rows. Modes are bit strings whose
//! character `v` is `1` when node `v` transmits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{ChannelModel, Edge, GainValue, Network, NodeId, NodeSet};
use crate::schedule::{GroupSchedule, ModeConfig, Schedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelDoc {
    GaussianReal,
    GaussianComplex,
    LinearDeterministic { p: u64, k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainDoc {
    Real(String),
    Complex { re: String, im: String },
    Shift(usize),
    Matrix(Vec<Vec<u64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub u: NodeId,
    pub v: NodeId,
    pub gain: GainDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub nodes: usize,
    pub source: NodeId,
    pub dest: NodeId,
    pub model: ModelDoc,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDoc {
    pub mode: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub nodes: usize,
    pub entries: Vec<ModeDoc>,
}

/// Local modes are bit strings over the group's node list, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScheduleDoc {
    pub groups: Vec<Vec<NodeId>>,
    pub locals: Vec<Vec<ModeDoc>>,
}

fn float_str(x: f64) -> String {
    format!("{x:?}")
}

fn parse_float(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse { line: 0, column: 0, message: format!("bad gain {s:?}: {e}") })
}

impl From<&Network> for NetworkDoc {
    fn from(net: &Network) -> Self {
        let model = match net.model() {
            ChannelModel::GaussianReal => ModelDoc::GaussianReal,
            ChannelModel::GaussianComplex => ModelDoc::GaussianComplex,
            ChannelModel::LinearDeterministic { p, k } => ModelDoc::LinearDeterministic { p, k },
        };
        let edges = net
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                u: e.from,
                v: e.to,
                gain: match &e.gain {
                    GainValue::Real(h) => GainDoc::Real(float_str(*h)),
                    GainValue::Complex { re, im } => GainDoc::Complex { re: float_str(*re), im: float_str(*im) },
                    GainValue::Shift(n) => GainDoc::Shift(*n),
                    GainValue::Matrix(rows) => GainDoc::Matrix(rows.clone()),
                },
            })
            .collect();
        NetworkDoc { nodes: net.num_nodes(), source: net.source(), dest: net.destination(), model, edges }
    }
}

impl NetworkDoc {
    pub fn to_network(&self) -> Result<Network> {
        let model = match self.model {
            ModelDoc::GaussianReal => ChannelModel::GaussianReal,
            ModelDoc::GaussianComplex => ChannelModel::GaussianComplex,
            ModelDoc::LinearDeterministic { p, k } => ChannelModel::LinearDeterministic { p, k },
        };
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let gain = match &e.gain {
                    GainDoc::Real(s) => GainValue::Real(parse_float(s)?),
                    GainDoc::Complex { re, im } => GainValue::Complex { re: parse_float(re)?, im: parse_float(im)? },
                    GainDoc::Shift(n) => GainValue::Shift(*n),
                    GainDoc::Matrix(rows) => GainValue::Matrix(rows.clone()),
                };
                Ok(Edge::new(e.u, e.v, gain))
            })
            .collect::<Result<Vec<_>>>()?;
        Network::new(self.nodes, self.source, self.dest, model, edges)
    }
}

impl From<&Schedule> for ScheduleDoc {
    fn from(q: &Schedule) -> Self {
        let n = q.num_nodes();
        ScheduleDoc {
            nodes: n,
            entries: q
                .iter()
                .map(|(m, p)| ModeDoc { mode: ModeConfig::new(n, m).expect("mode fits").to_bit_string(), p })
                .collect(),
        }
    }
}

impl ScheduleDoc {
    pub fn to_schedule(&self) -> Result<Schedule> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let m = ModeConfig::from_bit_string(&e.mode)?;
                if m.num_nodes() != self.nodes {
                    return Err(Error::InvalidSchedule(format!("mode {:?} is not {} bits long", e.mode, self.nodes)));
                }
                Ok((m.transmitters(), e.p))
            })
            .collect::<Result<Vec<_>>>()?;
        Schedule::new(self.nodes, entries)
    }
}

fn local_bits(group: &[NodeId], m: NodeSet) -> String {
    group.iter().map(|&v| if m.contains(v) { '1' } else { '0' }).collect()
}

impl From<&GroupSchedule> for GroupScheduleDoc {
    fn from(gs: &GroupSchedule) -> Self {
        let groups = gs.groups().to_vec();
        let locals = groups
            .iter()
            .enumerate()
            .map(|(i, g)| gs.local(i).iter().map(|(&m, &p)| ModeDoc { mode: local_bits(g, m), p }).collect())
            .collect();
        GroupScheduleDoc { groups, locals }
    }
}

impl GroupScheduleDoc {
    pub fn to_group_schedule(&self) -> Result<GroupSchedule> {
        if self.groups.len() != self.locals.len() {
            return Err(Error::InvalidSchedule("groups and locals differ in length".into()));
        }
        let mut locals = Vec::with_capacity(self.groups.len());
        for (g, entries) in self.groups.iter().zip(&self.locals) {
            let mut map = BTreeMap::new();
            for e in entries {
                if e.mode.chars().count() != g.len() {
                    return Err(Error::InvalidSchedule(format!("local mode {:?} does not match group {g:?}", e.mode)));
                }
                let mut m = NodeSet::EMPTY;
                for (c, &v) in e.mode.chars().zip(g) {
                    match c {
                        '1' => m = m.with(v),
                        '0' => {}
                        _ => return Err(Error::InvalidSchedule(format!("bad mode character {c:?}"))),
                    }
                }
                *map.entry(m).or_insert(0.0) += e.p;
            }
            locals.push(map);
        }
        let gs = GroupSchedule::new(self.groups.clone(), locals)?;
        gs.validate()?;
        Ok(gs)
    }
}

pub fn network_to_json(net: &Network) -> String {
    serde_json::to_string_pretty(&NetworkDoc::from(net)).expect("serializable")
}

/// Parses and validates a network document.
pub fn network_from_json(text: &str) -> Result<Network> {
    serde_json::from_str::<NetworkDoc>(text)?.to_network()
}

pub fn schedule_to_json(q: &Schedule) -> String {
    serde_json::to_string_pretty(&ScheduleDoc::from(q)).expect("serializable")
}

pub fn schedule_from_json(text: &str) -> Result<Schedule> {
    serde_json::from_str::<ScheduleDoc>(text)?.to_schedule()
}

pub fn group_schedule_to_json(gs: &GroupSchedule) -> String {
    serde_json::to_string_pretty(&GroupScheduleDoc::from(gs)).expect("serializable")
}

pub fn group_schedule_from_json(text: &str) -> Result<GroupSchedule> {
    serde_json::from_str::<GroupScheduleDoc>(text)?.to_group_schedule()
}
