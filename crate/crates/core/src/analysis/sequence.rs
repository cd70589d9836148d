//! Control-state transition graphs aggregated over a cohort of runs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::response::{lateral_state, longitudinal_state, LateralState, LongitudinalState};
use super::{sv_longitudinal_accel, AnalysisWindow};
use crate::error::Result;
use crate::log::TrajectoryLog;
use crate::scalar::Scalar;
use crate::sim::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ControlState {
    pub lateral: LateralState,
    pub longitudinal: LongitudinalState,
}

impl ControlState {
    pub fn of<T: Scalar>(steer_deg: T, ax: T) -> Self {
        Self {
            lateral: lateral_state(steer_deg),
            longitudinal: longitudinal_state(ax),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Node {
    State(ControlState),
    Outcome(Outcome),
}

impl Node {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Node::Outcome(_))
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::State(s) => write!(f, "{}/{}", s.lateral.name(), s.longitudinal.name()),
            Node::Outcome(o) => f.write_str(o.name()),
        }
    }
}

impl std::str::FromStr for Node {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(o) = Outcome::ALL.iter().find(|o| o.name() == s) {
            return Ok(Node::Outcome(*o));
        }
        let (lat, lon) = s.split_once('/').ok_or_else(|| format!("bad node `{s}`"))?;
        let lateral = [LateralState::SteerShoulder, LateralState::NoSteering, LateralState::SteerCenter]
            .into_iter()
            .find(|l| l.name() == lat)
            .ok_or_else(|| format!("bad lateral state `{lat}`"))?;
        let longitudinal = [LongitudinalState::Cruising, LongitudinalState::SoftBraking, LongitudinalState::HardBraking]
            .into_iter()
            .find(|l| l.name() == lon)
            .ok_or_else(|| format!("bad longitudinal state `{lon}`"))?;
        Ok(Node::State(ControlState { lateral, longitudinal }))
    }
}

/// One run handed to [`build_sequence_graph`].
#[derive(Debug, Clone, Copy)]
pub struct SequenceRun<'a, T: Scalar> {
    pub log: &'a TrajectoryLog<T>,
    pub window: AnalysisWindow<T>,
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRun {
    pub index: usize,
    pub reason: String,
}

/// Directed transition counts plus per-node initial-state counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceGraph {
    #[serde(with = "edge_list")]
    pub edges: BTreeMap<(Node, Node), usize>,
    #[serde(with = "initial_list")]
    pub initial: BTreeMap<Node, usize>,
    pub runs: usize,
    pub skipped: Vec<SkippedRun>,
}

/// Flow balance of one node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NodeFlow {
    pub initial: usize,
    pub inflow: usize,
    pub outflow: usize,
}

impl SequenceGraph {
    /// Path of a single run: initial state and the ordered transitions.
    pub fn walk<T: Scalar>(run: &SequenceRun<'_, T>) -> Result<(ControlState, Vec<(Node, Node)>)> {
        let outcome = run
            .outcome
            .ok_or_else(|| crate::error::invalid("run has no classified outcome"))?;
        run.window.ensure_covered(run.log)?;
        let ax = sv_longitudinal_accel(run.log)?;
        let log = run.log;
        let i0 = log.index_at(run.window.t_b).unwrap_or(0);
        let i1 = log.index_at(run.window.t_e).unwrap_or(log.samples.len() - 1);
        let state = |i: usize| ControlState::of(log.samples[i].controls.steer_deg, ax[i]);
        let first = state(i0);
        let mut cur = first;
        let mut path = Vec::new();
        for i in i0 + 1..=i1 {
            let s = state(i);
            if s != cur {
                path.push((Node::State(cur), Node::State(s)));
                cur = s;
            }
        }
        path.push((Node::State(cur), Node::Outcome(outcome)));
        Ok((first, path))
    }

    fn add_path(&mut self, first: ControlState, path: &[(Node, Node)]) {
        self.runs += 1;
        *self.initial.entry(Node::State(first)).or_default() += 1;
        for e in path {
            *self.edges.entry(*e).or_default() += 1;
        }
    }

    /// Folds another graph in. Associative and commutative on counts; the
    /// skipped lists are concatenated.
    pub fn merge(mut self, other: SequenceGraph) -> SequenceGraph {
        for (k, v) in other.edges {
            *self.edges.entry(k).or_default() += v;
        }
        for (k, v) in other.initial {
            *self.initial.entry(k).or_default() += v;
        }
        self.runs += other.runs;
        self.skipped.extend(other.skipped);
        self.skipped.sort_by_key(|s| s.index);
        self
    }

    pub fn count(&self, from: Node, to: Node) -> usize {
        self.edges.get(&(from, to)).copied().unwrap_or(0)
    }

    pub fn flows(&self) -> BTreeMap<Node, NodeFlow> {
        let mut m: BTreeMap<Node, NodeFlow> = BTreeMap::new();
        for (n, c) in &self.initial {
            m.entry(*n).or_default().initial += c;
        }
        for ((a, b), c) in &self.edges {
            m.entry(*a).or_default().outflow += c;
            m.entry(*b).or_default().inflow += c;
        }
        m
    }

    /// Non-terminal nodes whose inflow plus initial count differs from outflow.
    pub fn conservation_violations(&self) -> Vec<(Node, NodeFlow)> {
        self.flows()
            .into_iter()
            .filter(|(n, f)| !n.is_terminal() && f.inflow + f.initial != f.outflow)
            .collect()
    }

    pub fn self_loops(&self) -> usize {
        self.edges.iter().filter(|((a, b), _)| a == b).map(|(_, c)| c).sum()
    }

    /// Total count of terminal edges.
    pub fn terminal_count(&self) -> usize {
        self.edges.iter().filter(|((_, b), _)| b.is_terminal()).map(|(_, c)| c).sum()
    }
}

/// Aggregates the runs into one graph. Runs without an outcome, or whose log
/// does not cover the window, are skipped and listed in `skipped`.
pub fn build_sequence_graph<T: Scalar>(runs: &[SequenceRun<'_, T>]) -> SequenceGraph {
    use rayon::prelude::*;
    runs.par_iter()
        .enumerate()
        .map(|(i, run)| {
            let mut g = SequenceGraph::default();
            match SequenceGraph::walk(run) {
                Ok((first, path)) => g.add_path(first, &path),
                Err(e) => g.skipped.push(SkippedRun { index: i, reason: e.to_string() }),
            }
            g
        })
        .reduce(SequenceGraph::default, SequenceGraph::merge)
}

mod edge_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Edge {
        from: Node,
        to: Node,
        count: usize,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<(Node, Node), usize>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(m.iter().map(|((from, to), count)| Edge { from: *from, to: *to, count: *count }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<(Node, Node), usize>, D::Error> {
        let v: Vec<Edge> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|e| ((e.from, e.to), e.count)).collect())
    }
}

mod initial_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        node: Node,
        count: usize,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<Node, usize>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(m.iter().map(|(node, count)| Entry { node: *node, count: *count }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Node, usize>, D::Error> {
        let v: Vec<Entry> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|e| (e.node, e.count)).collect())
    }
}
