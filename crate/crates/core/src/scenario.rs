//! Scenario documents: JSON schema, validation and conversion to the
//! in-memory model.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::addressing::{NodeId, MAX_SCENARIO_NODE_ID};
use crate::engine::{EngineConfig, Redundancy, TrickleConfig};
use crate::messages::Mop;
use crate::simulator::Topology;
use crate::time::SimDuration;

/// Traffic source: `count` packets from `src` to `dst`, the first at
/// `start` and then every `interval`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flow {
    pub src: NodeId,
    pub dst: NodeId,
    pub start: SimDuration,
    pub count: u32,
    pub interval: SimDuration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mop: Mop,
    pub duration: SimDuration,
    pub seed: u64,
    pub engine: EngineConfig,
    pub topology: Topology,
    pub flows: Vec<Flow>,
}

// ---- document form ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub mop: i64,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub trickle: TrickleDoc,
    #[serde(default = "default_dis_timeout")]
    pub dis_timeout_s: f64,
    #[serde(default = "default_dao_delay")]
    pub dao_delay_s: f64,
    pub nodes: Vec<NodeDoc>,
    pub links: Vec<LinkDoc>,
    #[serde(default)]
    pub flows: Vec<FlowDoc>,
}

fn default_dis_timeout() -> f64 {
    5.0
}

fn default_dao_delay() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrickleDoc {
    #[serde(default = "default_i_min")]
    pub i_min_s: f64,
    #[serde(default = "default_doublings")]
    pub doublings: i64,
    #[serde(default)]
    pub k: KDoc,
}

fn default_i_min() -> f64 {
    1.0
}

fn default_doublings() -> i64 {
    8
}

impl Default for TrickleDoc {
    fn default() -> Self {
        TrickleDoc {
            i_min_s: default_i_min(),
            doublings: default_doublings(),
            k: KDoc::default(),
        }
    }
}

/// Redundancy constant: an integer or the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KDoc {
    Count(i64),
    Word(String),
}

impl Default for KDoc {
    fn default() -> Self {
        KDoc::Word("inf".to_owned())
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: i64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub root: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDoc {
    pub a: i64,
    pub b: i64,
    pub delay_s: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowDoc {
    pub src: i64,
    pub dst: i64,
    pub start_s: f64,
    pub count: i64,
    pub interval_s: f64,
}

// ---- validation ----

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    /// Location in the document, e.g. `links[3].delay_s`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario:\n{}", render_errors(.0))]
    Invalid(Vec<ValidationError>),
}

fn render_errors(errors: &[ValidationError]) -> String {
    errors
        .iter()
        .map(|e| format!("  {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Default)]
struct Errors(Vec<ValidationError>);

impl Errors {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(ValidationError {
            path: path.into(),
            message: message.into(),
        });
    }
}

fn positive_duration(errs: &mut Errors, path: &str, secs: f64) -> Option<SimDuration> {
    match SimDuration::from_secs_f64(secs) {
        Some(d) if d > SimDuration::ZERO => Some(d),
        _ => {
            errs.push(
                path,
                format!("must be a positive number of seconds, got {secs}"),
            );
            None
        }
    }
}

fn non_negative_duration(errs: &mut Errors, path: &str, secs: f64) -> Option<SimDuration> {
    let d = SimDuration::from_secs_f64(secs);
    if d.is_none() {
        errs.push(
            path,
            format!("must be a non-negative number of seconds, got {secs}"),
        );
    }
    d
}

fn node_id(errs: &mut Errors, path: &str, raw: i64) -> Option<NodeId> {
    if raw < 1 || raw > i64::from(MAX_SCENARIO_NODE_ID) {
        errs.push(
            path,
            format!("node id {raw} outside 1..={MAX_SCENARIO_NODE_ID}"),
        );
        return None;
    }
    NodeId::new(raw as u32).ok()
}

impl ScenarioDoc {
    pub fn validate(&self) -> Result<Scenario, Vec<ValidationError>> {
        let mut errs = Errors::default();

        let mop = match u8::try_from(self.mop)
            .ok()
            .and_then(|v| Mop::try_from(v).ok())
        {
            Some(m) => Some(m),
            None => {
                errs.push("mop", format!("unassigned/unsupported MOP {}", self.mop));
                None
            }
        };
        let duration = positive_duration(&mut errs, "duration_s", self.duration_s);

        let i_min = positive_duration(&mut errs, "trickle.i_min_s", self.trickle.i_min_s);
        let doublings = match u32::try_from(self.trickle.doublings) {
            Ok(d) if d <= 32 => Some(d),
            _ => {
                errs.push(
                    "trickle.doublings",
                    format!("must be in 0..=32, got {}", self.trickle.doublings),
                );
                None
            }
        };
        let k = match &self.trickle.k {
            KDoc::Word(w) if w == "inf" => Some(Redundancy::Unlimited),
            KDoc::Count(n) if *n >= 1 && *n <= i64::from(u32::MAX) => {
                Some(Redundancy::Limited(*n as u32))
            }
            other => {
                errs.push(
                    "trickle.k",
                    format!("must be a positive integer or \"inf\", got {other:?}"),
                );
                None
            }
        };
        let dis_timeout = positive_duration(&mut errs, "dis_timeout_s", self.dis_timeout_s);
        let dao_delay = non_negative_duration(&mut errs, "dao_delay_s", self.dao_delay_s);

        let mut topology = Topology::new();
        let mut ids = BTreeSet::new();
        let mut roots = 0usize;
        if self.nodes.is_empty() {
            errs.push("nodes", "at least one node required");
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let path = format!("nodes[{i}].id");
            if let Some(id) = node_id(&mut errs, &path, n.id) {
                if !ids.insert(id) {
                    errs.push(path, format!("duplicate node id {id}"));
                    continue;
                }
                topology.add_node(id, n.root);
            }
            roots += usize::from(n.root);
        }
        if roots != 1 {
            errs.push("nodes", format!("exactly one root required, found {roots}"));
        }

        let mut pairs = BTreeSet::new();
        for (i, l) in self.links.iter().enumerate() {
            let endpoint = |field: &str, raw: i64, errs: &mut Errors| {
                let path = format!("links[{i}].{field}");
                let id = node_id(errs, &path, raw)?;
                if !ids.contains(&id) {
                    errs.push(path, format!("unknown node {id}"));
                    return None;
                }
                Some(id)
            };
            let a = endpoint("a", l.a, &mut errs);
            let b = endpoint("b", l.b, &mut errs);
            let delay = positive_duration(&mut errs, &format!("links[{i}].delay_s"), l.delay_s);
            let loss_ok = l.loss.is_finite() && (0.0..1.0).contains(&l.loss);
            if !loss_ok {
                errs.push(
                    format!("links[{i}].loss"),
                    format!("must be in [0, 1), got {}", l.loss),
                );
            }
            if let (Some(a), Some(b)) = (a, b) {
                if a == b {
                    errs.push(format!("links[{i}]"), format!("self-loop on node {a}"));
                    continue;
                }
                if !pairs.insert((a.min(b), a.max(b))) {
                    errs.push(format!("links[{i}]"), format!("duplicate link {a}-{b}"));
                    continue;
                }
                if let (Some(delay), true) = (delay, loss_ok) {
                    topology.add_link(a, b, delay, l.loss);
                }
            }
        }

        let mut flows = Vec::new();
        for (i, f) in self.flows.iter().enumerate() {
            let endpoint = |field: &str, raw: i64, errs: &mut Errors| {
                let path = format!("flows[{i}].{field}");
                let id = node_id(errs, &path, raw)?;
                if !ids.contains(&id) {
                    errs.push(path, format!("unknown node {id}"));
                    return None;
                }
                Some(id)
            };
            let src = endpoint("src", f.src, &mut errs);
            let dst = endpoint("dst", f.dst, &mut errs);
            let start = non_negative_duration(&mut errs, &format!("flows[{i}].start_s"), f.start_s);
            let count = match u32::try_from(f.count) {
                Ok(c) if c >= 1 => Some(c),
                _ => {
                    errs.push(
                        format!("flows[{i}].count"),
                        format!("must be at least 1, got {}", f.count),
                    );
                    None
                }
            };
            let interval =
                positive_duration(&mut errs, &format!("flows[{i}].interval_s"), f.interval_s);
            if let (Some(src), Some(dst), Some(start), Some(count), Some(interval)) =
                (src, dst, start, count, interval)
            {
                flows.push(Flow {
                    src,
                    dst,
                    start,
                    count,
                    interval,
                });
            }
        }

        if !errs.0.is_empty() {
            return Err(errs.0);
        }
        Ok(Scenario {
            mop: mop.expect("no errors"),
            duration: duration.expect("no errors"),
            seed: self.seed,
            engine: EngineConfig {
                trickle: TrickleConfig {
                    i_min: i_min.expect("no errors"),
                    doublings: doublings.expect("no errors"),
                    k: k.expect("no errors"),
                },
                dis_timeout: dis_timeout.expect("no errors"),
                dao_delay: dao_delay.expect("no errors"),
                version: 0,
            },
            topology,
            flows,
        })
    }
}

impl Scenario {
    pub fn from_json(json: &str) -> Result<Scenario, Vec<ValidationError>> {
        let doc: ScenarioDoc = serde_json::from_str(json).map_err(|e| {
            vec![ValidationError {
                path: format!("line {} column {}", e.line(), e.column()),
                message: e.to_string(),
            }]
        })?;
        doc.validate()
    }

    pub fn load(path: &Path) -> Result<Scenario, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_json(&text).map_err(LoadError::Invalid)
    }

    pub fn to_document(&self) -> ScenarioDoc {
        let t = &self.engine.trickle;
        ScenarioDoc {
            mop: i64::from(self.mop.value()),
            duration_s: self.duration.as_secs_f64(),
            seed: self.seed,
            trickle: TrickleDoc {
                i_min_s: t.i_min.as_secs_f64(),
                doublings: i64::from(t.doublings),
                k: match t.k {
                    Redundancy::Unlimited => KDoc::default(),
                    Redundancy::Limited(k) => KDoc::Count(i64::from(k)),
                },
            },
            dis_timeout_s: self.engine.dis_timeout.as_secs_f64(),
            dao_delay_s: self.engine.dao_delay.as_secs_f64(),
            nodes: self
                .topology
                .node_ids()
                .map(|id| NodeDoc {
                    id: i64::from(id.get()),
                    root: self.topology.is_root(id),
                })
                .collect(),
            links: self
                .topology
                .links()
                .iter()
                .map(|l| LinkDoc {
                    a: i64::from(l.a.get()),
                    b: i64::from(l.b.get()),
                    delay_s: l.delay.as_secs_f64(),
                    loss: l.loss,
                })
                .collect(),
            flows: self
                .flows
                .iter()
                .map(|f| FlowDoc {
                    src: i64::from(f.src.get()),
                    dst: i64::from(f.dst.get()),
                    start_s: f.start.as_secs_f64(),
                    count: i64::from(f.count),
                    interval_s: f.interval.as_secs_f64(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document is serializable")
    }
}
