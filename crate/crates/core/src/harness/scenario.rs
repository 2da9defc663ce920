//! Scenario scripts: JSONL timelines of directives driving a run.
//!
//! Each line is an object with a `tick` and a `directive`:
//!
//! ```text
//! {"tick":12,"directive":"sim","op":"add_node","node":"rogue"}
//! {"tick":12,"directive":"expect_level","level":"ALERT"}
//! {"tick":25,"directive":"inject_event","event":{"kind":"external","source":"ids_alert","alert_id":"port_scan"}}
//! {"tick":47,"directive":"admin_level","level":"ALERT"}
//! {"tick":85,"directive":"expect_metric","field":"camera_hz","op":"==","value":10.0}
//! ```
//!
//! Ticks must be non-decreasing. Directives at tick 0 run during setup,
//! before the first tick. Within a tick, action directives (`inject_event`,
//! `admin_level`, `sim`) execute in file order at the start of the tick;
//! `expect_*` directives are checked at the end of the tick, after metrics
//! are recorded.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::engine::event::EventBody;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("scenario line {line}: {message}")]
    BadLine { line: usize, message: String },
    #[error("scenario line {line}: tick {tick} is before tick {prev}")]
    TickOrder { line: usize, tick: i64, prev: i64 },
}

/// A parsed scenario: steps in file order with non-decreasing ticks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioScript {
    pub steps: Vec<ScenarioStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStep {
    pub tick: i64,
    #[serde(flatten)]
    pub directive: Directive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "directive", rename_all = "snake_case")]
pub enum Directive {
    /// Feed one event straight to the engine at this tick.
    InjectEvent { event: EventBody },
    /// Operator level request through the admin path.
    AdminLevel { level: String },
    /// Assert the level at the end of the tick.
    ExpectLevel { level: String },
    /// Assert one metrics field at the end of the tick.
    ExpectMetric {
        field: MetricField,
        op: CmpOp,
        value: MetricValue,
    },
    /// Drive the simulated middleware; graph changes and deliveries flow to
    /// the engine as ordinary events.
    Sim(SimOp),
}

impl Directive {
    /// Expectations run at end of tick; everything else acts at the start.
    pub fn is_expectation(&self) -> bool {
        matches!(
            self,
            Directive::ExpectLevel { .. } | Directive::ExpectMetric { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricField {
    CameraHz,
    FreeCells,
    OccupiedCells,
    Level,
    Mode,
}

impl MetricField {
    pub fn name(self) -> &'static str {
        match self {
            MetricField::CameraHz => "camera_hz",
            MetricField::FreeCells => "free_cells",
            MetricField::OccupiedCells => "occupied_cells",
            MetricField::Level => "level",
            MetricField::Mode => "mode",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds_f64(self, actual: f64, expected: f64) -> bool {
        match self {
            CmpOp::Eq => actual == expected,
            CmpOp::Ne => actual != expected,
            CmpOp::Lt => actual < expected,
            CmpOp::Le => actual <= expected,
            CmpOp::Gt => actual > expected,
            CmpOp::Ge => actual >= expected,
        }
    }
}

/// Numeric or string expectation value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricValue {
    Num(f64),
    Str(String),
}

impl std::fmt::Display for MetricValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricValue::Num(x) => write!(f, "{x}"),
            MetricValue::Str(s) => f.write_str(s),
        }
    }
}

/// Simulator operations available to scripts. Payloads are given as UTF-8
/// text (`payload`) or base64 (`payload_b64`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SimOp {
    AddNode {
        node: String,
    },
    RemoveNode {
        node: String,
    },
    AddPublisher {
        node: String,
        topic: String,
        msg_type: String,
        msg_subtype: String,
    },
    AddSubscriber {
        node: String,
        topic: String,
        msg_type: String,
        msg_subtype: String,
    },
    RemoveEndpoint {
        node: String,
        topic: String,
    },
    DeclareService {
        node: String,
        service: String,
    },
    Schedule {
        node: String,
        topic: String,
        rate_milli: u64,
        #[serde(flatten)]
        payload: PayloadSpec,
    },
    Publish {
        node: String,
        topic: String,
        #[serde(flatten)]
        payload: PayloadSpec,
    },
    SetLifecycle {
        node: String,
        state: String,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PayloadSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_b64: Option<String>,
}

impl PayloadSpec {
    pub fn bytes(&self) -> Result<Vec<u8>, String> {
        match (&self.payload, &self.payload_b64) {
            (Some(text), None) => Ok(text.clone().into_bytes()),
            (None, Some(b64)) => BASE64
                .decode(b64)
                .map_err(|e| format!("bad payload_b64: {e}")),
            (None, None) => Ok(Vec::new()),
            (Some(_), Some(_)) => Err("give either payload or payload_b64, not both".into()),
        }
    }
}

impl ScenarioScript {
    /// The last scripted tick; the run's horizon.
    pub fn max_tick(&self) -> i64 {
        self.steps.last().map_or(0, |s| s.tick)
    }
}

/// Parses a JSONL scenario, enforcing non-decreasing ticks.
pub fn parse_scenario(source: &str) -> Result<ScenarioScript, ScenarioError> {
    let mut steps = Vec::new();
    let mut prev = i64::MIN;
    for (i, line) in source.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let step: ScenarioStep =
            serde_json::from_str(trimmed).map_err(|e| ScenarioError::BadLine {
                line: i + 1,
                message: e.to_string(),
            })?;
        if step.tick < 0 {
            return Err(ScenarioError::BadLine {
                line: i + 1,
                message: format!("negative tick {}", step.tick),
            });
        }
        if step.tick < prev {
            return Err(ScenarioError::TickOrder {
                line: i + 1,
                tick: step.tick,
                prev,
            });
        }
        prev = step.tick;
        steps.push(step);
    }
    Ok(ScenarioScript { steps })
}
