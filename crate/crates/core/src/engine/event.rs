//! Engine events and their JSON-lines wire format.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::rules::RuleClass;
use crate::sim::GraphSnapshot;

/// An event with its engine-tick timestamp. Serialized one per line as
/// `{"tick": N, "kind": "message" | "graph" | "external", ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub tick: i64,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventBody {
    Message(MessageEvent),
    Graph(GraphEvent),
    External(ExternalEvent),
}

impl Event {
    /// The event class used for rule dispatch (never `Neutral`).
    pub fn class(&self) -> RuleClass {
        match self.body {
            EventBody::Message(_) => RuleClass::Message,
            EventBody::Graph(_) => RuleClass::Graph,
            EventBody::External(_) => RuleClass::External,
        }
    }
}

/// A delivered publish/subscribe message plus its topic's endpoint sets at
/// delivery time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageEvent {
    /// Fully qualified topic name, namespace included (starts with `/`).
    pub topic: String,
    /// Message package, e.g. "std_msgs" or "sensor_msgs".
    pub msg_type: String,
    /// Type inside the package, e.g. "Header" or "Image".
    pub msg_subtype: String,
    #[serde(with = "payload_b64")]
    pub payload: Vec<u8>,
    /// The node that published this message.
    pub publisher: String,
    pub topic_publishers: BTreeSet<String>,
    pub topic_subscribers: BTreeSet<String>,
}

/// A computation-graph change carrying the post-change snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEvent {
    #[serde(flatten)]
    pub change: GraphChange,
    pub snapshot: GraphSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "change", rename_all = "snake_case")]
pub enum GraphChange {
    NodeAdded { node: String },
    NodeRemoved { node: String },
    TopicAdded { topic: String },
    TopicRemoved { topic: String },
    EndpointChanged { topic: String },
    ServiceChanged { node: String, service: String },
}

/// Events from outside the middleware: IDS alerts and operator signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ExternalEvent {
    IdsAlert { alert_id: String },
    /// "USR1" or "USR2".
    ControlSignal { sig: String },
}

mod payload_b64 {
    use base64::engine::general_purpose::STANDARD;
    use base64::Engine as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(de)?;
        STANDARD.decode(s).map_err(serde::de::Error::custom)
    }
}
