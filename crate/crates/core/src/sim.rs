//! Simulated publish/subscribe middleware.
//!
//! The simulator owns the computation graph (nodes, topics, services),
//! schedules periodic publications on a discrete tick clock, and turns
//! every mutation into a graph event carrying the post-change snapshot.
//! It is the stand-in for the robotic middleware the detector monitors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::engine::event::{GraphChange, GraphEvent, MessageEvent};
use crate::value::Value;

/// Immutable view of the computation graph at one version.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GraphSnapshot {
    pub nodes: BTreeSet<String>,
    pub topics: BTreeMap<String, TopicInfo>,
    /// Service names offered per node.
    pub services: BTreeMap<String, BTreeSet<String>>,
    /// Strictly increases with every mutation.
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TopicInfo {
    pub publishers: BTreeSet<String>,
    pub subscribers: BTreeSet<String>,
    pub msg_type: String,
    pub msg_subtype: String,
}

impl GraphSnapshot {
    /// Endpoint sets of a topic; absent topics read as empty.
    pub fn topic_publishers(&self, topic: &str) -> BTreeSet<String> {
        self.topics
            .get(topic)
            .map(|t| t.publishers.clone())
            .unwrap_or_default()
    }

    pub fn topic_subscribers(&self, topic: &str) -> BTreeSet<String> {
        self.topics
            .get(topic)
            .map(|t| t.subscribers.clone())
            .unwrap_or_default()
    }

    /// Services offered by a node; absent nodes read as empty.
    pub fn node_services(&self, node: &str) -> BTreeSet<String> {
        self.services.get(node).cloned().unwrap_or_default()
    }
}

/// Activation lifecycle of a simulated node. Inactive nodes publish
/// nothing; reduced operation halves the publish rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lifecycle {
    Active,
    Inactive,
    Reduced,
}

impl Lifecycle {
    pub fn parse(s: &str) -> Option<Lifecycle> {
        Some(match s {
            "active" => Lifecycle::Active,
            "inactive" => Lifecycle::Inactive,
            "reduced" => Lifecycle::Reduced,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Lifecycle::Active => "active",
            Lifecycle::Inactive => "inactive",
            Lifecycle::Reduced => "reduced",
        }
    }
}

/// Per-node simulation state beyond the pure graph view.
#[derive(Debug, Clone)]
pub struct SimNode {
    pub name: String,
    pub lifecycle: Lifecycle,
    pub parameters: BTreeMap<String, Value>,
    /// Periodic publications: topic, rate in millihertz, payload template,
    /// and the integer accumulator driving the discrete schedule.
    publications: Vec<Publication>,
}

#[derive(Debug, Clone)]
struct Publication {
    topic: String,
    rate_milli: u64,
    payload: Vec<u8>,
    /// Ticks this publication has been schedulable (node not inactive),
    /// weighted by rate. `sent` counts messages already emitted.
    weighted_ticks: u64,
    sent: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("node `{0}` already exists")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown topic `{0}`")]
    UnknownTopic(String),
    #[error("node `{node}` is not an endpoint of `{topic}`")]
    NotAnEndpoint { node: String, topic: String },
    #[error("node `{node}` is not a registered publisher on `{topic}`")]
    NotAPublisher { node: String, topic: String },
}

/// The middleware simulator. Single-owner: one thread mutates it and hands
/// snapshot copies (and events) to the rest of the system.
#[derive(Debug, Default)]
pub struct Simulator {
    graph: GraphSnapshot,
    nodes: BTreeMap<String, SimNode>,
    /// Ticks per second of the discrete clock.
    pub tick_rate: u64,
}

impl Simulator {
    pub fn new(tick_rate: u64) -> Simulator {
        Simulator {
            graph: GraphSnapshot::default(),
            nodes: BTreeMap::new(),
            tick_rate: tick_rate.max(1),
        }
    }

    /// Immutable copy of the current graph, version-tagged.
    pub fn snapshot(&self) -> GraphSnapshot {
        self.graph.clone()
    }

    pub fn node(&self, name: &str) -> Option<&SimNode> {
        self.nodes.get(name)
    }

    pub fn node_names(&self) -> impl Iterator<Item = &String> {
        self.nodes.keys()
    }

    fn bump(&mut self) {
        self.graph.version += 1;
    }

    fn graph_event(&self, change: GraphChange) -> GraphEvent {
        GraphEvent {
            change,
            snapshot: self.graph.clone(),
        }
    }

    // ---- graph mutations --------------------------------------------------

    pub fn add_node(&mut self, name: &str) -> Result<GraphEvent, SimError> {
        if self.nodes.contains_key(name) {
            return Err(SimError::DuplicateNode(name.to_string()));
        }
        self.nodes.insert(
            name.to_string(),
            SimNode {
                name: name.to_string(),
                lifecycle: Lifecycle::Active,
                parameters: BTreeMap::new(),
                publications: Vec::new(),
            },
        );
        self.graph.nodes.insert(name.to_string());
        self.bump();
        Ok(self.graph_event(GraphChange::NodeAdded {
            node: name.to_string(),
        }))
    }

    /// Removes a node and cascades all its endpoints away; the cascade is a
    /// single mutation producing a single event.
    pub fn remove_node(&mut self, name: &str) -> Result<GraphEvent, SimError> {
        if self.nodes.remove(name).is_none() {
            return Err(SimError::UnknownNode(name.to_string()));
        }
        self.graph.nodes.remove(name);
        self.graph.services.remove(name);
        self.graph.topics.retain(|_, info| {
            info.publishers.remove(name);
            info.subscribers.remove(name);
            !info.publishers.is_empty() || !info.subscribers.is_empty()
        });
        self.bump();
        Ok(self.graph_event(GraphChange::NodeRemoved {
            node: name.to_string(),
        }))
    }

    pub fn add_publisher(
        &mut self,
        node: &str,
        topic: &str,
        msg_type: &str,
        msg_subtype: &str,
    ) -> Result<GraphEvent, SimError> {
        self.add_endpoint(node, topic, msg_type, msg_subtype, true)
    }

    pub fn add_subscriber(
        &mut self,
        node: &str,
        topic: &str,
        msg_type: &str,
        msg_subtype: &str,
    ) -> Result<GraphEvent, SimError> {
        self.add_endpoint(node, topic, msg_type, msg_subtype, false)
    }

    fn add_endpoint(
        &mut self,
        node: &str,
        topic: &str,
        msg_type: &str,
        msg_subtype: &str,
        publisher: bool,
    ) -> Result<GraphEvent, SimError> {
        if !self.nodes.contains_key(node) {
            return Err(SimError::UnknownNode(node.to_string()));
        }
        let new_topic = !self.graph.topics.contains_key(topic);
        let info = self.graph.topics.entry(topic.to_string()).or_default();
        if new_topic {
            info.msg_type = msg_type.to_string();
            info.msg_subtype = msg_subtype.to_string();
        }
        if publisher {
            info.publishers.insert(node.to_string());
        } else {
            info.subscribers.insert(node.to_string());
        }
        self.bump();
        let change = if new_topic {
            GraphChange::TopicAdded {
                topic: topic.to_string(),
            }
        } else {
            GraphChange::EndpointChanged {
                topic: topic.to_string(),
            }
        };
        Ok(self.graph_event(change))
    }

    /// Drops one endpoint (publisher or subscriber). A topic left with no
    /// endpoints disappears.
    pub fn remove_endpoint(&mut self, node: &str, topic: &str) -> Result<GraphEvent, SimError> {
        let info = self
            .graph
            .topics
            .get_mut(topic)
            .ok_or_else(|| SimError::UnknownTopic(topic.to_string()))?;
        let was =
            info.publishers.remove(node) as u8 + info.subscribers.remove(node) as u8;
        if was == 0 {
            return Err(SimError::NotAnEndpoint {
                node: node.to_string(),
                topic: topic.to_string(),
            });
        }
        let emptied = info.publishers.is_empty() && info.subscribers.is_empty();
        if emptied {
            self.graph.topics.remove(topic);
        }
        if let Some(n) = self.nodes.get_mut(node) {
            n.publications.retain(|p| p.topic != topic);
        }
        self.bump();
        let change = if emptied {
            GraphChange::TopicRemoved {
                topic: topic.to_string(),
            }
        } else {
            GraphChange::EndpointChanged {
                topic: topic.to_string(),
            }
        };
        Ok(self.graph_event(change))
    }

    pub fn declare_service(&mut self, node: &str, service: &str) -> Result<GraphEvent, SimError> {
        if !self.nodes.contains_key(node) {
            return Err(SimError::UnknownNode(node.to_string()));
        }
        self.graph
            .services
            .entry(node.to_string())
            .or_default()
            .insert(service.to_string());
        self.bump();
        Ok(self.graph_event(GraphChange::ServiceChanged {
            node: node.to_string(),
            service: service.to_string(),
        }))
    }

    // ---- lifecycle and parameters (no graph events) ------------------------

    /// Sets a node's lifecycle. Purely a simulation-state change: the graph
    /// does not alter, so no event is emitted.
    pub fn set_lifecycle(&mut self, node: &str, lc: Lifecycle) -> Result<(), SimError> {
        let n = self
            .nodes
            .get_mut(node)
            .ok_or_else(|| SimError::UnknownNode(node.to_string()))?;
        n.lifecycle = lc;
        Ok(())
    }

    pub fn set_parameter(&mut self, node: &str, key: &str, value: Value) -> Result<(), SimError> {
        let n = self
            .nodes
            .get_mut(node)
            .ok_or_else(|| SimError::UnknownNode(node.to_string()))?;
        n.parameters.insert(key.to_string(), value);
        Ok(())
    }

    // ---- publishing --------------------------------------------------------

    /// Registers a periodic publication for a node that is already a
    /// publisher on the topic. `rate_milli` is millihertz (10_000 = 10 Hz).
    pub fn schedule_publication(
        &mut self,
        node: &str,
        topic: &str,
        rate_milli: u64,
        payload: Vec<u8>,
    ) -> Result<(), SimError> {
        if !self
            .graph
            .topics
            .get(topic)
            .is_some_and(|t| t.publishers.contains(node))
        {
            return Err(SimError::NotAPublisher {
                node: node.to_string(),
                topic: topic.to_string(),
            });
        }
        let n = self
            .nodes
            .get_mut(node)
            .ok_or_else(|| SimError::UnknownNode(node.to_string()))?;
        n.publications.push(Publication {
            topic: topic.to_string(),
            rate_milli,
            payload,
            weighted_ticks: 0,
            sent: 0,
        });
        Ok(())
    }

    /// One-shot publication from an active registered publisher. Inactive
    /// publishers deliver nothing (`None`); unregistered ones are a fault.
    pub fn publish(
        &mut self,
        node: &str,
        topic: &str,
        payload: Vec<u8>,
    ) -> Result<Option<MessageEvent>, SimError> {
        let n = self
            .nodes
            .get(node)
            .ok_or_else(|| SimError::UnknownNode(node.to_string()))?;
        let info = self
            .graph
            .topics
            .get(topic)
            .ok_or_else(|| SimError::UnknownTopic(topic.to_string()))?;
        if !info.publishers.contains(node) {
            return Err(SimError::NotAPublisher {
                node: node.to_string(),
                topic: topic.to_string(),
            });
        }
        if n.lifecycle == Lifecycle::Inactive {
            return Ok(None);
        }
        Ok(Some(MessageEvent {
            topic: topic.to_string(),
            msg_type: info.msg_type.clone(),
            msg_subtype: info.msg_subtype.clone(),
            payload,
            publisher: node.to_string(),
            topic_publishers: info.publishers.clone(),
            topic_subscribers: info.subscribers.clone(),
        }))
    }

    /// Advances the periodic publication schedule by one tick and returns
    /// the due messages in deterministic (node, registration) order.
    ///
    /// The schedule is integer-exact: over T schedulable ticks a publication
    /// at rate r emits exactly ⌊T·r/tick_rate⌋ messages. Reduced lifecycle
    /// accrues ticks at half weight; inactive accrues nothing.
    pub fn step_publications(&mut self) -> Vec<MessageEvent> {
        let tick_rate = self.tick_rate;
        let mut due: Vec<(String, String, Vec<u8>)> = Vec::new();
        for node in self.nodes.values_mut() {
            let weight = match node.lifecycle {
                Lifecycle::Active => 2,
                Lifecycle::Reduced => 1,
                Lifecycle::Inactive => 0,
            };
            if weight == 0 {
                continue;
            }
            for pb in &mut node.publications {
                pb.weighted_ticks += weight;
                // weighted_ticks counts half-ticks, hence the extra factor 2
                let owed = pb.weighted_ticks * pb.rate_milli / (2 * 1000 * tick_rate);
                while pb.sent < owed {
                    pb.sent += 1;
                    due.push((node.name.clone(), pb.topic.clone(), pb.payload.clone()));
                }
            }
        }
        let mut out = Vec::with_capacity(due.len());
        for (node, topic, payload) in due {
            if let Ok(Some(ev)) = self.publish(&node, &topic, payload) {
                out.push(ev);
            }
        }
        out
    }
}
