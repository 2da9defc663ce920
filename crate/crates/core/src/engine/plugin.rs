//! The `plugin()` subexpression: external message inspectors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use super::event::MessageEvent;
use super::subproc::{run_with_timeout, RunStatus};

pub const DEFAULT_PLUGIN_TIMEOUT: Duration = Duration::from_millis(500);

/// Runs payload-inspection plugins. `Ok(b)` is the plugin's verdict;
/// `Err(reason)` makes the subexpression false and records a warning.
pub trait PluginRunner: Send + Sync {
    fn run(&self, id: &str, event: &MessageEvent) -> Result<bool, String>;
}

/// Production runner: plugins are executables in a configured directory,
/// fed the JSON-serialized message event on stdin. Exit 0 means "true",
/// any other exit means "false"; exceeding the timeout is an error.
pub struct SubprocessPlugins {
    dir: PathBuf,
    timeout: Duration,
}

impl SubprocessPlugins {
    pub fn new(dir: impl Into<PathBuf>) -> SubprocessPlugins {
        SubprocessPlugins {
            dir: dir.into(),
            timeout: DEFAULT_PLUGIN_TIMEOUT,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> SubprocessPlugins {
        self.timeout = timeout;
        self
    }

    /// A plugin id resolves to `<dir>/<id>`, `<dir>/<id>.py`, or
    /// `<dir>/<id>.sh`, in that order. Ids never escape the directory.
    fn resolve(&self, id: &str) -> Option<PathBuf> {
        if id.contains('/') || id.contains("..") {
            return None;
        }
        for candidate in [
            self.dir.join(id),
            self.dir.join(format!("{id}.py")),
            self.dir.join(format!("{id}.sh")),
        ] {
            if candidate.is_file() {
                return Some(candidate);
            }
        }
        None
    }
}

impl PluginRunner for SubprocessPlugins {
    fn run(&self, id: &str, event: &MessageEvent) -> Result<bool, String> {
        let Some(path) = self.resolve(id) else {
            return Err(format!(
                "plugin `{id}` not found in {}",
                self.dir.display()
            ));
        };
        let input = serde_json::to_vec(event)
            .map_err(|e| format!("plugin `{id}`: cannot serialize event: {e}"))?;
        let status = run_with_timeout(
            &mut std::process::Command::new(&path),
            Some(&input),
            self.timeout,
        )
        .map_err(|e| format!("plugin `{id}` failed to spawn: {e}"))?;
        match status {
            RunStatus::Exited(0) => Ok(true),
            RunStatus::Exited(_) => Ok(false),
            RunStatus::TimedOut => Err(format!(
                "plugin `{id}` exceeded {} ms",
                self.timeout.as_millis()
            )),
        }
    }
}

/// In-memory runner for tests and benches: scripted verdicts plus a call
/// counter, so short-circuit behaviour is observable without processes.
#[derive(Debug, Default)]
pub struct MapPlugins {
    verdicts: BTreeMap<String, bool>,
    pub calls: AtomicU64,
}

impl MapPlugins {
    pub fn new(verdicts: impl IntoIterator<Item = (String, bool)>) -> MapPlugins {
        MapPlugins {
            verdicts: verdicts.into_iter().collect(),
            calls: AtomicU64::new(0),
        }
    }

    pub fn call_count(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl PluginRunner for MapPlugins {
    fn run(&self, id: &str, _event: &MessageEvent) -> Result<bool, String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.verdicts
            .get(id)
            .copied()
            .ok_or_else(|| format!("plugin `{id}` not found"))
    }
}

/// Builds a message event for unit tests.
#[doc(hidden)]
pub fn test_message(topic: &str, payload: &[u8]) -> MessageEvent {
    MessageEvent {
        topic: topic.to_string(),
        msg_type: "std_msgs".into(),
        msg_subtype: "String".into(),
        payload: payload.to_vec(),
        publisher: "test_pub".into(),
        topic_publishers: ["test_pub".to_string()].into(),
        topic_subscribers: Default::default(),
    }
}
