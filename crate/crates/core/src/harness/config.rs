//! Daemon configuration: file locations, clock settings, and the bindings
//! that connect alert levels to system modes and the keep-out zone to a
//! mode-managed part.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::gridmap::Rect;

/// Everything a [`super::Runtime`] needs to wire the simulator, engine,
/// level manager, modes, and map together.
#[derive(Debug, Clone)]
pub struct DaemonConfig {
    pub rules_path: PathBuf,
    pub modes_path: PathBuf,
    pub map_path: PathBuf,
    pub scenario_path: Option<PathBuf>,

    /// JSONL of every processed event with the rules it fired.
    pub trace_path: Option<PathBuf>,
    /// Per-tick CSV: `tick,camera_hz,free_cells,occupied_cells,level,mode`.
    pub metrics_path: Option<PathBuf>,
    /// JSONL of alert records.
    pub alert_log_path: Option<PathBuf>,
    /// JSONL of level transition records.
    pub transition_log_path: Option<PathBuf>,
    /// Append-only JSONL feed of `{"alert": "id"}` lines consumed as
    /// external events.
    pub ids_feed_path: Option<PathBuf>,
    /// Unix stream socket answering the control line protocol.
    pub socket_path: Option<PathBuf>,

    /// Directory for `exec(...)` action programs.
    pub actions_dir: Option<PathBuf>,
    /// Directory for `plugin(...)` predicate programs.
    pub plugins_dir: Option<PathBuf>,
    /// Directory for level enter/exit procedures.
    pub procs_dir: Option<PathBuf>,

    /// Pace ticks against the wall clock instead of free-running.
    pub realtime: bool,
    /// Install real SIGUSR1/SIGUSR2 handlers (process-global).
    pub install_signal_handlers: bool,
    /// Discrete ticks per second.
    pub tick_rate: u64,
    /// Value of `Time` at tick 0.
    pub epoch: i64,

    /// Topic whose per-tick message count becomes the `camera_hz` metric.
    pub camera_topic: String,
    /// The high-security rectangle toggled on the map.
    pub keepout_zone: Rect,
    /// The mode-managed part whose activation arms the keep-out zone.
    pub keepout_part: String,
    /// level name → mode name applied on entering that level.
    pub level_modes: BTreeMap<String, String>,
}

impl DaemonConfig {
    pub fn new(
        rules: impl Into<PathBuf>,
        modes: impl Into<PathBuf>,
        map: impl Into<PathBuf>,
    ) -> DaemonConfig {
        DaemonConfig {
            rules_path: rules.into(),
            modes_path: modes.into(),
            map_path: map.into(),
            scenario_path: None,
            trace_path: None,
            metrics_path: None,
            alert_log_path: None,
            transition_log_path: None,
            ids_feed_path: None,
            socket_path: None,
            actions_dir: None,
            plugins_dir: None,
            procs_dir: None,
            realtime: false,
            install_signal_handlers: false,
            tick_rate: 10,
            epoch: 0,
            camera_topic: "/camera/image_raw".to_string(),
            keepout_zone: Rect::new(88, 95, 109, 114),
            keepout_part: "filter_mask_server".to_string(),
            level_modes: Self::default_level_modes(),
        }
    }

    /// The standard binding: every alert level applies the mode of the same
    /// name, except the base level which applies `__DEFAULT__`.
    pub fn default_level_modes() -> BTreeMap<String, String> {
        [
            ("DEFAULT", "__DEFAULT__"),
            ("ALERT", "ALERT"),
            ("COMPROMISED", "COMPROMISED"),
            ("HALT", "HALT"),
        ]
        .into_iter()
        .map(|(l, m)| (l.to_string(), m.to_string()))
        .collect()
    }

    /// The mode bound to a level: the explicit binding, else the mode with
    /// the level's own name, else `__DEFAULT__` for the lowest level.
    pub fn mode_for_level(&self, level: &str, is_base_level: bool) -> Option<String> {
        if let Some(mode) = self.level_modes.get(level) {
            return Some(mode.clone());
        }
        if is_base_level {
            return Some(crate::modes::DEFAULT_MODE.to_string());
        }
        Some(level.to_string())
    }
}
