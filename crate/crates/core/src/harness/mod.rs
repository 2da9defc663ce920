//! The daemon runtime: one scheduler loop wiring the simulator, detection
//! engine, level manager, system modes, and grid map together, driven by a
//! scenario script and an optional control socket.
//!
//! Tick phases, in order: (1) scheduled simulator publications, (2) scripted
//! action directives, (3) control socket, signals, and IDS feed, (4) metrics
//! recording, (5) scripted expectations, (6) optional realtime pacing.
//! Directives at tick 0 run during setup before the loop.

pub mod config;
pub mod control;
pub mod scenario;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::engine::event::{Event, EventBody, ExternalEvent};
use crate::engine::plugin::SubprocessPlugins;
use crate::engine::{BuildError, Engine};
use crate::gridmap::{GridMap, MapError};
use crate::levels::{SubprocessProcs, TransitionRecord};
use crate::modes::{parse_modes_config, ModesConfig, ModesError};
use crate::rules::{parse_ruleset, ParseError};
use crate::sim::{Lifecycle, SimError, Simulator};
pub use config::DaemonConfig;
use control::{parse_command, ControlCommand, ControlServer};
use scenario::{
    parse_scenario, CmpOp, Directive, MetricField, MetricValue, ScenarioError, ScenarioScript,
    ScenarioStep, SimOp,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("rules: {0}")]
    Rules(#[from] ParseError),
    #[error("{0}")]
    Engine(#[from] BuildError),
    #[error("modes: {0}")]
    Modes(#[from] ModesError),
    #[error("map: {0}")]
    Map(#[from] MapError),
    #[error("scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("config: {0}")]
    Config(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One row of the per-tick metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub tick: i64,
    /// Messages observed on the camera topic this tick, scaled to per-second.
    pub camera_hz: f64,
    pub free_cells: usize,
    /// Keep-out cells counted as occupied.
    pub occupied_cells: usize,
    pub level: String,
    pub mode: String,
}

impl MetricsRecord {
    pub const CSV_HEADER: &'static str = "tick,camera_hz,free_cells,occupied_cells,level,mode";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{:.1},{},{},{},{}",
            self.tick, self.camera_hz, self.free_cells, self.occupied_cells, self.level, self.mode
        )
    }
}

/// First failed expectation of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioFailure {
    pub tick: i64,
    pub message: String,
}

/// Everything a finished run produced.
#[derive(Debug)]
pub struct RunReport {
    pub metrics: Vec<MetricsRecord>,
    pub transitions: Vec<TransitionRecord>,
    pub alerts: Vec<crate::engine::actions::AlertRecord>,
    pub failure: Option<ScenarioFailure>,
    pub ticks_run: i64,
}

impl RunReport {
    /// 0 when every expectation held.
    pub fn exit_status(&self) -> i32 {
        if self.failure.is_none() {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct TraceLine<'a> {
    #[serde(flatten)]
    event: &'a Event,
    fired: &'a [String],
}

/// Polling reader for the append-only IDS feed (`{"alert":"id"}` lines).
struct IdsFeed {
    reader: BufReader<File>,
    partial: String,
}

impl IdsFeed {
    fn open(path: &Path) -> std::io::Result<IdsFeed> {
        let file = File::options()
            .read(true)
            .append(true)
            .create(true)
            .open(path)?;
        Ok(IdsFeed {
            reader: BufReader::new(file),
            partial: String::new(),
        })
    }

    /// Complete alert ids appended since the last poll.
    fn poll(&mut self) -> Vec<String> {
        #[derive(Deserialize)]
        struct FeedLine {
            alert: String,
        }
        let mut out = Vec::new();
        let mut chunk = String::new();
        while let Ok(n) = self.reader.read_line(&mut chunk) {
            if n == 0 {
                break;
            }
            self.partial.push_str(&chunk);
            chunk.clear();
            if !self.partial.ends_with('\n') {
                continue; // wait for the rest of the line
            }
            let line = std::mem::take(&mut self.partial);
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            match serde_json::from_str::<FeedLine>(line) {
                Ok(fl) => out.push(fl.alert),
                Err(e) => eprintln!("[rips] ids feed: skipping bad line: {e}"),
            }
        }
        out
    }
}

/// The wired daemon. Build with [`Runtime::new`], drive with [`Runtime::run`].
pub struct Runtime {
    config: DaemonConfig,
    engine: Engine,
    sim: Simulator,
    map: GridMap,
    modes: ModesConfig,
    script: ScenarioScript,
    control: Option<ControlServer>,
    ids_feed: Option<IdsFeed>,
    trace_out: Option<BufWriter<File>>,
    metrics_out: Option<BufWriter<File>>,
    alert_out: Option<BufWriter<File>>,
    transition_out: Option<BufWriter<File>>,
    /// Inferred mode shown in metrics and status replies.
    current_mode: String,
    keepout_armed: bool,
    camera_msgs: u64,
    tick: i64,
    metrics: Vec<MetricsRecord>,
    /// Modes warned about once already (bound to a level but undefined).
    warned_modes: BTreeSet<String>,
}

impl Runtime {
    pub fn new(config: DaemonConfig) -> Result<Runtime, HarnessError> {
        let read = |path: &Path| std::fs::read_to_string(path).map_err(io_err(path));

        let ruleset = parse_ruleset(&read(&config.rules_path)?)?;
        let modes = parse_modes_config(&read(&config.modes_path)?)?;
        for warning in &modes.validation_warnings {
            eprintln!("[rips] modes: {warning}");
        }
        let map = GridMap::parse(&read(&config.map_path)?)?;
        let script = match &config.scenario_path {
            Some(p) => parse_scenario(&read(p)?)?,
            None => ScenarioScript::default(),
        };

        // explicit level→mode bindings must point at defined modes
        for (level, mode) in &config.level_modes {
            if ruleset.level(level).is_some() && !modes.modes.contains_key(mode) {
                return Err(HarnessError::Config(format!(
                    "level `{level}` is bound to mode `{mode}`, which the modes file does not define"
                )));
            }
        }

        let mut builder = Engine::builder(ruleset).epoch(config.epoch);
        if let Some(parent) = config.rules_path.parent() {
            builder = builder.signature_base(parent);
        }
        if let Some(dir) = &config.plugins_dir {
            builder = builder.plugins(Box::new(SubprocessPlugins::new(dir)));
        }
        if let Some(dir) = &config.procs_dir {
            let mut procs = SubprocessProcs::new(dir);
            if let Some(sock) = &config.socket_path {
                procs = procs.with_socket(sock);
            }
            builder = builder.procs(Box::new(procs));
        }
        if let Some(dir) = &config.actions_dir {
            builder = builder.actions_dir(dir);
        }
        let engine = builder.build()?;

        let control = match &config.socket_path {
            Some(p) => Some(ControlServer::bind(p).map_err(io_err(p))?),
            None => None,
        };
        if config.install_signal_handlers {
            control::install_signal_handlers();
        }
        let ids_feed = match &config.ids_feed_path {
            Some(p) => Some(IdsFeed::open(p).map_err(io_err(p))?),
            None => None,
        };
        let writer = |path: &Option<PathBuf>| -> Result<Option<BufWriter<File>>, HarnessError> {
            match path {
                Some(p) => Ok(Some(BufWriter::new(
                    File::create(p).map_err(io_err(p))?,
                ))),
                None => Ok(None),
            }
        };
        let trace_out = writer(&config.trace_path)?;
        let metrics_out = writer(&config.metrics_path)?;
        let alert_out = writer(&config.alert_log_path)?;
        let transition_out = writer(&config.transition_log_path)?;

        let tick_rate = config.tick_rate.max(1);
        Ok(Runtime {
            sim: Simulator::new(tick_rate),
            engine,
            map,
            modes,
            script,
            control,
            ids_feed,
            trace_out,
            metrics_out,
            alert_out,
            transition_out,
            current_mode: crate::modes::UNKNOWN_MODE.to_string(),
            keepout_armed: false,
            camera_msgs: 0,
            tick: 0,
            metrics: Vec::new(),
            warned_modes: BTreeSet::new(),
            config,
        })
    }

    pub fn current_level(&self) -> &str {
        self.engine.current_level()
    }

    pub fn current_mode(&self) -> &str {
        &self.current_mode
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    /// Runs the scripted timeline to its horizon (the last scripted tick).
    pub fn run(&mut self) -> Result<RunReport, HarnessError> {
        let horizon = self.script.max_tick();
        if let Some(w) = &mut self.metrics_out {
            writeln!(w, "{}", MetricsRecord::CSV_HEADER)
                .map_err(io_err(self.config.metrics_path.as_deref().unwrap_or(Path::new(""))))?;
        }

        let steps = self.script.steps.clone();
        let mut cursor = 0usize;

        // setup: tick-0 directives, then the base level's mode
        self.tick = 0;
        self.camera_msgs = 0;
        let setup_end = advance(&steps, cursor, 0);
        let mut failure = self.run_actions(&steps[cursor..setup_end])?;
        let base_level = self.engine.levels().levels()[0].name.clone();
        self.enter_level_mode(&base_level);
        if failure.is_none() {
            failure = self.finish_tick(&steps[cursor..setup_end], false)?;
        }
        cursor = setup_end;

        let started = Instant::now();
        let mut ticks_run = 0;
        if failure.is_none() {
            for tick in 1..=horizon {
                self.tick = tick;
                self.camera_msgs = 0;

                // 1. scheduled publications
                for msg in self.sim.step_publications() {
                    self.process(EventBody::Message(msg))?;
                }

                // 2. scripted actions
                let end = advance(&steps, cursor, tick);
                let tick_steps = &steps[cursor..end];
                cursor = end;
                failure = self.run_actions(tick_steps)?;
                if failure.is_none() {
                    // 3–5. control, metrics, expectations
                    failure = self.finish_tick(tick_steps, true)?;
                }
                if failure.is_some() {
                    break;
                }

                // 6. pacing
                if self.config.realtime {
                    let target = Duration::from_secs_f64(
                        tick as f64 / self.config.tick_rate.max(1) as f64,
                    );
                    if let Some(left) = target.checked_sub(started.elapsed()) {
                        std::thread::sleep(left);
                    }
                }
                ticks_run = tick;
            }
        }

        self.flush()?;
        Ok(RunReport {
            metrics: std::mem::take(&mut self.metrics),
            transitions: self.engine.levels().log().to_vec(),
            alerts: self.engine.alerts().to_vec(),
            failure,
            ticks_run,
        })
    }

    fn run_actions(
        &mut self,
        tick_steps: &[ScenarioStep],
    ) -> Result<Option<ScenarioFailure>, HarnessError> {
        for step in tick_steps.iter().filter(|s| !s.directive.is_expectation()) {
            if let Some(failure) = self.run_action(&step.directive)? {
                return Ok(Some(failure));
            }
        }
        Ok(None)
    }

    /// Phases 3–5: control/signals/IDS drains, the metrics row (skipped
    /// during setup), then this tick's expectations.
    fn finish_tick(
        &mut self,
        tick_steps: &[ScenarioStep],
        record_metrics: bool,
    ) -> Result<Option<ScenarioFailure>, HarnessError> {
        let requests = self.control.as_ref().map(ControlServer::drain).unwrap_or_default();
        for req in requests {
            let reply = self.handle_control_line(&req.line)?;
            req.reply(&reply);
        }
        if self.config.install_signal_handlers {
            for sig in control::take_signals() {
                self.process(EventBody::External(ExternalEvent::ControlSignal {
                    sig: sig.to_string(),
                }))?;
            }
        }
        let alerts = match &mut self.ids_feed {
            Some(feed) => feed.poll(),
            None => Vec::new(),
        };
        for alert_id in alerts {
            self.process(EventBody::External(ExternalEvent::IdsAlert { alert_id }))?;
        }

        let record = self.metrics_record();
        if record_metrics {
            if let Some(w) = &mut self.metrics_out {
                writeln!(w, "{}", record.csv_line()).map_err(io_err(
                    self.config.metrics_path.as_deref().unwrap_or(Path::new("")),
                ))?;
            }
            self.metrics.push(record.clone());
        }

        for step in tick_steps.iter().filter(|s| s.directive.is_expectation()) {
            if let Some(failure) = self.check_expectation(&step.directive, &record) {
                return Ok(Some(failure));
            }
        }
        Ok(None)
    }

    fn run_action(&mut self, directive: &Directive) -> Result<Option<ScenarioFailure>, HarnessError> {
        let tick = self.tick;
        let fail = move |message: String| ScenarioFailure { tick, message };
        match directive {
            Directive::InjectEvent { event } => {
                self.process(event.clone())?;
                Ok(None)
            }
            Directive::AdminLevel { level } => match self.engine.admin_set_level(level, self.tick) {
                Ok(Some(record)) => {
                    self.after_transition(&record)?;
                    Ok(None)
                }
                Ok(None) => Ok(None),
                Err(e) => Ok(Some(fail(format!("admin_level: {e}")))),
            },
            Directive::Sim(op) => match self.run_sim_op(op) {
                Ok((graph_events, message)) => {
                    for ev in graph_events {
                        self.process(EventBody::Graph(ev))?;
                    }
                    if let Some(msg) = message {
                        self.process(EventBody::Message(msg))?;
                    }
                    Ok(None)
                }
                Err(e) => Ok(Some(fail(format!("sim: {e}")))),
            },
            Directive::ExpectLevel { .. } | Directive::ExpectMetric { .. } => unreachable!(),
        }
    }

    /// Runs one simulator operation, returning the events it produced.
    #[allow(clippy::type_complexity)]
    fn run_sim_op(
        &mut self,
        op: &SimOp,
    ) -> Result<(Vec<crate::engine::event::GraphEvent>, Option<crate::engine::event::MessageEvent>), String>
    {
        let mut graph_events = Vec::new();
        let mut message = None;
        match op {
            SimOp::AddNode { node } => {
                graph_events.push(self.sim.add_node(node).map_err(stringify)?);
            }
            SimOp::RemoveNode { node } => {
                graph_events.push(self.sim.remove_node(node).map_err(stringify)?);
            }
            SimOp::AddPublisher {
                node,
                topic,
                msg_type,
                msg_subtype,
            } => {
                graph_events.push(
                    self.sim
                        .add_publisher(node, topic, msg_type, msg_subtype)
                        .map_err(stringify)?,
                );
            }
            SimOp::AddSubscriber {
                node,
                topic,
                msg_type,
                msg_subtype,
            } => {
                graph_events.push(
                    self.sim
                        .add_subscriber(node, topic, msg_type, msg_subtype)
                        .map_err(stringify)?,
                );
            }
            SimOp::RemoveEndpoint { node, topic } => {
                graph_events.push(self.sim.remove_endpoint(node, topic).map_err(stringify)?);
            }
            SimOp::DeclareService { node, service } => {
                graph_events.push(self.sim.declare_service(node, service).map_err(stringify)?);
            }
            SimOp::Schedule {
                node,
                topic,
                rate_milli,
                payload,
            } => {
                self.sim
                    .schedule_publication(node, topic, *rate_milli, payload.bytes()?)
                    .map_err(stringify)?;
            }
            SimOp::Publish {
                node,
                topic,
                payload,
            } => {
                message = self
                    .sim
                    .publish(node, topic, payload.bytes()?)
                    .map_err(stringify)?;
            }
            SimOp::SetLifecycle { node, state } => {
                let lc = Lifecycle::parse(state)
                    .ok_or_else(|| format!("unknown lifecycle `{state}`"))?;
                self.sim.set_lifecycle(node, lc).map_err(stringify)?;
            }
        }
        Ok((graph_events, message))
    }

    /// Feeds one event through the engine, then routes its consequences:
    /// trace line, alert/transition logs, mode application per transition.
    fn process(&mut self, body: EventBody) -> Result<(), HarnessError> {
        let event = Event {
            tick: self.tick,
            body,
        };
        let outcome = self.engine.handle_event(&event);
        if let EventBody::Message(m) = &event.body {
            if m.topic == self.config.camera_topic {
                self.camera_msgs += 1;
            }
        }
        for warning in &outcome.warnings {
            eprintln!("[rips] rule {}: {}", warning.rule, warning.message);
        }
        if let Some(w) = &mut self.trace_out {
            let line = TraceLine {
                event: &event,
                fired: &outcome.fired,
            };
            writeln!(w, "{}", serde_json::to_string(&line).expect("trace json")).map_err(
                io_err(self.config.trace_path.as_deref().unwrap_or(Path::new(""))),
            )?;
        }
        for alert in &outcome.alerts {
            if let Some(w) = &mut self.alert_out {
                writeln!(w, "{}", serde_json::to_string(alert).expect("alert json")).map_err(
                    io_err(self.config.alert_log_path.as_deref().unwrap_or(Path::new(""))),
                )?;
            }
        }
        for record in &outcome.transitions {
            self.after_transition(record)?;
        }
        Ok(())
    }

    /// Transition bookkeeping: log line plus the bound mode's application.
    fn after_transition(&mut self, record: &TransitionRecord) -> Result<(), HarnessError> {
        if let Some(w) = &mut self.transition_out {
            writeln!(w, "{}", serde_json::to_string(record).expect("transition json")).map_err(
                io_err(
                    self.config
                        .transition_log_path
                        .as_deref()
                        .unwrap_or(Path::new("")),
                ),
            )?;
        }
        self.enter_level_mode(&record.to_level);
        Ok(())
    }

    /// Applies the mode bound to a level and re-syncs the keep-out zone.
    fn enter_level_mode(&mut self, level: &str) {
        let is_base = self.engine.levels().levels()[0].name == level;
        let Some(mode) = self.config.mode_for_level(level, is_base) else {
            return;
        };
        if !self.modes.modes.contains_key(&mode) {
            if self.warned_modes.insert(mode.clone()) {
                eprintln!("[rips] level `{level}`: no mode `{mode}` defined; skipping");
            }
            return;
        }
        self.apply_mode(&mode);
    }

    fn apply_mode(&mut self, mode: &str) {
        match self.modes.apply_mode(mode, &mut self.sim) {
            Ok(state) => {
                for part in &state.missing_parts {
                    eprintln!("[rips] mode {mode}: part `{part}` not present; partial application");
                }
                if !state.ambiguous_candidates.is_empty() {
                    eprintln!(
                        "[rips] mode inference ambiguous between {:?}",
                        state.ambiguous_candidates
                    );
                }
                self.current_mode = state.inferred_mode;
            }
            Err(e) => eprintln!("[rips] apply mode {mode}: {e}"),
        }
        self.sync_keepout();
    }

    /// The keep-out zone mirrors the binding part's activation.
    fn sync_keepout(&mut self) {
        let armed = self
            .sim
            .node(&self.config.keepout_part)
            .is_some_and(|n| n.lifecycle == Lifecycle::Active);
        if armed != self.keepout_armed {
            self.map.toggle_keepout(self.config.keepout_zone, armed);
            self.keepout_armed = armed;
        }
    }

    /// Answers one control-protocol line. Effects run on the scheduler
    /// thread, so this is only called between tick phases.
    pub fn handle_control_line(&mut self, line: &str) -> Result<String, HarnessError> {
        let command = match parse_command(line) {
            Ok(c) => c,
            Err(e) => return Ok(format!("err {e}")),
        };
        match command {
            ControlCommand::Status => Ok(format!(
                "ok level={} mode={} tick={}",
                self.engine.current_level(),
                self.current_mode,
                self.tick
            )),
            ControlCommand::Level(name) => match self.engine.admin_set_level(&name, self.tick) {
                Ok(Some(record)) => {
                    self.after_transition(&record)?;
                    Ok("ok".to_string())
                }
                Ok(None) => Ok("ok".to_string()),
                Err(e) => Ok(format!("err {e}")),
            },
            ControlCommand::Signal(sig) => {
                self.process(EventBody::External(ExternalEvent::ControlSignal { sig }))?;
                Ok("ok".to_string())
            }
            ControlCommand::Mode(name) => {
                if !self.modes.modes.contains_key(&name) {
                    return Ok(format!("err unknown mode `{name}`"));
                }
                self.apply_mode(&name);
                // bottom-up feedback: a level bound to this mode follows it
                let bound_level = self
                    .config
                    .level_modes
                    .iter()
                    .find(|(_, m)| **m == name)
                    .map(|(l, _)| l.clone());
                if let Some(level) = bound_level {
                    if level != self.engine.current_level()
                        && self.engine.ruleset().level(&level).is_some()
                    {
                        match self.engine.mode_feedback_level(&level, self.tick) {
                            Ok(Some(record)) => self.after_transition(&record)?,
                            Ok(None) => {}
                            Err(e) => eprintln!("[rips] mode feedback: {e}"),
                        }
                    }
                }
                Ok("ok".to_string())
            }
        }
    }

    fn metrics_record(&self) -> MetricsRecord {
        MetricsRecord {
            tick: self.tick,
            camera_hz: self.camera_msgs as f64 * self.config.tick_rate.max(1) as f64,
            free_cells: self.map.free_cells(),
            occupied_cells: self.map.reported_occupied(),
            level: self.engine.current_level().to_string(),
            mode: self.current_mode.clone(),
        }
    }

    fn check_expectation(
        &self,
        directive: &Directive,
        record: &MetricsRecord,
    ) -> Option<ScenarioFailure> {
        let fail = |message: String| {
            Some(ScenarioFailure {
                tick: self.tick,
                message,
            })
        };
        match directive {
            Directive::ExpectLevel { level } => {
                if self.engine.current_level() != level {
                    return fail(format!(
                        "expected level {level}, found {}",
                        self.engine.current_level()
                    ));
                }
                None
            }
            Directive::ExpectMetric { field, op, value } => {
                let actual_num = match field {
                    MetricField::CameraHz => Some(record.camera_hz),
                    MetricField::FreeCells => Some(record.free_cells as f64),
                    MetricField::OccupiedCells => Some(record.occupied_cells as f64),
                    MetricField::Level | MetricField::Mode => None,
                };
                match (actual_num, value) {
                    (Some(actual), MetricValue::Num(expected)) => {
                        if !op.holds_f64(actual, *expected) {
                            return fail(format!(
                                "expected {} {} {expected}, found {actual}",
                                field.name(),
                                op.symbol()
                            ));
                        }
                        None
                    }
                    (None, MetricValue::Str(expected)) => {
                        let actual = match field {
                            MetricField::Level => &record.level,
                            MetricField::Mode => &record.mode,
                            _ => unreachable!(),
                        };
                        let holds = match op {
                            CmpOp::Eq => actual == expected,
                            CmpOp::Ne => actual != expected,
                            _ => {
                                return fail(format!(
                                    "operator {} is not defined for string field {}",
                                    op.symbol(),
                                    field.name()
                                ))
                            }
                        };
                        if !holds {
                            return fail(format!(
                                "expected {} {} {expected}, found {actual}",
                                field.name(),
                                op.symbol()
                            ));
                        }
                        None
                    }
                    (Some(_), MetricValue::Str(s)) => fail(format!(
                        "field {} is numeric but the expectation value `{s}` is a string",
                        field.name()
                    )),
                    (None, MetricValue::Num(n)) => fail(format!(
                        "field {} is a string but the expectation value {n} is numeric",
                        field.name()
                    )),
                }
            }
            _ => None,
        }
    }

    fn flush(&mut self) -> Result<(), HarnessError> {
        let pairs: [(&mut Option<BufWriter<File>>, &Option<PathBuf>); 4] = [
            (&mut self.trace_out, &self.config.trace_path),
            (&mut self.metrics_out, &self.config.metrics_path),
            (&mut self.alert_out, &self.config.alert_log_path),
            (&mut self.transition_out, &self.config.transition_log_path),
        ];
        for (writer, path) in pairs {
            if let Some(w) = writer {
                w.flush()
                    .map_err(io_err(path.as_deref().unwrap_or(Path::new(""))))?;
            }
        }
        Ok(())
    }
}

fn advance(steps: &[ScenarioStep], from: usize, tick: i64) -> usize {
    let mut end = from;
    while end < steps.len() && steps[end].tick == tick {
        end += 1;
    }
    end
}

fn stringify(e: SimError) -> String {
    e.to_string()
}

/// Builds a runtime from the config and runs the scripted timeline.
pub fn run_scenario(config: DaemonConfig) -> Result<RunReport, HarnessError> {
    Runtime::new(config)?.run()
}
