//! The detection engine: consumes events serially, evaluates every rule of
//! the matching class (plus class-neutral rules), and executes the action
//! chains of the rules that fired.
//!
//! Evaluation is pure — [`Engine::process_event`] mutates nothing except
//! the instrumentation counters; action execution is the separate, state-
//! changing step inside [`Engine::handle_event`]. Rule batches of 8 or more
//! evaluate in parallel when the `parallel` feature is on; results and
//! warnings are merged back in declaration order, so the two paths are
//! indistinguishable.

pub mod actions;
pub mod event;
pub mod plugin;
pub mod subexpr;
pub mod subproc;
pub mod vars;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::levels::{Cause, LevelManager, NoProcs, ProcRunner, TransitionError, TransitionRecord};
use crate::rules::{validate_ruleset, Expr, Rule, RuleClass, RuleSet, ValidationError};
use crate::sigmatch::{self, SignatureSet};
use actions::{execute_chains, ActionCtx, ActionOutcome, AlertRecord, EXEC_TIMEOUT};
use event::Event;
use plugin::{MapPlugins, PluginRunner};
use subexpr::{eval_call, EvalCtx};
use vars::VariableStore;

/// Rule batches at least this large are evaluated in parallel.
pub const ENGINE_PAR_THRESHOLD: usize = 8;

/// A non-fatal evaluation or execution problem, appended to the engine log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub rule: String,
    pub message: String,
}

/// A rule whose expression evaluated true for an event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleActivation {
    pub index: usize,
    pub rule: String,
}

/// The pure result of evaluating one event against the rule set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Evaluation {
    pub activations: Vec<RuleActivation>,
    pub warnings: Vec<Warning>,
}

/// Everything one event caused: fired rules, per-rule action outcomes, and
/// the new log entries (already appended to the engine's own logs).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventOutcome {
    pub fired: Vec<String>,
    pub outcomes: Vec<(String, Vec<ActionOutcome>)>,
    pub alerts: Vec<AlertRecord>,
    pub transitions: Vec<TransitionRecord>,
    pub warnings: Vec<Warning>,
}

/// One line of the engine's append-only event log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineRecord {
    pub tick: i64,
    pub event_class: RuleClass,
    pub fired: Vec<String>,
    pub warnings: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("rule validation failed: {}", format_validation(.0))]
    Validation(Vec<ValidationError>),
    #[error("cannot read signatures `{path}`: {source}")]
    SignatureIo {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot compile signatures `{path}`: {source}")]
    SignatureCompile {
        path: String,
        source: sigmatch::SigError,
    },
}

fn format_validation(errors: &[ValidationError]) -> String {
    errors
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Step-by-step engine construction; see [`Engine::builder`].
pub struct EngineBuilder {
    ruleset: RuleSet,
    signatures: BTreeMap<String, SignatureSet>,
    signature_base: Option<PathBuf>,
    plugins: Box<dyn PluginRunner>,
    procs: Box<dyn ProcRunner>,
    actions_dir: Option<PathBuf>,
    exec_timeout: Duration,
    epoch: i64,
}

impl EngineBuilder {
    /// Pre-compiled signature sets, keyed by the path string the rules use.
    pub fn signatures(mut self, signatures: BTreeMap<String, SignatureSet>) -> Self {
        self.signatures = signatures;
        self
    }

    /// Loads and compiles every signature file the rule set references,
    /// resolving relative paths against `base`.
    pub fn signature_base(mut self, base: impl Into<PathBuf>) -> Self {
        self.signature_base = Some(base.into());
        self
    }

    pub fn plugins(mut self, plugins: Box<dyn PluginRunner>) -> Self {
        self.plugins = plugins;
        self
    }

    pub fn procs(mut self, procs: Box<dyn ProcRunner>) -> Self {
        self.procs = procs;
        self
    }

    pub fn actions_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.actions_dir = Some(dir.into());
        self
    }

    pub fn exec_timeout(mut self, timeout: Duration) -> Self {
        self.exec_timeout = timeout;
        self
    }

    /// Base value of the `Time` predefined variable (`Time = epoch + tick`).
    pub fn epoch(mut self, epoch: i64) -> Self {
        self.epoch = epoch;
        self
    }

    /// Validates the rule set, loads signatures, and assembles the engine.
    pub fn build(mut self) -> Result<Engine, BuildError> {
        if let Err(errors) = validate_ruleset(&self.ruleset) {
            return Err(BuildError::Validation(errors));
        }
        for path in &self.ruleset.signature_paths {
            if self.signatures.contains_key(path) {
                continue;
            }
            let resolved = match &self.signature_base {
                Some(base) if !Path::new(path).is_absolute() => base.join(path),
                _ => PathBuf::from(path),
            };
            let source =
                std::fs::read_to_string(&resolved).map_err(|source| BuildError::SignatureIo {
                    path: path.clone(),
                    source,
                })?;
            let compiled = SignatureSet::compile(&source).map_err(|source| {
                BuildError::SignatureCompile {
                    path: path.clone(),
                    source,
                }
            })?;
            self.signatures.insert(path.clone(), compiled);
        }
        let mut vars = VariableStore::new();
        vars.set_level(&self.ruleset.levels[0].name);
        let levels = LevelManager::new(self.ruleset.levels.clone(), self.procs);
        Ok(Engine {
            ruleset: self.ruleset,
            vars,
            levels,
            signatures: self.signatures,
            plugins: self.plugins,
            actions_dir: self.actions_dir,
            exec_timeout: self.exec_timeout,
            epoch: self.epoch,
            alerts: Vec::new(),
            event_log: Vec::new(),
            plugin_calls: AtomicU64::new(0),
            eval_counts: Mutex::new(BTreeMap::new()),
        })
    }
}

/// The RIPS core. Owns the rule set, variable store, level manager, loaded
/// signatures, and plugin runner; processes one event at a time.
pub struct Engine {
    ruleset: RuleSet,
    vars: VariableStore,
    levels: LevelManager,
    signatures: BTreeMap<String, SignatureSet>,
    plugins: Box<dyn PluginRunner>,
    actions_dir: Option<PathBuf>,
    exec_timeout: Duration,
    epoch: i64,
    alerts: Vec<AlertRecord>,
    event_log: Vec<EngineRecord>,
    plugin_calls: AtomicU64,
    /// (rule class, event class) → evaluations; class-dispatch instrumentation.
    eval_counts: Mutex<BTreeMap<(RuleClass, RuleClass), u64>>,
}

impl Engine {
    pub fn builder(ruleset: RuleSet) -> EngineBuilder {
        EngineBuilder {
            ruleset,
            signatures: BTreeMap::new(),
            signature_base: None,
            plugins: Box::new(MapPlugins::default()),
            procs: Box::new(NoProcs),
            actions_dir: None,
            exec_timeout: EXEC_TIMEOUT,
            epoch: 0,
        }
    }

    pub fn ruleset(&self) -> &RuleSet {
        &self.ruleset
    }

    pub fn vars(&self) -> &VariableStore {
        &self.vars
    }

    pub fn levels(&self) -> &LevelManager {
        &self.levels
    }

    pub fn current_level(&self) -> &str {
        self.levels.current_name()
    }

    pub fn alerts(&self) -> &[AlertRecord] {
        &self.alerts
    }

    pub fn event_log(&self) -> &[EngineRecord] {
        &self.event_log
    }

    pub fn plugin_call_count(&self) -> u64 {
        self.plugin_calls.load(Ordering::SeqCst)
    }

    /// How many times rules of `rule_class` were evaluated against events
    /// of `event_class`.
    pub fn eval_count(&self, rule_class: RuleClass, event_class: RuleClass) -> u64 {
        *self
            .eval_counts
            .lock()
            .unwrap()
            .get(&(rule_class, event_class))
            .unwrap_or(&0)
    }

    /// Refreshes `Time`/`Uptime` and evaluates every applicable rule against
    /// the event. Pure with respect to engine state: only the predefined
    /// clock variables and instrumentation counters change.
    pub fn process_event(&mut self, ev: &Event) -> Evaluation {
        self.vars.refresh_clock(self.epoch + ev.tick, ev.tick);
        self.evaluate(ev)
    }

    fn evaluate(&self, ev: &Event) -> Evaluation {
        let event_class = ev.class();
        let applicable: Vec<(usize, &Rule)> = self
            .ruleset
            .rules
            .iter()
            .enumerate()
            .filter(|(_, r)| {
                r.inferred_class == event_class || r.inferred_class == RuleClass::Neutral
            })
            .collect();
        {
            let mut counts = self.eval_counts.lock().unwrap();
            for (_, rule) in &applicable {
                *counts.entry((rule.inferred_class, event_class)).or_insert(0) += 1;
            }
        }
        let results = self.evaluate_batch(&applicable, ev);
        let mut evaluation = Evaluation::default();
        for ((index, rule), (fired, warnings)) in applicable.iter().zip(results) {
            evaluation.warnings.extend(warnings);
            if fired {
                evaluation.activations.push(RuleActivation {
                    index: *index,
                    rule: rule.name.clone(),
                });
            }
        }
        evaluation
    }

    fn evaluate_batch(
        &self,
        applicable: &[(usize, &Rule)],
        ev: &Event,
    ) -> Vec<(bool, Vec<Warning>)> {
        // capture only the Sync pieces, so the parallel path never needs
        // the level manager's proc runner to be shareable
        let vars = &self.vars;
        let signatures = &self.signatures;
        let plugins = self.plugins.as_ref();
        let plugin_calls = &self.plugin_calls;
        let eval_one = move |rule: &Rule| {
            let ctx = EvalCtx {
                rule: &rule.name,
                vars,
                signatures,
                plugins,
                plugin_calls,
            };
            let mut warnings = Vec::new();
            let fired = eval_expression(&ctx, &rule.expr, ev, &mut warnings);
            (fired, warnings)
        };
        #[cfg(feature = "parallel")]
        if applicable.len() >= ENGINE_PAR_THRESHOLD {
            return applicable.par_iter().map(|(_, r)| eval_one(r)).collect();
        }
        applicable.iter().map(|(_, r)| eval_one(r)).collect()
    }

    /// Processes one event end to end: evaluate, then execute the chains of
    /// every activated rule in declaration order.
    pub fn handle_event(&mut self, ev: &Event) -> EventOutcome {
        let evaluation = self.process_event(ev);
        let mut outcome = EventOutcome {
            fired: evaluation.activations.iter().map(|a| a.rule.clone()).collect(),
            warnings: evaluation.warnings,
            ..EventOutcome::default()
        };
        let alerts_start = self.alerts.len();
        for activation in &evaluation.activations {
            let chains = self.ruleset.rules[activation.index].chains.clone();
            let mut ctx = ActionCtx {
                tick: ev.tick,
                rule: &activation.rule,
                vars: &mut self.vars,
                levels: &mut self.levels,
                actions_dir: self.actions_dir.as_deref(),
                exec_timeout: self.exec_timeout,
                alerts: &mut self.alerts,
                transitions: &mut outcome.transitions,
                warnings: &mut outcome.warnings,
            };
            let outcomes = execute_chains(&mut ctx, &chains);
            outcome.outcomes.push((activation.rule.clone(), outcomes));
        }
        outcome.alerts = self.alerts[alerts_start..].to_vec();
        self.event_log.push(EngineRecord {
            tick: ev.tick,
            event_class: ev.class(),
            fired: outcome.fired.clone(),
            warnings: outcome.warnings.len(),
        });
        outcome
    }

    /// An operator request from the control channel; bypasses the soft-level
    /// policy and keeps the `Level` variable coherent.
    pub fn admin_set_level(
        &mut self,
        target: &str,
        tick: i64,
    ) -> Result<Option<TransitionRecord>, TransitionError> {
        let result = self.levels.admin_set_level(target, tick)?;
        if result.is_some() {
            self.vars.set_level(target);
        }
        Ok(result)
    }

    /// A level request originating from the modes layer (bottom-up mode
    /// feedback); like an admin request it is never denied by the soft-level
    /// policy.
    pub fn mode_feedback_level(
        &mut self,
        target: &str,
        tick: i64,
    ) -> Result<Option<TransitionRecord>, TransitionError> {
        let result = self.levels.request(target, Cause::ModeFeedback, tick)?;
        if result.is_some() {
            self.vars.set_level(target);
        }
        Ok(result)
    }
}

/// Short-circuit boolean evaluation; `&&`/`||` make the skipping observable
/// through the plugin call counter.
pub fn eval_expression(
    ctx: &EvalCtx,
    expr: &Expr,
    ev: &Event,
    warnings: &mut Vec<Warning>,
) -> bool {
    match expr {
        Expr::Literal(b) => *b,
        Expr::Not(inner) => !eval_expression(ctx, inner, ev, warnings),
        Expr::And(l, r) => {
            eval_expression(ctx, l, ev, warnings) && eval_expression(ctx, r, ev, warnings)
        }
        Expr::Or(l, r) => {
            eval_expression(ctx, l, ev, warnings) || eval_expression(ctx, r, ev, warnings)
        }
        Expr::Call(call) => eval_call(ctx, call, ev, warnings),
    }
}

/// Reads and compiles the signature files a rule set references, resolving
/// relative paths against `base`. Convenience wrapper used by `rips check`.
pub fn load_signature_sets(
    paths: &BTreeSet<String>,
    base: &Path,
) -> Result<BTreeMap<String, SignatureSet>, BuildError> {
    let mut out = BTreeMap::new();
    for path in paths {
        let resolved = if Path::new(path).is_absolute() {
            PathBuf::from(path)
        } else {
            base.join(path)
        };
        let source =
            std::fs::read_to_string(&resolved).map_err(|source| BuildError::SignatureIo {
                path: path.clone(),
                source,
            })?;
        let compiled =
            SignatureSet::compile(&source).map_err(|source| BuildError::SignatureCompile {
                path: path.clone(),
                source,
            })?;
        out.insert(path.clone(), compiled);
    }
    Ok(out)
}
