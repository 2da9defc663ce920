//! Alert-level table and transition policy.
//!
//! Levels are ordered by declaration, increasing in restrictiveness; the
//! first declared level is where the system starts. Escalation (toward a
//! higher index) is always allowed. Autonomous de-escalation — a rule's
//! `trigger` asking for a lower index — is allowed only while the current
//! level is marked `soft`; an administrator may move in either direction.
//!
//! An allowed transition runs the old level's exit procedure, then the new
//! level's enter procedure (Unix-runlevel style), then commits. Procedure
//! failures are logged, never blocking: absent procedure counts as exit
//! code 0, a spawn failure as -1, a timeout as -2.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::engine::subproc::{run_with_timeout, RunStatus};
use crate::rules::LevelDecl;

/// How long an enter/exit procedure may run before it is killed.
pub const PROC_TIMEOUT: Duration = Duration::from_secs(5);

/// Why a transition happened.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cause {
    /// A rule's `trigger` action; carries the rule name.
    Rule(String),
    /// Operator request over the control channel.
    Admin,
    /// Alignment requested by the system-modes side.
    ModeFeedback,
}

impl Cause {
    /// Autonomous causes are subject to the soft-level de-escalation policy;
    /// human-driven ones are not.
    fn is_autonomous(&self) -> bool {
        matches!(self, Cause::Rule(_))
    }
}

/// One committed transition, as appended to the transition log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub from_level: String,
    pub to_level: String,
    pub cause: Cause,
    pub tick: i64,
    pub exit_proc_status: Option<i32>,
    pub enter_proc_status: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransitionError {
    #[error("unknown level `{0}`")]
    UnknownLevel(String),
    #[error("de-escalation to `{to}` denied: current level `{from}` is not soft")]
    DeniedDeescalation { from: String, to: String },
}

/// Which of the two transition procedures is being run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcKind {
    Exit,
    Enter,
}

/// Runs enter/exit procedures. Implementations must map every failure to an
/// exit code — procedures can delay a transition but never abort it.
pub trait ProcRunner: Send {
    fn run(&mut self, path: &str, kind: ProcKind, from: &str, to: &str) -> i32;
}

/// Spawns procedures as external programs with `RIPS_FROM`/`RIPS_TO` in the
/// environment (and `RIPS_SOCKET` when the control socket is enabled).
pub struct SubprocessProcs {
    base_dir: PathBuf,
    timeout: Duration,
    socket_path: Option<PathBuf>,
}

impl SubprocessProcs {
    pub fn new(base_dir: impl Into<PathBuf>) -> Self {
        SubprocessProcs {
            base_dir: base_dir.into(),
            timeout: PROC_TIMEOUT,
            socket_path: None,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_socket(mut self, socket: impl Into<PathBuf>) -> Self {
        self.socket_path = Some(socket.into());
        self
    }

    fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

impl ProcRunner for SubprocessProcs {
    fn run(&mut self, path: &str, _kind: ProcKind, from: &str, to: &str) -> i32 {
        let mut cmd = std::process::Command::new(self.resolve(path));
        cmd.env("RIPS_FROM", from).env("RIPS_TO", to);
        if let Some(sock) = &self.socket_path {
            cmd.env("RIPS_SOCKET", sock);
        }
        match run_with_timeout(&mut cmd, None, self.timeout) {
            Ok(RunStatus::Exited(code)) => code,
            Ok(RunStatus::TimedOut) => -2,
            Err(_) => -1,
        }
    }
}

/// A runner for tables without procedures (and for tests that only care
/// about policy).
pub struct NoProcs;

impl ProcRunner for NoProcs {
    fn run(&mut self, _path: &str, _kind: ProcKind, _from: &str, _to: &str) -> i32 {
        0
    }
}

/// The level state machine: ordered table, current index, transition log.
pub struct LevelManager {
    levels: Vec<LevelDecl>,
    current: usize,
    procs: Box<dyn ProcRunner>,
    log: Vec<TransitionRecord>,
}

impl LevelManager {
    /// Starts at the first declared level. Panics on an empty table — the
    /// parser already guarantees at least one level.
    pub fn new(levels: Vec<LevelDecl>, procs: Box<dyn ProcRunner>) -> Self {
        assert!(!levels.is_empty(), "level table must not be empty");
        LevelManager {
            levels,
            current: 0,
            procs,
            log: Vec::new(),
        }
    }

    pub fn levels(&self) -> &[LevelDecl] {
        &self.levels
    }

    pub fn current_index(&self) -> usize {
        self.current
    }

    pub fn current_name(&self) -> &str {
        &self.levels[self.current].name
    }

    pub fn log(&self) -> &[TransitionRecord] {
        &self.log
    }

    fn index_of(&self, name: &str) -> Result<usize, TransitionError> {
        self.levels
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| TransitionError::UnknownLevel(name.to_string()))
    }

    /// A rule-driven transition request. `Ok(None)` is the no-op case
    /// (target == current): nothing runs and nothing is logged.
    pub fn trigger_level(
        &mut self,
        target: &str,
        rule: &str,
        tick: i64,
    ) -> Result<Option<TransitionRecord>, TransitionError> {
        self.request(target, Cause::Rule(rule.to_string()), tick)
    }

    /// An operator request: allowed in either direction.
    pub fn admin_set_level(
        &mut self,
        target: &str,
        tick: i64,
    ) -> Result<Option<TransitionRecord>, TransitionError> {
        self.request(target, Cause::Admin, tick)
    }

    /// Shared policy path; exposed so mode feedback can carry its own cause.
    pub fn request(
        &mut self,
        target: &str,
        cause: Cause,
        tick: i64,
    ) -> Result<Option<TransitionRecord>, TransitionError> {
        let to = self.index_of(target)?;
        if to == self.current {
            return Ok(None);
        }
        if to < self.current && cause.is_autonomous() && !self.levels[self.current].soft {
            return Err(TransitionError::DeniedDeescalation {
                from: self.current_name().to_string(),
                to: target.to_string(),
            });
        }
        let from_decl = self.levels[self.current].clone();
        let to_decl = self.levels[to].clone();
        let exit_status = match &from_decl.exit_proc {
            Some(p) => self.procs.run(p, ProcKind::Exit, &from_decl.name, &to_decl.name),
            None => 0,
        };
        let enter_status = match &to_decl.enter_proc {
            Some(p) => self.procs.run(p, ProcKind::Enter, &from_decl.name, &to_decl.name),
            None => 0,
        };
        self.current = to;
        let record = TransitionRecord {
            from_level: from_decl.name,
            to_level: to_decl.name,
            cause,
            tick,
            exit_proc_status: Some(exit_status),
            enter_proc_status: Some(enter_status),
        };
        self.log.push(record.clone());
        Ok(Some(record))
    }
}
