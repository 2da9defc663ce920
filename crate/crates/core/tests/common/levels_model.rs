//! A randomized model check for the alert-level state machine, shared by
//! the property suite and the acceptance gate.
//!
//! Each sequence builds a random level table (every level with recording
//! enter/exit procedures), replays a random request mix, and checks the
//! manager against a hand-maintained model:
//!
//! * restrictiveness is monotone for autonomous causes unless the current
//!   level is declared `soft` — de-escalation otherwise is denied and
//!   leaves the state untouched;
//! * admin and mode-feedback requests move in either direction;
//! * every committed transition runs the outgoing level's exit procedure
//!   before the incoming level's enter procedure, with the right
//!   `from`/`to` pair, and logs both exit codes.

use std::sync::{Arc, Mutex};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rips_core::levels::{Cause, LevelManager, ProcKind, ProcRunner, TransitionError};
use rips_core::rules::LevelDecl;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcCall {
    pub path: String,
    pub kind: ProcKind,
    pub from: String,
    pub to: String,
}

/// Records every procedure invocation; the exit code is the numeric suffix
/// of the procedure path, so logged statuses are checkable.
#[derive(Clone, Default)]
pub struct RecordingProcs {
    pub calls: Arc<Mutex<Vec<ProcCall>>>,
}

impl ProcRunner for RecordingProcs {
    fn run(&mut self, path: &str, kind: ProcKind, from: &str, to: &str) -> i32 {
        self.calls.lock().unwrap().push(ProcCall {
            path: path.to_string(),
            kind,
            from: from.to_string(),
            to: to.to_string(),
        });
        path.rsplit('_').next().unwrap().parse().unwrap()
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Stats {
    pub sequences: usize,
    pub requests: usize,
    pub committed: usize,
    pub denied: usize,
    pub soft_deescalations: usize,
    pub noops: usize,
}

/// One random table: 2-5 levels, random soft flags, procs on every level.
pub fn random_table<R: Rng>(rng: &mut R) -> Vec<LevelDecl> {
    let n = rng.gen_range(2..=5);
    (0..n)
        .map(|i| LevelDecl {
            name: format!("L{i}"),
            soft: rng.gen_bool(0.5),
            enter_proc: Some(format!("procs/enter_{i}")),
            exit_proc: Some(format!("procs/exit_{i}")),
        })
        .collect()
}

/// Replays one random request sequence against a fresh manager and checks
/// every policy decision against the model. Panics on the first violation.
pub fn check_one_sequence<R: Rng>(rng: &mut R, stats: &mut Stats) {
    let table = random_table(rng);
    let procs = RecordingProcs::default();
    let calls = procs.calls.clone();
    let mut mgr = LevelManager::new(table.clone(), Box::new(procs));

    let mut model_index = 0usize;
    let mut model_log_len = 0usize;
    let admin_allowed = rng.gen_bool(0.7); // some sequences are rule-only

    for step in 0..rng.gen_range(1..=20) {
        let tick = step as i64;
        let cause = match rng.gen_range(0..10) {
            0..=6 => Cause::Rule(format!("r{step}")),
            7..=8 if admin_allowed => Cause::Admin,
            7..=8 => Cause::Rule(format!("r{step}")),
            _ if admin_allowed => Cause::ModeFeedback,
            _ => Cause::Rule(format!("r{step}")),
        };
        stats.requests += 1;

        // occasionally request a level that does not exist
        if rng.gen_bool(0.05) {
            let before = mgr.current_index();
            let err = mgr.request("GHOST", cause.clone(), tick).unwrap_err();
            assert_eq!(err, TransitionError::UnknownLevel("GHOST".into()));
            assert_eq!(mgr.current_index(), before, "failed request moved the level");
            continue;
        }

        let target = rng.gen_range(0..table.len());
        let target_name = table[target].name.clone();
        let calls_before = calls.lock().unwrap().len();
        let autonomous = matches!(cause, Cause::Rule(_));
        let result = mgr.request(&target_name, cause.clone(), tick);

        if target == model_index {
            // no-op: no transition, no procs, no log entry
            assert_eq!(result, Ok(None), "self-transition must be a silent no-op");
            assert_eq!(calls.lock().unwrap().len(), calls_before);
            stats.noops += 1;
        } else if target < model_index && autonomous && !table[model_index].soft {
            // hard level: autonomous de-escalation denied, state untouched
            assert_eq!(
                result,
                Err(TransitionError::DeniedDeescalation {
                    from: table[model_index].name.clone(),
                    to: target_name.clone(),
                }),
                "autonomous de-escalation from a hard level must be denied"
            );
            assert_eq!(calls.lock().unwrap().len(), calls_before);
            stats.denied += 1;
        } else {
            // committed transition
            if target < model_index && autonomous {
                assert!(
                    table[model_index].soft,
                    "autonomous de-escalation committed from non-soft level"
                );
                stats.soft_deescalations += 1;
            }
            let record = result
                .unwrap_or_else(|e| panic!("transition unexpectedly failed: {e}"))
                .expect("committed transition returns a record");
            assert_eq!(record.from_level, table[model_index].name);
            assert_eq!(record.to_level, target_name);
            assert_eq!(record.cause, cause);
            assert_eq!(record.tick, tick);
            // exit code = numeric suffix of the recorded proc path
            assert_eq!(record.exit_proc_status, Some(model_index as i32));
            assert_eq!(record.enter_proc_status, Some(target as i32));

            let calls_now = calls.lock().unwrap();
            assert_eq!(calls_now.len(), calls_before + 2, "exactly exit + enter must run");
            let exit = &calls_now[calls_before];
            let enter = &calls_now[calls_before + 1];
            assert_eq!(exit.kind, ProcKind::Exit, "exit must run before enter");
            assert_eq!(exit.path, format!("procs/exit_{model_index}"));
            assert_eq!(enter.kind, ProcKind::Enter);
            assert_eq!(enter.path, format!("procs/enter_{target}"));
            for call in [exit, enter] {
                assert_eq!(call.from, table[model_index].name);
                assert_eq!(call.to, target_name);
            }
            drop(calls_now);

            model_index = target;
            model_log_len += 1;
            stats.committed += 1;
        }

        assert_eq!(mgr.current_index(), model_index);
        assert_eq!(mgr.current_name(), table[model_index].name);
        assert_eq!(mgr.log().len(), model_log_len);
    }
    stats.sequences += 1;
}

/// Runs `n` independent random sequences from one seed.
pub fn run_random_sequences(seed: u64, n: usize) -> Stats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Stats::default();
    for _ in 0..n {
        check_one_sequence(&mut rng, &mut stats);
    }
    stats
}
