//! Shared subprocess runner with a wall-clock timeout, used by plugins,
//! exec actions, and level enter/exit procedures.

use std::io::Write;
use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

/// Outcome of a bounded subprocess run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// Process exited; code is the exit status (or -1 for signal death).
    Exited(i32),
    /// Deadline hit; the process was killed.
    TimedOut,
}

/// Spawns `cmd`, optionally writes `stdin_data` to its stdin, and waits up
/// to `timeout`. The child's stdout/stderr are discarded unless the caller
/// configured them on `cmd` beforehand.
pub fn run_with_timeout(
    cmd: &mut Command,
    stdin_data: Option<&[u8]>,
    timeout: Duration,
) -> std::io::Result<RunStatus> {
    cmd.stdin(if stdin_data.is_some() {
        Stdio::piped()
    } else {
        Stdio::null()
    });
    cmd.stdout(Stdio::null()).stderr(Stdio::null());
    let mut child = cmd.spawn()?;
    if let Some(data) = stdin_data {
        if let Some(mut stdin) = child.stdin.take() {
            // a plugin that exits without reading produces EPIPE; that is
            // its prerogative, not an engine error
            let _ = stdin.write_all(data);
        }
    }
    wait_with_deadline(&mut child, timeout)
}

fn wait_with_deadline(child: &mut Child, timeout: Duration) -> std::io::Result<RunStatus> {
    let deadline = Instant::now() + timeout;
    loop {
        if let Some(status) = child.try_wait()? {
            return Ok(RunStatus::Exited(status.code().unwrap_or(-1)));
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(RunStatus::TimedOut);
        }
        std::thread::sleep(Duration::from_millis(2));
    }
}
