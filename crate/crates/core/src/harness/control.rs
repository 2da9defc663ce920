//! Operator control: a Unix stream socket speaking a one-line protocol,
//! plus POSIX signal capture.
//!
//! Protocol: the client sends one line — `level <NAME>`, `status`,
//! `signal USR1|USR2`, or `mode <NAME>` — and reads one reply line, either
//! `ok[ details]` or `err <reason>`.

use std::io::{BufRead, BufReader, Read, Write};
use std::os::unix::net::{UnixListener, UnixStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{Receiver, Sender, TryRecvError};
use std::sync::{mpsc, Arc, OnceLock};
use std::thread::JoinHandle;
use std::time::Duration;

/// A parsed control command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControlCommand {
    Level(String),
    Status,
    Signal(String),
    Mode(String),
}

/// Parses one protocol line.
pub fn parse_command(line: &str) -> Result<ControlCommand, String> {
    let mut words = line.split_whitespace();
    let verb = words.next().unwrap_or("");
    let arg = words.next();
    if words.next().is_some() {
        return Err(format!("too many arguments for `{verb}`"));
    }
    match (verb, arg) {
        ("level", Some(name)) => Ok(ControlCommand::Level(name.to_string())),
        ("level", None) => Err("usage: level <NAME>".into()),
        ("status", None) => Ok(ControlCommand::Status),
        ("status", Some(_)) => Err("status takes no argument".into()),
        ("signal", Some(sig @ ("USR1" | "USR2"))) => Ok(ControlCommand::Signal(sig.to_string())),
        ("signal", Some(other)) => Err(format!("unknown signal `{other}` (USR1 or USR2)")),
        ("signal", None) => Err("usage: signal USR1|USR2".into()),
        ("mode", Some(name)) => Ok(ControlCommand::Mode(name.to_string())),
        ("mode", None) => Err("usage: mode <NAME>".into()),
        ("", _) => Err("empty command".into()),
        (other, _) => Err(format!("unknown command `{other}`")),
    }
}

/// One accepted connection: the received line and the stream to answer on.
pub struct ControlRequest {
    pub line: String,
    stream: UnixStream,
}

impl ControlRequest {
    /// Sends the reply line and closes the connection.
    pub fn reply(mut self, text: &str) {
        let _ = writeln!(self.stream, "{text}");
        let _ = self.stream.flush();
    }
}

/// Accepts connections on a background thread; the scheduler drains parsed
/// requests once per tick, so command effects stay on the engine thread.
pub struct ControlServer {
    rx: Receiver<ControlRequest>,
    shutdown: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
    path: PathBuf,
}

impl ControlServer {
    pub fn bind(path: &Path) -> std::io::Result<ControlServer> {
        let _ = std::fs::remove_file(path); // stale socket from a dead run
        let listener = UnixListener::bind(path)?;
        listener.set_nonblocking(true)?;
        let shutdown = Arc::new(AtomicBool::new(false));
        let (tx, rx) = mpsc::channel();
        let flag = Arc::clone(&shutdown);
        let thread = std::thread::Builder::new()
            .name("rips-control".into())
            .spawn(move || accept_loop(listener, tx, flag))
            .expect("spawn control thread");
        Ok(ControlServer {
            rx,
            shutdown,
            thread: Some(thread),
            path: path.to_path_buf(),
        })
    }

    /// All requests that arrived since the last drain.
    pub fn drain(&self) -> Vec<ControlRequest> {
        let mut out = Vec::new();
        loop {
            match self.rx.try_recv() {
                Ok(req) => out.push(req),
                Err(TryRecvError::Empty | TryRecvError::Disconnected) => break,
            }
        }
        out
    }
}

impl Drop for ControlServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
        let _ = std::fs::remove_file(&self.path);
    }
}

fn accept_loop(listener: UnixListener, tx: Sender<ControlRequest>, shutdown: Arc<AtomicBool>) {
    while !shutdown.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _)) => {
                if let Some(req) = read_request(stream) {
                    if tx.send(req).is_err() {
                        return;
                    }
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(_) => std::thread::sleep(Duration::from_millis(5)),
        }
    }
}

fn read_request(stream: UnixStream) -> Option<ControlRequest> {
    stream.set_nonblocking(false).ok()?;
    stream
        .set_read_timeout(Some(Duration::from_millis(500)))
        .ok()?;
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut line = String::new();
    reader.read_line(&mut line).ok()?;
    let line = line.trim().to_string();
    Some(ControlRequest { line, stream })
}

/// Client side: send one command line, return the reply line.
pub fn send_command(socket: &Path, line: &str) -> std::io::Result<String> {
    let mut stream = UnixStream::connect(socket)?;
    stream.set_read_timeout(Some(Duration::from_secs(5)))?;
    writeln!(stream, "{line}")?;
    stream.flush()?;
    let mut reply = String::new();
    stream.read_to_string(&mut reply)?;
    Ok(reply.trim_end().to_string())
}

// ---- POSIX signals ----------------------------------------------------------

static USR1_PENDING: AtomicBool = AtomicBool::new(false);
static USR2_PENDING: AtomicBool = AtomicBool::new(false);
static HANDLERS: OnceLock<()> = OnceLock::new();

extern "C" fn on_signal(sig: libc::c_int) {
    // async-signal-safe: a single atomic store
    if sig == libc::SIGUSR1 {
        USR1_PENDING.store(true, Ordering::SeqCst);
    } else if sig == libc::SIGUSR2 {
        USR2_PENDING.store(true, Ordering::SeqCst);
    }
}

/// Installs SIGUSR1/SIGUSR2 handlers (once per process).
pub fn install_signal_handlers() {
    HANDLERS.get_or_init(|| unsafe {
        let mut action: libc::sigaction = std::mem::zeroed();
        action.sa_sigaction = on_signal as extern "C" fn(libc::c_int) as usize;
        libc::sigemptyset(&mut action.sa_mask);
        libc::sigaction(libc::SIGUSR1, &action, std::ptr::null_mut());
        libc::sigaction(libc::SIGUSR2, &action, std::ptr::null_mut());
    });
}

/// Signals delivered since the last call, as control-signal names.
pub fn take_signals() -> Vec<&'static str> {
    let mut out = Vec::new();
    if USR1_PENDING.swap(false, Ordering::SeqCst) {
        out.push("USR1");
    }
    if USR2_PENDING.swap(false, Ordering::SeqCst) {
        out.push("USR2");
    }
    out
}
