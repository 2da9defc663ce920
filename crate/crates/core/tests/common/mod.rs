//! Shared support for the integration suites: seeded generators plus
//! independently written reference implementations ("oracles") that the
//! production code is checked against.
#![allow(dead_code)]

pub mod diff;
pub mod gen;
pub mod levels_model;
pub mod oracle;
pub mod sigscan;

use std::path::{Path, PathBuf};

/// Repository root (the workspace directory, two levels above this crate).
pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .expect("workspace root")
        .to_path_buf()
}

/// Absolute path of a shipped asset file.
pub fn asset(name: &str) -> PathBuf {
    workspace_root().join("assets").join(name)
}
