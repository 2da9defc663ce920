//! RIPS core: a rule-driven intrusion prevention engine for robotic
//! publish/subscribe systems, plus the pieces around it — the rule
//! language, a YARA-subset signature matcher, an alert-level state
//! machine, a middleware/computation-graph simulator, operating-mode
//! mitigation, and the scenario harness that drives them together.

pub mod engine;
pub mod gridmap;
pub mod harness;
pub mod levels;
pub mod modes;
pub mod rules;
pub mod sigmatch;
pub mod sim;
pub mod value;
