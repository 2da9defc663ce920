//! System Modes: named operating modes assigning activation states (and
//! parameter values) to system parts, applied to the simulator and inferred
//! back from observed part states.
//!
//! The configuration format is the hierarchical key-value shape used by the
//! System Modes framework:
//!
//! ```text
//! safety:
//!   ros__parameters:
//!     type: system
//!     parts:
//!       image_1_to_2
//!     modes:
//!       __DEFAULT__:
//!         image_1_to_2: active
//!       ALERT:
//!         image_1_to_2: inactive
//!         image_1_to_2.rate: 5
//! ```
//!
//! A mode may assign states to parts absent from the `parts:` list; the
//! union is treated as the managed set, and the discrepancy is surfaced in
//! [`ModesConfig::validation_warnings`].

use std::collections::{BTreeMap, BTreeSet};

use crate::sim::{Lifecycle, SimError, Simulator};
use crate::value::Value;

/// Inference result name used when no single mode matches.
pub const UNKNOWN_MODE: &str = "UNKNOWN";

/// The default mode every configuration must declare.
pub const DEFAULT_MODE: &str = "__DEFAULT__";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModesError {
    #[error("modes config syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: part `{part}` has unknown state `{word}` (expected active or inactive)")]
    UnknownState {
        line: usize,
        part: String,
        word: String,
    },
    #[error("modes config declares no `{DEFAULT_MODE}` mode")]
    MissingDefault,
    #[error("line {line}: unsupported system type `{found}` (only `system`)")]
    UnsupportedType { line: usize, found: String },
    #[error("duplicate mode `{0}`")]
    DuplicateMode(String),
    #[error("unknown mode `{0}`")]
    UnknownMode(String),
}

/// Activation state a mode assigns to a part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartTarget {
    Active,
    Inactive,
}

impl PartTarget {
    pub fn lifecycle(self) -> Lifecycle {
        match self {
            PartTarget::Active => Lifecycle::Active,
            PartTarget::Inactive => Lifecycle::Inactive,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PartTarget::Active => "active",
            PartTarget::Inactive => "inactive",
        }
    }
}

/// One mode's assignment: part states plus per-part parameter values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeSpec {
    pub states: BTreeMap<String, PartTarget>,
    pub params: BTreeMap<String, BTreeMap<String, Value>>,
}

/// A parsed modes configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ModesConfig {
    pub system: String,
    pub declared_parts: Vec<String>,
    pub modes: BTreeMap<String, ModeSpec>,
    /// Parts assigned in a mode but missing from `parts:` — accepted, but
    /// worth surfacing to the operator.
    pub validation_warnings: Vec<String>,
}

/// Result of applying (or observing) a mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub requested_mode: String,
    /// The unique matching mode, or [`UNKNOWN_MODE`].
    pub inferred_mode: String,
    pub part_states: BTreeMap<String, Lifecycle>,
    /// Managed parts that do not exist in the simulator (partial apply).
    pub missing_parts: Vec<String>,
    /// Non-empty when inference found several full matches.
    pub ambiguous_candidates: Vec<String>,
}

/// Outcome of [`ModesConfig::infer_mode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inference {
    Mode(String),
    /// No unique full match; candidates lists the modes that matched when
    /// there were several (ambiguity), empty when none matched.
    Unknown { candidates: Vec<String> },
}

impl Inference {
    pub fn name(&self) -> &str {
        match self {
            Inference::Mode(m) => m,
            Inference::Unknown { .. } => UNKNOWN_MODE,
        }
    }
}

impl ModesConfig {
    /// Every part the configuration manages: the declared list plus any
    /// part a mode assigns.
    pub fn managed_parts(&self) -> BTreeSet<String> {
        let mut parts: BTreeSet<String> = self.declared_parts.iter().cloned().collect();
        for spec in self.modes.values() {
            parts.extend(spec.states.keys().cloned());
            parts.extend(spec.params.keys().cloned());
        }
        parts
    }

    /// Sets every managed part's lifecycle and parameters per the mode's
    /// table. Parts missing from the simulator are reported, and a partial
    /// application infers as [`UNKNOWN_MODE`].
    pub fn apply_mode(&self, mode: &str, sim: &mut Simulator) -> Result<ModeState, ModesError> {
        let spec = self
            .modes
            .get(mode)
            .ok_or_else(|| ModesError::UnknownMode(mode.to_string()))?;
        let mut missing = Vec::new();
        for (part, target) in &spec.states {
            match sim.set_lifecycle(part, target.lifecycle()) {
                Ok(()) => {}
                Err(SimError::UnknownNode(_)) => missing.push(part.clone()),
                Err(e) => {
                    return Err(ModesError::Syntax {
                        line: 0,
                        message: format!("applying `{mode}`: {e}"),
                    })
                }
            }
        }
        for (part, params) in &spec.params {
            for (key, value) in params {
                if sim.set_parameter(part, key, value.clone()).is_err()
                    && !missing.contains(part)
                {
                    missing.push(part.clone());
                }
            }
        }
        missing.sort();
        missing.dedup();
        let observed = self.observe(sim);
        let inference = self.infer_mode(&observed);
        let ambiguous = match &inference {
            Inference::Unknown { candidates } if candidates.len() > 1 => candidates.clone(),
            _ => Vec::new(),
        };
        Ok(ModeState {
            requested_mode: mode.to_string(),
            inferred_mode: inference.name().to_string(),
            part_states: observed,
            missing_parts: missing,
            ambiguous_candidates: ambiguous,
        })
    }

    /// Reads the lifecycle of every managed part present in the simulator.
    pub fn observe(&self, sim: &Simulator) -> BTreeMap<String, Lifecycle> {
        self.managed_parts()
            .into_iter()
            .filter_map(|part| sim.node(&part).map(|n| (part, n.lifecycle)))
            .collect()
    }

    /// Bottom-up inference: the unique mode whose full assignment matches
    /// the observed states. A part observed as `reduced` matches nothing.
    pub fn infer_mode(&self, observed: &BTreeMap<String, Lifecycle>) -> Inference {
        let matching: Vec<String> = self
            .modes
            .iter()
            .filter(|(_, spec)| {
                spec.states.iter().all(|(part, target)| {
                    observed.get(part) == Some(&target.lifecycle())
                })
            })
            .map(|(name, _)| name.clone())
            .collect();
        match matching.len() {
            1 => Inference::Mode(matching.into_iter().next().unwrap()),
            _ => Inference::Unknown {
                candidates: matching,
            },
        }
    }
}

/// Parses the hierarchical modes configuration format.
pub fn parse_modes_config(source: &str) -> Result<ModesConfig, ModesError> {
    let lines = content_lines(source);
    let mut cursor = 0usize;

    let (system, sys_indent) = take_section_header(&lines, &mut cursor, "a system name")?;
    let (params_key, params_indent) =
        take_section_header(&lines, &mut cursor, "`ros__parameters:`")?;
    if params_key != "ros__parameters" || params_indent <= sys_indent {
        let line = lines.get(cursor.saturating_sub(1)).map_or(0, |l| l.number);
        return Err(ModesError::Syntax {
            line,
            message: format!("expected indented `ros__parameters:`, found `{params_key}:`"),
        });
    }

    let mut declared_parts: Vec<String> = Vec::new();
    let mut modes: BTreeMap<String, ModeSpec> = BTreeMap::new();
    let mut section_indent: Option<usize> = None;

    while cursor < lines.len() {
        let line = &lines[cursor];
        if line.indent <= params_indent {
            break;
        }
        let indent = *section_indent.get_or_insert(line.indent);
        if line.indent != indent {
            return Err(ModesError::Syntax {
                line: line.number,
                message: "inconsistent section indentation".to_string(),
            });
        }
        let (key, rest) = split_key(line)?;
        cursor += 1;
        match key.as_str() {
            "type" => {
                if rest != "system" {
                    return Err(ModesError::UnsupportedType {
                        line: line.number,
                        found: rest,
                    });
                }
            }
            "parts" => {
                if !rest.is_empty() {
                    return Err(ModesError::Syntax {
                        line: line.number,
                        message: "`parts:` takes an indented list, not an inline value".into(),
                    });
                }
                while cursor < lines.len() && lines[cursor].indent > indent {
                    let part = lines[cursor].text.trim();
                    if part.contains(':') {
                        return Err(ModesError::Syntax {
                            line: lines[cursor].number,
                            message: format!("part name `{part}` must be a bare identifier"),
                        });
                    }
                    declared_parts.push(part.to_string());
                    cursor += 1;
                }
            }
            "modes" => {
                if !rest.is_empty() {
                    return Err(ModesError::Syntax {
                        line: line.number,
                        message: "`modes:` takes an indented block, not an inline value".into(),
                    });
                }
                let mut mode_indent: Option<usize> = None;
                while cursor < lines.len() && lines[cursor].indent > indent {
                    let mode_line = &lines[cursor];
                    let m_indent = *mode_indent.get_or_insert(mode_line.indent);
                    if mode_line.indent != m_indent {
                        return Err(ModesError::Syntax {
                            line: mode_line.number,
                            message: "inconsistent mode indentation".to_string(),
                        });
                    }
                    let (mode_name, rest) = split_key(mode_line)?;
                    if !rest.is_empty() {
                        return Err(ModesError::Syntax {
                            line: mode_line.number,
                            message: format!("mode `{mode_name}` takes an indented block"),
                        });
                    }
                    cursor += 1;
                    let spec = parse_mode_body(&lines, &mut cursor, m_indent)?;
                    if modes.insert(mode_name.clone(), spec).is_some() {
                        return Err(ModesError::DuplicateMode(mode_name));
                    }
                }
            }
            other => {
                return Err(ModesError::Syntax {
                    line: line.number,
                    message: format!("unknown section `{other}:`"),
                });
            }
        }
    }

    if cursor < lines.len() {
        return Err(ModesError::Syntax {
            line: lines[cursor].number,
            message: "content after the system block".to_string(),
        });
    }
    if !modes.contains_key(DEFAULT_MODE) {
        return Err(ModesError::MissingDefault);
    }

    let declared: BTreeSet<&String> = declared_parts.iter().collect();
    let mut undeclared: BTreeSet<String> = BTreeSet::new();
    for spec in modes.values() {
        for part in spec.states.keys().chain(spec.params.keys()) {
            if !declared.contains(part) {
                undeclared.insert(part.clone());
            }
        }
    }
    let validation_warnings = undeclared
        .into_iter()
        .map(|p| format!("part `{p}` is assigned in a mode but not declared under `parts:`"))
        .collect();

    Ok(ModesConfig {
        system,
        declared_parts,
        modes,
        validation_warnings,
    })
}

fn parse_mode_body(
    lines: &[Line],
    cursor: &mut usize,
    mode_indent: usize,
) -> Result<ModeSpec, ModesError> {
    let mut spec = ModeSpec::default();
    while *cursor < lines.len() && lines[*cursor].indent > mode_indent {
        let line = &lines[*cursor];
        *cursor += 1;
        let (key, value) = split_key(line)?;
        if let Some((part, param)) = key.split_once('.') {
            // parameter assignment: `part.param: value`
            let parsed = parse_scalar(&value);
            spec.params
                .entry(part.to_string())
                .or_default()
                .insert(param.to_string(), parsed);
            continue;
        }
        let target = match value.as_str() {
            "active" => PartTarget::Active,
            "inactive" => PartTarget::Inactive,
            other => {
                return Err(ModesError::UnknownState {
                    line: line.number,
                    part: key,
                    word: other.to_string(),
                })
            }
        };
        spec.states.insert(key, target);
    }
    Ok(spec)
}

struct Line {
    number: usize,
    indent: usize,
    text: String,
}

fn content_lines(source: &str) -> Vec<Line> {
    source
        .lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let without_comment = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            if without_comment.trim().is_empty() {
                return None;
            }
            let indent = without_comment
                .chars()
                .take_while(|c| *c == ' ' || *c == '\t')
                .count();
            Some(Line {
                number: i + 1,
                indent,
                text: without_comment.to_string(),
            })
        })
        .collect()
}

fn take_section_header(
    lines: &[Line],
    cursor: &mut usize,
    what: &str,
) -> Result<(String, usize), ModesError> {
    let Some(line) = lines.get(*cursor) else {
        return Err(ModesError::Syntax {
            line: lines.last().map_or(1, |l| l.number),
            message: format!("expected {what}"),
        });
    };
    *cursor += 1;
    let (key, rest) = split_key(line)?;
    if !rest.is_empty() {
        return Err(ModesError::Syntax {
            line: line.number,
            message: format!("expected {what} with no inline value"),
        });
    }
    Ok((key, line.indent))
}

/// Splits `key: value` (value may be empty). The key keeps dots for
/// parameter assignments.
fn split_key(line: &Line) -> Result<(String, String), ModesError> {
    let text = line.text.trim();
    let Some((key, rest)) = text.split_once(':') else {
        return Err(ModesError::Syntax {
            line: line.number,
            message: format!("expected `key:` or `key: value`, found `{text}`"),
        });
    };
    let key = key.trim();
    if key.is_empty() {
        return Err(ModesError::Syntax {
            line: line.number,
            message: "empty key".to_string(),
        });
    }
    Ok((key.to_string(), rest.trim().to_string()))
}

/// Parameter values: integer, float, boolean, quoted string, or bare text.
fn parse_scalar(text: &str) -> Value {
    if let Ok(i) = text.parse::<i64>() {
        return Value::Int(i);
    }
    if let Ok(x) = text.parse::<f64>() {
        return Value::Float(x);
    }
    match text {
        "true" => return Value::Bool(true),
        "false" => return Value::Bool(false),
        _ => {}
    }
    let unquoted = text
        .strip_prefix('"')
        .and_then(|t| t.strip_suffix('"'))
        .unwrap_or(text);
    Value::Str(unquoted.to_string())
}
