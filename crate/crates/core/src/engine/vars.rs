//! The engine's variable store: predefined globals plus rule-managed
//! user variables.

use std::collections::BTreeMap;

use crate::value::Value;

pub const PREDEFINED: &[&str] = &["Time", "Level", "Uptime"];

/// Variables visible to `eval()` and `set()`. `Time`, `Level`, and `Uptime`
/// are maintained by the engine and read-only to rules; user variables are
/// created by `set` actions and keep their type once created.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableStore {
    time: i64,
    uptime: i64,
    level: String,
    user: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SetVarError {
    #[error("variable `{0}` is predefined and read-only")]
    Predefined(String),
    #[error("variable `{name}` is {from}, cannot store {to}")]
    TypeChange {
        name: String,
        from: &'static str,
        to: &'static str,
    },
}

impl Default for VariableStore {
    fn default() -> Self {
        VariableStore {
            time: 0,
            uptime: 0,
            level: String::new(),
            user: BTreeMap::new(),
        }
    }
}

impl VariableStore {
    pub fn new() -> VariableStore {
        VariableStore::default()
    }

    pub fn is_predefined(name: &str) -> bool {
        PREDEFINED.contains(&name)
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        match name {
            "Time" => Some(Value::Int(self.time)),
            "Uptime" => Some(Value::Int(self.uptime)),
            "Level" => Some(Value::Str(self.level.clone())),
            _ => self.user.get(name).cloned(),
        }
    }

    /// Creates or updates a user variable. The type is fixed at creation:
    /// storing a differently typed value later is rejected.
    pub fn set_user(&mut self, name: &str, value: Value) -> Result<(), SetVarError> {
        if Self::is_predefined(name) {
            return Err(SetVarError::Predefined(name.to_string()));
        }
        if let Some(existing) = self.user.get(name) {
            if std::mem::discriminant(existing) != std::mem::discriminant(&value) {
                return Err(SetVarError::TypeChange {
                    name: name.to_string(),
                    from: existing.type_name(),
                    to: value.type_name(),
                });
            }
        }
        self.user.insert(name.to_string(), value);
        Ok(())
    }

    /// Engine-side refresh from the tick clock (`Time` = epoch + tick,
    /// `Uptime` = tick).
    pub fn refresh_clock(&mut self, time: i64, uptime: i64) {
        self.time = time;
        self.uptime = uptime;
    }

    /// Engine-side mirror of the alert-level manager's current level.
    pub fn set_level(&mut self, level: &str) {
        self.level = level.to_string();
    }

    /// The user-variable map, for purity assertions in tests.
    pub fn user_vars(&self) -> &BTreeMap<String, Value> {
        &self.user
    }
}
