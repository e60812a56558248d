use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use linform::intset::io;
use linform::FiniteIntSet;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

/// Sets with more elements than this go to a file instead of the output.
pub const INLINE_SET_LIMIT: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandResult {
    pub command: String,
    pub inputs: Value,
    pub outputs: Map<String, Value>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

impl CommandResult {
    pub fn new(command: &str, inputs: impl Serialize) -> Self {
        CommandResult {
            command: command.into(),
            inputs: serde_json::to_value(inputs).unwrap_or(Value::Null),
            outputs: Map::new(),
            status: Status::Success,
            reason: None,
        }
    }

    pub fn put(&mut self, key: &str, value: impl Serialize) {
        self.outputs.insert(
            key.into(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
    }

    pub fn fail(&mut self, reason: impl Into<String>) {
        self.status = Status::Failure;
        self.reason = Some(reason.into());
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.outputs {
            let shown = match v {
                Value::String(t) => t.clone(),
                other => other.to_string(),
            };
            let _ = writeln!(s, "{k}: {shown}");
        }
        match (&self.status, &self.reason) {
            (Status::Success, _) => s.push_str("status: success\n"),
            (Status::Failure, Some(r)) => {
                let _ = writeln!(s, "status: failure ({r})");
            }
            (Status::Failure, None) => s.push_str("status: failure\n"),
        }
        s
    }
}

/// A set inline, or written to `dir/name.txt` when it is large.
pub fn set_value(a: &FiniteIntSet, dir: &Path, name: &str) -> std::io::Result<Value> {
    if a.len() <= INLINE_SET_LIMIT {
        return Ok(json!({ "size": a.len(), "elements": io::to_json_value(a) }));
    }
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.txt"));
    fs::write(&path, io::to_text(a))?;
    Ok(json!({ "size": a.len(), "path": path.display().to_string() }))
}
