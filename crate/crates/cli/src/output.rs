//! Deterministic CSV/JSON emission with an embedded metadata header.

use serde_json::{json, Value};

use crate::config::SweepConfig;

pub const TOOL: &str = "nhse";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest decimal that round-trips to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Csv { header: Vec<&'static str>, rows: Vec<Vec<String>> },
    Json(Value),
}

/// Result of one command: the payload plus extra metadata entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: Body,
    pub notes: Vec<(&'static str, String)>,
    /// Whether every built-in check passed (only `validate` sets this false).
    pub passed: bool,
}

impl Report {
    pub fn csv(header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        Report { body: Body::Csv { header, rows }, notes: Vec::new(), passed: true }
    }

    pub fn json(v: Value) -> Self {
        Report { body: Body::Json(v), notes: Vec::new(), passed: true }
    }

    pub fn note(mut self, key: &'static str, value: impl Into<String>) -> Self {
        self.notes.push((key, value.into()));
        self
    }

    pub fn render(&self, cfg: &SweepConfig) -> String {
        match &self.body {
            Body::Csv { header, rows } => {
                let mut out = String::new();
                let mut meta = |k: &str, v: &str| {
                    out.push_str("# ");
                    out.push_str(k);
                    out.push_str(": ");
                    out.push_str(v);
                    out.push('\n');
                };
                meta("tool", &format!("{TOOL} {VERSION}"));
                meta("command", cfg.command.name());
                meta("config_hash", &cfg.hash());
                meta("config", &cfg.canonical().to_string());
                meta("assumed", &cfg.assumed.join(","));
                for (k, v) in &self.notes {
                    meta(k, v);
                }
                out.push_str(&header.join(","));
                out.push('\n');
                for r in rows {
                    out.push_str(&r.join(","));
                    out.push('\n');
                }
                out
            }
            Body::Json(v) => {
                let notes: serde_json::Map<String, Value> =
                    self.notes.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
                let doc = json!({
                    "meta": {
                        "tool": TOOL,
                        "version": VERSION,
                        "command": cfg.command.name(),
                        "config_hash": cfg.hash(),
                        "config": cfg.canonical(),
                        "assumed": cfg.assumed,
                        "notes": notes,
                    },
                    "result": v,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialise");
                s.push('\n');
                s
            }
        }
    }
}
