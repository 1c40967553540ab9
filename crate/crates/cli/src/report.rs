use crate::config::CommandConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// JSON envelope written by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: CommandConfig,
    /// SHA-256 of the canonical JSON encoding of `config`.
    pub inputs_digest: String,
    pub results: Value,
    pub diagnostics: Vec<String>,
    pub tool_version: String,
}

impl Report {
    pub fn new(config: &CommandConfig, results: Value, diagnostics: Vec<String>) -> Self {
        Report {
            command: config.command.name().to_owned(),
            config: config.clone(),
            inputs_digest: digest(config),
            results,
            diagnostics,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        }
    }
}

pub fn digest(config: &CommandConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("configs serialise");
    hex::encode(Sha256::digest(canonical))
}

/// What a command produces.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Json(Box<Report>),
    Csv(String),
}

impl Output {
    pub fn render(&self) -> String {
        match self {
            Output::Json(r) => {
                let mut s = serde_json::to_string_pretty(r).expect("reports serialise");
                s.push('\n');
                s
            }
            Output::Csv(s) => s.clone(),
        }
    }

    pub fn report(&self) -> Option<&Report> {
        match self {
            Output::Json(r) => Some(r),
            Output::Csv(_) => None,
        }
    }
}

/// CSV with a header row; floats use the shortest representation that
/// parses back to the same value.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::CommandKind;

    #[test]
    fn digest_tracks_inputs() {
        let a = CommandConfig::new(CommandKind::Chernoff);
        let mut b = a.clone();
        assert_eq!(digest(&a), digest(&b));
        b.seed = 1;
        assert_ne!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }

    #[test]
    fn floats_round_trip() {
        let x: f64 = 0.1 + 0.2;
        let r = Report::new(
            &CommandConfig::new(CommandKind::Chernoff),
            serde_json::json!({ "x": x }),
            vec![],
        );
        let back: Report = serde_json::from_str(&Output::Json(Box::new(r.clone())).render()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.results["x"].as_f64().unwrap().to_bits(), x.to_bits());
        let c = csv(&["a"], [vec![x]]);
        assert_eq!(c.lines().nth(1).unwrap().parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
