//! Attack reports and run manifests.

use std::collections::BTreeMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AttackStatus {
    Success,
    Failure,
}

/// Outcome of one attack run. Written even when the attack fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub attack: String,
    pub seed: u64,
    pub params: Value,
    pub counters: BTreeMap<String, Value>,
    pub wall_time_secs: f64,
    pub verdict: AttackStatus,
    pub failure_reason: Option<String>,
    /// Attack-specific results (recovered structures, test statistics).
    pub details: Value,
}

impl AttackReport {
    pub fn new(attack: &str, seed: u64, params: impl Serialize) -> Self {
        Self {
            attack: attack.into(),
            seed,
            params: serde_json::to_value(params).unwrap_or(Value::Null),
            counters: BTreeMap::new(),
            wall_time_secs: 0.0,
            verdict: AttackStatus::Failure,
            failure_reason: None,
            details: Value::Null,
        }
    }

    pub fn counter(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        self.counters.insert(name.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn succeed(&mut self, details: impl Serialize) {
        self.verdict = AttackStatus::Success;
        self.failure_reason = None;
        self.details = serde_json::to_value(details).unwrap_or(Value::Null);
    }

    pub fn fail(&mut self, reason: impl Into<String>, details: impl Serialize) {
        self.verdict = AttackStatus::Failure;
        self.failure_reason = Some(reason.into());
        self.details = serde_json::to_value(details).unwrap_or(Value::Null);
    }

    pub fn finish(&mut self, started: Instant) {
        self.wall_time_secs = started.elapsed().as_secs_f64();
    }

    pub fn is_success(&self) -> bool {
        self.verdict == AttackStatus::Success
    }
}

/// One per CLI invocation. Timestamps are Unix seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_at: f64,
    pub finished_at: f64,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn start(subcommand: &str, params: impl Serialize, seed: Option<u64>) -> Self {
        let now = unix_now();
        Self {
            subcommand: subcommand.into(),
            params: serde_json::to_value(params).unwrap_or(Value::Null),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            started_at: now,
            finished_at: now,
        }
    }

    pub fn finish(&mut self) {
        self.finished_at = unix_now();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prc::PrcParams;

    /// Minimal structural schema: required keys and their JSON types.
    fn check_schema(v: &Value) -> Result<(), String> {
        let obj = v.as_object().ok_or("not an object")?;
        type Check = (&'static str, fn(&Value) -> bool);
        let want: [Check; 7] = [
            ("attack", Value::is_string),
            ("seed", Value::is_u64),
            ("params", Value::is_object),
            ("counters", Value::is_object),
            ("wall_time_secs", Value::is_f64),
            ("verdict", |v| matches!(v.as_str(), Some("SUCCESS" | "FAILURE"))),
            ("failure_reason", |v| v.is_null() || v.is_string()),
        ];
        for (key, ok) in want {
            let field = obj.get(key).ok_or(format!("missing {key}"))?;
            if !ok(field) {
                return Err(format!("{key} has the wrong type: {field}"));
            }
        }
        Ok(())
    }

    #[test]
    fn report_json_schema() {
        let params = PrcParams::llm(4096, 3).unwrap();
        let mut rep = AttackReport::new("attack3", 42, params);
        rep.counter("iterations", 17u64);
        rep.fail("budget exhausted", serde_json::json!({"decode": "REJECT"}));
        rep.finish(Instant::now());
        let v = serde_json::to_value(&rep).unwrap();
        check_schema(&v).unwrap();
        assert_eq!(v["params"]["n"], 4096);
        assert_eq!(v["verdict"], "FAILURE");
        let back: AttackReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, rep);
        rep.succeed(());
        assert!(rep.is_success() && rep.failure_reason.is_none());
        assert!(check_schema(&serde_json::json!({"attack": "x"})).is_err());
    }

    #[test]
    fn manifest_times() {
        let mut m = RunManifest::start("estimate", serde_json::json!({"scheme": "llm"}), None);
        m.finish();
        assert!(m.finished_at >= m.started_at);
        assert_eq!(m.tool_version, env!("CARGO_PKG_VERSION"));
    }
}
