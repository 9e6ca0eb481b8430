use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Machine-readable result of one command. Field names and nesting are
/// stable within a schema version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Value,
    pub verdict: String,
    pub evidence: Value,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetStatus>,
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetStatus {
    /// `null` means the completeness bound.
    pub max_ambient_rank: Option<usize>,
    pub node_limit: u64,
    pub nodes_used: u64,
    /// `complete`, `node_limit_reached`, `solution_limit_reached` or `not_run`.
    pub status: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_us: u64,
}

/// A report plus its human-readable rendering.
pub struct Output {
    pub report: Report,
    pub text: String,
    pub exit_code: u8,
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trip() {
        let r = Report {
            schema_version: SCHEMA_VERSION,
            command: "dinv".into(),
            inputs: json!({ "builtin": "11n50", "mirror": true }),
            verdict: "passes".into(),
            evidence: json!({ "max_d": "8/25" }),
            notes: vec!["n".into()],
            budget: Some(BudgetStatus {
                max_ambient_rank: Some(9),
                node_limit: 10,
                nodes_used: 3,
                status: "complete".into(),
            }),
            timing: Timing { elapsed_us: 12 },
        };
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<Report>(&text).unwrap(), r);
        assert!(text.contains("\"schema_version\":1"));
    }
}
