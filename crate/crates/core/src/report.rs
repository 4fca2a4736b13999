//! Structured check records emitted by hypothesis checks, partition
//! validation and bound verification.

use serde::{Deserialize, Serialize};

/// One structural check: `{check, pass, witness, value, bound}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub pass: bool,
    pub witness: Option<serde_json::Value>,
    pub value: f64,
    pub bound: f64,
}

impl CheckRecord {
    pub fn new(check: impl Into<String>, pass: bool, value: f64, bound: f64) -> Self {
        Self {
            check: check.into(),
            pass,
            witness: None,
            value,
            bound,
        }
    }

    pub fn with_witness(mut self, witness: serde_json::Value) -> Self {
        self.witness = Some(witness);
        self
    }
}

/// One bound evaluated against an exact quantity:
/// `{instance, bound_name, bound_value, exact_value, pass, tolerance}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub instance: String,
    pub bound_name: String,
    pub bound_value: f64,
    pub exact_value: f64,
    pub pass: bool,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundRecord {
    /// Pass iff `exact <= bound + tolerance`. Infinite values compare in the
    /// extended reals, so `inf <= inf` passes.
    pub fn upper(
        instance: impl Into<String>,
        bound_name: impl Into<String>,
        bound_value: f64,
        exact_value: f64,
        tolerance: f64,
    ) -> Self {
        let pass = exact_value <= bound_value + tolerance
            || (exact_value.is_infinite() && bound_value.is_infinite() && exact_value > 0.0);
        Self {
            instance: instance.into(),
            bound_name: bound_name.into(),
            bound_value,
            exact_value,
            pass,
            tolerance,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Serialize a slice of records as one JSON object per line.
pub fn to_json_lines<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}
