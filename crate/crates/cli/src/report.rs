use drinfeld_core::VerificationReport;
use serde_json::{json, Value};

use crate::document::Input;

/// Everything a command prints. Timing goes to stderr, so two runs on the
/// same inputs render identical bytes.
#[derive(Debug, Default)]
pub struct Report {
    pub command: Vec<String>,
    pub inputs: Vec<(String, String)>,
    pub summary: Vec<String>,
    pub result: Value,
    pub documents: Vec<Value>,
    pub verification: Vec<VerificationReport>,
    /// False when a verification the command depends on failed.
    pub ok: bool,
}

impl Report {
    pub fn new(command: Vec<String>, inputs: &[Input]) -> Report {
        Report {
            command,
            inputs: inputs.iter().map(|i| (i.path.clone(), i.sha256.clone())).collect(),
            result: Value::Null,
            ok: true,
            ..Report::default()
        }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.summary.push(s.into());
    }

    /// Records a transcript; a failing transcript makes the report fail.
    pub fn transcript(&mut self, rep: VerificationReport) {
        self.ok &= rep.passed();
        self.verification.push(rep);
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "inputs": self.inputs.iter().map(|(p, h)| json!({ "path": p, "sha256": h })).collect::<Vec<_>>(),
            "status": if self.ok { "ok" } else { "verification failed" },
            "summary": self.summary,
            "result": self.result,
            "documents": self.documents,
            "verification": self.verification.iter().map(|r| json!({
                "subject": r.subject,
                "passed": r.passed(),
                "clauses": r.clauses.iter().map(|c| json!({
                    "name": c.name,
                    "passed": c.passed,
                    "detail": c.detail,
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("$ drinfeld {}\n", self.command.join(" "));
        for (p, h) in &self.inputs {
            out += &format!("input {p} sha256:{h}\n");
        }
        for s in &self.summary {
            out += s;
            out.push('\n');
        }
        for r in &self.verification {
            out += &r.to_string();
        }
        for d in &self.documents {
            out += &serde_json::to_string_pretty(d).expect("documents serialize");
            out.push('\n');
        }
        out
    }
}
