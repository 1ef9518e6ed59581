//! Clause-by-clause verification transcripts.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// An ordered list of named checks; the report passes when every clause does.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub subject: String,
    pub clauses: Vec<Clause>,
}

impl VerificationReport {
    pub fn new(subject: impl Into<String>) -> VerificationReport {
        VerificationReport {
            subject: subject.into(),
            clauses: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.clauses.push(Clause {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| !c.passed)
    }

    /// True when a clause whose name starts with `prefix` failed.
    pub fn failed(&self, prefix: &str) -> bool {
        self.failures().any(|c| c.name.starts_with(prefix))
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.clauses.extend(other.clauses);
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.subject, if self.passed() { "pass" } else { "FAIL" })?;
        for c in &self.clauses {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(f, "  [{mark}] {}", c.name)?;
            } else {
                writeln!(f, "  [{mark}] {}: {}", c.name, c.detail)?;
            }
        }
        Ok(())
    }
}
