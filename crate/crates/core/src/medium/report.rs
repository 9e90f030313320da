use serde::{Deserialize, Serialize};

/// One validated condition with its worst sampled value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub subject: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn new(subject: &str) -> Self {
        ValidationReport {
            subject: subject.to_string(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, passed: bool, worst: f64, witness: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            worst,
            witness,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Appends the checks of `other`, prefixing their names with its subject.
    pub fn merge(&mut self, other: ValidationReport) {
        for mut c in other.checks {
            c.name = format!("{}.{}", other.subject, c.name);
            self.checks.push(c);
        }
    }
}
