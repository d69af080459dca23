//! Machine-readable run reports.  Assertions carry a stable key and are
//! sorted before serialization, so a fixed config yields byte-identical
//! output no matter what order the checks ran in.

use serde::Serialize;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    /// stable sort key, e.g. `axioms/homogeneity/0007`
    pub key: String,
    /// what was checked, in words
    pub property: String,
    pub status: Status,
    /// distance to the failure boundary in the check's own scale
    pub margin: f64,
    /// witness or context for a human reading the report
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
    pub assertions: Vec<Assertion>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, seed: u64, samples: usize) -> Self {
        SuiteReport {
            suite: suite.into(),
            seed,
            samples,
            assertions: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        key: impl Into<String>,
        property: impl Into<String>,
        pass: bool,
        margin: f64,
        detail: impl Into<String>,
    ) {
        self.assertions.push(Assertion {
            key: key.into(),
            property: property.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            margin,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.status == Status::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions
            .iter()
            .filter(|a| a.status == Status::Fail)
    }

    /// 0 = all assertions passed, 1 = at least one failed.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn summary(&self) -> String {
        let fail = self.failures().count();
        format!(
            "suite={} seed={} samples={} pass={} fail={}",
            self.suite,
            self.seed,
            self.samples,
            self.assertions.len() - fail,
            fail
        )
    }

    fn sorted(&self) -> SuiteReport {
        let mut out = self.clone();
        out.assertions
            .sort_by(|a, b| a.key.cmp(&b.key).then_with(|| a.property.cmp(&b.property)));
        out
    }

    pub fn to_json_string(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(&self.sorted()).expect("report fields serialize");
        s.push('\n');
        s
    }

    pub fn to_csv_string(&self) -> String {
        let sorted = self.sorted();
        let mut out = String::from("key,property,status,margin,detail\n");
        for a in &sorted.assertions {
            let status = match a.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_field(&a.key),
                csv_field(&a.property),
                status,
                a.margin,
                csv_field(&a.detail),
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_is_order_independent() {
        let mut a = SuiteReport::new("demo", 7, 2);
        a.push("b/002", "second", true, 0.5, "x");
        a.push("a/001", "first", true, 1.0, "y");
        let mut b = SuiteReport::new("demo", 7, 2);
        b.push("a/001", "first", true, 1.0, "y");
        b.push("b/002", "second", true, 0.5, "x");
        assert_eq!(a.to_json_string(), b.to_json_string());
        assert_eq!(a.to_csv_string(), b.to_csv_string());
        assert!(a.to_json_string().ends_with('\n'));
    }

    #[test]
    fn exit_codes_follow_status() {
        let mut r = SuiteReport::new("demo", 0, 0);
        r.push("k", "p", true, 0.0, "");
        assert_eq!(r.exit_code(), 0);
        r.push("k2", "p2", false, -1.0, "witness");
        assert_eq!(r.exit_code(), 1);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
        assert_eq!(r.summary(), "suite=demo seed=0 samples=0 pass=1 fail=1");
    }

    #[test]
    fn csv_escapes_delimiters() {
        let mut r = SuiteReport::new("demo", 0, 0);
        r.push("k", "has, comma", false, 0.25, "say \"hi\"");
        let csv = r.to_csv_string();
        assert!(csv.contains("\"has, comma\""));
        assert!(csv.contains("\"say \"\"hi\"\"\""));
    }
}
