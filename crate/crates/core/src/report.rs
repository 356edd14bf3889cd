//! Machine-readable verification reports with a canonical serialization:
//! cases sorted by id, residues as decimal strings, durations excluded from
//! golden comparison.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseStatus {
    Pass,
    Fail,
    Skipped,
}

/// One verification case. For negative controls, `expect_fail` marks that
/// the underlying identity is mutated on purpose: the case *passes* when
/// the mutated identity is detected as false.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub status: CaseStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub negative_control: bool,
}

impl CaseRecord {
    pub fn outcome(id: impl Into<String>, ok: bool, witness: impl FnOnce() -> String) -> Self {
        CaseRecord {
            id: id.into(),
            status: if ok { CaseStatus::Pass } else { CaseStatus::Fail },
            witness: if ok { None } else { Some(witness()) },
            negative_control: false,
        }
    }

    /// A mutated-identity case: passes exactly when the check fails.
    pub fn control(id: impl Into<String>, mutated_check: bool, witness: &str) -> Self {
        CaseRecord {
            id: id.into(),
            status: if mutated_check {
                // the harness failed to detect the mutation
                CaseStatus::Fail
            } else {
                CaseStatus::Pass
            },
            witness: if mutated_check {
                Some(format!("mutation not detected: {witness}"))
            } else {
                None
            },
            negative_control: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    /// parameter set, stringly typed so reports stay schema-stable
    pub params: BTreeMap<String, String>,
    pub cases: Vec<CaseRecord>,
    /// wall-clock milliseconds; excluded from golden comparison
    #[serde(default)]
    pub duration_ms: u64,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, params: BTreeMap<String, String>) -> Self {
        SuiteReport {
            suite: suite.into(),
            params,
            cases: Vec::new(),
            duration_ms: 0,
        }
    }

    pub fn push(&mut self, case: CaseRecord) {
        self.cases.push(case);
    }

    pub fn finish(mut self, started: std::time::Instant) -> Self {
        self.cases.sort_by(|a, b| a.id.cmp(&b.id));
        self.duration_ms = started.elapsed().as_millis() as u64;
        self
    }

    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|c| c.status == CaseStatus::Pass)
    }

    pub fn failed_cases(&self) -> Vec<&CaseRecord> {
        self.cases
            .iter()
            .filter(|c| c.status == CaseStatus::Fail)
            .collect()
    }

    /// Canonical JSON: struct field order is fixed, cases sorted by id.
    pub fn to_canonical_json(&self) -> String {
        let mut sorted = self.clone();
        sorted.cases.sort_by(|a, b| a.id.cmp(&b.id));
        serde_json::to_string_pretty(&sorted).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        serde_json::from_str(s).map_err(|e| crate::Error::Parse(e.to_string()))
    }

    /// Field-by-field comparison ignoring durations; returns the list of
    /// mismatch descriptions (empty means identical).
    pub fn golden_diff(&self, golden: &SuiteReport) -> Vec<String> {
        let mut diffs = Vec::new();
        if self.suite != golden.suite {
            diffs.push(format!(
                "suite: `{}` != golden `{}`",
                self.suite, golden.suite
            ));
        }
        if self.params != golden.params {
            diffs.push(format!(
                "params: {:?} != golden {:?}",
                self.params, golden.params
            ));
        }
        let mut mine: Vec<&CaseRecord> = self.cases.iter().collect();
        let mut theirs: Vec<&CaseRecord> = golden.cases.iter().collect();
        mine.sort_by(|a, b| a.id.cmp(&b.id));
        theirs.sort_by(|a, b| a.id.cmp(&b.id));
        let mut i = 0;
        let mut j = 0;
        while i < mine.len() || j < theirs.len() {
            match (mine.get(i), theirs.get(j)) {
                (Some(a), Some(b)) if a.id == b.id => {
                    if a != b {
                        diffs.push(format!("case `{}`: {:?} != golden {:?}", a.id, a, b));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a.id < b.id => {
                    diffs.push(format!("case `{}` missing from golden", a.id));
                    i += 1;
                }
                (Some(_), Some(b)) => {
                    diffs.push(format!("golden case `{}` missing from report", b.id));
                    j += 1;
                }
                (Some(a), None) => {
                    diffs.push(format!("case `{}` missing from golden", a.id));
                    i += 1;
                }
                (None, Some(b)) => {
                    diffs.push(format!("golden case `{}` missing from report", b.id));
                    j += 1;
                }
                (None, None) => break,
            }
        }
        diffs
    }

    /// Merge several reports into one summary document.
    pub fn merge(reports: &[SuiteReport]) -> SuiteReport {
        let mut params = BTreeMap::new();
        params.insert("merged".to_string(), reports.len().to_string());
        let mut out = SuiteReport::new("merged", params);
        for r in reports {
            for c in &r.cases {
                let mut c = c.clone();
                c.id = format!("{}/{}", r.suite, c.id);
                out.cases.push(c);
            }
            out.duration_ms += r.duration_ms;
        }
        out.cases.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }
}

/// Render a report as human-readable text, one line per case.
pub fn render_text(report: &SuiteReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("suite {}\n", report.suite));
    for (k, v) in &report.params {
        out.push_str(&format!("  {k} = {v}\n"));
    }
    for c in &report.cases {
        let tag = match c.status {
            CaseStatus::Pass => "PASS",
            CaseStatus::Fail => "FAIL",
            CaseStatus::Skipped => "SKIP",
        };
        let ctl = if c.negative_control { " [control]" } else { "" };
        out.push_str(&format!("  {tag} {}{ctl}\n", c.id));
        if let Some(w) = &c.witness {
            out.push_str(&format!("       witness: {w}\n"));
        }
    }
    let n_pass = report
        .cases
        .iter()
        .filter(|c| c.status == CaseStatus::Pass)
        .count();
    out.push_str(&format!(
        "  {} / {} cases pass ({} ms)\n",
        n_pass,
        report.cases.len(),
        report.duration_ms
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SuiteReport {
        let mut params = BTreeMap::new();
        params.insert("p".into(), "3".into());
        let mut r = SuiteReport::new("demo", params);
        r.push(CaseRecord::outcome("b-case", true, || unreachable!()));
        r.push(CaseRecord::outcome("a-case", true, || unreachable!()));
        r.push(CaseRecord::control("z-control", false, "mutated"));
        r.cases.sort_by(|a, b| a.id.cmp(&b.id));
        r
    }

    #[test]
    fn canonical_json_is_stable() {
        let r = sample();
        assert_eq!(r.to_canonical_json(), r.to_canonical_json());
        let parsed = SuiteReport::from_json(&r.to_canonical_json()).unwrap();
        assert_eq!(parsed, r);
    }

    #[test]
    fn golden_diff_ignores_duration_and_spots_changes() {
        let r = sample();
        let mut g = r.clone();
        g.duration_ms = 999;
        assert!(r.golden_diff(&g).is_empty());
        g.cases[0].status = CaseStatus::Fail;
        let diffs = r.golden_diff(&g);
        assert_eq!(diffs.len(), 1);
        assert!(diffs[0].contains("a-case"));
    }

    #[test]
    fn merge_prefixes_ids() {
        let r = sample();
        let merged = SuiteReport::merge(&[r.clone(), r]);
        assert!(merged.cases.iter().all(|c| c.id.starts_with("demo/")));
        assert_eq!(merged.cases.len(), 6);
    }
}
