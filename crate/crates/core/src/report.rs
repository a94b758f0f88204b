//! Pass/fail records for the verification battery.

use serde::{Deserialize, Serialize};

use crate::grid::Point;

/// One checked property. `pass` is always `worst_violation <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub property: String,
    pub pass: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub location: Option<Point>,
    pub citations: Vec<String>,
    /// Number of nodes, samples or trials that entered the check.
    pub checked: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(property: impl Into<String>, worst_violation: f64, tolerance: f64) -> Self {
        VerificationReport {
            property: property.into(),
            pass: worst_violation <= tolerance,
            worst_violation,
            tolerance,
            location: None,
            citations: Vec::new(),
            checked: 0,
            notes: Vec::new(),
        }
    }

    pub fn at(mut self, location: Option<Point>) -> Self {
        self.location = location;
        self
    }

    pub fn cite(mut self, anchor: impl Into<String>) -> Self {
        self.citations.push(anchor.into());
        self
    }

    pub fn checked(mut self, n: usize) -> Self {
        self.checked = n;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Running maximum of a violation measure together with where it happened.
#[derive(Debug, Clone, Copy)]
pub struct Worst {
    pub value: f64,
    pub location: Option<Point>,
    pub count: usize,
}

impl Default for Worst {
    fn default() -> Self {
        Worst { value: 0.0, location: None, count: 0 }
    }
}

impl Worst {
    /// Starts below zero so negative slack is reported faithfully.
    pub fn signed() -> Self {
        Worst { value: f64::NEG_INFINITY, location: None, count: 0 }
    }

    pub fn push(&mut self, value: f64, at: Point) {
        self.count += 1;
        if value > self.value || self.location.is_none() && value >= self.value {
            self.value = value;
            self.location = Some(at);
        }
    }

    pub fn into_report(self, property: &str, tolerance: f64) -> VerificationReport {
        let value = if self.value.is_finite() { self.value } else { 0.0 };
        VerificationReport::new(property, value, tolerance)
            .at(self.location)
            .checked(self.count)
    }
}

/// A named group of reports, serialized as the JSON report file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSet {
    pub title: String,
    pub reports: Vec<VerificationReport>,
}

impl ReportSet {
    pub fn new(title: impl Into<String>) -> Self {
        ReportSet { title: title.into(), reports: Vec::new() }
    }

    pub fn push(&mut self, r: VerificationReport) {
        self.reports.push(r);
    }

    pub fn extend(&mut self, rs: impl IntoIterator<Item = VerificationReport>) {
        self.reports.extend(rs);
    }

    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationReport> {
        self.reports.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}
