//! Verdicts and their text and machine renderings.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// The OWASP Top 10 (2017) categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
    A9,
    A10,
}

impl Category {
    /// Categories with a runtime probe family.
    pub const PROBED: [Category; 7] = [
        Category::A1,
        Category::A2,
        Category::A3,
        Category::A5,
        Category::A6,
        Category::A7,
        Category::A10,
    ];

    pub fn title(self) -> &'static str {
        match self {
            Category::A1 => "Injection",
            Category::A2 => "Broken Authentication",
            Category::A3 => "Sensitive Data Exposure",
            Category::A4 => "XML External Entities",
            Category::A5 => "Broken Access Control",
            Category::A6 => "Security Misconfiguration",
            Category::A7 => "Cross-Site Scripting",
            Category::A8 => "Insecure Deserialization",
            Category::A9 => "Using Components with Known Vulnerabilities",
            Category::A10 => "Insufficient Logging and Monitoring",
        }
    }

    pub fn parse(text: &str) -> Option<Category> {
        let all = [
            Category::A1,
            Category::A2,
            Category::A3,
            Category::A4,
            Category::A5,
            Category::A6,
            Category::A7,
            Category::A8,
            Category::A9,
            Category::A10,
        ];
        all.into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(text.trim()))
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One probe's outcome. `passed` means the attack was repelled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub category: Category,
    pub name: String,
    pub passed: bool,
    pub evidence: String,
}

impl ProbeResult {
    pub fn new(category: Category, name: &str, failures: Vec<String>, checked: usize) -> Self {
        let passed = failures.is_empty();
        let evidence = if passed {
            format!("{checked} of {checked} repelled")
        } else {
            let shown: Vec<&str> = failures.iter().take(3).map(String::as_str).collect();
            let more = failures.len().saturating_sub(shown.len());
            let mut text = shown.join("; ");
            if more > 0 {
                text.push_str(&format!("; and {more} more"));
            }
            text
        };
        Self {
            category,
            name: name.to_owned(),
            passed,
            evidence,
        }
    }
}

/// A category asserted safe by construction rather than probed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotApplicable {
    pub category: Category,
    pub justification: String,
}

pub fn by_design() -> Vec<NotApplicable> {
    vec![
        NotApplicable {
            category: Category::A4,
            justification:
                "the service parses no XML; request bodies are JSON, CSV, plain text or multipart"
                    .into(),
        },
        NotApplicable {
            category: Category::A8,
            justification:
                "no native object graphs are deserialized; JSON inputs bind to closed schemas"
                    .into(),
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub categories_probed: usize,
    pub categories_passed: usize,
    pub probes_total: usize,
    pub probes_passed: usize,
    pub not_applicable: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub target: String,
    pub started_at: DateTime<Utc>,
    pub probes: Vec<ProbeResult>,
    pub not_applicable: Vec<NotApplicable>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "machine" => Ok(Format::Machine),
            other => Err(format!(
                "unknown format {other:?}; expected text or machine"
            )),
        }
    }
}

impl AuditReport {
    pub fn new(
        target: &str,
        started_at: DateTime<Utc>,
        mut probes: Vec<ProbeResult>,
        not_applicable: Vec<NotApplicable>,
    ) -> Self {
        probes.sort_by_key(|p| p.category);
        let mut categories: BTreeMap<Category, bool> = BTreeMap::new();
        for p in &probes {
            *categories.entry(p.category).or_insert(true) &= p.passed;
        }
        let summary = Summary {
            categories_probed: categories.len(),
            categories_passed: categories.values().filter(|ok| **ok).count(),
            probes_total: probes.len(),
            probes_passed: probes.iter().filter(|p| p.passed).count(),
            not_applicable: not_applicable.len(),
        };
        Self {
            target: target.to_owned(),
            started_at,
            probes,
            not_applicable,
            summary,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.probes.iter().all(|p| p.passed)
    }

    pub fn category_passed(&self, category: Category) -> Option<bool> {
        let mut rows = self
            .probes
            .iter()
            .filter(|p| p.category == category)
            .peekable();
        rows.peek()?;
        Some(rows.all(|p| p.passed))
    }

    /// `(category, probe, passed)` for every probe, in report order.
    pub fn verdicts(&self) -> Vec<(Category, String, bool)> {
        self.probes
            .iter()
            .map(|p| (p.category, p.name.clone(), p.passed))
            .collect()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => serde_json::to_string_pretty(self).expect("report serializes"),
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = format!(
            "Security audit of {} at {}\nA probe PASSES when the attack it performs is repelled.\n\n",
            self.target,
            self.started_at.to_rfc3339()
        );
        out.push_str(&format!(
            "{:<5} {:<34} {:<7} {}\n",
            "cat", "probe", "verdict", "evidence"
        ));
        if self.probes.is_empty() && self.not_applicable.is_empty() {
            return out;
        }
        let mut current = None;
        for p in &self.probes {
            if current != Some(p.category) {
                out.push_str(&format!("{} {}\n", p.category, p.category.title()));
                current = Some(p.category);
            }
            let verdict = if p.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{:<5} {:<34} {:<7} {}\n",
                "", p.name, verdict, p.evidence
            ));
        }
        for na in &self.not_applicable {
            out.push_str(&format!(
                "{} {}\n{:<5} {:<34} {:<7} by design: {}\n",
                na.category,
                na.category.title(),
                "",
                "-",
                "N/A",
                na.justification
            ));
        }
        out.push_str(&format!(
            "\n{}/{} categories PASS, {} N/A by design\n",
            self.summary.categories_passed,
            self.summary.categories_probed,
            self.summary.not_applicable
        ));
        out
    }

    pub fn parse_machine(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
