//! Report structure and rendering.
//!
//! The JSON form is the full-precision machine interface: stable key order,
//! lossless floats, byte-identical under a parse/render round trip. The text
//! form is for terminals: one fixed-width line per target at four decimals.

use serde::{Deserialize, Serialize};

use crossclass::bound::BoundInterval;
use crossclass::closed_form::{InformativenessReport, IntervalWidth};

use crate::schema::ScenarioFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub scenario: ScenarioFile,
    pub results: Vec<TargetResult>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetResult {
    pub target: String,
    /// Rendered name of the bounded quantity, e.g. `P(y=1|x=Hispanic)`.
    pub quantity: String,
    pub interval: IntervalOut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub informativeness: Option<Vec<InformativenessOut>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalOut {
    pub lo: f64,
    pub hi: f64,
    pub sharp: bool,
    pub method: String,
}

impl From<BoundInterval> for IntervalOut {
    fn from(b: BoundInterval) -> Self {
        Self {
            lo: b.lo,
            hi: b.hi,
            sharp: b.sharp,
            method: b.method.as_str().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformativenessOut {
    pub w_label: String,
    pub q: f64,
    pub p: f64,
    pub lower_informative: bool,
    pub upper_informative: bool,
    /// Interval width; absent when the bound is the whole unit interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

impl InformativenessOut {
    pub fn new(w_label: &str, q: f64, p: f64, r: InformativenessReport) -> Self {
        Self {
            w_label: w_label.to_string(),
            q,
            p,
            lower_informative: r.lower_informative,
            upper_informative: r.upper_informative,
            width: match r.width {
                IntervalWidth::Vacuous => None,
                IntervalWidth::Finite(w) => Some(w),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOut {
    pub grid_points: usize,
    pub has_gap: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded_candidates: Vec<usize>,
    pub per_point: Vec<PerPointOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerPointOut {
    /// Sweep parameter (joint mass of the (1,1) cell) or candidate index.
    pub key: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOut {
    pub lp: IntervalOut,
    pub oracle: IntervalOut,
    pub slack: f64,
    pub agree: bool,
}

pub fn render_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => render_text(report),
    }
}

fn render_text(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{}: {} target{}\n",
        report.command,
        report.results.len(),
        if report.results.len() == 1 { "" } else { "s" }
    ));
    let body_width = report
        .results
        .iter()
        .map(|r| format!("{} \u{2208} [0.0000, 0.0000]", r.quantity).len())
        .max()
        .unwrap_or(0);
    for r in &report.results {
        let body = format!(
            "{} \u{2208} [{:.4}, {:.4}]",
            r.quantity, r.interval.lo, r.interval.hi
        );
        let sharpness = if r.interval.sharp { "sharp" } else { "approx" };
        out.push_str(&format!(
            "{body:<body_width$}  {sharpness:<6} method={}\n",
            r.interval.method
        ));
        if let Some(infos) = &r.informativeness {
            for i in infos {
                let width = match i.width {
                    Some(w) => format!("width {w:.4}"),
                    None => "vacuous".to_string(),
                };
                out.push_str(&format!(
                    "    w={}: q={:.4} p={:.4} lower {} upper {} ({width})\n",
                    i.w_label,
                    i.q,
                    i.p,
                    if i.lower_informative {
                        "informative"
                    } else {
                        "trivial"
                    },
                    if i.upper_informative {
                        "informative"
                    } else {
                        "trivial"
                    },
                ));
            }
        }
        if let Some(g) = &r.grid {
            out.push_str(&format!(
                "    union of {} point{}{}{}\n",
                g.grid_points,
                if g.grid_points == 1 { "" } else { "s" },
                if g.has_gap {
                    ", disconnected (gap inside hull)"
                } else {
                    ""
                },
                if g.excluded_candidates.is_empty() {
                    String::new()
                } else {
                    format!(", excluded candidates {:?}", g.excluded_candidates)
                }
            ));
        }
        if let Some(vals) = &r.feasible_values {
            let rendered: Vec<String> = vals.iter().map(|v| format!("{v}")).collect();
            out.push_str(&format!(
                "    feasible values: {{{}}}\n",
                rendered.join(", ")
            ));
        }
        if let Some(o) = &r.oracle {
            out.push_str(&format!(
                "    lp [{:.4}, {:.4}] vs oracle [{:.4}, {:.4}] slack {:.4} -> {}\n",
                o.lp.lo,
                o.lp.hi,
                o.oracle.lo,
                o.oracle.hi,
                o.slack,
                if o.agree { "agree" } else { "DISAGREE" }
            ));
        }
    }
    if !report.warnings.is_empty() {
        out.push_str("warnings:\n");
        for w in &report.warnings {
            out.push_str(&format!("  - {w}\n"));
        }
    }
    out
}
