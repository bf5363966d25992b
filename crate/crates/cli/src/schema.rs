//! The scenario file format and its conversion into core types.
//!
//! A scenario file is JSON with a fixed, versioned shape. `y_given_w` is
//! either a matrix of probabilities (one row per `w` label over `y_support`)
//! or `{"counts": ...}` with integer outcome tallies per row. `wx` is exactly
//! one of:
//!
//! - `{"joint": [[..]]}` — joint probabilities, rows = `w`, columns = `x`;
//! - `{"joint_counts": [[..]]}` — the same as an integer contingency table;
//! - `{"marginals": {"pw": [..], "px": [..]}}` — marginals only;
//! - `{"candidates": [[[..]], ...]}` — a list of candidate joint tables;
//! - `{"shares": [..]}` — single-`w` subgroup decomposition: the fraction of
//!   the one `w` category in each `x` subgroup, used exactly as given (the
//!   shares may sum slightly off one when they come from rounded reports).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crossclass::prob::{DiscreteDistribution, JointWX, LabelSet, Scenario, WXKnowledge};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub w_labels: Vec<String>,
    pub x_labels: Vec<String>,
    pub y_support: Vec<f64>,
    pub y_given_w: YGivenWSpec,
    pub wx: WxSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bv: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_x: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum YGivenWSpec {
    Probs(Vec<Vec<f64>>),
    Counts { counts: Vec<Vec<u64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WxSpec {
    Joint(Vec<Vec<f64>>),
    JointCounts(Vec<Vec<u64>>),
    Marginals { pw: Vec<f64>, px: Vec<f64> },
    Candidates(Vec<Vec<Vec<f64>>>),
    Shares(Vec<f64>),
}

/// A parsed scenario ready for computation. Subgroup-share files do not
/// carry a joint, so they get their own shape.
#[derive(Debug, Clone)]
pub enum LoadedScenario {
    Standard(Scenario),
    Subgroups(SubgroupScenario),
}

/// Single aggregate `w` category split into `x` subgroups with known shares.
#[derive(Debug, Clone)]
pub struct SubgroupScenario {
    pub w_label: String,
    pub x_labels: LabelSet,
    pub y_given_w: DiscreteDistribution,
    pub shares: Vec<f64>,
    pub bv_deltas: Option<BTreeMap<String, f64>>,
}

impl LoadedScenario {
    pub fn x_labels(&self) -> &LabelSet {
        match self {
            LoadedScenario::Standard(s) => &s.x_labels,
            LoadedScenario::Subgroups(s) => &s.x_labels,
        }
    }

    pub fn is_binary_outcome(&self) -> bool {
        match self {
            LoadedScenario::Standard(s) => s.is_binary_outcome(),
            LoadedScenario::Subgroups(s) => s.y_given_w.support() == [0.0, 1.0],
        }
    }
}

pub fn parse_scenario_str(text: &str) -> Result<ScenarioFile, CliError> {
    if text.trim().is_empty() {
        return Err(CliError::Validation("scenario file is empty".into()));
    }
    let file: ScenarioFile = serde_json::from_str(text)
        .map_err(|e| CliError::Validation(format!("scenario parse error: {e}")))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Validation(format!(
            "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    Ok(file)
}

pub fn parse_scenario_path(path: &Path) -> Result<ScenarioFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario_str(&text)
}

fn outcome_rows(file: &ScenarioFile, violations: &mut Vec<String>) -> Vec<DiscreteDistribution> {
    let support = &file.y_support;
    let rows: Vec<Vec<f64>> = match &file.y_given_w {
        YGivenWSpec::Probs(rows) => rows.clone(),
        YGivenWSpec::Counts { counts } => counts
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let total: u64 = row.iter().sum();
                if total == 0 {
                    violations.push(format!("y_given_w[{i}] counts are all zero"));
                    vec![f64::NAN; row.len()]
                } else {
                    row.iter().map(|&c| c as f64 / total as f64).collect()
                }
            })
            .collect(),
    };
    rows.into_iter()
        .enumerate()
        .map(|(i, probs)| {
            if probs.len() != support.len() {
                violations.push(format!(
                    "y_given_w[{i}] has {} entries, y_support has {}",
                    probs.len(),
                    support.len()
                ));
            }
            DiscreteDistribution::from_raw(support.clone(), probs)
        })
        .collect()
}

/// Convert a parsed file into a computable scenario, collecting every
/// violation (empty list means the scenario is valid).
pub fn realize(file: &ScenarioFile) -> (Option<LoadedScenario>, Vec<String>) {
    let mut violations = Vec::new();

    if let WxSpec::Shares(shares) = &file.wx {
        return realize_subgroups(file, shares, violations);
    }

    let wx = match &file.wx {
        WxSpec::Joint(table) => WXKnowledge::Full(JointWX::from_raw(table.clone())),
        WxSpec::JointCounts(counts) => match JointWX::from_counts(counts) {
            Ok(j) => WXKnowledge::Full(j),
            Err(e) => {
                violations.push(format!("wx.joint_counts: {e}"));
                return (None, violations);
            }
        },
        WxSpec::Marginals { pw, px } => WXKnowledge::MarginalsOnly {
            pw: pw.clone(),
            px: px.clone(),
        },
        WxSpec::Candidates(tables) => WXKnowledge::CandidateSet(
            tables
                .iter()
                .map(|t| JointWX::from_raw(t.clone()))
                .collect(),
        ),
        WxSpec::Shares(_) => unreachable!("handled above"),
    };

    let scenario = Scenario {
        w_labels: LabelSet::from_raw(file.w_labels.clone()),
        x_labels: LabelSet::from_raw(file.x_labels.clone()),
        y_given_w: outcome_rows(file, &mut violations),
        wx,
        bv_deltas: file.bv.clone(),
    };
    violations.extend(scenario.validate());
    if let Some(t) = &file.target_x {
        if !scenario.x_labels.contains(t) {
            violations.push(format!("target_x '{t}' not in x_labels"));
        }
    }
    if violations.is_empty() {
        (Some(LoadedScenario::Standard(scenario)), violations)
    } else {
        (None, violations)
    }
}

fn realize_subgroups(
    file: &ScenarioFile,
    shares: &[f64],
    mut violations: Vec<String>,
) -> (Option<LoadedScenario>, Vec<String>) {
    if file.w_labels.len() != 1 {
        violations.push(format!(
            "wx.shares requires exactly one w label, got {}",
            file.w_labels.len()
        ));
    }
    if shares.len() != file.x_labels.len() {
        violations.push(format!(
            "wx.shares has {} entries, expected one per x label ({})",
            shares.len(),
            file.x_labels.len()
        ));
    }
    for (i, &s) in shares.iter().enumerate() {
        if !(s > 0.0 && s <= 1.0) {
            violations.push(format!("wx.shares[{i}] = {s} outside (0, 1]"));
        }
    }
    let sum: f64 = shares.iter().sum();
    if (sum - 1.0).abs() > crossclass::closed_form::SHARE_SUM_TOL {
        violations.push(format!(
            "wx.shares sum to {sum}, expected 1 within {}",
            crossclass::closed_form::SHARE_SUM_TOL
        ));
    }

    let x_labels = LabelSet::from_raw(file.x_labels.clone());
    for v in x_labels.violations() {
        violations.push(format!("x_labels: {v}"));
    }
    let rows = outcome_rows(file, &mut violations);
    if rows.len() != 1 {
        violations.push(format!("y_given_w has {} rows, expected 1", rows.len()));
    }
    for row in &rows {
        for v in row.violations() {
            violations.push(format!(
                "y_given_w[{}] {v}",
                file.w_labels.first().map(String::as_str).unwrap_or("?")
            ));
        }
    }
    if let Some(bv) = &file.bv {
        for k in bv.keys() {
            violations.push(format!(
                "bv key '{k}' unsupported with wx.shares (no shared labels)"
            ));
        }
    }
    if let Some(t) = &file.target_x {
        if !x_labels.contains(t) {
            violations.push(format!("target_x '{t}' not in x_labels"));
        }
    }

    if violations.is_empty() {
        (
            Some(LoadedScenario::Subgroups(SubgroupScenario {
                w_label: file.w_labels[0].clone(),
                x_labels,
                y_given_w: rows.into_iter().next().expect("one row"),
                shares: shares.to_vec(),
                bv_deltas: file.bv.clone(),
            })),
            violations,
        )
    } else {
        (None, violations)
    }
}

/// Parse and realize, failing on the first collection of violations.
pub fn load_scenario(path: &Path) -> Result<(ScenarioFile, LoadedScenario), CliError> {
    let file = parse_scenario_path(path)?;
    let (loaded, violations) = realize(&file);
    match loaded {
        Some(l) => Ok((file, l)),
        None => Err(CliError::Validation(format!(
            "{} is not a valid scenario:\n  - {}",
            path.display(),
            violations.join("\n  - ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_input() {
        assert!(matches!(
            parse_scenario_str(""),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn rejects_unknown_schema_version() {
        let text = r#"{"schema_version": 99, "w_labels": ["a"], "x_labels": ["b"],
            "y_support": [0, 1], "y_given_w": [[0.5, 0.5]], "wx": {"shares": [1.0]}}"#;
        let err = parse_scenario_str(text).unwrap_err();
        assert!(format!("{err}").contains("schema_version"));
    }

    #[test]
    fn probability_and_count_outcome_rows_agree() {
        let base = r#"{"schema_version": 1, "w_labels": ["w0", "w1"], "x_labels": ["x0", "x1"],
            "y_support": [0, 1], "y_given_w": YGW,
            "wx": {"joint": [[0.4, 0.1], [0.1, 0.4]]}}"#;
        let via_probs =
            parse_scenario_str(&base.replace("YGW", "[[0.75, 0.25], [0.5, 0.5]]")).unwrap();
        let via_counts =
            parse_scenario_str(&base.replace("YGW", r#"{"counts": [[3, 1], [2, 2]]}"#)).unwrap();
        let (a, va) = realize(&via_probs);
        let (b, vb) = realize(&via_counts);
        assert!(va.is_empty() && vb.is_empty());
        let (LoadedScenario::Standard(a), LoadedScenario::Standard(b)) = (a.unwrap(), b.unwrap())
        else {
            panic!("expected standard scenarios");
        };
        assert_eq!(a.y_given_w, b.y_given_w);
    }

    #[test]
    fn violations_carry_field_paths() {
        let text = r#"{"schema_version": 1, "w_labels": ["a", "b"], "x_labels": ["A", "B"],
            "y_support": [0, 1], "y_given_w": [[0.8, 0.1], [0.5, 0.5]],
            "wx": {"joint": [[0.4, 0.1], [0.1, 0.4]]},
            "bv": {"Martian": 0.1}}"#;
        let file = parse_scenario_str(text).unwrap();
        let (loaded, violations) = realize(&file);
        assert!(loaded.is_none());
        assert!(violations
            .iter()
            .any(|v| v.contains("y_given_w[a] not normalized")));
        assert!(violations.iter().any(|v| v.contains("bv key 'Martian'")));
    }

    #[test]
    fn shares_file_realizes_subgroups() {
        let text = r#"{"schema_version": 1, "w_labels": ["Asian"],
            "x_labels": ["Chinese", "Filipino", "AsianIndian", "OtherAsian"],
            "y_support": [0, 1], "y_given_w": [[0.9102, 0.0898]],
            "wx": {"shares": [0.2284, 0.1975, 0.2208, 0.3603]}}"#;
        let file = parse_scenario_str(text).unwrap();
        let (loaded, violations) = realize(&file);
        assert!(violations.is_empty(), "{violations:?}");
        let LoadedScenario::Subgroups(s) = loaded.unwrap() else {
            panic!("expected subgroup scenario");
        };
        assert_eq!(s.shares.len(), 4);
        assert!((s.y_given_w.prob_of(1.0) - 0.0898).abs() < 1e-12);
    }

    #[test]
    fn shares_with_multiple_w_labels_is_invalid() {
        let text = r#"{"schema_version": 1, "w_labels": ["a", "b"], "x_labels": ["A"],
            "y_support": [0, 1], "y_given_w": [[0.5, 0.5], [0.5, 0.5]],
            "wx": {"shares": [1.0]}}"#;
        let file = parse_scenario_str(text).unwrap();
        let (loaded, violations) = realize(&file);
        assert!(loaded.is_none());
        assert!(violations.iter().any(|v| v.contains("exactly one w label")));
    }

    #[test]
    fn scenario_file_round_trips_through_json() {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../fixtures/appendix-c.json"
        ))
        .unwrap();
        let file = parse_scenario_str(&text).unwrap();
        let rendered = serde_json::to_string_pretty(&file).unwrap();
        let reparsed: ScenarioFile = serde_json::from_str(&rendered).unwrap();
        assert_eq!(file, reparsed);
    }
}
