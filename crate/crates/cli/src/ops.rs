//! Command implementations, shared between `main` and the integration tests.

use std::collections::BTreeMap;

use crossclass::bound::BoundInterval;
use crossclass::closed_form::{
    binary_scenario_bound, classify_informativeness, event_bound_binary_x, subgroup_bounds,
};
use crossclass::dominance::{
    mean_bounds, quantile_bounds, scenario_mean_bounds, scenario_quantile_bounds,
};
use crossclass::oracle::{grid_enumerate_bounds, OracleConfig};
use crossclass::prob::{Scenario, WXKnowledge};
use crossclass::sharp::{
    candidate_set_bounds, partial_knowledge_bounds, sharp_event_bounds, with_bounded_variation,
    BvSpec, PartialBoundsReport,
};
use crossclass::Error as CoreError;

use crate::report::{GridOut, InformativenessOut, OracleOut, PerPointOut, Report, TargetResult};
use crate::schema::{LoadedScenario, ScenarioFile};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Auto,
    ClosedForm,
    Lp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssumeChoice {
    MarginalsOnly,
    Candidates,
}

#[derive(Debug, Clone, Default)]
pub struct EventOptions {
    pub target: Option<String>,
    pub all_targets: bool,
    pub method: MethodChoice,
    pub bv: Vec<(String, f64)>,
    pub grid_n: usize,
    pub assume: Option<AssumeChoice>,
    pub assume_nested: bool,
}

fn computation(e: CoreError) -> CliError {
    CliError::Computation(format!("{e}"))
}

/// Resolve which `x` indices a command runs over: an explicit `--target`,
/// `--all-targets`, the file's `target_x`, or everything.
fn select_targets(
    loaded: &LoadedScenario,
    file: &ScenarioFile,
    target: &Option<String>,
    all_targets: bool,
) -> Result<Vec<usize>, CliError> {
    let labels = loaded.x_labels();
    if let Some(t) = target {
        let idx = labels
            .index_of(t)
            .ok_or_else(|| CliError::Usage(format!("--target '{t}' is not an x label")))?;
        return Ok(vec![idx]);
    }
    if all_targets {
        return Ok((0..labels.len()).collect());
    }
    if let Some(t) = &file.target_x {
        let idx = labels
            .index_of(t)
            .ok_or_else(|| CliError::Validation(format!("target_x '{t}' not in x_labels")))?;
        return Ok(vec![idx]);
    }
    Ok((0..labels.len()).collect())
}

/// Merge file-level `bv` with command-line caps; the command line wins on a
/// shared label.
fn merge_bv(
    file_bv: &Option<BTreeMap<String, f64>>,
    cli_bv: &[(String, f64)],
) -> BTreeMap<String, f64> {
    let mut merged = file_bv.clone().unwrap_or_default();
    for (k, v) in cli_bv {
        merged.insert(k.clone(), *v);
    }
    merged
}

fn informativeness_rows(s: &Scenario, target: usize) -> Option<Vec<InformativenessOut>> {
    if !s.is_binary_outcome() {
        return None;
    }
    let joint = s.full_joint()?;
    let xgw = joint.x_given_w();
    let wgx = joint.w_given_x();
    let rows = (0..joint.n_w())
        .filter(|&w| wgx[w][target] > 0.0)
        .map(|w| {
            let q = s.prob_one_given_w(w);
            let p = 1.0 - xgw[w][target];
            InformativenessOut::new(s.w_labels.get(w), q, p, classify_informativeness(q, p))
        })
        .collect();
    Some(rows)
}

fn grid_out(report: &PartialBoundsReport) -> GridOut {
    GridOut {
        grid_points: report.grid_points,
        has_gap: report.has_gap,
        excluded_candidates: report.excluded.clone(),
        per_point: report
            .per_point
            .iter()
            .map(|(key, iv)| PerPointOut {
                key: *key,
                lo: iv.lo,
                hi: iv.hi,
            })
            .collect(),
    }
}

fn event_quantity(label: &str) -> String {
    format!("P(y=1|x={label})")
}

struct EventOutcome {
    interval: BoundInterval,
    grid: Option<GridOut>,
    warnings: Vec<String>,
}

fn event_for_target(
    s: &Scenario,
    merged_bv: &BTreeMap<String, f64>,
    opts: &EventOptions,
    target: usize,
) -> Result<EventOutcome, CliError> {
    let mut warnings = Vec::new();

    if opts.assume_nested {
        if opts.method == MethodChoice::Lp {
            return Err(CliError::Usage(
                "--assume-nested computes a closed-form bound; drop --method lp".into(),
            ));
        }
        if !merged_bv.is_empty() {
            return Err(CliError::Usage(
                "--assume-nested cannot be combined with bounded-variation caps".into(),
            ));
        }
        s.require_binary_outcome().map_err(computation)?;
        let joint = s.require_full_joint().map_err(computation)?;
        let label = s.x_labels.get(target);
        let Some(w_idx) = s.w_labels.index_of(label) else {
            return Err(CliError::Usage(format!(
                "--assume-nested needs '{label}' in both label sets"
            )));
        };
        let p = 1.0 - joint.x_given_w()[w_idx][target];
        let interval = event_bound_binary_x(s.prob_one_given_w(w_idx), p).map_err(computation)?;
        warnings.push(format!(
            "assumed '{label}' is nested: every x={label} member is w={label}, so only that row informs the bound"
        ));
        return Ok(EventOutcome {
            interval,
            grid: None,
            warnings,
        });
    }

    if !merged_bv.is_empty() {
        if opts.method == MethodChoice::ClosedForm {
            return Err(CliError::Usage(
                "bounded-variation caps require the LP method".into(),
            ));
        }
        if opts.assume.is_some() {
            return Err(CliError::Usage(
                "bounded-variation caps require full knowledge of P(w,x)".into(),
            ));
        }
        let bv = BvSpec::new(merged_bv.clone()).map_err(computation)?;
        let interval = with_bounded_variation(s, &bv, target).map_err(computation)?;
        warnings.push("variation caps are imposed as weak (closed) inequalities".to_string());
        return Ok(EventOutcome {
            interval,
            grid: None,
            warnings,
        });
    }

    // Apply any knowledge-downgrade assumption.
    let downgraded;
    let s = match opts.assume {
        None => s,
        Some(AssumeChoice::MarginalsOnly) => match &s.wx {
            WXKnowledge::MarginalsOnly { .. } => s,
            WXKnowledge::Full(j) => {
                warnings.push("joint knowledge reduced to its marginals on request".to_string());
                downgraded = Scenario {
                    wx: WXKnowledge::MarginalsOnly {
                        pw: j.w_marginals(),
                        px: j.x_marginals(),
                    },
                    ..s.clone()
                };
                &downgraded
            }
            WXKnowledge::CandidateSet(_) => {
                return Err(CliError::Usage(
                    "--assume marginals-only needs a joint or marginals, not candidates".into(),
                ))
            }
        },
        Some(AssumeChoice::Candidates) => match &s.wx {
            WXKnowledge::CandidateSet(_) => s,
            WXKnowledge::Full(j) => {
                downgraded = Scenario {
                    wx: WXKnowledge::CandidateSet(vec![j.clone()]),
                    ..s.clone()
                };
                &downgraded
            }
            WXKnowledge::MarginalsOnly { .. } => {
                return Err(CliError::Usage(
                    "--assume candidates needs explicit joints; marginals have none".into(),
                ))
            }
        },
    };

    match &s.wx {
        WXKnowledge::Full(joint) => {
            let binary_two_by_two = joint.n_w() == 2 && joint.n_x() == 2 && s.is_binary_outcome();
            let interval = match opts.method {
                MethodChoice::ClosedForm => {
                    binary_scenario_bound(s, target).map_err(computation)?
                }
                MethodChoice::Lp => sharp_event_bounds(s, target).map_err(computation)?,
                MethodChoice::Auto => {
                    if binary_two_by_two {
                        binary_scenario_bound(s, target).map_err(computation)?
                    } else {
                        sharp_event_bounds(s, target).map_err(computation)?
                    }
                }
            };
            Ok(EventOutcome {
                interval,
                grid: None,
                warnings,
            })
        }
        WXKnowledge::MarginalsOnly { pw, px } => {
            if opts.method == MethodChoice::ClosedForm {
                return Err(CliError::Usage(
                    "marginals-only scenarios are computed by LP sweep; drop --method closed-form"
                        .into(),
                ));
            }
            let report = partial_knowledge_bounds(s, target, opts.grid_n).map_err(computation)?;
            let (lo, hi) = ((pw[1] + px[1] - 1.0).max(0.0), pw[1].min(px[1]));
            warnings.push(format!(
                "marginals only: swept {} joints over the feasible (1,1)-cell mass [{lo:.4}, {hi:.4}]; the union is an inner approximation that grows under grid refinement",
                report.grid_points
            ));
            Ok(EventOutcome {
                interval: report.interval,
                grid: Some(grid_out(&report)),
                warnings,
            })
        }
        WXKnowledge::CandidateSet(_) => {
            if opts.method == MethodChoice::ClosedForm {
                return Err(CliError::Usage(
                    "candidate-set scenarios are computed by LP union; drop --method closed-form"
                        .into(),
                ));
            }
            let report = candidate_set_bounds(s, target).map_err(computation)?;
            if report.has_gap {
                warnings.push(
                    "candidate union is disconnected; the hull includes values no candidate attains"
                        .to_string(),
                );
            }
            if !report.excluded.is_empty() {
                warnings.push(format!(
                    "candidates {:?} are inconsistent with P(y|w) and were excluded",
                    report.excluded
                ));
            }
            Ok(EventOutcome {
                interval: report.interval,
                grid: Some(grid_out(&report)),
                warnings,
            })
        }
    }
}

fn share_sum_warning(shares: &[f64]) -> Option<String> {
    let sum: f64 = shares.iter().sum();
    ((sum - 1.0).abs() > 1e-9).then(|| {
        format!("subgroup shares sum to {sum}; each bound uses its share exactly as given")
    })
}

pub fn cmd_bounds_event(
    file: &ScenarioFile,
    loaded: &LoadedScenario,
    opts: &EventOptions,
) -> Result<Report, CliError> {
    let targets = select_targets(loaded, file, &opts.target, opts.all_targets)?;
    let mut results = Vec::new();
    let mut warnings: Vec<String> = Vec::new();

    match loaded {
        LoadedScenario::Standard(s) => {
            s.require_binary_outcome().map_err(computation)?;
            let merged_bv = merge_bv(&file.bv, &opts.bv);
            for &t in &targets {
                let outcome = event_for_target(s, &merged_bv, opts, t)?;
                for w in outcome.warnings {
                    if !warnings.contains(&w) {
                        warnings.push(w);
                    }
                }
                results.push(TargetResult {
                    target: s.x_labels.get(t).to_string(),
                    quantity: event_quantity(s.x_labels.get(t)),
                    interval: outcome.interval.into(),
                    informativeness: if opts.assume.is_none() {
                        informativeness_rows(s, t)
                    } else {
                        None
                    },
                    grid: outcome.grid,
                    feasible_values: None,
                    oracle: None,
                });
            }
        }
        LoadedScenario::Subgroups(s) => {
            if opts.method == MethodChoice::Lp || opts.assume.is_some() || opts.assume_nested {
                return Err(CliError::Usage(
                    "subgroup-share scenarios support only the closed form".into(),
                ));
            }
            if !opts.bv.is_empty() {
                return Err(CliError::Usage(
                    "bounded-variation caps need shared labels; subgroup scenarios have none"
                        .into(),
                ));
            }
            if s.y_given_w.support() != [0.0, 1.0] {
                return Err(computation(CoreError::WrongShape {
                    expected: "binary outcome support {0, 1}",
                }));
            }
            let q = s.y_given_w.prob_of(1.0);
            let bounds = subgroup_bounds(q, &s.shares).map_err(computation)?;
            if let Some(w) = share_sum_warning(&s.shares) {
                warnings.push(w);
            }
            for &t in &targets {
                let p = 1.0 - s.shares[t];
                results.push(TargetResult {
                    target: s.x_labels.get(t).to_string(),
                    quantity: event_quantity(s.x_labels.get(t)),
                    interval: bounds[t].into(),
                    informativeness: Some(vec![InformativenessOut::new(
                        &s.w_label,
                        q,
                        p,
                        classify_informativeness(q, p),
                    )]),
                    grid: None,
                    feasible_values: None,
                    oracle: None,
                });
            }
        }
    }

    Ok(Report {
        command: "bounds event".into(),
        scenario: file.clone(),
        results,
        warnings,
    })
}

pub fn cmd_bounds_mean(
    file: &ScenarioFile,
    loaded: &LoadedScenario,
    target: &Option<String>,
    all_targets: bool,
) -> Result<Report, CliError> {
    let targets = select_targets(loaded, file, target, all_targets)?;
    let mut results = Vec::new();
    let mut warnings = Vec::new();

    for &t in &targets {
        let (label, interval) = match loaded {
            LoadedScenario::Standard(s) => {
                s.require_full_joint().map_err(computation)?;
                (
                    s.x_labels.get(t).to_string(),
                    scenario_mean_bounds(s, t).map_err(computation)?,
                )
            }
            LoadedScenario::Subgroups(s) => {
                if let Some(w) = share_sum_warning(&s.shares) {
                    if !warnings.contains(&w) {
                        warnings.push(w);
                    }
                }
                (
                    s.x_labels.get(t).to_string(),
                    mean_bounds(&s.y_given_w, 1.0 - s.shares[t]).map_err(computation)?,
                )
            }
        };
        results.push(TargetResult {
            target: label.clone(),
            quantity: format!("E(y|x={label})"),
            interval: interval.into(),
            informativeness: None,
            grid: None,
            feasible_values: None,
            oracle: None,
        });
    }

    Ok(Report {
        command: "bounds mean".into(),
        scenario: file.clone(),
        results,
        warnings,
    })
}

pub fn cmd_bounds_quantile(
    file: &ScenarioFile,
    loaded: &LoadedScenario,
    target: &Option<String>,
    all_targets: bool,
    alpha: f64,
) -> Result<Report, CliError> {
    let targets = select_targets(loaded, file, target, all_targets)?;
    let mut results = Vec::new();
    let mut warnings = Vec::new();

    for &t in &targets {
        let (label, qb) = match loaded {
            LoadedScenario::Standard(s) => {
                s.require_full_joint().map_err(computation)?;
                (
                    s.x_labels.get(t).to_string(),
                    scenario_quantile_bounds(s, t, alpha).map_err(computation)?,
                )
            }
            LoadedScenario::Subgroups(s) => {
                if let Some(w) = share_sum_warning(&s.shares) {
                    if !warnings.contains(&w) {
                        warnings.push(w);
                    }
                }
                (
                    s.x_labels.get(t).to_string(),
                    quantile_bounds(&s.y_given_w, 1.0 - s.shares[t], alpha).map_err(computation)?,
                )
            }
        };
        results.push(TargetResult {
            target: label.clone(),
            quantity: format!("Q_{alpha:.2}(y|x={label})"),
            interval: qb.interval.into(),
            informativeness: None,
            grid: None,
            feasible_values: Some(qb.feasible_values),
            oracle: None,
        });
    }

    Ok(Report {
        command: "bounds quantile".into(),
        scenario: file.clone(),
        results,
        warnings,
    })
}

pub struct OracleCheckOptions {
    pub target: Option<String>,
    pub all_targets: bool,
    pub step: f64,
    pub constraint_tol: Option<f64>,
    pub budget: u64,
}

/// Cross-check the LP bounds against grid enumeration. Returns the report
/// and whether every target agreed within the provable slack.
pub fn cmd_oracle_check(
    file: &ScenarioFile,
    loaded: &LoadedScenario,
    opts: &OracleCheckOptions,
) -> Result<(Report, bool), CliError> {
    let LoadedScenario::Standard(s) = loaded else {
        return Err(CliError::Computation(
            "oracle check needs a full joint; subgroup-share scenarios have none".into(),
        ));
    };
    let joint = s.require_full_joint().map_err(computation)?;
    let targets = select_targets(loaded, file, &opts.target, opts.all_targets)?;
    let cfg = OracleConfig {
        step: opts.step,
        constraint_tol: opts.constraint_tol,
        budget: opts.budget,
        ..OracleConfig::default()
    };

    let mut results = Vec::new();
    let mut all_agree = true;
    for &t in &targets {
        let lp = sharp_event_bounds(s, t).map_err(computation)?;
        let oracle = grid_enumerate_bounds(s, t, &cfg).map_err(computation)?;
        let px = joint.x_marginals()[t];
        let slack = cfg.resolved_tol(joint.n_x()) / px + cfg.step + 1e-6;
        let agree = (oracle.lo - lp.lo).abs() <= slack && (oracle.hi - lp.hi).abs() <= slack;
        all_agree &= agree;
        let label = s.x_labels.get(t).to_string();
        results.push(TargetResult {
            target: label.clone(),
            quantity: event_quantity(&label),
            interval: lp.into(),
            informativeness: None,
            grid: None,
            feasible_values: None,
            oracle: Some(OracleOut {
                lp: lp.into(),
                oracle: oracle.into(),
                slack,
                agree,
            }),
        });
    }

    let report = Report {
        command: "oracle check".into(),
        scenario: file.clone(),
        results,
        warnings: Vec::new(),
    };
    Ok((report, all_agree))
}

pub fn fixtures_listing() -> String {
    let mut out = String::new();
    let source = match crate::fixtures::fixtures_dir_override() {
        Some(dir) => format!("directory override: {}", dir.display()),
        None => "bundled".to_string(),
    };
    out.push_str(&format!("bundled scenarios ({source}):\n"));
    for f in crate::fixtures::FIXTURES {
        out.push_str(&format!("  {:<18} {}\n", f.name, f.description));
    }
    out
}
