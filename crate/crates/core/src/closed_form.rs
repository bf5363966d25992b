//! Closed-form identification bounds.
//!
//! The workhorse is the contaminated-cell interval for a binary split of the
//! `x` scheme: if a fraction `p` of the `w = ω` group falls outside the
//! target `x` cell, the event probability inside the cell is only known up to
//!
//! ```text
//! [0, 1] ∩ [(q - p) / (1 - p),  q / (1 - p)],    q = P(y ∈ B | w = ω).
//! ```
//!
//! On top of that sit: informativeness classification, point identification
//! when `x` deterministically aggregates `w`, the fully binary two-label
//! scenario bound, and per-subgroup bounds when `x` refines a single `w`
//! category.

use crate::bound::{BoundInterval, Method};
use crate::error::{Error, Result};
use crate::prob::{AggregationStructure, DiscreteDistribution, Scenario, AGGREGATION_TOL};

/// Shares reported at survey precision may miss one by a few thousandths;
/// per-subgroup bounds use each share as given, so this looser gate only
/// guards against outright malformed input.
pub const SHARE_SUM_TOL: f64 = 1e-2;

/// Width of a bound interval, distinguishing the completely uninformative
/// `[0, 1]` case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalWidth {
    /// The bound is the whole unit interval.
    Vacuous,
    Finite(f64),
}

/// Whether each endpoint of the contaminated-cell interval improves on the
/// trivial `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InformativenessReport {
    pub lower_informative: bool,
    pub upper_informative: bool,
    pub width: IntervalWidth,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!(
            "{name} = {v} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Bound on `P(y ∈ B | w = ω, x = target)` when a known fraction `p` of the
/// `ω` group lies outside the target cell and `q = P(y ∈ B | w = ω)`.
pub fn event_bound_binary_x(q: f64, p: f64) -> Result<BoundInterval> {
    check_unit("q", q)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    if p >= 1.0 {
        // The conditioned-on cell carries no mass for this group.
        return Err(Error::DegenerateConditioning { p });
    }
    let lo = ((q - p) / (1.0 - p)).max(0.0);
    let hi = (q / (1.0 - p)).min(1.0);
    BoundInterval::probability(lo, hi, true, Method::ClosedForm)
}

/// Classify whether the `event_bound_binary_x(q, p)` endpoints improve on
/// `[0, 1]`. The lower end is informative iff `p < q`; the upper end iff
/// `p < 1 - q` (strict at the boundary: a bound that merely touches 0 or 1
/// is not informative).
pub fn classify_informativeness(q: f64, p: f64) -> InformativenessReport {
    debug_assert!((0.0..=1.0).contains(&q));
    debug_assert!(p >= 0.0);
    let lower_informative = p < q;
    let upper_informative = p < 1.0 - q;
    // Neither endpoint informative means the clipped interval is exactly
    // [0, 1]; that (or a degenerate p) is the vacuous case.
    let width = if p >= 1.0 || (!lower_informative && !upper_informative) {
        IntervalWidth::Vacuous
    } else {
        let lo = ((q - p) / (1.0 - p)).max(0.0);
        let hi = (q / (1.0 - p)).min(1.0);
        IntervalWidth::Finite(hi - lo)
    };
    InformativenessReport {
        lower_informative,
        upper_informative,
        width,
    }
}

/// Point-identify `P(y | x)` when `x` deterministically aggregates `w`:
/// each `P(y | x = ξ)` is the `P(w | x = ξ)`-weighted mixture of the
/// `P(y | w)` rows. Returns one distribution per `x` label.
pub fn point_identify_aggregation(s: &Scenario) -> Result<Vec<DiscreteDistribution>> {
    let joint = s.require_full_joint()?;
    match joint.detect_aggregation(AGGREGATION_TOL) {
        AggregationStructure::XAggregatesW { .. } => {}
        _ => return Err(Error::NotAggregation),
    }
    let wgx = joint.w_given_x();
    (0..joint.n_x())
        .map(|xi| {
            let parts: Vec<(f64, &DiscreteDistribution)> = s
                .y_given_w
                .iter()
                .enumerate()
                .map(|(w, d)| (wgx[w][xi], d))
                .collect();
            DiscreteDistribution::mixture(&parts)
        })
        .collect()
}

/// Sharp bound on `P(y = 1 | x = target)` for the fully binary case
/// (`|W| = |X| = 2`, outcome in {0, 1}, joint fully known): mix the per-`ω`
/// contaminated-cell intervals by `P(w = ω | x = target)`.
///
/// When the data are uninformative for both `ω` rows the result is `[0, 1]`.
pub fn binary_scenario_bound(s: &Scenario, target: usize) -> Result<BoundInterval> {
    s.require_binary_outcome()?;
    let joint = s.require_full_joint()?;
    if joint.n_w() != 2 || joint.n_x() != 2 || s.y_given_w.len() != 2 {
        return Err(Error::WrongShape {
            expected: "2x2 label sets",
        });
    }
    if target > 1 {
        return Err(Error::InvalidArgument(format!(
            "target index {target} out of range"
        )));
    }
    let xgw = joint.x_given_w();
    let wgx = joint.w_given_x();
    let mut lo = 0.0;
    let mut hi = 0.0;
    for w in 0..2 {
        let weight = wgx[w][target];
        if weight <= 0.0 {
            // Zero joint mass in the target cell: this row cannot occur
            // under x = target and contributes nothing.
            continue;
        }
        let p = 1.0 - xgw[w][target];
        let cell = event_bound_binary_x(s.prob_one_given_w(w), p)?;
        lo += weight * cell.lo;
        hi += weight * cell.hi;
    }
    BoundInterval::probability(lo, hi, true, Method::ClosedForm)
}

/// Per-subgroup bounds when `x` refines a single `w` category: subgroup `ξ`
/// with population share `share(ξ)` of the category gets the contaminated
/// bound with `p = 1 - share(ξ)` and `q = P(y = 1 | w)`.
///
/// Shares are used exactly as given (no renormalization); their sum is only
/// required to be 1 within [`SHARE_SUM_TOL`], so survey-rounded shares pass.
pub fn subgroup_bounds(q: f64, shares: &[f64]) -> Result<Vec<BoundInterval>> {
    check_unit("q", q)?;
    if shares.is_empty() {
        return Err(Error::InvalidArgument("no subgroup shares given".into()));
    }
    for (i, &s) in shares.iter().enumerate() {
        if !(s > 0.0) {
            return Err(Error::DegenerateMargin {
                axis: "share",
                index: i,
            });
        }
        if s > 1.0 {
            return Err(Error::InvalidArgument(format!("share {i} = {s} exceeds 1")));
        }
    }
    let sum: f64 = shares.iter().sum();
    if (sum - 1.0).abs() > SHARE_SUM_TOL {
        return Err(Error::InvalidArgument(format!(
            "subgroup shares sum to {sum}, expected 1 within {SHARE_SUM_TOL}"
        )));
    }
    shares
        .iter()
        .map(|&share| event_bound_binary_x(q, 1.0 - share))
        .collect()
}
