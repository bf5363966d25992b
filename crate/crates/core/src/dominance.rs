//! Mean and quantile bounds via stochastic-dominance envelopes.
//!
//! With a fraction `p` of the `w = ω` group outside the target `x` cell, the
//! feasible distributions for the cell form a set whose extreme members under
//! first-order stochastic dominance are truncations of `P(y | w = ω)`:
//!
//! - the lower envelope keeps the lowest `1 - p` of the mass (right-truncates
//!   at the `(1 - p)`-quantile),
//! - the upper envelope keeps the highest `1 - p` of the mass.
//!
//! An atom straddling the truncation threshold is split proportionally so the
//! discarded tail carries exactly `p` mass. Any parameter monotone under
//! dominance is then bounded by its values at the two envelopes; means and
//! quantiles are provided here. For the mean every interior value is
//! attainable; for quantiles only support values are, so the quantile bound
//! also reports the feasible subset of the support.

use crate::bound::{BoundInterval, Method};
use crate::error::{Error, Result};
use crate::prob::{DiscreteDistribution, Scenario};

/// The extreme feasible distributions for a contaminated cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationPair {
    /// Smallest member under dominance (lowest `1 - p` mass kept).
    pub lower_env: DiscreteDistribution,
    /// Largest member under dominance (highest `1 - p` mass kept).
    pub upper_env: DiscreteDistribution,
    pub p: f64,
}

/// Quantile bound plus the support values actually attainable inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileBoundsReport {
    pub interval: BoundInterval,
    pub feasible_values: Vec<f64>,
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "p = {p} must be nonnegative"
        )));
    }
    if p >= 1.0 {
        return Err(Error::DegenerateConditioning { p });
    }
    Ok(())
}

/// Keep `1 - p` mass from one end of `d`, splitting the boundary atom, and
/// renormalize. `from_low` selects which tail survives.
fn truncate(d: &DiscreteDistribution, p: f64, from_low: bool) -> DiscreteDistribution {
    let keep = 1.0 - p;
    let n = d.len();
    let order: Vec<usize> = if from_low {
        (0..n).collect()
    } else {
        (0..n).rev().collect()
    };
    let mut taken: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut remaining = keep;
    for &i in &order {
        if remaining <= 1e-15 {
            break;
        }
        let take = d.probs()[i].min(remaining);
        if take > 0.0 {
            taken.push((d.support()[i], take));
        }
        remaining -= take;
    }
    if !from_low {
        taken.reverse();
    }
    // Renormalize by the mass actually kept (equals `keep` up to the
    // source's own normalization slop).
    let total: f64 = taken.iter().map(|(_, t)| t).sum();
    let (support, probs) = taken.into_iter().map(|(y, t)| (y, t / total)).unzip();
    DiscreteDistribution::new(support, probs).expect("truncation preserves invariants")
}

/// Build both envelopes of `P(y | w = ω)` for contamination fraction `p`.
pub fn truncate_pair(d: &DiscreteDistribution, p: f64) -> Result<TruncationPair> {
    check_p(p)?;
    if p == 0.0 {
        return Ok(TruncationPair {
            lower_env: d.clone(),
            upper_env: d.clone(),
            p,
        });
    }
    Ok(TruncationPair {
        lower_env: truncate(d, p, true),
        upper_env: truncate(d, p, false),
        p,
    })
}

/// Sharp bounds on the conditional mean inside the target cell: the means of
/// the two envelopes. Every value in between is attainable.
pub fn mean_bounds(d: &DiscreteDistribution, p: f64) -> Result<BoundInterval> {
    let pair = truncate_pair(d, p)?;
    BoundInterval::new(
        pair.lower_env.mean(),
        pair.upper_env.mean(),
        true,
        Method::ClosedForm,
    )
}

/// Sharp bounds on the `alpha`-quantile inside the target cell: the
/// `alpha`-quantiles of the two envelopes, plus the support values inside
/// the interval (the only attainable quantile values).
pub fn quantile_bounds(
    d: &DiscreteDistribution,
    p: f64,
    alpha: f64,
) -> Result<QuantileBoundsReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} outside (0, 1)"
        )));
    }
    let pair = truncate_pair(d, p)?;
    let lo = pair.lower_env.quantile(alpha);
    let hi = pair.upper_env.quantile(alpha);
    let interval = BoundInterval::new(lo, hi, true, Method::ClosedForm)?;
    let feasible_values = d
        .support()
        .iter()
        .copied()
        .filter(|&y| y >= lo && y <= hi)
        .collect();
    Ok(QuantileBoundsReport {
        interval,
        feasible_values,
    })
}

fn cell_weights(s: &Scenario, target: usize) -> Result<Vec<(usize, f64, f64)>> {
    let joint = s.require_full_joint()?;
    if target >= joint.n_x() {
        return Err(Error::InvalidArgument(format!(
            "target index {target} out of range"
        )));
    }
    let xgw = joint.x_given_w();
    let wgx = joint.w_given_x();
    Ok((0..joint.n_w())
        .filter(|&w| wgx[w][target] > 0.0)
        .map(|w| (w, wgx[w][target], 1.0 - xgw[w][target]))
        .collect())
}

/// Sharp bounds on `E(y | x = target)`: per-row envelope means mixed by
/// `P(w = ω | x = target)`. Rows with no mass in the target cell drop out.
pub fn scenario_mean_bounds(s: &Scenario, target: usize) -> Result<BoundInterval> {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (w, weight, p) in cell_weights(s, target)? {
        let mb = mean_bounds(&s.y_given_w[w], p)?;
        lo += weight * mb.lo;
        hi += weight * mb.hi;
    }
    BoundInterval::new(lo, hi, true, Method::ClosedForm)
}

/// Sharp bounds on the `alpha`-quantile of `P(y | x = target)`: quantiles of
/// the weighted mixtures of the per-row envelopes (mixing preserves the
/// dominance ordering), plus the attainable support values.
pub fn scenario_quantile_bounds(
    s: &Scenario,
    target: usize,
    alpha: f64,
) -> Result<QuantileBoundsReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} outside (0, 1)"
        )));
    }
    let cells = cell_weights(s, target)?;
    let mut lower_parts = Vec::with_capacity(cells.len());
    let mut upper_parts = Vec::with_capacity(cells.len());
    let mut pairs = Vec::with_capacity(cells.len());
    for (w, weight, p) in &cells {
        pairs.push((*weight, truncate_pair(&s.y_given_w[*w], *p)?));
    }
    for (weight, pair) in &pairs {
        lower_parts.push((*weight, &pair.lower_env));
        upper_parts.push((*weight, &pair.upper_env));
    }
    let lower_mix = DiscreteDistribution::mixture(&lower_parts)?;
    let upper_mix = DiscreteDistribution::mixture(&upper_parts)?;
    let lo = lower_mix.quantile(alpha);
    let hi = upper_mix.quantile(alpha);
    let interval = BoundInterval::new(lo, hi, true, Method::ClosedForm)?;
    let feasible_values = s
        .y_support()
        .unwrap_or(&[])
        .iter()
        .copied()
        .filter(|&y| y >= lo && y <= hi)
        .collect();
    Ok(QuantileBoundsReport {
        interval,
        feasible_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::event_bound_binary_x;
    use proptest::prelude::*;

    fn d123() -> DiscreteDistribution {
        DiscreteDistribution::new(vec![1.0, 2.0, 3.0], vec![0.5, 0.3, 0.2]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn truncation_splits_boundary_atom() {
        let pair = truncate_pair(&d123(), 0.2).unwrap();
        assert_eq!(pair.lower_env.support(), &[1.0, 2.0]);
        assert!(close(pair.lower_env.probs()[0], 0.625, 1e-12));
        assert!(close(pair.lower_env.probs()[1], 0.375, 1e-12));
        assert_eq!(pair.upper_env.support(), &[1.0, 2.0, 3.0]);
        assert!(close(pair.upper_env.probs()[0], 0.375, 1e-12));
        assert!(close(pair.upper_env.probs()[1], 0.375, 1e-12));
        assert!(close(pair.upper_env.probs()[2], 0.25, 1e-12));
    }

    #[test]
    fn truncation_at_zero_is_identity() {
        let d = d123();
        let pair = truncate_pair(&d, 0.0).unwrap();
        assert_eq!(pair.lower_env, d);
        assert_eq!(pair.upper_env, d);
    }

    #[test]
    fn truncation_of_degenerate_distribution() {
        let d = DiscreteDistribution::new(vec![2.5], vec![1.0]).unwrap();
        let pair = truncate_pair(&d, 0.7).unwrap();
        assert_eq!(pair.lower_env, d);
        assert_eq!(pair.upper_env, d);
    }

    #[test]
    fn truncation_rejects_p_one() {
        assert_eq!(
            truncate_pair(&d123(), 1.0),
            Err(Error::DegenerateConditioning { p: 1.0 })
        );
    }

    #[test]
    fn mean_bounds_match_hand_computation() {
        let mb = mean_bounds(&d123(), 0.2).unwrap();
        assert!(close(mb.lo, 1.375, 1e-12));
        assert!(close(mb.hi, 1.875, 1e-12));
    }

    #[test]
    fn mean_bounds_at_zero_collapse() {
        let mb = mean_bounds(&d123(), 0.0).unwrap();
        assert_eq!(mb.lo, mb.hi);
        assert!(close(mb.lo, 1.7, 1e-12));
    }

    #[test]
    fn binary_outcome_mean_bounds_reduce_to_event_bound() {
        let q = 16.0 / 112.0;
        let p = 2.0 / 112.0;
        let d = DiscreteDistribution::bernoulli(q).unwrap();
        let mb = mean_bounds(&d, p).unwrap();
        let eb = event_bound_binary_x(q, p).unwrap();
        assert!(close(mb.lo, eb.lo, 1e-12));
        assert!(close(mb.hi, eb.hi, 1e-12));
        assert!(close(mb.lo, 0.1273, 5e-4));
        assert!(close(mb.hi, 0.1455, 5e-4));
    }

    #[test]
    fn quantile_bounds_median_example() {
        let qb = quantile_bounds(&d123(), 0.2, 0.5).unwrap();
        assert_eq!((qb.interval.lo, qb.interval.hi), (1.0, 2.0));
        assert_eq!(qb.feasible_values, vec![1.0, 2.0]);
    }

    #[test]
    fn quantile_bounds_at_zero_collapse() {
        let qb = quantile_bounds(&d123(), 0.0, 0.5).unwrap();
        assert_eq!((qb.interval.lo, qb.interval.hi), (1.0, 1.0));
    }

    #[test]
    fn quantile_bounds_high_alpha_reach_extremes() {
        let qb = quantile_bounds(&d123(), 0.2, 0.95).unwrap();
        assert_eq!((qb.interval.lo, qb.interval.hi), (2.0, 3.0));
        assert_eq!(qb.feasible_values, vec![2.0, 3.0]);
    }

    #[test]
    fn scenario_mean_equals_event_bound_for_binary_outcomes() {
        // Two independent routes to the same object: dominance envelopes
        // mixed per row, and the event LP.
        for seed in 0..50u64 {
            let nw = 2 + (seed % 2) as usize;
            let nx = 2 + ((seed / 2) % 2) as usize;
            let rs = crate::oracle::random_scenario(60_000 + seed, nw, nx);
            for target in 0..nx {
                let mean = scenario_mean_bounds(&rs.scenario, target).unwrap();
                let event = crate::sharp::sharp_event_bounds(&rs.scenario, target).unwrap();
                assert!(
                    close(mean.lo, event.lo, 1e-9) && close(mean.hi, event.hi, 1e-9),
                    "seed {seed} target {target}: mean [{}, {}] vs event [{}, {}]",
                    mean.lo,
                    mean.hi,
                    event.lo,
                    event.hi
                );
            }
        }
    }

    #[test]
    fn quantile_endpoints_live_on_the_support() {
        let d = DiscreteDistribution::new(vec![-1.5, 0.0, 2.0, 7.25], vec![0.1, 0.4, 0.3, 0.2])
            .unwrap();
        for p in [0.0, 0.1, 0.35, 0.8] {
            for alpha in [0.1, 0.5, 0.9] {
                let qb = quantile_bounds(&d, p, alpha).unwrap();
                assert!(d.support().contains(&qb.interval.lo));
                assert!(d.support().contains(&qb.interval.hi));
            }
        }
    }

    fn arb_distribution() -> impl Strategy<Value = DiscreteDistribution> {
        (2usize..8)
            .prop_flat_map(|n| {
                (
                    proptest::collection::vec(-10.0f64..10.0, n),
                    proptest::collection::vec(0.01f64..1.0, n),
                )
            })
            .prop_map(|(mut support, weights)| {
                support.sort_by(|a, b| a.partial_cmp(b).unwrap());
                support.dedup();
                let weights = &weights[..support.len()];
                let total: f64 = weights.iter().sum();
                let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
                DiscreteDistribution::new(support, probs).unwrap()
            })
    }

    proptest! {
        /// The lower envelope's CDF dominates the source's, which dominates
        /// the upper envelope's, at every support point.
        #[test]
        fn envelopes_are_dominance_extremes(d in arb_distribution(), p in 0.0f64..0.95) {
            let pair = truncate_pair(&d, p).unwrap();
            for &y in d.support() {
                let cl = pair.lower_env.cdf_at(y);
                let cd = d.cdf_at(y);
                let cu = pair.upper_env.cdf_at(y);
                prop_assert!(cl >= cd - 1e-12, "lower env CDF below source at {y}");
                prop_assert!(cd >= cu - 1e-12, "source CDF below upper env at {y}");
            }
        }

        /// Envelope means bracket the source mean.
        #[test]
        fn mean_interval_brackets_source(d in arb_distribution(), p in 0.0f64..0.95) {
            let mb = mean_bounds(&d, p).unwrap();
            prop_assert!(mb.lo <= d.mean() + 1e-12);
            prop_assert!(mb.hi >= d.mean() - 1e-12);
        }

        /// Less contamination gives a nested (tighter) mean interval.
        #[test]
        fn mean_interval_nests_under_refinement(
            d in arb_distribution(),
            p in 0.0f64..0.95,
            shrink in 0.0f64..1.0,
        ) {
            let p_small = p * shrink;
            let outer = mean_bounds(&d, p).unwrap();
            let inner = mean_bounds(&d, p_small).unwrap();
            prop_assert!(inner.is_subset_of(&outer, 1e-12));
        }

        /// On a binary outcome the envelope means equal the closed-form
        /// event bound.
        #[test]
        fn binary_reduction_matches_event_bound(q in 0.0f64..=1.0, p in 0.0f64..0.99) {
            let d = DiscreteDistribution::bernoulli(q).unwrap();
            let mb = mean_bounds(&d, p).unwrap();
            let eb = event_bound_binary_x(q, p).unwrap();
            prop_assert!((mb.lo - eb.lo).abs() < 1e-12);
            prop_assert!((mb.hi - eb.hi).abs() < 1e-12);
        }
    }
}
