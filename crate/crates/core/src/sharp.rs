//! Sharp bounds on `P(y = 1 | x = target)` for general finite label sets,
//! assembled as linear programs.
//!
//! For a binary outcome the unknowns are the cell probabilities
//! `q[ω,ξ] = P(y = 1 | w = ω, x = ξ)`, one variable per cell with positive
//! joint mass. Each `w` row contributes the mixture equality
//! `Σ_ξ q[ω,ξ] · P(x = ξ | w = ω) = P(y = 1 | w = ω)`, the objective is the
//! target-column mixture `Σ_ω q[ω,target] · P(w = ω | x = target)`, and all
//! variables live in `[0, 1]`. Minimizing and maximizing gives the sharp
//! interval.
//!
//! Bounded-variation caps add two inequality rows per shared label;
//! partial knowledge of `P(w, x)` is handled by sweeping the one-parameter
//! family of joints with the given marginals (binary labels) or by taking
//! the union over an explicit candidate set.

use std::collections::BTreeMap;

use crate::bound::{BoundInterval, Method};
use crate::error::{Error, Result};
use crate::lp::{solve_max, solve_min, LinearProgram, LpSolution};
use crate::prob::{JointWX, Scenario, WXKnowledge};

/// Default number of points for the marginals-only sweep.
pub const DEFAULT_GRID_N: usize = 101;

/// Per-label caps `|P(y=1|w=k) - P(y=1|x=k)| <= δ_k` for labels `k` present
/// in both schemes. An infinite delta is allowed and means "no constraint".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BvSpec {
    deltas: BTreeMap<String, f64>,
}

impl BvSpec {
    pub fn new(deltas: BTreeMap<String, f64>) -> Result<Self> {
        for (k, d) in &deltas {
            if d.is_nan() || *d < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "bv delta for '{k}' must be nonnegative, got {d}"
                )));
            }
        }
        Ok(Self { deltas })
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, f64)>>(pairs: I) -> Result<Self> {
        Self::new(pairs.into_iter().collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &f64)> {
        self.deltas.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

/// Union-of-intervals result for partially known `P(w, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialBoundsReport {
    /// Convex hull of the per-point intervals.
    pub interval: BoundInterval,
    /// Number of joints evaluated.
    pub grid_points: usize,
    /// The evaluated points: sweep parameter (or candidate index) paired
    /// with that joint's sharp interval.
    pub per_point: Vec<(f64, BoundInterval)>,
    /// Candidate indices skipped because their LP was infeasible.
    pub excluded: Vec<usize>,
    /// True when the union of per-point intervals is disconnected, i.e. the
    /// hull papers over a gap.
    pub has_gap: bool,
}

struct EventLp {
    lp: LinearProgram,
    /// Variable index -> (w, x) cell.
    cells: Vec<(usize, usize)>,
    var_of: BTreeMap<(usize, usize), usize>,
}

fn assemble_event_lp(s: &Scenario, joint: &JointWX, target: usize) -> Result<EventLp> {
    s.require_binary_outcome()?;
    if target >= joint.n_x() {
        return Err(Error::InvalidArgument(format!(
            "target index {target} out of range for {} x labels",
            joint.n_x()
        )));
    }
    if s.y_given_w.len() != joint.n_w() {
        return Err(Error::WrongShape {
            expected: "one P(y|w) row per w label",
        });
    }

    // Cells with zero joint mass carry no variable: conditioning on them is
    // undefined and they would only add vacuous degrees of freedom.
    let mut cells = Vec::new();
    let mut var_of = BTreeMap::new();
    for w in 0..joint.n_w() {
        for x in 0..joint.n_x() {
            if joint.entry(w, x) > 0.0 {
                var_of.insert((w, x), cells.len());
                cells.push((w, x));
            }
        }
    }

    let mut lp = LinearProgram::new(cells.len());
    let xgw = joint.x_given_w();
    let wgx = joint.w_given_x();

    for w in 0..joint.n_w() {
        let mut coeffs = vec![0.0; cells.len()];
        for x in 0..joint.n_x() {
            if let Some(&v) = var_of.get(&(w, x)) {
                coeffs[v] = xgw[w][x];
            }
        }
        lp.add_eq(coeffs, s.prob_one_given_w(w))?;
    }

    let mut objective = vec![0.0; cells.len()];
    for w in 0..joint.n_w() {
        if let Some(&v) = var_of.get(&(w, target)) {
            objective[v] = wgx[w][target];
        }
    }
    lp.set_objective(objective)?;

    Ok(EventLp { lp, cells, var_of })
}

/// The event-bound LP for a scenario with a fully known joint: one `[0, 1]`
/// variable per positive-mass cell, one mixture equality per `w` row, and
/// the target-column mixture as objective.
pub fn build_lp_event(s: &Scenario, target: usize) -> Result<LinearProgram> {
    let joint = s.require_full_joint()?;
    Ok(assemble_event_lp(s, joint, target)?.lp)
}

fn solve_interval(lp: &LinearProgram, sharp: bool) -> Result<Option<BoundInterval>> {
    let min = solve_min(lp)?;
    let max = solve_max(lp)?;
    match (min, max) {
        (LpSolution::Optimal { value: lo, .. }, LpSolution::Optimal { value: hi, .. }) => {
            Ok(Some(BoundInterval::probability(lo, hi, sharp, Method::Lp)?))
        }
        (LpSolution::Infeasible, _) | (_, LpSolution::Infeasible) => Ok(None),
        // All variables are boxed in [0, 1]; an unbounded status is a bug.
        _ => Err(Error::SolverStalled { iterations: 0 }),
    }
}

/// Sharp bounds on `P(y = 1 | x = target)` with the joint fully known.
///
/// The constraint system always admits the flat table
/// `q[ω,ξ] = P(y=1|w=ω)`, so infeasibility means the scenario data are
/// inconsistent and is reported as an error rather than an empty interval.
pub fn sharp_event_bounds(s: &Scenario, target: usize) -> Result<BoundInterval> {
    let joint = s.require_full_joint()?;
    let assembled = assemble_event_lp(s, joint, target)?;
    solve_interval(&assembled.lp, true)?.ok_or_else(|| Error::InconsistentScenario {
        detail: "event-bound LP infeasible; check P(y|w) and P(w,x) inputs".into(),
    })
}

/// Sharp bounds under bounded-variation caps: for each constrained label
/// `k`, `P(y=1|x=k)` (the target-column mixture for column `k`) must lie
/// within `δ_k` of `P(y=1|w=k)`. Caps are imposed as weak inequalities, the
/// closure of the strict ones.
pub fn with_bounded_variation(s: &Scenario, bv: &BvSpec, target: usize) -> Result<BoundInterval> {
    let joint = s.require_full_joint()?;
    let assembled = assemble_event_lp(s, joint, target)?;
    let mut lp = assembled.lp;
    let wgx = joint.w_given_x();

    for (label, &delta) in bv.iter() {
        if delta.is_infinite() {
            continue;
        }
        let (Some(kw), Some(kx)) = (s.w_labels.index_of(label), s.x_labels.index_of(label)) else {
            return Err(Error::InvalidArgument(format!(
                "bv key '{label}' not in both label sets"
            )));
        };
        let mut coeffs = vec![0.0; lp.n_vars()];
        for w in 0..joint.n_w() {
            if let Some(&v) = assembled.var_of.get(&(w, kx)) {
                coeffs[v] = wgx[w][kx];
            }
        }
        let q_w = s.prob_one_given_w(kw);
        lp.add_le(coeffs.clone(), q_w + delta)?;
        let neg: Vec<f64> = coeffs.iter().map(|c| -c).collect();
        lp.add_le(neg, -(q_w - delta))?;
    }

    solve_interval(&lp, true)?.ok_or(Error::BvTooTight)
}

/// The one-parameter family of 2x2 joints with the given marginals, indexed
/// by `θ = P(w = 1, x = 1)`. Feasible range of θ is
/// `[max(0, pw1 + px1 - 1), min(pw1, px1)]`.
fn theta_range(pw1: f64, px1: f64) -> (f64, f64) {
    ((pw1 + px1 - 1.0).max(0.0), pw1.min(px1))
}

fn joint_from_theta(pw1: f64, px1: f64, theta: f64) -> Result<JointWX> {
    let cell = |v: f64| if v < 0.0 { 0.0 } else { v }; // clamp float dust
    JointWX::new(vec![
        vec![cell(1.0 - pw1 - px1 + theta), cell(px1 - theta)],
        vec![cell(pw1 - theta), cell(theta)],
    ])
}

fn hull_and_gap(points: &[(f64, BoundInterval)]) -> (BoundInterval, bool) {
    debug_assert!(!points.is_empty());
    let mut hull = points[0].1;
    for (_, iv) in &points[1..] {
        hull = hull.hull(iv);
    }
    // Sweep the intervals in lo order; a gap appears when one starts beyond
    // everything reachable so far.
    let mut sorted: Vec<BoundInterval> = points.iter().map(|(_, iv)| *iv).collect();
    sorted.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    let mut reach = sorted[0].hi;
    let mut has_gap = false;
    for iv in &sorted[1..] {
        if iv.lo > reach + 1e-12 {
            has_gap = true;
            break;
        }
        reach = reach.max(iv.hi);
    }
    (hull, has_gap)
}

/// Bounds when only the marginals of `P(w, x)` are known (binary labels
/// only): sweep θ over its feasible range on an evenly spaced grid, solve
/// the full-knowledge LP at each point, and return the union hull. This is
/// an inner approximation that grows toward the sharp set as the grid is
/// refined; with `grid_n = 1` the single point is the upper (comonotone)
/// endpoint.
pub fn partial_knowledge_bounds(
    s: &Scenario,
    target: usize,
    grid_n: usize,
) -> Result<PartialBoundsReport> {
    let WXKnowledge::MarginalsOnly { pw, px } = &s.wx else {
        return Err(Error::WrongShape {
            expected: "marginals-only knowledge of P(w,x)",
        });
    };
    if pw.len() != 2 || px.len() != 2 {
        return Err(Error::UnsupportedShape {
            detail: "marginals-only sweep requires binary w and x; supply a candidate set instead",
        });
    }
    if grid_n == 0 {
        return Err(Error::InvalidArgument("grid_n must be at least 1".into()));
    }
    s.require_binary_outcome()?;

    let (lo, hi) = theta_range(pw[1], px[1]);
    let thetas: Vec<f64> = if grid_n == 1 {
        vec![hi]
    } else {
        (0..grid_n)
            .map(|i| lo + (hi - lo) * i as f64 / (grid_n - 1) as f64)
            .collect()
    };

    let mut per_point = Vec::with_capacity(thetas.len());
    for theta in thetas {
        let joint = joint_from_theta(pw[1], px[1], theta)?;
        let full = Scenario {
            wx: WXKnowledge::Full(joint),
            ..s.clone()
        };
        let iv = sharp_event_bounds(&full, target)?;
        per_point.push((theta, iv));
    }

    let (hull, has_gap) = hull_and_gap(&per_point);
    Ok(PartialBoundsReport {
        interval: BoundInterval {
            sharp: false,
            method: Method::GridUnion,
            ..hull
        },
        grid_points: per_point.len(),
        per_point,
        excluded: Vec::new(),
        has_gap,
    })
}

/// Bounds when `P(w, x)` is known to be one of an explicit list of joints:
/// union hull of the per-candidate sharp intervals. Candidates whose LP is
/// infeasible are excluded and reported; if all are, the scenario is
/// inconsistent.
pub fn candidate_set_bounds(s: &Scenario, target: usize) -> Result<PartialBoundsReport> {
    let WXKnowledge::CandidateSet(cands) = &s.wx else {
        return Err(Error::WrongShape {
            expected: "candidate-set knowledge of P(w,x)",
        });
    };
    if cands.is_empty() {
        return Err(Error::InvalidArgument("candidate set is empty".into()));
    }
    s.require_binary_outcome()?;

    let mut per_point = Vec::new();
    let mut excluded = Vec::new();
    for (k, joint) in cands.iter().enumerate() {
        let assembled = assemble_event_lp(s, joint, target)?;
        match solve_interval(&assembled.lp, true)? {
            Some(iv) => per_point.push((k as f64, iv)),
            None => excluded.push(k),
        }
    }
    if per_point.is_empty() {
        return Err(Error::InconsistentScenario {
            detail: "every candidate joint is infeasible against P(y|w)".into(),
        });
    }

    let (hull, has_gap) = hull_and_gap(&per_point);
    Ok(PartialBoundsReport {
        interval: BoundInterval {
            sharp: false,
            method: Method::GridUnion,
            ..hull
        },
        grid_points: per_point.len(),
        per_point,
        excluded,
        has_gap,
    })
}

/// Cell list of the event LP (variable order), exposed for diagnostics.
pub fn event_lp_cells(s: &Scenario, target: usize) -> Result<Vec<(usize, usize)>> {
    let joint = s.require_full_joint()?;
    Ok(assemble_event_lp(s, joint, target)?.cells)
}
