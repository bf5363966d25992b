//! Independent brute-force verification of the LP bounds, plus a seeded
//! scenario generator for property tests.
//!
//! The enumeration works directly on the defining equations rather than on
//! any solver machinery. The constraint system is a product across `w` rows
//! (each mixture equality touches only its own row's cells) and the target
//! quantity is a fixed nonnegative mixture of one cell per row, so the
//! attained extremes decompose row by row: enumerate each row's cell vector
//! on the grid, keep assignments satisfying that row's equality within
//! `constraint_tol`, record the extreme values of the row's target cell, and
//! mix the per-row extremes. Within a row the last non-target cell is not
//! looped explicitly: for a fixed prefix the surviving grid values form a
//! contiguous range whose existence is checked directly, which visits the
//! same survivor set.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bound::{BoundInterval, Method};
use crate::error::{Error, Result};
use crate::prob::{DiscreteDistribution, JointWX, LabelSet, Scenario, WXKnowledge};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Grid spacing in (0, 0.5].
    pub step: f64,
    /// Max violation of a row equality for a grid point to survive.
    /// `None` means `step * |X|`, generous enough that rounding any feasible
    /// point to the grid always survives.
    pub constraint_tol: Option<f64>,
    /// Seed for scenario generation.
    pub seed: u64,
    /// Cap on enumerated grid nodes per direction.
    pub budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            constraint_tol: None,
            seed: 0,
            budget: 10_000_000,
        }
    }
}

impl OracleConfig {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }

    pub fn resolved_tol(&self, n_x: usize) -> f64 {
        self.constraint_tol.unwrap_or(self.step * n_x as f64)
    }
}

/// The enumeration grid over [0, 1]: multiples of `step`, with 1 appended
/// when `step` does not divide it.
struct Grid {
    values: Vec<f64>,
}

impl Grid {
    fn new(step: f64) -> Self {
        let mut values = Vec::new();
        let mut i = 0usize;
        loop {
            let v = i as f64 * step;
            if v > 1.0 + 1e-12 {
                break;
            }
            values.push(v.min(1.0));
            i += 1;
        }
        if *values.last().unwrap() < 1.0 - 1e-12 {
            values.push(1.0);
        }
        Self { values }
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    /// Is any grid value inside `[lo, hi]`?
    fn any_in(&self, lo: f64, hi: f64) -> bool {
        if hi < lo {
            return false;
        }
        let i = self.values.partition_point(|&v| v < lo - 1e-12);
        i < self.values.len() && self.values[i] <= hi + 1e-12
    }
}

/// One `w` row of the enumeration: coefficients of its positive-mass cells.
struct RowProblem {
    coeffs: Vec<f64>,
    rhs: f64,
    /// Position (within `coeffs`) of the target-column cell, if present.
    target_pos: Option<usize>,
}

impl RowProblem {
    /// Cells looped explicitly (everything except one resolved cell).
    fn enumerated_cells(&self) -> usize {
        self.coeffs.len().saturating_sub(1).max(1)
    }

    /// Resolved cell: the largest-coefficient cell that is not the target.
    fn resolve_pos(&self) -> Option<usize> {
        (0..self.coeffs.len())
            .filter(|&i| Some(i) != self.target_pos)
            .max_by(|&a, &b| self.coeffs[a].partial_cmp(&self.coeffs[b]).unwrap())
    }

    /// Can the cells other than `resolve` and the already-fixed prefix make
    /// the row equality hold within `tol`? `partial` is the contribution of
    /// everything fixed so far.
    fn exists(&self, middles: &[usize], partial: f64, grid: &Grid, tol: f64) -> bool {
        let resolve = match self.resolve_pos() {
            Some(r) => r,
            // Single-cell row, and that cell is already fixed.
            None => return (partial - self.rhs).abs() <= tol,
        };
        self.exists_rec(middles, 0, partial, resolve, grid, tol)
    }

    fn exists_rec(
        &self,
        middles: &[usize],
        depth: usize,
        partial: f64,
        resolve: usize,
        grid: &Grid,
        tol: f64,
    ) -> bool {
        // All coefficients are nonnegative, so prune on both sides.
        if partial - tol > self.rhs {
            return false;
        }
        let capacity: f64 = middles[depth..]
            .iter()
            .map(|&i| self.coeffs[i])
            .sum::<f64>()
            + self.coeffs[resolve];
        if partial + capacity + tol < self.rhs {
            return false;
        }
        if depth == middles.len() {
            let c = self.coeffs[resolve];
            let r = self.rhs - partial;
            return grid.any_in(((r - tol) / c).max(0.0), ((r + tol) / c).min(1.0));
        }
        let c = self.coeffs[middles[depth]];
        for &v in &grid.values {
            if self.exists_rec(middles, depth + 1, partial + c * v, resolve, grid, tol) {
                return true;
            }
            if partial + c * v - tol > self.rhs {
                break; // values only grow from here
            }
        }
        false
    }

    /// Extreme feasible grid values of the target cell, or an existence
    /// check when the row has no target cell. `None` = no survivor.
    fn scan(&self, grid: &Grid, tol: f64) -> Option<(f64, f64)> {
        match self.target_pos {
            None => {
                let middles: Vec<usize> = (0..self.coeffs.len())
                    .filter(|&i| Some(i) != self.resolve_pos())
                    .collect();
                self.exists(&middles, 0.0, grid, tol).then_some((0.0, 0.0))
            }
            Some(t) if self.coeffs.len() == 1 => {
                let c = self.coeffs[t];
                let lo = ((self.rhs - tol) / c).max(0.0);
                let hi = ((self.rhs + tol) / c).min(1.0);
                let lo_v = grid.values.iter().copied().find(|&v| v >= lo - 1e-12)?;
                let hi_v = grid
                    .values
                    .iter()
                    .rev()
                    .copied()
                    .find(|&v| v <= hi + 1e-12)?;
                (lo_v <= hi_v).then_some((lo_v, hi_v))
            }
            Some(t) => {
                let resolve = self.resolve_pos().expect("row has a non-target cell");
                let middles: Vec<usize> = (0..self.coeffs.len())
                    .filter(|&i| i != t && i != resolve)
                    .collect();
                let c_t = self.coeffs[t];
                let min = grid
                    .values
                    .iter()
                    .copied()
                    .find(|&v| self.exists_rec(&middles, 0, c_t * v, resolve, grid, tol));
                let max = grid
                    .values
                    .iter()
                    .rev()
                    .copied()
                    .find(|&v| self.exists_rec(&middles, 0, c_t * v, resolve, grid, tol));
                match (min, max) {
                    (Some(lo), Some(hi)) => Some((lo, hi)),
                    _ => None,
                }
            }
        }
    }
}

/// Enumerate all feasible conditional tables on the grid and report the
/// attained extremes of `P(y = 1 | x = target)`. Not sharp: the grid and the
/// constraint tolerance each introduce slack of known size (at most
/// `constraint_tol / P(x = target) + step` at each end).
pub fn grid_enumerate_bounds(
    s: &Scenario,
    target: usize,
    cfg: &OracleConfig,
) -> Result<BoundInterval> {
    s.require_binary_outcome()?;
    let joint = s.require_full_joint()?;
    if !(cfg.step > 0.0 && cfg.step <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "step {} outside (0, 0.5]",
            cfg.step
        )));
    }
    if target >= joint.n_x() {
        return Err(Error::InvalidArgument(format!(
            "target index {target} out of range"
        )));
    }
    let tol = cfg.resolved_tol(joint.n_x());
    let grid = Grid::new(cfg.step);
    let xgw = joint.x_given_w();
    let wgx = joint.w_given_x();

    let rows: Vec<RowProblem> = (0..joint.n_w())
        .map(|w| {
            let mut coeffs = Vec::new();
            let mut target_pos = None;
            for x in 0..joint.n_x() {
                if joint.entry(w, x) > 0.0 {
                    if x == target {
                        target_pos = Some(coeffs.len());
                    }
                    coeffs.push(xgw[w][x]);
                }
            }
            RowProblem {
                coeffs,
                rhs: s.prob_one_given_w(w),
                target_pos,
            }
        })
        .collect();

    // Each explicitly looped cell contributes a factor of the grid size;
    // the resolved cell is an O(1) range check.
    let required: u128 = rows
        .iter()
        .map(|r| (grid.len() as u128).saturating_pow(r.enumerated_cells() as u32))
        .fold(0u128, |acc, v| acc.saturating_add(v));
    if required > cfg.budget as u128 {
        return Err(Error::TooLarge {
            required,
            budget: cfg.budget,
        });
    }

    let mut lo = 0.0;
    let mut hi = 0.0;
    for (w, row) in rows.iter().enumerate() {
        let Some((row_min, row_max)) = row.scan(&grid, tol) else {
            return Err(Error::NoFeasibleGridPoint {
                suggested: (2.0 * tol).max(cfg.step * joint.n_x() as f64),
            });
        };
        let weight = wgx[w][target];
        if row.target_pos.is_some() && weight > 0.0 {
            lo += weight * row_min;
            hi += weight * row_max;
        }
    }
    BoundInterval::probability(lo, hi, false, Method::Oracle)
}

/// A generated scenario together with the hidden conditional table that
/// produced it; the table is a feasible point by construction, so its
/// implied target value must fall inside any correct bound.
#[derive(Debug, Clone)]
pub struct RandomScenario {
    pub scenario: Scenario,
    /// `P(y = 1 | w = ω, x = ξ)` used to generate the data.
    pub hidden_table: Vec<Vec<f64>>,
}

impl RandomScenario {
    /// The generating truth's `P(y = 1 | x = target)`.
    pub fn hidden_target_value(&self, target: usize) -> f64 {
        let joint = self
            .scenario
            .full_joint()
            .expect("generated with full joint");
        let wgx = joint.w_given_x();
        (0..joint.n_w())
            .map(|w| wgx[w][target] * self.hidden_table[w][target])
            .sum()
    }
}

/// Deterministic-in-seed scenario generator: a strictly positive joint, a
/// hidden conditional table on [0, 1], and `P(y = 1 | w)` derived from them
/// by mixture, so the scenario is consistent with a known feasible point.
pub fn random_scenario(seed: u64, nw: usize, nx: usize) -> RandomScenario {
    assert!(nw >= 1 && nx >= 1, "label sets must be non-empty");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut table = vec![vec![0.0f64; nx]; nw];
    let mut total = 0.0;
    for row in table.iter_mut() {
        for cell in row.iter_mut() {
            *cell = rng.random_range(0.05..1.0);
            total += *cell;
        }
    }
    for row in table.iter_mut() {
        for cell in row.iter_mut() {
            *cell /= total;
        }
    }
    let joint = JointWX::new(table).expect("strictly positive cells");

    let hidden_table: Vec<Vec<f64>> = (0..nw)
        .map(|_| (0..nx).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();

    let xgw = joint.x_given_w();
    let y_given_w: Vec<DiscreteDistribution> = (0..nw)
        .map(|w| {
            let q: f64 = (0..nx).map(|x| hidden_table[w][x] * xgw[w][x]).sum();
            DiscreteDistribution::bernoulli(q).expect("mixture of unit values")
        })
        .collect();

    let labels = |prefix: &str, n: usize| {
        LabelSet::new((0..n).map(|i| format!("{prefix}{i}")).collect()).unwrap()
    };
    RandomScenario {
        scenario: Scenario {
            w_labels: labels("w", nw),
            x_labels: labels("x", nx),
            y_given_w,
            wx: WXKnowledge::Full(joint),
            bv_deltas: None,
        },
        hidden_table,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::AggregationStructure;
    use crate::sharp::sharp_event_bounds;

    /// Provable per-endpoint slack between the oracle and the true bound.
    fn combined_slack(s: &Scenario, target: usize, cfg: &OracleConfig) -> f64 {
        let joint = s.full_joint().unwrap();
        let px = joint.x_marginals()[target];
        cfg.resolved_tol(joint.n_x()) / px + cfg.step + 1e-6
    }

    #[test]
    fn oracle_matches_lp_on_bridging_survey() {
        let rs = random_scenario(7, 2, 2); // shape only; replace data below
        let mut s = rs.scenario;
        s.y_given_w = vec![
            DiscreteDistribution::bernoulli(0.10).unwrap(),
            DiscreteDistribution::bernoulli(16.0 / 112.0).unwrap(),
        ];
        s.wx = WXKnowledge::Full(JointWX::from_counts(&[vec![799, 44], vec![2, 110]]).unwrap());
        let cfg = OracleConfig::with_step(1e-3);
        let oracle = grid_enumerate_bounds(&s, 1, &cfg).unwrap();
        let lp = sharp_event_bounds(&s, 1).unwrap();
        let slack = combined_slack(&s, 1, &cfg);
        assert!(
            (oracle.lo - lp.lo).abs() <= slack,
            "{} vs {}",
            oracle.lo,
            lp.lo
        );
        assert!(
            (oracle.hi - lp.hi).abs() <= slack,
            "{} vs {}",
            oracle.hi,
            lp.hi
        );
        assert!((oracle.lo - 0.0909).abs() <= 2e-3);
        assert!((oracle.hi - 0.3896).abs() <= 2e-3);
    }

    #[test]
    fn oracle_point_interval_when_x_is_trivial() {
        // Single x column: every row's cell is pinned to P(y=1|w).
        let joint = JointWX::new(vec![vec![0.4], vec![0.6]]).unwrap();
        let s = Scenario {
            w_labels: LabelSet::from_strs(&["a", "b"]).unwrap(),
            x_labels: LabelSet::from_strs(&["all"]).unwrap(),
            y_given_w: vec![
                DiscreteDistribution::bernoulli(0.25).unwrap(),
                DiscreteDistribution::bernoulli(0.75).unwrap(),
            ],
            wx: WXKnowledge::Full(joint),
            bv_deltas: None,
        };
        let cfg = OracleConfig::with_step(1e-3);
        let b = grid_enumerate_bounds(&s, 0, &cfg).unwrap();
        let point = 0.4 * 0.25 + 0.6 * 0.75;
        assert!(b.width() <= 2.0 * cfg.resolved_tol(1) + 2.0 * cfg.step);
        assert!(b.contains(point, 1e-9));
    }

    #[test]
    fn oracle_spans_unit_interval_on_vacuous_scenario() {
        let joint = JointWX::new(vec![vec![0.3, 0.2], vec![0.3, 0.2]]).unwrap();
        let s = Scenario {
            w_labels: LabelSet::from_strs(&["a", "b"]).unwrap(),
            x_labels: LabelSet::from_strs(&["A", "B"]).unwrap(),
            y_given_w: vec![
                DiscreteDistribution::bernoulli(0.5).unwrap(),
                DiscreteDistribution::bernoulli(0.4).unwrap(),
            ],
            wx: WXKnowledge::Full(joint),
            bv_deltas: None,
        };
        let b = grid_enumerate_bounds(&s, 1, &OracleConfig::with_step(0.01)).unwrap();
        assert!(b.lo <= 1e-9);
        assert!(b.hi >= 1.0 - 1e-9);
    }

    #[test]
    fn budget_rejects_oversized_enumerations() {
        let rs = random_scenario(3, 4, 4);
        let cfg = OracleConfig::with_step(1e-3); // 1001^3 per row
        match grid_enumerate_bounds(&rs.scenario, 0, &cfg) {
            Err(Error::TooLarge { required, budget }) => {
                assert!(required > budget as u128);
            }
            other => panic!("expected TooLarge, got {other:?}"),
        }
    }

    #[test]
    fn too_small_tolerance_reports_a_hint() {
        let rs = random_scenario(11, 2, 2);
        let cfg = OracleConfig {
            step: 0.25,
            constraint_tol: Some(1e-12),
            ..OracleConfig::default()
        };
        match grid_enumerate_bounds(&rs.scenario, 0, &cfg) {
            Err(Error::NoFeasibleGridPoint { suggested }) => {
                assert!(suggested > 1e-12);
            }
            // A coarse grid can still get lucky; accept a valid interval.
            Ok(b) => assert!(b.lo <= b.hi),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn generator_is_deterministic_in_seed() {
        let a = random_scenario(42, 2, 3);
        let b = random_scenario(42, 2, 3);
        assert_eq!(a.scenario, b.scenario);
        assert_eq!(a.hidden_table, b.hidden_table);
        let c = random_scenario(43, 2, 3);
        assert_ne!(a.hidden_table, c.hidden_table);
    }

    #[test]
    fn generator_with_single_w_mirrors_subgroup_structure() {
        let rs = random_scenario(5, 1, 4);
        let joint = rs.scenario.full_joint().unwrap();
        assert!(matches!(
            joint.detect_aggregation(1e-9),
            AggregationStructure::WAggregatesX { .. }
        ));
    }

    #[test]
    fn hidden_truth_lies_inside_lp_bounds() {
        for seed in 0..30 {
            let rs = random_scenario(seed, 2 + (seed as usize % 2), 2 + (seed as usize / 2 % 2));
            let nx = rs.scenario.full_joint().unwrap().n_x();
            for target in 0..nx {
                let b = sharp_event_bounds(&rs.scenario, target).unwrap();
                let truth = rs.hidden_target_value(target);
                assert!(
                    b.contains(truth, 1e-7),
                    "seed {seed} target {target}: {truth} outside [{}, {}]",
                    b.lo,
                    b.hi
                );
            }
        }
    }

    #[test]
    fn halving_the_step_refines_within_slack() {
        let rs = random_scenario(13, 2, 3);
        let coarse_cfg = OracleConfig::with_step(0.02);
        let fine_cfg = OracleConfig::with_step(0.01);
        let coarse = grid_enumerate_bounds(&rs.scenario, 1, &coarse_cfg).unwrap();
        let fine = grid_enumerate_bounds(&rs.scenario, 1, &fine_cfg).unwrap();
        let slack = combined_slack(&rs.scenario, 1, &coarse_cfg);
        assert!(fine.lo >= coarse.lo - slack);
        assert!(fine.hi <= coarse.hi + slack);
    }

    #[test]
    fn oracle_and_lp_agree_within_combined_slack() {
        for seed in 100..120 {
            let nw = 2 + (seed as usize % 2);
            let nx = 2 + ((seed / 2) as usize % 2);
            let rs = random_scenario(seed, nw, nx);
            let cfg = OracleConfig::with_step(0.01);
            for target in 0..nx {
                let oracle = grid_enumerate_bounds(&rs.scenario, target, &cfg).unwrap();
                let lp = sharp_event_bounds(&rs.scenario, target).unwrap();
                let slack = combined_slack(&rs.scenario, target, &cfg);
                assert!(
                    (oracle.lo - lp.lo).abs() <= slack && (oracle.hi - lp.hi).abs() <= slack,
                    "seed {seed} target {target}: oracle [{}, {}] vs lp [{}, {}]",
                    oracle.lo,
                    oracle.hi,
                    lp.lo,
                    lp.hi
                );
            }
        }
    }
}
