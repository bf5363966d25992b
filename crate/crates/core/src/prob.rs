//! Probability primitives: distributions on a finite outcome support, label
//! sets, the cross-classification joint `P(w, x)`, and scenario validation.
//!
//! Types constructed through `new` carry their invariants. Each type also has
//! a `from_raw` escape hatch plus a `violations` check so callers ingesting
//! untrusted input can collect every problem instead of stopping at the first.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Tolerance for "this probability vector sums to one".
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Default tolerance for aggregation detection: only deterministic maps.
pub const AGGREGATION_TOL: f64 = 1e-9;

fn sums_to_one(v: impl IntoIterator<Item = f64>) -> (bool, f64) {
    let sum: f64 = v.into_iter().sum();
    ((sum - 1.0).abs() <= PROB_SUM_TOL, sum)
}

// ---------------------------------------------------------------------------
// DiscreteDistribution
// ---------------------------------------------------------------------------

/// A distribution with finite support on the real line.
///
/// Support values are strictly increasing; probabilities are nonnegative and
/// sum to one within [`PROB_SUM_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let d = Self::from_raw(support, probs);
        let v = d.violations();
        if v.is_empty() {
            Ok(d)
        } else {
            Err(Error::InvalidDistribution(v.join("; ")))
        }
    }

    /// Build without checking invariants; pair with [`Self::violations`].
    pub fn from_raw(support: Vec<f64>, probs: Vec<f64>) -> Self {
        Self { support, probs }
    }

    /// Distribution on {0, 1} with `P(1) = q`.
    pub fn bernoulli(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidDistribution(format!(
                "bernoulli parameter {q} outside [0, 1]"
            )));
        }
        Ok(Self {
            support: vec![0.0, 1.0],
            probs: vec![1.0 - q, q],
        })
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.support.is_empty() {
            out.push("support is empty".to_string());
            return out;
        }
        if self.support.len() != self.probs.len() {
            out.push(format!(
                "support has {} values but probs has {}",
                self.support.len(),
                self.probs.len()
            ));
            return out;
        }
        if self.support.iter().any(|y| !y.is_finite()) {
            out.push("support contains a non-finite value".to_string());
        }
        if self.support.windows(2).any(|w| w[0] >= w[1]) {
            out.push("support values not strictly increasing".to_string());
        }
        if self.probs.iter().any(|p| !(*p >= 0.0)) {
            out.push("negative or NaN probability".to_string());
        }
        let (ok, sum) = sums_to_one(self.probs.iter().copied());
        if !ok {
            out.push(format!("not normalized (sum = {sum})"));
        }
        out
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Mass placed exactly on `y` (0 if `y` is not a support point).
    pub fn prob_of(&self, y: f64) -> f64 {
        self.support
            .iter()
            .position(|&s| s == y)
            .map_or(0.0, |i| self.probs[i])
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(y, p)| y * p)
            .sum()
    }

    /// `P(Y <= y)`.
    pub fn cdf_at(&self, y: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .take_while(|(s, _)| **s <= y)
            .map(|(_, p)| p)
            .sum()
    }

    /// Left-continuous generalized inverse: the smallest support value whose
    /// cumulative mass reaches `alpha`.
    pub fn quantile(&self, alpha: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&alpha));
        let mut cum = 0.0;
        for (y, p) in self.support.iter().zip(&self.probs) {
            cum += p;
            if cum >= alpha - 1e-12 {
                return *y;
            }
        }
        *self.support.last().expect("non-empty support")
    }

    /// Probability of the event `{y : in_event(y)}`.
    pub fn event_prob(&self, in_event: impl Fn(f64) -> bool) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|(y, _)| in_event(**y))
            .map(|(_, p)| p)
            .sum()
    }

    /// Weighted mixture of distributions. Weights must be nonnegative and sum
    /// to one; supports are merged.
    pub fn mixture(parts: &[(f64, &DiscreteDistribution)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidDistribution("empty mixture".into()));
        }
        if parts.iter().any(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::InvalidDistribution("negative mixture weight".into()));
        }
        let (ok, sum) = sums_to_one(parts.iter().map(|(w, _)| *w));
        if !ok {
            return Err(Error::InvalidDistribution(format!(
                "mixture weights not normalized (sum = {sum})"
            )));
        }
        let mut mass: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
        for (w, d) in parts {
            if *w == 0.0 {
                continue;
            }
            for (y, p) in d.support.iter().zip(&d.probs) {
                // Key by the total order on finite floats so equal support
                // points merge exactly.
                let key = order_key(*y);
                let entry = mass.entry(key).or_insert((*y, 0.0));
                entry.1 += w * p;
            }
        }
        let (support, probs): (Vec<f64>, Vec<f64>) = mass.into_values().unzip();
        Self::new(support, probs)
    }
}

/// Monotone integer key for finite floats (total-order trick).
fn order_key(y: f64) -> u64 {
    let bits = y.to_bits();
    if bits >> 63 == 0 {
        bits ^ (1 << 63)
    } else {
        !bits
    }
}

// ---------------------------------------------------------------------------
// LabelSet
// ---------------------------------------------------------------------------

/// An ordered set of distinct nominal labels. Order is the input order and
/// fixes matrix indexing everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<String>,
}

impl LabelSet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        let s = Self::from_raw(labels);
        let v = s.violations();
        if v.is_empty() {
            Ok(s)
        } else {
            Err(Error::InvalidLabels(v.join("; ")))
        }
    }

    pub fn from_raw(labels: Vec<String>) -> Self {
        Self { labels }
    }

    pub fn from_strs(labels: &[&str]) -> Result<Self> {
        Self::new(labels.iter().map(|s| s.to_string()).collect())
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.labels.is_empty() {
            out.push("label set is empty".to_string());
        }
        for (i, a) in self.labels.iter().enumerate() {
            if self.labels[..i].contains(a) {
                out.push(format!("duplicate label '{a}'"));
            }
        }
        out
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }
}

// ---------------------------------------------------------------------------
// JointWX
// ---------------------------------------------------------------------------

/// The joint distribution `P(w, x)`: rows index `w` labels, columns index `x`
/// labels. Entries are nonnegative and sum to one; every row and column
/// carries positive mass (both marginal categories are assumed realizable).
///
/// When built from an integer contingency table the counts are retained, so
/// conditional probabilities are computed as exact integer ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct JointWX {
    table: Vec<Vec<f64>>,
    counts: Option<Vec<Vec<u64>>>,
}

impl JointWX {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let j = Self::from_raw(table);
        let v = j.violations();
        if v.is_empty() {
            Ok(j)
        } else {
            Err(Error::InvalidJoint(v.join("; ")))
        }
    }

    pub fn from_raw(table: Vec<Vec<f64>>) -> Self {
        Self {
            table,
            counts: None,
        }
    }

    /// Normalize a contingency table of counts into a joint.
    pub fn from_counts(counts: &[Vec<u64>]) -> Result<Self> {
        if counts.is_empty() || counts[0].is_empty() {
            return Err(Error::InvalidCounts);
        }
        let nx = counts[0].len();
        if counts.iter().any(|row| row.len() != nx) {
            return Err(Error::InvalidJoint("ragged counts matrix".into()));
        }
        let total: u64 = counts.iter().flatten().sum();
        if total == 0 {
            return Err(Error::InvalidCounts);
        }
        for (i, row) in counts.iter().enumerate() {
            if row.iter().sum::<u64>() == 0 {
                return Err(Error::DegenerateMargin {
                    axis: "row",
                    index: i,
                });
            }
        }
        for j in 0..nx {
            if counts.iter().map(|row| row[j]).sum::<u64>() == 0 {
                return Err(Error::DegenerateMargin {
                    axis: "column",
                    index: j,
                });
            }
        }
        let table = counts
            .iter()
            .map(|row| row.iter().map(|&c| c as f64 / total as f64).collect())
            .collect();
        Ok(Self {
            table,
            counts: Some(counts.to_vec()),
        })
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.table.is_empty() || self.table[0].is_empty() {
            out.push("joint table is empty".to_string());
            return out;
        }
        let nx = self.table[0].len();
        if self.table.iter().any(|row| row.len() != nx) {
            out.push("ragged joint table".to_string());
            return out;
        }
        if self.table.iter().flatten().any(|p| !(*p >= 0.0)) {
            out.push("negative or NaN entry".to_string());
        }
        let (ok, sum) = sums_to_one(self.table.iter().flatten().copied());
        if !ok {
            out.push(format!("entries not normalized (sum = {sum})"));
        }
        for (i, row) in self.table.iter().enumerate() {
            if row.iter().sum::<f64>() <= 0.0 {
                out.push(format!("row {i} has zero mass"));
            }
        }
        for j in 0..nx {
            if self.table.iter().map(|row| row[j]).sum::<f64>() <= 0.0 {
                out.push(format!("column {j} has zero mass"));
            }
        }
        out
    }

    pub fn n_w(&self) -> usize {
        self.table.len()
    }

    pub fn n_x(&self) -> usize {
        self.table.first().map_or(0, |r| r.len())
    }

    pub fn entry(&self, w: usize, x: usize) -> f64 {
        self.table[w][x]
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    /// Original counts, when this joint came from a contingency table.
    pub fn counts(&self) -> Option<&Vec<Vec<u64>>> {
        self.counts.as_ref()
    }

    /// `P(w = ω)` for each row.
    pub fn w_marginals(&self) -> Vec<f64> {
        match &self.counts {
            Some(c) => {
                let total: u64 = c.iter().flatten().sum();
                c.iter()
                    .map(|row| row.iter().sum::<u64>() as f64 / total as f64)
                    .collect()
            }
            None => self.table.iter().map(|row| row.iter().sum()).collect(),
        }
    }

    /// `P(x = ξ)` for each column.
    pub fn x_marginals(&self) -> Vec<f64> {
        match &self.counts {
            Some(c) => {
                let total: u64 = c.iter().flatten().sum();
                (0..self.n_x())
                    .map(|j| c.iter().map(|row| row[j]).sum::<u64>() as f64 / total as f64)
                    .collect()
            }
            None => (0..self.n_x())
                .map(|j| self.table.iter().map(|row| row[j]).sum())
                .collect(),
        }
    }

    /// Conditional table `P(x = ξ | w = ω)`; each row sums to one.
    pub fn x_given_w(&self) -> Vec<Vec<f64>> {
        match &self.counts {
            Some(c) => c
                .iter()
                .map(|row| {
                    let rt = row.iter().sum::<u64>() as f64;
                    row.iter().map(|&v| v as f64 / rt).collect()
                })
                .collect(),
            None => self
                .table
                .iter()
                .map(|row| {
                    let rt: f64 = row.iter().sum();
                    row.iter().map(|v| v / rt).collect()
                })
                .collect(),
        }
    }

    /// Conditional table `P(w = ω | x = ξ)`, same `|W| x |X|` layout; each
    /// column sums to one.
    pub fn w_given_x(&self) -> Vec<Vec<f64>> {
        let nx = self.n_x();
        match &self.counts {
            Some(c) => {
                let col_totals: Vec<f64> = (0..nx)
                    .map(|j| c.iter().map(|row| row[j]).sum::<u64>() as f64)
                    .collect();
                c.iter()
                    .map(|row| (0..nx).map(|j| row[j] as f64 / col_totals[j]).collect())
                    .collect()
            }
            None => {
                let col_totals: Vec<f64> = (0..nx)
                    .map(|j| self.table.iter().map(|row| row[j]).sum())
                    .collect();
                self.table
                    .iter()
                    .map(|row| (0..nx).map(|j| row[j] / col_totals[j]).collect())
                    .collect()
            }
        }
    }

    /// Mass off the diagonal — the fraction classified differently by the two
    /// schemes. Only defined for square tables (aligned label order).
    pub fn discordant_mass(&self) -> Option<f64> {
        if self.n_w() != self.n_x() {
            return None;
        }
        Some(
            self.table
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, p)| p)
                        .sum::<f64>()
                })
                .sum(),
        )
    }

    /// Detect whether one labeling is a deterministic coarsening of the
    /// other. `x` aggregates `w` when each `w` row puts (within `tol`) all of
    /// its conditional mass on a single `x`; `w` aggregates `x` is the
    /// column-wise analogue. A bijection satisfies both and is reported as
    /// `XAggregatesW`.
    pub fn detect_aggregation(&self, tol: f64) -> AggregationStructure {
        let row_map = Self::deterministic_map(&self.x_given_w(), tol);
        if let Some(map) = row_map {
            return AggregationStructure::XAggregatesW { map };
        }
        let wgx = self.w_given_x();
        let transposed: Vec<Vec<f64>> = (0..self.n_x())
            .map(|j| (0..self.n_w()).map(|i| wgx[i][j]).collect())
            .collect();
        if let Some(map) = Self::deterministic_map(&transposed, tol) {
            return AggregationStructure::WAggregatesX { map };
        }
        AggregationStructure::Neither
    }

    fn deterministic_map(cond_rows: &[Vec<f64>], tol: f64) -> Option<Vec<usize>> {
        cond_rows
            .iter()
            .map(|row| row.iter().position(|&p| p >= 1.0 - tol))
            .collect()
    }
}

/// Which labeling (if either) deterministically coarsens the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AggregationStructure {
    /// Every `w` maps to a single `x`: `map[ω] = ξ`.
    XAggregatesW {
        map: Vec<usize>,
    },
    /// Every `x` maps to a single `w`: `map[ξ] = ω`.
    WAggregatesX {
        map: Vec<usize>,
    },
    Neither,
}

// ---------------------------------------------------------------------------
// WXKnowledge and Scenario
// ---------------------------------------------------------------------------

/// What is known about `P(w, x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum WXKnowledge {
    /// The joint itself.
    Full(JointWX),
    /// Only the two marginal distributions.
    MarginalsOnly { pw: Vec<f64>, px: Vec<f64> },
    /// A finite set of joints, one of which is the truth.
    CandidateSet(Vec<JointWX>),
}

/// A complete problem instance: the two label sets, the study-reported
/// conditional outcome distributions `P(y|w)`, knowledge of `P(w, x)`, and
/// optional bounded-variation caps keyed by labels shared between the two
/// schemes.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub w_labels: LabelSet,
    pub x_labels: LabelSet,
    /// One distribution per `w` label, all on a common support.
    pub y_given_w: Vec<DiscreteDistribution>,
    pub wx: WXKnowledge,
    pub bv_deltas: Option<BTreeMap<String, f64>>,
}

impl Scenario {
    /// The common outcome support (from the first `P(y|w)` entry).
    pub fn y_support(&self) -> Option<&[f64]> {
        self.y_given_w.first().map(|d| d.support())
    }

    /// Whether the outcome is the binary {0, 1}.
    pub fn is_binary_outcome(&self) -> bool {
        self.y_support() == Some(&[0.0, 1.0])
    }

    /// `P(y = 1 | w = ω)` for a binary outcome.
    pub fn prob_one_given_w(&self, w: usize) -> f64 {
        self.y_given_w[w].prob_of(1.0)
    }

    pub fn full_joint(&self) -> Option<&JointWX> {
        match &self.wx {
            WXKnowledge::Full(j) => Some(j),
            _ => None,
        }
    }

    pub fn require_full_joint(&self) -> Result<&JointWX> {
        self.full_joint().ok_or(Error::NeedsFullJoint)
    }

    pub fn require_binary_outcome(&self) -> Result<()> {
        if self.is_binary_outcome() {
            Ok(())
        } else {
            Err(Error::WrongShape {
                expected: "binary outcome support {0, 1}",
            })
        }
    }

    /// Check every invariant and cross-field consistency rule, returning one
    /// message per violation (empty means valid).
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for v in self.w_labels.violations() {
            out.push(format!("w_labels: {v}"));
        }
        for v in self.x_labels.violations() {
            out.push(format!("x_labels: {v}"));
        }
        let nw = self.w_labels.len();
        let nx = self.x_labels.len();

        if self.y_given_w.len() != nw {
            out.push(format!(
                "y_given_w has {} rows, expected one per w label ({nw})",
                self.y_given_w.len()
            ));
        }
        let mut common_support: Option<&[f64]> = None;
        for (i, d) in self.y_given_w.iter().enumerate() {
            let name = self
                .w_labels
                .labels()
                .get(i)
                .map(|s| s.as_str())
                .unwrap_or("?");
            for v in d.violations() {
                out.push(format!("y_given_w[{name}] {v}"));
            }
            match common_support {
                None => common_support = Some(d.support()),
                Some(s) => {
                    if s != d.support() {
                        out.push(format!(
                            "y_given_w[{name}] support differs from the first row"
                        ));
                    }
                }
            }
        }

        match &self.wx {
            WXKnowledge::Full(j) => {
                for v in j.violations() {
                    out.push(format!("wx.joint: {v}"));
                }
                if j.n_w() != nw || j.n_x() != nx {
                    out.push(format!(
                        "wx.joint is {}x{}, expected {nw}x{nx}",
                        j.n_w(),
                        j.n_x()
                    ));
                }
            }
            WXKnowledge::MarginalsOnly { pw, px } => {
                for (name, v, n) in [("pw", pw, nw), ("px", px, nx)] {
                    if v.len() != n {
                        out.push(format!(
                            "wx.marginals.{name} has {} entries, expected {n}",
                            v.len()
                        ));
                    }
                    if v.iter().any(|p| !(*p > 0.0)) {
                        out.push(format!(
                            "wx.marginals.{name} has a nonpositive or NaN entry"
                        ));
                    }
                    let (ok, sum) = sums_to_one(v.iter().copied());
                    if !ok {
                        out.push(format!("wx.marginals.{name} not normalized (sum = {sum})"));
                    }
                }
            }
            WXKnowledge::CandidateSet(cands) => {
                if cands.is_empty() {
                    out.push("wx.candidates is empty".to_string());
                }
                for (k, j) in cands.iter().enumerate() {
                    for v in j.violations() {
                        out.push(format!("wx.candidates[{k}]: {v}"));
                    }
                    if j.n_w() != nw || j.n_x() != nx {
                        out.push(format!(
                            "wx.candidates[{k}] is {}x{}, expected {nw}x{nx}",
                            j.n_w(),
                            j.n_x()
                        ));
                    }
                }
            }
        }

        if let Some(bv) = &self.bv_deltas {
            for (k, d) in bv {
                if !self.w_labels.contains(k) || !self.x_labels.contains(k) {
                    out.push(format!("bv key '{k}' not in label sets"));
                }
                if !(*d >= 0.0) {
                    out.push(format!("bv delta for '{k}' must be nonnegative, got {d}"));
                }
            }
        }

        out
    }
}

/// Free-function form of [`Scenario::validate`].
pub fn validate_scenario(s: &Scenario) -> Vec<String> {
    s.validate()
}
