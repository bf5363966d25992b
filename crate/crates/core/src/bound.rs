//! Identification intervals and their provenance.

use crate::error::{Error, Result};

/// How an interval was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Lp,
    GridUnion,
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Lp => "lp",
            Method::GridUnion => "grid-union",
            Method::Oracle => "oracle",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A closed interval `[lo, hi]` of feasible values for a target quantity.
///
/// `sharp` records whether the endpoints are exactly attainable under the
/// maintained knowledge, or only a conservative approximation (grid unions,
/// oracle enumeration).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInterval {
    pub lo: f64,
    pub hi: f64,
    pub sharp: bool,
    pub method: Method,
}

/// Slack allowed when snapping float noise at interval endpoints.
const ENDPOINT_SLOP: f64 = 1e-12;

impl BoundInterval {
    /// General interval; `lo` may exceed `hi` only by float noise, which is
    /// snapped.
    pub fn new(lo: f64, hi: f64, sharp: bool, method: Method) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::InvalidArgument("interval endpoint is NaN".into()));
        }
        if lo > hi + ENDPOINT_SLOP {
            return Err(Error::InvalidArgument(format!(
                "interval endpoints out of order: lo = {lo}, hi = {hi}"
            )));
        }
        let hi = hi.max(lo);
        Ok(Self {
            lo,
            hi,
            sharp,
            method,
        })
    }

    /// Interval for a probability target: endpoints are clamped into [0, 1]
    /// (float noise only; a genuine excursion is an error).
    pub fn probability(lo: f64, hi: f64, sharp: bool, method: Method) -> Result<Self> {
        let iv = Self::new(lo, hi, sharp, method)?;
        if iv.lo < -1e-9 || iv.hi > 1.0 + 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "probability interval escapes the unit interval: [{}, {}]",
                iv.lo, iv.hi
            )));
        }
        Ok(Self {
            lo: iv.lo.clamp(0.0, 1.0),
            hi: iv.hi.clamp(0.0, 1.0),
            ..iv
        })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lo - tol && v <= self.hi + tol
    }

    /// Whether `self` lies inside `other`, up to `tol` at each endpoint.
    pub fn is_subset_of(&self, other: &BoundInterval, tol: f64) -> bool {
        self.lo >= other.lo - tol && self.hi <= other.hi + tol
    }

    /// Smallest interval covering both operands. Provenance and sharpness
    /// are taken from `self`.
    pub fn hull(&self, other: &BoundInterval) -> BoundInterval {
        BoundInterval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
            sharp: self.sharp && other.sharp,
            method: self.method,
        }
    }
}
