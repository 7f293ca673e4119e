//! Real-valued threshold comparisons on integer counts.
//!
//! Bounds such as `(1 - 2ε)d` are computed in floating point, so `ε = 1/6`
//! can land a hair above or below the integer it represents. Comparisons snap
//! by a fixed slack far below one count.

const SLACK: f64 = 1e-9;

/// `count > bound`
#[inline]
pub fn exceeds(count: usize, bound: f64) -> bool {
    count as f64 > bound + SLACK
}

/// `count >= bound`
#[inline]
pub fn at_least(count: usize, bound: f64) -> bool {
    count as f64 >= bound - SLACK
}

/// `count < bound`
#[inline]
pub fn below(count: usize, bound: f64) -> bool {
    !at_least(count, bound)
}

/// The two bounds every extraction and matching step uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// `(1 - 2ε)d`: a value must occur more often than this to be taken as a
    /// frequently occurring singleton.
    pub singleton: f64,
    /// `2εd`: minimum overlap for two supports to share an origin.
    pub overlap: f64,
}

impl Thresholds {
    pub fn new(epsilon: f64, d: usize) -> Self {
        let d = d as f64;
        Self {
            singleton: (1.0 - 2.0 * epsilon) * d,
            overlap: 2.0 * epsilon * d,
        }
    }
}
