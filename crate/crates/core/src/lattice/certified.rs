use serde::{Deserialize, Serialize};

/// A windowed value together with a rigorous bound on what the window
/// leaves out. The enclosure is `[windowed − tail_hi, windowed + tail_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedValue {
    pub windowed: f64,
    pub tail_hi: f64,
}

impl CertifiedValue {
    pub fn new(windowed: f64, tail_hi: f64) -> Self {
        debug_assert!(tail_hi >= 0.0, "negative tail bound {tail_hi}");
        CertifiedValue { windowed, tail_hi }
    }

    /// A symmetric enclosure of `[lo, hi]`, padded so that rounding of the
    /// midpoint cannot cut off either end.
    pub fn from_interval(lo: f64, hi: f64) -> Self {
        let hi = hi.max(lo);
        let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs());
        CertifiedValue::new(lo + (hi - lo) / 2.0, (hi - lo) / 2.0 + pad)
    }

    pub fn exact(value: f64) -> Self {
        CertifiedValue::new(value, 0.0)
    }

    pub fn lo(&self) -> f64 {
        self.windowed - self.tail_hi
    }

    pub fn hi(&self) -> f64 {
        self.windowed + self.tail_hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo() <= x && x <= self.hi()
    }

    pub fn width(&self) -> f64 {
        2.0 * self.tail_hi
    }

    /// Adds `extra ≥ 0` to the tail bound, e.g. for rounding error.
    pub fn widen(self, extra: f64) -> Self {
        CertifiedValue::new(self.windowed, self.tail_hi + extra.max(0.0))
    }

    /// Enclosure of a quasi-norm given its windowed `p`-power sum and a bound
    /// on the omitted `p`-power mass; `windowed` is the windowed norm and
    /// `windowed + tail_hi` the upper end.
    pub fn from_power_sum(windowed_power: f64, tail_power: f64, p: f64) -> Self {
        let lo = windowed_power.powf(1.0 / p);
        let hi = (windowed_power + tail_power).powf(1.0 / p);
        CertifiedValue::new(lo, (hi - lo).max(0.0))
    }
}
