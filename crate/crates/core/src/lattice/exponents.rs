use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// `d_p = ⌊n(1/p − 1)⌋`, the number of moments a `p`-atom must cancel.
///
/// Negative arguments (p > 1) clamp to 0.
pub fn moment_degree(n: usize, p: f64) -> u32 {
    let x = n as f64 * (1.0 / p - 1.0);
    if x <= 0.0 {
        0
    } else {
        x.floor() as u32
    }
}

/// `θ = (1/p − 1/p₀)/r`, required to lie in `(0, 1)`.
pub fn molecule_theta(p: f64, p0: f64, r: f64) -> Result<f64> {
    let gap = 1.0 / p - 1.0 / p0;
    let theta = gap / r;
    if !(r > 0.0 && theta > 0.0 && theta < 1.0) {
        return Err(domain(format!(
            "θ = (1/p − 1/p₀)/r = {theta} must lie in (0, 1); need r > 1/p − 1/p₀ = {gap}"
        )));
    }
    Ok(theta)
}

/// `L = ⌊n(r + 1/q₀) + α⌋ + 1`, the moment order that makes `I_α` send atoms
/// to molecules.
pub fn potential_moment_order(n: usize, r: f64, q0: f64, alpha: f64) -> u32 {
    (n as f64 * (r + 1.0 / q0) + alpha).floor() as u32 + 1
}

/// Every exponent appearing in the atom / molecule / potential machinery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentConfig {
    pub n: usize,
    #[serde(with = "exponent_serde")]
    pub p: f64,
    #[serde(with = "exponent_serde")]
    pub p0: f64,
    #[serde(with = "exponent_serde")]
    pub q: f64,
    #[serde(with = "exponent_serde")]
    pub q0: f64,
    pub r: f64,
    pub alpha: f64,
    #[serde(rename = "L")]
    pub moment_order: u32,
}

impl ExponentConfig {
    /// Completes the exponent set for `I_α` from `(n, p, q₀, r, α)`:
    /// `1/q = 1/p − α/n`, `1/p₀ = 1/q₀ + α/n`, `L = ⌊n(r + 1/q₀) + α⌋ + 1`.
    pub fn for_potential(n: usize, p: f64, q0: f64, r: f64, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("dimension must be at least 1"));
        }
        let nf = n as f64;
        let inv_q = 1.0 / p - alpha / nf;
        if inv_q <= 0.0 {
            return Err(domain(format!("1/q = 1/p − α/n = {inv_q} must be positive (p < n/α)")));
        }
        let inv_p0 = 1.0 / q0 + alpha / nf;
        Ok(ExponentConfig {
            n,
            p,
            p0: 1.0 / inv_p0,
            q: 1.0 / inv_q,
            q0,
            r,
            alpha,
            moment_order: potential_moment_order(n, r, q0, alpha),
        })
    }

    pub fn d_p(&self) -> u32 {
        moment_degree(self.n, self.p)
    }

    pub fn d_q(&self) -> u32 {
        moment_degree(self.n, self.q)
    }

    /// `θ = (1/p − 1/p₀)/r`. Under `1/q = 1/p − α/n` and
    /// `1/p₀ = 1/q₀ + α/n` this equals `(1/q − 1/q₀)/r`.
    pub fn theta(&self) -> f64 {
        (1.0 / self.p - 1.0 / self.p0) / self.r
    }
}

/// (De)serializes an exponent in `(0, ∞]`, writing `∞` as the string `"inf"`.
pub mod exponent_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => Ok(f64::INFINITY),
            Repr::Str(s) => Err(de::Error::custom(format!("not an exponent: {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn d_p_examples() {
        assert_eq!(moment_degree(2, 1.0), 0);
        assert_eq!(moment_degree(1, 0.5), 1);
        assert_eq!(moment_degree(3, 0.5), 3);
        assert_eq!(moment_degree(2, 0.8), 0);
        assert_eq!(moment_degree(2, 0.4), 3);
        assert_eq!(moment_degree(4, 2.0), 0);
    }

    #[test]
    fn theta_examples() {
        assert_eq!(molecule_theta(1.0, 2.0, 1.0).unwrap(), 0.5);
        assert!(molecule_theta(1.0, 2.0, 0.5).is_err());
        assert!(molecule_theta(1.0, 2.0, 0.4).is_err());
    }

    #[test]
    fn potential_exponents() {
        let e = ExponentConfig::for_potential(2, 0.8, 4.0, 0.875, 0.5).unwrap();
        assert!((e.q - 1.0).abs() < 1e-15);
        assert!((e.p0 - 2.0).abs() < 1e-15);
        assert_eq!(e.moment_order, 3);
        assert!((e.theta() - (1.0 / e.q - 1.0 / e.q0) / e.r).abs() < 1e-15);
        assert!(ExponentConfig::for_potential(2, 4.0, 4.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn infinite_exponent_serializes_as_string() {
        let mut e = ExponentConfig::for_potential(2, 1.0, 4.0, 1.0, 0.5).unwrap();
        e.p0 = f64::INFINITY;
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains(r#""p0":"inf""#));
        let back: ExponentConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }

    fn brute_force_floor(x: f64) -> u32 {
        let mut k = 0u32;
        while ((k + 1) as f64) <= x {
            k += 1;
        }
        k
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn d_p_matches_integer_search(n in 1usize..=6, p in 0.05f64..=1.0) {
            let x = n as f64 * (1.0 / p - 1.0);
            prop_assert_eq!(moment_degree(n, p), brute_force_floor(x));
        }

        #[test]
        fn d_p_vanishes_exactly_above_n_over_n_plus_one(n in 2usize..=8, t in 0.0001f64..1.0) {
            // d_p = 0 ⇔ n(1/p − 1) < 1 ⇔ p > n/(n+1).
            let lo = n as f64 / (n as f64 + 1.0);
            let p = lo + t * (1.0 - lo);
            prop_assert_eq!(moment_degree(n, p), 0);
            let below = (n as f64 - 1.0) / n as f64 + t * (lo - (n as f64 - 1.0) / n as f64);
            prop_assert_eq!(moment_degree(n, below), 1);
        }

        #[test]
        fn theta_in_unit_interval(p in 0.1f64..=1.0, p0 in 1.01f64..50.0, slack in 0.001f64..5.0) {
            let r = 1.0 / p - 1.0 / p0 + slack;
            let t = molecule_theta(p, p0, r).unwrap();
            prop_assert!(t > 0.0 && t < 1.0);
        }
    }
}
