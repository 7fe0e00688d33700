//! The Busy Beaver growth oracle.
//!
//! The growth function is non-computable; only a prefix of its values is
//! published. Everything downstream therefore consults an oracle object
//! holding the known prefix plus lower bounds for the first unknown
//! argument, optionally extended by user-supplied values. Queries outside
//! the decidable range come back as `Unknown` and propagate.

use crate::three::ThreeVal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Known prefix: (0,0), (1,1), (2,4), (3,6), (4,13); first unknown argument
/// has lower bound 4098.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthOracle {
    known: Vec<(u64, u64)>,
    lower_bounds: Vec<(u64, u64)>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SigmaValue {
    Value(u64),
    /// Not in the decidable range; the value is at least this bound.
    Unknown { lower_bound: u64 },
}

impl SigmaValue {
    pub fn value(self) -> Option<u64> {
        match self {
            SigmaValue::Value(v) => Some(v),
            SigmaValue::Unknown { .. } => None,
        }
    }

    pub fn lower_bound(self) -> u64 {
        match self {
            SigmaValue::Value(v) => v,
            SigmaValue::Unknown { lower_bound } => lower_bound,
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("extension values must be contiguous from argument {expected}, got {got}")]
    NonContiguous { expected: u64, got: u64 },
    #[error("extension value {value} at argument {arg} is not strictly increasing")]
    NotIncreasing { arg: u64, value: u64 },
    #[error("extension value {value} at argument {arg} is below the recorded lower bound {bound}")]
    BelowLowerBound { arg: u64, value: u64, bound: u64 },
    #[error("invalid oracle data: {0}")]
    Invalid(String),
}

impl Default for GrowthOracle {
    fn default() -> Self {
        GrowthOracle {
            known: vec![(0, 0), (1, 1), (2, 4), (3, 6), (4, 13)],
            lower_bounds: vec![(5, 4098)],
        }
    }
}

impl GrowthOracle {
    /// Extends the default table with further values `(n, sigma(n))`,
    /// which must continue the prefix contiguously, strictly increase, and
    /// respect recorded lower bounds.
    pub fn with_extension(extension: &[(u64, u64)]) -> Result<GrowthOracle, OracleError> {
        let mut o = GrowthOracle::default();
        let mut ext: Vec<(u64, u64)> = extension.to_vec();
        ext.sort();
        for &(n, v) in &ext {
            let expected = o.known.last().unwrap().0 + 1;
            if n != expected {
                return Err(OracleError::NonContiguous { expected, got: n });
            }
            let last = o.known.last().unwrap().1;
            if v <= last {
                return Err(OracleError::NotIncreasing { arg: n, value: v });
            }
            if let Some(&(_, bound)) = o.lower_bounds.iter().find(|&&(a, _)| a == n) {
                if v < bound {
                    return Err(OracleError::BelowLowerBound { arg: n, value: v, bound });
                }
            }
            o.known.push((n, v));
        }
        o.lower_bounds.retain(|&(a, _)| a > o.known.last().unwrap().0);
        if o.lower_bounds.is_empty() {
            let (last_n, last_v) = *o.known.last().unwrap();
            o.lower_bounds.push((last_n + 1, last_v + 1));
        }
        Ok(o)
    }

    pub fn from_json(src: &str) -> Result<GrowthOracle, OracleError> {
        #[derive(Deserialize)]
        struct File {
            #[serde(default)]
            known: Vec<(u64, u64)>,
        }
        let file: File =
            serde_json::from_str(src).map_err(|e| OracleError::Invalid(e.to_string()))?;
        // entries duplicating the default prefix are accepted and ignored
        let default = GrowthOracle::default();
        let ext: Vec<(u64, u64)> = file
            .known
            .into_iter()
            .filter(|&(n, _)| n > default.known.last().unwrap().0)
            .collect();
        GrowthOracle::with_extension(&ext)
    }

    pub fn max_known_arg(&self) -> u64 {
        self.known.last().unwrap().0
    }

    pub fn max_known_value(&self) -> u64 {
        self.known.last().unwrap().1
    }

    /// Largest k for which sigma_inv(k) is decidable: one less than the
    /// lower bound on the first unknown value (4097 by default).
    pub fn max_decidable_inv(&self) -> u64 {
        self.next_lower_bound() - 1
    }

    fn next_lower_bound(&self) -> u64 {
        self.lower_bounds
            .iter()
            .find(|&&(a, _)| a == self.max_known_arg() + 1)
            .map(|&(_, b)| b)
            .unwrap_or(self.max_known_value() + 1)
    }

    pub fn sigma(&self, n: u64) -> SigmaValue {
        if let Some(&(_, v)) = self.known.iter().find(|&&(a, _)| a == n) {
            return SigmaValue::Value(v);
        }
        // monotonicity pushes every later argument above the first unknown's
        // lower bound
        SigmaValue::Unknown {
            lower_bound: self.next_lower_bound() + (n - self.max_known_arg() - 1),
        }
    }

    /// Left inverse: sigma_inv(k) = min { l : sigma(l+1) > k }. `None` when
    /// k exceeds the decidable range.
    pub fn sigma_inv(&self, k: u64) -> Option<u64> {
        for l in 0.. {
            match self.sigma(l + 1) {
                SigmaValue::Value(v) => {
                    if v > k {
                        return Some(l);
                    }
                }
                SigmaValue::Unknown { lower_bound } => {
                    return if lower_bound > k { Some(l) } else { None };
                }
            }
        }
        unreachable!()
    }

    /// Is `v` a value sigma(k) for some k >= min_arg (infinite excluded)?
    pub fn in_image(&self, v: u64, min_arg: u64) -> ThreeVal {
        for &(a, val) in &self.known {
            if val == v {
                return ThreeVal::from_bool(a >= min_arg);
            }
        }
        // beyond the known prefix: decided false while below the next lower
        // bound, unknown from there on
        if v < self.next_lower_bound() {
            // sigma is strictly increasing past 1, so a known-range value not
            // in the table is not a value at all; also handle min_arg cutoffs
            // for small known values
            if v <= self.max_known_value() {
                return ThreeVal::False;
            }
            return ThreeVal::False;
        }
        ThreeVal::Unknown
    }

    /// Smallest image value (argument >= min_arg) that is >= lo, if it can be
    /// named. `UnknownBeyond` means such a value exists (the function is
    /// total and unbounded) but the oracle cannot pin it down.
    pub fn min_image_value_at_least(&self, lo: u64, min_arg: u64) -> MinImage {
        for &(a, val) in &self.known {
            if a >= min_arg && val >= lo {
                return MinImage::Known(val);
            }
        }
        MinImage::UnknownBeyond { lower_bound: self.next_lower_bound().max(lo) }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MinImage {
    Known(u64),
    UnknownBeyond { lower_bound: u64 },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_prefix() {
        let o = GrowthOracle::default();
        assert_eq!(o.sigma(0), SigmaValue::Value(0));
        assert_eq!(o.sigma(1), SigmaValue::Value(1));
        assert_eq!(o.sigma(2), SigmaValue::Value(4));
        assert_eq!(o.sigma(3), SigmaValue::Value(6));
        assert_eq!(o.sigma(4), SigmaValue::Value(13));
        assert_eq!(o.sigma(5), SigmaValue::Unknown { lower_bound: 4098 });
    }

    #[test]
    fn left_inverse_values() {
        let o = GrowthOracle::default();
        assert_eq!(o.sigma_inv(0), Some(0));
        assert_eq!(o.sigma_inv(1), Some(1));
        assert_eq!(o.sigma_inv(2), Some(1));
        assert_eq!(o.sigma_inv(3), Some(1));
        assert_eq!(o.sigma_inv(4), Some(2));
        assert_eq!(o.sigma_inv(5), Some(2));
        assert_eq!(o.sigma_inv(6), Some(3));
        assert_eq!(o.sigma_inv(12), Some(3));
        assert_eq!(o.sigma_inv(13), Some(4));
        assert_eq!(o.sigma_inv(4097), Some(4));
        assert_eq!(o.sigma_inv(4098), None);
    }

    #[test]
    fn image_queries() {
        let o = GrowthOracle::default();
        assert!(o.in_image(4, 2).is_true());
        assert!(o.in_image(4, 3).is_false());
        assert!(o.in_image(5, 0).is_false());
        assert!(o.in_image(13, 2).is_true());
        assert!(o.in_image(4097, 2).is_false());
        assert!(o.in_image(4098, 2).is_unknown());
        assert_eq!(o.min_image_value_at_least(5, 2), MinImage::Known(6));
        assert_eq!(
            o.min_image_value_at_least(14, 2),
            MinImage::UnknownBeyond { lower_bound: 4098 }
        );
    }

    #[test]
    fn extension_must_be_monotone() {
        assert!(GrowthOracle::with_extension(&[(5, 4097)]).is_err());
        assert!(GrowthOracle::with_extension(&[(6, 9000)]).is_err());
        let o = GrowthOracle::with_extension(&[(5, 4098)]).unwrap();
        assert_eq!(o.sigma(5), SigmaValue::Value(4098));
        assert_eq!(o.sigma_inv(4098), Some(5));
        assert!(o.in_image(4098, 2).is_true());
    }
}
