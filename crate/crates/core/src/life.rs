//! Cycle counts that may be infinite.
//!
//! A stress-free surface point never initiates a crack, so lives live on the
//! extended half-line `(0, ∞]`. The reciprocal maps infinity to zero, which is
//! what makes the hazard integrand total.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A life in load cycles, possibly infinite.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Life(f64);

impl Life {
    pub const INFINITE: Life = Life(f64::INFINITY);

    /// Wraps a cycle count. Overflowed values (`+inf`) become [`Life::INFINITE`].
    ///
    /// Panics on NaN or non-positive input.
    pub fn new(cycles: f64) -> Self {
        assert!(cycles > 0.0, "life must be positive, got {cycles}");
        Life(cycles)
    }

    pub fn cycles(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// `1/N`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    pub fn min(self, other: Life) -> Life {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    pub fn total_cmp(&self, other: &Life) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Life {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Life {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Life {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct LifeVisitor;

        impl Visitor<'_> for LifeVisitor {
            type Value = Life;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Life, E> {
                if v > 0.0 {
                    Ok(Life(v))
                } else {
                    Err(E::custom(format!("life must be positive, got {v}")))
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Life, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Life, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Life, E> {
                match v {
                    "inf" | "infinity" | "Infinity" => Ok(Life::INFINITE),
                    _ => v.parse::<f64>().map_err(E::custom).and_then(|x| self.visit_f64(x)),
                }
            }
        }

        deserializer.deserialize_any(LifeVisitor)
    }
}

/// Serializes an `f64` as a JSON number, or as `"inf"` / `"-inf"` / `"nan"`
/// when it is not finite.
pub(crate) mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => other.parse().map_err(serde::de::Error::custom),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_of_infinity_is_zero() {
        assert_eq!(Life::INFINITE.reciprocal(), 0.0);
        assert_eq!(Life::new(4.0).reciprocal(), 0.25);
    }

    #[test]
    fn overflow_becomes_infinite() {
        assert!(Life::new(f64::INFINITY).is_infinite());
    }

    #[test]
    fn json_round_trip() {
        let s = serde_json::to_string(&[Life::new(12.5), Life::INFINITE]).unwrap();
        assert_eq!(s, "[12.5,\"inf\"]");
        let back: Vec<Life> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0], Life::new(12.5));
        assert!(back[1].is_infinite());
    }
}
