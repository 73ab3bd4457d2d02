//! Signed values stored as `(sign, ln|x|)`.
//!
//! The eigenfunction grows like `e^r` and the iteration constants grow doubly
//! exponentially, so both live here until a caller explicitly asks for a
//! linear-scale number.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::ops::{Div, Mul};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(x: f64) -> Self {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    fn as_f64(self) -> f64 {
        match self {
            Sign::Negative => -1.0,
            Sign::Zero => 0.0,
            Sign::Positive => 1.0,
        }
    }

    fn product(self, other: Sign) -> Sign {
        Sign::of(self.as_f64() * other.as_f64())
    }
}

/// `sign * exp(log_magnitude)`; `log_magnitude` is meaningless when the sign is zero.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogValue {
    pub log_magnitude: f64,
    pub sign: Sign,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_magnitude: f64::NEG_INFINITY,
        sign: Sign::Zero,
    };

    pub const ONE: LogValue = LogValue {
        log_magnitude: 0.0,
        sign: Sign::Positive,
    };

    /// A positive value given by its natural logarithm.
    pub fn from_ln(log_magnitude: f64) -> Self {
        LogValue {
            log_magnitude,
            sign: Sign::Positive,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        match Sign::of(x) {
            Sign::Zero => Self::ZERO,
            sign => LogValue {
                log_magnitude: x.abs().ln(),
                sign,
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    pub fn is_positive(&self) -> bool {
        self.sign == Sign::Positive
    }

    /// Natural log of a positive value. Returns NaN for zero or negative values.
    pub fn ln(&self) -> f64 {
        match self.sign {
            Sign::Positive => self.log_magnitude,
            _ => f64::NAN,
        }
    }

    /// Linear-scale value; may overflow to ±inf.
    pub fn to_f64(&self) -> f64 {
        match self.sign {
            Sign::Zero => 0.0,
            s => s.as_f64() * self.log_magnitude.exp(),
        }
    }

    /// `self^k` for a positive base.
    pub fn powf(&self, k: f64) -> Self {
        match self.sign {
            Sign::Zero if k > 0.0 => Self::ZERO,
            Sign::Zero => LogValue::from_ln(f64::INFINITY),
            Sign::Positive => LogValue::from_ln(self.log_magnitude * k),
            Sign::Negative => LogValue {
                log_magnitude: f64::NAN,
                sign: Sign::Negative,
            },
        }
    }

    /// Multiply by `e^s`.
    pub fn scale_exp(&self, s: f64) -> Self {
        match self.sign {
            Sign::Zero => Self::ZERO,
            sign => LogValue {
                log_magnitude: self.log_magnitude + s,
                sign,
            },
        }
    }

    /// Sum in log space (log-sum-exp with sign handling).
    pub fn add(&self, other: &LogValue) -> Self {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let (big, small) = if self.log_magnitude >= other.log_magnitude {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (small.log_magnitude - big.log_magnitude).exp();
        if big.sign == small.sign {
            LogValue {
                log_magnitude: big.log_magnitude + ratio.ln_1p(),
                sign: big.sign,
            }
        } else if ratio == 1.0 {
            Self::ZERO
        } else {
            LogValue {
                log_magnitude: big.log_magnitude + (-ratio).ln_1p(),
                sign: big.sign,
            }
        }
    }

    /// Relative difference `|a - b| / max(|a|, |b|)` computed without leaving log space.
    pub fn relative_difference(&self, other: &LogValue) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        let neg_other = LogValue {
            log_magnitude: other.log_magnitude,
            sign: other.sign.product(Sign::Negative),
        };
        let diff = self.add(&neg_other);
        if diff.is_zero() {
            return 0.0;
        }
        let scale = if self.is_zero() {
            other.log_magnitude
        } else if other.is_zero() {
            self.log_magnitude
        } else {
            self.log_magnitude.max(other.log_magnitude)
        };
        (diff.log_magnitude - scale).exp()
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for LogValue {
    type Output = LogValue;

    fn mul(self, rhs: LogValue) -> LogValue {
        match self.sign.product(rhs.sign) {
            Sign::Zero => LogValue::ZERO,
            sign => LogValue {
                log_magnitude: self.log_magnitude + rhs.log_magnitude,
                sign,
            },
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for LogValue {
    type Output = LogValue;

    fn div(self, rhs: LogValue) -> LogValue {
        if rhs.is_zero() {
            return LogValue {
                log_magnitude: f64::INFINITY,
                sign: self.sign,
            };
        }
        match self.sign.product(rhs.sign) {
            Sign::Zero => LogValue::ZERO,
            sign => LogValue {
                log_magnitude: self.log_magnitude - rhs.log_magnitude,
                sign,
            },
        }
    }
}

impl PartialEq for LogValue {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let a = self.sign.as_f64();
        let b = other.sign.as_f64();
        if a != b {
            return a.partial_cmp(&b);
        }
        match self.sign {
            Sign::Zero => Some(Ordering::Equal),
            Sign::Positive => self.log_magnitude.partial_cmp(&other.log_magnitude),
            Sign::Negative => other.log_magnitude.partial_cmp(&self.log_magnitude),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_ignores_magnitude() {
        let z = LogValue::from_f64(0.0);
        assert!(z.is_zero());
        assert_eq!(z.to_f64(), 0.0);
        assert_eq!(z * LogValue::from_f64(3.0), LogValue::ZERO);
    }

    #[test]
    fn huge_values_do_not_overflow() {
        let big = LogValue::from_ln(1000.0);
        let prod = big * big;
        assert_eq!(prod.ln(), 2000.0);
        assert!(prod.to_f64().is_infinite());
        let sum = big.add(&big);
        assert!((sum.ln() - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn cancellation_gives_zero() {
        let a = LogValue::from_f64(2.5);
        let b = LogValue::from_f64(-2.5);
        assert!(a.add(&b).is_zero());
    }

    proptest! {
        #[test]
        fn arithmetic_matches_linear(x in -1e3f64..1e3, y in -1e3f64..1e3) {
            let (a, b) = (LogValue::from_f64(x), LogValue::from_f64(y));
            let prod = (a * b).to_f64();
            prop_assert!((prod - x * y).abs() <= 1e-12 * (x * y).abs().max(1e-300));
            let sum = a.add(&b).to_f64();
            prop_assert!((sum - (x + y)).abs() <= 1e-12 * (x.abs() + y.abs()));
            prop_assert_eq!(a < b, x < y);
        }
    }
}
