//! Exact rational intervals used for enclosures of irrational quantities.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RatInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        RatInterval { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        RatInterval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &RatInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &RatInterval) -> bool {
        !(self.hi < other.lo || other.hi < self.lo)
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    /// Interval sum.
    pub fn add(&self, other: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    /// Multiply by an exact rational scalar (sign-aware).
    pub fn scale(&self, c: &BigRational) -> RatInterval {
        if c.is_negative() {
            RatInterval {
                lo: &self.hi * c,
                hi: &self.lo * c,
            }
        } else {
            RatInterval {
                lo: &self.lo * c,
                hi: &self.hi * c,
            }
        }
    }

    /// Shift by an exact rational.
    pub fn shift(&self, c: &BigRational) -> RatInterval {
        RatInterval {
            lo: &self.lo + c,
            hi: &self.hi + c,
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.midpoint())
    }
}

pub fn big_to_rational(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

pub fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // Scale through a 2^64 fixed-point window so huge numerators stay finite.
    let num = r.numer();
    let den = r.denom();
    let fnum = bigint_to_f64(num);
    let fden = bigint_to_f64(den);
    if fden.is_finite() && fnum.is_finite() && fden != 0.0 {
        return fnum / fden;
    }
    // Fall back to a digit-limited quotient.
    let neg = num.is_negative();
    let mut n = num.abs().to_biguint().unwrap();
    let mut d = den.abs().to_biguint().unwrap();
    let cap = BigUint::one() << 512;
    while n > cap || d > cap {
        n >>= 64;
        d >>= 64;
        if d.is_zero() {
            return if neg { f64::NEG_INFINITY } else { f64::INFINITY };
        }
    }
    let q = bigint_to_f64(&BigInt::from(n)) / bigint_to_f64(&BigInt::from(d));
    if neg {
        -q
    } else {
        q
    }
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    let s = n.to_string();
    s.parse::<f64>().unwrap_or(f64::INFINITY)
}

/// Render a rational as `num/den` (decimal strings), the wire format used
/// by every serializer in this workspace.
pub fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `num/den` or a bare integer.
pub fn rational_from_str(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().ok()?;
        let den: BigInt = d.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Some(BigRational::new(num, den))
    } else {
        let num: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(num))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn interval_scale_flips_on_negative() {
        let iv = RatInterval::new(r(1, 3), r(1, 2));
        let scaled = iv.scale(&r(-2, 1));
        assert_eq!(scaled.lo, r(-1, 1));
        assert_eq!(scaled.hi, r(-2, 3));
    }

    #[test]
    fn rational_round_trip() {
        let x = r(-22, 7);
        let s = rational_to_string(&x);
        assert_eq!(s, "-22/7");
        assert_eq!(rational_from_str(&s).unwrap(), x);
        assert_eq!(rational_from_str("5").unwrap(), r(5, 1));
    }

    #[test]
    fn to_f64_handles_large_values() {
        let big = BigRational::new(BigInt::from(10).pow(400), BigInt::from(3) * BigInt::from(10).pow(400));
        let f = rational_to_f64(&big);
        assert!((f - 1.0 / 3.0).abs() < 1e-12);
    }
}
