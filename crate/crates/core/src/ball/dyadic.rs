use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Mag;

/// Exact dyadic rational `man * 2^exp`.
#[derive(Clone, Debug)]
pub struct Dyadic {
    man: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(man: BigInt, exp: i64) -> Self {
        Dyadic { man, exp }
    }

    pub fn zero() -> Self {
        Dyadic {
            man: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_bigint(man: BigInt) -> Self {
        Dyadic { man, exp: 0 }
    }

    pub fn from_i64(v: i64) -> Self {
        Dyadic::from_bigint(BigInt::from(v))
    }

    /// Exact conversion; every finite `f64` is dyadic.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (man, exp) = if raw_exp == 0 {
            (frac as i64, -1074)
        } else {
            ((frac | (1u64 << 52)) as i64, raw_exp - 1075)
        };
        Some(Dyadic::new(BigInt::from(sign * man), exp))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn sign(&self) -> Sign {
        self.man.sign()
    }

    pub fn bits(&self) -> u64 {
        self.man.bits()
    }

    /// Exponent just above the leading bit (`|self| < 2^top`).
    pub fn top(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + self.man.bits() as i64
        }
    }

    pub fn neg(&self) -> Self {
        Dyadic::new(-&self.man, self.exp)
    }

    pub fn abs(&self) -> Self {
        Dyadic::new(self.man.abs(), self.exp)
    }

    pub fn mul_2exp(&self, e: i64) -> Self {
        Dyadic::new(self.man.clone(), self.exp + e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.man << ((self.exp - e) as u64);
        let b = &other.man << ((other.exp - e) as u64);
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.man * &other.man, self.exp + other.exp)
    }

    pub fn mul_bigint(&self, v: &BigInt) -> Dyadic {
        Dyadic::new(&self.man * v, self.exp)
    }

    /// Truncates the mantissa to at most `prec` bits. Returns the rounded
    /// value and an upper bound on the discarded part.
    pub fn round(&self, prec: u32) -> (Dyadic, Mag) {
        let bits = self.man.bits();
        if bits <= prec as u64 {
            return (self.clone(), Mag::ZERO);
        }
        let shift = bits - prec as u64;
        let man = &self.man >> shift;
        let exp = self.exp + shift as i64;
        (Dyadic::new(man, exp), Mag::pow2(exp))
    }

    /// Largest integer not exceeding `self`.
    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.man << (self.exp as u64)
        } else {
            let den = BigInt::one() << ((-self.exp) as u64);
            self.man.div_floor(&den)
        }
    }

    pub fn ceil(&self) -> BigInt {
        -self.neg().floor()
    }

    /// Nearest integer, ties rounded up.
    pub fn round_to_int(&self) -> BigInt {
        self.add(&Dyadic::new(BigInt::one(), -1)).floor()
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.man.bits();
        let (top, e) = if bits > 64 {
            let s = bits - 64;
            ((&self.man >> s).to_f64().unwrap_or(0.0), self.exp + s as i64)
        } else {
            (self.man.to_f64().unwrap_or(0.0), self.exp)
        };
        if e > 2000 {
            return top.signum() * f64::INFINITY;
        }
        if e < -2200 {
            return 0.0;
        }
        // Split the scaling so intermediate powers stay finite.
        let half = (e / 2) as i32;
        top * 2f64.powi(half) * 2f64.powi(e as i32 - half)
    }

    /// `(numerator, denominator)` with denominator a power of two.
    pub fn to_ratio(&self) -> (BigInt, BigInt) {
        if self.exp >= 0 {
            (&self.man << (self.exp as u64), BigInt::one())
        } else {
            (self.man.clone(), BigInt::one() << ((-self.exp) as u64))
        }
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.man.sign();
        let sb = other.man.sign();
        if sa != sb {
            return sign_rank(sa).cmp(&sign_rank(sb));
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        let (ta, tb) = (self.top(), other.top());
        if ta != tb {
            let by_mag = ta.cmp(&tb);
            return if sa == Sign::Plus {
                by_mag
            } else {
                by_mag.reverse()
            };
        }
        self.sub(other).man.sign().cmp(&Sign::NoSign)
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_of_negative_rounds_down() {
        let d = Dyadic::new(BigInt::from(-3), -1);
        assert_eq!(d.floor(), BigInt::from(-2));
        assert_eq!(d.ceil(), BigInt::from(-1));
        assert_eq!(Dyadic::new(BigInt::from(5), -1).round_to_int(), BigInt::from(3));
    }

    #[test]
    fn f64_roundtrip_is_exact() {
        for v in [1.0, -0.1, 3.5e-300, 1e300, 2.414213562373095] {
            let d = Dyadic::from_f64(v).unwrap();
            assert_eq!(d.to_f64(), v);
        }
    }

    #[test]
    fn ordering_handles_mixed_scales() {
        let a = Dyadic::new(BigInt::from(1), 0);
        let b = Dyadic::new(BigInt::from(3), -2);
        let c = Dyadic::new(BigInt::from(-5), 10);
        assert!(b < a);
        assert!(c < b);
        assert_eq!(Dyadic::new(BigInt::from(4), -2), Dyadic::from_i64(1));
    }
}
