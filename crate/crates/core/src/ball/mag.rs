use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::Dyadic;

const MAG_BITS: u32 = 30;

/// Upper bound on a nonnegative real, stored as `man * 2^exp` with a short
/// mantissa. Every operation rounds away from zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mag {
    man: u64,
    exp: i64,
}

impl Mag {
    pub const ZERO: Mag = Mag { man: 0, exp: 0 };

    fn normalize_up(man: u128, exp: i64) -> Mag {
        if man == 0 {
            return Mag::ZERO;
        }
        let bits = 128 - man.leading_zeros();
        if bits <= MAG_BITS {
            return Mag { man: man as u64, exp };
        }
        let shift = bits - MAG_BITS;
        let lost = man & ((1u128 << shift) - 1) != 0;
        let mut m = (man >> shift) as u64;
        let mut e = exp + shift as i64;
        if lost {
            m += 1;
            if m == 1 << MAG_BITS {
                m >>= 1;
                e += 1;
            }
        }
        Mag { man: m, exp: e }
    }

    fn normalize_down(man: u128, exp: i64) -> Mag {
        if man == 0 {
            return Mag::ZERO;
        }
        let bits = 128 - man.leading_zeros();
        if bits <= MAG_BITS {
            return Mag { man: man as u64, exp };
        }
        let shift = bits - MAG_BITS;
        Mag {
            man: (man >> shift) as u64,
            exp: exp + shift as i64,
        }
    }

    pub fn pow2(exp: i64) -> Mag {
        Mag { man: 1, exp }
    }

    pub fn from_u64(v: u64) -> Mag {
        Mag::normalize_up(v as u128, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.man == 0
    }

    /// Upper bound on `|d|`.
    pub fn from_dyadic_upper(d: &Dyadic) -> Mag {
        Mag::from_bigint_scaled(d.mantissa(), d.exponent(), true)
    }

    /// Lower bound on `|d|`.
    pub fn from_dyadic_lower(d: &Dyadic) -> Mag {
        Mag::from_bigint_scaled(d.mantissa(), d.exponent(), false)
    }

    fn from_bigint_scaled(man: &BigInt, exp: i64, up: bool) -> Mag {
        if man.is_zero() {
            return Mag::ZERO;
        }
        let mag = man.magnitude();
        let bits = mag.bits();
        if bits <= 64 {
            let v = mag.to_u64().unwrap_or(u64::MAX) as u128;
            return if up {
                Mag::normalize_up(v, exp)
            } else {
                Mag::normalize_down(v, exp)
            };
        }
        let shift = bits - 64;
        let top = (mag >> shift).to_u64().unwrap_or(u64::MAX) as u128;
        let e = exp + shift as i64;
        if up {
            // Lost low bits are at most one unit of the truncated mantissa.
            Mag::normalize_up(top + 1, e)
        } else {
            Mag::normalize_down(top, e)
        }
    }

    pub fn to_dyadic(&self) -> Dyadic {
        Dyadic::new(BigInt::from(self.man), self.exp)
    }

    pub fn mantissa(&self) -> u64 {
        self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn add(&self, other: &Mag) -> Mag {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let (hi, lo) = if self.exp >= other.exp {
            (self, other)
        } else {
            (other, self)
        };
        let d = hi.exp - lo.exp;
        if d > 60 {
            // `lo` is below one unit of `hi`'s mantissa.
            return Mag::normalize_up(hi.man as u128 + 1, hi.exp);
        }
        Mag::normalize_up(((hi.man as u128) << d) + lo.man as u128, lo.exp)
    }

    pub fn mul(&self, other: &Mag) -> Mag {
        if self.is_zero() || other.is_zero() {
            return Mag::ZERO;
        }
        Mag::normalize_up(self.man as u128 * other.man as u128, self.exp + other.exp)
    }

    pub fn mul_u64(&self, v: u64) -> Mag {
        self.mul(&Mag::from_u64(v))
    }

    pub fn mul_2exp(&self, e: i64) -> Mag {
        if self.is_zero() {
            return *self;
        }
        Mag {
            man: self.man,
            exp: self.exp + e,
        }
    }

    /// Upper bound on `self / den` where `den` is a lower bound of the true
    /// divisor. `den` must be nonzero.
    pub fn div(&self, den: &Mag) -> Mag {
        assert!(!den.is_zero(), "Mag division by zero");
        if self.is_zero() {
            return Mag::ZERO;
        }
        let q = ((self.man as u128) << 64) / den.man as u128 + 1;
        Mag::normalize_up(q, self.exp - 64 - den.exp)
    }

    pub fn div_u64(&self, v: u64) -> Mag {
        self.div(&Mag::normalize_down(v as u128, 0))
    }

    pub fn powi(&self, n: u32) -> Mag {
        let mut acc = Mag::from_u64(1);
        let mut base = *self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn max(&self, other: &Mag) -> Mag {
        if self.cmp(other) == Ordering::Less {
            *other
        } else {
            *self
        }
    }

    /// Position of the leading bit: `2^(top-1) <= value < 2^top`.
    pub fn top(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + (64 - self.man.leading_zeros()) as i64
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let e = self.exp.clamp(-2000, 2000) as i32;
        self.man as f64 * 2f64.powi(e)
    }
}

impl PartialOrd for Mag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mag {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (ta, tb) = (self.top(), other.top());
        if ta != tb {
            return ta.cmp(&tb);
        }
        let e = self.exp.min(other.exp);
        let a = (self.man as u128) << (self.exp - e);
        let b = (other.man as u128) << (other.exp - e);
        a.cmp(&b)
    }
}
