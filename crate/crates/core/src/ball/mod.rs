//! Midpoint-radius arithmetic over dyadic rationals.
//!
//! A [`CertifiedReal`] stands for every real number in
//! `[mid - rad, mid + rad]`. Each operation returns a ball that contains the
//! exact result for every choice of inputs from the operand balls, so a
//! comparison that succeeds on balls is a proof about the exact values.
//! Comparisons that cannot be decided surface as [`Error::Uncertified`] and
//! are retried at higher precision by [`PrecisionPolicy::escalate`].

mod complex;
mod decimal;
mod dyadic;
mod elementary;
mod mag;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

pub use complex::ComplexBall;
pub use decimal::{parse_decimal, DecimalBall};
pub use dyadic::Dyadic;
pub use mag::Mag;

use crate::error::{Error, Result};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 2048;
/// Default escalation ceiling in bits.
pub const DEFAULT_PRECISION_CAP: u32 = 1 << 20;

#[derive(Clone, Debug)]
pub struct CertifiedReal {
    mid: Dyadic,
    rad: Mag,
    prec: u32,
}

impl CertifiedReal {
    pub fn new(mid: Dyadic, rad: Mag, prec: u32) -> Self {
        let (mid, err) = mid.round(prec);
        CertifiedReal {
            mid,
            rad: rad.add(&err),
            prec,
        }
    }

    pub fn exact(mid: Dyadic, prec: u32) -> Self {
        CertifiedReal::new(mid, Mag::ZERO, prec)
    }

    pub fn zero(prec: u32) -> Self {
        CertifiedReal::exact(Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> Self {
        CertifiedReal::from_i64(1, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        CertifiedReal::exact(Dyadic::from_i64(v), prec)
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> Self {
        CertifiedReal::exact(Dyadic::from_bigint(v.clone()), prec)
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::precondition("zero denominator"));
        }
        let n = CertifiedReal::from_bigint(num, prec);
        let d = CertifiedReal::from_bigint(den, prec);
        n.div(&d)
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Result<Self> {
        CertifiedReal::from_ratio(r.numer(), r.denom(), prec)
    }

    /// Ball around the exact value of a decimal literal such as `"8.86"`
    /// or `"1.15e15"`.
    pub fn from_decimal(s: &str, prec: u32) -> Result<Self> {
        let (n, d) = parse_decimal(s)
            .ok_or_else(|| Error::precondition(format!("bad decimal literal {s:?}")))?;
        CertifiedReal::from_ratio(&n, &d, prec)
    }

    pub fn mid(&self) -> &Dyadic {
        &self.mid
    }

    pub fn rad(&self) -> Mag {
        self.rad
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        CertifiedReal::new(self.mid.clone(), self.rad, prec)
    }

    /// Widens the radius by `extra`.
    pub fn inflate(&self, extra: Mag) -> Self {
        CertifiedReal {
            mid: self.mid.clone(),
            rad: self.rad.add(&extra),
            prec: self.prec,
        }
    }

    pub fn lower(&self) -> Dyadic {
        self.mid.sub(&self.rad.to_dyadic())
    }

    pub fn upper(&self) -> Dyadic {
        self.mid.add(&self.rad.to_dyadic())
    }

    /// Smallest ball containing the interval `[lo, hi]`.
    pub fn from_endpoints(lo: &Dyadic, hi: &Dyadic, prec: u32) -> Self {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let mid = lo.add(hi).mul_2exp(-1);
        let half = hi.sub(lo).mul_2exp(-1);
        CertifiedReal::new(mid, Mag::from_dyadic_upper(&half), prec)
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.lower().sign() == num_bigint::Sign::Plus
    }

    pub fn is_negative(&self) -> bool {
        self.upper().sign() == num_bigint::Sign::Minus
    }

    pub fn is_nonnegative(&self) -> bool {
        self.lower().sign() != num_bigint::Sign::Minus
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        self.lower() <= *x && *x <= self.upper()
    }

    pub fn contains_int(&self, v: &BigInt) -> bool {
        self.contains(&Dyadic::from_bigint(v.clone()))
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains_ball(&self, other: &CertifiedReal) -> bool {
        self.lower() <= other.lower() && other.upper() <= self.upper()
    }

    pub fn overlaps(&self, other: &CertifiedReal) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    /// Whether the ball contains a rational `p/q` (q > 0).
    pub fn contains_ratio(&self, p: &BigInt, q: &BigInt) -> bool {
        let (ln, ld) = self.lower().to_ratio();
        let (un, ud) = self.upper().to_ratio();
        &ln * q <= p * &ld && p * &ud <= &un * q
    }

    /// `Some(ordering)` when every point of `self` compares the same way to
    /// every point of `other`; `None` otherwise.
    pub fn certified_cmp(&self, other: &CertifiedReal) -> Option<Ordering> {
        if self.upper() < other.lower() {
            Some(Ordering::Less)
        } else if self.lower() > other.upper() {
            Some(Ordering::Greater)
        } else if self.is_exact() && other.is_exact() && self.mid == other.mid {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn certainly_lt(&self, other: &CertifiedReal) -> bool {
        self.upper() < other.lower()
    }

    pub fn certainly_le(&self, other: &CertifiedReal) -> bool {
        self.upper() <= other.lower()
    }

    pub fn certainly_gt(&self, other: &CertifiedReal) -> bool {
        other.certainly_lt(self)
    }

    /// Strict comparison that reports an undecidable case as
    /// [`Error::Uncertified`].
    pub fn lt_or_uncertified(&self, other: &CertifiedReal, what: &'static str) -> Result<bool> {
        match self.certified_cmp(other) {
            Some(Ordering::Less) => Ok(true),
            Some(_) => Ok(false),
            None => Err(Error::Uncertified {
                what,
                bits: self.prec.max(other.prec),
            }),
        }
    }

    pub fn sign_or_uncertified(&self, what: &'static str) -> Result<Ordering> {
        if self.is_positive() {
            Ok(Ordering::Greater)
        } else if self.is_negative() {
            Ok(Ordering::Less)
        } else if self.is_exact() {
            Ok(Ordering::Equal)
        } else {
            Err(Error::Uncertified {
                what,
                bits: self.prec,
            })
        }
    }

    /// Certified floor when the ball does not straddle an integer.
    pub fn floor_exact(&self) -> Option<BigInt> {
        let lo = self.lower().floor();
        let hi = self.upper().floor();
        (lo == hi).then_some(lo)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn negate(&self) -> Self {
        CertifiedReal {
            mid: self.mid.neg(),
            rad: self.rad,
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_nonnegative() {
            self.clone()
        } else if self.upper().sign() != num_bigint::Sign::Plus {
            self.neg()
        } else {
            let hi = self.mid.abs().add(&self.rad.to_dyadic());
            CertifiedReal::from_endpoints(&Dyadic::zero(), &hi, self.prec)
        }
    }

    /// Upper bound on `|x|` over the ball.
    pub fn abs_upper(&self) -> Mag {
        Mag::from_dyadic_upper(&self.mid).add(&self.rad)
    }

    /// Lower bound on `|x|` over the ball (zero when it contains zero).
    pub fn abs_lower(&self) -> Mag {
        if self.contains_zero() {
            return Mag::ZERO;
        }
        let m = self.mid.abs().sub(&self.rad.to_dyadic());
        Mag::from_dyadic_lower(&m)
    }

    /// Ball containing both `self` and `other`.
    pub fn hull(&self, other: &CertifiedReal) -> Self {
        let lo = self.lower().min(other.lower());
        let hi = self.upper().max(other.upper());
        CertifiedReal::from_endpoints(&lo, &hi, self.prec.max(other.prec))
    }

    /// Enclosure of `max(x, y)` over both balls.
    pub fn max(&self, other: &CertifiedReal) -> Self {
        let lo = self.lower().max(other.lower());
        let hi = self.upper().max(other.upper());
        CertifiedReal::from_endpoints(&lo, &hi, self.prec.max(other.prec))
    }

    pub fn min(&self, other: &CertifiedReal) -> Self {
        self.neg().max(&other.neg()).neg()
    }

    fn add_impl(&self, other: &CertifiedReal) -> CertifiedReal {
        let prec = self.prec.max(other.prec);
        let rad = self.rad.add(&other.rad);
        if other.mid.is_zero() {
            return CertifiedReal::new(self.mid.clone(), rad, prec);
        }
        if self.mid.is_zero() {
            return CertifiedReal::new(other.mid.clone(), rad, prec);
        }
        let (ta, tb) = (self.mid.top(), other.mid.top());
        let slack = prec as i64 + 4;
        if tb < ta - slack {
            let extra = Mag::from_dyadic_upper(&other.mid);
            return CertifiedReal::new(self.mid.clone(), rad.add(&extra), prec);
        }
        if ta < tb - slack {
            let extra = Mag::from_dyadic_upper(&self.mid);
            return CertifiedReal::new(other.mid.clone(), rad.add(&extra), prec);
        }
        CertifiedReal::new(self.mid.add(&other.mid), rad, prec)
    }

    fn mul_impl(&self, other: &CertifiedReal) -> CertifiedReal {
        let prec = self.prec.max(other.prec);
        let mid = self.mid.mul(&other.mid);
        let am = Mag::from_dyadic_upper(&self.mid);
        let bm = Mag::from_dyadic_upper(&other.mid);
        let rad = am
            .mul(&other.rad)
            .add(&bm.mul(&self.rad))
            .add(&self.rad.mul(&other.rad));
        CertifiedReal::new(mid, rad, prec)
    }

    pub fn mul_2exp(&self, e: i64) -> Self {
        CertifiedReal {
            mid: self.mid.mul_2exp(e),
            rad: self.rad.mul_2exp(e),
            prec: self.prec,
        }
    }

    pub fn mul_int(&self, v: &BigInt) -> Self {
        self.mul_impl(&CertifiedReal::from_bigint(v, self.prec))
    }

    pub fn mul_i64(&self, v: i64) -> Self {
        self.mul_int(&BigInt::from(v))
    }

    pub fn add_i64(&self, v: i64) -> Self {
        self.add_impl(&CertifiedReal::from_i64(v, self.prec))
    }

    /// Division by a small positive integer.
    pub fn div_u64(&self, v: u64) -> Self {
        assert!(v > 0, "division by zero");
        let wp = self.prec as u64 + 2;
        let bits = self.mid.bits();
        let shift = (wp + 64).saturating_sub(bits);
        let num = self.mid.mantissa() << shift;
        let q = num / BigInt::from(v);
        let exp = self.mid.exponent() - shift as i64;
        let err = Mag::pow2(exp);
        let rad = self.rad.div_u64(v).add(&err);
        CertifiedReal::new(Dyadic::new(q, exp), rad, self.prec)
    }

    pub fn div(&self, other: &CertifiedReal) -> Result<Self> {
        let prec = self.prec.max(other.prec);
        let den_low = other.abs_lower();
        if den_low.is_zero() {
            return Err(Error::Uncertified {
                what: "division by a ball containing zero",
                bits: prec,
            });
        }
        let shift = (prec as u64 + 2 + other.mid.bits()).saturating_sub(self.mid.bits());
        let num = self.mid.mantissa() << shift;
        let q = num / other.mid.mantissa();
        let exp = self.mid.exponent() - shift as i64 - other.mid.exponent();
        let err = Mag::pow2(exp);
        let q = Dyadic::new(q, exp);
        let q_abs = Mag::from_dyadic_upper(&q).add(&err);
        let rad = self.rad.add(&q_abs.mul(&other.rad)).div(&den_low).add(&err);
        Ok(CertifiedReal::new(q, rad, prec))
    }

    pub fn recip(&self) -> Result<Self> {
        CertifiedReal::one(self.prec).div(self)
    }

    pub fn sqr(&self) -> Self {
        self.mul_impl(self)
    }

    /// Integer power by repeated squaring; negative exponents go through
    /// [`Self::recip`].
    pub fn powi(&self, n: i64) -> Result<Self> {
        let mut acc = CertifiedReal::one(self.prec);
        let mut base = self.clone();
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_impl(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_impl(&base);
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }

    pub fn sqrt(&self) -> Result<Self> {
        if !self.is_nonnegative() {
            return Err(Error::Uncertified {
                what: "sqrt of a ball reaching below zero",
                bits: self.prec,
            });
        }
        if self.mid.is_zero() {
            // Only the radius is informative.
            let hi = CertifiedReal::exact(self.rad.to_dyadic(), self.prec).sqrt_pos()?;
            return Ok(CertifiedReal::from_endpoints(
                &Dyadic::zero(),
                &hi.upper(),
                self.prec,
            ));
        }
        self.sqrt_pos()
    }

    fn sqrt_pos(&self) -> Result<Self> {
        let prec = self.prec;
        let man = self.mid.mantissa();
        let exp = self.mid.exponent();
        let want = 2 * (prec as i64 + 4);
        let mut shift = (want - man.bits() as i64).max(0);
        if (exp - shift) % 2 != 0 {
            shift += 1;
        }
        let scaled = man << (shift as u64);
        let s = scaled.sqrt();
        if s.is_zero() {
            return Err(Error::Uncertified {
                what: "sqrt near zero",
                bits: prec,
            });
        }
        let half = (exp - shift) / 2;
        let root = Dyadic::new(s, half);
        let err = Mag::pow2(half);
        // |sqrt(x) - sqrt(m)| <= r / sqrt(m) and sqrt(m) >= root.
        let prop = self.rad.div(&Mag::from_dyadic_lower(&root));
        Ok(CertifiedReal::new(root, prop.add(&err), prec))
    }

    /// Distance to the nearest integer, `||x||`. The map is 1-Lipschitz, so
    /// the radius carries over unchanged.
    pub fn dist_to_nearest_int(&self) -> Self {
        let n = self.mid.round_to_int();
        let d = self.mid.sub(&Dyadic::from_bigint(n)).abs();
        CertifiedReal {
            mid: d,
            rad: self.rad,
            prec: self.prec,
        }
    }

    /// Exact rational `num/den` lying inside the ball; used for exact
    /// continued-fraction endpoints.
    pub fn endpoints_ratio(&self) -> ((BigInt, BigInt), (BigInt, BigInt)) {
        (self.lower().to_ratio(), self.upper().to_ratio())
    }

    /// Whether some integer lies in the ball.
    pub fn contains_some_int(&self) -> bool {
        let lo = self.lower().ceil();
        Dyadic::from_bigint(lo) <= self.upper()
    }

    /// The unique integer in the ball, if the ball is narrow enough.
    pub fn unique_int(&self) -> Option<BigInt> {
        let lo = self.lower().ceil();
        let hi = self.upper().floor();
        (lo == hi).then_some(lo)
    }

    pub fn to_decimal(&self, digits: usize) -> DecimalBall {
        DecimalBall::from_ball(self, digits)
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.to_decimal(20);
        write!(f, "{} +/- {}", d.mid, d.rad)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $imp:ident) => {
        impl<'a> $tr<&'a CertifiedReal> for &'a CertifiedReal {
            type Output = CertifiedReal;
            fn $method(self, rhs: &'a CertifiedReal) -> CertifiedReal {
                self.$imp(rhs)
            }
        }
        impl $tr<CertifiedReal> for CertifiedReal {
            type Output = CertifiedReal;
            fn $method(self, rhs: CertifiedReal) -> CertifiedReal {
                (&self).$imp(&rhs)
            }
        }
        impl<'a> $tr<&'a CertifiedReal> for CertifiedReal {
            type Output = CertifiedReal;
            fn $method(self, rhs: &'a CertifiedReal) -> CertifiedReal {
                (&self).$imp(rhs)
            }
        }
        impl<'a> $tr<CertifiedReal> for &'a CertifiedReal {
            type Output = CertifiedReal;
            fn $method(self, rhs: CertifiedReal) -> CertifiedReal {
                self.$imp(&rhs)
            }
        }
    };
}

impl CertifiedReal {
    fn sub_impl(&self, other: &CertifiedReal) -> CertifiedReal {
        self.add_impl(&other.neg())
    }
}

forward_binop!(Add, add, add_impl);
forward_binop!(Sub, sub, sub_impl);
forward_binop!(Mul, mul, mul_impl);

impl Neg for CertifiedReal {
    type Output = CertifiedReal;
    fn neg(self) -> CertifiedReal {
        self.negate()
    }
}

impl Neg for &CertifiedReal {
    type Output = CertifiedReal;
    fn neg(self) -> CertifiedReal {
        self.negate()
    }
}

/// Precision doubling policy shared by every certified computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub start: u32,
    pub cap: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            start: DEFAULT_PRECISION,
            cap: DEFAULT_PRECISION_CAP,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(start: u32, cap: u32) -> Result<Self> {
        if start < 64 || start > cap {
            return Err(Error::precondition(format!(
                "need 64 <= precision_bits ({start}) <= precision_cap ({cap})"
            )));
        }
        Ok(PrecisionPolicy { start, cap })
    }

    pub fn fixed(bits: u32) -> Self {
        PrecisionPolicy {
            start: bits,
            cap: bits,
        }
    }

    /// Runs `f` at increasing precision until it stops returning
    /// [`Error::Uncertified`]. Other errors pass through immediately.
    pub fn escalate<T>(&self, mut f: impl FnMut(u32) -> Result<T>) -> Result<T> {
        let mut prec = self.start;
        loop {
            match f(prec) {
                Err(Error::Uncertified { what, .. }) => {
                    if prec >= self.cap {
                        return Err(Error::PrecisionExhausted {
                            what,
                            cap: self.cap,
                        });
                    }
                    prec = prec.saturating_mul(2).min(self.cap);
                }
                other => return other,
            }
        }
    }
}
