//! Logarithm, exponential and a few constants on balls.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;

use super::{CertifiedReal, Dyadic, Mag};
use crate::error::{Error, Result};

const GUARD: u32 = 32;

/// `atanh(1/n)` for an integer `n >= 2`.
fn atanh_recip(n: u64, prec: u32) -> CertifiedReal {
    let wp = prec + GUARD;
    let n2 = n * n;
    // power = n^-(2i+1)
    let mut power = CertifiedReal::one(wp).div_u64(n);
    let mut sum = power.clone();
    let mut i: u64 = 0;
    let mut bound = Mag::from_u64(1).div_u64(n);
    let n2_mag_inv = Mag::from_u64(1).div_u64(n2);
    let target = Mag::pow2(-(wp as i64) - 4);
    loop {
        i += 1;
        power = power.div_u64(n2);
        bound = bound.mul(&n2_mag_inv);
        sum = &sum + &power.div_u64(2 * i + 1);
        if bound < target {
            break;
        }
    }
    // Remaining terms are dominated by a geometric series with ratio 1/n^2.
    let tail = bound.mul(&n2_mag_inv).mul_u64(2);
    sum.inflate(tail).with_prec(prec)
}

fn ln2_uncached(prec: u32) -> CertifiedReal {
    let wp = prec + 16;
    // ln 2 = 18 atanh(1/26) - 2 atanh(1/4801) + 8 atanh(1/8749)
    let a = atanh_recip(26, wp).mul_i64(18);
    let b = atanh_recip(4801, wp).mul_i64(2);
    let c = atanh_recip(8749, wp).mul_i64(8);
    (&(&a - &b) + &c).with_prec(prec)
}

fn ln2_cache() -> &'static Mutex<HashMap<u32, CertifiedReal>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, CertifiedReal>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub fn ln2(prec: u32) -> CertifiedReal {
    if let Some(v) = ln2_cache().lock().expect("ln2 cache poisoned").get(&prec) {
        return v.clone();
    }
    let v = ln2_uncached(prec);
    ln2_cache()
        .lock()
        .expect("ln2 cache poisoned")
        .insert(prec, v.clone());
    v
}

/// Natural logarithm of a dyadic `y` in roughly `[0.7, 1.42]` via
/// `2 atanh((y-1)/(y+1))`.
fn ln_near_one(y: &Dyadic, wp: u32) -> Result<CertifiedReal> {
    let yb = CertifiedReal::exact(y.clone(), wp);
    let t = (&yb - &CertifiedReal::one(wp)).div(&(&yb + &CertifiedReal::one(wp)))?;
    let t2 = t.sqr();
    let t_mag = t.abs_upper();
    let t2_mag = t_mag.mul(&t_mag);
    let mut power = t.clone();
    let mut sum = t.clone();
    let mut bound = t_mag;
    let target = Mag::pow2(-(wp as i64) - 4);
    let mut i: u64 = 0;
    while bound >= target {
        i += 1;
        power = &power * &t2;
        bound = bound.mul(&t2_mag);
        sum = &sum + &power.div_u64(2 * i + 1);
    }
    // Tail: sum_{j>i} |t|^(2j+1)/(2j+1) <= |t|^(2i+3) / (1 - t^2) <= 2 |t|^(2i+3).
    let tail = bound.mul(&t2_mag).mul_u64(2);
    Ok(sum.inflate(tail).mul_2exp(1))
}

/// Natural logarithm of a positive exact dyadic.
fn ln_dyadic(m: &Dyadic, prec: u32) -> Result<CertifiedReal> {
    let wp = prec + GUARD;
    let bits = m.bits() as i64;
    // m = y * 2^s with y in [1, 2)
    let mut s = m.exponent() + bits - 1;
    let mut y = m.mul_2exp(-s);
    // Move y into [1/sqrt 2, sqrt 2).
    if y.to_f64() > std::f64::consts::SQRT_2 {
        s += 1;
        y = y.mul_2exp(-1);
    }
    let ly = ln_near_one(&y, wp)?;
    let s_bits = 64 - s.unsigned_abs().leading_zeros();
    let l2 = ln2(wp + s_bits);
    let total = &ly + &l2.mul_i64(s);
    Ok(total.with_prec(prec))
}

impl CertifiedReal {
    /// Natural logarithm. The ball must be strictly positive.
    pub fn ln(&self) -> Result<CertifiedReal> {
        if !self.is_positive() {
            return Err(Error::Uncertified {
                what: "ln of a ball reaching zero",
                bits: self.prec(),
            });
        }
        let base = ln_dyadic(self.mid(), self.prec())?;
        if self.rad().is_zero() {
            return Ok(base);
        }
        // |ln x - ln m| <= r / (m - r)
        let low = Mag::from_dyadic_lower(&self.lower());
        Ok(base.inflate(self.rad().div(&low)))
    }

    pub fn exp(&self) -> Result<CertifiedReal> {
        let prec = self.prec();
        let approx = self.mid().to_f64() + self.rad().to_f64();
        if !approx.is_finite() || self.mid().to_f64().abs() > 1e15 {
            return Err(Error::Overflow("exp"));
        }
        let halvings: i64 = 12;
        let s = (self.mid().to_f64() / std::f64::consts::LN_2).round() as i64;
        let s_bits = 64 - s.unsigned_abs().leading_zeros();
        let wp = prec + GUARD + halvings as u32 + s_bits;
        let x = self.with_prec(wp);
        let r = &x - &ln2(wp + s_bits).mul_i64(s);
        let r = r.mul_2exp(-halvings);
        let r_mag = r.abs_upper();
        if r_mag > Mag::from_u64(1) {
            // The reduction should leave |r| << 1; a wide input ball cannot
            // be handled this way.
            return Err(Error::Uncertified {
                what: "exp of a wide ball",
                bits: prec,
            });
        }
        let mut sum = CertifiedReal::one(wp);
        let mut term = CertifiedReal::one(wp);
        let mut bound = Mag::from_u64(1);
        let target = Mag::pow2(-(wp as i64) - 4);
        let mut i: u64 = 0;
        while bound >= target {
            i += 1;
            term = (&term * &r).div_u64(i);
            bound = bound.mul(&r_mag).div_u64(i);
            sum = &sum + &term;
        }
        // Tail after term i: at most 2 * |r|^(i+1)/(i+1)!.
        let tail = bound.mul(&r_mag).div_u64(i + 1).mul_u64(2);
        let mut acc = sum.inflate(tail);
        for _ in 0..halvings {
            acc = acc.sqr();
        }
        Ok(acc.mul_2exp(s).with_prec(prec))
    }

    /// `self^y` for a positive base.
    pub fn pow(&self, y: &CertifiedReal) -> Result<CertifiedReal> {
        (&self.ln()? * y).exp()
    }

    pub fn ln2(prec: u32) -> CertifiedReal {
        ln2(prec)
    }

    pub fn ln10(prec: u32) -> CertifiedReal {
        CertifiedReal::from_i64(10, prec)
            .ln()
            .expect("ln 10 is certifiable at any precision")
    }

    /// Golden ratio `(1 + sqrt 5) / 2`.
    pub fn phi(prec: u32) -> CertifiedReal {
        let s5 = CertifiedReal::from_i64(5, prec + 8)
            .sqrt()
            .expect("sqrt 5 is certifiable");
        (&s5 + &CertifiedReal::one(prec + 8)).mul_2exp(-1).with_prec(prec)
    }

    /// Euler's number.
    pub fn e(prec: u32) -> CertifiedReal {
        CertifiedReal::one(prec).exp().expect("exp(1) is certifiable")
    }

    pub fn ln_bigint(v: &BigInt, prec: u32) -> Result<CertifiedReal> {
        CertifiedReal::from_bigint(v, prec).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::CertifiedReal as R;

    #[test]
    fn ln2_matches_f64() {
        let l = ln2(200);
        assert!((l.to_f64() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(l.rad() < Mag::pow2(-190));
    }

    #[test]
    fn ln_and_exp_are_inverse() {
        for v in [2i64, 3, 10, 12345] {
            let x = R::from_i64(v, 256);
            let back = x.ln().unwrap().exp().unwrap();
            assert!(back.contains_int(&BigInt::from(v)), "v={v}");
            assert!(back.rad() < Mag::pow2(-200));
        }
    }

    #[test]
    fn exp_of_negative_and_zero() {
        let one = R::zero(128).exp().unwrap();
        assert!(one.contains_int(&BigInt::from(1)));
        let e = R::e(128);
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
        let small = R::from_i64(-50, 128).exp().unwrap();
        assert!((small.to_f64() / (-50f64).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ln10_known_digits() {
        let l = R::ln10(128);
        assert!((l.to_f64() - std::f64::consts::LN_10).abs() < 1e-15);
    }

    #[test]
    fn ln_of_ball_is_widened() {
        let x = R::from_i64(3, 128).inflate(Mag::pow2(-20));
        let l = x.ln().unwrap();
        assert!(l.rad() >= Mag::pow2(-22));
        let lo = R::exact(x.lower(), 128).ln().unwrap();
        let hi = R::exact(x.upper(), 128).ln().unwrap();
        assert!(l.contains_ball(&lo) && l.contains_ball(&hi));
    }

    #[test]
    fn phi_satisfies_its_equation() {
        let p = R::phi(300);
        let z = &(&p.sqr() - &p) - &R::one(300);
        assert!(z.contains_zero());
        assert!(z.abs_upper() < Mag::pow2(-280));
    }
}
