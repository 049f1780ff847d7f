//! Decimal text form of balls. The radius string always bounds the true
//! value's distance from the printed midpoint, including the error from
//! printing the midpoint itself.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{CertifiedReal, Mag};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecimalBall {
    pub mid: String,
    pub rad: String,
}

#[derive(Clone, Copy)]
enum Rounding {
    Nearest,
    Up,
}

/// Exact `(numerator, denominator)` of a decimal literal.
pub fn parse_decimal(s: &str) -> Option<(BigInt, BigInt)> {
    let s = s.trim();
    let (body, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, body) = match body.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, body.strip_prefix('+').unwrap_or(body)),
    };
    let (int_part, frac_part) = match body.find('.') {
        Some(i) => (&body[..i], &body[i + 1..]),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut num: BigInt = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let (num, den) = if scale >= 0 {
        (num * Pow::pow(&ten, scale as u64), BigInt::one())
    } else {
        (num, Pow::pow(&ten, (-scale) as u64))
    };
    let g = num.gcd(&den);
    if g.is_zero() {
        return Some((num, den));
    }
    Some((num / &g, den / g))
}

/// Decimal digits of `|num/den|` scaled so `digits` significant digits
/// remain. Returns the integer mantissa and its decimal exponent.
fn scaled_digits(num: &BigInt, den: &BigInt, digits: usize, mode: Rounding) -> (BigInt, i64) {
    let num = num.abs();
    let ten = BigInt::from(10);
    // Estimate floor(log10(num/den)).
    let est = ((num.bits() as f64 - den.bits() as f64) * std::f64::consts::LOG10_2).floor() as i64;
    let mut e10 = est;
    loop {
        let shift = digits as i64 - 1 - e10;
        let (n, d) = if shift >= 0 {
            (&num * Pow::pow(&ten, shift as u64), den.clone())
        } else {
            (num.clone(), den * Pow::pow(&ten, (-shift) as u64))
        };
        let (q, r) = n.div_rem(&d);
        let q = match mode {
            Rounding::Nearest => {
                if &r * 2 >= d {
                    q + 1
                } else {
                    q
                }
            }
            Rounding::Up => {
                if r.is_zero() {
                    q
                } else {
                    q + 1
                }
            }
        };
        let len = q.to_string().len();
        if len > digits {
            // Either the estimate was low, or rounding carried into a new
            // digit (9.99 -> 10.0); both move the exponent up.
            if len == digits + 1 && q == Pow::pow(&ten, digits as u64) {
                return (Pow::pow(&ten, (digits - 1) as u64), e10 + 1);
            }
            e10 += 1;
            continue;
        }
        if len < digits {
            e10 -= 1;
            continue;
        }
        return (q, e10);
    }
}

fn format_sci(neg: bool, m: &BigInt, e10: i64) -> String {
    let s = m.to_string();
    let (head, tail) = s.split_at(1);
    let sign = if neg { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{e10}")
    } else {
        format!("{sign}{head}.{tail}e{e10}")
    }
}

impl DecimalBall {
    pub fn from_ball(x: &CertifiedReal, digits: usize) -> Self {
        let digits = digits.max(1);
        let (num, den) = x.mid().to_ratio();
        let (mid_str, print_err) = if num.is_zero() {
            ("0".to_string(), Mag::ZERO)
        } else {
            let (m, e10) = scaled_digits(&num, &den, digits, Rounding::Nearest);
            // Printing error is at most half a unit in the last place; we
            // charge a full unit: 10^(e10 - digits + 1) <= 2^(4 * that).
            let last = e10 - digits as i64 + 1;
            let err = Mag::pow2((last as f64 * std::f64::consts::LOG2_10).ceil() as i64 + 1);
            (format_sci(num.is_negative(), &m, e10), err)
        };
        let rad = x.rad().add(&print_err);
        DecimalBall {
            mid: mid_str,
            rad: mag_to_string(&rad),
        }
    }

    /// Ball guaranteed to contain every value the original ball contained.
    pub fn to_ball(&self, prec: u32) -> Result<CertifiedReal> {
        let (mn, md) = parse_decimal(&self.mid)
            .ok_or_else(|| Error::precondition(format!("bad decimal {:?}", self.mid)))?;
        let (rn, rd) = parse_decimal(&self.rad)
            .ok_or_else(|| Error::precondition(format!("bad decimal {:?}", self.rad)))?;
        let mid = CertifiedReal::from_ratio(&mn, &md, prec)?;
        let rad = CertifiedReal::from_ratio(&rn, &rd, prec)?;
        Ok(mid.inflate(rad.abs_upper()))
    }

    /// Approximate float value of the midpoint.
    pub fn approx(&self) -> f64 {
        self.mid.parse().unwrap_or(f64::NAN)
    }
}

fn mag_to_string(m: &Mag) -> String {
    if m.is_zero() {
        return "0".to_string();
    }
    let (num, den) = m.to_dyadic().to_ratio();
    let (q, e10) = scaled_digits(&num, &den, 3, Rounding::Up);
    format_sci(false, &q, e10)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_literals() {
        assert_eq!(
            parse_decimal("8.86"),
            Some((BigInt::from(443), BigInt::from(50)))
        );
        assert_eq!(
            parse_decimal("1.15e15"),
            Some((BigInt::from(1_150_000_000_000_000i64), BigInt::one()))
        );
        assert_eq!(
            parse_decimal("-2.5e-1"),
            Some((BigInt::from(-1), BigInt::from(4)))
        );
        assert_eq!(parse_decimal("abc"), None);
    }

    #[test]
    fn printed_ball_contains_original() {
        let third = CertifiedReal::from_ratio(&BigInt::from(1), &BigInt::from(3), 200).unwrap();
        let d = third.to_decimal(12);
        assert_eq!(d.mid, "3.33333333333e-1");
        let back = d.to_ball(200).unwrap();
        assert!(back.contains_ball(&third));
    }

    #[test]
    fn carry_on_rounding() {
        let x = CertifiedReal::from_decimal("9.9996", 64).unwrap();
        assert_eq!(x.to_decimal(3).mid, "1.00e1");
    }
}
