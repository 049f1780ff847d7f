//! Exact integer and rational polynomials.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::ball::{CertifiedReal, ComplexBall};
use crate::error::{Error, Result};

/// Polynomial with integer coefficients, stored lowest degree first with
/// no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    /// From coefficients in ascending degree order.
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    /// From coefficients in descending degree order, the way polynomials
    /// are usually written.
    pub fn from_desc<T: Into<BigInt> + Clone>(desc: &[T]) -> Self {
        IntPoly::new(desc.iter().rev().cloned().map(Into::into).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeffs_desc(&self) -> Vec<BigInt> {
        self.coeffs.iter().rev().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides out the content and makes the leading coefficient positive.
    pub fn primitive(&self) -> IntPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.leading().is_negative() {
            g = -g;
        }
        IntPoly::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn is_primitive(&self) -> bool {
        !self.is_zero() && self.leading().is_positive() && self.content().is_one()
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_ball(&self, x: &CertifiedReal) -> CertifiedReal {
        let prec = x.prec();
        self.coeffs
            .iter()
            .rev()
            .fold(CertifiedReal::zero(prec), |acc, c| {
                &(&acc * x) + &CertifiedReal::from_bigint(c, prec)
            })
    }

    pub fn eval_complex(&self, z: &ComplexBall) -> ComplexBall {
        let prec = z.prec();
        self.coeffs.iter().rev().fold(ComplexBall::from_i64(0, prec), |acc, c| {
            (&acc * z).add_real(&CertifiedReal::from_bigint(c, prec))
        })
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::new(vec![]);
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn to_rat(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        )
    }

    /// `p(x/s) * s^deg`, i.e. roots scaled by `s`.
    pub fn scale_roots(&self, s: &BigInt) -> IntPoly {
        let n = self.degree();
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * num_traits::pow(s.clone(), n - i))
                .collect(),
        )
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = !a.is_one() || i == 0;
            if show_coeff {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Polynomial over the rationals, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn leading(&self) -> &BigRational {
        self.coeffs.last().expect("nonzero polynomial")
    }

    pub fn monic(&self) -> RatPoly {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading().clone();
        RatPoly::new(self.coeffs.iter().map(|c| c / &lc).collect())
    }

    pub fn derivative(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn div_rem(&self, d: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut rem = self.coeffs.clone();
        let dd = d.degree();
        let lc = d.leading().clone();
        if self.is_zero() || self.degree() < dd {
            return (RatPoly::new(vec![]), self.clone());
        }
        let mut quot = vec![BigRational::zero(); self.degree() - dd + 1];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lc;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (RatPoly::new(quot), RatPoly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Primitive integer polynomial with the same roots.
    pub fn to_primitive_int(&self) -> IntPoly {
        let den = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        IntPoly::new(
            self.coeffs
                .iter()
                .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
                .collect(),
        )
        .primitive()
    }
}

/// Squarefree part `p / gcd(p, p')`, as a primitive integer polynomial.
pub fn squarefree_part(p: &IntPoly) -> IntPoly {
    let r = p.to_rat();
    let g = r.gcd(&r.derivative());
    if g.degree() == 0 {
        return p.primitive();
    }
    r.div_rem(&g).0.to_primitive_int()
}

/// Whether `d` divides `p` exactly over the rationals.
pub fn divides(d: &IntPoly, p: &IntPoly) -> bool {
    p.to_rat().div_rem(&d.to_rat()).1.is_zero()
}

/// Determinant of a square integer matrix by fraction-free (Bareiss)
/// elimination.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Unique polynomial of degree `< xs.len()` through the given points
/// (Newton divided differences).
pub fn interpolate(xs: &[BigInt], ys: &[BigInt]) -> RatPoly {
    let n = xs.len();
    let xs: Vec<BigRational> = xs.iter().cloned().map(BigRational::from_integer).collect();
    let mut dd: Vec<BigRational> = ys.iter().cloned().map(BigRational::from_integer).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    // Expand the Newton form into monomial coefficients.
    let mut coeffs = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        // coeffs = coeffs * (x - xs[i]) + dd[i]
        let mut next = vec![BigRational::zero(); n];
        for j in 0..n - 1 {
            next[j + 1] += &coeffs[j];
            next[j] -= &coeffs[j] * &xs[i];
        }
        next[0] += &dd[i];
        coeffs = next;
    }
    RatPoly::new(coeffs)
}

/// Integer square matrix helpers used for resultants via companion
/// matrices.
pub(crate) mod matrix {
    use num_bigint::BigInt;
    use num_traits::Zero;

    pub type Mat = Vec<Vec<BigInt>>;

    pub fn identity(n: usize) -> Mat {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                    .collect()
            })
            .collect()
    }

    pub fn mul(a: &Mat, b: &Mat) -> Mat {
        let n = a.len();
        let mut out = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for k in 0..n {
                if a[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
        out
    }

    pub fn lin_comb(terms: &[(BigInt, &Mat)]) -> Mat {
        let n = terms[0].1.len();
        let mut out = vec![vec![BigInt::zero(); n]; n];
        for (c, m) in terms {
            for i in 0..n {
                for j in 0..n {
                    out[i][j] += c * &m[i][j];
                }
            }
        }
        out
    }
}

/// `Res_x(p, q)` for monic `p`, computed as `det(q(C))` where `C` is the
/// companion matrix of `p`.
pub fn resultant_monic(p: &IntPoly, q: &IntPoly) -> Result<BigInt> {
    if !p.leading().is_one() {
        return Err(Error::precondition("resultant_monic needs a monic first argument"));
    }
    let c = companion(p);
    Ok(bareiss_det(poly_of_matrix(q, &c)))
}

pub(crate) fn companion(p: &IntPoly) -> matrix::Mat {
    let n = p.degree();
    let mut c = vec![vec![BigInt::zero(); n]; n];
    for i in 1..n {
        c[i][i - 1] = BigInt::one();
    }
    for (row, a) in c.iter_mut().zip(p.coeffs()) {
        row[n - 1] = -a;
    }
    c
}

pub(crate) fn poly_of_matrix(q: &IntPoly, c: &matrix::Mat) -> matrix::Mat {
    let n = c.len();
    let mut acc = vec![vec![BigInt::zero(); n]; n];
    for coef in q.coeffs().iter().rev() {
        acc = matrix::mul(&acc, c);
        for (i, row) in acc.iter_mut().enumerate() {
            row[i] += coef;
        }
    }
    acc
}
