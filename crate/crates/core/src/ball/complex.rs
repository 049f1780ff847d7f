use std::ops::{Add, Mul, Neg, Sub};

use super::{CertifiedReal, Dyadic, Mag};
use crate::error::Result;

/// Rectangular complex ball: independent real and imaginary enclosures.
#[derive(Clone, Debug)]
pub struct ComplexBall {
    pub re: CertifiedReal,
    pub im: CertifiedReal,
}

impl ComplexBall {
    pub fn new(re: CertifiedReal, im: CertifiedReal) -> Self {
        ComplexBall { re, im }
    }

    pub fn real(re: CertifiedReal) -> Self {
        let prec = re.prec();
        ComplexBall {
            re,
            im: CertifiedReal::zero(prec),
        }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        ComplexBall::real(CertifiedReal::from_i64(v, prec))
    }

    /// Exact point from a pair of floats (every finite float is dyadic).
    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        ComplexBall {
            re: CertifiedReal::exact(Dyadic::from_f64(re).unwrap_or_else(Dyadic::zero), prec),
            im: CertifiedReal::exact(Dyadic::from_f64(im).unwrap_or_else(Dyadic::zero), prec),
        }
    }

    /// Square box around a disk of radius `r` centred at the midpoint of
    /// `center`, including `center`'s own uncertainty.
    pub fn disk(center: &ComplexBall, r: Mag) -> Self {
        ComplexBall {
            re: center.re.inflate(r),
            im: center.im.inflate(r),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        ComplexBall {
            re: self.re.with_prec(prec),
            im: self.im.with_prec(prec),
        }
    }

    /// Drops the radii, keeping only the midpoint.
    pub fn midpoint(&self) -> Self {
        ComplexBall {
            re: CertifiedReal::exact(self.re.mid().clone(), self.re.prec()),
            im: CertifiedReal::exact(self.im.mid().clone(), self.im.prec()),
        }
    }

    pub fn conj(&self) -> Self {
        ComplexBall {
            re: self.re.clone(),
            im: self.im.negate(),
        }
    }

    pub fn norm_sqr(&self) -> CertifiedReal {
        &self.re.sqr() + &self.im.sqr()
    }

    /// Enclosure of the modulus.
    pub fn abs(&self) -> Result<CertifiedReal> {
        self.norm_sqr().sqrt()
    }

    /// Upper bound on the modulus over the box.
    pub fn abs_upper(&self) -> Mag {
        let r = self.re.abs_upper();
        let i = self.im.abs_upper();
        // sqrt(a^2 + b^2) <= |a| + |b|, tightened through a ball sqrt.
        let s = CertifiedReal::exact(r.mul(&r).add(&i.mul(&i)).to_dyadic(), 64);
        match s.sqrt() {
            Ok(v) => Mag::from_dyadic_upper(&v.upper()),
            Err(_) => r.add(&i),
        }
    }

    /// Upper bound on the radius of a disk containing the box.
    pub fn radius_upper(&self) -> Mag {
        self.re.rad().add(&self.im.rad())
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn scale(&self, v: &CertifiedReal) -> Self {
        ComplexBall {
            re: &self.re * v,
            im: &self.im * v,
        }
    }

    pub fn add_real(&self, v: &CertifiedReal) -> Self {
        ComplexBall {
            re: &self.re + v,
            im: self.im.clone(),
        }
    }

    fn mul_impl(&self, o: &ComplexBall) -> ComplexBall {
        ComplexBall {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }

    pub fn sqr(&self) -> Self {
        self.mul_impl(self)
    }

    pub fn div(&self, o: &ComplexBall) -> Result<ComplexBall> {
        let den = o.norm_sqr();
        let num = self.mul_impl(&o.conj());
        Ok(ComplexBall {
            re: num.re.div(&den)?,
            im: num.im.div(&den)?,
        })
    }

    pub fn recip(&self) -> Result<ComplexBall> {
        ComplexBall::from_i64(1, self.prec()).div(self)
    }

    pub fn powi(&self, n: i64) -> Result<ComplexBall> {
        let mut acc = ComplexBall::from_i64(1, self.prec());
        let mut base = self.clone();
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_impl(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl<'a> Add<&'a ComplexBall> for &'a ComplexBall {
    type Output = ComplexBall;
    fn add(self, o: &'a ComplexBall) -> ComplexBall {
        ComplexBall {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

impl<'a> Sub<&'a ComplexBall> for &'a ComplexBall {
    type Output = ComplexBall;
    fn sub(self, o: &'a ComplexBall) -> ComplexBall {
        ComplexBall {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
}

impl<'a> Mul<&'a ComplexBall> for &'a ComplexBall {
    type Output = ComplexBall;
    fn mul(self, o: &'a ComplexBall) -> ComplexBall {
        self.mul_impl(o)
    }
}

impl Neg for &ComplexBall {
    type Output = ComplexBall;
    fn neg(self) -> ComplexBall {
        ComplexBall {
            re: self.re.negate(),
            im: self.im.negate(),
        }
    }
}
