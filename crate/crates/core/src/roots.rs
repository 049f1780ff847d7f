//! Certified isolation of the complex roots of squarefree integer
//! polynomials, and factorization over the rationals driven by those roots.
//!
//! Roots are found in double precision (Aberth iteration), polished by
//! multiprecision Newton steps, then certified with Weierstrass
//! inclusion disks: with `W_j = p(z_j) / (lc * prod_{i != j} (z_j - z_i))`
//! the roots of `p` are the eigenvalues of `diag(z) - 1 w^T`, so every
//! column Gerschgorin disk `D(z_j - W_j, (n-1)|W_j|)` that is disjoint from
//! the others holds exactly one root.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::ball::{CertifiedReal, ComplexBall, Mag, PrecisionPolicy};
use crate::error::{Error, Result};
use crate::poly::{divides, squarefree_part, IntPoly};

fn aberth_f64(p: &IntPoly) -> Vec<Complex64> {
    let n = p.degree();
    let c: Vec<f64> = p.coeffs().iter().map(bigint_to_f64).collect();
    let lc = c[n];
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut v = Complex64::new(c[n], 0.0);
        let mut d = Complex64::zero();
        for i in (0..n).rev() {
            d = d * z + v;
            v = v * z + c[i];
        }
        (v, d)
    };
    // Start on a circle whose radius is the geometric mean of the root
    // moduli, with an offset angle to avoid symmetric stalls.
    let r0 = (c[0].abs() / lc.abs()).powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / n as f64 + 0.4;
            Complex64::from_polar(r0, t)
        })
        .collect();
    for _ in 0..2000 {
        let mut moved = false;
        for j in 0..n {
            let (v, d) = eval(z[j]);
            if v == Complex64::zero() {
                continue;
            }
            let ratio = v / d;
            let s: Complex64 = (0..n)
                .filter(|&i| i != j)
                .map(|i| Complex64::one() / (z[j] - z[i]))
                .sum();
            let w = ratio / (Complex64::one() - ratio * s);
            if !w.is_finite() {
                continue;
            }
            z[j] -= w;
            if w.norm() > 1e-15 * (1.0 + z[j].norm()) {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    z
}

fn bigint_to_f64(v: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}

fn newton_polish(p: &IntPoly, dp: &IntPoly, z0: Complex64, prec: u32) -> ComplexBall {
    let mut z = ComplexBall::from_f64(z0.re, z0.im, 64);
    let mut wp = 64u32;
    loop {
        let steps = if wp >= prec { 3 } else { 1 };
        for _ in 0..steps {
            let v = p.eval_complex(&z);
            let d = dp.eval_complex(&z);
            match v.div(&d) {
                Ok(step) => z = (&z - &step).midpoint(),
                Err(_) => break,
            }
        }
        if wp >= prec {
            return z;
        }
        wp = (wp * 2).min(prec);
        z = z.with_prec(wp);
    }
}

/// Enclosures of all complex roots of a squarefree polynomial, one box per
/// root, pairwise disjoint. Fails with `Uncertified` if the inclusion disks
/// overlap at this precision.
pub fn isolate_roots(p: &IntPoly, prec: u32) -> Result<Vec<ComplexBall>> {
    let n = p.degree();
    if p.is_zero() || n == 0 {
        return Ok(vec![]);
    }
    let dp = p.derivative();
    let approx = aberth_f64(p);
    if approx.iter().any(|z| !z.is_finite()) {
        return Err(Error::Uncertified {
            what: "double-precision root approximation",
            bits: prec,
        });
    }
    let z: Vec<ComplexBall> = approx
        .iter()
        .map(|&z0| newton_polish(p, &dp, z0, prec))
        .collect();

    let lc = CertifiedReal::from_bigint(&p.leading(), prec);
    let mut disks = Vec::with_capacity(n);
    for j in 0..n {
        let mut den = ComplexBall::real(lc.clone());
        for i in 0..n {
            if i != j {
                den = &den * &(&z[j] - &z[i]);
            }
        }
        let w = p.eval_complex(&z[j]).div(&den).map_err(|_| Error::Uncertified {
            what: "root approximations collide",
            bits: prec,
        })?;
        let c = &z[j] - &w;
        let r = w.abs_upper().mul_u64(n as u64 - 1).add(&c.radius_upper());
        disks.push((c.midpoint(), r));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !disks_apart(&disks[i], &disks[j]) {
                return Err(Error::Uncertified {
                    what: "root inclusion disks overlap",
                    bits: prec,
                });
            }
        }
    }
    let mut boxes: Vec<ComplexBall> = disks
        .iter()
        .map(|(c, r)| ComplexBall::disk(c, *r))
        .collect();
    boxes.sort_by(|a, b| {
        let (ar, ai) = a.to_f64();
        let (br, bi) = b.to_f64();
        br.total_cmp(&ar).then(bi.total_cmp(&ai))
    });
    Ok(boxes)
}

fn disks_apart(a: &(ComplexBall, Mag), b: &(ComplexBall, Mag)) -> bool {
    let dx = a.0.re.mid().sub(b.0.re.mid());
    let dy = a.0.im.mid().sub(b.0.im.mid());
    let d2 = dx.mul(&dx).add(&dy.mul(&dy));
    let r = a.1.add(&b.1);
    d2 > r.mul(&r).to_dyadic()
}

/// Whether two boxes can share a point.
pub fn boxes_overlap(a: &ComplexBall, b: &ComplexBall) -> bool {
    a.re.overlaps(&b.re) && a.im.overlaps(&b.im)
}

/// Monic polynomial `prod (z - r_i)` over a set of root boxes, rounded to
/// integer coefficients when every coefficient box pins down a unique
/// integer. `Ok(None)` means the product is certainly not integral.
fn integral_product(roots: &[&ComplexBall], prec: u32) -> Result<Option<IntPoly>> {
    let mut coeffs = vec![ComplexBall::from_i64(1, prec)];
    for r in roots {
        let mut next = vec![ComplexBall::from_i64(0, prec); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] = &next[i + 1] + c;
            next[i] = &next[i] - &(c * *r);
        }
        coeffs = next;
    }
    let mut out = Vec::with_capacity(coeffs.len());
    for c in &coeffs {
        if !c.im.contains_zero() || !c.re.contains_some_int() {
            return Ok(None);
        }
        match c.re.unique_int() {
            Some(v) => out.push(v),
            None => {
                return Err(Error::Uncertified {
                    what: "integer coefficient of a candidate factor",
                    bits: prec,
                })
            }
        }
    }
    Ok(Some(IntPoly::new(out)))
}

/// Factor search state: the monic transform `q(z) = lc^(n-1) p(z / lc)` and
/// the scaled root boxes `lc * r_i`, which are algebraic integers.
struct MonicSearch {
    lc: BigInt,
    q: IntPoly,
    roots: Vec<ComplexBall>,
    prec: u32,
}

impl MonicSearch {
    fn new(p: &IntPoly, roots: &[ComplexBall], prec: u32) -> Self {
        let lc = p.leading();
        let n = p.degree();
        let q = IntPoly::new(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == n {
                        BigInt::one()
                    } else {
                        c * num_traits::pow(lc.clone(), n - 1 - i)
                    }
                })
                .collect(),
        );
        let s = CertifiedReal::from_bigint(&lc, prec);
        let roots = roots.iter().map(|r| r.scale(&s)).collect();
        MonicSearch { lc, q, roots, prec }
    }

    /// Irreducible factor of the remaining polynomial that has root
    /// `first`, as `(factor in original variable, root indices used)`.
    fn factor_with(&self, q_rem: &IntPoly, remaining: &[usize], first: usize) -> Result<(IntPoly, IntPoly, Vec<usize>)> {
        let others: Vec<usize> = remaining.iter().copied().filter(|&i| i != first).collect();
        for size in 0..others.len() {
            for comb in Combinations::new(others.len(), size) {
                let mut idx = vec![first];
                idx.extend(comb.iter().map(|&c| others[c]));
                let boxes: Vec<&ComplexBall> = idx.iter().map(|&i| &self.roots[i]).collect();
                if let Some(f) = integral_product(&boxes, self.prec)? {
                    if divides(&f, q_rem) {
                        return Ok((self.unscale(&f), f, idx));
                    }
                }
            }
        }
        Ok((self.unscale(q_rem), q_rem.clone(), remaining.to_vec()))
    }

    /// `F(lc * y)` made primitive.
    fn unscale(&self, f: &IntPoly) -> IntPoly {
        IntPoly::new(
            f.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| c * num_traits::pow(self.lc.clone(), i))
                .collect(),
        )
        .primitive()
    }
}

struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

fn require_squarefree(p: &IntPoly) -> Result<()> {
    if p.degree() == 0 || squarefree_part(p).degree() != p.degree() {
        return Err(Error::precondition(format!(
            "expected a squarefree polynomial of positive degree, got {p}"
        )));
    }
    Ok(())
}

/// Irreducible factors over the rationals of a squarefree polynomial,
/// primitive with positive leading coefficient, sorted by degree.
pub fn irreducible_factors(p: &IntPoly, policy: &PrecisionPolicy) -> Result<Vec<IntPoly>> {
    require_squarefree(p)?;
    let p = p.primitive();
    policy.escalate(|prec| {
        let roots = isolate_roots(&p, prec)?;
        let search = MonicSearch::new(&p, &roots, prec);
        let mut remaining: Vec<usize> = (0..roots.len()).collect();
        let mut q_rem = search.q.clone();
        let mut out = Vec::new();
        while let Some(&first) = remaining.first() {
            let (g, f, used) = search.factor_with(&q_rem, &remaining, first)?;
            q_rem = IntPoly::new(
                q_rem
                    .to_rat()
                    .div_rem(&f.to_rat())
                    .0
                    .coeffs()
                    .iter()
                    .map(|c| c.to_integer())
                    .collect(),
            );
            remaining.retain(|i| !used.contains(i));
            out.push(g);
        }
        out.sort_by_key(|f| (f.degree(), f.coeffs_desc()));
        Ok(out)
    })
}

/// Irreducibility over the rationals. Non-squarefree input is reducible.
pub fn is_irreducible(p: &IntPoly, policy: &PrecisionPolicy) -> Result<bool> {
    if p.degree() == 0 {
        return Ok(false);
    }
    if squarefree_part(p).degree() != p.degree() {
        return Ok(false);
    }
    Ok(irreducible_factors(p, policy)?.len() == 1)
}

/// Minimal polynomial of the root of `p` enclosed by `target`.
pub fn minimal_polynomial_of_root(
    p: &IntPoly,
    target: &ComplexBall,
    policy: &PrecisionPolicy,
) -> Result<IntPoly> {
    require_squarefree(p)?;
    let p = p.primitive();
    policy.escalate(|prec| {
        let roots = isolate_roots(&p, prec)?;
        let hits: Vec<usize> = (0..roots.len())
            .filter(|&i| boxes_overlap(&roots[i], target))
            .collect();
        let first = match hits.as_slice() {
            [i] => *i,
            [] => {
                return Err(Error::precondition(
                    "target enclosure does not meet any root of the polynomial",
                ))
            }
            _ => {
                return Err(Error::Uncertified {
                    what: "target enclosure meets several roots",
                    bits: prec,
                })
            }
        };
        let search = MonicSearch::new(&p, &roots, prec);
        let remaining: Vec<usize> = (0..roots.len()).collect();
        Ok(search.factor_with(&search.q, &remaining, first)?.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(desc: &[i64]) -> IntPoly {
        IntPoly::from_desc(desc)
    }

    #[test]
    fn golden_ratio_roots() {
        let roots = isolate_roots(&p(&[1, -1, -1]), 128).unwrap();
        assert_eq!(roots.len(), 2);
        let phi = CertifiedReal::phi(128);
        assert!(roots[0].re.overlaps(&phi));
        assert!(roots[0].im.contains_zero());
        assert!(roots[0].re.rad().to_f64() < 1e-30);
    }

    #[test]
    fn cyclotomic_roots_on_unit_circle() {
        // x^4 + x^3 + x^2 + x + 1
        let roots = isolate_roots(&p(&[1, 1, 1, 1, 1]), 128).unwrap();
        for r in &roots {
            let m = r.abs().unwrap();
            assert!(m.contains_int(&BigInt::from(1)));
        }
    }

    #[test]
    fn unresolvable_cluster_is_reported() {
        // (x - 1)(2^80 x - 2^80 - 1): two roots 2^-80 apart.
        let two80 = BigInt::from(1) << 80u32;
        let q = p(&[1, -1]).mul(&IntPoly::from_desc(&[two80.clone(), -two80 - 1]));
        assert!(matches!(
            isolate_roots(&q, 64),
            Err(Error::Uncertified { .. })
        ));
    }

    #[test]
    fn factors_product_of_irreducibles() {
        let a = p(&[1, 0, -2]); // x^2 - 2
        let b = p(&[3, -1]); // 3x - 1
        let c = p(&[1, 1, 1]); // x^2 + x + 1
        let prod = a.mul(&b).mul(&c);
        let f = irreducible_factors(&prod, &PrecisionPolicy::fixed(256)).unwrap();
        assert_eq!(f, vec![b, a, c.clone()]);
        assert!(is_irreducible(&c, &PrecisionPolicy::fixed(128)).unwrap());
        assert!(!is_irreducible(&prod, &PrecisionPolicy::fixed(128)).unwrap());
    }

    #[test]
    fn minimal_polynomial_of_sqrt2() {
        let prod = p(&[1, 0, -2]).mul(&p(&[1, 0, -3]));
        let s2 = CertifiedReal::from_i64(2, 128).sqrt().unwrap();
        let mp = minimal_polynomial_of_root(&prod, &ComplexBall::real(s2), &PrecisionPolicy::fixed(128))
            .unwrap();
        assert_eq!(mp, p(&[1, 0, -2]));
    }

    #[test]
    fn combinations_enumerate_all() {
        assert_eq!(Combinations::new(4, 2).count(), 6);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }
}
