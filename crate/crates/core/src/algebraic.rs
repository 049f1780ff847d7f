//! The characteristic polynomial `x^k - 2x^(k-1) - x^(k-2) - ... - 1`, its
//! dominant root, the coefficient function
//! `g_k(z) = (z - 1) / ((k + 1) z^2 - 3kz + k - 1)`, and certified checks of
//! the analytic facts the bounds rely on.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::ops::RangeInclusive;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::ball::{CertifiedReal, ComplexBall, Dyadic, Mag, PrecisionPolicy};
use crate::bigseq::{generate, RecurrenceSpec};
use crate::error::{Error, Result};
use crate::poly::IntPoly;
use crate::roots::{boxes_overlap, isolate_roots};

/// Largest order for which the full root set is computed.
pub const ALL_ROOTS_MAX_K: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly {
    pub k: usize,
    pub poly: IntPoly,
}

pub fn char_poly(k: usize) -> Result<CharPoly> {
    check_order(k)?;
    let mut desc = vec![BigInt::one(), BigInt::from(-2)];
    desc.extend(std::iter::repeat_n(BigInt::from(-1), k - 1));
    Ok(CharPoly {
        k,
        poly: IntPoly::from_desc(&desc),
    })
}

fn check_order(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::precondition(format!("order k must be >= 2, got {k}")));
    }
    Ok(())
}

/// `(x - 1) * char_poly = x^(k-1) (x^2 - 3x + 1) + 1`, evaluated in that
/// factored form.
fn shifted_eval(k: usize, x: &CertifiedReal) -> Result<CertifiedReal> {
    let quad = (&(&x.sqr() - &x.mul_i64(3)) + &CertifiedReal::one(x.prec())).clone();
    Ok((&x.powi(k as i64 - 1)? * &quad).add_i64(1))
}

/// `(k + 1) x^2 - 3kx + k - 1`, the denominator of `g_k`; the derivative of
/// the shifted polynomial is `x^(k-2)` times this.
fn g_denominator(k: usize, x: &CertifiedReal) -> CertifiedReal {
    let k = k as i64;
    (&x.sqr().mul_i64(k + 1) - &x.mul_i64(3 * k)).add_i64(k - 1)
}

fn g_denominator_complex(k: usize, z: &ComplexBall) -> ComplexBall {
    let k = k as i64;
    let prec = z.prec();
    let a = z.sqr().scale(&CertifiedReal::from_i64(k + 1, prec));
    let b = z.scale(&CertifiedReal::from_i64(3 * k, prec));
    (&a - &b).add_real(&CertifiedReal::from_i64(k - 1, prec))
}

pub fn g_k_eval(k: usize, z: &CertifiedReal) -> Result<CertifiedReal> {
    check_order(k)?;
    let num = z.add_i64(-1);
    if num.is_exact() && num.mid().is_zero() {
        return Ok(CertifiedReal::zero(z.prec()));
    }
    num.div(&g_denominator(k, z)).map_err(|_| Error::Uncertified {
        what: "g_k denominator straddles zero",
        bits: z.prec(),
    })
}

pub fn g_k_eval_complex(k: usize, z: &ComplexBall) -> Result<ComplexBall> {
    check_order(k)?;
    let num = z.add_real(&CertifiedReal::from_i64(-1, z.prec()));
    num.div(&g_denominator_complex(k, z)).map_err(|_| Error::Uncertified {
        what: "g_k denominator straddles zero",
        bits: z.prec(),
    })
}

#[derive(Clone, Debug)]
pub struct DominantRoot {
    pub k: usize,
    pub alpha: CertifiedReal,
    /// `phi^2 (1 - phi^-k)`.
    pub lower: CertifiedReal,
    /// `phi^2`.
    pub upper: CertifiedReal,
    /// `g_k(alpha)`.
    pub g: CertifiedReal,
}

type RootCache = RwLock<HashMap<(usize, u32), DominantRoot>>;

fn root_cache() -> &'static RootCache {
    static CACHE: OnceLock<RootCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Dominant root at the given precision, escalating per `policy`.
pub fn dominant_root(k: usize, policy: &PrecisionPolicy) -> Result<DominantRoot> {
    check_order(k)?;
    policy.escalate(|prec| dominant_root_at(k, prec))
}

/// Single-precision attempt; `Uncertified` if the enclosure cannot be
/// placed strictly inside the analytic bracket at `prec` bits.
pub fn dominant_root_at(k: usize, prec: u32) -> Result<DominantRoot> {
    check_order(k)?;
    if let Some(hit) = root_cache().read().expect("cache lock").get(&(k, prec)) {
        return Ok(hit.clone());
    }
    let root = compute_dominant_root(k, prec)?;
    root_cache()
        .write()
        .expect("cache lock")
        .entry((k, prec))
        .or_insert_with(|| root.clone());
    Ok(root)
}

fn compute_dominant_root(k: usize, prec: u32) -> Result<DominantRoot> {
    let kbits = usize::BITS - k.leading_zeros();
    let wp = prec + 32 + kbits;

    // The shifted polynomial has exactly two positive roots (two sign
    // changes), 1 and alpha, and is negative at 2 and positive at 3.
    let bp = 128 + kbits;
    let mut lo = Dyadic::from_i64(2);
    let mut hi = Dyadic::from_i64(3);
    for _ in 0..64 {
        let mid = lo.add(&hi).mul_2exp(-1);
        let v = shifted_eval(k, &CertifiedReal::exact(mid.clone(), bp))?;
        if v.is_positive() {
            hi = mid;
        } else if v.is_negative() {
            lo = mid;
        } else {
            lo = mid.clone();
            hi = mid;
            break;
        }
    }
    let mut x = lo.add(&hi).mul_2exp(-1);
    let mut p = 64u32;
    loop {
        p = (p * 2).min(wp);
        let steps = if p == wp { 3 } else { 1 };
        for _ in 0..steps {
            let xb = CertifiedReal::exact(x.clone(), p);
            let f = shifted_eval(k, &xb)?;
            let df = &xb.powi(k as i64 - 2)? * &g_denominator(k, &xb);
            x = (&xb - &f.div(&df)?).mid().clone();
        }
        if p == wp {
            break;
        }
    }

    let eps = Mag::pow2(-(prec as i64) + 2);
    let e = eps.to_dyadic();
    let left = shifted_eval(k, &CertifiedReal::exact(x.sub(&e), wp))?;
    let right = shifted_eval(k, &CertifiedReal::exact(x.add(&e), wp))?;
    if !(left.is_negative() && right.is_positive()) {
        return Err(Error::Uncertified {
            what: "sign change around the dominant root",
            bits: prec,
        });
    }
    let alpha = CertifiedReal::new(x, eps, prec);

    let phi = CertifiedReal::phi(prec + 16);
    let upper = phi.sqr();
    let lower = &upper * &(&CertifiedReal::one(prec + 16) - &phi.powi(-(k as i64))?);
    let (upper, lower) = (upper.with_prec(prec), lower.with_prec(prec));
    let two = CertifiedReal::from_i64(2, prec);
    let three = CertifiedReal::from_i64(3, prec);
    if !(alpha.certainly_gt(&lower)
        && alpha.certainly_lt(&upper)
        && alpha.certainly_gt(&two)
        && alpha.certainly_lt(&three))
    {
        return Err(Error::Uncertified {
            what: "dominant root inside its analytic bracket",
            bits: prec,
        });
    }
    let g = g_k_eval(k, &alpha)?;
    Ok(DominantRoot {
        k,
        alpha,
        lower,
        upper,
        g,
    })
}

/// All roots of the characteristic polynomial; index 0 is the dominant
/// root (an exact-real enclosure), the rest have certified modulus < 1.
#[derive(Clone, Debug)]
pub struct RootSet {
    pub k: usize,
    pub roots: Vec<ComplexBall>,
}

impl RootSet {
    /// Coefficients of `prod (x - root) - char_poly`, lowest degree first.
    pub fn reconstruction_residual(&self) -> Vec<ComplexBall> {
        let prec = self.roots[0].prec();
        let mut coeffs = vec![ComplexBall::from_i64(1, prec)];
        for r in &self.roots {
            let mut next = vec![ComplexBall::from_i64(0, prec); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] = &next[i + 1] + c;
                next[i] = &next[i] - &(c * r);
            }
            coeffs = next;
        }
        let target = char_poly(self.k).expect("k validated").poly;
        coeffs
            .iter()
            .zip(target.coeffs())
            .map(|(c, t)| c.add_real(&CertifiedReal::from_bigint(&-t, prec)))
            .collect()
    }

    pub fn reconstructs_char_poly(&self) -> bool {
        self.reconstruction_residual().iter().all(|c| c.contains_zero())
    }
}

pub fn all_roots(k: usize, policy: &PrecisionPolicy) -> Result<RootSet> {
    check_order(k)?;
    if k > ALL_ROOTS_MAX_K {
        return Err(Error::precondition(format!(
            "full root sets are limited to k <= {ALL_ROOTS_MAX_K}, got {k}"
        )));
    }
    policy.escalate(|prec| all_roots_at(k, prec))
}

fn all_roots_at(k: usize, prec: u32) -> Result<RootSet> {
    let boxes = isolate_roots(&char_poly(k)?.poly, prec)?;
    let alpha = ComplexBall::real(dominant_root_at(k, prec)?.alpha);
    let hits: Vec<usize> = (0..boxes.len())
        .filter(|&i| boxes_overlap(&boxes[i], &alpha))
        .collect();
    if hits.len() != 1 {
        return Err(Error::Uncertified {
            what: "matching the dominant root among all roots",
            bits: prec,
        });
    }
    let one = Mag::from_u64(1);
    let mut roots = vec![alpha];
    for (i, b) in boxes.into_iter().enumerate() {
        if i == hits[0] {
            continue;
        }
        if b.abs_upper() >= one {
            return Err(Error::Uncertified {
                what: "non-dominant root inside the unit disk",
                bits: prec,
            });
        }
        roots.push(b);
    }
    Ok(RootSet { k, roots })
}

/// `sum_j g_k(root_j) root_j^n` over all roots, narrowed until it pins down
/// a single integer.
pub fn binet_full_eval(k: usize, n: i64, policy: &PrecisionPolicy) -> Result<CertifiedReal> {
    if n < 2 - k as i64 {
        return Err(Error::precondition(format!("index n must be >= {}, got {n}", 2 - k as i64)));
    }
    let _ = all_roots(k, policy)?;
    policy.escalate(|prec| {
        let set = all_roots_at(k, prec)?;
        let mut sum = ComplexBall::from_i64(0, prec);
        for r in &set.roots {
            sum = &sum + &(&g_k_eval_complex(k, r)? * &r.powi(n)?);
        }
        if sum.re.unique_int().is_none() {
            return Err(Error::Uncertified {
                what: "Binet sum too wide to fix an integer",
                bits: prec,
            });
        }
        Ok(sum.re)
    })
}

/// Whether every Binet coefficient `g_k(root_j)` has modulus at most 2.
pub fn binet_coefficient_bound_check(k: usize, policy: &PrecisionPolicy) -> Result<bool> {
    let _ = all_roots(k, policy)?;
    policy.escalate(|prec| {
        let set = all_roots_at(k, prec)?;
        let two = Mag::from_u64(2);
        for r in &set.roots {
            let c = g_k_eval_complex(k, r)?;
            if c.abs_upper() <= two {
                continue;
            }
            let m = c.abs()?;
            if m.certainly_gt(&CertifiedReal::from_i64(2, prec)) {
                return Ok(false);
            }
            return Err(Error::Uncertified {
                what: "Binet coefficient against 2",
                bits: prec,
            });
        }
        Ok(true)
    })
}

fn sequence_slice(k: usize, range: &RangeInclusive<i64>) -> Result<Vec<(i64, BigInt)>> {
    let spec = RecurrenceSpec::pell(k)?;
    if *range.start() < spec.first_index() {
        return Err(Error::precondition(format!(
            "range must start at or after {}, got {}",
            spec.first_index(),
            range.start()
        )));
    }
    if range.is_empty() {
        return Ok(vec![]);
    }
    let w = generate(&spec, (*range.end()).max(0))?;
    Ok(range
        .clone()
        .map(|n| (n, w.term(n).expect("in window").clone()))
        .collect())
}

/// Largest `|P_n - g_k(alpha) alpha^n|` over the range, as a ball.
pub fn binet_error_check(
    k: usize,
    n_range: RangeInclusive<i64>,
    policy: &PrecisionPolicy,
) -> Result<CertifiedReal> {
    let terms = sequence_slice(k, &n_range)?;
    policy.escalate(|prec| {
        let root = dominant_root_at(k, prec)?;
        let mut worst = CertifiedReal::zero(prec);
        let Some(&(n0, _)) = terms.first() else {
            return Ok(worst);
        };
        let mut pow = root.alpha.powi(n0)?;
        for (_, p) in &terms {
            let err = (&CertifiedReal::from_bigint(p, prec) - &(&root.g * &pow)).abs();
            worst = worst.max(&err);
            pow = &pow * &root.alpha;
        }
        if worst.rad() > Mag::pow2(-32) {
            return Err(Error::Uncertified {
                what: "Binet error enclosure too wide",
                bits: prec,
            });
        }
        Ok(worst)
    })
}

/// Whether `alpha^(n-2) <= P_n <= alpha^(n-1)` over the range (n >= 1).
pub fn growth_bounds_check(
    k: usize,
    n_range: RangeInclusive<i64>,
    policy: &PrecisionPolicy,
) -> Result<bool> {
    if *n_range.start() < 1 {
        return Err(Error::precondition("growth bounds need n >= 1"));
    }
    let terms = sequence_slice(k, &n_range)?;
    policy.escalate(|prec| {
        let alpha = dominant_root_at(k, prec)?.alpha;
        for (n, p) in &terms {
            let p = CertifiedReal::from_bigint(p, prec);
            let below = alpha.powi(n - 2)?;
            let above = alpha.powi(n - 1)?;
            for (a, b) in [(&below, &p), (&p, &above)] {
                match a.certified_cmp(b) {
                    Some(Ordering::Less | Ordering::Equal) => {}
                    Some(Ordering::Greater) => return Ok(false),
                    None => {
                        return Err(Error::Uncertified {
                            what: "growth bound comparison",
                            bits: prec,
                        })
                    }
                }
            }
        }
        Ok(true)
    })
}

/// Exact element `a + b*phi` of the golden field, with `phi^2 = phi + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenRational {
    pub a: BigRational,
    pub b: BigRational,
}

impl GoldenRational {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        GoldenRational { a, b }
    }

    pub fn int(a: i64, b: i64) -> Self {
        GoldenRational::new(
            BigRational::from_integer(a.into()),
            BigRational::from_integer(b.into()),
        )
    }

    pub fn phi() -> Self {
        GoldenRational::int(0, 1)
    }

    pub fn add(&self, o: &Self) -> Self {
        GoldenRational::new(&self.a + &o.a, &self.b + &o.b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        GoldenRational::new(&self.a - &o.a, &self.b - &o.b)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let bd = &self.b * &o.b;
        GoldenRational::new(
            &self.a * &o.a + &bd,
            &self.a * &o.b + &self.b * &o.a + bd,
        )
    }

    pub fn scale(&self, c: i64) -> Self {
        let c = BigRational::from_integer(c.into());
        GoldenRational::new(&self.a * &c, &self.b * &c)
    }

    /// Galois conjugate, sending phi to `1 - phi`.
    pub fn conj(&self) -> Self {
        GoldenRational::new(&self.a + &self.b, -self.b.clone())
    }

    pub fn norm(&self) -> BigRational {
        &self.a * &self.a + &self.a * &self.b - &self.b * &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::precondition("inverse of zero in the golden field"));
        }
        let c = self.conj();
        Ok(GoldenRational::new(&c.a / &n, &c.b / &n))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }
}

/// `g_k(phi^2)` computed exactly in the golden field.
pub fn g_k_at_phi_squared(k: usize) -> Result<GoldenRational> {
    check_order(k)?;
    let z = GoldenRational::phi().mul(&GoldenRational::phi());
    let num = z.sub(&GoldenRational::int(1, 0));
    let den = z
        .mul(&z)
        .scale(k as i64 + 1)
        .sub(&z.scale(3 * k as i64))
        .add(&GoldenRational::int(k as i64 - 1, 0));
    num.div(&den)
}

#[derive(Clone, Debug, Serialize)]
pub struct DominantRootReport {
    pub k: usize,
    /// alpha(k) > alpha(k - 1).
    pub increasing: bool,
    /// `phi^2 (1 - phi^-k) < alpha < phi^2`.
    pub bracket: bool,
    /// `g_k(phi^2) = 1 / (phi + 2)` exactly.
    pub golden_identity: bool,
    /// `0.276 < g_k(alpha) < 0.5`.
    pub g_bounds: bool,
}

impl DominantRootReport {
    pub fn all_hold(&self) -> bool {
        self.increasing && self.bracket && self.golden_identity && self.g_bounds
    }
}

fn decide(a: &CertifiedReal, b: &CertifiedReal, what: &'static str) -> Result<bool> {
    a.lt_or_uncertified(b, what)
}

pub fn dominant_root_checks(k: usize, policy: &PrecisionPolicy) -> Result<DominantRootReport> {
    if k < 3 {
        return Err(Error::precondition(format!("needs k >= 3, got {k}")));
    }
    let g_exact = g_k_at_phi_squared(k)?;
    let golden_identity = g_exact
        .mul(&GoldenRational::phi().add(&GoldenRational::int(2, 0)))
        == GoldenRational::int(1, 0);
    policy.escalate(|prec| {
        let cur = dominant_root_at(k, prec)?;
        let prev = dominant_root_at(k - 1, prec)?;
        let increasing = decide(&prev.alpha, &cur.alpha, "alpha(k-1) < alpha(k)")?;
        let bracket = decide(&cur.lower, &cur.alpha, "alpha lower bracket")?
            && decide(&cur.alpha, &cur.upper, "alpha upper bracket")?;
        let lo = CertifiedReal::from_ratio(&BigInt::from(276), &BigInt::from(1000), prec)?;
        let hi = CertifiedReal::one(prec).mul_2exp(-1);
        let g_bounds = decide(&lo, &cur.g, "0.276 < g_k(alpha)")?
            && decide(&cur.g, &hi, "g_k(alpha) < 0.5")?;
        Ok(DominantRootReport {
            k,
            increasing,
            bracket,
            golden_identity,
            g_bounds,
        })
    })
}

/// Split of `g_k(alpha) alpha^n` around its golden-ratio approximation.
#[derive(Clone, Debug)]
pub struct AsymptoticDecomposition {
    pub k: usize,
    pub n: i64,
    /// `alpha^n - phi^(2n)`.
    pub delta: CertifiedReal,
    /// `g_k(alpha) - 1/(phi + 2)`.
    pub eta: CertifiedReal,
    /// `|delta| < phi^(2n) / phi^(k/2)`.
    pub delta_bound: bool,
    /// `|eta| < (3k/2) / phi^k`.
    pub eta_bound: bool,
    /// `g alpha^n - (phi^(2n)/(phi+2) + delta/(phi+2) + eta phi^(2n) + eta delta)`.
    pub identity_residual: CertifiedReal,
}

pub fn asymptotic_decomposition_check(
    k: usize,
    n: i64,
    policy: &PrecisionPolicy,
) -> Result<AsymptoticDecomposition> {
    if k < 30 || n < 5 {
        return Err(Error::precondition(format!(
            "needs k >= 30 and n >= 5, got k = {k}, n = {n}"
        )));
    }
    // n < phi^(k/2), compared as logarithms.
    let p0 = policy.start;
    let ln_n = CertifiedReal::from_i64(n, p0).ln()?;
    let half = CertifiedReal::phi(p0).ln()?.mul_i64(k as i64).mul_2exp(-1);
    if !ln_n.lt_or_uncertified(&half, "n < phi^(k/2)")? {
        return Err(Error::precondition(format!("n = {n} is not below phi^(k/2) for k = {k}")));
    }
    policy.escalate(|prec| {
        let root = dominant_root_at(k, prec)?;
        let phi = CertifiedReal::phi(prec);
        let phi2n = phi.sqr().powi(n)?;
        let alpha_n = root.alpha.powi(n)?;
        let delta = &alpha_n - &phi2n;
        let inv = phi.add_i64(2).recip()?;
        let eta = &root.g - &inv;
        let phi_k = phi.powi(k as i64)?;
        let phi_half_k = phi_k.sqrt()?;
        let delta_bound = decide(&delta.abs(), &phi2n.div(&phi_half_k)?, "|delta| bound")?;
        let eta_lim = CertifiedReal::from_i64(3 * k as i64, prec).mul_2exp(-1).div(&phi_k)?;
        let eta_bound = decide(&eta.abs(), &eta_lim, "|eta| bound")?;
        let rebuilt = &(&(&phi2n * &inv) + &(&delta * &inv)) + &(&(&eta * &phi2n) + &(&eta * &delta));
        let identity_residual = &(&root.g * &alpha_n) - &rebuilt;
        Ok(AsymptoticDecomposition {
            k,
            n,
            delta,
            eta,
            delta_bound,
            eta_bound,
            identity_residual,
        })
    })
}

/// For `k > 400`: `1.15e15 k^4 (log k)^3 < phi^(k/2)` together with
/// `3k(phi+2)/(2 phi^k) < 0.005/phi^(k/2)` and
/// `3k(phi+2)/(2 phi^(3k/2)) < 0.005/phi^(k/2)`, all compared as logarithms.
pub fn large_k_regime_check(k: u64, policy: &PrecisionPolicy) -> Result<bool> {
    if k <= 400 {
        return Err(Error::precondition(format!("needs k > 400, got {k}")));
    }
    let start = PrecisionPolicy {
        start: policy.start.min(256),
        cap: policy.cap,
    };
    start.escalate(|prec| {
        let kb = CertifiedReal::from_bigint(&BigInt::from(k), prec);
        let ln_k = kb.ln()?;
        let ln_phi = CertifiedReal::phi(prec).ln()?;
        let half = (&ln_phi * &kb).mul_2exp(-1);
        let c = CertifiedReal::from_decimal("1.15e15", prec)?.ln()?;
        let lhs1 = &(&c + &ln_k.mul_i64(4)) + &ln_k.ln()?.mul_i64(3);
        let first = decide(&lhs1, &half, "polynomial factor below phi^(k/2)")?;

        let pref = (&kb.mul_i64(3) * &CertifiedReal::phi(prec).add_i64(2))
            .mul_2exp(-1)
            .ln()?;
        let small = CertifiedReal::from_decimal("0.005", prec)?.ln()?;
        let rhs = &small - &half;
        let second = decide(&(&pref - &(&ln_phi * &kb)), &rhs, "phi^-k absorption")?;
        let third = decide(&(&pref - &half.mul_i64(3)), &rhs, "phi^(-3k/2) absorption")?;
        Ok(first && second && third)
    })
}
