//! Logarithmic heights, the lower bound for linear forms in logarithms,
//! and the explicit chains that turn it into bounds on `n` and `k`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::algebraic::{char_poly, dominant_root_at};
use crate::ball::{CertifiedReal, ComplexBall, DecimalBall, Mag, PrecisionPolicy};
use crate::error::{Error, Result};
use crate::poly::{bareiss_det, companion, interpolate, matrix, poly_of_matrix, squarefree_part, IntPoly};
use crate::roots::{boxes_overlap, irreducible_factors, isolate_roots, is_irreducible, minimal_polynomial_of_root};

/// Largest order for which the minimal polynomial of `g_k(alpha)` is
/// computed exactly.
pub const GK_MINPOLY_MAX_K: usize = 10;

/// `log max(|p|, q)` for a reduced fraction `p/q`.
pub fn rational_height(p: &BigInt, q: &BigInt, prec: u32) -> Result<CertifiedReal> {
    if !q.is_positive() || !p.gcd(q).is_one() && !p.is_zero() {
        return Err(Error::precondition(format!("{p}/{q} is not a reduced fraction with q >= 1")));
    }
    if p.is_zero() && !q.is_one() {
        return Err(Error::precondition("zero must be written 0/1"));
    }
    let m = p.abs().max(q.clone());
    CertifiedReal::ln_bigint(&m, prec)
}

/// An algebraic number given by its minimal polynomial and an enclosure
/// isolating one of its roots.
#[derive(Clone, Debug)]
pub struct AlgebraicNumber {
    pub min_poly: IntPoly,
    pub root: ComplexBall,
}

impl AlgebraicNumber {
    /// Checks irreducibility and that `root` meets exactly one root.
    pub fn new(min_poly: IntPoly, root: ComplexBall, policy: &PrecisionPolicy) -> Result<Self> {
        let min_poly = min_poly.primitive();
        if !is_irreducible(&min_poly, policy)? {
            return Err(Error::precondition(format!("{min_poly} is not irreducible")));
        }
        policy.escalate(|prec| {
            let boxes = isolate_roots(&min_poly, prec)?;
            match boxes.iter().filter(|b| boxes_overlap(b, &root)).count() {
                1 => Ok(()),
                0 => Err(Error::precondition("enclosure meets no root of the minimal polynomial")),
                _ => Err(Error::Uncertified {
                    what: "enclosure isolates one root",
                    bits: prec,
                }),
            }
        })?;
        Ok(AlgebraicNumber { min_poly, root })
    }

    pub fn rational(p: &BigInt, q: &BigInt) -> Self {
        let poly = IntPoly::new(vec![-p.clone(), q.clone()]).primitive();
        let prec = 64 + p.bits().max(q.bits()) as u32;
        let v = CertifiedReal::from_ratio(p, q, prec).expect("q != 0");
        AlgebraicNumber {
            min_poly: poly,
            root: ComplexBall::real(v),
        }
    }

    pub fn degree(&self) -> usize {
        self.min_poly.degree()
    }
}

/// `(1/d) (log a0 + sum log max(|conjugate|, 1))`.
pub fn algebraic_height(x: &AlgebraicNumber, policy: &PrecisionPolicy) -> Result<CertifiedReal> {
    policy.escalate(|prec| {
        let boxes = isolate_roots(&x.min_poly, prec)?;
        let mut sum = CertifiedReal::ln_bigint(&x.min_poly.leading(), prec)?;
        let one = CertifiedReal::one(prec);
        for b in &boxes {
            let m = b.abs()?;
            if m.certainly_le(&one) {
                continue;
            }
            if m.certainly_gt(&one) {
                sum = &sum + &m.ln()?;
            } else {
                // Straddles 1: log max(|z|, 1) lies in [0, log upper].
                let up = CertifiedReal::exact(m.upper(), prec).ln()?;
                sum = &sum + &CertifiedReal::from_endpoints(&crate::ball::Dyadic::zero(), &up.upper(), prec);
            }
        }
        Ok(sum.div_u64(x.degree() as u64))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeightOp {
    /// `h(x_1 + ... + x_r) <= sum h(x_i) + (r - 1) log 2`.
    Sum,
    /// `h(x_1^(+-1) ... x_r^(+-1)) <= sum h(x_i)`.
    Product,
    /// `h(x^m) = |m| h(x)`.
    Power(i64),
}

pub fn height_calculus_bound(op: HeightOp, inputs: &[CertifiedReal]) -> Result<CertifiedReal> {
    let Some(first) = inputs.first() else {
        return Err(Error::precondition("height calculus needs at least one input"));
    };
    let prec = first.prec();
    let total = inputs
        .iter()
        .fold(CertifiedReal::zero(prec), |acc, h| &acc + h);
    match op {
        HeightOp::Sum => Ok(&total + &CertifiedReal::ln2(prec).mul_i64(inputs.len() as i64 - 1)),
        HeightOp::Product => Ok(total),
        HeightOp::Power(m) => {
            if inputs.len() != 1 {
                return Err(Error::precondition("power rule takes a single height"));
            }
            Ok(first.mul_i64(m.abs()))
        }
    }
}

/// Upper bound for `h(d (phi + 2) / 9)`: `h(9) + h(d) + (h(phi) + h(2) + log 2)`.
pub fn golden_coefficient_height_bound(d: u8, prec: u32) -> Result<CertifiedReal> {
    let h_phi = CertifiedReal::phi(prec).ln()?.mul_2exp(-1);
    let h_two = CertifiedReal::ln2(prec);
    let shifted = height_calculus_bound(HeightOp::Sum, &[h_phi, h_two])?;
    let h9 = CertifiedReal::ln_bigint(&BigInt::from(9), prec)?;
    let hd = CertifiedReal::ln_bigint(&BigInt::from(d.max(1)), prec)?;
    height_calculus_bound(HeightOp::Product, &[h9, hd, shifted])
}

/// `Res_x(char_poly, y * ((k+1)x^2 - 3kx + k - 1) - (x - 1))`, whose roots
/// are `g_k` at every root of the characteristic polynomial.
pub fn gk_resultant(k: usize) -> Result<IntPoly> {
    let psi = char_poly(k)?.poly;
    let c = companion(&psi);
    let den = IntPoly::from_desc(&[k as i64 + 1, -3 * k as i64, k as i64 - 1]);
    let dc = poly_of_matrix(&den, &c);
    let id = matrix::identity(k);
    let shifted = matrix::lin_comb(&[(BigInt::one(), &c), (-BigInt::one(), &id)]);
    let xs: Vec<BigInt> = (0..=k as i64).map(BigInt::from).collect();
    let ys: Vec<BigInt> = xs
        .iter()
        .map(|y| bareiss_det(matrix::lin_comb(&[(y.clone(), &dc), (-BigInt::one(), &shifted)])))
        .collect();
    Ok(interpolate(&xs, &ys).to_primitive_int())
}

/// Primitive minimal polynomial of `g_k(alpha)`.
pub fn gk_minimal_polynomial(k: usize, policy: &PrecisionPolicy) -> Result<IntPoly> {
    if !(3..=GK_MINPOLY_MAX_K).contains(&k) {
        return Err(Error::precondition(format!(
            "minimal polynomial of g_k(alpha) is computed for 3 <= k <= {GK_MINPOLY_MAX_K}, got {k}"
        )));
    }
    let res = squarefree_part(&gk_resultant(k)?);
    let g = policy.escalate(|prec| Ok(dominant_root_at(k, prec)?.g))?;
    minimal_polynomial_of_root(&res, &ComplexBall::real(g), policy)
}

/// Whether the characteristic polynomial is irreducible (small k only).
pub fn char_poly_irreducible(k: usize, policy: &PrecisionPolicy) -> Result<bool> {
    if k > GK_MINPOLY_MAX_K {
        return Err(Error::precondition(format!(
            "exact factorization is limited to k <= {GK_MINPOLY_MAX_K}"
        )));
    }
    Ok(irreducible_factors(&char_poly(k)?.poly, policy)?.len() == 1)
}

/// `h(alpha) = log(alpha) / k`, valid when the characteristic polynomial is
/// irreducible.
pub fn dominant_root_height(k: usize, prec: u32) -> Result<CertifiedReal> {
    Ok(dominant_root_at(k, prec)?.alpha.ln()?.div_u64(k as u64))
}

#[derive(Clone, Debug)]
pub struct LinearFormTerm {
    pub gamma: CertifiedReal,
    /// Upper bound for `h(gamma)`.
    pub height: CertifiedReal,
    /// The `A_i` used in the bound.
    pub a: CertifiedReal,
    pub exponent: Option<BigInt>,
}

/// `gamma_1^b_1 ... gamma_t^b_t - 1` over a number field of degree `D`.
#[derive(Clone, Debug)]
pub struct LinearFormInstance {
    pub field_degree: u64,
    pub terms: Vec<LinearFormTerm>,
    /// Bound `B >= max |b_i|`.
    pub exponent_bound: CertifiedReal,
}

/// `exp(-exponent)` with `exponent = coefficient * (1 + log B)`. The value
/// itself underflows for realistic inputs, so the exponent is the primary
/// result.
#[derive(Clone, Debug)]
pub struct MatveevBound {
    /// `1.4 * 30^(t+3) * t^4.5 * D^2 (1 + log D) * A_1 ... A_t`.
    pub coefficient: CertifiedReal,
    pub log_factor: CertifiedReal,
    pub exponent: CertifiedReal,
}

impl MatveevBound {
    /// The lower bound `exp(-exponent)` as a ball, when representable.
    pub fn value(&self) -> Result<CertifiedReal> {
        self.exponent.negate().exp()
    }
}

impl LinearFormTerm {
    /// Term whose `A` is the smallest exact value certified to dominate
    /// `D h(gamma)`, `|log gamma|` and 0.16.
    pub fn dominating(
        gamma: CertifiedReal,
        height: CertifiedReal,
        field_degree: u64,
        exponent: Option<BigInt>,
    ) -> Result<Self> {
        let prec = gamma.prec();
        let a = requirements(&gamma, &height, field_degree)?
            .into_iter()
            .map(|(r, _)| r.upper())
            .max()
            .expect("three requirements");
        // Keep every bit of the endpoint so the ball is exactly that value.
        let bits = prec.max(a.bits() as u32 + 1);
        Ok(LinearFormTerm {
            gamma,
            height,
            a: CertifiedReal::exact(a, bits),
            exponent,
        })
    }
}

fn requirements(
    gamma: &CertifiedReal,
    height: &CertifiedReal,
    field_degree: u64,
) -> Result<[(CertifiedReal, &'static str); 3]> {
    let prec = gamma.prec();
    Ok([
        (height.mul_int(&BigInt::from(field_degree)), "D h(gamma)"),
        (gamma.ln()?.abs(), "|log gamma|"),
        (CertifiedReal::from_decimal("0.16", prec)?, "0.16"),
    ])
}

impl LinearFormInstance {
    pub fn t(&self) -> usize {
        self.terms.len()
    }

    /// Checks `A_i >= max(D h(gamma_i), |log gamma_i|, 0.16)` and
    /// `B >= |b_i|`, as far as certified comparisons decide them.
    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() || self.field_degree == 0 {
            return Err(Error::precondition("linear form needs t >= 1 and D >= 1"));
        }
        for (i, term) in self.terms.iter().enumerate() {
            let prec = term.a.prec();
            for (lhs, what) in requirements(&term.gamma, &term.height, self.field_degree)? {
                if !lhs.certainly_le(&term.a) {
                    return Err(Error::precondition(format!(
                        "A_{} = {} is not certified >= {what}",
                        i + 1,
                        term.a.to_decimal(12).mid
                    )));
                }
            }
            if let Some(b) = &term.exponent {
                let b = CertifiedReal::from_bigint(&b.abs(), prec);
                if !b.certainly_le(&self.exponent_bound) {
                    return Err(Error::precondition(format!("B is below |b_{}|", i + 1)));
                }
            }
        }
        Ok(())
    }

    pub fn coefficient(&self, prec: u32) -> Result<CertifiedReal> {
        let t = self.t() as i64;
        let d = CertifiedReal::from_bigint(&BigInt::from(self.field_degree), prec);
        let t_pow = CertifiedReal::from_i64(t, prec)
            .pow(&CertifiedReal::from_i64(9, prec).mul_2exp(-1))?;
        let mut c = CertifiedReal::from_decimal("1.4", prec)?;
        c = &c * &CertifiedReal::from_i64(30, prec).powi(t + 3)?;
        c = &c * &t_pow;
        c = &c * &d.sqr();
        c = &c * &d.ln()?.add_i64(1);
        for term in &self.terms {
            c = &c * &term.a;
        }
        Ok(c)
    }
}

pub fn matveev_lower_bound(instance: &LinearFormInstance) -> Result<MatveevBound> {
    instance.validate()?;
    let prec = instance.exponent_bound.prec();
    let coefficient = instance.coefficient(prec)?;
    let log_factor = instance.exponent_bound.ln()?.add_i64(1);
    let exponent = &coefficient * &log_factor;
    Ok(MatveevBound {
        coefficient,
        log_factor,
        exponent,
    })
}

/// If `A >= 3` and `n / log n < A` then `n < 2 A log A`.
pub fn n_over_log_n_solve(a: &CertifiedReal) -> Result<CertifiedReal> {
    let three = CertifiedReal::from_i64(3, a.prec());
    if !three.certainly_le(a) {
        return Err(Error::precondition(format!(
            "n/log n bound needs A >= 3, got {}",
            a.to_decimal(10).mid
        )));
    }
    Ok((a * &a.ln()?).mul_2exp(1))
}

/// Which `A_1` to use for the term `10^m` in the small-k instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstHeightVariant {
    /// `k log 10`, as required by `A_1 >= D h(10)`.
    #[default]
    KLog10,
    /// `k log 2`, kept for comparison; fails validation.
    KLog2,
}

fn dec(s: &str, prec: u32) -> CertifiedReal {
    CertifiedReal::from_decimal(s, prec).expect("constant literal")
}

/// Linear-form instance for `10^m alpha^-n (9 g_k(alpha) / d)^-1 - 1` with
/// the exponent bound `B = n` supplied by the caller.
///
/// Heights: `h(10) = log 10`, `h(alpha) = log(alpha) / k`, and
/// `h(9 g_k(alpha) / d) <= log 81 + 4 log k <= 8 log k`, the last step being
/// `k^4 >= 81`. The constant term is represented by `d = 1`, which gives the
/// largest `|log|`; the height bound covers every digit.
pub fn small_k_instance(
    k: usize,
    n_bound: &CertifiedReal,
    variant: FirstHeightVariant,
    prec: u32,
) -> Result<LinearFormInstance> {
    if k < 3 || BigInt::from(k).pow(4) < BigInt::from(81) {
        return Err(Error::precondition(format!("needs k >= 3, got {k}")));
    }
    let d = k as u64;
    let kb = CertifiedReal::from_i64(k as i64, prec);
    let ln_k = kb.ln()?;
    let ln10 = CertifiedReal::ln10(prec);
    let root = dominant_root_at(k, prec)?;
    let first = match variant {
        FirstHeightVariant::KLog10 => LinearFormTerm::dominating(
            CertifiedReal::from_i64(10, prec),
            ln10.clone(),
            d,
            None,
        )?,
        FirstHeightVariant::KLog2 => LinearFormTerm {
            gamma: CertifiedReal::from_i64(10, prec),
            height: ln10.clone(),
            a: &kb * &CertifiedReal::ln2(prec),
            exponent: None,
        },
    };
    let ln3 = CertifiedReal::ln_bigint(&BigInt::from(3), prec)?;
    let mut second = LinearFormTerm::dominating(
        root.alpha.clone(),
        root.alpha.ln()?.div_u64(d),
        d,
        None,
    )?;
    // A_2 = log 3 > log alpha.
    if !second.a.certainly_le(&ln3) {
        return Err(Error::Uncertified {
            what: "log alpha < log 3",
            bits: prec,
        });
    }
    let up = ln3.upper();
    let bits = prec.max(up.bits() as u32 + 1);
    second.a = CertifiedReal::exact(up, bits);
    let third = LinearFormTerm::dominating(root.g.mul_i64(9), ln_k.mul_i64(8), d, Some(BigInt::one()))?;
    Ok(LinearFormInstance {
        field_degree: d,
        terms: vec![first, second, third],
        exponent_bound: n_bound.clone(),
    })
}

/// Linear-form instance for `10^m phi^-2n (d/9)(phi + 2) - 1` with
/// `B = 2n` supplied by the caller. The constant term is represented by
/// `d = 1`, which gives the largest `|log|`; the height bound
/// `log 324 + (log phi)/2` covers every digit.
pub fn large_k_instance(two_n: &CertifiedReal, prec: u32) -> Result<LinearFormInstance> {
    let phi = CertifiedReal::phi(prec);
    let terms = vec![
        LinearFormTerm::dominating(CertifiedReal::from_i64(10, prec), CertifiedReal::ln10(prec), 2, None)?,
        LinearFormTerm::dominating(phi.clone(), phi.ln()?.mul_2exp(-1), 2, None)?,
        LinearFormTerm::dominating(
            phi.add_i64(2).div_u64(9),
            golden_coefficient_height_bound(9, prec)?,
            2,
            Some(BigInt::one()),
        )?,
    ];
    Ok(LinearFormInstance {
        field_degree: 2,
        terms,
        exponent_bound: two_n.clone(),
    })
}

/// One inequality of a bound chain and whether it was certified.
#[derive(Clone, Debug, Serialize)]
pub struct ChainStep {
    pub claim: String,
    pub holds: bool,
}

pub(crate) fn step(claim: impl Into<String>, lhs: &CertifiedReal, rhs: &CertifiedReal) -> Result<ChainStep> {
    Ok(ChainStep {
        claim: claim.into(),
        holds: lhs.lt_or_uncertified(rhs, "bound chain step")?,
    })
}

#[derive(Clone, Debug)]
pub struct Stage1Bound {
    pub k: usize,
    /// `1.15e15 k^4 (log k)^3`.
    pub closed_form: CertifiedReal,
    /// `2 A log A` with `A = (2c + log 5.5) / log alpha`, `c` the Matveev
    /// coefficient.
    pub rederived: CertifiedReal,
    pub matveev_coefficient: CertifiedReal,
    pub steps: Vec<ChainStep>,
}

impl Stage1Bound {
    pub fn holds(&self) -> bool {
        self.steps.iter().all(|s| s.holds)
    }
}

/// Closed-form `n` bound for `3 <= k`, with an independent re-derivation
/// from the linear-form lower bound.
pub fn stage1_n_bound(k: usize, variant: FirstHeightVariant, policy: &PrecisionPolicy) -> Result<Stage1Bound> {
    if k < 3 {
        return Err(Error::precondition(format!("needs k >= 3, got {k}")));
    }
    policy.escalate(|prec| {
        let kb = CertifiedReal::from_i64(k as i64, prec);
        let ln_k = kb.ln()?;
        let ln_ln_k = ln_k.ln()?;
        let k4 = kb.powi(4)?;
        let closed_form = &(&dec("1.15e15", prec) * &k4) * &ln_k.powi(3)?;

        let inst = small_k_instance(k, &CertifiedReal::from_i64(3, prec), variant, prec)?;
        let valid = inst.validate().is_ok();
        let c = inst.coefficient(prec)?;
        let ln_alpha = dominant_root_at(k, prec)?.alpha.ln()?;
        let ln55 = dec("5.5", prec).ln()?;
        // n log alpha - log 5.5 < c (1 + log n) < 2c log n, and log n >= 1.
        let top = &c.mul_i64(2) + &ln55;
        let a_tight = top.div(&ln_alpha)?;
        let rederived = n_over_log_n_solve(&a_tight)?;

        let k4l2 = &k4 * &ln_k.sqr();
        let mut steps = vec![
            ChainStep {
                claim: "linear-form instance satisfies A_i >= max(D h, |log gamma|, 0.16)".into(),
                holds: valid,
            },
            step(
                "2c + log 5.5 < 1.16e13 k^4 (log k)^2",
                &top,
                &(&dec("1.16e13", prec) * &k4l2),
            )?,
            step(
                "1.16e13 / log alpha < 1.68e13",
                &dec("1.16e13", prec).div(&ln_alpha)?,
                &dec("1.68e13", prec),
            )?,
            step("log 1.68e13 < 30.5", &dec("1.68e13", prec).ln()?, &dec("30.5", prec))?,
            step(
                "30.5 + 4 log k + 2 log log k < 34 log k",
                &(&dec("30.5", prec) + &(&ln_k.mul_i64(4) + &ln_ln_k.mul_i64(2))),
                &ln_k.mul_i64(34),
            )?,
            step("3.36e13 * 34 < 1.15e15", &dec("3.36e13", prec).mul_i64(34), &dec("1.15e15", prec))?,
            step("re-derived bound < closed form", &rederived, &closed_form)?,
        ];
        // The 2A log A step is exact for A = 1.68e13 k^4 (log k)^2: 2A = 3.36e13 ...
        let a_published = &dec("1.68e13", prec) * &k4l2;
        let via_published = n_over_log_n_solve(&a_published)?;
        steps.push(step("2 A log A (A = 1.68e13 k^4 (log k)^2) < closed form", &via_published, &closed_form)?);
        Ok(Stage1Bound {
            k,
            closed_form,
            rederived,
            matveev_coefficient: c,
            steps,
        })
    })
}

#[derive(Clone, Debug)]
pub struct Stage2Bound {
    /// Coefficient multiplying `1 + log 2n` in the exponent.
    pub matveev_coefficient: CertifiedReal,
    /// Re-derived `c` in `k < c log 2n`.
    pub log_coefficient: CertifiedReal,
    /// Largest real solution of `x = 2.16e14 * 40 * log x`.
    pub fixed_point: CertifiedReal,
    /// `3.5e17`.
    pub k_bound: CertifiedReal,
    /// `1.15e15 k^4 (log k)^3` at `k = 3.5e17`.
    pub n_bound: CertifiedReal,
    /// `3n/4` for that `n`.
    pub m_bound: CertifiedReal,
    pub steps: Vec<ChainStep>,
}

impl Stage2Bound {
    pub fn holds(&self) -> bool {
        self.steps.iter().all(|s| s.holds)
    }
}

pub fn stage2_k_bound(policy: &PrecisionPolicy) -> Result<Stage2Bound> {
    policy.escalate(|prec| {
        let inst = large_k_instance(&CertifiedReal::from_i64(10, prec), prec)?;
        inst.validate()?;
        let c = inst.coefficient(prec)?;
        let ln_phi = CertifiedReal::phi(prec).ln()?;
        let ln10 = CertifiedReal::ln10(prec);
        let ln116 = dec("1.16", prec).ln()?;
        // (k/2) log phi - log 1.16 < c (1 + log 2n) < 2c log 2n, log 2n >= log 10.
        let coeff = &c.mul_i64(4).div(&ln_phi)? + &ln116.mul_i64(2).div(&(&ln_phi * &ln10))?;
        let slope = &dec("2.16e14", prec) * &CertifiedReal::from_i64(40, prec);
        let bound = dec("3.5e17", prec);
        let k401 = CertifiedReal::from_i64(401, prec);
        let ln401 = k401.ln()?;

        // Fixed point of x = slope * log x above slope, by Newton on
        // x - slope log x.
        let mut x = bound.clone();
        for _ in 0..40 {
            let f = &x - &(&slope * &x.ln()?);
            let df = CertifiedReal::one(prec) - slope.div(&x)?;
            x = (&x - &f.div(&df)?).midpoint_ball();
        }
        let eps = Mag::pow2(x.mid().top() - prec as i64 / 2).to_dyadic();
        let xl = CertifiedReal::exact(x.mid().sub(&eps), prec);
        let xh = CertifiedReal::exact(x.mid().add(&eps), prec);
        let gl = &xl - &(&slope * &xl.ln()?);
        let gh = &xh - &(&slope * &xh.ln()?);
        if !(gl.is_negative() && gh.is_positive()) {
            return Err(Error::Uncertified {
                what: "fixed point of x = c log x",
                bits: prec,
            });
        }
        let fixed_point = CertifiedReal::from_endpoints(xl.mid(), xh.mid(), prec);

        let ln_b = bound.ln()?;
        let n_bound = &(&dec("1.15e15", prec) * &bound.powi(4)?) * &ln_b.powi(3)?;
        let m_bound = n_bound.mul_i64(3).mul_2exp(-2);
        let steps = vec![
            step("linear-form coefficient < 2.59e13", &c, &dec("2.59e13", prec))?,
            step("re-derived log 2n coefficient < 2.16e14", &coeff, &dec("2.16e14", prec))?,
            step("log 2.3e15 < 35.4", &dec("2.3e15", prec).ln()?, &dec("35.4", prec))?,
            step(
                "35.4 + 4 log k + 3 log log k < 40 log k at k = 401",
                &(&dec("35.4", prec) + &(&ln401.mul_i64(4) + &ln401.ln()?.mul_i64(3))),
                &ln401.mul_i64(40),
            )?,
            step("slope < 3.5e17 (x - slope log x increasing past slope)", &slope, &bound)?,
            step("slope log 3.5e17 < 3.5e17", &(&slope * &ln_b), &bound)?,
            step("n bound at k = 3.5e17 < 1.14e90", &n_bound, &dec("1.14e90", prec))?,
            step("3n/4 < 8.55e89", &m_bound, &dec("8.55e89", prec))?,
        ];
        Ok(Stage2Bound {
            matveev_coefficient: c,
            log_coefficient: coeff,
            fixed_point,
            k_bound: bound,
            n_bound,
            m_bound,
            steps,
        })
    })
}

/// `1.15e15 k^4 (log k)^3` for any real `k >= 3`.
pub fn closed_form_n_bound(k: &CertifiedReal) -> Result<CertifiedReal> {
    let lk = k.ln()?;
    Ok(&(&dec("1.15e15", k.prec()) * &k.powi(4)?) * &lk.powi(3)?)
}

/// Text form of a ball for reports.
pub fn report_value(x: &CertifiedReal) -> DecimalBall {
    x.to_decimal(12)
}

trait MidpointBall {
    fn midpoint_ball(&self) -> CertifiedReal;
}

impl MidpointBall for CertifiedReal {
    fn midpoint_ball(&self) -> CertifiedReal {
        CertifiedReal::exact(self.mid().clone(), self.prec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> PrecisionPolicy {
        PrecisionPolicy::new(256, 8192).unwrap()
    }

    fn close(x: &CertifiedReal, v: f64, rel: f64) -> bool {
        ((x.to_f64() - v) / v).abs() < rel
    }

    #[test]
    fn rational_heights() {
        let h = rational_height(&BigInt::from(10), &BigInt::one(), 128).unwrap();
        assert!(h.overlaps(&CertifiedReal::ln10(128)));
        let h = rational_height(&BigInt::from(-3), &BigInt::from(7), 128).unwrap();
        assert!(close(&h, 7f64.ln(), 1e-12));
        assert!(rational_height(&BigInt::one(), &BigInt::one(), 64).unwrap().contains_zero());
        assert!(rational_height(&BigInt::from(2), &BigInt::from(4), 64).is_err());
    }

    #[test]
    fn heights_of_phi_and_two() {
        let phi = AlgebraicNumber::new(
            IntPoly::from_desc(&[1, -1, -1]),
            ComplexBall::real(CertifiedReal::phi(128)),
            &pol(),
        )
        .unwrap();
        let h = algebraic_height(&phi, &pol()).unwrap();
        assert!(h.overlaps(&CertifiedReal::phi(256).ln().unwrap().mul_2exp(-1)));
        let two = AlgebraicNumber::rational(&BigInt::from(2), &BigInt::one());
        let h = algebraic_height(&two, &pol()).unwrap();
        assert!(h.overlaps(&CertifiedReal::ln2(256)));
    }

    #[test]
    fn height_of_dominant_root_matches_log_over_k() {
        for k in [3usize, 5] {
            let a = dominant_root_at(k, 256).unwrap().alpha;
            let x = AlgebraicNumber::new(char_poly(k).unwrap().poly, ComplexBall::real(a), &pol()).unwrap();
            let h = algebraic_height(&x, &pol()).unwrap();
            assert!(h.overlaps(&dominant_root_height(k, 256).unwrap()));
        }
    }

    #[test]
    fn calculus_rules() {
        let prec = 128;
        let hphi = CertifiedReal::phi(prec).ln().unwrap().mul_2exp(-1);
        let p10 = height_calculus_bound(HeightOp::Power(10), std::slice::from_ref(&hphi)).unwrap();
        assert!(p10.overlaps(&CertifiedReal::phi(prec).ln().unwrap().mul_i64(5)));
        let b = golden_coefficient_height_bound(9, prec).unwrap();
        let expected = &CertifiedReal::from_i64(324, prec).ln().unwrap() + &hphi;
        assert!(b.overlaps(&expected));
    }

    #[test]
    fn gk_minimal_polynomials_small_k() {
        for k in 3..=5 {
            let mp = gk_minimal_polynomial(k, &pol()).unwrap();
            assert!(mp.is_primitive());
            assert!(mp.degree() <= k);
            let g = dominant_root_at(k, 256).unwrap().g;
            assert!(mp.eval_ball(&g).contains_zero(), "k = {k}");
            let x = AlgebraicNumber::new(mp, ComplexBall::real(g), &pol()).unwrap();
            let h = algebraic_height(&x, &pol()).unwrap();
            let lim = CertifiedReal::from_i64(k as i64, 256).ln().unwrap().mul_i64(4);
            assert!(h.certainly_lt(&lim), "k = {k}");
        }
        assert!(gk_minimal_polynomial(11, &pol()).is_err());
    }

    #[test]
    fn char_poly_small_k_irreducible() {
        for k in 2..=6 {
            assert!(char_poly_irreducible(k, &pol()).unwrap(), "k = {k}");
        }
    }

    #[test]
    fn matveev_examples() {
        let prec = 256;
        // t = 1, D = 1, B = e, A_1 = 0.16: exp(-1.4 * 30^4 * 1 * 1 * 2 * 0.16).
        let inst = LinearFormInstance {
            field_degree: 1,
            terms: vec![LinearFormTerm::dominating(
                CertifiedReal::from_decimal("1.1", prec).unwrap(),
                CertifiedReal::zero(prec),
                1,
                None,
            )
            .unwrap()],
            exponent_bound: CertifiedReal::e(prec),
        };
        let b = matveev_lower_bound(&inst).unwrap();
        let want = 1.4 * 30f64.powi(4) * 2.0 * 0.16;
        assert!(close(&b.exponent, want, 1e-12));
        assert!(close(&b.value().unwrap().ln().unwrap().negate(), want, 1e-12));

        let two_n = CertifiedReal::from_i64(10, prec);
        let b = matveev_lower_bound(&large_k_instance(&two_n, prec).unwrap()).unwrap();
        assert!(close(&b.coefficient, 2.588e13, 1e-3));
    }

    #[test]
    fn n_over_log_n() {
        let a = CertifiedReal::from_i64(3, 128);
        let n = n_over_log_n_solve(&a).unwrap();
        assert!(close(&n, 6.0 * 3f64.ln(), 1e-12));
        assert!(n_over_log_n_solve(&CertifiedReal::from_i64(2, 64)).is_err());
    }

    #[test]
    fn stage1_chain_small_k() {
        let b = stage1_n_bound(3, FirstHeightVariant::KLog10, &pol()).unwrap();
        assert!(b.holds(), "{:?}", b.steps);
        assert!(close(&b.closed_form, 1.235e17, 1e-3));
        assert!(b.rederived.certainly_lt(&b.closed_form));
    }

    #[test]
    fn stage2_chain() {
        let b = stage2_k_bound(&pol()).unwrap();
        assert!(b.holds(), "{:?}", b.steps);
        assert!(close(&b.matveev_coefficient, 2.59e13, 2e-3));
        assert!(close(&b.log_coefficient, 2.16e14, 5e-3));
        assert!(b.fixed_point.certainly_lt(&b.k_bound));
    }
}
