//! Continued fractions, the Dujella–Pethő reduction, de Weger's logarithm
//! bound and the three reduction campaigns that shrink the Baker-type
//! bounds to a searchable range.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebraic::dominant_root_at;
use crate::ball::{CertifiedReal, DecimalBall, Dyadic, PrecisionPolicy};
use crate::error::{Error, Result};
use crate::heights::{closed_form_n_bound, report_value, step, ChainStep};

/// Extra convergents tried after the first one with `q > 6M`.
pub const ADVANCE_BUDGET: usize = 40;

/// Certified prefix of the continued fraction of a real enclosed by a ball.
#[derive(Clone, Debug)]
pub struct ContinuedFractionExpansion {
    pub gamma: CertifiedReal,
    pub quotients: Vec<BigInt>,
    /// `(p_i, q_i)` for `i = 0, 1, ...`.
    pub convergents: Vec<(BigInt, BigInt)>,
}

impl ContinuedFractionExpansion {
    /// Expansion of every real in `gamma`: the common prefix of the
    /// expansions of both (exact, dyadic) endpoints. A terminal quotient
    /// is never kept since a rational has two expansions differing there.
    pub fn of_ball(gamma: &CertifiedReal) -> Self {
        let ((ln, ld), (hn, hd)) = gamma.endpoints_ratio();
        let mut lo = rational_quotients(ln, ld);
        let mut hi = rational_quotients(hn, hd);
        lo.pop();
        hi.pop();
        let quotients: Vec<BigInt> = lo
            .into_iter()
            .zip(hi)
            .take_while(|(a, b)| a == b)
            .map(|(a, _)| a)
            .collect();
        let convergents = convergents_of(&quotients);
        ContinuedFractionExpansion {
            gamma: gamma.clone(),
            quotients,
            convergents,
        }
    }

    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    /// Smallest index whose denominator exceeds `bound`.
    pub fn first_index_above(&self, bound: &BigInt) -> Option<usize> {
        self.convergents.iter().position(|(_, q)| q > bound)
    }

    /// Largest certified denominator. No rational with a denominator up to
    /// this value lies in the ball.
    pub fn largest_denominator(&self) -> BigInt {
        self.convergents
            .last()
            .map(|(_, q)| q.clone())
            .unwrap_or_else(BigInt::zero)
    }
}

fn rational_quotients(mut num: BigInt, mut den: BigInt) -> Vec<BigInt> {
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    let mut out = Vec::new();
    while !den.is_zero() {
        let (a, r) = num.div_mod_floor(&den);
        out.push(a);
        num = den;
        den = r;
    }
    out
}

fn convergents_of(quotients: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut out = Vec::with_capacity(quotients.len());
    for a in quotients {
        let p = a * &p1 + &p0;
        let q = a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p.clone());
        q0 = std::mem::replace(&mut q1, q.clone());
        out.push((p, q));
    }
    out
}

/// Expansion of `gamma` reaching past `q_target`. Returns
/// [`Error::Uncertified`] when the enclosure is too wide to get there.
pub fn continued_fraction(gamma: &CertifiedReal, q_target: &BigInt) -> Result<ContinuedFractionExpansion> {
    if q_target < &BigInt::one() {
        return Err(Error::precondition("q_target must be at least 1"));
    }
    let cf = ContinuedFractionExpansion::of_ball(gamma);
    if cf.first_index_above(q_target).is_none() {
        return Err(Error::Uncertified {
            what: "continued fraction reach",
            bits: gamma.prec(),
        });
    }
    Ok(cf)
}

/// `(-log(1 - a)/a) * x_bound`: an upper bound for `|log(1 + x)|` whenever
/// `|x| <= x_bound <= a < 1`.
pub fn deweger_bound(a: &CertifiedReal, x_bound: &CertifiedReal) -> Result<CertifiedReal> {
    let prec = a.prec().max(x_bound.prec());
    let one = CertifiedReal::one(prec);
    if !a.is_positive() || one.certainly_le(a) {
        return Err(Error::precondition("deweger_bound needs 0 < a < 1"));
    }
    if x_bound.is_negative() || x_bound.certainly_gt(a) {
        return Err(Error::precondition("deweger_bound needs 0 <= x_bound <= a"));
    }
    let factor = (&one - a).ln()?.negate().div(a)?;
    Ok(&factor * x_bound)
}

/// Data of `0 < |u gamma - v + mu| < A B^-w` with `u <= M`.
#[derive(Clone, Debug)]
pub struct ReductionInstance {
    pub gamma: CertifiedReal,
    pub mu: CertifiedReal,
    pub a: CertifiedReal,
    pub b: CertifiedReal,
    pub m_bound: BigInt,
}

impl ReductionInstance {
    pub fn validate(&self) -> Result<()> {
        if !self.a.is_positive() {
            return Err(Error::precondition("A must be positive"));
        }
        if !self.b.certainly_gt(&CertifiedReal::one(self.b.prec())) {
            return Err(Error::precondition("B must exceed 1"));
        }
        if self.m_bound < BigInt::one() {
            return Err(Error::precondition("M must be at least 1"));
        }
        Ok(())
    }

    pub fn six_m(&self) -> BigInt {
        &self.m_bound * 6
    }
}

#[derive(Clone, Debug)]
pub struct ReductionOutcome {
    pub index: usize,
    pub q: BigInt,
    pub epsilon: CertifiedReal,
    /// Solutions have `w` strictly below this.
    pub reduced_bound: CertifiedReal,
    /// Convergents skipped past the first with `q > 6M`.
    pub advanced: usize,
}

/// Reduction with a freshly computed expansion and the default budget.
pub fn dujella_petho_reduce(inst: &ReductionInstance) -> Result<ReductionOutcome> {
    inst.validate()?;
    let cf = continued_fraction(&inst.gamma, &inst.six_m())?;
    dujella_petho_with(inst, &cf, ADVANCE_BUDGET)
}

/// Reduction against a precomputed expansion of `inst.gamma`.
///
/// Starts at the first convergent with `q > 6M` and moves on while
/// `eps = ||mu q|| - M ||gamma q||` is not certified positive. After
/// `budget` extra convergents it fails with
/// [`Error::EpsilonNeverPositive`] if every tried `eps` was certainly
/// non-positive, and with [`Error::Uncertified`] otherwise.
pub fn dujella_petho_with(
    inst: &ReductionInstance,
    cf: &ContinuedFractionExpansion,
    budget: usize,
) -> Result<ReductionOutcome> {
    inst.validate()?;
    let prec = inst.gamma.prec();
    let uncertified = |what| Error::Uncertified { what, bits: prec };
    let start = cf
        .first_index_above(&inst.six_m())
        .ok_or_else(|| uncertified("continued fraction reach"))?;
    let m = CertifiedReal::from_bigint(&inst.m_bound, prec);
    let mut ambiguous = false;
    for index in start..=start + budget {
        let Some((_, q)) = cf.convergents.get(index) else {
            return Err(uncertified("convergent supply for epsilon"));
        };
        let qb = CertifiedReal::from_bigint(q, prec);
        let mu_q = (&inst.mu * &qb).dist_to_nearest_int();
        let gamma_q = (&inst.gamma * &qb).dist_to_nearest_int();
        let epsilon = &mu_q - &(&m * &gamma_q);
        if epsilon.is_positive() {
            let ratio = (&inst.a * &qb).div(&epsilon)?;
            let reduced_bound = ratio.ln()?.div(&inst.b.ln()?)?;
            return Ok(ReductionOutcome {
                index,
                q: q.clone(),
                epsilon,
                reduced_bound,
                advanced: index - start,
            });
        }
        if !epsilon.is_negative() && !epsilon.upper().is_zero() {
            ambiguous = true;
        }
    }
    if ambiguous {
        Err(uncertified("sign of epsilon"))
    } else {
        Err(Error::EpsilonNeverPositive { tried: budget + 1 })
    }
}

/// Whether the value produced by `eval` is certifiably nonzero, raising
/// precision until the enclosure excludes zero. An exact zero gives
/// `false`.
pub fn nonvanishing_certify(
    policy: &PrecisionPolicy,
    mut eval: impl FnMut(u32) -> Result<CertifiedReal>,
) -> Result<bool> {
    policy.escalate(|prec| {
        let v = eval(prec)?;
        if v.mid().is_zero() && v.rad().is_zero() {
            return Ok(false);
        }
        if v.contains_zero() {
            return Err(Error::Uncertified {
                what: "nonvanishing",
                bits: prec,
            });
        }
        Ok(true)
    })
}

// ---------------------------------------------------------------------------
// Campaigns

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub policy: PrecisionPolicy,
    pub advance_budget: usize,
    pub checkpoint_dir: Option<PathBuf>,
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            policy: PrecisionPolicy::default(),
            advance_budget: ADVANCE_BUDGET,
            checkpoint_dir: None,
            cancel: None,
        }
    }
}

impl CampaignConfig {
    fn cancelled(&self) -> bool {
        self.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed))
    }
}

/// Outcome of one `(k, d)` reduction, as stored in reports and checkpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub stage: u8,
    /// `None` for the stages where `k` is the unknown.
    pub k: Option<usize>,
    pub d: u8,
    pub m_bound: String,
    pub convergent_index: usize,
    pub q: String,
    pub advanced: usize,
    pub epsilon: DecimalBall,
    pub reduced_bound: DecimalBall,
    /// Largest value of the bounded unknown (`n` in stage 1, `k` later)
    /// not excluded by this instance.
    pub variable_max: u64,
    pub precision_bits: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    EpsilonNeverPositive,
    PrecisionExhausted,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFailure {
    pub k: Option<usize>,
    pub d: u8,
    pub kind: FailureKind,
    pub error: String,
}

impl InstanceFailure {
    fn new(k: Option<usize>, d: u8, e: &Error) -> Self {
        let kind = match e {
            Error::EpsilonNeverPositive { .. } => FailureKind::EpsilonNeverPositive,
            Error::PrecisionExhausted { .. } | Error::Uncertified { .. } => FailureKind::PrecisionExhausted,
            _ => FailureKind::Other,
        };
        InstanceFailure {
            k,
            d,
            kind,
            error: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivedBound {
    pub name: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CampaignReport {
    pub stage: u8,
    pub records: Vec<InstanceRecord>,
    pub failures: Vec<InstanceFailure>,
    pub max_reduced_bound: Option<DecimalBall>,
    pub worst_k: Option<usize>,
    pub worst_d: Option<u8>,
    /// Max of [`InstanceRecord::variable_max`] over all instances.
    pub variable_max: Option<u64>,
    pub derived: Vec<DerivedBound>,
    pub checks: Vec<ChainStep>,
    pub assumptions: Vec<String>,
    /// Stage 3 only: the `k` bound falls below 400.
    pub contradiction: Option<bool>,
}

impl CampaignReport {
    pub fn all_certified(&self) -> bool {
        self.failures.is_empty() && !self.records.is_empty() && self.checks.iter().all(|c| c.holds)
    }

    /// Certified and the unknown is bounded by `limit`.
    pub fn meets(&self, limit: u64) -> bool {
        self.all_certified() && self.variable_max.is_some_and(|v| v <= limit)
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    precision_start: u32,
    precision_cap: u32,
    advance_budget: usize,
    record: InstanceRecord,
}

fn checkpoint_path(dir: &Path, stage: u8, k: Option<usize>, d: u8) -> PathBuf {
    let name = match k {
        Some(k) => format!("k{k:04}_d{d}.json"),
        None => format!("d{d}.json"),
    };
    dir.join(format!("stage{stage}")).join(name)
}

fn load_checkpoint(cfg: &CampaignConfig, stage: u8, k: Option<usize>, d: u8, m: &BigInt) -> Option<InstanceRecord> {
    let dir = cfg.checkpoint_dir.as_ref()?;
    let text = fs::read_to_string(checkpoint_path(dir, stage, k, d)).ok()?;
    let cp: Checkpoint = serde_json::from_str(&text).ok()?;
    let r = cp.record;
    let fresh = cp.precision_start == cfg.policy.start
        && cp.precision_cap == cfg.policy.cap
        && cp.advance_budget == cfg.advance_budget
        && r.stage == stage
        && r.k == k
        && r.d == d
        && r.m_bound == m.to_string();
    fresh.then_some(r)
}

fn store_checkpoint(cfg: &CampaignConfig, r: &InstanceRecord) -> Result<()> {
    let Some(dir) = cfg.checkpoint_dir.as_ref() else {
        return Ok(());
    };
    let path = checkpoint_path(dir, r.stage, r.k, r.d);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let cp = Checkpoint {
        precision_start: cfg.policy.start,
        precision_cap: cfg.policy.cap,
        advance_budget: cfg.advance_budget,
        record: r.clone(),
    };
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_vec_pretty(&cp)?)?;
    fs::rename(&tmp, &path)?;
    Ok(())
}

/// `ceil(scale * upper(bound)) - 1`, the largest integer value of
/// `scale * w` left open by `w < bound`.
fn largest_open_value(bound: &CertifiedReal, scale: u64) -> Result<u64> {
    let top = bound.upper().mul(&Dyadic::from_bigint(BigInt::from(scale))).ceil();
    (top - 1u32)
        .to_u64()
        .ok_or_else(|| Error::precondition("reduced bound out of range"))
}

fn record_of(stage: u8, k: Option<usize>, d: u8, inst: &ReductionInstance, o: &ReductionOutcome, scale: u64) -> Result<InstanceRecord> {
    Ok(InstanceRecord {
        stage,
        k,
        d,
        m_bound: inst.m_bound.to_string(),
        convergent_index: o.index,
        q: o.q.to_string(),
        advanced: o.advanced,
        epsilon: report_value(&o.epsilon),
        reduced_bound: report_value(&o.reduced_bound),
        variable_max: largest_open_value(&o.reduced_bound, scale)?,
        precision_bits: inst.gamma.prec(),
    })
}

/// Runs the instances sharing one `gamma` (one `k` in stage 1, all of a
/// later stage) with checkpoint reuse, escalating the whole group together.
fn run_group<F>(
    cfg: &CampaignConfig,
    stage: u8,
    k: Option<usize>,
    ds: &[u8],
    m_bound: &BigInt,
    scale: u64,
    build: F,
) -> (Vec<InstanceRecord>, Vec<InstanceFailure>, BigInt)
where
    F: Fn(u32) -> Result<(CertifiedReal, Vec<CertifiedReal>, CertifiedReal, CertifiedReal)>,
{
    let mut records = Vec::new();
    let mut pending = Vec::new();
    for &d in ds {
        match load_checkpoint(cfg, stage, k, d, m_bound) {
            Some(r) => records.push(r),
            None => pending.push(d),
        }
    }
    let mut failures = Vec::new();
    let mut irrational_to = BigInt::zero();
    if pending.is_empty() {
        return (records, failures, irrational_to);
    }
    let run = cfg.policy.escalate(|prec| {
        let (gamma, mus, a, b) = build(prec)?;
        let cf = continued_fraction(&gamma, &(m_bound * 6))?;
        let mut out = Vec::new();
        for &d in &pending {
            let inst = ReductionInstance {
                gamma: gamma.clone(),
                mu: mus[usize::from(d) - 1].clone(),
                a: a.clone(),
                b: b.clone(),
                m_bound: m_bound.clone(),
            };
            let res = dujella_petho_with(&inst, &cf, cfg.advance_budget)
                .and_then(|o| record_of(stage, k, d, &inst, &o, scale));
            match res {
                Err(e @ Error::Uncertified { .. }) => return Err(e),
                other => out.push((d, other)),
            }
        }
        Ok((out, cf.largest_denominator()))
    });
    match run {
        Ok((out, q)) => {
            irrational_to = q;
            for (d, r) in out {
                match r {
                    Ok(r) => {
                        if let Err(e) = store_checkpoint(cfg, &r) {
                            failures.push(InstanceFailure::new(k, d, &e));
                        }
                        records.push(r);
                    }
                    Err(e) => failures.push(InstanceFailure::new(k, d, &e)),
                }
            }
        }
        Err(e) => failures.extend(pending.iter().map(|&d| InstanceFailure::new(k, d, &e))),
    }
    (records, failures, irrational_to)
}

fn check_ranges(k_range: Option<(usize, usize)>, d_range: (u8, u8)) -> Result<()> {
    let (d0, d1) = d_range;
    if d0 < 1 || d1 > 9 || d0 > d1 {
        return Err(Error::precondition(format!("d range {d0}..={d1} not within 1..=9")));
    }
    if let Some((k0, k1)) = k_range {
        if k0 < 3 || k1 > 400 || k0 > k1 {
            return Err(Error::precondition(format!("k range {k0}..={k1} not within 3..=400")));
        }
    }
    Ok(())
}

fn dec(s: &str, prec: u32) -> CertifiedReal {
    CertifiedReal::from_decimal(s, prec).expect("decimal literal")
}

fn exact_step(claim: &str, holds: bool) -> ChainStep {
    ChainStep {
        claim: claim.to_string(),
        holds,
    }
}

fn finish(
    stage: u8,
    mut records: Vec<InstanceRecord>,
    mut failures: Vec<InstanceFailure>,
    checks: Vec<ChainStep>,
    assumptions: Vec<String>,
) -> CampaignReport {
    records.sort_by_key(|r| (r.k, r.d));
    failures.sort_by_key(|f| (f.k, f.d));
    let worst = records.iter().max_by(|x, y| {
        x.reduced_bound
            .approx()
            .total_cmp(&y.reduced_bound.approx())
            .then_with(|| (y.k, y.d).cmp(&(x.k, x.d)))
    });
    CampaignReport {
        stage,
        max_reduced_bound: worst.map(|r| r.reduced_bound.clone()),
        worst_k: worst.and_then(|r| r.k),
        worst_d: worst.map(|r| r.d),
        variable_max: records.iter().map(|r| r.variable_max).max(),
        records,
        failures,
        derived: Vec::new(),
        checks,
        assumptions,
        contradiction: None,
    }
}

fn interrupted(cfg: &CampaignConfig) -> Result<()> {
    if cfg.cancelled() {
        Err(Error::Interrupted)
    } else {
        Ok(())
    }
}

/// `floor(1.15e15 k^4 (log k)^3)`.
pub fn stage1_m_bound(k: usize, policy: &PrecisionPolicy) -> Result<BigInt> {
    policy.escalate(|prec| {
        closed_form_n_bound(&CertifiedReal::from_i64(k as i64, prec))?
            .floor_exact()
            .ok_or(Error::Uncertified {
                what: "floor of the stage-1 bound",
                bits: prec,
            })
    })
}

fn stage1_constant_checks(prec: u32) -> Result<Vec<ChainStep>> {
    let alpha_min = CertifiedReal::from_i64(2, prec);
    let x5 = dec("5.5", prec).div(&alpha_min.powi(5)?)?;
    let dw = deweger_bound(&dec("0.2", prec), &dec("0.2", prec))?;
    let dw_coeff = dw.div(&dec("0.2", prec))?;
    Ok(vec![
        step("1/0.552 < 5.5", &dec("0.552", prec).recip()?, &dec("5.5", prec))?,
        step("5.5/2^5 < 0.2, so 5.5/alpha^n < 0.2 for n >= 5", &x5, &dec("0.2", prec))?,
        step("5.5 (-log 0.8)/0.2 < 6.14", &(&dw_coeff * &dec("5.5", prec)), &dec("6.14", prec))?,
        step("6.14/log 2 < 8.86", &dec("6.14", prec).div(&alpha_min.ln()?)?, &dec("8.86", prec))?,
    ])
}

/// Stage 1: `k` in `k_range`, `d` in `d_range`, `n` the unknown.
pub fn stage1_campaign(k_range: (usize, usize), d_range: (u8, u8), cfg: &CampaignConfig) -> Result<CampaignReport> {
    check_ranges(Some(k_range), d_range)?;
    let ds: Vec<u8> = (d_range.0..=d_range.1).collect();
    let ks: Vec<usize> = (k_range.0..=k_range.1).collect();
    let per_k: Vec<_> = ks
        .par_iter()
        .map(|&k| {
            if cfg.cancelled() {
                return None;
            }
            let m = match stage1_m_bound(k, &cfg.policy) {
                Ok(m) => m,
                Err(e) => {
                    let f = ds.iter().map(|&d| InstanceFailure::new(Some(k), d, &e)).collect();
                    return Some((Vec::new(), f, BigInt::zero(), false));
                }
            };
            let a_ok = cfg
                .policy
                .escalate(|prec| {
                    let la = dominant_root_at(k, prec)?.alpha.ln()?;
                    step("", &dec("6.14", prec).div(&la)?, &dec("8.86", prec)).map(|s| s.holds)
                })
                .unwrap_or(false);
            let (r, f, q) = run_group(cfg, 1, Some(k), &ds, &m, 1, |prec| {
                let root = dominant_root_at(k, prec)?;
                let la = root.alpha.ln()?;
                let gamma = CertifiedReal::ln10(prec).div(&la)?;
                let lg = root.g.ln()?;
                let mus = (1..=9)
                    .map(|d| (&CertifiedReal::from_ratio(&BigInt::from(d), &BigInt::from(9), prec)?.ln()? - &lg).div(&la))
                    .collect::<Result<Vec<_>>>()?;
                Ok((gamma, mus, dec("8.86", prec), root.alpha))
            });
            Some((r, f, q, a_ok))
        })
        .collect();
    interrupted(cfg)?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut min_q: Option<BigInt> = None;
    let mut a_all = true;
    for (r, f, q, a_ok) in per_k.into_iter().flatten() {
        records.extend(r);
        failures.extend(f);
        a_all &= a_ok;
        if !q.is_zero() {
            min_q = Some(min_q.map_or(q.clone(), |m| m.min(q)));
        }
    }
    let mut checks = stage1_constant_checks(cfg.policy.start)?;
    checks.push(exact_step("6.14/log alpha < 8.86 for every k in range", a_all));
    let mut assumptions = vec!["log 10/log alpha is irrational for every k".to_string()];
    if let Some(q) = min_q {
        assumptions.push(format!("certified: no rational with denominator <= {q} equals any such gamma"));
    }
    let mut report = finish(1, records, failures, checks, assumptions);
    if let Some(n) = report.variable_max {
        let m = 3 * n / 4;
        report.derived.push(DerivedBound {
            name: "n <=".into(),
            value: n.to_string(),
        });
        report.derived.push(DerivedBound {
            name: "m <=".into(),
            value: m.to_string(),
        });
    }
    Ok(report)
}

/// `M` for stage 2: `ceil(3/4 * 1.14e90)`.
pub fn stage2_m_bound() -> BigInt {
    BigInt::from(855u32) * BigInt::from(10u32).pow(87)
}

/// `M` for stage 3: `m < 1.69e29`.
pub fn stage3_m_bound() -> BigInt {
    BigInt::from(169u32) * BigInt::from(10u32).pow(27)
}

fn golden_family(prec: u32) -> Result<(CertifiedReal, Vec<CertifiedReal>, CertifiedReal, CertifiedReal)> {
    let phi = CertifiedReal::phi(prec);
    let lp = phi.ln()?;
    let gamma = CertifiedReal::ln10(prec).div(&lp)?;
    let c = phi.add_i64(2);
    let mus = (1..=9)
        .map(|d| (&CertifiedReal::from_ratio(&BigInt::from(d), &BigInt::from(9), prec)? * &c).ln()?.div(&lp))
        .collect::<Result<Vec<_>>>()?;
    Ok((gamma, mus, dec("3.7", prec), phi))
}

fn golden_constant_checks(prec: u32) -> Result<Vec<ChainStep>> {
    let phi = CertifiedReal::phi(prec);
    let dw = deweger_bound(&dec("0.6", prec), &dec("0.6", prec))?.div(&dec("0.6", prec))?;
    Ok(vec![
        step("1.16/phi^200 < 0.6, so 1.16/phi^(k/2) < 0.6 for k > 400", &dec("1.16", prec).div(&phi.powi(200)?)?, &dec("0.6", prec))?,
        step("1.16 (-log 0.4)/0.6 < 1.78", &(&dw * &dec("1.16", prec)), &dec("1.78", prec))?,
        step("1.78/log phi < 3.7", &dec("1.78", prec).div(&phi.ln()?)?, &dec("3.7", prec))?,
    ])
}

fn golden_campaign(stage: u8, m: BigInt, d_range: (u8, u8), cfg: &CampaignConfig, mut checks: Vec<ChainStep>) -> Result<CampaignReport> {
    check_ranges(None, d_range)?;
    interrupted(cfg)?;
    let ds: Vec<u8> = (d_range.0..=d_range.1).collect();
    let (records, failures, q) = run_group(cfg, stage, None, &ds, &m, 2, golden_family);
    interrupted(cfg)?;
    checks.extend(golden_constant_checks(cfg.policy.start)?);
    let mut assumptions = vec![
        "log 10/log phi is irrational".to_string(),
        "the reduction is applied with w = k/2, which need not be an integer".to_string(),
    ];
    if !q.is_zero() {
        assumptions.push(format!("certified: no rational with denominator <= {q} equals gamma"));
    }
    let mut report = finish(stage, records, failures, checks, assumptions);
    if let Some(k) = report.variable_max {
        report.derived.push(DerivedBound {
            name: "k <=".into(),
            value: k.to_string(),
        });
    }
    Ok(report)
}

/// Stage 2: `k > 400`, `M = 8.55e89`, bound on `k/2`.
pub fn stage2_campaign(d_range: (u8, u8), cfg: &CampaignConfig) -> Result<CampaignReport> {
    let m = stage2_m_bound();
    let ten = BigInt::from(10u32);
    let checks = vec![exact_step(
        "3/4 * 1.14e90 <= M = 8.55e89",
        BigInt::from(3u32) * BigInt::from(114u32) * ten.pow(88) <= BigInt::from(4u32) * &m,
    )];
    let mut report = golden_campaign(2, m, d_range, cfg, checks)?;
    if let Some(kmax) = report.variable_max {
        let prec = cfg.policy.start;
        let n = closed_form_n_bound(&CertifiedReal::from_i64(kmax as i64, prec))?;
        let m3 = &n * &dec("0.75", prec);
        report.checks.push(step(format!("1.15e15 {kmax}^4 (log {kmax})^3 < 2.25e29"), &n, &dec("2.25e29", prec))?);
        report.checks.push(step("3/4 * 2.25e29 < 1.69e29", &(&dec("2.25e29", prec) * &dec("0.75", prec)), &dec("1.69e29", prec))?);
        report.derived.push(DerivedBound {
            name: "n <".into(),
            value: report_value(&n).mid,
        });
        report.derived.push(DerivedBound {
            name: "m <".into(),
            value: report_value(&m3).mid,
        });
    }
    Ok(report)
}

/// Stage 3: same family as stage 2 with `M = 1.69e29`.
pub fn stage3_campaign(d_range: (u8, u8), cfg: &CampaignConfig) -> Result<CampaignReport> {
    let mut report = golden_campaign(3, stage3_m_bound(), d_range, cfg, Vec::new())?;
    report.contradiction = Some(report.all_certified() && report.variable_max.is_some_and(|k| k < 400));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64, prec: u32) -> CertifiedReal {
        CertifiedReal::from_ratio(&n.into(), &d.into(), prec).unwrap()
    }

    #[test]
    fn golden_ratio_quotients_are_ones() {
        let cf = ContinuedFractionExpansion::of_ball(&CertifiedReal::phi(256));
        assert!(cf.len() > 100);
        assert!(cf.quotients.iter().all(|a| a == &BigInt::one()));
        let (p, q) = &cf.convergents[10];
        assert_eq!((p, q), (&BigInt::from(144), &BigInt::from(89)));
    }

    #[test]
    fn log_ratio_leading_quotient() {
        let prec = 512;
        let g = CertifiedReal::ln10(prec).div(&CertifiedReal::phi(prec).ln().unwrap()).unwrap();
        let cf = ContinuedFractionExpansion::of_ball(&g);
        assert_eq!(cf.quotients[0], BigInt::from(4));
        for w in cf.convergents.windows(2).enumerate() {
            let (i, pair) = w;
            let ((p0, q0), (p1, q1)) = (&pair[0], &pair[1]);
            let det = p1 * q0 - p0 * q1;
            let expected = if i % 2 == 0 { 1 } else { -1 };
            assert_eq!(det, BigInt::from(expected));
        }
    }

    #[test]
    fn rational_ball_has_no_terminal_quotient() {
        let cf = ContinuedFractionExpansion::of_ball(&r(7, 2, 64).with_prec(64));
        assert!(cf.quotients.len() <= 1);
    }

    #[test]
    fn reach_failure_is_uncertified() {
        let g = CertifiedReal::phi(64);
        let e = continued_fraction(&g, &BigInt::from(10u32).pow(40)).unwrap_err();
        assert!(e.is_retryable());
    }

    #[test]
    fn deweger_examples() {
        let p = 256;
        let c = deweger_bound(&r(1, 5, p), &r(55, 10, p).div(&CertifiedReal::from_i64(32, p)).unwrap()).unwrap();
        assert!(c.to_f64() > 0.19 && c.to_f64() < 0.2);
        let coeff = deweger_bound(&r(1, 5, p), &r(1, 5, p)).unwrap().div(&r(1, 5, p)).unwrap();
        assert!((coeff.to_f64() * 5.5 - 6.1367).abs() < 1e-3);
        let coeff = deweger_bound(&r(3, 5, p), &r(3, 5, p)).unwrap().div(&r(3, 5, p)).unwrap();
        assert!((coeff.to_f64() * 1.16 - 1.7716).abs() < 1e-3);
        assert!(deweger_bound(&r(1, 2, p), &CertifiedReal::zero(p)).unwrap().contains_zero());
        assert!(deweger_bound(&r(3, 2, p), &r(1, 5, p)).is_err());
        assert!(deweger_bound(&r(1, 5, p), &r(1, 2, p)).is_err());
    }

    #[test]
    fn nonvanishing() {
        let pol = PrecisionPolicy::new(64, 1024).unwrap();
        assert!(nonvanishing_certify(&pol, |p| Ok(r(7, 20, p))).unwrap());
        // Radius shrinks with precision: undecidable at 64 bits only.
        let mut seen = Vec::new();
        let v = nonvanishing_certify(&pol, |p| {
            seen.push(p);
            let w = if p < 128 { dec("1e-10", p).inflate(crate::ball::Mag::pow2(-20)) } else { dec("1e-10", p) };
            Ok(w)
        })
        .unwrap();
        assert!(v);
        assert_eq!(seen, vec![64, 128]);
        assert!(!nonvanishing_certify(&pol, |p| Ok(CertifiedReal::zero(p))).unwrap());
        let e = nonvanishing_certify(&pol, |p| Ok(CertifiedReal::zero(p).inflate(crate::ball::Mag::pow2(-3)))).unwrap_err();
        assert!(matches!(e, Error::PrecisionExhausted { .. }));
    }

    fn synthetic(m: u64, prec: u32) -> ReductionInstance {
        ReductionInstance {
            gamma: CertifiedReal::from_i64(2, prec).sqrt().unwrap(),
            mu: CertifiedReal::from_i64(3, prec).sqrt().unwrap().div_u64(7),
            a: CertifiedReal::from_i64(5, prec),
            b: CertifiedReal::from_i64(2, prec),
            m_bound: BigInt::from(m),
        }
    }

    /// Largest `w` with `|u gamma - v + mu| < A B^-w` over `1 <= u <= M`.
    fn brute_force_w(inst: &ReductionInstance) -> CertifiedReal {
        let prec = inst.gamma.prec();
        let lb = inst.b.ln().unwrap();
        let mut best: Option<CertifiedReal> = None;
        for u in 1..=inst.m_bound.to_u64().unwrap() {
            let x = &(&inst.gamma * &CertifiedReal::from_i64(u as i64, prec)) + &inst.mu;
            let lam = x.dist_to_nearest_int();
            assert!(lam.is_positive());
            let w = inst.a.div(&lam).unwrap().ln().unwrap().div(&lb).unwrap();
            if best.as_ref().is_none_or(|b| w.to_f64() > b.to_f64()) {
                best = Some(w);
            }
        }
        best.unwrap()
    }

    #[test]
    fn brute_force_agrees_on_small_instances() {
        for m in [5u64, 40, 300, 2000] {
            let inst = synthetic(m, 256);
            let out = dujella_petho_reduce(&inst).unwrap();
            assert!(out.q > inst.six_m());
            assert!(out.epsilon.is_positive());
            let w = brute_force_w(&inst);
            assert!(!w.certainly_gt(&out.reduced_bound), "m={m}: {w} vs {}", out.reduced_bound);
        }
    }

    #[test]
    fn advances_past_non_positive_epsilon() {
        // mu = gamma makes ||mu q|| = ||gamma q|| so eps = (1 - M)||gamma q|| < 0
        // at every convergent.
        let mut inst = synthetic(10, 256);
        inst.mu = inst.gamma.clone();
        let e = dujella_petho_reduce(&inst).unwrap_err();
        assert!(matches!(e, Error::EpsilonNeverPositive { tried: 41 }));
        // A shifted mu where the first qualifying convergent fails.
        let prec = 256;
        let cf = continued_fraction(&inst.gamma, &BigInt::from(60)).unwrap();
        let mut advanced = false;
        for num in 1..200 {
            inst.mu = r(num, 211, prec);
            if let Ok(o) = dujella_petho_with(&inst, &cf, ADVANCE_BUDGET) {
                if o.advanced > 0 {
                    advanced = true;
                    assert!(o.index > cf.first_index_above(&inst.six_m()).unwrap());
                    break;
                }
            }
        }
        assert!(advanced);
    }

    #[test]
    fn index_monotone_in_m() {
        let cf = ContinuedFractionExpansion::of_ball(&synthetic(1, 512).gamma);
        let mut last = 0;
        for m in (1..60).map(|e| BigInt::from(3u32).pow(e)) {
            let i = cf.first_index_above(&(&m * 6)).unwrap();
            assert!(i >= last);
            last = i;
        }
    }

    #[test]
    fn stage_m_bounds() {
        let m = stage1_m_bound(3, &PrecisionPolicy::default()).unwrap();
        let v = 1.15e15 * 81.0 * 3f64.ln().powi(3);
        assert!((m.to_f64().unwrap() / v - 1.0).abs() < 1e-12);
        assert_eq!(stage2_m_bound().to_string().len(), 90);
    }

    #[test]
    fn stage3_closes() {
        let cfg = CampaignConfig::default();
        let rep = stage3_campaign((1, 9), &cfg).unwrap();
        assert!(rep.all_certified(), "{:?}", rep.failures);
        let k = rep.variable_max.unwrap();
        assert!(k < 400 && (310..=314).contains(&k), "k <= {k}");
        assert_eq!(rep.contradiction, Some(true));
        assert!(rep.records.iter().all(|r| r.q.parse::<BigInt>().unwrap() > stage3_m_bound() * 6));
    }

    #[test]
    fn stage1_single_k_with_checkpoints() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = CampaignConfig {
            checkpoint_dir: Some(dir.path().to_path_buf()),
            ..CampaignConfig::default()
        };
        let a = stage1_campaign((3, 3), (1, 9), &cfg).unwrap();
        assert!(a.all_certified(), "{:?} {:?}", a.failures, a.checks);
        assert!(a.variable_max.unwrap() <= 99);
        assert_eq!(fs::read_dir(dir.path().join("stage1")).unwrap().count(), 9);
        let b = stage1_campaign((3, 3), (1, 9), &cfg).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn cancelled_campaign_reports_interrupt() {
        let flag = Arc::new(AtomicBool::new(true));
        let cfg = CampaignConfig {
            cancel: Some(flag),
            ..CampaignConfig::default()
        };
        assert!(matches!(stage1_campaign((3, 5), (1, 9), &cfg), Err(Error::Interrupted)));
    }
}
