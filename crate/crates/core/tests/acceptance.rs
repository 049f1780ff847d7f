//! Acceptance criteria, one line each. Runs as a plain binary so the
//! pass/fail lines always reach the terminal.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use kpell_core::algebraic::{
    all_roots, asymptotic_decomposition_check, binet_coefficient_bound_check, binet_error_check,
    binet_full_eval, growth_bounds_check, large_k_regime_check, dominant_root_checks,
};
use kpell_core::ball::Mag;
use kpell_core::bigseq::{generate, generate_naive, RecurrenceSpec};
use kpell_core::heights::{
    algebraic_height, gk_minimal_polynomial, stage1_n_bound, stage2_k_bound, AlgebraicNumber, FirstHeightVariant,
};
use kpell_core::reduction::{
    dujella_petho_reduce, stage1_campaign, stage2_campaign, stage3_campaign, CampaignConfig, ReductionInstance,
};
use kpell_core::search::{exhaustive_search, matches_theorem, SearchDomain};
use kpell_core::{CertifiedReal, ComplexBall, DecimalBall, PrecisionPolicy};
use num_bigint::BigInt;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn policy() -> PrecisionPolicy {
    PrecisionPolicy::default()
}

fn upper_at_most(b: &DecimalBall, limit: &str) -> Result<bool, String> {
    let x = b.to_ball(256).map_err(e)?;
    let lim = CertifiedReal::from_decimal(limit, 256).map_err(e)?;
    Ok(x.certainly_le(&lim))
}

fn theorem_search() -> Outcome {
    let hits = exhaustive_search(&SearchDomain::default()).map_err(e)?;
    ensure(matches_theorem(&hits), format!("got {:?}", hits.iter().map(|h| h.tuple()).collect::<Vec<_>>()))?;
    Ok("{(5,3,3,2), (6,4,8,2)}".into())
}

fn stage1_reduction() -> Outcome {
    let rep = stage1_campaign((3, 400), (1, 9), &CampaignConfig::default()).map_err(e)?;
    ensure(rep.failures.is_empty(), format!("{} instances failed", rep.failures.len()))?;
    ensure(rep.records.len() == 398 * 9, "missing instances")?;
    ensure(rep.checks.iter().all(|c| c.holds), "constant checks failed")?;
    let max = rep.max_reduced_bound.clone().ok_or("no bound")?;
    ensure(upper_at_most(&max, "99.3")?, format!("max bound {}", max.mid))?;
    let n = rep.variable_max.ok_or("no n bound")?;
    ensure(n <= 99, format!("n <= {n}"))?;
    Ok(format!("max bound {} at k={:?} d={:?}, n <= {n}", max.mid, rep.worst_k, rep.worst_d))
}

fn stage2_reduction() -> Outcome {
    let rep = stage2_campaign((1, 9), &CampaignConfig::default()).map_err(e)?;
    ensure(rep.all_certified(), "not certified")?;
    let max = rep.max_reduced_bound.clone().ok_or("no bound")?;
    let v = max.approx();
    ensure((443.7..=445.7).contains(&v), format!("k/2 bound {v}"))?;
    let k = rep.variable_max.ok_or("no k bound")?;
    ensure(k <= 889, format!("k <= {k}"))?;
    Ok(format!("k/2 < {}, k <= {k}", max.mid))
}

fn stage3_reduction() -> Outcome {
    let rep = stage3_campaign((1, 9), &CampaignConfig::default()).map_err(e)?;
    ensure(rep.all_certified(), "not certified")?;
    let k = rep.variable_max.ok_or("no k bound")?;
    ensure((311..=314).contains(&k) && k < 400, format!("k <= {k}"))?;
    ensure(rep.contradiction == Some(true), "no contradiction")?;
    Ok(format!("k <= {k} < 400"))
}

fn matveev_constant() -> Outcome {
    let chain = stage2_k_bound(&policy()).map_err(e)?;
    let c = chain.matveev_coefficient.to_f64();
    ensure(((c - 2.59e13) / 2.59e13).abs() < 0.005, format!("constant {c:e}"))?;
    ensure(chain.holds(), "large-k chain step failed")?;
    let bad: Vec<usize> = (3..=400usize)
        .into_par_iter()
        .filter(|&k| {
            stage1_n_bound(k, FirstHeightVariant::KLog10, &policy())
                .map(|b| !(b.holds() && b.rederived.certainly_lt(&b.closed_form)))
                .unwrap_or(true)
        })
        .collect();
    ensure(bad.is_empty(), format!("closed form fails at k = {bad:?}"))?;
    Ok(format!("constant {c:.4e}; closed form dominates for k in [3,400]"))
}

fn binet_suite() -> Outcome {
    let half = CertifiedReal::one(64).mul_2exp(-1);
    let worst = (3..=30usize)
        .into_par_iter()
        .map(|k| binet_error_check(k, (2 - k as i64)..=300, &policy()).map(|w| (k, w)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    for (k, w) in &worst {
        ensure(w.certainly_lt(&half), format!("error {w} at k = {k}"))?;
    }
    for k in 3..=30usize {
        ensure(growth_bounds_check(k, 1..=300, &policy()).map_err(e)?, format!("growth bound fails at k = {k}"))?;
    }
    let m = worst.iter().map(|(_, w)| w.to_f64()).fold(0.0, f64::max);
    Ok(format!("max |P_n - g alpha^n| = {m:.3e}"))
}

fn dominant_root_suite() -> Outcome {
    let reports = (3..=1000usize)
        .into_par_iter()
        .map(|k| dominant_root_checks(k, &policy()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    for r in &reports {
        if r.k <= 500 {
            ensure(r.increasing, format!("alpha not increasing at k = {}", r.k))?;
        }
        ensure(r.bracket, format!("bracket fails at k = {}", r.k))?;
        ensure(r.golden_identity, format!("g_k(phi^2) identity fails at k = {}", r.k))?;
        ensure(r.g_bounds, format!("0.276 < g < 0.5 fails at k = {}", r.k))?;
    }
    Ok("monotone, bracket, identity, g bounds for k in [3,1000]".into())
}

fn height_suite() -> Outcome {
    for k in 3..=10usize {
        let mp = gk_minimal_polynomial(k, &policy()).map_err(e)?;
        let g = kpell_core::algebraic::dominant_root(k, &policy()).map_err(e)?.g;
        let x = AlgebraicNumber::new(mp, ComplexBall::real(g), &policy()).map_err(e)?;
        let h = algebraic_height(&x, &policy()).map_err(e)?;
        let lim = CertifiedReal::from_i64(k as i64, 256).ln().map_err(e)?.mul_i64(4);
        ensure(h.certainly_lt(&lim), format!("h(g) = {h} at k = {k}"))?;
    }
    for k in 2..=30usize {
        ensure(binet_coefficient_bound_check(k, &policy()).map_err(e)?, format!("coefficient > 2 at k = {k}"))?;
    }
    let one = Mag::from_u64(1);
    let inside = (2..=64usize)
        .into_par_iter()
        .map(|k| all_roots(k, &policy()).map(|s| s.roots[1..].iter().all(|r| r.abs_upper() < one)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    ensure(inside.iter().all(|&b| b), "a non-dominant root outside the unit disk")?;
    Ok("h(g_k) < 4 log k (k<=10), |coefficients| <= 2 (k<=30), other roots inside |z|<1 (k<=64)".into())
}

fn asymptotic_suite() -> Outcome {
    let bad = (30..=60usize)
        .into_par_iter()
        .flat_map_iter(|k| (5..=200i64).map(move |n| (k, n)))
        .filter(|&(k, n)| {
            asymptotic_decomposition_check(k, n, &policy())
                .map(|d| !(d.delta_bound && d.eta_bound && d.identity_residual.contains_zero()))
                .unwrap_or(true)
        })
        .collect::<Vec<_>>();
    ensure(bad.is_empty(), format!("decomposition fails at {:?}", &bad[..bad.len().min(5)]))?;
    for k in [401u64, 1_000, 1_000_000] {
        ensure(large_k_regime_check(k, &policy()).map_err(e)?, format!("large-k inequalities fail at k = {k}"))?;
    }
    Ok("delta/eta bounds for k in [30,60], n in [5,200]; absorptions at k = 401, 1e3, 1e6".into())
}

fn oracle_suite() -> Outcome {
    for k in 2..=50usize {
        let spec = RecurrenceSpec::pell(k).map_err(e)?;
        let fast = generate(&spec, 500).map_err(e)?;
        ensure(fast.iter().eq(generate_naive(&spec, 500).iter()), format!("generators differ at k = {k}"))?;
    }
    let bad = (2..=20usize)
        .into_par_iter()
        .flat_map_iter(|k| (2 - k as i64..=100).map(move |n| (k, n)))
        .filter(|&(k, n)| {
            let exact = generate_naive(&RecurrenceSpec::pell(k).unwrap(), n.max(0)).term(n).cloned().unwrap();
            binet_full_eval(k, n, &policy()).map(|b| !b.contains_int(&exact)).unwrap_or(true)
        })
        .collect::<Vec<_>>();
    ensure(bad.is_empty(), format!("Binet sums miss at {:?}", &bad[..bad.len().min(5)]))?;
    let prec = 256;
    let mut checked = 0;
    for (root, mu_num, m) in [(2i64, 1i64, 7u64), (3, 5, 60), (5, 11, 400), (7, 2, 2500), (11, 13, 20_000)] {
        let inst = ReductionInstance {
            gamma: CertifiedReal::from_i64(root, prec).sqrt().map_err(e)?,
            mu: CertifiedReal::from_ratio(&BigInt::from(mu_num), &BigInt::from(17), prec).map_err(e)?,
            a: CertifiedReal::from_i64(4, prec),
            b: CertifiedReal::from_i64(3, prec),
            m_bound: BigInt::from(m),
        };
        let out = dujella_petho_reduce(&inst).map_err(e)?;
        let lb = inst.b.ln().map_err(e)?;
        for u in 1..=m as i64 {
            let lam = (&(&inst.gamma * &CertifiedReal::from_i64(u, prec)) + &inst.mu).dist_to_nearest_int();
            ensure(lam.is_positive(), "synthetic form vanished")?;
            let w = inst.a.div(&lam).map_err(e)?.ln().map_err(e)?.div(&lb).map_err(e)?;
            ensure(!w.certainly_gt(&out.reduced_bound), format!("u = {u} beats the reduced bound"))?;
        }
        checked += 1;
    }
    Ok(format!("generators k<=50 n<=500; Binet sums k<=20 n<=100; {checked} synthetic reductions"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("theorem reproduction", theorem_search, Duration::from_secs(300)),
        ("stage-1 reduction", stage1_reduction, Duration::from_secs(900)),
        ("stage-2 reduction", stage2_reduction, Duration::from_secs(30)),
        ("stage-3 reduction", stage3_reduction, Duration::from_secs(30)),
        ("linear-form constants", matveev_constant, Duration::from_secs(600)),
        ("Binet error suite", binet_suite, Duration::from_secs(120)),
        ("dominant-root suite", dominant_root_suite, Duration::from_secs(600)),
        ("height suite", height_suite, Duration::from_secs(600)),
        ("asymptotic suite", asymptotic_suite, Duration::from_secs(600)),
        ("oracle equivalence", oracle_suite, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = run();
        let took = t.elapsed();
        let res = match res {
            Ok(msg) if took > *budget => Err(format!("{msg}; took {took:.1?}, budget {budget:?}")),
            other => other,
        };
        match res {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} ({took:.1?})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} ({took:.1?})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
