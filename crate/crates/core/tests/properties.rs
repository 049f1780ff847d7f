use kpell_core::algebraic::dominant_root;
use kpell_core::ball::Dyadic;
use kpell_core::bigseq::{digit_count_within, generate, generate_naive, repdigit_decompose, RecurrenceSpec, RepdigitForm};
use kpell_core::reduction::{continued_fraction, dujella_petho_reduce, ContinuedFractionExpansion, ReductionInstance};
use kpell_core::search::{exhaustive_search, SearchDomain};
use kpell_core::{CertifiedReal, PrecisionPolicy};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use proptest::prelude::*;

fn ratio(d: &Dyadic) -> BigRational {
    let (n, q) = d.to_ratio();
    BigRational::new(n, q)
}

fn encloses(ball: &CertifiedReal, x: &BigRational) -> bool {
    &ratio(&ball.lower()) <= x && x <= &ratio(&ball.upper())
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sliding_and_naive_generators_agree(k in 2usize..24, n_max in 0i64..160) {
        let spec = RecurrenceSpec::pell(k).unwrap();
        let fast = generate(&spec, n_max).unwrap();
        let slow = generate_naive(&spec, n_max);
        prop_assert!(fast.iter().eq(slow.iter()));
    }

    #[test]
    fn repdigit_roundtrip(d in 1u8..=9, m in 1u32..60) {
        let r = RepdigitForm::new(d, m).unwrap();
        prop_assert_eq!(repdigit_decompose(&r.value), Some(r));
    }

    #[test]
    fn appending_a_digit_breaks_repdigits(d in 1u8..=9, m in 1u32..30, e in 0u8..=9) {
        prop_assume!(e != d);
        let r = RepdigitForm::new(d, m).unwrap();
        let v = &r.value * 10 + BigInt::from(e);
        prop_assert!(repdigit_decompose(&v).is_none());
    }

    #[test]
    fn field_operations_enclose_exact_results(
        a in -10_000i64..10_000, b in 1i64..10_000, c in -10_000i64..10_000, d in 1i64..10_000,
        prec in 64u32..300,
    ) {
        let (x, y) = (rat(a, b), rat(c, d));
        let bx = CertifiedReal::from_rational(&x, prec).unwrap();
        let by = CertifiedReal::from_rational(&y, prec).unwrap();
        prop_assert!(encloses(&(&bx + &by), &(&x + &y)));
        prop_assert!(encloses(&(&bx - &by), &(&x - &y)));
        prop_assert!(encloses(&(&bx * &by), &(&x * &y)));
        if c != 0 {
            prop_assert!(encloses(&bx.div(&by).unwrap(), &(&x / &y)));
        }
    }

    #[test]
    fn exp_inverts_ln(a in 1i64..1_000_000, b in 1i64..1_000, prec in 64u32..400) {
        let x = rat(a, b);
        let bx = CertifiedReal::from_rational(&x, prec).unwrap();
        let back = bx.ln().unwrap().exp().unwrap();
        prop_assert!(encloses(&back, &x));
    }

    #[test]
    fn decimal_serialization_encloses(a in -1_000_000i64..1_000_000, b in 1i64..1_000, digits in 3usize..30) {
        let x = rat(a, b);
        let bx = CertifiedReal::from_rational(&x, 256).unwrap();
        let back = bx.to_decimal(digits).to_ball(256).unwrap();
        prop_assert!(encloses(&back, &x));
    }

    #[test]
    fn convergents_satisfy_invariants(n in 2u64..5_000, prec in 128u32..600) {
        prop_assume!(((n as f64).sqrt().round() as u64).pow(2) != n);
        let g = CertifiedReal::from_i64(n as i64, prec).sqrt().unwrap();
        let cf = ContinuedFractionExpansion::of_ball(&g);
        prop_assert!(cf.len() > 4);
        let lo = ratio(&g.lower());
        let hi = ratio(&g.upper());
        for i in 1..cf.convergents.len() {
            let (p0, q0) = &cf.convergents[i - 1];
            let (p1, q1) = &cf.convergents[i];
            let det = p1 * q0 - p0 * q1;
            let sign = if i % 2 == 1 { 1 } else { -1 };
            prop_assert_eq!(det, BigInt::from(sign));
            // |gamma - p0/q0| < 1/(q0 q1) for every gamma in the ball.
            let c = BigRational::new(p0.clone(), q0.clone());
            let lim = BigRational::new(BigInt::one(), q0 * q1);
            let far = (&lo - &c).abs().max((&hi - &c).abs());
            prop_assert!(far < lim);
        }
    }

    #[test]
    fn chosen_convergent_index_is_monotone(n in 2u64..500, e1 in 1u32..30, e2 in 1u32..30) {
        prop_assume!(((n as f64).sqrt().round() as u64).pow(2) != n);
        let g = CertifiedReal::from_i64(n as i64, 1024).sqrt().unwrap();
        let (small, big) = (e1.min(e2), e1.max(e2));
        let m1 = BigInt::from(7u32).pow(small);
        let m2 = BigInt::from(7u32).pow(big);
        let cf = continued_fraction(&g, &(&m2 * 6)).unwrap();
        let i1 = cf.first_index_above(&(&m1 * 6)).unwrap();
        let i2 = cf.first_index_above(&(&m2 * 6)).unwrap();
        prop_assert!(i1 <= i2);
    }

    #[test]
    fn reduction_is_sound_against_enumeration(n in 2i64..200, mu_num in 1i64..997, m in 1u64..400) {
        prop_assume!(((n as f64).sqrt().round() as i64).pow(2) != n);
        let prec = 256;
        let inst = ReductionInstance {
            gamma: CertifiedReal::from_i64(n, prec).sqrt().unwrap(),
            mu: CertifiedReal::from_ratio(&mu_num.into(), &997.into(), prec).unwrap(),
            a: CertifiedReal::from_i64(3, prec),
            b: CertifiedReal::from_i64(2, prec),
            m_bound: BigInt::from(m),
        };
        let Ok(out) = dujella_petho_reduce(&inst) else {
            return Ok(());
        };
        prop_assert!(out.q > inst.six_m());
        let lb = inst.b.ln().unwrap();
        for u in 1..=m as i64 {
            let x = &(&inst.gamma * &CertifiedReal::from_i64(u, prec)) + &inst.mu;
            let lam = x.dist_to_nearest_int();
            if !lam.is_positive() {
                continue;
            }
            // Solutions need w < log(A/|lam|)/log B, which must not exceed the bound.
            let w = inst.a.div(&lam).unwrap().ln().unwrap().div(&lb).unwrap();
            prop_assert!(!w.certainly_gt(&out.reduced_bound), "u={} w={} bound={}", u, w, out.reduced_bound);
        }
    }

    #[test]
    fn g_bounds_hold(k in 3usize..1_500) {
        let pol = PrecisionPolicy::new(256, 1 << 14).unwrap();
        let g = dominant_root(k, &pol).unwrap().g.to_f64();
        prop_assert!(g > 0.276 && g < 0.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn search_hits_are_exact_and_within_digit_bounds(k_min in 3usize..40, width in 0usize..20, n_max in 5i64..120) {
        let dom = SearchDomain { k_min, k_max: k_min + width, n_min: 5, n_max, m_min: 2 };
        for h in exhaustive_search(&dom).unwrap() {
            prop_assert!(h.verify());
            prop_assert!(digit_count_within(h.n as u64, h.m as u64).unwrap());
            let spec = RecurrenceSpec::pell(h.k).unwrap();
            let w = generate_naive(&spec, h.n);
            prop_assert_eq!(w.term(h.n).unwrap(), &h.value);
        }
    }
}
