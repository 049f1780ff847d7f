//! Exact scans for repdigits: the final search over the reduced ranges and
//! finite consistency checks of the cited small cases.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bigseq::{generate, generate_naive, repdigit_decompose, Family, RecurrenceSpec, RepdigitForm};
use crate::error::{Error, Result};

mod decimal_string {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

/// `P_n^(k) = d (10^m - 1)/9`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub k: usize,
    pub n: i64,
    pub d: u8,
    pub m: u32,
    #[serde(with = "decimal_string")]
    pub value: BigInt,
}

impl SolutionRecord {
    /// The `(n, k, d, m)` tuple in the order the theorem lists it.
    pub fn tuple(&self) -> (i64, usize, u8, u32) {
        (self.n, self.k, self.d, self.m)
    }

    /// Recomputes the repdigit from `(d, m)` and compares exactly.
    pub fn verify(&self) -> bool {
        RepdigitForm::new(self.d, self.m).is_ok_and(|r| r.value == self.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchDomain {
    pub k_min: usize,
    pub k_max: usize,
    pub n_min: i64,
    pub n_max: i64,
    pub m_min: u32,
}

impl Default for SearchDomain {
    fn default() -> Self {
        SearchDomain {
            k_min: 3,
            k_max: 400,
            n_min: 5,
            n_max: 99,
            m_min: 2,
        }
    }
}

impl SearchDomain {
    pub fn validate(&self) -> Result<()> {
        if self.k_min < 2 || self.k_min > self.k_max {
            return Err(Error::precondition(format!("bad k range {}..={}", self.k_min, self.k_max)));
        }
        if self.n_min < 1 || self.n_min > self.n_max {
            return Err(Error::precondition(format!("bad n range {}..={}", self.n_min, self.n_max)));
        }
        if self.m_min < 1 {
            return Err(Error::precondition("m_min must be at least 1"));
        }
        Ok(())
    }

    fn ks(&self) -> Vec<usize> {
        (self.k_min..=self.k_max).collect()
    }
}

/// The two solutions with `m >= 2`, as `(n, k, d, m)`.
pub const THEOREM_SOLUTIONS: [(i64, usize, u8, u32); 2] = [(5, 3, 3, 2), (6, 4, 8, 2)];

fn hits_in<'a>(k: usize, terms: impl Iterator<Item = (i64, &'a BigInt)>, dom: &SearchDomain) -> Vec<SolutionRecord> {
    terms
        .filter(|(n, _)| (dom.n_min..=dom.n_max).contains(n))
        .filter_map(|(n, v)| {
            let r = repdigit_decompose(v)?;
            (r.m >= dom.m_min).then_some(SolutionRecord {
                k,
                n,
                d: r.d,
                m: r.m,
                value: r.value,
            })
        })
        .collect()
}

/// Every repdigit `P_n^(k)` in the domain, sorted by `(k, n)`.
pub fn exhaustive_search(dom: &SearchDomain) -> Result<Vec<SolutionRecord>> {
    dom.validate()?;
    let per_k = dom
        .ks()
        .into_par_iter()
        .map(|k| {
            let w = generate(&RecurrenceSpec::pell(k)?, dom.n_max)?;
            Ok(hits_in(k, w.iter(), dom))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<_> = per_k.into_iter().flatten().collect();
    out.sort();
    Ok(out)
}

/// Same scan driven by the textbook recurrence, one `k` at a time.
pub fn naive_search(dom: &SearchDomain) -> Result<Vec<SolutionRecord>> {
    dom.validate()?;
    let mut out = Vec::new();
    for k in dom.ks() {
        let w = generate_naive(&RecurrenceSpec::pell(k)?, dom.n_max);
        out.extend(hits_in(k, w.iter(), dom));
    }
    out.sort();
    Ok(out)
}

/// Whether `hits` is exactly the theorem's solution set.
pub fn matches_theorem(hits: &[SolutionRecord]) -> bool {
    let mut got: Vec<_> = hits.iter().map(SolutionRecord::tuple).collect();
    got.sort();
    let mut want = THEOREM_SOLUTIONS.to_vec();
    want.sort();
    got == want && hits.iter().all(SolutionRecord::verify)
}

/// Repdigit found in a finite scan of some sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanHit {
    pub index: i64,
    pub d: u8,
    pub m: u32,
    #[serde(with = "decimal_string")]
    pub value: BigInt,
}

/// Finite scan standing in for a cited theorem. Not a proof.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConsistencyCheck {
    pub name: String,
    pub scanned: String,
    pub hits: Vec<ScanHit>,
    pub consistent: bool,
}

fn repdigits_of(family: Family, k: usize, n_max: i64) -> Result<Vec<ScanHit>> {
    let w = generate(&RecurrenceSpec::preset(family, k)?, n_max)?;
    Ok(w.iter()
        .filter(|(n, _)| *n >= 0)
        .filter_map(|(index, v)| {
            repdigit_decompose(v).map(|r| ScanHit {
                index,
                d: r.d,
                m: r.m,
                value: r.value,
            })
        })
        .collect())
}

/// For `n <= k + 1` the k-Pell terms are odd-indexed Fibonacci numbers.
/// Checks that identity for every `3 <= k <= k_max` and that no
/// `F_(2n-1)` with `n <= k_max + 1` is a repdigit of two or more digits.
pub fn small_n_regime_check(k_max: usize) -> Result<ConsistencyCheck> {
    if k_max < 3 {
        return Err(Error::precondition(format!("k_max={k_max} must be >= 3")));
    }
    let identity = (3..=k_max)
        .into_par_iter()
        .map(crate::bigseq::pell_equals_fib_check)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|b| b);
    let top = 2 * k_max as i64 + 1;
    let hits: Vec<ScanHit> = repdigits_of(Family::Fibonacci, 2, top)?
        .into_iter()
        .filter(|h| h.index % 2 == 1)
        .collect();
    let consistent = identity && hits.iter().all(|h| h.m < 2);
    Ok(ConsistencyCheck {
        name: "n <= k+1: P_n^(k) = F_(2n-1), no repdigit with m >= 2".into(),
        scanned: format!("k in 3..={k_max}, F_(2n-1) for 2n-1 <= {top}"),
        hits,
        consistent,
    })
}

/// Classical Pell numbers up to `n_max`: only one-digit repdigits, the
/// largest being `P_3 = 5`.
pub fn k2_regime_check(n_max: i64) -> Result<ConsistencyCheck> {
    if n_max < 4 {
        return Err(Error::precondition(format!("n_max={n_max} must be >= 4")));
    }
    let hits = repdigits_of(Family::Pell, 2, n_max)?;
    let largest = hits.iter().max_by(|a, b| a.value.cmp(&b.value));
    let consistent = hits.iter().all(|h| h.m == 1) && largest.is_some_and(|h| h.index == 3 && h.value == BigInt::from(5));
    Ok(ConsistencyCheck {
        name: "k = 2: Pell repdigits are single digits, largest P_3 = 5".into(),
        scanned: format!("n in 0..={n_max}"),
        hits,
        consistent,
    })
}

/// Known repdigit facts about neighbouring sequences, regenerated.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiteratureFact {
    pub label: String,
    pub family: Family,
    pub k: usize,
    pub n: i64,
    pub d: u8,
    pub m: u32,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiteratureReport {
    pub facts: Vec<LiteratureFact>,
    /// `(n, k, d, m)` of k-Fibonacci repdigits with `m >= 2`.
    pub fibonacci_solutions: Vec<(i64, usize, u8, u32)>,
    pub fibonacci_scan: String,
    pub consistent: bool,
}

/// Orders scanned for the k-Fibonacci repdigit set.
pub const LITERATURE_K_MAX: usize = 100;
pub const LITERATURE_N_MAX: i64 = 500;

pub fn literature_crosscheck() -> Result<LiteratureReport> {
    let cases = [
        ("F_10 = 55", Family::Fibonacci, 2, 10, 5, 2),
        ("L_5 = 11", Family::Lucas, 2, 5, 1, 2),
        ("P_3 = 5", Family::Pell, 2, 3, 5, 1),
        ("Q_2 = 6", Family::PellLucas, 2, 2, 6, 1),
        ("F_8^(3) = 44", Family::Fibonacci, 3, 8, 4, 2),
    ];
    let mut facts = Vec::new();
    for (label, family, k, n, d, m) in cases {
        let w = generate(&RecurrenceSpec::preset(family, k)?, LITERATURE_N_MAX)?;
        let holds = w
            .term(n)
            .and_then(repdigit_decompose)
            .is_some_and(|r| r.d == d && r.m == m);
        facts.push(LiteratureFact {
            label: label.into(),
            family,
            k,
            n,
            d,
            m,
            holds,
        });
    }
    let dom = SearchDomain {
        k_min: 2,
        k_max: LITERATURE_K_MAX,
        n_min: 1,
        n_max: LITERATURE_N_MAX,
        m_min: 2,
    };
    let per_k = (2..=LITERATURE_K_MAX)
        .into_par_iter()
        .map(|k| {
            let w = generate(&RecurrenceSpec::fibonacci(k)?, LITERATURE_N_MAX)?;
            Ok(hits_in(k, w.iter(), &dom))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut fibonacci_solutions: Vec<_> = per_k.into_iter().flatten().map(|s| s.tuple()).collect();
    fibonacci_solutions.sort();
    let consistent = facts.iter().all(|f| f.holds) && fibonacci_solutions == [(8, 3, 4, 2), (10, 2, 5, 2)];
    Ok(LiteratureReport {
        facts,
        fibonacci_solutions,
        fibonacci_scan: format!("k in 2..={LITERATURE_K_MAX}, n in 1..={LITERATURE_N_MAX}"),
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigseq::digit_count_within;

    #[test]
    fn theorem_domain() {
        let hits = exhaustive_search(&SearchDomain::default()).unwrap();
        assert!(matches_theorem(&hits), "{hits:?}");
        for h in &hits {
            assert!(digit_count_within(h.n as u64, h.m as u64).unwrap());
        }
    }

    #[test]
    fn single_instance_and_empty_band() {
        let one = SearchDomain {
            k_min: 3,
            k_max: 3,
            n_min: 5,
            n_max: 5,
            m_min: 2,
        };
        let hits = exhaustive_search(&one).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].value, BigInt::from(33));
        let none = SearchDomain {
            k_min: 10,
            k_max: 20,
            n_min: 5,
            n_max: 40,
            m_min: 2,
        };
        assert!(exhaustive_search(&none).unwrap().is_empty());
    }

    #[test]
    fn naive_pass_agrees() {
        let dom = SearchDomain {
            k_max: 60,
            n_min: 1,
            m_min: 1,
            ..SearchDomain::default()
        };
        assert_eq!(exhaustive_search(&dom).unwrap(), naive_search(&dom).unwrap());
    }

    #[test]
    fn single_digit_hits_for_small_n() {
        let dom = SearchDomain {
            k_min: 3,
            k_max: 3,
            n_min: 1,
            n_max: 4,
            m_min: 1,
        };
        let v: Vec<_> = exhaustive_search(&dom).unwrap().iter().map(|h| h.value.clone()).collect();
        assert_eq!(v, [1, 2, 5].map(BigInt::from));
    }

    #[test]
    fn regime_checks() {
        assert!(small_n_regime_check(40).unwrap().consistent);
        let k2 = k2_regime_check(1000).unwrap();
        assert!(k2.consistent);
        assert!(!k2.hits.iter().any(|h| h.index == 7));
        assert!(k2.hits.iter().any(|h| h.index == 2 && h.m == 1));
        assert!(small_n_regime_check(2).is_err());
    }

    #[test]
    fn literature() {
        let r = literature_crosscheck().unwrap();
        assert!(r.consistent, "{r:?}");
    }

    #[test]
    fn record_roundtrip() {
        let r = &exhaustive_search(&SearchDomain::default()).unwrap()[1];
        let s = serde_json::to_string(r).unwrap();
        assert!(s.contains("\"value\":\"88\""));
        assert_eq!(&serde_json::from_str::<SolutionRecord>(&s).unwrap(), r);
    }
}
