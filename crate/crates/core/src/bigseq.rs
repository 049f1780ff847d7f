//! Exact generation of order-k recurrences
//! `G(n) = r G(n-1) + G(n-2) + ... + G(n-k)` and the decimal repdigit
//! structure of their terms.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Pow, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on materialized term storage: 1 GiB.
pub const DEFAULT_MEMORY_CAP: u64 = 1 << 30;

/// Named seed/coefficient presets `(a, b, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Fibonacci,
    Lucas,
    Pell,
    PellLucas,
}

impl Family {
    /// `(G_0, G_1, r)`.
    pub fn params(self) -> (i64, i64, i64) {
        match self {
            Family::Fibonacci => (0, 1, 1),
            Family::Lucas => (2, 1, 1),
            Family::Pell => (0, 1, 2),
            Family::PellLucas => (2, 2, 2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Fibonacci => "fibonacci",
            Family::Lucas => "lucas",
            Family::Pell => "pell",
            Family::PellLucas => "pell-lucas",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecurrenceSpec {
    pub k: usize,
    pub r: i64,
    /// G_0
    pub a: i64,
    /// G_1
    pub b: i64,
}

impl RecurrenceSpec {
    pub fn new(k: usize, r: i64, a: i64, b: i64) -> Result<Self> {
        if k < 2 {
            return Err(Error::precondition(format!("order k={k} must be >= 2")));
        }
        Ok(RecurrenceSpec { k, r, a, b })
    }

    pub fn preset(family: Family, k: usize) -> Result<Self> {
        let (a, b, r) = family.params();
        RecurrenceSpec::new(k, r, a, b)
    }

    /// The k-generalized Pell sequence.
    pub fn pell(k: usize) -> Result<Self> {
        RecurrenceSpec::preset(Family::Pell, k)
    }

    pub fn fibonacci(k: usize) -> Result<Self> {
        RecurrenceSpec::preset(Family::Fibonacci, k)
    }

    /// Index of the first stored term, `2 - k`.
    pub fn first_index(&self) -> i64 {
        2 - self.k as i64
    }

    pub fn stream(&self) -> TermStream {
        TermStream::new(self.clone())
    }

    /// Rough upper bound on the bytes needed to hold indices `2-k..=n_max`.
    pub fn estimated_bytes(&self, n_max: i64) -> u64 {
        let count = (n_max - self.first_index() + 1).max(0) as f64;
        let per_step = ((self.r.unsigned_abs() + 2) as f64).log2();
        let seed_bits = (self.a.unsigned_abs().max(self.b.unsigned_abs()).max(1) as f64).log2() + 1.0;
        let n = n_max.max(0) as f64;
        let bits = n * n / 2.0 * per_step + count * seed_bits;
        (bits / 8.0 + count * 32.0).ceil() as u64
    }
}

impl fmt::Display for RecurrenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} r={} G0={} G1={}", self.k, self.r, self.a, self.b)
    }
}

/// Unbounded term iterator that keeps only the last `k` terms, yielding
/// `(index, value)` starting at index `2 - k`.
pub struct TermStream {
    spec: RecurrenceSpec,
    next_index: i64,
    window: VecDeque<BigInt>,
    /// Sum of every window entry except the most recent.
    tail_sum: BigInt,
}

impl TermStream {
    fn new(spec: RecurrenceSpec) -> Self {
        TermStream {
            next_index: spec.first_index(),
            window: VecDeque::with_capacity(spec.k + 1),
            tail_sum: BigInt::zero(),
            spec,
        }
    }

    fn seed(&self, n: i64) -> Option<BigInt> {
        match n {
            n if n < 0 => Some(BigInt::zero()),
            0 => Some(BigInt::from(self.spec.a)),
            1 => Some(BigInt::from(self.spec.b)),
            _ => None,
        }
    }
}

impl Iterator for TermStream {
    type Item = (i64, BigInt);

    fn next(&mut self) -> Option<(i64, BigInt)> {
        let n = self.next_index;
        let value = match self.seed(n) {
            Some(v) => v,
            None => {
                let last = self.window.back().expect("window filled by seeds");
                last * self.spec.r + &self.tail_sum
            }
        };
        // Slide: the previous newest term joins the tail sum, the oldest
        // leaves once the window is full.
        if let Some(prev) = self.window.back() {
            self.tail_sum += prev;
        }
        self.window.push_back(value.clone());
        if self.window.len() > self.spec.k {
            let old = self.window.pop_front().expect("nonempty");
            self.tail_sum -= old;
        }
        self.next_index += 1;
        Some((n, value))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceWindow {
    pub spec: RecurrenceSpec,
    pub first_index: i64,
    pub terms: Vec<BigInt>,
}

impl SequenceWindow {
    pub fn last_index(&self) -> i64 {
        self.first_index + self.terms.len() as i64 - 1
    }

    pub fn term(&self, n: i64) -> Option<&BigInt> {
        if n < self.first_index {
            return None;
        }
        self.terms.get((n - self.first_index) as usize)
    }

    pub fn last(&self) -> Option<&BigInt> {
        self.terms.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &BigInt)> + '_ {
        self.terms
            .iter()
            .enumerate()
            .map(move |(i, t)| (self.first_index + i as i64, t))
    }
}

/// Terms for indices `2-k ..= n_max` under the default memory budget.
pub fn generate(spec: &RecurrenceSpec, n_max: i64) -> Result<SequenceWindow> {
    generate_with_cap(spec, n_max, DEFAULT_MEMORY_CAP)
}

pub fn generate_with_cap(spec: &RecurrenceSpec, n_max: i64, cap: u64) -> Result<SequenceWindow> {
    if n_max < 0 {
        return Err(Error::precondition(format!("n_max={n_max} must be >= 0")));
    }
    let needed = spec.estimated_bytes(n_max);
    if needed > cap {
        return Err(Error::MemoryBudget { n_max, needed, cap });
    }
    let terms = spec
        .stream()
        .take_while(|(n, _)| *n <= n_max)
        .map(|(_, v)| v)
        .collect();
    Ok(SequenceWindow {
        spec: spec.clone(),
        first_index: spec.first_index(),
        terms,
    })
}

/// Reference generator that re-sums the last `k` terms for every index.
pub fn generate_naive(spec: &RecurrenceSpec, n_max: i64) -> SequenceWindow {
    let first = spec.first_index();
    let mut terms: Vec<BigInt> = Vec::new();
    for n in first..=n_max {
        let v = if n < 0 {
            BigInt::zero()
        } else if n == 0 {
            BigInt::from(spec.a)
        } else if n == 1 {
            BigInt::from(spec.b)
        } else {
            let i = (n - first) as usize;
            let mut s = &terms[i - 1] * spec.r;
            for j in 2..=spec.k {
                s += &terms[i - j];
            }
            s
        };
        terms.push(v);
    }
    SequenceWindow {
        spec: spec.clone(),
        first_index: first,
        terms,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepdigitForm {
    pub d: u8,
    pub m: u32,
    pub value: BigInt,
}

impl RepdigitForm {
    /// `d (10^m - 1) / 9`.
    pub fn new(d: u8, m: u32) -> Result<Self> {
        if !(1..=9).contains(&d) || m == 0 {
            return Err(Error::precondition(format!("bad repdigit d={d} m={m}")));
        }
        let value = (Pow::pow(&BigInt::from(10), m) - 1u32) / 9u32 * d;
        Ok(RepdigitForm { d, m, value })
    }
}

/// `(d, m)` when every decimal digit of `n > 0` equals `d`.
pub fn repdigit_decompose(n: &BigInt) -> Option<RepdigitForm> {
    if !n.is_positive() {
        return None;
    }
    let s = n.to_str_radix(10);
    let first = s.as_bytes()[0];
    if !s.bytes().all(|c| c == first) {
        return None;
    }
    Some(RepdigitForm {
        d: first - b'0',
        m: s.len() as u32,
        value: n.clone(),
    })
}

/// Number of decimal digits of a positive integer.
pub fn decimal_len(n: &BigInt) -> usize {
    n.magnitude().to_str_radix(10).len()
}

/// Whether `P_n^(k) = F_(2n-1)` for every `1 <= n <= k + 1`.
pub fn pell_equals_fib_check(k: usize) -> Result<bool> {
    let pell = generate(&RecurrenceSpec::pell(k)?, k as i64 + 1)?;
    let fib = generate(&RecurrenceSpec::fibonacci(2)?, 2 * k as i64 + 1)?;
    Ok((1..=k as i64 + 1).all(|n| pell.term(n) == fib.term(2 * n - 1)))
}

/// Open interval `(3n/20, 3n/4)` that must contain the digit count of a
/// k-Pell repdigit with index `n >= 5`.
pub fn digit_count_bounds(n: u64) -> Result<(Ratio<u64>, Ratio<u64>)> {
    if n < 5 {
        return Err(Error::precondition(format!(
            "digit-count bounds need n >= 5, got {n}"
        )));
    }
    Ok((Ratio::new(3 * n, 20), Ratio::new(3 * n, 4)))
}

/// Whether `m` lies strictly inside `digit_count_bounds(n)`.
pub fn digit_count_within(n: u64, m: u64) -> Result<bool> {
    let (lo, hi) = digit_count_bounds(n)?;
    let m = Ratio::from_integer(m);
    Ok(lo < m && m < hi)
}
