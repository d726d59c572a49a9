//! Integer feasibility of the two-type point configuration.
//!
//! A point set of size `q + k − 1` whose longest secants have `k` points, with
//! every point on `α` k-secants and `β` (k−1)-secants, satisfies
//! `α(k − 1) + β(k − 2) = q + k − 2`. Two types occur: the base type
//! `(α₀, β₀)` for `a` points and `(α₀ − (k − 2), β₀ + (k − 1))` for `b`
//! points. Exterior points `p_i` count the secants through them, and
//! `F = Σ (p_i − 1)(p_i − 2)` must vanish when every `p_i ∈ {1, 2}`.
//!
//! All arithmetic is exact.

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};
use std::fmt;
use thiserror::Error;

pub type Rational = Ratio<i128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeasibilityError {
    #[error("k must be at least 3, got {0}")]
    KTooSmall(u64),
    #[error("no nonnegative integer base type with beta0 = {beta0} for q = {q}, k = {k}")]
    NoBaseType { q: u64, k: u64, beta0: u64 },
    #[error("b = {b} outside 0..={max}")]
    BadB { b: u64, max: u64 },
    #[error("scan range {0}..={1} outside 4..=200")]
    BadRange(u64, u64),
    #[error("exclusion applies only to labelled I.a / II.a records with b >= 2")]
    NotApplicable,
}

fn ratio(n: i128) -> Rational {
    Rational::from_integer(n)
}

fn choose2(x: Rational) -> Rational {
    x * (x - 1) / 2
}

fn is_nonneg_integer(x: &Rational) -> bool {
    x.is_integer() && !x.is_negative()
}

/// `⌊√q⌋`.
pub fn isqrt(q: u64) -> u64 {
    let mut r = (q as f64).sqrt() as u64;
    while r * r > q {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= q {
        r += 1;
    }
    r
}

/// The base types `(α₀, β₀)` with `α₀, β₀ ≥ 0` integral and
/// `β₀ ≤ (q + k − 2)/(k − 2)`.
pub fn point_types(q: u64, k: u64) -> Result<Vec<(u64, u64)>, FeasibilityError> {
    if k < 3 {
        return Err(FeasibilityError::KTooSmall(k));
    }
    let rhs = q + k - 2;
    Ok((0..=rhs / (k - 2))
        .filter(|b0| (rhs - b0 * (k - 2)).is_multiple_of(k - 1))
        .map(|b0| ((rhs - b0 * (k - 2)) / (k - 1), b0))
        .collect())
}

/// `α₀` for a given `β₀`, if it is a nonnegative integer.
pub fn base_alpha(q: u64, k: u64, beta0: u64) -> Result<u64, FeasibilityError> {
    if k < 3 {
        return Err(FeasibilityError::KTooSmall(k));
    }
    let rhs = q + k - 2;
    let used = beta0 * (k - 2);
    if used > rhs || !(rhs - used).is_multiple_of(k - 1) {
        return Err(FeasibilityError::NoBaseType { q, k, beta0 });
    }
    Ok((rhs - used) / (k - 1))
}

/// The counting quantities with `α₀` allowed to be any rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    pub alpha0: Rational,
    pub a: i128,
    /// Number of k-secants.
    pub n: Rational,
    /// Number of (k−1)-secants.
    pub n_prime: Rational,
    /// Number of exterior points, `q² − k + 2`.
    pub m: i128,
    /// `Σ p_i`.
    pub sum_p: Rational,
    /// `Σ C(p_i, 2)`.
    pub sum_choose2: Rational,
    /// `2 Σ C(p_i, 2) − 2 Σ p_i + 2M`.
    pub f: Rational,
}

/// Counts for real-valued `α₀ = (q + k − 2 − β₀(k − 2))/(k − 1)`.
pub fn relaxed_counts(q: u64, k: u64, beta0: Rational, b: u64) -> Result<Counts, FeasibilityError> {
    if k < 3 {
        return Err(FeasibilityError::KTooSmall(k));
    }
    let max = q + k - 1;
    if b > max {
        return Err(FeasibilityError::BadB { b, max });
    }
    let (qi, ki, bi) = (q as i128, k as i128, b as i128);
    let alpha0 = (ratio(qi + ki - 2) - beta0 * (ki - 2)) / (ki - 1);
    let a = qi + ki - 1 - bi;
    let n = (alpha0 * a + (alpha0 - (ki - 2)) * bi) / ki;
    let n_prime = (beta0 * a + (beta0 + (ki - 1)) * bi) / (ki - 1);
    let m = qi * qi - ki + 2;
    let sum_p = n * (qi + 1 - ki) + n_prime * (qi + 2 - ki);
    let lines_through = alpha0 + beta0;
    let sum_choose2 = choose2(n + n_prime)
        - choose2(lines_through) * a
        - choose2(lines_through + 1) * bi;
    let f = sum_choose2 * 2 - sum_p * 2 + ratio(2 * m);
    Ok(Counts {
        alpha0,
        a,
        n,
        n_prime,
        m,
        sum_p,
        sum_choose2,
        f,
    })
}

/// Counts for an integral base type.
pub fn counts(q: u64, k: u64, beta0: u64, b: u64) -> Result<Counts, FeasibilityError> {
    base_alpha(q, k, beta0)?;
    relaxed_counts(q, k, ratio(beta0 as i128), b)
}

/// `F(q, k, β₀, b)`; an integer whenever `N` and `N′` are.
pub fn f_value(q: u64, k: u64, beta0: u64, b: u64) -> Result<Rational, FeasibilityError> {
    Ok(counts(q, k, beta0, b)?.f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseLabel {
    Ia,
    Ib,
    Ic,
    IIa,
    IIb,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseLabel::Ia => "I.a",
            CaseLabel::Ib => "I.b",
            CaseLabel::Ic => "I.c",
            CaseLabel::IIa => "II.a",
            CaseLabel::IIb => "II.b",
        })
    }
}

impl Serialize for CaseLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn ser_ratio<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibilityRecord {
    pub q: u64,
    pub k: u64,
    pub beta0: u64,
    pub b: u64,
    pub alpha0: u64,
    pub a: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub n: Rational,
    #[serde(serialize_with = "ser_ratio")]
    pub n_prime: Rational,
    pub m: i128,
    #[serde(serialize_with = "ser_ratio")]
    pub sum_p: Rational,
    #[serde(serialize_with = "ser_ratio")]
    pub sum_choose2: Rational,
    #[serde(serialize_with = "ser_ratio")]
    pub f: Rational,
    pub feasible: bool,
    pub case_label: Option<CaseLabel>,
}

/// Full record for one parameter tuple, feasible or not.
pub fn record(q: u64, k: u64, beta0: u64, b: u64) -> Result<FeasibilityRecord, FeasibilityError> {
    let alpha0 = base_alpha(q, k, beta0)?;
    let c = counts(q, k, beta0, b)?;
    let second_type_ok = b == 0 || alpha0 + 2 >= k;
    let feasible = c.f.is_zero()
        && is_nonneg_integer(&c.n)
        && is_nonneg_integer(&c.n_prime)
        && second_type_ok;
    let mut rec = FeasibilityRecord {
        q,
        k,
        beta0,
        b,
        alpha0,
        a: c.a as u64,
        n: c.n,
        n_prime: c.n_prime,
        m: c.m,
        sum_p: c.sum_p,
        sum_choose2: c.sum_choose2,
        f: c.f,
        feasible,
        case_label: None,
    };
    rec.case_label = case_classify(&rec);
    Ok(rec)
}

/// The labelled case whose every condition holds exactly.
pub fn case_classify(r: &FeasibilityRecord) -> Option<CaseLabel> {
    let (q, k, b) = (r.q as i128, r.k as i128, r.b as i128);
    let divides = |d: i128, x: i128| x % d == 0;
    let n_prime_is = |v: i128| r.n_prime == ratio(v);
    let (alpha0, beta0) = (r.alpha0 as i128, r.beta0 as i128);
    match (alpha0 - k, beta0) {
        (-1, 1) => ((k - 1) * (k - 1) == q && divides(k, 2 * b) && n_prime_is(b + k))
            .then_some(CaseLabel::Ia),
        (0, 1) => (k * (k - 1) == q && divides(k, 2 * b) && n_prime_is(b + k + 1))
            .then_some(CaseLabel::Ib),
        (1, 1) => (k * k - 1 == q && divides(k, 2 * b - 2) && n_prime_is(b + k + 2))
            .then_some(CaseLabel::Ic),
        (0, 0) => (k * k - 2 * k + 2 == q && divides(k, 2 * b) && n_prime_is(b))
            .then_some(CaseLabel::IIa),
        (1, 0) => (k * k - k + 1 == q && divides(k, 2 * b - 2) && n_prime_is(b))
            .then_some(CaseLabel::IIb),
        _ => None,
    }
}

/// The k values scanned for `q`: `⌊√q⌋ + 1`, and with `all_k` also `√q`
/// for squares.
pub fn scan_ks(q: u64, all_k: bool) -> Vec<u64> {
    let r = isqrt(q);
    let mut ks = vec![];
    if all_k && r * r == q {
        ks.push(r);
    }
    ks.push(r + 1);
    ks.retain(|&k| k >= 3);
    ks
}

/// Every feasible record for `q_min ≤ q ≤ q_max`, ordered by
/// `(q, k, β₀, b)`.
pub fn scan(q_min: u64, q_max: u64, all_k: bool) -> Result<Vec<FeasibilityRecord>, FeasibilityError> {
    if q_min < 4 || q_max > 200 || q_min > q_max {
        return Err(FeasibilityError::BadRange(q_min, q_max));
    }
    let mut out = vec![];
    for q in q_min..=q_max {
        for k in scan_ks(q, all_k) {
            for (_, beta0) in point_types(q, k)? {
                for b in 0..=q + k - 1 {
                    let r = record(q, k, beta0, b)?;
                    if r.feasible {
                        out.push(r);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Outcome of the two-point argument against a labelled record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    /// Least number of (k−1)-secants two second-type points lie on together:
    /// each is on `β₀ + k − 1` of them and they share at most one.
    pub covered_by_two: u64,
    /// The weaker count `2(k − 1) − 1`.
    pub weak_bound: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub n_prime: Rational,
    pub excluded: bool,
    pub excluded_by_weak_bound: bool,
}

pub fn combinatorial_exclusion(r: &FeasibilityRecord) -> Result<Exclusion, FeasibilityError> {
    if !matches!(r.case_label, Some(CaseLabel::Ia | CaseLabel::IIa)) || r.b < 2 {
        return Err(FeasibilityError::NotApplicable);
    }
    let covered_by_two = 2 * (r.beta0 + r.k - 1) - 1;
    let weak_bound = 2 * (r.k - 1) - 1;
    Ok(Exclusion {
        covered_by_two,
        weak_bound,
        n_prime: r.n_prime,
        excluded: ratio(covered_by_two as i128) > r.n_prime,
        excluded_by_weak_bound: ratio(weak_bound as i128) > r.n_prime,
    })
}
