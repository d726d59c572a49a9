//! Arithmetic in GF(p^h).
//!
//! Elements are encoded as integers in `[0, q)` whose base-`p` digits are the
//! polynomial coefficients (constant term least significant). Prime fields use
//! plain modular arithmetic; extension fields precompute addition, negation
//! and log/exp tables once per [`FieldSpec`].

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Largest field order accepted by [`FieldSpec::new`].
pub const MAX_ORDER: u64 = 1 << 16;

/// Monic irreducible moduli for the extension fields of order at most 169.
///
/// Each entry is the monic degree-`h` irreducible whose lower coefficients,
/// read as a base-`p` integer with the constant term least significant, are
/// smallest. Coefficients are listed constant term first.
const MODULI: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 0, 0, 0, 1]),
    (2, 7, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (3, 2, &[1, 0, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 1, 0, 0, 1]),
    (5, 2, &[2, 0, 1]),
    (5, 3, &[1, 1, 0, 1]),
    (7, 2, &[1, 0, 1]),
    (11, 2, &[1, 0, 1]),
    (13, 2, &[2, 0, 1]),
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("unsupported field GF({p}^{h})")]
    Unsupported { p: u64, h: u32 },
    #[error("division by zero")]
    DivisionByZero,
}

/// A field element, valid only together with the [`FieldSpec`] that made it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn rep(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq)]
struct ExtTables {
    add: Vec<u16>,
    neg: Vec<u16>,
    /// `exp[i] = g^i` for `i < 2(q-1)`, so products need no reduction.
    exp: Vec<u16>,
    /// `log[0]` is unused.
    log: Vec<u16>,
}

/// Description of GF(p^h) plus whatever tables its arithmetic needs.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: u32,
    h: u32,
    q: u32,
    modulus: Vec<u32>,
    tables: Option<ExtTables>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("h", &self.h)
            .field("modulus", &self.modulus)
            .finish()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` into `(p, h)` with `q = p^h`, if `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut h = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        h += 1;
    }
    (rest == 1).then_some((p, h))
}

impl FieldSpec {
    /// GF(p^h) with the built-in modulus for `(p, h)`.
    pub fn new(p: u64, h: u32) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let unsupported = FieldError::Unsupported { p, h };
        if h == 0 {
            return Err(unsupported);
        }
        let q = p.checked_pow(h).ok_or(unsupported.clone())?;
        if q > MAX_ORDER {
            return Err(unsupported);
        }
        let (p, q) = (p as u32, q as u32);
        if h == 1 {
            return Ok(FieldSpec {
                p,
                h,
                q,
                modulus: vec![0, 1],
                tables: None,
            });
        }
        let modulus = MODULI
            .iter()
            .find(|(mp, mh, _)| *mp == p && *mh == h)
            .map(|(_, _, m)| m.to_vec())
            .ok_or(unsupported)?;
        let tables = build_tables(p, h, q, &modulus);
        Ok(FieldSpec {
            p,
            h,
            q,
            modulus,
            tables: Some(tables),
        })
    }

    /// GF(q) for a prime power `q`.
    pub fn of_order(q: u64) -> Result<Self, FieldError> {
        match prime_power(q) {
            Some((p, h)) => FieldSpec::new(p, h),
            None => Err(FieldError::NotPrime(q)),
        }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.h
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Modulus coefficients, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Element with the given integer encoding.
    pub fn element(&self, rep: u32) -> Option<FieldElement> {
        (rep < self.q).then_some(FieldElement(rep))
    }

    /// All `q` elements in ascending encoding order (so `0` then `1`).
    pub fn elements(&self) -> Vec<FieldElement> {
        (0..self.q).map(FieldElement).collect()
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.tables {
            None => FieldElement(((a.0 as u64 + b.0 as u64) % self.q as u64) as u32),
            Some(t) => FieldElement(t.add[(a.0 * self.q + b.0) as usize] as u32),
        }
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        match &self.tables {
            None if a.0 == 0 => a,
            None => FieldElement(self.q - a.0),
            Some(t) => FieldElement(t.neg[a.0 as usize] as u32),
        }
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        match &self.tables {
            None => FieldElement(((a.0 as u64 * b.0 as u64) % self.q as u64) as u32),
            Some(t) => {
                let i = t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize;
                FieldElement(t.exp[i] as u32)
            }
        }
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match &self.tables {
            None => self.pow(a, self.q as u64 - 2),
            Some(t) => {
                let order = self.q as usize - 1;
                let l = t.log[a.0 as usize] as usize;
                FieldElement(t.exp[(order - l) % order] as u32)
            }
        })
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`, with `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Elements of the subfield of order `sub`, if `sub^m = q` for some `m`.
    pub fn subfield(&self, sub: u32) -> Option<Vec<FieldElement>> {
        let (sp, sh) = prime_power(sub as u64)?;
        if sp != self.p as u64 || !self.h.is_multiple_of(sh) {
            return None;
        }
        let out: Vec<_> = self
            .elements()
            .into_iter()
            .filter(|&x| self.pow(x, sub as u64) == x)
            .collect();
        debug_assert_eq!(out.len(), sub as usize);
        Some(out)
    }
}

fn digits(mut rep: u32, p: u32, h: u32) -> Vec<u32> {
    (0..h)
        .map(|_| {
            let d = rep % p;
            rep /= p;
            d
        })
        .collect()
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Schoolbook product of two residues modulo the monic `modulus`.
fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let h = modulus.len() - 1;
    let mut r = vec![0u32; 2 * h - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + x * y) % p;
        }
    }
    for d in (h..r.len()).rev() {
        let c = r[d];
        if c != 0 {
            for (i, &m) in modulus.iter().enumerate() {
                let idx = d - h + i;
                r[idx] = (r[idx] + (p - c) * m) % p;
            }
        }
    }
    r.truncate(h);
    r
}

fn build_tables(p: u32, h: u32, q: u32, modulus: &[u32]) -> ExtTables {
    let qs = q as usize;
    let digs: Vec<Vec<u32>> = (0..q).map(|r| digits(r, p, h)).collect();
    let mut add = vec![0u16; qs * qs];
    for a in 0..qs {
        for b in 0..qs {
            let s: Vec<u32> = digs[a]
                .iter()
                .zip(&digs[b])
                .map(|(x, y)| (x + y) % p)
                .collect();
            add[a * qs + b] = undigits(&s, p) as u16;
        }
    }
    let neg: Vec<u16> = digs
        .iter()
        .map(|d| {
            let n: Vec<u32> = d.iter().map(|&x| (p - x) % p).collect();
            undigits(&n, p) as u16
        })
        .collect();

    // The modulus need not be primitive, so search for a generator.
    let order = qs - 1;
    for g in 2..q {
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; qs];
        let mut cur = vec![0u32; h as usize];
        cur[0] = 1;
        let mut seen_one_early = false;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            let rep = undigits(&cur, p);
            if i > 0 && rep == 1 {
                seen_one_early = true;
                break;
            }
            *slot = rep as u16;
            log[rep as usize] = i as u16;
            cur = poly_mulmod(&cur, &digs[g as usize], modulus, p);
        }
        if seen_one_early {
            continue;
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        return ExtTables { add, neg, exp, log };
    }
    unreachable!("GF({q}) has a primitive element")
}
