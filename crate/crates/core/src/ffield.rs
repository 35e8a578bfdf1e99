//! Arithmetic in finite fields `F_q`, `q = p^k <= 2^16`.
//!
//! Elements are stored as integers in `[0, q)`. For extension fields the
//! integer packs the coefficient vector over `F_p` in base `p`, lowest degree
//! first, so `x` (the class of the generator) is the integer `p`.
//! Multiplication goes through exp/log tables built from a pinned primitive
//! polynomial, which makes every table reproducible across machines.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// Orders up to this size get full addition and multiplication tables.
const DENSE_TABLE_LIMIT: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field order {0} exceeds the supported maximum {MAX_ORDER}")]
    OrderTooLarge(u64),
    #[error("element {value} does not belong to F_{order}")]
    ForeignElement { value: u32, order: u32 },
    #[error("mismatched fields: F_{left} and F_{right}")]
    Mismatch { left: u32, right: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("no prime power q satisfies 2*q^{ell} <= {bound}")]
    NoPrimePower { bound: u64, ell: u32 },
}

/// Monic primitive polynomials `x^k + c_{k-1} x^{k-1} + ... + c_0`, stored as
/// `[c_0, ..., c_{k-1}]`. For each `(p, k)` the entry is the primitive
/// polynomial with the smallest base-`p` encoding of its lower coefficients.
static PRIMITIVE_POLYNOMIALS: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1]),
    (2, 3, &[1, 1, 0]),
    (2, 4, &[1, 1, 0, 0]),
    (2, 5, &[1, 0, 1, 0, 0]),
    (2, 6, &[1, 1, 0, 0, 0, 0]),
    (2, 7, &[1, 1, 0, 0, 0, 0, 0]),
    (2, 8, &[1, 0, 1, 1, 1, 0, 0, 0]),
    (2, 9, &[1, 0, 0, 0, 1, 0, 0, 0, 0]),
    (2, 10, &[1, 0, 0, 1, 0, 0, 0, 0, 0, 0]),
    (2, 11, &[1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0]),
    (2, 12, &[1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0]),
    (2, 13, &[1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0]),
    (2, 14, &[1, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0]),
    (2, 15, &[1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]),
    (2, 16, &[1, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]),
    (3, 2, &[2, 1]),
    (3, 3, &[1, 2, 0]),
    (3, 4, &[2, 1, 0, 0]),
    (3, 5, &[1, 2, 0, 0, 0]),
    (3, 6, &[2, 1, 0, 0, 0, 0]),
    (3, 7, &[1, 2, 1, 0, 0, 0, 0]),
    (3, 8, &[2, 0, 0, 1, 0, 0, 0, 0]),
    (3, 9, &[1, 0, 1, 2, 0, 0, 0, 0, 0]),
    (3, 10, &[2, 1, 0, 1, 0, 0, 0, 0, 0, 0]),
    (5, 2, &[2, 1]),
    (5, 3, &[2, 3, 0]),
    (5, 4, &[2, 2, 1, 0]),
    (5, 5, &[2, 4, 0, 0, 0]),
    (5, 6, &[2, 1, 0, 0, 0, 0]),
    (7, 2, &[3, 1]),
    (7, 3, &[2, 3, 0]),
    (7, 4, &[5, 3, 1, 0]),
    (7, 5, &[4, 1, 0, 0, 0]),
    (11, 2, &[7, 1]),
    (11, 3, &[4, 1, 0]),
    (11, 4, &[2, 1, 0, 0]),
    (13, 2, &[2, 1]),
    (13, 3, &[6, 1, 0]),
    (13, 4, &[2, 1, 1, 0]),
    (17, 2, &[3, 1]),
    (17, 3, &[3, 1, 0]),
    (19, 2, &[2, 1]),
    (19, 3, &[4, 1, 0]),
    (23, 2, &[7, 1]),
    (23, 3, &[3, 1, 0]),
    (29, 2, &[3, 1]),
    (29, 3, &[11, 1, 0]),
    (31, 2, &[12, 1]),
    (31, 3, &[14, 1, 0]),
    (37, 2, &[5, 1]),
    (37, 3, &[13, 1, 0]),
    (41, 2, &[12, 1]),
    (43, 2, &[3, 1]),
    (47, 2, &[13, 1]),
    (53, 2, &[5, 1]),
    (59, 2, &[2, 1]),
    (61, 2, &[2, 1]),
    (67, 2, &[12, 1]),
    (71, 2, &[11, 1]),
    (73, 2, &[11, 1]),
    (79, 2, &[3, 1]),
    (83, 2, &[2, 1]),
    (89, 2, &[6, 1]),
    (97, 2, &[5, 1]),
    (101, 2, &[3, 1]),
    (103, 2, &[5, 1]),
    (107, 2, &[5, 1]),
    (109, 2, &[6, 1]),
    (113, 2, &[10, 1]),
    (127, 2, &[3, 1]),
    (131, 2, &[14, 1]),
    (137, 2, &[6, 1]),
    (139, 2, &[2, 1]),
    (149, 2, &[3, 1]),
    (151, 2, &[12, 1]),
    (157, 2, &[6, 1]),
    (163, 2, &[11, 1]),
    (167, 2, &[5, 1]),
    (173, 2, &[5, 1]),
    (179, 2, &[7, 1]),
    (181, 2, &[18, 1]),
    (191, 2, &[19, 1]),
    (193, 2, &[5, 1]),
    (197, 2, &[3, 1]),
    (199, 2, &[6, 1]),
    (211, 2, &[3, 1]),
    (223, 2, &[5, 1]),
    (227, 2, &[5, 1]),
    (229, 2, &[6, 1]),
    (233, 2, &[3, 1]),
    (239, 2, &[13, 1]),
    (241, 2, &[13, 1]),
    (251, 2, &[19, 1]),
];

/// Deterministic primality test by trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut i = 3u64;
    while i * i <= n {
        if n.is_multiple_of(i) {
            return false;
        }
        i += 2;
    }
    true
}

/// Returns `(p, k)` with `n = p^k`, `p` prime, `k >= 1`, if such exist.
pub fn prime_power_decomposition(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= n && !n.is_multiple_of(p) {
        p += 1;
    }
    if !n.is_multiple_of(p) {
        // n itself is prime
        return Some((n, 1));
    }
    let mut rest = n;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

/// Order, characteristic and extension degree of a finite field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub q: u32,
    pub p: u32,
    pub k: u32,
}

impl FieldSpec {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        let (p, k) = prime_power_decomposition(q).ok_or(FieldError::NotPrimePower(q))?;
        if q > MAX_ORDER as u64 {
            return Err(FieldError::OrderTooLarge(q));
        }
        Ok(FieldSpec {
            q: q as u32,
            p: p as u32,
            k,
        })
    }

    pub fn is_prime_field(&self) -> bool {
        self.k == 1
    }
}

/// The largest prime power `q` with `2 q^ell <= bound`.
pub fn largest_prime_power_with(bound: u64, ell: u32) -> Result<FieldSpec, FieldError> {
    let fits = |q: u64| -> bool {
        q.checked_pow(ell)
            .and_then(|v| v.checked_mul(2))
            .is_some_and(|v| v <= bound)
    };
    if ell == 0 || !fits(2) {
        return Err(FieldError::NoPrimePower { bound, ell });
    }
    let mut hi = 2u64;
    while fits(hi + 1) {
        hi += 1;
    }
    let q = (2..=hi)
        .rev()
        .find(|&q| prime_power_decomposition(q).is_some())
        .expect("2 is a prime power");
    FieldSpec::new(q)
}

/// An element of `F_q`, tagged with the order of its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldElement {
    value: u32,
    order: u32,
}

impl FieldElement {
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

#[derive(Debug, Clone)]
enum AddKind {
    Prime,
    Binary,
    Table(Vec<u32>),
    Digits,
}

/// Immutable arithmetic tables for one field.
#[derive(Debug, Clone)]
pub struct Field {
    spec: FieldSpec,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    add: AddKind,
    mul_table: Option<Vec<u32>>,
}

impl Field {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        Self::from_spec(FieldSpec::new(q)?)
    }

    pub fn from_spec(spec: FieldSpec) -> Result<Self, FieldError> {
        let FieldSpec { q, p, k } = spec;
        let modulus = if k == 1 {
            Vec::new()
        } else {
            pinned_primitive_polynomial(p, k)
                .ok_or(FieldError::OrderTooLarge(q as u64))?
                .to_vec()
        };

        // generator: smallest primitive root for prime fields, x otherwise
        let generator = if k == 1 {
            smallest_primitive_root(p)
        } else {
            p
        };
        let n = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * n.max(1)];
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u32;
        for i in 0..n {
            exp[i] = cur;
            log[cur as usize] = i as u32;
            cur = if k == 1 {
                ((cur as u64 * generator as u64) % p as u64) as u32
            } else {
                mul_by_x(cur, &modulus, p)
            };
        }
        debug_assert_eq!(cur, 1, "generator order must be q - 1");
        for i in n..exp.len() {
            exp[i] = exp[i - n];
        }

        let mut field = Field {
            spec,
            modulus,
            exp,
            log,
            add: if k == 1 {
                AddKind::Prime
            } else if p == 2 {
                AddKind::Binary
            } else {
                AddKind::Digits
            },
            mul_table: None,
        };
        if q <= DENSE_TABLE_LIMIT {
            let qs = q as usize;
            let mut add = vec![0u32; qs * qs];
            let mut mul = vec![0u32; qs * qs];
            for a in 0..q {
                for b in 0..q {
                    add[a as usize * qs + b as usize] = field.add_raw(a, b);
                    mul[a as usize * qs + b as usize] = field.mul_raw(a, b);
                }
            }
            if k > 1 && p != 2 {
                field.add = AddKind::Table(add);
            }
            field.mul_table = Some(mul);
        }
        Ok(field)
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn order(&self) -> u32 {
        self.spec.q
    }

    /// Lower coefficients of the defining polynomial (empty for prime fields).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn element(&self, value: u32) -> Result<FieldElement, FieldError> {
        if value >= self.spec.q {
            return Err(FieldError::ForeignElement {
                value,
                order: self.spec.q,
            });
        }
        Ok(FieldElement {
            value,
            order: self.spec.q,
        })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            value: 0,
            order: self.spec.q,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            value: 1,
            order: self.spec.q,
        }
    }

    /// The class of `x` in `F_p[x]/(f)` for extension fields.
    pub fn generator(&self) -> FieldElement {
        self.wrap(self.exp[1 % self.exp.len()])
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.spec.q).map(|v| self.wrap(v))
    }

    fn wrap(&self, value: u32) -> FieldElement {
        FieldElement {
            value,
            order: self.spec.q,
        }
    }

    fn check(&self, a: FieldElement) -> Result<u32, FieldError> {
        if a.order != self.spec.q {
            return Err(FieldError::Mismatch {
                left: self.spec.q,
                right: a.order,
            });
        }
        Ok(a.value)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.wrap(self.add_raw(self.check(a)?, self.check(b)?)))
    }

    pub fn neg(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.wrap(self.neg_raw(self.check(a)?)))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        let b = self.neg_raw(self.check(b)?);
        Ok(self.wrap(self.add_raw(self.check(a)?, b)))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.wrap(self.mul_raw(self.check(a)?, self.check(b)?)))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        let a = self.check(a)?;
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.wrap(self.inv_raw(a)))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> Result<FieldElement, FieldError> {
        Ok(self.wrap(self.pow_raw(self.check(a)?, e)))
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        self.wrap(self.random_raw(rng))
    }

    // Unchecked arithmetic on canonical representatives. Callers guarantee
    // that inputs lie in [0, q).

    #[inline]
    pub fn add_raw(&self, a: u32, b: u32) -> u32 {
        match &self.add {
            AddKind::Prime => {
                let s = a + b;
                if s >= self.spec.q {
                    s - self.spec.q
                } else {
                    s
                }
            }
            AddKind::Binary => a ^ b,
            AddKind::Table(t) => t[(a * self.spec.q + b) as usize],
            AddKind::Digits => {
                let p = self.spec.p;
                let (mut a, mut b) = (a, b);
                let (mut out, mut place) = (0u32, 1u32);
                for _ in 0..self.spec.k {
                    out += ((a % p + b % p) % p) * place;
                    a /= p;
                    b /= p;
                    place *= p;
                }
                out
            }
        }
    }

    #[inline]
    pub fn neg_raw(&self, a: u32) -> u32 {
        let FieldSpec { q, p, k } = self.spec;
        if a == 0 || p == 2 {
            return a;
        }
        if k == 1 {
            return q - a;
        }
        let (mut a, mut out, mut place) = (a, 0u32, 1u32);
        for _ in 0..k {
            out += ((p - a % p) % p) * place;
            a /= p;
            place *= p;
        }
        out
    }

    #[inline]
    pub fn mul_raw(&self, a: u32, b: u32) -> u32 {
        if let Some(t) = &self.mul_table {
            return t[(a * self.spec.q + b) as usize];
        }
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    #[inline]
    pub fn inv_raw(&self, a: u32) -> u32 {
        debug_assert!(a != 0);
        let n = self.spec.q - 1;
        self.exp[((n - self.log[a as usize]) % n) as usize]
    }

    pub fn pow_raw(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = (self.spec.q - 1) as u64;
        self.exp[((self.log[a as usize] as u64 * (e % n)) % n) as usize]
    }

    #[inline]
    pub fn random_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.gen_range(0..self.spec.q)
    }
}

fn pinned_primitive_polynomial(p: u32, k: u32) -> Option<&'static [u32]> {
    PRIMITIVE_POLYNOMIALS
        .iter()
        .find(|(pp, kk, _)| *pp == p && *kk == k)
        .map(|(_, _, c)| *c)
}

/// Multiplies the packed polynomial `v` by `x` modulo the monic modulus.
fn mul_by_x(v: u32, modulus: &[u32], p: u32) -> u32 {
    let k = modulus.len();
    let mut digits = vec![0u32; k + 1];
    let mut rest = v;
    for d in digits.iter_mut().skip(1) {
        *d = rest % p;
        rest /= p;
    }
    let top = digits[k];
    let mut out = 0u32;
    for i in (0..k).rev() {
        let c = (digits[i] + (p - top) * modulus[i]) % p;
        out = out * p + c;
    }
    out
}

fn smallest_primitive_root(p: u32) -> u32 {
    if p == 2 {
        return 1;
    }
    let n = p - 1;
    let factors: Vec<u32> = (2..=n)
        .filter(|&f| n.is_multiple_of(f) && is_prime(f as u64))
        .collect();
    (2..p)
        .find(|&g| {
            factors.iter().all(|&f| {
                let mut acc = 1u64;
                let mut base = g as u64;
                let mut e = n / f;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = acc * base % p as u64;
                    }
                    base = base * base % p as u64;
                    e >>= 1;
                }
                acc != 1
            })
        })
        .expect("every prime has a primitive root")
}
