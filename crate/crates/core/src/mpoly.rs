//! Dense multivariate polynomials of bounded total degree over `F_q`.
//!
//! Coefficients are indexed by the position of their monomial in a graded
//! lexicographic [`MonomialBasis`]. Besides point evaluation, a polynomial can
//! be tabulated on all of `F_q^s` at once: exponents are first folded with
//! `x^q = x`, then the folded coefficient tensor is transformed one axis at a
//! time. Random algebraic graphs use the table; everything else evaluates
//! point by point.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffield::{Field, FieldElement, FieldError, FieldSpec};

/// Default cap on the number of stored coefficients.
pub const DEFAULT_COEFF_CAP: usize = 1 << 28;

/// Largest point grid `q^s` that [`Polynomial::value_table`] will build.
pub const GRID_CAP: usize = 1 << 26;

pub const SIDECAR_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("monomial basis for s={vars}, d={degree} has {size} terms, above the cap of {cap}")]
    BasisTooLarge {
        vars: usize,
        degree: u32,
        size: u128,
        cap: usize,
    },
    #[error("expected a point with {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("grid of {size} points exceeds the cap of {cap}")]
    GridTooLarge { size: u128, cap: usize },
    #[error("polynomial needs at least one variable")]
    NoVariables,
    #[error("invalid sidecar: {0}")]
    Sidecar(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `binomial(n, k)` as `u128`, saturating.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// All exponent tuples in `s` variables with total degree at most `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    vars: usize,
    degree: u32,
    exponents: Vec<u16>,
}

impl MonomialBasis {
    /// Graded lexicographic enumeration: by total degree, then by descending
    /// exponent of the first variable, then the second, and so on.
    pub fn enumerate(vars: usize, degree: u32, cap: usize) -> Result<Self, PolyError> {
        if vars == 0 {
            return Err(PolyError::NoVariables);
        }
        let size = binomial(vars as u64 + degree as u64, vars as u64);
        if size > cap as u128 {
            return Err(PolyError::BasisTooLarge {
                vars,
                degree,
                size,
                cap,
            });
        }
        let mut exponents = Vec::with_capacity(size as usize * vars);
        let mut current = vec![0u16; vars];
        for total in 0..=degree {
            compositions(total, 0, &mut current, &mut exponents);
        }
        debug_assert_eq!(exponents.len(), size as usize * vars);
        Ok(MonomialBasis {
            vars,
            degree,
            exponents,
        })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len() / self.vars
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn monomial(&self, index: usize) -> &[u16] {
        &self.exponents[index * self.vars..(index + 1) * self.vars]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u16]> {
        self.exponents.chunks_exact(self.vars)
    }
}

fn compositions(remaining: u32, var: usize, current: &mut [u16], out: &mut Vec<u16>) {
    if var + 1 == current.len() {
        current[var] = remaining as u16;
        out.extend_from_slice(current);
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u16;
        compositions(remaining - e, var + 1, current, out);
    }
    current[var] = 0;
}

#[derive(Debug, Clone)]
pub struct Polynomial {
    basis: Arc<MonomialBasis>,
    coeffs: Vec<u32>,
}

impl Polynomial {
    pub fn zero(basis: Arc<MonomialBasis>) -> Self {
        let coeffs = vec![0; basis.len()];
        Polynomial { basis, coeffs }
    }

    /// Builds a polynomial from raw coefficient values, one per basis monomial.
    pub fn from_coeffs(
        basis: Arc<MonomialBasis>,
        field: &Field,
        coeffs: Vec<u32>,
    ) -> Result<Self, PolyError> {
        if coeffs.len() != basis.len() {
            return Err(PolyError::Dimension {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        for &c in &coeffs {
            field.element(c)?;
        }
        Ok(Polynomial { basis, coeffs })
    }

    /// Each coefficient independently uniform over `F_q`.
    pub fn sample<R: rand::Rng + ?Sized>(
        basis: Arc<MonomialBasis>,
        field: &Field,
        rng: &mut R,
    ) -> Self {
        let coeffs = (0..basis.len()).map(|_| field.random_raw(rng)).collect();
        Polynomial { basis, coeffs }
    }

    pub fn basis(&self) -> &Arc<MonomialBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn coeff(&self, field: &Field, index: usize) -> FieldElement {
        field
            .element(self.coeffs[index])
            .expect("coefficients are canonical")
    }

    pub fn evaluate(
        &self,
        field: &Field,
        point: &[FieldElement],
    ) -> Result<FieldElement, PolyError> {
        if point.len() != self.basis.vars {
            return Err(PolyError::Dimension {
                expected: self.basis.vars,
                got: point.len(),
            });
        }
        let mut raw = Vec::with_capacity(point.len());
        for &x in point {
            if x.order() != field.order() {
                return Err(FieldError::Mismatch {
                    left: field.order(),
                    right: x.order(),
                }
                .into());
            }
            raw.push(x.value());
        }
        Ok(field.element(self.evaluate_raw(field, &raw))?)
    }

    /// Evaluates at canonical coordinates. The point must have `vars` entries.
    pub fn evaluate_raw(&self, field: &Field, point: &[u32]) -> u32 {
        let powers = PowerTable::new(field, point, self.basis.degree);
        self.evaluate_with(field, &powers)
    }

    fn evaluate_with(&self, field: &Field, powers: &PowerTable) -> u32 {
        let mut acc = 0u32;
        for (mono, &c) in self.basis.iter().zip(&self.coeffs) {
            if c == 0 {
                continue;
            }
            let mut term = c;
            for (var, &e) in mono.iter().enumerate() {
                if e != 0 {
                    term = field.mul_raw(term, powers.get(var, e));
                }
            }
            acc = field.add_raw(acc, term);
        }
        acc
    }

    /// Values at every point of `F_q^s`; the point `(x_0, .., x_{s-1})` sits
    /// at index `sum x_i q^(s-1-i)`.
    pub fn value_table(&self, field: &Field) -> Result<Vec<u32>, PolyError> {
        let q = field.order() as usize;
        let s = self.basis.vars;
        let size = (q as u128).checked_pow(s as u32).unwrap_or(u128::MAX);
        if size > GRID_CAP as u128 {
            return Err(PolyError::GridTooLarge {
                size,
                cap: GRID_CAP,
            });
        }
        let size = size as usize;

        // fold exponents: x^0 = 1 and x^a = x^(1 + (a-1) mod (q-1)) for a >= 1
        let fold = |a: u16| -> usize {
            if a == 0 {
                0
            } else {
                1 + (a as usize - 1) % (q - 1)
            }
        };
        let mut table = vec![0u32; size];
        for (mono, &c) in self.basis.iter().zip(&self.coeffs) {
            if c == 0 {
                continue;
            }
            let idx = mono.iter().fold(0usize, |acc, &a| acc * q + fold(a));
            table[idx] = field.add_raw(table[idx], c);
        }

        // x^e for x, e in [0, q)
        let mut pow = vec![0u32; q * q];
        for x in 0..q {
            for e in 0..q {
                pow[x * q + e] = field.pow_raw(x as u32, e as u64);
            }
        }

        let mut fiber = vec![0u32; q];
        let mut stride = size / q;
        for _axis in 0..s {
            let block = stride * q;
            for start in (0..size).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (e, slot) in fiber.iter_mut().enumerate() {
                        *slot = table[base + e * stride];
                    }
                    for x in 0..q {
                        let row = &pow[x * q..(x + 1) * q];
                        let mut acc = 0u32;
                        for (&c, &xe) in fiber.iter().zip(row) {
                            if c != 0 {
                                acc = field.add_raw(acc, field.mul_raw(c, xe));
                            }
                        }
                        table[base + x * stride] = acc;
                    }
                }
            }
            stride /= q.max(1);
        }
        Ok(table)
    }
}

/// `x_i^e` for every coordinate `i` and `0 <= e <= d`.
struct PowerTable {
    width: usize,
    data: Vec<u32>,
}

impl PowerTable {
    fn new(field: &Field, point: &[u32], degree: u32) -> Self {
        let width = degree as usize + 1;
        let mut data = vec![0u32; point.len() * width];
        for (i, &x) in point.iter().enumerate() {
            let row = &mut data[i * width..(i + 1) * width];
            row[0] = 1;
            for e in 1..width {
                row[e] = field.mul_raw(row[e - 1], x);
            }
        }
        PowerTable { width, data }
    }

    #[inline]
    fn get(&self, var: usize, e: u16) -> u32 {
        self.data[var * self.width + e as usize]
    }
}

/// The `ell - 1` polynomials in `2 ell` variables defining a random algebraic
/// graph.
#[derive(Debug, Clone)]
pub struct PolynomialSystem {
    ell: u32,
    seed: u64,
    stream: u64,
    field: FieldSpec,
    polys: Vec<Polynomial>,
}

impl PolynomialSystem {
    /// Samples `ell - 1` independent polynomials from a ChaCha8 stream keyed by
    /// `(seed, stream)`.
    pub fn sample(
        ell: u32,
        field: &Field,
        degree: u32,
        seed: u64,
        stream: u64,
        coeff_cap: usize,
    ) -> Result<Self, PolyError> {
        let count = ell.saturating_sub(1) as usize;
        let basis = Arc::new(MonomialBasis::enumerate(
            2 * ell as usize,
            degree,
            coeff_cap,
        )?);
        let total = basis.len() as u128 * count as u128;
        if total > coeff_cap as u128 {
            return Err(PolyError::BasisTooLarge {
                vars: basis.vars(),
                degree,
                size: total,
                cap: coeff_cap,
            });
        }
        let mut rng = system_rng(seed, stream);
        let polys = (0..count)
            .map(|_| Polynomial::sample(Arc::clone(&basis), field, &mut rng))
            .collect();
        Ok(PolynomialSystem {
            ell,
            seed,
            stream,
            field: field.spec(),
            polys,
        })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn field_spec(&self) -> FieldSpec {
        self.field
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn degree(&self) -> u32 {
        self.polys.first().map_or(0, |p| p.basis.degree)
    }

    /// True iff every polynomial vanishes at `(u, v)`.
    pub fn evaluate(
        &self,
        field: &Field,
        u: &[FieldElement],
        v: &[FieldElement],
    ) -> Result<bool, PolyError> {
        let ell = self.ell as usize;
        for part in [u, v] {
            if part.len() != ell {
                return Err(PolyError::Dimension {
                    expected: ell,
                    got: part.len(),
                });
            }
        }
        let point: Vec<FieldElement> = u.iter().chain(v).copied().collect();
        for f in &self.polys {
            if !f.evaluate(field, &point)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Unchecked variant over the concatenated point.
    pub fn vanishes_raw(&self, field: &Field, point: &[u32]) -> bool {
        let degree = self.degree();
        let powers = PowerTable::new(field, point, degree);
        self.polys
            .iter()
            .all(|f| f.evaluate_with(field, &powers) == 0)
    }

    pub fn to_sidecar(&self) -> SystemSidecar {
        SystemSidecar {
            version: SIDECAR_VERSION,
            q: self.field.q,
            p: self.field.p,
            k: self.field.k,
            ell: self.ell,
            vars: 2 * self.ell as usize,
            d_poly: self.degree(),
            seed: self.seed,
            stream: self.stream,
            coefficients: self.polys.iter().map(|p| p.coeffs.clone()).collect(),
        }
    }

    pub fn from_sidecar(sidecar: &SystemSidecar, field: &Field) -> Result<Self, PolyError> {
        if sidecar.version != SIDECAR_VERSION {
            return Err(PolyError::Sidecar(format!(
                "unsupported version {}",
                sidecar.version
            )));
        }
        if sidecar.q != field.order() || sidecar.vars != 2 * sidecar.ell as usize {
            return Err(PolyError::Sidecar("field or dimension mismatch".into()));
        }
        if sidecar.coefficients.len() != sidecar.ell.saturating_sub(1) as usize {
            return Err(PolyError::Sidecar("wrong number of polynomials".into()));
        }
        let basis = Arc::new(MonomialBasis::enumerate(
            sidecar.vars,
            sidecar.d_poly,
            DEFAULT_COEFF_CAP,
        )?);
        let polys = sidecar
            .coefficients
            .iter()
            .map(|c| Polynomial::from_coeffs(Arc::clone(&basis), field, c.clone()))
            .collect::<Result<_, _>>()?;
        Ok(PolynomialSystem {
            ell: sidecar.ell,
            seed: sidecar.seed,
            stream: sidecar.stream,
            field: field.spec(),
            polys,
        })
    }
}

pub fn system_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Serialized polynomial system, enough to regenerate a graph exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSidecar {
    pub version: u32,
    pub q: u32,
    pub p: u32,
    pub k: u32,
    pub ell: u32,
    pub vars: usize,
    pub d_poly: u32,
    pub seed: u64,
    pub stream: u64,
    pub coefficients: Vec<Vec<u32>>,
}
