//! Arithmetic in GF(p^s) and maximal-length LFSR sequences over GF(p).
//!
//! Elements are stored in the polynomial basis `1, x, ..., x^(s-1)` modulo the
//! defining polynomial. Polynomials are written as coefficient lists in
//! ascending powers: `[c_0, c_1, ..., c_s]` with `c_s = 1`.
//!
//! The LFSR driven by `f(x) = x^s + c_(s-1) x^(s-1) + ... + c_0` follows the
//! recurrence
//!
//! ```text
//! a_(k+s) = -(c_0 a_k + c_1 a_(k+1) + ... + c_(s-1) a_(k+s-1))   (mod p)
//! ```
//!
//! whose characteristic polynomial is `f` itself. Every output sequence is then
//! `a_k = Tr(theta * alpha^k)` for the root `alpha = x mod f`, which is what
//! makes a cyclic shift by `j` the same as multiplying `theta` by `alpha^j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field order `p^s`.
pub const MAX_ORDER: u64 = 1 << 20;

/// Primitive polynomials for small fields, ascending coefficients.
///
/// Every entry is re-checked by [`verify_primitive`] before use.
pub const PRIMITIVE_TABLE: &[(u32, u32, &[u32])] = &[
    (2, 1, &[1, 1]),
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 0, 0, 0, 1]),
    (3, 1, &[1, 1]),
    (3, 2, &[2, 1, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 1, 0, 0, 1]),
    (5, 1, &[3, 1]),
    (5, 2, &[2, 1, 1]),
    (7, 1, &[4, 1]),
    (7, 2, &[3, 1, 1]),
    (11, 1, &[9, 1]),
    (13, 1, &[11, 1]),
];

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Look up the built-in primitive polynomial for `(p, s)`.
pub fn table_polynomial(p: u32, s: u32) -> Option<Vec<u32>> {
    PRIMITIVE_TABLE
        .iter()
        .find(|(tp, ts, _)| *tp == p && *ts == s)
        .map(|(_, _, poly)| poly.to_vec())
}

/// Field characteristic, extension degree and defining polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PpsParams {
    p: u32,
    s: u32,
    poly: Vec<u32>,
}

impl PpsParams {
    /// Validates shape only: `p` prime, `poly` monic of degree `s` with
    /// coefficients in `[0, p)`. Primitivity is a separate check.
    pub fn new(p: u32, s: u32, poly: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("p = {p} is not prime")));
        }
        if s == 0 {
            return Err(Error::InvalidParameter("degree s must be >= 1".into()));
        }
        let order = (p as u64).checked_pow(s).filter(|&o| o <= MAX_ORDER);
        if order.is_none() {
            return Err(Error::InvalidParameter(format!(
                "field order {p}^{s} exceeds the supported maximum {MAX_ORDER}"
            )));
        }
        if poly.len() != s as usize + 1 {
            return Err(Error::InvalidParameter(format!(
                "polynomial of degree {s} needs {} coefficients, got {}",
                s + 1,
                poly.len()
            )));
        }
        if let Some(&c) = poly.iter().find(|&&c| c >= p) {
            return Err(Error::InvalidParameter(format!(
                "coefficient {c} is outside GF({p})"
            )));
        }
        if poly[s as usize] != 1 {
            return Err(Error::InvalidParameter(format!(
                "polynomial {poly:?} is not monic"
            )));
        }
        Ok(Self { p, s, poly })
    }

    /// Parameters with the built-in primitive polynomial for `(p, s)`.
    pub fn from_table(p: u32, s: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("p = {p} is not prime")));
        }
        let poly = table_polynomial(p, s).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "no built-in primitive polynomial for p = {p}, s = {s}; pass one explicitly"
            ))
        })?;
        Self::new(p, s, poly)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn poly(&self) -> &[u32] {
        &self.poly
    }

    /// Sequence length `L = p^s` (also the number of sequences in a set).
    pub fn len(&self) -> usize {
        (self.p as usize).pow(self.s)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// An element of GF(p^s) in polynomial-basis coordinates.
///
/// Used as the group label of a phase sequence: adding labels corresponds to
/// multiplying the phase sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(Vec<u32>);

impl FieldElement {
    pub fn from_coeffs(coeffs: Vec<u32>) -> Self {
        Self(coeffs)
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

/// GF(p^s) with log/antilog tables over the primitive root `alpha = x mod f`.
#[derive(Debug, Clone)]
pub struct GaloisField {
    params: PpsParams,
    antilog: Vec<FieldElement>,
    log: Vec<Option<usize>>,
}

impl GaloisField {
    pub fn new(params: PpsParams) -> Result<Self> {
        if !verify_primitive(&params) {
            return Err(not_primitive(&params));
        }
        let order = params.len();
        let s = params.s as usize;
        let mut antilog = Vec::with_capacity(order - 1);
        let mut log = vec![None; order];
        let mut cur = vec![0u32; s];
        cur[0] = 1;
        for j in 0..order - 1 {
            let e = FieldElement(cur.clone());
            log[index_of(&params, &e)] = Some(j);
            antilog.push(e);
            cur = mul_by_x(&params, &cur);
        }
        Ok(Self {
            params,
            antilog,
            log,
        })
    }

    pub fn params(&self) -> &PpsParams {
        &self.params
    }

    pub fn order(&self) -> usize {
        self.params.len()
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(vec![0; self.params.s as usize])
    }

    pub fn one(&self) -> FieldElement {
        self.antilog[0].clone()
    }

    /// `alpha^j`, exponent taken modulo `p^s - 1`.
    pub fn alpha_pow(&self, j: usize) -> FieldElement {
        self.antilog[j % self.antilog.len()].clone()
    }

    /// Discrete logarithm base alpha; `None` for zero or non-members.
    pub fn log(&self, e: &FieldElement) -> Option<usize> {
        if !self.contains(e) {
            return None;
        }
        self.log[self.index(e)]
    }

    pub fn contains(&self, e: &FieldElement) -> bool {
        e.0.len() == self.params.s as usize && e.0.iter().all(|&c| c < self.params.p)
    }

    /// Dense index `sum c_i p^i`, in `[0, p^s)`.
    pub fn index(&self, e: &FieldElement) -> usize {
        index_of(&self.params, e)
    }

    pub fn from_index(&self, mut idx: usize) -> FieldElement {
        let p = self.params.p as usize;
        let coeffs = (0..self.params.s)
            .map(|_| {
                let c = (idx % p) as u32;
                idx /= p;
                c
            })
            .collect();
        FieldElement(coeffs)
    }

    /// All elements in lexicographic coefficient order.
    pub fn elements(&self) -> Vec<FieldElement> {
        let mut all: Vec<_> = (0..self.order()).map(|i| self.from_index(i)).collect();
        all.sort();
        all
    }

    /// Nonzero elements in antilog order `alpha^0, alpha^1, ...`.
    pub fn nonzero_antilog(&self) -> &[FieldElement] {
        &self.antilog
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.params.p;
        FieldElement(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) % p).collect())
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        let p = self.params.p;
        FieldElement(a.0.iter().map(|x| (p - x) % p).collect())
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.add(a, &self.neg(b))
    }

    /// Field multiplication through the log tables.
    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        match (self.log(a), self.log(b)) {
            (Some(i), Some(j)) => self.alpha_pow(i + j),
            _ => self.zero(),
        }
    }
}

fn index_of(params: &PpsParams, e: &FieldElement) -> usize {
    let p = params.p as usize;
    e.0.iter()
        .rev()
        .fold(0usize, |acc, &c| acc * p + c as usize)
}

/// Multiply a polynomial-basis vector by `x` and reduce modulo the monic poly.
fn mul_by_x(params: &PpsParams, v: &[u32]) -> Vec<u32> {
    let p = params.p;
    let s = v.len();
    let top = v[s - 1];
    let mut out = vec![0u32; s];
    for i in (1..s).rev() {
        out[i] = v[i - 1];
    }
    // x^s = -(c_0 + c_1 x + ... + c_(s-1) x^(s-1))
    for (i, o) in out.iter_mut().enumerate() {
        let sub = (top as u64 * params.poly[i] as u64 % p as u64) as u32;
        *o = (*o + p - sub) % p;
    }
    out
}

fn not_primitive(params: &PpsParams) -> Error {
    Error::NotPrimitive {
        p: params.p,
        poly: params.poly.clone(),
        period: lfsr_period(params).unwrap_or(0),
        expected: params.len() as u64 - 1,
    }
}

fn lfsr_step(params: &PpsParams, state: &mut [u32]) -> u32 {
    let p = params.p as u64;
    let s = state.len();
    let acc = state
        .iter()
        .zip(&params.poly[..s])
        .fold(0u64, |acc, (&a, &c)| (acc + a as u64 * c as u64) % p);
    let next = ((p - acc) % p) as u32;
    let out = state[0];
    state.rotate_left(1);
    state[s - 1] = next;
    out
}

fn seed(params: &PpsParams) -> Vec<u32> {
    let mut st = vec![0u32; params.s as usize];
    st[params.s as usize - 1] = 1;
    st
}

/// Cycle length of the LFSR started from the seed `0...01`, or `None` when the
/// state never returns to the seed within `p^s` steps.
pub fn lfsr_period(params: &PpsParams) -> Option<u64> {
    let start = seed(params);
    let mut state = start.clone();
    let limit = params.len() as u64;
    for n in 1..=limit {
        lfsr_step(params, &mut state);
        if state == start {
            return Some(n);
        }
    }
    None
}

/// True iff the LFSR driven by `params.poly` has period exactly `p^s - 1`.
pub fn verify_primitive(params: &PpsParams) -> bool {
    lfsr_period(params) == Some(params.len() as u64 - 1)
}

/// One period of the maximal-length sequence, `p^s - 1` symbols, seeded with `0...01`.
pub fn generate_m_sequence(params: &PpsParams) -> Result<Vec<u32>> {
    if !verify_primitive(params) {
        return Err(not_primitive(params));
    }
    let mut state = seed(params);
    Ok((0..params.len() - 1)
        .map(|_| lfsr_step(params, &mut state))
        .collect())
}
