//! Dense univariate polynomials over `F_p`, radix-2 NTT on `<omega>`, and the
//! expansion of `prod_j (X^m - xi^{e_j})` that yields each near-codeword.

use std::sync::Arc;

use thiserror::Error;

use crate::modmath::{Fe, FieldError, PrimeField, PrimeFieldCtx};

/// Below this operand length `poly_mul` stays schoolbook.
pub const SCHOOLBOOK_THRESHOLD: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomials live over different moduli")]
    ContextMismatch,
    #[error("degree {degree} is not below the domain size {n}; reduce first")]
    DegreeTooLarge { degree: usize, n: usize },
    #[error("table has length {got}, domain size is {n}")]
    LengthMismatch { got: usize, n: usize },
    #[error("duplicate exponent {0}")]
    DuplicateExponent(usize),
    #[error("exponent {exponent} outside [0, {s})")]
    ExponentOutOfRange { exponent: usize, s: usize },
    #[error("need at least two exponents, got {0}")]
    TooFewExponents(usize),
    #[error("remainder has degree {degree} above the bound {bound}")]
    RemainderDegree { degree: usize, bound: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Coefficient-form polynomial, lowest degree first, no trailing zeros.
#[derive(Clone, Debug)]
pub struct DensePoly {
    field: Arc<PrimeField>,
    coeffs: Vec<Fe>,
}

impl PartialEq for DensePoly {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.coeffs == other.coeffs
    }
}

impl Eq for DensePoly {}

impl DensePoly {
    pub fn new(field: Arc<PrimeField>, mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        DensePoly { field, coeffs }
    }

    pub fn zero(field: Arc<PrimeField>) -> Self {
        DensePoly { field, coeffs: Vec::new() }
    }

    pub fn constant(field: Arc<PrimeField>, c: Fe) -> Self {
        DensePoly::new(field, vec![c])
    }

    /// `c * X^degree`
    pub fn monomial(field: Arc<PrimeField>, degree: usize, c: Fe) -> Self {
        let mut coeffs = vec![Fe::ZERO; degree + 1];
        coeffs[degree] = c;
        DensePoly::new(field, coeffs)
    }

    pub fn field(&self) -> &Arc<PrimeField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs.get(i).copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: Fe) -> Fe {
        let f = &*self.field;
        self.coeffs.iter().rev().fold(Fe::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    fn same_field(&self, other: &DensePoly) -> Result<(), PolyError> {
        if Arc::ptr_eq(&self.field, &other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(PolyError::ContextMismatch)
        }
    }

    pub fn add(&self, other: &DensePoly) -> Result<DensePoly, PolyError> {
        self.same_field(other)?;
        let f = &*self.field;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| f.add(self.coeff(i), other.coeff(i))).collect();
        Ok(DensePoly::new(self.field.clone(), coeffs))
    }

    pub fn sub(&self, other: &DensePoly) -> Result<DensePoly, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DensePoly {
        let f = &*self.field;
        DensePoly {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect(),
        }
    }

    pub fn scale(&self, c: Fe) -> DensePoly {
        let f = &*self.field;
        DensePoly::new(self.field.clone(), self.coeffs.iter().map(|&x| f.mul(x, c)).collect())
    }

    /// Exact product: schoolbook for short operands, NTT when the field has a
    /// large enough two-adic root, schoolbook otherwise.
    pub fn mul(&self, other: &DensePoly) -> Result<DensePoly, PolyError> {
        self.same_field(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(DensePoly::zero(self.field.clone()));
        }
        let out_len = self.coeffs.len() + other.coeffs.len() - 1;
        let size = out_len.next_power_of_two();
        let log_size = size.trailing_zeros();
        let short = self.coeffs.len().min(other.coeffs.len()) < SCHOOLBOOK_THRESHOLD;
        match self.field.root_of_unity_pow2(log_size) {
            Some(root) if !short => Ok(self.mul_ntt(other, size, root)),
            _ => Ok(self.mul_schoolbook(other)),
        }
    }

    fn mul_schoolbook(&self, other: &DensePoly) -> DensePoly {
        let f = &*self.field;
        let mut out = vec![Fe::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        DensePoly::new(self.field.clone(), out)
    }

    fn mul_ntt(&self, other: &DensePoly, size: usize, root: Fe) -> DensePoly {
        let f = &*self.field;
        let mut a = self.coeffs.clone();
        a.resize(size, Fe::ZERO);
        let mut b = other.coeffs.clone();
        b.resize(size, Fe::ZERO);
        ntt_in_place(f, &mut a, root);
        ntt_in_place(f, &mut b, root);
        for (x, y) in a.iter_mut().zip(&b) {
            *x = f.mul(*x, *y);
        }
        let root_inv = f.inv(root).expect("root of unity is nonzero");
        ntt_in_place(f, &mut a, root_inv);
        let size_inv = f.inv(f.from_u64(size as u64)).expect("size below p");
        for x in a.iter_mut() {
            *x = f.mul(*x, size_inv);
        }
        DensePoly::new(self.field.clone(), a)
    }

    /// Quotient and remainder by a nonzero divisor.
    pub fn div_rem(&self, divisor: &DensePoly) -> Result<(DensePoly, DensePoly), PolyError> {
        self.same_field(divisor)?;
        let f = &*self.field;
        let d_deg = divisor.degree().ok_or(FieldError::ZeroInverse)?;
        let lead_inv = f.inv(divisor.coeffs[d_deg])?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= d_deg {
            return Ok((DensePoly::zero(self.field.clone()), self.clone()));
        }
        let mut quot = vec![Fe::ZERO; rem.len() - d_deg];
        for i in (d_deg..rem.len()).rev() {
            let c = f.mul(rem[i], lead_inv);
            quot[i - d_deg] = c;
            if c.is_zero() {
                continue;
            }
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                let idx = i - d_deg + j;
                rem[idx] = f.sub(rem[idx], f.mul(c, d));
            }
        }
        rem.truncate(d_deg);
        Ok((DensePoly::new(self.field.clone(), quot), DensePoly::new(self.field.clone(), rem)))
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &DensePoly) -> Result<DensePoly, PolyError> {
        self.same_field(other)?;
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        match a.degree() {
            None => Ok(a),
            Some(d) => {
                let lead_inv = self.field.inv(a.coeffs[d])?;
                Ok(a.scale(lead_inv))
            }
        }
    }
}

/// In-place radix-2 decimation-in-time transform; `values.len()` must be the
/// order of `root`.
pub fn ntt_in_place(f: &PrimeField, values: &mut [Fe], root: Fe) {
    let n = values.len();
    if n <= 1 {
        return;
    }
    debug_assert!(n.is_power_of_two());
    let log_n = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - log_n);
        if i < j {
            values.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let step = f.pow(root, (n / len) as u64);
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut w = Fe::ONE;
        for _ in 0..half {
            twiddles.push(w);
            w = f.mul(w, step);
        }
        for chunk in values.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for i in 0..half {
                let t = f.mul(hi[i], twiddles[i]);
                hi[i] = f.sub(lo[i], t);
                lo[i] = f.add(lo[i], t);
            }
        }
        len <<= 1;
    }
}

/// Values of a word on the domain, index `t` holding the value at `omega^t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalTable {
    pub values: Vec<Fe>,
}

impl EvalTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&self, f: &PrimeField, c: Fe) -> EvalTable {
        EvalTable { values: self.values.iter().map(|&x| f.mul(x, c)).collect() }
    }
}

pub fn ntt_evaluate(ctx: &PrimeFieldCtx, poly: &DensePoly) -> Result<EvalTable, PolyError> {
    if **poly.field() != *ctx.field() {
        return Err(PolyError::ContextMismatch);
    }
    let n = ctx.n();
    if let Some(d) = poly.degree() {
        if d >= n {
            return Err(PolyError::DegreeTooLarge { degree: d, n });
        }
    }
    let mut values = poly.coeffs().to_vec();
    values.resize(n, Fe::ZERO);
    ntt_in_place(ctx.field(), &mut values, ctx.omega());
    Ok(EvalTable { values })
}

pub fn ntt_interpolate(ctx: &PrimeFieldCtx, table: &EvalTable) -> Result<DensePoly, PolyError> {
    let n = ctx.n();
    if table.len() != n {
        return Err(PolyError::LengthMismatch { got: table.len(), n });
    }
    let f = ctx.field();
    let mut values = table.values.clone();
    ntt_in_place(f, &mut values, f.inv(ctx.omega())?);
    let n_inv = f.inv(f.from_u64(n as u64))?;
    for x in values.iter_mut() {
        *x = f.mul(*x, n_inv);
    }
    Ok(DensePoly::new(ctx.field_arc().clone(), values))
}

/// The word `a^{rm} + z * a^{(r-1)m}` on every domain point, from powers of
/// `omega` directly.
pub fn eval_monomial_word(ctx: &PrimeFieldCtx, r: usize, z: Fe) -> EvalTable {
    let f = ctx.field();
    let n = ctx.n();
    let m = ctx.m();
    let high = (r * m) % n;
    let low = ((r - 1) * m) % n;
    let values = (0..n)
        .map(|t| {
            let a_high = ctx.omega_pow(t * high % n);
            let a_low = ctx.omega_pow(t * low % n);
            f.add(a_high, f.mul(z, a_low))
        })
        .collect();
    EvalTable { values }
}

/// Result of expanding `prod_j (X^m - xi^{e_j}) = X^{rm} - lambda X^{(r-1)m} + R(X)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetExpansion {
    /// Sum of the chosen `xi^{e_j}`.
    pub lambda: Fe,
    /// Tail of degree at most `(r-2)m`.
    pub remainder: DensePoly,
    /// The full product.
    pub product: DensePoly,
}

pub fn expand_coset_product(
    ctx: &PrimeFieldCtx,
    exponents: &[usize],
) -> Result<CosetExpansion, PolyError> {
    let r = exponents.len();
    if r < 2 {
        return Err(PolyError::TooFewExponents(r));
    }
    let s = ctx.s();
    let mut seen = vec![false; s];
    for &e in exponents {
        if e >= s {
            return Err(PolyError::ExponentOutOfRange { exponent: e, s });
        }
        if std::mem::replace(&mut seen[e], true) {
            return Err(PolyError::DuplicateExponent(e));
        }
    }
    let f = ctx.field();
    let field = ctx.field_arc().clone();
    let m = ctx.m();

    // Product in Y = X^m, one binomial at a time in increasing degree.
    let mut in_y = vec![Fe::ONE];
    for &e in exponents {
        let root = ctx.xi_pow(e);
        let mut next = vec![Fe::ZERO; in_y.len() + 1];
        for (i, &c) in in_y.iter().enumerate() {
            next[i + 1] = f.add(next[i + 1], c);
            next[i] = f.sub(next[i], f.mul(c, root));
        }
        in_y = next;
    }
    let mut coeffs = vec![Fe::ZERO; r * m + 1];
    for (i, c) in in_y.into_iter().enumerate() {
        coeffs[i * m] = c;
    }
    let product = DensePoly::new(field.clone(), coeffs);

    let lambda = f.neg(product.coeff((r - 1) * m));
    let leading = DensePoly::monomial(field.clone(), r * m, Fe::ONE);
    let middle = DensePoly::monomial(field.clone(), (r - 1) * m, lambda);
    let remainder = product.sub(&leading)?.add(&middle)?;
    let bound = (r - 2) * m;
    if let Some(degree) = remainder.degree() {
        if degree > bound {
            return Err(PolyError::RemainderDegree { degree, bound });
        }
    }
    Ok(CosetExpansion { lambda, remainder, product })
}
