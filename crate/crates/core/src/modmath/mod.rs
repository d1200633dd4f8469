//! Prime fields, primality testing, and the multiplicative subgroup ladder
//! `<xi> = <omega^m> ⊂ <omega>` that the construction lives on.

mod field;
mod prime;

use std::sync::Arc;

use num_bigint::{BigUint, RandBigInt};
use rand::Rng;
use thiserror::Error;

pub use field::{Fe, PrimeField, FIELD_MR_ROUNDS, LIMBS};
pub use prime::{is_prime_trial, is_probable_prime};
pub(crate) use prime::small_primes;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("modulus {0} is not prime")]
    NotPrime(String),
    #[error("modulus has {0} bits; at most 255 supported")]
    ModulusTooWide(u64),
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(u64),
    #[error("{n} does not divide p - 1")]
    OrderNotDividing { n: u64 },
    #[error("no element of order {n} found after {attempts} samples")]
    RootNotFound { n: u64, attempts: u32 },
    #[error("omega fails its order certificate for n = {n}")]
    BadOmega { n: u64 },
    #[error("xi = omega^m fails its order certificate for s = {s}")]
    BadXi { s: u64 },
    #[error("m = {m} does not divide n = {n}")]
    BadSubgroup { m: u64, n: u64 },
}

/// Certificate that `x` has exact order `n` for `n` a power of two:
/// `x^n = 1` and, when `n > 1`, `x^(n/2) != 1`.
pub fn has_exact_pow2_order(field: &PrimeField, x: Fe, n: u64) -> bool {
    if field.pow(x, n) != Fe::ONE {
        return false;
    }
    n == 1 || field.pow(x, n / 2) != Fe::ONE
}

/// Samples `g` and returns `g^((p-1)/n)` once it passes the order certificate.
pub fn find_root_of_unity<R: Rng + ?Sized>(
    field: &PrimeField,
    n: u64,
    rng: &mut R,
) -> Result<Fe, FieldError> {
    if !n.is_power_of_two() {
        return Err(FieldError::NotPowerOfTwo(n));
    }
    let p_minus_1 = field.modulus() - 1u8;
    if &p_minus_1 % n != BigUint::from(0u8) {
        return Err(FieldError::OrderNotDividing { n });
    }
    if n == 1 {
        return Ok(Fe::ONE);
    }
    let cofactor = &p_minus_1 / n;
    let two = BigUint::from(2u8);
    const ATTEMPTS: u32 = 256;
    for _ in 0..ATTEMPTS {
        let g = field.from_biguint(&rng.gen_biguint_range(&two, &p_minus_1));
        let omega = field.pow_big(g, &cofactor);
        if field.pow(omega, n / 2) != Fe::ONE {
            return Ok(omega);
        }
    }
    Err(FieldError::RootNotFound { n, attempts: ATTEMPTS })
}

/// A prime field together with the evaluation domain `<omega>` of size `n`
/// and the order-`s` subgroup generated by `xi = omega^m`, `s = n / m`.
#[derive(Debug, Clone)]
pub struct PrimeFieldCtx {
    field: Arc<PrimeField>,
    n: usize,
    m: usize,
    omega: Fe,
    xi: Fe,
    powers: Vec<Fe>,
}

impl PrimeFieldCtx {
    pub fn new(field: Arc<PrimeField>, n: usize, omega: Fe, m: usize) -> Result<Self, FieldError> {
        if !n.is_power_of_two() {
            return Err(FieldError::NotPowerOfTwo(n as u64));
        }
        if m == 0 || n % m != 0 {
            return Err(FieldError::BadSubgroup { m: m as u64, n: n as u64 });
        }
        if !field.is_canonical(omega) || !has_exact_pow2_order(&field, omega, n as u64) {
            return Err(FieldError::BadOmega { n: n as u64 });
        }
        let xi = field.pow(omega, m as u64);
        let s = (n / m) as u64;
        if !has_exact_pow2_order(&field, xi, s) {
            return Err(FieldError::BadXi { s });
        }
        let mut powers = Vec::with_capacity(n);
        let mut acc = Fe::ONE;
        for _ in 0..n {
            powers.push(acc);
            acc = field.mul(acc, omega);
        }
        Ok(PrimeFieldCtx { field, n, m, omega, xi, powers })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<PrimeField> {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Order of `xi`, the number of cosets `H_j`.
    pub fn s(&self) -> usize {
        self.n / self.m
    }

    pub fn omega(&self) -> Fe {
        self.omega
    }

    pub fn xi(&self) -> Fe {
        self.xi
    }

    /// `omega^t` for any exponent, reduced mod `n`.
    pub fn omega_pow(&self, t: usize) -> Fe {
        self.powers[t % self.n]
    }

    /// `xi^j` for any exponent.
    pub fn xi_pow(&self, j: usize) -> Fe {
        self.powers[(j % self.s()) * self.m]
    }

    pub fn domain(&self) -> &[Fe] {
        &self.powers
    }

    /// Domain indices `t` of the coset `H_j = {a : a^m = xi^j}`, i.e. `j + i*s`.
    pub fn coset_indices(&self, j: usize) -> impl Iterator<Item = usize> {
        assert!(j < self.s(), "coset index {j} out of range");
        let s = self.s();
        (0..self.m).map(move |i| j + i * s)
    }

    /// The `m` elements `omega^(j + i*s)`, each satisfying `a^m = xi^j`.
    pub fn subgroup_coset(&self, j: usize) -> Vec<Fe> {
        self.coset_indices(j).map(|t| self.powers[t]).collect()
    }
}
