//! Integer polynomials and their resultants, computed by fraction-free
//! elimination on the Sylvester matrix and, independently, by determinants
//! modulo word-size primes recombined with CRT.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::AnalyticError;
use crate::modmath::is_probable_prime;

/// Integer polynomial, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn nonzero_terms(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }
}

/// `Phi_s = X^(s/2) + 1` for `s` a power of two.
pub fn cyclotomic_pow2(s: u64) -> Result<IntPoly, AnalyticError> {
    if s < 2 || !s.is_power_of_two() {
        return Err(AnalyticError::NotPowerOfTwo(s));
    }
    let mut coeffs = vec![BigInt::zero(); (s / 2) as usize + 1];
    coeffs[0] = BigInt::one();
    coeffs[(s / 2) as usize] = BigInt::one();
    Ok(IntPoly::new(coeffs))
}

/// `sum_{i in I} x^i - sum_{j in J} x^j`.
pub fn subset_sum_poly(plus: &[usize], minus: &[usize]) -> Result<IntPoly, AnalyticError> {
    if plus.len() != minus.len() {
        return Err(AnalyticError::SizeMismatch { left: plus.len(), right: minus.len() });
    }
    let top = plus.iter().chain(minus).copied().max().map_or(0, |d| d + 1);
    let mut coeffs = vec![BigInt::zero(); top];
    for &i in plus {
        coeffs[i] += 1;
    }
    for &j in minus {
        coeffs[j] -= 1;
    }
    Ok(IntPoly::new(coeffs))
}

/// Sylvester matrix, rows of `P` shifted `deg Q` times then rows of `Q`
/// shifted `deg P` times, coefficients highest degree first.
fn sylvester(p: &IntPoly, q: &IntPoly) -> Vec<Vec<BigInt>> {
    let dp = p.degree().expect("nonzero");
    let dq = q.degree().expect("nonzero");
    let size = dp + dq;
    let mut rows = Vec::with_capacity(size);
    for shift in 0..dq {
        let mut row = vec![BigInt::zero(); size];
        for (i, c) in p.coeffs.iter().rev().enumerate() {
            row[shift + i] = c.clone();
        }
        rows.push(row);
    }
    for shift in 0..dp {
        let mut row = vec![BigInt::zero(); size];
        for (i, c) in q.coeffs.iter().rev().enumerate() {
            row[shift + i] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// Determinant by Bareiss fraction-free elimination.
pub fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let size = m.len();
    if size == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..size - 1 {
        if m[k][k].is_zero() {
            match (k + 1..size).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let value = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = value / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[size - 1][size - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

fn trivial_cases(p: &IntPoly, q: &IntPoly) -> Result<Option<BigInt>, AnalyticError> {
    let dp = match p.degree() {
        Some(d) if d > 0 => d,
        _ => return Err(AnalyticError::ConstantPoly),
    };
    match q.degree() {
        None => Ok(Some(BigInt::zero())),
        Some(0) => Ok(Some(num_traits::pow(q.coeffs[0].clone(), dp))),
        Some(_) => Ok(None),
    }
}

/// `Res(P, Q) = lc(P)^deg Q * prod_{P(x)=0} Q(x)`, exactly.
pub fn resultant_int(p: &IntPoly, q: &IntPoly) -> Result<BigInt, AnalyticError> {
    if let Some(v) = trivial_cases(p, q)? {
        return Ok(v);
    }
    Ok(bareiss_determinant(sylvester(p, q)))
}

fn det_mod(rows: &[Vec<BigInt>], prime: u64) -> u64 {
    let reduce = |x: &BigInt| -> u64 {
        let r = x.mod_floor(&BigInt::from(prime));
        r.to_u64().unwrap()
    };
    let mut m: Vec<Vec<u64>> = rows.iter().map(|row| row.iter().map(reduce).collect()).collect();
    let size = m.len();
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % prime as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let mut det = 1u64;
    for k in 0..size {
        let Some(pivot) = (k..size).find(|&i| m[i][k] != 0) else {
            return 0;
        };
        if pivot != k {
            m.swap(k, pivot);
            det = (prime - det) % prime;
        }
        det = mulmod(det, m[k][k]);
        let inv = powmod(m[k][k], prime - 2);
        for i in k + 1..size {
            let factor = mulmod(m[i][k], inv);
            if factor == 0 {
                continue;
            }
            for j in k..size {
                let sub = mulmod(factor, m[k][j]);
                m[i][j] = (m[i][j] + prime - sub) % prime;
            }
        }
    }
    det
}

/// Same value as [`resultant_int`], computed from determinants modulo
/// 62-bit primes until their product exceeds twice the Hadamard bound.
pub fn resultant_modular(p: &IntPoly, q: &IntPoly) -> Result<BigInt, AnalyticError> {
    if let Some(v) = trivial_cases(p, q)? {
        return Ok(v);
    }
    let rows = sylvester(p, q);
    // Squared Hadamard bound: product of squared row norms.
    let hadamard_sq: BigUint = rows
        .iter()
        .map(|row| row.iter().map(|c| c.magnitude() * c.magnitude()).sum::<BigUint>())
        .product();
    let needed_sq = hadamard_sq * 4u8;

    let mut modulus = BigUint::one();
    let mut value = BigUint::zero();
    let mut candidate = (1u64 << 62) - 1;
    while &modulus * &modulus <= needed_sq {
        while !is_probable_prime(&BigUint::from(candidate), 0) {
            candidate -= 2;
        }
        let prime = candidate;
        candidate -= 2;
        let residue = det_mod(&rows, prime);
        // value' = value + modulus * t with value' = residue (mod prime)
        let cur = (&value % prime).to_u64().unwrap();
        let m_mod = (&modulus % prime).to_u64().unwrap();
        let diff = (residue + prime - cur) % prime;
        let inv = BigUint::from(m_mod).modpow(&BigUint::from(prime - 2), &BigUint::from(prime));
        let t = (BigUint::from(diff) * inv) % prime;
        value += &modulus * t;
        modulus *= prime;
    }
    let half = &modulus >> 1u32;
    Ok(if value > half {
        BigInt::from_biguint(Sign::Minus, &modulus - &value)
    } else {
        BigInt::from_biguint(Sign::Plus, value)
    })
}
