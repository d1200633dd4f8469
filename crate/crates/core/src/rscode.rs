//! Reed-Solomon codes `RS[F_p, <omega>, k]` (polynomials of degree at most
//! `k`), agreement witnesses, and brute-force distance oracles for tiny
//! instances.

use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modmath::{Fe, PrimeFieldCtx};
use crate::poly::{ntt_interpolate, DensePoly, EvalTable, PolyError};
use crate::ratio::{self, Rational};

/// Default cap on `p^(k+1)` for the brute-force oracles.
pub const DEFAULT_ORACLE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("degree bound k = {k} must be below n = {n}")]
    DegreeBound { k: usize, n: usize },
    #[error("oracle unavailable: p^(k+1) = {size} exceeds budget {budget}")]
    OracleBudget { size: String, budget: u64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone)]
pub struct CodeDesc {
    ctx: Arc<PrimeFieldCtx>,
    k: usize,
}

impl CodeDesc {
    pub fn new(ctx: Arc<PrimeFieldCtx>, k: usize) -> Result<Self, CodeError> {
        if k >= ctx.n() {
            return Err(CodeError::DegreeBound { k, n: ctx.n() });
        }
        Ok(CodeDesc { ctx, k })
    }

    pub fn ctx(&self) -> &PrimeFieldCtx {
        &self.ctx
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }
}

/// A word is a codeword iff its interpolant has degree at most `k`.
pub fn is_codeword(code: &CodeDesc, word: &EvalTable) -> Result<bool, CodeError> {
    let poly = ntt_interpolate(code.ctx(), word)?;
    Ok(poly.degree().map_or(true, |d| d <= code.k))
}

/// Claim that a word agrees with a low-degree polynomial on a set of domain
/// indices large enough to place it within `claimed_delta` of the code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementWitness {
    pub z: Fe,
    pub codeword_poly: DensePoly,
    pub agreement: Vec<usize>,
    pub claimed_delta: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessFailure {
    DegreeExceeded { degree: usize, k: usize },
    IndexOutOfRange { index: usize },
    NotIncreasing { index: usize },
    InsufficientAgreement { have: usize, need: usize },
    ValueMismatch { index: usize },
}

impl std::fmt::Display for WitnessFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WitnessFailure::DegreeExceeded { degree, k } => {
                write!(f, "codeword degree {degree} exceeds k = {k}")
            }
            WitnessFailure::IndexOutOfRange { index } => write!(f, "agreement index {index} out of range"),
            WitnessFailure::NotIncreasing { index } => {
                write!(f, "agreement indices not strictly increasing at {index}")
            }
            WitnessFailure::InsufficientAgreement { have, need } => {
                write!(f, "insufficient agreement set: {have} < {need}")
            }
            WitnessFailure::ValueMismatch { index } => write!(f, "word and codeword differ at index {index}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessVerdict {
    pub passed: bool,
    pub agreement: usize,
    /// `1 - agreement/n`, an upper bound on the distance when `passed`.
    #[serde(with = "ratio::as_str")]
    pub distance_bound: Rational,
    pub failure: Option<WitnessFailure>,
}

/// Smallest agreement count `a` with `1 - a/n <= delta`.
pub fn required_agreement(n: usize, delta: Rational) -> usize {
    // a >= n (1 - delta) = n (den - num) / den
    let num = (*delta.denom() - *delta.numer()) as i128 * n as i128;
    let den = *delta.denom() as i128;
    let need = if num <= 0 { 0 } else { (num + den - 1) / den };
    need as usize
}

pub fn check_agreement_witness(
    code: &CodeDesc,
    word: &EvalTable,
    wit: &AgreementWitness,
) -> WitnessVerdict {
    let n = code.n();
    let verdict = |failure: Option<WitnessFailure>, agreement: usize| WitnessVerdict {
        passed: failure.is_none(),
        agreement,
        distance_bound: Ratio::new_raw((n - agreement.min(n)) as i64, n as i64),
        failure,
    };
    if let Some(degree) = wit.codeword_poly.degree() {
        if degree > code.k {
            return verdict(Some(WitnessFailure::DegreeExceeded { degree, k: code.k }), 0);
        }
    }
    for (i, &t) in wit.agreement.iter().enumerate() {
        if t >= n || t >= word.len() {
            return verdict(Some(WitnessFailure::IndexOutOfRange { index: t }), 0);
        }
        if i > 0 && wit.agreement[i - 1] >= t {
            return verdict(Some(WitnessFailure::NotIncreasing { index: t }), 0);
        }
    }
    let need = required_agreement(n, wit.claimed_delta);
    if wit.agreement.len() < need {
        return verdict(
            Some(WitnessFailure::InsufficientAgreement { have: wit.agreement.len(), need }),
            wit.agreement.len(),
        );
    }
    let ctx = code.ctx();
    for &t in &wit.agreement {
        if wit.codeword_poly.eval(ctx.omega_pow(t)) != word.values[t] {
            return verdict(Some(WitnessFailure::ValueMismatch { index: t }), 0);
        }
    }
    verdict(None, wit.agreement.len())
}

fn oracle_size(code: &CodeDesc, budget: u64) -> Result<u64, CodeError> {
    let size = BigUint::from(code.ctx().field().modulus().clone()).pow(code.k as u32 + 1);
    if size > BigUint::from(budget) {
        return Err(CodeError::OracleBudget { size: size.to_string(), budget });
    }
    Ok(u64::try_from(&size).expect("within budget"))
}

/// Maximum number of positions where `word` agrees with any codeword, by
/// enumerating all `p^(k+1)` coefficient vectors.
pub fn max_agreement_bruteforce(
    code: &CodeDesc,
    word: &EvalTable,
    budget: u64,
) -> Result<usize, CodeError> {
    let total = oracle_size(code, budget)?;
    let ctx = code.ctx();
    let f = ctx.field();
    let p = f.modulus().iter_u64_digits().next().unwrap_or(0);
    let k = code.k;
    let best = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut coeffs = Vec::with_capacity(k + 1);
            let mut rest = idx;
            for _ in 0..=k {
                coeffs.push(f.from_u64(rest % p));
                rest /= p;
            }
            let poly = DensePoly::new(ctx.field_arc().clone(), coeffs);
            ctx.domain()
                .iter()
                .zip(&word.values)
                .filter(|(&a, &w)| poly.eval(a) == w)
                .count()
        })
        .max()
        .unwrap_or(0);
    Ok(best)
}

/// Exact relative distance to the code.
pub fn distance_to_code_bruteforce(
    code: &CodeDesc,
    word: &EvalTable,
    budget: u64,
) -> Result<Rational, CodeError> {
    let best = max_agreement_bruteforce(code, word, budget)?;
    let n = code.n();
    Ok(Ratio::new_raw((n - best) as i64, n as i64))
}

/// Any `q` of degree at most `k < (r-1)m` leaves `q - X^{(r-1)m}` nonzero of
/// degree `(r-1)m`, so `g = X^{(r-1)m}` agrees with a codeword on at most
/// `(r-1)m` points, fewer than the `rm` a correlated-agreement set needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoCorrelatedAgreementCert {
    pub g_degree: u64,
    pub max_joint_agreement_bound: u64,
    pub required_agreement: u64,
    /// `1 - (r-1)m/n`, a lower bound on the interleaved distance of `[f, g]`.
    #[serde(with = "ratio::as_str")]
    pub interleaved_distance_lower_bound: Rational,
}

impl NoCorrelatedAgreementCert {
    pub fn holds(&self) -> bool {
        self.max_joint_agreement_bound < self.required_agreement
    }
}

pub fn no_correlated_agreement_cert(
    code: &CodeDesc,
    r: usize,
    m: usize,
) -> NoCorrelatedAgreementCert {
    let g_degree = ((r - 1) * m) as u64;
    assert!(g_degree > code.k as u64, "g must have degree above k");
    let n = code.n() as i64;
    NoCorrelatedAgreementCert {
        g_degree,
        max_joint_agreement_bound: g_degree,
        required_agreement: (r * m) as u64,
        interleaved_distance_lower_bound: Ratio::new_raw(n - g_degree as i64, n),
    }
}
