//! Number-theoretic audits: Chebyshev functions over progressions, cyclotomic
//! resultants against their size bound, bad-prime counts, and the prime count
//! `T` in `[4^s, 8^s]` next to its claimed lower bound.

mod factor;
mod resultant;
mod sieve;

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combin::{random_subset, Combinations};
use crate::modmath::{find_root_of_unity, Fe, PrimeField};
use crate::poly::DensePoly;

pub use factor::{factorize, log4, Factorization, DEFAULT_RHO_BUDGET};
pub use resultant::{
    bareiss_determinant, cyclotomic_pow2, resultant_int, resultant_modular, subset_sum_poly, IntPoly,
};
pub use sieve::{
    count_primes_in_ap, euler_phi, SieveTable, DEFAULT_SEGMENT_BUDGET, DEFAULT_SIEVE_LIMIT,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalyticError {
    #[error("{value} exceeds the budget {limit}")]
    Budget { value: String, limit: u64 },
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("{0} is not a power of two >= 2; only 2-power cyclotomics are supported")]
    NotPowerOfTwo(u64),
    #[error("subset sizes differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("first polynomial must be nonconstant")]
    ConstantPoly,
    #[error("r = {r} subsets do not fit in a range of {range}")]
    SubsetsTooLarge { r: usize, range: usize },
}

/// Which exponents subsets may draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentRange {
    /// `[0, s/2)`
    Half,
    /// `[0, s)`
    Full,
}

impl ExponentRange {
    pub fn width(self, s: u64) -> usize {
        match self {
            ExponentRange::Half => (s / 2) as usize,
            ExponentRange::Full => s as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PairSelection {
    /// Every ordered pair of distinct subsets.
    Exhaustive,
    /// `count` ordered pairs of distinct random subsets.
    Sampled { count: u64, seed: u64 },
}

impl PairSelection {
    /// Exhaustive over half-range subsets for `s <= 16`, else 1000 samples.
    pub fn default_for(s: u64, range: ExponentRange) -> Self {
        if s <= 16 && range == ExponentRange::Half {
            PairSelection::Exhaustive
        } else {
            PairSelection::Sampled { count: 1000, seed: 0 }
        }
    }
}

fn subset_pairs(
    s: u64,
    r: usize,
    range: ExponentRange,
    selection: PairSelection,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>, AnalyticError> {
    let width = range.width(s);
    if r > width {
        return Err(AnalyticError::SubsetsTooLarge { r, range: width });
    }
    match selection {
        PairSelection::Exhaustive => {
            let all: Vec<Vec<usize>> = Combinations::new(width, r).collect();
            let mut pairs = Vec::new();
            for (a, plus) in all.iter().enumerate() {
                for (b, minus) in all.iter().enumerate() {
                    if a != b {
                        pairs.push((plus.clone(), minus.clone()));
                    }
                }
            }
            Ok(pairs)
        }
        PairSelection::Sampled { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let distinct_exists = Combinations::new(width, r).nth(1).is_some();
            if !distinct_exists {
                return Ok(Vec::new());
            }
            Ok((0..count)
                .map(|_| {
                    let plus = random_subset(&mut rng, width, r);
                    let mut minus = random_subset(&mut rng, width, r);
                    while minus == plus {
                        minus = random_subset(&mut rng, width, r);
                    }
                    (plus, minus)
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
    pub resultant: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultantAudit {
    pub s: u64,
    pub r: usize,
    pub range: ExponentRange,
    pub selection: PairSelection,
    pub pairs_examined: u64,
    /// `(2r)^(s/2)`
    pub bound: String,
    /// `s^s`
    pub loose_bound: String,
    pub max_abs_resultant: String,
    /// Largest `|Res| / (2r)^(s/2)` seen.
    pub max_ratio: f64,
    pub zero_resultants: u64,
    pub route_mismatches: u64,
    pub violations: Vec<PairValue>,
    pub passed: bool,
}

fn ratio_f64(a: &BigUint, b: &BigUint) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    ((log4(a) - log4(b)) * 4f64.ln()).exp()
}

/// Checks `|Res(Phi_s, Q_{I,J})| <= (2r)^(s/2)` for the selected pairs, with
/// each resultant computed by both routes.
pub fn audit_resultant_bound(
    s: u64,
    r: usize,
    range: ExponentRange,
    selection: PairSelection,
) -> Result<ResultantAudit, AnalyticError> {
    let phi = cyclotomic_pow2(s)?;
    let pairs = subset_pairs(s, r, range, selection)?;
    let bound = BigUint::from(2 * r as u64).pow((s / 2) as u32);
    let loose = BigUint::from(s).pow(s as u32);

    let mut max_abs = BigUint::zero();
    let mut zero_resultants = 0;
    let mut route_mismatches = 0;
    let mut violations = Vec::new();
    let mut within_loose = true;
    for (plus, minus) in &pairs {
        let q = subset_sum_poly(plus, minus)?;
        let res = resultant_int(&phi, &q)?;
        if resultant_modular(&phi, &q)? != res {
            route_mismatches += 1;
        }
        let mag = res.magnitude().clone();
        if mag.is_zero() {
            zero_resultants += 1;
        }
        if mag > bound {
            violations.push(PairValue { plus: plus.clone(), minus: minus.clone(), resultant: res.to_string() });
        }
        within_loose &= mag <= loose;
        if mag > max_abs {
            max_abs = mag;
        }
    }
    let passed = violations.is_empty()
        && within_loose
        && route_mismatches == 0
        && (range == ExponentRange::Full || zero_resultants == 0);
    Ok(ResultantAudit {
        s,
        r,
        range,
        selection,
        pairs_examined: pairs.len() as u64,
        max_ratio: ratio_f64(&max_abs, &bound),
        bound: bound.to_string(),
        loose_bound: loose.to_string(),
        max_abs_resultant: max_abs.to_string(),
        zero_resultants,
        route_mismatches,
        violations,
        passed,
    })
}

/// How a bad prime was shown to make two subset sums collide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Collision {
    /// `sum_I zeta^i = sum_J zeta^j` at the primitive root `zeta` in `F_p`.
    InField { root: String },
    /// `p` is not 1 mod `s`; `gcd(Phi_s, Q)` over `F_p` has this positive degree,
    /// so the sums meet at a root in an extension.
    Extension { gcd_degree: usize },
    NotConfirmed,
}

/// Direct check, independent of the resultant, that `prime` makes the sums
/// over `plus` and `minus` meet at a primitive `s`-th root of unity.
pub fn confirm_collision(prime: &BigUint, s: u64, plus: &[usize], minus: &[usize]) -> Collision {
    let Ok(field) = PrimeField::new(prime) else {
        return Collision::NotConfirmed;
    };
    let field = Arc::new(field);
    let f = &*field;
    let p_minus_1 = prime - 1u8;
    if (&p_minus_1 % s).is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let Ok(zeta) = find_root_of_unity(f, s, &mut rng) else {
            return Collision::NotConfirmed;
        };
        for c in (1..s).step_by(2) {
            let root = f.pow(zeta, c);
            let lhs = f.sum(plus.iter().map(|&i| f.pow(root, i as u64)));
            let rhs = f.sum(minus.iter().map(|&j| f.pow(root, j as u64)));
            if lhs == rhs {
                return Collision::InField { root: root.to_string() };
            }
        }
        Collision::NotConfirmed
    } else {
        let mut phi = vec![Fe::ZERO; (s / 2) as usize + 1];
        phi[0] = Fe::ONE;
        phi[(s / 2) as usize] = Fe::ONE;
        let phi = DensePoly::new(field.clone(), phi);
        let top = plus.iter().chain(minus).copied().max().map_or(0, |d| d + 1);
        let mut q = vec![Fe::ZERO; top];
        for &i in plus {
            q[i] = f.add(q[i], Fe::ONE);
        }
        for &j in minus {
            q[j] = f.sub(q[j], Fe::ONE);
        }
        let q = DensePoly::new(field.clone(), q);
        match phi.gcd(&q).ok().and_then(|g| g.degree()) {
            Some(d) if d > 0 => Collision::Extension { gcd_degree: d },
            _ => Collision::NotConfirmed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadPrimeRecord {
    pub prime: String,
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
    pub confirmation: Collision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadPrimeAudit {
    pub s: u64,
    pub r: usize,
    pub range: ExponentRange,
    pub selection: PairSelection,
    pub interval_lo: String,
    pub interval_hi: String,
    pub pairs_examined: u64,
    /// Pairs with `Res = 0`: the sums coincide identically, excluded from the count.
    pub degenerate_pairs: u64,
    /// `log_4(s)`
    pub b_bound: f64,
    pub max_b: u32,
    pub bad_primes: Vec<BadPrimeRecord>,
    pub unconfirmed: u64,
    /// Factorizations cut short by the rho budget.
    pub partial: u64,
    pub passed: bool,
}

/// For each pair, factors the resultant and counts prime factors inside
/// `[4^s, 8^s]`; each must number at most `log_4 s` and each is confirmed to
/// cause a collision.
pub fn audit_bad_primes(
    s: u64,
    r: usize,
    range: ExponentRange,
    selection: PairSelection,
    rho_budget: u64,
) -> Result<BadPrimeAudit, AnalyticError> {
    let phi = cyclotomic_pow2(s)?;
    let pairs = subset_pairs(s, r, range, selection)?;
    let lo = BigUint::one() << (2 * s);
    let hi = BigUint::one() << (3 * s);

    let mut degenerate = 0;
    let mut max_b = 0u32;
    let mut bad_primes = Vec::new();
    let mut unconfirmed = 0;
    let mut partial = 0;
    let mut b_ok = true;
    for (plus, minus) in &pairs {
        let q = subset_sum_poly(plus, minus)?;
        let res: BigInt = resultant_int(&phi, &q)?;
        if res.is_zero() {
            degenerate += 1;
            continue;
        }
        let fac = factorize(res.magnitude(), rho_budget);
        if !fac.is_complete() {
            partial += 1;
        }
        let mut b = 0u32;
        for (prime, _) in fac.primes.iter().filter(|(p, _)| *p >= lo && *p <= hi) {
            b += 1;
            let confirmation = confirm_collision(prime, s, plus, minus);
            if confirmation == Collision::NotConfirmed {
                unconfirmed += 1;
            }
            bad_primes.push(BadPrimeRecord {
                prime: prime.to_string(),
                plus: plus.clone(),
                minus: minus.clone(),
                confirmation,
            });
        }
        // B <= log_4 s  <=>  4^B <= s
        b_ok &= BigUint::from(4u8).pow(b) <= BigUint::from(s);
        max_b = max_b.max(b);
    }
    let b_bound = log4(&BigUint::from(s));
    Ok(BadPrimeAudit {
        s,
        r,
        range,
        selection,
        interval_lo: lo.to_string(),
        interval_hi: hi.to_string(),
        pairs_examined: pairs.len() as u64,
        degenerate_pairs: degenerate,
        b_bound,
        max_b,
        bad_primes,
        unconfirmed,
        partial,
        passed: b_ok && unconfirmed == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TBoundReport {
    NotDeskCheckable {
        s: u64,
        n: u64,
        reason: String,
    },
    Checked {
        s: u64,
        n: u64,
        lo: u64,
        hi: u64,
        /// Primes `p = 1 (mod n)` in `[4^s, 8^s]`, counted exactly.
        t_count: u64,
        phi_n: u64,
        /// `8^s / (2 phi(n) sqrt(n) ln 8^s)`
        lower_bound: f64,
        /// Same with `phi(n) = n/2`: `8^s / (n^{3/2} ln 8^s)`.
        lower_bound_pow2: f64,
        /// `4^s >= n^3`
        range_assumption_holds: bool,
        /// Whether `t_count >= lower_bound` at this (pre-asymptotic) scale.
        held: bool,
    },
}

/// Counts `T` by segmented sieve and sets it beside the claimed lower bound.
/// Descriptive only; nothing here is asserted.
pub fn audit_t_lower_bound(s: u64, n: u64, budget: u64) -> Result<TBoundReport, AnalyticError> {
    if n == 0 {
        return Err(AnalyticError::ZeroModulus);
    }
    let hi = if 3 * s < 64 { Some(1u64 << (3 * s)) } else { None };
    let hi = match hi {
        Some(h) if h <= budget => h,
        _ => {
            return Ok(TBoundReport::NotDeskCheckable {
                s,
                n,
                reason: format!("8^{s} exceeds the sieve budget {budget}"),
            })
        }
    };
    let lo = 1u64 << (2 * s);
    let t_count = count_primes_in_ap(lo, hi, n, 1, budget)?;
    let phi_n = euler_phi(n);
    let log_hi = 3.0 * s as f64 * 2f64.ln();
    let hi_f = hi as f64;
    let lower_bound = hi_f / (2.0 * phi_n as f64 * (n as f64).sqrt() * log_hi);
    let lower_bound_pow2 = hi_f / ((n as f64).powf(1.5) * log_hi);
    let n3 = (n as u128).checked_pow(3);
    Ok(TBoundReport::Checked {
        s,
        n,
        lo,
        hi,
        t_count,
        phi_n,
        lower_bound,
        lower_bound_pow2,
        range_assumption_holds: n3.is_some_and(|n3| lo as u128 >= n3),
        held: t_count as f64 >= lower_bound,
    })
}

/// `ln x` for a big integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    log4(x) * 4f64.ln()
}
