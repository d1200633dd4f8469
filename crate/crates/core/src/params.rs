//! The parameter tower: rate, scale `K`, block length `n = s*m`, degree bound
//! `k = (r-2)*m` and the radius `delta = 1 - r/s`.
//!
//! All logarithms are natural unless the name says `log2`.

use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratio::{self, format_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("invalid rate: need v >= 1 and u < 2^(v-1), got u = {u}, v = {v}")]
    InvalidRate { u: u64, v: u32 },
    #[error("rate must be positive for the scale bound")]
    ZeroRate,
    #[error("C must be positive")]
    NonPositiveC,
    #[error("constraint violated: {}", .0.join("; "))]
    Constraints(Vec<String>),
}

impl ParamError {
    /// Names of the violated constraints, if this is a constraint failure.
    pub fn constraint_names(&self) -> Vec<String> {
        match self {
            ParamError::Constraints(names) => names.clone(),
            other => vec![other.to_string()],
        }
    }
}

/// Code rate `u / 2^v`, required to lie in `[0, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateSpec {
    pub u: u64,
    pub v: u32,
}

impl RateSpec {
    pub fn new(u: u64, v: u32) -> Result<Self, ParamError> {
        if v == 0 || v > 62 || u >= 1u64 << (v - 1) {
            return Err(ParamError::InvalidRate { u, v });
        }
        Ok(RateSpec { u, v })
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        RateSpec::new(self.u, self.v).map(|_| ())
    }

    pub fn as_ratio(&self) -> Rational {
        Ratio::new_raw(self.u as i64, 1i64 << self.v)
    }

    pub fn as_f64(&self) -> f64 {
        self.u as f64 / (1u64 << self.v) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Strict,
    Desk,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Strict => "strict",
            Profile::Desk => "desk",
        })
    }
}

/// Which term of the max defining the scale bound is larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleBranch {
    /// `C / (rho * ln(1/(2 rho)))`
    SumCount,
    /// `9 / (2 ln 8)`
    Floor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleBound {
    pub value: f64,
    pub branch: ScaleBranch,
}

/// `9 / (2 ln 8)`, the constant floor on the scale.
pub fn scale_floor() -> f64 {
    9.0 / (2.0 * 8f64.ln())
}

/// `L(rho, C) = max{ C / (rho ln(1/(2 rho))), 9 / (2 ln 8) }`.
pub fn compute_scale_bound(rate: RateSpec, c: Rational) -> Result<ScaleBound, ParamError> {
    rate.validate()?;
    if rate.u == 0 {
        return Err(ParamError::ZeroRate);
    }
    if c <= Ratio::zero() {
        return Err(ParamError::NonPositiveC);
    }
    let rho = rate.as_f64();
    let c = *c.numer() as f64 / *c.denom() as f64;
    let sum_count = c / (rho * (1.0 / (2.0 * rho)).ln());
    let floor = scale_floor();
    Ok(if sum_count >= floor {
        ScaleBound { value: sum_count, branch: ScaleBranch::SumCount }
    } else {
        ScaleBound { value: floor, branch: ScaleBranch::Floor }
    })
}

/// `K = 2^(floor(log2 L) + 1)`.
///
/// `floor(log2 L)` is found by comparing `L` against exactly representable
/// powers of two, so values at or next to a power of two are not misrounded.
pub fn choose_scale(bound: f64) -> u64 {
    if !(bound >= 1.0) {
        return 1;
    }
    let mut j = 0u32;
    while j < 62 && (2f64).powi(j as i32 + 1) <= bound {
        j += 1;
    }
    1u64 << (j + 1).min(63)
}

/// The full derived parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub profile: Profile,
    /// Exponent in the target `n^C` of distinct close points.
    #[serde(with = "ratio::as_str")]
    pub c: Rational,
    pub rate: RateSpec,
    /// `L(rho, C)`; absent only for a zero rate on the desk profile.
    pub scale_bound: Option<f64>,
    pub scale_branch: Option<ScaleBranch>,
    /// `K`, a power of two.
    pub scale: Option<u64>,
    pub alpha: u32,
    pub s: u64,
    pub r: u64,
    pub m: u64,
    pub n: u64,
    pub k: u64,
    #[serde(with = "ratio::as_str")]
    pub delta: Rational,
    #[serde(with = "ratio::as_str")]
    pub eta: Rational,
    /// `A = K ln 8`, so that `p < 8^s = n^A`.
    pub prime_exponent: Option<f64>,
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Derives the parameter set. Every violated constraint is reported by name.
pub fn derive_params(
    c: Rational,
    rate: RateSpec,
    alpha: u32,
    profile: Profile,
    m_override: Option<u64>,
) -> Result<ParamSet, ParamError> {
    rate.validate()?;
    if c <= Ratio::zero() {
        return Err(ParamError::NonPositiveC);
    }
    let mut violations: Vec<String> = Vec::new();
    if alpha == 0 {
        violations.push("alpha must be positive".into());
    }
    if alpha > 40 {
        violations.push("alpha > 40 (s would not fit the domain)".into());
    }
    if alpha < rate.v {
        violations.push("alpha < v".into());
    }

    let bound = match profile {
        Profile::Strict => Some(compute_scale_bound(rate, c)?),
        Profile::Desk if rate.u > 0 => Some(compute_scale_bound(rate, c)?),
        Profile::Desk => None,
    };
    let scale = bound.map(|b| choose_scale(b.value));

    let m = match profile {
        Profile::Strict => {
            let big_k = scale.expect("strict always has a scale");
            if m_override.is_some() {
                violations.push("m_override given for strict profile".into());
            }
            if (alpha as u64) < big_k.trailing_zeros() as u64 {
                violations.push("alpha < log2 K".into());
            }
            // K <= 2^alpha / alpha  <=>  K * alpha <= 2^alpha
            let two_alpha = 1u128 << alpha.min(100);
            if alpha > 0 && (big_k as u128) * (alpha as u128) > two_alpha {
                violations.push("2^alpha/alpha < K".into());
            }
            if !violations.is_empty() {
                return Err(ParamError::Constraints(violations));
            }
            let log2_n = (1u64 << alpha) / big_k;
            if log2_n > 62 {
                return Err(ParamError::Constraints(vec!["n = 2^(2^alpha/K) exceeds 2^62".into()]));
            }
            1u64 << (log2_n - alpha as u64)
        }
        Profile::Desk => match m_override {
            None => {
                violations.push("m_override missing for desk profile".into());
                0
            }
            Some(m) if !m.is_power_of_two() => {
                violations.push("m_override not a power of 2".into());
                0
            }
            Some(m) => m,
        },
    };
    if !violations.is_empty() {
        return Err(ParamError::Constraints(violations));
    }

    let s = 1u64 << alpha;
    let n = s.checked_mul(m).filter(|&n| n <= 1 << 62).ok_or_else(|| {
        ParamError::Constraints(vec!["n = s*m exceeds 2^62".into()])
    })?;
    let r = rate.u * (1u64 << (alpha - rate.v)) + 2;
    let k = (r - 2) * m;

    Ok(ParamSet {
        profile,
        c,
        rate,
        scale_bound: bound.map(|b| b.value),
        scale_branch: bound.map(|b| b.branch),
        scale,
        alpha,
        s,
        r,
        m,
        n,
        k,
        delta: Ratio::new_raw((s - r) as i64, s as i64),
        eta: Ratio::new_raw(2, s as i64),
        prime_exponent: scale.map(|big_k| big_k as f64 * 8f64.ln()),
    })
}

impl ParamSet {
    /// Re-runs [`derive_params`] from this set's free inputs.
    pub fn rederive(&self) -> Result<ParamSet, ParamError> {
        let m_override = match self.profile {
            Profile::Strict => None,
            Profile::Desk => Some(self.m),
        };
        derive_params(self.c, self.rate, self.alpha, self.profile, m_override)
    }

    pub fn rho(&self) -> Rational {
        self.rate.as_ratio()
    }

    pub fn log2_n(&self) -> u32 {
        self.n.trailing_zeros()
    }

    /// `r*m = (1 - delta) n`, the agreement each witness must reach.
    pub fn required_agreement(&self) -> u64 {
        self.r * self.m
    }

    /// `C(s/2, r)`, the number of half-range exponent subsets.
    pub fn half_subset_count(&self) -> BigUint {
        binomial(self.s / 2, self.r)
    }

    /// `ceil(n^C)`, saturating at `u64::MAX`.
    pub fn min_z_count(&self) -> u64 {
        let exp = Ratio::from_integer(self.log2_n() as i64) * self.c;
        if exp.is_integer() {
            let e = exp.to_integer();
            if e >= 64 {
                u64::MAX
            } else {
                1u64 << e
            }
        } else {
            let v = (exp.numer().to_f64().unwrap() / exp.denom().to_f64().unwrap()).exp2().ceil();
            if v >= u64::MAX as f64 {
                u64::MAX
            } else {
                v as u64
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Waived,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub status: CheckStatus,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

fn rational_check(name: &str, lhs: Rational, rhs: Rational) -> IdentityCheck {
    IdentityCheck {
        name: name.to_string(),
        status: if lhs == rhs { CheckStatus::Pass } else { CheckStatus::Fail },
        lhs: format_rational(&lhs),
        rhs: format_rational(&rhs),
    }
}

fn integer_check(name: &str, lhs: u128, rhs: u128) -> IdentityCheck {
    IdentityCheck {
        name: name.to_string(),
        status: if lhs == rhs { CheckStatus::Pass } else { CheckStatus::Fail },
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
    }
}

/// Exact verdicts for the structural relations and the two identities.
pub fn check_identities(ps: &ParamSet) -> IdentityReport {
    let mut checks = Vec::new();
    let two_alpha = 1u128.checked_shl(ps.alpha).unwrap_or(0);
    checks.push(integer_check("s = 2^alpha", ps.s as u128, two_alpha));
    checks.push(integer_check("n = s*m", ps.n as u128, ps.s as u128 * ps.m as u128));
    let r_expected = ps.rate.u as u128 * 1u128.checked_shl(ps.alpha.saturating_sub(ps.rate.v)).unwrap_or(0) + 2;
    checks.push(integer_check("r = rate*s + 2", ps.r as u128, r_expected));
    checks.push(integer_check(
        "k = (r-2)*m",
        ps.k as u128,
        (ps.r as u128).saturating_sub(2) * ps.m as u128,
    ));

    let n = ps.n.max(1) as i64;
    let s = ps.s.max(1) as i64;
    checks.push(rational_check("rate = k/n", Ratio::new_raw(ps.k as i64, n), ps.rho()));
    checks.push(rational_check(
        "delta = 1 - r/s",
        ps.delta,
        Ratio::new_raw(s - ps.r as i64, s),
    ));
    checks.push(rational_check(
        "(1 - rate) - delta = eta",
        Ratio::one() - ps.rho() - ps.delta,
        ps.eta,
    ));
    checks.push(rational_check("eta = 2/s", ps.eta, Ratio::new_raw(2, s)));

    let identity_two = "K*log2(n) = s";
    match (ps.profile, ps.scale) {
        (Profile::Strict, Some(big_k)) => {
            let log2_n = if ps.n.is_power_of_two() { ps.n.trailing_zeros() as u128 } else { 0 };
            checks.push(integer_check(identity_two, big_k as u128 * log2_n, ps.s as u128));
        }
        (Profile::Strict, None) => checks.push(IdentityCheck {
            name: identity_two.into(),
            status: CheckStatus::Fail,
            lhs: "missing K".into(),
            rhs: ps.s.to_string(),
        }),
        (Profile::Desk, _) => checks.push(IdentityCheck {
            name: identity_two.into(),
            status: CheckStatus::Waived,
            lhs: "waived (desk)".into(),
            rhs: ps.s.to_string(),
        }),
    }
    IdentityReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quarter() -> RateSpec {
        RateSpec::new(1, 2).unwrap()
    }

    fn one() -> Rational {
        Ratio::from_integer(1)
    }

    #[test]
    fn scale_bound_examples() {
        let b = compute_scale_bound(quarter(), one()).unwrap();
        // 1 / (0.25 ln 2)
        assert!((b.value - 4.0 / 2f64.ln()).abs() < 1e-12);
        assert!((b.value - 5.770780163555854).abs() < 1e-12);
        assert_eq!(b.branch, ScaleBranch::SumCount);

        let b = compute_scale_bound(quarter(), Ratio::new(1, 1_000_000)).unwrap();
        assert!((b.value - 2.164042561333445).abs() < 1e-12);
        assert_eq!(b.branch, ScaleBranch::Floor);

        let b = compute_scale_bound(RateSpec::new(1, 3).unwrap(), Ratio::from_integer(2)).unwrap();
        // 2 / ((1/8) ln 4) = 16 / ln 4
        assert!((b.value - 11.541560327111707).abs() < 1e-12);

        assert_eq!(
            compute_scale_bound(RateSpec { u: 2, v: 2 }, one()),
            Err(ParamError::InvalidRate { u: 2, v: 2 })
        );
    }

    #[test]
    fn scale_choice_examples() {
        assert_eq!(choose_scale(5.7708), 8);
        assert_eq!(choose_scale(2.1640), 4);
        assert_eq!(choose_scale(4.0), 8);
        assert_eq!(choose_scale(3.999999999), 4);
        assert_eq!(choose_scale(11.5416), 16);
    }

    #[test]
    fn strict_example() {
        let ps = derive_params(one(), quarter(), 6, Profile::Strict, None).unwrap();
        assert_eq!((ps.scale, ps.s, ps.r, ps.m, ps.n, ps.k), (Some(8), 64, 18, 4, 256, 64));
        assert_eq!(format_rational(&ps.delta), "46/64");
        assert_eq!(format_rational(&ps.eta), "2/64");
        assert!((ps.prime_exponent.unwrap() - 8.0 * 8f64.ln()).abs() < 1e-12);
        let report = check_identities(&ps);
        assert!(report.all_pass(), "{report:?}");
        let two = report.checks.iter().find(|c| c.name == "K*log2(n) = s").unwrap();
        assert_eq!((two.lhs.as_str(), two.rhs.as_str()), ("64", "64"));
        assert_eq!(ps.min_z_count(), 256);
    }

    #[test]
    fn strict_alpha_five_rejected() {
        let err = derive_params(one(), quarter(), 5, Profile::Strict, None).unwrap_err();
        assert_eq!(err.constraint_names(), vec!["2^alpha/alpha < K".to_string()]);
    }

    #[test]
    fn strict_reports_every_violation() {
        // rho = 1/64, v = 7: alpha = 3 violates alpha >= v, alpha >= log2 K and the K bound.
        let err = derive_params(one(), RateSpec::new(1, 7).unwrap(), 3, Profile::Strict, None)
            .unwrap_err();
        let names = err.constraint_names();
        assert!(names.contains(&"alpha < v".to_string()));
        assert!(names.contains(&"alpha < log2 K".to_string()));
        assert!(names.contains(&"2^alpha/alpha < K".to_string()));
    }

    #[test]
    fn desk_example() {
        let ps = derive_params(one(), quarter(), 4, Profile::Desk, Some(4)).unwrap();
        assert_eq!((ps.s, ps.r, ps.n, ps.k), (16, 6, 64, 16));
        assert_eq!(format_rational(&ps.delta), "10/16");
        assert_eq!(format_rational(&ps.eta), "2/16");
        let report = check_identities(&ps);
        assert!(report.all_pass());
        let two = report.checks.iter().find(|c| c.name == "K*log2(n) = s").unwrap();
        assert_eq!(two.status, CheckStatus::Waived);
        assert_eq!(two.lhs, "waived (desk)");
    }

    #[test]
    fn desk_guards() {
        let err = derive_params(one(), quarter(), 4, Profile::Desk, None).unwrap_err();
        assert_eq!(err.constraint_names(), vec!["m_override missing for desk profile".to_string()]);
        let err = derive_params(one(), quarter(), 4, Profile::Desk, Some(3)).unwrap_err();
        assert_eq!(err.constraint_names(), vec!["m_override not a power of 2".to_string()]);
        let err = derive_params(one(), quarter(), 6, Profile::Strict, Some(4)).unwrap_err();
        assert!(err.constraint_names().contains(&"m_override given for strict profile".to_string()));
    }

    #[test]
    fn tiny_zero_rate_desk() {
        let ps = derive_params(one(), RateSpec::new(0, 1).unwrap(), 2, Profile::Desk, Some(2)).unwrap();
        assert_eq!((ps.s, ps.r, ps.m, ps.n, ps.k), (4, 2, 2, 8, 0));
        assert_eq!(ps.delta, Ratio::new(1, 2));
        assert!(ps.scale.is_none());
        assert!(check_identities(&ps).all_pass());
        assert!(derive_params(one(), RateSpec::new(0, 1).unwrap(), 2, Profile::Strict, None).is_err());
    }

    #[test]
    fn tampered_degree_fails_identity_one() {
        let mut ps = derive_params(one(), quarter(), 6, Profile::Strict, None).unwrap();
        ps.k = 65;
        let report = check_identities(&ps);
        let one = report.checks.iter().find(|c| c.name == "rate = k/n").unwrap();
        assert_eq!(one.status, CheckStatus::Fail);
        assert_eq!((one.lhs.as_str(), one.rhs.as_str()), ("65/256", "1/4"));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 6), BigUint::from(28u8));
        assert_eq!(binomial(32, 18), BigUint::from(471435600u64));
        assert_eq!(binomial(2, 2), BigUint::one());
        assert_eq!(binomial(3, 5), BigUint::zero());
    }

    proptest! {
        #[test]
        fn strict_invariants(u in 1u64..8, v in 2u32..6, c_num in 1i64..6, c_den in 1i64..4, alpha in 1u32..10) {
            prop_assume!(u < 1u64 << (v - 1));
            let rate = RateSpec::new(u, v).unwrap();
            let c = Ratio::new(c_num, c_den);
            if let Ok(ps) = derive_params(c, rate, alpha, Profile::Strict, None) {
                let l = ps.scale_bound.unwrap();
                let big_k = ps.scale.unwrap();
                prop_assert!(big_k.is_power_of_two());
                prop_assert!(l <= big_k as f64 && big_k as f64 <= 2.0 * l);
                prop_assert_eq!(ps.n, 1u64 << ((1u64 << alpha) / big_k));
                prop_assert_eq!(big_k * ps.log2_n() as u64, ps.s);
                prop_assert_eq!(Ratio::one() - ps.rho() - ps.delta, Ratio::new(2, ps.s as i64));
                prop_assert!(check_identities(&ps).all_pass());
                prop_assert_eq!(derive_params(c, rate, alpha, Profile::Strict, None).unwrap(), ps);
            }
        }

        #[test]
        fn desk_eta_identity(u in 0u64..8, v in 1u32..6, alpha in 1u32..12, log_m in 0u32..8) {
            prop_assume!(u < 1u64 << (v - 1) && alpha >= v);
            let rate = RateSpec::new(u, v).unwrap();
            let ps = derive_params(Ratio::from_integer(1), rate, alpha, Profile::Desk, Some(1 << log_m)).unwrap();
            prop_assert_eq!(Ratio::one() - ps.rho() - ps.delta, Ratio::new(2, ps.s as i64));
            prop_assert!(check_identities(&ps).all_pass());
        }
    }
}
