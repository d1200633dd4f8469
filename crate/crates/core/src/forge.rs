//! End-to-end construction: good-prime search, collection of distinct subset
//! sums, witness assembly, and independent re-verification of the result.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::ln_biguint;
use crate::combin::{random_subset, subset_mask, Combinations};
use crate::modmath::{
    find_root_of_unity, is_probable_prime, Fe, FieldError, PrimeField, PrimeFieldCtx,
    FIELD_MR_ROUNDS,
};
use crate::numstr;
use crate::params::{binomial, check_identities, CheckStatus, ParamSet, Profile};
use crate::poly::{eval_monomial_word, expand_coset_product, DensePoly, EvalTable, PolyError};
use crate::ratio::{self, format_rational, Rational};
use crate::rscode::{
    check_agreement_witness, distance_to_code_bruteforce, max_agreement_bruteforce,
    no_correlated_agreement_cert, AgreementWitness, CodeDesc, CodeError, NoCorrelatedAgreementCert,
    WitnessFailure, DEFAULT_ORACLE_BUDGET,
};

pub const DEFAULT_MAX_CANDIDATES: u64 = 100_000;
pub const DEFAULT_EXHAUSTIVE_BUDGET: u64 = 1_000_000;
pub const DEFAULT_SAMPLE_PAIRS: u64 = 1_000_000;
pub const DEFAULT_WITNESS_BUDGET: u64 = 4096;

const CANDIDATE_BATCH: u64 = 256;
const SUM_CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("range assumption 4^s >= n^3 fails for s = {s}, n = {n}")]
    RangeAssumption { s: u64, n: u64 },
    #[error("exponent range s/2 = {half} exceeds 128")]
    SubsetsTooWide { half: u64 },
    #[error("prime search exhausted after {} candidates", .0.candidates_tried)]
    SearchExhausted(PrimeSearchLog),
    #[error("only {found} distinct sums available, {target} required")]
    InsufficientSums { found: u64, target: u64 },
    #[error("context does not match params: {0}")]
    ContextMismatch(String),
    #[error("witness for subset {subset:?} rejected: {failure}")]
    WitnessRejected { subset: Vec<usize>, failure: WitnessFailure },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

impl ForgeError {
    /// Failures of the randomized search rather than of the inputs.
    pub fn is_search_failure(&self) -> bool {
        matches!(self, ForgeError::SearchExhausted(_) | ForgeError::InsufficientSums { .. })
    }

    pub fn is_param_error(&self) -> bool {
        matches!(
            self,
            ForgeError::RangeAssumption { .. } | ForgeError::SubsetsTooWide { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    Random,
    Sequential,
    /// Prime supplied by the caller, no search performed.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForgePolicy {
    pub max_candidates: u64,
    pub method: SearchMethod,
    /// Audit exhaustively when `C(s/2, r)` is at most this.
    pub exhaustive_budget: u64,
    pub sample_pairs: u64,
    pub witness_budget: u64,
    pub mr_rounds: u32,
}

impl Default for ForgePolicy {
    fn default() -> Self {
        ForgePolicy {
            max_candidates: DEFAULT_MAX_CANDIDATES,
            method: SearchMethod::Random,
            exhaustive_budget: DEFAULT_EXHAUSTIVE_BUDGET,
            sample_pairs: DEFAULT_SAMPLE_PAIRS,
            witness_budget: DEFAULT_WITNESS_BUDGET,
            mr_rounds: FIELD_MR_ROUNDS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMode {
    Exhaustive,
    Sampled,
}

/// Distinctness of the `r`-subset sums of `xi^0, ..., xi^{s/2-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumAudit {
    pub mode: AuditMode,
    pub r: u64,
    /// Distinct subsets whose sums were compared.
    pub subsets_examined: u64,
    pub collisions_found: u64,
    pub distinct_sums: u64,
    pub sampled_pairs: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSearchLog {
    pub seed: u64,
    pub method: SearchMethod,
    pub candidates_tried: u64,
    pub probable_primes: u64,
    pub rejected_for_collisions: u64,
    /// `4^s >= n^3`; checked on every profile, enforced on strict.
    pub range_assumption_holds: bool,
    /// Bit length of the largest candidate considered.
    pub upper_bound_bits: u64,
}

fn half_range(s: usize) -> Result<usize, ForgeError> {
    let half = s / 2;
    if half > 128 {
        return Err(ForgeError::SubsetsTooWide { half: half as u64 });
    }
    Ok(half)
}

fn half_powers(ctx: &PrimeFieldCtx) -> Vec<Fe> {
    (0..ctx.s() / 2).map(|e| ctx.xi_pow(e)).collect()
}

fn subset_sum(f: &PrimeField, powers: &[Fe], subset: &[usize]) -> Fe {
    f.sum(subset.iter().map(|&e| powers[e]))
}

fn sort_key(x: &Fe) -> [u64; 4] {
    *x.limbs()
}

/// Counts distinct sums over the given distinct subsets.
fn count_distinct(f: &PrimeField, powers: &[Fe], subsets: &[Vec<usize>]) -> u64 {
    let mut sums: Vec<Fe> = subsets.par_iter().map(|e| subset_sum(f, powers, e)).collect();
    sums.par_sort_unstable_by_key(sort_key);
    sums.dedup();
    sums.len() as u64
}

/// Exhaustive when `C(s/2, r) <= exhaustive_budget`, otherwise `2 * pairs`
/// random subsets drawn from `seed` and compared against each other.
pub fn audit_subset_sums(
    ctx: &PrimeFieldCtx,
    r: usize,
    exhaustive_budget: u64,
    pairs: u64,
    seed: u64,
) -> Result<SumAudit, ForgeError> {
    let half = half_range(ctx.s())?;
    let total = binomial(half as u64, r as u64);
    let f = ctx.field();
    let powers = half_powers(ctx);
    if total <= BigUint::from(exhaustive_budget) {
        let subsets: Vec<Vec<usize>> = Combinations::new(half, r).collect();
        let distinct = count_distinct(f, &powers, &subsets);
        let examined = subsets.len() as u64;
        return Ok(SumAudit {
            mode: AuditMode::Exhaustive,
            r: r as u64,
            subsets_examined: examined,
            collisions_found: examined - distinct,
            distinct_sums: distinct,
            sampled_pairs: None,
            seed: None,
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut masks: Vec<u128> = (0..2 * pairs)
        .map(|_| subset_mask(&random_subset(&mut rng, half, r)))
        .collect();
    masks.par_sort_unstable();
    masks.dedup();
    let subsets: Vec<Vec<usize>> = masks
        .par_iter()
        .map(|&mask| (0..half).filter(|&e| mask >> e & 1 == 1).collect())
        .collect();
    let distinct = count_distinct(f, &powers, &subsets);
    let examined = subsets.len() as u64;
    Ok(SumAudit {
        mode: AuditMode::Sampled,
        r: r as u64,
        subsets_examined: examined,
        collisions_found: examined - distinct,
        distinct_sums: distinct,
        sampled_pairs: Some(pairs),
        seed: Some(seed),
    })
}

/// `4^s >= n^3`, i.e. `2s >= 3 log2 n`.
pub fn range_assumption_holds(ps: &ParamSet) -> bool {
    2 * ps.s >= 3 * ps.log2_n() as u64
}

/// A value slightly below `n^A`, or `None` off the strict profile.
fn exponent_cap(ps: &ParamSet) -> Option<BigUint> {
    let a = ps.prime_exponent.filter(|_| ps.profile == Profile::Strict)?;
    let bits = a * ps.log2_n() as f64;
    let whole = bits.floor();
    let mantissa = ((bits - whole).exp2() * (1u64 << 52) as f64 * (1.0 - 1e-12)).floor() as u64;
    let whole = whole as usize;
    Some(if whole >= 52 {
        BigUint::from(mantissa) << (whole - 52)
    } else {
        BigUint::from(mantissa) >> (52 - whole)
    })
}

/// Upper end of the search: `8^s`, lowered to just under `n^A` on the
/// strict profile so that the exponent claim holds for the prime found.
pub fn search_upper_bound(ps: &ParamSet) -> BigUint {
    let hi = BigUint::one() << (3 * ps.s as usize);
    match exponent_cap(ps) {
        Some(cap) if cap < hi => cap,
        _ => hi,
    }
}

/// Bounds `[t_lo, t_hi]` such that `1 + n t` covers `[4^s, search_upper_bound]`.
fn candidate_range(ps: &ParamSet) -> (BigUint, BigUint) {
    let n = BigUint::from(ps.n);
    let lo = BigUint::one() << (2 * ps.s as usize);
    let hi = search_upper_bound(ps);
    let t_lo = (lo - 1u8).div_ceil(&n);
    let t_hi = (hi - 1u8) / &n;
    (t_lo, t_hi)
}

pub struct GoodPrime {
    pub ctx: Arc<PrimeFieldCtx>,
    pub audit: SumAudit,
    pub log: PrimeSearchLog,
}

/// Searches `p = 1 + n t` in `[4^s, 8^s]` until a probable prime passes the
/// sum audit. `omega` is drawn from `seed + 1`, the sampled audit from `seed + 2`.
pub fn find_good_prime(
    ps: &ParamSet,
    seed: u64,
    policy: &ForgePolicy,
) -> Result<GoodPrime, ForgeError> {
    half_range(ps.s as usize)?;
    let range_ok = range_assumption_holds(ps);
    if ps.profile == Profile::Strict && !range_ok {
        return Err(ForgeError::RangeAssumption { s: ps.s, n: ps.n });
    }
    let mut log = PrimeSearchLog {
        seed,
        method: policy.method,
        candidates_tried: 0,
        probable_primes: 0,
        rejected_for_collisions: 0,
        range_assumption_holds: range_ok,
        upper_bound_bits: search_upper_bound(ps).bits(),
    };
    let (t_lo, t_hi) = candidate_range(ps);
    let t_end = &t_hi + 1u8;
    if t_lo >= t_end {
        return Err(ForgeError::SearchExhausted(log));
    }
    let n = BigUint::from(ps.n);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut next_seq = t_lo.clone();

    while log.candidates_tried < policy.max_candidates {
        let batch = CANDIDATE_BATCH.min(policy.max_candidates - log.candidates_tried);
        let candidates: Vec<BigUint> = (0..batch)
            .map(|_| {
                let t = match policy.method {
                    SearchMethod::Sequential | SearchMethod::Fixed => {
                        let t = next_seq.clone();
                        next_seq += 1u8;
                        if next_seq >= t_end {
                            next_seq = t_lo.clone();
                        }
                        t
                    }
                    SearchMethod::Random => rng.gen_biguint_range(&t_lo, &t_end),
                };
                &n * t + 1u8
            })
            .collect();
        let verdicts: Vec<bool> = candidates
            .par_iter()
            .map(|p| is_probable_prime(p, policy.mr_rounds))
            .collect();
        for (p, is_prime) in candidates.iter().zip(verdicts) {
            log.candidates_tried += 1;
            if !is_prime {
                continue;
            }
            log.probable_primes += 1;
            let field = Arc::new(PrimeField::new(p)?);
            let mut omega_rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(1));
            let omega = find_root_of_unity(&field, ps.n, &mut omega_rng)?;
            let ctx = PrimeFieldCtx::new(field, ps.n as usize, omega, ps.m as usize)?;
            let audit = audit_subset_sums(
                &ctx,
                ps.r as usize,
                policy.exhaustive_budget,
                policy.sample_pairs,
                seed.wrapping_add(2),
            )?;
            if audit.collisions_found == 0 {
                return Ok(GoodPrime { ctx: Arc::new(ctx), audit, log });
            }
            log.rejected_for_collisions += 1;
        }
    }
    Err(ForgeError::SearchExhausted(log))
}

/// Lexicographic scan of `r`-subsets of `[0, s/2)`, keeping each subset whose
/// sum differs from all kept so far, until `target` are held.
pub fn enumerate_lambda(
    ctx: &PrimeFieldCtx,
    r: usize,
    target: u64,
) -> Result<Vec<(Vec<usize>, Fe)>, ForgeError> {
    let half = half_range(ctx.s())?;
    let f = ctx.field();
    let powers = half_powers(ctx);
    let mut seen: HashSet<Fe> = HashSet::new();
    let mut kept = Vec::new();
    let mut subsets = Combinations::new(half, r);
    while (kept.len() as u64) < target {
        let chunk: Vec<Vec<usize>> = subsets.by_ref().take(SUM_CHUNK).collect();
        if chunk.is_empty() {
            return Err(ForgeError::InsufficientSums { found: kept.len() as u64, target });
        }
        let sums: Vec<Fe> = chunk.par_iter().map(|e| subset_sum(f, &powers, e)).collect();
        for (subset, lambda) in chunk.into_iter().zip(sums) {
            if (kept.len() as u64) < target && seen.insert(lambda) {
                kept.push((subset, lambda));
            }
        }
    }
    Ok(kept)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// `z = -lambda`, codeword `-R`.
    NegatedLambda,
}

/// Sorted index list, or `[start, stride, count]` progressions whose union
/// is the agreement set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "encoding", content = "data", rename_all = "snake_case")]
pub enum AgreementSet {
    Indices(Vec<usize>),
    Progressions(Vec<[usize; 3]>),
}

impl AgreementSet {
    /// Expanded and sorted; duplicates are kept so that checks can see them.
    /// Fails if the set would exceed `limit` entries or overflow.
    pub fn expand(&self, limit: usize) -> Result<Vec<usize>, String> {
        let mut out = match self {
            AgreementSet::Indices(v) => {
                if v.len() > limit {
                    return Err(format!("{} indices exceed {limit}", v.len()));
                }
                v.clone()
            }
            AgreementSet::Progressions(runs) => {
                let mut out = Vec::new();
                for &[start, stride, count] in runs {
                    if out.len() + count > limit {
                        return Err(format!("progressions exceed {limit} indices"));
                    }
                    for i in 0..count {
                        let t = i
                            .checked_mul(stride)
                            .and_then(|x| x.checked_add(start))
                            .ok_or_else(|| "progression overflows".to_string())?;
                        out.push(t);
                    }
                }
                out
            }
        };
        out.sort_unstable();
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub subset: Vec<usize>,
    #[serde(with = "numstr::dec")]
    pub z: BigUint,
    /// Coefficients in increasing degree, trailing zeros trimmed.
    #[serde(with = "numstr::dec_vec")]
    pub codeword: Vec<BigUint>,
    pub agreement: AgreementSet,
    #[serde(with = "ratio::as_str")]
    pub claimed_delta: Rational,
    pub sign: SignConvention,
}

/// `distinct_sums >= ceil((s/2r)^r)` in exhaustive mode; `collected >= n^C`
/// on the strict profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumCountVerdict {
    #[serde(with = "numstr::dec")]
    pub lower_bound: BigUint,
    pub distinct_sums: u64,
    pub exhaustive_checked: bool,
    pub collected: u64,
    pub target: Option<u64>,
    pub passed: bool,
}

pub fn audit_sum_count_bound(ps: &ParamSet, audit: &SumAudit, collected: u64) -> SumCountVerdict {
    let num = BigUint::from(ps.s).pow(ps.r as u32);
    let den = BigUint::from(2 * ps.r).pow(ps.r as u32);
    let lower_bound = num.div_ceil(&den);
    let exhaustive_checked = audit.mode == AuditMode::Exhaustive;
    let bound_ok = !exhaustive_checked || BigUint::from(audit.distinct_sums) >= lower_bound;
    let target = (ps.profile == Profile::Strict).then(|| ps.min_z_count());
    let target_ok = target.map_or(true, |t| collected >= t);
    SumCountVerdict {
        lower_bound,
        distinct_sums: audit.distinct_sums,
        exhaustive_checked,
        collected,
        target,
        passed: bound_ok && target_ok,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub params: ParamSet,
    #[serde(with = "numstr::dec")]
    pub prime: BigUint,
    #[serde(with = "numstr::dec")]
    pub omega: BigUint,
    #[serde(with = "numstr::dec")]
    pub xi: BigUint,
    pub r: u64,
    pub m: u64,
    pub z_count: u64,
    pub cert: NoCorrelatedAgreementCert,
    pub sum_audit: SumAudit,
    pub sum_count: SumCountVerdict,
    pub prime_search: PrimeSearchLog,
    pub witnesses: Vec<WitnessRecord>,
}

/// Number of witnesses built for `ps`.
pub fn witness_target(ps: &ParamSet, witness_budget: u64) -> u64 {
    let all = ps.half_subset_count();
    let capped = if all <= BigUint::from(witness_budget) {
        u64::try_from(&all).expect("fits")
    } else {
        witness_budget
    };
    match ps.profile {
        Profile::Strict => capped.max(ps.min_z_count()),
        Profile::Desk => capped,
    }
}

pub fn build_counterexample(
    ps: &ParamSet,
    seed: u64,
    policy: &ForgePolicy,
) -> Result<Counterexample, ForgeError> {
    let good = find_good_prime(ps, seed, policy)?;
    assemble(ps, good, policy)
}

/// Builds on a caller-supplied prime and `omega`, skipping the search.
pub fn build_counterexample_with_ctx(
    ps: &ParamSet,
    ctx: Arc<PrimeFieldCtx>,
    policy: &ForgePolicy,
) -> Result<Counterexample, ForgeError> {
    if ctx.n() as u64 != ps.n || ctx.m() as u64 != ps.m {
        return Err(ForgeError::ContextMismatch(format!(
            "ctx has n = {}, m = {}; params have n = {}, m = {}",
            ctx.n(),
            ctx.m(),
            ps.n,
            ps.m
        )));
    }
    let audit = audit_subset_sums(&ctx, ps.r as usize, policy.exhaustive_budget, policy.sample_pairs, 0)?;
    let log = PrimeSearchLog {
        seed: 0,
        method: SearchMethod::Fixed,
        candidates_tried: 0,
        probable_primes: 0,
        rejected_for_collisions: 0,
        range_assumption_holds: range_assumption_holds(ps),
        upper_bound_bits: ctx.field().modulus().bits(),
    };
    assemble(ps, GoodPrime { ctx, audit, log }, policy)
}

fn agreement_progressions(ctx: &PrimeFieldCtx, subset: &[usize]) -> Vec<[usize; 3]> {
    subset.iter().map(|&j| [j, ctx.s(), ctx.m()]).collect()
}

fn build_witness(
    code: &CodeDesc,
    r: usize,
    delta: Rational,
    subset: &[usize],
    lambda: Fe,
) -> Result<WitnessRecord, ForgeError> {
    let ctx = code.ctx();
    let f = ctx.field();
    let expansion = expand_coset_product(ctx, subset)?;
    debug_assert_eq!(expansion.lambda, lambda);
    let z = f.neg(lambda);
    let codeword = expansion.remainder.neg();
    let agreement = AgreementSet::Progressions(agreement_progressions(ctx, subset));
    let indices = agreement.expand(ctx.n()).expect("within domain");
    let word = eval_monomial_word(ctx, r, z);
    let wit = AgreementWitness {
        z,
        codeword_poly: codeword.clone(),
        agreement: indices,
        claimed_delta: delta,
    };
    let verdict = check_agreement_witness(code, &word, &wit);
    if let Some(failure) = verdict.failure {
        return Err(ForgeError::WitnessRejected { subset: subset.to_vec(), failure });
    }
    Ok(WitnessRecord {
        subset: subset.to_vec(),
        z: z.to_biguint(),
        codeword: codeword.coeffs().iter().map(|c| c.to_biguint()).collect(),
        agreement,
        claimed_delta: delta,
        sign: SignConvention::NegatedLambda,
    })
}

fn assemble(
    ps: &ParamSet,
    good: GoodPrime,
    policy: &ForgePolicy,
) -> Result<Counterexample, ForgeError> {
    let GoodPrime { ctx, audit, log } = good;
    let r = ps.r as usize;
    let code = CodeDesc::new(ctx.clone(), ps.k as usize)?;
    let target = witness_target(ps, policy.witness_budget);
    let lambdas = enumerate_lambda(&ctx, r, target)?;
    let witnesses = lambdas
        .par_iter()
        .map(|(subset, lambda)| build_witness(&code, r, ps.delta, subset, *lambda))
        .collect::<Result<Vec<_>, _>>()?;
    let z_count = witnesses.len() as u64;
    let f = ctx.field();
    Ok(Counterexample {
        params: ps.clone(),
        prime: f.modulus().clone(),
        omega: ctx.omega().to_biguint(),
        xi: ctx.xi().to_biguint(),
        r: ps.r,
        m: ps.m,
        z_count,
        cert: no_correlated_agreement_cert(&code, r, ps.m as usize),
        sum_count: audit_sum_count_bound(ps, &audit, z_count),
        sum_audit: audit,
        prime_search: log,
        witnesses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    Witness,
    Exhaustive,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyBudgets {
    /// Cap on `p^(k+1)` for the brute-force oracles.
    pub oracle: u64,
    /// Cap on `C(s/2, r)` for an exhaustive audit rerun.
    pub exhaustive: u64,
}

impl Default for VerifyBudgets {
    fn default() -> Self {
        VerifyBudgets { oracle: DEFAULT_ORACLE_BUDGET, exhaustive: DEFAULT_EXHAUSTIVE_BUDGET }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub level: VerifyLevel,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

struct Report {
    checks: Vec<Check>,
}

impl Report {
    fn push(&mut self, name: &str, ok: bool, detail: impl Into<String>) -> bool {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.checks.push(Check { name: name.into(), status, detail: detail.into() });
        ok
    }

    fn skip(&mut self, name: &str, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), status: Status::Skipped, detail: detail.into() });
    }
}

const WITNESS_CHECKS: [&str; 4] =
    ["witness subsets", "witness z values", "witness coset membership", "witness agreement"];

fn remaining_checks(level: VerifyLevel) -> Vec<&'static str> {
    let mut names = vec!["certificate"];
    names.extend(WITNESS_CHECKS);
    names.extend(["z distinctness/count", "z target"]);
    if level != VerifyLevel::Witness {
        names.extend(["sum audit rerun", "sum count bound"]);
    }
    if level == VerifyLevel::Oracle {
        names.extend(["oracle distance", "oracle g agreement"]);
    }
    names
}

/// Re-checks every claim in `cx` from scratch. Failures are report entries;
/// checks that depend on a failed prerequisite are reported as skipped.
pub fn verify_counterexample(
    cx: &Counterexample,
    level: VerifyLevel,
    budgets: &VerifyBudgets,
) -> VerificationReport {
    let mut rep = Report { checks: Vec::new() };
    let ready = verify_foundation(cx, &mut rep);
    match ready {
        Some(ctx) => verify_body(cx, level, budgets, ctx, &mut rep),
        None => {
            let done: HashSet<String> = rep.checks.iter().map(|c| c.name.clone()).collect();
            for name in remaining_checks(level) {
                if !done.contains(name) {
                    rep.skip(name, "prerequisite failed");
                }
            }
        }
    }
    VerificationReport { level, checks: rep.checks }
}

fn verify_foundation(cx: &Counterexample, rep: &mut Report) -> Option<Arc<PrimeFieldCtx>> {
    let ps = &cx.params;
    let mut ok = match ps.rederive() {
        Ok(fresh) => rep.push("params rederive", fresh == *ps, "stored params match a fresh derivation"),
        Err(e) => rep.push("params rederive", false, e.to_string()),
    };
    let ids = check_identities(ps);
    let bad: Vec<String> = ids
        .checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .map(|c| format!("{}: {} != {}", c.name, c.lhs, c.rhs))
        .collect();
    ok &= rep.push(
        "identities",
        bad.is_empty(),
        if bad.is_empty() { format!("{} identities hold", ids.checks.len()) } else { bad.join("; ") },
    );
    ok &= rep.push(
        "r and m",
        cx.r == ps.r && cx.m == ps.m,
        format!("r = {}, m = {} (params {}, {})", cx.r, cx.m, ps.r, ps.m),
    );
    if !ok || ps.r < 2 || ps.m == 0 {
        return None;
    }

    let p = &cx.prime;
    let prime_ok = p.bits() <= 255 && is_probable_prime(p, FIELD_MR_ROUNDS);
    rep.push("prime primality", prime_ok, format!("{} bits, {FIELD_MR_ROUNDS} random rounds", p.bits()));
    if !prime_ok {
        return None;
    }
    let congruent = (p - 1u8) % ps.n == BigUint::zero();
    ok = rep.push("p = 1 mod n", congruent, format!("n = {}", ps.n));
    let lo = BigUint::one() << (2 * ps.s as usize);
    let hi = BigUint::one() << (3 * ps.s as usize);
    if cx.prime_search.method == SearchMethod::Fixed && ps.profile == Profile::Desk {
        rep.skip("prime interval", "caller-supplied prime");
    } else {
        ok &= rep.push(
            "prime interval",
            lo <= *p && *p <= hi,
            format!("4^{s} <= p <= 8^{s}", s = ps.s),
        );
    }
    match (ps.profile, ps.prime_exponent) {
        (Profile::Strict, Some(a)) => {
            let ratio = ln_biguint(p) / (ps.n as f64).ln();
            ok &= rep.push("prime exponent bound", ratio <= a, format!("ln p / ln n = {ratio:.4} <= A = {a:.4}"));
        }
        _ => rep.skip("prime exponent bound", "desk profile"),
    }

    let field = match PrimeField::new(p) {
        Ok(f) => Arc::new(f),
        Err(e) => {
            rep.push("omega order", false, e.to_string());
            return None;
        }
    };
    let Some(omega) = field.from_canonical(&cx.omega) else {
        rep.push("omega order", false, "omega is not reduced mod p");
        return None;
    };
    let ctx = match PrimeFieldCtx::new(field.clone(), ps.n as usize, omega, ps.m as usize) {
        Ok(ctx) => ctx,
        Err(e) => {
            rep.push("omega order", false, e.to_string());
            return None;
        }
    };
    rep.push("omega order", true, format!("omega has exact order {}", ps.n));
    let xi_ok = field.from_canonical(&cx.xi) == Some(ctx.xi());
    ok &= rep.push("xi order", xi_ok, format!("xi = omega^{} of exact order {}", ps.m, ps.s));
    ok.then(|| Arc::new(ctx))
}

fn first_failure<T: Sync>(
    items: &[T],
    check: impl Fn(usize, &T) -> Result<(), String> + Sync,
) -> Option<String> {
    items
        .par_iter()
        .enumerate()
        .map(|(i, w)| check(i, w).err().map(|e| (i, e)))
        .flatten()
        .min_by_key(|(i, _)| *i)
        .map(|(_, e)| e)
}

/// Decoded form of a witness, or the reason it cannot be decoded.
struct Decoded {
    z: Fe,
    codeword: DensePoly,
    agreement: Vec<usize>,
}

fn decode(ctx: &PrimeFieldCtx, i: usize, w: &WitnessRecord) -> Result<Decoded, String> {
    let f = ctx.field();
    let z = f.from_canonical(&w.z).ok_or_else(|| format!("witness {i}: z not reduced mod p"))?;
    let coeffs = w
        .codeword
        .iter()
        .enumerate()
        .map(|(d, c)| {
            f.from_canonical(c).ok_or_else(|| format!("witness {i}: coefficient {d} not reduced mod p"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let agreement = w.agreement.expand(ctx.n()).map_err(|e| format!("witness {i}: {e}"))?;
    Ok(Decoded { z, codeword: DensePoly::new(ctx.field_arc().clone(), coeffs), agreement })
}

fn verify_body(
    cx: &Counterexample,
    level: VerifyLevel,
    budgets: &VerifyBudgets,
    ctx: Arc<PrimeFieldCtx>,
    rep: &mut Report,
) {
    let ps = &cx.params;
    let r = ps.r as usize;
    let m = ps.m as usize;
    let s = ps.s as usize;
    let n = ps.n as usize;
    let f = ctx.field();
    let code = match CodeDesc::new(ctx.clone(), ps.k as usize) {
        Ok(code) => code,
        Err(e) => {
            rep.push("certificate", false, e.to_string());
            return;
        }
    };
    let fresh = no_correlated_agreement_cert(&code, r, m);
    rep.push(
        "certificate",
        fresh == cx.cert && fresh.holds(),
        format!(
            "g agrees with C on at most {} < {} points",
            fresh.max_joint_agreement_bound, fresh.required_agreement
        ),
    );

    let ws = &cx.witnesses;
    let count = ws.len();
    let half = s / 2;
    let subsets_bad = first_failure(ws, |i, w| {
        if w.subset.len() != r {
            return Err(format!("witness {i}: subset has {} exponents, expected {r}", w.subset.len()));
        }
        if let Some(&e) = w.subset.iter().find(|&&e| e >= half) {
            return Err(format!("witness {i}: exponent {e} outside [0, {half})"));
        }
        if w.subset.windows(2).any(|p| p[0] >= p[1]) {
            return Err(format!("witness {i}: subset not strictly increasing"));
        }
        if w.sign != SignConvention::NegatedLambda || w.claimed_delta != ps.delta {
            return Err(format!("witness {i}: convention or claimed delta differs from params"));
        }
        Ok(())
    });
    let subsets_ok = subsets_bad.is_none();
    rep.push("witness subsets", subsets_ok, subsets_bad.unwrap_or_else(|| format!("{count} subsets of size {r} in [0, {half})")));
    if !subsets_ok {
        for name in &WITNESS_CHECKS[1..] {
            rep.skip(name, "prerequisite failed");
        }
        return skip_tail(cx, level, rep);
    }

    let decoded: Vec<Result<Decoded, String>> =
        ws.par_iter().enumerate().map(|(i, w)| decode(&ctx, i, w)).collect();

    let z_bad = first_failure(ws, |i, w| {
        let d = decoded[i].as_ref().map_err(|e| e.clone())?;
        let lambda = f.sum(w.subset.iter().map(|&e| ctx.xi_pow(e)));
        if f.add(d.z, lambda) != Fe::ZERO {
            return Err(format!("witness {i}: z differs from minus the sum of xi^e"));
        }
        Ok(())
    });
    rep.push("witness z values", z_bad.is_none(), z_bad.unwrap_or_else(|| format!("{count} values z = -sum xi^e")));

    let coset_bad = first_failure(ws, |i, w| {
        let d = decoded[i].as_ref().map_err(|e| e.clone())?;
        if d.agreement.len() != r * m {
            return Err(format!("witness {i}: {} agreement indices, expected {}", d.agreement.len(), r * m));
        }
        let targets: Vec<Fe> = w.subset.iter().map(|&e| ctx.xi_pow(e)).collect();
        for (pos, &t) in d.agreement.iter().enumerate() {
            if t >= n {
                return Err(format!("witness {i}: index {t} out of range"));
            }
            if pos > 0 && d.agreement[pos - 1] == t {
                return Err(format!("witness {i}: index {t} repeated"));
            }
            let image = f.pow(ctx.omega_pow(t), m as u64);
            if !targets.contains(&image) {
                return Err(format!("witness {i}: index {t} lies in no chosen coset"));
            }
        }
        Ok(())
    });
    rep.push(
        "witness coset membership",
        coset_bad.is_none(),
        coset_bad.unwrap_or_else(|| format!("each agreement set is the union of {r} cosets of size {m}")),
    );

    let agree_bad = first_failure(ws, |i, _| {
        let d = decoded[i].as_ref().map_err(|e| e.clone())?;
        let word = eval_monomial_word(&ctx, r, d.z);
        let wit = AgreementWitness {
            z: d.z,
            codeword_poly: d.codeword.clone(),
            agreement: d.agreement.clone(),
            claimed_delta: ps.delta,
        };
        match check_agreement_witness(&code, &word, &wit).failure {
            None => Ok(()),
            Some(failure) => Err(format!("witness {i}: {failure}")),
        }
    });
    rep.push(
        "witness agreement",
        agree_bad.is_none(),
        agree_bad.unwrap_or_else(|| {
            format!("{count} witnesses with agreement >= {} of {n}, distance <= {}", r * m, format_rational(&ps.delta))
        }),
    );

    let distinct: HashSet<&BigUint> = ws.iter().map(|w| &w.z).collect();
    rep.push(
        "z distinctness/count",
        distinct.len() == count && cx.z_count == count as u64,
        format!("z_count = {}, witnesses = {count}, distinct z = {}", cx.z_count, distinct.len()),
    );
    match ps.profile {
        Profile::Strict => {
            let target = ps.min_z_count();
            rep.push("z target", distinct.len() as u64 >= target, format!("{} distinct z >= n^C = {target}", distinct.len()));
        }
        Profile::Desk => rep.skip("z target", "desk profile has no n^C target"),
    }

    if level != VerifyLevel::Witness {
        verify_audit(cx, budgets, &ctx, rep);
    }
    if level == VerifyLevel::Oracle {
        verify_oracle(cx, budgets, &code, &decoded, rep);
    }
}

fn skip_tail(_cx: &Counterexample, level: VerifyLevel, rep: &mut Report) {
    for name in ["z distinctness/count", "z target"] {
        rep.skip(name, "prerequisite failed");
    }
    if level != VerifyLevel::Witness {
        rep.skip("sum audit rerun", "prerequisite failed");
        rep.skip("sum count bound", "prerequisite failed");
    }
    if level == VerifyLevel::Oracle {
        rep.skip("oracle distance", "prerequisite failed");
        rep.skip("oracle g agreement", "prerequisite failed");
    }
}

fn verify_audit(cx: &Counterexample, budgets: &VerifyBudgets, ctx: &PrimeFieldCtx, rep: &mut Report) {
    let ps = &cx.params;
    let stored = &cx.sum_audit;
    let rerun = match stored.mode {
        AuditMode::Exhaustive => {
            if ps.half_subset_count() > BigUint::from(budgets.exhaustive) {
                rep.skip("sum audit rerun", "C(s/2, r) exceeds exhaustive budget");
                None
            } else {
                Some(audit_subset_sums(ctx, ps.r as usize, u64::MAX, 0, 0))
            }
        }
        AuditMode::Sampled => match (stored.sampled_pairs, stored.seed) {
            (Some(pairs), Some(seed)) => Some(audit_subset_sums(ctx, ps.r as usize, 0, pairs, seed)),
            _ => {
                rep.push("sum audit rerun", false, "sampled audit lacks pairs or seed");
                None
            }
        },
    };
    match rerun {
        Some(Ok(fresh)) => {
            let same = fresh == *stored;
            rep.push(
                "sum audit rerun",
                same && fresh.collisions_found == 0 && fresh.r == ps.r,
                format!(
                    "{}: {} subsets, {} distinct sums, {} collisions{}",
                    match fresh.mode {
                        AuditMode::Exhaustive => "exhaustive",
                        AuditMode::Sampled => "sampled",
                    },
                    fresh.subsets_examined,
                    fresh.distinct_sums,
                    fresh.collisions_found,
                    if same { "" } else { " (differs from stored audit)" }
                ),
            );
        }
        Some(Err(e)) => {
            rep.push("sum audit rerun", false, e.to_string());
        }
        None => {}
    }
    let verdict = audit_sum_count_bound(ps, stored, cx.z_count);
    rep.push(
        "sum count bound",
        verdict.passed && verdict == cx.sum_count,
        format!(
            "distinct sums {} vs ceil((s/2r)^r) = {}{}; collected {}{}",
            verdict.distinct_sums,
            verdict.lower_bound,
            if verdict.exhaustive_checked { "" } else { " (not checked, sampled)" },
            verdict.collected,
            verdict.target.map(|t| format!(" vs n^C = {t}")).unwrap_or_default()
        ),
    );
}

fn verify_oracle(
    cx: &Counterexample,
    budgets: &VerifyBudgets,
    code: &CodeDesc,
    decoded: &[Result<Decoded, String>],
    rep: &mut Report,
) {
    let ps = &cx.params;
    let ctx = code.ctx();
    let n = code.n();
    let r = ps.r as usize;
    let mut worst: Option<Rational> = None;
    let mut failure = None;
    for (i, d) in decoded.iter().enumerate() {
        let Ok(d) = d else {
            failure = Some(format!("witness {i}: undecodable"));
            break;
        };
        let word = eval_monomial_word(ctx, r, d.z);
        match distance_to_code_bruteforce(code, &word, budgets.oracle) {
            Ok(dist) => {
                if dist > ps.delta {
                    failure = Some(format!(
                        "witness {i}: distance {} exceeds delta {}",
                        format_rational(&dist),
                        format_rational(&ps.delta)
                    ));
                    break;
                }
                worst = Some(worst.map_or(dist, |w: Rational| w.max(dist)));
            }
            Err(CodeError::OracleBudget { size, budget }) => {
                rep.skip("oracle distance", format!("p^(k+1) = {size} exceeds budget {budget}"));
                rep.skip("oracle g agreement", format!("p^(k+1) = {size} exceeds budget {budget}"));
                return;
            }
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    match failure {
        Some(msg) => {
            rep.push("oracle distance", false, msg);
        }
        None => {
            let worst = worst.map(|w| format_rational(&w)).unwrap_or_else(|| "none".into());
            rep.push(
                "oracle distance",
                true,
                format!("max distance {worst} <= delta {}", format_rational(&ps.delta)),
            );
        }
    }

    let g_exp = (r - 1) * ctx.m();
    let g_word = EvalTable { values: (0..n).map(|t| ctx.omega_pow(t * g_exp % n)).collect() };
    match max_agreement_bruteforce(code, &g_word, budgets.oracle) {
        Ok(best) => {
            let lower = Rational::new_raw((n - best) as i64, n as i64);
            let ok = best as u64 <= cx.cert.max_joint_agreement_bound && lower > ps.delta;
            rep.push(
                "oracle g agreement",
                ok,
                format!(
                    "max agreement of g is {best} <= {}; interleaved distance >= {} > delta {}",
                    cx.cert.max_joint_agreement_bound,
                    format_rational(&lower),
                    format_rational(&ps.delta)
                ),
            );
        }
        Err(e) => rep.skip("oracle g agreement", e.to_string()),
    }
}
