//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

mod common;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use common::*;
use gapforge::analytic::{
    self, confirm_collision, count_primes_in_ap, cyclotomic_pow2, factorize, resultant_int,
    resultant_modular, subset_sum_poly, Collision, ExponentRange, IntPoly, PairSelection,
    SieveTable, DEFAULT_RHO_BUDGET, DEFAULT_SEGMENT_BUDGET,
};
use gapforge::combin::Combinations;
use gapforge::cxfile::{self, CxFile};
use gapforge::forge::{
    self, verify_counterexample, AgreementSet, AuditMode, Counterexample, ForgePolicy, Status,
    VerifyBudgets, VerifyLevel,
};
use gapforge::modmath::Fe;
use gapforge::params::{check_identities, CheckStatus, Profile};
use gapforge::poly::{ntt_evaluate, ntt_interpolate, DensePoly, EvalTable};
use gapforge::rscode::{
    check_agreement_witness, distance_to_code_bruteforce, is_codeword, max_agreement_bruteforce,
    AgreementWitness, CodeDesc, DEFAULT_ORACLE_BUDGET,
};
use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

/// Values of `sum_d c_d x^d` on the whole tiny domain.
fn tiny_word(coeffs: &[u64]) -> EvalTable {
    let ctx = tiny_ctx();
    let f = ctx.field();
    let poly = DensePoly::new(ctx.field_arc().clone(), coeffs.iter().map(|&c| f.from_u64(c)).collect());
    EvalTable { values: ctx.domain().iter().map(|&a| poly.eval(a)).collect() }
}

/// Best agreement of a word with a constant, by counting value multiplicities.
fn best_constant_agreement(word: &EvalTable) -> usize {
    let mut counts = std::collections::HashMap::new();
    for v in &word.values {
        *counts.entry(*v).or_insert(0usize) += 1;
    }
    counts.into_values().max().unwrap_or(0)
}

fn criterion_tiny() -> Outcome {
    let start = Instant::now();
    let ps = tiny_params();
    ensure((ps.n, ps.s, ps.m, ps.r, ps.k) == (8, 4, 2, 2, 0), || format!("params {ps:?}"))?;
    ensure(ps.delta == Ratio::new(1, 2), || "delta != 1/2".into())?;
    let cx = tiny_cx();
    let w = &cx.witnesses[0];
    ensure(cx.z_count == 1 && w.z == BigUint::from(12u8), || format!("z = {}", w.z))?;
    ensure(w.codeword == vec![BigUint::from(13u8)], || format!("codeword {:?}", w.codeword))?;

    let ctx = tiny_ctx();
    let code = CodeDesc::new(ctx.clone(), 0).unwrap();
    let f = ctx.field();
    // x^4 + 12 x^2 = x^4 - 5 x^2
    let word = tiny_word(&[0, 0, 12, 0, 1]);
    let wit = AgreementWitness {
        z: f.from_u64(12),
        codeword_poly: DensePoly::constant(ctx.field_arc().clone(), f.from_u64(13)),
        agreement: w.agreement.expand(8).unwrap(),
        claimed_delta: ps.delta,
    };
    let verdict = check_agreement_witness(&code, &word, &wit);
    ensure(verdict.passed && verdict.agreement == 4, || format!("{verdict:?}"))?;

    let dist = distance_to_code_bruteforce(&code, &word, DEFAULT_ORACLE_BUDGET).unwrap();
    ensure(dist == Ratio::new(4, 8) && dist == ps.delta, || format!("distance {dist}"))?;
    ensure(best_constant_agreement(&word) == 4, || "hand oracle disagrees on f".into())?;

    let g = tiny_word(&[0, 0, 1]);
    let g_best = max_agreement_bruteforce(&code, &g, DEFAULT_ORACLE_BUDGET).unwrap();
    ensure(g_best == 2 && best_constant_agreement(&g) == 2, || format!("g agreement {g_best}"))?;
    let joint = Ratio::new((8 - g_best) as i64, 8);
    ensure(joint == Ratio::new(6, 8) && joint > ps.delta, || format!("joint {joint}"))?;
    ensure(cx.cert.max_joint_agreement_bound == 2, || "certificate bound".into())?;

    let rep = verify_counterexample(&cx, VerifyLevel::Oracle, &VerifyBudgets::default());
    ensure(rep.passed(), || rep.to_string())?;
    let took = within(start, Duration::from_secs(1))?;
    Ok(format!("z = 12, codeword 13, distance 4/8, g agreement 2, joint >= 6/8 ({took:.2?})"))
}

fn criterion_desk() -> Outcome {
    let start = Instant::now();
    let ps = desk_params();
    ensure((ps.s, ps.n, ps.k, ps.r) == (16, 64, 16, 6), || format!("params {ps:?}"))?;
    ensure(ps.delta == Ratio::new(10, 16), || "delta".into())?;
    let cx = forge::build_counterexample(&ps, 1, &ForgePolicy::default()).map_err(|e| e.to_string())?;
    let p = &cx.prime;
    ensure(*p >= BigUint::one() << 32 && *p <= BigUint::one() << 48, || format!("p = {p}"))?;
    ensure(p % 64u8 == BigUint::one(), || "p != 1 mod 64".into())?;
    let audit = &cx.sum_audit;
    ensure(
        audit.mode == AuditMode::Exhaustive && audit.subsets_examined == 28 && audit.collisions_found == 0,
        || format!("{audit:?}"),
    )?;
    ensure(cx.z_count == 28 && cx.witnesses.len() == 28, || format!("{} witnesses", cx.z_count))?;
    for (i, w) in cx.witnesses.iter().enumerate() {
        let size = w.agreement.expand(64).unwrap().len();
        ensure(size >= 24, || format!("witness {i} agreement {size}"))?;
    }
    ensure(cx.cert.max_joint_agreement_bound == 20 && cx.cert.required_agreement == 24, || {
        format!("{:?}", cx.cert)
    })?;
    let v = forge::audit_sum_count_bound(&ps, audit, cx.z_count);
    ensure(v.passed && v.lower_bound == BigUint::from(6u8) && v.distinct_sums == 28, || format!("{v:?}"))?;
    // (16/12)^6 = 4096/729
    ensure((4096f64 / 729.0 - 5.6187).abs() < 1e-4, || "bound arithmetic".into())?;
    let rep = verify_counterexample(&cx, VerifyLevel::Exhaustive, &VerifyBudgets::default());
    ensure(rep.passed(), || rep.to_string())?;
    let took = within(start, Duration::from_secs(10))?;
    Ok(format!("p = {p}, 28 distinct sums, 28 witnesses >= 24/64, 20 < 24 ({took:.2?})"))
}

fn criterion_strict() -> Outcome {
    let start = Instant::now();
    let ps = strict_params();
    ensure(
        (ps.scale, ps.s, ps.n, ps.k, ps.r, ps.m) == (Some(8), 64, 256, 64, 18, 4),
        || format!("params {ps:?}"),
    )?;
    ensure(ps.delta == Ratio::new(46, 64), || "delta".into())?;
    let ids = check_identities(&ps);
    ensure(ids.checks.iter().all(|c| c.status == CheckStatus::Pass), || format!("{ids:?}"))?;
    ensure(8 * ps.log2_n() as u64 == ps.s, || "K log2 n != s".into())?;

    let cx = forge::build_counterexample(&ps, 1, &ForgePolicy::default()).map_err(|e| e.to_string())?;
    let p = &cx.prime;
    ensure(*p >= BigUint::one() << 128 && *p <= BigUint::one() << 192, || format!("p = {p}"))?;
    ensure(p % 256u16 == BigUint::one(), || "p != 1 mod 256".into())?;
    let ratio = analytic::ln_biguint(p) / 256f64.ln();
    let a = 8.0 * 8f64.ln();
    ensure(ratio <= a, || format!("ln p / ln n = {ratio} > {a}"))?;
    let zs: HashSet<&BigUint> = cx.witnesses.iter().map(|w| &w.z).collect();
    ensure(zs.len() >= 256, || format!("{} distinct z", zs.len()))?;
    for (i, w) in cx.witnesses.iter().enumerate() {
        let size = w.agreement.expand(256).unwrap().len();
        ensure(size >= 72, || format!("witness {i} agreement {size}"))?;
    }
    let rep = verify_counterexample(&cx, VerifyLevel::Witness, &VerifyBudgets::default());
    ensure(rep.passed(), || rep.to_string())?;
    let took = within(start, Duration::from_secs(300))?;
    Ok(format!(
        "p has {} bits, ln p/ln n = {ratio:.3} <= {a:.3}, {} distinct z ({took:.2?})",
        p.bits(),
        zs.len()
    ))
}

/// `prod Q(zeta)` over the primitive `s`-th roots, in floating point.
fn resultant_by_roots(s: u64, q: &IntPoly) -> f64 {
    let mut acc = (1f64, 0f64);
    for k in (1..s).step_by(2) {
        let mut val = (0f64, 0f64);
        for (d, c) in q.coeffs().iter().enumerate() {
            let angle = 2.0 * std::f64::consts::PI * (k as f64) * (d as f64) / s as f64;
            let c = c.to_f64().unwrap();
            val.0 += c * angle.cos();
            val.1 += c * angle.sin();
        }
        acc = (acc.0 * val.0 - acc.1 * val.1, acc.0 * val.1 + acc.1 * val.0);
    }
    acc.0
}

fn criterion_resultants() -> Outcome {
    let start = Instant::now();
    let small = analytic::audit_resultant_bound(8, 2, ExponentRange::Half, PairSelection::Exhaustive)
        .map_err(|e| e.to_string())?;
    ensure(
        small.passed && small.pairs_examined == 30 && small.zero_resultants == 0 && small.bound == "256",
        || format!("{small:?}"),
    )?;
    let phi8 = cyclotomic_pow2(8).unwrap();
    let subsets: Vec<Vec<usize>> = Combinations::new(4, 2).collect();
    for plus in &subsets {
        for minus in subsets.iter().filter(|m| *m != plus) {
            let q = subset_sum_poly(plus, minus).unwrap();
            let exact = resultant_int(&phi8, &q).unwrap();
            let approx = resultant_by_roots(8, &q);
            ensure((exact.to_f64().unwrap() - approx).abs() < 1e-6, || {
                format!("{plus:?} vs {minus:?}: {exact} != {approx}")
            })?;
        }
    }

    let phi4 = IntPoly::from_i64(&[1, 0, 1]);
    let q = IntPoly::from_i64(&[1, 1, -1, -1]);
    let hand = (resultant_int(&phi4, &q).unwrap(), resultant_modular(&phi4, &q).unwrap());
    ensure(hand == (BigInt::from(8), BigInt::from(8)), || format!("hand case {hand:?}"))?;

    let mut sampled = 0;
    for (range, seed) in [(ExponentRange::Half, 1u64), (ExponentRange::Full, 2)] {
        let sel = PairSelection::Sampled { count: 1000, seed };
        let res = analytic::audit_resultant_bound(16, 6, range, sel).map_err(|e| e.to_string())?;
        ensure(res.passed && res.bound == 12u64.pow(8).to_string(), || format!("{res:?}"))?;
        let bad = analytic::audit_bad_primes(16, 6, range, sel, DEFAULT_RHO_BUDGET).map_err(|e| e.to_string())?;
        ensure(bad.passed && bad.max_b <= 2 && bad.unconfirmed == 0 && bad.b_bound == 2.0, || {
            format!("{bad:?}")
        })?;
        ensure(
            bad.bad_primes.iter().all(|b| b.confirmation != Collision::NotConfirmed),
            || "unconfirmed bad prime".into(),
        )?;
        sampled += res.pairs_examined;
    }

    // Every odd prime divisor of a resultant, inside the interval or not,
    // must make the two sums meet.
    let phi16 = cyclotomic_pow2(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut confirmed = 0;
    for _ in 0..60 {
        let plus = gapforge::combin::random_subset(&mut rng, 8, 6);
        let minus = gapforge::combin::random_subset(&mut rng, 8, 6);
        if plus == minus {
            continue;
        }
        let q = subset_sum_poly(&plus, &minus).unwrap();
        let res = resultant_int(&phi16, &q).unwrap();
        let fac = factorize(res.magnitude(), DEFAULT_RHO_BUDGET);
        for prime in fac.primes.iter().map(|(p, _)| p).filter(|p| *p > &BigUint::from(2u8)) {
            let c = confirm_collision(prime, 16, &plus, &minus);
            ensure(c != Collision::NotConfirmed, || format!("{prime} for {plus:?} vs {minus:?}"))?;
            confirmed += 1;
        }
    }
    ensure(confirmed > 0, || "no divisors examined".into())?;
    let took = within(start, Duration::from_secs(60))?;
    Ok(format!(
        "s=8: 30 pairs <= 256, hand value 8; s=16: {sampled} sampled pairs <= 12^8, B <= 2, {confirmed} divisors confirmed ({took:.2?})"
    ))
}

fn trial_division_prime(x: u64) -> bool {
    x >= 2 && (2..).take_while(|d| d * d <= x).all(|d| x % d != 0)
}

fn criterion_analytic() -> Outcome {
    let start = Instant::now();
    let table = SieveTable::new(100_000_000);
    let theta = table.theta(10, 4, 1).unwrap();
    let psi = table.psi(10, 4, 1).unwrap();
    ensure((theta - 5f64.ln()).abs() < 5e-13, || format!("theta {theta}"))?;
    ensure((psi - 5f64.ln() - 3f64.ln()).abs() < 5e-13, || format!("psi {psi}"))?;
    let count = count_primes_in_ap(2, 100, 4, 1, DEFAULT_SEGMENT_BUDGET).unwrap();
    let oracle = (2..=100u64).filter(|&x| x % 4 == 1 && trial_division_prime(x)).count() as u64;
    ensure(count == 11 && oracle == 11 && table.count_in_ap(2, 100, 4, 1).unwrap() == 11, || {
        format!("count {count}")
    })?;
    ensure(table.is_prime(99_999_989) && !table.is_prime(99_999_999), || "sieve top".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=64u64);
        let a = rng.gen_range(0..n);
        let x1 = rng.gen_range(2..1_000_000u64);
        let x2 = rng.gen_range(x1..=1_000_000u64);
        let (t1, p1) = (table.theta(x1, n, a).unwrap(), table.psi(x1, n, a).unwrap());
        let (t2, p2) = (table.theta(x2, n, a).unwrap(), table.psi(x2, n, a).unwrap());
        ensure(p1 >= t1 - 1e-9 && p2 >= t2 - 1e-9, || format!("psi < theta at n={n} a={a}"))?;
        ensure(t1 <= t2 + 1e-9 && p1 <= p2 + 1e-9, || format!("not monotone at n={n} a={a} {x1} {x2}"))?;
    }
    let took = within(start, Duration::from_secs(30))?;
    Ok(format!("theta = ln 5, psi = ln 15, count 11, 1000 queries, sieve to 1e8 ({took:.2?})"))
}

fn tamper_all_bits(cx: &Counterexample) -> Result<usize, String> {
    let fails = |t: &Counterexample| !verify_counterexample(t, VerifyLevel::Witness, &VerifyBudgets::default()).passed();
    let flip = |x: &BigUint, bit: u64| x ^ (BigUint::one() << bit);
    let mut tried = 0;
    let w = &cx.witnesses[0];
    for bit in 0..64u64 {
        let mut t = cx.clone();
        t.witnesses[0].z = flip(&w.z, bit);
        ensure(fails(&t), || format!("z bit {bit} accepted"))?;
        for d in 0..w.codeword.len() {
            let mut t = cx.clone();
            t.witnesses[0].codeword[d] = flip(&w.codeword[d], bit);
            ensure(fails(&t), || format!("codeword {d} bit {bit} accepted"))?;
        }
        let idx = w.agreement.expand(cx.params.n as usize).unwrap();
        for pos in 0..idx.len() {
            let mut changed = idx.clone();
            changed[pos] ^= 1 << bit;
            let mut t = cx.clone();
            t.witnesses[0].agreement = AgreementSet::Indices(changed);
            ensure(fails(&t), || format!("index {pos} bit {bit} accepted"))?;
        }
        tried += 1 + w.codeword.len() + idx.len();
    }
    Ok(tried)
}

fn criterion_properties() -> Outcome {
    let start = Instant::now();
    let ctx = forge::find_good_prime(&desk_params(), 4, &ForgePolicy::default()).map_err(|e| e.to_string())?.ctx;
    let f = ctx.field();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..1000 {
        let len = rng.gen_range(0..=64usize);
        let coeffs: Vec<Fe> = (0..len).map(|_| f.from_u64(rng.gen())).collect();
        let poly = DensePoly::new(ctx.field_arc().clone(), coeffs);
        let table = ntt_evaluate(&ctx, &poly).unwrap();
        ensure(ntt_interpolate(&ctx, &table).unwrap() == poly, || format!("roundtrip {trial}"))?;
        let t = rng.gen_range(0..64);
        ensure(table.values[t] == poly.eval(ctx.omega_pow(t)), || format!("evaluation {trial}"))?;
    }

    let tiny = tiny_ctx();
    let tf = tiny.field();
    let mut words = 0;
    for k in 0..=3usize {
        let code = CodeDesc::new(tiny.clone(), k).unwrap();
        for code_idx in 0..17u64.pow(4) {
            let digits: Vec<u64> = (0..4).map(|d| code_idx / 17u64.pow(d) % 17).collect();
            let poly = DensePoly::new(tiny.field_arc().clone(), digits.iter().map(|&c| tf.from_u64(c)).collect());
            let word = EvalTable { values: tiny.domain().iter().map(|&a| poly.eval(a)).collect() };
            let expect = poly.degree().map_or(true, |d| d <= k);
            ensure(is_codeword(&code, &word).unwrap() == expect, || format!("k={k} {digits:?}"))?;
            words += 1;
        }
    }

    let tampered = tamper_all_bits(&tiny_cx())? + tamper_all_bits(&desk_cx(8))?;

    let desk_bytes = |threads| with_threads(threads, || cxfile::serialize(&CxFile::new(desk_cx(21))));
    let one = desk_bytes(1);
    ensure(one == desk_bytes(2) && one == desk_bytes(8), || "desk bytes differ".into())?;
    let strict = strict_params();
    let strict_bytes = |threads| {
        with_threads(threads, || {
            let cx = forge::build_counterexample(&strict, 2, &ForgePolicy::default()).unwrap();
            cxfile::serialize(&CxFile::new(cx))
        })
    };
    let strict_one = strict_bytes(1);
    ensure(strict_one == strict_bytes(6), || "strict bytes differ".into())?;
    let back = cxfile::parse(&strict_one).map_err(|e| e.to_string())?;
    ensure(cxfile::serialize(&back) == strict_one, || "strict round trip".into())?;
    ensure(back.instance.params.profile == Profile::Strict, || "profile".into())?;

    let report = verify_counterexample(&back.instance, VerifyLevel::Witness, &VerifyBudgets::default());
    ensure(report.checks.iter().all(|c| c.status != Status::Fail), || report.to_string())?;
    ensure(BigUint::zero() < back.instance.prime, || "prime".into())?;
    Ok(format!(
        "1000 NTT round trips, {words} words vs degree, {tampered} single-bit tamperings rejected, byte-identical across threads ({:.2?})",
        start.elapsed()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 6] = [
        ("1 tiny exact-oracle instance", criterion_tiny),
        ("2 desk profile end-to-end", criterion_desk),
        ("3 strict profile", criterion_strict),
        ("4 resultant audits", criterion_resultants),
        ("5 analytic diagnostics", criterion_analytic),
        ("6 property suites", criterion_properties),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
