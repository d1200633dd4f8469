mod common;

use common::*;
use gapforge::cxfile::{self, CxFile};
use gapforge::forge::{
    verify_counterexample, AgreementSet, AuditMode, Counterexample, Status, VerifyBudgets,
    VerifyLevel,
};
use num_bigint::BigUint;

fn verdict(cx: &Counterexample) -> bool {
    verify_counterexample(cx, VerifyLevel::Witness, &VerifyBudgets::default()).passed()
}

fn flip(x: &BigUint, bit: u64) -> BigUint {
    x ^ (BigUint::from(1u8) << bit)
}

#[test]
fn desk_forge_verifies_at_every_level() {
    let cx = desk_cx(11);
    assert_eq!(cx.z_count, 28);
    assert_eq!(cx.sum_audit.mode, AuditMode::Exhaustive);
    assert_eq!(cx.sum_audit.distinct_sums, 28);
    let p = &cx.prime;
    assert!(*p >= BigUint::from(1u64 << 32) && *p <= BigUint::from(1u64 << 48));
    assert_eq!(p % 64u8, BigUint::from(1u8));
    for level in [VerifyLevel::Witness, VerifyLevel::Exhaustive, VerifyLevel::Oracle] {
        let rep = verify_counterexample(&cx, level, &VerifyBudgets::default());
        assert!(rep.passed(), "{rep}");
    }
    let oracle = verify_counterexample(&cx, VerifyLevel::Oracle, &VerifyBudgets::default());
    assert_eq!(oracle.get("oracle distance").unwrap().status, Status::Skipped);
}

#[test]
fn tiny_oracle_agrees_with_certificate() {
    let cx = tiny_cx();
    let rep = verify_counterexample(&cx, VerifyLevel::Oracle, &VerifyBudgets::default());
    assert!(rep.passed(), "{rep}");
    let g = rep.get("oracle g agreement").unwrap();
    assert_eq!(g.status, Status::Pass);
    assert!(g.detail.starts_with("max agreement of g is 2 <= 2"), "{}", g.detail);
}

#[test]
fn every_single_bit_flip_is_rejected_tiny() {
    let cx = tiny_cx();
    assert!(verdict(&cx));
    let w = &cx.witnesses[0];
    for bit in 0..64 {
        let mut t = cx.clone();
        t.witnesses[0].z = flip(&w.z, bit);
        assert!(!verdict(&t), "z bit {bit}");
        let mut t = cx.clone();
        t.witnesses[0].codeword[0] = flip(&w.codeword[0], bit);
        assert!(!verdict(&t), "codeword bit {bit}");
        for run in 0..2 {
            for field in 0..3 {
                let mut t = cx.clone();
                let AgreementSet::Progressions(runs) = &mut t.witnesses[0].agreement else {
                    panic!("forge emits progressions");
                };
                runs[run][field] ^= 1 << bit;
                assert!(!verdict(&t), "progression {run}.{field} bit {bit}");
            }
        }
        let mut t = cx.clone();
        let mut idx = w.agreement.expand(8).unwrap();
        idx[bit as usize % 4] ^= 1 << bit;
        t.witnesses[0].agreement = AgreementSet::Indices(idx);
        assert!(!verdict(&t), "index bit {bit}");
    }
}

#[test]
fn single_bit_flips_rejected_desk() {
    let cx = desk_cx(3);
    let bits = cx.prime.bits() + 2;
    for wi in [0, 13, 27] {
        let w = cx.witnesses[wi].clone();
        for bit in 0..bits {
            let mut t = cx.clone();
            t.witnesses[wi].z = flip(&w.z, bit);
            assert!(!verdict(&t), "witness {wi} z bit {bit}");
        }
        for (d, c) in w.codeword.iter().enumerate() {
            for bit in (0..bits).step_by(3) {
                let mut t = cx.clone();
                t.witnesses[wi].codeword[d] = flip(c, bit);
                assert!(!verdict(&t), "witness {wi} coefficient {d} bit {bit}");
            }
        }
        let indices = w.agreement.expand(64).unwrap();
        for pos in 0..indices.len() {
            for bit in 0..usize::BITS {
                let mut idx = indices.clone();
                idx[pos] ^= 1 << bit;
                let mut t = cx.clone();
                t.witnesses[wi].agreement = AgreementSet::Indices(idx);
                assert!(!verdict(&t), "witness {wi} index {pos} bit {bit}");
            }
        }
    }
}

#[test]
fn tampering_names_the_failing_check() {
    let cx = desk_cx(5);
    let mut t = cx.clone();
    t.z_count += 1;
    let rep = verify_counterexample(&t, VerifyLevel::Witness, &VerifyBudgets::default());
    let failed: Vec<&str> = rep.failures().map(|c| c.name.as_str()).collect();
    assert_eq!(failed, vec!["z distinctness/count"]);

    let mut t = cx.clone();
    let mut idx = t.witnesses[4].agreement.expand(64).unwrap();
    let old = idx[2];
    idx[2] += 1;
    t.witnesses[4].agreement = AgreementSet::Indices(idx);
    let rep = verify_counterexample(&t, VerifyLevel::Witness, &VerifyBudgets::default());
    let coset = rep.get("witness coset membership").unwrap();
    assert_eq!(coset.status, Status::Fail);
    assert!(coset.detail.contains("witness 4") && coset.detail.contains(&format!("index {}", old + 1)), "{}", coset.detail);

    let mut t = cx.clone();
    t.witnesses[9].z = t.witnesses[8].z.clone();
    let rep = verify_counterexample(&t, VerifyLevel::Witness, &VerifyBudgets::default());
    assert!(rep.get("witness z values").unwrap().detail.contains("witness 9"));
    assert_eq!(rep.get("z distinctness/count").unwrap().status, Status::Fail);

    let mut t = cx.clone();
    t.prime += 64u8;
    let rep = verify_counterexample(&t, VerifyLevel::Witness, &VerifyBudgets::default());
    assert!(!rep.passed());
    assert_eq!(rep.get("witness agreement").unwrap().status, Status::Skipped);
}

#[test]
fn file_round_trip_is_identity() {
    for cx in [tiny_cx(), desk_cx(1)] {
        let text = cxfile::serialize(&CxFile::new(cx.clone()));
        let back = cxfile::parse(&text).unwrap();
        assert_eq!(back.instance, cx);
        assert_eq!(cxfile::serialize(&back), text);
        assert!(verify_counterexample(&back.instance, VerifyLevel::Exhaustive, &VerifyBudgets::default()).passed());
    }
}

#[test]
fn forge_is_deterministic_across_thread_counts() {
    let bytes = |threads| with_threads(threads, || cxfile::serialize(&CxFile::new(desk_cx(42))));
    let one = bytes(1);
    assert_eq!(one, bytes(2));
    assert_eq!(one, bytes(7));
    assert_ne!(one, cxfile::serialize(&CxFile::new(desk_cx(43))));
}
