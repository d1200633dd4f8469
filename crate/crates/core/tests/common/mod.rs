#![allow(dead_code)]

use std::sync::Arc;

use gapforge::forge::{self, Counterexample, ForgePolicy};
use gapforge::modmath::{PrimeField, PrimeFieldCtx};
use gapforge::params::{derive_params, ParamSet, Profile, RateSpec};
use num_bigint::BigUint;
use num_rational::Ratio;

pub fn tiny_params() -> ParamSet {
    derive_params(Ratio::from_integer(1), RateSpec::new(0, 1).unwrap(), 2, Profile::Desk, Some(2)).unwrap()
}

pub fn desk_params() -> ParamSet {
    derive_params(Ratio::from_integer(1), RateSpec::new(1, 2).unwrap(), 4, Profile::Desk, Some(4)).unwrap()
}

pub fn strict_params() -> ParamSet {
    derive_params(Ratio::from_integer(1), RateSpec::new(1, 2).unwrap(), 6, Profile::Strict, None).unwrap()
}

/// `F_17` with `omega = 2` of order 8 and `m = 2`, so `xi = 4`.
pub fn tiny_ctx() -> Arc<PrimeFieldCtx> {
    let f = Arc::new(PrimeField::new(&BigUint::from(17u8)).unwrap());
    let omega = f.from_u64(2);
    Arc::new(PrimeFieldCtx::new(f, 8, omega, 2).unwrap())
}

pub fn tiny_cx() -> Counterexample {
    forge::build_counterexample_with_ctx(&tiny_params(), tiny_ctx(), &ForgePolicy::default()).unwrap()
}

pub fn desk_cx(seed: u64) -> Counterexample {
    forge::build_counterexample(&desk_params(), seed, &ForgePolicy::default()).unwrap()
}

pub fn with_threads<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(job)
}
