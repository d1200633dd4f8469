use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::modmath::{is_probable_prime, small_primes};

/// Iteration cap for each Pollard-rho attempt.
pub const DEFAULT_RHO_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    /// Prime factors with multiplicity, ascending.
    pub primes: Vec<(BigUint, u32)>,
    /// Composite cofactors left unsplit when the budget ran out.
    pub unfactored: Vec<BigUint>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.unfactored.is_empty()
    }
}

/// Trial division by small primes, then Pollard-Brent rho on what remains.
pub fn factorize(n: &BigUint, rho_budget: u64) -> Factorization {
    let mut primes: Vec<(BigUint, u32)> = Vec::new();
    let mut unfactored = Vec::new();
    if n.is_zero() {
        return Factorization { primes, unfactored: vec![n.clone()] };
    }
    let mut rest = n.clone();
    for &q in small_primes() {
        let mut e = 0;
        while (&rest % q).is_zero() {
            rest /= q;
            e += 1;
        }
        if e > 0 {
            primes.push((BigUint::from(q), e));
        }
    }
    let mut stack = vec![rest];
    let mut found: Vec<BigUint> = Vec::new();
    while let Some(x) = stack.pop() {
        if x.is_one() {
            continue;
        }
        if is_probable_prime(&x, 32) {
            found.push(x);
            continue;
        }
        match pollard_brent(&x, rho_budget) {
            Some(d) => {
                stack.push(&x / &d);
                stack.push(d);
            }
            None => unfactored.push(x),
        }
    }
    found.sort();
    for p in found {
        match primes.last_mut() {
            Some((last, e)) if *last == p => *e += 1,
            _ => primes.push((p, 1)),
        }
    }
    primes.sort();
    Factorization { primes, unfactored }
}

fn pollard_brent(n: &BigUint, budget: u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u8));
    }
    let one = BigUint::one();
    for c in 1u64..20 {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u8);
        let mut r = 1u64;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut steps = 0u64;
        const BATCH: u64 = 64;
        while g == one && steps < budget {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += BATCH;
                steps += BATCH;
            }
            r *= 2;
        }
        if g == *n {
            // Backtrack one step at a time.
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g != one {
                    break;
                }
            }
        }
        if g != one && &g != n {
            return Some(g);
        }
    }
    None
}

/// `log_4(x)` for a positive integer, via its bit length and top bits.
pub fn log4(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 52 {
        return x.to_f64().unwrap().ln() / 4f64.ln();
    }
    let shift = bits - 52;
    let top = (x >> shift).to_f64().unwrap();
    (top.ln() + shift as f64 * 2f64.ln()) / 4f64.ln()
}
