use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bases that make Miller-Rabin deterministic for every N < 3.317 * 10^24.
const DETERMINISTIC_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Upper end of the range covered by [`DETERMINISTIC_BASES`], 3317044064679887385961981.
fn deterministic_limit() -> BigUint {
    BigUint::parse_bytes(b"3317044064679887385961981", 10).unwrap()
}

/// Odd primes used for cheap trial division ahead of Miller-Rabin.
pub(crate) fn small_primes() -> &'static [u64] {
    static PRIMES: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = 2000usize;
        let mut composite = vec![false; limit + 1];
        let mut out = Vec::new();
        for i in 2..=limit {
            if !composite[i] {
                out.push(i as u64);
                let mut j = i * i;
                while j <= limit {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        out
    })
}

fn witness_passes(n: &BigUint, n_minus_1: &BigUint, d: &BigUint, s: u64, base: &BigUint) -> bool {
    let mut x = base.modpow(d, n);
    if x.is_one() || &x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if &x == n_minus_1 {
            return true;
        }
    }
    false
}

/// Miller-Rabin primality test.
///
/// Below 3.3 * 10^24 the fixed base set makes the verdict exact. Above it,
/// `rounds` extra bases are drawn from a generator seeded by `n` itself, so the
/// verdict for a given `n` is reproducible. A `false` is always correct.
pub fn is_probable_prime(n: &BigUint, rounds: u32) -> bool {
    if n < &BigUint::from(2u8) {
        return false;
    }
    if let Some(small) = n.to_u64() {
        if small < 4 {
            return true;
        }
    }
    for &q in small_primes() {
        let q_big = BigUint::from(q);
        if n == &q_big {
            return true;
        }
        if (n % q).is_zero() {
            return false;
        }
    }

    let n_minus_1 = n - 1u8;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;

    for &b in DETERMINISTIC_BASES.iter() {
        if !witness_passes(n, &n_minus_1, &d, s, &BigUint::from(b)) {
            return false;
        }
    }
    if n < &deterministic_limit() {
        return true;
    }

    let mut seed = [0u8; 32];
    for (dst, src) in seed.iter_mut().zip(n.to_bytes_le()) {
        *dst = src;
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    let two = BigUint::from(2u8);
    for _ in 0..rounds {
        let base = rng.gen_biguint_range(&two, &n_minus_1);
        if !witness_passes(n, &n_minus_1, &d, s, &base) {
            return false;
        }
    }
    true
}

/// Trial-division primality, for use as an independent oracle on small inputs.
pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!(is_probable_prime(&BigUint::from(4294967311u64), 64));
        assert!(is_prime_trial(4294967311));
        assert!(!is_probable_prime(&BigUint::from(4294967297u64), 64));
        assert_eq!(4294967297u64 % 641, 0);
        assert!(is_probable_prime(&BigUint::from(2u8), 1));
        assert!(!is_probable_prime(&BigUint::from(1u8), 1));
        assert!(!is_probable_prime(&BigUint::zero(), 1));
    }

    #[test]
    fn agrees_with_trial_division() {
        for n in 0u64..20_000 {
            assert_eq!(is_probable_prime(&BigUint::from(n), 4), is_prime_trial(n), "n = {n}");
        }
    }

    #[test]
    fn strong_pseudoprimes_rejected() {
        // 3215031751 is a strong pseudoprime to bases 2, 3, 5 and 7.
        assert!(!is_probable_prime(&BigUint::from(3215031751u64), 1));
        // 3825123056546413051 fools bases up to 23.
        assert!(!is_probable_prime(&BigUint::from(3825123056546413051u64), 1));
    }

    #[test]
    fn wide_values() {
        let m127 = (BigUint::one() << 127u32) - 1u8;
        assert!(is_probable_prime(&m127, 64));
        let m128 = (BigUint::one() << 128u32) + 1u8;
        assert!(!is_probable_prime(&m128, 64));
        assert!(!is_probable_prime(&(&m127 * &m127), 64));
    }
}
