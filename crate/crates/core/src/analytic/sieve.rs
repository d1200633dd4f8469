use super::AnalyticError;

/// Default limit for [`SieveTable`] based queries.
pub const DEFAULT_SIEVE_LIMIT: u64 = 100_000_000;

/// Default cap on the upper end of a segmented interval count.
pub const DEFAULT_SEGMENT_BUDGET: u64 = 10_000_000_000;

/// Odd-only Eratosthenes bitmap covering `[0, limit]`.
#[derive(Debug, Clone)]
pub struct SieveTable {
    limit: u64,
    // bit i set <=> 2i + 1 is composite (1 is marked composite)
    composite: Vec<u64>,
}

impl SieveTable {
    pub fn new(limit: u64) -> Self {
        let odd_count = limit / 2 + 1;
        let mut composite = vec![0u64; (odd_count as usize).div_ceil(64)];
        composite[0] |= 1; // 1
        let mut i = 1u64;
        loop {
            let p = 2 * i + 1;
            if p.saturating_mul(p) > limit {
                break;
            }
            if composite[(i / 64) as usize] >> (i % 64) & 1 == 0 {
                let mut j = p * p / 2;
                while j < odd_count {
                    composite[(j / 64) as usize] |= 1 << (j % 64);
                    j += p;
                }
            }
            i += 1;
        }
        SieveTable { limit, composite }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn is_prime(&self, x: u64) -> bool {
        assert!(x <= self.limit, "{x} beyond sieve limit {}", self.limit);
        if x < 2 {
            return false;
        }
        if x % 2 == 0 {
            return x == 2;
        }
        let i = x / 2;
        self.composite[(i / 64) as usize] >> (i % 64) & 1 == 0
    }

    /// Primes in increasing order up to `x`.
    pub fn primes_up_to(&self, x: u64) -> impl Iterator<Item = u64> + '_ {
        let x = x.min(self.limit);
        let two = (x >= 2).then_some(2u64);
        let odd_count = x / 2 + u64::from(x % 2 == 1);
        two.into_iter().chain(
            (1..odd_count)
                .filter(move |&i| self.composite[(i / 64) as usize] >> (i % 64) & 1 == 0)
                .map(|i| 2 * i + 1),
        )
    }

    fn check(&self, x: u64) -> Result<(), AnalyticError> {
        if x > self.limit {
            Err(AnalyticError::Budget { value: x.to_string(), limit: self.limit })
        } else {
            Ok(())
        }
    }

    /// `theta(x; n, a)`: sum of `ln p` over primes `p <= x` with `p = a (mod n)`.
    pub fn theta(&self, x: u64, n: u64, a: u64) -> Result<f64, AnalyticError> {
        self.check(x)?;
        check_modulus(n)?;
        let a = a % n;
        let mut sum = KahanSum::default();
        for p in self.primes_up_to(x).filter(|p| p % n == a) {
            sum.add((p as f64).ln());
        }
        Ok(sum.value())
    }

    /// `psi(x; n, a)`: sum of the von Mangoldt weight over `k <= x` with
    /// `k = a (mod n)`.
    pub fn psi(&self, x: u64, n: u64, a: u64) -> Result<f64, AnalyticError> {
        self.check(x)?;
        check_modulus(n)?;
        let a = a % n;
        let mut sum = KahanSum::default();
        for p in self.primes_up_to(x) {
            let log_p = (p as f64).ln();
            let mut power = p;
            loop {
                if power % n == a {
                    sum.add(log_p);
                }
                match power.checked_mul(p) {
                    Some(next) if next <= x => power = next,
                    _ => break,
                }
            }
        }
        Ok(sum.value())
    }

    /// `Lambda(k)`: `ln p` when `k` is a power of the prime `p`, else 0.
    pub fn von_mangoldt(&self, k: u64) -> f64 {
        if k < 2 {
            return 0.0;
        }
        let p = smallest_factor(k);
        let mut rest = k;
        while rest % p == 0 {
            rest /= p;
        }
        if rest == 1 && self.is_prime(p) {
            (p as f64).ln()
        } else {
            0.0
        }
    }

    /// Count of primes in `[lo, hi]` congruent to `a` mod `n`, read off the table.
    pub fn count_in_ap(&self, lo: u64, hi: u64, n: u64, a: u64) -> Result<u64, AnalyticError> {
        self.check(hi)?;
        check_modulus(n)?;
        let a = a % n;
        Ok(self.primes_up_to(hi).filter(|&p| p >= lo && p % n == a).count() as u64)
    }
}

fn smallest_factor(k: u64) -> u64 {
    let mut d = 2;
    while d * d <= k {
        if k % d == 0 {
            return d;
        }
        d += 1;
    }
    k
}

fn check_modulus(n: u64) -> Result<(), AnalyticError> {
    if n == 0 {
        Err(AnalyticError::ZeroModulus)
    } else {
        Ok(())
    }
}

#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Counts primes `p` in `[lo, hi]` with `p = a (mod n)` by a segmented sieve,
/// without materializing anything of size `hi`.
pub fn count_primes_in_ap(lo: u64, hi: u64, n: u64, a: u64, budget: u64) -> Result<u64, AnalyticError> {
    check_modulus(n)?;
    if hi > budget {
        return Err(AnalyticError::Budget { value: hi.to_string(), limit: budget });
    }
    if hi < lo || hi < 2 {
        return Ok(0);
    }
    let a = a % n;
    let lo = lo.max(2);
    let root = (hi as f64).sqrt() as u64 + 1;
    let base = SieveTable::new(root);
    let base_primes: Vec<u64> = base.primes_up_to(root).collect();

    const SEGMENT: u64 = 1 << 18;
    let mut count = 0u64;
    let mut flags = vec![true; SEGMENT as usize];
    let mut start = lo;
    while start <= hi {
        let end = (start + SEGMENT - 1).min(hi);
        let len = (end - start + 1) as usize;
        flags[..len].fill(true);
        for &p in &base_primes {
            if p * p > end {
                break;
            }
            let first = (start.div_ceil(p) * p).max(p * p);
            let mut j = first;
            while j <= end {
                flags[(j - start) as usize] = false;
                j += p;
            }
        }
        for (offset, &is_prime) in flags[..len].iter().enumerate() {
            if is_prime {
                let x = start + offset as u64;
                if x % n == a {
                    count += 1;
                }
            }
        }
        start = end + 1;
    }
    Ok(count)
}

/// Euler's totient by trial factorization.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            while n % d == 0 {
                n /= d;
            }
            result -= result / d;
        }
        d += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}
