//! r-subsets of `[0, range)`: lexicographic enumeration and uniform sampling.

use rand::Rng;

/// Lexicographic iterator over the `r`-subsets of `[0, range)`, each sorted.
#[derive(Debug, Clone)]
pub struct Combinations {
    range: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(range: usize, r: usize) -> Self {
        let current = (r <= range).then(|| (0..r).collect());
        Combinations { range, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let r = cur.len();
        let mut i = r;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.range - r + i {
                cur[i] += 1;
                for j in i + 1..r {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// A uniformly random `r`-subset of `[0, range)`, sorted.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, range: usize, r: usize) -> Vec<usize> {
    let mut picked = rand::seq::index::sample(rng, range, r).into_vec();
    picked.sort_unstable();
    picked
}

/// Bitmask of a subset of `[0, 128)`.
pub fn subset_mask(subset: &[usize]) -> u128 {
    subset.iter().fold(0u128, |acc, &e| acc | 1u128 << e)
}
