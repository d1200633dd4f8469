//! Fixed-width arithmetic modulo a prime below 2^255.
//!
//! Residues are kept canonical (in `[0, p)`) as four little-endian 64-bit
//! limbs. Moduli that fit one word use a plain `u128` remainder; wider moduli
//! go through Montgomery multiplication with `R = 2^256`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::prime::is_probable_prime;
use super::FieldError;

pub const LIMBS: usize = 4;

/// Miller-Rabin rounds used when a field is constructed from an untrusted modulus.
pub const FIELD_MR_ROUNDS: u32 = 64;

/// A canonical residue modulo the owning field's prime.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fe([u64; LIMBS]);

impl Fe {
    pub const ZERO: Fe = Fe([0; LIMBS]);
    pub const ONE: Fe = Fe([1, 0, 0, 0]);

    pub fn is_zero(&self) -> bool {
        self.0 == [0; LIMBS]
    }

    pub fn limbs(&self) -> &[u64; LIMBS] {
        &self.0
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut bytes = Vec::with_capacity(LIMBS * 8);
        for limb in self.0 {
            bytes.extend_from_slice(&limb.to_le_bytes());
        }
        BigUint::from_bytes_le(&bytes)
    }

    /// The residue as a `u64` when it fits.
    pub fn as_u64(&self) -> Option<u64> {
        if self.0[1..].iter().all(|&l| l == 0) {
            Some(self.0[0])
        } else {
            None
        }
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fe({})", self.to_biguint())
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_biguint())
    }
}

fn biguint_to_limbs(x: &BigUint) -> Option<[u64; LIMBS]> {
    let digits = x.to_u64_digits();
    if digits.len() > LIMBS {
        return None;
    }
    let mut out = [0u64; LIMBS];
    out[..digits.len()].copy_from_slice(&digits);
    Some(out)
}

#[inline]
fn geq(a: &[u64; LIMBS], b: &[u64; LIMBS]) -> bool {
    for i in (0..LIMBS).rev() {
        if a[i] != b[i] {
            return a[i] > b[i];
        }
    }
    true
}

#[inline]
fn sub_limbs(a: &[u64; LIMBS], b: &[u64; LIMBS]) -> ([u64; LIMBS], bool) {
    let mut out = [0u64; LIMBS];
    let mut borrow = false;
    for i in 0..LIMBS {
        let (d, b1) = a[i].overflowing_sub(b[i]);
        let (d, b2) = d.overflowing_sub(borrow as u64);
        out[i] = d;
        borrow = b1 || b2;
    }
    (out, borrow)
}

#[inline]
fn add_limbs(a: &[u64; LIMBS], b: &[u64; LIMBS]) -> ([u64; LIMBS], bool) {
    let mut out = [0u64; LIMBS];
    let mut carry = false;
    for i in 0..LIMBS {
        let (s, c1) = a[i].overflowing_add(b[i]);
        let (s, c2) = s.overflowing_add(carry as u64);
        out[i] = s;
        carry = c1 || c2;
    }
    (out, carry)
}

#[derive(Clone, Debug)]
enum Reduction {
    Word { p: u64 },
    Montgomery { p_neg_inv: u64, r2: [u64; LIMBS] },
}

/// A prime field `F_p` with `p < 2^255`.
#[derive(Clone)]
pub struct PrimeField {
    modulus: BigUint,
    p: [u64; LIMBS],
    reduction: Reduction,
    two_adicity: u32,
    two_adic_root: Fe,
}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrimeField").field("modulus", &self.modulus).finish()
    }
}

impl PartialEq for PrimeField {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
    }
}

impl Eq for PrimeField {}

impl PrimeField {
    /// Builds the field after a Miller-Rabin check of `modulus`.
    pub fn new(modulus: &BigUint) -> Result<Self, FieldError> {
        if !is_probable_prime(modulus, FIELD_MR_ROUNDS) {
            return Err(FieldError::NotPrime(modulus.to_string()));
        }
        Self::new_unchecked(modulus)
    }

    /// Builds the field trusting that `modulus` is prime. Only the width and
    /// parity are validated.
    pub fn new_unchecked(modulus: &BigUint) -> Result<Self, FieldError> {
        if modulus.bits() > 255 {
            return Err(FieldError::ModulusTooWide(modulus.bits()));
        }
        if *modulus < BigUint::from(3u8) || !modulus.bit(0) {
            return Err(FieldError::NotPrime(modulus.to_string()));
        }
        let p = biguint_to_limbs(modulus).expect("width checked");
        let reduction = if let Some(word) = modulus.to_u64() {
            Reduction::Word { p: word }
        } else {
            // -p^{-1} mod 2^64 by Newton iteration on the low limb.
            let mut inv: u64 = 1;
            for _ in 0..6 {
                inv = inv.wrapping_mul(2u64.wrapping_sub(p[0].wrapping_mul(inv)));
            }
            let r2 = (BigUint::one() << 512u32) % modulus;
            Reduction::Montgomery {
                p_neg_inv: inv.wrapping_neg(),
                r2: biguint_to_limbs(&r2).expect("reduced"),
            }
        };
        let p_minus_1 = modulus - 1u8;
        let two_adicity = p_minus_1.trailing_zeros().unwrap_or(0) as u32;
        let mut field = PrimeField {
            modulus: modulus.clone(),
            p,
            reduction,
            two_adicity,
            two_adic_root: Fe::ONE,
        };
        field.two_adic_root = field.find_two_adic_root();
        Ok(field)
    }

    fn find_two_adic_root(&self) -> Fe {
        let half = (&self.modulus - 1u8) >> 1u32;
        let odd_part = (&self.modulus - 1u8) >> self.two_adicity;
        let minus_one = self.neg(Fe::ONE);
        // Smallest quadratic non-residue; its odd-part power has order 2^two_adicity.
        let mut c = 2u64;
        loop {
            let g = self.from_u64(c);
            if self.pow_big(g, &half) == minus_one {
                return self.pow_big(g, &odd_part);
            }
            c += 1;
        }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn two_adicity(&self) -> u32 {
        self.two_adicity
    }

    /// A primitive `2^log_size`-th root of unity, if the field has one.
    pub fn root_of_unity_pow2(&self, log_size: u32) -> Option<Fe> {
        if log_size > self.two_adicity {
            return None;
        }
        let mut root = self.two_adic_root;
        for _ in log_size..self.two_adicity {
            root = self.square(root);
        }
        Some(root)
    }

    pub fn from_u64(&self, x: u64) -> Fe {
        match self.reduction {
            Reduction::Word { p } => Fe([x % p, 0, 0, 0]),
            Reduction::Montgomery { .. } => Fe([x, 0, 0, 0]),
        }
    }

    pub fn from_biguint(&self, x: &BigUint) -> Fe {
        let reduced = x % &self.modulus;
        Fe(biguint_to_limbs(&reduced).expect("reduced below modulus"))
    }

    /// Parses a residue that must already be canonical.
    pub fn from_canonical(&self, x: &BigUint) -> Option<Fe> {
        if x < &self.modulus {
            biguint_to_limbs(x).map(Fe)
        } else {
            None
        }
    }

    pub fn from_i64(&self, x: i64) -> Fe {
        let mag = self.from_u64(x.unsigned_abs());
        if x < 0 {
            self.neg(mag)
        } else {
            mag
        }
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let (s, carry) = add_limbs(&a.0, &b.0);
        if carry || geq(&s, &self.p) {
            Fe(sub_limbs(&s, &self.p).0)
        } else {
            Fe(s)
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        let (d, borrow) = sub_limbs(&a.0, &b.0);
        if borrow {
            Fe(add_limbs(&d, &self.p).0)
        } else {
            Fe(d)
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.is_zero() {
            a
        } else {
            Fe(sub_limbs(&self.p, &a.0).0)
        }
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        match &self.reduction {
            Reduction::Word { p } => {
                Fe([((a.0[0] as u128 * b.0[0] as u128) % *p as u128) as u64, 0, 0, 0])
            }
            Reduction::Montgomery { p_neg_inv, r2 } => {
                let t = self.mont_mul(&a.0, &b.0, *p_neg_inv);
                Fe(self.mont_mul(&t, r2, *p_neg_inv))
            }
        }
    }

    #[inline]
    pub fn square(&self, a: Fe) -> Fe {
        self.mul(a, a)
    }

    // CIOS Montgomery product: a * b * 2^-256 mod p.
    #[inline]
    fn mont_mul(&self, a: &[u64; LIMBS], b: &[u64; LIMBS], p_neg_inv: u64) -> [u64; LIMBS] {
        let p = &self.p;
        let mut t = [0u64; LIMBS + 2];
        for &bi in b.iter() {
            let mut carry = 0u64;
            for j in 0..LIMBS {
                let x = t[j] as u128 + a[j] as u128 * bi as u128 + carry as u128;
                t[j] = x as u64;
                carry = (x >> 64) as u64;
            }
            let x = t[LIMBS] as u128 + carry as u128;
            t[LIMBS] = x as u64;
            t[LIMBS + 1] = (x >> 64) as u64;

            let q = t[0].wrapping_mul(p_neg_inv);
            let x = t[0] as u128 + q as u128 * p[0] as u128;
            let mut carry = (x >> 64) as u64;
            for j in 1..LIMBS {
                let x = t[j] as u128 + q as u128 * p[j] as u128 + carry as u128;
                t[j - 1] = x as u64;
                carry = (x >> 64) as u64;
            }
            let x = t[LIMBS] as u128 + carry as u128;
            t[LIMBS - 1] = x as u64;
            t[LIMBS] = t[LIMBS + 1] + (x >> 64) as u64;
        }
        let mut out = [0u64; LIMBS];
        out.copy_from_slice(&t[..LIMBS]);
        if t[LIMBS] != 0 || geq(&out, p) {
            out = sub_limbs(&out, p).0;
        }
        out
    }

    /// `base^exp` by square-and-multiply over the exponent's bits.
    pub fn pow_limbs(&self, base: Fe, exp: &[u64]) -> Fe {
        let top = match exp.iter().rposition(|&l| l != 0) {
            Some(i) => i,
            None => return Fe::ONE,
        };
        match &self.reduction {
            Reduction::Word { .. } => {
                let mut acc = Fe::ONE;
                for i in (0..=top).rev() {
                    for bit in (0..64).rev() {
                        acc = self.square(acc);
                        if (exp[i] >> bit) & 1 == 1 {
                            acc = self.mul(acc, base);
                        }
                    }
                }
                acc
            }
            Reduction::Montgomery { p_neg_inv, r2 } => {
                let inv = *p_neg_inv;
                let base_m = self.mont_mul(&base.0, r2, inv);
                let one = Fe::ONE.0;
                let mut acc = self.mont_mul(&one, r2, inv);
                for i in (0..=top).rev() {
                    for bit in (0..64).rev() {
                        acc = self.mont_mul(&acc, &acc, inv);
                        if (exp[i] >> bit) & 1 == 1 {
                            acc = self.mont_mul(&acc, &base_m, inv);
                        }
                    }
                }
                Fe(self.mont_mul(&acc, &one, inv))
            }
        }
    }

    pub fn pow(&self, base: Fe, exp: u64) -> Fe {
        self.pow_limbs(base, &[exp])
    }

    pub fn pow_big(&self, base: Fe, exp: &BigUint) -> Fe {
        self.pow_limbs(base, &exp.to_u64_digits())
    }

    /// Inverse via Fermat's little theorem.
    pub fn inv(&self, a: Fe) -> Result<Fe, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        let exp = &self.modulus - 2u8;
        Ok(self.pow_big(a, &exp))
    }

    /// Sum of an iterator of elements.
    pub fn sum<I: IntoIterator<Item = Fe>>(&self, items: I) -> Fe {
        items.into_iter().fold(Fe::ZERO, |acc, x| self.add(acc, x))
    }

    /// Whether `x` is canonical for this modulus.
    pub fn is_canonical(&self, x: Fe) -> bool {
        !geq(&x.0, &self.p)
    }

    pub fn is_zero_modulus_multiple(&self, x: &BigUint) -> bool {
        (x % &self.modulus).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f17() -> PrimeField {
        PrimeField::new(&BigUint::from(17u8)).unwrap()
    }

    // 2^127 - 1
    fn mersenne127() -> PrimeField {
        PrimeField::new(&((BigUint::one() << 127u32) - 1u8)).unwrap()
    }

    #[test]
    fn small_field_examples() {
        let f = f17();
        assert_eq!(f.inv(f.from_u64(5)).unwrap(), f.from_u64(7));
        assert_eq!(f.pow(f.from_u64(2), 8), Fe::ONE);
        let x = f.from_u64(11);
        assert_eq!(f.mul(x, Fe::ONE), x);
        assert_eq!(f.inv(Fe::ZERO), Err(FieldError::ZeroInverse));
        assert_eq!(f.from_i64(-5), f.from_u64(12));
    }

    #[test]
    fn two_adic_root_has_full_order() {
        let f = f17();
        assert_eq!(f.two_adicity(), 4);
        let w = f.root_of_unity_pow2(4).unwrap();
        assert_eq!(f.pow(w, 16), Fe::ONE);
        assert_ne!(f.pow(w, 8), Fe::ONE);
        assert!(f.root_of_unity_pow2(5).is_none());
    }

    #[test]
    fn rejects_composites_and_wide_moduli() {
        assert!(PrimeField::new(&BigUint::from(15u8)).is_err());
        assert!(PrimeField::new_unchecked(&(BigUint::one() << 256u32)).is_err());
    }

    proptest! {
        #[test]
        fn wide_ops_match_biguint(a in any::<u128>(), b in any::<u128>(), e in any::<u64>()) {
            let f = mersenne127();
            let m = f.modulus().clone();
            let (ba, bb) = (BigUint::from(a) % &m, BigUint::from(b) % &m);
            let (x, y) = (f.from_biguint(&ba), f.from_biguint(&bb));
            prop_assert_eq!(f.mul(x, y).to_biguint(), (&ba * &bb) % &m);
            prop_assert_eq!(f.add(x, y).to_biguint(), (&ba + &bb) % &m);
            prop_assert_eq!(f.sub(x, y).to_biguint(), (&ba + &m - &bb) % &m);
            prop_assert_eq!(f.pow(x, e).to_biguint(), ba.modpow(&BigUint::from(e), &m));
        }

        #[test]
        fn fermat_self_test(a in 1u64..u64::MAX) {
            let f = mersenne127();
            let x = f.from_u64(a);
            let p_minus_1 = f.modulus() - 1u8;
            prop_assert_eq!(f.pow_big(x, &p_minus_1), Fe::ONE);
            prop_assert_eq!(f.mul(x, f.inv(x).unwrap()), Fe::ONE);
        }
    }
}
