//! Arithmetic in `Z/p^M` with residues stored as `u128`.
//!
//! Moduli below `2^64` multiply natively in `u128`; larger moduli (up to
//! `2^96`) use a three-limb Horner reduction so no product ever overflows.

use crate::error::{Error, Result};
use alloc::format;

/// Largest supported modulus exponent in bits.
pub const MAX_MODULUS_BITS: u32 = 95;

/// The ring `Z/p^M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZMod {
    p: u64,
    digits: u32,
    q: u128,
}

impl ZMod {
    /// `Z/p^digits`. Fails if the modulus would not fit the backend.
    pub fn new(p: u64, digits: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidSpec(format!("{} is not a prime", p)));
        }
        let mut q: u128 = 1;
        for _ in 0..digits {
            q = q
                .checked_mul(p as u128)
                .filter(|v| *v < (1u128 << MAX_MODULUS_BITS))
                .ok_or_else(|| {
                    Error::PrecisionTooLarge(format!("{}^{} exceeds 2^{}", p, digits, MAX_MODULUS_BITS))
                })?;
        }
        Ok(ZMod { p, digits, q })
    }

    /// Largest exponent `M` with `p^M` inside the backend.
    pub fn max_digits(p: u64) -> u32 {
        let mut q: u128 = 1;
        let mut m = 0;
        while let Some(v) = q.checked_mul(p as u128) {
            if v >= (1u128 << MAX_MODULUS_BITS) {
                break;
            }
            q = v;
            m += 1;
        }
        m
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn modulus(&self) -> u128 {
        self.q
    }

    pub fn reduce_i128(&self, a: i128) -> u128 {
        let q = self.q as i128;
        let r = a % q;
        if r < 0 {
            (r + q) as u128
        } else {
            r as u128
        }
    }

    #[inline]
    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u128) -> u128 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        if self.q <= (1u128 << 64) {
            (a * b) % self.q
        } else {
            // Horner over the three 32-bit limbs of b; every intermediate
            // stays below 2^128 because q < 2^96.
            let mut r: u128 = 0;
            for shift in [64u32, 32, 0] {
                let limb = (b >> shift) & 0xffff_ffff;
                r = ((r << 32) % self.q + (a * limb) % self.q) % self.q;
            }
            r
        }
    }

    pub fn pow(&self, mut a: u128, mut e: u128) -> u128 {
        let mut r = 1 % self.q;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// p-adic valuation of a residue, `None` for zero.
    pub fn vp(&self, mut a: u128) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let p = self.p as u128;
        let mut v = 0;
        while a % p == 0 {
            a /= p;
            v += 1;
        }
        Some(v)
    }

    pub fn is_unit(&self, a: u128) -> bool {
        a % (self.p as u128) != 0
    }

    /// Inverse of a unit modulo `p^M` (extended Euclid on signed values).
    pub fn inv(&self, a: u128) -> Option<u128> {
        if !self.is_unit(a) {
            return None;
        }
        // Newton iteration x ← x(2 − a x) from an inverse modulo p.
        let p = self.p as u128;
        let a0 = a % p;
        let mut x = self.small_inv(a0, p);
        let mut prec = 1u32;
        while prec < self.digits {
            let ax = self.mul(a, x);
            x = self.mul(x, self.sub(2 % self.q, ax));
            prec *= 2;
        }
        Some(x % self.q)
    }

    fn small_inv(&self, a: u128, p: u128) -> u128 {
        // Extended Euclid modulo the prime p.
        let (mut r0, mut r1) = (p as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let qq = r0 / r1;
            (r0, r1) = (r1, r0 - qq * r1);
            (t0, t1) = (t1, t0 - qq * t1);
        }
        let p = p as i128;
        (((t0 % p) + p) % p) as u128
    }

    /// Exact division by p of a residue known to be divisible by p; the
    /// result is correct modulo `p^(M−1)`.
    pub fn div_p(&self, a: u128) -> u128 {
        debug_assert!(a % (self.p as u128) == 0);
        a / (self.p as u128)
    }

    /// Residue modulo p.
    pub fn mod_p(&self, a: u128) -> u64 {
        (a % (self.p as u128)) as u64
    }

    /// Signed representative in `(−q/2, q/2]`, useful for printing.
    pub fn signed(&self, a: u128) -> i128 {
        if a > self.q / 2 {
            -((self.q - a) as i128)
        } else {
            a as i128
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_modulus_multiplication_matches_small_case() {
        let z = ZMod::new(5, 40).unwrap();
        assert!(z.modulus() > (1u128 << 64));
        let a = z.modulus() - 3;
        let b = z.modulus() - 7;
        // (−3)(−7) = 21
        assert_eq!(z.mul(a, b), 21);
        let x = 123456789012345678901234567u128 % z.modulus();
        let ix = z.inv(x).unwrap();
        assert_eq!(z.mul(x, ix), 1);
    }

    #[test]
    fn inverse_and_valuation() {
        let z = ZMod::new(3, 20).unwrap();
        assert_eq!(z.vp(18), Some(2));
        assert_eq!(z.vp(0), None);
        let i = z.inv(2).unwrap();
        assert_eq!(z.mul(i, 2), 1);
        assert!(z.inv(6).is_none());
    }
}
