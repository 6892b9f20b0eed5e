//! Prime-field arithmetic in Montgomery form with a modulus chosen at runtime.
//!
//! Elements are fixed arrays of [`MAX_LIMBS`] little-endian 64-bit limbs; only the
//! first `limbs` words of the modulus are significant and the rest stay zero.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};

pub(crate) const MAX_LIMBS: usize = 8;

/// Field element in Montgomery representation (`a·R mod q`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub(crate) struct Fq(pub(crate) [u64; MAX_LIMBS]);

#[inline(always)]
fn mac(acc: u64, a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = acc as u128 + (a as u128) * (b as u128) + carry as u128;
    (t as u64, (t >> 64) as u64)
}

#[derive(Clone, Debug)]
pub(crate) struct PrimeField {
    modulus: [u64; MAX_LIMBS],
    limbs: usize,
    inv: u64,
    r2: Fq,
    one: Fq,
    modulus_big: BigUint,
    minus_two: Vec<u64>,
    sqrt_exp: Vec<u64>,
    width: usize,
}

fn to_limbs(v: &BigUint) -> [u64; MAX_LIMBS] {
    let mut out = [0u64; MAX_LIMBS];
    for (dst, src) in out.iter_mut().zip(v.to_u64_digits()) {
        *dst = src;
    }
    out
}

fn from_limbs(l: &[u64]) -> BigUint {
    let mut bytes = Vec::with_capacity(l.len() * 8);
    for w in l {
        bytes.extend_from_slice(&w.to_le_bytes());
    }
    BigUint::from_bytes_le(&bytes)
}

impl PrimeField {
    /// `q` must be an odd prime below `2^(64·MAX_LIMBS)`.
    pub(crate) fn new(q: &BigUint) -> Result<Self> {
        if q.bits() as usize > 64 * MAX_LIMBS - 1 {
            return Err(Error::InvalidParameter(format!(
                "field modulus of {} bits exceeds the supported {} bits",
                q.bits(),
                64 * MAX_LIMBS - 1
            )));
        }
        if !q.bit(0) || q.bits() < 3 {
            return Err(Error::InvalidParameter(
                "field modulus must be an odd prime".into(),
            ));
        }
        let modulus = to_limbs(q);
        let limbs = q.to_u64_digits().len();

        // -q^{-1} mod 2^64 by Newton iteration
        let mut inv = 1u64;
        for _ in 0..63 {
            inv = inv.wrapping_mul(inv);
            inv = inv.wrapping_mul(modulus[0]);
        }
        let inv = inv.wrapping_neg();

        let r = (BigUint::from(1u8) << (64 * limbs)) % q;
        let r2 = (&r * &r) % q;
        let minus_two = (q - 2u8).to_u64_digits();
        let sqrt_exp = ((q + 1u8) >> 2usize).to_u64_digits();
        Ok(PrimeField {
            modulus,
            limbs,
            inv,
            r2: Fq(to_limbs(&r2)),
            one: Fq(to_limbs(&r)),
            modulus_big: q.clone(),
            minus_two,
            sqrt_exp,
            width: (q.bits() as usize).div_ceil(8),
        })
    }

    pub(crate) fn width(&self) -> usize {
        self.width
    }

    #[cfg(test)]
    pub(crate) fn modulus(&self) -> &BigUint {
        &self.modulus_big
    }

    pub(crate) fn zero(&self) -> Fq {
        Fq::default()
    }

    pub(crate) fn one(&self) -> Fq {
        self.one
    }

    pub(crate) fn is_zero(&self, a: &Fq) -> bool {
        a.0[..self.limbs].iter().all(|&w| w == 0)
    }

    fn geq_modulus(&self, a: &[u64]) -> bool {
        for i in (0..self.limbs).rev() {
            if a[i] != self.modulus[i] {
                return a[i] > self.modulus[i];
            }
        }
        true
    }

    fn sub_modulus_in_place(&self, a: &mut [u64]) {
        let mut borrow = 0u64;
        for i in 0..self.limbs {
            let (d1, b1) = a[i].overflowing_sub(self.modulus[i]);
            let (d2, b2) = d1.overflowing_sub(borrow);
            a[i] = d2;
            borrow = (b1 | b2) as u64;
        }
    }

    pub(crate) fn add(&self, a: &Fq, b: &Fq) -> Fq {
        let mut out = [0u64; MAX_LIMBS];
        let mut carry = 0u64;
        for i in 0..self.limbs {
            let (s1, c1) = a.0[i].overflowing_add(b.0[i]);
            let (s2, c2) = s1.overflowing_add(carry);
            out[i] = s2;
            carry = (c1 | c2) as u64;
        }
        if carry != 0 || self.geq_modulus(&out) {
            self.sub_modulus_in_place(&mut out);
        }
        Fq(out)
    }

    pub(crate) fn sub(&self, a: &Fq, b: &Fq) -> Fq {
        let mut out = [0u64; MAX_LIMBS];
        let mut borrow = 0u64;
        for i in 0..self.limbs {
            let (d1, b1) = a.0[i].overflowing_sub(b.0[i]);
            let (d2, b2) = d1.overflowing_sub(borrow);
            out[i] = d2;
            borrow = (b1 | b2) as u64;
        }
        if borrow != 0 {
            let mut carry = 0u64;
            for i in 0..self.limbs {
                let (s1, c1) = out[i].overflowing_add(self.modulus[i]);
                let (s2, c2) = s1.overflowing_add(carry);
                out[i] = s2;
                carry = (c1 | c2) as u64;
            }
        }
        Fq(out)
    }

    pub(crate) fn neg(&self, a: &Fq) -> Fq {
        if self.is_zero(a) {
            *a
        } else {
            self.sub(&self.zero(), a)
        }
    }

    pub(crate) fn double(&self, a: &Fq) -> Fq {
        self.add(a, a)
    }

    /// Montgomery product `a·b·R^{-1} mod q` (CIOS).
    pub(crate) fn mul(&self, a: &Fq, b: &Fq) -> Fq {
        let n = self.limbs;
        let q = &self.modulus;
        let mut t = [0u64; MAX_LIMBS + 2];
        for i in 0..n {
            let mut carry = 0u64;
            for j in 0..n {
                let (lo, hi) = mac(t[j], a.0[j], b.0[i], carry);
                t[j] = lo;
                carry = hi;
            }
            let (s, c) = t[n].overflowing_add(carry);
            t[n] = s;
            t[n + 1] = c as u64;

            let m = t[0].wrapping_mul(self.inv);
            let (_, mut carry) = mac(t[0], m, q[0], 0);
            for j in 1..n {
                let (lo, hi) = mac(t[j], m, q[j], carry);
                t[j - 1] = lo;
                carry = hi;
            }
            let (s, c) = t[n].overflowing_add(carry);
            t[n - 1] = s;
            t[n] = t[n + 1] + c as u64;
            t[n + 1] = 0;
        }
        let mut out = [0u64; MAX_LIMBS];
        out[..n].copy_from_slice(&t[..n]);
        if t[n] != 0 || self.geq_modulus(&out) {
            self.sub_modulus_in_place(&mut out);
        }
        Fq(out)
    }

    pub(crate) fn square(&self, a: &Fq) -> Fq {
        self.mul(a, a)
    }

    /// Left-to-right square-and-multiply; `exp` is little-endian limbs.
    pub(crate) fn pow(&self, a: &Fq, exp: &[u64]) -> Fq {
        let mut acc = self.one;
        for word in exp.iter().rev() {
            for bit in (0..64).rev() {
                acc = self.square(&acc);
                if (word >> bit) & 1 == 1 {
                    acc = self.mul(&acc, a);
                }
            }
        }
        acc
    }

    /// Multiplicative inverse; zero maps to zero.
    pub(crate) fn invert(&self, a: &Fq) -> Fq {
        self.pow(a, &self.minus_two)
    }

    /// Square root via `a^((q+1)/4)`, valid because `q ≡ 3 mod 4`.
    pub(crate) fn sqrt(&self, a: &Fq) -> Option<Fq> {
        let r = self.pow(a, &self.sqrt_exp);
        (self.square(&r) == *a).then_some(r)
    }

    pub(crate) fn from_u64(&self, v: u64) -> Fq {
        let mut raw = [0u64; MAX_LIMBS];
        raw[0] = v;
        if self.limbs == 1 && v >= self.modulus[0] {
            raw[0] = v % self.modulus[0];
        }
        self.mul(&Fq(raw), &self.r2)
    }

    /// Reduces an arbitrary integer into the field.
    pub(crate) fn from_biguint(&self, v: &BigUint) -> Fq {
        let reduced = if v >= &self.modulus_big {
            v % &self.modulus_big
        } else {
            v.clone()
        };
        self.mul(&Fq(to_limbs(&reduced)), &self.r2)
    }

    pub(crate) fn to_biguint(&self, a: &Fq) -> BigUint {
        let mut unit = [0u64; MAX_LIMBS];
        unit[0] = 1;
        let plain = self.mul(a, &Fq(unit));
        from_limbs(&plain.0[..self.limbs])
    }

    /// Fixed-width big-endian encoding.
    pub(crate) fn to_bytes(&self, a: &Fq, out: &mut Vec<u8>) {
        let v = self.to_biguint(a);
        let bytes = if v.is_zero() {
            Vec::new()
        } else {
            v.to_bytes_be()
        };
        out.resize(out.len() + self.width - bytes.len(), 0);
        out.extend_from_slice(&bytes);
    }

    /// Parses a fixed-width big-endian encoding, rejecting values `>= q`.
    pub(crate) fn from_bytes(&self, bytes: &[u8]) -> Result<Fq> {
        if bytes.len() != self.width {
            return Err(Error::MalformedLength {
                expected: self.width,
                found: bytes.len(),
            });
        }
        let v = BigUint::from_bytes_be(bytes);
        if v >= self.modulus_big {
            return Err(Error::NonCanonical);
        }
        Ok(self.mul(&Fq(to_limbs(&v)), &self.r2))
    }
}
