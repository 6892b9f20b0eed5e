//! Quadratic extension `F_q² = F_q[i]/(i² + 1)`.

use super::field::{Fq, PrimeField};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub(crate) struct Fq2 {
    pub(crate) re: Fq,
    pub(crate) im: Fq,
}

impl PrimeField {
    pub(crate) fn fq2_one(&self) -> Fq2 {
        Fq2 {
            re: self.one(),
            im: self.zero(),
        }
    }

    pub(crate) fn fq2_mul(&self, a: &Fq2, b: &Fq2) -> Fq2 {
        // Karatsuba: three base-field products
        let ac = self.mul(&a.re, &b.re);
        let bd = self.mul(&a.im, &b.im);
        let cross = self.mul(&self.add(&a.re, &a.im), &self.add(&b.re, &b.im));
        Fq2 {
            re: self.sub(&ac, &bd),
            im: self.sub(&self.sub(&cross, &ac), &bd),
        }
    }

    pub(crate) fn fq2_square(&self, a: &Fq2) -> Fq2 {
        let sum = self.add(&a.re, &a.im);
        let diff = self.sub(&a.re, &a.im);
        let prod = self.mul(&a.re, &a.im);
        Fq2 {
            re: self.mul(&sum, &diff),
            im: self.double(&prod),
        }
    }

    /// Frobenius `x ↦ x^q`, which is conjugation because `i^q = -i`.
    pub(crate) fn fq2_conjugate(&self, a: &Fq2) -> Fq2 {
        Fq2 {
            re: a.re,
            im: self.neg(&a.im),
        }
    }

    pub(crate) fn fq2_norm(&self, a: &Fq2) -> Fq {
        self.add(&self.square(&a.re), &self.square(&a.im))
    }

    /// Inverse via `conj(a) / N(a)`; zero maps to zero.
    pub(crate) fn fq2_invert(&self, a: &Fq2) -> Fq2 {
        let n_inv = self.invert(&self.fq2_norm(a));
        let c = self.fq2_conjugate(a);
        Fq2 {
            re: self.mul(&c.re, &n_inv),
            im: self.mul(&c.im, &n_inv),
        }
    }

    pub(crate) fn fq2_pow(&self, a: &Fq2, exp: &[u64]) -> Fq2 {
        let mut acc = self.fq2_one();
        let mut started = false;
        for word in exp.iter().rev() {
            for bit in (0..64).rev() {
                if started {
                    acc = self.fq2_square(&acc);
                }
                if (word >> bit) & 1 == 1 {
                    acc = if started { self.fq2_mul(&acc, a) } else { *a };
                    started = true;
                }
            }
        }
        acc
    }
}
