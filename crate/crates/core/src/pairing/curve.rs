//! Group law on `y² = x³ + x`, scalars, hash-to-group and canonical encodings.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::RngCore;
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use super::field::{Fq, PrimeField};
use super::fq2::Fq2;
use super::params::CurveParams;
use crate::error::{Error, Result};

/// Attempts before hash-to-group gives up.
pub const MAX_HASH_ATTEMPTS: u32 = 1 << 16;

const POINT_INFINITY: u8 = 0x00;
const POINT_UNCOMPRESSED: u8 = 0x04;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Repr {
    Infinity,
    Affine { x: Fq, y: Fq },
}

/// Point of the order-`p` subgroup, stored in affine coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct GroupElement(Repr);

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement(Repr::Infinity)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.0, Repr::Infinity)
    }
}

/// Element of the target group, a subgroup of `F_q²^*`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct GtElement(pub(crate) Fq2);

/// Exponent in `Z_p`, always reduced.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Scalar(BigUint);

impl Scalar {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Jacobian {
    pub(crate) x: Fq,
    pub(crate) y: Fq,
    pub(crate) z: Fq,
}

pub(crate) struct Curve {
    pub(crate) field: PrimeField,
    pub(crate) p_limbs: Vec<u64>,
    pub(crate) cofactor_limbs: Vec<u64>,
}

impl Curve {
    pub(crate) fn new(field: PrimeField, p: &BigUint, cofactor: &BigUint) -> Self {
        Curve {
            field,
            p_limbs: p.to_u64_digits(),
            cofactor_limbs: cofactor.to_u64_digits(),
        }
    }

    pub(crate) fn infinity(&self) -> Jacobian {
        Jacobian {
            x: self.field.one(),
            y: self.field.one(),
            z: self.field.zero(),
        }
    }

    pub(crate) fn is_infinity(&self, p: &Jacobian) -> bool {
        self.field.is_zero(&p.z)
    }

    pub(crate) fn from_affine(&self, p: &GroupElement) -> Jacobian {
        match p.0 {
            Repr::Infinity => self.infinity(),
            Repr::Affine { x, y } => Jacobian {
                x,
                y,
                z: self.field.one(),
            },
        }
    }

    pub(crate) fn to_affine(&self, p: &Jacobian) -> GroupElement {
        if self.is_infinity(p) {
            return GroupElement::identity();
        }
        let f = &self.field;
        let zinv = f.invert(&p.z);
        let zinv2 = f.square(&zinv);
        let x = f.mul(&p.x, &zinv2);
        let y = f.mul(&p.y, &f.mul(&zinv2, &zinv));
        GroupElement(Repr::Affine { x, y })
    }

    /// Doubling for `a = 1` (dbl-2007-bl).
    pub(crate) fn double(&self, p: &Jacobian) -> Jacobian {
        let f = &self.field;
        if self.is_infinity(p) || f.is_zero(&p.y) {
            return self.infinity();
        }
        let xx = f.square(&p.x);
        let yy = f.square(&p.y);
        let yyyy = f.square(&yy);
        let zz = f.square(&p.z);
        let s = f.double(&f.sub(&f.sub(&f.square(&f.add(&p.x, &yy)), &xx), &yyyy));
        let m = f.add(&f.add(&f.double(&xx), &xx), &f.square(&zz));
        let x3 = f.sub(&f.square(&m), &f.double(&s));
        let eight_yyyy = f.double(&f.double(&f.double(&yyyy)));
        let y3 = f.sub(&f.mul(&m, &f.sub(&s, &x3)), &eight_yyyy);
        let z3 = f.sub(&f.sub(&f.square(&f.add(&p.y, &p.z)), &yy), &zz);
        Jacobian {
            x: x3,
            y: y3,
            z: z3,
        }
    }

    /// Mixed addition of a Jacobian point and an affine point (madd-2007-bl).
    pub(crate) fn add_affine(&self, p: &Jacobian, q: &GroupElement) -> Jacobian {
        let (qx, qy) = match q.0 {
            Repr::Infinity => return *p,
            Repr::Affine { x, y } => (x, y),
        };
        if self.is_infinity(p) {
            return self.from_affine(q);
        }
        let f = &self.field;
        let z1z1 = f.square(&p.z);
        let u2 = f.mul(&qx, &z1z1);
        let s2 = f.mul(&qy, &f.mul(&p.z, &z1z1));
        let h = f.sub(&u2, &p.x);
        let r = f.double(&f.sub(&s2, &p.y));
        if f.is_zero(&h) {
            return if f.is_zero(&r) {
                self.double(p)
            } else {
                self.infinity()
            };
        }
        let hh = f.square(&h);
        let i = f.double(&f.double(&hh));
        let j = f.mul(&h, &i);
        let v = f.mul(&p.x, &i);
        let x3 = f.sub(&f.sub(&f.square(&r), &j), &f.double(&v));
        let y3 = f.sub(&f.mul(&r, &f.sub(&v, &x3)), &f.double(&f.mul(&p.y, &j)));
        let z3 = f.sub(&f.sub(&f.square(&f.add(&p.z, &h)), &z1z1), &hh);
        Jacobian {
            x: x3,
            y: y3,
            z: z3,
        }
    }

    /// Left-to-right double-and-add; `k` is little-endian limbs.
    pub(crate) fn mul_limbs(&self, base: &GroupElement, k: &[u64]) -> Jacobian {
        let mut acc = self.infinity();
        if base.is_identity() {
            return acc;
        }
        for word in k.iter().rev() {
            for bit in (0..64).rev() {
                acc = self.double(&acc);
                if (word >> bit) & 1 == 1 {
                    acc = self.add_affine(&acc, base);
                }
            }
        }
        acc
    }

    pub(crate) fn is_on_curve(&self, p: &GroupElement) -> bool {
        match p.0 {
            Repr::Infinity => true,
            Repr::Affine { x, y } => {
                let f = &self.field;
                let rhs = f.add(&f.mul(&f.square(&x), &x), &x);
                f.square(&y) == rhs
            }
        }
    }

    pub(crate) fn in_subgroup(&self, p: &GroupElement) -> bool {
        self.is_infinity(&self.mul_limbs(p, &self.p_limbs))
    }

    pub(crate) fn affine(&self, p: &GroupElement) -> Option<(Fq, Fq)> {
        match p.0 {
            Repr::Infinity => None,
            Repr::Affine { x, y } => Some((x, y)),
        }
    }

    /// Try-and-increment: derive `x` from `SHAKE256(tag ‖ msg ‖ counter)`, lift to the curve,
    /// clear the cofactor, and retry on a non-residue or an identity result.
    pub(crate) fn hash_to_group(&self, tag: &[u8], msg: &[u8]) -> Result<GroupElement> {
        let f = &self.field;
        let width = f.width() + 16;
        let mut buf = vec![0u8; width + 1];
        for counter in 0..MAX_HASH_ATTEMPTS {
            let mut xof = Shake256::default();
            xof.update(b"AIBE-H2G");
            xof.update(&(tag.len() as u32).to_be_bytes());
            xof.update(tag);
            xof.update(&(msg.len() as u64).to_be_bytes());
            xof.update(msg);
            xof.update(&counter.to_be_bytes());
            xof.finalize_xof().read(&mut buf);

            let x = f.from_biguint(&BigUint::from_bytes_be(&buf[..width]));
            let rhs = f.add(&f.mul(&f.square(&x), &x), &x);
            let Some(mut y) = f.sqrt(&rhs) else { continue };
            if buf[width] & 1 == 1 {
                y = f.neg(&y);
            }
            let lifted = GroupElement(Repr::Affine { x, y });
            let cleared = self.to_affine(&self.mul_limbs(&lifted, &self.cofactor_limbs));
            if !cleared.is_identity() {
                return Ok(cleared);
            }
        }
        Err(Error::HashToGroupExhausted)
    }
}

impl CurveParams {
    pub(crate) fn curve(&self) -> &Curve {
        &self.0.curve
    }

    pub(crate) fn field(&self) -> &PrimeField {
        &self.0.curve.field
    }

    /// `k·P` in the subgroup; `k = 0` gives the identity.
    pub fn point_mul(&self, point: &GroupElement, k: &Scalar) -> GroupElement {
        let c = self.curve();
        c.to_affine(&c.mul_limbs(point, &k.0.to_u64_digits()))
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let c = self.curve();
        c.to_affine(&c.add_affine(&c.from_affine(a), b))
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        match a.0 {
            Repr::Infinity => *a,
            Repr::Affine { x, y } => GroupElement(Repr::Affine {
                x,
                y: self.field().neg(&y),
            }),
        }
    }

    /// Sum of many points with a single final normalization.
    pub fn sum<'a, I>(&self, points: I) -> GroupElement
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        let c = self.curve();
        let acc = points
            .into_iter()
            .fold(c.infinity(), |acc, p| c.add_affine(&acc, p));
        c.to_affine(&acc)
    }

    pub fn is_on_curve(&self, point: &GroupElement) -> bool {
        self.curve().is_on_curve(point)
    }

    pub fn in_subgroup(&self, point: &GroupElement) -> bool {
        self.curve().is_on_curve(point) && self.curve().in_subgroup(point)
    }

    /// Deterministic map from `(tag, msg)` into the subgroup; never returns the identity.
    pub fn hash_to_group(&self, tag: &[u8], msg: &[u8]) -> Result<GroupElement> {
        self.curve().hash_to_group(tag, msg)
    }

    /// Uniform subgroup element from fresh randomness.
    pub fn random_element<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<GroupElement> {
        let mut label = [0u8; 32];
        rng.fill_bytes(&mut label);
        self.hash_to_group(b"AIBE-RANDOM-ELEMENT", &label)
    }

    /// Affine coordinates as integers, or `None` for the identity.
    pub fn coordinates(&self, point: &GroupElement) -> Option<(BigUint, BigUint)> {
        let f = self.field();
        self.curve()
            .affine(point)
            .map(|(x, y)| (f.to_biguint(&x), f.to_biguint(&y)))
    }

    /// Builds a point from integer coordinates, validating curve and subgroup membership.
    pub fn point_from_coordinates(&self, x: &BigUint, y: &BigUint) -> Result<GroupElement> {
        if x >= self.q() || y >= self.q() {
            return Err(Error::NonCanonical);
        }
        let f = self.field();
        let point = GroupElement(Repr::Affine {
            x: f.from_biguint(x),
            y: f.from_biguint(y),
        });
        self.validate_point(point)
    }

    fn validate_point(&self, point: GroupElement) -> Result<GroupElement> {
        if !self.curve().is_on_curve(&point) {
            return Err(Error::NotOnCurve);
        }
        if !self.curve().in_subgroup(&point) {
            return Err(Error::NotInSubgroup);
        }
        Ok(point)
    }

    /// Encoded length of a non-identity point.
    pub fn point_len(&self) -> usize {
        1 + 2 * self.field_width()
    }

    /// `0x00` for the identity, otherwise `0x04 ‖ x ‖ y` with fixed-width big-endian coordinates.
    pub fn serialize_g(&self, point: &GroupElement) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.point_len());
        self.write_g(point, &mut out);
        out
    }

    pub(crate) fn write_g(&self, point: &GroupElement, out: &mut Vec<u8>) {
        match point.0 {
            Repr::Infinity => out.push(POINT_INFINITY),
            Repr::Affine { x, y } => {
                out.push(POINT_UNCOMPRESSED);
                self.field().to_bytes(&x, out);
                self.field().to_bytes(&y, out);
            }
        }
    }

    pub fn deserialize_g(&self, bytes: &[u8]) -> Result<GroupElement> {
        match bytes.first() {
            Some(&POINT_INFINITY) if bytes.len() == 1 => Ok(GroupElement::identity()),
            Some(&POINT_INFINITY) => Err(Error::MalformedLength {
                expected: 1,
                found: bytes.len(),
            }),
            Some(&POINT_UNCOMPRESSED) => {
                let expected = self.point_len();
                if bytes.len() != expected {
                    return Err(Error::MalformedLength {
                        expected,
                        found: bytes.len(),
                    });
                }
                let w = self.field_width();
                let x = self.field().from_bytes(&bytes[1..1 + w])?;
                let y = self.field().from_bytes(&bytes[1 + w..])?;
                self.validate_point(GroupElement(Repr::Affine { x, y }))
            }
            Some(&other) => Err(Error::InvalidPrefix(other)),
            None => Err(Error::MalformedLength {
                expected: self.point_len(),
                found: 0,
            }),
        }
    }

    /// Splits one self-delimiting point encoding off the front of `bytes`.
    pub(crate) fn split_g<'a>(&self, bytes: &'a [u8]) -> Result<(GroupElement, &'a [u8])> {
        let len = match bytes.first() {
            Some(&POINT_INFINITY) => 1,
            Some(&POINT_UNCOMPRESSED) => self.point_len(),
            Some(&other) => return Err(Error::InvalidPrefix(other)),
            None => {
                return Err(Error::MalformedLength {
                    expected: 1,
                    found: 0,
                })
            }
        };
        if bytes.len() < len {
            return Err(Error::MalformedLength {
                expected: len,
                found: bytes.len(),
            });
        }
        let (head, tail) = bytes.split_at(len);
        Ok((self.deserialize_g(head)?, tail))
    }

    pub fn gt_one(&self) -> GtElement {
        GtElement(self.field().fq2_one())
    }

    pub fn gt_is_one(&self, a: &GtElement) -> bool {
        *a == self.gt_one()
    }

    pub fn gt_mul(&self, a: &GtElement, b: &GtElement) -> GtElement {
        GtElement(self.field().fq2_mul(&a.0, &b.0))
    }

    pub fn gt_inverse(&self, a: &GtElement) -> GtElement {
        GtElement(self.field().fq2_invert(&a.0))
    }

    pub fn gt_div(&self, a: &GtElement, b: &GtElement) -> GtElement {
        self.gt_mul(a, &self.gt_inverse(b))
    }

    pub fn gt_pow(&self, a: &GtElement, k: &Scalar) -> GtElement {
        GtElement(self.field().fq2_pow(&a.0, &k.0.to_u64_digits()))
    }

    /// `(re, im)` as integers.
    pub fn gt_components(&self, a: &GtElement) -> (BigUint, BigUint) {
        let f = self.field();
        (f.to_biguint(&a.0.re), f.to_biguint(&a.0.im))
    }

    /// `re ‖ im`, each fixed-width big-endian.
    pub fn serialize_gt(&self, a: &GtElement) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 * self.field_width());
        self.field().to_bytes(&a.0.re, &mut out);
        self.field().to_bytes(&a.0.im, &mut out);
        out
    }

    pub fn deserialize_gt(&self, bytes: &[u8]) -> Result<GtElement> {
        let w = self.field_width();
        if bytes.len() != 2 * w {
            return Err(Error::MalformedLength {
                expected: 2 * w,
                found: bytes.len(),
            });
        }
        let re = self.field().from_bytes(&bytes[..w])?;
        let im = self.field().from_bytes(&bytes[w..])?;
        let a = Fq2 { re, im };
        if self.field().is_zero(&self.field().fq2_norm(&a)) {
            return Err(Error::NotInSubgroup);
        }
        let a = GtElement(a);
        if !self.gt_is_one(&GtElement(
            self.field().fq2_pow(&a.0, &self.curve().p_limbs),
        )) {
            return Err(Error::NotInSubgroup);
        }
        Ok(a)
    }

    pub fn scalar(&self, v: &BigUint) -> Scalar {
        Scalar(v % self.p())
    }

    pub fn scalar_from_u64(&self, v: u64) -> Scalar {
        self.scalar(&BigUint::from(v))
    }

    pub fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.scalar(&(&a.0 + &b.0))
    }

    pub fn scalar_mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.scalar(&(&a.0 * &b.0))
    }

    /// Uniform in `[0, p)` by rejection sampling.
    pub fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        let bits = self.p().bits() as usize;
        let mut buf = vec![0u8; bits.div_ceil(8)];
        let excess = buf.len() * 8 - bits;
        loop {
            rng.fill_bytes(&mut buf);
            buf[0] &= 0xff >> excess;
            let v = BigUint::from_bytes_be(&buf);
            if &v < self.p() {
                return Scalar(v);
            }
        }
    }

    /// Uniform in `[1, p)`.
    pub fn random_nonzero_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        loop {
            let s = self.random_scalar(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    pub fn serialize_scalar(&self, k: &Scalar) -> Vec<u8> {
        let w = self.scalar_width();
        let bytes = if k.0.is_zero() {
            Vec::new()
        } else {
            k.0.to_bytes_be()
        };
        let mut out = vec![0u8; w - bytes.len()];
        out.extend(bytes);
        out
    }

    pub fn deserialize_scalar(&self, bytes: &[u8]) -> Result<Scalar> {
        let w = self.scalar_width();
        if bytes.len() != w {
            return Err(Error::MalformedLength {
                expected: w,
                found: bytes.len(),
            });
        }
        let v = BigUint::from_bytes_be(bytes);
        if &v >= self.p() {
            return Err(Error::NonCanonical);
        }
        Ok(Scalar(v))
    }
}
