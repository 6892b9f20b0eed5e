//! Reduced Tate pairing composed with the distortion map `φ(x, y) = (−x, i·y)`.
//!
//! The Miller loop runs over `P` in Jacobian coordinates and evaluates each line at `φ(Q)`.
//! Every line value is scaled by a nonzero `F_q` factor and vertical lines are skipped; both
//! vanish under the final exponentiation because `q − 1` divides `(q² − 1)/p`.

use super::curve::{GroupElement, GtElement, Jacobian};
use super::field::Fq;
use super::fq2::Fq2;
use super::params::CurveParams;

impl CurveParams {
    /// Symmetric pairing `e(P, Q) = f_{p,P}(φ(Q))^((q²−1)/p)`.
    pub fn pairing(&self, p: &GroupElement, q: &GroupElement) -> GtElement {
        let c = self.curve();
        let (Some((px, py)), Some((qx, qy))) = (c.affine(p), c.affine(q)) else {
            return self.gt_one();
        };
        let f = self.miller_loop(p, px, py, qx, qy);
        self.final_exponentiation(&f)
    }

    fn miller_loop(&self, base: &GroupElement, px: Fq, py: Fq, qx: Fq, qy: Fq) -> Fq2 {
        let fl = self.field();
        let c = self.curve();
        let order = &c.p_limbs;
        let top = 64 * order.len() - order.last().unwrap().leading_zeros() as usize;

        let mut acc = fl.fq2_one();
        let mut t = c.from_affine(base);
        for bit in (0..top - 1).rev() {
            acc = fl.fq2_square(&acc);
            let line = self.tangent_line(&t, qx, qy);
            acc = fl.fq2_mul(&acc, &line);
            t = c.double(&t);

            if (order[bit / 64] >> (bit % 64)) & 1 == 1 {
                if let Some(line) = self.chord_line(&t, px, py, qx, qy) {
                    acc = fl.fq2_mul(&acc, &line);
                }
                t = c.add_affine(&t, base);
            }
        }
        acc
    }

    /// Tangent at `T = (X:Y:Z)` evaluated at `φ(Q)`, scaled by `2YZ³`:
    /// `(3X² + Z⁴)(x_Q Z² + X) − 2Y² + i·2YZ³·y_Q`.
    fn tangent_line(&self, t: &Jacobian, qx: Fq, qy: Fq) -> Fq2 {
        let f = self.field();
        let zz = f.square(&t.z);
        let slope_num = f.add(&f.mul(&f.from_u64(3), &f.square(&t.x)), &f.square(&zz));
        let re = f.sub(
            &f.mul(&slope_num, &f.add(&f.mul(&qx, &zz), &t.x)),
            &f.double(&f.square(&t.y)),
        );
        let im = f.mul(&f.double(&f.mul(&t.y, &f.mul(&t.z, &zz))), &qy);
        Fq2 { re, im }
    }

    /// Chord through `T` and the affine base point `P` at `φ(Q)`, scaled by
    /// `D = Z(x_P Z² − X)`: `(y_P Z³ − Y)(x_Q + x_P) − y_P·D + i·y_Q·D`.
    /// Returns `None` for the vertical line (`T = −P`).
    fn chord_line(&self, t: &Jacobian, px: Fq, py: Fq, qx: Fq, qy: Fq) -> Option<Fq2> {
        let f = self.field();
        let zz = f.square(&t.z);
        let d = f.mul(&t.z, &f.sub(&f.mul(&px, &zz), &t.x));
        if f.is_zero(&d) {
            return None;
        }
        let num = f.sub(&f.mul(&py, &f.mul(&zz, &t.z)), &t.y);
        let re = f.sub(&f.mul(&num, &f.add(&qx, &px)), &f.mul(&py, &d));
        let im = f.mul(&qy, &d);
        Some(Fq2 { re, im })
    }

    /// `f^((q²−1)/p) = (conj(f)/f)^cofactor`.
    fn final_exponentiation(&self, value: &Fq2) -> GtElement {
        let f = self.field();
        let easy = f.fq2_mul(&f.fq2_conjugate(value), &f.fq2_invert(value));
        GtElement(f.fq2_pow(&easy, &self.curve().cofactor_limbs))
    }
}
