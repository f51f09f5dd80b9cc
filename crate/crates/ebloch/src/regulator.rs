//! The dilogarithm regulator on flattenings, mod 4π².
//!
//! For a flattening with w0 = Log z + 2pπi and w1 = Log(1-z) + 2qπi,
//!
//! R = Li2(z) + ½·w0·(Log(1-z) - 2qπi) - π²/6.
//!
//! A χ-term χ(c) shifts some w1 by lift(ι(1)) = 2πi·k_unit, which changes R
//! by -πi·k_unit·lift(c); that is its contribution.
//!
//! The imaginary part satisfies Im R = Σ n D(z) + ½·J(ν̂), where J is the
//! bilinear form (a, b) ↦ Re a·Im b - Im a·Re b applied to the ν̂ terms.
//! It vanishes on elements of the extended Bloch group.

use crate::error::{Error, Result};
use crate::extbloch::{ExtBlochSum, Flattening};
use crate::extgroup::{cover_to_c, Branch, LogLift, MultBasis};
use crate::field::EmbeddingContext;
use crate::numeric::{best_rational, bloch_wigner, fmt_complex, fmt_real, li2, pi, reduce_mod, reduce_symmetric, round_int, Cx, Precision};
use rug::{Float, Integer};

pub use crate::numeric::li2 as dilog;

/// A regulator value in C/4π²Z.
#[derive(Clone, Debug)]
pub struct RegulatorValue {
    pub value: Cx,
}

impl RegulatorValue {
    pub fn new(value: Cx) -> Self {
        let m = four_pi_sq(value.prec());
        let re = reduce_mod(&value.re, &m);
        RegulatorValue { value: Cx::new(re, value.im) }
    }

    pub fn bits(&self) -> u32 {
        self.value.prec()
    }

    /// Real part in [0, 4π²).
    pub fn canonical(&self) -> Cx {
        self.value.clone()
    }

    /// Real part in [-2π², 2π²).
    pub fn symmetric(&self) -> Cx {
        let m = four_pi_sq(self.bits());
        Cx::new(reduce_symmetric(&self.value.re, &m), self.value.im.clone())
    }

    /// Distance to another value in C/4π²Z.
    pub fn distance(&self, o: &RegulatorValue) -> Float {
        let b = self.bits().min(o.bits());
        let m = four_pi_sq(b);
        let d = self.value.with_prec(b).sub(&o.value.with_prec(b));
        let re = reduce_symmetric(&d.re, &m);
        Cx::new(re, d.im).abs()
    }

    pub fn is_zero_within(&self, tol: &Float) -> bool {
        self.distance(&RegulatorValue::new(Cx::zero(self.bits()))) < *tol
    }

    pub fn format(&self, digits: usize, symmetric: bool) -> String {
        let v = if symmetric { self.symmetric() } else { self.canonical() };
        fmt_complex(&v, digits)
    }
}

pub fn four_pi_sq(bits: u32) -> Float {
    let p = pi(bits);
    Float::with_val(bits, p.square_ref()) * 4u32
}

/// z and its logarithm data under an embedding: z, Log z, 1 - z, Log(1 - z).
struct CrossRatio {
    z: Cx,
    log_z: Cx,
    log_1mz: Cx,
}

fn cross_ratio(basis: &MultBasis, fl: &Flattening, ctx: &EmbeddingContext) -> Result<CrossRatio> {
    let mut z = fl.z(basis).evaluate(ctx)?;
    if ctx.is_real() {
        z.im = Float::new(z.prec());
    }
    let bits = z.prec();
    let w = Cx::from_int(bits, 1).sub(&z);
    Ok(CrossRatio { log_z: z.log(), log_1mz: w.log(), z })
}

/// The integer n with a = b + 2πi·n, checked.
fn branch_integer(a: &Cx, b: &Cx, what: &str) -> Result<Integer> {
    let bits = a.prec();
    let two_pi = Float::with_val(bits, pi(bits) * 2u32);
    let d = a.sub(b);
    let t = Float::with_val(bits, &d.im / &two_pi);
    let n = round_int(&t);
    let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32) / 2));
    let err = Float::with_val(bits, &t - &n).abs();
    if err > tol || Float::with_val(bits, d.re.abs_ref()) > tol {
        return Err(Error::LiftInconsistent(format!("{what} does not exponentiate correctly")));
    }
    Ok(n)
}

fn reg_from_parts(cr: &CrossRatio, w0: &Cx, w1: &Cx) -> Result<Cx> {
    let bits = w0.prec();
    branch_integer(w0, &cr.log_z, "lift(e)")?;
    let q = branch_integer(w1, &cr.log_1mz, "lift(f)")?;
    let pi2_6 = Float::with_val(bits, pi(bits).square_ref()) / 6u32;
    let shifted = cr.log_1mz.sub(&Cx::two_pi_i(bits, &q));
    let half = Float::with_val(bits, 0.5);
    Ok(li2(&cr.z).add(&w0.mul(&shifted).scale(&half)).sub(&Cx::real(pi2_6)))
}

/// R on a single flattening under a covering.
pub fn reg_flattening(basis: &MultBasis, fl: &Flattening, lift: &LogLift) -> Result<RegulatorValue> {
    let cr = cross_ratio(basis, fl, &lift.embedding)?;
    Ok(RegulatorValue::new(reg_from_parts(&cr, &lift.lift(&fl.e), &lift.lift(&fl.f))?))
}

/// Zagier's form F(w1) + w0·w1/2 - π²/6 with F(x) = Li2(1 - e^x), valid as
/// written on the sheet q = 0.
pub fn reg_zagier_q0(w0: &Cx, w1: &Cx) -> Cx {
    let bits = w0.prec();
    let pi2_6 = Float::with_val(bits, pi(bits).square_ref()) / 6u32;
    let half = Float::with_val(bits, 0.5);
    let f = li2(&Cx::from_int(bits, 1).sub(&w1.exp()));
    f.add(&w0.mul(w1).scale(&half)).sub(&Cx::real(pi2_6))
}

/// R of an extended sum: Σ n·R(e, f) - πi·k_unit·lift(c) for the χ-part c.
pub fn reg_sum(basis: &MultBasis, s: &ExtBlochSum, lift: &LogLift) -> Result<RegulatorValue> {
    let bits = lift.bits();
    let mut acc = Cx::zero(bits);
    for (fl, n) in s.terms() {
        let cr = cross_ratio(basis, fl, &lift.embedding)?;
        let r = reg_from_parts(&cr, &lift.lift(&fl.e), &lift.lift(&fl.f))?;
        acc = acc.add(&r.scale_i64(n));
    }
    if !s.chi_part().is_zero() {
        let c = lift.lift(s.chi_part());
        let minus_pi_i = Cx::new(Float::new(bits), -pi(bits));
        acc = acc.add(&c.mul(&minus_pi_i).scale_i64(lift.k_unit));
    }
    Ok(RegulatorValue::new(acc))
}

/// Σ n·D(z) under an embedding.
pub fn bloch_wigner_sum(basis: &MultBasis, s: &ExtBlochSum, ctx: &EmbeddingContext) -> Result<Float> {
    let bits = ctx.bits();
    let mut acc = Float::new(bits);
    for (fl, n) in s.terms() {
        let cr = cross_ratio(basis, fl, ctx)?;
        acc += bloch_wigner(&cr.z) * Float::with_val(bits, n);
    }
    Ok(acc)
}

/// One entry of the regulator vector.
#[derive(Clone, Debug)]
pub struct SlotValue {
    pub slot: usize,
    pub real: bool,
    pub value: RegulatorValue,
}

/// R at every slot: real embeddings first, then one representative per
/// conjugate pair, each with the principal covering. At real slots the
/// imaginary part of an element of the extended Bloch group is checked to
/// vanish and then dropped; other sums keep it.
pub fn reg_vector(basis: &MultBasis, s: &ExtBlochSum, precision: Precision) -> Result<Vec<SlotValue>> {
    let nf = basis.field();
    let in_bhat = s.nu_hat().is_zero();
    let mut out = vec![];
    for slot in 0..nf.slot_count() {
        let ctx = nf.embedding(slot, precision)?;
        let lift = cover_to_c(basis, &ctx, &Branch::Principal)?;
        let mut v = reg_sum(basis, s, &lift)?;
        let real = ctx.is_real();
        if real && in_bhat {
            let tol = Float::with_val(ctx.bits(), Float::i_exp(1, -(ctx.bits() as i32) / 2));
            if Float::with_val(ctx.bits(), v.value.im.abs_ref()) > tol {
                return Err(Error::RealSlotNotReal(fmt_real(&v.value.im, 20)));
            }
            v.value.im = Float::new(ctx.bits());
        }
        out.push(SlotValue { slot, real, value: v });
    }
    Ok(out)
}

/// Order of v in C/4π²Z as a root of unity image: the denominator of
/// v/4π² when it is (within tolerance) a rational with denominator at most
/// `max_den`.
pub fn torsion_order(v: &RegulatorValue, max_den: u64, tol: &Float) -> Option<u64> {
    let bits = v.bits();
    if Float::with_val(bits, v.value.im.abs_ref()) > *tol {
        return None;
    }
    let m = four_pi_sq(bits);
    let x = Float::with_val(bits, &v.value.re / &m);
    let q = best_rational(&x, &Integer::from(max_den));
    let back = Float::with_val(bits, &q * &m);
    let resid = Float::with_val(bits, &back - &v.value.re);
    let resid = reduce_symmetric(&resid, &m).abs();
    if resid > *tol {
        return None;
    }
    let d = q.denom().to_u64()?;
    Some(d)
}

pub const DEFAULT_MAX_DEN: u64 = 10_000;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extbloch::{lift_five_term, rho_hat};
    use crate::extgroup::ExtElement;
    use crate::field::NumberField;
    use rug::Rational;

    fn tol(bits: u32, e: i32) -> Float {
        Float::with_val(bits, Float::i_exp(1, e))
    }

    #[test]
    fn example_regulator() {
        let nf = NumberField::from_ints(&[1, -2, 2, -1, 1]).unwrap();
        let u = nf.element_from_ints(&[1, -2, 0, -1]);
        let b = MultBasis::new(&nf, vec![u], true).unwrap();
        let fl1 = Flattening::new(&b, ExtElement::new(0, vec![1]), ExtElement::new(4, vec![2])).unwrap();
        let fl2 = Flattening::new(&b, ExtElement::new(3, vec![-2]), ExtElement::new(1, vec![-3])).unwrap();
        let a = ExtBlochSum::from_raw(6, 1, &[(1, fl1), (2, fl2)], &[ExtElement::new(0, vec![-3])]);
        let ctx = nf.embedding_near(-0.1217, 1.3066, Precision::new(40));
        let lift = cover_to_c(&b, &ctx, &Branch::Principal).unwrap();
        let v = reg_sum(&b, &a, &lift).unwrap().symmetric().to_f64();
        assert!((v.0 + 7.4532).abs() < 5e-4, "{v:?}");
        assert!((v.1 + 2.3126).abs() < 5e-4, "{v:?}");
    }

    #[test]
    fn five_term_vanishes_over_q() {
        let q = NumberField::from_ints(&[0, 1]).unwrap();
        let b = MultBasis::new(&q, vec![q.from_int(2), q.from_int(3), q.from_int(5)], true).unwrap();
        let r = |a: i64, c: i64| q.from_rational(Rational::from((a, c)));
        let fl0 = Flattening::of(&b, &r(-1, 2)).unwrap().translate(1, -2, 2);
        let fl1 = Flattening::of(&b, &r(3, 4)).unwrap().translate(-1, 3, 2);
        let rel = lift_five_term(&b, &fl0, &fl1).unwrap();
        let ctx = q.embedding(0, Precision::new(40)).unwrap();
        let lift = cover_to_c(&b, &ctx, &Branch::Principal).unwrap();
        let v = reg_sum(&b, &rho_hat(2, &rel), &lift).unwrap();
        assert!(v.is_zero_within(&tol(ctx.bits(), -90)));
    }

    #[test]
    fn swapped_pair_is_universal() {
        let q = NumberField::from_ints(&[0, 1]).unwrap();
        let b = MultBasis::new(&q, vec![q.from_int(2), q.from_int(3), q.from_int(5), q.from_int(7)], true).unwrap();
        let ctx = q.embedding(0, Precision::new(40)).unwrap();
        let lift = cover_to_c(&b, &ctx, &Branch::Principal).unwrap();
        let bits = ctx.bits();
        let target = RegulatorValue::new(Cx::real(-Float::with_val(bits, pi(bits).square_ref()) / 6u32));
        for (a, c) in [(1, 2), (-3, 5), (10, 3), (25, 24)] {
            let fl = Flattening::of(&b, &q.from_rational(Rational::from((a, c)))).unwrap().translate(a % 3, c % 2, 2);
            let s = ExtBlochSum::from_raw(2, 4, &[(1, fl.clone()), (1, fl.swapped())], &[]);
            let v = reg_sum(&b, &s, &lift).unwrap();
            assert!(v.distance(&target) < tol(bits, -100), "{a}/{c}");
            assert_eq!(torsion_order(&v, DEFAULT_MAX_DEN, &tol(bits, -100)), Some(24));
        }
    }

    #[test]
    fn zagier_agrees_on_principal_sheet() {
        let bits = 160;
        for (re, im) in [(0.3, 0.2), (-1.5, 0.7), (2.5, -0.4)] {
            let z = Cx::from_f64(bits, re, im);
            let w0 = z.log();
            let w1 = Cx::from_int(bits, 1).sub(&z).log();
            let half = Float::with_val(bits, 0.5);
            let pi2_6 = Float::with_val(bits, pi(bits).square_ref()) / 6u32;
            let direct = li2(&z).add(&w0.mul(&w1).scale(&half)).sub(&Cx::real(pi2_6));
            assert!(reg_zagier_q0(&w0, &w1).close_to(&direct, &tol(bits, -140)));
        }
    }

    #[test]
    fn torsion_orders() {
        let bits = 200;
        let p2 = Float::with_val(bits, pi(bits).square_ref());
        let t = tol(bits, -150);
        let v = |x: Float| RegulatorValue::new(Cx::real(x));
        assert_eq!(torsion_order(&v(Float::with_val(bits, &p2 / 4u32)), DEFAULT_MAX_DEN, &t), Some(16));
        assert_eq!(torsion_order(&v(-Float::with_val(bits, &p2 / 6u32)), DEFAULT_MAX_DEN, &t), Some(24));
        assert_eq!(torsion_order(&v(Float::new(bits)), DEFAULT_MAX_DEN, &t), Some(1));
        assert_eq!(torsion_order(&v(Float::with_val(bits, 1)), DEFAULT_MAX_DEN, &t), None);
    }
}
