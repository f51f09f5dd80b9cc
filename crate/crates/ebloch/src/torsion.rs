//! Torsion in the extended Bloch group: ν_p, w_F, the generators β_p, and
//! their flattened lifts.
//!
//! Everything is computed inside F. With c = 2cos(2π/n), n = p^ν_p, the
//! sequences a_k = x^k + x^-k and b_k = (x^k - x^(1-k))/(x - 1) both satisfy
//! t_(k+1) = c·t_k - t_(k-1), so no cyclotomic extension is ever built.
//! Both satisfy t_k² - t_(k+1)·t_(k-1) = t_1² - t_2·t_0, which is what
//! makes (e_k, f_k) below a flattening.

use crate::error::{Error, Result};
use crate::extbloch::{BlochSum, ExtBlochSum, Flattening};
use crate::extgroup::{cover_to_c, log_section, Branch, ExtElement, MultBasis};
use crate::field::{FieldElement, NumberField};
use crate::numeric::{pi, Precision};
use crate::poly::{cyclotomic, euler_phi, is_prime, QPoly};
use crate::regulator::{reg_sum, torsion_order, DEFAULT_MAX_DEN};
use rug::{Float, Rational};

/// Minimal polynomial of 2cos(2π/n).
pub fn two_cos_minpoly(n: u64) -> QPoly {
    match n {
        1 => return QPoly::from_ints(&[-2, 1]),
        2 => return QPoly::from_ints(&[2, 1]),
        _ => {}
    }
    // Φ_n(x)/x^h = c_h + Σ c_(h+k) (x^k + x^-k), then x^k + x^-k = T_k(y).
    let phi = cyclotomic(n);
    let h = phi.degree().unwrap_or(0) / 2;
    let mut t_prev = QPoly::constant(Rational::from(2));
    let mut t_cur = QPoly::monomial(1);
    let mut acc = QPoly::constant(phi.coeff(h));
    for k in 1..=h {
        acc = acc.add(&t_cur.scale(&phi.coeff(h + k)));
        let next = t_cur.mul(&QPoly::monomial(1)).sub(&t_prev);
        t_prev = std::mem::replace(&mut t_cur, next);
    }
    acc
}

fn minpoly_degree(n: u64) -> u64 {
    if n <= 2 {
        1
    } else {
        euler_phi(n) / 2
    }
}

/// ν_p with a flag set when a bounded search left the answer a lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NuP {
    pub nu: u32,
    pub caveat: bool,
}

/// Largest ν with 2cos(2π/p^ν) ∈ F.
pub fn nu_p(nf: &NumberField, p: u64) -> Result<NuP> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    let d = nf.degree() as u64;
    let mut nu = 0;
    let mut n = 1u64;
    loop {
        let next = n * p;
        let k = minpoly_degree(next);
        if !d.is_multiple_of(k) {
            return Ok(NuP { nu, caveat: false });
        }
        let (roots, truncated) = nf.roots_in_field(&two_cos_minpoly(next));
        if roots.is_empty() {
            return Ok(NuP { nu, caveat: truncated });
        }
        nu += 1;
        n = next;
    }
}

/// The element of F that is 2cos(2π/n) at slot 0.
pub fn two_cos(nf: &NumberField, n: u64) -> Result<FieldElement> {
    let (roots, _) = nf.roots_in_field(&two_cos_minpoly(n));
    let bits = 128;
    let target = Float::with_val(bits, pi(bits) * 2u32) / n as u32;
    let target = Float::with_val(bits, target.cos()) * 2u32;
    let r0 = &nf.roots_at(bits)[0];
    let tol = Float::with_val(bits, 1e-20);
    roots
        .into_iter()
        .find(|r| {
            let v = r.eval_at(r0);
            Float::with_val(bits, &v.re - &target).abs() < tol && Float::with_val(bits, v.im.abs_ref()) < tol
        })
        .ok_or_else(|| Error::NotApplicable(format!("2cos(2π/{n}) is not in the field")))
}

/// One row of the torsion table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeRow {
    pub p: u64,
    pub nu: u32,
    /// ν_p minus the largest ν with a primitive p^ν-th root of unity in F.
    pub nu_prime: u32,
    pub caveat: bool,
}

#[derive(Clone, Debug)]
pub struct TorsionProfile {
    pub rows: Vec<PrimeRow>,
    /// w_F = 2 Π p^ν_p
    pub w: u64,
}

/// ν_p for every prime p ≤ max(5, 2d + 1); larger primes have ν_p = 0
/// since (p - 1)/2 would exceed the degree.
pub fn profile(nf: &NumberField) -> Result<TorsionProfile> {
    let d = nf.degree() as u64;
    let m = nf.torsion_order();
    let mut rows = vec![];
    let mut w = 2u64;
    for p in (2..=(2 * d + 1).max(5)).filter(|&p| is_prime(p)) {
        let NuP { nu, caveat } = nu_p(nf, p)?;
        let mut in_mu = 0;
        let mut mm = m;
        while mm.is_multiple_of(p) {
            mm /= p;
            in_mu += 1;
        }
        rows.push(PrimeRow { p, nu, nu_prime: nu.saturating_sub(in_mu), caveat });
        w *= p.pow(nu);
    }
    Ok(TorsionProfile { rows, w })
}

/// t_0..t_len of the recurrence t_(k+1) = c·t_k - t_(k-1).
fn recurrence(c: &FieldElement, t0: FieldElement, t1: FieldElement, len: usize) -> Vec<FieldElement> {
    let mut t = vec![t0, t1];
    while t.len() <= len {
        let k = t.len();
        let next = c.mul(&t[k - 1]).sub(&t[k - 2]);
        t.push(next);
    }
    t
}

/// The data the torsion generators are built from.
struct TorsionData {
    n: u64,
    /// c_k for k = 0..n+1
    c: Vec<FieldElement>,
    d1: FieldElement,
    d2: FieldElement,
    terms: usize,
}

fn torsion_data(nf: &NumberField, p: u64) -> Result<TorsionData> {
    let NuP { nu, .. } = nu_p(nf, p)?;
    if nu == 0 {
        return Err(Error::NotApplicable(format!("ν_{p} = 0")));
    }
    let n = p.pow(nu);
    let c = two_cos(nf, n)?;
    let one = nf.one();
    let two = nf.from_int(2);
    if p == 2 {
        let seq = recurrence(&c, one.neg(), one.clone(), n as usize + 1);
        Ok(TorsionData { n, c: seq, d1: one, d2: two.add(&c), terms: n as usize / 2 })
    } else {
        let seq = recurrence(&c, two.clone(), c.clone(), n as usize + 1);
        Ok(TorsionData { n, c: seq, d1: two.add(&c), d2: two.sub(&c), terms: n as usize })
    }
}

/// β_p = Σ [t_(k+1)·t_(k-1)/t_k²]: k = 1..n for odd p, k = 1..n/2 for p = 2.
pub fn beta_p(nf: &NumberField, p: u64) -> Result<BlochSum> {
    let data = torsion_data(nf, p)?;
    let mut out = vec![];
    for k in 1..=data.terms {
        let ck = &data.c[k];
        if ck.is_zero() {
            return Err(Error::DegenerateTuple(format!("t_{k} = 0")));
        }
        let z = data.c[k + 1].mul(&data.c[k - 1]).div(&ck.mul(ck))?;
        out.push((1, z));
    }
    BlochSum::from_terms(out)
}

/// A flattened torsion element with its basis and the order it should have.
#[derive(Clone, Debug)]
pub struct FlattenedTorsion {
    pub basis: MultBasis,
    /// Σ_(k=1..n) (e_k, f_k)
    pub cycle: ExtBlochSum,
    /// The generator: the cycle for odd p, the half element Q for p = 2.
    pub element: ExtBlochSum,
    pub expected_order: u64,
}

/// λ̂ of the cyclic cycle: with c̃_k the logarithm of c_k (k mod n),
/// e_k = c̃_(k+1) + c̃_(k-1) - 2c̃_k and f_k = d̃_1 + d̃_2 - 2c̃_k. For p = 2
/// the cycle is twice Q = Σ_(k=1..n/2) (e_k, f_k) + χ(Y), where χ(2Y) is the
/// difference between the cycle and twice the half sum and Y has its w̃
/// coordinate in [0, m).
pub fn flattened_torsion(nf: &NumberField, p: u64) -> Result<FlattenedTorsion> {
    let data = torsion_data(nf, p)?;
    let n = data.n as usize;
    let mut values: Vec<FieldElement> = data.c[..n].to_vec();
    values.push(data.d1.clone());
    values.push(data.d2.clone());
    let (basis, logs) = log_section(nf, &values)?;
    let m = basis.m();
    let ct = |k: usize| &logs[k % n];
    let d = logs[n].add(&logs[n + 1]);
    let flat = |k: usize| -> Result<Flattening> {
        let e = ct(k + 1).add(ct(k + n - 1)).sub(&ct(k).scale(2));
        let f = d.sub(&ct(k).scale(2));
        Flattening::new(&basis, e, f)
    };
    let mut cycle = ExtBlochSum::for_basis(&basis);
    for k in 1..=n {
        cycle.add_term(1, &flat(k)?);
    }
    if !cycle.nu_hat().is_zero() {
        return Err(Error::NotApplicable("cycle element has nonzero ν̂".into()));
    }
    if p != 2 {
        return Ok(FlattenedTorsion { basis, element: cycle.clone(), cycle, expected_order: data.n });
    }
    let mut half = ExtBlochSum::for_basis(&basis);
    for k in 1..=n / 2 {
        half.add_term(1, &flat(k)?);
    }
    let x = cycle.sub(&half.scale(2));
    if x.term_count() != 0 {
        return Err(Error::NotApplicable("cycle is not twice the half sum up to χ".into()));
    }
    let xc = x.chi_part();
    if xc.k % 2 != 0 || xc.r.iter().any(|r| r % 2 != 0) {
        return Err(Error::NotApplicable("χ-difference is not divisible by 2".into()));
    }
    let y = ExtElement { k: (xc.k / 2).rem_euclid(m as i64), r: xc.r.iter().map(|r| r / 2).collect() };
    let mut q = half;
    q.add_chi(&y);
    if !q.nu_hat().is_zero() {
        return Err(Error::NotApplicable("half element has nonzero ν̂".into()));
    }
    Ok(FlattenedTorsion { basis, cycle, element: q, expected_order: 2 * data.n })
}

/// lcm over all slots of the regulator torsion orders; a certified lower
/// bound for the order of s.
pub fn certify_order(basis: &MultBasis, s: &ExtBlochSum, precision: Precision) -> Result<u64> {
    let nf = basis.field();
    let mut order = 1u64;
    for slot in 0..nf.slot_count() {
        let ctx = nf.embedding(slot, precision)?;
        let lift = cover_to_c(basis, &ctx, &Branch::Principal)?;
        let v = reg_sum(basis, s, &lift)?;
        let tol = crate::numeric::ten_pow(-(precision.digits as i32) + 10, ctx.bits());
        let k = torsion_order(&v, DEFAULT_MAX_DEN, &tol).ok_or(Error::NotTorsion)?;
        order = lcm(order, k);
    }
    Ok(order)
}

fn lcm(a: u64, b: u64) -> u64 {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Cx;
    use crate::regulator::RegulatorValue;

    #[test]
    fn two_cos_polys() {
        assert_eq!(two_cos_minpoly(3), QPoly::from_ints(&[1, 1]));
        assert_eq!(two_cos_minpoly(4), QPoly::from_ints(&[0, 1]));
        assert_eq!(two_cos_minpoly(8), QPoly::from_ints(&[-2, 0, 1]));
        assert_eq!(two_cos_minpoly(5), QPoly::from_ints(&[-1, 1, 1]));
        assert_eq!(two_cos_minpoly(9), QPoly::from_ints(&[1, -3, 0, 1]));
    }

    #[test]
    fn rational_profile() {
        let q = NumberField::from_ints(&[0, 1]).unwrap();
        let prof = profile(&q).unwrap();
        let nus: Vec<(u64, u32)> = prof.rows.iter().map(|r| (r.p, r.nu)).collect();
        assert_eq!(nus, vec![(2, 2), (3, 1), (5, 0)]);
        assert_eq!(prof.w, 24);
        let q2 = NumberField::from_ints(&[-2, 0, 1]).unwrap();
        assert_eq!(nu_p(&q2, 2).unwrap().nu, 3);
    }

    #[test]
    fn beta_examples() {
        let q = NumberField::from_ints(&[0, 1]).unwrap();
        let b3 = beta_p(&q, 3).unwrap();
        let want = BlochSum::from_terms([(2, q.from_int(-2)), (1, q.from_rational(Rational::from((1, 4))))]).unwrap();
        assert_eq!(b3, want);
        let q2 = NumberField::from_ints(&[-2, 0, 1]).unwrap();
        let s = q2.gen();
        let b2 = beta_p(&q2, 2).unwrap();
        let want = BlochSum::from_terms([(2, s.sub(&q2.one())), (2, s.neg().sub(&q2.one()))]).unwrap();
        assert_eq!(b2, want);
    }

    #[test]
    fn half_element_sqrt2() {
        let q2 = NumberField::from_ints(&[-2, 0, 1]).unwrap();
        let t = flattened_torsion(&q2, 2).unwrap();
        let prec = Precision::new(50);
        assert_eq!(certify_order(&t.basis, &t.element, prec).unwrap(), 16);
        let bits = prec.bits();
        let quarter = RegulatorValue::new(Cx::real(Float::with_val(bits, pi(bits).square_ref()) / 4u32));
        let ctx = q2.embedding(0, prec).unwrap();
        let lift = cover_to_c(&t.basis, &ctx, &Branch::Principal).unwrap();
        let v = reg_sum(&t.basis, &t.element, &lift).unwrap();
        assert!(v.distance(&quarter) < Float::with_val(bits, 1e-40), "{}", v.format(20, false));
    }

    #[test]
    fn cycle_order_three_over_q() {
        let q = NumberField::from_ints(&[0, 1]).unwrap();
        let t = flattened_torsion(&q, 3).unwrap();
        assert_eq!(certify_order(&t.basis, &t.element, Precision::new(40)).unwrap(), 3);
        assert_eq!(t.element.to_bloch(&t.basis), beta_p(&q, 3).unwrap());
    }
}
