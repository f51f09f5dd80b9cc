//! Flattenings, five-term relations, χ, and the (extended) pre-Bloch algebra.
//!
//! Two flattenings of the same cross-ratio differ by integer multiples of
//! ι(1) = (m, 0) in each slot, so grouping by cross-ratio is a coordinate
//! operation: the base of (e, f) is the pair with both k reduced into
//! [0, m). A sum is kept in normal form, with
//!
//! (e + p, f + q) - (e, f) = χ(q·e - p·f + pq)
//!
//! moving every translate onto its base. χ kills 2ι(1), so the χ-part lives
//! in E/2Z: its k coordinate is reduced into [0, 2m).

use crate::error::{Error, Result};
use crate::extgroup::{ExtElement, MultBasis, WedgeElement, WedgeVerdict};
use crate::field::FieldElement;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// A pair (e, f) in E × E with π(e) + π(f) = 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Flattening {
    pub e: ExtElement,
    pub f: ExtElement,
}

impl Flattening {
    /// Checked construction.
    pub fn new(basis: &MultBasis, e: ExtElement, f: ExtElement) -> Result<Self> {
        if e.rank() != basis.rank() || f.rank() != basis.rank() {
            return Err(Error::InvalidInput("coordinate length does not match the basis".into()));
        }
        let z = basis.pi(&e);
        if z.is_one() {
            return Err(Error::DegenerateTuple("π(e) = 1".into()));
        }
        if z.add(&basis.pi(&f)) != basis.field().one() {
            return Err(Error::NotAFlattening(format!("π{e} + π{f} != 1")));
        }
        Ok(Flattening { e, f })
    }

    pub fn unchecked(e: ExtElement, f: ExtElement) -> Self {
        Flattening { e, f }
    }

    /// The flattening (log z, log(1 - z)) with both k in [0, m).
    pub fn of(basis: &MultBasis, z: &FieldElement) -> Result<Self> {
        check_nondegenerate(z)?;
        Ok(Flattening { e: basis.log_lift(z)?, f: basis.log_lift(&z.one_minus())? })
    }

    /// The cross-ratio π(e).
    pub fn z(&self, basis: &MultBasis) -> FieldElement {
        basis.pi(&self.e)
    }

    pub fn rank(&self) -> usize {
        self.e.rank()
    }

    /// (e + p·ι(1), f + q·ι(1))
    pub fn translate(&self, p: i64, q: i64, m: u64) -> Self {
        let r = self.rank();
        Flattening { e: self.e.add(&ExtElement::iota(p, m, r)), f: self.f.add(&ExtElement::iota(q, m, r)) }
    }

    /// (f, e), a flattening of 1 - z.
    pub fn swapped(&self) -> Self {
        Flattening { e: self.f.clone(), f: self.e.clone() }
    }

    /// Base representative and the translate (p, q) with self = base + (p, q).
    pub fn base(&self, m: u64) -> (Flattening, i64, i64) {
        split_translate(self, m as i64)
    }
}

impl fmt::Display for Flattening {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.e, self.f)
    }
}

/// Split (e, f) into a base with k in [0, unit) and integer translates.
fn split_translate(fl: &Flattening, unit: i64) -> (Flattening, i64, i64) {
    let p = fl.e.k.div_euclid(unit);
    let q = fl.f.k.div_euclid(unit);
    let base = Flattening {
        e: ExtElement { k: fl.e.k.rem_euclid(unit), r: fl.e.r.clone() },
        f: ExtElement { k: fl.f.k.rem_euclid(unit), r: fl.f.r.clone() },
    };
    (base, p, q)
}

fn check_nondegenerate(z: &FieldElement) -> Result<()> {
    if z.is_zero() || z.is_one() {
        return Err(Error::DegenerateTuple(format!("{z} is 0 or 1")));
    }
    Ok(())
}

/// An element of the extended pre-Bloch group in normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtBlochSum {
    m: u64,
    rank: usize,
    terms: BTreeMap<Flattening, i64>,
    chi: ExtElement,
}

impl ExtBlochSum {
    pub fn zero(m: u64, rank: usize) -> Self {
        ExtBlochSum { m, rank, terms: BTreeMap::new(), chi: ExtElement::zero(rank) }
    }

    pub fn for_basis(basis: &MultBasis) -> Self {
        ExtBlochSum::zero(basis.m(), basis.rank())
    }

    /// Normal form of Σ n_i (e_i, f_i) + Σ χ(c_j).
    pub fn from_raw(m: u64, rank: usize, terms: &[(i64, Flattening)], chis: &[ExtElement]) -> Self {
        let mut s = ExtBlochSum::zero(m, rank);
        for (n, fl) in terms {
            s.add_term(*n, fl);
        }
        for c in chis {
            s.add_chi(c);
        }
        s
    }

    pub fn single(m: u64, fl: &Flattening) -> Self {
        ExtBlochSum::from_raw(m, fl.rank(), &[(1, fl.clone())], &[])
    }

    /// The pure χ-element χ(e).
    pub fn chi_of(m: u64, e: &ExtElement) -> Self {
        ExtBlochSum::from_raw(m, e.rank(), &[], std::slice::from_ref(e))
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Flattening, i64)> {
        self.terms.iter().map(|(f, &n)| (f, n))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn chi_part(&self) -> &ExtElement {
        &self.chi
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.chi.is_zero()
    }

    pub fn add_term(&mut self, n: i64, fl: &Flattening) {
        if n == 0 {
            return;
        }
        let (base, p, q) = fl.base(self.m);
        if p != 0 || q != 0 {
            let c = base.e.scale(q).sub(&base.f.scale(p)).add(&ExtElement::iota(p * q, self.m, self.rank));
            self.add_chi(&c.scale(n));
        }
        let entry = self.terms.entry(base).or_insert(0);
        *entry += n;
        if *entry == 0 {
            self.terms.retain(|_, v| *v != 0);
        }
    }

    pub fn add_chi(&mut self, c: &ExtElement) {
        self.chi = self.chi.add(c).reduce_k(2 * self.m as i64);
    }

    pub fn add(&self, o: &ExtBlochSum) -> ExtBlochSum {
        let mut s = self.clone();
        for (fl, n) in o.terms() {
            s.add_term(n, fl);
        }
        s.add_chi(&o.chi);
        s
    }

    pub fn scale(&self, n: i64) -> ExtBlochSum {
        let mut s = ExtBlochSum::zero(self.m, self.rank);
        if n == 0 {
            return s;
        }
        s.terms = self.terms.iter().map(|(f, &c)| (f.clone(), c * n)).collect();
        s.add_chi(&self.chi.scale(n));
        s
    }

    pub fn neg(&self) -> ExtBlochSum {
        self.scale(-1)
    }

    pub fn sub(&self, o: &ExtBlochSum) -> ExtBlochSum {
        self.add(&o.neg())
    }

    /// ν̂ = Σ n e ∧ f + c ∧ ι(1) for the χ-part c.
    pub fn nu_hat(&self) -> WedgeElement {
        let mut w = WedgeElement::new();
        for (fl, n) in self.terms() {
            w.push(n, fl.e.clone(), fl.f.clone());
        }
        if !self.chi.is_zero() {
            w.push(1, self.chi.clone(), ExtElement::iota(1, self.m, self.rank));
        }
        w
    }

    pub fn is_in_bhat(&self, basis: &MultBasis) -> WedgeVerdict {
        basis.wedge_verdict(&self.nu_hat())
    }

    /// The image Σ n [π(e)] in the pre-Bloch group; χ-parts vanish.
    pub fn to_bloch(&self, basis: &MultBasis) -> BlochSum {
        let mut b = BlochSum::new();
        for (fl, n) in self.terms() {
            b.push(n, fl.z(basis));
        }
        b
    }

    /// The same element over a basis that extends the current one.
    pub fn widened(&self, rank: usize) -> ExtBlochSum {
        let grow = |e: &ExtElement| {
            let mut r = e.r.clone();
            r.resize(rank, 0);
            ExtElement { k: e.k, r }
        };
        let mut s = ExtBlochSum::zero(self.m, rank);
        for (fl, n) in self.terms() {
            s.terms.insert(Flattening { e: grow(&fl.e), f: grow(&fl.f) }, n);
        }
        s.chi = grow(&self.chi);
        s
    }

    /// Every term checked to be a flattening over the basis.
    pub fn validate(&self, basis: &MultBasis) -> Result<()> {
        if basis.m() != self.m || basis.rank() != self.rank {
            return Err(Error::InvalidInput("sum and basis disagree on (m, rank)".into()));
        }
        for (fl, _) in self.terms() {
            Flattening::new(basis, fl.e.clone(), fl.f.clone())?;
        }
        Ok(())
    }
}

impl fmt::Display for ExtBlochSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.terms().map(|(fl, n)| format!("{n}{fl}")).collect();
        if !self.chi.is_zero() {
            parts.push(format!("chi{}", self.chi));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// A formal sum Σ n_i [z_i] in the pre-Bloch group.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlochSum {
    terms: Vec<(i64, FieldElement)>,
}

impl BlochSum {
    pub fn new() -> Self {
        BlochSum { terms: vec![] }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, FieldElement)>) -> Result<Self> {
        let mut b = BlochSum::new();
        for (n, z) in terms {
            check_nondegenerate(&z)?;
            b.push(n, z);
        }
        Ok(b)
    }

    fn push(&mut self, n: i64, z: FieldElement) {
        if n == 0 {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.1 == z) {
            t.0 += n;
        } else {
            self.terms.push((n, z));
        }
        self.terms.retain(|t| t.0 != 0);
        self.terms.sort_by_key(|a| a.1.coeffs());
    }

    pub fn terms(&self) -> &[(i64, FieldElement)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &BlochSum) -> BlochSum {
        let mut s = self.clone();
        for (n, z) in &o.terms {
            s.push(*n, z.clone());
        }
        s
    }

    pub fn scale(&self, n: i64) -> BlochSum {
        let mut s = BlochSum::new();
        for (c, z) in &self.terms {
            s.push(c * n, z.clone());
        }
        s
    }

    /// ν = Σ n z ∧ (1 - z) in coordinates over the basis.
    pub fn nu(&self, basis: &MultBasis) -> Result<WedgeElement> {
        let mut w = WedgeElement::new();
        for (n, z) in &self.terms {
            w.push(*n, basis.log_lift(z)?, basis.log_lift(&z.one_minus())?);
        }
        Ok(w)
    }

    /// Membership in B(F): ν = 0 in ∧²(F*), where the w̃ coordinate is
    /// only defined mod m.
    pub fn is_in_b(&self, basis: &MultBasis) -> Result<WedgeVerdict> {
        let z = self.nu(basis)?.is_zero_mod_torsion(basis.m());
        Ok(WedgeVerdict { is_zero: z, caveat: !z && basis.caveat() })
    }

    /// Termwise image under the automorphism sending x to `image`.
    pub fn galois_apply(&self, image: &FieldElement) -> BlochSum {
        let mut s = BlochSum::new();
        for (n, z) in &self.terms {
            s.push(*n, z.apply(image));
        }
        s
    }
}

impl fmt::Display for BlochSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(n, z)| if *n == 1 { format!("[{z}]") } else { format!("{n}[{z}]") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// (x, y, y/x, (1 - 1/x)/(1 - 1/y), (1 - x)/(1 - y))
pub fn five_term(x: &FieldElement, y: &FieldElement) -> Result<[FieldElement; 5]> {
    check_nondegenerate(x)?;
    check_nondegenerate(y)?;
    if x == y {
        return Err(Error::DegenerateTuple("x = y".into()));
    }
    let one = x.field().one();
    let x2 = y.div(x)?;
    let x3 = one.sub(&x.inv()?).div(&one.sub(&y.inv()?))?;
    let x4 = x.one_minus().div(&y.one_minus())?;
    for t in [&x2, &x3, &x4] {
        check_nondegenerate(t)?;
    }
    Ok([x.clone(), y.clone(), x2, x3, x4])
}

/// Complete two flattenings to a lifted five-term relation. f_2 is taken as
/// the basis logarithm of 1 - x_1/x_0; the rest is forced.
pub fn lift_five_term(basis: &MultBasis, fl0: &Flattening, fl1: &Flattening) -> Result<[Flattening; 5]> {
    let x0 = fl0.z(basis);
    let x1 = fl1.z(basis);
    let xs = five_term(&x0, &x1)?;
    let (e0, f0, e1, f1) = (&fl0.e, &fl0.f, &fl1.e, &fl1.f);
    let e2 = e1.sub(e0);
    let f2 = basis.log_lift(&xs[2].one_minus())?;
    let e3 = e1.sub(e0).sub(f1).add(f0);
    let f3 = f2.sub(f1);
    let e4 = f0.sub(f1);
    let f4 = f2.sub(f1).add(e0);
    let out = [
        fl0.clone(),
        fl1.clone(),
        Flattening { e: e2, f: f2 },
        Flattening { e: e3, f: f3 },
        Flattening { e: e4, f: f4 },
    ];
    for (fl, x) in out.iter().zip(&xs) {
        let checked = Flattening::new(basis, fl.e.clone(), fl.f.clone())?;
        if checked.z(basis) != *x {
            return Err(Error::NotAFlattening(format!("{fl} does not lie over {x}")));
        }
    }
    Ok(out)
}

/// ρ̂ = Σ (-1)^i (e_i, f_i)
pub fn rho_hat(m: u64, rel: &[Flattening; 5]) -> ExtBlochSum {
    let raw: Vec<(i64, Flattening)> =
        rel.iter().enumerate().map(|(i, f)| (if i % 2 == 0 { 1 } else { -1 }, f.clone())).collect();
    ExtBlochSum::from_raw(m, rel[0].rank(), &raw, &[])
}

/// A lift of an element of B(F) to the extended Bloch group: basis
/// flattenings, then a χ-term cancelling the w̃ ∧ p̃_j part of ν̂. Defined up
/// to χ of multiples of w̃, which is torsion.
pub fn lift_to_bhat(basis: &MultBasis, s: &BlochSum) -> Result<ExtBlochSum> {
    if !s.is_in_b(basis)?.is_zero {
        return Err(Error::NotApplicable("element is not in the Bloch group".into()));
    }
    let mut out = ExtBlochSum::for_basis(basis);
    for (n, z) in s.terms() {
        out.add_term(*n, &Flattening::of(basis, z)?);
    }
    let inv = out.nu_hat().invariants();
    let m = basis.m() as i64;
    let mut c = ExtElement::zero(basis.rank());
    for j in 1..=basis.rank() {
        let v = inv.pairs.get(&(0, j)).copied().unwrap_or(0);
        debug_assert_eq!(v.rem_euclid(m), 0);
        c.r[j - 1] = v / m;
    }
    out.add_chi(&c);
    debug_assert!(out.nu_hat().is_zero());
    Ok(out)
}

/// A homomorphism of extensions E → E' over a field map, given on the free
/// generators: w̃ ↦ w_image, p̃_j ↦ p_images[j], and ι(1) ↦ unit·ι(1).
#[derive(Clone, Debug)]
pub struct Covering {
    pub unit: i64,
    pub w_image: ExtElement,
    pub p_images: Vec<ExtElement>,
    pub target_m: u64,
}

impl Covering {
    pub fn apply(&self, e: &ExtElement) -> ExtElement {
        let mut acc = self.w_image.scale(e.k);
        for (img, &r) in self.p_images.iter().zip(&e.r) {
            if r != 0 {
                acc = acc.add(&img.scale(r));
            }
        }
        acc
    }

    /// Push a sum forward. χ(c) = (c, f + 1) - (c, f) goes to
    /// (Ψc, Ψf + unit) - (Ψc, Ψf) = χ(unit·Ψc).
    pub fn apply_sum(&self, s: &ExtBlochSum) -> ExtBlochSum {
        let rank = self.w_image.rank();
        let mut out = ExtBlochSum::zero(self.target_m, rank);
        for (fl, n) in s.terms() {
            out.add_term(n, &Flattening { e: self.apply(&fl.e), f: self.apply(&fl.f) });
        }
        out.add_chi(&self.apply(s.chi_part()).scale(self.unit));
        out
    }
}

/// The covering of E over the automorphism x ↦ image. With τ(w) = w^a it
/// sends w̃ to j·w̃ where j ≡ a mod m is the symmetric representative, and
/// p̃_j to the basis logarithm of τ(p_j).
pub fn galois_covering(basis: &MultBasis, image: &FieldElement) -> Result<Covering> {
    let m = basis.m() as i64;
    let tw = basis.log_lift(&basis.torsion_gen().apply(image))?;
    let mut j = tw.k.rem_euclid(m);
    if j > m / 2 {
        j -= m;
    }
    let p_images = basis.gens().iter().map(|p| basis.log_lift(&p.apply(image))).collect::<Result<Vec<_>>>()?;
    Ok(Covering { unit: j, w_image: ExtElement::new(j, vec![0; basis.rank()]), p_images, target_m: basis.m() })
}

/// Galois action on extended sums, realized by the covering over τ.
pub fn galois_apply(basis: &MultBasis, image: &FieldElement, s: &ExtBlochSum) -> Result<ExtBlochSum> {
    Ok(galois_covering(basis, image)?.apply_sum(s))
}

/// The same free generators over the extension generated by w⁻¹, and the
/// covering E_w → E_{w⁻¹}: w̃ ↦ -w̃', p̃_j ↦ p̃'_j, ι(1) ↦ -ι(1).
pub fn inverse_generator(basis: &MultBasis) -> Result<(MultBasis, Covering)> {
    let w_inv = basis.torsion_gen().inv()?;
    let nf = basis.field().with_torsion_generator(&w_inv)?;
    let gens: Vec<FieldElement> = basis.gens().iter().map(|g| nf.element(g.coeffs().as_slice())).collect();
    let nb = if basis.is_symbolic() { MultBasis::symbolic(&nf, gens)? } else { MultBasis::new(&nf, gens, basis.saturated_assertion())? };
    let r = basis.rank();
    let p_images = (0..r).map(|j| nb.p_tilde(j)).collect();
    Ok((nb, Covering { unit: -1, w_image: ExtElement::new(-1, vec![0; r]), p_images, target_m: basis.m() }))
}

/// An element of the PSL variant, where flattenings satisfy ±π(e) ± π(f) = 1.
/// Translates are by ½ = (m/2, 0); the χ̄-part lives in E/Z.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PslSum {
    m: u64,
    rank: usize,
    terms: BTreeMap<Flattening, i64>,
    chi: ExtElement,
}

impl PslSum {
    pub fn zero(m: u64, rank: usize) -> Self {
        PslSum { m, rank, terms: BTreeMap::new(), chi: ExtElement::zero(rank) }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Flattening, i64)> {
        self.terms.iter().map(|(f, &n)| (f, n))
    }

    pub fn chi_part(&self) -> &ExtElement {
        &self.chi
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.chi.is_zero()
    }

    /// (e + p/2, f + q/2) - (e, f) = χ̄(q·e - p·f - pq/2)
    pub fn add_term(&mut self, n: i64, fl: &Flattening) {
        if n == 0 {
            return;
        }
        let half = self.m as i64 / 2;
        let (base, p, q) = split_translate(fl, half);
        if p != 0 || q != 0 {
            let c = base.e.scale(q).sub(&base.f.scale(p)).sub(&ExtElement::half(self.m, self.rank).scale(p * q));
            self.add_chi(&c.scale(n));
        }
        let entry = self.terms.entry(base).or_insert(0);
        *entry += n;
        if *entry == 0 {
            self.terms.retain(|_, v| *v != 0);
        }
    }

    pub fn add_chi(&mut self, c: &ExtElement) {
        self.chi = self.chi.add(c).reduce_k(self.m as i64);
    }

    pub fn sub(&self, o: &PslSum) -> PslSum {
        let mut s = self.clone();
        for (fl, n) in o.terms() {
            s.add_term(-n, fl);
        }
        s.add_chi(&o.chi.neg());
        s
    }

    /// Signs (s_e, s_f) with s_e·π(e) + s_f·π(f) = 1.
    pub fn signs(basis: &MultBasis, fl: &Flattening) -> Result<(i64, i64)> {
        let a = basis.pi(&fl.e);
        let b = basis.pi(&fl.f);
        let one = basis.field().one();
        for (se, sf) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let lhs = a.scale(&rug::Rational::from(se)).add(&b.scale(&rug::Rational::from(sf)));
            if lhs == one {
                return Ok((se, sf));
            }
        }
        Err(Error::NotAFlattening(format!("{fl} is not an odd flattening")))
    }

    /// Whether this element lifts to the SL version: subtract the projection
    /// of a lift of its image in the pre-Bloch group; what remains is χ̄(x)
    /// for x ∈ E/Z = F*, and the element lifts iff x is a square.
    pub fn lift_obstruction(&self, basis: &MultBasis) -> Result<LiftObstruction> {
        let mut tau = ExtBlochSum::for_basis(basis);
        for (fl, n) in self.terms() {
            let (se, _) = PslSum::signs(basis, fl)?;
            let z = basis.pi(&fl.e).scale(&rug::Rational::from(se));
            tau.add_term(n, &Flattening::of(basis, &z)?);
        }
        let x = self.sub(&psl_project(&tau));
        if !x.terms.is_empty() {
            return Err(Error::NotApplicable("difference is not a pure χ̄ element".into()));
        }
        let value = basis.pi(&x.chi);
        let lifts = psl_lifts(&value, basis)?;
        Ok(LiftObstruction { x: value, lifts })
    }
}

/// Result of the PSL lifting test.
#[derive(Clone, Debug)]
pub struct LiftObstruction {
    pub x: FieldElement,
    pub lifts: bool,
}

/// The map p from the SL to the PSL version: terms unchanged, χ(c) ↦ χ̄(2c).
pub fn psl_project(s: &ExtBlochSum) -> PslSum {
    let mut out = PslSum::zero(s.m(), s.rank());
    for (fl, n) in s.terms() {
        out.add_term(n, fl);
    }
    out.add_chi(&s.chi_part().scale(2));
    out
}

/// x lifts iff it is a square in F. Over a 2-saturated basis this reads off
/// the coordinates: k and all r_j even. Otherwise an exact square root is
/// attempted.
pub fn psl_lifts(x: &FieldElement, basis: &MultBasis) -> Result<bool> {
    if basis.is_two_saturated() {
        let c = basis.log_lift(x)?;
        Ok(c.k % 2 == 0 && c.r.iter().all(|r| r % 2 == 0))
    } else {
        Ok(x.is_square())
    }
}
