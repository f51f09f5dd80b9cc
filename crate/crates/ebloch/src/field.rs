//! Number fields Q[x]/(p), their complex embeddings, and exact elements.
//!
//! Anything found numerically (roots of unity, automorphisms, membership of
//! an algebraic number) is recovered by solving a Vandermonde system at a
//! precision large enough for a proven denominator bound, rounding, and then
//! checking the candidate exactly. Candidates that fail the exact check are
//! discarded; they are never returned.

use crate::error::{Error, Result};
use crate::numeric::{best_rational, pi, solve_cx, Cx, Precision};
use crate::poly::{charpoly, det, euler_phi, prime_factors, QPoly};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use std::fmt;
use std::sync::Arc;

/// Precision at which roots are stored; higher requests refine by Newton.
const ROOT_BITS: u32 = 512;

/// Cap on the number of per-slot assignments tried by a reconstruction search.
const ASSIGNMENT_CAP: usize = 200_000;

struct FieldData {
    poly: QPoly,
    r1: usize,
    r2: usize,
    roots: Vec<Cx>,
    m: u64,
    w: QPoly,
    // x·scale is integral; |disc| of the integral polynomial it satisfies
    scale: Integer,
    disc: Integer,
}

/// A number field Q[x]/(p) with p monic and irreducible. Cloning is cheap.
#[derive(Clone)]
pub struct NumberField(Arc<FieldData>);

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.poly == other.0.poly
    }
}

impl Eq for NumberField {}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NumberField({})", self.0.poly)
    }
}

/// A verified torsion hint: the order of μ_F and a claimed generator.
#[derive(Clone, Debug)]
pub struct TorsionHint {
    pub order: u64,
    pub generator: Vec<Rational>,
}

/// Result of a membership search.
#[derive(Clone, Debug)]
pub struct Membership {
    pub element: Option<FieldElement>,
    /// Set when an absent verdict relies on a search that was cut short.
    pub caveat: bool,
}

impl NumberField {
    /// Build Q[x]/(p). The polynomial is normalized to be monic.
    pub fn new(p: &QPoly) -> Result<Self> {
        Self::with_hint(p, None)
    }

    pub fn with_hint(p: &QPoly, hint: Option<&TorsionHint>) -> Result<Self> {
        let d = match p.degree() {
            None | Some(0) => return Err(Error::DegreeZero),
            Some(d) => d,
        };
        let poly = p.monic();
        if !poly.is_squarefree() {
            return Err(Error::NotSquarefree);
        }
        let mut scale = Integer::from(1);
        for c in poly.coeffs() {
            scale.lcm_mut(c.denom());
        }
        // q(y) = scale^d p(y/scale) is monic integral
        let q = integral_scaled(&poly, &scale);
        let disc = discriminant_abs(&q);
        let r1 = poly.count_real_roots();
        if !(d - r1).is_multiple_of(2) {
            return Err(Error::InvalidInput("inconsistent real root count".into()));
        }
        let r2 = (d - r1) / 2;
        let roots = order_roots(&poly, poly.complex_roots(ROOT_BITS), r1)?;
        let data = FieldData { poly, r1, r2, roots, m: 2, w: QPoly::from_ints(&[-1]), scale, disc };
        if d <= 16 && !roots_irreducible(&data, &q) {
            return Err(Error::NotIrreducible);
        }
        let nf0 = NumberField(Arc::new(data));
        let (m, w) = nf0.search_roots_of_unity()?;
        let nf = nf0.rebuilt(m, w.c);
        if let Some(h) = hint {
            let g = nf.element(&h.generator);
            if h.order != m || !g.is_primitive_root_of_unity(m) {
                return Err(Error::ReconstructionFailed(format!(
                    "torsion hint (order {}, generator {}) rejected; detected order {}",
                    h.order, g, m
                )));
            }
            return Ok(nf.rebuilt(m, g.c));
        }
        Ok(nf)
    }

    fn rebuilt(&self, m: u64, w: QPoly) -> NumberField {
        let d = &self.0;
        NumberField(Arc::new(FieldData {
            poly: d.poly.clone(),
            r1: d.r1,
            r2: d.r2,
            roots: d.roots.clone(),
            m,
            w,
            scale: d.scale.clone(),
            disc: d.disc.clone(),
        }))
    }

    pub fn from_ints(c: &[i64]) -> Result<Self> {
        NumberField::new(&QPoly::from_ints(c))
    }

    pub fn poly(&self) -> &QPoly {
        &self.0.poly
    }

    pub fn degree(&self) -> usize {
        self.0.roots.len()
    }

    /// (r1, r2)
    pub fn signature(&self) -> (usize, usize) {
        (self.0.r1, self.0.r2)
    }

    /// Number of regulator slots: one per real embedding and per conjugate pair.
    pub fn slot_count(&self) -> usize {
        self.0.r1 + self.0.r2
    }

    /// Order of μ_F.
    pub fn torsion_order(&self) -> u64 {
        self.0.m
    }

    /// The chosen generator of μ_F.
    pub fn torsion_generator(&self) -> FieldElement {
        FieldElement { field: self.clone(), c: self.0.w.clone() }
    }

    /// The same field with a different generator of μ_F.
    pub fn with_torsion_generator(&self, w: &FieldElement) -> Result<Self> {
        if !w.is_primitive_root_of_unity(self.0.m) {
            return Err(Error::InvalidInput(format!("{w} is not a primitive {}-th root of unity", self.0.m)));
        }
        Ok(self.rebuilt(self.0.m, w.c.clone()))
    }

    /// All d roots in the fixed order: real ascending, then upper half plane
    /// by real then imaginary part, then the conjugates of the latter.
    pub fn roots_at(&self, bits: u32) -> Vec<Cx> {
        let stored = &self.0.roots;
        if bits <= ROOT_BITS {
            return stored.iter().map(|r| r.with_prec(bits)).collect();
        }
        let dp = self.0.poly.derivative();
        stored
            .iter()
            .map(|r| {
                let mut cur = ROOT_BITS;
                let mut x = r.clone();
                while cur < bits {
                    cur = (cur * 2).min(bits);
                    x = x.with_prec(cur);
                    for _ in 0..2 {
                        let dv = dp.eval_cx(&x);
                        x = x.sub(&self.0.poly.eval_cx(&x).div(&dv));
                    }
                }
                x
            })
            .collect()
    }

    /// Root index of slot s in the full root list.
    pub fn slot_root_index(&self, slot: usize) -> usize {
        slot
    }

    /// Index of the complex conjugate of root i.
    pub fn conjugate_index(&self, i: usize) -> usize {
        let (r1, r2) = (self.0.r1, self.0.r2);
        if i < r1 {
            i
        } else if i < r1 + r2 {
            i + r2
        } else {
            i - r2
        }
    }

    pub fn is_real_slot(&self, slot: usize) -> bool {
        slot < self.0.r1
    }

    pub fn embedding(&self, slot: usize, precision: Precision) -> Result<EmbeddingContext> {
        if slot >= self.slot_count() {
            return Err(Error::InvalidInput(format!("slot {slot} out of range")));
        }
        Ok(EmbeddingContext { field: self.clone(), root_index: slot, precision, conjugate_flag: true })
    }

    pub fn embeddings(&self, precision: Precision) -> Vec<EmbeddingContext> {
        (0..self.slot_count())
            .map(|s| EmbeddingContext { field: self.clone(), root_index: s, precision, conjugate_flag: true })
            .collect()
    }

    /// The embedding whose root is nearest to the given approximation.
    /// Points in the lower half plane select the conjugate root.
    pub fn embedding_near(&self, re: f64, im: f64, precision: Precision) -> EmbeddingContext {
        let target = Cx::from_f64(64, re, im);
        let roots = self.roots_at(64);
        let best = (0..roots.len())
            .min_by(|&a, &b| {
                let da = roots[a].sub(&target).abs();
                let db = roots[b].sub(&target).abs();
                da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0);
        EmbeddingContext {
            field: self.clone(),
            root_index: best,
            precision,
            conjugate_flag: best < self.slot_count(),
        }
    }

    pub fn element(&self, coeffs: &[Rational]) -> FieldElement {
        FieldElement::new(self, QPoly::new(coeffs.to_vec()))
    }

    pub fn element_from_ints(&self, coeffs: &[i64]) -> FieldElement {
        FieldElement::new(self, QPoly::from_ints(coeffs))
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement { field: self.clone(), c: QPoly::from_ints(&[n]) }
    }

    pub fn from_rational(&self, q: Rational) -> FieldElement {
        FieldElement { field: self.clone(), c: QPoly::constant(q) }
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    pub fn zero(&self) -> FieldElement {
        self.from_int(0)
    }

    /// The class of x.
    pub fn gen(&self) -> FieldElement {
        FieldElement::new(self, QPoly::monomial(1))
    }

    /// Denominator bound for coefficients of an element h with D·h integral.
    fn coefficient_bound(&self, integral_multiplier: &Integer) -> Integer {
        let d = self.degree() as u32;
        let s = self.0.scale.clone().pow(d.saturating_sub(1));
        let b = Integer::from(&self.0.disc * &s) * integral_multiplier;
        b.max(Integer::from(1))
    }

    /// Bits needed to round coefficients with denominators up to `bound`.
    fn reconstruction_bits(&self, bound: &Integer) -> u32 {
        let rmax = self.0.roots.iter().map(|r| r.abs().to_f64()).fold(1.0, f64::max);
        let cond = (self.degree() as f64) * (1.0 + rmax).log2() * 2.0;
        (2 * bound.significant_bits() + 160 + cond.ceil() as u32).max(256)
    }

    /// Solve for the element taking the given values at all d roots, rounding
    /// coefficients to rationals with denominators at most `bound`. The
    /// caller checks the result exactly.
    fn from_root_values(&self, roots: &[Cx], vals: &[Cx], bound: &Integer) -> Option<FieldElement> {
        let d = self.degree();
        let bits = roots[0].prec();
        let mut a = Vec::with_capacity(d);
        for r in roots {
            let mut row = Vec::with_capacity(d);
            let mut pw = Cx::from_int(bits, 1);
            for _ in 0..d {
                row.push(pw.clone());
                pw = pw.mul(r);
            }
            a.push(row);
        }
        let c = solve_cx(a, vals.to_vec())?;
        let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32) / 3));
        let mut coeffs = Vec::with_capacity(d);
        for ci in &c {
            if Float::with_val(bits, ci.im.abs_ref()) > tol {
                return None;
            }
            coeffs.push(best_rational(&ci.re, bound));
        }
        Some(self.element(&coeffs))
    }

    /// Expand per-slot values to all d roots using conjugation.
    fn slot_values_to_roots(&self, slot_vals: &[Cx]) -> Vec<Cx> {
        let (r1, r2) = (self.0.r1, self.0.r2);
        let mut out: Vec<Cx> = slot_vals.to_vec();
        for i in 0..r2 {
            out.push(slot_vals[r1 + i].conj());
        }
        out
    }

    /// Enumerate per-slot choices, reconstruct, and keep candidates passing
    /// `accept`. Returns the survivors and whether the search was truncated.
    fn search<F>(&self, choices: &[Vec<Cx>], bound: &Integer, accept: F) -> (Vec<FieldElement>, bool)
    where
        F: Fn(&FieldElement) -> bool,
    {
        let total: usize = choices.iter().map(|c| c.len()).try_fold(1usize, |acc, n| acc.checked_mul(n)).unwrap_or(usize::MAX);
        if choices.iter().any(|c| c.is_empty()) {
            return (vec![], false);
        }
        let truncated = total > ASSIGNMENT_CAP;
        let bits = choices[0][0].prec();
        let roots = self.roots_at(bits);
        let mut found: Vec<FieldElement> = vec![];
        let mut idx = vec![0usize; choices.len()];
        for _ in 0..total.min(ASSIGNMENT_CAP) {
            let slot_vals: Vec<Cx> = idx.iter().enumerate().map(|(s, &k)| choices[s][k].clone()).collect();
            let vals = self.slot_values_to_roots(&slot_vals);
            if let Some(h) = self.from_root_values(&roots, &vals, bound) {
                if !found.contains(&h) && accept(&h) {
                    found.push(h);
                }
            }
            for s in (0..idx.len()).rev() {
                idx[s] += 1;
                if idx[s] < choices[s].len() {
                    break;
                }
                idx[s] = 0;
            }
        }
        (found, truncated)
    }

    fn search_roots_of_unity(&self) -> Result<(u64, FieldElement)> {
        let d = self.degree() as u64;
        let minus_one = self.from_int(-1);
        if self.0.r1 > 0 {
            return Ok((2, minus_one));
        }
        let bound = self.coefficient_bound(&Integer::from(1));
        let bits = self.reconstruction_bits(&bound);
        let p = pi(bits);
        // phi(m) >= sqrt(m/2), so m <= 2 d^2
        let mut candidates: Vec<u64> = (4..=2 * d * d + 2).filter(|m| m % 2 == 0 && d.is_multiple_of(euler_phi(*m))).collect();
        candidates.sort_unstable_by(|a, b| b.cmp(a));
        for m in candidates {
            let units: Vec<u64> = (1..m).filter(|a| gcd_u64(*a, m) == 1).collect();
            let zeta = |a: u64| {
                let t = Float::with_val(bits, &p * 2u32) * a / m;
                Cx::new(Float::with_val(bits, t.cos_ref()), Float::with_val(bits, t.sin_ref()))
            };
            // slot 0 is pinned to exp(2πi/m); any generator has a power of this form
            let mut choices = vec![vec![zeta(1)]];
            for _ in 1..self.0.r2 {
                choices.push(units.iter().map(|&a| zeta(a)).collect());
            }
            let (found, _) = self.search(&choices, &bound, |h| h.is_primitive_root_of_unity(m));
            if let Some(w0) = found.first() {
                let mut gens: Vec<FieldElement> = vec![];
                for &a in &units {
                    gens.push(w0.pow(a as i64)?);
                }
                gens.sort_by_key(|g| g.canonical_key());
                return Ok((m, gens.swap_remove(0)));
            }
        }
        Ok((2, minus_one))
    }

    /// All elements h of F with g(h) = 0, each verified exactly.
    pub fn roots_in_field(&self, g: &QPoly) -> (Vec<FieldElement>, bool) {
        let Some(k) = g.degree() else { return (vec![], false) };
        if k == 0 || !self.degree().is_multiple_of(k) {
            return (vec![], false);
        }
        let gm = g.monic();
        let mut mult = Integer::from(1);
        for c in gm.coeffs() {
            mult.lcm_mut(c.denom());
        }
        let bound = self.coefficient_bound(&mult);
        let bits = self.reconstruction_bits(&bound);
        let groots = gm.complex_roots(bits);
        let n_real = gm.count_real_roots();
        let mut by_im: Vec<Cx> = groots.clone();
        by_im.sort_by(|a, b| {
            let (x, y) = (Float::with_val(bits, a.im.abs_ref()), Float::with_val(bits, b.im.abs_ref()));
            x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal)
        });
        let reals: Vec<Cx> = by_im[..n_real].iter().map(|r| Cx::real(r.re.clone())).collect();
        let nonreal: Vec<Cx> = by_im[n_real..].to_vec();
        let mut choices = vec![];
        for s in 0..self.slot_count() {
            if self.is_real_slot(s) {
                choices.push(reals.clone());
            } else {
                let mut all = reals.clone();
                all.extend(nonreal.iter().cloned());
                choices.push(all);
            }
        }
        let d = self.degree();
        let target_cp = {
            let mut acc = QPoly::one();
            for _ in 0..d / k {
                acc = acc.mul(&gm);
            }
            acc
        };
        let (mut found, truncated) = self.search(&choices, &bound, |h| {
            gm.coeffs().iter().rev().fold(h.field.zero(), |acc, c| acc.mul(h).add(&h.field.from_rational(c.clone()))).is_zero()
                && h.charpoly() == target_cp
        });
        found.sort_by_key(|h| h.canonical_key());
        (found, truncated)
    }

    /// Find an element of F with minimal polynomial g, optionally one whose
    /// value at some embedding matches `approx`.
    pub fn element_in_field(&self, g: &QPoly, approx: Option<(f64, f64)>) -> Membership {
        let (found, truncated) = self.roots_in_field(g);
        let chosen = match approx {
            None => found.into_iter().next(),
            Some((re, im)) => {
                let t = Cx::from_f64(128, re, im);
                let tol = Float::with_val(128, 1e-6);
                found.into_iter().find(|h| {
                    let roots = self.roots_at(128);
                    roots.iter().any(|r| h.eval_at(r).close_to(&t, &tol))
                })
            }
        };
        let caveat = chosen.is_none() && truncated;
        Membership { element: chosen, caveat }
    }

    /// The images of x under all automorphisms of F, identity first.
    pub fn automorphisms(&self) -> Result<Vec<FieldElement>> {
        let (mut found, truncated) = self.roots_in_field(&self.0.poly);
        let x = self.gen();
        if !found.contains(&x) {
            return Err(Error::ReconstructionFailed("identity not recovered".into()));
        }
        if truncated {
            return Err(Error::ReconstructionFailed("automorphism search truncated".into()));
        }
        found.retain(|h| *h != x);
        found.insert(0, x);
        Ok(found)
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn integral_scaled(p: &QPoly, scale: &Integer) -> QPoly {
    let d = p.degree().unwrap_or(0);
    let c: Vec<Rational> = (0..=d)
        .map(|i| p.coeff(i) * Rational::from(scale.clone().pow((d - i) as u32)))
        .collect();
    QPoly::new(c)
}

/// |Res(q, q')| for monic q, which equals |disc q|.
fn discriminant_abs(q: &QPoly) -> Integer {
    let d = q.degree().unwrap_or(0);
    if d <= 1 {
        return Integer::from(1);
    }
    let dq = q.derivative();
    let n = 2 * d - 1;
    let mut m = vec![vec![Rational::new(); n]; n];
    for r in 0..d - 1 {
        for (j, c) in q.coeffs().iter().rev().enumerate() {
            m[r][r + j] = c.clone();
        }
    }
    for r in 0..d {
        for (j, c) in dq.coeffs().iter().rev().enumerate() {
            m[d - 1 + r][r + j] = c.clone();
        }
    }
    let res = det(&m);
    Integer::from(res.numer().abs_ref())
}

/// Order numerically computed roots; the r1 closest to the real axis are
/// made exactly real.
fn order_roots(p: &QPoly, mut roots: Vec<Cx>, r1: usize) -> Result<Vec<Cx>> {
    let bits = roots.first().map(|r| r.prec()).unwrap_or(ROOT_BITS);
    let cmp_f = |a: &Float, b: &Float| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal);
    roots.sort_by(|a, b| cmp_f(&Float::with_val(bits, a.im.abs_ref()), &Float::with_val(bits, b.im.abs_ref())));
    let dp = p.derivative();
    let mut reals: Vec<Cx> = roots[..r1]
        .iter()
        .map(|r| {
            let mut x = Cx::real(r.re.clone());
            for _ in 0..3 {
                x = x.sub(&p.eval_cx(&x).div(&dp.eval_cx(&x)));
            }
            Cx::real(x.re)
        })
        .collect();
    reals.sort_by(|a, b| cmp_f(&a.re, &b.re));
    let mut upper: Vec<Cx> = roots[r1..].iter().filter(|r| r.im > 0).cloned().collect();
    if upper.len() * 2 != roots.len() - r1 {
        return Err(Error::PrecisionExhausted("root isolation failed to pair conjugates".into()));
    }
    upper.sort_by(|a, b| cmp_f(&a.re, &b.re).then_with(|| cmp_f(&a.im, &b.im)));
    let mut out = reals;
    out.extend(upper.iter().cloned());
    out.extend(upper.iter().map(|r| r.conj()));
    Ok(out)
}

/// Exact irreducibility test: no conjugation-closed proper subset of roots
/// yields an integral factor of the scaled polynomial.
fn roots_irreducible(data: &FieldData, q: &QPoly) -> bool {
    let d = data.roots.len();
    if d <= 1 {
        return true;
    }
    let (r1, r2) = (data.r1, data.r2);
    let norm_bits: u32 = q.coeffs().iter().map(|c| c.numer().significant_bits()).max().unwrap_or(1);
    let bits = (2 * (d as u32 + norm_bits) + 128).max(ROOT_BITS);
    let nf_roots = {
        let tmp = NumberField(Arc::new(FieldData {
            poly: data.poly.clone(),
            r1,
            r2,
            roots: data.roots.clone(),
            m: 2,
            w: QPoly::from_ints(&[-1]),
            scale: data.scale.clone(),
            disc: data.disc.clone(),
        }));
        tmp.roots_at(bits)
    };
    let scale = Float::with_val(bits, &data.scale);
    let scaled: Vec<Cx> = nf_roots.iter().map(|r| r.scale(&scale)).collect();
    let units = r1 + r2;
    for mask in 1u64..(1u64 << units) - 1 {
        let mut size = 0;
        for u in 0..units {
            if mask >> u & 1 == 1 {
                size += if u < r1 { 1 } else { 2 };
            }
        }
        if size * 2 > d {
            continue;
        }
        let mut coeffs = vec![Cx::from_int(bits, 1)];
        let mut push_root = |r: &Cx| {
            let mut next = vec![Cx::zero(bits); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] = next[i + 1].add(c);
                next[i] = next[i].sub(&c.mul(r));
            }
            coeffs = next;
        };
        for u in 0..units {
            if mask >> u & 1 == 1 {
                if u < r1 {
                    push_root(&scaled[u]);
                } else {
                    push_root(&scaled[u]);
                    push_root(&scaled[u + r2]);
                }
            }
        }
        let cand: Vec<Rational> = coeffs.iter().map(|c| Rational::from(crate::numeric::round_int(&c.re))).collect();
        let f = QPoly::new(cand);
        if f.degree() == Some(size) && q.rem(&f).is_zero() {
            return false;
        }
    }
    true
}

/// An element of a number field, stored as a reduced polynomial in x.
#[derive(Clone)]
pub struct FieldElement {
    field: NumberField,
    c: QPoly,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c && self.field == other.field
    }
}

impl Eq for FieldElement {}

impl std::hash::Hash for FieldElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.c)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.c)
    }
}

impl FieldElement {
    pub fn new(field: &NumberField, c: QPoly) -> Self {
        let c = if c.degree().unwrap_or(0) >= field.degree() { c.rem(&field.0.poly) } else { c };
        FieldElement { field: field.clone(), c }
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn poly(&self) -> &QPoly {
        &self.c
    }

    /// Exactly d coefficients, low to high.
    pub fn coeffs(&self) -> Vec<Rational> {
        (0..self.field.degree()).map(|i| self.c.coeff(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.c == QPoly::one()
    }

    pub fn is_rational(&self) -> bool {
        self.c.degree().unwrap_or(0) == 0
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.c.coeff(0))
    }

    pub fn add(&self, o: &FieldElement) -> FieldElement {
        FieldElement { field: self.field.clone(), c: self.c.add(&o.c) }
    }

    pub fn sub(&self, o: &FieldElement) -> FieldElement {
        FieldElement { field: self.field.clone(), c: self.c.sub(&o.c) }
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement { field: self.field.clone(), c: self.c.neg() }
    }

    pub fn mul(&self, o: &FieldElement) -> FieldElement {
        FieldElement::new(&self.field, self.c.mul(&o.c))
    }

    pub fn scale(&self, q: &Rational) -> FieldElement {
        FieldElement { field: self.field.clone(), c: self.c.scale(q) }
    }

    /// 1 - self
    pub fn one_minus(&self) -> FieldElement {
        self.field.one().sub(self)
    }

    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (g, s, _) = self.c.ext_gcd(&self.field.0.poly);
        if g != QPoly::one() {
            return Err(Error::DivisionByZero);
        }
        Ok(FieldElement::new(&self.field, s))
    }

    pub fn div(&self, o: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, n: i64) -> Result<FieldElement> {
        let mut base = if n < 0 { self.inv()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn pow_int(&self, n: &Integer) -> Result<FieldElement> {
        let n = n.to_i64().ok_or_else(|| Error::InvalidInput("exponent too large".into()))?;
        self.pow(n)
    }

    /// Apply the automorphism sending x to `image`.
    pub fn apply(&self, image: &FieldElement) -> FieldElement {
        let mut acc = self.field.zero();
        for a in self.c.coeffs().iter().rev() {
            acc = acc.mul(image).add(&self.field.from_rational(a.clone()));
        }
        acc
    }

    /// w^m = 1 and w^(m/q) != 1 for each prime q | m.
    pub fn is_primitive_root_of_unity(&self, m: u64) -> bool {
        let Ok(wm) = self.pow(m as i64) else { return false };
        if !wm.is_one() {
            return false;
        }
        prime_factors(m).into_iter().all(|q| self.pow((m / q) as i64).map(|x| !x.is_one()).unwrap_or(false))
    }

    /// Smallest k > 0 with self^k = 1, if self is a root of unity.
    pub fn root_of_unity_order(&self) -> Option<u64> {
        let m = self.field.torsion_order();
        let wm = self.pow(m as i64).ok()?;
        if !wm.is_one() {
            return None;
        }
        (1..=m).find(|&k| m.is_multiple_of(k) && self.pow(k as i64).map(|x| x.is_one()).unwrap_or(false))
    }

    /// Matrix of multiplication by self in the power basis (columns are images).
    pub fn mult_matrix(&self) -> Vec<Vec<Rational>> {
        let d = self.field.degree();
        let mut cols = vec![];
        let mut b = self.clone();
        let x = self.field.gen();
        for _ in 0..d {
            cols.push(b.coeffs());
            b = b.mul(&x);
        }
        (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect()
    }

    pub fn charpoly(&self) -> QPoly {
        charpoly(&self.mult_matrix())
    }

    pub fn norm(&self) -> Rational {
        det(&self.mult_matrix())
    }

    pub fn trace(&self) -> Rational {
        let m = self.mult_matrix();
        (0..m.len()).fold(Rational::new(), |acc, i| acc + &m[i][i])
    }

    /// Value at a complex root of the defining polynomial.
    pub fn eval_at(&self, root: &Cx) -> Cx {
        self.c.eval_cx(root)
    }

    /// Values at all d roots at the given binary precision.
    pub fn values(&self, bits: u32) -> Vec<Cx> {
        self.field.roots_at(bits).iter().map(|r| self.eval_at(r)).collect()
    }

    /// Evaluate at an embedding, auditing against a recomputation with
    /// extra precision.
    pub fn evaluate(&self, ctx: &EmbeddingContext) -> Result<Cx> {
        let prec = ctx.precision;
        let bits = prec.bits();
        let tol = prec.tolerance();
        if let Some(q) = self.as_rational() {
            return Ok(Cx::from_rational(bits, &q));
        }
        let mut extra = 32;
        for _ in 0..4 {
            let r1 = self.field.roots_at(bits + extra);
            let r2 = self.field.roots_at(bits + 2 * extra);
            let v1 = self.eval_at(&r1[ctx.root_index]);
            let v2 = self.eval_at(&r2[ctx.root_index]);
            if v1.sub(&v2).abs() < tol {
                return Ok(v1.with_prec(bits));
            }
            extra *= 4;
        }
        Err(Error::PrecisionExhausted(format!("evaluating {self}")))
    }

    /// Ordering key used to choose canonical representatives: fewest
    /// nonzero coefficients, smallest height, positive top coefficient, then
    /// coefficients lexicographically.
    pub fn canonical_key(&self) -> (usize, Integer, bool, Vec<Rational>) {
        let nz = self.c.coeffs().iter().filter(|c| **c != 0).count();
        let mut h = Integer::new();
        for c in self.c.coeffs() {
            h = h.max(Integer::from(c.numer().abs_ref())).max(c.denom().clone());
        }
        let neg_top = self.c.lead() < 0;
        (nz, h, neg_top, self.coeffs())
    }

    /// A square root in F, if one exists.
    pub fn sqrt(&self) -> Option<FieldElement> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let n = self.norm();
        if n < 0 && self.field.degree() % 2 == 1 {
            return None;
        }
        let nn = Rational::from(n.abs_ref());
        if !nn.numer().is_perfect_square() || !nn.denom().is_perfect_square() {
            return None;
        }
        let nf = &self.field;
        let mut dmul = Integer::from(1);
        for c in self.c.coeffs() {
            dmul.lcm_mut(c.denom());
        }
        let bound = nf.coefficient_bound(&dmul);
        let bits = nf.reconstruction_bits(&bound);
        let roots = nf.roots_at(bits);
        let mut choices = vec![];
        for s in 0..nf.slot_count() {
            let v = self.eval_at(&roots[s]);
            if nf.is_real_slot(s) {
                if v.re < 0 {
                    return None;
                }
                let r = Cx::real(Float::with_val(bits, v.re.sqrt_ref()));
                choices.push(vec![r.clone(), r.neg()]);
            } else {
                let r = v.log().scale(&Float::with_val(bits, 0.5)).exp();
                choices.push(vec![r.clone(), r.neg()]);
            }
        }
        // the sign at slot 0 is free: h and -h are both roots
        choices[0].truncate(1);
        let target = self.clone();
        let (mut found, _) = nf.search(&choices, &bound, |h| h.mul(h) == target);
        found.extend(found.clone().into_iter().map(|h| h.neg()));
        found.sort_by_key(|h| h.canonical_key());
        found.into_iter().next()
    }

    pub fn is_square(&self) -> bool {
        self.sqrt().is_some()
    }
}

impl std::ops::Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        FieldElement::add(self, o)
    }
}

impl std::ops::Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        FieldElement::sub(self, o)
    }
}

impl std::ops::Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        FieldElement::mul(self, o)
    }
}

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

/// One complex embedding of a field at a stated precision.
#[derive(Clone, Debug)]
pub struct EmbeddingContext {
    pub field: NumberField,
    pub root_index: usize,
    pub precision: Precision,
    /// True when this root is the chosen representative of its conjugate pair.
    pub conjugate_flag: bool,
}

impl EmbeddingContext {
    pub fn root(&self) -> Cx {
        self.field.roots_at(self.precision.bits())[self.root_index].clone()
    }

    pub fn is_real(&self) -> bool {
        self.root_index < self.field.signature().0
    }

    pub fn bits(&self) -> u32 {
        self.precision.bits()
    }

    /// The representative slot this root belongs to.
    pub fn slot(&self) -> usize {
        if self.conjugate_flag {
            self.root_index
        } else {
            self.field.conjugate_index(self.root_index)
        }
    }

    pub fn with_precision(&self, precision: Precision) -> Self {
        EmbeddingContext { precision, ..self.clone() }
    }
}

/// Evaluate `a` under `ctx`.
pub fn evaluate(a: &FieldElement, ctx: &EmbeddingContext) -> Result<Cx> {
    a.evaluate(ctx)
}
