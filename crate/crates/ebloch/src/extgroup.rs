//! The primitive Z-extension E of F* attached to a generator w of μ_F.
//!
//! E is free on w̃ and lifts p̃_1..p̃_r of the basis elements; an element is
//! stored as integer coordinates (k, r). The distinguished 1 ∈ Z ⊂ E is
//! (m, 0), so π(k, r) = w^k Π p_j^{r_j} kills exactly the multiples of (m, 0).
//!
//! Wedge decisions. In the free module on (w̃, p̃_j), ∧² splits as an
//! antisymmetric part (one integer per unordered pair of coordinates) and a
//! diagonal part (one bit per coordinate, since 2(x∧x) = 0). A sum is zero
//! iff every pair coefficient vanishes and every diagonal count is even.
//! Zero in the free module implies zero in E. The converse needs the map
//! H/2H → E/2E to be injective for the subgroup H spanned by the basis; an
//! element of E is 2-divisible iff its image in F* is a square (m is even,
//! so (m, 0) is itself 2-divisible). [`MultBasis`] certifies this exactly by
//! checking that no product w^a Π p_j^{s_j} with a, s_j ∈ {0, 1}, not all
//! zero, is a square in F. When the certificate holds a "nonzero" verdict is
//! exact; otherwise it carries a caveat.

use crate::error::{Error, Result};
use crate::field::{EmbeddingContext, FieldElement, NumberField};
use crate::numeric::{pi, round_int, Cx};
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Default bound on free exponents recovered by [`MultBasis::log_lift`].
pub const EXPONENT_BOUND: i64 = 64;

/// Precision of the stored logarithm table used for exponent recovery.
const LOG_BITS: u32 = 192;

/// An element of E in coordinates over (w̃, p̃_1, .., p̃_r).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExtElement {
    pub k: i64,
    pub r: Vec<i64>,
}

impl ExtElement {
    pub fn new(k: i64, r: Vec<i64>) -> Self {
        ExtElement { k, r }
    }

    pub fn zero(rank: usize) -> Self {
        ExtElement { k: 0, r: vec![0; rank] }
    }

    /// n·ι(1) = (n·m, 0)
    pub fn iota(n: i64, m: u64, rank: usize) -> Self {
        ExtElement { k: n * m as i64, r: vec![0; rank] }
    }

    /// ½ ∈ E, which exists because m is even.
    pub fn half(m: u64, rank: usize) -> Self {
        ExtElement { k: m as i64 / 2, r: vec![0; rank] }
    }

    pub fn rank(&self) -> usize {
        self.r.len()
    }

    pub fn is_zero(&self) -> bool {
        self.k == 0 && self.r.iter().all(|&x| x == 0)
    }

    pub fn add(&self, o: &ExtElement) -> ExtElement {
        ExtElement { k: self.k + o.k, r: self.r.iter().zip(&o.r).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &ExtElement) -> ExtElement {
        ExtElement { k: self.k - o.k, r: self.r.iter().zip(&o.r).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> ExtElement {
        self.scale(-1)
    }

    pub fn scale(&self, n: i64) -> ExtElement {
        ExtElement { k: self.k * n, r: self.r.iter().map(|a| a * n).collect() }
    }

    /// Coordinate vector (k, r_1, .., r_r).
    pub fn coords(&self) -> Vec<i64> {
        let mut v = vec![self.k];
        v.extend(&self.r);
        v
    }

    pub fn from_coords(v: &[i64]) -> Self {
        ExtElement { k: v[0], r: v[1..].to_vec() }
    }

    /// k reduced into [0, modulus).
    pub fn reduce_k(&self, modulus: i64) -> ExtElement {
        ExtElement { k: self.k.rem_euclid(modulus), r: self.r.clone() }
    }
}

impl fmt::Display for ExtElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r: Vec<String> = self.r.iter().map(|x| x.to_string()).collect();
        write!(f, "({}; {})", self.k, r.join(", "))
    }
}

/// A formal sum Σ n_i e_i ∧ f_i, held unexpanded.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WedgeElement {
    pub terms: Vec<(i64, ExtElement, ExtElement)>,
}

/// Expanded invariants of a wedge sum in the free module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WedgeInvariants {
    /// Σ n (x_a y_b - x_b y_a) for a < b, nonzero entries only.
    pub pairs: BTreeMap<(usize, usize), i64>,
    /// Σ n x_a y_a mod 2 per coordinate, odd entries only.
    pub diagonal: Vec<usize>,
}

impl WedgeInvariants {
    pub fn is_zero(&self) -> bool {
        self.pairs.is_empty() && self.diagonal.is_empty()
    }
}

impl WedgeElement {
    pub fn new() -> Self {
        WedgeElement { terms: vec![] }
    }

    pub fn push(&mut self, n: i64, e: ExtElement, f: ExtElement) {
        if n != 0 {
            self.terms.push((n, e, f));
        }
    }

    pub fn extend(&mut self, other: &WedgeElement) {
        self.terms.extend(other.terms.iter().cloned());
    }

    pub fn invariants(&self) -> WedgeInvariants {
        let dim = self.terms.first().map(|t| t.1.rank() + 1).unwrap_or(0);
        let mut pairs = BTreeMap::new();
        let mut diag = vec![0i64; dim];
        for (n, e, f) in &self.terms {
            let x = e.coords();
            let y = f.coords();
            for a in 0..dim {
                diag[a] += n * x[a] * y[a];
                for b in a + 1..dim {
                    let v = n * (x[a] * y[b] - x[b] * y[a]);
                    if v != 0 {
                        *pairs.entry((a, b)).or_insert(0) += v;
                    }
                }
            }
        }
        pairs.retain(|_, v| *v != 0);
        let diagonal = (0..dim).filter(|&a| diag[a].rem_euclid(2) == 1).collect();
        WedgeInvariants { pairs, diagonal }
    }

    /// Zero in ∧² of the free module on the coordinates.
    pub fn is_zero(&self) -> bool {
        self.invariants().is_zero()
    }

    /// Zero in ∧²(F*), i.e. with the w̃ coordinate taken mod m.
    pub fn is_zero_mod_torsion(&self, m: u64) -> bool {
        let inv = self.invariants();
        let m = m as i64;
        inv.pairs.iter().all(|(&(a, _), v)| a == 0 && v.rem_euclid(m) == 0) && inv.diagonal.is_empty()
    }
}

/// Decide whether Σ n_i e_i ∧ f_i vanishes, treating the coordinates as free.
pub fn wedge_is_zero(terms: &[(i64, ExtElement, ExtElement)]) -> bool {
    WedgeElement { terms: terms.to_vec() }.is_zero()
}

/// Verdict of a wedge decision over a basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WedgeVerdict {
    pub is_zero: bool,
    /// A nonzero verdict is only relative to the basis.
    pub caveat: bool,
}

/// A multiplicative basis: the generator w of μ_F and free elements p_j.
#[derive(Clone, Debug)]
pub struct MultBasis {
    field: NumberField,
    gens: Vec<FieldElement>,
    saturated_assertion: bool,
    two_saturated: bool,
    symbolic: bool,
    norms: Vec<Rational>,
    arch: Vec<Vec<Float>>,
}

impl MultBasis {
    /// A basis of independent free generators. Independence is checked on
    /// the vector of archimedean log-moduli together with valuations of the
    /// norm over a coprime base; a set not separated by these is rejected.
    pub fn new(field: &NumberField, gens: Vec<FieldElement>, saturated_assertion: bool) -> Result<Self> {
        for g in &gens {
            if g.is_zero() {
                return Err(Error::InvalidInput("basis element is zero".into()));
            }
            if g.root_of_unity_order().is_some() {
                return Err(Error::DependentBasis(format!("{g} is a root of unity")));
            }
        }
        let mut b = MultBasis::build(field, gens, saturated_assertion, false);
        if !b.gens.is_empty() {
            let rows = b.log_rows(&[]);
            if numeric_rank(&rows, b.gens.len()) < b.gens.len() {
                return Err(Error::DependentBasis(
                    "generators are not separated by absolute values and norm valuations".into(),
                ));
            }
        }
        b.two_saturated = b.certify_two_saturation();
        if saturated_assertion && !b.two_saturated {
            return Err(Error::UnsaturatedBasis("a nontrivial product of basis elements is a square".into()));
        }
        Ok(b)
    }

    /// A basis of formal symbols: the generators may be dependent. Zero
    /// verdicts remain sound; nonzero verdicts are basis-relative.
    pub fn symbolic(field: &NumberField, gens: Vec<FieldElement>) -> Result<Self> {
        if gens.iter().any(|g| g.is_zero()) {
            return Err(Error::InvalidInput("basis element is zero".into()));
        }
        Ok(MultBasis::build(field, gens, false, true))
    }

    fn build(field: &NumberField, gens: Vec<FieldElement>, saturated_assertion: bool, symbolic: bool) -> Self {
        let norms = gens.iter().map(|g| g.norm()).collect();
        let arch = gens.iter().map(|g| arch_logs(g, LOG_BITS)).collect();
        MultBasis { field: field.clone(), gens, saturated_assertion, two_saturated: false, symbolic, norms, arch }
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn gens(&self) -> &[FieldElement] {
        &self.gens
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn m(&self) -> u64 {
        self.field.torsion_order()
    }

    pub fn torsion_gen(&self) -> FieldElement {
        self.field.torsion_generator()
    }

    pub fn saturated_assertion(&self) -> bool {
        self.saturated_assertion
    }

    pub fn is_two_saturated(&self) -> bool {
        self.two_saturated
    }

    pub fn is_symbolic(&self) -> bool {
        self.symbolic
    }

    /// Whether nonzero wedge verdicts over this basis need a caveat.
    pub fn caveat(&self) -> bool {
        !self.two_saturated
    }

    pub fn zero(&self) -> ExtElement {
        ExtElement::zero(self.rank())
    }

    pub fn iota(&self, n: i64) -> ExtElement {
        ExtElement::iota(n, self.m(), self.rank())
    }

    pub fn half(&self) -> ExtElement {
        ExtElement::half(self.m(), self.rank())
    }

    /// w̃
    pub fn w_tilde(&self) -> ExtElement {
        ExtElement { k: 1, r: vec![0; self.rank()] }
    }

    /// p̃_j
    pub fn p_tilde(&self, j: usize) -> ExtElement {
        let mut r = vec![0; self.rank()];
        r[j] = 1;
        ExtElement { k: 0, r }
    }

    /// π(e) = w^k Π p_j^{r_j}, exactly.
    pub fn pi(&self, e: &ExtElement) -> FieldElement {
        let m = self.m() as i64;
        let mut acc = self.torsion_gen().pow(e.k.rem_euclid(m)).unwrap_or_else(|_| self.field.one());
        for (g, &r) in self.gens.iter().zip(&e.r) {
            if r != 0 {
                acc = acc.mul(&g.pow(r).expect("basis elements are nonzero"));
            }
        }
        acc
    }

    fn certify_two_saturation(&self) -> bool {
        let n = self.rank() + 1;
        if n > 20 {
            return false;
        }
        let w = self.torsion_gen();
        for mask in 1u32..(1u32 << n) {
            let mut x = if mask & 1 == 1 { w.clone() } else { self.field.one() };
            for j in 0..self.rank() {
                if mask >> (j + 1) & 1 == 1 {
                    x = x.mul(&self.gens[j]);
                }
            }
            if x.is_square() {
                return false;
            }
        }
        true
    }

    /// Rows of the separating map: log|σ_s| for each slot, then norm
    /// valuations over a coprime base containing the extra norms.
    fn log_rows(&self, extra: &[Rational]) -> Vec<Vec<Float>> {
        let mut ints: Vec<Integer> = vec![];
        for n in self.norms.iter().chain(extra) {
            ints.push(Integer::from(n.numer().abs_ref()));
            ints.push(n.denom().clone());
        }
        let base = coprime_base(ints);
        let mut rows: Vec<Vec<Float>> = (0..self.field.slot_count())
            .map(|s| self.arch.iter().map(|col| col[s].clone()).collect())
            .collect();
        for b in &base {
            rows.push(self.norms.iter().map(|n| Float::with_val(LOG_BITS, norm_valuation(n, b))).collect());
        }
        rows
    }

    /// Coordinates of z in E: k ∈ [0, m) and r with w^k Π p_j^{r_j} = z.
    pub fn log_lift(&self, z: &FieldElement) -> Result<ExtElement> {
        if z.is_zero() {
            return Err(Error::InvalidInput("log_lift of zero".into()));
        }
        let r = if self.gens.is_empty() {
            vec![]
        } else {
            self.free_exponents(z)?
        };
        let mut y = z.clone();
        for (g, &e) in self.gens.iter().zip(&r) {
            if e != 0 {
                y = y.mul(&g.pow(-e)?);
            }
        }
        let w = self.torsion_gen();
        let mut acc = self.field.one();
        for k in 0..self.m() as i64 {
            if acc == y {
                return Ok(ExtElement { k, r });
            }
            acc = acc.mul(&w);
        }
        Err(Error::NotInSubgroup(format!("{z}")))
    }

    fn free_exponents(&self, z: &FieldElement) -> Result<Vec<i64>> {
        let nz = z.norm();
        let rows = self.log_rows(std::slice::from_ref(&nz));
        let mut target = arch_logs(z, LOG_BITS);
        let mut ints: Vec<Integer> = vec![];
        for n in self.norms.iter().chain(std::iter::once(&nz)) {
            ints.push(Integer::from(n.numer().abs_ref()));
            ints.push(n.denom().clone());
        }
        for b in &coprime_base(ints) {
            target.push(Float::with_val(LOG_BITS, norm_valuation(&nz, b)));
        }
        let sol = least_squares(&rows, &target).ok_or_else(|| Error::NotInSubgroup(format!("{z}: singular basis")))?;
        let mut r = vec![];
        for x in &sol {
            let n = round_int(x).to_i64().unwrap_or(i64::MAX);
            if n.abs() > EXPONENT_BOUND {
                return Err(Error::NotInSubgroup(format!("{z}: exponent beyond bound")));
            }
            r.push(n);
        }
        // residual check before the exact one
        let tol = Float::with_val(LOG_BITS, Float::i_exp(1, -60));
        for (row, t) in rows.iter().zip(&target) {
            let mut s = Float::with_val(LOG_BITS, -t);
            for (a, &x) in row.iter().zip(&r) {
                s += Float::with_val(LOG_BITS, a * x);
            }
            if s.abs() > tol {
                return Err(Error::NotInSubgroup(format!("{z}")));
            }
        }
        Ok(r)
    }

    /// Whether z lies in the subgroup spanned by μ_F and the generators.
    pub fn contains(&self, z: &FieldElement) -> bool {
        self.log_lift(z).is_ok()
    }

    /// This basis with z appended when z is independent of it; unchanged
    /// when z already lies in the span; an error when z is dependent on the
    /// span without lying in it.
    pub fn extended_by(&self, z: &FieldElement) -> Result<MultBasis> {
        if self.contains(z) {
            return Ok(self.clone());
        }
        let mut gens = self.gens.clone();
        gens.push(z.clone());
        match MultBasis::new(&self.field, gens, false) {
            Ok(b) => Ok(b),
            Err(Error::DependentBasis(_)) => Err(Error::NotInSubgroup(format!("{z} is dependent on the basis but not in its span"))),
            Err(e) => Err(e),
        }
    }

    /// Re-express an element of this basis's E in a basis that extends it.
    pub fn embed_into(&self, e: &ExtElement, bigger: &MultBasis) -> ExtElement {
        let mut r = e.r.clone();
        r.resize(bigger.rank(), 0);
        ExtElement { k: e.k, r }
    }

    /// Decide ν̂-style wedge vanishing over this basis.
    pub fn wedge_verdict(&self, w: &WedgeElement) -> WedgeVerdict {
        let z = w.is_zero();
        WedgeVerdict { is_zero: z, caveat: !z && self.caveat() }
    }
}

/// log|σ_s(g)| for each regulator slot.
fn arch_logs(g: &FieldElement, bits: u32) -> Vec<Float> {
    let nf = g.field();
    let roots = nf.roots_at(bits);
    (0..nf.slot_count())
        .map(|s| {
            let v = g.eval_at(&roots[s]);
            Float::with_val(bits, v.norm_sqr().ln()) / 2u32
        })
        .collect()
}

/// Refine a list of positive integers into pairwise coprime factors > 1.
pub fn coprime_base(input: Vec<Integer>) -> Vec<Integer> {
    let mut base: Vec<Integer> = input.into_iter().filter(|x| *x > 1).collect();
    base.sort();
    base.dedup();
    loop {
        let mut changed = false;
        'outer: for i in 0..base.len() {
            for j in i + 1..base.len() {
                let g = Integer::from(base[i].gcd_ref(&base[j]));
                if g > 1 {
                    let a = Integer::from(&base[i] / &g);
                    let b = Integer::from(&base[j] / &g);
                    base.remove(j);
                    base.remove(i);
                    for x in [g, a, b] {
                        if x > 1 {
                            base.push(x);
                        }
                    }
                    base.sort();
                    base.dedup();
                    changed = true;
                    break 'outer;
                }
            }
        }
        if !changed {
            return base;
        }
    }
}

/// Exponent of the coprime-base element b in the rational n.
fn norm_valuation(n: &Rational, b: &Integer) -> i64 {
    let count = |x: &Integer| {
        let mut x = Integer::from(x.abs_ref());
        let mut c = 0;
        while x != 0 && x.is_divisible(b) {
            x /= b;
            c += 1;
        }
        c
    };
    count(n.numer()) - count(n.denom())
}

fn numeric_rank(rows: &[Vec<Float>], cols: usize) -> usize {
    let bits = LOG_BITS;
    let mut a: Vec<Vec<Float>> = rows.to_vec();
    let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32) / 2));
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..a.len()).max_by(|&i, &j| {
            Float::with_val(bits, a[i][c].abs_ref()).partial_cmp(&Float::with_val(bits, a[j][c].abs_ref())).unwrap_or(std::cmp::Ordering::Equal)
        }) else {
            break;
        };
        if Float::with_val(bits, a[piv][c].abs_ref()) < tol {
            continue;
        }
        a.swap(piv, rank);
        for i in rank + 1..a.len() {
            let f = Float::with_val(bits, &a[i][c] / &a[rank][c]);
            for j in c..cols {
                let t = Float::with_val(bits, &f * &a[rank][j]);
                a[i][j] -= t;
            }
        }
        rank += 1;
    }
    rank
}

/// Least-squares solution of rows·x = target through the normal equations.
fn least_squares(rows: &[Vec<Float>], target: &[Float]) -> Option<Vec<Float>> {
    let bits = LOG_BITS;
    let n = rows.first()?.len();
    let mut nm = vec![vec![Float::new(bits); n]; n];
    let mut rhs = vec![Float::new(bits); n];
    for (row, t) in rows.iter().zip(target) {
        for i in 0..n {
            rhs[i] += Float::with_val(bits, &row[i] * t);
            for j in 0..n {
                nm[i][j] += Float::with_val(bits, &row[i] * &row[j]);
            }
        }
    }
    let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32) / 2));
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| {
            Float::with_val(bits, nm[i][c].abs_ref()).partial_cmp(&Float::with_val(bits, nm[j][c].abs_ref())).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if Float::with_val(bits, nm[piv][c].abs_ref()) < tol {
            return None;
        }
        nm.swap(piv, c);
        rhs.swap(piv, c);
        for i in 0..n {
            if i == c {
                continue;
            }
            let f = Float::with_val(bits, &nm[i][c] / &nm[c][c]);
            for j in c..n {
                let t = Float::with_val(bits, &f * &nm[c][j]);
                nm[i][j] -= t;
            }
            let t = Float::with_val(bits, &f * &rhs[c]);
            rhs[i] -= t;
        }
    }
    Some((0..n).map(|i| Float::with_val(bits, &rhs[i] / &nm[i][i])).collect())
}

/// How λ_w and the λ_j are chosen for a covering E → C.
#[derive(Clone, Debug)]
pub enum Branch {
    /// Principal logarithms of σ(w) and σ(p_j).
    Principal,
    /// Explicit values, checked to exponentiate correctly.
    Explicit { lambda_w: Cx, lambda_p: Vec<Cx> },
}

/// A covering E → C over one embedding: w̃ ↦ λ_w, p̃_j ↦ λ_j.
#[derive(Clone, Debug)]
pub struct LogLift {
    pub embedding: EmbeddingContext,
    pub lambda_w: Cx,
    pub lambda_p: Vec<Cx>,
    /// m·λ_w = 2πi·k_unit
    pub k_unit: i64,
    m: u64,
}

impl LogLift {
    /// Image of e under the covering.
    pub fn lift(&self, e: &ExtElement) -> Cx {
        let mut acc = self.lambda_w.scale_i64(e.k);
        for (l, &r) in self.lambda_p.iter().zip(&e.r) {
            if r != 0 {
                acc = acc.add(&l.scale_i64(r));
            }
        }
        acc
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn bits(&self) -> u32 {
        self.embedding.bits()
    }
}

/// Build the covering of `ctx` determined by `branch`.
pub fn cover_to_c(basis: &MultBasis, ctx: &EmbeddingContext, branch: &Branch) -> Result<LogLift> {
    let bits = ctx.bits();
    let m = basis.m();
    let w = basis.torsion_gen().evaluate(ctx)?;
    let pv: Vec<Cx> = basis.gens().iter().map(|g| g.evaluate(ctx)).collect::<Result<_>>()?;
    let (lambda_w, lambda_p) = match branch {
        Branch::Principal => (w.log(), pv.iter().map(|v| v.log()).collect::<Vec<_>>()),
        Branch::Explicit { lambda_w, lambda_p } => {
            if lambda_p.len() != pv.len() {
                return Err(Error::BranchInvalid("wrong number of generator logarithms".into()));
            }
            let tol = ctx.precision.tolerance();
            if !lambda_w.with_prec(bits).exp().close_to(&w, &tol) {
                return Err(Error::BranchInvalid("exp(lambda_w) != sigma(w)".into()));
            }
            for (l, v) in lambda_p.iter().zip(&pv) {
                if !l.with_prec(bits).exp().close_to(v, &Float::with_val(bits, v.abs() * &tol)) {
                    return Err(Error::BranchInvalid("exp(lambda_p) != sigma(p)".into()));
                }
            }
            (lambda_w.with_prec(bits), lambda_p.iter().map(|l| l.with_prec(bits)).collect())
        }
    };
    // m·λ_w / 2πi must be an integer prime to m
    let two_pi = Float::with_val(bits, pi(bits) * 2u32);
    let t = Float::with_val(bits, &lambda_w.im * m) / &two_pi;
    let k_unit = round_int(&t);
    let err = Float::with_val(bits, &t - &k_unit).abs();
    if err > Float::with_val(bits, Float::i_exp(1, -(bits as i32) / 2)) || Float::with_val(bits, lambda_w.re.abs_ref()) > Float::with_val(bits, Float::i_exp(1, -(bits as i32) / 2)) {
        return Err(Error::BranchInvalid("m·lambda_w is not in 2πiZ".into()));
    }
    let k_unit = k_unit.to_i64().unwrap_or(0);
    if gcd_i64(k_unit, m as i64) != 1 {
        return Err(Error::BranchInvalid(format!("k_unit {k_unit} not prime to {m}")));
    }
    Ok(LogLift { embedding: ctx.clone(), lambda_w, lambda_p, k_unit, m })
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A section log: F* → E on the values given, returned with the basis it
/// lives over. Equal values get equal logarithms.
///
/// Over Q the basis is a coprime base of the numerators and denominators, so
/// the section is a homomorphism on the group the values generate. Otherwise
/// roots of unity go to the w̃ coordinate, a value that differs from an
/// existing symbol by a root of unity reuses it, and anything else becomes a
/// new symbol; multiplicative relations between symbols are then not seen.
pub fn log_section(nf: &NumberField, values: &[FieldElement]) -> Result<(MultBasis, Vec<ExtElement>)> {
    if nf.degree() == 1 {
        return rational_log_section(nf, values);
    }
    let w = nf.torsion_generator();
    let m = nf.torsion_order() as i64;
    let power_of_w = |t: &FieldElement| -> Option<i64> {
        let mut acc = nf.one();
        for j in 0..m {
            if acc == *t {
                return Some(j);
            }
            acc = acc.mul(&w);
        }
        None
    };
    let mut gens: Vec<FieldElement> = vec![];
    let mut coords: Vec<(i64, Option<usize>)> = vec![];
    'values: for v in values {
        if v.is_zero() {
            return Err(Error::InvalidInput("zero cannot be symbolized".into()));
        }
        if let Some(j) = power_of_w(v) {
            coords.push((j, None));
            continue;
        }
        for (i, g) in gens.iter().enumerate() {
            if let Some(j) = power_of_w(&v.div(g)?) {
                coords.push((j, Some(i)));
                continue 'values;
            }
        }
        gens.push(v.clone());
        coords.push((0, Some(gens.len() - 1)));
    }
    let r = gens.len();
    let basis = MultBasis::symbolic(nf, gens)?;
    let out = coords
        .into_iter()
        .map(|(k, i)| {
            let mut e = ExtElement::zero(r);
            e.k = k;
            if let Some(i) = i {
                e.r[i] = 1;
            }
            e
        })
        .collect();
    Ok((basis, out))
}

fn rational_log_section(nf: &NumberField, values: &[FieldElement]) -> Result<(MultBasis, Vec<ExtElement>)> {
    let mut qs = Vec::with_capacity(values.len());
    for v in values {
        match v.as_rational() {
            Some(q) if q != 0 => qs.push(q),
            _ => return Err(Error::InvalidInput("zero has no logarithm".into())),
        }
    }
    let mut ints = vec![];
    for q in &qs {
        ints.push(Integer::from(q.numer().abs_ref()));
        ints.push(q.denom().clone());
    }
    let base = coprime_base(ints);
    let gens = base.iter().map(|b| nf.from_rational(Rational::from(b))).collect();
    let basis = MultBasis::symbolic(nf, gens)?;
    let half = (nf.torsion_order() / 2) as i64;
    let out = qs
        .iter()
        .map(|q| ExtElement::new(if *q < 0 { half } else { 0 }, base.iter().map(|b| norm_valuation(q, b)).collect()))
        .collect();
    Ok((basis, out))
}

/// π(e) for a free-standing call.
pub fn pi_of(e: &ExtElement, basis: &MultBasis) -> FieldElement {
    basis.pi(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Precision;

    fn example() -> (NumberField, MultBasis, FieldElement) {
        let nf = NumberField::from_ints(&[1, -2, 2, -1, 1]).unwrap();
        let u = nf.element_from_ints(&[1, -2, 0, -1]);
        let b = MultBasis::new(&nf, vec![u.clone()], true).unwrap();
        (nf, b, u)
    }

    #[test]
    fn example_coordinates() {
        let (nf, b, u) = example();
        assert_eq!(b.log_lift(&u.one_minus()).unwrap(), ExtElement::new(4, vec![2]));
        let v = nf.element_from_ints(&[1, -1, 1]);
        assert_eq!(b.log_lift(&v).unwrap(), ExtElement::new(3, vec![-2]));
        assert_eq!(b.log_lift(&v.one_minus()).unwrap(), ExtElement::new(1, vec![-3]));
        assert_eq!(b.log_lift(&nf.one()).unwrap(), ExtElement::new(0, vec![0]));
        assert!(b.pi(&b.iota(1)).is_one());
        assert_eq!(b.pi(&ExtElement::new(4, vec![2])), u.one_minus());
        assert_eq!(b.pi(&b.w_tilde()), nf.torsion_generator());
        assert!(b.is_two_saturated());
    }

    #[test]
    fn rational_basis_independence() {
        let q = NumberField::from_ints(&[0, 1]).unwrap();
        let b = MultBasis::new(&q, vec![q.from_int(2), q.from_int(3)], true).unwrap();
        let z = q.from_rational(Rational::from((-9, 16)));
        assert_eq!(b.log_lift(&z).unwrap(), ExtElement::new(1, vec![-4, 2]));
        assert!(MultBasis::new(&q, vec![q.from_int(2), q.from_int(4)], false).is_err());
        assert!(matches!(MultBasis::new(&q, vec![q.from_int(4)], true), Err(Error::UnsaturatedBasis(_))));
        let b4 = MultBasis::new(&q, vec![q.from_int(4)], false).unwrap();
        assert!(b4.caveat());
        assert!(matches!(b.log_lift(&q.from_int(5)), Err(Error::NotInSubgroup(_))));
    }

    #[test]
    fn wedge_basics() {
        let a = ExtElement::new(1, vec![2]);
        let b = ExtElement::new(-3, vec![5]);
        assert!(wedge_is_zero(&[(1, a.clone(), b.clone()), (1, b.clone(), a.clone())]));
        assert!(wedge_is_zero(&[(2, a.clone(), a.clone())]));
        assert!(!wedge_is_zero(&[(1, a.clone(), a.clone())]));
        // w̃ ∧ ι(1) = m (w̃ ∧ w̃) vanishes for m even
        let w = ExtElement::new(1, vec![0]);
        assert!(wedge_is_zero(&[(1, w.clone(), ExtElement::iota(1, 6, 1))]));
    }

    #[test]
    fn covering_example() {
        let (nf, b, u) = example();
        let ctx = nf.embedding(0, Precision::new(30)).unwrap();
        let l = cover_to_c(&b, &ctx, &Branch::Principal).unwrap();
        assert_eq!(l.k_unit, -1);
        let lw = l.lambda_w.to_f64();
        assert!(lw.0.abs() < 1e-25 && (lw.1 + std::f64::consts::PI / 3.0).abs() < 1e-14);
        let lu = l.lambda_p[0].to_f64();
        assert!((lu.0 + 0.2717675362489).abs() < 1e-12 && (lu.1 + 0.6165054387290).abs() < 1e-12);
        let one = l.lift(&b.iota(1));
        assert!(one.re.to_f64().abs() < 1e-25 && (one.im.to_f64() + 2.0 * std::f64::consts::PI).abs() < 1e-14);
        let e = ExtElement::new(5, vec![-3]);
        let lhs = l.lift(&e).exp();
        let rhs = b.pi(&e).evaluate(&ctx).unwrap();
        assert!(lhs.close_to(&rhs, &Float::with_val(ctx.bits(), 1e-25)));
        let _ = u;
    }

    #[test]
    fn explicit_branch_checked() {
        let (nf, b, _) = example();
        let ctx = nf.embedding(0, Precision::new(30)).unwrap();
        let l = cover_to_c(&b, &ctx, &Branch::Principal).unwrap();
        let bits = ctx.bits();
        let shifted = l.lambda_w.add(&Cx::two_pi_i(bits, &Integer::from(1)));
        let ok = cover_to_c(&b, &ctx, &Branch::Explicit { lambda_w: shifted, lambda_p: l.lambda_p.clone() }).unwrap();
        assert_eq!(ok.k_unit, 5);
        let bad = l.lambda_w.scale_i64(2);
        assert!(cover_to_c(&b, &ctx, &Branch::Explicit { lambda_w: bad, lambda_p: l.lambda_p.clone() }).is_err());
    }

    #[test]
    fn coprime_refinement() {
        let base = coprime_base(vec![Integer::from(12), Integer::from(18)]);
        assert_eq!(base, vec![Integer::from(2), Integer::from(3)]);
    }
}
