//! 3-cycles, ideal cochains and the elements they define.
//!
//! Edges of a simplex are ordered 01, 02, 03, 12, 13, 23. A labeling c of
//! the edges is ideal when c03·c12 + c01·c23 = c02·c13; its cross-ratio is
//! z = c03·c12/(c02·c13). A lift c̃ to E gives the flattening
//! (c̃03 + c̃12 - c̃02 - c̃13, c̃01 + c̃23 - c̃02 - c̃13). The log-parameters of
//! a flattening (e, f) are e on 01 and 23, -f on 03 and 12, f - e on 02 and
//! 13; they sum to zero over the three pairs of opposite edges.

use crate::error::{Error, Result};
use crate::extbloch::{ExtBlochSum, Flattening, LiftObstruction, PslSum};
use crate::extgroup::{log_section, ExtElement, MultBasis, WedgeVerdict};
use crate::field::{FieldElement, NumberField};
use crate::numeric::Precision;
use crate::regulator::{bloch_wigner_sum, reg_vector, SlotValue};
use rug::Float;
use serde::{Deserialize, Serialize};

pub const EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Rejection-sampling budget for general-position draws.
pub const MAX_RETRIES: usize = 1000;

pub fn edge_index(a: usize, b: usize) -> usize {
    let key = if a < b { (a, b) } else { (b, a) };
    EDGES.iter().position(|&e| e == key).expect("two distinct vertices of a simplex")
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Class labels numbered in order of first appearance.
    fn labels(&mut self) -> (Vec<usize>, usize) {
        let n = self.0.len();
        let mut label = vec![usize::MAX; n];
        let mut out = vec![0; n];
        let mut count = 0;
        for x in 0..n {
            let r = self.find(x);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            out[x] = label[r];
        }
        (out, count)
    }
}

/// Face `face` of simplex `tet` glued to face `other_face` of `other`;
/// `perm[v]` is the image of vertex v.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gluing {
    pub tet: usize,
    pub face: usize,
    pub other: usize,
    pub other_face: usize,
    pub perm: [usize; 4],
}

/// Ordered simplices with orientation signs and order-preserving face
/// pairings whose boundaries cancel.
#[derive(Clone, Debug)]
pub struct Triangulated3Cycle {
    orientations: Vec<i64>,
    gluings: Vec<Gluing>,
    edge_class: Vec<[usize; 6]>,
    edge_classes: usize,
    vertex_class: Vec<[usize; 4]>,
    vertex_classes: usize,
    closed: bool,
}

impl Triangulated3Cycle {
    pub fn new(orientations: Vec<i64>, gluings: Vec<Gluing>) -> Result<Self> {
        let n = orientations.len();
        if n == 0 {
            return Err(Error::InvalidInput("no simplices".into()));
        }
        if orientations.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::InvalidInput("orientations must be ±1".into()));
        }
        let mut used = vec![[false; 4]; n];
        let mut edges = UnionFind::new(6 * n);
        let mut verts = UnionFind::new(4 * n);
        for g in &gluings {
            if g.tet >= n || g.other >= n || g.face > 3 || g.other_face > 3 {
                return Err(Error::InvalidInput(format!("gluing {g:?} out of range")));
            }
            let mut seen = [false; 4];
            for &p in &g.perm {
                if p > 3 || seen[p] {
                    return Err(Error::InvalidInput(format!("{:?} is not a permutation", g.perm)));
                }
                seen[p] = true;
            }
            if g.perm[g.face] != g.other_face {
                return Err(Error::InvalidInput(format!("gluing {g:?} does not match the faces")));
            }
            let fv: Vec<usize> = (0..4).filter(|&v| v != g.face).collect();
            if !fv.windows(2).all(|w| g.perm[w[0]] < g.perm[w[1]]) {
                return Err(Error::InvalidInput(format!("gluing {g:?} does not preserve the vertex order")));
            }
            for (t, f) in [(g.tet, g.face), (g.other, g.other_face)] {
                if used[t][f] {
                    return Err(Error::InvalidInput(format!("face {f} of simplex {t} glued twice")));
                }
                used[t][f] = true;
            }
            let sign = |t: usize, f: usize| orientations[t] * if f.is_multiple_of(2) { 1 } else { -1 };
            if sign(g.tet, g.face) + sign(g.other, g.other_face) != 0 {
                return Err(Error::InvalidInput(format!("gluing {g:?} does not cancel in the boundary")));
            }
            for &v in &fv {
                verts.union(4 * g.tet + v, 4 * g.other + g.perm[v]);
            }
            for (i, &a) in fv.iter().enumerate() {
                for &b in &fv[i + 1..] {
                    edges.union(6 * g.tet + edge_index(a, b), 6 * g.other + edge_index(g.perm[a], g.perm[b]));
                }
            }
        }
        let (el, edge_classes) = edges.labels();
        let (vl, vertex_classes) = verts.labels();
        let edge_class = (0..n).map(|t| std::array::from_fn(|e| el[6 * t + e])).collect();
        let vertex_class = (0..n).map(|t| std::array::from_fn(|v| vl[4 * t + v])).collect();
        let closed = used.iter().all(|u| u.iter().all(|&x| x));
        Ok(Triangulated3Cycle { orientations, gluings, edge_class, edge_classes, vertex_class, vertex_classes, closed })
    }

    pub fn tets(&self) -> usize {
        self.orientations.len()
    }

    pub fn orientation(&self, t: usize) -> i64 {
        self.orientations[t]
    }

    pub fn orientations(&self) -> &[i64] {
        &self.orientations
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn edge_class(&self, t: usize, e: usize) -> usize {
        self.edge_class[t][e]
    }

    pub fn edge_class_count(&self) -> usize {
        self.edge_classes
    }

    pub fn vertex_class(&self, t: usize, v: usize) -> usize {
        self.vertex_class[t][v]
    }

    pub fn vertex_class_count(&self) -> usize {
        self.vertex_classes
    }

    /// (simplex, edge) pairs making up an edge class.
    pub fn edge_members(&self, class: usize) -> Vec<(usize, usize)> {
        (0..self.tets()).flat_map(|t| (0..6).map(move |e| (t, e))).filter(|&(t, e)| self.edge_class[t][e] == class).collect()
    }

    /// Collapse per-simplex edge data to one value per edge class.
    pub fn class_values<T: Clone + PartialEq + std::fmt::Debug>(&self, per_simplex: &[[T; 6]]) -> Result<Vec<T>> {
        if per_simplex.len() != self.tets() {
            return Err(Error::InvalidInput("one row per simplex expected".into()));
        }
        let mut out: Vec<Option<T>> = vec![None; self.edge_classes];
        for (t, row) in per_simplex.iter().enumerate() {
            for (e, v) in row.iter().enumerate() {
                let slot = &mut out[self.edge_class[t][e]];
                match slot {
                    None => *slot = Some(v.clone()),
                    Some(x) if x == v => {}
                    Some(x) => {
                        return Err(Error::InvalidInput(format!("edge {:?} of simplex {t}: {v:?} != {x:?}", EDGES[e])));
                    }
                }
            }
        }
        Ok(out.into_iter().map(|v| v.expect("every class has a member")).collect())
    }

    fn simplex<T: Clone>(&self, values: &[T], t: usize) -> [T; 6] {
        std::array::from_fn(|e| values[self.edge_class[t][e]].clone())
    }
}

/// The cross-ratio of an ideal labeling of one simplex.
pub fn ideal_cross_ratio(c: &[FieldElement; 6]) -> Result<FieldElement> {
    let [c01, c02, c03, c12, c13, c23] = c;
    if c.iter().any(|x| x.is_zero()) {
        return Err(Error::NotIdeal("zero label".into()));
    }
    let den = c02.mul(c13);
    let z = c03.mul(c12).div(&den)?;
    if c01.mul(c23).div(&den)? != z.one_minus() {
        return Err(Error::NotIdeal(format!("c03·c12 + c01·c23 != c02·c13 for z = {z}")));
    }
    if z.is_one() {
        return Err(Error::NotIdeal("cross-ratio 1".into()));
    }
    Ok(z)
}

/// F*-labels on the edge classes of a cycle, ideal on every simplex.
#[derive(Clone, Debug)]
pub struct IdealCochain {
    values: Vec<FieldElement>,
    cross_ratios: Vec<FieldElement>,
}

impl IdealCochain {
    pub fn new(cycle: &Triangulated3Cycle, values: Vec<FieldElement>) -> Result<Self> {
        if values.len() != cycle.edge_class_count() {
            return Err(Error::InvalidInput("one label per edge class expected".into()));
        }
        let cross_ratios = (0..cycle.tets()).map(|t| ideal_cross_ratio(&cycle.simplex(&values, t))).collect::<Result<_>>()?;
        Ok(IdealCochain { values, cross_ratios })
    }

    /// c_ij = det(u_i, u_j) from vectors u_0..u_3 at the vertices of each
    /// simplex.
    pub fn from_vertex_vectors(cycle: &Triangulated3Cycle, vectors: &[[Vec2; 4]]) -> Result<Self> {
        let rows = vectors.iter().map(vector_cochain).collect::<Result<Vec<_>>>()?;
        IdealCochain::new(cycle, cycle.class_values(&rows)?)
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.values
    }

    pub fn cross_ratios(&self) -> &[FieldElement] {
        &self.cross_ratios
    }
}

/// E-labels on the edge classes over a basis.
#[derive(Clone, Debug)]
pub struct LiftedCochain {
    basis: MultBasis,
    values: Vec<ExtElement>,
}

impl LiftedCochain {
    pub fn new(basis: MultBasis, values: Vec<ExtElement>) -> Result<Self> {
        if values.iter().any(|v| v.rank() != basis.rank()) {
            return Err(Error::InvalidInput("label rank does not match the basis".into()));
        }
        Ok(LiftedCochain { basis, values })
    }

    /// Lift through the section of [`log_section`].
    pub fn lift(c: &IdealCochain) -> Result<Self> {
        let nf = c.values.first().ok_or_else(|| Error::InvalidInput("empty cochain".into()))?.field().clone();
        let (basis, values) = log_section(&nf, &c.values)?;
        Ok(LiftedCochain { basis, values })
    }

    pub fn basis(&self) -> &MultBasis {
        &self.basis
    }

    pub fn values(&self) -> &[ExtElement] {
        &self.values
    }

    pub fn project(&self) -> Vec<FieldElement> {
        self.values.iter().map(|v| self.basis.pi(v)).collect()
    }

    /// The lift with `by` added on one edge class.
    pub fn shifted(&self, class: usize, by: &ExtElement) -> LiftedCochain {
        let mut values = self.values.clone();
        values[class] = values[class].add(by);
        LiftedCochain { basis: self.basis.clone(), values }
    }
}

/// The flattening of one lifted simplex.
pub fn sigma_simplex(basis: &MultBasis, c: &[ExtElement; 6]) -> Result<Flattening> {
    let [c01, c02, c03, c12, c13, c23] = c;
    let d = c02.add(c13);
    let e = c03.add(c12).sub(&d);
    let f = c01.add(c23).sub(&d);
    Flattening::new(basis, e, f).map_err(|err| match err {
        Error::NotAFlattening(s) | Error::DegenerateTuple(s) => Error::NotIdeal(s),
        other => other,
    })
}

pub fn simplex_flattenings(cycle: &Triangulated3Cycle, c: &LiftedCochain) -> Result<Vec<Flattening>> {
    if c.values.len() != cycle.edge_class_count() {
        return Err(Error::InvalidInput("one label per edge class expected".into()));
    }
    (0..cycle.tets()).map(|t| sigma_simplex(&c.basis, &cycle.simplex(&c.values, t))).collect()
}

/// σ̂(c̃) = Σ ε_i (e_i, f_i); on a closed cycle ν̂ = 0 is checked.
pub fn sigma_hat(cycle: &Triangulated3Cycle, c: &LiftedCochain) -> Result<ExtBlochSum> {
    let flats = simplex_flattenings(cycle, c)?;
    let mut s = ExtBlochSum::for_basis(&c.basis);
    for (t, fl) in flats.iter().enumerate() {
        s.add_term(cycle.orientation(t), fl);
    }
    if cycle.is_closed() && !s.nu_hat().is_zero() {
        return Err(Error::NotIdeal("ν̂ of a closed cycle is nonzero".into()));
    }
    Ok(s)
}

/// Log-parameters of (e, f) in edge order.
pub fn log_params(fl: &Flattening) -> [ExtElement; 6] {
    let (e, f) = (&fl.e, &fl.f);
    let fe = f.sub(e);
    [e.clone(), fe.clone(), f.neg(), f.neg(), fe, e.clone()]
}

/// Signed log-parameter sums around each edge class.
#[derive(Clone, Debug)]
pub struct EdgeReport {
    pub sums: Vec<ExtElement>,
    pub violations: Vec<usize>,
}

impl EdgeReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn edge_conditions(cycle: &Triangulated3Cycle, flats: &[Flattening]) -> Result<EdgeReport> {
    if flats.len() != cycle.tets() {
        return Err(Error::InvalidInput("one flattening per simplex expected".into()));
    }
    let rank = flats.first().map_or(0, |f| f.rank());
    let mut sums = vec![ExtElement::zero(rank); cycle.edge_class_count()];
    for (t, fl) in flats.iter().enumerate() {
        for (e, p) in log_params(fl).iter().enumerate() {
            let c = cycle.edge_class(t, e);
            sums[c] = sums[c].add(&p.scale(cycle.orientation(t)));
        }
    }
    let violations = (0..sums.len()).filter(|&c| !sums[c].is_zero()).collect();
    Ok(EdgeReport { sums, violations })
}

/// Translate (p, q) in units of ½ = (m/2, 0): (e + p·½, f + q·½).
pub fn half_translate(fl: &Flattening, p: i64, q: i64, m: u64) -> Flattening {
    let r = fl.rank();
    let h = ExtElement::half(m, r);
    Flattening::unchecked(fl.e.add(&h.scale(p)), fl.f.add(&h.scale(q)))
}

/// The lexicographically first translates (p_i, q_i) in units of ½ with
/// |p_i|, |q_i| ≤ bound satisfying every edge condition; with `even` only
/// even translates are tried.
pub fn search_flattenings(cycle: &Triangulated3Cycle, base: &[Flattening], m: u64, bound: i64, even: bool) -> Result<Option<Vec<(i64, i64)>>> {
    let n = cycle.tets();
    if base.len() != n {
        return Err(Error::InvalidInput("one flattening per simplex expected".into()));
    }
    if n > 4 {
        return Err(Error::NotApplicable("exhaustive search is limited to 4 simplices".into()));
    }
    let start = edge_conditions(cycle, base)?;
    if start.sums.iter().any(|s| s.r.iter().any(|&x| x != 0)) {
        return Ok(None);
    }
    // k-sums are affine in the translates: ½·Σ ε (p·a_e + q·b_e)
    let coef_p = [1, -1, 0, 0, -1, 1];
    let coef_q = [0, 1, -1, -1, 1, 0];
    let half = m as i64 / 2;
    let values: Vec<i64> = (-bound..=bound).filter(|v| !even || v % 2 == 0).collect();
    let mut idx = vec![0usize; 2 * n];
    loop {
        let mut k: Vec<i64> = start.sums.iter().map(|s| s.k).collect();
        for t in 0..n {
            let (p, q) = (values[idx[2 * t]], values[idx[2 * t + 1]]);
            for e in 0..6 {
                k[cycle.edge_class(t, e)] += cycle.orientation(t) * half * (p * coef_p[e] + q * coef_q[e]);
            }
        }
        if k.iter().all(|&x| x == 0) {
            return Ok(Some((0..n).map(|t| (values[idx[2 * t]], values[idx[2 * t + 1]])).collect()));
        }
        let mut pos = 2 * n;
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < values.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Outcome of twisting a lifted cochain by a ±1 cocycle.
#[derive(Clone, Debug)]
pub struct Z2Twist {
    /// c̃ + ½ on the edges where α = -1
    pub twisted: LiftedCochain,
    /// parity of the simplices restricting to ⟨-1|-1|-1⟩
    pub class_bit: u8,
    pub deltas: Vec<u8>,
    /// σ̂(c̃') - σ̂(c̃)
    pub difference: ExtBlochSum,
    /// Σ ε_i (χ(w_i/2) + χ(δ_i)), w_i the log-parameter sum where α = -1
    pub predicted: ExtBlochSum,
    /// Σ ε_i χ(δ_i)
    pub delta_sum: ExtBlochSum,
    /// per simplex, whether its own difference is χ(w_i/2) + χ(δ_i)
    pub per_simplex: Vec<bool>,
}

/// α on the edge classes of a cycle; checked to be a cocycle on each face.
pub fn z2_twist(cycle: &Triangulated3Cycle, c: &LiftedCochain, alpha: &[i64]) -> Result<Z2Twist> {
    if alpha.len() != cycle.edge_class_count() || alpha.iter().any(|&a| a != 1 && a != -1) {
        return Err(Error::NotACocycle("one sign ±1 per edge class expected".into()));
    }
    for t in 0..cycle.tets() {
        let a = |i: usize, j: usize| alpha[cycle.edge_class(t, edge_index(i, j))];
        for face in 0..4 {
            let v: Vec<usize> = (0..4).filter(|&x| x != face).collect();
            if a(v[0], v[1]) * a(v[1], v[2]) != a(v[0], v[2]) {
                return Err(Error::NotACocycle(format!("face {face} of simplex {t}")));
            }
        }
    }
    let basis = &c.basis;
    let (m, rank) = (basis.m(), basis.rank());
    let half = basis.half();
    let twisted_vals = c.values.iter().zip(alpha).map(|(v, &a)| if a == -1 { v.add(&half) } else { v.clone() }).collect();
    let twisted = LiftedCochain { basis: basis.clone(), values: twisted_vals };
    let old = simplex_flattenings(cycle, c)?;
    let new = simplex_flattenings(cycle, &twisted)?;
    let mut difference = ExtBlochSum::for_basis(basis);
    let mut predicted = ExtBlochSum::for_basis(basis);
    let mut delta_sum = ExtBlochSum::for_basis(basis);
    let mut deltas = vec![];
    let mut per_simplex = vec![];
    for t in 0..cycle.tets() {
        let eps = cycle.orientation(t);
        let a = |e: usize| alpha[cycle.edge_class(t, e)];
        let params = log_params(&old[t]);
        let w = (0..6).filter(|&e| a(e) == -1).fold(ExtElement::zero(rank), |acc, e| acc.add(&params[e]));
        if w.k % 2 != 0 || w.r.iter().any(|x| x % 2 != 0) {
            return Err(Error::NotACocycle(format!("log-parameter sum on simplex {t} is not 2-divisible")));
        }
        let w_half = ExtElement::new(w.k / 2, w.r.iter().map(|x| x / 2).collect());
        let delta = (a(edge_index(0, 1)) == -1 && a(edge_index(1, 2)) == -1 && a(edge_index(2, 3)) == -1) as u8;
        let own = ExtBlochSum::single(m, &new[t]).sub(&ExtBlochSum::single(m, &old[t]));
        let chi_delta = ExtElement::iota(delta as i64, m, rank);
        let expect = ExtBlochSum::from_raw(m, rank, &[], &[w_half, chi_delta.clone()]);
        per_simplex.push(own == expect);
        difference = difference.add(&own.scale(eps));
        predicted = predicted.add(&expect.scale(eps));
        delta_sum.add_chi(&chi_delta.scale(eps));
        deltas.push(delta);
    }
    let class_bit = (deltas.iter().map(|&d| d as u32).sum::<u32>() % 2) as u8;
    Ok(Z2Twist { twisted, class_bit, deltas, difference, predicted, delta_sum, per_simplex })
}

/// The coboundary of ±1 signs on the vertex classes.
pub fn coboundary(cycle: &Triangulated3Cycle, beta: &[i64]) -> Result<Vec<i64>> {
    if beta.len() != cycle.vertex_class_count() {
        return Err(Error::InvalidInput("one sign per vertex class expected".into()));
    }
    let mut out = vec![0; cycle.edge_class_count()];
    for t in 0..cycle.tets() {
        for (e, &(a, b)) in EDGES.iter().enumerate() {
            out[cycle.edge_class(t, e)] = beta[cycle.vertex_class(t, a)] * beta[cycle.vertex_class(t, b)];
        }
    }
    Ok(out)
}

pub type Vec2 = [FieldElement; 2];
pub type Mat2 = [[FieldElement; 2]; 2];
pub type Vec3 = [FieldElement; 3];
/// An ordered basis of F³, leading vector first.
pub type Basis3 = [Vec3; 3];

pub fn det2(u: &Vec2, v: &Vec2) -> FieldElement {
    u[0].mul(&v[1]).sub(&u[1].mul(&v[0]))
}

pub fn mat_vec(g: &Mat2, v: &Vec2) -> Vec2 {
    std::array::from_fn(|i| g[i][0].mul(&v[0]).add(&g[i][1].mul(&v[1])))
}

pub fn det3(a: &Vec3, b: &Vec3, c: &Vec3) -> FieldElement {
    let minor = |i: usize, j: usize| b[i].mul(&c[j]).sub(&b[j].mul(&c[i]));
    a[0].mul(&minor(1, 2)).sub(&a[1].mul(&minor(0, 2))).add(&a[2].mul(&minor(0, 1)))
}

fn vector_cochain(u: &[Vec2; 4]) -> Result<[FieldElement; 6]> {
    let c: [FieldElement; 6] = std::array::from_fn(|e| det2(&u[EDGES[e].0], &u[EDGES[e].1]));
    if c.iter().any(|x| x.is_zero()) {
        return Err(Error::NotGeneralPosition("two vertex vectors are parallel".into()));
    }
    Ok(c)
}

/// Lift a batch of labeled simplices through one common section.
fn assemble(nf: &NumberField, simplices: &[[FieldElement; 6]]) -> Result<(MultBasis, Vec<Flattening>)> {
    let flat: Vec<FieldElement> = simplices.iter().flat_map(|c| c.iter().cloned()).collect();
    let (basis, logs) = log_section(nf, &flat)?;
    let flats = logs
        .chunks(6)
        .map(|ch| sigma_simplex(&basis, &std::array::from_fn(|e| ch[e].clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok((basis, flats))
}

fn signed_sum(basis: &MultBasis, signs: impl IntoIterator<Item = i64>, flats: &[Flattening]) -> ExtBlochSum {
    let mut s = ExtBlochSum::for_basis(basis);
    for (n, fl) in signs.into_iter().zip(flats) {
        s.add_term(n, fl);
    }
    s
}

/// Σ ε_i σ̂ of the determinant cochains of 4-tuples of vectors in F².
pub fn lambda_vectors(nf: &NumberField, simplices: &[(i64, [Vec2; 4])]) -> Result<(MultBasis, ExtBlochSum)> {
    let rows = simplices.iter().map(|(_, u)| vector_cochain(u)).collect::<Result<Vec<_>>>()?;
    let (basis, flats) = assemble(nf, &rows)?;
    let s = signed_sum(&basis, simplices.iter().map(|(e, _)| *e), &flats);
    Ok((basis, s))
}

/// λ̂ of Σ ε (g_0, .., g_3) in SL(2, F) through the orbit of v.
pub fn lambda_sl2(nf: &NumberField, tuples: &[(i64, [Mat2; 4])], v: &Vec2) -> Result<(MultBasis, ExtBlochSum)> {
    let mut simplices = vec![];
    for (eps, gs) in tuples {
        for g in gs {
            if !g[0][0].mul(&g[1][1]).sub(&g[0][1].mul(&g[1][0])).is_one() {
                return Err(Error::InvalidInput("matrix is not in SL(2)".into()));
            }
        }
        simplices.push((*eps, std::array::from_fn(|i| mat_vec(&gs[i], v))));
    }
    lambda_vectors(nf, &simplices)
}

/// The cochain c^i_w on the tuple v: log det with w inserted at position
/// 0, 1 or 2 according to where i falls relative to the edge.
fn alpha_cochain(v: [&Vec3; 4], w: &Vec3, i: usize) -> Result<[FieldElement; 6]> {
    let c: [FieldElement; 6] = std::array::from_fn(|e| {
        let (j, k) = EDGES[e];
        if i <= j {
            det3(w, v[j], v[k])
        } else if i <= k {
            det3(v[j], w, v[k])
        } else {
            det3(v[j], v[k], w)
        }
    });
    if c.iter().any(|x| x.is_zero()) {
        return Err(Error::NotGeneralPosition("a determinant vanishes".into()));
    }
    Ok(c)
}

/// The four labeled simplices of λ̂(F0, .., F3): term i uses the second
/// vector of F_i, w = the first vector of F_i, and superscript i.
pub fn flag_cochains(f: [&Basis3; 4]) -> Result<[[FieldElement; 6]; 4]> {
    let mut out = vec![];
    for i in 0..4 {
        let v: [&Vec3; 4] = std::array::from_fn(|j| if j == i { &f[j][1] } else { &f[j][0] });
        out.push(alpha_cochain(v, &f[i][0], i)?);
    }
    Ok(out.try_into().expect("four terms"))
}

pub fn flag_lambda(nf: &NumberField, f: &[Basis3; 4]) -> Result<(MultBasis, ExtBlochSum)> {
    flag_lambda_chain(nf, &[(1, f.clone())])
}

/// λ̂ of Σ ε (F0, .., F3).
pub fn flag_lambda_chain(nf: &NumberField, chain: &[(i64, [Basis3; 4])]) -> Result<(MultBasis, ExtBlochSum)> {
    let mut rows = vec![];
    let mut signs = vec![];
    for (eps, f) in chain {
        rows.extend(flag_cochains([&f[0], &f[1], &f[2], &f[3]])?);
        signs.extend([*eps; 4]);
    }
    let (basis, flats) = assemble(nf, &rows)?;
    let s = signed_sum(&basis, signs, &flats);
    Ok((basis, s))
}

/// Whether five flattenings satisfy the lifted five-term equations.
pub fn satisfies_five_term(fl: &[Flattening]) -> bool {
    let (e, f) = (|i: usize| &fl[i].e, |i: usize| &fl[i].f);
    fl.len() == 5
        && *e(2) == e(1).sub(e(0))
        && *e(3) == e(1).sub(e(0)).sub(f(1)).add(f(0))
        && *f(3) == f(2).sub(f(1))
        && *e(4) == f(0).sub(f(1))
        && *f(4) == f(2).sub(f(1)).add(e(0))
}

/// Boundary identities of the flag map on a 5-tuple of bases.
#[derive(Clone, Debug)]
pub struct BoundaryReport {
    /// ∂^j(.., F_j second vector, ..) with w = F_j leading vector, j = 0..4
    pub partial_j: [bool; 5],
    /// ∂ of the leading vectors, w running over them
    pub partial: bool,
    /// λ̂(∂(F0, .., F4)) minus the relations above is zero in normal form
    pub boundary_zero: bool,
}

impl BoundaryReport {
    pub fn holds(&self) -> bool {
        self.partial_j.iter().all(|&b| b) && self.partial && self.boundary_zero
    }
}

pub fn flag_boundary_check(nf: &NumberField, f: &[Basis3; 5]) -> Result<BoundaryReport> {
    let lead: Vec<&Vec3> = f.iter().map(|b| &b[0]).collect();
    let mut rows: Vec<[FieldElement; 6]> = vec![];
    // λ̂ of the faces, 20 simplices
    for k in 0..5 {
        let face: Vec<&Basis3> = (0..5).filter(|&j| j != k).map(|j| &f[j]).collect();
        rows.extend(flag_cochains([face[0], face[1], face[2], face[3]])?);
    }
    // ∂^j, 25 simplices: the term omitting k carries superscript j - 1 for k < j, j otherwise
    for j in 0..5 {
        let v: Vec<&Vec3> = (0..5).map(|i| if i == j { &f[i][1] } else { &f[i][0] }).collect();
        for k in 0..5 {
            let t: Vec<&Vec3> = (0..5).filter(|&i| i != k).map(|i| v[i]).collect();
            let sup = if k < j { j - 1 } else { j };
            rows.push(alpha_cochain([t[0], t[1], t[2], t[3]], &f[j][0], sup)?);
        }
    }
    // ∂, 5 simplices: omit k, w = v_k, superscript k
    for k in 0..5 {
        let t: Vec<&Vec3> = (0..5).filter(|&i| i != k).map(|i| lead[i]).collect();
        rows.push(alpha_cochain([t[0], t[1], t[2], t[3]], lead[k], k)?);
    }
    let (basis, flats) = assemble(nf, &rows)?;
    let alt = |k: usize| if k.is_multiple_of(2) { 1 } else { -1 };
    let partial_j: [bool; 5] = std::array::from_fn(|j| satisfies_five_term(&flats[20 + 5 * j..25 + 5 * j]));
    let partial = satisfies_five_term(&flats[45..50]);
    let mut s = signed_sum(&basis, (0..20).map(|i| alt(i / 4)), &flats[..20]);
    for j in 0..5 {
        s = s.sub(&signed_sum(&basis, (0..5).map(alt), &flats[20 + 5 * j..25 + 5 * j]));
    }
    s = s.add(&signed_sum(&basis, (0..5).map(alt), &flats[45..50]));
    Ok(BoundaryReport { partial_j, partial, boundary_zero: s.is_zero() })
}

/// Every three of the leading and second vectors are independent.
pub fn flags_in_general_position(f: &[Basis3]) -> bool {
    let vs: Vec<&Vec3> = f.iter().flat_map(|b| [&b[0], &b[1]]).collect();
    for a in 0..vs.len() {
        for b in a + 1..vs.len() {
            for c in b + 1..vs.len() {
                if det3(vs[a], vs[b], vs[c]).is_zero() {
                    return false;
                }
            }
        }
    }
    true
}

/// Draw until `accept` holds, at most [`MAX_RETRIES`] times.
pub fn rejection_sample<T>(mut draw: impl FnMut() -> T, mut accept: impl FnMut(&T) -> bool) -> Result<T> {
    for _ in 0..MAX_RETRIES {
        let x = draw();
        if accept(&x) {
            return Ok(x);
        }
    }
    Err(Error::NotGeneralPosition(format!("no acceptable draw in {MAX_RETRIES} attempts")))
}

/// A closed cycle with shapes and flattening translates in units of ½.
#[derive(Clone, Debug)]
pub struct FlattenedTriangulation {
    pub cycle: Triangulated3Cycle,
    pub shapes: Vec<FieldElement>,
    pub translates: Vec<(i64, i64)>,
}

impl FlattenedTriangulation {
    /// The basis and the flattenings (log z, log(1 - z)) before translation.
    pub fn base_flattenings(&self) -> Result<(MultBasis, Vec<Flattening>)> {
        let nf = self.shapes.first().ok_or_else(|| Error::InvalidInput("no shapes".into()))?.field().clone();
        if self.shapes.len() != self.cycle.tets() {
            return Err(Error::InvalidInput("one shape per simplex expected".into()));
        }
        let mut values = vec![];
        for z in &self.shapes {
            if z.is_zero() || z.is_one() {
                return Err(Error::NotIdeal(format!("shape {z}")));
            }
            values.push(z.clone());
            values.push(z.one_minus());
        }
        let (basis, logs) = log_section(&nf, &values)?;
        let flats = logs.chunks(2).map(|c| Flattening::unchecked(c[0].clone(), c[1].clone())).collect();
        Ok((basis, flats))
    }

    pub fn flattenings(&self) -> Result<(MultBasis, Vec<Flattening>)> {
        if self.translates.len() != self.cycle.tets() {
            return Err(Error::InvalidInput("one translate pair per simplex expected".into()));
        }
        let (basis, base) = self.base_flattenings()?;
        let flats = base.iter().zip(&self.translates).map(|(fl, &(p, q))| half_translate(fl, p, q, basis.m())).collect();
        Ok((basis, flats))
    }
}

/// Invariants of a flattened triangulation.
#[derive(Clone, Debug)]
pub struct ManifoldInvariant {
    pub basis: MultBasis,
    pub edges: EdgeReport,
    /// Σ ε_i (e_i, f_i); present when all translates are even
    pub element: Option<ExtBlochSum>,
    pub verdict: Option<WedgeVerdict>,
    pub regulators: Vec<SlotValue>,
    /// Σ ε_i D(z_i) per slot
    pub bloch_wigner: Vec<Float>,
    /// lifting test for twice the element in the PSL version
    pub obstruction: Option<LiftObstruction>,
}

pub fn manifold_invariant(t: &FlattenedTriangulation, precision: Precision) -> Result<ManifoldInvariant> {
    if !t.cycle.is_closed() {
        return Err(Error::InvalidInput("triangulation is not closed".into()));
    }
    let (basis, flats) = t.flattenings()?;
    let edges = edge_conditions(&t.cycle, &flats)?;
    if !edges.holds() {
        return Err(Error::EdgeConditionFailed(format!("edge classes {:?}", edges.violations)));
    }
    let m = basis.m();
    let mut psl = PslSum::zero(m, basis.rank());
    for (i, fl) in flats.iter().enumerate() {
        PslSum::signs(&basis, fl)?;
        psl.add_term(2 * t.cycle.orientation(i), fl);
    }
    let obstruction = psl.lift_obstruction(&basis).ok();
    let even = t.translates.iter().all(|&(p, q)| p % 2 == 0 && q % 2 == 0);
    let nf = basis.field().clone();
    let mut out = ManifoldInvariant { basis: basis.clone(), edges, element: None, verdict: None, regulators: vec![], bloch_wigner: vec![], obstruction };
    if even {
        let mut s = ExtBlochSum::for_basis(&basis);
        for (i, fl) in flats.iter().enumerate() {
            s.add_term(t.cycle.orientation(i), &Flattening::new(&basis, fl.e.clone(), fl.f.clone())?);
        }
        out.verdict = Some(s.is_in_bhat(&basis));
        out.regulators = reg_vector(&basis, &s, precision)?;
        out.bloch_wigner =
            (0..nf.slot_count()).map(|slot| bloch_wigner_sum(&basis, &s, &nf.embedding(slot, precision)?)).collect::<Result<_>>()?;
        out.element = Some(s);
    }
    Ok(out)
}
