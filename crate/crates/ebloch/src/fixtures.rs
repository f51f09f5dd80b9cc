//! JSON input formats shared by the command line, the FFI layer and tests.
//!
//! Rational coefficients are written either as JSON integers or as strings
//! `"p/q"`. A `field` entry is either an inline field object or a path to a
//! field file, resolved relative to the file that mentions it.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::cochain::{FlattenedTriangulation, Gluing, Triangulated3Cycle, Vec2};
use crate::error::{Error, Result};
use crate::extbloch::{BlochSum, ExtBlochSum, Flattening};
use crate::extgroup::{ExtElement, MultBasis};
use crate::field::{FieldElement, NumberField, TorsionHint};
use crate::poly::QPoly;

/// Degree above which irreducibility is not checked and must be asserted.
pub const IRREDUCIBILITY_CHECK_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Int(i64),
    Text(String),
}

impl Coeff {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Coeff::Int(n) => Ok(Rational::from(*n)),
            Coeff::Text(s) => Rational::from_str(s.trim()).map_err(|_| Error::InvalidInput(format!("bad rational {s:?}"))),
        }
    }

    pub fn from_rational(q: &Rational) -> Coeff {
        match (q.denom() == &1, q.numer().to_i64()) {
            (true, Some(n)) => Coeff::Int(n),
            _ => Coeff::Text(q.to_string()),
        }
    }
}

pub fn rationals(c: &[Coeff]) -> Result<Vec<Rational>> {
    c.iter().map(Coeff::to_rational).collect()
}

pub fn coeffs_of(x: &FieldElement) -> Vec<Coeff> {
    let mut c: Vec<Coeff> = x.coeffs().iter().map(Coeff::from_rational).collect();
    if c.is_empty() {
        c.push(Coeff::Int(0));
    }
    c
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HintSpec {
    pub order: u64,
    pub generator: Vec<Coeff>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldSpec {
    pub poly: Vec<Coeff>,
    #[serde(default)]
    pub assert_irreducible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion_hint: Option<HintSpec>,
}

impl FieldSpec {
    pub fn build(&self) -> Result<NumberField> {
        let p = QPoly::new(rationals(&self.poly)?);
        let d = p.degree().unwrap_or(0);
        if d > IRREDUCIBILITY_CHECK_LIMIT && !self.assert_irreducible {
            return Err(Error::InvalidInput(format!("degree {d} needs \"assert_irreducible\": true")));
        }
        let hint = match &self.torsion_hint {
            Some(h) => Some(TorsionHint { order: h.order, generator: rationals(&h.generator)? }),
            None => None,
        };
        NumberField::with_hint(&p, hint.as_ref())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldRef {
    Path(String),
    Inline(FieldSpec),
}

impl FieldRef {
    pub fn resolve(&self, dir: &Path) -> Result<FieldSpec> {
        match self {
            FieldRef::Inline(f) => Ok(f.clone()),
            FieldRef::Path(p) => parse_file(&dir.join(p)),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisSpec {
    pub free_gens: Vec<Vec<Coeff>>,
    #[serde(default)]
    pub saturated: bool,
}

impl BasisSpec {
    pub fn build(&self, nf: &NumberField) -> Result<MultBasis> {
        let gens = self.free_gens.iter().map(|g| Ok(nf.element(&rationals(g)?))).collect::<Result<Vec<_>>>()?;
        MultBasis::new(nf, gens, self.saturated)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtSpec {
    pub k: i64,
    pub r: Vec<i64>,
}

impl ExtSpec {
    pub fn to_ext(&self, rank: usize) -> Result<ExtElement> {
        if self.r.len() != rank {
            return Err(Error::InvalidInput(format!("expected {rank} free coordinates, got {}", self.r.len())));
        }
        Ok(ExtElement::new(self.k, self.r.clone()))
    }

    pub fn of(e: &ExtElement) -> ExtSpec {
        ExtSpec { k: e.k, r: e.r.clone() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermSpec {
    pub coeff: i64,
    pub e: ExtSpec,
    pub f: ExtSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlochTermSpec {
    pub coeff: i64,
    pub z: Vec<Coeff>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Approx {
    pub re: f64,
    pub im: f64,
}

/// An element of the extended pre-Bloch group over an explicit basis, with
/// an optional expected image in the pre-Bloch group and a chosen embedding.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementSpec {
    pub field: FieldRef,
    pub basis: BasisSpec,
    pub terms: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<ExtSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<Vec<BlochTermSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Approx>,
}

/// A loaded element fixture.
#[derive(Clone, Debug)]
pub struct ElementFixture {
    pub field: NumberField,
    pub basis: MultBasis,
    pub element: ExtBlochSum,
    pub bloch: Option<BlochSum>,
    pub embedding: Option<Approx>,
}

impl ElementSpec {
    pub fn build(&self, dir: &Path) -> Result<ElementFixture> {
        let field = self.field.resolve(dir)?.build()?;
        let basis = self.basis.build(&field)?;
        let r = basis.rank();
        let mut element = ExtBlochSum::for_basis(&basis);
        for t in &self.terms {
            let fl = Flattening::new(&basis, t.e.to_ext(r)?, t.f.to_ext(r)?)?;
            element.add_term(t.coeff, &fl);
        }
        if let Some(c) = &self.chi {
            element.add_chi(&c.to_ext(r)?);
        }
        let bloch = match &self.bloch {
            None => None,
            Some(ts) => Some(BlochSum::from_terms(
                ts.iter().map(|t| Ok((t.coeff, field.element(&rationals(&t.z)?)))).collect::<Result<Vec<_>>>()?,
            )?),
        };
        Ok(ElementFixture { field, basis, element, bloch, embedding: self.embedding })
    }

    /// Serialize an element held in normal form.
    pub fn from_sum(field: FieldRef, basis: &MultBasis, s: &ExtBlochSum) -> ElementSpec {
        ElementSpec {
            field,
            basis: BasisSpec { free_gens: basis.gens().iter().map(coeffs_of).collect(), saturated: basis.saturated_assertion() },
            terms: s.terms().map(|(fl, n)| TermSpec { coeff: n, e: ExtSpec::of(&fl.e), f: ExtSpec::of(&fl.f) }).collect(),
            chi: if s.chi_part().is_zero() { None } else { Some(ExtSpec::of(s.chi_part())) },
            bloch: None,
            embedding: None,
        }
    }
}

/// Gluing written as `[tet, face, tet', face', perm]`.
pub type GluingRow = (usize, usize, usize, usize, [usize; 4]);

fn cycle_from_rows(orientations: &[i64], gluings: &[GluingRow]) -> Result<Triangulated3Cycle> {
    let gl = gluings
        .iter()
        .map(|&(tet, face, other, other_face, perm)| Gluing { tet, face, other, other_face, perm })
        .collect();
    Triangulated3Cycle::new(orientations.to_vec(), gl)
}

/// A flattened triangulation: shapes per simplex and translates (p, q) in
/// units of ½ relative to the symbolic logarithms of z and 1 - z.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TriangulationSpec {
    pub field: FieldRef,
    pub tets: usize,
    pub gluings: Vec<GluingRow>,
    pub shapes: Vec<Vec<Coeff>>,
    pub flattenings: Vec<(i64, i64)>,
    pub orientations: Vec<i64>,
}

impl TriangulationSpec {
    pub fn build(&self, dir: &Path) -> Result<FlattenedTriangulation> {
        if self.orientations.len() != self.tets {
            return Err(Error::InvalidInput(format!("{} orientations for {} simplices", self.orientations.len(), self.tets)));
        }
        let nf = self.field.resolve(dir)?.build()?;
        let cycle = cycle_from_rows(&self.orientations, &self.gluings)?;
        let shapes = self.shapes.iter().map(|c| Ok(nf.element(&rationals(c)?))).collect::<Result<Vec<_>>>()?;
        Ok(FlattenedTriangulation { cycle, shapes, translates: self.flattenings.clone() })
    }
}

/// A cycle with vertex vectors in F² and ±1 labels on the simplex edges
/// (order 01, 02, 03, 12, 13, 23).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwistSpec {
    pub field: FieldRef,
    pub orientations: Vec<i64>,
    pub gluings: Vec<GluingRow>,
    pub vertices: Vec<[[Vec<Coeff>; 2]; 4]>,
    pub alpha: Vec<[i64; 6]>,
}

#[derive(Clone, Debug)]
pub struct TwistFixture {
    pub field: NumberField,
    pub cycle: Triangulated3Cycle,
    pub vertices: Vec<[Vec2; 4]>,
    /// α on edge classes
    pub alpha: Vec<i64>,
}

impl TwistSpec {
    pub fn build(&self, dir: &Path) -> Result<TwistFixture> {
        let field = self.field.resolve(dir)?.build()?;
        let cycle = cycle_from_rows(&self.orientations, &self.gluings)?;
        let mut vertices = vec![];
        for tet in &self.vertices {
            let mut vs = vec![];
            for v in tet {
                vs.push([field.element(&rationals(&v[0])?), field.element(&rationals(&v[1])?)]);
            }
            vertices.push(<[Vec2; 4]>::try_from(vs).expect("four vertices"));
        }
        if vertices.len() != cycle.tets() {
            return Err(Error::InvalidInput("one vertex tuple per simplex expected".into()));
        }
        let alpha = cycle.class_values(&self.alpha)?;
        Ok(TwistFixture { field, cycle, vertices, alpha })
    }
}

pub fn parse_str<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("JSON: {e}")))
}

pub fn parse_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    parse_str(&text).map_err(|e| match e {
        Error::InvalidInput(m) => Error::InvalidInput(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn parent(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn load_field(path: &Path) -> Result<NumberField> {
    parse_file::<FieldSpec>(path)?.build()
}

pub fn load_element(path: &Path) -> Result<ElementFixture> {
    parse_file::<ElementSpec>(path)?.build(&parent(path))
}

pub fn load_triangulation(path: &Path) -> Result<FlattenedTriangulation> {
    parse_file::<TriangulationSpec>(path)?.build(&parent(path))
}

pub fn load_twist(path: &Path) -> Result<TwistFixture> {
    parse_file::<TwistSpec>(path)?.build(&parent(path))
}

/// The bundled fixture directory of this crate.
pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}
