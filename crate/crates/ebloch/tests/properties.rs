//! Property tests for algebraic identities and formal sums.

use std::collections::BTreeMap;

use proptest::prelude::*;
use rug::{Float, Rational};

use ebloch::cochain::{det2, sigma_simplex, EDGES};
use ebloch::extbloch::{five_term, lift_five_term, rho_hat, ExtBlochSum, Flattening};
use ebloch::extgroup::{log_section, ExtElement, MultBasis};
use ebloch::field::{FieldElement, NumberField};
use ebloch::fixtures::{self, fixture_dir};
use ebloch::numeric::{bloch_wigner, Cx, Precision};
use ebloch::torsion::certify_order;

fn q() -> NumberField {
    NumberField::from_ints(&[0, 1]).unwrap()
}

fn example() -> NumberField {
    NumberField::from_ints(&[1, -2, 2, -1, 1]).unwrap()
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (prop_oneof![-40i64..=-1, 1i64..=40], 1i64..=40).prop_map(|(a, b)| Rational::from((a, b)))
}

/// Σ n a ⊗ b reduced to the quotient by a ⊗ b + b ⊗ a: antisymmetrized
/// off-diagonal entries and diagonal entries mod 2.
fn wedge_coords(terms: &[(i64, Vec<i64>, Vec<i64>)]) -> (BTreeMap<(usize, usize), i64>, Vec<usize>) {
    let dim = terms.first().map_or(0, |t| t.1.len());
    let mut t = vec![vec![0i64; dim]; dim];
    for (n, a, b) in terms {
        for i in 0..dim {
            for j in 0..dim {
                t[i][j] += n * a[i] * b[j];
            }
        }
    }
    let mut off = BTreeMap::new();
    for i in 0..dim {
        for j in i + 1..dim {
            let v = t[i][j] - t[j][i];
            if v != 0 {
                off.insert((i, j), v);
            }
        }
    }
    let diag = (0..dim).filter(|&i| t[i][i].rem_euclid(2) == 1).collect();
    (off, diag)
}

fn lifted_simplex(verts: &[(i64, i64); 4], shifts: &[i64; 6]) -> (MultBasis, [ExtElement; 6]) {
    let nf = q();
    let v: Vec<[FieldElement; 2]> = verts.iter().map(|&(a, b)| [nf.from_int(a), nf.from_int(b)]).collect();
    let labels: Vec<FieldElement> = EDGES.iter().map(|&(i, j)| det2(&v[i], &v[j])).collect();
    let (basis, logs) = log_section(&nf, &labels).unwrap();
    let c: [ExtElement; 6] = std::array::from_fn(|k| logs[k].add(&basis.iota(shifts[k])));
    (basis, c)
}

fn general_position(verts: &[(i64, i64); 4]) -> bool {
    (0..4).all(|i| (i + 1..4).all(|j| verts[i].0 * verts[j].1 - verts[i].1 * verts[j].0 != 0))
}

fn vertex_strategy() -> impl Strategy<Value = [(i64, i64); 4]> {
    prop::array::uniform4((-6i64..=6, -6i64..=6)).prop_filter("general position", general_position)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// ν̂∘σ̂ = μ∘∂ on a lifted simplex, with μ(c) = -c01∧c02 + c01∧c12 - c02∧c12 + c02∧c02
    /// on a triangle and ∂ the alternating sum of the four faces.
    #[test]
    fn sigma_is_a_chain_map(verts in vertex_strategy(), shifts in prop::array::uniform6(-3i64..=3)) {
        let (basis, c) = lifted_simplex(&verts, &shifts);
        let fl = sigma_simplex(&basis, &c).unwrap();
        let lhs = ExtBlochSum::single(basis.m(), &fl).nu_hat();
        let lhs: Vec<(i64, Vec<i64>, Vec<i64>)> = lhs.terms.iter().map(|(n, a, b)| (*n, a.coords(), b.coords())).collect();
        let edge = |a: usize, b: usize| c[EDGES.iter().position(|&e| e == (a, b)).unwrap()].coords();
        let mut rhs = vec![];
        for omit in 0..4 {
            let sign = if omit % 2 == 0 { 1 } else { -1 };
            let f: Vec<usize> = (0..4).filter(|&v| v != omit).collect();
            let (c01, c02, c12) = (edge(f[0], f[1]), edge(f[0], f[2]), edge(f[1], f[2]));
            rhs.push((-sign, c01.clone(), c02.clone()));
            rhs.push((sign, c01, c12.clone()));
            rhs.push((-sign, c02.clone(), c12));
            rhs.push((sign, c02.clone(), c02));
        }
        prop_assert_eq!(wedge_coords(&lhs), wedge_coords(&rhs));
    }

    /// Lifted five-term relations over Q lie in the kernel of ν̂.
    #[test]
    fn lifted_five_term_in_kernel(x in nonzero_rational(), y in nonzero_rational(), t in prop::array::uniform4(-3i64..=3)) {
        let nf = q();
        let (x, y) = (nf.from_rational(x), nf.from_rational(y));
        let Ok(five) = five_term(&x, &y) else { return Ok(()) };
        let values: Vec<FieldElement> = five.iter().flat_map(|z| [z.clone(), z.one_minus()]).collect();
        let (basis, _) = log_section(&nf, &values).unwrap();
        let m = basis.m();
        let fl0 = Flattening::of(&basis, &x).unwrap().translate(t[0], t[1], m);
        let fl1 = Flattening::of(&basis, &y).unwrap().translate(t[2], t[3], m);
        let rel = lift_five_term(&basis, &fl0, &fl1).unwrap();
        for (fl, z) in rel.iter().zip(&five) {
            prop_assert_eq!(&fl.z(&basis), z);
        }
        prop_assert!(rho_hat(m, &rel).nu_hat().is_zero());
    }

    /// Normal form: sums are commutative, s - s = 0, and translating f by
    /// q ι(1) adds q χ(e).
    #[test]
    fn normal_form_laws(a in 0usize..6, b in 0usize..6, p in -4i64..=4, qq in -4i64..=4, n in -3i64..=3) {
        let nf = example();
        let u = nf.element_from_ints(&[1, -2, 0, -1]);
        let basis = MultBasis::new(&nf, vec![u], true).unwrap();
        let pool = [
            (ExtElement::new(0, vec![1]), ExtElement::new(4, vec![2])),
            (ExtElement::new(3, vec![-2]), ExtElement::new(1, vec![-3])),
            (ExtElement::new(4, vec![2]), ExtElement::new(0, vec![1])),
            (ExtElement::new(1, vec![-3]), ExtElement::new(3, vec![-2])),
            (ExtElement::new(1, vec![0]), ExtElement::new(5, vec![0])),
            (ExtElement::new(5, vec![0]), ExtElement::new(1, vec![0])),
        ];
        let m = basis.m();
        let fl = |i: usize| Flattening::new(&basis, pool[i].0.clone(), pool[i].1.clone()).unwrap();
        let s = ExtBlochSum::single(m, &fl(a).translate(p, 0, m)).scale(n);
        let t = ExtBlochSum::single(m, &fl(b));
        prop_assert_eq!(s.add(&t), t.add(&s));
        prop_assert!(s.sub(&s).is_zero());
        let shifted = ExtBlochSum::single(m, &fl(a).translate(0, qq, m)).sub(&ExtBlochSum::single(m, &fl(a)));
        prop_assert_eq!(shifted, ExtBlochSum::chi_of(m, &fl(a).e.scale(qq)));
    }

    /// Field arithmetic in the example field: (ab)/a = b and N(ab) = N(a)N(b).
    #[test]
    fn field_arithmetic(a in prop::collection::vec(-9i64..=9, 4), b in prop::collection::vec(-9i64..=9, 4)) {
        let nf = example();
        let (x, y) = (nf.element_from_ints(&a), nf.element_from_ints(&b));
        prop_assume!(!x.is_zero());
        prop_assert_eq!(&x.mul(&y).div(&x).unwrap(), &y);
        prop_assert_eq!(x.mul(&y).norm(), x.norm() * y.norm());
        for g in nf.automorphisms().unwrap() {
            prop_assert_eq!(x.apply(&g).norm(), x.norm());
        }
    }

    /// D(z) = -D(1/z) = -D(1 - z) = -D(z̄).
    #[test]
    fn bloch_wigner_symmetries(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        prop_assume!(im.abs() > 1e-3);
        let bits = 200;
        let z = Cx::from_f64(bits, re, im);
        let one = Cx::from_int(bits, 1);
        let d = bloch_wigner(&z);
        let tol = Float::with_val(bits, 1e-50);
        for other in [bloch_wigner(&z.recip()), bloch_wigner(&one.sub(&z)), bloch_wigner(&z.conj())] {
            prop_assert!(Float::with_val(bits, &d + &other).abs() < tol);
        }
    }
}

/// certify_order(k s) = certify_order(s) / gcd(k, certify_order(s)) on the
/// torsion fixtures.
#[test]
fn order_of_multiples() {
    let dir = fixture_dir();
    let prec = Precision::new(30);
    let fx = fixtures::load_element(&dir.join("q_beta3_lifted.json")).unwrap();
    let nf = fixtures::load_field(&dir.join("q_sqrt2.json")).unwrap();
    let ft = ebloch::torsion::flattened_torsion(&nf, 2).unwrap();
    for (basis, s) in [(&fx.basis, &fx.element), (&ft.basis, &ft.element)] {
        let n = certify_order(basis, s, prec).unwrap();
        for k in 1..=2 * n as i64 {
            let g = gcd(k as u64, n);
            assert_eq!(certify_order(basis, &s.scale(k), prec).unwrap(), n / g, "k = {k}");
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
