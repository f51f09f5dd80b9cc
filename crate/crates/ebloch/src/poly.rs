//! Dense univariate polynomials over Q.

use crate::numeric::Cx;
use rug::{Float, Integer, Rational};
use std::fmt;

/// Coefficients low to high, no trailing zeros; the zero polynomial is empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    c: Vec<Rational>,
}

impl QPoly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(|x| *x == 0) {
            c.pop();
        }
        QPoly { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        QPoly::new(c.iter().map(|&x| Rational::from(x)).collect())
    }

    pub fn zero() -> Self {
        QPoly { c: vec![] }
    }

    pub fn constant(a: Rational) -> Self {
        QPoly::new(vec![a])
    }

    pub fn one() -> Self {
        QPoly::constant(Rational::from(1))
    }

    /// x^n
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![Rational::new(); n + 1];
        c[n] = Rational::from(1);
        QPoly { c }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    /// Coefficient of x^i, zero past the degree.
    pub fn coeff(&self, i: usize) -> Rational {
        self.c.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> Rational {
        self.c.last().cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn neg(&self) -> QPoly {
        QPoly { c: self.c.iter().map(|x| Rational::from(-x)).collect() }
    }

    pub fn scale(&self, a: &Rational) -> QPoly {
        QPoly::new(self.c.iter().map(|x| Rational::from(x * a)).collect())
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut c = vec![Rational::new(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += Rational::from(a * b);
            }
        }
        QPoly::new(c)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.lead();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let mut q = vec![Rational::new(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let t = Rational::from(&r[k + dd] / &lead);
            if t != 0 {
                for (j, dc) in d.c.iter().enumerate() {
                    r[k + j] -= Rational::from(&t * dc);
                }
            }
            q[k] = t;
        }
        r.truncate(dd);
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn rem(&self, d: &QPoly) -> QPoly {
        self.divrem(d).1
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead().recip();
        self.scale(&l)
    }

    /// Monic gcd.
    pub fn gcd(&self, o: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Returns (g, s, t) with s·self + t·o = g monic.
    pub fn ext_gcd(&self, o: &QPoly) -> (QPoly, QPoly, QPoly) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (QPoly::one(), QPoly::zero());
        let (mut t0, mut t1) = (QPoly::zero(), QPoly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s2 = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s2);
            let t2 = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t2);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let l = r0.lead().recip();
        (r0.scale(&l), s0.scale(&l), t0.scale(&l))
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(self.c.iter().enumerate().skip(1).map(|(i, a)| Rational::from(a * i as u32)).collect())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for a in self.c.iter().rev() {
            acc *= x;
            acc += a;
        }
        acc
    }

    pub fn eval_cx(&self, z: &Cx) -> Cx {
        let b = z.prec();
        let mut acc = Cx::zero(b);
        for a in self.c.iter().rev() {
            acc = acc.mul(z).add(&Cx::from_rational(b, a));
        }
        acc
    }

    /// Composition self(g).
    pub fn compose(&self, g: &QPoly) -> QPoly {
        let mut acc = QPoly::zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(g).add(&QPoly::constant(a.clone()));
        }
        acc
    }

    pub fn is_squarefree(&self) -> bool {
        match self.degree() {
            None => false,
            Some(0) => true,
            Some(_) => self.gcd(&self.derivative()).degree() == Some(0),
        }
    }

    /// Number of distinct real roots, by a Sturm sequence.
    pub fn count_real_roots(&self) -> usize {
        let Some(d) = self.degree() else { return 0 };
        if d == 0 {
            return 0;
        }
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.neg());
        }
        let changes = |signs: Vec<i32>| {
            let s: Vec<i32> = signs.into_iter().filter(|&x| x != 0).collect();
            s.windows(2).filter(|w| w[0] != w[1]).count()
        };
        let at_pos: Vec<i32> = seq.iter().map(|p| p.lead().cmp0() as i32).collect();
        let at_neg: Vec<i32> = seq
            .iter()
            .map(|p| {
                let s = p.lead().cmp0() as i32;
                if p.degree().unwrap_or(0) % 2 == 1 {
                    -s
                } else {
                    s
                }
            })
            .collect();
        changes(at_neg) - changes(at_pos)
    }

    /// The polynomial with integer coefficients and positive leading term
    /// obtained by clearing denominators and content.
    pub fn primitive_integer(&self) -> Vec<Integer> {
        let mut l = Integer::from(1);
        for a in &self.c {
            l.lcm_mut(a.denom());
        }
        let mut v: Vec<Integer> = self.c.iter().map(|a| Rational::from(a * &l).into_numer_denom().0).collect();
        let mut g = Integer::new();
        for a in &v {
            g.gcd_mut(a);
        }
        if g != 0 {
            for a in v.iter_mut() {
                *a /= &g;
            }
        }
        if v.last().is_some_and(|x| *x < 0) {
            for a in v.iter_mut() {
                *a = Integer::from(-&*a);
            }
        }
        v
    }

    /// All complex roots of a squarefree polynomial at `bits` of precision,
    /// by Aberth iteration followed by Newton polishing.
    pub fn complex_roots(&self, bits: u32) -> Vec<Cx> {
        let d = self.degree().unwrap_or(0);
        if d == 0 {
            return vec![];
        }
        let p = self.monic();
        let dp = p.derivative();
        // Cauchy bound for initial circle
        let mut bound = 0.0f64;
        for a in &p.c[..d] {
            bound = bound.max(a.to_f64().abs());
        }
        let radius = 1.0 + bound;
        let start_bits = 128.max(bits / 4).min(bits);
        let mut z: Vec<Cx> = (0..d)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64) / (d as f64) + 0.4;
                Cx::from_f64(start_bits, radius * 0.5 * t.cos(), radius * 0.5 * t.sin())
            })
            .collect();
        let pw = p.clone();
        let eps = Float::with_val(start_bits, Float::i_exp(1, -(start_bits as i32) + 16));
        for _ in 0..2000 {
            let mut max_step = Float::new(start_bits);
            for i in 0..d {
                let pv = pw.eval_cx(&z[i]);
                let dv = dp.eval_cx(&z[i]);
                if pv.is_zero() {
                    continue;
                }
                let ratio = pv.div(&dv);
                let mut s = Cx::zero(start_bits);
                for j in 0..d {
                    if j != i {
                        s = s.add(&z[i].sub(&z[j]).recip());
                    }
                }
                let one = Cx::from_int(start_bits, 1);
                let step = ratio.div(&one.sub(&ratio.mul(&s)));
                let a = step.abs();
                if a > max_step {
                    max_step = a;
                }
                z[i] = z[i].sub(&step);
            }
            if max_step < eps {
                break;
            }
        }
        // Newton polish at full precision, doubling
        let mut cur = start_bits;
        while cur < bits {
            cur = (cur * 2).min(bits);
            for r in z.iter_mut() {
                let mut x = r.with_prec(cur);
                for _ in 0..2 {
                    let step = p.eval_cx(&x).div(&dp.eval_cx(&x));
                    x = x.sub(&step);
                }
                *r = x;
            }
        }
        for r in z.iter_mut() {
            let mut x = r.with_prec(bits);
            for _ in 0..2 {
                let dv = dp.eval_cx(&x);
                if dv.is_zero() {
                    break;
                }
                x = x.sub(&p.eval_cx(&x).div(&dv));
            }
            *r = x;
        }
        z
    }

    /// Render in the variable `var`, highest degree first.
    pub fn fmt_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, a) in self.c.iter().enumerate().rev() {
            if *a == 0 {
                continue;
            }
            let neg = *a < 0;
            let abs = Rational::from(a.abs_ref());
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if i == 0 {
                out.push_str(&abs.to_string());
            } else if abs == 1 {
                out.push_str(&mono);
            } else if *abs.denom() == 1 {
                out.push_str(&format!("{abs}{mono}"));
            } else {
                out.push_str(&format!("({abs}){mono}"));
            }
        }
        out
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_var("x"))
    }
}

/// The m-th cyclotomic polynomial.
pub fn cyclotomic(m: u64) -> QPoly {
    let mut p = QPoly::monomial(m as usize).sub(&QPoly::one());
    for d in 1..m {
        if m.is_multiple_of(d) {
            p = p.divrem(&cyclotomic(d)).0;
        }
    }
    p
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = vec![];
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && prime_factors(n) == vec![n]
}

/// Characteristic polynomial det(xI - M) of a square rational matrix,
/// by the Faddeev–LeVerrier recursion.
pub fn charpoly(m: &[Vec<Rational>]) -> QPoly {
    let n = m.len();
    let mut c = vec![Rational::new(); n + 1];
    c[n] = Rational::from(1);
    let mut mk = vec![vec![Rational::new(); n]; n];
    for k in 1..=n {
        // M_k = M·M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![Rational::new(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Rational::new();
                for l in 0..n {
                    if mk[l][j] != 0 {
                        s += Rational::from(&m[i][l] * &mk[l][j]);
                    }
                }
                next[i][j] = s;
            }
            next[i][i] += &c[n - k + 1];
        }
        mk = next;
        // c_{n-k} = -tr(M·M_k)/k
        let mut tr = Rational::new();
        for i in 0..n {
            for l in 0..n {
                tr += Rational::from(&m[i][l] * &mk[l][i]);
            }
        }
        c[n - k] = -tr / Rational::from(k as u32);
    }
    QPoly::new(c)
}

/// Determinant by Gaussian elimination over Q.
pub fn det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut d = Rational::from(1);
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r][col] != 0) else {
            return Rational::new();
        };
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        let p = a[col][col].clone();
        d *= &p;
        for r in col + 1..n {
            if a[r][col] == 0 {
                continue;
            }
            let f = Rational::from(&a[r][col] / &p);
            for c in col..n {
                let t = Rational::from(&f * &a[col][c]);
                a[r][c] -= t;
            }
        }
    }
    d
}

/// Solve A x = b over Q for square nonsingular A.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(bi.clone());
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| m[r][col] != 0)?;
        m.swap(piv, col);
        let p = m[col][col].clone();
        for c in col..=n {
            m[col][c] /= &p;
        }
        for r in 0..n {
            if r != col && m[r][col] != 0 {
                let f = m[r][col].clone();
                for c in col..=n {
                    let t = Rational::from(&f * &m[col][c]);
                    m[r][c] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap_or_default()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn division_roundtrip() {
        let a = QPoly::from_ints(&[1, -1, 2, -2, 1]);
        let b = QPoly::from_ints(&[3, 0, 1]);
        let (qq, r) = a.divrem(&b);
        assert_eq!(qq.mul(&b).add(&r), a);
        assert!(r.degree().unwrap() < 2);
    }

    #[test]
    fn cyclotomic_table() {
        assert_eq!(cyclotomic(1), QPoly::from_ints(&[-1, 1]));
        assert_eq!(cyclotomic(6), QPoly::from_ints(&[1, -1, 1]));
        assert_eq!(cyclotomic(8), QPoly::from_ints(&[1, 0, 0, 0, 1]));
        assert_eq!(cyclotomic(12), QPoly::from_ints(&[1, 0, -1, 0, 1]));
        for m in 1..40 {
            assert_eq!(cyclotomic(m).degree().unwrap() as u64, euler_phi(m));
        }
    }

    #[test]
    fn sturm_counts() {
        assert_eq!(QPoly::from_ints(&[1, -1, 2, -2, 1]).count_real_roots(), 0);
        assert_eq!(QPoly::from_ints(&[-2, 0, 1]).count_real_roots(), 2);
        assert_eq!(QPoly::from_ints(&[-1, 0, 0, 1]).count_real_roots(), 1);
        assert_eq!(QPoly::from_ints(&[0, -1, 0, 1]).count_real_roots(), 3);
    }

    #[test]
    fn ext_gcd_identity() {
        let a = QPoly::from_ints(&[1, -1, 2, -2, 1]);
        let b = QPoly::from_ints(&[1, 2, 0, 1]);
        let (g, s, t) = a.ext_gcd(&b);
        assert_eq!(g, QPoly::one());
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
    }

    #[test]
    fn charpoly_companion() {
        // companion matrix of x^3 - 2x + 5
        let m = vec![
            vec![q(0, 1), q(0, 1), q(-5, 1)],
            vec![q(1, 1), q(0, 1), q(2, 1)],
            vec![q(0, 1), q(1, 1), q(0, 1)],
        ];
        assert_eq!(charpoly(&m), QPoly::from_ints(&[5, -2, 0, 1]));
        assert_eq!(det(&m), q(-5, 1));
    }

    #[test]
    fn roots_satisfy_poly() {
        let p = QPoly::from_ints(&[1, -1, 2, -2, 1]);
        let roots = p.complex_roots(300);
        assert_eq!(roots.len(), 4);
        let tol = Float::with_val(300, Float::i_exp(1, -280));
        for r in &roots {
            assert!(p.eval_cx(r).abs() < tol);
        }
    }

    #[test]
    fn display() {
        let p = QPoly::new(vec![q(1, 2), q(-1, 1), q(0, 1), q(3, 1)]);
        assert_eq!(p.to_string(), "3x^3 - x + 1/2");
    }
}
