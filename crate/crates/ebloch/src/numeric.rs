//! Multiprecision complex arithmetic and the dilogarithm.
//!
//! Everything here works at an explicit binary precision. The public entry
//! points that take decimal digits convert with [`Precision`], which also
//! owns the guard-digit policy.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use std::fmt;
use std::sync::{Mutex, OnceLock};

/// Requested decimal precision plus the derived working precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    pub digits: u32,
}

impl Precision {
    pub fn new(digits: u32) -> Self {
        Precision { digits }
    }

    /// Guard digits: a fifth of the request, never fewer than ten.
    pub fn guard(&self) -> u32 {
        (self.digits / 5).max(10)
    }

    /// Binary working precision covering digits + guard.
    pub fn bits(&self) -> u32 {
        digits_to_bits(self.digits + self.guard())
    }

    /// The same request with more digits, used by audits that recompute.
    pub fn raised(&self, extra: u32) -> Self {
        Precision { digits: self.digits + extra }
    }

    /// Tolerance 10^-(digits) as a float at working precision.
    pub fn tolerance(&self) -> Float {
        ten_pow(-(self.digits as i32), self.bits())
    }
}

pub fn digits_to_bits(d: u32) -> u32 {
    ((d as f64) * std::f64::consts::LOG2_10).ceil() as u32 + 8
}

pub fn ten_pow(e: i32, bits: u32) -> Float {
    let ten = Float::with_val(bits, 10);
    ten.pow(e)
}

pub fn pi(bits: u32) -> Float {
    Float::with_val(bits, Constant::Pi)
}

/// Nearest integer, ties away from zero.
pub fn round_int(x: &Float) -> Integer {
    x.to_integer().unwrap_or_default()
}

/// A complex number with real and imaginary parts at a shared precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Cx {
    pub re: Float,
    pub im: Float,
}

impl Cx {
    pub fn zero(bits: u32) -> Self {
        Cx { re: Float::new(bits), im: Float::new(bits) }
    }

    pub fn real(x: Float) -> Self {
        let bits = x.prec();
        Cx { re: x, im: Float::new(bits) }
    }

    pub fn new(re: Float, im: Float) -> Self {
        Cx { re, im }
    }

    pub fn from_f64(bits: u32, re: f64, im: f64) -> Self {
        Cx { re: Float::with_val(bits, re), im: Float::with_val(bits, im) }
    }

    pub fn from_rational(bits: u32, q: &Rational) -> Self {
        Cx::real(Float::with_val(bits, q))
    }

    pub fn from_int(bits: u32, n: i64) -> Self {
        Cx::real(Float::with_val(bits, n))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn with_prec(&self, bits: u32) -> Self {
        Cx { re: Float::with_val(bits, &self.re), im: Float::with_val(bits, &self.im) }
    }

    /// 2πi·n
    pub fn two_pi_i(bits: u32, n: &Integer) -> Self {
        let im = Float::with_val(bits, pi(bits) * 2u32) * n;
        Cx { re: Float::new(bits), im }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Cx) -> Cx {
        let b = self.prec();
        Cx { re: Float::with_val(b, &self.re + &o.re), im: Float::with_val(b, &self.im + &o.im) }
    }

    pub fn sub(&self, o: &Cx) -> Cx {
        let b = self.prec();
        Cx { re: Float::with_val(b, &self.re - &o.re), im: Float::with_val(b, &self.im - &o.im) }
    }

    pub fn neg(&self) -> Cx {
        Cx { re: Float::with_val(self.prec(), -&self.re), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn conj(&self) -> Cx {
        Cx { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn mul(&self, o: &Cx) -> Cx {
        let b = self.prec();
        let re = Float::with_val(b, &self.re * &o.re) - Float::with_val(b, &self.im * &o.im);
        let im = Float::with_val(b, &self.re * &o.im) + Float::with_val(b, &self.im * &o.re);
        Cx { re, im }
    }

    pub fn scale(&self, x: &Float) -> Cx {
        let b = self.prec();
        Cx { re: Float::with_val(b, &self.re * x), im: Float::with_val(b, &self.im * x) }
    }

    pub fn scale_int(&self, n: &Integer) -> Cx {
        let b = self.prec();
        Cx { re: Float::with_val(b, &self.re * n), im: Float::with_val(b, &self.im * n) }
    }

    pub fn scale_i64(&self, n: i64) -> Cx {
        self.scale_int(&Integer::from(n))
    }

    pub fn norm_sqr(&self) -> Float {
        let b = self.prec();
        Float::with_val(b, self.re.square_ref()) + Float::with_val(b, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        let b = self.prec();
        Float::with_val(b, self.re.hypot_ref(&self.im))
    }

    pub fn recip(&self) -> Cx {
        let n = self.norm_sqr();
        let b = self.prec();
        Cx { re: Float::with_val(b, &self.re / &n), im: Float::with_val(b, -&self.im) / &n }
    }

    pub fn div(&self, o: &Cx) -> Cx {
        self.mul(&o.recip())
    }

    /// Argument in (-π, π]; a zero imaginary part counts as +0.
    pub fn arg(&self) -> Float {
        let b = self.prec();
        if self.im.is_zero() {
            if self.re.is_sign_negative() && !self.re.is_zero() {
                pi(b)
            } else {
                Float::new(b)
            }
        } else {
            Float::with_val(b, self.im.atan2_ref(&self.re))
        }
    }

    /// Principal logarithm, cut along (-∞, 0].
    pub fn log(&self) -> Cx {
        let b = self.prec();
        let re = Float::with_val(b, self.norm_sqr().ln()) / 2u32;
        Cx { re, im: self.arg() }
    }

    pub fn exp(&self) -> Cx {
        let b = self.prec();
        let r = Float::with_val(b, self.re.exp_ref());
        let (s, c) = Float::with_val(b, &self.im).sin_cos(Float::new(b));
        Cx { re: Float::with_val(b, &r * &c), im: r * s }
    }

    pub fn powi(&self, mut n: i64) -> Cx {
        let b = self.prec();
        let mut base = if n < 0 { self.recip() } else { self.clone() };
        n = n.abs();
        let mut acc = Cx::from_int(b, 1);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    /// |self - o| <= tol
    pub fn close_to(&self, o: &Cx, tol: &Float) -> bool {
        self.sub(o).abs() <= *tol
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        write!(f, "{}", fmt_complex(self, digits))
    }
}

/// Fixed-point decimal rendering with `digits` places after the point.
pub fn fmt_real(x: &Float, digits: usize) -> String {
    let scaled = Float::with_val(x.prec(), x * ten_pow(digits as i32, x.prec()));
    let n = round_int(&scaled);
    let neg = n < 0;
    let s = n.abs().to_string();
    let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
    let (ip, fp) = s.split_at(s.len() - digits);
    let body = if digits == 0 { ip.to_string() } else { format!("{ip}.{fp}") };
    if neg && body.chars().any(|c| c.is_ascii_digit() && c != '0') {
        format!("-{body}")
    } else {
        body
    }
}

pub fn fmt_complex(z: &Cx, digits: usize) -> String {
    let re = fmt_real(&z.re, digits);
    let im = fmt_real(&z.im, digits);
    match im.strip_prefix('-') {
        Some(abs) => format!("{re} - {abs}i"),
        None => format!("{re} + {im}i"),
    }
}

fn bernoulli_cache() -> &'static Mutex<Vec<Rational>> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![Rational::from(1)]))
}

/// Bernoulli numbers B_0..=B_n with B_1 = -1/2.
pub fn bernoulli_upto(n: usize) -> Vec<Rational> {
    let mut cache = bernoulli_cache().lock().expect("bernoulli cache poisoned");
    while cache.len() <= n {
        // sum_{k=0}^{m} C(m+1, k) B_k = 0
        let m = cache.len();
        let mut acc = Rational::new();
        for (k, bk) in cache.iter().enumerate() {
            let c = Integer::from(Integer::binomial_u(m as u32 + 1, k as u32));
            acc += Rational::from(bk * c);
        }
        let bm = -acc / Rational::from(m as u32 + 1);
        cache.push(bm);
    }
    cache[..=n].to_vec()
}

fn li2_series(z: &Cx) -> Cx {
    // sum z^k / k^2 for |z| <= 1/2
    let b = z.prec();
    let eps = Float::with_val(b, Float::i_exp(1, -(b as i32) - 4));
    let mut acc = Cx::zero(b);
    let mut pw = z.clone();
    let mut k: u64 = 1;
    loop {
        let kk = Float::with_val(b, k * k);
        let term = Cx { re: Float::with_val(b, &pw.re / &kk), im: Float::with_val(b, &pw.im / &kk) };
        acc = acc.add(&term);
        if term.abs() < eps {
            break;
        }
        pw = pw.mul(z);
        k += 1;
    }
    acc
}

fn li2_bernoulli(z: &Cx) -> Cx {
    // Li2(z) = sum_{n>=0} B_n u^{n+1}/(n+1)!, u = -Log(1-z), |u| < 2π
    let b = z.prec();
    let one = Cx::from_int(b, 1);
    let u = one.sub(z).log().neg();
    let u2 = u.mul(&u);
    let eps = Float::with_val(b, Float::i_exp(1, -(b as i32) - 4));
    // n = 0 and n = 1 terms: u - u^2/4
    let mut acc = u.sub(&u2.scale(&Float::with_val(b, 0.25)));
    let mut pw = u.clone(); // u^{n+1}/(n+1)! at n = 0
    let mut n = 0usize;
    let mut small_run = 0;
    loop {
        pw = pw.mul(&u2).scale(&(Float::with_val(b, 1) / Float::with_val(b, (n + 2) * (n + 3))));
        n += 2;
        let bn = bernoulli_upto(n).pop().unwrap_or_default();
        let term = pw.scale(&Float::with_val(b, &bn));
        acc = acc.add(&term);
        if term.abs() < eps {
            small_run += 1;
            if small_run >= 2 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    acc
}

/// Principal dilogarithm. The cut [1, ∞) is approached from below, so for
/// real x > 1 the imaginary part is -π ln x.
pub fn li2(z: &Cx) -> Cx {
    let b = z.prec();
    let work = b + 16;
    let zz = z.with_prec(work);
    let r = li2_work(&zz);
    r.with_prec(b)
}

fn li2_work(z: &Cx) -> Cx {
    let b = z.prec();
    let one = Cx::from_int(b, 1);
    let p = pi(b);
    let pi2_6 = Float::with_val(b, p.square_ref()) / 6u32;
    if z.is_zero() {
        return Cx::zero(b);
    }
    if z.im.is_zero() && z.re == 1 {
        return Cx::real(pi2_6);
    }
    if z.im.is_zero() && z.re > 1 {
        // Re Li2(x) = π²/3 - ln²x/2 - Li2(1/x), Im = -π ln x from below
        let lx = Float::with_val(b, z.re.ln_ref());
        let inv = Cx::real(Float::with_val(b, z.re.recip_ref()));
        let l_inv = li2_work(&inv);
        let re = Float::with_val(b, &pi2_6 * 2u32) - Float::with_val(b, lx.square_ref()) / 2u32 - l_inv.re;
        let im = -Float::with_val(b, &p * &lx);
        return Cx { re, im };
    }
    let az = z.abs();
    let half = Float::with_val(b, 0.5);
    if az <= half {
        return li2_series(z);
    }
    let w = one.sub(z);
    if w.abs() <= half {
        // Li2(z) = π²/6 - Log z Log(1-z) - Li2(1-z)
        let t = z.log().mul(&w.log());
        return Cx::real(pi2_6).sub(&t).sub(&li2_series(&w));
    }
    if az >= Float::with_val(b, 2) {
        // Li2(z) = -Li2(1/z) - π²/6 - Log²(-z)/2
        let inv = z.recip();
        let l = z.neg().log();
        let l2 = l.mul(&l).scale(&half);
        return li2_work(&inv).neg().sub(&Cx::real(pi2_6)).sub(&l2);
    }
    li2_bernoulli(z)
}

/// Bloch–Wigner function D(z) = Im Li2(z) + arg(1-z) ln|z|.
pub fn bloch_wigner(z: &Cx) -> Float {
    let b = z.prec();
    if z.im.is_zero() {
        return Float::new(b);
    }
    let one = Cx::from_int(b, 1);
    let l = li2(z);
    let a = one.sub(z).arg();
    let ln = Float::with_val(b, z.norm_sqr().ln()) / 2u32;
    l.im + Float::with_val(b, &a * &ln)
}

/// Reduce x into [0, modulus).
pub fn reduce_mod(x: &Float, modulus: &Float) -> Float {
    let b = x.prec();
    let q = Float::with_val(b, x / modulus).floor();
    let mut r = Float::with_val(b, x - Float::with_val(b, &q * modulus));
    if r < 0 {
        r += modulus;
    }
    if r >= *modulus {
        r -= modulus;
    }
    r
}

/// Reduce x into [-modulus/2, modulus/2).
pub fn reduce_symmetric(x: &Float, modulus: &Float) -> Float {
    let b = x.prec();
    let half = Float::with_val(b, modulus / 2u32);
    let shifted = Float::with_val(b, x + &half);
    reduce_mod(&shifted, modulus) - half
}

/// Continued-fraction convergents of x; returns the last with denominator
/// at most `max_den`.
pub fn best_rational(x: &Float, max_den: &Integer) -> Rational {
    let b = x.prec();
    let (mut h0, mut h1) = (Integer::from(0), Integer::from(1));
    let (mut k0, mut k1) = (Integer::from(1), Integer::from(0));
    let mut y = x.clone();
    let mut best = Rational::from(round_int(x));
    for _ in 0..(b as usize) {
        let a = Float::with_val(b, y.floor_ref()).to_integer().unwrap_or_default();
        let h2 = Integer::from(&a * &h1) + &h0;
        let k2 = Integer::from(&a * &k1) + &k0;
        if k2 > *max_den {
            break;
        }
        best = Rational::from((h2.clone(), k2.clone()));
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = Float::with_val(b, &y - &a);
        if frac.is_zero() || frac < Float::with_val(b, Float::i_exp(1, -(b as i32) + 8)) {
            break;
        }
        y = frac.recip();
    }
    best
}

/// Solve A x = b over C by Gaussian elimination with partial pivoting.
pub fn solve_cx(mut a: Vec<Vec<Cx>>, mut b: Vec<Cx>) -> Option<Vec<Cx>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if a[piv][col].is_zero() {
            return None;
        }
        a.swap(piv, col);
        b.swap(piv, col);
        let inv = a[col][col].recip();
        for r in col + 1..n {
            let f = a[r][col].mul(&inv);
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let t = f.mul(&a[col][c]);
                a[r][c] = a[r][c].sub(&t);
            }
            let t = f.mul(&b[col]);
            b[r] = b[r].sub(&t);
        }
    }
    let mut x = vec![Cx::zero(b[0].prec()); n];
    for r in (0..n).rev() {
        let mut s = b[r].clone();
        for c in r + 1..n {
            s = s.sub(&a[r][c].mul(&x[c]));
        }
        x[r] = s.div(&a[r][r]);
    }
    Some(x)
}
