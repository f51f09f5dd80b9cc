//! Command-line front end.
//!
//! Every command renders a plain-text report or, with `--json`, a JSON
//! document. Output depends only on the inputs and flags. Exit codes: 0 on
//! success, 2 for unreadable or malformed input, 3 when a computation or a
//! verification fails, 4 when the working precision runs out.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rug::{Float, Rational};
use serde_json::{json, Value};

use crate::cochain::{manifold_invariant, search_flattenings};
use crate::error::{Error, Result};
use crate::extbloch::{five_term, lift_five_term, rho_hat, Flattening};
use crate::extgroup::{cover_to_c, log_section, Branch, MultBasis};
use crate::field::{FieldElement, NumberField};
use crate::fixtures::{self, parse_file, BasisSpec};
use crate::numeric::{fmt_complex, fmt_real, ten_pow, Precision};
use crate::regulator::{bloch_wigner_sum, reg_sum, reg_vector, RegulatorValue, SlotValue};
use crate::torsion::{beta_p, certify_order, flattened_torsion, profile};

pub const MIN_PRECISION: u32 = 20;

#[derive(Parser, Debug)]
#[command(name = "ebloch", version, about = "Extended Bloch groups of number fields")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Working precision in decimal digits (at least 20)
    #[arg(long, global = true, default_value_t = 50)]
    pub precision: u32,
    /// Zero tolerance for numerical checks [default: 1e-(precision-10)]
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Print real parts of regulators in [-2π², 2π²) instead of [0, 4π²)
    #[arg(long, global = true)]
    pub symmetric_range: bool,
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Number field data
    #[command(subcommand)]
    Field(FieldCmd),
    /// Elements of the extended Bloch group
    #[command(subcommand)]
    Bloch(BlochCmd),
    /// Lifted five-term relations
    #[command(subcommand)]
    Fiveterm(FivetermCmd),
    /// Torsion of the extended Bloch group
    #[command(subcommand)]
    Torsion(TorsionCmd),
    /// Flattened 3-cycles
    #[command(subcommand)]
    Cycle(CycleCmd),
}

#[derive(Subcommand, Debug)]
pub enum FieldCmd {
    /// Degree, signature, roots of unity, automorphisms and embeddings
    Info { field: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum BlochCmd {
    /// Decide membership in the extended Bloch group and in the Bloch group
    Verify { element: PathBuf },
    /// Regulator at every embedding
    Regulator { element: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum FivetermCmd {
    /// Lift the five-term relation of (x, y) and check that it vanishes
    Check {
        field: PathBuf,
        /// coefficients of x, comma separated, e.g. "1/2" or "0,1"
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        /// basis file covering all ten values; derived automatically over Q
        #[arg(long)]
        basis: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum TorsionCmd {
    /// ν_p, ν'_p, w_F and the generators β_p
    Table { field: PathBuf },
    /// The flattened torsion generators
    Generators { field: PathBuf },
    /// Certified orders of the generators, or of an element fixture
    Order {
        file: PathBuf,
        /// restrict to one prime
        #[arg(long)]
        prime: Option<u64>,
        /// treat FILE as an element fixture
        #[arg(long)]
        element: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum CycleCmd {
    /// Edge conditions, regulator, Bloch-Wigner sum and PSL lifting test
    Invariant {
        triangulation: PathBuf,
        /// replace the stored translates by the first even solution with |p|, |q| <= 4
        #[arg(long)]
        search: bool,
    },
}

/// A rendered command result. `failed` marks a verification that came out
/// negative; the report is still printed.
pub struct Report {
    pub text: String,
    pub json: Value,
    pub failed: bool,
}

struct Ctx {
    precision: Precision,
    digits: usize,
    tol: Float,
    symmetric: bool,
}

impl Ctx {
    fn new(o: &Options) -> Result<Self> {
        if o.precision < MIN_PRECISION {
            return Err(Error::InvalidInput(format!("precision must be at least {MIN_PRECISION}")));
        }
        let precision = Precision::new(o.precision);
        let bits = precision.bits();
        let tol = match o.tolerance {
            Some(t) if t > 0.0 && t.is_finite() => Float::with_val(bits, t),
            Some(t) => return Err(Error::InvalidInput(format!("bad tolerance {t}"))),
            None => ten_pow(-(o.precision as i32) + 10, bits),
        };
        Ok(Ctx { precision, digits: o.precision as usize, tol, symmetric: o.symmetric_range })
    }

    fn range(&self) -> &'static str {
        if self.symmetric {
            "[-2π², 2π²)"
        } else {
            "[0, 4π²)"
        }
    }

    fn reg(&self, v: &RegulatorValue) -> String {
        v.format(self.digits, self.symmetric)
    }

    fn reg_json(&self, v: &RegulatorValue) -> Value {
        let z = if self.symmetric { v.symmetric() } else { v.canonical() };
        json!({ "re": fmt_real(&z.re, self.digits), "im": fmt_real(&z.im, self.digits) })
    }

    fn header(&self) -> String {
        format!("precision: {} digits; regulators mod 4π², real part in {}", self.digits, self.range())
    }

    fn header_json(&self) -> Value {
        json!({ "digits": self.digits, "range": self.range(), "tolerance": format!("{:e}", self.tol.to_f64()) })
    }
}

/// Parse arguments, run, print and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let json = cli.opts.json;
    match run(&cli) {
        Ok(r) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&r.json).expect("serializable"));
            } else {
                print!("{}", r.text);
            }
            if r.failed {
                3
            } else {
                0
            }
        }
        Err(e) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&json!({ "error": e.to_string(), "exit_code": e.exit_code() })).expect("serializable"));
            }
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    let ctx = Ctx::new(&cli.opts)?;
    match &cli.command {
        Command::Field(FieldCmd::Info { field }) => field_info(&ctx, field),
        Command::Bloch(BlochCmd::Verify { element }) => bloch_verify(element),
        Command::Bloch(BlochCmd::Regulator { element }) => bloch_regulator(&ctx, element),
        Command::Fiveterm(FivetermCmd::Check { field, x, y, basis }) => fiveterm_check(&ctx, field, x, y, basis.as_deref()),
        Command::Torsion(TorsionCmd::Table { field }) => torsion_table(field),
        Command::Torsion(TorsionCmd::Generators { field }) => torsion_generators(field),
        Command::Torsion(TorsionCmd::Order { file, prime, element }) => torsion_order_cmd(&ctx, file, *prime, *element),
        Command::Cycle(CycleCmd::Invariant { triangulation, search }) => cycle_invariant(&ctx, triangulation, *search),
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn field_info(ctx: &Ctx, path: &Path) -> Result<Report> {
    let nf = fixtures::load_field(path)?;
    let (r1, r2) = nf.signature();
    let autos = nf.automorphisms()?;
    let mut t = String::new();
    t += &format!("polynomial: {}\n", nf.poly().fmt_var("x"));
    t += &format!("degree: {}\n", nf.degree());
    t += &format!("signature: ({r1}, {r2})\n");
    t += &format!("roots of unity: m = {}, w = {}\n", nf.torsion_order(), nf.torsion_generator());
    t += &format!("automorphisms: {}\n", autos.len());
    t += &format!("embeddings ({} digits):\n", ctx.digits);
    let mut emb = vec![];
    for c in nf.embeddings(ctx.precision) {
        let root = c.root();
        let kind = if c.is_real() { "real" } else { "complex" };
        t += &format!("  slot {} ({kind}): x = {}\n", c.slot(), fmt_complex(&root, ctx.digits));
        emb.push(json!({ "slot": c.slot(), "real": c.is_real(), "re": fmt_real(&root.re, ctx.digits), "im": fmt_real(&root.im, ctx.digits) }));
    }
    let json = json!({
        "polynomial": nf.poly().fmt_var("x"),
        "degree": nf.degree(),
        "signature": [r1, r2],
        "m": nf.torsion_order(),
        "w": nf.torsion_generator().to_string(),
        "automorphisms": autos.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "embeddings": emb,
        "precision": ctx.header_json(),
    });
    Ok(Report { text: t, json, failed: false })
}

fn basis_line(b: &MultBasis) -> String {
    let gens: Vec<String> = b.gens().iter().map(|g| g.to_string()).collect();
    format!("basis: w = {} (m = {}), free generators [{}]", b.torsion_gen(), b.m(), gens.join(", "))
}

fn bloch_verify(path: &Path) -> Result<Report> {
    let fx = fixtures::load_element(path)?;
    let b = &fx.basis;
    let hat = fx.element.is_in_bhat(b);
    let image = fx.element.to_bloch(b);
    let in_b = image.is_in_b(b)?;
    let matches = fx.bloch.as_ref().map(|e| *e == image);
    let mut t = String::new();
    t += &format!("{}\n", basis_line(b));
    t += &format!("element: {}\n", fx.element);
    t += &format!("in B̂: {}{}\n", yes(hat.is_zero), if hat.caveat { " (relative to this basis)" } else { "" });
    t += &format!("image: {image}\n");
    t += &format!("in B: {}{}\n", yes(in_b.is_zero), if in_b.caveat { " (relative to this basis)" } else { "" });
    if let Some(m) = matches {
        t += &format!("image matches stated sum: {}\n", yes(m));
    }
    if b.caveat() {
        t += "caveat: basis saturation is asserted, not proven\n";
    }
    let json = json!({
        "basis": b.gens().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "m": b.m(),
        "element": fx.element.to_string(),
        "in_bhat": hat.is_zero,
        "in_bhat_caveat": hat.caveat,
        "image": image.to_string(),
        "in_b": in_b.is_zero,
        "in_b_caveat": in_b.caveat,
        "image_matches": matches,
        "basis_caveat": b.caveat(),
    });
    let failed = !hat.is_zero || !in_b.is_zero || matches == Some(false);
    Ok(Report { text: t, json, failed })
}

fn slot_lines(ctx: &Ctx, values: &[SlotValue], t: &mut String) -> Vec<Value> {
    let mut out = vec![];
    for v in values {
        let kind = if v.real { "real" } else { "complex" };
        *t += &format!("  R(σ_{}) [{kind}] = {}\n", v.slot, ctx.reg(&v.value));
        out.push(json!({ "slot": v.slot, "real": v.real, "value": ctx.reg_json(&v.value) }));
    }
    out
}

fn bloch_regulator(ctx: &Ctx, path: &Path) -> Result<Report> {
    let fx = fixtures::load_element(path)?;
    let b = &fx.basis;
    let nf = &fx.field;
    let hat = fx.element.is_in_bhat(b);
    let mut t = format!("{}\n{}\n", ctx.header(), basis_line(b));
    t += &format!("in B̂: {}\n", yes(hat.is_zero));
    let values = reg_vector(b, &fx.element, ctx.precision)?;
    t += "regulator vector:\n";
    let vec_json = slot_lines(ctx, &values, &mut t);
    let mut chosen = Value::Null;
    if let Some(a) = fx.embedding {
        let e = nf.embedding_near(a.re, a.im, ctx.precision);
        let lift = cover_to_c(b, &e, &Branch::Principal)?;
        let v = reg_sum(b, &fx.element, &lift)?;
        let d = bloch_wigner_sum(b, &fx.element, &e)?;
        let root = fmt_complex(&e.root(), 12);
        t += &format!("chosen embedding x ≈ {root}:\n  R(σ) = {}\n  Σ n D(z) = {}\n", ctx.reg(&v), fmt_real(&d, ctx.digits));
        chosen = json!({ "root": root, "value": ctx.reg_json(&v), "bloch_wigner": fmt_real(&d, ctx.digits) });
    }
    let json = json!({ "precision": ctx.header_json(), "in_bhat": hat.is_zero, "regulators": vec_json, "chosen": chosen });
    Ok(Report { text: t, json, failed: false })
}

fn parse_element(nf: &NumberField, s: &str) -> Result<FieldElement> {
    let mut c = vec![];
    for part in s.split(',') {
        let q: Rational = part.trim().parse().map_err(|_| Error::InvalidInput(format!("bad coefficient {part:?}")))?;
        c.push(q);
    }
    if c.len() > nf.degree() {
        return Err(Error::InvalidInput(format!("{s:?} has more than {} coefficients", nf.degree())));
    }
    Ok(nf.element(&c))
}

fn fiveterm_check(ctx: &Ctx, path: &Path, xs: &str, ys: &str, basis: Option<&Path>) -> Result<Report> {
    let nf = fixtures::load_field(path)?;
    let x = parse_element(&nf, xs)?;
    let y = parse_element(&nf, ys)?;
    let five = five_term(&x, &y)?;
    let basis = match basis {
        Some(p) => parse_file::<BasisSpec>(p)?.build(&nf)?,
        None if nf.degree() == 1 => {
            let values: Vec<FieldElement> = five.iter().flat_map(|z| [z.clone(), z.one_minus()]).collect();
            log_section(&nf, &values)?.0
        }
        None => return Err(Error::InvalidInput("a --basis file is required outside Q".into())),
    };
    let rel = lift_five_term(&basis, &Flattening::of(&basis, &x)?, &Flattening::of(&basis, &y)?)?;
    let rho = rho_hat(basis.m(), &rel);
    let nu_zero = rho.nu_hat().is_zero();
    let values = reg_vector(&basis, &rho, ctx.precision)?;
    let vanish = values.iter().all(|v| v.value.is_zero_within(&ctx.tol));
    let mut t = format!("{}\n{}\n", ctx.header(), basis_line(&basis));
    let mut rows = vec![];
    for (i, (fl, z)) in rel.iter().zip(&five).enumerate() {
        t += &format!("  x{i} = {z}: {fl}\n");
        rows.push(json!({ "x": z.to_string(), "flattening": fl.to_string() }));
    }
    t += &format!("ν̂(ρ̂) = 0: {}\n", yes(nu_zero));
    t += "R(ρ̂):\n";
    let vec_json = slot_lines(ctx, &values, &mut t);
    t += &format!("vanishes within {:e}: {}\n", ctx.tol.to_f64(), yes(vanish));
    let json = json!({ "precision": ctx.header_json(), "relation": rows, "nu_zero": nu_zero, "regulators": vec_json, "vanishes": vanish });
    Ok(Report { text: t, json, failed: !(nu_zero && vanish) })
}

fn torsion_table(path: &Path) -> Result<Report> {
    let nf = fixtures::load_field(path)?;
    let prof = profile(&nf)?;
    let mut t = format!("{:>5} {:>5} {:>5}  generator\n", "p", "ν_p", "ν'_p");
    let mut rows = vec![];
    for r in &prof.rows {
        let gen = if r.nu > 0 { beta_p(&nf, r.p)?.to_string() } else { "-".into() };
        let mark = if r.caveat { " (lower bound)" } else { "" };
        t += &format!("{:>5} {:>5} {:>5}  {gen}{mark}\n", r.p, r.nu, r.nu_prime);
        rows.push(json!({ "p": r.p, "nu": r.nu, "nu_prime": r.nu_prime, "caveat": r.caveat, "beta": gen }));
    }
    t += &format!("w_F = {}\n", prof.w);
    Ok(Report { text: t, json: json!({ "rows": rows, "w": prof.w }), failed: false })
}

fn generator_primes(nf: &NumberField, prime: Option<u64>) -> Result<Vec<u64>> {
    if let Some(p) = prime {
        return Ok(vec![p]);
    }
    Ok(profile(nf)?.rows.iter().filter(|r| r.nu > 0).map(|r| r.p).collect())
}

fn torsion_generators(path: &Path) -> Result<Report> {
    let nf = fixtures::load_field(path)?;
    let mut t = String::new();
    let mut out = vec![];
    for p in generator_primes(&nf, None)? {
        let beta = beta_p(&nf, p)?;
        let ft = flattened_torsion(&nf, p)?;
        t += &format!("p = {p}\n  β_p = {beta}\n  {}\n  element: {}\n  expected order: {}\n", basis_line(&ft.basis), ft.element, ft.expected_order);
        out.push(json!({
            "p": p,
            "beta": beta.to_string(),
            "basis": ft.basis.gens().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "element": ft.element.to_string(),
            "expected_order": ft.expected_order,
        }));
    }
    Ok(Report { text: t, json: json!({ "generators": out }), failed: false })
}

fn torsion_order_cmd(ctx: &Ctx, path: &Path, prime: Option<u64>, element: bool) -> Result<Report> {
    if element {
        let fx = fixtures::load_element(path)?;
        let n = certify_order(&fx.basis, &fx.element, ctx.precision)?;
        let t = format!("{}\ncertified order: {n}\n", ctx.header());
        return Ok(Report { text: t, json: json!({ "precision": ctx.header_json(), "order": n }), failed: false });
    }
    let nf = fixtures::load_field(path)?;
    let mut t = format!("{}\n", ctx.header());
    let mut out = vec![];
    let mut failed = false;
    for p in generator_primes(&nf, prime)? {
        let ft = flattened_torsion(&nf, p)?;
        let n = certify_order(&ft.basis, &ft.element, ctx.precision)?;
        let values = reg_vector(&ft.basis, &ft.element, ctx.precision)?;
        failed |= n != ft.expected_order;
        t += &format!("p = {p}: certified order {n} (expected {})\n", ft.expected_order);
        let vec_json = slot_lines(ctx, &values, &mut t);
        out.push(json!({ "p": p, "order": n, "expected": ft.expected_order, "regulators": vec_json }));
    }
    Ok(Report { text: t, json: json!({ "precision": ctx.header_json(), "orders": out }), failed })
}

fn cycle_invariant(ctx: &Ctx, path: &Path, search: bool) -> Result<Report> {
    let mut tri = fixtures::load_triangulation(path)?;
    if search {
        let (basis, base) = tri.base_flattenings()?;
        tri.translates = search_flattenings(&tri.cycle, &base, basis.m(), 4, true)?
            .ok_or_else(|| Error::EdgeConditionFailed("no even translates with |p|, |q| <= 4".into()))?;
    }
    let inv = manifold_invariant(&tri, ctx.precision)?;
    let mut t = format!("{}\n", ctx.header());
    t += &format!("simplices: {}, edge classes: {}\n", tri.cycle.tets(), tri.cycle.edge_class_count());
    t += &format!("translates (units of ½): {:?}\n", tri.translates);
    t += &format!("edge conditions: {}\n", if inv.edges.holds() { "hold" } else { "fail" });
    let mut j = json!({
        "precision": ctx.header_json(),
        "translates": tri.translates,
        "edge_conditions": inv.edges.holds(),
    });
    if let Some(s) = &inv.element {
        let v = inv.verdict.expect("verdict accompanies the element");
        t += &format!("element: {s}\nin B̂: {}\n", yes(v.is_zero));
        let mut rows = vec![];
        for (sv, d) in inv.regulators.iter().zip(&inv.bloch_wigner) {
            let diff = Float::with_val(d.prec(), &sv.value.value.im - d).abs();
            t += &format!(
                "  slot {}: R = {}\n          Im R = {}, Σ ε D(z) = {}, |Im R - Σ ε D(z)| = {:e}\n",
                sv.slot,
                ctx.reg(&sv.value),
                fmt_real(&sv.value.value.im, ctx.digits),
                fmt_real(d, ctx.digits),
                diff.to_f64()
            );
            rows.push(json!({ "slot": sv.slot, "value": ctx.reg_json(&sv.value), "bloch_wigner": fmt_real(d, ctx.digits), "im_minus_d": format!("{:e}", diff.to_f64()) }));
        }
        j["element"] = json!(s.to_string());
        j["in_bhat"] = json!(v.is_zero);
        j["regulators"] = json!(rows);
    } else {
        t += "odd translates: regulator not computed\n";
    }
    match &inv.obstruction {
        Some(o) => {
            t += &format!("PSL lift test on 2[M]: x = {}, lifts: {}\n", o.x, yes(o.lifts));
            j["obstruction"] = json!({ "x": o.x.to_string(), "lifts": o.lifts });
        }
        None => t += "PSL lift test: not applicable\n",
    }
    Ok(Report { text: t, json: j, failed: false })
}
