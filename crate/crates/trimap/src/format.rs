//! Line-oriented UTF-8 text formats for instances, published functions and
//! encodings. Field elements are written as their packed integer form,
//! points as `x,y` or `inf`. Writing is deterministic, so equal values give
//! byte-identical files.
//!
//! Published pieces are straight-line circuits: one `circuit` header, then
//! one gate per line (`in`, `const`, `add`, `sub`, `mul`, `neg`, `poly`).
//! A `poly` gate lists its argument wires and its terms as `coeff:e1.e2...`.
//! An encoding is a list of `coeff : i1.i2...ik` lines; the empty word is `coeff :`.

use anyhow::{anyhow, bail, ensure, Context, Result};
use std::fmt::Write as _;
use trimap_core::blinding::{BlindingKey, LocalQuadIso};
use trimap_core::curve::{Curve, CurveTransform, Point};
use trimap_core::field::{Fe, Field};
use trimap_core::linalg::Matrix;
use trimap_core::poly::{Gate, MultiPoly, RationalCircuit};
use trimap_core::publisher::{Mode, PublishedFunction, PublishedMap};
use trimap_core::trimap::{
    G1Point, G2Point, GeneratorMatrix, GeneratorRow, GroupLaw, LineFunctions, NCPoly, PublicParams, SecretParams,
};

const PUBLIC_MAGIC: &str = "trimap-public 1";
const SECRET_MAGIC: &str = "trimap-secret 1";
const ENCODING_MAGIC: &str = "trimap-encoding 1";

/// Accumulates output lines.
#[derive(Default)]
pub struct Writer {
    out: String,
}

impl Writer {
    pub fn new() -> Writer {
        Writer::default()
    }

    pub fn finish(self) -> String {
        self.out
    }

    fn line(&mut self, key: &str, toks: impl IntoIterator<Item = String>) {
        self.out.push_str(key);
        for t in toks {
            self.out.push(' ');
            self.out.push_str(&t);
        }
        self.out.push('\n');
    }
}

/// Cursor over the meaningful lines of a document; `#` starts a comment.
pub struct Reader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(text: &'a str) -> Reader<'a> {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Reader { lines, pos: 0 }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        let l = *self.lines.get(self.pos).ok_or_else(|| anyhow!("unexpected end of input"))?;
        self.pos += 1;
        Ok(l)
    }

    /// Tokens after `key` on the next line.
    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (no, l) = self.next_line()?;
        let mut toks = l.split_whitespace();
        let head = toks.next().unwrap_or("");
        ensure!(head == key, "line {no}: expected `{key}`, found `{head}`");
        Ok((no, toks.collect()))
    }

    fn exact(&mut self, text: &str) -> Result<()> {
        let (no, l) = self.next_line()?;
        ensure!(l == text, "line {no}: expected `{text}`");
        Ok(())
    }

    pub fn at_end(&self) -> bool {
        self.pos == self.lines.len()
    }

    fn end(&self) -> Result<()> {
        match self.lines.get(self.pos) {
            None => Ok(()),
            Some((no, _)) => bail!("line {no}: trailing content"),
        }
    }
}

fn num<T: std::str::FromStr>(no: usize, tok: &str) -> Result<T> {
    tok.parse().map_err(|_| anyhow!("line {no}: bad number `{tok}`"))
}

fn count(no: usize, toks: &[&str], want: usize) -> Result<()> {
    ensure!(toks.len() == want, "line {no}: expected {want} fields, found {}", toks.len());
    Ok(())
}

fn fe_str(x: Fe) -> String {
    x.raw().to_string()
}

fn fe(no: usize, tok: &str, f: &Field) -> Result<Fe> {
    f.from_raw(num(no, tok)?).ok_or_else(|| anyhow!("line {no}: `{tok}` is not a field element"))
}

fn fes(no: usize, toks: &[&str], f: &Field) -> Result<Vec<Fe>> {
    toks.iter().map(|t| fe(no, t, f)).collect()
}

fn point_str(p: &Point) -> String {
    match p.coords() {
        None => "inf".into(),
        Some((x, y)) => format!("{},{}", x.raw(), y.raw()),
    }
}

fn point(no: usize, tok: &str, f: &Field) -> Result<Point> {
    if tok == "inf" {
        return Ok(Point::Infinity);
    }
    let (x, y) = tok.split_once(',').ok_or_else(|| anyhow!("line {no}: bad point `{tok}`"))?;
    Ok(Point::Affine(fe(no, x, f)?, fe(no, y, f)?))
}

// ---------------------------------------------------------------- field

pub fn write_field(w: &mut Writer, f: &Field) {
    w.line("field", [f.q().to_string(), f.d().to_string()]);
    w.line("modulus", f.modulus().iter().map(|c| c.to_string()));
    w.line("theta", f.theta().iter().map(|&t| fe_str(t)));
}

pub fn read_field(r: &mut Reader) -> Result<Field> {
    let (no, t) = r.keyed("field")?;
    count(no, &t, 2)?;
    let (q, d): (u64, usize) = (num(no, t[0])?, num(no, t[1])?);
    let (no, t) = r.keyed("modulus")?;
    let modulus = t.iter().map(|x| num(no, x)).collect::<Result<Vec<u64>>>()?;
    let (no, t) = r.keyed("theta")?;
    let theta = t.iter().map(|x| num::<u64>(no, x).map(Fe::from_packed)).collect::<Result<Vec<_>>>()?;
    Field::from_parts(q, d, modulus, theta).map_err(|e| anyhow!("line {no}: field parameters: {e}"))
}

// ---------------------------------------------------------------- polynomials and circuits

fn poly_tokens(p: &MultiPoly) -> Vec<String> {
    let mut out = vec![p.len().to_string()];
    out.extend(p.terms().map(|(m, c)| {
        let e: Vec<String> = m.exps().iter().map(|e| e.to_string()).collect();
        format!("{}:{}", c.raw(), e.join("."))
    }));
    out
}

fn parse_poly(no: usize, nvars: usize, toks: &[&str], f: &Field) -> Result<MultiPoly> {
    let (&n, rest) = toks.split_first().ok_or_else(|| anyhow!("line {no}: missing term count"))?;
    let n: usize = num(no, n)?;
    count(no, rest, n)?;
    let mut terms = Vec::with_capacity(n);
    for t in rest {
        let (c, e) = t.split_once(':').ok_or_else(|| anyhow!("line {no}: bad term `{t}`"))?;
        let exps: Vec<u32> = if e.is_empty() { Vec::new() } else { e.split('.').map(|x| num(no, x)).collect::<Result<_>>()? };
        ensure!(exps.len() == nvars, "line {no}: term `{t}` has {} exponents, expected {nvars}", exps.len());
        terms.push((exps, fe(no, c, f)?));
    }
    let p = MultiPoly::from_terms(nvars, terms, f);
    ensure!(p.len() == n, "line {no}: repeated or zero terms");
    Ok(p)
}

fn write_poly_line(w: &mut Writer, key: &str, p: &MultiPoly) {
    let mut t = vec![p.nvars().to_string()];
    t.extend(poly_tokens(p));
    w.line(key, t);
}

fn read_poly_line(r: &mut Reader, key: &str, f: &Field) -> Result<MultiPoly> {
    let (no, t) = r.keyed(key)?;
    ensure!(!t.is_empty(), "line {no}: missing variable count");
    parse_poly(no, num(no, t[0])?, &t[1..], f)
}

pub fn write_circuit(w: &mut Writer, c: &RationalCircuit) {
    w.line(
        "circuit",
        [c.nvars().to_string(), c.gates().len().to_string(), c.num_wire().to_string(), c.den_wire().to_string()],
    );
    for g in c.gates() {
        match g {
            Gate::Input(i) => w.line("in", [i.to_string()]),
            Gate::Const(x) => w.line("const", [fe_str(*x)]),
            Gate::Add(a, b) => w.line("add", [a.to_string(), b.to_string()]),
            Gate::Sub(a, b) => w.line("sub", [a.to_string(), b.to_string()]),
            Gate::Mul(a, b) => w.line("mul", [a.to_string(), b.to_string()]),
            Gate::Neg(a) => w.line("neg", [a.to_string()]),
            Gate::Poly { poly, args } => {
                let a: Vec<String> = args.iter().map(|x| x.to_string()).collect();
                let mut t = vec![if a.is_empty() { "-".into() } else { a.join(",") }];
                t.extend(poly_tokens(poly));
                w.line("poly", t);
            }
        }
    }
}

pub fn read_circuit(r: &mut Reader, f: &Field) -> Result<RationalCircuit> {
    let (no, t) = r.keyed("circuit")?;
    count(no, &t, 4)?;
    let (nvars, ngates): (usize, usize) = (num(no, t[0])?, num(no, t[1])?);
    let (nw, dw): (u32, u32) = (num(no, t[2])?, num(no, t[3])?);
    let mut gates = Vec::with_capacity(ngates);
    for _ in 0..ngates {
        let (no, l) = r.next_line()?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let arg = |i: usize| -> Result<u32> { num(no, toks.get(i).copied().unwrap_or("")) };
        let g = match toks[0] {
            "in" => Gate::Input(num(no, toks.get(1).copied().unwrap_or(""))?),
            "const" => Gate::Const(fe(no, toks.get(1).copied().unwrap_or(""), f)?),
            "add" => Gate::Add(arg(1)?, arg(2)?),
            "sub" => Gate::Sub(arg(1)?, arg(2)?),
            "mul" => Gate::Mul(arg(1)?, arg(2)?),
            "neg" => Gate::Neg(arg(1)?),
            "poly" => {
                let a = toks.get(1).copied().unwrap_or("");
                let args: Vec<u32> =
                    if a == "-" { Vec::new() } else { a.split(',').map(|x| num(no, x)).collect::<Result<_>>()? };
                let poly = parse_poly(no, args.len(), toks.get(2..).unwrap_or(&[]), f)?;
                Gate::Poly { poly, args }
            }
            other => bail!("line {no}: unknown gate `{other}`"),
        };
        gates.push(g);
    }
    RationalCircuit::from_parts(nvars, gates, nw, dw).map_err(|e| anyhow!("line {no}: circuit: {e}"))
}

pub fn write_function(w: &mut Writer, pf: &PublishedFunction) {
    let mode = match pf.mode {
        Mode::Sum => "sum",
        Mode::Product => "product",
    };
    let descent = pf.descent.map_or("-".to_string(), |d| d.to_string());
    w.line(
        "function",
        [mode.to_string(), pf.arity.to_string(), pf.n.to_string(), descent, pf.pieces.len().to_string()],
    );
    for p in &pf.pieces {
        write_circuit(w, p);
    }
}

pub fn read_function(r: &mut Reader, f: &Field) -> Result<PublishedFunction> {
    let (no, t) = r.keyed("function")?;
    count(no, &t, 5)?;
    let mode = match t[0] {
        "sum" => Mode::Sum,
        "product" => Mode::Product,
        m => bail!("line {no}: unknown mode `{m}`"),
    };
    let (arity, n): (usize, usize) = (num(no, t[1])?, num(no, t[2])?);
    let descent = if t[3] == "-" { None } else { Some(num(no, t[3])?) };
    let m: usize = num(no, t[4])?;
    let pieces = (0..m).map(|_| read_circuit(r, f)).collect::<Result<Vec<_>>>()?;
    let pf = PublishedFunction { mode, arity, n, descent, pieces };
    let nvars = pf.nvars() * descent.unwrap_or(1);
    ensure!(pf.pieces.iter().all(|p| p.nvars() == nvars), "line {no}: piece arity disagrees with the header");
    Ok(pf)
}

pub fn write_map(w: &mut Writer, m: &PublishedMap) {
    w.line("map", [m.coords.len().to_string()]);
    for c in &m.coords {
        write_function(w, c);
    }
}

pub fn read_map(r: &mut Reader, f: &Field) -> Result<PublishedMap> {
    let (no, t) = r.keyed("map")?;
    count(no, &t, 1)?;
    let k: usize = num(no, t[0])?;
    let coords = (0..k).map(|_| read_function(r, f)).collect::<Result<Vec<_>>>()?;
    Ok(PublishedMap { coords })
}

// ---------------------------------------------------------------- encodings

pub fn write_ncpoly(w: &mut Writer, p: &NCPoly) {
    w.line("encoding", [p.len().to_string()]);
    for (word, c) in p.terms() {
        let wd: Vec<String> = word.iter().map(|z| z.to_string()).collect();
        w.out.push_str(&format!("{c} : {}", wd.join(".")).trim_end().to_string());
        w.out.push('\n');
    }
}

pub fn read_ncpoly(r: &mut Reader, ell: u64) -> Result<NCPoly> {
    let (no, t) = r.keyed("encoding")?;
    count(no, &t, 1)?;
    let k: usize = num(no, t[0])?;
    let mut p = NCPoly::new();
    for _ in 0..k {
        let (no, l) = r.next_line()?;
        let (c, word) = l.split_once(':').ok_or_else(|| anyhow!("line {no}: expected `coeff : word`"))?;
        let c: u64 = num(no, c.trim())?;
        ensure!(c > 0 && c < ell, "line {no}: coefficient outside F_ell^*");
        let word = word.trim();
        let word: Vec<u16> =
            if word.is_empty() { Vec::new() } else { word.split('.').map(|z| num(no, z)).collect::<Result<_>>()? };
        let before = p.len();
        p.add_term(word, c, ell);
        ensure!(p.len() == before + 1, "line {no}: repeated word");
    }
    Ok(p)
}

/// Standalone encoding file: the field size `ell` and one encoding.
pub fn encoding_to_string(p: &NCPoly, ell: u64) -> String {
    let mut w = Writer::new();
    w.out.push_str(ENCODING_MAGIC);
    w.out.push('\n');
    w.line("ell", [ell.to_string()]);
    write_ncpoly(&mut w, p);
    w.finish()
}

pub fn encoding_from_str(text: &str) -> Result<(NCPoly, u64)> {
    let mut r = Reader::new(text);
    r.exact(ENCODING_MAGIC)?;
    let (no, t) = r.keyed("ell")?;
    count(no, &t, 1)?;
    let ell = num(no, t[0])?;
    let p = read_ncpoly(&mut r, ell)?;
    r.end()?;
    Ok((p, ell))
}

// ---------------------------------------------------------------- public bundle

fn write_law(w: &mut Writer, key: &str, law: Option<&GroupLaw>) {
    match law {
        None => w.line(key, ["none".to_string()]),
        Some(l) => {
            w.line(key, []);
            write_map(w, &l.add);
            write_map(w, &l.dbl);
        }
    }
}

fn read_law(r: &mut Reader, key: &str, f: &Field) -> Result<Option<GroupLaw>> {
    let (no, t) = r.keyed(key)?;
    match t.as_slice() {
        ["none"] => Ok(None),
        [] => Ok(Some(GroupLaw { add: read_map(r, f)?, dbl: read_map(r, f)? })),
        _ => bail!("line {no}: expected `{key}` or `{key} none`"),
    }
}

fn write_lines(w: &mut Writer, key: &str, l: Option<&LineFunctions>) {
    match l {
        None => w.line(key, ["none".to_string()]),
        Some(l) => {
            w.line(key, []);
            write_function(w, &l.tangent);
            write_function(w, &l.chord);
        }
    }
}

fn read_lines(r: &mut Reader, key: &str, f: &Field) -> Result<Option<LineFunctions>> {
    let (no, t) = r.keyed(key)?;
    match t.as_slice() {
        ["none"] => Ok(None),
        [] => Ok(Some(LineFunctions { tangent: read_function(r, f)?, chord: read_function(r, f)? })),
        _ => bail!("line {no}: expected `{key}` or `{key} none`"),
    }
}

pub fn public_to_string(pp: &PublicParams) -> String {
    let mut w = Writer::new();
    w.out.push_str(PUBLIC_MAGIC);
    w.out.push('\n');
    write_field(&mut w, &pp.field);
    w.line(
        "params",
        [pp.n.to_string(), pp.ell.to_string(), pp.num_gens().to_string(), u8::from(pp.is_ddh()).to_string()],
    );
    w.line("alpha_hat", pp.alpha_hat.coords().iter().map(|&x| fe_str(x)));
    w.line("beta_hat", pp.beta_hat.coords().iter().map(|&x| fe_str(x)));
    write_law(&mut w, "law", Some(&pp.law));
    write_law(&mut w, "law1", pp.law1.as_ref());
    for (i, m) in pp.phi.iter().enumerate() {
        w.line("phi", [(i + 1).to_string()]);
        write_map(&mut w, m);
    }
    write_lines(&mut w, "lines", Some(&pp.lines));
    write_lines(&mut w, "lines_rev", pp.lines_rev.as_ref());
    w.line("kernel", [pp.kernel.len().to_string()]);
    for k in &pp.kernel {
        write_ncpoly(&mut w, k);
    }
    w.finish()
}

pub fn public_from_str(text: &str) -> Result<PublicParams> {
    let mut r = Reader::new(text);
    r.exact(PUBLIC_MAGIC).context("not a public instance file")?;
    let field = read_field(&mut r)?;
    let f = &field;
    let (no, t) = r.keyed("params")?;
    count(no, &t, 4)?;
    let (n, ell, big_n): (usize, u64, usize) = (num(no, t[0])?, num(no, t[1])?, num(no, t[2])?);
    let ddh = match t[3] {
        "0" => false,
        "1" => true,
        x => bail!("line {no}: ddh flag must be 0 or 1, found `{x}`"),
    };
    let (no, t) = r.keyed("alpha_hat")?;
    count(no, &t, 3 * n)?;
    let alpha_hat = G1Point::from_coords(fes(no, &t, f)?);
    let (no, t) = r.keyed("beta_hat")?;
    count(no, &t, 3 * n)?;
    let beta_hat = G2Point::from_coords(fes(no, &t, f)?);
    let law = read_law(&mut r, "law", f)?.ok_or_else(|| anyhow!("the group law of E-hat is required"))?;
    let law1 = read_law(&mut r, "law1", f)?;
    ensure!(law1.is_some() == ddh, "law1 must be present exactly in DDH mode");
    let mut phi = Vec::with_capacity(big_n);
    for i in 0..big_n {
        let (no, t) = r.keyed("phi")?;
        ensure!(t == [(i + 1).to_string().as_str()], "line {no}: expected `phi {}`", i + 1);
        phi.push(read_map(&mut r, f)?);
    }
    let lines = read_lines(&mut r, "lines", f)?.ok_or_else(|| anyhow!("line functions are required"))?;
    let lines_rev = read_lines(&mut r, "lines_rev", f)?;
    ensure!(lines_rev.is_some() == ddh, "lines_rev must be present exactly in DDH mode");
    let (no, t) = r.keyed("kernel")?;
    count(no, &t, 1)?;
    let k: usize = num(no, t[0])?;
    let kernel = (0..k).map(|_| read_ncpoly(&mut r, ell)).collect::<Result<Vec<_>>>()?;
    r.end()?;
    let shape = |m: &PublishedMap, arity: usize| m.coords.len() == 3 * n && m.arity() == arity;
    ensure!(shape(&law.add, 2) && shape(&law.dbl, 1), "group law has the wrong shape");
    ensure!(phi.iter().all(|m| shape(m, 1)), "phi maps have the wrong shape");
    Ok(PublicParams { field, n, ell, alpha_hat, beta_hat, law, law1, phi, lines, lines_rev, kernel })
}

// ---------------------------------------------------------------- secret bundle

fn write_matrix(w: &mut Writer, key: &str, m: &Matrix) {
    w.line(key, [m.rows().to_string()]);
    for i in 0..m.rows() {
        w.line("row", m.row(i).iter().map(|&x| fe_str(x)));
    }
}

fn read_matrix(r: &mut Reader, key: &str, f: &Field) -> Result<Matrix> {
    let (no, t) = r.keyed(key)?;
    count(no, &t, 1)?;
    let k: usize = num(no, t[0])?;
    let mut rows = Vec::with_capacity(k);
    for _ in 0..k {
        let (no, t) = r.keyed("row")?;
        count(no, &t, k)?;
        rows.push(fes(no, &t, f)?);
    }
    Ok(Matrix::from_rows(rows))
}

fn write_key(w: &mut Writer, key: &str, k: Option<&BlindingKey>) {
    let Some(k) = k else {
        w.line(key, ["none".to_string()]);
        return;
    };
    w.line(key, [k.n().to_string()]);
    write_matrix(w, "delta", k.delta());
    for l in k.lambdas() {
        write_matrix(w, "lambda_a", &l.a);
        write_matrix(w, "lambda_b", &l.b);
        write_poly_line(w, "lambda_p", &l.p);
        write_poly_line(w, "lambda_q", &l.q2);
    }
    w.line("twists", k.twists().iter().map(|(a, b)| format!("{a},{b}")));
}

fn read_key(r: &mut Reader, key: &str, f: &Field) -> Result<Option<BlindingKey>> {
    let (no, t) = r.keyed(key)?;
    if t == ["none"] {
        return Ok(None);
    }
    count(no, &t, 1)?;
    let n: usize = num(no, t[0])?;
    let delta = read_matrix(r, "delta", f)?;
    let mut lambdas = Vec::with_capacity(n);
    for _ in 0..n {
        let a = read_matrix(r, "lambda_a", f)?;
        let b = read_matrix(r, "lambda_b", f)?;
        let p = read_poly_line(r, "lambda_p", f)?;
        let q2 = read_poly_line(r, "lambda_q", f)?;
        lambdas.push(LocalQuadIso { a, b, p, q2 });
    }
    let (no, t) = r.keyed("twists")?;
    count(no, &t, n)?;
    let twists = t
        .iter()
        .map(|x| {
            let (a, b) = x.split_once(',').ok_or_else(|| anyhow!("line {no}: bad twist `{x}`"))?;
            Ok((num(no, a)?, num(no, b)?))
        })
        .collect::<Result<Vec<_>>>()?;
    BlindingKey::from_parts(f, delta, lambdas, twists).map(Some).map_err(|e| anyhow!("line {no}: blinding key: {e}"))
}

fn write_points(w: &mut Writer, key: &str, pts: &[Point]) {
    w.line(key, pts.iter().map(point_str));
}

fn read_points(r: &mut Reader, key: &str, want: usize, e: &Curve, f: &Field) -> Result<Vec<Point>> {
    let (no, t) = r.keyed(key)?;
    count(no, &t, want)?;
    let pts = t.iter().map(|x| point(no, x, f)).collect::<Result<Vec<_>>>()?;
    ensure!(pts.iter().all(|p| e.is_on(p, f)), "line {no}: point off the curve");
    Ok(pts)
}

pub fn secret_to_string(s: &SecretParams, f: &Field) -> String {
    let mut w = Writer::new();
    w.out.push_str(SECRET_MAGIC);
    w.out.push('\n');
    write_field(&mut w, f);
    let e = &s.curve;
    w.line("curve", [fe_str(e.a), fe_str(e.b), e.ell.to_string(), e.order.to_string(), e.cofactor.to_string()]);
    write_points(&mut w, "basis", &[s.basis.0, s.basis.1]);
    w.line("transforms", [s.transforms.len().to_string()]);
    for t in &s.transforms {
        let mut toks: Vec<String> = t.matrix().iter().map(|&x| fe_str(x)).collect();
        toks.push(u8::from(t.includes_j()).to_string());
        w.line("transform", toks);
    }
    write_key(&mut w, "key", Some(&s.key));
    write_key(&mut w, "key1", s.key1.as_ref());
    w.line("generators", [s.gens.len().to_string()]);
    for g in &s.gens {
        w.line("gen", g.rows().iter().map(|r| format!("{},{},{}", r.j1, r.j2, r.c)));
    }
    write_points(&mut w, "alpha", &s.alpha);
    write_points(&mut w, "beta", &s.beta);
    let _ = writeln!(w.out, "end");
    w.finish()
}

pub fn secret_from_str(text: &str) -> Result<(SecretParams, Field)> {
    let mut r = Reader::new(text);
    r.exact(SECRET_MAGIC).context("not a secret instance file")?;
    let field = read_field(&mut r)?;
    let f = &field;
    let (no, t) = r.keyed("curve")?;
    count(no, &t, 5)?;
    let curve = Curve { a: fe(no, t[0], f)?, b: fe(no, t[1], f)?, ell: num(no, t[2])?, order: num(no, t[3])?, cofactor: num(no, t[4])? };
    ensure!(curve.order == curve.cofactor * curve.ell * curve.ell, "line {no}: inconsistent curve order");
    let b = read_points(&mut r, "basis", 2, &curve, f)?;
    let (no, t) = r.keyed("transforms")?;
    count(no, &t, 1)?;
    let n: usize = num(no, t[0])?;
    let mut transforms = Vec::with_capacity(n);
    for _ in 0..n {
        let (no, t) = r.keyed("transform")?;
        count(no, &t, 5)?;
        let m = [fe(no, t[0], f)?, fe(no, t[1], f)?, fe(no, t[2], f)?, fe(no, t[3], f)?];
        let j = match t[4] {
            "0" => false,
            "1" => true,
            x => bail!("line {no}: j flag must be 0 or 1, found `{x}`"),
        };
        transforms.push(CurveTransform::new(m, j, f).map_err(|e| anyhow!("line {no}: transform: {e}"))?);
    }
    let key = read_key(&mut r, "key", f)?.ok_or_else(|| anyhow!("the key of E-hat is required"))?;
    let key1 = read_key(&mut r, "key1", f)?;
    let (no, t) = r.keyed("generators")?;
    count(no, &t, 1)?;
    let big_n: usize = num(no, t[0])?;
    let mut gens = Vec::with_capacity(big_n);
    for _ in 0..big_n {
        let (no, t) = r.keyed("gen")?;
        count(no, &t, n)?;
        let rows = t
            .iter()
            .map(|x| {
                let p: Vec<&str> = x.split(',').collect();
                ensure!(p.len() == 3, "line {no}: bad generator row `{x}`");
                Ok(GeneratorRow { j1: num(no, p[0])?, j2: num(no, p[1])?, c: num(no, p[2])? })
            })
            .collect::<Result<Vec<_>>>()?;
        gens.push(GeneratorMatrix::new(rows, curve.ell).map_err(|e| anyhow!("line {no}: generator: {e}"))?);
    }
    let alpha = read_points(&mut r, "alpha", n, &curve, f)?;
    let beta = read_points(&mut r, "beta", n, &curve, f)?;
    r.exact("end")?;
    r.end()?;
    ensure!(key.n() == n && key1.as_ref().is_none_or(|k| k.n() == n), "key size disagrees with the transforms");
    let secret = SecretParams { curve, basis: (b[0], b[1]), transforms, key, key1, gens, alpha, beta };
    Ok((secret, field))
}
