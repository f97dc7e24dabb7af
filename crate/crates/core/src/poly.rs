//! Exact multivariate polynomials over the rationals.
//!
//! A [`Poly`] lives in a context with `n` boundary variables. The variable
//! order is fixed: `Lsq_1, ..., Lsq_n, PiSq, Tsq, SInv`. The `Lsq_i` stand
//! for squared boundary lengths -- amplitudes are even in each boundary
//! length, so odd powers are unrepresentable by construction. `PiSq` is a
//! formal pi^2, `Tsq` a formal t^2, and `SInv` a formal 1/s; none of them is
//! ever a float on the exact path.
//!
//! Terms are stored in a `BTreeMap` keyed by exponent vectors, so canonical
//! form (no zero coefficients, sorted keys) is maintained by construction and
//! structural equality is mathematical equality.

use crate::rational::{rat_to_f64, rat_to_string, Rat};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Exponents = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("variable arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("polynomial is not symmetric in the Lsq variables")]
    NotSymmetric,
    #[error("invalid polynomial JSON: {0}")]
    BadJson(String),
}

/// Polynomial in `Lsq_1..Lsq_n, PiSq, Tsq, SInv` with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Exponents, Rat>,
}

pub const EXTRA_VARS: usize = 3;

impl Poly {
    pub fn zero(n: usize) -> Self {
        Poly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        let mut p = Poly::zero(n);
        if !c.is_zero() {
            p.terms.insert(vec![0; n + EXTRA_VARS], c);
        }
        p
    }

    pub fn one(n: usize) -> Self {
        Poly::constant(n, Rat::one())
    }

    /// Number of boundary variables in this context.
    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.n + EXTRA_VARS
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rat)> {
        self.terms.iter()
    }

    /// `Lsq_i` (0-based index `i < n`).
    pub fn lsq(n: usize, i: usize) -> Self {
        assert!(i < n);
        Poly::var(n, i)
    }

    pub fn pisq(n: usize) -> Self {
        Poly::var(n, n)
    }

    pub fn tsq(n: usize) -> Self {
        Poly::var(n, n + 1)
    }

    pub fn sinv(n: usize) -> Self {
        Poly::var(n, n + 2)
    }

    fn var(n: usize, idx: usize) -> Self {
        let mut exp = vec![0; n + EXTRA_VARS];
        exp[idx] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(exp, Rat::one());
        Poly { n, terms }
    }

    pub fn monomial(n: usize, exp: Exponents, coeff: Rat) -> Self {
        assert_eq!(exp.len(), n + EXTRA_VARS);
        let mut p = Poly::zero(n);
        if !coeff.is_zero() {
            p.terms.insert(exp, coeff);
        }
        p
    }

    pub fn add_term(&mut self, exp: Exponents, coeff: Rat) {
        debug_assert_eq!(exp.len(), self.width());
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Poly::zero(self.n);
        }
        let terms = self.terms.iter().map(|(e, q)| (e.clone(), q * c)).collect();
        Poly { n: self.n, terms }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Poly::one(self.n);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Moves this polynomial into a context with `target_n` boundary
    /// variables, sending `Lsq_i` to `Lsq_{map[i]}`. The map need not be
    /// injective (repeated targets add exponents, which is how a self-loop
    /// feeds the same edge variable into two argument slots). `PiSq`, `Tsq`
    /// and `SInv` always map to themselves.
    pub fn relabel(&self, target_n: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.n);
        assert!(map.iter().all(|&j| j < target_n));
        let mut out = Poly::zero(target_n);
        for (exp, c) in &self.terms {
            let mut nexp = vec![0u32; target_n + EXTRA_VARS];
            for i in 0..self.n {
                nexp[map[i]] += exp[i];
            }
            for k in 0..EXTRA_VARS {
                nexp[target_n + k] = exp[self.n + k];
            }
            out.add_term(nexp, c.clone());
        }
        out
    }

    /// Decomposition by the power of `Lsq_var`: returns `k -> coefficient`
    /// where the coefficients live in the same context with `Lsq_var` absent.
    pub fn coeffs_in(&self, var: usize) -> BTreeMap<u32, Poly> {
        assert!(var < self.n);
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (exp, c) in &self.terms {
            let k = exp[var];
            let mut rest = exp.clone();
            rest[var] = 0;
            out.entry(k)
                .or_insert_with(|| Poly::zero(self.n))
                .add_term(rest, c.clone());
        }
        out
    }

    /// Joint decomposition by powers of two distinct `Lsq` variables.
    pub fn coeffs_in2(&self, var_a: usize, var_b: usize) -> BTreeMap<(u32, u32), Poly> {
        assert!(var_a < self.n && var_b < self.n && var_a != var_b);
        let mut out: BTreeMap<(u32, u32), Poly> = BTreeMap::new();
        for (exp, c) in &self.terms {
            let key = (exp[var_a], exp[var_b]);
            let mut rest = exp.clone();
            rest[var_a] = 0;
            rest[var_b] = 0;
            out.entry(key)
                .or_insert_with(|| Poly::zero(self.n))
                .add_term(rest, c.clone());
        }
        out
    }

    /// Sets `Lsq_var` to zero (keeps the context width).
    pub fn set_lsq_zero(&self, var: usize) -> Self {
        assert!(var < self.n);
        let mut out = Poly::zero(self.n);
        for (exp, c) in &self.terms {
            if exp[var] == 0 {
                out.add_term(exp.clone(), c.clone());
            }
        }
        out
    }

    /// Substitutes `SInv := 1`.
    pub fn set_sinv_one(&self) -> Self {
        let sinv = self.n + 2;
        let mut out = Poly::zero(self.n);
        for (exp, c) in &self.terms {
            let mut nexp = exp.clone();
            nexp[sinv] = 0;
            out.add_term(nexp, c.clone());
        }
        out
    }

    /// Drops every term that involves `PiSq`, `Tsq` or `SInv`.
    pub fn lsq_part(&self) -> Self {
        let mut out = Poly::zero(self.n);
        for (exp, c) in &self.terms {
            if exp[self.n..].iter().all(|&e| e == 0) {
                out.add_term(exp.clone(), c.clone());
            }
        }
        out
    }

    /// Coefficient of a full exponent vector.
    pub fn coeff(&self, exp: &[u32]) -> Rat {
        self.terms.get(exp).cloned().unwrap_or_else(Rat::zero)
    }

    /// Exact evaluation; `lsq` are the values of the squared lengths.
    pub fn eval(&self, lsq: &[Rat], pisq: &Rat, tsq: &Rat, sinv: &Rat) -> Rat {
        assert_eq!(lsq.len(), self.n);
        let mut acc = Rat::zero();
        for (exp, c) in &self.terms {
            let mut term = c.clone();
            for i in 0..self.n {
                for _ in 0..exp[i] {
                    term *= &lsq[i];
                }
            }
            for (j, v) in [pisq, tsq, sinv].into_iter().enumerate() {
                for _ in 0..exp[self.n + j] {
                    term *= v;
                }
            }
            acc += term;
        }
        acc
    }

    /// Float evaluation with `pi^2` substituted numerically.
    pub fn eval_f64(&self, lsq: &[f64], tsq: f64, sinv: f64) -> f64 {
        assert_eq!(lsq.len(), self.n);
        let pisq = std::f64::consts::PI * std::f64::consts::PI;
        let mut acc = 0.0;
        for (exp, c) in &self.terms {
            let mut term = rat_to_f64(c);
            for i in 0..self.n {
                term *= lsq[i].powi(exp[i] as i32);
            }
            term *= pisq.powi(exp[self.n] as i32);
            term *= tsq.powi(exp[self.n + 1] as i32);
            term *= sinv.powi(exp[self.n + 2] as i32);
            acc += term;
        }
        acc
    }

    /// True if invariant under every transposition of the Lsq variables.
    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.n.saturating_sub(1) {
            let mut swapped = Poly::zero(self.n);
            for (exp, c) in &self.terms {
                let mut nexp = exp.clone();
                nexp.swap(i, i + 1);
                swapped.add_term(nexp, c.clone());
            }
            if &swapped != self {
                return false;
            }
        }
        true
    }

    /// Total degree in the grading where `Lsq`, `Tsq` count 2, `SInv` counts 1
    /// and `PiSq` counts 0. This is the homogeneity degree of the amplitudes.
    pub fn weighted_degrees(&self) -> Vec<u32> {
        let mut degs: Vec<u32> = self
            .terms
            .keys()
            .map(|exp| {
                let lsq: u32 = exp[..self.n].iter().sum();
                2 * lsq + 2 * exp[self.n + 1] + exp[self.n + 2]
            })
            .collect();
        degs.sort_unstable();
        degs.dedup();
        degs
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.n, rhs.n, "arity mismatch");
        let mut out = self.clone();
        for (exp, c) in &rhs.terms {
            out.add_term(exp.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.n, rhs.n, "arity mismatch");
        let mut out = self.clone();
        for (exp, c) in &rhs.terms {
            out.add_term(exp.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rat::one())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.n, rhs.n, "arity mismatch");
        let mut out = Poly::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let exp: Exponents = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(exp, ca * cb);
            }
        }
        out
    }
}

/// A partition indexing a monomial symmetric polynomial `m_lambda`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymMonomial(pub Vec<u32>);

impl SymMonomial {
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        SymMonomial(parts)
    }

    /// Expands `m_lambda(Lsq_1..Lsq_n)`: one term per distinct permutation of
    /// the padded partition.
    pub fn expand(&self, n: usize) -> Poly {
        assert!(self.0.len() <= n, "partition has more parts than variables");
        let mut pattern = self.0.clone();
        pattern.resize(n, 0);
        pattern.sort_unstable();
        let mut out = Poly::zero(n);
        // Lexicographic multiset-permutation walk; each arrangement once.
        loop {
            let mut exp = vec![0u32; n + EXTRA_VARS];
            exp[..n].copy_from_slice(&pattern);
            out.add_term(exp, Rat::one());
            if !next_permutation(&mut pattern) {
                break;
            }
        }
        out
    }
}

impl fmt::Display for SymMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m_(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

fn next_permutation(arr: &mut [u32]) -> bool {
    if arr.len() < 2 {
        return false;
    }
    let mut i = arr.len() - 1;
    while i > 0 && arr[i - 1] >= arr[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = arr.len() - 1;
    while arr[j] <= arr[i - 1] {
        j -= 1;
    }
    arr.swap(i - 1, j);
    arr[i..].reverse();
    true
}

/// One rendered term: coefficient times `m_lambda * PiSq^p * Tsq^t * SInv^s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymTerm {
    pub lambda: SymMonomial,
    pub pisq: u32,
    pub tsq: u32,
    pub sinv: u32,
    pub coeff: Rat,
}

/// Decomposes a polynomial symmetric in its Lsq variables into the
/// `m_lambda` basis, one entry per `(lambda, PiSq^p Tsq^t SInv^s)`.
pub fn render_symmetric(p: &Poly, n: usize) -> Result<Vec<SymTerm>, PolyError> {
    if p.arity() != n {
        return Err(PolyError::ArityMismatch(p.arity(), n));
    }
    if !p.is_symmetric() {
        return Err(PolyError::NotSymmetric);
    }
    let mut rest = p.clone();
    let mut out = Vec::new();
    while let Some((exp, coeff)) = leading_term(&rest) {
        let lambda = SymMonomial::new(exp[..n].to_vec());
        let expanded = lambda.expand(n);
        let mut tail = vec![0u32; n + EXTRA_VARS];
        tail[n..].copy_from_slice(&exp[n..]);
        let shifted = expanded.terms().fold(Poly::zero(n), |mut acc, (e, c)| {
            let mut ne = e.clone();
            for k in 0..EXTRA_VARS {
                ne[n + k] += tail[n + k];
            }
            acc.add_term(ne, c * &coeff);
            acc
        });
        rest = &rest - &shifted;
        out.push(SymTerm {
            lambda,
            pisq: exp[n],
            tsq: exp[n + 1],
            sinv: exp[n + 2],
            coeff,
        });
        if out.len() > 100_000 {
            return Err(PolyError::NotSymmetric);
        }
    }
    // Stable display order: by extra-variable block, then by partition.
    out.sort_by(|a, b| {
        (a.pisq, a.tsq, a.sinv, &b.lambda.0).cmp(&(b.pisq, b.tsq, b.sinv, &a.lambda.0))
    });
    Ok(out)
}

fn leading_term(p: &Poly) -> Option<(Exponents, Rat)> {
    // Largest Lsq pattern in (degree, lex) order; ties broken by extras.
    p.terms()
        .max_by(|(ea, _), (eb, _)| {
            let da: u32 = ea.iter().sum();
            let db: u32 = eb.iter().sum();
            da.cmp(&db).then_with(|| ea.cmp(eb))
        })
        .map(|(e, c)| (e.clone(), c.clone()))
}

/// LaTeX rendering of a symmetric decomposition, Table-style:
/// `\tfrac{1}{48} m_{(1)} + \tfrac{\pi^2 t^2}{24}`.
pub fn sym_terms_to_latex(terms: &[SymTerm]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, t) in terms.iter().enumerate() {
        let neg = t.coeff.is_negative();
        let mag = t.coeff.abs();
        if i > 0 {
            s.push_str(if neg { " - " } else { " + " });
        } else if neg {
            s.push_str("-");
        }
        let mut sym = String::new();
        if t.pisq > 0 {
            sym.push_str(&power("\\pi^2", t.pisq, "\\pi"));
        }
        if t.tsq > 0 {
            if !sym.is_empty() {
                sym.push(' ');
            }
            sym.push_str(&power("t^2", t.tsq, "t"));
        }
        if t.sinv > 0 {
            if !sym.is_empty() {
                sym.push(' ');
            }
            sym.push_str(&power("s^{-1}", t.sinv, "s^{-1}"));
        }
        let mlam = if t.lambda.0.is_empty() {
            String::new()
        } else {
            format!(
                "m_{{({})}}",
                t.lambda
                    .0
                    .iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )
        };
        let one = mag == Rat::one();
        if mag.denom() == &num_bigint::BigInt::from(1) {
            if !one {
                s.push_str(&format!("{} ", mag.numer()));
            } else if sym.is_empty() && mlam.is_empty() {
                s.push('1');
            }
            s.push_str(&sym);
            if !sym.is_empty() && !mlam.is_empty() {
                s.push(' ');
            }
            s.push_str(&mlam);
        } else {
            let num = if sym.is_empty() {
                mag.numer().to_string()
            } else if mag.numer() == &num_bigint::BigInt::from(1) {
                sym.clone()
            } else {
                format!("{} {sym}", mag.numer())
            };
            s.push_str(&format!("\\tfrac{{{num}}}{{{}}}", mag.denom()));
            if !mlam.is_empty() {
                s.push(' ');
                s.push_str(&mlam);
            }
        }
    }
    s
}

fn power(base_sq: &str, k: u32, base: &str) -> String {
    if k == 1 {
        return base_sq.to_string();
    }
    match base {
        "\\pi" | "t" => format!("{base}^{{{}}}", 2 * k),
        _ => format!("s^{{-{k}}}"),
    }
}

// ---------------------------------------------------------------------------
// JSON schema: {"vars": [...], "terms": [{"exp": [...], "num": "..", "den": ".."}]}
// Integers are decimal strings so arbitrary precision survives the trip.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PolyJson {
    vars: Vec<String>,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<u32>,
    num: String,
    den: String,
}

pub fn var_names(n: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..=n).map(|i| format!("Lsq{i}")).collect();
    v.extend(["PiSq".to_string(), "Tsq".to_string(), "SInv".to_string()]);
    v
}

impl Poly {
    pub fn to_json(&self) -> serde_json::Value {
        let doc = PolyJson {
            vars: var_names(self.n),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson {
                    exp: e.clone(),
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("poly serialization")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, PolyError> {
        let doc: PolyJson =
            serde_json::from_value(v.clone()).map_err(|e| PolyError::BadJson(e.to_string()))?;
        if doc.vars.len() < EXTRA_VARS {
            return Err(PolyError::BadJson("too few variables".into()));
        }
        let n = doc.vars.len() - EXTRA_VARS;
        if doc.vars != var_names(n) {
            return Err(PolyError::BadJson("unexpected variable names".into()));
        }
        let mut p = Poly::zero(n);
        for t in doc.terms {
            if t.exp.len() != n + EXTRA_VARS {
                return Err(PolyError::BadJson("exponent arity mismatch".into()));
            }
            let num: num_bigint::BigInt = t
                .num
                .parse()
                .map_err(|_| PolyError::BadJson(format!("bad num {:?}", t.num)))?;
            let den: num_bigint::BigInt = t
                .den
                .parse()
                .map_err(|_| PolyError::BadJson(format!("bad den {:?}", t.den)))?;
            if den.is_zero() {
                return Err(PolyError::BadJson("zero denominator".into()));
            }
            p.add_term(t.exp, Rat::new(num, den));
        }
        Ok(p)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = var_names(self.n);
        let mut first = true;
        for (exp, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", rat_to_string(c))?;
            for (i, &e) in exp.iter().enumerate() {
                if e == 1 {
                    write!(f, "*{}", names[i])?;
                } else if e > 1 {
                    write!(f, "*{}^{}", names[i], e)?;
                }
            }
        }
        Ok(())
    }
}
