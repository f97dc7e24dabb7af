//! Reference values for the average multicurve-count polynomials
//! `VN_{g,n}(L; t)` and their verification against the twisted recursion.
//!
//! The fixture ships with the crate as JSON and is the authoritative list of
//! expected coefficients in the `m_lambda` basis; `verify_all` recomputes
//! each row with the engine and demands exact rational equality.

use crate::poly::{Poly, SymMonomial};
use crate::rational::Rat;
use crate::trengine::{twisted_vn, TrError};
use num_bigint::BigInt;
use serde::Deserialize;

const FIXTURE: &str = include_str!("../data/multicurve_polynomials.json");

#[derive(Deserialize)]
struct Fixture {
    rows: Vec<RowJson>,
}

#[derive(Deserialize)]
struct RowJson {
    g: usize,
    n: usize,
    terms: Vec<TermJson>,
}

#[derive(Deserialize)]
struct TermJson {
    lambda: Vec<u32>,
    k: u32,
    num: String,
    den: String,
}

#[derive(Debug, Clone)]
pub struct RowResult {
    pub g: usize,
    pub n: usize,
    pub pass: bool,
    pub runtime: std::time::Duration,
}

/// The expected polynomial of a fixture row.
fn row_poly(row: &RowJson) -> Poly {
    let n = row.n;
    let mut expect = Poly::zero(n);
    for t in &row.terms {
        let num: BigInt = t.num.parse().expect("fixture numerator");
        let den: BigInt = t.den.parse().expect("fixture denominator");
        let coeff = Rat::new(num, den);
        let mlam = SymMonomial::new(t.lambda.clone()).expand(n);
        let block = (&Poly::pisq(n) * &Poly::tsq(n)).pow(t.k);
        expect = &expect + &(&mlam * &block).scale(&coeff);
    }
    expect
}

/// Recomputes every row with the twisted recursion; exact equality per row.
pub fn verify_all() -> Result<Vec<RowResult>, TrError> {
    let fixture: Fixture = serde_json::from_str(FIXTURE).expect("embedded fixture parses");
    let mut out = Vec::new();
    for row in &fixture.rows {
        let t0 = std::time::Instant::now();
        let (_, vn) = twisted_vn(row.g, row.n)?;
        let pass = vn == row_poly(row);
        out.push(RowResult {
            g: row.g,
            n: row.n,
            pass,
            runtime: t0.elapsed(),
        });
    }
    Ok(out)
}

/// The expected `VN_{g,n}` polynomial from the fixture, if the row exists.
pub fn expected_vn(g: usize, n: usize) -> Option<Poly> {
    let fixture: Fixture = serde_json::from_str(FIXTURE).expect("embedded fixture parses");
    fixture
        .rows
        .iter()
        .find(|r| r.g == g && r.n == n)
        .map(row_poly)
}

/// All `(g,n)` rows in the fixture.
pub fn row_types() -> Vec<(usize, usize)> {
    let fixture: Fixture = serde_json::from_str(FIXTURE).expect("embedded fixture parses");
    fixture.rows.iter().map(|r| (r.g, r.n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_parses_and_has_all_rows() {
        let types = row_types();
        assert_eq!(types.len(), 12);
        assert!(types.contains(&(3, 1)));
        assert!(types.contains(&(0, 7)));
    }

    #[test]
    fn small_rows_verify() {
        for r in verify_all()
            .unwrap()
            .into_iter()
            .filter(|r| 2 * r.g + r.n <= 5)
        {
            assert!(r.pass, "row ({},{})", r.g, r.n);
        }
    }
}
