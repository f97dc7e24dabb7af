//! The three topological recursions: continuous (Kontsevich volumes),
//! discrete (lattice point counts) and twisted (multicurve statistics and
//! Masur-Veech polynomials), plus a Monte-Carlo moduli integrator used for
//! validation.
//!
//! Every integral on the exact path is performed symbolically through three
//! moment families:
//!
//! * `int_0^inf l^{2k+1} B(L1, L2, l) dl` -- a polynomial in `L1^2, L2^2`,
//!   from `int_0^inf l^m [x - l]_+ dl = x^{m+2} / ((m+1)(m+2))`;
//! * `int int l^{2k+1} l'^{2k'+1} C(L1, l, l') dl dl'
//!    = (2k+1)! (2k'+1)! L1^{2k+2k'+4} / (2k+2k'+5)!` (a Dirichlet integral);
//! * `int_0^inf l^{2k+1} / (e^{sl} - 1) dl = (2k+1)! zeta(2k+2) s^{-2k-2}`.
//!
//! The one-holed torus base cases carry the elliptic-involution factor 1/2:
//! `V_{1,1}(L) = 1/2 int l C(L,l,l) dl = L^2/48`, and its twist adds
//! `1/2 zeta(2) s^{-2}`. The discrete base uses the same convention,
//! `N_{1,1}(L) = 1/2 sum_{l=1}^{L/2} l C(L,l,l)`, which is what the
//! brute-force count over integer metric ribbon graphs gives.

use crate::curves::count_multicurves_f64;
use crate::poly::{Poly, EXTRA_VARS};
use crate::rational::{factorial, rat, rat_to_f64, Rat};
use crate::ribbon::{
    adjacency_det_check, enumerate_trivalent, solve_subset, RibbonError, RibbonGraph,
};
use crate::zeta::zeta_even_coeff;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrError {
    #[error("unstable type ({0},{1})")]
    Unstable(usize, usize),
    #[error("boundary tuple has wrong arity")]
    BadBoundary,
    #[error("moment index must be nonnegative")]
    BadIndex,
    #[error("monte-carlo integration supports only (1,1) and (0,4)")]
    UnsupportedType,
    #[error("graph enumeration failed: {0}")]
    Ribbon(#[from] RibbonError),
    #[error("twisted amplitude violates the pi/s balance")]
    UnbalancedAmplitude,
}

fn stable(g: usize, n: usize) -> bool {
    2 * (g as i64) - 2 + (n as i64) > 0
}

// ---------------------------------------------------------------------------
// Kernel moments
// ---------------------------------------------------------------------------

/// `int_0^inf l^{2k+1} B(L1, L2, l) dl` as a polynomial in a context of
/// `arity` boundary variables, with `L1 -> Lsq_{v1}`, `L2 -> Lsq_{v2}`.
///
/// Closed form `((L1+L2)^{2k+3} + (L1-L2)^{2k+3}) / (2 L1 (2k+2)(2k+3))`;
/// the odd binomial terms cancel, so the result is even in both lengths.
pub fn moment_b(k: u32, arity: usize, v1: usize, v2: usize) -> Poly {
    assert!(v1 < arity && v2 < arity && v1 != v2);
    let n_pow = 2 * k + 3;
    let denom = Rat::from_integer(((2 * k + 2) as i64 * (2 * k + 3) as i64).into());
    let mut out = Poly::zero(arity);
    for j in (0..=n_pow).step_by(2) {
        // binom(2k+3, j) L1^{2k+2-j} L2^j, both exponents even
        let c = crate::rational::binomial(n_pow as u64, j as u64) / &denom;
        let mut exp = vec![0u32; arity + EXTRA_VARS];
        exp[v1] = (n_pow - j - 1) / 2;
        exp[v2] = j / 2;
        out.add_term(exp, c);
    }
    out
}

/// `int int l^{2k+1} l'^{2k'+1} C(L1, l, l') dl dl'` in a context of `arity`
/// variables with `L1 -> Lsq_{v1}`.
pub fn moment_c(k: u32, kp: u32, arity: usize, v1: usize) -> Poly {
    assert!(v1 < arity);
    let num = factorial((2 * k + 1) as u64) * factorial((2 * kp + 1) as u64);
    let den = factorial((2 * k + 2 * kp + 5) as u64);
    let mut exp = vec![0u32; arity + EXTRA_VARS];
    exp[v1] = k + kp + 2;
    Poly::monomial(arity, exp, num / den)
}

/// `int_0^inf l^{2k+1} f_s(l) dl` with `f_s(l) = 1/(e^{sl}-1)`:
/// `(2k+1)! zeta(2k+2) SInv^{2k+2}` as `PiSq^{k+1} SInv^{2k+2}` times a rational.
pub fn zeta_moment(k: u32, arity: usize) -> Poly {
    let c = factorial((2 * k + 1) as u64) * zeta_even_coeff(k + 1);
    let mut exp = vec![0u32; arity + EXTRA_VARS];
    exp[arity] = k + 1; // PiSq
    exp[arity + 2] = 2 * k + 2; // SInv
    Poly::monomial(arity, exp, c)
}

// ---------------------------------------------------------------------------
// Continuous recursion: Kontsevich volumes
// ---------------------------------------------------------------------------

/// `V^K_{g,n}` as a symmetric polynomial in `Lsq_1..Lsq_n`.
pub fn vk(g: usize, n: usize) -> Result<Poly, TrError> {
    amplitude(g, n, Flavor::Kontsevich)
}

/// The one-parameter Masur-Veech polynomial `V^MV_{g,n}(L; s)`: the twisted
/// amplitude, a polynomial in `Lsq_i`, `PiSq` and `SInv` in which the `PiSq`
/// exponent is half the `SInv` exponent in every term.
pub fn twisted_mv(g: usize, n: usize) -> Result<Poly, TrError> {
    amplitude(g, n, Flavor::Twisted)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Flavor {
    Kontsevich,
    Twisted,
}

fn amplitude_cache() -> &'static Mutex<HashMap<(usize, usize, bool), Poly>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, bool), Poly>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn amplitude(g: usize, n: usize, flavor: Flavor) -> Result<Poly, TrError> {
    if !stable(g, n) {
        return Err(TrError::Unstable(g, n));
    }
    let key = (g, n, matches!(flavor, Flavor::Twisted));
    if let Some(hit) = amplitude_cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let result = compute_amplitude(g, n, flavor)?;
    amplitude_cache()
        .lock()
        .unwrap()
        .insert(key, result.clone());
    Ok(result)
}

/// Zero polynomial for the unstable conventions `V_{0,1} = V_{0,2} = 0`.
fn amplitude_or_zero(g: i64, n: usize, flavor: Flavor) -> Result<Option<Poly>, TrError> {
    if g < 0 || !stable(g as usize, n) {
        return Ok(None);
    }
    Ok(Some(amplitude(g as usize, n, flavor)?))
}

fn compute_amplitude(g: usize, n: usize, flavor: Flavor) -> Result<Poly, TrError> {
    // Base cases.
    if (g, n) == (0, 3) {
        return Ok(Poly::one(3));
    }
    if (g, n) == (1, 1) {
        // 1/2 int l C(L,l,l) dl = L^2/48; the twist adds 1/2 zeta(2) s^{-2}.
        let mut base = Poly::lsq(1, 0).scale(&rat(1, 48));
        if matches!(flavor, Flavor::Twisted) {
            base = &base + &zeta_moment(0, 1).scale(&rat(1, 2));
        }
        return Ok(base);
    }

    let twisted = matches!(flavor, Flavor::Twisted);
    let mut acc = Poly::zero(n);

    // B-terms: remove boundary m, integrate the child's first variable.
    for m in 1..n {
        let child = amplitude(g, n - 1, flavor)?;
        // child vars: 0 = integrated, 1.. = parent boundaries {1..n-1}\{m}
        let mut map = Vec::with_capacity(n - 1);
        map.push(0); // temporarily; replaced per coefficient below
        let rest: Vec<usize> = (1..n).filter(|&j| j != m).collect();
        map.extend(rest.iter().copied());
        for (kk, coeff) in child.coeffs_in(0) {
            let lifted = coeff.relabel(n, &map);
            let mut weight = moment_b(kk, n, 0, m);
            if twisted {
                weight = &weight + &zeta_moment(kk, n);
            }
            acc = &acc + &(&lifted * &weight);
        }
    }

    // C-terms: nonseparating + all stable splittings, both integrated in two
    // variables against the (twisted) C kernel.
    let half = rat(1, 2);
    let add_c_child = |w: &Poly, map: &[usize], acc: &mut Poly| -> Result<(), TrError> {
        for ((kk, kp), coeff) in w.coeffs_in2(0, 1) {
            let lifted = coeff.relabel(n, map);
            let weight = c_weight(kk, kp, n, twisted);
            *acc = &*acc + &(&lifted * &weight).scale(&half);
        }
        Ok(())
    };

    if let Some(child) = amplitude_or_zero(g as i64 - 1, n + 1, flavor)? {
        // child vars: 0, 1 integrated; 2..n ↦ parent 1..n-1
        let mut map = vec![0usize, 0];
        map.extend(1..n);
        add_c_child(&child, &map, &mut acc)?;
    }

    // splittings over ordered pairs (h, J), (g-h, Jc)
    let others: Vec<usize> = (1..n).collect();
    for h in 0..=g {
        for mask in 0..(1u32 << others.len()) {
            let j: Vec<usize> = others
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &v)| v)
                .collect();
            let jc: Vec<usize> = others
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) == 0)
                .map(|(_, &v)| v)
                .collect();
            // Both factors must be stable before either is computed; this is
            // also what keeps the recursion well-founded (the degenerate
            // splitting with an unstable partner would reproduce (g,n)).
            if !stable(h, 1 + j.len()) || !stable(g - h, 1 + jc.len()) {
                continue;
            }
            let left = amplitude(h, 1 + j.len(), flavor)?;
            let right = amplitude(g - h, 1 + jc.len(), flavor)?;
            // Assemble W(l, l') = left(l, J) * right(l', Jc) in an extended
            // context where vars n, n+1 hold the integrated lengths and the
            // parent slots keep their indices.
            let ext = n + 2;
            let mut lmap_ext = vec![n];
            lmap_ext.extend(j.iter().copied());
            let mut rmap_ext = vec![n + 1];
            rmap_ext.extend(jc.iter().copied());
            let lw = left.relabel(ext, &lmap_ext);
            let rw = right.relabel(ext, &rmap_ext);
            let w = &lw * &rw;
            for ((kk, kp), coeff) in w.coeffs_in2(n, n + 1) {
                // coeff only involves parent slots 1..n-1
                let back: Vec<usize> = (0..ext).map(|v| if v < n { v } else { 0 }).collect();
                let lifted = coeff.relabel(n, &back);
                let weight = c_weight(kk, kp, n, twisted);
                acc = &acc + &(&lifted * &weight).scale(&half);
            }
        }
    }

    Ok(acc)
}

/// `int int l^{2k+1} l'^{2k'+1} C[f](L1, l, l') dl dl'` where `C[f]` is the
/// Kontsevich kernel, twisted when requested:
/// `C + f(l) B(L1,l,l') + f(l') B(L1,l',l) + f(l) f(l')`.
fn c_weight(k: u32, kp: u32, arity: usize, twisted: bool) -> Poly {
    let mut w = moment_c(k, kp, arity, 0);
    if !twisted {
        return w;
    }
    // f(l) B(L1, l, l'): integrate l' against B (polynomial in L1^2, l^2),
    // then l against f.
    w = &w + &cross_term(k, kp, arity);
    w = &w + &cross_term(kp, k, arity);
    w = &w + &(&zeta_moment(k, arity) * &zeta_moment(kp, arity));
    w
}

/// `int int l^{2k+1} l'^{2k'+1} f(l) B(L1, l, l') dl' dl`.
fn cross_term(k: u32, kp: u32, arity: usize) -> Poly {
    // moment_b in an auxiliary context (L1, x) with x the f-integrated length
    let mb = moment_b(kp, 2, 0, 1);
    let mut out = Poly::zero(arity);
    for (j, coeff) in mb.coeffs_in(1) {
        // coeff = c_j(L1^2); contributes c_j * int l^{2(k+j)+1} f(l) dl
        let lifted = coeff.relabel(arity, &[0, 0]);
        out = &out + &(&lifted * &zeta_moment(k + j, arity));
    }
    out
}

// ---------------------------------------------------------------------------
// Derived amplitudes
// ---------------------------------------------------------------------------

/// `VN_{g,n}(L; t)`: inverse Laplace transform of the Masur-Veech amplitude.
/// Each term `c PiSq^k SInv^{2k}` becomes `c / (2k)! PiSq^k Tsq^k`.
pub fn vn_from_mv(mv: &Poly) -> Result<Poly, TrError> {
    let n = mv.arity();
    let mut out = Poly::zero(n);
    for (exp, c) in mv.terms() {
        let pi = exp[n];
        let sinv = exp[n + 2];
        if exp[n + 1] != 0 || sinv != 2 * pi {
            return Err(TrError::UnbalancedAmplitude);
        }
        let mut nexp = exp.clone();
        nexp[n + 1] = pi; // Tsq
        nexp[n + 2] = 0;
        out.add_term(nexp, c / factorial(sinv as u64));
    }
    Ok(out)
}

/// Both twisted returns: the Masur-Veech polynomial and `VN(L;t)`.
pub fn twisted_vn(g: usize, n: usize) -> Result<(Poly, Poly), TrError> {
    let mv = twisted_mv(g, n)?;
    let vn = vn_from_mv(&mv)?;
    Ok((mv, vn))
}

// ---------------------------------------------------------------------------
// Discrete recursion
// ---------------------------------------------------------------------------

fn b_discrete(l1: i64, l2: i64, ell: i64) -> Rat {
    if (l1 + l2 + ell) % 2 != 0 {
        return Rat::zero();
    }
    let plus = |x: i64| if x > 0 { x } else { 0 };
    Rat::new(
        (plus(l1 - l2 - ell) - plus(-l1 + l2 - ell) + plus(l1 + l2 - ell)).into(),
        (2 * l1).into(),
    )
}

fn c_discrete(l1: i64, ell: i64, ellp: i64) -> Rat {
    if (l1 + ell + ellp) % 2 != 0 {
        return Rat::zero();
    }
    let v = l1 - ell - ellp;
    if v <= 0 {
        return Rat::zero();
    }
    Rat::new(v.into(), l1.into())
}

fn discrete_cache() -> &'static Mutex<HashMap<(usize, usize, Vec<i64>), Rat>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, Vec<i64>), Rat>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The lattice count `N_{g,n}(L)`: zero on odd perimeter sums, otherwise the
/// automorphism-weighted number of integer metric ribbon graphs, computed by
/// the finite-support discrete recursion. The amplitude is symmetric in the
/// boundary lengths, so values are memoised on the sorted tuple.
pub fn discrete_n(g: usize, n: usize, boundary: &[i64]) -> Result<Rat, TrError> {
    if !stable(g, n) {
        return Err(TrError::Unstable(g, n));
    }
    if boundary.len() != n || boundary.iter().any(|&l| l < 1) {
        return Err(TrError::BadBoundary);
    }
    if boundary.iter().sum::<i64>() % 2 != 0 {
        return Ok(Rat::zero());
    }
    let mut key: Vec<i64> = boundary.to_vec();
    key.sort_unstable();
    if let Some(hit) = discrete_cache().lock().unwrap().get(&(g, n, key.clone())) {
        return Ok(hit.clone());
    }
    let value = compute_discrete(g, n, &key)?;
    discrete_cache()
        .lock()
        .unwrap()
        .insert((g, n, key), value.clone());
    Ok(value)
}

fn discrete_or_zero(g: i64, boundary: &[i64]) -> Result<Rat, TrError> {
    let n = boundary.len();
    if g < 0 || !stable(g as usize, n) {
        return Ok(Rat::zero());
    }
    discrete_n(g as usize, n, boundary)
}

fn compute_discrete(g: usize, n: usize, l: &[i64]) -> Result<Rat, TrError> {
    if (g, n) == (0, 3) {
        return Ok(Rat::one()); // parity already checked
    }
    if (g, n) == (1, 1) {
        let l1 = l[0];
        let mut acc = Rat::zero();
        for ell in 1..=(l1 / 2) {
            acc += Rat::from_integer(ell.into()) * c_discrete(l1, ell, ell);
        }
        return Ok(acc * rat(1, 2));
    }
    let l1 = l[0];
    let rest = &l[1..];
    let mut acc = Rat::zero();

    // B-terms
    for (mi, &lm) in rest.iter().enumerate() {
        let others: Vec<i64> = rest
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != mi)
            .map(|(_, &v)| v)
            .collect();
        for ell in 1..=(l1 + lm) {
            let b = b_discrete(l1, lm, ell);
            if b.is_zero() {
                continue;
            }
            let mut child: Vec<i64> = vec![ell];
            child.extend(&others);
            let sub = discrete_or_zero(g as i64, &child)?;
            if !sub.is_zero() {
                acc += Rat::from_integer(ell.into()) * b * sub;
            }
        }
    }

    // C-terms
    let half = rat(1, 2);
    for ell in 1..l1 {
        for ellp in 1..=(l1 - ell) {
            let c = c_discrete(l1, ell, ellp);
            if c.is_zero() {
                continue;
            }
            let mut inner = Rat::zero();
            // nonseparating
            let mut child: Vec<i64> = vec![ell, ellp];
            child.extend(rest);
            inner += discrete_or_zero(g as i64 - 1, &child)?;
            // separating splittings (ordered); both sides must be stable
            for h in 0..=g {
                for mask in 0..(1u32 << rest.len()) {
                    let mut j: Vec<i64> = vec![ell];
                    let mut jc: Vec<i64> = vec![ellp];
                    for (i, &v) in rest.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            j.push(v);
                        } else {
                            jc.push(v);
                        }
                    }
                    if !stable(h, j.len()) || !stable(g - h, jc.len()) {
                        continue;
                    }
                    let a = discrete_n(h, j.len(), &j)?;
                    if a.is_zero() {
                        continue;
                    }
                    inner += a * discrete_n(g - h, jc.len(), &jc)?;
                }
            }
            if !inner.is_zero() {
                acc += Rat::from_integer((ell * ellp).into()) * c * inner * &half;
            }
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Monte-Carlo moduli integration
// ---------------------------------------------------------------------------

/// Observable for [`mc_average`].
#[derive(Debug, Clone, Copy)]
pub enum Observable {
    One,
    /// Number of multicurves of length at most `t`.
    MulticurveCount(f64),
}

#[derive(Debug, Clone)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    /// Set when the integral is evaluated in closed form instead of sampled.
    pub exact: bool,
}

/// Integrates an observable over the fixed-perimeter moduli space against
/// the Kontsevich measure, summing top-dimensional cells with weight
/// `1/#Aut(G)`.
///
/// On the one-holed torus the slice measure of the three-edge cell in the
/// coordinates `(a, b)` (with `c = L/2 - a - b`) is exactly `da db`, so the
/// constant observable integrates in closed form to `L^2/48`. On the
/// four-holed sphere each trivalent cell is sampled uniformly over two free
/// edges with density `2 dl` after eliminating four lengths through the
/// adjacency matrix.
pub fn mc_average(
    g: usize,
    n: usize,
    boundary: &[Rat],
    obs: Observable,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, TrError> {
    match (g, n) {
        (1, 1) => mc_torus(boundary, obs, samples, seed),
        (0, 4) => mc_sphere4(boundary, obs, samples, seed),
        _ => Err(TrError::UnsupportedType),
    }
}

fn mc_torus(
    boundary: &[Rat],
    obs: Observable,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, TrError> {
    if boundary.len() != 1 {
        return Err(TrError::BadBoundary);
    }
    let l = rat_to_f64(&boundary[0]);
    if let Observable::One = obs {
        // area of {a,b > 0, a + b < L/2} = L^2/8, weighted by 1/#Aut = 1/6
        let area = l * l / 8.0;
        return Ok(McEstimate {
            value: area / 6.0,
            stderr: 0.0,
            samples: 0,
            exact: true,
        });
    }
    let graph = enumerate_trivalent(1, 1)?.remove(0).0;
    let t = match obs {
        Observable::MulticurveCount(t) => t,
        Observable::One => unreachable!(),
    };
    let area = l * l / 8.0;
    let chunk = |lo: u64, hi: u64, seed: u64| -> (f64, f64, u64) {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in lo..hi {
            // uniform on the triangle by rejection from the square
            let (a, b) = loop {
                let a = rng.gen_range(0.0..l / 2.0);
                let b = rng.gen_range(0.0..l / 2.0);
                if a + b < l / 2.0 {
                    break (a, b);
                }
            };
            let c = l / 2.0 - a - b;
            let count = count_multicurves_f64(&graph, &[a, b, c], t) as f64;
            let v = count * area / 6.0;
            sum += v;
            sq += v * v;
        }
        (sum, sq, hi - lo)
    };
    finish_mc(samples, seed, chunk)
}

fn mc_sphere4(
    boundary: &[Rat],
    obs: Observable,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, TrError> {
    if boundary.len() != 4 {
        return Err(TrError::BadBoundary);
    }
    let cells = enumerate_trivalent(0, 4)?;
    let lf: Vec<f64> = boundary.iter().map(rat_to_f64).collect();

    // Precompute per cell: free edge pair, box bounds, and the f64 solve data.
    struct Cell {
        graph: RibbonGraph,
        aut: f64,
        subset: Vec<usize>,
        free: Vec<usize>,
        a: Vec<Vec<f64>>,
        ainv: Vec<Vec<f64>>, // inverse of the subset columns
        ub: Vec<f64>,
    }
    let mut prepared = Vec::new();
    for (graph, aut) in &cells {
        let (subset, _) = adjacency_det_check(graph)?;
        let a_rat = graph.adjacency_matrix();
        let n_e = graph.n_edges();
        let free: Vec<usize> = (0..n_e).filter(|e| !subset.contains(e)).collect();
        // exact inverse via rational solves of A_S x = e_i
        let mut ainv = vec![vec![0.0; 4]; 4];
        for col in 0..4 {
            let rhs: Vec<Rat> = (0..4)
                .map(|r| if r == col { Rat::one() } else { Rat::zero() })
                .collect();
            let x = solve_subset(&a_rat, &subset, &rhs).ok_or(RibbonError::NoAdmissibleSubset)?;
            for row in 0..4 {
                ainv[row][col] = rat_to_f64(&x[row]);
            }
        }
        let a: Vec<Vec<f64>> = a_rat
            .iter()
            .map(|row| row.iter().map(|&x| x as f64).collect())
            .collect();
        let ub: Vec<f64> = free
            .iter()
            .map(|&e| {
                (0..4)
                    .filter(|&i| a[i][e] > 0.0)
                    .map(|i| lf[i] / a[i][e])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        prepared.push(Cell {
            graph: graph.clone(),
            aut: *aut as f64,
            subset,
            free,
            a,
            ainv,
            ub,
        });
    }

    let chunk = move |lo: u64, hi: u64, seed: u64| -> (f64, f64, u64) {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in lo..hi {
            // Stratified over cells would be fine too; a single pooled
            // estimator keeps the bookkeeping simple: pick a cell uniformly
            // and reweight by the number of cells.
            let ci = rng.gen_range(0..prepared.len());
            let cell = &prepared[ci];
            let n_e = cell.graph.n_edges();
            let mut lengths = vec![0.0f64; n_e];
            let mut box_vol = 1.0;
            for (fi, &e) in cell.free.iter().enumerate() {
                lengths[e] = rng.gen_range(0.0..cell.ub[fi]);
                box_vol *= cell.ub[fi];
            }
            // solve for the subset lengths
            let mut rhs = [0.0f64; 4];
            for i in 0..4 {
                let mut v = lf[i];
                for &e in &cell.free {
                    v -= cell.a[i][e] * lengths[e];
                }
                rhs[i] = v;
            }
            let mut positive = true;
            for (r, &e) in cell.subset.iter().enumerate() {
                let mut v = 0.0;
                for c in 0..4 {
                    v += cell.ainv[r][c] * rhs[c];
                }
                lengths[e] = v;
                if v <= 0.0 {
                    positive = false;
                }
            }
            let mut v = 0.0;
            if positive {
                let weight = 2.0 * box_vol / cell.aut * prepared.len() as f64;
                v = match obs {
                    Observable::One => weight,
                    Observable::MulticurveCount(t) => {
                        weight * count_multicurves_f64(&cell.graph, &lengths, t) as f64
                    }
                };
            }
            sum += v;
            sq += v * v;
        }
        (sum, sq, hi - lo)
    };
    finish_mc(samples, seed, chunk)
}

fn finish_mc<F>(samples: u64, seed: u64, chunk: F) -> Result<McEstimate, TrError>
where
    F: Fn(u64, u64, u64) -> (f64, f64, u64) + Sync,
{
    let n_chunks = 64u64;
    let per = samples.div_ceil(n_chunks);
    let parts: Vec<(f64, f64, u64)> = (0..n_chunks)
        .into_par_iter()
        .map(|i| {
            let lo = i * per;
            let hi = ((i + 1) * per).min(samples);
            if lo >= hi {
                (0.0, 0.0, 0)
            } else {
                chunk(
                    lo,
                    hi,
                    seed.wrapping_add(i).wrapping_mul(0x9e3779b97f4a7c15),
                )
            }
        })
        .collect();
    let total: f64 = parts.iter().map(|p| p.0).sum();
    let total_sq: f64 = parts.iter().map(|p| p.1).sum();
    let count: u64 = parts.iter().map(|p| p.2).sum();
    let mean = total / count as f64;
    let var = (total_sq / count as f64 - mean * mean).max(0.0);
    Ok(McEstimate {
        value: mean,
        stderr: (var / count as f64).sqrt(),
        samples: count,
        exact: false,
    })
}

// ---------------------------------------------------------------------------
// Helpers for evaluation
// ---------------------------------------------------------------------------

/// Evaluates a (g,n) amplitude at rational squared lengths with `Tsq`/`SInv`
/// zero, as used by the scaling-limit checks.
pub fn eval_vk(poly: &Poly, lengths: &[Rat]) -> Rat {
    let lsq: Vec<Rat> = lengths.iter().map(|l| l * l).collect();
    poly.eval(&lsq, &Rat::zero(), &Rat::zero(), &Rat::zero())
}

/// `VN(L; t)` evaluated as a float (with the numeric value of pi^2).
pub fn eval_vn_f64(vn: &Poly, lengths: &[f64], t: f64) -> f64 {
    let lsq: Vec<f64> = lengths.iter().map(|l| l * l).collect();
    vn.eval_f64(&lsq, t * t, 0.0)
}

/// Exact homogeneity check `V(L; s) = s^{-(6g-6+2n)} V(sL; 1)` for integer
/// scalings: substitutes `s -> lambda s`, `L -> L/lambda` and compares.
pub fn mv_homogeneous(mv: &Poly, g: usize, n: usize, lambda: i64) -> bool {
    let dim = (6 * g as i64 - 6 + 2 * n as i64) as u32;
    let lam = Rat::from_integer(lambda.into());
    let mut lhs = Poly::zero(mv.arity());
    for (exp, c) in mv.terms() {
        // term c L^{2a} pi^{2p} s^{-2p}; under (s, L) -> (lambda s, L/lambda)
        // it picks up lambda^{-2a - 2p... } relative to the grading.
        let lsq_deg: u32 = exp[..mv.arity()].iter().sum();
        let sinv = exp[mv.arity() + 2];
        let mut pow = Rat::one();
        for _ in 0..(2 * lsq_deg) {
            pow = pow / &lam;
        }
        for _ in 0..sinv {
            pow = pow / &lam;
        }
        lhs.add_term(exp.clone(), c * pow);
    }
    // The substitution must shrink the whole polynomial by lambda^{-dim}.
    let mut rhs = Poly::zero(mv.arity());
    for (exp, c) in mv.terms() {
        let mut pow = Rat::one();
        for _ in 0..dim {
            pow = pow / &lam;
        }
        rhs.add_term(exp.clone(), c * pow);
    }
    lhs == rhs
}

/// Exact scaling-limit data point: `N_{g,n}(k L) / k^{6g-6+2n}` as a rational.
pub fn lattice_scaled(g: usize, n: usize, l: &[i64], k: i64) -> Result<Rat, TrError> {
    let scaled: Vec<i64> = l.iter().map(|&v| v * k).collect();
    let count = discrete_n(g, n, &scaled)?;
    let dim = 6 * g as i64 - 6 + 2 * n as i64;
    let mut denom = Rat::one();
    for _ in 0..dim {
        denom = denom * Rat::from_integer(k.into());
    }
    Ok(count / denom)
}

pub fn rat_pow2(g: usize, n: usize) -> Rat {
    // 2^{3 - 2g - n} as a rational
    let e = 3i64 - 2 * g as i64 - n as i64;
    if e >= 0 {
        Rat::from_integer(num_bigint::BigInt::from(2u32).pow(e as u32))
    } else {
        Rat::new(1.into(), num_bigint::BigInt::from(2u32).pow((-e) as u32))
    }
}

/// Decomposes the amplitude by total Lsq degree; used by symmetry tests.
pub fn degrees(poly: &Poly) -> BTreeMap<u32, usize> {
    let mut out = BTreeMap::new();
    for (exp, _) in poly.terms() {
        let d: u32 = exp[..poly.arity()].iter().sum();
        *out.entry(d).or_insert(0) += 1;
    }
    out
}

pub fn to_u64(count: &Rat) -> Option<u64> {
    count.to_integer().to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{render_symmetric, SymMonomial};
    use crate::rational::rat_int;
    use crate::ribbon::lattice_count_brute;
    use num_traits::Signed;

    #[test]
    fn b_moment_examples() {
        // moment_B(0) = (L1^2 + 3 L2^2) / 6
        let m = moment_b(0, 2, 0, 1);
        let expect = &Poly::lsq(2, 0).scale(&rat(1, 6)) + &Poly::lsq(2, 1).scale(&rat(1, 2));
        assert_eq!(m, expect);
        // moment_C(0,0) = L1^4 / 120
        let c = moment_c(0, 0, 1, 0);
        assert_eq!(c, Poly::lsq(1, 0).pow(2).scale(&rat(1, 120)));
    }

    #[test]
    fn vk_small_types() {
        // V_{1,1} = L^2/48
        assert_eq!(vk(1, 1).unwrap(), Poly::lsq(1, 0).scale(&rat(1, 48)));
        // V_{0,4} = 1/2 sum L_i^2
        let v04 = vk(0, 4).unwrap();
        let expect = SymMonomial::new(vec![1]).expand(4).scale(&rat(1, 2));
        assert_eq!(v04, expect);
        // V_{1,2} = (L1^2 + L2^2)^2 / 192
        let v12 = vk(1, 2).unwrap();
        let sum = &Poly::lsq(2, 0) + &Poly::lsq(2, 1);
        assert_eq!(v12, (&sum * &sum).scale(&rat(1, 192)));
        // V_{0,5} = 1/8 m_(2) + 1/2 m_(1,1)
        let v05 = vk(0, 5).unwrap();
        let expect = &SymMonomial::new(vec![2]).expand(5).scale(&rat(1, 8))
            + &SymMonomial::new(vec![1, 1]).expand(5).scale(&rat(1, 2));
        assert_eq!(v05, expect);
    }

    #[test]
    fn vk_symmetry_and_homogeneity() {
        for (g, n) in [(0usize, 4usize), (0, 5), (1, 1), (1, 2), (1, 3), (2, 1)] {
            let p = vk(g, n).unwrap();
            assert!(p.is_symmetric(), "({g},{n}) not symmetric");
            let dim = (6 * g as i64 - 6 + 2 * n as i64) as u32;
            assert_eq!(p.weighted_degrees(), vec![dim], "({g},{n}) not homogeneous");
        }
    }

    #[test]
    fn twisted_small_types() {
        // VN_{1,1} = m_(1)/48 + pi^2 t^2 / 24
        let (_, vn) = twisted_vn(1, 1).unwrap();
        let expect = &Poly::lsq(1, 0).scale(&rat(1, 48))
            + &(&Poly::pisq(1) * &Poly::tsq(1)).scale(&rat(1, 24));
        assert_eq!(vn, expect);
        // VN_{0,4} = 1/2 m_(1) + pi^2 t^2 / 4
        let (_, vn) = twisted_vn(0, 4).unwrap();
        let expect = &SymMonomial::new(vec![1]).expand(4).scale(&rat(1, 2))
            + &(&Poly::pisq(4) * &Poly::tsq(4)).scale(&rat(1, 4));
        assert_eq!(vn, expect);
    }

    #[test]
    fn twisted_t0_specialisation_is_vk() {
        for (g, n) in [(0usize, 4usize), (0, 5), (1, 1), (1, 2), (2, 1)] {
            let (_, vn) = twisted_vn(g, n).unwrap();
            assert_eq!(vn.lsq_part(), vk(g, n).unwrap(), "({g},{n})");
        }
    }

    #[test]
    fn mv_homogeneity_exact() {
        for (g, n) in [(0usize, 4usize), (1, 1), (1, 2)] {
            let mv = twisted_mv(g, n).unwrap();
            assert!(mv_homogeneous(&mv, g, n, 2));
            assert!(mv_homogeneous(&mv, g, n, 3));
        }
    }

    #[test]
    fn discrete_base_cases() {
        assert_eq!(discrete_n(0, 3, &[2, 2, 2]).unwrap(), rat_int(1));
        assert_eq!(discrete_n(0, 3, &[1, 1, 1]).unwrap(), Rat::zero());
        assert_eq!(discrete_n(1, 1, &[4]).unwrap(), rat(1, 4));
        assert_eq!(discrete_n(1, 1, &[6]).unwrap(), rat(2, 3));
    }

    #[test]
    fn discrete_matches_brute_force() {
        for l in [[2i64, 2], [2, 4], [4, 4]] {
            let rec = discrete_n(1, 2, &l).unwrap();
            let brute = lattice_count_brute(1, 2, &l).unwrap();
            assert_eq!(rec, brute, "(1,2) at {l:?}");
        }
        for l1 in 1..=4i64 {
            for l2 in 1..=4i64 {
                let l = [l1, l2, 2, 2];
                let rec = discrete_n(0, 4, &l).unwrap();
                let brute = lattice_count_brute(0, 4, &l).unwrap();
                assert_eq!(rec, brute, "(0,4) at {l:?}");
            }
        }
    }

    #[test]
    fn discrete_symmetric_across_permutations() {
        let base = discrete_n(0, 4, &[2, 4, 6, 2]).unwrap();
        for perm in [[4, 2, 2, 6], [6, 2, 4, 2], [2, 2, 4, 6]] {
            assert_eq!(discrete_n(0, 4, &perm).unwrap(), base);
        }
    }

    #[test]
    fn lattice_scaling_limit_direction() {
        // N(kL)/k^dim approaches 2^{3-2g-n} V(L) from brute rationals.
        let target = rat_pow2(1, 1) * eval_vk(&vk(1, 1).unwrap(), &[rat_int(2)]);
        let at = |k: i64| lattice_scaled(1, 1, &[2], k).unwrap();
        let err10 = (at(10) - &target).abs();
        let err50 = (at(50) - &target).abs();
        assert!(err50 < err10);
        let rel = err50 / &target;
        assert!(rel < rat(5, 100), "rel error {rel}");
    }

    #[test]
    fn mc_torus_constant_is_exact() {
        let est = mc_average(1, 1, &[rat_int(5)], Observable::One, 0, 1).unwrap();
        assert!(est.exact);
        let expect = rat_to_f64(&eval_vk(&vk(1, 1).unwrap(), &[rat_int(5)]));
        assert!((est.value - expect).abs() < 1e-12);
    }

    #[test]
    fn mc_sphere4_volume() {
        let ones = vec![rat_int(1); 4];
        let est = mc_average(0, 4, &ones, Observable::One, 200_000, 42).unwrap();
        let expect = rat_to_f64(&eval_vk(
            &vk(0, 4).unwrap(),
            &[rat_int(1), rat_int(1), rat_int(1), rat_int(1)],
        ));
        assert!(
            (est.value - expect).abs() < 3.0 * est.stderr.max(1e-3),
            "estimate {} vs {expect} (stderr {})",
            est.value,
            est.stderr
        );
    }

    #[test]
    fn mc_torus_multicurve_count_matches_polynomial() {
        // Sampled average of N(.; 3) at L = 2 against VN_{1,1}(2; 3).
        let est = mc_average(
            1,
            1,
            &[rat_int(2)],
            Observable::MulticurveCount(3.0),
            40_000,
            99,
        )
        .unwrap();
        let (_, vn) = twisted_vn(1, 1).unwrap();
        let expect = eval_vn_f64(&vn, &[2.0], 3.0);
        assert!(
            (est.value - expect).abs() <= 3.0 * est.stderr,
            "estimate {} vs {expect} (stderr {})",
            est.value,
            est.stderr
        );
    }

    #[test]
    fn render_symmetric_of_vn() {
        let (_, vn) = twisted_vn(1, 2).unwrap();
        let terms = render_symmetric(&vn, 2).unwrap();
        assert!(!terms.is_empty());
    }
}
