//! Fenchel-Nielsen flips on the four-holed sphere and the one-holed torus.
//!
//! The combinatorial formulas are exact piecewise-linear maps on rational
//! data. The hyperbolic counterparts are built from cosh/sinh identities; at
//! rescaled inputs (`beta` up to 2^10) they are evaluated through exact
//! "exponential polynomials" -- finite signed sums `sum c_i e^{q_i}` whose
//! exponents live on the lattice `Q + Q l'` -- so that the huge cancelling
//! terms combine exactly instead of destroying the floating result. Dividing
//! the hyperbolic output by `beta` recovers the combinatorial value at rate
//! `O(1/beta)`.

use crate::rational::{plus_part, rat_to_f64, Rat};
use num_traits::{Signed, Zero};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlipError {
    #[error("lengths must be positive")]
    BadLengths,
    #[error("hyperbolic evaluation left the cosh domain ({0})")]
    Domain(String),
    #[error("hyperbolic evaluation overflowed or produced NaN")]
    NumericFailure,
}

/// Fenchel-Nielsen point on a four-holed sphere: `gamma` separates
/// boundaries {1,4} from {2,3} and the dual curve pairs {1,2} and {3,4}.
#[derive(Debug, Clone)]
pub struct FnPoint04 {
    pub boundary: [Rat; 4],
    pub ell: Rat,
    pub tau: Rat,
}

/// Fenchel-Nielsen point on a one-holed torus.
#[derive(Debug, Clone)]
pub struct FnPoint11 {
    pub boundary: Rat,
    pub ell: Rat,
    pub tau: Rat,
}

/// `M_{i,j}(l) = max{0, L_i - l, L_j - l, (L_i + L_j - l)/2}`.
pub fn m_pair(li: &Rat, lj: &Rat, ell: &Rat) -> Rat {
    let two = Rat::from_integer(2.into());
    let mut best = Rat::zero();
    for cand in [li - ell, lj - ell, (li + lj - ell) / &two] {
        if cand > best {
            best = cand;
        }
    }
    best
}

/// Combinatorial flip on the four-holed sphere:
/// `l' = max{L1+L3-l, L2+L4-l, 2|tau| + M14(l) + M23(l)}` and
/// `|tau'| = 1/2 |2|tau| + l + M14(l) + M23(l) - l' - M12(l') - M34(l')|`
/// with the sign of `tau'` opposite to `tau` (and 0 mapping to 0).
pub fn comb_flip_04(p: &FnPoint04) -> Result<(Rat, Rat), FlipError> {
    if !p.ell.is_positive() || p.boundary.iter().any(|l| !l.is_positive()) {
        return Err(FlipError::BadLengths);
    }
    let [l1, l2, l3, l4] = &p.boundary;
    let two = Rat::from_integer(2.into());
    let abstau = p.tau.abs();
    let m14 = m_pair(l1, l4, &p.ell);
    let m23 = m_pair(l2, l3, &p.ell);
    let mut ellp = &two * &abstau + &m14 + &m23;
    for cand in [l1 + l3 - &p.ell, l2 + l4 - &p.ell] {
        if cand > ellp {
            ellp = cand;
        }
    }
    let m12 = m_pair(l1, l2, &ellp);
    let m34 = m_pair(l3, l4, &ellp);
    let mag = (&two * &abstau + &p.ell + &m14 + &m23 - &ellp - &m12 - &m34).abs() / &two;
    let taup = match p.tau.signum() {
        s if s.is_zero() => Rat::zero(),
        s => -s * mag,
    };
    Ok((ellp, taup))
}

/// The length of the `k`-times Dehn-twisted dual curve: the flip length
/// formula evaluated at `tau + k l`.
pub fn twisted_length_04(p: &FnPoint04, k: i64) -> Result<Rat, FlipError> {
    let shifted = FnPoint04 {
        boundary: p.boundary.clone(),
        ell: p.ell.clone(),
        tau: &p.tau + Rat::from_integer(k.into()) * &p.ell,
    };
    comb_flip_04(&shifted).map(|(l, _)| l)
}

/// Twist recovery on the four-holed sphere from `(l, l', l'')` with
/// `l' = l^{(0)}`, `l'' = l^{(1)}`; exact case dispatch, first case wins.
pub fn twist_from_lengths_04(
    boundary: &[Rat; 4],
    ell: &Rat,
    ellp: &Rat,
    ellpp: &Rat,
) -> Result<Rat, FlipError> {
    if !ell.is_positive() {
        return Err(FlipError::BadLengths);
    }
    let [l1, l2, l3, l4] = boundary;
    let two = Rat::from_integer(2.into());
    let m14 = m_pair(l1, l4, ell);
    let m23 = m_pair(l2, l3, ell);
    let peak = {
        let a = l1 + l3 - ell;
        let b = l2 + l4 - ell;
        if a > b {
            a
        } else {
            b
        }
    };
    if *ellp == peak {
        return Ok((ellpp - &m14 - &m23) / &two - ell);
    }
    if *ellpp == peak {
        return Ok(-((ellp - &m14 - &m23) / &two));
    }
    let sq = |x: Rat| -> Rat { &x * &x };
    let a = sq((ellpp - &m14 - &m23) / &two);
    let b = sq((ellp - &m14 - &m23) / &two);
    Ok((a - b) / (&two * ell) - ell / &two)
}

/// Combinatorial flip on the one-holed torus:
/// `l' = |tau| + [(L - 2l)/2]_+`, `|tau'| = |l - [L/2 - l']_+|`,
/// `sgn(tau') = -sgn(tau)`.
pub fn comb_flip_11(p: &FnPoint11) -> Result<(Rat, Rat), FlipError> {
    if !p.ell.is_positive() || !p.boundary.is_positive() {
        return Err(FlipError::BadLengths);
    }
    let two = Rat::from_integer(2.into());
    let ellp = p.tau.abs() + plus_part(&((&p.boundary - &two * &p.ell) / &two));
    let mag = (&p.ell - plus_part(&(&p.boundary / &two - &ellp))).abs();
    let taup = match p.tau.signum() {
        s if s.is_zero() => Rat::zero(),
        s => -s * mag,
    };
    Ok((ellp, taup))
}

pub fn twisted_length_11(p: &FnPoint11, k: i64) -> Result<Rat, FlipError> {
    let shifted = FnPoint11 {
        boundary: p.boundary.clone(),
        ell: p.ell.clone(),
        tau: &p.tau + Rat::from_integer(k.into()) * &p.ell,
    };
    comb_flip_11(&shifted).map(|(l, _)| l)
}

/// Twist recovery on the one-holed torus from `(l, l', l'')`.
pub fn twist_from_lengths_11(
    boundary: &Rat,
    ell: &Rat,
    ellp: &Rat,
    ellpp: &Rat,
) -> Result<Rat, FlipError> {
    if !ell.is_positive() {
        return Err(FlipError::BadLengths);
    }
    let two = Rat::from_integer(2.into());
    let m = plus_part(&((boundary - &two * ell) / &two));
    let sq = |x: Rat| -> Rat { &x * &x };
    Ok((sq(ellpp - &m) - sq(ellp - &m)) / (&two * ell) - ell / &two)
}

// ---------------------------------------------------------------------------
// Exact exponential polynomials
// ---------------------------------------------------------------------------

/// A finite signed sum `sum c e^{a + b x}` with rational `c, a, b` and a
/// single irrational scale `x` (the already-computed hyperbolic length).
/// Cancellation between terms with equal `(a, b)` is exact, which is what
/// keeps `cosh`/`sinh` combinations at `beta ~ 2^10` meaningful.
#[derive(Debug, Clone, Default)]
struct ExpPoly {
    terms: HashMap<(Rat, Rat), Rat>,
}

impl ExpPoly {
    fn zero() -> Self {
        ExpPoly {
            terms: HashMap::new(),
        }
    }

    fn term(c: Rat, a: Rat, b: Rat) -> Self {
        let mut terms = HashMap::new();
        if !c.is_zero() {
            terms.insert((a, b), c);
        }
        ExpPoly { terms }
    }

    fn constant(c: Rat) -> Self {
        Self::term(c, Rat::zero(), Rat::zero())
    }

    /// `cosh(q/2)` for exponent `q = a + b x`: `(e^{q/2} + e^{-q/2}) / 2`.
    fn cosh_half(a: Rat, b: Rat) -> Self {
        let half = Rat::new(1.into(), 2.into());
        let (ha, hb) = (&a * &half, &b * &half);
        let mut p = Self::term(half.clone(), ha.clone(), hb.clone());
        p.add_inplace(&Self::term(half, -ha, -hb));
        p
    }

    /// `sinh(q/2)`.
    fn sinh_half(a: Rat, b: Rat) -> Self {
        let half = Rat::new(1.into(), 2.into());
        let (ha, hb) = (&a * &half, &b * &half);
        let mut p = Self::term(half.clone(), ha.clone(), hb.clone());
        p.add_inplace(&Self::term(-half, -ha, -hb));
        p
    }

    fn add_inplace(&mut self, other: &ExpPoly) {
        for (k, c) in &other.terms {
            let entry = self.terms.entry(k.clone()).or_insert_with(Rat::zero);
            *entry += c;
            if entry.is_zero() {
                self.terms.remove(k);
            }
        }
    }

    fn sub_inplace(&mut self, other: &ExpPoly) {
        for (k, c) in &other.terms {
            let entry = self.terms.entry(k.clone()).or_insert_with(Rat::zero);
            *entry -= c;
            if entry.is_zero() {
                self.terms.remove(k);
            }
        }
    }

    fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                let key = (a1 + a2, b1 + b2);
                let entry = out.terms.entry(key.clone()).or_insert_with(Rat::zero);
                *entry += c1 * c2;
                if entry.is_zero() {
                    out.terms.remove(&key);
                }
            }
        }
        out
    }

    fn scale(&self, c: &Rat) -> ExpPoly {
        let mut out = ExpPoly::zero();
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            out.terms.insert(k.clone(), v * c);
        }
        out
    }

    /// `ln` of the (positive) value at `x`; exponents evaluated as
    /// `a + b x` in doubles after the exact combination step.
    fn ln_eval(&self, x: f64) -> Result<f64, FlipError> {
        if self.terms.is_empty() {
            return Err(FlipError::Domain("log of zero".into()));
        }
        let mut entries: Vec<(f64, f64)> = self
            .terms
            .iter()
            .map(|((a, b), c)| (rat_to_f64(a) + rat_to_f64(b) * x, rat_to_f64(c)))
            .collect();
        let qmax = entries
            .iter()
            .map(|e| e.0)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut residual = 0.0;
        entries.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        for (q, c) in entries {
            residual += c * (q - qmax).exp();
        }
        if !(residual > 0.0) {
            return Err(FlipError::Domain(format!(
                "nonpositive residual {residual}"
            )));
        }
        let v = qmax + residual.ln();
        if v.is_nan() {
            return Err(FlipError::NumericFailure);
        }
        Ok(v)
    }
}

/// `arcosh(e^y)` from the logarithm of the argument, stable for any size.
fn arcosh_from_ln(y: f64) -> Result<f64, FlipError> {
    if y < 0.0 {
        return Err(FlipError::Domain(format!("cosh value below 1 (ln = {y})")));
    }
    if y > 30.0 {
        // arcosh(X) = ln X + ln(1 + sqrt(1 - X^{-2})) -> ln X + ln 2
        let corr = (1.0 + (1.0 - (-2.0 * y).exp()).sqrt()).ln();
        return Ok(y + corr);
    }
    let x = y.exp();
    Ok(x.acosh())
}

/// `C_{i,j}(l) = ch^2(l/2) + ch^2(Li/2) + ch^2(Lj/2)
///  + 2 ch(Li/2) ch(Lj/2) ch(l/2) - 1` as an exponential polynomial; the
/// exponent of `l` rides on the `x` component when `l` is the flipped length.
fn c_pair(li: &Rat, lj: &Rat, ell_a: &Rat, ell_b: &Rat) -> ExpPoly {
    let chl = ExpPoly::cosh_half(ell_a.clone(), ell_b.clone());
    let chi = ExpPoly::cosh_half(li.clone(), Rat::zero());
    let chj = ExpPoly::cosh_half(lj.clone(), Rat::zero());
    let mut out = chl.mul(&chl);
    out.add_inplace(&chi.mul(&chi));
    out.add_inplace(&chj.mul(&chj));
    out.add_inplace(&chi.mul(&chj).mul(&chl).scale(&Rat::from_integer(2.into())));
    out.sub_inplace(&ExpPoly::constant(Rat::one()));
    out
}

use num_traits::One;

/// Hyperbolic flip on the four-holed sphere at inputs scaled by `beta`.
/// Returns `(l'_hyp, tau'_hyp)` (unscaled; divide by `beta` to compare with
/// the combinatorial flip).
pub fn hyp_flip_04(p: &FnPoint04, beta: u32) -> Result<(f64, f64), FlipError> {
    if !p.ell.is_positive() || p.boundary.iter().any(|l| !l.is_positive()) {
        return Err(FlipError::BadLengths);
    }
    let beta_rat = Rat::from_integer(beta.into());
    let l: Vec<Rat> = p.boundary.iter().map(|v| v * &beta_rat).collect();
    let ell = &p.ell * &beta_rat;
    let tau = &p.tau * &beta_rat;

    // l': ch(l'/2) sh^2(l/2) = ch12 + ch34 + ch(l/2)(ch13 + ch24)
    //     + ch(tau) sqrt(C14(l) C23(l));  all terms positive.
    let ch = |i: usize| ExpPoly::cosh_half(l[i].clone(), Rat::zero());
    let chl = ExpPoly::cosh_half(ell.clone(), Rat::zero());
    let mut sum = ch(0).mul(&ch(1));
    sum.add_inplace(&ch(2).mul(&ch(3)));
    sum.add_inplace(&chl.mul(&{
        let mut s = ch(0).mul(&ch(2));
        s.add_inplace(&ch(1).mul(&ch(3)));
        s
    }));
    let ln_main = sum.ln_eval(0.0)?;
    let c14 = c_pair(&l[0], &l[3], &ell, &Rat::zero());
    let c23 = c_pair(&l[1], &l[2], &ell, &Rat::zero());
    let ln_cross = cosh_ln(&tau) + 0.5 * (c14.ln_eval(0.0)? + c23.ln_eval(0.0)?);
    let ln_rhs = log_add(ln_main, ln_cross);
    let ln_sh2 = 2.0 * sinh_ln_half(&ell)?;
    let ln_ch_lp_half = ln_rhs - ln_sh2;
    let ellp = 2.0 * arcosh_from_ln(ln_ch_lp_half)?;

    // tau': ch(tau') sqrt(C12(l') C34(l')) =
    //   sh^2(l'/2) ch(l/2) - ch14 - ch23 - ch(l'/2)(ch13 + ch24),
    // with every exponent on the lattice Q + Q l'.
    let shp = ExpPoly::sinh_half(Rat::zero(), Rat::one());
    let chp = ExpPoly::cosh_half(Rat::zero(), Rat::one());
    let mut bracket = shp
        .mul(&shp)
        .mul(&ExpPoly::cosh_half(ell.clone(), Rat::zero()));
    bracket.sub_inplace(&ch(0).mul(&ch(3)));
    bracket.sub_inplace(&ch(1).mul(&ch(2)));
    bracket.sub_inplace(&chp.mul(&{
        let mut s = ch(0).mul(&ch(2));
        s.add_inplace(&ch(1).mul(&ch(3)));
        s
    }));
    let ln_bracket = bracket.ln_eval(ellp)?;
    let c12 = c_pair(&l[0], &l[1], &Rat::zero(), &Rat::one());
    let c34 = c_pair(&l[2], &l[3], &Rat::zero(), &Rat::one());
    let ln_ch_taup = ln_bracket - 0.5 * (c12.ln_eval(ellp)? + c34.ln_eval(ellp)?);
    let taup_mag = arcosh_from_ln(ln_ch_taup)?;
    let taup = apply_opposite_sign(&p.tau, taup_mag);
    Ok((ellp, taup))
}

/// Hyperbolic flip on the one-holed torus at inputs scaled by `beta`.
pub fn hyp_flip_11(p: &FnPoint11, beta: u32) -> Result<(f64, f64), FlipError> {
    if !p.ell.is_positive() || !p.boundary.is_positive() {
        return Err(FlipError::BadLengths);
    }
    let beta_rat = Rat::from_integer(beta.into());
    let lb = &p.boundary * &beta_rat;
    let ell = &p.ell * &beta_rat;
    let tau = &p.tau * &beta_rat;

    // ch(l'/2) = ch(tau/2)/sh(l/2) * sqrt((ch(L/2) + ch(l)) / 2)
    let mut inner = ExpPoly::cosh_half(lb.clone(), Rat::zero());
    inner.add_inplace(&ExpPoly::cosh_half(
        &ell * Rat::from_integer(2.into()),
        Rat::zero(),
    ));
    inner = inner.scale(&Rat::new(1.into(), 2.into()));
    let ln_ch_lp = cosh_ln_half(&tau) - sinh_ln_half(&ell)? + 0.5 * inner.ln_eval(0.0)?;
    let ellp = 2.0 * arcosh_from_ln(ln_ch_lp)?;

    // ch(tau'/2) = ch(l/2) sqrt((N)/(D)),
    // N = ch^2(tau/2)(ch(L/2) + ch(l)) - 2 sh^2(l/2),
    // D = ch^2(tau/2)(ch(L/2) + ch(l)) + sh^2(l/2)(ch(L/2) - 1).
    let cht = ExpPoly::cosh_half(tau.clone(), Rat::zero());
    let mut base = ExpPoly::cosh_half(lb.clone(), Rat::zero());
    base.add_inplace(&ExpPoly::cosh_half(
        &ell * Rat::from_integer(2.into()),
        Rat::zero(),
    ));
    let common = cht.mul(&cht).mul(&base);
    let shl = ExpPoly::sinh_half(ell.clone(), Rat::zero());
    let sh2 = shl.mul(&shl);
    let mut num = common.clone();
    num.sub_inplace(&sh2.scale(&Rat::from_integer(2.into())));
    let mut den = common;
    let mut chm1 = ExpPoly::cosh_half(lb.clone(), Rat::zero());
    chm1.sub_inplace(&ExpPoly::constant(Rat::one()));
    den.add_inplace(&sh2.mul(&chm1));
    let ln_ch_taup_half = cosh_ln_half(&ell) + 0.5 * (num.ln_eval(0.0)? - den.ln_eval(0.0)?);
    let taup_mag = 2.0 * arcosh_from_ln(ln_ch_taup_half)?;
    let taup = apply_opposite_sign(&p.tau, taup_mag);
    Ok((ellp, taup))
}

fn apply_opposite_sign(tau: &Rat, mag: f64) -> f64 {
    if tau.is_zero() {
        0.0
    } else if tau.is_positive() {
        -mag
    } else {
        mag
    }
}

/// `ln cosh(q/2)` for rational `q`, stable for any magnitude.
fn cosh_ln_half(q: &Rat) -> f64 {
    let x = rat_to_f64(q).abs() / 2.0;
    x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln cosh(q)`.
fn cosh_ln(q: &Rat) -> f64 {
    let x = rat_to_f64(q).abs();
    x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln sinh(q/2)` for positive rational `q`.
fn sinh_ln_half(q: &Rat) -> Result<f64, FlipError> {
    if !q.is_positive() {
        return Err(FlipError::BadLengths);
    }
    let x = rat_to_f64(q) / 2.0;
    Ok(x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2)
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Double-precision noise floor of the flip evaluation; errors below it
/// measure rounding, not distance to the flow limit.
pub const FLOW_NOISE_FLOOR: f64 = 1e-13;

/// Least-squares slope of `ln err` against `ln beta` over doubling scales;
/// the flow limit predicts a slope of about -1.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|p| p.1.max(FLOW_NOISE_FLOOR).ln())
        .collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of the flow-limit error over the scales still above the noise
/// floor. `None` means the sequence converged to rounding level on fewer
/// than three scales, so there is nothing left to fit.
pub fn flow_slope(points: &[(f64, f64)]) -> Option<f64> {
    let visible: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|p| p.1 > FLOW_NOISE_FLOOR)
        .collect();
    if visible.len() < 3 {
        return None;
    }
    Some(loglog_slope(&visible))
}
