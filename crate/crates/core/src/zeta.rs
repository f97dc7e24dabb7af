//! Even zeta values as exact rational multiples of powers of pi^2.
//!
//! zeta(2k) = (-1)^{k+1} B_{2k} (2 pi)^{2k} / (2 (2k)!), with the Bernoulli
//! numbers computed from the defining recurrence. These feed the edge-weight
//! moments int_0^inf l^{2k+1} / (e^{s l} - 1) dl = (2k+1)! zeta(2k+2) s^{-2k-2}.

use crate::poly::Poly;
use crate::rational::{binomial, factorial, Rat};
use num_traits::{One, Zero};

/// Bernoulli numbers B_0..B_m (B_1 = -1/2 convention).
pub fn bernoulli(m: usize) -> Vec<Rat> {
    let mut b: Vec<Rat> = Vec::with_capacity(m + 1);
    for n in 0..=m {
        if n == 0 {
            b.push(Rat::one());
            continue;
        }
        // sum_{j=0}^{n} C(n+1, j) B_j = 0  =>  solve for B_n.
        let mut acc = Rat::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += binomial(n as u64 + 1, j as u64) * bj;
        }
        b.push(-acc / binomial(n as u64 + 1, n as u64));
    }
    b
}

/// The rational `q` with zeta(2k) = q * pi^{2k}.
pub fn zeta_even_coeff(k: u32) -> Rat {
    assert!(k >= 1, "zeta_even requires k >= 1");
    let b = bernoulli(2 * k as usize);
    let b2k = &b[2 * k as usize];
    let sign = if k % 2 == 1 { Rat::one() } else { -Rat::one() };
    let two_pow = Rat::from_integer(num_bigint::BigInt::from(2u32).pow(2 * k));
    sign * b2k * two_pow / (factorial(2 * k as u64) * Rat::from_integer(2.into()))
}

/// zeta(2k) as a polynomial `q * PiSq^k` in a context with `n` boundary vars.
pub fn zeta_even(n: usize, k: u32) -> Poly {
    let q = zeta_even_coeff(k);
    Poly::pisq(n).pow(k).scale(&q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use num_traits::Signed;

    #[test]
    fn low_bernoulli() {
        let b = bernoulli(8);
        assert_eq!(b[0], rat(1, 1));
        assert_eq!(b[1], rat(-1, 2));
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[3], rat(0, 1));
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[6], rat(1, 42));
        assert_eq!(b[8], rat(-1, 30));
    }

    #[test]
    fn zeta_values() {
        assert_eq!(zeta_even_coeff(1), rat(1, 6));
        assert_eq!(zeta_even_coeff(2), rat(1, 90));
        assert_eq!(zeta_even_coeff(3), rat(1, 945));
        assert_eq!(zeta_even_coeff(7), rat(2, 18243225));
    }

    #[test]
    fn degree_and_positivity() {
        for k in 1..=10u32 {
            let p = zeta_even(0, k);
            assert_eq!(p.num_terms(), 1);
            let (exp, coeff) = p
                .terms()
                .next()
                .map(|(e, c)| (e.clone(), c.clone()))
                .unwrap();
            assert_eq!(exp[0], k, "PiSq degree");
            assert!(coeff.is_positive());
        }
    }

    #[test]
    #[should_panic]
    fn k_zero_rejected() {
        zeta_even_coeff(0);
    }
}
