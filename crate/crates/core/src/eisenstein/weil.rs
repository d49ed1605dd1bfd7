//! Exact rational combinations of the Gaussian series `f_{m,n}` and the Weil operator on them.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A finite formal sum `sum c_{m,n} f_{m,n}` with exact rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is coefficient equality.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeilCombination {
    terms: BTreeMap<(i32, i32), BigRational>,
}

pub(crate) fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub(crate) fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

impl WeilCombination {
    pub fn new() -> Self {
        Self::default()
    }

    /// The single generator `f_{m,n}`.
    pub fn generator(m: i32, n: i32) -> Self {
        let mut c = Self::new();
        c.add_term(m, n, BigRational::one());
        c
    }

    pub fn add_term(&mut self, m: i32, n: i32, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry((m, n)).or_insert_with(BigRational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&(m, n));
        }
    }

    pub fn add(&mut self, other: &WeilCombination) {
        for (&(m, n), c) in &other.terms {
            self.add_term(m, n, c.clone());
        }
    }

    pub fn scaled(&self, factor: &BigRational) -> WeilCombination {
        let mut out = WeilCombination::new();
        if factor.is_zero() {
            return out;
        }
        for (&(m, n), c) in &self.terms {
            out.terms.insert((m, n), c * factor);
        }
        out
    }

    pub fn coefficient(&self, m: i32, n: i32) -> BigRational {
        self.terms
            .get(&(m, n))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((i32, i32), &BigRational)> {
        self.terms.iter().map(|(&k, v)| (k, v))
    }

    /// Coefficients as floats, in index order.
    pub fn float_terms(&self) -> Vec<((i32, i32), f64)> {
        self.terms
            .iter()
            .map(|(&k, v)| (k, v.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// Sum of the absolute values of the coefficients.
    pub fn weight(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .sum()
    }

    /// One application of `W(f_{m,n}) = f_{m+2,n} + n f_{m+1,n+1}`.
    fn weil_once(&self) -> WeilCombination {
        let mut out = WeilCombination::new();
        for (&(m, n), c) in &self.terms {
            out.add_term(m + 2, n, c.clone());
            out.add_term(m + 1, n + 1, c * BigRational::from_integer(BigInt::from(n)));
        }
        out
    }

    /// `W^power` applied linearly.
    pub fn weil_apply(&self, power: u32) -> WeilCombination {
        (0..power).fold(self.clone(), |acc, _| acc.weil_once())
    }
}

impl fmt::Display for WeilCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&(m, n), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*f[{m},{n}]")?;
        }
        Ok(())
    }
}

/// Free-function form of [`WeilCombination::weil_apply`].
pub fn weil_apply(c: &WeilCombination, power: u32) -> WeilCombination {
    c.weil_apply(power)
}

/// `e*_n = 2/(n-1)! f_{n-1,1} + sum_{m=2}^{n} 1/(n-m)! f_{n-m,m}` for even `n >= 2`.
pub fn estar_combination(n: u32) -> Result<WeilCombination> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidIndex("n must be even ≥ 2".into()));
    }
    let mut c = WeilCombination::new();
    c.add_term((n - 1) as i32, 1, ratio(2, factorial(n - 1)));
    for m in 2..=n {
        c.add_term((n - m) as i32, m as i32, ratio(1, factorial(n - m)));
    }
    Ok(c)
}

/// `g_{a,b} = sum_k k! (C(a,k) + C(b,k)) f_{a+b-k,k+1}` for `a + b` odd, the empty combination
/// when `a + b` is even.
pub fn g_ab_symbolic(a: u32, b: u32) -> WeilCombination {
    let mut c = WeilCombination::new();
    if (a + b).is_multiple_of(2) {
        return c;
    }
    for k in 0..=a.max(b) {
        let coeff = factorial(k) * (binomial(a, k) + binomial(b, k));
        c.add_term(
            (a + b - k) as i32,
            (k + 1) as i32,
            BigRational::from_integer(coeff),
        );
    }
    c
}

/// `g_{a,b}` through the Weil operator: `(hi - lo)! W^lo(e*_{hi-lo+1})` with `lo = min(a, b)`.
pub fn g_ab_via_weil(a: u32, b: u32) -> WeilCombination {
    if (a + b).is_multiple_of(2) {
        return WeilCombination::new();
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let base = estar_combination(hi - lo + 1).expect("hi - lo + 1 is even and >= 2");
    base.weil_apply(lo)
        .scaled(&BigRational::from_integer(factorial(hi - lo)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        ratio(n, d)
    }

    #[test]
    fn estar_two_and_four() {
        let two = estar_combination(2).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two.coefficient(1, 1), r(2, 1));
        assert_eq!(two.coefficient(0, 2), r(1, 1));

        let four = estar_combination(4).unwrap();
        assert_eq!(four.len(), 4);
        assert_eq!(four.coefficient(3, 1), r(1, 3));
        assert_eq!(four.coefficient(2, 2), r(1, 2));
        assert_eq!(four.coefficient(1, 3), r(1, 1));
        assert_eq!(four.coefficient(0, 4), r(1, 1));
    }

    #[test]
    fn estar_rejects_bad_n() {
        for n in [0, 1, 3, 7] {
            let err = estar_combination(n).unwrap_err();
            assert_eq!(err.to_string(), "n must be even ≥ 2");
        }
    }

    #[test]
    fn weil_rule() {
        assert_eq!(
            WeilCombination::generator(0, 0).weil_apply(1),
            WeilCombination::generator(2, 0)
        );
        let mut expected = WeilCombination::generator(3, 1);
        expected.add(&WeilCombination::generator(2, 2));
        assert_eq!(WeilCombination::generator(1, 1).weil_apply(1), expected);
        let e6 = estar_combination(6).unwrap();
        assert_eq!(e6.weil_apply(0), e6);
    }

    #[test]
    fn no_zero_coefficients_stored() {
        let mut c = WeilCombination::generator(1, 1);
        c.add_term(1, 1, r(-1, 1));
        assert!(c.is_empty());
        c.add_term(2, 2, BigRational::zero());
        assert!(c.is_empty());
    }

    #[test]
    fn g_leading_coefficient_and_symmetry() {
        for (a, b) in [(0, 1), (1, 2), (2, 5), (4, 3)] {
            let g = g_ab_symbolic(a, b);
            assert_eq!(g.coefficient((a + b) as i32, 1), r(2, 1));
            assert_eq!(g, g_ab_symbolic(b, a));
        }
        assert!(g_ab_symbolic(0, 0).is_empty());
        assert!(g_ab_symbolic(2, 4).is_empty());
    }

    #[test]
    fn g_zero_n_is_n_factorial_estar() {
        for n in [1u32, 3, 5, 7] {
            let expected = estar_combination(n + 1)
                .unwrap()
                .scaled(&BigRational::from_integer(factorial(n)));
            assert_eq!(g_ab_symbolic(0, n), expected);
        }
    }

    #[test]
    fn g_one_two_both_routes() {
        // 1! W(2 f_{1,1} + f_{0,2}) = 2 f_{3,1} + 2 f_{2,2} + f_{2,2} + 2 f_{1,3}
        let mut expected = WeilCombination::new();
        expected.add_term(3, 1, r(2, 1));
        expected.add_term(2, 2, r(3, 1));
        expected.add_term(1, 3, r(2, 1));
        assert_eq!(g_ab_via_weil(1, 2), expected);
        assert_eq!(g_ab_symbolic(1, 2), expected);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(
            estar_combination(2).unwrap().to_string(),
            "(1)*f[0,2] + (2)*f[1,1]"
        );
        assert_eq!(WeilCombination::new().to_string(), "0");
    }
}
