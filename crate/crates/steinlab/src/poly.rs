//! Exact rational polynomials: the carrier for the polynomial Stein-equation
//! oracle and for the piecewise families' lower-order derivatives.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense polynomial with exact rational coefficients, ascending powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPolynomial {
    coeffs: Vec<BigRational>,
}

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of x^m (zero beyond the stored degree).
    pub fn coeff(&self, m: usize) -> BigRational {
        self.coeffs.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, c)| c * BigRational::from_integer(BigInt::from(m)))
            .collect();
        Self::new(coeffs)
    }

    /// Antiderivative with the given constant term.
    pub fn antiderivative(&self, constant: BigRational) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(constant);
        for (m, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / BigRational::from_integer(BigInt::from(m + 1)));
        }
        Self::new(coeffs)
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Coefficients rounded to f64, for cheap Horner evaluation.
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().expect("rational coefficient within f64 range"))
            .collect()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|m| self.coeff(m) - other.coeff(m)).collect();
        Self::new(coeffs)
    }

    /// Product with x (shift coefficients up one power).
    pub fn times_x(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(BigRational::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(coeffs)
    }

    pub fn max_abs_coeff(&self) -> BigRational {
        self.coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }
}

/// Horner evaluation of f64 coefficients (ascending powers).
#[inline]
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Exact double factorial (m-1)!! for even m, used for E[Z^m].
pub fn gaussian_moment_exact(m: usize) -> BigRational {
    if m % 2 == 1 {
        return BigRational::zero();
    }
    let mut v = BigInt::one();
    let mut j = 1usize;
    while j + 1 < m {
        j += 2;
        v *= BigInt::from(j);
    }
    BigRational::from_integer(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn derivative_and_antiderivative_roundtrip() {
        let p = RationalPolynomial::from_i64(&[2, -3, 0, 5]);
        let back = p.derivative().antiderivative(rat(2, 1));
        assert_eq!(p, back);
    }

    #[test]
    fn eval_matches_horner() {
        let p = RationalPolynomial::from_i64(&[1, 0, -4, 2]);
        let x = rat(3, 2);
        let exact = p.eval_rational(&x).to_f64().unwrap();
        let approx = horner(&p.coeffs_f64(), 1.5);
        assert!((exact - approx).abs() < 1e-14);
    }

    #[test]
    fn exact_gaussian_moments() {
        assert_eq!(gaussian_moment_exact(0), rat(1, 1));
        assert_eq!(gaussian_moment_exact(3), rat(0, 1));
        assert_eq!(gaussian_moment_exact(4), rat(3, 1));
        assert_eq!(gaussian_moment_exact(8), rat(105, 1));
        // 29!! fits f64 exactly
        assert_eq!(
            gaussian_moment_exact(30).to_f64().unwrap(),
            6190283353629375.0
        );
    }
}
