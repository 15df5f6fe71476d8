//! The test-function classes driving every experiment: a member of
//! Lip_{k-1}(ℝ) is described by its derivative chain up to order k, the kink
//! locations of h^{(k)}, and its Lipschitz norm ‖h^{(k)}‖.
//!
//! Four built-in families: the ramp (extremal for the middle Stein factor),
//! the |x|-based family (jump of 2 in h^{(k)} at 0), monomials (degenerate
//! ‖h^{(k)}‖ = 0 witnesses), and a sine probe with closed-form derivatives of
//! every order.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Result, SteinError};
use crate::normal_kernel::{normal_cdf, phi};
use crate::poly::{horner, RationalPolynomial};

/// Which one-sided limit to take where h^{(k)} jumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    TwoSided,
}

/// Exact piecewise polynomial: `pieces[i]` applies on
/// (breakpoints[i-1], breakpoints[i]), with the outer pieces extending to
/// ±∞. Carries cached f64 coefficients for evaluation.
#[derive(Debug, Clone)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<BigRational>,
    pieces: Vec<RationalPolynomial>,
    bp_f64: Vec<f64>,
    coeffs_f64: Vec<Vec<f64>>,
}

impl PiecewisePolynomial {
    pub fn new(breakpoints: Vec<BigRational>, pieces: Vec<RationalPolynomial>) -> Self {
        assert_eq!(pieces.len(), breakpoints.len() + 1);
        let bp_f64 = breakpoints
            .iter()
            .map(|b| rational_to_f64(b))
            .collect::<Vec<_>>();
        debug_assert!(bp_f64.windows(2).all(|w| w[0] < w[1]));
        let coeffs_f64 = pieces.iter().map(|p| p.coeffs_f64()).collect();
        Self {
            breakpoints,
            pieces,
            bp_f64,
            coeffs_f64,
        }
    }

    pub fn breakpoints(&self) -> &[BigRational] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[RationalPolynomial] {
        &self.pieces
    }

    /// Evaluates at x; at an exact breakpoint `side` picks the piece.
    pub fn eval(&self, x: f64, side: Side) -> f64 {
        let mut i = self.bp_f64.partition_point(|&b| b < x);
        if side != Side::Left && i < self.bp_f64.len() && self.bp_f64[i] == x {
            i += 1;
        }
        horner(&self.coeffs_f64[i], x)
    }

    /// Antiderivative normalized to vanish at x = 0, with constants stitched
    /// exactly so the result is continuous across every breakpoint.
    pub fn antiderivative_through_zero(&self) -> Self {
        let raw: Vec<RationalPolynomial> = self
            .pieces
            .iter()
            .map(|p| p.antiderivative(BigRational::zero()))
            .collect();
        let zero = BigRational::zero();
        let i0 = self.breakpoints.partition_point(|b| *b < zero);
        let mut constants = vec![BigRational::zero(); raw.len()];
        constants[i0] = -raw[i0].eval_rational(&zero);
        for i in i0 + 1..raw.len() {
            let bp = &self.breakpoints[i - 1];
            constants[i] =
                raw[i - 1].eval_rational(bp) + &constants[i - 1] - raw[i].eval_rational(bp);
        }
        for i in (0..i0).rev() {
            let bp = &self.breakpoints[i];
            constants[i] =
                raw[i + 1].eval_rational(bp) + &constants[i + 1] - raw[i].eval_rational(bp);
        }
        let pieces = raw
            .iter()
            .zip(&constants)
            .map(|(p, c)| {
                let mut coeffs = p.coeffs().to_vec();
                if coeffs.is_empty() {
                    coeffs.push(c.clone());
                } else {
                    coeffs[0] = &coeffs[0] + c;
                }
                RationalPolynomial::new(coeffs)
            })
            .collect();
        Self::new(self.breakpoints.clone(), pieces)
    }

    /// Exact continuity check at every breakpoint (rational equality).
    pub fn is_continuous(&self) -> bool {
        self.breakpoints.iter().enumerate().all(|(i, bp)| {
            self.pieces[i].eval_rational(bp) == self.pieces[i + 1].eval_rational(bp)
        })
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("breakpoint within f64 range")
}

fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

#[derive(Debug, Clone)]
enum Family {
    /// h^{(k)} is the ±1 ramp with linear transition on (-a, a).
    Ramp { a: f64, derivs: Vec<PiecewisePolynomial> },
    /// h(x) = sign(x)x^k/k!, so h^{(k-1)} = |x| and h^{(k)} = sign(x).
    Abs { derivs: Vec<PiecewisePolynomial> },
    /// h(x) = x^{p+1} with exact derivative chain.
    Monomial { p: u32, derivs: Vec<Vec<f64>> },
    /// h(x) = A ω^{-k} sin(ωx).
    SmoothProbe { omega: f64, amplitude: f64 },
}

/// A member of Lip_{k-1}(ℝ), evaluable at derivative orders 0..=k.
#[derive(Debug, Clone)]
pub struct TestFunction {
    k: usize,
    kinks: Vec<f64>,
    lip_norm: f64,
    family: Family,
}

const K_MAX: usize = 16;

/// Ramp family: h_a^{(k)}(x) = 1 for x ≥ a, -1 for x ≤ -a, x/a between;
/// lower orders are iterated antiderivatives vanishing at 0. ‖h^{(k)}‖ = 1.
pub fn ramp_family(k: usize, a: f64) -> Result<TestFunction> {
    check_k(k)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(SteinError::InvalidParameter(format!(
            "ramp half-width must be positive, got {a}"
        )));
    }
    let a_rat = rational_from_f64(a);
    let top = PiecewisePolynomial::new(
        vec![-a_rat.clone(), a_rat.clone()],
        vec![
            RationalPolynomial::from_i64(&[-1]),
            RationalPolynomial::new(vec![BigRational::zero(), a_rat.recip()]),
            RationalPolynomial::from_i64(&[1]),
        ],
    );
    Ok(TestFunction {
        k,
        kinks: vec![-a, a],
        lip_norm: 1.0,
        family: Family::Ramp {
            a,
            derivs: antiderivative_chain(top, k),
        },
    })
}

/// |x|-based family: h(x) = sign(x)x^k/k!, h^{(k-1)}(x) = |x|,
/// h^{(k)} = sign(x) with a jump of 2 at the origin. ‖h^{(k)}‖ = 1.
pub fn abs_family(k: usize) -> Result<TestFunction> {
    check_k(k)?;
    let top = PiecewisePolynomial::new(
        vec![BigRational::zero()],
        vec![
            RationalPolynomial::from_i64(&[-1]),
            RationalPolynomial::from_i64(&[1]),
        ],
    );
    Ok(TestFunction {
        k,
        kinks: vec![0.0],
        lip_norm: 1.0,
        family: Family::Abs {
            derivs: antiderivative_chain(top, k),
        },
    })
}

/// Monomial test function h(x) = x^{p+1}.
///
/// Requires p < k so that h stays in Lip_{k-1}(ℝ): for p ≤ k-2 the norm
/// ‖h^{(k)}‖ is exactly 0 (the degenerate witness of the impossibility
/// argument), for p = k-1 it is k!.
pub fn monomial(p: u32, k: usize) -> Result<TestFunction> {
    check_k(k)?;
    if p > 20 {
        return Err(SteinError::InvalidParameter(format!(
            "monomial exponent p = {p} exceeds 20"
        )));
    }
    if p as usize >= k {
        return Err(SteinError::InvalidParameter(format!(
            "x^{} is not in Lip_{}(R): need p + 1 <= k",
            p + 1,
            k - 1
        )));
    }
    let mut coeffs = vec![BigRational::zero(); p as usize + 2];
    coeffs[p as usize + 1] = BigRational::from_integer(1.into());
    let mut poly = RationalPolynomial::new(coeffs);
    let mut derivs = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        derivs.push(poly.coeffs_f64());
        poly = poly.derivative();
    }
    let lip_norm = if (p as usize) < k - 1 {
        0.0
    } else {
        (1..=k).map(|j| j as f64).product()
    };
    Ok(TestFunction {
        k,
        kinks: Vec::new(),
        lip_norm,
        family: Family::Monomial { p, derivs },
    })
}

/// Sine probe h(x) = A ω^{-k} sin(ωx): entire, every derivative closed-form,
/// ‖h^{(k)}‖ = A. A generic member for bound-verification sweeps.
pub fn smooth_probe(k: usize, omega: f64, amplitude: f64) -> Result<TestFunction> {
    check_k(k)?;
    if !(omega > 0.0 && omega.is_finite()) || !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(SteinError::InvalidParameter(format!(
            "smooth_probe requires positive omega and amplitude, got ({omega}, {amplitude})"
        )));
    }
    Ok(TestFunction {
        k,
        kinks: Vec::new(),
        lip_norm: amplitude,
        family: Family::SmoothProbe { omega, amplitude },
    })
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 || k > K_MAX {
        return Err(SteinError::InvalidParameter(format!(
            "class index k = {k} outside 1..={K_MAX}"
        )));
    }
    Ok(())
}

/// derivs[j] = h^{(j)}: integrate the top derivative down k times, fixing
/// each integration constant by the value 0 at x = 0.
fn antiderivative_chain(top: PiecewisePolynomial, k: usize) -> Vec<PiecewisePolynomial> {
    let mut derivs = vec![top];
    for _ in 0..k {
        let next = derivs[0].antiderivative_through_zero();
        derivs.insert(0, next);
    }
    derivs
}

impl TestFunction {
    /// Class index: h ∈ Lip_{k-1}(ℝ).
    pub fn k(&self) -> usize {
        self.k
    }

    /// Kink locations of h^{(k)} (mandatory metadata for quadrature panels).
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    /// ‖h^{(k)}‖: the minimum Lipschitz constant of h^{(k-1)}.
    pub fn lip_norm(&self) -> f64 {
        self.lip_norm
    }

    /// Evaluates h^{(j)}(x), 0 ≤ j ≤ k. Order k may jump at a kink; there a
    /// one-sided `side` must be given, and `TwoSided` is an error when the
    /// one-sided limits actually differ.
    pub fn deriv(&self, j: usize, x: f64, side: Side) -> Result<f64> {
        if j > self.k {
            return Err(SteinError::InvalidParameter(format!(
                "derivative order {j} exceeds class index k = {}",
                self.k
            )));
        }
        if side == Side::TwoSided && j == self.k && self.jumps_at(x) {
            return Err(SteinError::InvalidParameter(format!(
                "h^({j}) jumps at x = {x}; request a one-sided value"
            )));
        }
        Ok(self.deriv_unchecked(j, x, side))
    }

    /// True when h^{(k)} has unequal one-sided limits at x.
    fn jumps_at(&self, x: f64) -> bool {
        matches!(self.family, Family::Abs { .. }) && x == 0.0
    }

    /// Evaluation for quadrature nodes: two-sided where defined, midpoint of
    /// the one-sided limits at an exact jump (a measure-zero sample).
    pub(crate) fn deriv_quad(&self, j: usize, x: f64) -> f64 {
        if j == self.k && self.jumps_at(x) {
            let l = self.deriv_unchecked(j, x, Side::Left);
            let r = self.deriv_unchecked(j, x, Side::Right);
            return 0.5 * (l + r);
        }
        self.deriv_unchecked(j, x, Side::TwoSided)
    }

    fn deriv_unchecked(&self, j: usize, x: f64, side: Side) -> f64 {
        match &self.family {
            Family::Ramp { derivs, .. } | Family::Abs { derivs } => derivs[j].eval(x, side),
            Family::Monomial { derivs, .. } => {
                derivs.get(j).map_or(0.0, |c| horner(c, x))
            }
            Family::SmoothProbe { omega, amplitude } => {
                let scale = amplitude * omega.powi(j as i32 - self.k as i32);
                let arg = omega * x;
                scale
                    * match j % 4 {
                        0 => arg.sin(),
                        1 => arg.cos(),
                        2 => -arg.sin(),
                        _ => -arg.cos(),
                    }
            }
        }
    }

    /// Closed form for the inner expectation E[Z h^{(j)}(c + uZ)], u > 0,
    /// where the family admits one. The quadrature path is used otherwise.
    pub fn inner_oracle(&self, j: usize, c: f64, u: f64) -> Option<f64> {
        if !(u > 0.0) || j == 0 || j > self.k {
            return None;
        }
        match &self.family {
            Family::Ramp { a, .. } if j == self.k => {
                Some(u / a * (normal_cdf((a - c) / u) - normal_cdf((-a - c) / u)))
            }
            Family::Abs { .. } if j == self.k => Some(2.0 * phi(c / u)),
            Family::SmoothProbe { omega, amplitude } => {
                // E[Z sin(β Z + θ)] = β e^{-β²/2} cos θ with β = ωu
                let beta = omega * u;
                let scale = amplitude * omega.powi(j as i32 - self.k as i32);
                let arg = omega * c;
                let cos_phase = match j % 4 {
                    0 => arg.cos(),
                    1 => -arg.sin(),
                    2 => -arg.cos(),
                    _ => arg.sin(),
                };
                Some(scale * cos_phase * beta * (-0.5 * beta * beta).exp())
            }
            Family::Monomial { p, .. } if j > *p as usize => Some(0.0),
            _ => None,
        }
    }
}
