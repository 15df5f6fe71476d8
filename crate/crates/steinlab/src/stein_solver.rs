//! The Stein-equation solution f_h and its derivatives, through three
//! independent representations:
//!
//! * direct evaluation of the solution integral (with a complementary
//!   right-tail form for x > 0 that avoids catastrophic cancellation),
//! * the smoothing-semigroup integral for f_h^{(j)}, 1 ≤ j ≤ k, after the
//!   substitution u = √(1-e^{-2s}) that removes the endpoint singularity,
//! * the Mills-ratio form for f_h^{(k+1)}, which exposes the one-sided
//!   limits at kinks of h^{(k)},
//!
//! plus an exact rational-polynomial solver used as an oracle, Richardson
//! finite differences for cross-validation, and grid sup-norm estimation.

use std::cell::Cell;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Result, SteinError};
use crate::normal_kernel::{half_integer_gamma, phi, z_deriv};
use crate::poly::{gaussian_moment_exact, RationalPolynomial};
use crate::quadrature::{gaussian_expectation, integrate, IntegrationResult, QuadratureSpec};
use crate::test_functions::{Side, TestFunction};

/// Largest |x| at which the solution representations are evaluated; keeps
/// every e^{x²/2}-scale product inside double range for the truncated
/// integrals (the Mills-ratio form needs Z-derivative tables out to 2·13).
pub const SOLVER_X_MAX: f64 = 13.0;

fn check_x(x: f64) -> Result<()> {
    if !(x.abs() <= SOLVER_X_MAX) {
        return Err(SteinError::DomainOverflow {
            value: x,
            max: SOLVER_X_MAX,
        });
    }
    Ok(())
}

/// Nh = E[h(Z)].
pub fn expectation_nh(h: &TestFunction, spec: &QuadratureSpec) -> Result<f64> {
    gaussian_expectation(|z| h.deriv_quad(0, z), h.kinks(), spec).into_converged()
}

/// f_h(x) = e^{x²/2} ∫_{-∞}^x (h(t) - Nh) e^{-t²/2} dt.
///
/// For x > 0 the algebraically identical right-tail form
/// -e^{x²/2} ∫_x^∞ (h(t) - Nh) e^{-t²/2} dt is used instead (the full-line
/// integral vanishes by the definition of Nh), which keeps the quotient by
/// φ(x) from amplifying a cancelling difference.
pub fn solve_f(h: &TestFunction, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let nh = expectation_nh(h, spec)?;
    solve_f_with_nh(h, x, nh, spec)
}

/// As [`solve_f`] with a precomputed Nh (grid evaluations share it).
pub fn solve_f_with_nh(h: &TestFunction, x: f64, nh: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_x(x)?;
    let t_max = spec.gauss_truncation_radius + x.abs();
    let integrand = |t: f64| (h.deriv_quad(0, t) - nh) * phi(t);
    // the quotient by φ(x) amplifies absolute error by e^{x²/2}; demand the
    // integral at a tolerance that survives the division
    let scaled = QuadratureSpec {
        abs_tol: spec.abs_tol * phi(x),
        ..*spec
    };
    let tail = if x <= 0.0 {
        integrate(&integrand, -t_max, x, h.kinks(), &scaled).into_converged()?
    } else {
        -integrate(&integrand, x, t_max, h.kinks(), &scaled).into_converged()?
    };
    Ok(tail / phi(x))
}

/// Exact solution of f'(x) - xf(x) = h(x) - Nh for polynomial h.
#[derive(Debug, Clone)]
pub struct PolynomialSolution {
    /// The unique polynomial solution (degree deg(h) - 1); it is the bounded
    /// solution of the Stein equation since every other solution differs by
    /// a multiple of e^{x²/2}.
    pub f: RationalPolynomial,
    /// Nh = Σ coeffs[m]·E[Z^m], exact.
    pub nh: BigRational,
}

impl PolynomialSolution {
    /// Residual f' - xf - (h - Nh); identically zero by construction.
    pub fn residual(&self, h: &RationalPolynomial) -> RationalPolynomial {
        let mut rhs_coeffs = h.coeffs().to_vec();
        if rhs_coeffs.is_empty() {
            rhs_coeffs.push(-self.nh.clone());
        } else {
            rhs_coeffs[0] = &rhs_coeffs[0] - &self.nh;
        }
        let rhs = RationalPolynomial::new(rhs_coeffs);
        self.f.derivative().sub(&self.f.times_x()).sub(&rhs)
    }
}

/// Solves the Stein equation exactly for polynomial h (degree ≤ 30), via the
/// descending coefficient recurrence b_{j-1} = (j+1)b_{j+1} - rhs_j in
/// rational arithmetic. A constant h yields the zero solution.
pub fn solve_polynomial(h_coeffs: &[BigRational]) -> Result<PolynomialSolution> {
    let h = RationalPolynomial::new(h_coeffs.to_vec());
    if h.degree() > 30 {
        return Err(SteinError::InvalidParameter(format!(
            "polynomial degree {} exceeds 30",
            h.degree()
        )));
    }
    let nh: BigRational = h
        .coeffs()
        .iter()
        .enumerate()
        .map(|(m, c)| c * gaussian_moment_exact(m))
        .sum();
    if h.is_zero() || h.degree() == 0 {
        return Ok(PolynomialSolution {
            f: RationalPolynomial::zero(),
            nh,
        });
    }
    let d = h.degree();
    let rhs = |j: usize| {
        if j == 0 {
            h.coeff(0) - &nh
        } else {
            h.coeff(j)
        }
    };
    // b[j] for j = 0..=d-1; b_d = b_{d+1} = 0
    let mut b = vec![BigRational::zero(); d + 2];
    for j in (1..=d).rev() {
        b[j - 1] = BigRational::from_integer((j as i64 + 1).into()) * &b[j + 1] - rhs(j);
    }
    debug_assert_eq!(b[1], rhs(0), "Nh centering must close the recurrence");
    b.truncate(d);
    let solution = PolynomialSolution {
        f: RationalPolynomial::new(b),
        nh,
    };
    debug_assert!(solution.residual(&h).is_zero());
    Ok(solution)
}

/// f_h^{(j)}(x) via the semigroup representation, 1 ≤ j ≤ k, in the
/// substituted form
///
///   f_h^{(j)}(x) = -∫_0^1 (1-u²)^{(j-1)/2} E[Z h^{(j)}(√(1-u²)x + uZ)] du.
///
/// The inner expectation uses the family's closed form when available and
/// Gaussian-weight quadrature (kinks mapped to z = (t₀ - √(1-u²)x)/u)
/// otherwise.
pub fn derivative_semigroup(
    h: &TestFunction,
    j: usize,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    semigroup_impl(h, j, x, spec, true)
}

fn semigroup_impl(
    h: &TestFunction,
    j: usize,
    x: f64,
    spec: &QuadratureSpec,
    use_oracle: bool,
) -> Result<f64> {
    if j == 0 || j > h.k() {
        return Err(SteinError::InvalidParameter(format!(
            "semigroup representation covers orders 1..=k, got j = {j} with k = {}",
            h.k()
        )));
    }
    check_x(x)?;
    let half_power = (j as f64 - 1.0) / 2.0;
    let inner_failed = Cell::new(false);
    let outer = |u: f64| {
        let c = (1.0 - u * u).max(0.0).sqrt() * x;
        let oracle = if use_oracle {
            h.inner_oracle(j, c, u)
        } else {
            None
        };
        let inner = match oracle {
            Some(v) => v,
            None => {
                let bps: Vec<f64> = h.kinks().iter().map(|t| (t - c) / u).collect();
                let r = gaussian_expectation(|z| z * h.deriv_quad(j, c + u * z), &bps, spec);
                if !r.converged {
                    inner_failed.set(true);
                }
                r.value
            }
        };
        (1.0 - u * u).max(0.0).powf(half_power) * inner
    };
    let result = integrate(outer, 0.0, 1.0, &[], spec);
    if inner_failed.get() {
        return Err(SteinError::NotConverged {
            best: -result.value,
            error_estimate: f64::INFINITY,
            subdivisions: result.subdivisions_used,
        });
    }
    Ok(-result.into_converged()?)
}

/// f_h^{(k+1)}(x) via the Mills-ratio representation
///
///   f_h^{(k+1)}(x) = h^{(k)}(x) - Z^{(k+1)}(-x)·A_k(x)/(k-1)!
///                              - Z^{(k+1)}(x)·B_k(x)/(k-1)!,
///
///   A_k(x) = ∫_{-∞}^x h^{(k)}φ·Z^{(k-1)} dt,
///   B_k(x) = ∫_x^∞  h^{(k)}φ·Z^{(k-1)}(-·) dt.
///
/// Only the h^{(k)} term depends on the side: A_k, B_k and Z^{(k+1)} are
/// continuous, so the requested one-sided limit at a kink comes entirely
/// from h^{(k)}(x±).
pub fn derivative_daly(h: &TestFunction, x: f64, side: Side, spec: &QuadratureSpec) -> Result<f64> {
    check_x(x)?;
    let k = h.k();
    let t_max = SOLVER_X_MAX + x.abs();
    let hk_x = h.deriv(k, x, side)?;

    let fact: f64 = (1..k).map(|m| m as f64).product();
    let z_neg = z_deriv(-x, k + 1).expect("|x| within Z domain");
    let z_pos = z_deriv(x, k + 1).expect("|x| within Z domain");

    // each integral is later multiplied by a Z derivative that can reach
    // e^{x²/2} scale; shrink its absolute tolerance by that factor
    let tol_for = |prefactor: f64| QuadratureSpec {
        abs_tol: spec.abs_tol / (prefactor.abs() / fact).max(1.0),
        ..*spec
    };
    let a_k = integrate(
        |t| h.deriv_quad(k, t) * phi(t) * z_deriv(t, k - 1).expect("|t| within Z domain"),
        -t_max,
        x,
        h.kinks(),
        &tol_for(z_neg),
    )
    .into_converged()?;
    let b_k = integrate(
        |t| h.deriv_quad(k, t) * phi(t) * z_deriv(-t, k - 1).expect("|t| within Z domain"),
        x,
        t_max,
        h.kinks(),
        &tol_for(z_pos),
    )
    .into_converged()?;

    Ok(hk_x - z_neg * a_k / fact - z_pos * b_k / fact)
}

/// Derivative order for [`finite_difference`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdOrder {
    First,
    Second,
}

/// Central finite difference with two levels of Richardson extrapolation.
/// The caller owns the step choice.
pub fn finite_difference<F>(f: F, x: f64, order: FdOrder, base_step: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let stencil = |s: f64| -> Result<f64> {
        Ok(match order {
            FdOrder::First => (f(x + s)? - f(x - s)?) / (2.0 * s),
            FdOrder::Second => (f(x + s)? - 2.0 * f(x)? + f(x - s)?) / (s * s),
        })
    };
    let d0 = stencil(base_step)?;
    let d1 = stencil(base_step / 2.0)?;
    let d2 = stencil(base_step / 4.0)?;
    let r0 = (4.0 * d1 - d0) / 3.0;
    let r1 = (4.0 * d2 - d1) / 3.0;
    Ok((16.0 * r1 - r0) / 15.0)
}

/// Grid sup-norm estimate of |f_h^{(j)}| with refinement metadata.
#[derive(Debug, Clone, Copy)]
pub struct SupNormEstimate {
    pub value: f64,
    pub argmax_location: f64,
    pub grid_points: usize,
    pub refinement_levels: usize,
    pub stable: bool,
}

/// Default half-width of the sup-norm search window.
pub const SUP_NORM_WINDOW: f64 = 10.0;
const SUP_NORM_COARSE_POINTS: usize = 401;
const SUP_NORM_REFINE_POINTS: usize = 33;
const SUP_NORM_MAX_LEVELS: usize = 8;
const SUP_NORM_STABLE_REL: f64 = 1e-6;

/// Evaluates |f_h^{(j)}| by the representation appropriate to j
/// (solution integral for j = 0, semigroup for 1 ≤ j ≤ k, Mills-ratio form
/// for j = k+1), maximizes over a uniform grid on [-window, window], then
/// refines around the best point by factor-4 window shrinking until the
/// value stabilizes to 1e-6 relative or 8 levels are spent.
///
/// At a kink of h^{(k)} the j = k+1 evaluation takes the larger of the two
/// one-sided magnitudes.
pub fn sup_norm_estimate(
    h: &TestFunction,
    j: usize,
    window: f64,
    spec: &QuadratureSpec,
) -> Result<SupNormEstimate> {
    if j > h.k() + 1 {
        return Err(SteinError::InvalidParameter(format!(
            "no representation for order {j} with k = {} (orders above k+1 need not exist)",
            h.k()
        )));
    }
    if !(window > 0.0 && window <= SOLVER_X_MAX) {
        return Err(SteinError::InvalidParameter(format!(
            "sup-norm window must lie in (0, {SOLVER_X_MAX}], got {window}"
        )));
    }
    let nh = if j == 0 {
        Some(expectation_nh(h, spec)?)
    } else {
        None
    };
    let eval = |x: f64| -> Result<f64> {
        let v = match j {
            0 => solve_f_with_nh(h, x, nh.unwrap(), spec)?,
            _ if j <= h.k() => derivative_semigroup(h, j, x, spec)?,
            _ => match derivative_daly(h, x, Side::TwoSided, spec) {
                Ok(v) => v,
                Err(SteinError::InvalidParameter(_)) => {
                    // genuine jump at a kink: take the larger one-sided limit
                    let l = derivative_daly(h, x, Side::Left, spec)?;
                    let r = derivative_daly(h, x, Side::Right, spec)?;
                    if l.abs() >= r.abs() {
                        l
                    } else {
                        r
                    }
                }
                Err(e) => return Err(e),
            },
        };
        Ok(v.abs())
    };

    let scan = |lo: f64, hi: f64, n: usize| -> Result<(f64, f64)> {
        let xs: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        let vals: Vec<f64> = xs.par_iter().map(|&x| eval(x)).collect::<Result<_>>()?;
        let (mut best_x, mut best_v) = (xs[0], vals[0]);
        for (x, v) in xs.iter().zip(&vals) {
            if *v > best_v {
                best_v = *v;
                best_x = *x;
            }
        }
        Ok((best_x, best_v))
    };

    let (mut best_x, mut best_v) = scan(-window, window, SUP_NORM_COARSE_POINTS)?;
    let mut grid_points = SUP_NORM_COARSE_POINTS;
    let mut half_width = 2.0 * window / (SUP_NORM_COARSE_POINTS - 1) as f64;
    let mut levels = 0;
    let mut stable = false;
    while levels < SUP_NORM_MAX_LEVELS {
        let lo = (best_x - half_width).max(-window);
        let hi = (best_x + half_width).min(window);
        let (x, v) = scan(lo, hi, SUP_NORM_REFINE_POINTS)?;
        grid_points += SUP_NORM_REFINE_POINTS;
        levels += 1;
        let change = (v - best_v).abs() / v.abs().max(f64::MIN_POSITIVE);
        if v >= best_v {
            best_v = v;
            best_x = x;
        }
        if change <= SUP_NORM_STABLE_REL {
            stable = true;
            break;
        }
        half_width /= 4.0;
    }
    Ok(SupNormEstimate {
        value: best_v,
        argmax_location: best_x,
        grid_points,
        refinement_levels: levels,
        stable,
    })
}

/// The middle Stein-factor constant c_k = Γ((k+1)/2)/(√2·Γ(k/2+1)).
pub fn sharp_constant(k: usize) -> f64 {
    half_integer_gamma(k as u32 + 1) / (std::f64::consts::SQRT_2 * half_integer_gamma(k as u32 + 2))
}

/// The sharp uniform-bound constant for ‖f_h^{(j)}‖ ≤ C‖h^{(k)}‖:
/// 1/k at j = k-1, c_k at j = k, 2 at j = k+1; no constant exists otherwise.
pub fn bound_constant(j: usize, k: usize) -> Option<f64> {
    if k == 0 {
        return None;
    }
    if j + 1 == k {
        Some(1.0 / k as f64)
    } else if j == k {
        Some(sharp_constant(k))
    } else if j == k + 1 {
        Some(2.0)
    } else {
        None
    }
}

/// ∫_0^1 (1-u²)^{(k-1)/2} du by quadrature: the substituted Stein kernel
/// whose closed form is [`kernel_integral_closed_form`].
pub fn kernel_integral(k: usize, spec: &QuadratureSpec) -> IntegrationResult {
    let half_power = (k as f64 - 1.0) / 2.0;
    integrate(
        |u| (1.0 - u * u).max(0.0).powf(half_power),
        0.0,
        1.0,
        &[],
        spec,
    )
}

/// (√π/2)·Γ((k+1)/2)/Γ(k/2+1).
pub fn kernel_integral_closed_form(k: usize) -> f64 {
    0.5 * half_integer_gamma(1) * half_integer_gamma(k as u32 + 1)
        / half_integer_gamma(k as u32 + 2)
}
