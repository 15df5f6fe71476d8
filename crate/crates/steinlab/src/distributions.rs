//! Finite lattice distributions with exact i.i.d. convolution: the CLT side
//! of the laboratory. W_n = n^{-1/2}(X_1 + ... + X_n) is computed by exact
//! convolution of the probability vector, so the left side of every moment
//! identity and smooth-function gap is a finite sum, not a simulation.
//!
//! The two built-ins carry an integer-lattice descriptor (atoms are
//! (a + jb)·unit with unit² rational), which lets the moment identity be
//! verified in exact rational arithmetic as well.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Result, SteinError};
use crate::normal_kernel::gaussian_moment;
use crate::poly::gaussian_moment_exact;
use crate::quadrature::QuadratureSpec;
use crate::stein_solver::{expectation_nh, sup_norm_estimate, SUP_NORM_WINDOW};
use crate::sums::Accumulator;
use crate::test_functions::TestFunction;

/// Atom-count cap for convolutions ((M·n + 1) atoms), an explicit error
/// rather than silent truncation.
pub const SUPPORT_CAP: usize = 200_000;

/// Moment-matching comparison tolerance against the Gaussian moments.
pub const MOMENT_MATCH_TOL: f64 = 1e-12;

/// Exact integer-lattice descriptor: atom_j = (a + j·b)·√unit_sq with
/// probability weights[j]/denom.
#[derive(Debug, Clone)]
struct ExactLattice {
    a: i64,
    b: i64,
    unit_sq: BigRational,
    weights: Vec<BigUint>,
    denom: BigUint,
}

/// Finite discrete distribution on an arithmetic lattice:
/// atom j sits at offset + j·step with probability probs[j].
#[derive(Debug, Clone)]
pub struct LatticeDistribution {
    offset: f64,
    step: f64,
    probs: Vec<f64>,
    exact: Option<ExactLattice>,
}

impl LatticeDistribution {
    pub fn new(offset: f64, step: f64, probs: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(SteinError::InvalidParameter(format!(
                "lattice step must be positive, got {step}"
            )));
        }
        if probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0)) || !probs.iter().any(|p| *p > 0.0)
        {
            return Err(SteinError::InvalidParameter(
                "probabilities must be non-negative with at least one positive".into(),
            ));
        }
        let mass: f64 = crate::sums::compensated_sum(&probs);
        if (mass - 1.0).abs() > 1e-14 {
            return Err(SteinError::InvalidParameter(format!(
                "probabilities sum to {mass}, not 1"
            )));
        }
        Ok(Self {
            offset,
            step,
            probs,
            exact: None,
        })
    }

    /// P(X = ±1) = 1/2; matches the Gaussian moments through order 3.
    pub fn rademacher() -> Self {
        Self {
            offset: -1.0,
            step: 2.0,
            probs: vec![0.5, 0.5],
            exact: Some(ExactLattice {
                a: -1,
                b: 2,
                unit_sq: BigRational::one(),
                weights: vec![BigUint::one(), BigUint::one()],
                denom: BigUint::from(2u32),
            }),
        }
    }

    /// P(X = √2) = 1/3, P(X = -1/√2) = 2/3: mean 0, variance 1, third
    /// moment 1/√2 ≠ 0 — matches the Gaussian moments through order 2 only.
    pub fn two_point_asymmetric() -> Self {
        let unit = 0.5f64.sqrt();
        Self {
            offset: -unit,
            step: 3.0 * unit,
            probs: vec![2.0 / 3.0, 1.0 / 3.0],
            exact: Some(ExactLattice {
                a: -1,
                b: 3,
                unit_sq: BigRational::new(BigInt::one(), BigInt::from(2)),
                weights: vec![BigUint::from(2u32), BigUint::one()],
                denom: BigUint::from(3u32),
            }),
        }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Lattice value of atom j.
    pub fn value(&self, j: usize) -> f64 {
        self.offset + j as f64 * self.step
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    #[cfg(test)]
    fn has_exact(&self) -> bool {
        self.exact.is_some()
    }
}

/// Raw and absolute moments with per-order Gaussian matching flags.
#[derive(Debug, Clone)]
pub struct MomentReport {
    /// raw[m] = E[X^m], m = 0..=m_max.
    pub raw: Vec<f64>,
    /// abs[m] = E[|X|^m].
    pub abs: Vec<f64>,
    /// matched[m] iff |E[X^m] - E[Z^m]| ≤ 1e-12 (index by order m).
    pub matched: Vec<bool>,
}

impl MomentReport {
    /// All orders 1..=p match the Gaussian moments.
    pub fn matched_through(&self, p: usize) -> bool {
        (1..=p).all(|m| self.matched[m])
    }
}

/// Exact finite sums Σ p_j v_j^m and Σ p_j |v_j|^m for m = 0..=m_max (≤ 20).
pub fn moments(d: &LatticeDistribution, m_max: usize) -> MomentReport {
    assert!(m_max <= 20, "moment order {m_max} exceeds 20");
    let mut raw = Vec::with_capacity(m_max + 1);
    let mut abs = Vec::with_capacity(m_max + 1);
    let mut matched = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let mut raw_acc = Accumulator::new();
        let mut abs_acc = Accumulator::new();
        for (j, &p) in d.probs.iter().enumerate() {
            let v = d.value(j).powi(m as i32);
            raw_acc.add(p * v);
            abs_acc.add(p * v.abs());
        }
        raw.push(raw_acc.value());
        abs.push(abs_acc.value());
        matched.push((raw[m] - gaussian_moment(m as u32)).abs() <= MOMENT_MATCH_TOL);
    }
    MomentReport { raw, abs, matched }
}

/// Moment report through order p (≤ 10) with Gaussian matching flags — the
/// hypothesis check of the i.i.d. bound.
pub fn check_moment_match(d: &LatticeDistribution, p: usize) -> MomentReport {
    assert!(p <= 10, "matching order {p} exceeds 10");
    moments(d, p)
}

/// Law of W_n = n^{-1/2} Σ X_i by exact n-fold convolution (binary
/// exponentiation on the probability vector) and lattice rescale.
pub fn convolve_iid(d: &LatticeDistribution, n: usize) -> Result<LatticeDistribution> {
    if n == 0 {
        return Err(SteinError::InvalidParameter("n must be at least 1".into()));
    }
    let needed = (d.probs.len() - 1) * n + 1;
    if needed > SUPPORT_CAP {
        return Err(SteinError::SupportTooLarge {
            needed,
            cap: SUPPORT_CAP,
        });
    }
    let probs = convolution_power(&d.probs, n);
    let sqrt_n = (n as f64).sqrt();
    Ok(LatticeDistribution {
        offset: d.offset * n as f64 / sqrt_n,
        step: d.step / sqrt_n,
        probs,
        exact: None,
    })
}

fn convolve(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![Accumulator::new(); p.len() + q.len() - 1];
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        for (j, &qj) in q.iter().enumerate() {
            out[i + j].add(pi * qj);
        }
    }
    out.into_iter().map(|acc| acc.value()).collect()
}

fn convolution_power(base: &[f64], n: usize) -> Vec<f64> {
    let mut result: Option<Vec<f64>> = None;
    let mut sq = base.to_vec();
    let mut m = n;
    while m > 0 {
        if m & 1 == 1 {
            result = Some(match result {
                None => sq.clone(),
                Some(r) => convolve(&r, &sq),
            });
        }
        m >>= 1;
        if m > 0 {
            sq = convolve(&sq, &sq);
        }
    }
    result.expect("n >= 1")
}

/// Σ probs[j]·g(value_j), compensated.
pub fn expect_h<G: Fn(f64) -> f64>(d: &LatticeDistribution, g: G) -> f64 {
    let mut acc = Accumulator::new();
    for (j, &p) in d.probs.iter().enumerate() {
        acc.add(p * g(d.value(j)));
    }
    acc.value()
}

/// Two sides of the moment identity
/// E[W_n^{p+1}] = E[Z^{p+1}] + (E[X^{p+1}] - E[Z^{p+1}])/n^{(p-1)/2}.
#[derive(Debug, Clone, Copy)]
pub struct MomentIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Evaluates both sides of the moment identity; requires the distribution to
/// match the Gaussian moments through order p.
pub fn moment_identity_check(
    d: &LatticeDistribution,
    p: usize,
    n: usize,
) -> Result<MomentIdentity> {
    require_matched(d, p)?;
    let w = convolve_iid(d, n)?;
    let power = p as i32 + 1;
    let lhs = expect_h(&w, |x| x.powi(power));
    let ez = gaussian_moment(p as u32 + 1);
    let ex = moments(d, p + 1).raw[p + 1];
    let rhs = ez + (ex - ez) / (n as f64).powf((p as f64 - 1.0) / 2.0);
    Ok(MomentIdentity {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// Verifies the moment identity in exact rational arithmetic for a built-in
/// lattice (atoms (a + jb)·unit with unit² rational): returns whether the
/// two sides agree exactly. Only the probability weights and the integer
/// lattice enter; the common irrational unit cancels.
pub fn moment_identity_exact(d: &LatticeDistribution, p: usize, n: usize) -> Result<bool> {
    let ex = d.exact.as_ref().ok_or_else(|| {
        SteinError::InvalidParameter("distribution carries no exact lattice descriptor".into())
    })?;
    let needed = (ex.weights.len() - 1) * n + 1;
    if needed > SUPPORT_CAP {
        return Err(SteinError::SupportTooLarge {
            needed,
            cap: SUPPORT_CAP,
        });
    }
    let weights_n = weight_power(&ex.weights, n);
    let denom_n = ex.denom.pow(n as u32);
    let power = (p + 1) as u32;

    // S(m) = Σ w_j (m·a + j·b)^{p+1} / denom^m for the n-fold and single law
    let s_n = power_sum(&weights_n, &denom_n, n as i64 * ex.a, ex.b, power);
    let s_1 = power_sum(&ex.weights, &ex.denom, ex.a, ex.b, power);

    if power % 2 == 0 {
        // everything rational: unit^{p+1} = unit_sq^{(p+1)/2}
        let unit_pow = pow_rational(&ex.unit_sq, power / 2);
        let ez = gaussian_moment_exact(p + 1);
        let n_big = BigRational::from_integer(BigInt::from(n));
        let lhs = &unit_pow * s_n / pow_rational(&n_big, power / 2);
        let rhs = &ez + (unit_pow * s_1 - &ez) / pow_rational(&n_big, (power - 2) / 2);
        Ok(lhs == rhs)
    } else {
        // odd power: E[Z^{p+1}] = 0 and the common factor
        // unit^{p+1}·n^{-(p-1)/2} cancels, leaving S(n) = n·S(1)
        Ok(s_n == BigRational::from_integer(BigInt::from(n)) * s_1)
    }
}

fn pow_rational(r: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= r;
    }
    acc
}

fn power_sum(
    weights: &[BigUint],
    denom: &BigUint,
    base: i64,
    step: i64,
    power: u32,
) -> BigRational {
    let mut total = BigInt::zero();
    for (j, w) in weights.iter().enumerate() {
        let site = BigInt::from(base + j as i64 * step);
        total += BigInt::from(w.clone()) * site.pow(power);
    }
    BigRational::new(total, BigInt::from(denom.clone()))
}

fn weight_conv(p: &[BigUint], q: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); p.len() + q.len() - 1];
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            out[i + j] += pi * qj;
        }
    }
    out
}

fn weight_power(base: &[BigUint], n: usize) -> Vec<BigUint> {
    let mut result: Option<Vec<BigUint>> = None;
    let mut sq = base.to_vec();
    let mut m = n;
    while m > 0 {
        if m & 1 == 1 {
            result = Some(match result {
                None => sq.clone(),
                Some(r) => weight_conv(&r, &sq),
            });
        }
        m >>= 1;
        if m > 0 {
            sq = weight_conv(&sq, &sq);
        }
    }
    result.expect("n >= 1")
}

fn require_matched(d: &LatticeDistribution, p: usize) -> Result<()> {
    let report = check_moment_match(d, p);
    if !report.matched_through(p) {
        let first_bad = (1..=p).find(|&m| !report.matched[m]).unwrap();
        return Err(SteinError::MomentMismatch(format!(
            "E[X^{first_bad}] = {} differs from the Gaussian moment {}",
            report.raw[first_bad],
            gaussian_moment(first_bad as u32)
        )));
    }
    Ok(())
}

/// The bracketed moment factor of the i.i.d. smooth-function bound,
/// {E[|X|^{p-1}]/(p-1)! + E[|X|^{p+1}]/p!}·f_norm; the n-power is applied
/// by the caller.
pub fn lemma1_rhs(d: &LatticeDistribution, p: usize, f_norm: f64) -> f64 {
    assert!(p >= 2, "the bound needs p >= 2");
    let report = moments(d, p + 1);
    let fact_pm1: f64 = (1..p).map(|m| m as f64).product();
    let fact_p = fact_pm1 * p as f64;
    f_norm * (report.abs[p - 1] / fact_pm1 + report.abs[p + 1] / fact_p)
}

/// Outcome of the smooth-function CLT bound comparison.
#[derive(Debug, Clone, Copy)]
pub struct Lemma1Outcome {
    pub lhs: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Comparison slack on |E[h(W_n)] - E[h(Z)]| ≤ bound.
pub const LEMMA1_SLACK: f64 = 1e-8;

/// Checks |E[h(W_n)] - E[h(Z)]| against ‖f_h^{(p)}‖·{moment factor}/n^{(p-1)/2}
/// with ‖f_h^{(p)}‖ estimated by [`sup_norm_estimate`]. Requires h ∈
/// Lip_{p-1}(ℝ) (h.k = p) and moments matched through p.
pub fn lemma1_compare(
    h: &TestFunction,
    d: &LatticeDistribution,
    p: usize,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<Lemma1Outcome> {
    if h.k() != p {
        return Err(SteinError::InvalidParameter(format!(
            "test function has k = {}, the bound at order p = {p} needs h in Lip_{{p-1}}",
            h.k()
        )));
    }
    let f_norm = sup_norm_estimate(h, p, SUP_NORM_WINDOW, spec)?.value;
    lemma1_compare_with_norm(h, d, p, n, f_norm, spec)
}

/// As [`lemma1_compare`] with a precomputed ‖f_h^{(p)}‖ (shared across an
/// n-sweep).
pub fn lemma1_compare_with_norm(
    h: &TestFunction,
    d: &LatticeDistribution,
    p: usize,
    n: usize,
    f_norm: f64,
    spec: &QuadratureSpec,
) -> Result<Lemma1Outcome> {
    require_matched(d, p)?;
    let w = convolve_iid(d, n)?;
    let eh_w = expect_h(&w, |x| h.deriv_quad(0, x));
    let nh = expectation_nh(h, spec)?;
    let lhs = (eh_w - nh).abs();
    let bound = lemma1_rhs(d, p, f_norm) / (n as f64).powf((p as f64 - 1.0) / 2.0);
    Ok(Lemma1Outcome {
        lhs,
        bound,
        satisfied: lhs <= bound + LEMMA1_SLACK,
    })
}
