//! Acceptance suite: one test per quantitative claim, each printing a
//! PASS line with its runtime. Run with
//!
//!     cargo test --test acceptance -- --nocapture
//!
//! Every tolerance is pinned in the assertions below.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;

use steinlab::distributions::{
    convolve_iid, expect_h, moment_identity_check, moment_identity_exact, LatticeDistribution,
};
use steinlab::experiments::{
    cmd_bounds, cmd_clt, cmd_constants, cmd_jump, cmd_sharpness, DEFAULT_A_LADDER,
};
use steinlab::normal_kernel::{normal_cdf, z_derivatives};
use steinlab::poly::horner;
use steinlab::report::Verdict;
use steinlab::stein_solver::{
    derivative_daly, derivative_semigroup, expectation_nh, finite_difference, sharp_constant,
    solve_f_with_nh, solve_polynomial, FdOrder,
};
use steinlab::test_functions::{abs_family, monomial, ramp_family, smooth_probe, Side};
use steinlab::QuadratureSpec;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn report(criterion: u32, name: &str, started: Instant, limit_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("ACCEPTANCE {criterion} ({name}): PASS in {elapsed:.2}s (limit {limit_s}s)");
    assert!(
        elapsed < limit_s,
        "criterion {criterion} exceeded its {limit_s}s budget: {elapsed:.2}s"
    );
}

/// Criterion 1: constants table at 1e-10 relative, c_1 = sqrt(2/pi).
#[test]
fn acceptance_1_constants_table() {
    let t = Instant::now();
    let spec = QuadratureSpec::default();
    let r = cmd_constants(10, None, &spec).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!((sharp_constant(1) - 0.7978845608).abs() <= 1e-10);
    report(1, "constants table", t, 1.0);
}

/// Criterion 2: sharpness of the middle bound — attainment at the |x|
/// family to 1e-8 for k = 1..6 and monotone ramp deficits with the final
/// deficit below 5a.
#[test]
fn acceptance_2_sharpness() {
    let t = Instant::now();
    let spec = QuadratureSpec::default();
    for k in 1..=6 {
        let h = abs_family(k).unwrap();
        let attained = derivative_semigroup(&h, k, 0.0, &spec).unwrap();
        assert!(
            (attained + sharp_constant(k)).abs() <= 1e-8,
            "k={k}: {attained} vs -c_k"
        );
        let r = cmd_sharpness(k, &DEFAULT_A_LADDER, None, &spec).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "sharpness ladder failed at k={k}");
    }
    report(2, "middle-bound sharpness", t, 30.0);
}

/// Criterion 3: jump of 2 at the origin (k = 1..3) and the 1/eps
/// finite-difference divergence with log-log slope -1 +/- 0.05.
#[test]
fn acceptance_3_jump_and_divergence() {
    let t = Instant::now();
    let spec = QuadratureSpec::default();
    for k in 1..=3 {
        let r = cmd_jump(k, None, &spec).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "jump experiment failed at k={k}");
    }
    report(3, "jump and divergence", t, 30.0);
}

/// Criterion 4: monomial degeneracy — exact polynomial solutions with
/// identically zero residual while ||h^{(k)}|| = 0 for p <= k-2.
#[test]
fn acceptance_4_monomial_degeneracy() {
    let t = Instant::now();
    // h = x, x^2, x^3 -> f = -1, -x, -x^2 - 2 in exact arithmetic
    let cases: Vec<(Vec<BigRational>, Vec<BigRational>)> = vec![
        (vec![rat(0), rat(1)], vec![rat(-1)]),
        (vec![rat(0), rat(0), rat(1)], vec![rat(0), rat(-1)]),
        (
            vec![rat(0), rat(0), rat(0), rat(1)],
            vec![rat(-2), rat(0), rat(-1)],
        ),
    ];
    for (h_coeffs, f_coeffs) in &cases {
        let sol = solve_polynomial(h_coeffs).unwrap();
        assert_eq!(sol.f.coeffs(), f_coeffs.as_slice());
        let h = steinlab::poly::RationalPolynomial::new(h_coeffs.clone());
        assert!(sol.residual(&h).is_zero(), "residual must vanish exactly");
    }
    // zero Lipschitz norm with a nonzero solution: h = x^3 in Lip_3 has
    // ||h^{(4)}|| = 0 yet f(0) = -2
    for (p, k) in [(0u32, 2usize), (1, 3), (2, 4), (3, 5)] {
        assert_eq!(monomial(p, k).unwrap().lip_norm(), 0.0);
    }
    let sol = solve_polynomial(&[rat(0), rat(0), rat(0), rat(1)]).unwrap();
    let f0 = horner(&sol.f.coeffs_f64(), 0.0);
    assert_eq!(f0, -2.0);
    report(4, "monomial degeneracy", t, 1.0);
}

/// Criterion 5: moment identity under exact convolution, gap <= 1e-12 on
/// n = 1, 2, 4, ..., 256, with the Rademacher closed form 3 - 2/n.
#[test]
fn acceptance_5_moment_identity() {
    let t = Instant::now();
    let ns: Vec<usize> = (0..=8).map(|e| 1usize << e).collect();
    let rad = LatticeDistribution::rademacher();
    let two = LatticeDistribution::two_point_asymmetric();
    for &n in &ns {
        let id = moment_identity_check(&rad, 3, n).unwrap();
        assert!(id.gap <= 1e-12, "rademacher p=3 n={n}: gap {}", id.gap);
        assert!(moment_identity_exact(&rad, 3, n).unwrap());

        let closed = 3.0 - 2.0 / n as f64;
        let w = convolve_iid(&rad, n).unwrap();
        let fourth = expect_h(&w, |x| x.powi(4));
        assert!(
            (fourth - closed).abs() <= 1e-13,
            "n={n}: E[W^4] = {fourth} vs {closed}"
        );

        let id = moment_identity_check(&two, 2, n).unwrap();
        assert!(id.gap <= 1e-12, "two-point p=2 n={n}: gap {}", id.gap);
        assert!(moment_identity_exact(&two, 2, n).unwrap());
    }
    report(5, "moment identity", t, 10.0);
}

/// Criterion 6: the i.i.d. smooth-function bound holds on the full grid
/// {p in {2,3}} x {n in {1,4,16,64}} x matched built-ins x {ramp, probe},
/// with the scaled gap lhs·n^{(p-1)/2} non-increasing within 10%.
#[test]
fn acceptance_6_clt_bound_grid() {
    let t = Instant::now();
    let spec = QuadratureSpec::default();
    let ns = [1usize, 4, 16, 64];
    // distributions matched through p: both at p = 2, Rademacher at p = 3
    let grid: [(usize, &str); 3] = [
        (2, "rademacher"),
        (2, "twopoint_asym"),
        (3, "rademacher"),
    ];
    for (p, dist) in grid {
        for h_name in ["ramp", "smooth_probe"] {
            let r = cmd_clt(p, dist, h_name, &ns, None, &spec).unwrap();
            assert_eq!(
                r.verdict,
                Verdict::Pass,
                "bound grid failed at p={p}, dist={dist}, h={h_name}"
            );
        }
    }
    report(6, "smooth-function CLT bound", t, 120.0);
}

/// Criterion 7: grid sup-norms respect the three constants 1/k, c_k, 2 at
/// orders k-1, k, k+1 with slack >= -1e-4, for k = 1..4 and both families.
#[test]
fn acceptance_7_bound_suite() {
    let t = Instant::now();
    let spec = QuadratureSpec::default();
    for k in 1..=4 {
        for family in ["smooth_probe", "ramp"] {
            let r = cmd_bounds(k, family, 1.0, None, &spec).unwrap();
            assert_eq!(
                r.verdict,
                Verdict::Pass,
                "bound suite failed at k={k}, family={family}"
            );
        }
    }
    report(7, "uniform bound suite", t, 120.0);
}

/// Criterion 8: cross-representation coherence — solution integral vs
/// exact polynomial oracle (1e-8 relative), semigroup vs FD of the solution
/// (1e-6), Mills-ratio form vs FD of the semigroup (1e-5), and the Stein
/// equation residual itself (1e-6).
#[test]
fn acceptance_8_cross_representation() {
    let t = Instant::now();
    let spec = QuadratureSpec::default();

    // solution integral against the exact oracle for h = x, x^2, x^3, x^4
    let monomial_cases: [(u32, usize); 4] = [(0, 2), (1, 3), (2, 4), (3, 5)];
    for (p, k) in monomial_cases {
        let h = monomial(p, k).unwrap();
        let mut coeffs = vec![rat(0); p as usize + 2];
        coeffs[p as usize + 1] = rat(1);
        let oracle = solve_polynomial(&coeffs).unwrap();
        let oracle_f64 = oracle.f.coeffs_f64();
        let nh = expectation_nh(&h, &spec).unwrap();
        for i in 0..=20 {
            let x = -5.0 + 0.5 * i as f64;
            let got = solve_f_with_nh(&h, x, nh, &spec).unwrap();
            let want = horner(&oracle_f64, x);
            assert!(
                (got - want).abs() <= 1e-8 * want.abs().max(1.0),
                "p={p}, x={x}: {got} vs {want}"
            );
        }
    }

    // semigroup vs FD(solution), order 1
    for h in [smooth_probe(1, 1.0, 1.0).unwrap(), ramp_family(1, 1.0).unwrap()] {
        let nh = expectation_nh(&h, &spec).unwrap();
        for i in 0..13 {
            let x = -3.0 + 0.5 * i as f64;
            if h.kinks().iter().any(|t| (x - t).abs() < 0.05) {
                continue;
            }
            let sg = derivative_semigroup(&h, 1, x, &spec).unwrap();
            let fd = finite_difference(
                |y| solve_f_with_nh(&h, y, nh, &spec),
                x,
                FdOrder::First,
                1e-2,
            )
            .unwrap();
            assert!((sg - fd).abs() <= 1e-6, "x={x}: {sg} vs {fd}");
        }
    }

    // Mills-ratio form vs FD(semigroup), order k+1, away from kinks
    for h in [smooth_probe(1, 1.0, 1.0).unwrap(), ramp_family(2, 1.0).unwrap()] {
        let k = h.k();
        for i in 0..7 {
            let x = -1.8 + 0.6 * i as f64;
            if h.kinks().iter().any(|t| (x - t).abs() < 0.1) {
                continue;
            }
            let daly = derivative_daly(&h, x, Side::TwoSided, &spec).unwrap();
            let fd = finite_difference(
                |y| derivative_semigroup(&h, k, y, &spec),
                x,
                FdOrder::First,
                1e-2,
            )
            .unwrap();
            assert!((daly - fd).abs() <= 1e-5, "k={k}, x={x}: {daly} vs {fd}");
        }
    }

    // Stein residual FD(f)(x) - x f(x) - (h(x) - Nh)
    for h in [ramp_family(1, 1.0).unwrap(), smooth_probe(1, 1.0, 1.0).unwrap()] {
        let nh = expectation_nh(&h, &spec).unwrap();
        for i in 0..21 {
            let x = -4.0 + 0.4 * i as f64;
            if h.kinks().iter().any(|t| (x - t).abs() < 1e-9) {
                continue;
            }
            let fd = finite_difference(
                |y| solve_f_with_nh(&h, y, nh, &spec),
                x,
                FdOrder::First,
                1e-2,
            )
            .unwrap();
            let f = solve_f_with_nh(&h, x, nh, &spec).unwrap();
            let resid = fd - x * f - (h.deriv(0, x, Side::TwoSided).unwrap() - nh);
            assert!(resid.abs() <= 1e-6, "residual {resid} at x={x}");
        }
    }
    report(8, "cross-representation coherence", t, 60.0);
}

/// Criterion 9: kernel primitives — Z-derivative recurrence vs Richardson
/// finite differences (1e-6 relative, m <= 6 on [-5,5]) and the
/// distribution-function complement identity at 1e-15.
#[test]
fn acceptance_9_kernel_primitives() {
    let t = Instant::now();
    for i in 0..=20 {
        let x = -5.0 + 0.5 * i as f64;
        for m in 1..=6usize {
            let table = z_derivatives(x, m).unwrap();
            let fd = finite_difference(
                |y| Ok(z_derivatives(y, m - 1).unwrap().deriv(m - 1)),
                x,
                FdOrder::First,
                1e-2,
            )
            .unwrap();
            let got = table.deriv(m);
            assert!(
                (got - fd).abs() <= 1e-6 * fd.abs().max(1e-30),
                "x={x}, m={m}: {got} vs {fd}"
            );
        }
    }
    let mut x = -8.0;
    while x <= 8.0 {
        assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() <= 1e-15);
        x += 0.125;
    }
    report(9, "kernel primitives", t, 5.0);
}
