fn main() {
    let s = steinlab::QuadratureSpec::default();
    let h = steinlab::monomial(0, 1).unwrap();
    let est = steinlab::stein_solver::sup_norm_estimate(&h, 0, 10.0, &s).unwrap();
    println!("value={} argmax={} levels={} stable={}", est.value, est.argmax_location, est.refinement_levels, est.stable);
    for x in [-10.0, -9.95, -5.0, 0.0, 5.0, 9.95, 10.0] {
        println!("f({x}) = {:?}", steinlab::stein_solver::solve_f(&h, x, &s));
    }
}
