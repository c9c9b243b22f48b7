use loopfock::action::{act_integral, poly_evaluator, relative_gap, ActionConfig};
use loopfock::samples::{random_gauss_poly, rng};
use loopfock::semigroup::MeasuredElement;
use loopfock::LoopMatrix;
use loopfock::Q;
use num_traits::One;

/// `(t I, mu_st)` through the integral operator against the exact `pi_t` on 100 random inputs.
#[test]
fn integral_of_t_matches_symbolic_pi_t() {
    let cfg = ActionConfig::default();
    let mut r = rng(2024);
    let t = MeasuredElement::standard(LoopMatrix::scalar(2, Q::one(), 1)).unwrap();
    let points = cfg.probe_points(2);
    assert_eq!(points.len(), 20);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = random_gauss_poly(&mut r, 2, 3, 5);
        let numeric = act_integral(&t, &f, &cfg).unwrap();
        let exact = poly_evaluator(&f.pi_t().unwrap(), cfg.lambda);
        worst = worst.max(relative_gap(&*numeric, &*exact, &points).unwrap());
    }
    assert!(worst <= 1e-8, "worst relative gap {worst:e}");
}

/// Doubling the node count moves integral-operator values by far less than 10%.
#[test]
fn quadrature_values_are_converged() {
    let cfg = ActionConfig::default();
    let fine = ActionConfig { nodes: 2 * cfg.nodes, ..cfg.clone() };
    let f = random_gauss_poly(&mut rng(9), 2, 3, 5);
    let m = MeasuredElement::standard(LoopMatrix::t_power_diag(&[2, 1])).unwrap();
    let a = act_integral(&m, &f, &cfg).unwrap();
    let b = act_integral(&m, &f, &fine).unwrap();
    let points = cfg.probe_points(2);
    let gap = relative_gap(&*a, &*b, &points).unwrap();
    assert!(gap < 0.1 && gap <= 1e-8, "gap {gap:e}");
    assert!(points.iter().any(|x| b.eval(x).unwrap().abs() > 1e-6));
}
