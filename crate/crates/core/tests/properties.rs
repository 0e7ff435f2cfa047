mod common;

use nalgebra::DVector;
use proptest::prelude::*;
use subdiff::basis::{dpsi, psi};
use subdiff::*;

use common::PiecewisePoly;

fn mesh_from(steps: &[f64]) -> Vec<f64> {
    let mut nodes = vec![0.0];
    for s in steps {
        nodes.push(nodes.last().unwrap() + s);
    }
    nodes
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_recurrence(x in 0.01f64..40.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!(((lhs - rhs) / lhs).abs() < 1e-13);
    }

    #[test]
    fn ml_kernel_is_positive_and_decreasing(alpha in 0.1f64..0.99, x in 0.0f64..40.0) {
        let p = MLParams::new(alpha, alpha).unwrap();
        let a = mittag_leffler_neg(p, -x).unwrap();
        let b = mittag_leffler_neg(p, -x - 0.5).unwrap();
        prop_assert!(a > 0.0 && b > 0.0);
        prop_assert!(b < a);
    }

    #[test]
    fn power_diff_is_negative_and_bounded(a in 1e-6f64..10.0, frac in 0.0f64..0.999_999, g in 0.01f64..0.99) {
        let b = a * frac;
        let d = stable_power_diff(a, b, g).unwrap();
        prop_assert!(d < 0.0);
        prop_assert!(d >= -a.powf(g) * (1.0 + 1e-15));
    }

    #[test]
    fn basis_derivatives_match_differences(m in 1usize..9, s in 0.05f64..0.95) {
        let h = 1e-6;
        for l in 0..=m {
            let fd = (psi(l, m, s + h) - psi(l, m, s - h)) / (2.0 * h);
            prop_assert!((fd - dpsi(l, m, s)).abs() < 1e-8);
        }
    }

    #[test]
    fn caputo_of_linear_function_is_exact_for_l1(
        alpha in 0.05f64..0.95,
        steps in prop::collection::vec(1e-3f64..1.0, 1..8),
        pick in 0.0f64..1.0,
    ) {
        let nodes = mesh_from(&steps);
        let u0 = DVector::from_element(1, 0.0);
        let mut sol = TimeSolution::new(MethodSpec::l1(), alpha, &u0).unwrap();
        for &t in &nodes[1..] {
            sol.push_interval(t, &[], &DVector::from_element(1, t)).unwrap();
        }
        let t = (pick * nodes.last().unwrap()).max(1e-9);
        let got = sol.eval_caputo(t).unwrap()[0];
        let want = t.powf(1.0 - alpha) / gamma(2.0 - alpha).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn caputo_of_quadratic_is_exact_for_coll2(
        alpha in 0.05f64..0.95,
        steps in prop::collection::vec(1e-3f64..1.0, 1..8),
        pick in 0.0f64..1.0,
    ) {
        let nodes = mesh_from(&steps);
        let u0 = DVector::from_element(1, 0.0);
        let mut sol = TimeSolution::new(MethodSpec::collocation(2).unwrap(), alpha, &u0).unwrap();
        for w in nodes.windows(2) {
            // t² = a²(1−σ) + b²σ − τ²σ(1−σ) on [a, b]
            let tau = w[1] - w[0];
            let c = DVector::from_element(1, -tau * tau);
            sol.push_interval(w[1], &[c], &DVector::from_element(1, w[1] * w[1])).unwrap();
        }
        let t = (pick * nodes.last().unwrap()).max(1e-9);
        let got = sol.eval_caputo(t).unwrap()[0];
        let want = 2.0 * t.powf(2.0 - alpha) / gamma(3.0 - alpha).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn caputo_matches_brute_force(
        alpha in 0.05f64..0.95,
        m in 1usize..6,
        steps in prop::collection::vec(1e-3f64..1.0, 1..5),
        coeffs in prop::collection::vec(-1.0f64..1.0, 64),
        k_pick in 0.0f64..1.0,
        t_loc in 1e-4f64..1.0,
    ) {
        let nodes = mesh_from(&steps);
        let n = steps.len();
        let mut it = coeffs.iter().cycle();
        let u0 = DVector::from_element(1, *it.next().unwrap());
        let mut sol = TimeSolution::new(MethodSpec::collocation(m).unwrap(), alpha, &u0).unwrap();
        let mut poly = Vec::new();
        let mut prev = u0[0];
        for &node in &nodes[1..] {
            let interior: Vec<f64> = (1..m).map(|_| *it.next().unwrap()).collect();
            let end = *it.next().unwrap();
            let iv: Vec<DVector<f64>> = interior.iter().map(|&c| DVector::from_element(1, c)).collect();
            sol.push_interval(node, &iv, &DVector::from_element(1, end)).unwrap();
            let mut c = vec![vec![prev]];
            c.extend(interior.iter().map(|&v| vec![v]));
            c.push(vec![end]);
            poly.push(c);
            prev = end;
        }
        let oracle = PiecewisePoly { nodes: nodes.clone(), coeffs: poly };
        let k = ((k_pick * n as f64) as usize).min(n - 1) + 1;
        let t = nodes[k - 1] + (nodes[k] - nodes[k - 1]) * t_loc;
        let got = sol.eval_local(k, t_loc).unwrap()[0];
        let want = oracle.caputo(alpha, gamma(1.0 - alpha).unwrap(), t)[0];
        prop_assert!((got - want).abs() <= (1e-8 * want.abs()).max(1e-10), "{got} vs {want}");
    }

    #[test]
    fn mesh_csv_round_trip(steps in prop::collection::vec(1e-12f64..10.0, 1..30)) {
        let mesh = TemporalMesh::new(mesh_from(&steps)).unwrap();
        let back = TemporalMesh::from_csv(&mesh.to_csv()).unwrap();
        prop_assert_eq!(mesh.nodes(), back.nodes());
    }

    #[test]
    fn sampling_grid_is_graded_and_interior(alpha in 0.01f64..0.999, n in 2usize..60) {
        let g = SamplingGrid::new(alpha, n).unwrap();
        prop_assert_eq!(g.points.len(), n - 1);
        prop_assert!(g.points.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(g.points[0] > 0.0 && *g.points.last().unwrap() < 1.0);
        prop_assert!(g.p >= 1.0 && g.p <= 5.0);
    }

    #[test]
    fn barrier_threshold_scales_with_omega(alpha in 0.05f64..0.95, t in 1e-6f64..1.0, tol in 1e-8f64..1e-1) {
        let lam = std::f64::consts::PI.powi(2);
        let plain = BarrierSpec::r0(lam, 0.0, tol, SpatialNorm::Linf).threshold(alpha, t).unwrap();
        let slack = BarrierSpec::r0(lam, lam / 8.0, tol, SpatialNorm::Linf).threshold(alpha, t).unwrap();
        prop_assert!((slack * (1.0 + lam / 8.0) / plain - 1.0).abs() < 1e-14);
    }

    #[test]
    fn envelope_interpolates_between_samples(values in prop::collection::vec(0.0f64..5.0, 2..20), s in 0.0f64..1.0) {
        let n = values.len();
        let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let env = Envelope::new(times, values.clone()).unwrap();
        let v = env.eval(s);
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(0.0, f64::max);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }
}
