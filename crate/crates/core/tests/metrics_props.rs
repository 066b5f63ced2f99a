use mrlbm::exact::{gaussian_u0, WaveProblem};
use mrlbm::mesh::{MeshConfig, MultiLevelGrid};
use mrlbm::metrics::{convergence_rates, Comparison};
use proptest::prelude::*;

fn grids() -> (MultiLevelGrid, MultiLevelGrid) {
    let cfg = MeshConfig::new(4, 6);
    (
        MultiLevelGrid::jump(&cfg).unwrap(),
        MultiLevelGrid::uniform(&cfg, 6).unwrap(),
    )
}

proptest! {
    #[test]
    fn differences_obey_the_triangle_inequality(
        noise_a in prop::collection::vec(-0.1f64..0.1, 144),
        noise_b in prop::collection::vec(-0.1f64..0.1, 192),
    ) {
        let (jump, uniform) = grids();
        let problem = WaveProblem::gaussian();
        let t = 0.25;
        let cmp = Comparison::new(&problem, t, 0.0, 3.0, 6).unwrap();
        let mut ia = noise_a.iter();
        let mut a = jump.sample(|x| problem.exact_u(t, x));
        for seg in &mut a.segments {
            for v in &mut seg.values { *v += ia.next().unwrap(); }
        }
        let mut ib = noise_b.iter();
        let mut b = uniform.sample(|x| problem.exact_u(t, x));
        for seg in &mut b.segments {
            for v in &mut seg.values { *v += ib.next().unwrap(); }
        }
        let reference = cmp.finest(&uniform, &b).unwrap();
        let e_a = cmp.error_vs_exact(&jump, &a).unwrap();
        let e_b = cmp.error_vs_exact(&uniform, &b).unwrap();
        let d = cmp.diff_vs_ref(&jump, &a, &reference).unwrap();
        let refl = cmp.reflected_diff(&jump, &a, &reference).unwrap();
        prop_assert!(d <= e_a + e_b + 1e-12);
        prop_assert!(e_a <= d + e_b + 1e-12);
        prop_assert!(refl <= d + 1e-12);
        prop_assert!(refl >= 0.0);
    }

    #[test]
    fn normalized_errors_are_scale_invariant(gamma in 0.01f64..100.0, offset in -0.05f64..0.05) {
        let (jump, _) = grids();
        let t = 0.5;
        let base = WaveProblem::gaussian();
        let scaled = WaveProblem::new(0.5, 1.5625, move |x| gamma * gaussian_u0(x));
        let field = jump.sample(|x| base.exact_u(t, x + offset));
        let e1 = Comparison::new(&base, t, 0.0, 3.0, 6).unwrap().error_vs_exact(&jump, &field).unwrap();
        let e2 = Comparison::new(&scaled, t, 0.0, 3.0, 6)
            .unwrap()
            .error_vs_exact(&jump, &field.map(|v| gamma * v))
            .unwrap();
        prop_assert!((e1 - e2).abs() <= 1e-12 * e1.max(1e-300));
    }
}

#[test]
fn rates_of_geometric_sequences() {
    let values: Vec<f64> = (0..6).map(|i| 3.0 * 16f64.powi(-i)).collect();
    for r in convergence_rates(&values).unwrap() {
        assert!((r - 4.0).abs() < 1e-12);
    }
}
