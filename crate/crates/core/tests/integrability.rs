use contactkit::flows::{dissipation_residual, flow_map, integrate, ContactField, IntegratorConfig, SympField};
use contactkit::integrability::{
    angle_solve, coisotropy_check, ray_membership, ray_project, tangency_check, AngleSolveConfig, Samples,
    SectionSpec, Sign,
};
use contactkit::{ContactChart, ContactSystem, Expr, Region, SympSystem};

fn worked_example() -> ContactSystem {
    let region = Region::new(vec![(-3.0, 3.0), (0.5, 4.0), (0.5, 6.0)]).unwrap();
    ContactSystem::from_sources(ContactChart::darboux(1), &["p", "z"], region).unwrap()
}

fn chi() -> SectionSpec {
    let domain = Region::new(vec![(1e-3, 1e3), (1e-3, 1e3)]).unwrap();
    SectionSpec::parse("chi", vec!["L0".into(), "L1".into()], &["0", "L0/L1", "1", "L1"], domain)
        .unwrap()
        .with_pivot(1)
}

#[test]
fn ray_preimages_are_invariant() {
    let s = worked_example();
    let lambda = [3.0, 5.0];
    let config = IntegratorConfig::default();
    let seeds = Region::new(vec![(-1.0, 1.0), (1.0, 2.0), (2.0, 3.0)]).unwrap().sample_points(10, 1);
    for seed in seeds {
        let start = ray_project(&s, &lambda, &seed).unwrap();
        for f in s.integrals() {
            let traj = integrate(&ContactField { chart: s.chart(), f }, &start.x, 1.0, &config).unwrap();
            for x in &traj.points {
                let (r, residual) = ray_membership(&s, &lambda, x).unwrap();
                assert!(r > 0.0 && residual < 1e-6);
            }
        }
    }
}

#[test]
fn angles_move_linearly_and_normalised_actions_are_constant() {
    let lifted = SympSystem::new(worked_example()).unwrap();
    let config = AngleSolveConfig::default();
    let y0 = [0.5, 2.0, 3.0, 1.3];
    for (beta, f) in lifted.integrals().iter().enumerate() {
        let field = SympField { chart: lifted.chart(), f };
        let start = angle_solve(&lifted, &chi(), Sign::Minus, &y0, &config).unwrap();
        let omega = start.frequencies(beta);
        for t in [0.25, 0.5, 0.75, 1.0] {
            let y = flow_map(&field, t, &y0, &config.integrator).unwrap();
            let r = angle_solve(&lifted, &chi(), Sign::Minus, &y, &config).unwrap();
            for (a, w) in omega.iter().enumerate().take(2) {
                let slope = (r.y[a] - start.y[a]) / t;
                assert!((slope - w).abs() < 1e-5, "beta {beta} a {a}: {slope}");
            }
            assert!((r.a_tilde[0] - start.a_tilde[0]).abs() < 1e-6);
        }
    }
}

#[test]
fn actions_are_dissipated() {
    let s = worked_example();
    let fine = IntegratorConfig::rkf45(1e-10, 1e-12, 0.02);
    for h in s.integrals() {
        let traj = integrate(&ContactField { chart: s.chart(), f: h }, &[0.5, 2.0, 3.0], 2.0, &fine).unwrap();
        for a in s.integrals() {
            assert!(dissipation_residual(s.chart(), h, a, &traj).unwrap() < 1e-6);
        }
    }
}

#[test]
fn homogeneity_of_lifted_coordinates() {
    let lifted = SympSystem::new(worked_example()).unwrap();
    let config = AngleSolveConfig::default();
    let y = [0.5, 2.0, 3.0, 1.3];
    let h = 1e-5;
    let solve = |r: f64| angle_solve(&lifted, &chi(), Sign::Minus, &[y[0], y[1], y[2], r], &config).unwrap();
    let (plus, minus) = (solve(y[3] + h), solve(y[3] - h));
    for a in 0..2 {
        // Delta(y^a) = r dy^a/dr
        let delta = y[3] * (plus.y[a] - minus.y[a]) / (2.0 * h);
        assert!(delta.abs() < 1e-6, "{delta}");
    }
    let centre = solve(y[3]);
    for (a, f) in lifted.integrals().iter().enumerate() {
        assert!(lifted.chart().homogeneity_residual(f, &y, 1).unwrap() < 1e-12);
        assert!((centre.a_sigma[a] - f.eval(&y).unwrap()).abs() < 1e-15);
    }
}

fn on_ray(system: &ContactSystem, lambda: &[f64], count: usize) -> Samples {
    let d = system.chart().dim();
    let seeds = Region::new(vec![(1.0, 2.0); d]).unwrap().sample_points(count, 5);
    Samples::given(
        seeds
            .iter()
            .map(|seed| ray_project(system, lambda, seed).unwrap().x)
            .collect(),
    )
}

#[test]
fn coisotropy_and_tangency_agree() {
    let wide = |d: usize| Region::new(vec![(-20.0, 20.0); d]).unwrap();
    let systems = [
        (worked_example(), vec![3.0, 5.0], true),
        (
            ContactSystem::from_sources(ContactChart::darboux(2), &["p1", "p2", "z"], wide(5)).unwrap(),
            vec![1.0, 2.0, 3.0],
            true,
        ),
        (
            ContactSystem::from_sources(ContactChart::darboux(2), &["q1", "p1", "p2"], wide(5)).unwrap(),
            vec![1.0, 2.0, 3.0],
            false,
        ),
    ];
    for (system, lambda, expected) in systems {
        let pts = on_ray(&system, &lambda, 10);
        let c = coisotropy_check(&system, &lambda, &pts, 1e-8).unwrap();
        let t = tangency_check(&system, &lambda, &pts, 1e-8).unwrap();
        assert_eq!(c.pass, expected, "{c:?}");
        assert_eq!(t.pass, expected, "{t:?}");
    }
}

#[test]
fn zero_integral_is_tangent() {
    let region = Region::new(vec![(-5.0, 5.0); 3]).unwrap();
    let s = ContactSystem::new(
        ContactChart::darboux(1),
        vec![Expr::parse("p", &["q", "p", "z"]).unwrap(), Expr::constant(0.0)],
        region,
    )
    .unwrap();
    let pts = Samples::given(vec![vec![0.0, 2.0, 1.0], vec![1.0, 0.5, -1.0]]);
    let t = tangency_check(&s, &[1.0, 0.0], &pts, 1e-12).unwrap();
    assert_eq!(t.residual, 0.0);
}
