use contactkit::contact::central_jacobian;
use contactkit::expr::random_polynomial;
use contactkit::linalg::{dot, max_abs_diff};
use contactkit::{ContactChart, Expr, Region};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn points(count: usize, seed: u64) -> Vec<Vec<f64>> {
    Region::new(vec![(-1.0, 1.0); 3]).unwrap().sample_points(count, seed)
}

fn triples(count: usize, seed: u64) -> Vec<[Expr; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = ContactChart::default_names(1);
    (0..count)
        .map(|_| std::array::from_fn(|_| random_polynomial(&names, 3, &mut rng)))
        .collect()
}

/// Charts exercising the linear-solve path.
fn general_charts() -> Vec<ContactChart> {
    let names = ContactChart::default_names(1);
    vec![
        // symmetric gauge: dz + (q dp - p dq)/2
        ContactChart::from_sources(names.clone(), &["-p/2", "q/2", "1"]).unwrap(),
        // conformal multiple of the Darboux form
        ContactChart::from_sources(names.clone(), &["-p*exp(z/3)", "0", "exp(z/3)"]).unwrap(),
        ContactChart::from_sources(names, &["-(2 + sin(q))*p", "0", "2 + sin(q)"]).unwrap(),
    ]
}

#[test]
fn bracket_is_antisymmetric() {
    let c = ContactChart::darboux(1);
    for ([f, g, _], x) in triples(100, 1).iter().zip(points(100, 2)) {
        let fg = c.jacobi_bracket_at(f, g, &x).unwrap();
        let gf = c.jacobi_bracket_at(g, f, &x).unwrap();
        assert!((fg + gf).abs() < 1e-12, "{fg} {gf}");
        assert!(c.jacobi_bracket_at(f, f, &x).unwrap().abs() < 1e-12);
    }
}

#[test]
fn jacobi_identity_on_darboux_chart() {
    let c = ContactChart::darboux(1);
    for ([f, g, h], x) in triples(100, 3).iter().zip(points(100, 4)) {
        let s = c.nested_bracket_at(f, g, h, &x).unwrap()
            + c.nested_bracket_at(g, h, f, &x).unwrap()
            + c.nested_bracket_at(h, f, g, &x).unwrap();
        assert!(s.abs() < 1e-8, "cyclic sum {s}");
    }
}

#[test]
fn jacobi_identity_on_general_charts() {
    for c in general_charts() {
        for ([f, g, h], x) in triples(20, 5).iter().zip(points(20, 6)) {
            let s = c.nested_bracket_at(f, g, h, &x).unwrap()
                + c.nested_bracket_at(g, h, f, &x).unwrap()
                + c.nested_bracket_at(h, f, g, &x).unwrap();
            assert!(s.abs() < 1e-6, "cyclic sum {s}");
        }
    }
}

#[test]
fn weak_leibniz_rule() {
    let mut charts = general_charts();
    charts.push(ContactChart::darboux(1));
    for c in charts {
        for ([f, g, h], x) in triples(100, 7).iter().zip(points(100, 8)) {
            let gh = g.clone() * h.clone();
            let lhs = c.jacobi_bracket_at(f, &gh, &x).unwrap();
            let rhs = c.jacobi_bracket_at(f, g, &x).unwrap() * h.eval(&x).unwrap()
                + c.jacobi_bracket_at(f, h, &x).unwrap() * g.eval(&x).unwrap()
                - gh.eval(&x).unwrap() * c.reeb_derivative_at(f, &x).unwrap();
            assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn hamiltonian_fields_are_an_anti_isomorphism() {
    let c = ContactChart::darboux(1);
    for ([f, g, _], x) in triples(100, 9).iter().zip(points(100, 10)) {
        let lie = c.lie_bracket_at(f, g, &x).unwrap();
        let eta = c.eta_at(&x).unwrap();
        let bracket = c.jacobi_bracket_at(f, g, &x).unwrap();
        assert!((bracket + eta.apply(&lie)).abs() < 1e-6);
    }
    for c in general_charts() {
        for ([f, g, _], x) in triples(20, 11).iter().zip(points(20, 12)) {
            let lie = c.lie_bracket_at(f, g, &x).unwrap();
            let eta = c.eta_at(&x).unwrap();
            let bracket = c.jacobi_bracket_at(f, g, &x).unwrap();
            assert!((bracket + eta.apply(&lie)).abs() < 1e-6, "{bracket} {}", eta.apply(&lie));
        }
    }
}

#[test]
fn hamiltonian_field_defining_equations() {
    for c in general_charts().into_iter().chain([ContactChart::darboux(1)]) {
        for ([f, _, _], x) in triples(50, 13).iter().zip(points(50, 14)) {
            let xf = c.hamiltonian_field_at(f, &x).unwrap();
            let frame = c.frame_at(&x).unwrap();
            let jet = f.eval_jet1(&x).unwrap();
            assert!((frame.eta.apply(&xf) + jet.value).abs() < 1e-10);
            // L_X eta = iota_X d eta + d(eta(X)) = -R(f) eta
            let rf = c.reeb_derivative_at(f, &x).unwrap();
            for b in 0..3 {
                let lie: f64 = (0..3).map(|a| xf[a] * frame.deta[(a, b)]).sum::<f64>() - jet.grad[b];
                assert!((lie + rf * frame.eta[b]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn fast_and_general_paths_agree() {
    let c = ContactChart::darboux(1);
    let parsed = ContactChart::with_coframe(
        ContactChart::default_names(1),
        // algebraically equal but not recognised as the Darboux form
        vec![
            c.parse("-p*1").unwrap(),
            Expr::constant(0.0),
            c.parse("1 + 0*q").unwrap(),
        ],
    )
    .unwrap();
    assert!(!parsed.is_darboux());
    for ([f, g, _], x) in triples(100, 15).iter().zip(points(100, 16)) {
        let a = c.hamiltonian_field_at(f, &x).unwrap();
        let b = parsed.hamiltonian_field_at(f, &x).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-9);
        let r = parsed.reeb_at(&x).unwrap();
        assert!(max_abs_diff(&r, &[0.0, 0.0, 1.0]) < 1e-12);
        let fg = c.jacobi_bracket_at(f, g, &x).unwrap();
        assert!((fg - parsed.jacobi_bracket_at(f, g, &x).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn bracket_expressions_agree() {
    for c in general_charts().into_iter().chain([ContactChart::darboux(1)]) {
        for ([f, g, _], x) in triples(50, 17).iter().zip(points(50, 18)) {
            let (a, b) = c.jacobi_bracket_forms_at(f, g, &x).unwrap();
            assert!((a - b).abs() < 1e-10);
            let via_lambda = c.jacobi_bracket_via_lambda_at(f, g, &x).unwrap();
            assert!((a - via_lambda).abs() < 1e-10);
            assert!(c.lambda_pairing_at(f, f, &x).unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn deta_matches_finite_difference_curl() {
    for c in general_charts() {
        for x in points(30, 19) {
            let fd = central_jacobian(&x, |y| c.eta_at(y).map(|e| e.into_inner())).unwrap();
            let d = c.deta_at(&x).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    // fd[(b, a)] = d_a eta_b
                    assert!((d[(a, b)] - (fd[(b, a)] - fd[(a, b)])).abs() < 1e-7);
                }
            }
        }
    }
}

#[test]
fn conformal_rescaling_identities() {
    let c = ContactChart::darboux(1);
    let factors = ["2 + q^2", "exp(p - z)", "-(3 + cos(q*p))"];
    let samples = points(100, 20);
    for (k, source) in factors.iter().enumerate() {
        let a = c.parse(source).unwrap();
        let rescaled = c.conformal_rescale(&a, &samples).unwrap();
        for ([f, g, _], x) in triples(100, 21 + k as u64).iter().zip(&samples) {
            let xf = c.hamiltonian_field_at(f, x).unwrap();
            let xaf = rescaled.hamiltonian_field_at(&(a.clone() * f.clone()), x).unwrap();
            assert!(max_abs_diff(&xf, &xaf) < 1e-8);

            let lhs = rescaled.jacobi_bracket_at(f, g, x).unwrap();
            let fa = f.clone() / a.clone();
            let ga = g.clone() / a.clone();
            let rhs = a.eval(x).unwrap() * c.jacobi_bracket_at(&fa, &ga, x).unwrap();
            assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
        }
        // Reeb field of the rescaled form is X_{-1/a} on the original chart.
        let inv = Expr::constant(-1.0) / a.clone();
        for x in samples.iter().take(20) {
            let r = rescaled.reeb_at(x).unwrap();
            let expected = c.hamiltonian_field_at(&inv, x).unwrap();
            assert!(max_abs_diff(&r, &expected) < 1e-8);
        }
    }
}

#[test]
fn zero_hamiltonian_generates_nothing() {
    for c in general_charts() {
        let v = c.hamiltonian_field_at(&Expr::constant(0.0), &[0.1, 0.2, 0.3]).unwrap();
        assert!(dot(&v, &v) < 1e-24);
    }
}
