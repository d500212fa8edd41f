use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stochavg::acceptance::random_poly;
use stochavg::averaging::{action_drift_of, average_field, average_function, rotate};
use stochavg::hamiltonian::orthogonality_residual;
use stochavg::model::{check_nonresonance, parse_field_expr, to_polynomial, FieldExpr};
use stochavg::{ActionVector, AveragingMethod, Complex64, ComplexVec, Frequencies, HamiltonianSpec, RotationVector};

fn expr_text(n: usize) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (1..=n).prop_map(|k| format!("v{k}")),
        (1..=n).prop_map(|k| format!("cv{k}")),
        (1..=n).prop_map(|k| format!("abs2(v{k})")),
        Just("i".to_string()),
        (0u32..8).prop_map(|x| format!("{}", x as f64 * 0.25)),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} - {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}*{b}")),
            (inner.clone(), 0u32..3).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.prop_map(|a| format!("-({a})")),
        ]
    })
}

fn point(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5).prop_map(|(a, b)| Complex64::new(a, b)), n)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

fn random_field(seed: u64, n: usize, degree: u32) -> Vec<FieldExpr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_poly(&mut rng, n, degree, 4).to_expr()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn parse_display_round_trip(text in expr_text(2), v in point(2)) {
        let e = parse_field_expr(&text, 2).unwrap();
        let shown = e.to_string();
        let again = parse_field_expr(&shown, 2).unwrap();
        prop_assert_eq!(again.to_string(), shown);
        prop_assert!(close(e.eval(&v), again.eval(&v), 1e-12));
    }

    #[test]
    fn polynomial_form_matches_tree(text in expr_text(2), v in point(2)) {
        let e = parse_field_expr(&text, 2).unwrap();
        let p = to_polynomial(&e).unwrap();
        prop_assert!(close(p.eval(&v), e.eval(&v), 1e-10), "{} vs {}", p.eval(&v), e.eval(&v));
        let back = p.to_expr();
        prop_assert!(close(back.eval(&v), e.eval(&v), 1e-10));
    }

    #[test]
    fn symbolic_and_quadrature_averages_agree(seed in any::<u64>(), v in point(2)) {
        let field = random_field(seed, 2, 3);
        let a = ComplexVec::new(v).unwrap();
        let s = average_field(&field, &a, AveragingMethod::Symbolic).unwrap();
        let q = average_field(&field, &a, AveragingMethod::Quadrature { grid: 8 }).unwrap();
        for (x, y) in s.iter().zip(q.iter()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn averaged_field_commutes_with_rotations(seed in any::<u64>(), v in point(2), w in prop::collection::vec(-7.0f64..7.0, 2)) {
        let field = random_field(seed, 2, 3);
        let a = ComplexVec::new(v).unwrap();
        let rot = RotationVector::new(w).unwrap();
        let lhs = average_field(&field, &rotate(&rot, &a).unwrap(), AveragingMethod::Symbolic).unwrap();
        let rhs = rotate(&rot, &average_field(&field, &a, AveragingMethod::Symbolic).unwrap()).unwrap();
        for (x, y) in lhs.iter().zip(rhs.iter()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
        let f = &field[0];
        let s1 = average_function(f, &rotate(&rot, &a).unwrap(), AveragingMethod::Symbolic).unwrap();
        let s0 = average_function(f, &a, AveragingMethod::Symbolic).unwrap();
        prop_assert!(close(s1, s0, 1e-12));
    }

    #[test]
    fn hamiltonian_field_leaves_action_drift_unchanged(seed in any::<u64>(), v in point(2)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_poly(&mut rng, 2, 4, 4);
        let h = HamiltonianSpec::new(p.add(&p.conj()).to_expr()).unwrap();
        let a = ComplexVec::new(v).unwrap();
        for r in orthogonality_residual(&h, &a).unwrap() {
            prop_assert!(r.abs() <= 1e-9 * (1.0 + a.norm_sqr()).powi(3));
        }
        let p1 = random_field(seed ^ 1, 2, 2);
        let full: Vec<FieldExpr> = p1
            .iter()
            .zip(h.field().unwrap())
            .map(|(x, y)| to_polynomial(x).unwrap().add(&to_polynomial(&y).unwrap()).to_expr())
            .collect();
        let psi = vec![vec![parse_field_expr("1", 2).unwrap(), parse_field_expr("0", 2).unwrap()], vec![parse_field_expr("0", 2).unwrap(), parse_field_expr("1", 2).unwrap()]];
        let i = ActionVector::from_complex(&a);
        let f_full = action_drift_of(&full, &psi, &i, AveragingMethod::Symbolic).unwrap();
        let f_mod = action_drift_of(&p1, &psi, &i, AveragingMethod::Symbolic).unwrap();
        for (x, y) in f_full.iter().zip(&f_mod) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn nonresonance_is_permutation_invariant(l in prop::collection::vec(0.1f64..3.0, 3), perm in Just([0usize, 1, 2]).prop_shuffle()) {
        let f = Frequencies::new(l.clone()).unwrap();
        let g = Frequencies::new(perm.iter().map(|&k| l[k]).collect()).unwrap();
        let a = check_nonresonance(&f, 4, 1e-9).unwrap();
        let b = check_nonresonance(&g, 4, 1e-9).unwrap();
        prop_assert_eq!(a.resonant, b.resonant);
        prop_assert!((a.min_abs - b.min_abs).abs() <= 1e-12);
        if let Some(w) = &b.witness {
            let dot: f64 = w.iter().zip(g.as_slice()).map(|(k, x)| *k as f64 * x).sum();
            prop_assert!(dot.abs() <= 1e-9);
        }
    }
}

#[test]
fn integer_resonances_are_found_in_any_order() {
    for l in [vec![1.0, 2.0, 3.5], vec![2.0, 3.5, 1.0], vec![3.5, 1.0, 2.0]] {
        let r = check_nonresonance(&Frequencies::new(l).unwrap(), 3, 1e-9).unwrap();
        assert!(r.resonant);
    }
}
