use papm_core::expr::parse_expression;
use papm_core::fuzzing::{eval_jet_input, parse_expression_input};
use papm_core::harness::oracles::{expression_gap, GRADIENT_TOL, HESSIAN_TOL};
use proptest::prelude::*;

const COORDS: [&str; 3] = ["x1", "x2", "x3"];

/// Source text of smooth, bounded-growth expressions in `x1..x3`.
fn smooth_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0usize..3).prop_map(|i| format!("x{}", i + 1)),
        (1u32..40).prop_map(|k| format!("{}", k as f64 / 8.0)),
        Just("pi".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) / (2 + sin({b}))")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("tanh({a})")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.clone().prop_map(|a| format!("sqrt(2 + cos({a}))")),
            inner.clone().prop_map(|a| format!("ln(3 + sin({a}))")),
            inner.clone().prop_map(|a| format!("(sin({a}))^2")),
            inner.prop_map(|a| format!("-({a})")),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, 3)
}

proptest! {
    #[test]
    fn parser_is_total(s in "\\PC{0,64}") {
        parse_expression_input(s.as_bytes());
    }

    #[test]
    fn parser_is_total_on_expression_alphabet(s in "[x1234+*/^()sincoeqrtlhap. -]{0,48}") {
        parse_expression_input(s.as_bytes());
    }

    #[test]
    fn jet_evaluation_is_total(bytes in prop::collection::vec(any::<u8>(), 0..96)) {
        eval_jet_input(&bytes);
    }

    #[test]
    fn display_round_trips(src in smooth_expr()) {
        let e = parse_expression(&src, &COORDS).unwrap();
        let again = parse_expression(&e.to_string(), &COORDS).unwrap();
        prop_assert_eq!(again.root(), e.root());
    }

    #[test]
    fn value_of_the_jet_matches_plain_evaluation(src in smooth_expr(), x in point()) {
        let e = parse_expression(&src, &COORDS).unwrap();
        let j = e.jet2(&x).unwrap();
        let v = e.evaluate(&x).unwrap();
        prop_assert!((j.value() - v).abs() <= 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn ad_matches_central_differences(src in smooth_expr(), x in point()) {
        let e = parse_expression(&src, &COORDS).unwrap();
        let gap = expression_gap(&e, &x).unwrap();
        prop_assert!(gap.gradient <= GRADIENT_TOL, "{src} at {x:?}: {gap:?}");
        prop_assert!(gap.hessian <= HESSIAN_TOL, "{src} at {x:?}: {gap:?}");
    }

    #[test]
    fn jets_are_linear(a in smooth_expr(), b in smooth_expr(), x in point()) {
        let ea = parse_expression(&a, &COORDS).unwrap();
        let eb = parse_expression(&b, &COORDS).unwrap();
        let es = parse_expression(&format!("({a}) - 2*({b})"), &COORDS).unwrap();
        let (ja, jb, js) = (ea.jet2(&x).unwrap(), eb.jet2(&x).unwrap(), es.jet2(&x).unwrap());
        let close = |s: f64, u: f64, v: f64| (s - (u - 2.0 * v)).abs() <= 1e-12 * (1.0 + u.abs() + v.abs());
        prop_assert!(close(js.value(), ja.value(), jb.value()));
        for i in 0..3 {
            prop_assert!(close(js.gradient()[i], ja.gradient()[i], jb.gradient()[i]));
            for k in 0..3 {
                prop_assert!(close(js.hessian(i, k), ja.hessian(i, k), jb.hessian(i, k)));
                prop_assert_eq!(js.hessian(i, k).to_bits(), js.hessian(k, i).to_bits());
            }
        }
    }
}

#[test]
fn product_rule_against_closed_form() {
    let e = parse_expression("sin(x1) * x2^2 + exp(x3)", &COORDS).unwrap();
    let x = [0.3, -1.2, 0.5];
    let j = e.jet2(&x).unwrap();
    let (s, c) = x[0].sin_cos();
    let want_grad = [c * x[1] * x[1], 2.0 * s * x[1], x[2].exp()];
    for (a, w) in j.gradient().iter().zip(want_grad) {
        assert!((a - w).abs() < 1e-14);
    }
    assert!((j.hessian(0, 0) + s * x[1] * x[1]).abs() < 1e-14);
    assert!((j.hessian(0, 1) - 2.0 * c * x[1]).abs() < 1e-14);
    assert!((j.hessian(1, 1) - 2.0 * s).abs() < 1e-14);
    assert!((j.hessian(2, 2) - x[2].exp()).abs() < 1e-14);
    assert_eq!(j.hessian(0, 2), 0.0);
}
