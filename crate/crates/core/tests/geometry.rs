use std::f64::consts::PI;

use logpot::geometry::*;
use proptest::prelude::*;

#[test]
fn graph_length_converges_at_second_order() {
    let spec = CurveSpec::graph(GraphFunction::sine(0.5, 2.0), -1.0, 1.0);
    let exact = spec.length();
    let errs: Vec<f64> = [50, 100, 200, 400]
        .iter()
        .map(|&n| (sample_curve(&spec, n).unwrap().total_length() - exact).abs())
        .collect();
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!(rate > 1.8, "{errs:?}");
    }
    for (n, e) in [50, 100, 200, 400].iter().zip(&errs) {
        assert!(*e <= 2.0 / (*n as f64).powi(2), "n={n}: {e}");
    }
}

#[test]
fn exact_lengths() {
    let seg = sample_curve(&CurveSpec::segment(-2.0, 3.0), 17).unwrap();
    assert!((seg.total_length() - 5.0).abs() < 1e-14);
    let circle = sample_curve(&CurveSpec::circle([1.0, -2.0], 0.5), 64).unwrap();
    assert!((circle.total_length() - PI).abs() < 1e-13);
    for i in 0..circle.len() {
        let p = circle.point(i);
        assert!((((p[0] - 1.0).powi(2) + (p[1] + 2.0).powi(2)).sqrt() - 0.5).abs() < 1e-15);
    }
}

#[test]
fn union_allocation_is_proportional() {
    let spec = CurveSpec::union(vec![CurveSpec::segment(-3.0, -1.0), CurveSpec::segment(1.0, 2.0)]);
    let c = sample_curve(&spec, 31).unwrap();
    assert_eq!(c.components.len(), 2);
    assert_eq!(c.components[0].nodes, 0..21);
    assert_eq!(c.components[1].nodes, 21..31);
    assert!((c.total_length() - 3.0).abs() < 1e-14);
    assert!(sample_curve(&CurveSpec::union(vec![CurveSpec::segment(0.0, 100.0), CurveSpec::segment(200.0, 201.0)]), 20).is_err());
}

#[test]
fn graph_map_keeps_first_coordinate() {
    let a = GraphFunction::new(vec![
        Profile::Sine {
            amplitude: 0.3,
            frequency: 2.0,
            phase: 0.1,
        },
        Profile::Abs { scale: 0.5 },
    ])
    .unwrap();
    for x in [-3.5, -0.0, 0.0, 1e-300, 2.25, 1e6] {
        let p = graph_map(&a, x);
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].to_bits(), x.to_bits());
        assert_eq!(p[2], 0.5 * x.abs());
    }
}

#[test]
fn mollified_gradient_converges() {
    let cases = [
        (GraphFunction::sine(0.3, 1.5), 0.4),
        (GraphFunction::quadratic(2.0), -1.1),
        (GraphFunction::abs(1.0), 0.5),
    ];
    for (a, x) in cases {
        let exact = a.gradient(x)[0];
        let errs: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&r| (mollified_gradient(&a, x, r).unwrap()[0] - exact).abs())
            .collect();
        assert!(errs[2] < 1e-5, "{errs:?}");
        assert!(errs[1] <= errs[0] && errs[2] <= errs[1], "{errs:?}");
    }
}

#[test]
fn mollified_gradient_of_abs_at_kink_is_zero() {
    let a = GraphFunction::abs(2.0);
    for r in [1.0, 0.1, 1e-4] {
        assert!(mollified_gradient(&a, 0.0, r).unwrap()[0].abs() < 1e-14);
    }
    // Fully inside one side of the kink the average is exact.
    assert!((mollified_gradient(&a, 0.5, 0.25).unwrap()[0] - 2.0).abs() < 1e-14);
    assert!(mollified_gradient(&a, 0.0, 0.0).is_err());
    assert!(mollified_gradient(&a, 0.0, f64::NAN).is_err());
}

#[test]
fn mollifier_has_unit_mass() {
    let n = 20_000;
    let h = 2.0 / n as f64;
    let mass: f64 = (0..n).map(|i| mollifier(-1.0 + (i as f64 + 0.5) * h)).sum::<f64>() * h;
    assert!((mass - 1.0).abs() < 1e-8);
    assert_eq!(mollifier(1.0), 0.0);
    assert_eq!(mollifier(-1.5), 0.0);
}

#[test]
fn gradient_matches_finite_differences() {
    let a = GraphFunction::new(vec![
        Profile::Sine {
            amplitude: 0.2,
            frequency: 3.0,
            phase: 0.5,
        },
        Profile::Quadratic { coef: -0.7 },
        Profile::Linear { slope: 1.5 },
    ])
    .unwrap();
    for x in [-2.0, -0.3, 0.0, 0.9, 4.0] {
        let h = 1e-6;
        let plus = a.evaluate(x + h);
        let minus = a.evaluate(x - h);
        for (k, g) in a.gradient(x).iter().enumerate() {
            let fd = (plus[k] - minus[k]) / (2.0 * h);
            assert!((fd - g).abs() < 1e-8, "x={x}, k={k}: {fd} vs {g}");
        }
    }
}

#[test]
fn constants_are_exact_or_flagged() {
    let s = GraphFunction::sine(0.05, 2.0);
    assert!(!s.constants_estimated);
    assert!((s.lip_const - 0.1).abs() < 1e-15 && (s.holder_const - 0.2).abs() < 1e-15);
    let q = GraphFunction::quadratic(1.0);
    assert!(q.constants_estimated);
    let (d1, d2) = q.estimate_constants(1.0, (-1.0, 1.0), 7);
    assert!(d1 <= 1.0 && d1 > 0.9);
    assert!((d2 - 1.0).abs() < 1e-9);
}

#[test]
fn curve_json_parsing() {
    let spec = CurveSpec::from_json(r#"{"variant": "segment", "a": -1, "b": 1}"#).unwrap();
    assert_eq!(spec, CurveSpec::segment(-1.0, 1.0));
    let g = CurveSpec::from_json(
        r#"{"variant": "graph", "interval": [-1, 1],
            "function": {"id": "sine", "amplitude": 0.05}}"#,
    )
    .unwrap();
    assert_eq!(g.dim(), 2);
    let round = CurveSpec::from_json(&serde_json::to_string(&g).unwrap()).unwrap();
    assert_eq!(round, g);
    let two = CurveSpec::from_json(
        r#"{"variant": "graph", "interval": [0, 1],
            "function": [{"id": "abs"}, {"id": "linear", "slope": 2}]}"#,
    )
    .unwrap();
    assert_eq!(two.dim(), 3);
    for bad in [
        r#"{"variant": "segment", "a": 1, "b": -1}"#,
        r#"{"variant": "spiral"}"#,
        r#"{"variant": "circle", "center": [0, 0], "radius": 1, "extra": 3}"#,
        r#"{"variant": "circle", "center": [0, 0], "radius": -1}"#,
        r#"{"variant": "segment", "a": 0"#,
    ] {
        assert!(CurveSpec::from_json(bad).is_err(), "{bad}");
    }
}

#[test]
fn tangents_are_unit_and_tangent() {
    let spec = CurveSpec::graph(GraphFunction::sine(0.4, 1.0), -2.0, 2.0);
    let c = sample_curve(&spec, 101).unwrap();
    for i in 0..c.len() {
        let t = c.tangent(i);
        assert!(((t[0] * t[0] + t[1] * t[1]).sqrt() - 1.0).abs() < 1e-14);
        let slope = 0.4 * c.params[i].cos();
        assert!((t[1] / t[0] - slope).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_weights_are_positive_and_sum_to_length(n in 4usize..200, amp in 0.0f64..1.0, lo in -3.0f64..0.0, w in 0.5f64..4.0) {
        let spec = CurveSpec::graph(GraphFunction::sine(amp, 1.0), lo, lo + w);
        let c = sample_curve(&spec, n).unwrap();
        prop_assert_eq!(c.len(), n);
        prop_assert!(c.weights.iter().all(|w| *w > 0.0));
        let err = (c.total_length() - spec.length()).abs();
        prop_assert!(err <= 2.0 * w.powi(3) / (n as f64 - 1.0).powi(2));
        for i in 1..n {
            prop_assert!(c.params[i] > c.params[i - 1]);
        }
    }

    #[test]
    fn mollified_gradient_of_linear_is_exact(slope in -5.0f64..5.0, x in -10.0f64..10.0, r in 1e-4f64..3.0) {
        let g = mollified_gradient(&GraphFunction::linear(slope), x, r).unwrap()[0];
        prop_assert!((g - slope).abs() < 1e-13 * slope.abs().max(1.0));
    }
}
