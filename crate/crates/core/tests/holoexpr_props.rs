use num_complex::Complex64 as C64;
use proptest::prelude::*;
use spinorsurf::holoexpr::{parse, Mode};

const FUNCS: [&str; 5] = ["exp", "sin", "cos", "sinh", "cosh"];

fn real_literal() -> BoxedStrategy<String> {
    prop_oneof![
        (0u32..20).prop_map(|n| n.to_string()),
        (0u32..100).prop_map(|n| format!("{}.{}", n / 10, n % 10)),
        Just("pi".to_string()),
    ]
    .boxed()
}

fn complex_literal() -> BoxedStrategy<String> {
    prop_oneof![
        real_literal(),
        (1u32..5).prop_map(|n| format!("{n}i")),
        Just("i".to_string()),
    ]
    .boxed()
}

fn source(literal: BoxedStrategy<String>, var: BoxedStrategy<String>) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![literal, var];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*", "/"]))
                .prop_map(|(a, b, op)| format!("({a}){op}({b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner.clone(), -2i32..5).prop_map(|(a, n)| format!("({a})^{n}")),
            (inner, prop::sample::select(FUNCS.to_vec()))
                .prop_map(|(a, f)| format!("{f}({a})")),
        ]
    })
}

fn analytic() -> impl Strategy<Value = String> {
    source(complex_literal(), Just("z".to_string()).boxed())
}

fn real() -> impl Strategy<Value = String> {
    source(
        real_literal(),
        prop::sample::select(vec!["x".to_string(), "y".to_string()]).boxed(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn render_round_trips(src in analytic()) {
        let a = parse(&src, Mode::Analytic).unwrap();
        let b = parse(&a.render(), Mode::Analytic).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn render_round_trips_real(src in real()) {
        let a = parse(&src, Mode::RealSmooth).unwrap_or_else(|e| panic!("{src}: {e}"));
        let b = parse(&a.render(), Mode::RealSmooth).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn derivative_matches_central_difference(
        src in analytic(), x in -0.8..0.8f64, y in -0.8..0.8f64
    ) {
        let e = parse(&src, Mode::Analytic).unwrap();
        let d = e.differentiate().unwrap();
        let z = C64::new(x, y);
        let step = 1e-5;
        let (Ok(fp), Ok(fm), Ok(dv)) = (
            e.eval_z(z + step),
            e.eval_z(z - step),
            d.eval_z(z),
        ) else {
            return Ok(());
        };
        // stay away from poles and overflow
        let big = [fp, fm, dv].iter().any(|v| !v.is_finite() || v.norm() > 1e4);
        prop_assume!(!big);
        let fd = (fp - fm) / (2.0 * step);
        prop_assert!(
            (fd - dv).norm() <= 1e-6 * dv.norm().max(1.0),
            "{src} at {z}: {dv} vs {fd}"
        );
    }

    #[test]
    fn real_mode_rejects_z(src in real()) {
        let with_z = format!("({src})*z");
        prop_assert!(parse(&with_z, Mode::RealSmooth).is_err());
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..4096)) {
        let s = String::from_utf8_lossy(&bytes);
        let _ = parse(&s, Mode::Analytic);
        let _ = parse(&s, Mode::RealSmooth);
    }

    #[test]
    fn grammar_shaped_noise_never_panics(
        toks in prop::collection::vec(
            prop::sample::select(vec!["z", "x", "(", ")", "+", "-", "*", "/", "^", "2", "1.5", "3i", "exp", "sinh", " ", "i", "pi", "e", ",", "."]),
            0..300
        )
    ) {
        let s: String = toks.concat();
        let _ = parse(&s, Mode::Analytic);
        let _ = parse(&s, Mode::RealSmooth);
    }
}
