use multinoise_core::asymptotics::{fit_rate, ExpansionPoint, Grading};
use multinoise_core::schwartz::{indefinite_inner, kernel_form};
use multinoise_core::wick::enumerate_matchings;
use multinoise_core::{Sign, TestFunction, C64};
use proptest::prelude::*;

fn smear() -> impl Strategy<Value = TestFunction> {
    (-2.0..2.0f64, 0.4..1.5f64, -2.0..2.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_map(|(c, w, b, re, im)| TestFunction::gaussian(c, w).modulated(b).scaled(C64::new(1.0 + re, im)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn form_is_hermitian(n in 0usize..5, f in smear(), h in smear()) {
        let fh = indefinite_inner(n, 1.3, &f, &h).unwrap();
        let hf = indefinite_inner(n, 1.3, &h, &f).unwrap();
        let scale = 1.0 + fh.norm();
        prop_assert!((fh - hf.conj()).norm() <= 1e-10 * scale);
    }

    #[test]
    fn even_orders_are_positive(k in 0usize..3, f in smear()) {
        let v = indefinite_inner(2 * k, 0.7, &f, &f).unwrap();
        prop_assert!(v.im.abs() <= 1e-10 * (1.0 + v.re.abs()));
        prop_assert!(v.re >= -1e-12);
    }

    #[test]
    fn gamma_scales_the_form(n in 0usize..4, g in 0.1..5.0f64, f in smear(), h in smear()) {
        let one = indefinite_inner(n, 1.0, &f, &h).unwrap();
        let many = indefinite_inner(n, g, &f, &h).unwrap();
        prop_assert!((many - one * g).norm() <= 1e-12 * (1.0 + many.norm()));
    }

    #[test]
    fn kernel_form_is_sesquilinear(n in 0usize..4, f in smear(), h in smear(), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let z = C64::new(re, im);
        let lhs = kernel_form(n, &f, &h.scaled(z));
        let rhs = kernel_form(n, &f, &h) * z;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        let lhs = kernel_form(n, &f.scaled(z), &h);
        let rhs = kernel_form(n, &f, &h) * z.conj();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn nested_words_have_factorial_matchings(k in 1usize..6) {
        let mut signs = vec![Sign::Minus; k];
        signs.extend(vec![Sign::Plus; k]);
        let count: usize = (1..=k).product();
        prop_assert_eq!(enumerate_matchings(&signs).len(), count);
    }

    #[test]
    fn exact_power_laws_are_recovered(a in 0.01..10.0f64, p in 1.0..6.0f64) {
        let points: Vec<ExpansionPoint> = [0.5, 0.35, 0.25, 0.15]
            .iter()
            .map(|&l: &f64| ExpansionPoint::new(l, 0, C64::new(a * l.powf(p), 0.0), C64::new(0.0, 0.0)))
            .collect();
        let r = fit_rate(&points, Grading::LambdaSquared).unwrap();
        prop_assert!((r.slope - p).abs() <= 1e-9);
        prop_assert!(r.r_squared >= 1.0 - 1e-12);
    }
}
