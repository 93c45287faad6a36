use multinoise_core::gamma::{self, check_support, gamma_osc_many, gamma_shell, i_sigma, GammaTable};
use multinoise_core::{Atom, Dimension, Dispersion, DispersionKind, TestFunction, C64};

const SQRT_PI: f64 = 1.772_453_850_905_516;

fn linear() -> Dispersion {
    Dispersion::linear(1.0, 0.0).unwrap()
}

fn quadratic_catalog() -> (Dispersion, TestFunction) {
    (Dispersion::quadratic(1.0, 4.5).unwrap(), TestFunction::gaussian(3.0, 0.45))
}

#[test]
fn linear_i_sigma_matches_gaussian() {
    let d = linear();
    let g = TestFunction::phi0();
    for &s in &[0.0, 0.5, 1.0, 2.5, 4.0, 7.0] {
        let v = i_sigma(&d, &g, s).unwrap();
        let exact = (-s * s / 4.0f64).exp();
        assert!((v - C64::new(exact, 0.0)).norm() <= 1e-8, "sigma {s}: {v}");
    }
}

#[test]
fn linear_gamma_closed_forms() {
    let d = linear();
    let g = TestFunction::phi0();
    let osc = gamma_osc_many(&d, &g, &[0, 1, 2, 3]).unwrap();
    assert!((osc[0] - 2.0 * SQRT_PI).abs() <= 1e-6);
    assert!(osc[1].abs() <= 1e-12);
    assert!((osc[2] + 2.0 * SQRT_PI).abs() <= 1e-6 * 2.0 * SQRT_PI);
    assert!(osc[3].abs() <= 1e-12);
    let shell: Vec<f64> = (0..4).map(|n| gamma_shell(&d, &g, n).unwrap()).collect();
    assert!((shell[0] - 2.0 * SQRT_PI).abs() <= 1e-12);
    assert!((shell[2] + 2.0 * SQRT_PI).abs() <= 1e-7);
}

#[test]
fn linear_shell_matches_pushforward_derivatives() {
    // |g|^2 = e^{-(k-c)^2 / w^2} / (w sqrt(pi)) for a normalized Gaussian;
    // derivatives at 0 via Hermite polynomials.
    let (c, w) = (0.4, 0.9);
    let g = TestFunction::gaussian(c, w);
    let d = linear();
    let u = -c / w;
    let herm = [1.0, 2.0 * u, 4.0 * u * u - 2.0, 8.0 * u.powi(3) - 12.0 * u];
    let base = (-u * u).exp() / (w * SQRT_PI);
    let fact = [1.0, 1.0, 2.0, 6.0];
    for n in 0..4 {
        // d^n/dk^n e^{-u^2} = (-1/w)^n H_n(u) e^{-u^2}
        let deriv = base * (-1.0 / w).powi(n as i32) * herm[n];
        let exact = 2.0 * std::f64::consts::PI / fact[n] * (-1.0f64).powi(n as i32) * deriv;
        let got = gamma_shell(&d, &g, n).unwrap();
        assert!((got - exact).abs() <= 1e-7 * (exact.abs() + 1e-10), "n={n}: {got} vs {exact}");
    }
}

#[test]
fn quadratic_shell_direct_formula() {
    let d = Dispersion::quadratic(1.0, 1.0).unwrap();
    let g = TestFunction::from_atom(C64::new(1.0, 0.0), Atom::gaussian(1.5, 0.3));
    let r = 2f64.sqrt();
    let exact = 2.0 * std::f64::consts::PI * (g.evaluate(r).norm_sqr() + g.evaluate(-r).norm_sqr()) / r;
    let got = gamma_shell(&d, &g, 0).unwrap();
    assert!((got - exact).abs() <= 1e-12 * exact);
}

#[test]
fn empty_shell_gives_zero() {
    let d = Dispersion::quadratic(1.0, -2.0).unwrap();
    let g = TestFunction::gaussian(1.0, 0.5);
    for n in 0..4 {
        assert!(gamma_shell(&d, &g, n).unwrap().abs() <= 1e-10);
    }
}

#[test]
fn quadratic_catalog_routes_agree() {
    let (d, g) = quadratic_catalog();
    assert!(check_support(&d, &g, 1e-10).passed);
    let t = GammaTable::compute(&d, &g, &[0, 1, 2, 3]).unwrap();
    for r in &t.rows {
        assert!(r.rel_diff <= 1e-6, "{r:?}");
    }
    assert!(t.rows[0].gamma_osc >= -1e-12);
}

#[test]
fn realness_through_order_four() {
    for (d, g) in [(linear(), TestFunction::phi0()), quadratic_catalog()] {
        let table = gamma::SigmaTable::build(&d, &g, 4).unwrap();
        for n in 0..=4 {
            let (raw, _) = gamma::gamma_osc_raw(&table, n);
            assert!(raw.im.abs() <= 1e-8 * (raw.re.abs() + 1e-14), "n={n}: {raw}");
        }
    }
}

#[test]
fn decay_beats_fourth_power() {
    let (d, g) = quadratic_catalog();
    let probes: Vec<f64> = [2.0, 4.0, 8.0].iter().map(|&s| gamma::decay_probe(&d, &g, s, 32).unwrap()).collect();
    for w in probes.windows(2) {
        assert!(w[1] <= w[0] / 16.0 || w[1] <= 1e-15, "{probes:?}");
    }
}

#[test]
fn radial_dimension_runs() {
    let d = Dispersion::new(DispersionKind::Quadratic { mass: 1.0, offset: 4.5 }, Dimension::Radial3).unwrap();
    let g = TestFunction::gaussian(3.0, 0.45);
    let t = GammaTable::compute(&d, &g, &[0, 1]).unwrap();
    assert!(t.max_rel_diff() <= 1e-6, "{t:?}");
}

#[test]
fn csv_layout() {
    let t = GammaTable::compute(&linear(), &TestFunction::phi0(), &[0, 1]).unwrap();
    let csv = t.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,gamma_osc,gamma_shell,rel_diff"));
    assert!(lines.next().unwrap().starts_with("0,3.5449077018110"));
}
