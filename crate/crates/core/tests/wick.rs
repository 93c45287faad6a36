use multinoise_core::draws::Draws;
use multinoise_core::gamma::{gamma_osc_many, i_sigma};
use multinoise_core::quad::{self, QuadOptions};
use multinoise_core::schwartz::l2_inner;
use multinoise_core::wick::{correlation, enumerate_matchings, reservoir_pair};
use multinoise_core::{
    ChannelParams, Dispersion, FockSpace, Letter, MultiSectorState, NoiseChannel, ReservoirChannel, Sector, Sign,
    TestFunction, C64,
};

fn catalog() -> ReservoirChannel {
    ReservoirChannel::new(Dispersion::quadratic(1.0, 4.5).unwrap(), TestFunction::gaussian(3.0, 0.45), 1.0, 1e-10)
        .unwrap()
}

/// `int ds I(s) int dt conj(f(t)) h(t + s)` by nested quadrature.
fn time_domain(ch: &ReservoirChannel, f: &TestFunction, h: &TestFunction, s_max: f64) -> C64 {
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-11, max_width: 0.1, max_depth: 20 };
    let (lo, hi) = f.support(1e-16).unwrap();
    let cross = |s: f64| {
        quad::integrate(|t| f.evaluate(t).conj() * h.evaluate(t + s), lo, hi, opts.with_max_width(0.25), "cross")
            .unwrap()
            .value
    };
    quad::integrate(
        |s| i_sigma(&ch.dispersion, &ch.form_factor, s).unwrap() * cross(s),
        -s_max,
        s_max,
        opts,
        "time domain",
    )
    .unwrap()
    .value
}

#[test]
fn reservoir_pair_matches_time_domain_at_unit_lambda() {
    let f = TestFunction::gaussian(0.3, 0.8);
    let h = TestFunction::gaussian(-0.2, 1.1).modulated(0.5);
    let ch = catalog();
    let fast = reservoir_pair(&ch, &f, &h).unwrap();
    let slow = time_domain(&ch, &f, &h, 24.0);
    assert!((fast - slow).norm() <= 1e-6 * slow.norm(), "{fast} vs {slow}");

    let lin = ReservoirChannel::new(Dispersion::linear(1.0, 0.0).unwrap(), TestFunction::phi0(), 1.0, 1e-10).unwrap();
    let fast = reservoir_pair(&lin, &f, &h).unwrap();
    let slow = time_domain(&lin, &f, &h, 16.0);
    assert!((fast - slow).norm() <= 1e-6 * slow.norm(), "{fast} vs {slow}");
}

#[test]
fn reservoir_diagonal_is_real_nonnegative() {
    let f = TestFunction::gaussian(0.1, 0.7).modulated(-0.4);
    for lambda in [1.0, 0.5, 0.15] {
        let v = reservoir_pair(&catalog().with_lambda(lambda).unwrap(), &f, &f).unwrap();
        assert!(v.im == 0.0 && v.re >= 0.0, "{v}");
        let word =
            vec![Letter::reservoir(Sign::Minus, f.clone()).unwrap(), Letter::reservoir(Sign::Plus, f.clone()).unwrap()];
        let c = correlation(&word, &ChannelParams::Reservoir(catalog().with_lambda(lambda).unwrap())).unwrap();
        assert_eq!(c, v);
    }
}

#[test]
fn small_lambda_approaches_white_noise() {
    let ch = catalog();
    let gammas = gamma_osc_many(&ch.dispersion, &ch.form_factor, &[0, 1]).unwrap();
    let f = TestFunction::gaussian(0.3, 0.8);
    let h = TestFunction::gaussian(-0.2, 1.1).modulated(0.5);
    let lambda = 0.1;
    let v = reservoir_pair(&ch.with_lambda(lambda).unwrap(), &f, &h).unwrap();
    let limit = l2_inner(&f, &h) * gammas[0];
    // next term of the expansion is lambda^2 gamma_1 (-1) int x conj(f_F) h_F
    let budget =
        2.0 * lambda * lambda * gammas[1].abs() * multinoise_core::schwartz::frequency_moment(1, &f, &h).norm();
    assert!((v - limit).norm() <= budget, "{v} vs {limit}, budget {budget}");
}

fn brute_force_count(signs: &[Sign]) -> usize {
    // Enumerate all perfect matchings of positions, then keep admissible ones.
    fn go(free: &[usize], signs: &[Sign]) -> usize {
        if free.is_empty() {
            return 1;
        }
        let i = free[0];
        let mut total = 0;
        for idx in 1..free.len() {
            let k = free[idx];
            let rest: Vec<usize> = free.iter().copied().filter(|&x| x != i && x != k).collect();
            let admissible = signs[i] == Sign::Minus && signs[k] == Sign::Plus;
            if admissible {
                total += go(&rest, signs);
            }
        }
        total
    }
    if signs.len() % 2 == 1 {
        return 0;
    }
    let free: Vec<usize> = (0..signs.len()).collect();
    go(&free, signs)
}

#[test]
fn matching_counts_match_exhaustive_search() {
    for len in 0..=8usize {
        for mask in 0..(1u32 << len) {
            let signs: Vec<Sign> =
                (0..len).map(|i| if mask >> i & 1 == 1 { Sign::Plus } else { Sign::Minus }).collect();
            let ms = enumerate_matchings(&signs);
            assert_eq!(ms.len(), brute_force_count(&signs), "{signs:?}");
            for m in &ms {
                let mut seen = vec![false; len];
                for &(j, k) in &m.pairs {
                    assert!(j < k && signs[j] == Sign::Minus && signs[k] == Sign::Plus);
                    assert!(!seen[j] && !seen[k]);
                    seen[j] = true;
                    seen[k] = true;
                }
            }
        }
    }
}

fn noise_space(gammas: &[f64], m: usize, cap: usize) -> FockSpace {
    FockSpace::new(gammas.iter().enumerate().map(|(n, &g)| Sector::hermite(n, g, m, cap).unwrap()))
}

#[test]
fn fock_and_wick_agree_on_noise_words() {
    let gammas = [1.3, 0.7, -0.4];
    let m = 4;
    let space = noise_space(&gammas, m, 4);
    let params = ChannelParams::Noise(NoiseChannel::new(gammas.to_vec(), 1.0).unwrap());
    let basis: Vec<TestFunction> = (0..m).map(TestFunction::hermite_function).collect();
    let mut draws = Draws::new(11);
    let mut nonzero = 0;
    for trial in 0..60 {
        let len = 2 * (1 + trial % 3);
        let mut letters = Vec::new();
        let mut word = Vec::new();
        // Even trials are Dyck-shaped with matched orders, so at least one
        // matching survives; odd trials are unconstrained.
        let structured = trial % 2 == 0;
        let mut open: Vec<usize> = Vec::new();
        let mut opens_left = len / 2;
        for _ in 0..len {
            let (sign, n) = if !structured {
                (if draws.uniform() < 0.5 { Sign::Minus } else { Sign::Plus }, draws.index(3))
            } else if opens_left > 0 && (open.is_empty() || draws.uniform() < 0.5) {
                opens_left -= 1;
                let n = draws.index(3);
                open.push(n);
                (Sign::Minus, n)
            } else {
                (Sign::Plus, open.pop().unwrap())
            };
            let coeffs = draws.complex_vec(m);
            let f = TestFunction::combination(&coeffs, &basis);
            letters.push((sign, n, f.clone()));
            word.push(Letter::noise(sign, n, f).unwrap());
        }
        let wick = correlation(&word, &params).unwrap();
        let state = space.apply_word(&letters, &MultiSectorState::vacuum()).unwrap();
        let fock = space.multi_inner(&MultiSectorState::vacuum(), &state).unwrap();
        let scale = wick.norm().max(fock.norm()).max(1.0);
        assert!((wick - fock).norm() <= 1e-8 * scale, "trial {trial}: {wick} vs {fock}");
        if wick.norm() > 1e-6 {
            nonzero += 1;
        }
    }
    assert!(nonzero >= 25, "only {nonzero} nonzero words");
}

#[test]
fn structured_four_letter_word_agrees() {
    let gammas = [1.0, 0.5];
    let space = noise_space(&gammas, 4, 4);
    let params = ChannelParams::Noise(NoiseChannel::new(gammas.to_vec(), 1.0).unwrap());
    let f: Vec<TestFunction> = (0..4).map(TestFunction::hermite_function).collect();
    let spec = [(Sign::Minus, 0, 0), (Sign::Minus, 1, 1), (Sign::Plus, 1, 3), (Sign::Plus, 0, 2)];
    let letters: Vec<_> = spec.iter().map(|&(s, n, j)| (s, n, f[j].clone())).collect();
    let word: Vec<_> = spec.iter().map(|&(s, n, j)| Letter::noise(s, n, f[j].clone()).unwrap()).collect();
    let wick = correlation(&word, &params).unwrap();
    let state = space.apply_word(&letters, &MultiSectorState::vacuum()).unwrap();
    let fock = space.multi_inner(&MultiSectorState::vacuum(), &state).unwrap();
    assert!((wick - fock).norm() <= 1e-8 * wick.norm().max(1e-300));
}

#[test]
fn cross_order_pairs_vanish() {
    let params = ChannelParams::Noise(NoiseChannel::new(vec![1.0, 1.0, 1.0], 1.0).unwrap());
    let f = TestFunction::phi0();
    let word =
        vec![Letter::noise(Sign::Minus, 1, f.clone()).unwrap(), Letter::noise(Sign::Plus, 2, f.clone()).unwrap()];
    assert_eq!(correlation(&word, &params).unwrap(), C64::new(0.0, 0.0));
    let odd = vec![Letter::noise(Sign::Minus, 0, f.clone()).unwrap()];
    assert_eq!(correlation(&odd, &params).unwrap(), C64::new(0.0, 0.0));
}

#[test]
fn two_letter_noise_word_is_the_kernel() {
    let params = ChannelParams::Noise(NoiseChannel::new(vec![0.0, 2.0], 1.0).unwrap());
    let f = TestFunction::gaussian(0.2, 0.9);
    let h = TestFunction::gaussian(-0.1, 1.2).modulated(1.0);
    let word =
        vec![Letter::noise(Sign::Minus, 1, f.clone()).unwrap(), Letter::noise(Sign::Plus, 1, h.clone()).unwrap()];
    let v = correlation(&word, &params).unwrap();
    let expect = multinoise_core::schwartz::indefinite_inner(1, 2.0, &f, &h).unwrap();
    assert_eq!(v, expect);
}
