//! Vacuum correlations by sums over admissible pair partitions.
//!
//! A word is read left to right as an operator product acting on the vacuum,
//! `(Omega, A_1 ... A_m Omega)`. A pair `(j, k)` with `j < k` contributes only
//! when letter `j` annihilates and letter `k` creates; the annihilating smear
//! enters conjugated.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::Dispersion;
use crate::error::{Error, Result};
use crate::fock::Sign;
use crate::gamma::{self, SupportReport};
use crate::quad::{self, QuadOptions};
use crate::schwartz::{indefinite_inner, TestFunction};

pub const MAX_WORD_LEN: usize = 12;
/// Relative cutoff for the Fourier-side window of the reservoir pair.
const WINDOW_CUTOFF: f64 = 1e-17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    Noise(usize),
    Reservoir,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Letter {
    pub sign: Sign,
    pub channel: Channel,
    pub smear: TestFunction,
}

impl Letter {
    pub fn new(sign: Sign, channel: Channel, smear: TestFunction) -> Result<Self> {
        if smear.is_zero() {
            return Err(Error::InvalidArgument("letter smear must be nonzero".into()));
        }
        Ok(Self { sign, channel, smear })
    }

    pub fn noise(sign: Sign, n: usize, smear: TestFunction) -> Result<Self> {
        Self::new(sign, Channel::Noise(n), smear)
    }

    pub fn reservoir(sign: Sign, smear: TestFunction) -> Result<Self> {
        Self::new(sign, Channel::Reservoir, smear)
    }
}

/// Index pairs `(j, k)`, `j < k`, zero-based, sorted by `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

/// All perfect matchings of the word positions in which every pair has an
/// annihilator to the left of a creator.
pub fn enumerate_matchings(signs: &[Sign]) -> Vec<Matching> {
    let minus = signs.iter().filter(|s| **s == Sign::Minus).count();
    if signs.len() % 2 == 1 || 2 * minus != signs.len() {
        return Vec::new();
    }
    fn go(signs: &[Sign], used: &mut [bool], current: &mut Vec<(usize, usize)>, out: &mut Vec<Matching>) {
        let Some(i) = used.iter().position(|u| !u) else {
            out.push(Matching { pairs: current.clone() });
            return;
        };
        if signs[i] != Sign::Minus {
            return;
        }
        used[i] = true;
        for k in i + 1..signs.len() {
            if !used[k] && signs[k] == Sign::Plus {
                used[k] = true;
                current.push((i, k));
                go(signs, used, current, out);
                current.pop();
                used[k] = false;
            }
        }
        used[i] = false;
    }
    let mut out = Vec::new();
    go(signs, &mut vec![false; signs.len()], &mut Vec::new(), &mut out);
    out
}

/// Multipole noise channels: `gammas[n]` is the coefficient of order `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseChannel {
    pub gammas: Vec<f64>,
    pub lambda: f64,
}

impl NoiseChannel {
    pub fn new(gammas: Vec<f64>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        Ok(Self { gammas, lambda })
    }

    pub fn gamma(&self, n: usize) -> f64 {
        self.gammas.get(n).copied().unwrap_or(0.0)
    }
}

/// `lambda^{2n} i^n gamma int conj(f_minus^(n)) f_plus dt`.
pub fn noise_pair(n: usize, gamma: f64, lambda: f64, f_minus: &TestFunction, f_plus: &TestFunction) -> Result<C64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    Ok(indefinite_inner(n, gamma, f_minus, f_plus)? * lambda.powi(2 * n as i32))
}

/// Rescaled free reservoir field with coupling `g` of momentum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReservoirChannel {
    pub dispersion: Dispersion,
    pub form_factor: TestFunction,
    pub lambda: f64,
    pub support: SupportReport,
}

impl ReservoirChannel {
    pub fn new(dispersion: Dispersion, form_factor: TestFunction, lambda: f64, support_epsilon: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        dispersion.validate()?;
        let support = gamma::check_support(&dispersion, &form_factor, support_epsilon);
        Ok(Self { dispersion, form_factor, lambda, support })
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        Ok(Self { lambda, ..self.clone() })
    }
}

/// Smeared two-point function of the rescaled reservoir field,
///
/// ```text
/// (2 pi / lambda^2) int dk m(k) |g(k)|^2 conj(f_minus_F(omega / lambda^2)) f_plus_F(omega / lambda^2)
/// ```
///
/// integrated in `k` over the preimage of the frequency window where both
/// transforms are non-negligible, so the `O(lambda^2)` shell is resolved
/// without the `1 / |omega'|` singularity of the energy variable.
pub fn reservoir_pair(ch: &ReservoirChannel, f_minus: &TestFunction, f_plus: &TestFunction) -> Result<C64> {
    let zero = C64::new(0.0, 0.0);
    let l2 = ch.lambda * ch.lambda;
    let fm = f_minus.fourier();
    let fp = f_plus.fourier();
    let (Some((ml, mh)), Some((pl, ph))) = (fm.support(WINDOW_CUTOFF), fp.support(WINDOW_CUTOFF)) else {
        return Ok(zero);
    };
    let (ulo, uhi) = (ml.max(pl), mh.min(ph));
    let Some((glo, ghi)) = gamma::k_range(&ch.dispersion, &ch.form_factor) else {
        return Ok(zero);
    };
    if ulo >= uhi {
        return Ok(zero);
    }
    // Resolution in the frequency variable u, mapped to k through omega'.
    let osc = fm.max_modulation() + fp.max_modulation();
    let mut du = 0.5 * fm.min_width().min(fp.min_width());
    if osc > 0.0 {
        du = du.min(PI / osc);
    }
    let disp = &ch.dispersion;
    let g = &ch.form_factor;
    let integrand = |k: f64| {
        let u = disp.omega(k) / l2;
        (fm.evaluate(u).conj() * fp.evaluate(u)) * (g.evaluate(k).norm_sqr() * disp.measure(k))
    };
    let mut total = zero;
    for (a, b) in disp.preimage(l2 * ulo, l2 * uhi) {
        let (a, b) = (a.max(glo), b.min(ghi));
        if a >= b {
            continue;
        }
        let slope = disp.max_abs_gradient(a, b).max(f64::MIN_POSITIVE);
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-13,
            max_width: (l2 * du / slope).min(0.5 * g.min_width()),
            max_depth: 40,
        };
        total += quad::integrate(integrand, a, b, opts, "reservoir_pair")?.value;
    }
    Ok(total * (2.0 * PI / l2))
}

/// Parameters shared by every letter of a word.
#[derive(Debug, Clone)]
pub enum ChannelParams {
    Noise(NoiseChannel),
    Reservoir(ReservoirChannel),
}

/// Vacuum correlation of a word, summed over admissible matchings.
///
/// Noise pairs of unequal orders, and orders whose coefficient is zero, give
/// zero. Pair values are evaluated in parallel; the sum over matchings runs
/// in enumeration order so results are reproducible bit for bit.
pub fn correlation(word: &[Letter], params: &ChannelParams) -> Result<C64> {
    if word.len() > MAX_WORD_LEN {
        return Err(Error::WordTooLong { len: word.len(), max: MAX_WORD_LEN });
    }
    let consistent = word.iter().all(|l| {
        matches!(
            (l.channel, params),
            (Channel::Noise(_), ChannelParams::Noise(_)) | (Channel::Reservoir, ChannelParams::Reservoir(_))
        )
    });
    if !consistent {
        return Err(Error::MixedChannels);
    }
    let signs: Vec<Sign> = word.iter().map(|l| l.sign).collect();
    let matchings = enumerate_matchings(&signs);
    pair_sum(&matchings, |j, k| pair_value(&word[j], &word[k], params))
}

/// `sum_matchings prod pair(j, k)`, with each distinct pair evaluated once.
pub fn pair_sum(matchings: &[Matching], pair: impl Fn(usize, usize) -> Result<C64> + Sync) -> Result<C64> {
    let mut needed: Vec<(usize, usize)> = matchings.iter().flat_map(|m| m.pairs.iter().copied()).collect();
    needed.sort_unstable();
    needed.dedup();
    let values: Vec<C64> = needed.par_iter().map(|&(j, k)| pair(j, k)).collect::<Result<_>>()?;
    let memo: HashMap<(usize, usize), C64> = needed.into_iter().zip(values).collect();
    let mut total = C64::new(0.0, 0.0);
    for m in matchings {
        let mut prod = C64::new(1.0, 0.0);
        for p in &m.pairs {
            prod *= memo[p];
        }
        total += prod;
    }
    Ok(total)
}

fn pair_value(minus: &Letter, plus: &Letter, params: &ChannelParams) -> Result<C64> {
    match (minus.channel, plus.channel, params) {
        (Channel::Noise(n), Channel::Noise(m), ChannelParams::Noise(ch)) => {
            let gamma = ch.gamma(n);
            if n != m || gamma == 0.0 {
                return Ok(C64::new(0.0, 0.0));
            }
            noise_pair(n, gamma, ch.lambda, &minus.smear, &plus.smear)
        }
        (Channel::Reservoir, Channel::Reservoir, ChannelParams::Reservoir(ch)) => {
            reservoir_pair(ch, &minus.smear, &plus.smear)
        }
        _ => Err(Error::MixedChannels),
    }
}
