//! Truncated multipole expansions against exact reservoir correlations, and
//! log-log fits of how the gap closes as `lambda -> 0`.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::Sign;
use crate::schwartz::TestFunction;
use crate::wick::{self, ChannelParams, Letter, NoiseChannel, ReservoirChannel};

/// Errors at or below this are treated as quadrature noise.
pub const QUADRATURE_FLOOR: f64 = 1e-13;
pub const MIN_R_SQUARED: f64 = 0.98;
pub const MAX_CORRELATION_WORD: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionPoint {
    pub lambda: f64,
    pub order: usize,
    pub lhs: C64,
    pub rhs: C64,
    pub abs_error: f64,
}

impl ExpansionPoint {
    pub fn new(lambda: f64, order: usize, lhs: C64, rhs: C64) -> Self {
        Self { lambda, order, lhs, rhs, abs_error: (lhs - rhs).norm() }
    }
}

/// Power of `lambda` attached to an order-`n` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Grading {
    /// `lambda^{2n}`: each operator of order `n` carries `lambda^n`.
    LambdaSquared,
    /// `lambda^n` per pair, the alternative reading of the kernel series.
    Lambda,
}

impl Grading {
    /// Slope of the leading omitted term after truncation at `n`.
    pub fn expected_slope(self, n: usize) -> f64 {
        match self {
            Grading::LambdaSquared => 2.0 * n as f64 + 2.0,
            Grading::Lambda => n as f64 + 1.0,
        }
    }

    /// Smallest slope accepted as consistent with the hypothesis.
    pub fn min_slope(self, n: usize) -> f64 {
        self.expected_slope(n) - 0.5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub points: Vec<ExpansionPoint>,
    pub slope: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub grading: Grading,
    pub expected_slope: f64,
    /// Poor fit quality (`r_squared` below 0.98).
    pub flagged: bool,
    pub passed: bool,
}

/// `sum_{n <= order} lambda^{2n} i^n gamma_n int conj(f_minus^(n)) f_plus`;
/// orders with a zero or missing coefficient contribute nothing.
pub fn truncated_pair(
    order: usize,
    lambda: f64,
    f_minus: &TestFunction,
    f_plus: &TestFunction,
    gammas: &[f64],
) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..=order {
        let g = gammas.get(n).copied().unwrap_or(0.0);
        if g != 0.0 {
            acc += wick::noise_pair(n, g, lambda, f_minus, f_plus)?;
        }
    }
    Ok(acc)
}

pub fn kernel_error(
    order: usize,
    lambda: f64,
    f_minus: &TestFunction,
    f_plus: &TestFunction,
    channel: &ReservoirChannel,
    gammas: &[f64],
) -> Result<ExpansionPoint> {
    let lhs = wick::reservoir_pair(&channel.with_lambda(lambda)?, f_minus, f_plus)?;
    let rhs = truncated_pair(order, lambda, f_minus, f_plus, gammas)?;
    Ok(ExpansionPoint::new(lambda, order, lhs, rhs))
}

fn check_word(signs: &[Sign], smears: &[TestFunction]) -> Result<()> {
    if signs.len() != smears.len() {
        return Err(Error::InvalidArgument("one smear per letter required".into()));
    }
    if signs.len() > MAX_CORRELATION_WORD {
        return Err(Error::WordTooLong { len: signs.len(), max: MAX_CORRELATION_WORD });
    }
    let minus = signs.iter().filter(|s| **s == Sign::Minus).count();
    if 2 * minus != signs.len() {
        return Err(Error::InvalidArgument("word must be even with balanced signs".into()));
    }
    Ok(())
}

/// Noise side truncated at `order`: matchings weighted by truncated pairs.
pub fn truncated_correlation(
    signs: &[Sign],
    smears: &[TestFunction],
    order: usize,
    lambda: f64,
    gammas: &[f64],
) -> Result<C64> {
    check_word(signs, smears)?;
    let matchings = wick::enumerate_matchings(signs);
    wick::pair_sum(&matchings, |j, k| truncated_pair(order, lambda, &smears[j], &smears[k], gammas))
}

/// The same quantity summed literally over per-letter order assignments
/// `0..=order`, each a noise-word correlation.
pub fn truncated_correlation_by_orders(
    signs: &[Sign],
    smears: &[TestFunction],
    order: usize,
    lambda: f64,
    gammas: &[f64],
) -> Result<C64> {
    check_word(signs, smears)?;
    let params = ChannelParams::Noise(NoiseChannel::new(gammas.to_vec(), lambda)?);
    let len = signs.len();
    let count = (order + 1).pow(len as u32);
    let mut acc = C64::new(0.0, 0.0);
    for code in 0..count {
        let mut rest = code;
        let mut word = Vec::with_capacity(len);
        for (s, f) in signs.iter().zip(smears) {
            word.push(Letter::noise(*s, rest % (order + 1), f.clone())?);
            rest /= order + 1;
        }
        acc += wick::correlation(&word, &params)?;
    }
    Ok(acc)
}

pub fn correlation_error(
    signs: &[Sign],
    smears: &[TestFunction],
    order: usize,
    lambda: f64,
    channel: &ReservoirChannel,
    gammas: &[f64],
) -> Result<ExpansionPoint> {
    check_word(signs, smears)?;
    let word = signs.iter().zip(smears).map(|(s, f)| Letter::reservoir(*s, f.clone())).collect::<Result<Vec<_>>>()?;
    let lhs = wick::correlation(&word, &ChannelParams::Reservoir(channel.with_lambda(lambda)?))?;
    let rhs = truncated_correlation(signs, smears, order, lambda, gammas)?;
    Ok(ExpansionPoint::new(lambda, order, lhs, rhs))
}

/// Evaluate `point(lambda)` over the grid in parallel, keeping grid order.
pub fn sweep(lambdas: &[f64], point: impl Fn(f64) -> Result<ExpansionPoint> + Sync) -> Result<Vec<ExpansionPoint>> {
    lambdas.par_iter().map(|&l| point(l)).collect()
}

/// Least-squares slope of `log(abs_error)` against `log(lambda)`.
pub fn fit_rate(points: &[ExpansionPoint], grading: Grading) -> Result<RateReport> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    if points.windows(2).any(|w| !(w[1].lambda < w[0].lambda)) || points.iter().any(|p| !(p.lambda > 0.0)) {
        return Err(Error::InvalidArgument("lambdas must be positive and strictly decreasing".into()));
    }
    if points.iter().any(|p| !(p.abs_error > QUADRATURE_FLOOR)) {
        return Err(Error::BelowFloor { floor: QUADRATURE_FLOOR });
    }
    let order = points[0].order;
    if points.iter().any(|p| p.order != order) {
        return Err(Error::InvalidArgument("points must share one truncation order".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.lambda.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.abs_error.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 0.0 };
    let flagged = r_squared < MIN_R_SQUARED;
    Ok(RateReport {
        points: points.to_vec(),
        slope,
        r_squared,
        n_points: points.len(),
        grading,
        expected_slope: grading.expected_slope(order),
        flagged,
        passed: !flagged && slope >= grading.min_slope(order),
    })
}

/// Both gradings fitted to one data set; only the first is asserted on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateComparison {
    pub primary: RateReport,
    pub alternative: RateReport,
}

impl RateComparison {
    pub fn fit(points: &[ExpansionPoint]) -> Result<Self> {
        Ok(Self { primary: fit_rate(points, Grading::LambdaSquared)?, alternative: fit_rate(points, Grading::Lambda)? })
    }
}

pub fn points_csv(points: &[ExpansionPoint]) -> String {
    let mut s = String::from("lambda,N,lhs_re,lhs_im,rhs_re,rhs_im,abs_error\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            crate::fmt_sci(p.lambda),
            p.order,
            crate::fmt_sci(p.lhs.re),
            crate::fmt_sci(p.lhs.im),
            crate::fmt_sci(p.rhs.re),
            crate::fmt_sci(p.rhs.im),
            crate::fmt_sci(p.abs_error)
        );
    }
    s
}
