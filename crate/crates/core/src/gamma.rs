//! Weak-coupling coefficients
//!
//! ```text
//! gamma_n = (i^n / n!) int dsigma sigma^n I(sigma),   I(sigma) = int dk e^{i sigma omega(k)} |g(k)|^2
//! ```
//!
//! computed two ways: directly from the oscillatory integral (`gamma_osc`,
//! inner `k` integral first, then `sigma` on a truncated symmetric range),
//! and from the pushforward density of `|g|^2` through `omega` on the energy
//! shell (`gamma_shell`), `gamma_n = (2 pi / n!) (-1)^n rho^(n)(0)`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::Dispersion;
use crate::error::{Error, Result};
use crate::quad::{self, Panel, QuadOptions, PANEL_POINTS};
use crate::schwartz::{i_pow, TestFunction};

/// `|g|` relative cutoff defining the `k` integration range; `|g|^2` is then
/// below `1e-18` of its peak outside it.
const FORM_FACTOR_CUTOFF: f64 = 1e-9;
/// `|I(sigma)|` must drop below this fraction of `I(0)`.
const SIGMA_TRUNCATION: f64 = 1e-12;
/// Decay is probed up to this `sigma` before giving up.
const SIGMA_CAP: f64 = 512.0;
const MAX_ORDER: usize = 6;
/// Accuracy of each `I(sigma)` relative to `int |g|^2`; panels of the sigma
/// table are not refined below the noise this leaves.
const I_SIGMA_REL_TOL: f64 = 1e-13;
pub const DEGENERATE_SLOPE: f64 = 1e-6;
pub const REALNESS_TOL: f64 = 1e-8;

/// `k` range carrying the weight `|g|^2`.
pub fn k_range(disp: &Dispersion, g: &TestFunction) -> Option<(f64, f64)> {
    let (lo, hi) = g.support(FORM_FACTOR_CUTOFF)?;
    disp.clip(lo, hi)
}

/// `I(sigma) = int dk e^{i sigma omega(k)} |g(k)|^2` (with the radial measure
/// in the `3d-radial` case).
pub fn i_sigma(disp: &Dispersion, g: &TestFunction, sigma: f64) -> Result<C64> {
    let Some((lo, hi)) = k_range(disp, g) else {
        return Ok(C64::new(0.0, 0.0));
    };
    let mut max_width = 0.5 * g.min_width();
    let osc = sigma.abs() * disp.max_abs_gradient(lo, hi) + 2.0 * g.max_modulation();
    if osc > 0.0 {
        max_width = max_width.min(PI / osc);
    }
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: I_SIGMA_REL_TOL, max_width, max_depth: 30 };
    let f = |k: f64| C64::cis(sigma * disp.omega(k)) * (g.evaluate(k).norm_sqr() * disp.measure(k));
    Ok(quad::integrate(f, lo, hi, opts, "i_sigma")?.value)
}

/// Memo table of `I(sigma)` on mirrored Gauss–Kronrod panels covering
/// `[-sigma_max, sigma_max]`.
#[derive(Debug, Clone)]
pub struct SigmaTable {
    pub sigma_max: f64,
    pub panel_width: f64,
    /// Positive-side panels with values at their nodes, and the values at
    /// the mirrored (negative) panel's nodes.
    panels: Vec<(Panel, [C64; PANEL_POINTS], [C64; PANEL_POINTS])>,
    norm: f64,
}

impl SigmaTable {
    pub fn build(disp: &Dispersion, g: &TestFunction, max_order: usize) -> Result<Self> {
        let norm = i_sigma(disp, g, 0.0)?.re;
        let Some((lo, hi)) = k_range(disp, g) else {
            return Ok(Self { sigma_max: 0.0, panel_width: 1.0, panels: Vec::new(), norm: 0.0 });
        };
        let (wmin, wmax) = disp.image(lo, hi);
        let omega_max = wmin.abs().max(wmax.abs());
        let panel_width = if omega_max > 0.0 { PI / omega_max } else { 1.0 };
        let sigma_max = truncation_point(disp, g, norm, panel_width)?;

        let mut leaves = quad::forced_panels(0.0, sigma_max, panel_width);
        let mut table = Vec::new();
        let mut depth = 0;
        loop {
            let evaluated: Vec<_> = leaves
                .par_iter()
                .map(|p| -> Result<_> {
                    let mirror = Panel::new(-p.b, -p.a);
                    let xs = p.nodes();
                    let ms = mirror.nodes();
                    let mut pos = [C64::new(0.0, 0.0); PANEL_POINTS];
                    let mut neg = [C64::new(0.0, 0.0); PANEL_POINTS];
                    for i in 0..PANEL_POINTS {
                        pos[i] = i_sigma(disp, g, xs[i])?;
                        neg[i] = i_sigma(disp, g, ms[i])?;
                    }
                    Ok((*p, pos, neg))
                })
                .collect::<Result<_>>()?;
            table.extend(evaluated);
            // Refine panels whose error exceeds their share for any order.
            let mut tol = vec![0.0; max_order + 1];
            let mut errs = Vec::with_capacity(table.len());
            for (p, pos, _) in &table {
                let mut e = Vec::with_capacity(max_order + 1);
                for (n, t) in tol.iter_mut().enumerate() {
                    let s = p.apply(&weighted(p, pos, n));
                    *t += s.abs;
                    e.push((s.error, quad::roundoff_floor(&s)));
                }
                errs.push(e);
            }
            let density: Vec<f64> = tol.iter().map(|t| (1e-13 * t).max(1e-300) / sigma_max).collect();
            let mut keep = Vec::new();
            let mut refine = Vec::new();
            for ((p, pos, neg), e) in table.into_iter().zip(errs) {
                let reach = p.a.abs().max(p.b.abs()).max(1.0);
                let bad = e.iter().zip(&density).enumerate().any(|(n, ((err, floor), d))| {
                    let noise = 2.0 * I_SIGMA_REL_TOL * norm * p.width() * reach.powi(n as i32);
                    *err > d * p.width() && *err > floor.max(noise)
                });
                if bad && depth < 12 {
                    let (l, r) = p.split();
                    refine.push(l);
                    refine.push(r);
                } else {
                    keep.push((p, pos, neg));
                }
            }
            table = keep;
            if refine.is_empty() {
                break;
            }
            leaves = refine;
            depth += 1;
        }
        table.sort_by(|a, b| a.0.a.total_cmp(&b.0.a));
        Ok(Self { sigma_max, panel_width, panels: table, norm })
    }

    /// `int sigma^n I(sigma) dsigma` over the table, summed in mirrored
    /// pairs so that the conjugation symmetry of `I` carries through exactly.
    pub fn moment(&self, n: usize) -> (C64, f64) {
        let mut acc = C64::new(0.0, 0.0);
        let mut err = 0.0;
        for (p, pos, neg) in &self.panels {
            let mirror = Panel::new(-p.b, -p.a);
            let sp = p.apply(&weighted(p, pos, n));
            let sm = mirror.apply(&weighted(&mirror, neg, n));
            acc += sp.kronrod + sm.kronrod;
            err += sp.error + sm.error;
        }
        (acc, err)
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }
}

fn weighted(p: &Panel, values: &[C64; PANEL_POINTS], n: usize) -> [C64; PANEL_POINTS] {
    let xs = p.nodes();
    std::array::from_fn(|i| values[i] * xs[i].powi(n as i32))
}

/// Smallest doubling step `S` such that `|I(sigma)|` stays below the
/// truncation level on `[S, 2S]`.
fn truncation_point(disp: &Dispersion, g: &TestFunction, norm: f64, panel_width: f64) -> Result<f64> {
    let bound = SIGMA_TRUNCATION * norm;
    let mut s = 4.0 * panel_width;
    loop {
        let samples: Vec<f64> = (0..=16).map(|j| s * (1.0 + j as f64 / 16.0)).collect();
        let worst = samples
            .par_iter()
            .map(|&x| i_sigma(disp, g, x).map(|v| v.norm()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if worst <= bound {
            return Ok(s);
        }
        if s >= SIGMA_CAP {
            return Err(Error::SlowDecay { sigma: 2.0 * s });
        }
        s *= 2.0;
    }
}

/// Largest `|I(sigma)|` sampled on `[s, 2 s]`.
pub fn decay_probe(disp: &Dispersion, g: &TestFunction, s: f64, samples: usize) -> Result<f64> {
    (0..=samples)
        .map(|j| i_sigma(disp, g, s * (1.0 + j as f64 / samples as f64)).map(|v| v.norm()))
        .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("gamma_n supports n <= {MAX_ORDER}, got {n}")));
    }
    Ok(())
}

/// Raw complex value of `gamma_n` from the oscillatory integral, with its
/// error estimate.
pub fn gamma_osc_raw(table: &SigmaTable, n: usize) -> (C64, f64) {
    let (m, err) = table.moment(n);
    let f = factorial(n);
    (i_pow(n) * m / f, err / f)
}

fn realize(n: usize, raw: C64) -> Result<f64> {
    if raw.im.abs() > REALNESS_TOL * (raw.re.abs() + 1e-14) {
        return Err(Error::ImaginaryResidue { n, re: raw.re, im: raw.im });
    }
    Ok(raw.re)
}

pub fn gamma_osc(disp: &Dispersion, g: &TestFunction, n: usize) -> Result<f64> {
    Ok(gamma_osc_many(disp, g, &[n])?[0])
}

/// `gamma_osc` for several orders sharing one memo table.
pub fn gamma_osc_many(disp: &Dispersion, g: &TestFunction, orders: &[usize]) -> Result<Vec<f64>> {
    for &n in orders {
        check_order(n)?;
    }
    let max_order = orders.iter().copied().max().unwrap_or(0);
    let table = SigmaTable::build(disp, g, max_order)?;
    orders.par_iter().map(|&n| realize(n, gamma_osc_raw(&table, n).0)).collect()
}

/// Pushforward density `rho(E) = sum_{omega(k) = E} m(k) |g(k)|^2 / |omega'(k)|`.
pub fn shell_density(disp: &Dispersion, g: &TestFunction, e: f64) -> f64 {
    disp.roots(e)
        .into_iter()
        .map(|k| {
            let slope = disp.gradient(k).abs();
            let w = g.evaluate(k).norm_sqr() * disp.measure(k);
            if w == 0.0 {
                0.0
            } else {
                w / slope
            }
        })
        .sum()
}

/// Central difference approximation of `rho^(n)(0)` with step `h`. Terms are
/// combined in `(+j, -j)` pairs so that exact parity of `rho` survives.
fn central_difference(rho: &impl Fn(f64) -> f64, n: usize, h: f64) -> f64 {
    let binom = |n: usize, j: usize| -> f64 { (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
    // delta^n f(x) = sum_j (-1)^j C(n, j) f(x + (n/2 - j) h)
    let acc = if n.is_multiple_of(2) {
        let half = n / 2;
        let mut acc = binom(n, half) * if half.is_multiple_of(2) { 1.0 } else { -1.0 } * rho(0.0);
        for j in 0..half {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let off = (half - j) as f64 * h;
            acc += sign * binom(n, j) * (rho(off) + rho(-off));
        }
        acc
    } else {
        // average of delta^n at +h/2 and -h/2: offsets are integers
        // (n+1)/2 - j and (n-1)/2 - j.
        let mut coeff = std::collections::BTreeMap::<i64, f64>::new();
        for j in 0..=n {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = 0.5 * sign * binom(n, j);
            *coeff.entry((n as i64 + 1) / 2 - j as i64).or_default() += c;
            *coeff.entry((n as i64 - 1) / 2 - j as i64).or_default() += c;
        }
        let mut acc = 0.0;
        for (&off, &c) in coeff.range(1..) {
            let x = off as f64 * h;
            acc += c * (rho(x) - rho(-x));
        }
        acc
    };
    acc / h.powi(n as i32)
}

/// Richardson-extrapolated `rho^(n)(0)`; returns value and error estimate.
fn richardson_derivative(rho: &impl Fn(f64) -> f64, n: usize, h0: f64) -> (f64, f64) {
    if n == 0 {
        return (rho(0.0), 0.0);
    }
    const LEVELS: usize = 7;
    let mut t = vec![vec![0.0; LEVELS]; LEVELS];
    let mut best = (f64::NAN, f64::INFINITY);
    for i in 0..LEVELS {
        t[i][0] = central_difference(rho, n, h0 / 2f64.powi(i as i32));
        let mut fac = 1.0;
        for j in 1..=i {
            fac *= 4.0;
            t[i][j] = t[i][j - 1] + (t[i][j - 1] - t[i - 1][j - 1]) / (fac - 1.0);
            let err = (t[i][j] - t[i][j - 1]).abs().max((t[i][j] - t[i - 1][j - 1]).abs());
            if err <= best.1 {
                best = (t[i][j], err);
            }
        }
        if i > 1 && (t[i][i] - t[i - 1][i - 1]).abs() > 2.0 * best.1 {
            break;
        }
    }
    if best.0.is_nan() {
        best = (t[0][0], f64::INFINITY);
    }
    best
}

/// Step size for the shell differences: a fraction of the energy scale over
/// which `rho` varies, kept clear of branch thresholds.
fn shell_step(disp: &Dispersion, g: &TestFunction, n: usize) -> Result<f64> {
    let mut scale: f64 = f64::INFINITY;
    let peak = g.envelope_peak();
    for k in disp.roots(0.0) {
        let slope = disp.gradient(k).abs();
        let weight = g.envelope(k).powi(2) * disp.measure(k).max(1e-300);
        if slope < DEGENERATE_SLOPE && weight > 1e-30 * peak * peak {
            return Err(Error::DegenerateRoot { k, slope });
        }
        if slope > 0.0 {
            scale = scale.min(slope * g.min_width());
            if let crate::dispersion::Dimension::Radial3 = disp.dimension {
                scale = scale.min(slope * k.abs().max(1e-3));
            }
        }
    }
    if !scale.is_finite() {
        scale = 1.0;
    }
    let mut h = 0.1 * scale;
    let reach = (n / 2 + 1) as f64;
    for thr in disp.thresholds() {
        if thr != 0.0 {
            h = h.min(0.5 * thr.abs() / reach);
        }
    }
    Ok(h)
}

/// `gamma_n` from the energy shell.
pub fn gamma_shell(disp: &Dispersion, g: &TestFunction, n: usize) -> Result<f64> {
    Ok(gamma_shell_estimate(disp, g, n)?.0)
}

pub fn gamma_shell_estimate(disp: &Dispersion, g: &TestFunction, n: usize) -> Result<(f64, f64)> {
    check_order(n)?;
    let h0 = shell_step(disp, g, n)?;
    let rho = |e: f64| shell_density(disp, g, e);
    let (d, err) = richardson_derivative(&rho, n, h0);
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let f = 2.0 * PI * sign / factorial(n);
    Ok((f * d, (f * err).abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportReport {
    pub epsilon: f64,
    /// Maximal intervals where the envelope bound of `|g|^2` exceeds epsilon.
    pub effective_support: Vec<(f64, f64)>,
    pub stationary_points: Vec<f64>,
    /// Stationary points inside the effective support.
    pub violations: Vec<f64>,
    pub passed: bool,
}

/// Test that no stationary point of `omega` lies in `{k : |g(k)|^2 > eps}`,
/// using the atom envelope bound of `|g|`.
pub fn check_support(disp: &Dispersion, g: &TestFunction, eps: f64) -> SupportReport {
    let inside = |k: f64| g.envelope(k).powi(2) > eps;
    let stationary = disp.stationary_points();
    let violations: Vec<f64> = stationary.iter().copied().filter(|&k| inside(k)).collect();
    let mut effective_support = Vec::new();
    if let Some((lo, hi)) = g.support(1e-30).and_then(|(l, h)| disp.clip(l, h)) {
        let step = g.min_width() / 64.0;
        let count = ((hi - lo) / step).ceil() as usize;
        let mut open: Option<f64> = None;
        for i in 0..=count {
            let k = (lo + i as f64 * step).min(hi);
            match (inside(k), open) {
                (true, None) => open = Some(k),
                (false, Some(start)) => {
                    effective_support.push((start, k));
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(start) = open {
            effective_support.push((start, hi));
        }
    }
    SupportReport {
        epsilon: eps,
        effective_support,
        passed: violations.is_empty(),
        stationary_points: stationary,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaRow {
    pub n: usize,
    pub gamma_osc: f64,
    pub gamma_shell: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaTable {
    pub rows: Vec<GammaRow>,
}

impl GammaTable {
    pub fn compute(disp: &Dispersion, g: &TestFunction, orders: &[usize]) -> Result<Self> {
        let osc = gamma_osc_many(disp, g, orders)?;
        let shell: Vec<f64> = orders.par_iter().map(|&n| gamma_shell(disp, g, n)).collect::<Result<_>>()?;
        let rows = orders
            .iter()
            .zip(osc.into_iter().zip(shell))
            .map(|(&n, (o, s))| GammaRow { n, gamma_osc: o, gamma_shell: s, rel_diff: relative_difference(o, s) })
            .collect();
        Ok(Self { rows })
    }

    pub fn max_rel_diff(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_diff).fold(0.0, f64::max)
    }

    /// `gamma_osc` values indexed by order; orders absent from the table
    /// are `None`.
    pub fn osc_by_order(&self) -> Vec<Option<f64>> {
        let max = self.rows.iter().map(|r| r.n).max().unwrap_or(0);
        let mut out = vec![None; max + 1];
        for r in &self.rows {
            out[r.n] = Some(r.gamma_osc);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,gamma_osc,gamma_shell,rel_diff\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                r.n,
                crate::fmt_sci(r.gamma_osc),
                crate::fmt_sci(r.gamma_shell),
                crate::fmt_sci(r.rel_diff)
            );
        }
        s
    }
}

/// `|a - b| / (|b| + 1e-10)`.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    (a - b).abs() / (b.abs() + 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_zero_is_squared_norm() {
        let d = Dispersion::linear(1.0, 0.0).unwrap();
        let g = TestFunction::gaussian(0.3, 0.8);
        let v = i_sigma(&d, &g, 0.0).unwrap();
        assert!((v.re - 1.0).abs() < 1e-12 && v.im == 0.0);
    }

    #[test]
    fn conjugation_symmetry() {
        let d = Dispersion::quadratic(1.0, 4.5).unwrap();
        let g = TestFunction::gaussian(3.0, 0.45);
        let a = i_sigma(&d, &g, 2.0).unwrap();
        let b = i_sigma(&d, &g, -2.0).unwrap();
        assert!((a - b.conj()).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn central_differences_of_polynomial() {
        let rho = |e: f64| 1.0 + 2.0 * e - 3.0 * e * e + 0.5 * e.powi(3) + e.powi(4);
        let (d1, _) = richardson_derivative(&rho, 1, 0.1);
        let (d3, _) = richardson_derivative(&rho, 3, 0.1);
        let (d4, _) = richardson_derivative(&rho, 4, 0.1);
        assert!((d1 - 2.0).abs() < 1e-10);
        assert!((d3 - 3.0).abs() < 1e-7);
        assert!((d4 - 24.0).abs() < 1e-6);
    }

    #[test]
    fn order_above_six_rejected() {
        let d = Dispersion::linear(1.0, 0.0).unwrap();
        assert!(gamma_shell(&d, &TestFunction::phi0(), 7).is_err());
    }

    #[test]
    fn support_examples() {
        let q = Dispersion::quadratic(1.0, 1.0).unwrap();
        let g = TestFunction::from_atom(C64::new(1.0, 0.0), crate::schwartz::Atom::gaussian(1.5, 0.3));
        assert!(check_support(&q, &g, 1e-10).passed);
        let g0 = TestFunction::from_atom(C64::new(1.0, 0.0), crate::schwartz::Atom::gaussian(0.0, 0.3));
        let r = check_support(&q, &g0, 1e-10);
        assert!(!r.passed && r.violations == vec![0.0]);
        let l = Dispersion::linear(1.0, 0.0).unwrap();
        assert!(check_support(&l, &g0, 1e-10).passed);
    }
}
