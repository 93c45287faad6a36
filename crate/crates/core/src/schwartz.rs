//! Schwartz test functions as finite sums of Gaussian–Hermite atoms.
//!
//! An [`Atom`] with center `c`, width `w`, modulation `m` and Hermite
//! coefficients `a_j` denotes
//!
//! ```text
//! A(t) = sum_j a_j H_j(u) * exp(-u^2 / 2) * exp(i m t),    u = (t - c) / w
//! ```
//!
//! with `H_j` the physicists' Hermite polynomials. The class is closed under
//! differentiation and under the Fourier transform
//! `(F h)(x) = (2 pi)^{-1/2} int exp(i t x) h(t) dt`, both computed exactly on
//! the coefficients. Products of two atoms integrate in closed form, which
//! gives exact `L^2` pairings and polynomial moments; only the `|x|^n`
//! weight for odd `n` needs quadrature.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;
use crate::quad::{self, QuadOptions};

/// Relative envelope level below which an atom is treated as zero when
/// choosing integration ranges.
pub const ENVELOPE_CUTOFF: f64 = 1e-18;

/// `i^n`, exactly.
pub fn i_pow(n: usize) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub center: f64,
    pub width: f64,
    pub modulation: f64,
    /// Hermite-basis coefficients in the local variable `(t - center) / width`.
    pub poly: Vec<C64>,
}

impl Atom {
    pub fn new(center: f64, width: f64, modulation: f64, poly: Vec<C64>) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidArgument(format!("atom width must be positive, got {width}")));
        }
        if poly.is_empty() {
            return Err(Error::InvalidArgument("atom polynomial must be nonempty".into()));
        }
        if poly.len() > poly::MAX_HERMITE_DEGREE + 1 {
            return Err(Error::InvalidArgument(format!(
                "atom polynomial degree {} exceeds {}",
                poly.len() - 1,
                poly::MAX_HERMITE_DEGREE
            )));
        }
        if !center.is_finite() || !modulation.is_finite() {
            return Err(Error::InvalidArgument("atom center and modulation must be finite".into()));
        }
        Ok(Self { center, width, modulation, poly })
    }

    pub fn gaussian(center: f64, width: f64) -> Self {
        Self::new(center, width, 0.0, vec![C64::new(1.0, 0.0)]).expect("valid gaussian")
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn evaluate(&self, t: f64) -> C64 {
        let u = (t - self.center) / self.width;
        let g = 0.5 * u * u;
        if g > 745.0 {
            return C64::new(0.0, 0.0);
        }
        poly::hermite_eval(&self.poly, u) * (-g).exp() * C64::cis(self.modulation * t)
    }

    /// Upper bound on `|A(t)|` built from absolute polynomial coefficients.
    pub fn envelope(&self, t: f64) -> f64 {
        let u = ((t - self.center) / self.width).abs();
        abs_poly_bound(&self.poly, u) * (-0.5 * u * u).exp()
    }

    /// Half-width, in units of `width`, outside which the envelope drops
    /// below `rel` times its peak.
    pub fn radius(&self, rel: f64) -> f64 {
        let bound = |u: f64| abs_poly_bound(&self.poly, u) * (-0.5 * u * u).exp();
        let mut peak: f64 = 0.0;
        let mut u = 0.0;
        let floor = (2.0 * self.degree() as f64 + 1.0).sqrt();
        while u <= floor + 1.0 {
            peak = peak.max(bound(u));
            u += 0.125;
        }
        let mut u = floor;
        while bound(u) > rel * peak && u < 1e3 {
            u += 0.0625;
        }
        u
    }

    fn derivative_once(&self) -> Self {
        let a = &self.poly;
        let d = a.len();
        let mut out = vec![C64::new(0.0, 0.0); d + 1];
        let iw = 1.0 / self.width;
        for (k, o) in out.iter_mut().enumerate() {
            let mut v = C64::new(0.0, 0.0);
            if k + 1 < d {
                v += a[k + 1] * ((k + 1) as f64 * iw);
            }
            if k >= 1 && k - 1 < d {
                v -= a[k - 1] * (0.5 * iw);
            }
            if k < d {
                v += a[k] * C64::new(0.0, self.modulation);
            }
            *o = v;
        }
        Self { poly: out, ..self.clone() }
    }
}

fn abs_poly_bound(a: &[C64], u: f64) -> f64 {
    let table = poly::hermite_table();
    a.iter()
        .enumerate()
        .map(|(j, c)| c.norm() * table[j].iter().enumerate().map(|(i, h)| h.abs() * u.powi(i as i32)).sum::<f64>())
        .sum()
}

/// A finite linear combination of atoms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestFunction {
    pub atoms: Vec<(C64, Atom)>,
}

impl TestFunction {
    pub fn zero() -> Self {
        Self { atoms: Vec::new() }
    }

    pub fn from_atom(coefficient: C64, atom: Atom) -> Self {
        Self { atoms: vec![(coefficient, atom)] }
    }

    /// Normalized Hermite function `psi_j` centered at 0 with unit width.
    pub fn hermite_function(j: usize) -> Self {
        let norm = (2f64.powi(j as i32) * factorial(j) * PI.sqrt()).sqrt().recip();
        let mut poly = vec![C64::new(0.0, 0.0); j + 1];
        poly[j] = C64::new(1.0, 0.0);
        Self::from_atom(C64::new(norm, 0.0), Atom::new(0.0, 1.0, 0.0, poly).expect("valid"))
    }

    /// The unit Gaussian `pi^{-1/4} exp(-t^2 / 2)`.
    pub fn phi0() -> Self {
        Self::hermite_function(0)
    }

    /// `L^2`-normalized Gaussian with the given center and width.
    pub fn gaussian(center: f64, width: f64) -> Self {
        let norm = (PI * width * width).powf(-0.25);
        Self::from_atom(C64::new(norm, 0.0), Atom::gaussian(center, width))
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|(c, _)| c.norm() == 0.0)
    }

    /// Multiply by `exp(i b t)`.
    pub fn modulated(&self, b: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|(c, a)| (*c, Atom { modulation: a.modulation + b, ..a.clone() })).collect(),
        }
    }

    /// `t -> f(t - s)`.
    pub fn shifted(&self, s: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|(c, a)| (c * C64::cis(-a.modulation * s), Atom { center: a.center + s, ..a.clone() }))
                .collect(),
        }
    }

    pub fn scaled(&self, z: C64) -> Self {
        Self { atoms: self.atoms.iter().map(|(c, a)| (c * z, a.clone())).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Self { atoms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// `sum_a coeffs[a] * fns[a]`.
    pub fn combination(coeffs: &[C64], fns: &[TestFunction]) -> Self {
        let mut atoms = Vec::new();
        for (c, f) in coeffs.iter().zip(fns) {
            atoms.extend(f.atoms.iter().map(|(k, a)| (k * c, a.clone())));
        }
        Self { atoms }
    }

    pub fn evaluate(&self, t: f64) -> C64 {
        self.atoms.iter().map(|(c, a)| c * a.evaluate(t)).sum()
    }

    pub fn envelope(&self, t: f64) -> f64 {
        self.atoms.iter().map(|(c, a)| c.norm() * a.envelope(t)).sum()
    }

    pub fn derivative(&self, m: usize) -> Self {
        let mut atoms = self.atoms.clone();
        for _ in 0..m {
            atoms = atoms.into_iter().map(|(c, a)| (c, a.derivative_once())).collect();
        }
        Self { atoms }
    }

    pub fn fourier(&self) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|(c, a)| {
                    let coef = c * a.width * C64::cis(a.modulation * a.center);
                    let poly = a.poly.iter().enumerate().map(|(j, p)| p * i_pow(j)).collect();
                    (coef, Atom { center: -a.modulation, width: 1.0 / a.width, modulation: a.center, poly })
                })
                .collect(),
        }
    }

    /// Interval outside which every atom is below `rel` of its own peak.
    pub fn support(&self, rel: f64) -> Option<(f64, f64)> {
        self.atoms
            .iter()
            .filter(|(c, _)| c.norm() > 0.0)
            .map(|(_, a)| {
                let r = a.radius(rel) * a.width;
                (a.center - r, a.center + r)
            })
            .reduce(|(l0, h0), (l1, h1)| (l0.min(l1), h0.max(h1)))
    }

    pub fn min_width(&self) -> f64 {
        self.atoms.iter().map(|(_, a)| a.width).fold(f64::INFINITY, f64::min)
    }

    /// Largest envelope value over the atom centers.
    pub fn envelope_peak(&self) -> f64 {
        self.atoms.iter().map(|(_, a)| self.envelope(a.center)).fold(0.0, f64::max)
    }

    pub fn max_modulation(&self) -> f64 {
        self.atoms.iter().map(|(_, a)| a.modulation.abs()).fold(0.0, f64::max)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `int t^q conj(A1(t)) A2(t) dt`, coefficients excluded.
fn atom_pair_moment(a1: &Atom, a2: &Atom, q: usize) -> C64 {
    let (c1, w1, m1) = (a1.center, a1.width, a1.modulation);
    let (c2, w2, m2) = (a2.center, a2.width, a2.modulation);
    let (iw1, iw2) = (1.0 / (w1 * w1), 1.0 / (w2 * w2));
    let alpha = 0.5 * (iw1 + iw2);
    let dm = m2 - m1;
    let mu = C64::new((c1 * iw1 + c2 * iw2) / (2.0 * alpha), dm / (2.0 * alpha));
    let dc = c1 - c2;
    let exponent = C64::new(-dc * dc / (2.0 * (w1 * w1 + w2 * w2)) - dm * dm / (4.0 * alpha), mu.re * dm);
    let pref = exponent.exp();
    if pref.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let conj1: Vec<C64> = a1.poly.iter().map(|c| c.conj()).collect();
    let p1 = poly::compose_affine(&poly::hermite_to_monomial(&conj1), mu - c1, w1);
    let p2 = poly::compose_affine(&poly::hermite_to_monomial(&a2.poly), mu - c2, w2);
    let mut prod = poly::mul(&p1, &p2);
    if q > 0 {
        prod = poly::mul(&prod, &poly::binomial_power(mu, q));
    }
    pref * poly::gaussian_integral(&prod, alpha)
}

fn moment(q: usize, f: &TestFunction, h: &TestFunction) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (cf, af) in &f.atoms {
        for (ch, ah) in &h.atoms {
            acc += cf.conj() * ch * atom_pair_moment(af, ah, q);
        }
    }
    acc
}

/// `int conj(f) h dt`.
pub fn l2_inner(f: &TestFunction, h: &TestFunction) -> C64 {
    moment(0, f, h)
}

/// `int x^q conj(f_F(x)) h_F(x) dx` in closed form.
pub fn frequency_moment(q: usize, f: &TestFunction, h: &TestFunction) -> C64 {
    moment(q, &f.fourier(), &h.fourier())
}

/// The positive form `int |x|^n conj(f_F) h_F dx`.
///
/// Even `n` is a closed-form moment; odd `n` is integrated on the two
/// half-lines separately.
pub fn weighted_inner(n: usize, f: &TestFunction, h: &TestFunction) -> Result<C64> {
    if n.is_multiple_of(2) {
        return Ok(frequency_moment(n, f, h));
    }
    let ff = f.fourier();
    let hf = h.fourier();
    let (Some((fl, fh)), Some((hl, hh))) = (ff.support(ENVELOPE_CUTOFF), hf.support(ENVELOPE_CUTOFF)) else {
        return Ok(C64::new(0.0, 0.0));
    };
    let (lo, hi) = (fl.max(hl), fh.min(hh));
    if lo >= hi {
        return Ok(C64::new(0.0, 0.0));
    }
    let osc = ff.max_modulation() + hf.max_modulation();
    let mut max_width = ff.min_width().min(hf.min_width());
    if osc > 0.0 {
        max_width = max_width.min(PI / osc);
    }
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_width, max_depth: 30 };
    let integrand = |x: f64| x.abs().powi(n as i32) * ff.evaluate(x).conj() * hf.evaluate(x);
    let neg = quad::integrate(integrand, lo.min(0.0), hi.min(0.0), opts, "weighted_inner")?;
    let pos = quad::integrate(integrand, lo.max(0.0), hi.max(0.0), opts, "weighted_inner")?;
    Ok(neg.value + pos.value)
}

/// The commutator kernel `i^n gamma int conj(f^(n)(t)) h(t) dt`.
pub fn indefinite_inner(n: usize, gamma: f64, f: &TestFunction, h: &TestFunction) -> Result<C64> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::ZeroGamma);
    }
    Ok(kernel_form(n, f, h) * gamma)
}

/// `i^n int conj(f^(n)) h dt`, the commutator kernel with unit coefficient.
pub fn kernel_form(n: usize, f: &TestFunction, h: &TestFunction) -> C64 {
    i_pow(n) * l2_inner(&f.derivative(n), h)
}

/// Quadrature node layout in the Fourier domain that skips a gap around 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTemplate {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Pointwise Fourier-domain samples of a test function.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<C64>,
}

/// Inner gap half-width of grids.
pub const GRID_GAP: f64 = 1e-10;

impl GridTemplate {
    /// Gauss–Legendre panels on `[-x_max, -gap] U [gap, x_max]`, mirrored
    /// exactly about the origin.
    pub fn symmetric(x_max: f64, gap: f64, panel_width: f64, order: usize) -> Result<Self> {
        if !(gap > 0.0) || !(x_max > gap) || !(panel_width > 0.0) || order == 0 {
            return Err(Error::InvalidArgument("grid needs 0 < gap < x_max and positive panel width".into()));
        }
        let (gx, gw) = quad::gauss_legendre(order);
        let panels = ((x_max - gap) / panel_width).ceil().max(1.0) as usize;
        let step = (x_max - gap) / panels as f64;
        let mut pos = Vec::with_capacity(panels * order);
        let mut posw = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let a = gap + p as f64 * step;
            let b = if p + 1 == panels { x_max } else { gap + (p + 1) as f64 * step };
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in gx.iter().zip(&gw) {
                pos.push(c + h * x);
                posw.push(h * w);
            }
        }
        let mut nodes: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
        let mut weights: Vec<f64> = posw.iter().rev().copied().collect();
        nodes.extend(pos);
        weights.extend(posw);
        Ok(Self { nodes, weights })
    }

    /// A grid covering the Fourier-domain support of every function given.
    pub fn covering(fns: &[&TestFunction]) -> Result<Self> {
        let mut x_max: f64 = 1.0;
        let mut width = f64::INFINITY;
        let mut osc: f64 = 0.0;
        for f in fns {
            let ff = f.fourier();
            if let Some((lo, hi)) = ff.support(ENVELOPE_CUTOFF) {
                x_max = x_max.max(lo.abs()).max(hi.abs());
            }
            width = width.min(ff.min_width());
            osc = osc.max(ff.max_modulation());
        }
        let mut panel = if width.is_finite() { 0.5 * width } else { 0.5 };
        if osc > 0.0 {
            panel = panel.min(PI / (2.0 * osc));
        }
        Self::symmetric(x_max, GRID_GAP, panel, 16)
    }
}

pub fn to_grid(f: &TestFunction, grid: &GridTemplate) -> GridFunction {
    let ff = f.fourier();
    GridFunction {
        nodes: grid.nodes.clone(),
        weights: grid.weights.clone(),
        values: grid.nodes.iter().map(|&x| ff.evaluate(x)).collect(),
    }
}

/// Orientation of the metric operator on odd sectors: `eta_n` multiplies
/// the Fourier transform by `METRIC_SIGN_ODD * sign(x)`. Fixed by
/// [`calibrate_metric_sign`]; even sectors carry the identity metric.
pub const METRIC_SIGN_ODD: f64 = -1.0;

/// Pointwise multiplier of `eta_n` at frequency `x`.
pub fn metric_multiplier(n: usize, x: f64) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        METRIC_SIGN_ODD * x.signum()
    }
}

pub fn metric_apply(n: usize, u: &GridFunction) -> Result<GridFunction> {
    if u.nodes.contains(&0.0) {
        return Err(Error::InvalidArgument("grid nodes must exclude 0".into()));
    }
    Ok(GridFunction {
        values: u.nodes.iter().zip(&u.values).map(|(&x, v)| v * metric_multiplier(n, x)).collect(),
        ..u.clone()
    })
}

/// `eta_+ = (I + eta) / 2` when `positive`, else `eta_- = (I - eta) / 2`.
pub fn metric_projector(n: usize, u: &GridFunction, positive: bool) -> Result<GridFunction> {
    let eu = metric_apply(n, u)?;
    let s = if positive { 1.0 } else { -1.0 };
    Ok(GridFunction { values: u.values.iter().zip(&eu.values).map(|(a, b)| (a + b * s) * 0.5).collect(), ..u.clone() })
}

/// `sum_i w_i |x_i|^n conj(u_i) v_i`.
pub fn grid_inner(n: usize, u: &GridFunction, v: &GridFunction) -> Result<C64> {
    if u.nodes != v.nodes {
        return Err(Error::InvalidArgument("grid functions on different nodes".into()));
    }
    Ok(u.nodes
        .iter()
        .zip(&u.weights)
        .zip(u.values.iter().zip(&v.values))
        .map(|((x, w), (a, b))| a.conj() * b * (w * x.abs().powi(n as i32)))
        .sum())
}

/// Determine which orientation `s in {+1, -1}` of `eta = s * F^-1 sign F`
/// reproduces the commutator kernel on sector `n`, by evaluating both on a
/// witness pair. Even sectors return `+1` (identity metric).
pub fn calibrate_metric_sign(n: usize) -> Result<f64> {
    if n.is_multiple_of(2) {
        return Ok(1.0);
    }
    let f = TestFunction::phi0().modulated(-1.5);
    let h = TestFunction::gaussian(0.4, 0.8).modulated(-0.7);
    let grid = GridTemplate::covering(&[&f, &h])?;
    let (gf, gh) = (to_grid(&f, &grid), to_grid(&h, &grid));
    let target = indefinite_inner(n, 1.0, &f, &h)?;
    let oriented = |s: f64| -> Result<C64> {
        let signed = GridFunction {
            values: gh.nodes.iter().zip(&gh.values).map(|(x, v)| v * (s * x.signum())).collect(),
            ..gh.clone()
        };
        grid_inner(n, &gf, &signed)
    };
    for s in [1.0, -1.0] {
        let v = oriented(s)?;
        if (v - target).norm() <= 1e-8 * target.norm().max(1e-300) {
            return Ok(s);
        }
    }
    Err(Error::InvalidArgument(format!("no metric orientation reproduces the sector-{n} kernel")))
}

// JSON: a test function is an array of flat atom records.

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PolyCoefficient {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    coefficient_re: f64,
    #[serde(default)]
    coefficient_im: f64,
    center: f64,
    width: f64,
    #[serde(default)]
    modulation: f64,
    poly: Vec<PolyCoefficient>,
}

impl Serialize for TestFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let records: Vec<AtomRecord> = self
            .atoms
            .iter()
            .map(|(c, a)| AtomRecord {
                coefficient_re: c.re,
                coefficient_im: c.im,
                center: a.center,
                width: a.width,
                modulation: a.modulation,
                poly: a.poly.iter().map(|p| PolyCoefficient::Complex([p.re, p.im])).collect(),
            })
            .collect();
        records.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TestFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let records = Vec::<AtomRecord>::deserialize(d)?;
        let mut atoms = Vec::with_capacity(records.len());
        for r in records {
            let poly = r
                .poly
                .into_iter()
                .map(|p| match p {
                    PolyCoefficient::Real(x) => C64::new(x, 0.0),
                    PolyCoefficient::Complex([re, im]) => C64::new(re, im),
                })
                .collect();
            let atom = Atom::new(r.center, r.width, r.modulation, poly).map_err(serde::de::Error::custom)?;
            atoms.push((C64::new(r.coefficient_re, r.coefficient_im), atom));
        }
        Ok(Self { atoms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn evaluate_unit_gaussian() {
        let v = TestFunction::phi0().evaluate(0.0);
        assert!((v.re - PI.powf(-0.25)).abs() < 1e-15 && v.im == 0.0);
        assert_eq!(TestFunction::zero().evaluate(1.3), C64::new(0.0, 0.0));
    }

    #[test]
    fn evaluate_modulated_gaussian() {
        let v = TestFunction::phi0().modulated(5.0).evaluate(1.0);
        let expect = C64::cis(5.0) * PI.powf(-0.25) * (-0.5f64).exp();
        assert!(close(v, expect, 1e-15));
    }

    #[test]
    fn first_derivative_of_gaussian() {
        let d = TestFunction::phi0().derivative(1);
        for &t in &[-1.2, 0.0, 0.3, 2.5] {
            let expect = -t * TestFunction::phi0().evaluate(t);
            assert!(close(d.evaluate(t), expect, 1e-14));
        }
        assert_eq!(TestFunction::phi0().derivative(0), TestFunction::phi0());
    }

    #[test]
    fn fourier_fixes_phi0_and_moves_modulation() {
        let f = TestFunction::phi0();
        for &x in &[-2.0, 0.1, 1.7] {
            assert!(close(f.fourier().evaluate(x), f.evaluate(x), 1e-15));
        }
        let fm = TestFunction::phi0().modulated(2.0).fourier();
        assert_eq!(fm.atoms[0].1.center, -2.0);
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let p0 = TestFunction::hermite_function(0);
        let p1 = TestFunction::hermite_function(1);
        let p3 = TestFunction::hermite_function(3);
        assert!(close(l2_inner(&p0, &p0), C64::new(1.0, 0.0), 1e-14));
        assert!(l2_inner(&p0, &p1).norm() < 1e-15);
        assert!(close(l2_inner(&p3, &p3), C64::new(1.0, 0.0), 1e-13));
    }

    #[test]
    fn weighted_inner_examples() {
        let p0 = TestFunction::phi0();
        assert!(close(weighted_inner(0, &p0, &p0).unwrap(), C64::new(1.0, 0.0), 1e-14));
        let w1 = weighted_inner(1, &p0, &p0).unwrap();
        assert!((w1.re - 1.0 / PI.sqrt()).abs() < 1e-12, "{w1}");
        assert!(close(weighted_inner(2, &p0, &p0).unwrap(), C64::new(0.5, 0.0), 1e-14));
    }

    #[test]
    fn negative_norm_witness() {
        let f = TestFunction::phi0().modulated(-5.0);
        let v = indefinite_inner(1, 1.0, &f, &f).unwrap();
        assert!((v.re + 5.0).abs() < 1e-12 && v.im.abs() < 1e-12, "{v}");
        let p0 = TestFunction::phi0();
        assert!(indefinite_inner(1, 1.0, &p0, &p0).unwrap().norm() < 1e-15);
        assert_eq!(indefinite_inner(1, 0.0, &p0, &p0), Err(Error::ZeroGamma));
    }

    #[test]
    fn metric_is_involutive_and_calibrated() {
        assert_eq!(calibrate_metric_sign(1).unwrap(), METRIC_SIGN_ODD);
        assert_eq!(calibrate_metric_sign(3).unwrap(), METRIC_SIGN_ODD);
        let f = TestFunction::gaussian(0.5, 0.7).modulated(1.0);
        let grid = GridTemplate::covering(&[&f]).unwrap();
        let g = to_grid(&f, &grid);
        let twice = metric_apply(1, &metric_apply(1, &g).unwrap()).unwrap();
        assert_eq!(twice.values, g.values);
        let p = metric_projector(1, &g, true).unwrap();
        let pp = metric_projector(1, &p, true).unwrap();
        assert_eq!(p.values, pp.values);
    }

    #[test]
    fn zero_function_grid_is_zero() {
        let grid = GridTemplate::symmetric(5.0, GRID_GAP, 0.5, 8).unwrap();
        let g = to_grid(&TestFunction::zero(), &grid);
        assert!(g.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn json_shape() {
        let f = TestFunction::phi0().modulated(0.5);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("coefficient_re") && s.contains("modulation"));
        let back: TestFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let plain: TestFunction =
            serde_json::from_str(r#"[{"coefficient_re":1,"center":0,"width":1,"poly":[1]}]"#).unwrap();
        assert_eq!(plain.atoms[0].1.poly, vec![C64::new(1.0, 0.0)]);
    }
}
