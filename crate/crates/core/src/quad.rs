//! Gauss–Kronrod and Gauss–Legendre quadrature.
//!
//! The adaptive integrator bisects recursively and sums `left + right` at
//! every node of the tree, so an integrand whose values on `[-b, -a]` are
//! the exact conjugate (or negated conjugate) of those on `[a, b]` produces
//! results with the same exact symmetry. Several structural zeros in the
//! weak-coupling coefficients depend on this.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Kronrod abscissae of the 21-point rule, descending; odd indices are the
/// 10-point Gauss abscissae.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980213581,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Number of integrand evaluations per [`Panel`].
pub const PANEL_POINTS: usize = 21;

/// Tolerances and resolution constraints for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    /// Relative to the integral of `|f|`, not of `f`.
    pub rel_tol: f64,
    /// Panels wider than this are always bisected before error control.
    pub max_width: f64,
    pub max_depth: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-12, max_width: f64::INFINITY, max_depth: 40 }
    }
}

impl QuadOptions {
    pub fn with_max_width(mut self, w: f64) -> Self {
        self.max_width = w;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: C64,
    pub error: f64,
}

/// One Gauss–Kronrod panel `[a, b]`.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
}

/// Result of applying the 21-point rule to one panel.
#[derive(Debug, Clone, Copy)]
pub struct PanelSum {
    pub kronrod: C64,
    pub error: f64,
    pub abs: f64,
}

impl Panel {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// Evaluation points: index `2j` is `c - h x_j`, `2j + 1` is `c + h x_j`
    /// for `j < 10`, and index 20 is the center.
    pub fn nodes(&self) -> [f64; PANEL_POINTS] {
        let c = 0.5 * (self.a + self.b);
        let h = 0.5 * (self.b - self.a);
        let mut out = [0.0; PANEL_POINTS];
        for j in 0..10 {
            out[2 * j] = c - h * XGK[j];
            out[2 * j + 1] = c + h * XGK[j];
        }
        out[20] = c;
        out
    }

    /// Combine values sampled at [`Panel::nodes`].
    pub fn apply(&self, fv: &[C64; PANEL_POINTS]) -> PanelSum {
        let h = 0.5 * (self.b - self.a);
        let fc = fv[20];
        let mut resk = fc * WGK[10];
        let mut resg = C64::new(0.0, 0.0);
        let mut resabs = fc.norm() * WGK[10];
        for j in 0..10 {
            let pair = fv[2 * j] + fv[2 * j + 1];
            resk += pair * WGK[j];
            if j % 2 == 1 {
                resg += pair * WG[j / 2];
            }
            resabs += WGK[j] * (fv[2 * j].norm() + fv[2 * j + 1].norm());
        }
        let mean = resk * 0.5;
        let mut resasc = WGK[10] * (fc - mean).norm();
        for j in 0..10 {
            resasc += WGK[j] * ((fv[2 * j] - mean).norm() + (fv[2 * j + 1] - mean).norm());
        }
        let kronrod = resk * h;
        let resabs = resabs * h.abs();
        let resasc = resasc * h.abs();
        let mut err = ((resk - resg) * h).norm();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        PanelSum { kronrod, error: err, abs: resabs }
    }

    pub fn eval<F: Fn(f64) -> C64>(&self, f: &F) -> PanelSum {
        let xs = self.nodes();
        let fv: [C64; PANEL_POINTS] = std::array::from_fn(|i| f(xs[i]));
        self.apply(&fv)
    }

    pub fn split(&self) -> (Panel, Panel) {
        let m = 0.5 * (self.a + self.b);
        (Panel::new(self.a, m), Panel::new(m, self.b))
    }
}

/// Error estimate below which bisection cannot help: the rule is already
/// at the rounding level of its own absolute sum.
pub fn roundoff_floor(s: &PanelSum) -> f64 {
    51.0 * f64::EPSILON * s.abs
}

/// Bisect `[a, b]` until every panel is at most `max_width` wide, returning
/// leaves in left-to-right order.
pub fn forced_panels(a: f64, b: f64, max_width: f64) -> Vec<Panel> {
    fn go(p: Panel, max_width: f64, depth: usize, out: &mut Vec<Panel>) {
        if p.width() > max_width && depth < 48 {
            let (l, r) = p.split();
            go(l, max_width, depth + 1, out);
            go(r, max_width, depth + 1, out);
        } else {
            out.push(p);
        }
    }
    let mut out = Vec::new();
    if b > a {
        go(Panel::new(a, b), max_width, 0, &mut out);
    }
    out
}

/// Adaptive Gauss–Kronrod integration of a complex integrand over `[a, b]`.
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, opts: QuadOptions, what: &'static str) -> Result<Estimate> {
    if !(b > a) {
        return Ok(Estimate { value: C64::new(0.0, 0.0), error: 0.0 });
    }
    let total = b - a;
    let leaves: Vec<(Panel, PanelSum)> =
        forced_panels(a, b, opts.max_width).into_iter().map(|p| (p, p.eval(&f))).collect();
    let scale: f64 = leaves.iter().map(|(_, s)| s.abs).sum();
    let tol = opts.abs_tol.max(opts.rel_tol * scale);
    let density = tol / total;

    struct Ctx<'a, F> {
        f: &'a F,
        density: f64,
        max_depth: usize,
        leaves: std::slice::Iter<'a, (Panel, PanelSum)>,
        max_width: f64,
    }

    fn refine<F: Fn(f64) -> C64>(ctx: &Ctx<'_, F>, p: Panel, s: PanelSum, depth: usize) -> (C64, f64) {
        if s.error <= ctx.density * p.width() || s.error <= roundoff_floor(&s) || depth >= ctx.max_depth {
            return (s.kronrod, s.error);
        }
        let (l, r) = p.split();
        let sl = l.eval(ctx.f);
        let sr = r.eval(ctx.f);
        let (vl, el) = refine(ctx, l, sl, depth + 1);
        let (vr, er) = refine(ctx, r, sr, depth + 1);
        (vl + vr, el + er)
    }

    // Walk the same bisection tree that produced the leaves so that sums
    // pair up mirror-image subtrees.
    fn walk<F: Fn(f64) -> C64>(ctx: &mut Ctx<'_, F>, p: Panel, depth: usize) -> (C64, f64) {
        if p.width() > ctx.max_width && depth < 48 {
            let (l, r) = p.split();
            let (vl, el) = walk(ctx, l, depth + 1);
            let (vr, er) = walk(ctx, r, depth + 1);
            (vl + vr, el + er)
        } else {
            let (leaf, sum) = *ctx.leaves.next().expect("leaf count mismatch");
            debug_assert_eq!(leaf.a, p.a);
            refine(ctx, leaf, sum, 0)
        }
    }

    let mut ctx = Ctx { f: &f, density, max_depth: opts.max_depth, leaves: leaves.iter(), max_width: opts.max_width };
    let (value, error) = walk(&mut ctx, Panel::new(a, b), 0);
    if !value.re.is_finite() || !value.im.is_finite() || error > 2.0 * tol {
        return Err(Error::QuadratureFailure { what, estimate: error, tolerance: tol });
    }
    Ok(Estimate { value, error })
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions, what: &'static str) -> Result<f64> {
    integrate(|x| C64::new(f(x), 0.0), a, b, opts, what).map(|e| e.value.re)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
