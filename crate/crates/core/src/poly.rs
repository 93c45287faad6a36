//! Small polynomial helpers behind the atom calculus.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

pub(crate) const MAX_HERMITE_DEGREE: usize = 48;

/// Monomial coefficients of the physicists' Hermite polynomials `H_0..=H_48`.
pub(crate) fn hermite_table() -> &'static [Vec<f64>] {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t: Vec<Vec<f64>> = vec![vec![1.0], vec![0.0, 2.0]];
        for k in 1..MAX_HERMITE_DEGREE {
            let mut next = vec![0.0; k + 2];
            for (i, c) in t[k].iter().enumerate() {
                next[i + 1] += 2.0 * c;
            }
            for (i, c) in t[k - 1].iter().enumerate() {
                next[i] -= 2.0 * k as f64 * c;
            }
            t.push(next);
        }
        t
    })
}

/// `sum_j a_j H_j(u)` by the three-term recurrence.
pub(crate) fn hermite_eval(a: &[C64], u: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    let (mut h0, mut h1) = (1.0, 2.0 * u);
    for (j, c) in a.iter().enumerate() {
        let hj = match j {
            0 => 1.0,
            1 => h1,
            _ => {
                let h2 = 2.0 * u * h1 - 2.0 * (j - 1) as f64 * h0;
                h0 = h1;
                h1 = h2;
                h2
            }
        };
        acc += c * hj;
    }
    acc
}

/// Hermite-basis coefficients to monomial coefficients in the same variable.
pub(crate) fn hermite_to_monomial(a: &[C64]) -> Vec<C64> {
    assert!(a.len() <= MAX_HERMITE_DEGREE + 1, "Hermite degree {} above supported maximum", a.len() - 1);
    let table = hermite_table();
    let mut out = vec![C64::new(0.0, 0.0); a.len().max(1)];
    for (j, c) in a.iter().enumerate() {
        for (i, h) in table[j].iter().enumerate() {
            out[i] += c * h;
        }
    }
    out
}

/// Coefficients of `p((s + shift) / scale)` as a polynomial in `s`.
pub(crate) fn compose_affine(p: &[C64], shift: C64, scale: f64) -> Vec<C64> {
    let inv = 1.0 / scale;
    let mut out: Vec<C64> = vec![C64::new(0.0, 0.0)];
    for c in p.iter().rev() {
        // out <- out * (s + shift) / scale + c
        let mut next = vec![C64::new(0.0, 0.0); out.len() + 1];
        for (i, o) in out.iter().enumerate() {
            next[i + 1] += o * inv;
            next[i] += o * shift * inv;
        }
        next[0] += c;
        out = next;
    }
    trim(out)
}

pub(crate) fn mul(p: &[C64], q: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// `(shift + s)^q` in `s`.
pub(crate) fn binomial_power(shift: C64, q: usize) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for _ in 0..q {
        out = mul(&out, &[shift, C64::new(1.0, 0.0)]);
    }
    out
}

/// `int p(s) exp(-alpha s^2) ds` over the real line.
pub(crate) fn gaussian_integral(p: &[C64], alpha: f64) -> C64 {
    let mut moment = (std::f64::consts::PI / alpha).sqrt();
    let mut acc = C64::new(0.0, 0.0);
    for (k, c) in p.iter().enumerate().step_by(2) {
        if k > 0 {
            moment *= (k as f64 - 1.0) / (2.0 * alpha);
        }
        acc += c * moment;
    }
    acc
}

fn trim(mut p: Vec<C64>) -> Vec<C64> {
    while p.len() > 1 && p.last().map(|c| c.norm() == 0.0).unwrap_or(false) {
        p.pop();
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_table_matches_known_polynomials() {
        let t = hermite_table();
        assert_eq!(t[2], vec![-2.0, 0.0, 4.0]);
        assert_eq!(t[3], vec![0.0, -12.0, 0.0, 8.0]);
    }

    #[test]
    fn recurrence_matches_table() {
        let a: Vec<C64> = (0..7).map(|j| C64::new(1.0 / (j + 1) as f64, 0.3 * j as f64)).collect();
        let mono = hermite_to_monomial(&a);
        for &u in &[-1.3, 0.0, 0.4, 2.2] {
            let direct = hermite_eval(&a, u);
            let via: C64 = mono.iter().enumerate().map(|(k, c)| c * u.powi(k as i32)).sum();
            assert!((direct - via).norm() < 1e-12 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn affine_composition() {
        let p = vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 1.0)];
        let shift = C64::new(0.5, -0.25);
        let q = compose_affine(&p, shift, 2.0);
        let s = 0.7;
        let u = (C64::new(s, 0.0) + shift) / 2.0;
        let expect = p[0] + p[1] * u + p[2] * u * u;
        let got: C64 = q.iter().enumerate().map(|(k, c)| c * s.powi(k as i32)).sum();
        assert!((expect - got).norm() < 1e-14);
    }
}
