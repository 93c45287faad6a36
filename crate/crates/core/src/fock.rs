//! Truncated symmetric Fock sectors with an indefinite metric.
//!
//! A [`Sector`] fixes a multipole order `n`, its coefficient `gamma_n`, and a
//! finite one-particle basis `b_1..b_M`. A [`FockVector`] stores, for every
//! particle number `k`, the dense rank-`k` coefficient tensor `T` with
//! `f_k(t_1..t_k) = sum T[a_1..a_k] b_{a_1}(t_1)...b_{a_k}(t_k)`, indices
//! row-major with the first slot slowest.
//!
//! Inner products contract tensor powers slot by slot with the sector's
//! `pairing` matrix (indefinite metric) or `gram` matrix (positive form),
//! without extra factorials.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::draws::Draws;
use crate::error::{Error, Result};
use crate::quad;
use crate::schwartz::{self, TestFunction, ENVELOPE_CUTOFF};

pub const SPAN_RESIDUAL_TOL: f64 = 1e-8;
pub const MAX_CONDITION: f64 = 1e10;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    /// Annihilation, `c^-`.
    #[serde(rename = "-")]
    Minus,
    /// Creation, `c^+`.
    #[serde(rename = "+")]
    Plus,
}

impl Sign {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "-" | "minus" => Some(Sign::Minus),
            "+" | "plus" => Some(Sign::Plus),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Plus => '+',
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sector {
    pub n: usize,
    pub gamma: f64,
    pub basis: Vec<TestFunction>,
    /// `(b_a, b_b)_{H_n}`.
    pub gram: DMatrix<C64>,
    /// `<b_a, b_b>` from the commutator kernel with coefficient `gamma`.
    pub pairing: DMatrix<C64>,
    pub particle_cap: usize,
    l2_gram: DMatrix<C64>,
}

impl Sector {
    pub fn build(n: usize, gamma: f64, basis: Vec<TestFunction>, particle_cap: usize) -> Result<Self> {
        if gamma == 0.0 || !gamma.is_finite() {
            return Err(Error::ZeroGamma);
        }
        if basis.is_empty() || particle_cap == 0 {
            return Err(Error::InvalidArgument("sector needs a nonempty basis and particle_cap >= 1".into()));
        }
        let m = basis.len();
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).collect();
        let upper: Vec<C64> =
            pairs.par_iter().map(|&(a, b)| schwartz::weighted_inner(n, &basis[a], &basis[b])).collect::<Result<_>>()?;
        let mut gram = DMatrix::from_element(m, m, ZERO);
        for (&(a, b), v) in pairs.iter().zip(upper) {
            gram[(a, b)] = v;
            gram[(b, a)] = v.conj();
        }
        for a in 0..m {
            gram[(a, a)].im = 0.0;
        }
        let condition = condition_number(&gram);
        if !(condition < MAX_CONDITION) {
            return Err(Error::IllConditionedBasis { condition });
        }
        let pairing = DMatrix::from_fn(m, m, |a, b| schwartz::kernel_form(n, &basis[a], &basis[b]) * gamma);
        let l2_gram = DMatrix::from_fn(m, m, |a, b| schwartz::l2_inner(&basis[a], &basis[b]));
        Ok(Self { n, gamma, basis, gram, pairing, particle_cap, l2_gram })
    }

    /// `M` normalized Hermite functions `psi_0..psi_{M-1}`.
    pub fn hermite(n: usize, gamma: f64, m: usize, particle_cap: usize) -> Result<Self> {
        Self::build(n, gamma, (0..m).map(TestFunction::hermite_function).collect(), particle_cap)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Replace the pairing matrix by its transpose. Used to check that the
    /// representation suites catch a corrupted metric.
    pub fn with_transposed_pairing(mut self) -> Self {
        self.pairing = self.pairing.transpose();
        self
    }

    /// Coordinates of `f` in the basis; fails when `f` leaves the span.
    pub fn coordinates(&self, f: &TestFunction) -> Result<Vec<C64>> {
        let m = self.dim();
        let rhs = nalgebra::DVector::from_iterator(m, self.basis.iter().map(|b| schwartz::l2_inner(b, f)));
        let chol = self.l2_gram.clone().cholesky().ok_or(Error::IllConditionedBasis { condition: f64::INFINITY })?;
        let c: Vec<C64> = chol.solve(&rhs).iter().copied().collect();
        let residual = self.span_residual(f, &c);
        if !(residual <= SPAN_RESIDUAL_TOL) {
            return Err(Error::NotInSpan { residual });
        }
        Ok(c)
    }

    /// Relative `L^2` distance between `f` and `sum c_a b_a`, computed from
    /// pointwise differences so that exact members give roundoff-level values.
    fn span_residual(&self, f: &TestFunction, c: &[C64]) -> f64 {
        let approx = TestFunction::combination(c, &self.basis);
        let hull = [f.support(ENVELOPE_CUTOFF), approx.support(ENVELOPE_CUTOFF)]
            .into_iter()
            .flatten()
            .reduce(|(l0, h0), (l1, h1)| (l0.min(l1), h0.max(h1)));
        let Some((lo, hi)) = hull else {
            return 0.0;
        };
        let mut width = f.min_width().min(approx.min_width());
        let osc = f.max_modulation().max(approx.max_modulation());
        if osc > 0.0 {
            width = width.min(std::f64::consts::PI / osc);
        }
        let (gx, gw) = quad::gauss_legendre(12);
        let panels = ((hi - lo) / (0.5 * width)).ceil().max(1.0) as usize;
        let step = (hi - lo) / panels as f64;
        let (mut diff, mut norm) = (0.0, 0.0);
        for p in 0..panels {
            let c0 = lo + (p as f64 + 0.5) * step;
            for (x, w) in gx.iter().zip(&gw) {
                let t = c0 + 0.5 * step * x;
                let fv = f.evaluate(t);
                let dv = fv - approx.evaluate(t);
                diff += w * dv.norm_sqr();
                norm += w * fv.norm_sqr();
            }
        }
        if norm == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (diff / norm).sqrt()
        }
    }

    /// `v_a = <f, b_a>` for `f = sum c_b b_b`, read off the pairing matrix.
    pub fn pairing_vector(&self, c: &[C64]) -> Vec<C64> {
        let m = self.dim();
        (0..m).map(|a| (0..m).map(|b| c[b].conj() * self.pairing[(b, a)]).sum()).collect()
    }

    /// Slotwise metric operator `gram^-1 pairing` in the basis.
    pub fn metric_matrix(&self) -> Result<DMatrix<C64>> {
        let lu = self.gram.clone().lu();
        lu.solve(&self.pairing).ok_or(Error::IllConditionedBasis { condition: f64::INFINITY })
    }

    pub fn vacuum(&self) -> FockVector {
        FockVector::vacuum(self.n, self.dim())
    }

    pub fn create(&self, f: &TestFunction, phi: &FockVector) -> Result<FockVector> {
        let c = self.coordinates(f)?;
        self.create_coords(&c, phi)
    }

    pub fn annihilate(&self, f: &TestFunction, phi: &FockVector) -> Result<FockVector> {
        let c = self.coordinates(f)?;
        self.annihilate_coords(&c, phi)
    }

    /// `c^+(f)` with `f` given by basis coordinates.
    pub fn create_coords(&self, c: &[C64], phi: &FockVector) -> Result<FockVector> {
        self.check(phi)?;
        let m = self.dim();
        if c.len() != m {
            return Err(Error::InvalidArgument("coordinate vector length differs from basis size".into()));
        }
        let Some(top) = phi.top_rank() else {
            return Ok(FockVector::zero(self.n, m));
        };
        if top + 1 > self.particle_cap {
            return Err(Error::CapacityExceeded { cap: self.particle_cap });
        }
        let mut components = vec![Vec::new(); top + 2];
        components[0] = vec![ZERO];
        for k in 0..=top {
            components[k + 1] = raise(&phi.components[k], k, m, c);
        }
        Ok(FockVector { n: self.n, dim: m, components })
    }

    /// `c^-(f)` with `f` given by basis coordinates.
    pub fn annihilate_coords(&self, c: &[C64], phi: &FockVector) -> Result<FockVector> {
        self.check(phi)?;
        let m = self.dim();
        if c.len() != m {
            return Err(Error::InvalidArgument("coordinate vector length differs from basis size".into()));
        }
        let v = self.pairing_vector(c);
        let top = phi.components.len().saturating_sub(1);
        let mut components: Vec<Vec<C64>> = (1..=top).map(|k| lower(&phi.components[k], k, m, &v)).collect();
        if components.is_empty() {
            components.push(vec![ZERO]);
        }
        Ok(FockVector { n: self.n, dim: m, components })
    }

    /// `<phi, psi>` with the pairing (metric on) or the Gram matrix.
    pub fn fock_inner(&self, phi: &FockVector, psi: &FockVector, use_metric: bool) -> Result<C64> {
        self.check(phi)?;
        self.check(psi)?;
        let kernel = if use_metric { &self.pairing } else { &self.gram };
        let m = self.dim();
        let mut acc = ZERO;
        for k in 0..phi.components.len().min(psi.components.len()) {
            let mut t = psi.components[k].clone();
            for slot in 0..k {
                t = apply_slot(&t, k, m, kernel, slot);
            }
            acc += phi.components[k].iter().zip(&t).map(|(a, b)| a.conj() * b).sum::<C64>();
        }
        Ok(acc)
    }

    /// Positive norm `sqrt((phi, phi))`.
    pub fn norm(&self, phi: &FockVector) -> Result<f64> {
        Ok(self.fock_inner(phi, phi, false)?.re.max(0.0).sqrt())
    }

    /// Apply a one-particle matrix to every slot of every component.
    pub fn lift(&self, matrix: &DMatrix<C64>, phi: &FockVector) -> Result<FockVector> {
        self.check(phi)?;
        let m = self.dim();
        let components = phi
            .components
            .iter()
            .enumerate()
            .map(|(k, comp)| (0..k).fold(comp.clone(), |t, slot| apply_slot(&t, k, m, matrix, slot)))
            .collect();
        Ok(FockVector { components, ..phi.clone() })
    }

    /// A random finite vector with components up to rank `top`.
    pub fn random_vector(&self, draws: &mut Draws, top: usize) -> FockVector {
        let m = self.dim();
        let components = (0..=top).map(|k| random_symmetric(draws, k, m)).collect();
        FockVector { n: self.n, dim: m, components }
    }

    fn check(&self, phi: &FockVector) -> Result<()> {
        if phi.n != self.n || phi.dim != self.dim() {
            return Err(Error::SectorMismatch);
        }
        Ok(())
    }
}

fn condition_number(gram: &DMatrix<C64>) -> f64 {
    let eig = gram.clone().symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Rank-`k` tensor to rank `k + 1` by symmetrized insertion of `c`.
fn raise(t: &[C64], k: usize, m: usize, c: &[C64]) -> Vec<C64> {
    let size = m.pow(k as u32 + 1);
    let scale = 1.0 / ((k + 1) as f64).sqrt();
    let mut out = vec![ZERO; size];
    for (idx, o) in out.iter_mut().enumerate() {
        let mut acc = ZERO;
        // slot p has weight m^(k - p)
        for p in 0..=k {
            let w = m.pow((k - p) as u32);
            let digit = (idx / w) % m;
            let high = idx / (w * m);
            let low = idx % w;
            acc += c[digit] * t[high * w + low];
        }
        *o = acc * scale;
    }
    out
}

/// Rank-`k` tensor to rank `k - 1` by contracting the first slot with `v`.
fn lower(t: &[C64], k: usize, m: usize, v: &[C64]) -> Vec<C64> {
    let rest = m.pow(k as u32 - 1);
    let scale = (k as f64).sqrt();
    (0..rest).map(|r| (0..m).map(|a| v[a] * t[a * rest + r]).sum::<C64>() * scale).collect()
}

fn apply_slot(t: &[C64], k: usize, m: usize, mat: &DMatrix<C64>, slot: usize) -> Vec<C64> {
    let stride = m.pow((k - 1 - slot) as u32);
    let mut out = vec![ZERO; t.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let d = (idx / stride) % m;
        let base = idx - d * stride;
        *o = (0..m).map(|b| mat[(d, b)] * t[base + b * stride]).sum();
    }
    out
}

fn random_symmetric(draws: &mut Draws, k: usize, m: usize) -> Vec<C64> {
    let size = m.pow(k as u32);
    let mut out = vec![ZERO; size];
    for idx in 0..size {
        let mut digits = decode(idx, k, m);
        digits.sort_unstable();
        let canon = encode(&digits, m);
        out[idx] = if canon == idx { draws.complex() } else { out[canon] };
    }
    out
}

fn decode(mut idx: usize, k: usize, m: usize) -> Vec<usize> {
    let mut d = vec![0; k];
    for p in (0..k).rev() {
        d[p] = idx % m;
        idx /= m;
    }
    d
}

fn encode(d: &[usize], m: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * m + x)
}

/// A finite vector of one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    n: usize,
    dim: usize,
    components: Vec<Vec<C64>>,
}

impl FockVector {
    pub fn vacuum(n: usize, dim: usize) -> Self {
        Self { n, dim, components: vec![vec![C64::new(1.0, 0.0)]] }
    }

    pub fn zero(n: usize, dim: usize) -> Self {
        Self { n, dim, components: vec![vec![ZERO]] }
    }

    pub fn sector(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, k: usize) -> Option<&[C64]> {
        self.components.get(k).map(|c| c.as_slice())
    }

    /// Highest particle number with a nonzero coefficient.
    pub fn top_rank(&self) -> Option<usize> {
        self.components.iter().rposition(|c| c.iter().any(|z| z.norm() != 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.top_rank().is_none()
    }

    pub fn is_vacuum(&self) -> bool {
        self.top_rank() == Some(0) && self.components[0][0] == C64::new(1.0, 0.0)
    }

    pub fn scaled(&self, z: C64) -> Self {
        Self { components: self.components.iter().map(|c| c.iter().map(|x| x * z).collect()).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, s: f64) -> Result<Self> {
        if self.n != other.n || self.dim != other.dim {
            return Err(Error::SectorMismatch);
        }
        let len = self.components.len().max(other.components.len());
        let components = (0..len)
            .map(|k| {
                let size = self.dim.pow(k as u32);
                let a = self.components.get(k);
                let b = other.components.get(k);
                (0..size).map(|i| a.map_or(ZERO, |a| a[i]) + b.map_or(ZERO, |b| b[i]) * s).collect()
            })
            .collect();
        Ok(Self { n: self.n, dim: self.dim, components })
    }

    /// Largest deviation of any component from invariance under swapping
    /// two adjacent slots (adjacent swaps generate all permutations).
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.dim;
        let mut worst: f64 = 0.0;
        for (k, comp) in self.components.iter().enumerate() {
            for idx in 0..comp.len() {
                let d = decode(idx, k, m);
                for p in 0..k.saturating_sub(1) {
                    let mut s = d.clone();
                    s.swap(p, p + 1);
                    worst = worst.max((comp[idx] - comp[encode(&s, m)]).norm());
                }
            }
        }
        worst
    }

    /// Debug dump: sector, basis size and dense tensors per particle number.
    pub fn to_json(&self) -> serde_json::Value {
        let comps: Vec<serde_json::Value> = self
            .components
            .iter()
            .enumerate()
            .map(|(k, c)| {
                serde_json::json!({
                    "k": k,
                    "re": c.iter().map(|z| z.re).collect::<Vec<_>>(),
                    "im": c.iter().map(|z| z.im).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({ "sector": self.n, "basis_size": self.dim, "components": comps })
    }
}

/// The tensor product of finitely many non-vacuum sectors; every other
/// sector sits at its vacuum.
#[derive(Debug, Clone)]
pub struct FockSpace {
    sectors: BTreeMap<usize, Sector>,
}

impl FockSpace {
    pub fn new(sectors: impl IntoIterator<Item = Sector>) -> Self {
        Self { sectors: sectors.into_iter().map(|s| (s.n, s)).collect() }
    }

    pub fn sector(&self, n: usize) -> Result<&Sector> {
        self.sectors.get(&n).ok_or(Error::UnknownSector(n))
    }

    pub fn sectors(&self) -> impl Iterator<Item = &Sector> {
        self.sectors.values()
    }

    /// `<Phi, Psi>` with the product metric.
    pub fn multi_inner(&self, phi: &MultiSectorState, psi: &MultiSectorState) -> Result<C64> {
        let mut acc = ZERO;
        for (a, xs) in &phi.terms {
            for (b, ys) in &psi.terms {
                let mut prod = a.conj() * b;
                let keys: std::collections::BTreeSet<usize> = xs.keys().chain(ys.keys()).copied().collect();
                for n in keys {
                    let sector = self.sector(n)?;
                    let vac = sector.vacuum();
                    let x = xs.get(&n).unwrap_or(&vac);
                    let y = ys.get(&n).unwrap_or(&vac);
                    prod *= sector.fock_inner(x, y, true)?;
                }
                acc += prod;
            }
        }
        Ok(acc)
    }

    /// One operator `c^sign_n(f)` acting in sector `n`.
    pub fn apply_letter(
        &self,
        sign: Sign,
        n: usize,
        f: &TestFunction,
        state: &MultiSectorState,
    ) -> Result<MultiSectorState> {
        let sector = self.sector(n)?;
        let c = sector.coordinates(f)?;
        self.apply_letter_coords(sign, n, &c, state)
    }

    pub fn apply_letter_coords(
        &self,
        sign: Sign,
        n: usize,
        c: &[C64],
        state: &MultiSectorState,
    ) -> Result<MultiSectorState> {
        let sector = self.sector(n)?;
        let mut terms = Vec::with_capacity(state.terms.len());
        for (coef, map) in &state.terms {
            let vac = sector.vacuum();
            let current = map.get(&n).unwrap_or(&vac);
            let next = match sign {
                Sign::Plus => sector.create_coords(c, current)?,
                Sign::Minus => sector.annihilate_coords(c, current)?,
            };
            if next.is_zero() {
                continue;
            }
            let mut map = map.clone();
            map.insert(n, next);
            terms.push((*coef, map));
        }
        Ok(MultiSectorState { terms })
    }

    /// Apply a word of letters, rightmost first.
    pub fn apply_word(
        &self,
        letters: &[(Sign, usize, TestFunction)],
        state: &MultiSectorState,
    ) -> Result<MultiSectorState> {
        letters.iter().rev().try_fold(state.clone(), |s, (sign, n, f)| self.apply_letter(*sign, *n, f, &s))
    }
}

/// Finite sum of product vectors over sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSectorState {
    pub terms: Vec<(C64, BTreeMap<usize, FockVector>)>,
}

impl MultiSectorState {
    /// The product of all sector vacua.
    pub fn vacuum() -> Self {
        Self { terms: vec![(C64::new(1.0, 0.0), BTreeMap::new())] }
    }

    pub fn product(coef: C64, vectors: impl IntoIterator<Item = FockVector>) -> Self {
        Self { terms: vec![(coef, vectors.into_iter().map(|v| (v.sector(), v)).collect())] }
    }

    pub fn plus(mut self, other: MultiSectorState) -> Self {
        self.terms.extend(other.terms);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sector(n: usize) -> Sector {
        Sector::hermite(n, 1.0, 4, 3).unwrap()
    }

    #[test]
    fn orthonormal_basis_gives_identity_gram() {
        let s = sector(0);
        for a in 0..4 {
            for b in 0..4 {
                let e = if a == b { 1.0 } else { 0.0 };
                assert!((s.gram[(a, b)] - C64::new(e, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_gamma_rejected() {
        assert!(matches!(Sector::hermite(1, 0.0, 3, 2), Err(Error::ZeroGamma)));
    }

    #[test]
    fn duplicate_basis_is_ill_conditioned() {
        let b = vec![TestFunction::phi0(), TestFunction::phi0()];
        assert!(matches!(Sector::build(0, 1.0, b, 2), Err(Error::IllConditionedBasis { .. })));
    }

    #[test]
    fn create_on_vacuum_gives_coordinates() {
        let s = sector(1);
        let c = vec![C64::new(0.5, 0.1), C64::new(0.0, -1.0), C64::new(0.2, 0.0), C64::new(0.0, 0.0)];
        let v = s.create_coords(&c, &s.vacuum()).unwrap();
        assert_eq!(v.component(1).unwrap(), c.as_slice());
    }

    #[test]
    fn annihilate_vacuum_is_zero() {
        let s = sector(2);
        let v = s.annihilate(&TestFunction::phi0(), &s.vacuum()).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn capacity_is_enforced() {
        let s = Sector::hermite(0, 1.0, 3, 1).unwrap();
        let one = s.create(&TestFunction::phi0(), &s.vacuum()).unwrap();
        assert!(matches!(s.create(&TestFunction::phi0(), &one), Err(Error::CapacityExceeded { cap: 1 })));
    }

    #[test]
    fn out_of_span_rejected() {
        let s = sector(0);
        let far = TestFunction::gaussian(5.0, 0.3);
        assert!(matches!(s.coordinates(&far), Err(Error::NotInSpan { .. })));
        let inside = TestFunction::hermite_function(2).scaled(C64::new(0.0, 2.0));
        let c = s.coordinates(&inside).unwrap();
        assert!((c[2] - C64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn negative_fock_norm_for_dipole_sector() {
        let basis =
            vec![TestFunction::phi0().modulated(-5.0), TestFunction::phi0().modulated(5.0), TestFunction::phi0()];
        let s = Sector::build(1, 1.0, basis, 2).unwrap();
        let f = TestFunction::phi0().modulated(-5.0);
        let v = s.create(&f, &s.vacuum()).unwrap();
        let ip = s.fock_inner(&v, &v, true).unwrap();
        assert!((ip.re + 5.0).abs() < 1e-9 && ip.im.abs() < 1e-9, "{ip}");
        let eig = s.pairing.clone().symmetric_eigenvalues();
        assert!(eig.iter().any(|&e| e < 0.0));
    }

    #[test]
    fn sector_mismatch_detected() {
        let a = sector(0);
        let b = sector(1);
        assert_eq!(a.fock_inner(&a.vacuum(), &b.vacuum(), true), Err(Error::SectorMismatch));
    }

    #[test]
    fn random_vectors_are_symmetric() {
        let s = sector(0);
        let mut d = Draws::new(3);
        let v = s.random_vector(&mut d, 3);
        assert_eq!(v.symmetry_defect(), 0.0);
    }
}
