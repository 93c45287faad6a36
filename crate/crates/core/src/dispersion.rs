//! Reservoir dispersion laws `omega(k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DispersionKind {
    /// `omega(k) = slope * k - offset`.
    Linear { slope: f64, offset: f64 },
    /// `omega(k) = k^2 / (2 mass) - offset`.
    Quadratic { mass: f64, offset: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Dimension {
    #[default]
    #[serde(rename = "1d")]
    One,
    /// Radial reduction of a rotation-invariant problem in three dimensions:
    /// `int d^3k -> 4 pi int_0^inf r^2 dr`.
    #[serde(rename = "3d-radial")]
    Radial3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    #[serde(flatten)]
    pub kind: DispersionKind,
    #[serde(default)]
    pub dimension: Dimension,
}

impl Dispersion {
    pub fn linear(slope: f64, offset: f64) -> Result<Self> {
        Self::new(DispersionKind::Linear { slope, offset }, Dimension::One)
    }

    pub fn quadratic(mass: f64, offset: f64) -> Result<Self> {
        Self::new(DispersionKind::Quadratic { mass, offset }, Dimension::One)
    }

    pub fn new(kind: DispersionKind, dimension: Dimension) -> Result<Self> {
        let d = Self { kind, dimension };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DispersionKind::Linear { slope, offset } => {
                if slope == 0.0 || !slope.is_finite() || !offset.is_finite() {
                    return Err(Error::InvalidArgument("linear dispersion needs a finite nonzero slope".into()));
                }
            }
            DispersionKind::Quadratic { mass, offset } => {
                if !(mass > 0.0) || !mass.is_finite() || !offset.is_finite() {
                    return Err(Error::InvalidArgument("quadratic dispersion needs a positive mass".into()));
                }
            }
        }
        Ok(())
    }

    pub fn omega(&self, k: f64) -> f64 {
        match self.kind {
            DispersionKind::Linear { slope, offset } => slope * k - offset,
            DispersionKind::Quadratic { mass, offset } => 0.5 * k * k / mass - offset,
        }
    }

    pub fn gradient(&self, k: f64) -> f64 {
        match self.kind {
            DispersionKind::Linear { slope, .. } => slope,
            DispersionKind::Quadratic { mass, .. } => k / mass,
        }
    }

    /// Integration measure in `k`: 1 in one dimension, `4 pi k^2` radially.
    pub fn measure(&self, k: f64) -> f64 {
        match self.dimension {
            Dimension::One => 1.0,
            Dimension::Radial3 => 4.0 * std::f64::consts::PI * k * k,
        }
    }

    /// Clip an interval of `k` to the integration domain.
    pub fn clip(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let lo = match self.dimension {
            Dimension::One => lo,
            Dimension::Radial3 => lo.max(0.0),
        };
        (hi > lo).then_some((lo, hi))
    }

    /// Points of the domain where `grad omega = 0`.
    pub fn stationary_points(&self) -> Vec<f64> {
        match self.kind {
            DispersionKind::Linear { .. } => Vec::new(),
            DispersionKind::Quadratic { .. } => vec![0.0],
        }
    }

    /// All `k` in the domain with `omega(k) = e`.
    pub fn roots(&self, e: f64) -> Vec<f64> {
        match self.kind {
            DispersionKind::Linear { slope, offset } => {
                let k = (e + offset) / slope;
                match self.dimension {
                    Dimension::Radial3 if k < 0.0 => Vec::new(),
                    _ => vec![k],
                }
            }
            DispersionKind::Quadratic { mass, offset } => {
                let s = 2.0 * mass * (e + offset);
                if s < 0.0 {
                    return Vec::new();
                }
                let k = s.sqrt();
                match self.dimension {
                    Dimension::One if k > 0.0 => vec![-k, k],
                    _ => vec![k],
                }
            }
        }
    }

    /// Energies where the number of roots changes.
    pub fn thresholds(&self) -> Vec<f64> {
        match (self.kind, self.dimension) {
            (DispersionKind::Quadratic { offset, .. }, _) => vec![-offset],
            (DispersionKind::Linear { offset, .. }, Dimension::Radial3) => vec![-offset],
            (DispersionKind::Linear { .. }, Dimension::One) => Vec::new(),
        }
    }

    /// Range of `omega` over `[lo, hi]`.
    pub fn image(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (a, b) = (self.omega(lo), self.omega(hi));
        let (mut mn, mut mx) = (a.min(b), a.max(b));
        for k in self.stationary_points() {
            if k > lo && k < hi {
                let w = self.omega(k);
                mn = mn.min(w);
                mx = mx.max(w);
            }
        }
        (mn, mx)
    }

    /// `{k : lo <= omega(k) <= hi}` as disjoint intervals, one per monotone
    /// branch, in increasing order.
    pub fn preimage(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        if !(hi >= lo) {
            return Vec::new();
        }
        let mut out = Vec::new();
        match self.kind {
            DispersionKind::Linear { slope, offset } => {
                let (a, b) = ((lo + offset) / slope, (hi + offset) / slope);
                out.push((a.min(b), a.max(b)));
            }
            DispersionKind::Quadratic { mass, offset } => {
                if hi + offset >= 0.0 {
                    let a = (2.0 * mass * (lo + offset).max(0.0)).sqrt();
                    let b = (2.0 * mass * (hi + offset)).sqrt();
                    if self.dimension == Dimension::One {
                        out.push((-b, -a));
                    }
                    out.push((a, b));
                }
            }
        }
        out.into_iter().filter_map(|(a, b)| self.clip(a, b)).collect()
    }

    pub fn max_abs_gradient(&self, lo: f64, hi: f64) -> f64 {
        self.gradient(lo).abs().max(self.gradient(hi).abs())
    }
}
