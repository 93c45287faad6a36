//! Randomized property suites for the Fock representation: commutation
//! relations, pseudo-adjointness, the metric operator, and agreement of
//! Fock-space evaluation with the Wick sum.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::draws::Draws;
use crate::error::Result;
use crate::fock::{FockSpace, FockVector, MultiSectorState, Sector, Sign};
use crate::schwartz::{self, GridTemplate, TestFunction};
use crate::wick::{self, ChannelParams, Letter, NoiseChannel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub trials: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SuiteOutcome {
    fn new(name: &str, trials: usize, max_residual: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), trials, max_residual, tolerance, passed: max_residual <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepCheckReport {
    pub seed: u64,
    pub suites: Vec<SuiteOutcome>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepCheckConfig {
    /// `(n, gamma_n)` for each sector.
    pub sectors: Vec<(usize, f64)>,
    pub basis_size: usize,
    pub particle_cap: usize,
    pub trials: usize,
    pub seed: u64,
    /// Corrupt every pairing matrix by transposition.
    pub transpose_pairing: bool,
    pub algebra_tol: f64,
    pub metric_tol: f64,
}

impl RepCheckConfig {
    pub fn new(sectors: Vec<(usize, f64)>, basis_size: usize, particle_cap: usize, seed: u64) -> Self {
        Self {
            sectors,
            basis_size,
            particle_cap,
            trials: 50,
            seed,
            transpose_pairing: false,
            algebra_tol: 1e-10,
            metric_tol: 1e-8,
        }
    }

    pub fn space(&self) -> Result<FockSpace> {
        let sectors = self
            .sectors
            .iter()
            .map(|&(n, g)| {
                let s = Sector::hermite(n, g, self.basis_size, self.particle_cap)?;
                Ok(if self.transpose_pairing { s.with_transposed_pairing() } else { s })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FockSpace::new(sectors))
    }
}

/// A random element of the sector's span.
fn random_smear(draws: &mut Draws, sector: &Sector) -> TestFunction {
    TestFunction::combination(&draws.complex_vec(sector.dim()), &sector.basis)
}

fn relative(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// `([c-(f), c+(h)] - <f, h>) Phi`, `[c+(f), c+(h)] Phi` and
/// `[c-(f), c-(h)] Phi` measured in the positive norm relative to
/// `1 + |Phi|`. The reference `<f, h>` comes from the test functions, not
/// the sector matrices.
pub fn ccr_suite(cfg: &RepCheckConfig, space: &FockSpace, draws: &mut Draws) -> Result<[SuiteOutcome; 3]> {
    let (mut mixed, mut creators, mut annihilators) = (0.0f64, 0.0f64, 0.0f64);
    let mut trials = 0;
    for sector in space.sectors() {
        let cap = sector.particle_cap;
        for _ in 0..cfg.trials {
            let f = random_smear(draws, sector);
            let h = random_smear(draws, sector);
            let phi = sector.random_vector(draws, cap - 1);
            let scale = 1.0 + sector.norm(&phi)?;
            let kernel = schwartz::indefinite_inner(sector.n, sector.gamma, &f, &h)?;
            let ab = sector.annihilate(&f, &sector.create(&h, &phi)?)?;
            let ba = sector.create(&h, &sector.annihilate(&f, &phi)?)?;
            let r = ab.sub(&ba)?.sub(&phi.scaled(kernel))?;
            mixed = mixed.max(sector.norm(&r)? / scale);

            let low = sector.random_vector(draws, cap.saturating_sub(2));
            let scale = 1.0 + sector.norm(&low)?;
            let fh = sector.create(&f, &sector.create(&h, &low)?)?;
            let hf = sector.create(&h, &sector.create(&f, &low)?)?;
            creators = creators.max(sector.norm(&fh.sub(&hf)?)? / scale);

            let fh = sector.annihilate(&f, &sector.annihilate(&h, &phi)?)?;
            let hf = sector.annihilate(&h, &sector.annihilate(&f, &phi)?)?;
            annihilators = annihilators.max(sector.norm(&fh.sub(&hf)?)? / (1.0 + sector.norm(&phi)?));
            trials += 1;
        }
    }
    let tol = cfg.algebra_tol;
    Ok([
        SuiteOutcome::new("ccr", trials, mixed, tol),
        SuiteOutcome::new("creators_commute", trials, creators, tol),
        SuiteOutcome::new("annihilators_commute", trials, annihilators, tol),
    ])
}

/// `<c-(f) Phi, Psi> = <Phi, c+(f) Psi>` in the indefinite Fock form.
pub fn adjointness_suite(cfg: &RepCheckConfig, space: &FockSpace, draws: &mut Draws) -> Result<SuiteOutcome> {
    let mut worst = 0.0f64;
    let mut trials = 0;
    for sector in space.sectors() {
        let cap = sector.particle_cap;
        for _ in 0..cfg.trials {
            let f = random_smear(draws, sector);
            let phi = sector.random_vector(draws, cap);
            let psi = sector.random_vector(draws, cap - 1);
            let lhs = sector.fock_inner(&sector.annihilate(&f, &phi)?, &psi, true)?;
            let rhs = sector.fock_inner(&phi, &sector.create(&f, &psi)?, true)?;
            worst = worst.max(relative(lhs, rhs));
            trials += 1;
        }
    }
    Ok(SuiteOutcome::new("pseudo_adjointness", trials, worst, cfg.algebra_tol))
}

/// Metric operator checks: exact involution on grids, agreement of the
/// metric-weighted grid form with the commutator kernel, the negative-norm
/// witness on sector 1, and the Fock-level lift of the metric matrix.
pub fn metric_suite(cfg: &RepCheckConfig, space: &FockSpace, draws: &mut Draws) -> Result<[SuiteOutcome; 4]> {
    let (mut involution, mut routes, mut lift) = (0.0f64, 0.0f64, 0.0f64);
    let mut trials = 0;
    for sector in space.sectors() {
        let n = sector.n;
        let eta = sector.metric_matrix()?;
        for _ in 0..cfg.trials {
            let f = draws.test_function();
            let h = draws.test_function();
            let grid = GridTemplate::covering(&[&f, &h])?;
            let (gf, gh) = (schwartz::to_grid(&f, &grid), schwartz::to_grid(&h, &grid));
            let twice = schwartz::metric_apply(n, &schwartz::metric_apply(n, &gh)?)?;
            let defect = twice.values.iter().zip(&gh.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            involution = involution.max(defect);
            let grid_form = schwartz::grid_inner(n, &gf, &schwartz::metric_apply(n, &gh)?)?;
            routes = routes.max(relative(grid_form, schwartz::kernel_form(n, &f, &h)));

            let phi = sector.random_vector(draws, sector.particle_cap);
            let psi = sector.random_vector(draws, sector.particle_cap);
            let on = sector.fock_inner(&phi, &psi, true)?;
            let off = sector.fock_inner(&phi, &sector.lift(&eta, &psi)?, false)?;
            lift = lift.max(relative(on, off));
            trials += 1;
        }
    }
    let witness = TestFunction::phi0().modulated(-5.0);
    let value = schwartz::indefinite_inner(1, 1.0, &witness, &witness)?;
    let witness_residual = (value - C64::new(-5.0, 0.0)).norm();
    Ok([
        SuiteOutcome::new("metric_involution", trials, involution, 0.0),
        SuiteOutcome::new("metric_two_routes", trials, routes, cfg.metric_tol),
        SuiteOutcome::new("negative_norm_witness", 1, witness_residual, 1e-6),
        SuiteOutcome::new("metric_lift", trials, lift, cfg.metric_tol),
    ])
}

/// Random noise words of length 2, 4 and 6 over the configured sectors;
/// half are built so at least one matching has equal orders throughout.
pub fn fock_wick_suite(cfg: &RepCheckConfig, space: &FockSpace, draws: &mut Draws) -> Result<SuiteOutcome> {
    let sectors: Vec<&Sector> = space.sectors().collect();
    let max_order = sectors.iter().map(|s| s.n).max().unwrap_or(0);
    let mut gammas = vec![0.0; max_order + 1];
    for s in &sectors {
        gammas[s.n] = s.gamma;
    }
    // The Wick side uses the functional kernel, so it is independent of
    // the sector matrices.
    let params = ChannelParams::Noise(NoiseChannel::new(gammas, 1.0)?);
    let mut worst = 0.0f64;
    for trial in 0..cfg.trials {
        let len = 2 * (1 + trial % 3);
        let structured = trial % 2 == 0;
        let mut open: Vec<usize> = Vec::new();
        let mut opens_left = len / 2;
        let mut letters = Vec::with_capacity(len);
        let mut word = Vec::with_capacity(len);
        for _ in 0..len {
            let (sign, idx) = if !structured {
                let sign = if draws.uniform() < 0.5 { Sign::Minus } else { Sign::Plus };
                (sign, draws.index(sectors.len()))
            } else if opens_left > 0 && (open.is_empty() || draws.uniform() < 0.5) {
                opens_left -= 1;
                let idx = draws.index(sectors.len());
                open.push(idx);
                (Sign::Minus, idx)
            } else {
                (Sign::Plus, open.pop().expect("balanced word"))
            };
            let sector = sectors[idx];
            let f = random_smear(draws, sector);
            letters.push((sign, sector.n, f.clone()));
            word.push(Letter::noise(sign, sector.n, f)?);
        }
        let wick_value = wick::correlation(&word, &params)?;
        let state = space.apply_word(&letters, &MultiSectorState::vacuum())?;
        let fock_value = space.multi_inner(&MultiSectorState::vacuum(), &state)?;
        worst = worst.max(relative(wick_value, fock_value));
    }
    Ok(SuiteOutcome::new("fock_wick", cfg.trials, worst, cfg.metric_tol))
}

/// Largest permutation-symmetry defect of create/annihilate outputs.
pub fn symmetry_suite(cfg: &RepCheckConfig, space: &FockSpace, draws: &mut Draws) -> Result<SuiteOutcome> {
    let mut worst = 0.0f64;
    let mut trials = 0;
    for sector in space.sectors() {
        for _ in 0..cfg.trials.min(10) {
            let f = random_smear(draws, sector);
            let phi: FockVector = sector.random_vector(draws, sector.particle_cap - 1);
            worst = worst
                .max(sector.create(&f, &phi)?.symmetry_defect())
                .max(sector.annihilate(&f, &phi)?.symmetry_defect());
            trials += 1;
        }
    }
    Ok(SuiteOutcome::new("symmetry", trials, worst, cfg.algebra_tol))
}

/// Run every suite with one seeded stream, in a fixed order.
pub fn run_rep_check(cfg: &RepCheckConfig) -> Result<RepCheckReport> {
    let space = cfg.space()?;
    let mut draws = Draws::new(cfg.seed);
    let mut suites = Vec::new();
    suites.extend(ccr_suite(cfg, &space, &mut draws)?);
    suites.push(adjointness_suite(cfg, &space, &mut draws)?);
    suites.extend(metric_suite(cfg, &space, &mut draws)?);
    suites.push(fock_wick_suite(cfg, &space, &mut draws)?);
    suites.push(symmetry_suite(cfg, &space, &mut draws)?);
    let passed = suites.iter().all(|s| s.passed);
    Ok(RepCheckReport { seed: cfg.seed, suites, passed })
}
