use multinoise_core::asymptotics::{self, ExpansionPoint, Grading, RateReport};
use multinoise_core::gamma::{self, GammaTable};
use multinoise_core::suites::{self, RepCheckConfig};
use multinoise_core::{Error, ReservoirChannel, Sign, SupportReport, TestFunction};
use serde::Serialize;

use crate::config::{Fault, Format, StudyConfig};
use crate::output::Artifacts;
use crate::{CommonArgs, Failure};

fn load(args: &CommonArgs) -> Result<StudyConfig, Failure> {
    let mut cfg = StudyConfig::load(&args.config).map_err(Failure::Config)?;
    if let Some(out) = &args.out {
        cfg.output.directory = out.clone();
    }
    if let Some(format) = args.format {
        cfg.output.format = format;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(Failure::Config)?;
    Ok(cfg)
}

fn support_gate(cfg: &StudyConfig, force: bool) -> Result<SupportReport, Failure> {
    let report = gamma::check_support(&cfg.dispersion, &cfg.form_factor, cfg.support_epsilon);
    if !report.passed && !force {
        return Err(Failure::Support(format!(
            "stationary points {:?} lie inside the effective support of the form factor (use --force to override)",
            report.violations
        )));
    }
    Ok(report)
}

fn oracle_check(cfg: &StudyConfig, table: &GammaTable) -> Result<(), Failure> {
    if let Some(row) = table.rows.iter().find(|r| r.n == 0 && r.gamma_osc < -1e-12) {
        return Err(Failure::Oracle(format!("gamma_0 = {} is negative", row.gamma_osc)));
    }
    let worst = table.max_rel_diff();
    if worst > cfg.tolerances.assert_rel {
        return Err(Failure::Oracle(format!(
            "oscillatory and energy-shell coefficients differ by {worst:e} (tolerance {:e})",
            cfg.tolerances.assert_rel
        )));
    }
    Ok(())
}

pub fn gamma(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    cfg.validate_gamma().map_err(Failure::Config)?;
    let support = support_gate(&cfg, args.force)?;
    let table = GammaTable::compute(&cfg.dispersion, &cfg.form_factor, &cfg.orders)?;
    let mut out = Artifacts::default();
    match cfg.output.format {
        Format::Csv => out.text("gamma.csv", table.to_csv()),
        Format::Json => out.json("gamma.json", &table)?,
    }
    out.json("support.json", &support)?;
    out.write(&cfg.output.directory)?;
    oracle_check(&cfg, &table)
}

pub fn rep_check(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let t = &cfg.truncation;
    let mut rc = RepCheckConfig::new(cfg.sector_gammas(), t.basis_size, t.particle_cap, cfg.seed);
    rc.trials = cfg.trials;
    rc.transpose_pairing = cfg.fault == Some(Fault::TransposePairing);
    let report = suites::run_rep_check(&rc)?;
    let mut out = Artifacts::default();
    out.json("rep_check.json", &report)?;
    out.write(&cfg.output.directory)?;
    if !report.passed {
        let failed: Vec<&str> = report.suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
        return Err(Failure::Invariant(format!("suites failed: {}", failed.join(", "))));
    }
    Ok(())
}

#[derive(Serialize)]
struct FitSummary {
    slope: f64,
    r_squared: f64,
    n_points: usize,
    grading: Grading,
    expected_slope: f64,
    /// `slope - expected_slope`.
    deviation: f64,
    min_slope: f64,
    flagged: bool,
    passed: bool,
}

impl FitSummary {
    fn new(r: &RateReport, order: usize) -> Self {
        Self {
            slope: r.slope,
            r_squared: r.r_squared,
            n_points: r.n_points,
            grading: r.grading,
            expected_slope: r.expected_slope,
            deviation: r.slope - r.expected_slope,
            min_slope: r.grading.min_slope(order),
            flagged: r.flagged,
            passed: r.passed,
        }
    }
}

#[derive(Serialize)]
struct RateFile {
    study: String,
    order: usize,
    /// `passed`, `failed` or `below_floor`.
    status: &'static str,
    /// Asserted grading.
    primary: Option<FitSummary>,
    /// Reported for comparison only.
    alternative: Option<FitSummary>,
}

fn rate_file(study: String, order: usize, points: &[ExpansionPoint]) -> Result<RateFile, Failure> {
    match asymptotics::RateComparison::fit(points) {
        Ok(cmp) => Ok(RateFile {
            study,
            order,
            status: if cmp.primary.passed { "passed" } else { "failed" },
            primary: Some(FitSummary::new(&cmp.primary, order)),
            alternative: Some(FitSummary::new(&cmp.alternative, order)),
        }),
        Err(Error::BelowFloor { .. }) => {
            Ok(RateFile { study, order, status: "below_floor", primary: None, alternative: None })
        }
        Err(e) => Err(e.into()),
    }
}

fn emit_points(out: &mut Artifacts, stem: &str, format: Format, points: &[ExpansionPoint]) -> Result<(), Failure> {
    match format {
        Format::Csv => {
            out.text(format!("{stem}.csv"), asymptotics::points_csv(points));
            Ok(())
        }
        Format::Json => out.json(format!("{stem}.json"), &points),
    }
}

/// Everything the expansion studies share: the gated channel and the
/// coefficients up to the highest truncation order.
fn expansion_setup(cfg: &StudyConfig, orders: &[usize], force: bool) -> Result<(ReservoirChannel, Vec<f64>), Failure> {
    support_gate(cfg, force)?;
    let top = orders.iter().copied().max().unwrap_or(0);
    let all: Vec<usize> = (0..=top).collect();
    let table = GammaTable::compute(&cfg.dispersion, &cfg.form_factor, &all)?;
    oracle_check(cfg, &table)?;
    let gammas = table.rows.iter().map(|r| r.gamma_osc).collect();
    let channel =
        ReservoirChannel::new(cfg.dispersion, cfg.form_factor.clone(), cfg.lambda_grid[0], cfg.support_epsilon)?;
    Ok((channel, gammas))
}

fn finish(out: Artifacts, cfg: &StudyConfig, rates: &[RateFile]) -> Result<(), Failure> {
    out.write(&cfg.output.directory)?;
    let failed: Vec<String> =
        rates.iter().filter(|r| r.status == "failed").map(|r| format!("{} N={}", r.study, r.order)).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Rate(format!("rate criterion not met: {}", failed.join(", "))))
    }
}

pub fn kernel_check(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    cfg.validate_expansion(&cfg.kernel_orders, "kernel_orders").map_err(Failure::Config)?;
    if cfg.smears.len() < 2 {
        return Err(Failure::Config("kernel study needs two smears".into()));
    }
    let (channel, gammas) = expansion_setup(&cfg, &cfg.kernel_orders, args.force)?;
    let (fm, fp) = (&cfg.smears[0], &cfg.smears[1]);
    let mut out = Artifacts::default();
    let mut rates = Vec::new();
    for &n in &cfg.kernel_orders {
        let points =
            asymptotics::sweep(&cfg.lambda_grid, |l| asymptotics::kernel_error(n, l, fm, fp, &channel, &gammas))?;
        let stem = format!("kernel_N{n}");
        emit_points(&mut out, &stem, cfg.output.format, &points)?;
        let rate = rate_file("kernel".into(), n, &points)?;
        out.json(format!("{stem}_rate.json"), &rate)?;
        rates.push(rate);
    }
    finish(out, &cfg, &rates)
}

fn resolve_word(cfg: &StudyConfig, w: usize) -> Result<(Vec<Sign>, Vec<TestFunction>), Failure> {
    let spec = &cfg.words[w];
    let signs = spec.parse_signs().map_err(Failure::Config)?;
    if signs.len() != spec.smears.len() {
        return Err(Failure::Config(format!("word {w}: one smear index per sign required")));
    }
    let smears = spec
        .smears
        .iter()
        .map(|&i| {
            cfg.smears.get(i).cloned().ok_or_else(|| Failure::Config(format!("word {w}: smear index {i} out of range")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((signs, smears))
}

pub fn corr_check(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    cfg.validate_expansion(&cfg.corr_orders, "corr_orders").map_err(Failure::Config)?;
    if cfg.words.is_empty() {
        return Err(Failure::Config("words must be nonempty".into()));
    }
    let words = (0..cfg.words.len()).map(|w| resolve_word(&cfg, w)).collect::<Result<Vec<_>, _>>()?;
    let (channel, gammas) = expansion_setup(&cfg, &cfg.corr_orders, args.force)?;
    let mut out = Artifacts::default();
    let mut rates = Vec::new();
    for (w, (signs, smears)) in words.iter().enumerate() {
        for &n in &cfg.corr_orders {
            let points = asymptotics::sweep(&cfg.lambda_grid, |l| {
                asymptotics::correlation_error(signs, smears, n, l, &channel, &gammas)
            })?;
            let stem = format!("corr_W{w}_N{n}");
            emit_points(&mut out, &stem, cfg.output.format, &points)?;
            let rate = rate_file(format!("corr word {w} ({})", cfg.words[w].signs), n, &points)?;
            out.json(format!("{stem}_rate.json"), &rate)?;
            rates.push(rate);
        }
    }
    finish(out, &cfg, &rates)
}
