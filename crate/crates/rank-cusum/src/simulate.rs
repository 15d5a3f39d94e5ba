//! Monte Carlo engine: scenario generation for AR(1) series with elliptical
//! innovations and a dependence change, plus experiment drivers for
//! rejection-frequency tables, null-distribution convergence, and locator
//! accuracy.
//!
//! Reproducibility: every replicate draws from its own counter-derived
//! ChaCha12 stream, and replicate outcomes are reduced in index order, so
//! results are byte-identical for a fixed seed regardless of the number of
//! worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::corr::kendall_path;
use crate::cptest::{
    cusum_process, identifiability_condition, kendall_change_test, pearson_change_test,
    spearman_copula_change_test, tau_from_rho, ChangeModelParams,
};
use crate::ecdf::psi_hat;
use crate::error::{invalid, Error, Result};
use crate::kolmogorov::kolmogorov_cdf;
use crate::lrv::{lrv_estimate, LrvConfig};
use crate::series::BivariateSeries;

/// Innovation correlation of the pre-change regime in the study tables.
pub const RHO_BASE: f64 = 0.4;

/// Post-change innovation correlations of the study tables, ordered as the
/// columns "none, -0.2, +0.2, -0.4, +0.4, -0.6, -0.8" (jump relative to
/// [`RHO_BASE`]).
pub const TABLE_JUMPS_RHO2: [f64; 7] = [0.4, 0.2, 0.6, 0.0, 0.8, -0.2, -0.4];

/// Marginal family of a bivariate innovation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Standard bivariate normal.
    Normal,
    /// Bivariate t: a correlated normal pair divided by one shared
    /// `sqrt(chi^2_df / df)` draw.
    T {
        /// Degrees of freedom, must be positive.
        df: f64,
    },
}

impl Family {
    /// Human-readable label used in result rows ("normal", "t(1)", ...).
    pub fn label(&self) -> String {
        match self {
            Family::Normal => "normal".to_string(),
            Family::T { df } => {
                if df.fract() == 0.0 {
                    format!("t({})", *df as i64)
                } else {
                    format!("t({df})")
                }
            }
        }
    }
}

/// Distribution of one bivariate innovation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnovationSpec {
    /// Marginal family.
    pub family: Family,
    /// Correlation parameter of the underlying normal pair, in `[-1, 1]`.
    pub rho: f64,
}

impl InnovationSpec {
    fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(invalid(format!(
                "innovation correlation must lie in [-1, 1], got {}",
                self.rho
            )));
        }
        if let Family::T { df } = self.family {
            if !(df > 0.0 && df.is_finite()) {
                return Err(invalid(format!(
                    "degrees of freedom must be positive and finite, got {df}"
                )));
            }
        }
        Ok(())
    }
}

/// Draws `len` innovation pairs.
///
/// Each pair consumes the draws `z1, z2` (standard normal) and, for the t
/// family, one shared chi-square draw `w`; the pair is
/// `(z1, rho z1 + sqrt(1 - rho^2) z2)`, divided by `sqrt(w / df)` for the t
/// family. The fixed draw order makes scenarios reproducible from the
/// stream alone.
pub fn sample_innovations<R: Rng + ?Sized>(
    spec: &InnovationSpec,
    len: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    let mut xs = Vec::with_capacity(len);
    let mut ys = Vec::with_capacity(len);
    let load = (1.0 - spec.rho * spec.rho).sqrt();
    match spec.family {
        Family::Normal => {
            for _ in 0..len {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                xs.push(z1);
                ys.push(spec.rho * z1 + load * z2);
            }
        }
        Family::T { df } => {
            let chi = ChiSquared::new(df)
                .map_err(|e| invalid(format!("chi-square parameter rejected: {e}")))?;
            for _ in 0..len {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                let w: f64 = chi.sample(rng);
                let scale = 1.0 / (w / df).sqrt();
                xs.push(z1 * scale);
                ys.push((spec.rho * z1 + load * z2) * scale);
            }
        }
    }
    Ok((xs, ys))
}

/// AR(1) recursion `s_t = phi s_{t-1} + e_t` started at 0, with the first
/// `burn_in` values discarded.
///
/// # Errors
///
/// Invalid-input error unless `|phi| < 1` and `burn_in < innovations.len()`.
pub fn ar1_filter(innovations: &[f64], phi: f64, burn_in: usize) -> Result<Vec<f64>> {
    if phi.is_nan() || phi.abs() >= 1.0 {
        return Err(invalid(format!(
            "autoregression coefficient must satisfy |phi| < 1, got {phi}"
        )));
    }
    if burn_in >= innovations.len() {
        return Err(invalid(format!(
            "burn-in {burn_in} leaves no observations from {} innovations",
            innovations.len()
        )));
    }
    let mut out = Vec::with_capacity(innovations.len() - burn_in);
    let mut state = 0.0f64;
    for (t, &e) in innovations.iter().enumerate() {
        state = phi * state + e;
        if t >= burn_in {
            out.push(state);
        }
    }
    Ok(out)
}

/// One simulated scenario: `n` observations of a bivariate AR(1) series
/// whose innovation distribution switches from `first` to `second`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    /// Innovation distribution before the change.
    pub first: InnovationSpec,
    /// Innovation distribution from the change onward.
    pub second: InnovationSpec,
    /// Autoregression coefficient shared by both coordinates.
    pub phi: f64,
    /// Observed sample size (after burn-in).
    pub n: usize,
    /// Fraction of the sample at which the change takes effect: observation
    /// `floor(change_fraction * n)` is the first driven by `second`.
    pub change_fraction: f64,
    /// Innovations discarded before the first observation.
    pub burn_in: usize,
    /// Seed consumed by [`generate`].
    pub seed: u64,
}

impl ScenarioSpec {
    fn validate(&self) -> Result<()> {
        self.first.validate()?;
        self.second.validate()?;
        if self.n == 0 {
            return Err(invalid("scenario sample size must be positive".to_string()));
        }
        if !(0.0..=1.0).contains(&self.change_fraction) {
            return Err(invalid(format!(
                "change fraction must lie in [0, 1], got {}",
                self.change_fraction
            )));
        }
        Ok(())
    }
}

/// Draws one scenario series from the supplied stream.
pub fn scenario_series<R: Rng + ?Sized>(
    spec: &ScenarioSpec,
    rng: &mut R,
) -> Result<BivariateSeries> {
    spec.validate()?;
    let total = spec.burn_in + spec.n;
    let m = (spec.change_fraction * spec.n as f64).floor() as usize;
    let n_first = (spec.burn_in + m).saturating_sub(1).min(total);
    let (mut xs, mut ys) = sample_innovations(&spec.first, n_first, rng)?;
    let (xs2, ys2) = sample_innovations(&spec.second, total - n_first, rng)?;
    xs.extend(xs2);
    ys.extend(ys2);
    let xs = ar1_filter(&xs, spec.phi, spec.burn_in)?;
    let ys = ar1_filter(&ys, spec.phi, spec.burn_in)?;
    BivariateSeries::new(xs, ys)
}

/// Draws one scenario series from the scenario's own seed.
pub fn generate(spec: &ScenarioSpec) -> Result<BivariateSeries> {
    scenario_series(spec, &mut substream(spec.seed, 0, 0))
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent replicate stream for `(scenario, rep)` under a master seed.
///
/// The indices are folded into the seed by two rounds of the splitmix64
/// mixer, so streams are decorrelated without any shared state and a
/// replicate's draws do not depend on which thread runs it.
pub fn substream(seed: u64, scenario: u64, rep: u64) -> ChaCha12Rng {
    let h = splitmix64(seed.wrapping_add(GOLDEN.wrapping_mul(scenario.wrapping_add(1))));
    let h = splitmix64(h.wrapping_add(GOLDEN.wrapping_mul(rep.wrapping_add(1))));
    ChaCha12Rng::seed_from_u64(h)
}

/// The two dependence settings of the simulation studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Independent observations (`phi = 0`).
    One,
    /// AR(1) observations with `phi = 0.8`.
    Two,
}

impl Model {
    /// Autoregression coefficient of the model.
    pub fn phi(self) -> f64 {
        match self {
            Model::One => 0.0,
            Model::Two => 0.8,
        }
    }

    /// Burn-in for scenario generation (0 without autoregression).
    pub fn default_burn_in(self) -> usize {
        match self {
            Model::One => 0,
            Model::Two => 1000,
        }
    }

    /// Known long-run variance of the tau fluctuation under independence of
    /// the coordinates, on the scale of the doubled influence values.
    pub fn dsq(self) -> f64 {
        match self {
            Model::One => model1_dsq(),
            Model::Two => model2_dsq(),
        }
    }
}

/// Long-run variance `1/9` of the doubled tau influence values for an iid
/// series with independent coordinates.
pub fn model1_dsq() -> f64 {
    1.0 / 9.0
}

/// Long-run variance of the doubled tau influence values for the AR(1)
/// model with `phi = 0.8` and independent normal coordinates:
/// `1/9 + (8 / pi^2) * sum_{j>=1} asin^2(0.8^j / 2)`.
pub fn model2_dsq() -> f64 {
    let mut sum = 0.0f64;
    let mut r = 0.8f64;
    loop {
        let term = (0.5 * r).asin().powi(2);
        sum += term;
        if term < 1e-16 {
            break;
        }
        r *= 0.8;
    }
    1.0 / 9.0 + 8.0 / (std::f64::consts::PI * std::f64::consts::PI) * sum
}

/// Normalized null statistics of one convergence experiment cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult {
    /// Dependence model of the cell.
    pub model: Model,
    /// Sample size of the cell.
    pub n: usize,
    /// Number of replicates.
    pub reps: usize,
    /// Sorted statistics studentized by the estimated long-run variance.
    pub estimated_sorted: Vec<f64>,
    /// Sorted statistics studentized by the known long-run variance.
    pub known_sorted: Vec<f64>,
    /// Kolmogorov-Smirnov distance of `estimated_sorted` to the limit law.
    pub sup_dist_estimated: f64,
    /// Kolmogorov-Smirnov distance of `known_sorted` to the limit law.
    pub sup_dist_known: f64,
}

/// Kolmogorov-Smirnov distance of a sorted sample to the Kolmogorov
/// distribution itself. Returns NaN for an empty sample.
pub fn ks_distance_to_kolmogorov(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let nf = n as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = kolmogorov_cdf(x);
        sup = sup.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    sup
}

/// Samples the null distribution of the normalized tau fluctuation
/// statistic for each size in `ns`, studentized both by the estimated and
/// by the model's known long-run variance.
///
/// Innovations are independent standard normal pairs; the dependence over
/// time comes from `model`.
pub fn run_convergence_experiment(
    model: Model,
    ns: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<ConvergenceResult>> {
    if ns.is_empty() || reps == 0 {
        return Err(invalid(
            "convergence experiment needs at least one size and one replicate".to_string(),
        ));
    }
    if let Some(&n) = ns.iter().find(|&&n| n < 4) {
        return Err(invalid(format!("sample size {n} is too small to test")));
    }
    let known_d = model.dsq().sqrt();
    let config = LrvConfig::default();
    let innovation = InnovationSpec {
        family: Family::Normal,
        rho: 0.0,
    };
    let mut results = Vec::with_capacity(ns.len());
    for (n_idx, &n) in ns.iter().enumerate() {
        let spec = ScenarioSpec {
            first: innovation,
            second: innovation,
            phi: model.phi(),
            n,
            change_fraction: 0.5,
            burn_in: model.default_burn_in(),
            seed,
        };
        let pairs: Vec<(f64, f64)> = (0..reps)
            .into_par_iter()
            .map(|rep| -> Result<(f64, f64)> {
                let mut rng = substream(seed, n_idx as u64, rep as u64);
                let series = scenario_series(&spec, &mut rng)?;
                let path = kendall_path(&series)?;
                let process = cusum_process(&path, n)?;
                let psi = psi_hat(&series, path.last(), config.demean)?;
                let est = lrv_estimate(&psi, &config)?;
                if est.d <= 0.0 {
                    return Err(Error::DegenerateVariance(
                        "replicate produced constant influence values".into(),
                    ));
                }
                let estimated = process.t_n / (4.0 * est.d);
                let known = process.t_n / (2.0 * known_d);
                Ok((estimated, known))
            })
            .collect::<Result<_>>()?;
        let (mut estimated_sorted, mut known_sorted): (Vec<f64>, Vec<f64>) =
            pairs.into_iter().unzip();
        estimated_sorted.sort_by(f64::total_cmp);
        known_sorted.sort_by(f64::total_cmp);
        let sup_dist_estimated = ks_distance_to_kolmogorov(&estimated_sorted);
        let sup_dist_known = ks_distance_to_kolmogorov(&known_sorted);
        results.push(ConvergenceResult {
            model,
            n,
            reps,
            estimated_sorted,
            known_sorted,
            sup_dist_estimated,
            sup_dist_known,
        });
    }
    Ok(results)
}

/// One row of a rejection-frequency table: one test under one innovation
/// family, across all jump scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionTableRow {
    /// Innovation family label ("normal", "t(1)", ...).
    pub distribution: String,
    /// Test name ("kendall", "pearson", "spearman_copula").
    pub test: String,
    /// Jump labels, one per scenario column ("none", "+0.2", ...).
    pub jump_labels: Vec<String>,
    /// Rejection frequencies, aligned with `jump_labels`.
    pub frequencies: Vec<f64>,
    /// Replicates per scenario.
    pub replications: usize,
    /// Nominal significance level.
    pub level: f64,
}

fn jump_label(rho2: f64) -> String {
    let diff = rho2 - RHO_BASE;
    if diff.abs() < 1e-12 {
        "none".to_string()
    } else {
        format!("{diff:+.1}")
    }
}

/// Empirical rejection frequencies of all three change tests.
///
/// Each scenario keeps the innovation correlation at [`RHO_BASE`] for the
/// first half of the sample and switches to a value from `jumps_rho2` at
/// the midpoint. Returns three rows (Kendall, Pearson, Spearman-copula) per
/// family, each covering all jump columns.
pub fn run_rejection_table(
    model: Model,
    families: &[Family],
    jumps_rho2: &[f64],
    n: usize,
    reps: usize,
    level: f64,
    seed: u64,
) -> Result<Vec<RejectionTableRow>> {
    if families.is_empty() || jumps_rho2.is_empty() {
        return Err(invalid(
            "rejection table needs at least one family and one jump".to_string(),
        ));
    }
    if reps == 0 {
        return Err(invalid("rejection table needs at least one replicate".to_string()));
    }
    let config = LrvConfig::default();
    let labels: Vec<String> = jumps_rho2.iter().map(|&r| jump_label(r)).collect();
    let mut rows = Vec::with_capacity(families.len() * 3);
    for (f_idx, family) in families.iter().enumerate() {
        let mut freq: [Vec<f64>; 3] = Default::default();
        for (j_idx, &rho2) in jumps_rho2.iter().enumerate() {
            let key = (f_idx * jumps_rho2.len() + j_idx) as u64;
            let spec = ScenarioSpec {
                first: InnovationSpec {
                    family: *family,
                    rho: RHO_BASE,
                },
                second: InnovationSpec {
                    family: *family,
                    rho: rho2,
                },
                phi: model.phi(),
                n,
                change_fraction: 0.5,
                burn_in: model.default_burn_in(),
                seed,
            };
            let outcomes: Vec<[bool; 3]> = (0..reps)
                .into_par_iter()
                .map(|rep| -> Result<[bool; 3]> {
                    let mut rng = substream(seed, key, rep as u64);
                    let series = scenario_series(&spec, &mut rng)?;
                    Ok([
                        kendall_change_test(&series, &config, level)?.reject,
                        pearson_change_test(&series, &config, level)?.reject,
                        spearman_copula_change_test(&series, &config, level)?.reject,
                    ])
                })
                .collect::<Result<_>>()?;
            for t in 0..3 {
                let count = outcomes.iter().filter(|o| o[t]).count();
                freq[t].push(count as f64 / reps as f64);
            }
        }
        for (t, name) in ["kendall", "pearson", "spearman_copula"].iter().enumerate() {
            rows.push(RejectionTableRow {
                distribution: family.label(),
                test: (*name).to_string(),
                jump_labels: labels.clone(),
                frequencies: std::mem::take(&mut freq[t]),
                replications: reps,
                level,
            });
        }
    }
    Ok(rows)
}

/// One cell of the locator experiment: normal innovations whose correlation
/// jumps from `rho_first` to `rho_second` at fraction `lambda_star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocatorScenario {
    /// Sample size.
    pub n: usize,
    /// True change fraction.
    pub lambda_star: f64,
    /// Innovation correlation before the change.
    pub rho_first: f64,
    /// Innovation correlation after the change.
    pub rho_second: f64,
    /// Autoregression coefficient.
    pub phi: f64,
    /// Innovations discarded before the first observation.
    pub burn_in: usize,
}

/// Accuracy summary of the change-point locator in one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct LocatorCell {
    /// Sample size.
    pub n: usize,
    /// True change fraction.
    pub lambda_star: f64,
    /// Innovation correlation before the change.
    pub rho_first: f64,
    /// Innovation correlation after the change.
    pub rho_second: f64,
    /// Autoregression coefficient.
    pub phi: f64,
    /// Number of replicates.
    pub reps: usize,
    /// Mean of `|lambda_hat - lambda_star|`.
    pub mean_abs_error: f64,
    /// Median absolute error (midpoint convention for even counts).
    pub median_abs_error: f64,
    /// Empirical 90% quantile of the absolute error.
    pub q90_abs_error: f64,
}

fn median_sorted(v: &[f64]) -> f64 {
    let l = v.len();
    if l % 2 == 1 {
        v[l / 2]
    } else {
        0.5 * (v[l / 2 - 1] + v[l / 2])
    }
}

fn q90_sorted(v: &[f64]) -> f64 {
    let idx = (0.9 * v.len() as f64).ceil() as usize;
    v[idx.max(1) - 1]
}

/// Locator accuracy over a grid of scenarios.
///
/// Before simulating, each scenario is checked against the identifiability
/// condition of the limit drift (with the cross-regime tau taken from the
/// normal model); a non-identifiable scenario is an error, because the
/// locator would be inconsistent there by construction.
pub fn run_locator_experiment(
    grid: &[LocatorScenario],
    reps: usize,
    seed: u64,
) -> Result<Vec<LocatorCell>> {
    if grid.is_empty() || reps == 0 {
        return Err(invalid(
            "locator experiment needs at least one scenario and one replicate".to_string(),
        ));
    }
    let mut cells = Vec::with_capacity(grid.len());
    for (cell_idx, sc) in grid.iter().enumerate() {
        if sc.n < 4 {
            return Err(invalid(format!(
                "locator scenario needs at least 4 observations, got {}",
                sc.n
            )));
        }
        let params = ChangeModelParams::new(
            sc.lambda_star,
            tau_from_rho(sc.rho_first)?,
            tau_from_rho(sc.rho_second)?,
            tau_from_rho(0.5 * (sc.rho_first + sc.rho_second))?,
        )?;
        if !identifiability_condition(&params)? {
            return Err(invalid(format!(
                "locator scenario (lambda* = {}, rho {} -> {}) violates the identifiability \
                 condition",
                sc.lambda_star, sc.rho_first, sc.rho_second
            )));
        }
        let spec = ScenarioSpec {
            first: InnovationSpec {
                family: Family::Normal,
                rho: sc.rho_first,
            },
            second: InnovationSpec {
                family: Family::Normal,
                rho: sc.rho_second,
            },
            phi: sc.phi,
            n: sc.n,
            change_fraction: sc.lambda_star,
            burn_in: sc.burn_in,
            seed,
        };
        let mut errors: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|rep| -> Result<f64> {
                let mut rng = substream(seed, cell_idx as u64, rep as u64);
                let series = scenario_series(&spec, &mut rng)?;
                let est = crate::cptest::locate_change(&series)?;
                Ok((est.lambda_hat - sc.lambda_star).abs())
            })
            .collect::<Result<_>>()?;
        errors.sort_by(f64::total_cmp);
        cells.push(LocatorCell {
            n: sc.n,
            lambda_star: sc.lambda_star,
            rho_first: sc.rho_first,
            rho_second: sc.rho_second,
            phi: sc.phi,
            reps,
            mean_abs_error: errors.iter().sum::<f64>() / reps as f64,
            median_abs_error: median_sorted(&errors),
            q90_abs_error: q90_sorted(&errors),
        });
    }
    Ok(cells)
}
