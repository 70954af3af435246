//! The experiment commands, as library functions returning structured results.

use catalysis::catalyst::{fits_cap, min_n_search_directed};
use catalysis::catalyst::{run_protocol_for, CatalysisReport};
use catalysis::majorization::{optimal_chi_directed, reachable};
use catalysis::qstates::{corollary1_check, Corollary1Report, DensityMatrix, TargetEntanglement};
use catalysis::second_order::{
    catalyst_dimension, n_epsilon, predicted_error, rates, sufficiency_check, CatalystPlan,
    SecondOrderRates, SufficiencyReport, TheoryKind, APPROXIMATION,
};
use catalysis::spectra::{
    multicopy_feasibility_check, renyi_entropy, shannon_entropy, Base, MulticopyVerdict,
    DEFAULT_ALPHA_GRID,
};
use catalysis::{Error, ProbVec};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{unit, StateSource, SweepConfig, TheoryName};
use crate::error::{CliError, CliResult};
use crate::output::{cell, opt_cell, svg_chart, Series, Table};
use crate::sampling::{contour_target, sample_contour};

pub const ERROR_VS_SIZE_FORMAT: (&str, u32) = ("error-vs-size", 1);
pub const RESONANCE_FORMAT: (&str, u32) = ("resonance", 1);
pub const DEFAULT_N_MAX_ERROR: usize = 6;
pub const DEFAULT_N_MAX_RESONANCE: usize = 7;

/// Copy numbers at which `cmd_rates` evaluates the sufficiency condition.
pub const SUFFICIENCY_GRID: [u64; 14] = [1, 2, 3, 4, 5, 6, 8, 12, 16, 32, 64, 128, 256, 1024];

fn pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

/// Quantities expressed in the display base.
#[derive(Debug, Clone, Serialize)]
pub struct Display {
    pub unit: &'static str,
    pub source_quantifier: f64,
    pub target_quantifier: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SufficiencyRow {
    pub n: u64,
    pub dc_exact: Option<u64>,
    pub log_dc_display: f64,
    #[serde(flatten)]
    pub report: SufficiencyReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatesReport {
    pub theory: &'static str,
    #[serde(flatten)]
    pub rates: SecondOrderRates,
    pub n_eps: Option<u64>,
    pub catalyst: Option<CatalystPlan>,
    pub diagnostic: Option<String>,
    pub display: Display,
    pub sufficiency: Vec<SufficiencyRow>,
    pub approximation: &'static str,
}

/// Rates, copy number, catalyst size and sufficiency verdicts for `p → q`.
///
/// A rate `R ≤ 1` or a flat target leaves `n_eps` empty with a diagnostic.
pub fn cmd_rates(
    theory: &TheoryKind,
    p: &ProbVec,
    q: &ProbVec,
    eps: f64,
    base: Base,
) -> CliResult<RatesReport> {
    let r = rates(theory, p, q, eps)?;
    let d_s = theory.system_dim(p)?;
    let (n_eps, diagnostic) = match n_epsilon(&r) {
        Ok(n) => (Some(n), None),
        Err(e @ (Error::NoFiniteN(_) | Error::UndefinedRate(_) | Error::Domain(_))) => {
            (None, Some(e.to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    let catalyst = n_eps.map(|n| catalyst_dimension(n, d_s)).transpose()?;
    let mut grid: Vec<u64> = SUFFICIENCY_GRID.to_vec();
    if let Some(n) = n_eps {
        grid.push(n);
        grid.sort_unstable();
        grid.dedup();
    }
    let mut sufficiency = Vec::with_capacity(grid.len());
    for n in grid {
        let plan = catalyst_dimension(n, d_s)?;
        sufficiency.push(SufficiencyRow {
            n,
            dc_exact: plan.dc_exact,
            log_dc_display: base.from_nats(plan.log_dc),
            report: sufficiency_check(theory, p, q, eps, plan.log_dc)?,
        });
    }
    Ok(RatesReport {
        theory: theory.name(),
        display: Display {
            unit: unit(base),
            source_quantifier: base.from_nats(r.source_quantifier),
            target_quantifier: base.from_nats(r.target_quantifier),
            gap: base.from_nats(r.source_quantifier - r.target_quantifier),
        },
        rates: r,
        n_eps,
        catalyst,
        diagnostic,
        sufficiency,
        approximation: APPROXIMATION,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorVsSizeRow {
    pub n: usize,
    pub d_c_exact: Option<u64>,
    pub log_dc: f64,
    pub report: Option<CatalysisReport>,
    pub predicted_eps: Option<f64>,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorVsSize {
    pub theory: &'static str,
    pub base: Base,
    pub rows: Vec<ErrorVsSizeRow>,
}

fn explicit(cfg: &SweepConfig) -> CliResult<(&ProbVec, &ProbVec)> {
    match &cfg.source {
        Some(StateSource::Explicit { source, target }) => Ok((source, target)),
        _ => Err(CliError::Config(
            "this command needs explicit `source` and `target` states".into(),
        )),
    }
}

/// Protocol errors and the dominant-term prediction for each `n` in range.
///
/// When the source already reaches the target only the `n = 1` row is
/// produced. Sizes beyond the cap give `skipped` rows.
pub fn cmd_error_vs_size(cfg: &SweepConfig) -> CliResult<ErrorVsSize> {
    cfg.validate()?;
    let (p, q) = explicit(cfg)?;
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()).into());
    }
    let theory = cfg.theory_kind(p.dim(), TheoryName::Athermality)?;
    if let TheoryKind::Athermality(g) = &theory {
        if !g.is_uniform() {
            return Err(Error::FiniteTemperature.into());
        }
    }
    let d = p.dim();
    let n_max = if reachable(p, q, theory.direction()) {
        cfg.n_min
    } else {
        cfg.n_max.unwrap_or(DEFAULT_N_MAX_ERROR).max(cfg.n_min)
    };
    let ns: Vec<usize> = (cfg.n_min..=n_max).collect();
    let rows = pool(cfg.workers)?.install(|| {
        ns.par_iter()
            .map(|&n| -> CliResult<ErrorVsSizeRow> {
                let plan = catalyst_dimension(n as u64, d)?;
                let predicted_eps = predicted_error(&theory, p, q, plan.log_dc).ok();
                let (report, status) = if fits_cap(d, n) {
                    (Some(run_protocol_for(&theory, p, q, n)?), RowStatus::Ok)
                } else {
                    (None, RowStatus::Skipped)
                };
                Ok(ErrorVsSizeRow {
                    n,
                    d_c_exact: plan.dc_exact,
                    log_dc: plan.log_dc,
                    report,
                    predicted_eps,
                    status,
                })
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    Ok(ErrorVsSize {
        theory: theory.name(),
        base: cfg.base,
        rows,
    })
}

impl ErrorVsSize {
    pub fn table(&self) -> Table {
        let (format, version) = ERROR_VS_SIZE_FORMAT;
        let header = [
            "n".to_string(),
            "d_C_exact".into(),
            format!("log_dC_{}", unit(self.base)),
            "chi_err".into(),
            "system_err".into(),
            "joint_err".into(),
            "marginal_exactness".into(),
            "predicted_eps".into(),
            "status".into(),
        ];
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let get = |f: fn(&CatalysisReport) -> f64| opt_cell(r.report.as_ref().map(f));
                vec![
                    r.n.to_string(),
                    r.d_c_exact.map(|x| x.to_string()).unwrap_or_default(),
                    cell(self.base.from_nats(r.log_dc)),
                    get(|x| x.chi_err),
                    get(|x| x.system_err),
                    get(|x| x.joint_err),
                    get(|x| x.marginal_exactness),
                    opt_cell(r.predicted_eps),
                    match r.status {
                        RowStatus::Ok => "ok".into(),
                        RowStatus::Skipped => "skipped".into(),
                    },
                ]
            })
            .collect();
        Table {
            format,
            version,
            meta: vec![("theory".into(), self.theory.into())],
            header: header.to_vec(),
            rows,
        }
    }

    pub fn svg(&self) -> String {
        let pick = |f: fn(&ErrorVsSizeRow) -> Option<f64>| -> Vec<(f64, f64)> {
            self.rows
                .iter()
                .filter_map(|r| f(r).map(|y| (r.n as f64, y)))
                .collect()
        };
        svg_chart(
            "Transformation error against catalyst size",
            "copies n",
            "error (trace distance)",
            &[
                Series {
                    label: "system error",
                    color: "#1f77b4",
                    points: pick(|r| r.report.as_ref().map(|x| x.system_err)),
                    line: false,
                },
                Series {
                    label: "prediction",
                    color: "#d62728",
                    points: pick(|r| r.predicted_eps),
                    line: true,
                },
            ],
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceRow {
    pub index: usize,
    pub state: ProbVec,
    pub entropy: f64,
    pub nu: f64,
    /// Smallest `n ≤ n_max` reaching the error target.
    pub n_min: Option<usize>,
    pub d_c_exact: Option<u64>,
    /// The target is reachable with no catalyst and no error.
    pub single_shot_exact: bool,
    /// A single copy already reaches the error target.
    pub single_shot_within_eps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resonance {
    pub theory: &'static str,
    pub target: ProbVec,
    pub eps: f64,
    pub n_max: usize,
    pub seed: Option<u64>,
    pub base: Base,
    pub rows: Vec<ResonanceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceSummary {
    pub closest_index: usize,
    pub closest_n: usize,
    pub family_min_n: usize,
    pub closest_attains_min: bool,
    /// Mean `n` per quintile of `|ν − 1|`, unreached counted as `n_max + 1`.
    pub quintile_means: Vec<f64>,
    pub quintiles_nondecreasing: bool,
}

/// Minimal copy numbers across a family of sources with one target.
pub fn cmd_resonance_sweep(cfg: &SweepConfig) -> CliResult<Resonance> {
    cfg.validate()?;
    let (sources, target) = match &cfg.source {
        Some(StateSource::Explicit { source, target }) => (vec![source.clone()], target.clone()),
        Some(StateSource::Contour {
            dim,
            h_ini,
            h_fin,
            samples,
            direction,
        }) => {
            let seed = cfg
                .seed
                .ok_or_else(|| CliError::Config("sampled sweeps need a seed".into()))?;
            let target = contour_target(direction, *h_fin)?;
            (sample_contour(*dim, *h_ini, *samples, seed)?, target)
        }
        None => return Err(CliError::Config("no states given".into())),
    };
    let d = target.dim();
    let theory = cfg.theory_kind(d, TheoryName::Entanglement)?;
    if let TheoryKind::Athermality(g) = &theory {
        if !g.is_uniform() {
            return Err(Error::FiniteTemperature.into());
        }
    }
    let dir = theory.direction();
    let n_max = cfg.n_max.unwrap_or(DEFAULT_N_MAX_RESONANCE);
    let eps = cfg.eps;
    let rows = pool(cfg.workers)?.install(|| {
        sources
            .par_iter()
            .enumerate()
            .map(|(index, p)| -> CliResult<ResonanceRow> {
                if p.dim() != d {
                    return Err(Error::DimensionMismatch(p.dim(), d).into());
                }
                let nu = match rates(&theory, p, &target, eps) {
                    Ok(r) => r.nu,
                    Err(Error::UndefinedRate(_)) => f64::NAN,
                    Err(e) => return Err(e.into()),
                };
                let n_min = min_n_search_directed(p, &target, eps, n_max, dir)?;
                let d_c_exact = match n_min {
                    Some(n) => catalyst_dimension(n as u64, d)?.dc_exact,
                    None => None,
                };
                Ok(ResonanceRow {
                    index,
                    entropy: shannon_entropy(p),
                    state: p.clone(),
                    nu,
                    n_min,
                    d_c_exact,
                    single_shot_exact: reachable(p, &target, dir),
                    single_shot_within_eps: optimal_chi_directed(p, &target, dir).1 <= eps,
                })
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    Ok(Resonance {
        theory: theory.name(),
        target,
        eps,
        n_max,
        seed: cfg.seed,
        base: cfg.base,
        rows,
    })
}

impl Resonance {
    fn effective_n(&self, r: &ResonanceRow) -> usize {
        r.n_min.unwrap_or(self.n_max + 1)
    }

    /// Resonance statistics over rows with a finite `ν`.
    pub fn summary(&self) -> Option<ResonanceSummary> {
        let mut rows: Vec<&ResonanceRow> = self.rows.iter().filter(|r| r.nu.is_finite()).collect();
        if rows.is_empty() {
            return None;
        }
        rows.sort_by(|a, b| (a.nu - 1.0).abs().total_cmp(&(b.nu - 1.0).abs()));
        let closest = rows[0];
        let family_min_n = rows.iter().map(|r| self.effective_n(r)).min().unwrap_or(0);
        let k = rows.len();
        let quintile_means: Vec<f64> = (0..5)
            .map(|i| (i * k / 5, (i + 1) * k / 5))
            .filter(|(a, b)| b > a)
            .map(|(a, b)| {
                rows[a..b]
                    .iter()
                    .map(|r| self.effective_n(r) as f64)
                    .sum::<f64>()
                    / (b - a) as f64
            })
            .collect();
        Some(ResonanceSummary {
            closest_index: closest.index,
            closest_n: self.effective_n(closest),
            family_min_n,
            closest_attains_min: self.effective_n(closest) == family_min_n,
            quintiles_nondecreasing: quintile_means.windows(2).all(|w| w[1] >= w[0] - 1e-12),
            quintile_means,
        })
    }

    pub fn table(&self) -> Table {
        let (format, version) = RESONANCE_FORMAT;
        let d = self.target.dim();
        let u = unit(self.base);
        let mut header = vec!["index".to_string()];
        header.extend((0..d).map(|i| format!("p{i}")));
        header.extend([
            format!("entropy_{u}"),
            "nu".into(),
            "abs_nu_minus_1".into(),
            "n_min".into(),
            "d_C_exact".into(),
            "single_shot_exact".into(),
            "single_shot_within_eps".into(),
        ]);
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![r.index.to_string()];
                row.extend(r.state.as_slice().iter().map(|&x| cell(x)));
                row.push(cell(self.base.from_nats(r.entropy)));
                row.push(cell(r.nu));
                row.push(cell((r.nu - 1.0).abs()));
                row.push(r.n_min.map(|n| n.to_string()).unwrap_or_default());
                row.push(r.d_c_exact.map(|n| n.to_string()).unwrap_or_default());
                row.push(r.single_shot_exact.to_string());
                row.push(r.single_shot_within_eps.to_string());
                row
            })
            .collect();
        let target: Vec<String> = self.target.as_slice().iter().map(|&x| cell(x)).collect();
        let mut meta = vec![
            ("theory".to_string(), self.theory.to_string()),
            ("target".into(), target.join(";")),
            (
                format!("target_entropy_{u}"),
                cell(self.base.from_nats(shannon_entropy(&self.target))),
            ),
            ("eps".into(), cell(self.eps)),
            ("n_max".into(), self.n_max.to_string()),
        ];
        if let Some(seed) = self.seed {
            meta.push(("seed".into(), seed.to_string()));
        }
        Table {
            format,
            version,
            meta,
            header,
            rows,
        }
    }

    pub fn svg(&self) -> String {
        let points = self
            .rows
            .iter()
            .filter(|r| r.nu.is_finite())
            .map(|r| (r.nu, self.effective_n(r) as f64))
            .collect();
        svg_chart(
            "Minimal copies against the resonance parameter",
            "resonance parameter nu",
            "minimal n (n_max + 1 if unreached)",
            &[Series {
                label: "sampled states",
                color: "#1f77b4",
                points,
                line: false,
            }],
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LoccMixedCheck {
    pub check: &'static str,
    #[serde(flatten)]
    pub report: Corollary1Report,
    pub unit: &'static str,
    pub hashing_bound_display: f64,
    pub target_entanglement_display: f64,
}

/// Mixed-state LOCC sufficiency; `E(σ)` is computed for two-qubit targets
/// unless given.
pub fn cmd_check_locc_mixed(
    rho: &DensityMatrix,
    sigma: Option<&DensityMatrix>,
    e_sigma: Option<f64>,
    base: Base,
) -> CliResult<LoccMixedCheck> {
    let target = match (sigma, e_sigma) {
        (_, Some(e)) => TargetEntanglement::Value(e),
        (Some(s), None) => TargetEntanglement::State(s),
        (None, None) => {
            return Err(CliError::Config(
                "need a target state or its entanglement".into(),
            ))
        }
    };
    let report = corollary1_check(rho, target)?;
    Ok(LoccMixedCheck {
        check: "locc-mixed",
        unit: unit(base),
        hashing_bound_display: base.from_nats(report.hashing_bound),
        target_entanglement_display: base.from_nats(report.target_entanglement),
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RenyiPoint {
    #[serde(serialize_with = "catalysis::io::serialize_real")]
    pub alpha: f64,
    pub source: f64,
    pub target: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MulticopyCheck {
    pub check: &'static str,
    pub grid_points: usize,
    #[serde(flatten)]
    pub verdict: MulticopyVerdict,
    pub unit: &'static str,
    /// Rényi entropies at the analytic points, in the display base.
    pub renyi: Vec<RenyiPoint>,
}

pub fn cmd_check_multicopy(
    p: &ProbVec,
    q: &ProbVec,
    grid: Option<usize>,
    base: Base,
) -> CliResult<MulticopyCheck> {
    let grid = grid.unwrap_or(DEFAULT_ALPHA_GRID);
    let d = p.dim().max(q.dim());
    let (pp, qq) = (p.zero_padded(d), q.zero_padded(d));
    let verdict = multicopy_feasibility_check(p, q, grid);
    let renyi = [0.0, 1.0, 2.0, f64::INFINITY]
        .into_iter()
        .map(|alpha| {
            Ok(RenyiPoint {
                alpha,
                source: base.from_nats(renyi_entropy(&pp, alpha)?),
                target: base.from_nats(renyi_entropy(&qq, alpha)?),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(MulticopyCheck {
        check: "multicopy",
        grid_points: grid,
        verdict,
        unit: unit(base),
        renyi,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolRun {
    pub theory: &'static str,
    pub direction: &'static str,
    #[serde(flatten)]
    pub report: CatalysisReport,
}

/// One protocol run with `n` copies.
pub fn cmd_protocol_run(
    theory: &TheoryKind,
    p: &ProbVec,
    q: &ProbVec,
    n: usize,
) -> CliResult<ProtocolRun> {
    if n == 0 {
        return Err(CliError::Config("n must be >= 1".into()));
    }
    let report = run_protocol_for(theory, p, q, n)?;
    Ok(ProtocolRun {
        theory: theory.name(),
        direction: match theory.direction() {
            catalysis::majorization::Direction::Bistochastic => "bistochastic",
            catalysis::majorization::Direction::Locc => "locc",
        },
        report,
    })
}
