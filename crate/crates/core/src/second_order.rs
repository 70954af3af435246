//! Second-order rate calculus.
//!
//! For a resource quantifier `M` (entanglement entropy or relative entropy to
//! the Gibbs reference) with variance `W`, the optimal rate from `n` copies of
//! `p` to copies of `q` at error `ε` behaves as
//!
//! ```text
//! R_n(ε) ≈ R − R'_ε / √n,   R = M(p) / M(q),   R'_ε = −√W(p) · f_ν(ε) / M(q)
//! ```
//!
//! where `ν = (W(p)/M(p)) / (W(q)/M(q))` is the resonance parameter and
//! `f_ν` the sesqui-normal function. `f_ν(ε)` is nondecreasing in `ε` and is
//! negative for small `ε` whenever `ν ≠ 1`, so `R'_ε` acts as a penalty: the
//! rate approaches `R` from below and `n_ε` copies are needed before it
//! exceeds one.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::majorization::Direction;
use crate::normal::inv_normal_cdf;
use crate::spectra::{
    entropy_variance, relative_entropy, relative_entropy_variance, shannon_entropy, GibbsSpec,
    ProbVec,
};

/// Quantifiers and variances below this are treated as zero.
pub const ZERO_THRESHOLD: f64 = 1e-14;
/// Label carried by every result that drops the higher-order terms.
pub const APPROXIMATION: &str = "two-term";

const GRID_POINTS: usize = 64;
const GOLDEN_WIDTH: f64 = 1e-10;

/// The resource theory a rate refers to.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TheoryKind {
    /// Pure bipartite states under LOCC, represented by Schmidt vectors.
    Entanglement,
    /// Incoherent states under thermal operations with reference `γ`.
    Athermality(GibbsSpec),
    /// Noisy (unital) operations on a system of the given dimension.
    UnitaryNoisy(usize),
}

impl TheoryKind {
    pub fn name(&self) -> &'static str {
        match self {
            TheoryKind::Entanglement => "entanglement",
            TheoryKind::Athermality(_) => "athermality",
            TheoryKind::UnitaryNoisy(_) => "unitary-noisy",
        }
    }

    /// The order respected by free operations on spectra.
    pub fn direction(&self) -> Direction {
        match self {
            TheoryKind::Entanglement => Direction::Locc,
            _ => Direction::Bistochastic,
        }
    }

    /// The reference distribution, for theories that have one.
    pub fn reference(&self) -> Result<Option<GibbsSpec>> {
        match self {
            TheoryKind::Entanglement => Ok(None),
            TheoryKind::Athermality(g) => Ok(Some(g.clone())),
            TheoryKind::UnitaryNoisy(d) => Ok(Some(GibbsSpec::uniform(*d)?)),
        }
    }

    /// Resource quantifier and its variance for `p`.
    pub fn quantifiers(&self, p: &ProbVec) -> Result<(f64, f64)> {
        match self.reference()? {
            None => Ok((shannon_entropy(p), entropy_variance(p))),
            Some(g) => Ok((relative_entropy(p, &g)?, relative_entropy_variance(p, &g)?)),
        }
    }

    /// Dimension of the system the theory acts on, checked against `p`.
    pub fn system_dim(&self, p: &ProbVec) -> Result<usize> {
        match self {
            TheoryKind::Entanglement => Ok(p.dim()),
            TheoryKind::Athermality(g) if g.dim() != p.dim() => {
                Err(Error::DimensionMismatch(p.dim(), g.dim()))
            }
            TheoryKind::UnitaryNoisy(d) if *d != p.dim() => {
                Err(Error::DimensionMismatch(p.dim(), *d))
            }
            _ => Ok(p.dim()),
        }
    }
}

/// How a sesqui-normal value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SesquiKind {
    /// Minimum attained in the open interval.
    Interior,
    /// `ν = 0`: the infimum is the limit at `x → 1`.
    BoundaryLimit,
    /// `ν = ∞`: the value is `±∞`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SesquiNormal {
    #[serde(serialize_with = "crate::io::serialize_real")]
    pub value: f64,
    /// Minimizing `x`, when attained.
    pub argmin: Option<f64>,
    pub kind: SesquiKind,
}

/// `f_ν(ε) = inf_{x ∈ (ε, 1)} √ν·Φ⁻¹(x) − Φ⁻¹(x − ε)`.
pub fn sesqui_normal(nu: f64, eps: f64) -> Result<f64> {
    Ok(sesqui_normal_detailed(nu, eps)?.value)
}

/// [`sesqui_normal`] with the minimizer and a flag for the degenerate cases.
///
/// A 64-point interior grid brackets the minimum, which golden-section search
/// then refines to width `1e-10` in `x`. Endpoints are never evaluated.
pub fn sesqui_normal_detailed(nu: f64, eps: f64) -> Result<SesquiNormal> {
    if nu.is_nan() || nu < 0.0 {
        return Err(Error::Domain(format!("nu must be >= 0, got {nu}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    if nu == 0.0 {
        return Ok(SesquiNormal {
            value: -inv_normal_cdf(1.0 - eps)?,
            argmin: None,
            kind: SesquiKind::BoundaryLimit,
        });
    }
    if nu.is_infinite() {
        let value = if eps < 0.5 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
        return Ok(SesquiNormal {
            value,
            argmin: None,
            kind: SesquiKind::Degenerate,
        });
    }
    let s = nu.sqrt();
    let g = |x: f64| -> f64 {
        match (inv_normal_cdf(x), inv_normal_cdf(x - eps)) {
            (Ok(a), Ok(b)) => s * a - b,
            _ => f64::INFINITY,
        }
    };
    let step = (1.0 - eps) / (GRID_POINTS + 1) as f64;
    let node = |k: usize| eps + k as f64 * step;
    let (mut k_best, mut g_best) = (1, f64::INFINITY);
    for k in 1..=GRID_POINTS {
        let v = g(node(k));
        if v < g_best {
            k_best = k;
            g_best = v;
        }
    }
    let (mut a, mut b) = (node(k_best - 1), node(k_best + 1));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > GOLDEN_WIDTH {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    let (x, v) = if gc <= gd { (c, gc) } else { (d, gd) };
    let (x, v) = if v <= g_best {
        (x, v)
    } else {
        (node(k_best), g_best)
    };
    Ok(SesquiNormal {
        value: v,
        argmin: Some(x),
        kind: SesquiKind::Interior,
    })
}

/// First- and second-order rates for a state pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondOrderRates {
    /// First-order rate `R = M(p)/M(q)`.
    pub rate: f64,
    /// Second-order penalty `R'_ε`.
    #[serde(serialize_with = "crate::io::serialize_real")]
    pub rate_prime: f64,
    /// Resonance parameter; `+∞` when the target has zero variance.
    #[serde(serialize_with = "crate::io::serialize_real")]
    pub nu: f64,
    #[serde(serialize_with = "crate::io::serialize_real")]
    pub f_value: f64,
    pub f_kind: SesquiKind,
    pub epsilon: f64,
    pub source_quantifier: f64,
    pub target_quantifier: f64,
    pub source_variance: f64,
    pub target_variance: f64,
    /// The source is free, so nothing can be produced from it.
    pub no_catalysis: bool,
}

/// Rates of the theory for `p → q` at error `eps`.
pub fn rates(theory: &TheoryKind, p: &ProbVec, q: &ProbVec, eps: f64) -> Result<SecondOrderRates> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()));
    }
    theory.system_dim(p)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    let (mp, vp) = theory.quantifiers(p)?;
    let (mq, vq) = theory.quantifiers(q)?;
    if mq <= ZERO_THRESHOLD {
        return Err(Error::UndefinedRate(format!(
            "target is free (quantifier {mq:e})"
        )));
    }
    let base = SecondOrderRates {
        rate: 0.0,
        rate_prime: 0.0,
        nu: 0.0,
        f_value: 0.0,
        f_kind: SesquiKind::BoundaryLimit,
        epsilon: eps,
        source_quantifier: mp,
        target_quantifier: mq,
        source_variance: vp,
        target_variance: vq,
        no_catalysis: false,
    };
    if mp <= ZERO_THRESHOLD {
        let f = sesqui_normal_detailed(0.0, eps)?;
        return Ok(SecondOrderRates {
            f_value: f.value,
            no_catalysis: true,
            ..base
        });
    }
    let rate = mp / mq;
    let (p_flat, q_flat) = (vp <= ZERO_THRESHOLD, vq <= ZERO_THRESHOLD);
    let nu = match (p_flat, q_flat) {
        (true, true) => 1.0,
        (false, true) => f64::INFINITY,
        (true, false) => 0.0,
        (false, false) => (vp / mp) / (vq / mq),
    };
    let f = sesqui_normal_detailed(nu, eps)?;
    let rate_prime = if p_flat {
        0.0
    } else {
        -vp.sqrt() * f.value / mq
    };
    Ok(SecondOrderRates {
        rate,
        rate_prime,
        nu,
        f_value: f.value,
        f_kind: f.kind,
        ..base
    })
}

/// Smallest `n` with `R − R'_ε/√n > 1` under the two-term approximation,
/// computed as `⌈(R'_ε / (R − 1))²⌉` (at least 1).
pub fn n_epsilon(r: &SecondOrderRates) -> Result<u64> {
    if !(r.rate > 1.0) {
        return Err(Error::NoFiniteN(r.rate));
    }
    if r.rate_prime.is_nan() || r.rate_prime == f64::INFINITY {
        return Err(Error::UndefinedRate(
            "second-order term diverges (flat target)".into(),
        ));
    }
    if r.rate_prime <= 0.0 {
        return Ok(1);
    }
    let x = (r.rate_prime / (r.rate - 1.0)).powi(2);
    if x > 9.0e15 {
        return Err(Error::Domain(format!(
            "copy number {x:e} not representable"
        )));
    }
    Ok((x.ceil() as u64).max(1))
}

/// Catalyst sizing for `n` copies on a `d_S`-dimensional system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatalystPlan {
    pub n_eps: u64,
    /// `ln n + (n − 1) ln d_S`, in nats.
    pub log_dc: f64,
    /// `n · d_S^(n−1)` when below `2^63`.
    pub dc_exact: Option<u64>,
    pub d_s: usize,
}

pub fn catalyst_dimension(n: u64, d_s: usize) -> Result<CatalystPlan> {
    if n == 0 {
        return Err(Error::Domain("copy number must be >= 1".into()));
    }
    if d_s == 0 {
        return Err(Error::Domain("system dimension must be >= 1".into()));
    }
    let log_dc = (n as f64).ln() + (n - 1) as f64 * (d_s as f64).ln();
    let mut acc: u128 = n as u128;
    let mut exact = true;
    for _ in 1..n {
        acc *= d_s as u128;
        if acc >= 1u128 << 63 {
            exact = false;
            break;
        }
    }
    Ok(CatalystPlan {
        n_eps: n,
        log_dc,
        dc_exact: exact.then_some(acc as u64),
        d_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sufficiency {
    Sufficient,
    NotImplied,
}

/// Dominant-term sufficient condition for a catalytic conversion with a
/// catalyst of `log_dc` nats. Not a necessary condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficiencyReport {
    pub verdict: Sufficiency,
    /// `M(p) − M(q)`.
    pub gap: f64,
    /// Right-hand side `√(W(p) ln d_S / log d_C) · (−f_ν(ε))`.
    #[serde(serialize_with = "crate::io::serialize_real")]
    pub threshold: f64,
    pub log_dc: f64,
    /// Catalyst size including the ancilla, for noisy operations.
    pub log_dc_total: f64,
    pub approximation: &'static str,
    pub diagnostic: Option<String>,
}

pub fn sufficiency_check(
    theory: &TheoryKind,
    p: &ProbVec,
    q: &ProbVec,
    eps: f64,
    log_dc: f64,
) -> Result<SufficiencyReport> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()));
    }
    let d_s = theory.system_dim(p)?;
    let (mp, vp) = theory.quantifiers(p)?;
    let (mq, vq) = theory.quantifiers(q)?;
    let log_dc_total = match theory {
        TheoryKind::UnitaryNoisy(d) => log_dc + ((1 + d) as f64).ln(),
        _ => log_dc,
    };
    let gap = mp - mq;
    let report = |verdict, threshold, diagnostic: Option<&str>| SufficiencyReport {
        verdict,
        gap,
        threshold,
        log_dc,
        log_dc_total,
        approximation: APPROXIMATION,
        diagnostic: diagnostic.map(str::to_owned),
    };
    if gap <= 0.0 {
        return Ok(report(
            Sufficiency::NotImplied,
            f64::NAN,
            Some("quantifier gap is not positive"),
        ));
    }
    if vp <= ZERO_THRESHOLD {
        return Ok(report(
            Sufficiency::Sufficient,
            0.0,
            Some("source has vanishing fluctuations"),
        ));
    }
    if vq <= ZERO_THRESHOLD {
        return Ok(report(
            Sufficiency::NotImplied,
            f64::INFINITY,
            Some("flat target: resonance parameter is infinite"),
        ));
    }
    let nu = (vp / mp) / (vq / mq);
    let f = sesqui_normal(nu, eps)?;
    let threshold = if log_dc <= 0.0 {
        if f >= 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        (vp * (d_s as f64).ln() / log_dc).sqrt() * (-f)
    };
    let verdict = if gap > threshold {
        Sufficiency::Sufficient
    } else {
        Sufficiency::NotImplied
    };
    Ok(report(verdict, threshold, None))
}

/// Error predicted by the dominant term for a catalyst of `log_dc` nats:
/// the `ε` solving `f_ν(ε) = −gap · √(log d_C / (W(p) ln d_S))`.
///
/// Returns values in `[1e-12, 1 − 1e-12]`; the lower end means the target is
/// below every attainable `f_ν`.
pub fn predicted_error(theory: &TheoryKind, p: &ProbVec, q: &ProbVec, log_dc: f64) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()));
    }
    let d_s = theory.system_dim(p)?;
    let (mp, vp) = theory.quantifiers(p)?;
    let (mq, vq) = theory.quantifiers(q)?;
    if vp <= ZERO_THRESHOLD || vq <= ZERO_THRESHOLD || mp <= ZERO_THRESHOLD || mq <= ZERO_THRESHOLD
    {
        return Err(Error::UndefinedRate(
            "prediction needs nonzero quantifiers and variances".into(),
        ));
    }
    if d_s < 2 {
        return Err(Error::Domain("prediction needs d_S >= 2".into()));
    }
    let nu = (vp / mp) / (vq / mq);
    let target = -(mp - mq) * (log_dc.max(0.0) / (vp * (d_s as f64).ln())).sqrt();
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    if sesqui_normal(nu, lo)? >= target {
        return Ok(lo);
    }
    if sesqui_normal(nu, hi)? < target {
        return Ok(hi);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if sesqui_normal(nu, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ProbVec {
        ProbVec::new(v.to_vec()).unwrap()
    }

    fn fig2() -> (ProbVec, ProbVec, TheoryKind) {
        (
            pv(&[0.84, 0.10, 0.06]),
            pv(&[0.79, 0.19, 0.02]),
            TheoryKind::Athermality(GibbsSpec::uniform(3).unwrap()),
        )
    }

    #[test]
    fn sesqui_symmetric_case() {
        let f = sesqui_normal(1.0, 0.5).unwrap();
        assert!((f - 2.0 * inv_normal_cdf(0.75).unwrap()).abs() < 1e-6);
        assert!((f - 1.348_979_500_392_163).abs() < 1e-6);
        let small = sesqui_normal(1.0, 1e-6).unwrap();
        assert!(small.abs() < 1e-2);
    }

    #[test]
    fn sesqui_degenerate_cases() {
        let z = sesqui_normal_detailed(0.0, 0.1).unwrap();
        assert_eq!(z.kind, SesquiKind::BoundaryLimit);
        assert!((z.value + inv_normal_cdf(0.9).unwrap()).abs() < 1e-15);
        assert_eq!(
            sesqui_normal(f64::INFINITY, 0.2).unwrap(),
            f64::NEG_INFINITY
        );
        assert_eq!(sesqui_normal(f64::INFINITY, 0.7).unwrap(), f64::INFINITY);
        assert!(sesqui_normal(-1.0, 0.2).is_err());
        assert!(sesqui_normal(1.0, 0.0).is_err());
        assert!(sesqui_normal(1.0, 1.0).is_err());
    }

    #[test]
    fn sesqui_sign_structure() {
        // negative for small eps away from resonance
        assert!(sesqui_normal(1.2786, 0.01).unwrap() < 0.0);
        assert!(sesqui_normal(0.5, 0.01).unwrap() < 0.0);
        assert!(sesqui_normal(1.0, 0.01).unwrap() > 0.0);
    }

    #[test]
    fn rates_identity_pair() {
        let p = pv(&[0.6, 0.3, 0.1]);
        let r = rates(&TheoryKind::Entanglement, &p, &p, 0.05).unwrap();
        assert_eq!(r.rate, 1.0);
        assert_eq!(r.nu, 1.0);
        assert!(matches!(n_epsilon(&r), Err(Error::NoFiniteN(_))));
    }

    #[test]
    fn rates_fig2_pair() {
        let (p, q, theory) = fig2();
        let r = rates(&theory, &p, &q, 0.03).unwrap();
        assert!((r.rate - 1.0665).abs() < 2e-3);
        assert!((r.nu - 1.278_55).abs() < 1e-3);
        let u = rates(&TheoryKind::UnitaryNoisy(3), &p, &q, 0.03).unwrap();
        assert_eq!(r, u);
    }

    #[test]
    fn rates_degenerate_inputs() {
        let flat = ProbVec::uniform(3).unwrap();
        let p = pv(&[0.5, 0.3, 0.2]);
        assert!(matches!(
            rates(&TheoryKind::Entanglement, &p, &pv(&[1.0, 0.0, 0.0]), 0.1),
            Err(Error::UndefinedRate(_))
        ));
        let r = rates(&TheoryKind::Entanglement, &p, &pv(&[0.5, 0.5, 0.0]), 0.1).unwrap();
        assert_eq!(r.nu, f64::INFINITY);
        let g = TheoryKind::Athermality(GibbsSpec::uniform(3).unwrap());
        let r = rates(&g, &flat, &p, 0.1).unwrap();
        assert!(r.no_catalysis);
        assert_eq!(r.rate, 0.0);
        assert!(rates(&g, &pv(&[0.5, 0.5]), &pv(&[0.5, 0.5]), 0.1).is_err());
    }

    #[test]
    fn n_epsilon_examples() {
        let mk = |rate: f64, rate_prime: f64| SecondOrderRates {
            rate,
            rate_prime,
            nu: 1.0,
            f_value: 0.0,
            f_kind: SesquiKind::Interior,
            epsilon: 0.1,
            source_quantifier: 1.0,
            target_quantifier: 1.0,
            source_variance: 1.0,
            target_variance: 1.0,
            no_catalysis: false,
        };
        assert_eq!(n_epsilon(&mk(2.0, 3.0)).unwrap(), 9);
        assert_eq!(n_epsilon(&mk(1.5, 0.0)).unwrap(), 1);
        assert_eq!(n_epsilon(&mk(1.5, -2.0)).unwrap(), 1);
        assert!(n_epsilon(&mk(1.0, 1.0)).is_err());
    }

    #[test]
    fn catalyst_dimension_examples() {
        assert_eq!(catalyst_dimension(1, 3).unwrap().dc_exact, Some(1));
        assert_eq!(catalyst_dimension(2, 3).unwrap().dc_exact, Some(6));
        let plan = catalyst_dimension(5, 3).unwrap();
        assert_eq!(plan.dc_exact, Some(405));
        assert!((plan.log_dc - 405f64.ln()).abs() < 1e-12);
        assert_eq!(catalyst_dimension(80, 3).unwrap().dc_exact, None);
    }

    #[test]
    fn sufficiency_examples() {
        let (p, q, theory) = fig2();
        let rev = sufficiency_check(&theory, &q, &p, 0.03, 10.0).unwrap();
        assert_eq!(rev.verdict, Sufficiency::NotImplied);
        // f_ν(0.03) is slightly positive here, so any catalyst passes
        let easy = sufficiency_check(&theory, &p, &q, 0.03, 1e-3).unwrap();
        assert_eq!(easy.verdict, Sufficiency::Sufficient);
        let tiny = sufficiency_check(&theory, &p, &q, 0.01, 1e-3).unwrap();
        assert_eq!(tiny.verdict, Sufficiency::NotImplied);
        let huge = sufficiency_check(&theory, &p, &q, 0.01, 1e6).unwrap();
        assert_eq!(huge.verdict, Sufficiency::Sufficient);
        let noisy = sufficiency_check(&TheoryKind::UnitaryNoisy(3), &p, &q, 0.03, 1.0).unwrap();
        assert!((noisy.log_dc_total - (1.0 + 4f64.ln())).abs() < 1e-15);
        // a point mass source has no fluctuations
        let g = TheoryKind::Athermality(GibbsSpec::uniform(3).unwrap());
        let pure = sufficiency_check(&g, &pv(&[1.0, 0.0, 0.0]), &q, 0.03, 0.5).unwrap();
        assert_eq!(pure.verdict, Sufficiency::Sufficient);
    }

    #[test]
    fn predicted_error_decreases_with_catalyst() {
        let (p, q, theory) = fig2();
        let mut last = 1.0;
        for n in 1..=6 {
            let plan = catalyst_dimension(n, 3).unwrap();
            let e = predicted_error(&theory, &p, &q, plan.log_dc).unwrap();
            assert!(e < last);
            last = e;
        }
        assert!((last - 0.01125).abs() < 1e-3);
    }
}
