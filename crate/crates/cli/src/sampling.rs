//! Fixed-entropy families of distributions.
//!
//! A state on the contour `H = h` is drawn by sampling a flat-Dirichlet point
//! `r` with `H(r) < h` (rejecting the rest) and bisecting the segment from the
//! uniform distribution to `r` for the entropy `h`.

use catalysis::spectra::shannon_entropy;
use catalysis::ProbVec;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{CliError, CliResult};

/// Entropy tolerance of the contour bisection, in nats.
pub const CONTOUR_TOLERANCE: f64 = 1e-10;
const MAX_REJECTIONS: usize = 1_000_000;

/// Point on the segment from uniform towards `r` with entropy `h`.
///
/// Needs `H(r) ≤ h ≤ ln d`.
pub fn bisect_to_entropy(r: &[f64], h: f64) -> CliResult<ProbVec> {
    let d = r.len();
    let u = 1.0 / d as f64;
    let at = |t: f64| -> CliResult<ProbVec> {
        Ok(ProbVec::new(
            r.iter().map(|x| (1.0 - t) * u + t * x).collect(),
        )?)
    };
    let max = (d as f64).ln();
    if h > max + CONTOUR_TOLERANCE || h < 0.0 {
        return Err(CliError::Infeasible(format!(
            "entropy {h} nats outside [0, ln {d}]"
        )));
    }
    let end = at(1.0)?;
    if shannon_entropy(&end) > h + CONTOUR_TOLERANCE {
        return Err(CliError::Infeasible(format!(
            "direction has entropy {} nats, above the contour {h}",
            shannon_entropy(&end)
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shannon_entropy(&at(mid)?) > h {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let (a, b) = (at(lo)?, at(hi)?);
    let p = if (shannon_entropy(&a) - h).abs() <= (shannon_entropy(&b) - h).abs() {
        a
    } else {
        b
    };
    let err = (shannon_entropy(&p) - h).abs();
    if err > CONTOUR_TOLERANCE {
        return Err(CliError::Infeasible(format!(
            "contour bisection stalled ({err:e} nats off)"
        )));
    }
    Ok(p)
}

/// `count` states of dimension `d` with entropy `h` nats, sorted
/// nonincreasingly, reproducible from `seed`.
pub fn sample_contour(d: usize, h: f64, count: usize, seed: u64) -> CliResult<Vec<ProbVec>> {
    let max = (d as f64).ln();
    if !(h > 0.0) || h > max {
        return Err(CliError::Infeasible(format!(
            "no state of dimension {d} has entropy {h} nats (need 0 < H <= {max})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut rejected = 0;
    while out.len() < count {
        let raw: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let s: f64 = raw.iter().sum();
        let r: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let hr = shannon_entropy(&ProbVec::new(r.clone())?);
        if hr >= h {
            rejected += 1;
            if rejected > MAX_REJECTIONS {
                return Err(CliError::Infeasible(format!(
                    "entropy contour {h} nats is too close to 0 to sample"
                )));
            }
            continue;
        }
        let mut p = bisect_to_entropy(&r, h)?.into_vec();
        p.sort_by(|a, b| b.total_cmp(a));
        out.push(ProbVec::new(p)?);
    }
    Ok(out)
}

/// Target with entropy `h` on the ray from uniform through `direction`.
pub fn contour_target(direction: &[f64], h: f64) -> CliResult<ProbVec> {
    if direction.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(CliError::Config(
            "target direction must be nonnegative".into(),
        ));
    }
    let s: f64 = direction.iter().sum();
    if !(s > 0.0) {
        return Err(CliError::Config("target direction is zero".into()));
    }
    let r: Vec<f64> = direction.iter().map(|x| x / s).collect();
    bisect_to_entropy(&r, h)
}
