//! Probability-vector core.
//!
//! Every classical object in the toolkit (spectra of diagonal states, Schmidt
//! vectors, incoherent thermodynamic states) is a [`ProbVec`]. Tensor powers
//! and catalyst registers are [`ProductProbVec`]s laid out in row-major order:
//! the multi-index `(i_1, ..., i_k)` over factor dimensions `(d_1, ..., d_k)`
//! lives at flat position `((i_1 * d_2 + i_2) * d_3 + ...) + i_k`, so the last
//! factor varies fastest.
//!
//! All entropic quantities are in nats. [`Base`] converts for display only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries may dip below zero by this much before being rejected.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;
/// Sums within this distance of 1 are kept bit-for-bit.
pub const SUM_TOLERANCE: f64 = 1e-12;
/// Sums within this distance of 1 are renormalized; beyond it they are rejected.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;
/// Default maximum number of entries of a product distribution.
pub const DEFAULT_SIZE_CAP: usize = 2_000_000;

/// Logarithm base used when presenting entropies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Base {
    /// Natural logarithm (nats).
    #[default]
    E,
    /// Binary logarithm (bits).
    Two,
}

impl Base {
    /// Converts a quantity in nats to this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            Base::E => nats,
            Base::Two => nats / std::f64::consts::LN_2,
        }
    }

    /// Converts a quantity expressed in this base to nats.
    pub fn to_nats(self, value: f64) -> f64 {
        match self {
            Base::E => value,
            Base::Two => value * std::f64::consts::LN_2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Base::E => "e",
            Base::Two => "2",
        }
    }
}

impl std::str::FromStr for Base {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "e" | "E" | "nat" | "nats" => Ok(Base::E),
            "2" | "bit" | "bits" => Ok(Base::Two),
            other => Err(Error::Parse(format!("unknown entropy base `{other}`"))),
        }
    }
}

/// Shared read access to a (possibly multipartite) distribution.
pub trait Distribution {
    fn probs(&self) -> &[f64];
    /// Factor dimensions; a single entry for plain vectors.
    fn shape(&self) -> Vec<usize>;
}

/// A finite probability distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbVec {
    probs: Vec<f64>,
}

impl ProbVec {
    /// Validates and wraps `values`.
    ///
    /// Entries in `[-1e-12, 0)` are clamped to zero. A sum within `1e-12` of one
    /// is kept as is, a sum within `1e-9` is renormalized, anything else is an
    /// error. Order is preserved.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        let mut probs = values;
        for (index, v) in probs.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(index));
            }
            if *v < 0.0 {
                if *v < -NEGATIVE_TOLERANCE {
                    return Err(Error::NegativeEntry { index, value: *v });
                }
                *v = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        let gap = (sum - 1.0).abs();
        if gap > RENORMALIZE_TOLERANCE {
            return Err(Error::NotNormalized(sum));
        }
        if gap > SUM_TOLERANCE {
            probs.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(Self { probs })
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            probs: vec![1.0 / dim as f64; dim],
        })
    }

    /// Point mass on `index`.
    pub fn point(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Domain(format!("index {index} >= dim {dim}")));
        }
        let mut probs = vec![0.0; dim];
        probs[index] = 1.0;
        Ok(Self { probs })
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    /// Indices ordered by nonincreasing probability; ties keep index order.
    pub fn argsort_desc(&self) -> Vec<usize> {
        argsort_desc(&self.probs)
    }

    /// Nonincreasing rearrangement.
    pub fn sorted_desc(&self) -> Vec<f64> {
        sorted_desc(&self.probs)
    }

    /// Number of strictly positive entries.
    pub fn support(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn has_full_support(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    /// Appends zeros up to `dim`. Returns `self` unchanged if already that long.
    pub fn zero_padded(&self, dim: usize) -> Self {
        let mut probs = self.probs.clone();
        if probs.len() < dim {
            probs.resize(dim, 0.0);
        }
        Self { probs }
    }
}

impl Distribution for ProbVec {
    fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn shape(&self) -> Vec<usize> {
        vec![self.probs.len()]
    }
}

pub(crate) fn argsort_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    // sort_by is stable
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

pub(crate) fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// A distribution over a product index set, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductProbVec {
    factors: Vec<usize>,
    probs: Vec<f64>,
}

impl ProductProbVec {
    /// Wraps raw entries. `probs.len()` must equal the product of `factors`;
    /// an empty factor list describes the trivial one-point space.
    pub fn from_parts(factors: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let size = checked_size(&factors, usize::MAX)?;
        if size != probs.len() {
            return Err(Error::Shape(format!(
                "{} entries for factors {:?}",
                probs.len(),
                factors
            )));
        }
        let checked = ProbVec::new(probs)?;
        Ok(Self {
            factors,
            probs: checked.into_vec(),
        })
    }

    pub(crate) fn from_parts_unchecked(factors: Vec<usize>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(factors.iter().product::<usize>(), probs.len());
        Self { factors, probs }
    }

    /// The one-point distribution with no factors.
    pub fn trivial() -> Self {
        Self {
            factors: Vec::new(),
            probs: vec![1.0],
        }
    }

    pub fn from_prob_vec(p: &ProbVec) -> Self {
        Self {
            factors: vec![p.dim()],
            probs: p.as_slice().to_vec(),
        }
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    /// Flat view as a plain probability vector.
    pub fn flatten(&self) -> ProbVec {
        ProbVec {
            probs: self.probs.clone(),
        }
    }

    /// Entry at a multi-index.
    pub fn get(&self, index: &[usize]) -> f64 {
        self.probs[flat_index(&self.factors, index)]
    }

    /// `self ⊗ other`, with `other`'s factors appended after `self`'s.
    pub fn kron(&self, other: &ProductProbVec) -> ProductProbVec {
        let mut probs = Vec::with_capacity(self.probs.len() * other.probs.len());
        for &a in &self.probs {
            probs.extend(other.probs.iter().map(|&b| a * b));
        }
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        ProductProbVec { factors, probs }
    }

    /// Sums out every factor not listed in `keep`. The kept factors appear in
    /// ascending order of their original position.
    pub fn marginal(&self, keep: &[usize]) -> Result<ProductProbVec> {
        let k = self.factors.len();
        let mut kept = vec![false; k];
        for &f in keep {
            if f >= k {
                return Err(Error::FactorOutOfRange(f));
            }
            kept[f] = true;
        }
        let out_factors: Vec<usize> = (0..k)
            .filter(|&f| kept[f])
            .map(|f| self.factors[f])
            .collect();
        if out_factors.len() == k {
            return Ok(self.clone());
        }
        let out_len: usize = out_factors.iter().product();
        // stride of every input factor inside the output layout (0 when summed out)
        let mut out_stride = vec![0usize; k];
        let mut s = 1;
        for f in (0..k).rev() {
            if kept[f] {
                out_stride[f] = s;
                s *= self.factors[f];
            }
        }
        let mut out = vec![0.0; out_len];
        let mut digits = vec![0usize; k];
        let mut target = 0usize;
        for &p in &self.probs {
            out[target] += p;
            // odometer increment, last factor fastest
            for f in (0..k).rev() {
                digits[f] += 1;
                target += out_stride[f];
                if digits[f] < self.factors[f] {
                    break;
                }
                target -= out_stride[f] * digits[f];
                digits[f] = 0;
            }
        }
        Ok(ProductProbVec {
            factors: out_factors,
            probs: out,
        })
    }

    /// Relabels factors: output factor `j` is input factor `order[j]`.
    pub fn permute_factors(&self, order: &[usize]) -> Result<ProductProbVec> {
        let k = self.factors.len();
        if order.len() != k {
            return Err(Error::Shape(format!(
                "permutation of length {} for {k} factors",
                order.len()
            )));
        }
        let mut seen = vec![false; k];
        for &o in order {
            if o >= k || seen[o] {
                return Err(Error::Shape(format!("{order:?} is not a permutation")));
            }
            seen[o] = true;
        }
        let out_factors: Vec<usize> = order.iter().map(|&o| self.factors[o]).collect();
        let out_strides = strides(&out_factors);
        // stride in the output of each input factor
        let mut stride_of_input = vec![0usize; k];
        for (j, &o) in order.iter().enumerate() {
            stride_of_input[o] = out_strides[j];
        }
        let mut out = vec![0.0; self.probs.len()];
        let mut digits = vec![0usize; k];
        let mut target = 0usize;
        for &p in &self.probs {
            out[target] = p;
            for f in (0..k).rev() {
                digits[f] += 1;
                target += stride_of_input[f];
                if digits[f] < self.factors[f] {
                    break;
                }
                target -= stride_of_input[f] * digits[f];
                digits[f] = 0;
            }
        }
        Ok(ProductProbVec {
            factors: out_factors,
            probs: out,
        })
    }
}

impl Distribution for ProductProbVec {
    fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn shape(&self) -> Vec<usize> {
        self.factors.clone()
    }
}

pub(crate) fn strides(factors: &[usize]) -> Vec<usize> {
    let mut out = vec![1usize; factors.len()];
    for f in (0..factors.len().saturating_sub(1)).rev() {
        out[f] = out[f + 1] * factors[f + 1];
    }
    out
}

pub(crate) fn flat_index(factors: &[usize], index: &[usize]) -> usize {
    debug_assert_eq!(factors.len(), index.len());
    index
        .iter()
        .zip(factors)
        .fold(0usize, |acc, (&i, &d)| acc * d + i)
}

fn checked_size(factors: &[usize], cap: usize) -> Result<usize> {
    let mut size: u128 = 1;
    for &d in factors {
        if d == 0 {
            return Err(Error::Shape("zero-dimensional factor".into()));
        }
        size = size.saturating_mul(d as u128);
    }
    if size > cap as u128 {
        return Err(Error::SizeCap { size, cap });
    }
    Ok(size as usize)
}

/// A strictly positive reference (Gibbs) distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsSpec {
    weights: ProbVec,
}

impl GibbsSpec {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let weights = ProbVec::new(weights)?;
        if let Some(i) = weights.as_slice().iter().position(|&w| w <= 0.0) {
            return Err(Error::NonPositiveWeight(i));
        }
        Ok(Self { weights })
    }

    /// Boltzmann weights `exp(-beta E_i) / Z`. `beta = 0` gives the uniform
    /// distribution exactly.
    pub fn from_energies(energies: &[f64], beta: f64) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::Empty);
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidBeta(beta));
        }
        if let Some(i) = energies.iter().position(|e| !e.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if beta == 0.0 {
            return Self::uniform(energies.len());
        }
        let e_min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        let raw: Vec<f64> = energies
            .iter()
            .map(|&e| (-beta * (e - e_min)).exp())
            .collect();
        let z: f64 = raw.iter().sum();
        Self::from_weights(raw.into_iter().map(|w| w / z).collect())
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        Ok(Self {
            weights: ProbVec::uniform(dim)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.weights.dim()
    }

    pub fn weights(&self) -> &ProbVec {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        let w = self.weights.as_slice();
        w.iter().all(|&x| x == w[0])
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(a, b));
    }
    Ok(())
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &ProbVec) -> f64 {
    -p.as_slice()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

/// Entropy variance `Σ p_i (ln p_i + H(p))^2`.
pub fn entropy_variance(p: &ProbVec) -> f64 {
    let h = shannon_entropy(p);
    p.as_slice()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| {
            let c = x.ln() + h;
            x * c * c
        })
        .sum::<f64>()
        .max(0.0)
}

/// Relative entropy `D(p‖γ)` in nats.
pub fn relative_entropy(p: &ProbVec, gamma: &GibbsSpec) -> Result<f64> {
    check_dims(p.dim(), gamma.dim())?;
    let d = p
        .as_slice()
        .iter()
        .zip(gamma.weights().as_slice())
        .filter(|(&x, _)| x > 0.0)
        .map(|(&x, &g)| x * (x.ln() - g.ln()))
        .sum::<f64>();
    Ok(d.max(0.0))
}

/// Relative entropy variance `V(p‖γ)`.
///
/// Evaluated in centered form `Σ p_i (ln p_i - ln γ_i - D)^2`, which equals the
/// raw-moment definition and cannot go negative.
pub fn relative_entropy_variance(p: &ProbVec, gamma: &GibbsSpec) -> Result<f64> {
    check_dims(p.dim(), gamma.dim())?;
    let d = relative_entropy(p, gamma)?;
    let v = p
        .as_slice()
        .iter()
        .zip(gamma.weights().as_slice())
        .filter(|(&x, _)| x > 0.0)
        .map(|(&x, &g)| {
            let c = x.ln() - g.ln() - d;
            x * c * c
        })
        .sum::<f64>();
    Ok(v.max(0.0))
}

/// Rényi entropy `H_α(p) = ln(Σ p_i^α) / (1 - α)`.
///
/// `α = 1` is Shannon, `α = 0` is the log of the support size, `α = ±∞` give
/// `-ln max p` and `-ln min p`. Negative orders need full support.
pub fn renyi_entropy(p: &ProbVec, alpha: f64) -> Result<f64> {
    if alpha.is_nan() {
        return Err(Error::Domain("alpha is NaN".into()));
    }
    let probs = p.as_slice();
    if alpha < 0.0 {
        if let Some(i) = probs.iter().position(|&x| x <= 0.0) {
            return Err(Error::ZeroEntry(i));
        }
    }
    if alpha == f64::INFINITY {
        let max = probs.iter().cloned().fold(0.0, f64::max);
        return Ok(-max.ln());
    }
    if alpha == f64::NEG_INFINITY {
        let min = probs.iter().cloned().fold(f64::INFINITY, f64::min);
        return Ok(-min.ln());
    }
    if alpha == 0.0 {
        return Ok((p.support() as f64).ln());
    }
    if (alpha - 1.0).abs() < 1e-9 {
        return Ok(shannon_entropy(p));
    }
    // log-sum-exp of α ln p_i over the support
    let logs: Vec<f64> = probs
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| alpha * x.ln())
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logs.iter().map(|&l| (l - m).exp()).sum::<f64>().ln();
    Ok(lse / (1.0 - alpha))
}

/// Burg entropy `(1/d) Σ ln p_i + ln d`, normalized so the uniform
/// distribution scores zero. Requires full support.
pub fn burg_entropy(p: &ProbVec) -> Result<f64> {
    if let Some(i) = p.as_slice().iter().position(|&x| x <= 0.0) {
        return Err(Error::ZeroEntry(i));
    }
    let d = p.dim() as f64;
    Ok(p.as_slice().iter().map(|x| x.ln()).sum::<f64>() / d + d.ln())
}

/// Outcome of the grid-based multi-copy condition `H_α(p) > H_α(q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MulticopyVerdict {
    /// Every grid order passed with a margin above [`MULTICOPY_MARGIN`].
    /// Grid-based: a heuristic certificate, not a proof.
    Satisfied { grid_points: usize, min_margin: f64 },
    /// `H_α(p) <= H_α(q)` at the witness order.
    Violated {
        #[serde(serialize_with = "crate::io::serialize_real")]
        alpha: f64,
        margin: f64,
    },
    /// Every grid order passed, but the smallest margin is below
    /// [`MULTICOPY_INCONCLUSIVE`], so the grid may have skipped a violation.
    Inconclusive { grid_points: usize, min_margin: f64 },
}

/// A grid order passes when `H_α(p) - H_α(q)` exceeds this.
pub const MULTICOPY_MARGIN: f64 = 1e-12;
/// Passing margins below this are reported as inconclusive.
pub const MULTICOPY_INCONCLUSIVE: f64 = 1e-9;
/// Default number of log-spaced interior orders.
pub const DEFAULT_ALPHA_GRID: usize = 257;

/// The order grid: `grid_size` log-spaced points on `[1e-3, 1e3]` followed by
/// the analytic orders `0, 1, 2, ∞`.
pub fn alpha_grid(grid_size: usize) -> Vec<f64> {
    let mut grid = Vec::with_capacity(grid_size + 4);
    grid.push(0.0);
    match grid_size {
        0 => {}
        1 => grid.push(1.0),
        n => {
            let (lo, hi) = (-3.0f64, 3.0f64);
            for k in 0..n {
                let t = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                grid.push(10f64.powf(t));
            }
        }
    }
    grid.extend_from_slice(&[1.0, 2.0, f64::INFINITY]);
    grid
}

/// Checks `H_α(p) > H_α(q)` on [`alpha_grid`]. Vectors of unequal length are
/// zero-padded.
pub fn multicopy_feasibility_check(
    p: &ProbVec,
    q: &ProbVec,
    alpha_grid_size: usize,
) -> MulticopyVerdict {
    let d = p.dim().max(q.dim());
    let (p, q) = (p.zero_padded(d), q.zero_padded(d));
    let grid = alpha_grid(alpha_grid_size);
    let mut min_margin = f64::INFINITY;
    for &alpha in &grid {
        // nonnegative orders never fail on zero entries
        let hp = renyi_entropy(&p, alpha).expect("alpha >= 0");
        let hq = renyi_entropy(&q, alpha).expect("alpha >= 0");
        let margin = hp - hq;
        if margin <= MULTICOPY_MARGIN {
            return MulticopyVerdict::Violated { alpha, margin };
        }
        min_margin = min_margin.min(margin);
    }
    if min_margin < MULTICOPY_INCONCLUSIVE {
        MulticopyVerdict::Inconclusive {
            grid_points: grid.len(),
            min_margin,
        }
    } else {
        MulticopyVerdict::Satisfied {
            grid_points: grid.len(),
            min_margin,
        }
    }
}

/// `p^{⊗n}` with the default size cap.
pub fn tensor_power(p: &ProbVec, n: usize) -> Result<ProductProbVec> {
    tensor_power_capped(p, n, DEFAULT_SIZE_CAP)
}

pub fn tensor_power_capped(p: &ProbVec, n: usize, cap: usize) -> Result<ProductProbVec> {
    if n == 0 {
        return Err(Error::Domain("tensor power needs n >= 1".into()));
    }
    let factors = vec![p.dim(); n];
    checked_size(&factors, cap)?;
    let base = ProductProbVec::from_prob_vec(p);
    let mut out = base.clone();
    for _ in 1..n {
        out = out.kron(&base);
    }
    Ok(out)
}

/// Trace distance `½ Σ |a_i - b_i|` between distributions of identical shape.
pub fn trace_distance<D: Distribution + ?Sized>(a: &D, b: &D) -> Result<f64> {
    let (sa, sb) = (a.shape(), b.shape());
    if sa != sb {
        return Err(Error::Shape(format!("{sa:?} vs {sb:?}")));
    }
    Ok(l1_half(a.probs(), b.probs()))
}

pub(crate) fn l1_half(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
