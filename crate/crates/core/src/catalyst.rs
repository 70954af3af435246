//! Exact classical simulation of the correlated-catalytic protocol.
//!
//! Given `n` and a target `χ` reachable from `p^{⊗n}`, the catalyst is
//!
//! ```text
//! ω = (1/n) Σ_{i=1..n} p^{⊗(i−1)} ⊗ χ_{(i+1..n)} ⊗ |i⟩⟨i|
//! ```
//!
//! on `C = C₁C₂`, where `C₁` holds `n − 1` copies of the system and `C₂` the
//! label `i`. `χ_{(a..b)}` is the marginal of `χ` on factors `a..b`. Running
//! the protocol on `p ⊗ ω` leaves, on label `j`,
//!
//! * `j = 1`: `χ`, with factor 1 on the system and factors `2..n` on `C₁`;
//! * `j ≥ 2`: `p^{⊗(j−1)} ⊗ χ_{(j..n)}`, with factor `j` moved onto the system.
//!
//! The catalyst marginal is then `ω` exactly and the system marginal is the
//! average of the single-factor marginals of `χ`.
//!
//! Only spectra are simulated. Errors are trace distances.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::majorization::{optimal_chi_slices, reachable, Direction};
use crate::second_order::{catalyst_dimension, TheoryKind};
use crate::spectra::{
    sorted_desc, tensor_power, trace_distance, ProbVec, ProductProbVec, DEFAULT_SIZE_CAP,
};

/// Largest tolerated deviation of the returned catalyst.
pub const EXACTNESS_TOLERANCE: f64 = 1e-12;

/// Optimal `χ` on `n` copies, embedded in the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Chi {
    pub chi: ProductProbVec,
    /// `δ(χ, q^{⊗n})`.
    pub chi_err: f64,
}

/// [`build_chi_directed`] with bistochastic free operations.
pub fn build_chi(p: &ProbVec, q: &ProbVec, n: usize) -> Result<Chi> {
    build_chi_directed(p, q, n, Direction::Bistochastic)
}

/// Closest `χ` to `q^{⊗n}` reachable from `p^{⊗n}`. The `k`-th largest entry
/// of `χ` sits where `q^{⊗n}` has its `k`-th largest entry, ties by index.
pub fn build_chi_directed(p: &ProbVec, q: &ProbVec, n: usize, direction: Direction) -> Result<Chi> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()));
    }
    let pn = tensor_power(p, n)?;
    let qn = tensor_power(q, n)?;
    let (chi, _) = optimal_chi_slices(pn.as_slice(), qn.as_slice(), direction);
    let ok = match direction {
        Direction::Bistochastic => prefix_dominates(pn.as_slice(), &chi),
        Direction::Locc => prefix_dominates(&chi, pn.as_slice()),
    };
    if !ok {
        return Err(Error::Internal(
            "optimal chi is not reachable from the source".into(),
        ));
    }
    let chi = ProductProbVec::from_parts(qn.factors().to_vec(), chi)?;
    let chi_err = trace_distance(&chi, &qn)?;
    Ok(Chi { chi, chi_err })
}

fn prefix_dominates(a: &[f64], b: &[f64]) -> bool {
    let (sa, sb) = (sorted_desc(a), sorted_desc(b));
    let (mut x, mut y) = (0.0, 0.0);
    sa.iter().zip(&sb).all(|(u, v)| {
        x += u;
        y += v;
        x >= y - EXACTNESS_TOLERANCE
    })
}

/// The block-structured catalyst `ω` over `C₁ × C₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalystState {
    pub n: usize,
    pub d_s: usize,
    /// Block `i` (0-based) is `p^{⊗i} ⊗ χ_{(i+2..n)}` over `n − 1` factors.
    pub blocks: Vec<ProductProbVec>,
}

impl CatalystState {
    /// Number of catalyst levels, `n · d_S^(n−1)`.
    pub fn dimension(&self) -> usize {
        self.n * self.blocks.first().map_or(1, |b| b.len())
    }

    /// Flat distribution with factors `[d_S; n−1]` then `[n]`, label last.
    pub fn to_product(&self) -> ProductProbVec {
        let inner = self.blocks[0].len();
        let w = 1.0 / self.n as f64;
        let mut probs = vec![0.0; inner * self.n];
        for (i, block) in self.blocks.iter().enumerate() {
            for (c, &v) in block.as_slice().iter().enumerate() {
                probs[c * self.n + i] = v * w;
            }
        }
        let mut factors = vec![self.d_s; self.n - 1];
        factors.push(self.n);
        ProductProbVec::from_parts_unchecked(factors, probs)
    }
}

fn check_chi_shape(p: &ProbVec, chi: &ProductProbVec, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("copy number must be >= 1".into()));
    }
    if chi.factors() != vec![p.dim(); n].as_slice() {
        return Err(Error::Shape(format!(
            "chi has factors {:?}, expected {n} copies of {}",
            chi.factors(),
            p.dim()
        )));
    }
    Ok(())
}

fn chi_tail(chi: &ProductProbVec, from: usize) -> Result<ProductProbVec> {
    let keep: Vec<usize> = (from..chi.factors().len()).collect();
    chi.marginal(&keep)
}

fn power_or_trivial(p: &ProbVec, k: usize) -> Result<ProductProbVec> {
    if k == 0 {
        Ok(ProductProbVec::trivial())
    } else {
        tensor_power(p, k)
    }
}

pub fn build_catalyst(p: &ProbVec, chi: &ProductProbVec, n: usize) -> Result<CatalystState> {
    check_chi_shape(p, chi, n)?;
    let blocks = (0..n)
        .map(|i| Ok(power_or_trivial(p, i)?.kron(&chi_tail(chi, i + 1)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CatalystState {
        n,
        d_s: p.dim(),
        blocks,
    })
}

/// Post-protocol distribution over `S × C₁ × C₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub n: usize,
    pub d_s: usize,
    /// Factors: `[d_S]` (system), `[d_S; n−1]` (`C₁`), `[n]` (`C₂`).
    pub state: ProductProbVec,
}

impl JointState {
    pub fn system_marginal(&self) -> Result<ProbVec> {
        Ok(self.state.marginal(&[0])?.flatten())
    }

    pub fn catalyst_marginal(&self) -> Result<ProductProbVec> {
        let keep: Vec<usize> = (1..=self.n).collect();
        self.state.marginal(&keep)
    }

    pub fn label_marginal(&self) -> Result<ProbVec> {
        Ok(self.state.marginal(&[self.n])?.flatten())
    }
}

pub fn assemble_final_state(p: &ProbVec, chi: &ProductProbVec, n: usize) -> Result<JointState> {
    check_chi_shape(p, chi, n)?;
    let branch_len = chi.len();
    let w = 1.0 / n as f64;
    let mut probs = vec![0.0; branch_len * n];
    for j in 0..n {
        let branch = if j == 0 {
            chi.clone()
        } else {
            // factor j goes to the system, the others keep their order
            let mut order = vec![j];
            order.extend((0..n).filter(|&k| k != j));
            power_or_trivial(p, j)?
                .kron(&chi_tail(chi, j)?)
                .permute_factors(&order)?
        };
        for (c, &v) in branch.as_slice().iter().enumerate() {
            probs[c * n + j] = v * w;
        }
    }
    let mut factors = vec![p.dim(); n];
    factors.push(n);
    Ok(JointState {
        n,
        d_s: p.dim(),
        state: ProductProbVec::from_parts_unchecked(factors, probs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalysisReport {
    pub n: usize,
    /// `n · d_S^(n−1)` when below `2^63`.
    pub d_c: Option<u64>,
    pub log_d_c: f64,
    pub chi_err: f64,
    pub system_err: f64,
    pub joint_err: f64,
    pub marginal_exactness: f64,
    pub feasible: bool,
}

pub fn verify_catalytic(
    final_state: &JointState,
    omega: &CatalystState,
    q: &ProbVec,
    chi_err: f64,
) -> Result<CatalysisReport> {
    if final_state.n != omega.n || final_state.d_s != omega.d_s || q.dim() != omega.d_s {
        return Err(Error::Shape(
            "final state, catalyst and target disagree".into(),
        ));
    }
    let omega_flat = omega.to_product();
    let marginal_exactness = trace_distance(&final_state.catalyst_marginal()?, &omega_flat)?;
    let system_err = trace_distance(&final_state.system_marginal()?, q)?;
    let reference = ProductProbVec::from_prob_vec(q).kron(&omega_flat);
    let joint_err = trace_distance(&final_state.state, &reference)?;
    let plan = catalyst_dimension(omega.n as u64, omega.d_s)?;
    let feasible = marginal_exactness <= EXACTNESS_TOLERANCE
        && system_err <= chi_err + EXACTNESS_TOLERANCE
        && joint_err <= 2.0 * chi_err + EXACTNESS_TOLERANCE;
    Ok(CatalysisReport {
        n: omega.n,
        d_c: plan.dc_exact,
        log_d_c: plan.log_dc,
        chi_err,
        system_err,
        joint_err,
        marginal_exactness,
        feasible,
    })
}

/// Full pipeline with bistochastic free operations.
pub fn run_protocol(p: &ProbVec, q: &ProbVec, n: usize) -> Result<CatalysisReport> {
    run_protocol_directed(p, q, n, Direction::Bistochastic)
}

pub fn run_protocol_directed(
    p: &ProbVec,
    q: &ProbVec,
    n: usize,
    direction: Direction,
) -> Result<CatalysisReport> {
    let Chi { chi, chi_err } = build_chi_directed(p, q, n, direction)?;
    let omega = build_catalyst(p, &chi, n)?;
    let final_state = assemble_final_state(p, &chi, n)?;
    verify_catalytic(&final_state, &omega, q, chi_err)
}

/// Runs the protocol in the order of `theory`. Non-uniform thermal references
/// are rejected: only their feasibility can be checked.
pub fn run_protocol_for(
    theory: &TheoryKind,
    p: &ProbVec,
    q: &ProbVec,
    n: usize,
) -> Result<CatalysisReport> {
    if let TheoryKind::Athermality(g) = theory {
        if !g.is_uniform() {
            return Err(Error::FiniteTemperature);
        }
    }
    theory.system_dim(p)?;
    run_protocol_directed(p, q, n, theory.direction())
}

/// Whether `n` copies of a `d`-dimensional system fit under the size cap.
pub fn fits_cap(d: usize, n: usize) -> bool {
    let mut size: u128 = n as u128;
    for _ in 0..n {
        size *= d as u128;
        if size > DEFAULT_SIZE_CAP as u128 {
            return false;
        }
    }
    true
}

/// Smallest `n ≤ n_max` whose protocol reaches `system_err ≤ eps_target`.
pub fn min_n_search(
    p: &ProbVec,
    q: &ProbVec,
    eps_target: f64,
    n_max: usize,
) -> Result<Option<usize>> {
    min_n_search_directed(p, q, eps_target, n_max, Direction::Bistochastic)
}

pub fn min_n_search_directed(
    p: &ProbVec,
    q: &ProbVec,
    eps_target: f64,
    n_max: usize,
    direction: Direction,
) -> Result<Option<usize>> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()));
    }
    if reachable(p, q, direction) {
        return Ok(Some(1));
    }
    for n in 1..=n_max {
        if !fits_cap(p.dim(), n) {
            break;
        }
        let report = run_protocol_directed(p, q, n, direction)?;
        if report.system_err <= eps_target {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
