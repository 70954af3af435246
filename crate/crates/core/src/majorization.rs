//! Majorization, thermo-majorization and approximate majorization.
//!
//! Two directions of approximate majorization are supported. Under
//! [`Direction::Bistochastic`] the source may only be degraded by a doubly
//! stochastic map, so the best output `χ` satisfies `p ≻ χ`; this governs noisy
//! and infinite-temperature thermal operations. Under [`Direction::Locc`] the
//! order is reversed (`χ ≻ p`), which is how Schmidt vectors of pure
//! bipartite states transform under LOCC.
//!
//! The closed-form solvers are cross-checked by [`lp_oracle`] and
//! [`lp_oracle_directed`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Sense};
use crate::spectra::{argsort_desc, l1_half, sorted_desc, GibbsSpec, ProbVec};

/// Slack used by every partial-sum comparison.
pub const MAJORIZATION_TOLERANCE: f64 = 1e-12;
/// Largest dimension accepted by the LP oracles.
pub const ORACLE_DIM_CAP: usize = 6;

/// Which order the free operations respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Reachable outputs are majorized by the source.
    #[default]
    Bistochastic,
    /// Reachable outputs majorize the source.
    Locc,
}

fn pad_pair(p: &ProbVec, q: &ProbVec) -> (Vec<f64>, Vec<f64>) {
    let d = p.dim().max(q.dim());
    (p.zero_padded(d).into_vec(), q.zero_padded(d).into_vec())
}

fn majorizes_slices(p: &[f64], q: &[f64]) -> bool {
    let (ps, qs) = (sorted_desc(p), sorted_desc(q));
    let (mut sp, mut sq) = (0.0, 0.0);
    for (a, b) in ps.iter().zip(&qs) {
        sp += a;
        sq += b;
        if sp < sq - MAJORIZATION_TOLERANCE {
            return false;
        }
    }
    true
}

/// `p ≻ q`: every partial sum of sorted `p` dominates that of sorted `q`.
/// The shorter vector is zero-padded.
pub fn majorizes(p: &ProbVec, q: &ProbVec) -> bool {
    let (p, q) = pad_pair(p, q);
    majorizes_slices(&p, &q)
}

/// Whether `q` is reachable from `p` exactly under `direction`.
pub fn reachable(p: &ProbVec, q: &ProbVec, direction: Direction) -> bool {
    match direction {
        Direction::Bistochastic => majorizes(p, q),
        Direction::Locc => majorizes(q, p),
    }
}

/// Piecewise-linear Lorenz curve of a distribution relative to a reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorenzCurve {
    points: Vec<(f64, f64)>,
}

impl LorenzCurve {
    /// Cumulates `(γ_i, p_i)` in decreasing order of `p_i / γ_i`, ties by index.
    pub fn new(p: &ProbVec, gamma: &GibbsSpec) -> Result<Self> {
        if p.dim() != gamma.dim() {
            return Err(Error::DimensionMismatch(p.dim(), gamma.dim()));
        }
        let g = gamma.weights().as_slice();
        let ratios: Vec<f64> = p.as_slice().iter().zip(g).map(|(a, b)| a / b).collect();
        let order = argsort_desc(&ratios);
        let mut points = Vec::with_capacity(p.dim() + 1);
        points.push((0.0, 0.0));
        let (mut x, mut y) = (0.0, 0.0);
        for &i in &order {
            x += g[i];
            y += p.as_slice()[i];
            points.push((x, y));
        }
        *points.last_mut().expect("nonempty") = (1.0, 1.0);
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Height of the curve at `x ∈ [0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let k = self.points.partition_point(|&(px, _)| px < x);
        let (x1, y1) = self.points[k];
        let (x0, y0) = self.points[k - 1];
        if x1 - x0 <= 0.0 {
            return y1;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Whether this curve lies on or above `other` everywhere.
    pub fn dominates(&self, other: &LorenzCurve) -> bool {
        // self is concave and other is piecewise linear, so other's vertices suffice
        other
            .points
            .iter()
            .all(|&(x, y)| self.eval(x) >= y - MAJORIZATION_TOLERANCE)
    }
}

/// Thermo-majorization of `q` by `p` relative to `gamma`. With a uniform
/// reference this is exactly [`majorizes`].
pub fn thermo_majorizes(p: &ProbVec, q: &ProbVec, gamma: &GibbsSpec) -> Result<bool> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()));
    }
    if p.dim() != gamma.dim() {
        return Err(Error::DimensionMismatch(p.dim(), gamma.dim()));
    }
    if gamma.is_uniform() {
        return Ok(majorizes(p, q));
    }
    Ok(LorenzCurve::new(p, gamma)?.dominates(&LorenzCurve::new(q, gamma)?))
}

/// Lowers the top of a nonincreasing vector so that exactly `mass` is removed.
fn cut_top(v: &mut [f64], mass: f64) {
    if mass <= 0.0 {
        return;
    }
    let mut head = 0.0;
    for k in 1..=v.len() {
        head += v[k - 1];
        let level = (head - mass) / k as f64;
        if k == v.len() || level >= v[k] {
            v[..k].iter_mut().for_each(|x| *x = level);
            return;
        }
    }
}

/// Raises the bottom of a nonincreasing vector so that exactly `mass` is added.
fn fill_bottom(v: &mut [f64], mass: f64) {
    if mass <= 0.0 {
        return;
    }
    let d = v.len();
    let mut tail = 0.0;
    for k in 1..=d {
        tail += v[d - k];
        let level = (tail + mass) / k as f64;
        if k == d || level <= v[d - k - 1] {
            v[d - k..].iter_mut().for_each(|x| *x = level);
            return;
        }
    }
}

/// Best bistochastic approximation: `χ` with `p ≻ χ` closest to `q`.
///
/// The error is the largest partial-sum deficit `max_k (Q_k - P_k)₊` of the
/// sorted vectors. The minimizer removes that mass from the top of `q` and
/// spreads it over the bottom, which keeps every partial sum of `χ` at or below
/// `p`'s. The result is returned in `q`'s index order.
pub fn optimal_chi(p: &ProbVec, q: &ProbVec) -> (ProbVec, f64) {
    optimal_chi_directed(p, q, Direction::Bistochastic)
}

/// [`optimal_chi`] for either direction. Under [`Direction::Locc`] the error is
/// `max_k (P_k - Q_k)₊`, added to the largest entry of `q` and removed from
/// the smallest entries.
pub fn optimal_chi_directed(p: &ProbVec, q: &ProbVec, direction: Direction) -> (ProbVec, f64) {
    let (p, q) = pad_pair(p, q);
    let (chi, err) = optimal_chi_slices(&p, &q, direction);
    (ProbVec::new(chi).expect("mass-preserving"), err)
}

pub(crate) fn optimal_chi_slices(p: &[f64], q: &[f64], direction: Direction) -> (Vec<f64>, f64) {
    let d = q.len();
    let order = argsort_desc(q);
    let mut qs: Vec<f64> = order.iter().map(|&i| q[i]).collect();
    let ps = sorted_desc(p);
    let (mut sp, mut sq, mut deficit) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..d {
        sp += ps[k];
        sq += qs[k];
        let gap = match direction {
            Direction::Bistochastic => sq - sp,
            Direction::Locc => sp - sq,
        };
        deficit = deficit.max(gap);
    }
    if deficit <= MAJORIZATION_TOLERANCE {
        return (q.to_vec(), 0.0);
    }
    match direction {
        Direction::Bistochastic => {
            let u = 1.0 / d as f64;
            let to_uniform: f64 = 0.5 * qs.iter().map(|x| (x - u).abs()).sum::<f64>();
            if deficit >= to_uniform {
                return (vec![u; d], to_uniform);
            }
            cut_top(&mut qs, deficit);
            fill_bottom(&mut qs, deficit);
        }
        Direction::Locc => {
            qs[0] += deficit;
            let mut rest = deficit;
            for k in (1..d).rev() {
                let take = qs[k].min(rest);
                qs[k] -= take;
                rest -= take;
                if rest <= 0.0 {
                    break;
                }
            }
        }
    }
    let mut chi = vec![0.0; d];
    for (k, &i) in order.iter().enumerate() {
        chi[i] = qs[k];
    }
    let err = l1_half(&chi, q);
    (chi, err)
}

/// Minimum of `½‖Dp − q‖₁` over doubly stochastic `D`, by linear programming.
pub fn lp_oracle(p: &ProbVec, q: &ProbVec) -> Result<f64> {
    lp_oracle_directed(p, q, Direction::Bistochastic)
}

/// LP oracle for either direction.
///
/// The bistochastic problem is one LP over the Birkhoff polytope. The LOCC
/// problem (`min δ(χ, q)` subject to `χ ≻ p`) is not convex, so it is solved
/// as one LP per ordering of `χ`'s entries.
pub fn lp_oracle_directed(p: &ProbVec, q: &ProbVec, direction: Direction) -> Result<f64> {
    let (p, q) = pad_pair(p, q);
    let d = p.len();
    if d > ORACLE_DIM_CAP {
        return Err(Error::OracleCap {
            dim: d,
            cap: ORACLE_DIM_CAP,
        });
    }
    match direction {
        Direction::Bistochastic => birkhoff_lp(&p, &q),
        Direction::Locc => {
            let mut best = f64::INFINITY;
            for perm in permutations(d) {
                if let Some(v) = ordered_locc_lp(&p, &q, &perm)? {
                    best = best.min(v);
                }
            }
            if best.is_finite() {
                Ok(best)
            } else {
                Err(Error::Internal(
                    "no ordering admits a feasible point".into(),
                ))
            }
        }
    }
}

fn optimal_value(lp: &LinearProgram) -> Result<Option<f64>> {
    match lp.solve()? {
        LpOutcome::Optimal { value, .. } => Ok(Some(value)),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Internal(
            "bounded objective reported unbounded".into(),
        )),
    }
}

/// Variables: `D[i][j]` (row-major, `d²`), then `t_i` (`d`).
fn birkhoff_lp(p: &[f64], q: &[f64]) -> Result<f64> {
    let d = p.len();
    let n = d * d + d;
    let mut cost = vec![0.0; n];
    cost[d * d..].iter_mut().for_each(|c| *c = 0.5);
    let mut lp = LinearProgram::new(cost);
    for i in 0..d {
        let mut row = vec![0.0; n];
        row[i * d..(i + 1) * d].iter_mut().for_each(|c| *c = 1.0);
        lp.add_row(row, Sense::Eq, 1.0);
        let mut col = vec![0.0; n];
        (0..d).for_each(|k| col[k * d + i] = 1.0);
        lp.add_row(col, Sense::Eq, 1.0);
    }
    for i in 0..d {
        // (Dp)_i - t_i <= q_i and -(Dp)_i - t_i <= -q_i
        let mut up = vec![0.0; n];
        for j in 0..d {
            up[i * d + j] = p[j];
        }
        up[d * d + i] = -1.0;
        let mut down: Vec<f64> = up.iter().map(|v| -v).collect();
        down[d * d + i] = -1.0;
        lp.add_row(up, Sense::Le, q[i]);
        lp.add_row(down, Sense::Le, -q[i]);
    }
    optimal_value(&lp)?.ok_or_else(|| Error::Internal("Birkhoff LP infeasible".into()))
}

/// Variables: `χ_i` (`d`), then `t_i` (`d`). `perm` fixes the descending order of `χ`.
fn ordered_locc_lp(p: &[f64], q: &[f64], perm: &[usize]) -> Result<Option<f64>> {
    let d = p.len();
    let n = 2 * d;
    let mut cost = vec![0.0; n];
    cost[d..].iter_mut().for_each(|c| *c = 0.5);
    let mut lp = LinearProgram::new(cost);
    let mut sum = vec![0.0; n];
    sum[..d].iter_mut().for_each(|c| *c = 1.0);
    lp.add_row(sum, Sense::Eq, 1.0);
    let ps = sorted_desc(p);
    let mut prefix = vec![0.0; n];
    let mut target = 0.0;
    for k in 0..d.saturating_sub(1) {
        let mut ord = vec![0.0; n];
        ord[perm[k]] = 1.0;
        ord[perm[k + 1]] = -1.0;
        lp.add_row(ord, Sense::Ge, 0.0);
        prefix[perm[k]] = 1.0;
        target += ps[k];
        lp.add_row(prefix.clone(), Sense::Ge, target);
    }
    for i in 0..d {
        let mut up = vec![0.0; n];
        up[i] = 1.0;
        up[d + i] = -1.0;
        lp.add_row(up, Sense::Le, q[i]);
        let mut down = vec![0.0; n];
        down[i] = -1.0;
        down[d + i] = -1.0;
        lp.add_row(down, Sense::Le, -q[i]);
    }
    optimal_value(&lp)
}

/// All permutations of `0..d` in lexicographic order.
fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..d.saturating_sub(1))
            .rev()
            .find(|&i| cur[i] < cur[i + 1])
        else {
            return out;
        };
        let j = (i + 1..d)
            .rev()
            .find(|&j| cur[j] > cur[i])
            .expect("successor");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
}

/// One two-level mixing step.
///
/// Acting on `x`, it sets `x_i ← (1−t)·x_i + t·x_j` and
/// `x_j ← t·x_i + (1−t)·x_j`. `t = 1` swaps the two entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTransform {
    pub i: usize,
    pub j: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TTransformSeq {
    pub steps: Vec<TTransform>,
}

impl TTransformSeq {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Steps that are not pure swaps.
    pub fn mixing_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.t != 1.0).count()
    }
}

const TT_EQUAL: f64 = 1e-15;

/// A sequence of T-transforms carrying `p` to `q`, given `p ≻ q`.
///
/// First a few swaps (`t = 1`) align `p` with the rank order of `q`; then at
/// most `d − 1` mixing steps move mass between co-sorted entries, each one
/// fixing one coordinate. When `p` and `q` are already co-sorted no swaps are
/// needed and the whole sequence has at most `d − 1` steps.
pub fn ttransform_sequence(p: &ProbVec, q: &ProbVec) -> Result<TTransformSeq> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()));
    }
    if !majorizes(p, q) {
        return Err(Error::NotMajorized);
    }
    let d = p.dim();
    let (pv, qv) = (p.as_slice(), q.as_slice());
    let mut steps = Vec::new();

    // align ranks: the k-th largest of p must sit where q has its k-th largest
    let sp = argsort_desc(pv);
    let sq = argsort_desc(qv);
    let mut x = pv.to_vec();
    let mut holder: Vec<usize> = (0..d).collect(); // holder[loc] = original index
    let mut location: Vec<usize> = (0..d).collect();
    for k in 0..d {
        let (want, at) = (sq[k], location[sp[k]]);
        if at == want {
            continue;
        }
        if x[at] != x[want] {
            steps.push(TTransform {
                i: at,
                j: want,
                t: 1.0,
            });
            x.swap(at, want);
        }
        let other = holder[want];
        holder.swap(at, want);
        location[sp[k]] = want;
        location[other] = at;
    }

    // transfers on the co-sorted frame
    let mut xs: Vec<f64> = sq.iter().map(|&i| x[i]).collect();
    let ys: Vec<f64> = sq.iter().map(|&i| qv[i]).collect();
    for _ in 0..d {
        let Some(j) = (0..d).rev().find(|&j| xs[j] > ys[j] + TT_EQUAL) else {
            break;
        };
        let Some(k) = (j + 1..d).find(|&k| xs[k] < ys[k] - TT_EQUAL) else {
            break;
        };
        let delta = (xs[j] - ys[j]).min(ys[k] - xs[k]);
        let t = delta / (xs[j] - xs[k]);
        steps.push(TTransform {
            i: sq[j],
            j: sq[k],
            t,
        });
        if xs[j] - ys[j] <= ys[k] - xs[k] {
            xs[k] += xs[j] - ys[j];
            xs[j] = ys[j];
        } else {
            xs[j] -= ys[k] - xs[k];
            xs[k] = ys[k];
        }
    }
    Ok(TTransformSeq { steps })
}

/// Applies the steps of `seq` to `p`, left to right.
pub fn apply_ttransforms(seq: &TTransformSeq, p: &ProbVec) -> Result<ProbVec> {
    let mut x = p.as_slice().to_vec();
    for s in &seq.steps {
        if s.i >= x.len() || s.j >= x.len() {
            return Err(Error::Domain(format!(
                "step ({}, {}) outside dim {}",
                s.i,
                s.j,
                x.len()
            )));
        }
        if !(0.0..=1.0).contains(&s.t) {
            return Err(Error::Domain(format!(
                "mixing weight {} outside [0, 1]",
                s.t
            )));
        }
        let (a, b) = (x[s.i], x[s.j]);
        x[s.i] = (1.0 - s.t) * a + s.t * b;
        x[s.j] = s.t * a + (1.0 - s.t) * b;
    }
    ProbVec::new(x)
}
