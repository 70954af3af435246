//! Small density matrices for the mixed-state entanglement check.
//!
//! A transformation `ρ → σ` between bipartite mixed states is possible with a
//! correlated catalyst under LOCC whenever the hashing bound of `ρ` exceeds the
//! entanglement of formation of `σ`. The hashing bound is computed from von
//! Neumann entropies; the entanglement of formation only for two qubits, via
//! Wootters' concurrence.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::{hermitian_apply, hermitian_eigenvalues, matmul};

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 16;
/// Hermiticity, trace and positivity tolerance.
pub const DENSITY_TOLERANCE: f64 = 1e-10;
/// Hashing bound and target entanglement closer than this count as equal.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A density matrix, row-major, with an optional bipartition `(d_A, d_B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    dims: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

impl DensityMatrix {
    pub fn new(entries: Vec<Complex64>, dims: Option<(usize, usize)>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != entries.len() {
            return Err(Error::InvalidDensity(format!(
                "{} entries do not form a square matrix",
                entries.len()
            )));
        }
        if dim > MAX_DIM {
            return Err(Error::InvalidDensity(format!(
                "dimension {dim} exceeds {MAX_DIM}"
            )));
        }
        if let Some((a, b)) = dims {
            if a * b != dim {
                return Err(Error::InvalidDensity(format!(
                    "bipartition {a}x{b} does not match dimension {dim}"
                )));
            }
        }
        if let Some(k) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite(k));
        }
        for i in 0..dim {
            for j in i..dim {
                if (entries[i * dim + j] - entries[j * dim + i].conj()).norm() > DENSITY_TOLERANCE {
                    return Err(Error::InvalidDensity(format!(
                        "not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        let trace: f64 = (0..dim).map(|i| entries[i * dim + i].re).sum();
        if (trace - 1.0).abs() > DENSITY_TOLERANCE {
            return Err(Error::InvalidDensity(format!("trace {trace}")));
        }
        let rho = Self { dim, entries, dims };
        let min = rho.eigenvalues()[0];
        if min < -DENSITY_TOLERANCE {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min}")));
        }
        Ok(rho)
    }

    /// From real and imaginary parts given as rows.
    pub fn from_parts(
        re: &[Vec<f64>],
        im: &[Vec<f64>],
        dims: Option<(usize, usize)>,
    ) -> Result<Self> {
        let n = re.len();
        if im.len() != n || re.iter().chain(im).any(|row| row.len() != n) {
            return Err(Error::InvalidDensity(
                "real and imaginary parts must be square and equal-sized".into(),
            ));
        }
        let entries = re
            .iter()
            .zip(im)
            .flat_map(|(r, i)| r.iter().zip(i).map(|(&a, &b)| Complex64::new(a, b)))
            .collect();
        Self::new(entries, dims)
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn pure(psi: &[Complex64], dims: Option<(usize, usize)>) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > DENSITY_TOLERANCE {
            return Err(Error::InvalidDensity(format!(
                "state vector has norm² {norm}"
            )));
        }
        let n = psi.len();
        let entries = (0..n * n).map(|k| psi[k / n] * psi[k % n].conj()).collect();
        Self::new(entries, dims)
    }

    /// Diagonal state with the given spectrum.
    pub fn diagonal(probs: &[f64], dims: Option<(usize, usize)>) -> Result<Self> {
        let n = probs.len();
        let mut entries = vec![ZERO; n * n];
        for (i, &p) in probs.iter().enumerate() {
            entries[i * n + i] = Complex64::new(p, 0.0);
        }
        Self::new(entries, dims)
    }

    pub fn maximally_mixed(dim: usize, dims: Option<(usize, usize)>) -> Result<Self> {
        Self::diagonal(&vec![1.0 / dim as f64; dim], dims)
    }

    /// `self ⊗ other`, bipartitioned as `(dim self, dim other)`.
    pub fn kron(&self, other: &DensityMatrix) -> Result<Self> {
        let (n, m) = (self.dim, other.dim);
        let d = n * m;
        let mut entries = vec![ZERO; d * d];
        for i in 0..n {
            for j in 0..n {
                let a = self.entries[i * n + j];
                for k in 0..m {
                    for l in 0..m {
                        entries[(i * m + k) * d + j * m + l] = a * other.entries[k * m + l];
                    }
                }
            }
        }
        Self::new(entries, Some((n, m)))
    }

    /// Convex combination `Σ w_k ρ_k`; bipartition taken from the first term.
    pub fn mixture(terms: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = terms.first().ok_or(Error::Empty)?.1;
        let mut entries = vec![ZERO; first.entries.len()];
        for (w, rho) in terms {
            if rho.dim != first.dim {
                return Err(Error::DimensionMismatch(rho.dim, first.dim));
            }
            for (e, z) in entries.iter_mut().zip(&rho.entries) {
                *e += z * *w;
            }
        }
        Self::new(entries, first.dims)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.dims
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries, self.dim)
    }

    fn bipartition(&self) -> Result<(usize, usize)> {
        self.dims
            .ok_or_else(|| Error::InvalidDensity("no bipartition declared".into()))
    }
}

/// `S(ρ) = −Σ λ ln λ`, negative eigenvalues clamped to zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    -rho.eigenvalues()
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| l * l.ln())
        .sum::<f64>()
}

pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Result<DensityMatrix> {
    let (da, db) = rho.bipartition()?;
    let d = rho.dim;
    let out_dim = match keep {
        Subsystem::A => da,
        Subsystem::B => db,
    };
    let mut entries = vec![ZERO; out_dim * out_dim];
    for i in 0..out_dim {
        for j in 0..out_dim {
            entries[i * out_dim + j] = match keep {
                Subsystem::A => (0..db)
                    .map(|k| rho.entries[(i * db + k) * d + j * db + k])
                    .sum(),
                Subsystem::B => (0..da)
                    .map(|k| rho.entries[(k * db + i) * d + k * db + j])
                    .sum(),
            };
        }
    }
    DensityMatrix::new(entries, None)
}

/// `max{S(ρ_A), S(ρ_B)} − S(ρ)`, a lower bound on distillable entanglement.
pub fn hashing_bound(rho: &DensityMatrix) -> Result<f64> {
    let sa = von_neumann_entropy(&partial_trace(rho, Subsystem::A)?);
    let sb = von_neumann_entropy(&partial_trace(rho, Subsystem::B)?);
    Ok(sa.max(sb) - von_neumann_entropy(rho))
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dims != Some((2, 2)) {
        return Err(Error::InvalidDensity(
            "two-qubit state (2x2 bipartition) required".into(),
        ));
    }
    Ok(())
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    // σ_y ⊗ σ_y is real: it reverses the basis with signs (−, +, +, −)
    let sign = [-1.0, 1.0, 1.0, -1.0];
    let mut tilde = vec![ZERO; 16];
    for i in 0..4 {
        for j in 0..4 {
            tilde[i * 4 + j] = rho.get(3 - i, 3 - j).conj() * (sign[i] * sign[j]);
        }
    }
    let sqrt_rho = hermitian_apply(&rho.entries, 4, |x| x.max(0.0).sqrt());
    let m = matmul(&matmul(&sqrt_rho, &tilde, 4), &sqrt_rho, 4);
    // symmetrize against roundoff before diagonalizing
    let mut herm = vec![ZERO; 16];
    for i in 0..4 {
        for j in 0..4 {
            herm[i * 4 + j] = (m[i * 4 + j] + m[j * 4 + i].conj()) * 0.5;
        }
    }
    let mut lambda: Vec<f64> = hermitian_eigenvalues(&herm, 4)
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).clamp(0.0, 1.0))
}

/// Binary entropy in nats.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |t: f64| if t > 0.0 { -t * t.ln() } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// Entanglement of formation of a two-qubit state, in nats.
pub fn eof_two_qubit(sigma: &DensityMatrix) -> Result<f64> {
    let c = concurrence(sigma)?;
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt())))
}

/// Entanglement of the target state for [`corollary1_check`].
#[derive(Debug, Clone, Copy)]
pub enum TargetEntanglement<'a> {
    /// Computed with [`eof_two_qubit`].
    State(&'a DensityMatrix),
    /// Supplied by the caller, in nats.
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Corollary1Verdict {
    Sufficient,
    /// Hashing bound equals the target entanglement within tolerance.
    Boundary,
    NotImplied,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corollary1Report {
    pub verdict: Corollary1Verdict,
    pub hashing_bound: f64,
    pub target_entanglement: f64,
    pub source_entropy: f64,
    pub source_entropy_a: f64,
    pub source_entropy_b: f64,
}

/// Sufficient condition `hashing bound of ρ ≥ E_F(σ)` for a correlated-catalytic
/// LOCC conversion. Equality is reported separately as [`Corollary1Verdict::Boundary`].
pub fn corollary1_check(
    rho: &DensityMatrix,
    target: TargetEntanglement<'_>,
) -> Result<Corollary1Report> {
    let e_sigma = match target {
        TargetEntanglement::State(sigma) => eof_two_qubit(sigma)?,
        TargetEntanglement::Value(v) if v.is_finite() && v >= 0.0 => v,
        TargetEntanglement::Value(v) => {
            return Err(Error::Domain(format!(
                "target entanglement must be finite and >= 0, got {v}"
            )))
        }
    };
    let sa = von_neumann_entropy(&partial_trace(rho, Subsystem::A)?);
    let sb = von_neumann_entropy(&partial_trace(rho, Subsystem::B)?);
    let s = von_neumann_entropy(rho);
    let hb = sa.max(sb) - s;
    let verdict = if (hb - e_sigma).abs() <= BOUNDARY_TOLERANCE {
        Corollary1Verdict::Boundary
    } else if hb > e_sigma {
        Corollary1Verdict::Sufficient
    } else {
        Corollary1Verdict::NotImplied
    };
    Ok(Corollary1Report {
        verdict,
        hashing_bound: hb,
        target_entanglement: e_sigma,
        source_entropy: s,
        source_entropy_a: sa,
        source_entropy_b: sb,
    })
}

/// Bell state `(|00⟩ + |11⟩)/√2`.
pub fn bell_state() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = [Complex64::new(h, 0.0), ZERO, ZERO, Complex64::new(h, 0.0)];
    DensityMatrix::pure(&psi, Some((2, 2))).expect("normalized")
}

/// Werner state `v·|Φ⁺⟩⟨Φ⁺| + (1 − v)·𝟙/4`.
pub fn werner_state(visibility: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::Domain(format!(
            "visibility {visibility} outside [0, 1]"
        )));
    }
    let mixed = DensityMatrix::maximally_mixed(4, Some((2, 2)))?;
    DensityMatrix::mixture(&[(visibility, &bell_state()), (1.0 - visibility, &mixed)])
}
