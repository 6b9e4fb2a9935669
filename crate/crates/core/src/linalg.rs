//! Dense Hermitian linear algebra: eigendecompositions, fractional powers on
//! supports, partial traces, tensor and direct sums, norms.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Default tolerance for the Hermiticity residual of raw input.
pub const DEFAULT_HERM_TOL: f64 = 1e-10;
/// Eigenvalues below `-PSD_TOL * ‖A‖_∞` fail positivity checks.
pub const PSD_TOL: f64 = 1e-9;
/// Eigenvalues in `[-PSD_TOL*‖A‖_∞, PSD_CLIP*‖A‖_∞]` are clipped to zero
/// before fractional or negative powers.
pub const PSD_CLIP: f64 = 1e-12;
/// Relative tolerance for support containment.
pub const SUPP_TOL: f64 = 1e-9;

/// Finite-dimensional Hermitian matrix. Symmetrized on construction; raw
/// input whose asymmetry exceeds `100 * herm_tol` is rejected.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    dim: usize,
    entries: CMatrix,
    herm_tol: f64,
}

/// Spectral decomposition with eigenvalues in ascending order and
/// eigenvectors as columns of a unitary matrix.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMatrix,
}

/// Which tensor factor of a bipartite space an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

impl HermitianOperator {
    pub fn new(entries: CMatrix) -> Result<Self> {
        Self::with_tol(entries, DEFAULT_HERM_TOL)
    }

    pub fn with_tol(entries: CMatrix, herm_tol: f64) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::InvalidDichotomy("dimension must be at least 1".into()));
        }
        let adj = entries.adjoint();
        let residual = (&entries - &adj).map(|z| z.norm()).max();
        let limit = 100.0 * herm_tol;
        if residual > limit {
            return Err(Error::NotHermitian { residual, limit });
        }
        let sym = (&entries + &adj).scale(0.5);
        Ok(Self { dim: rows, entries: sym, herm_tol })
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = CMatrix::zeros(dim, dim);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Self { dim, entries: m, herm_tol: DEFAULT_HERM_TOL }
    }

    /// Real symmetric matrix from row-major entries.
    pub fn from_real(dim: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != dim * dim {
            return Err(Error::DimensionMismatch { left: dim * dim, right: row_major.len() });
        }
        let m = CMatrix::from_iterator(
            dim,
            dim,
            // nalgebra fills column-major; transpose the index walk
            (0..dim * dim).map(|k| C64::new(row_major[(k % dim) * dim + k / dim], 0.0)),
        );
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, entries: CMatrix::identity(dim, dim), herm_tol: DEFAULT_HERM_TOL }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: CMatrix::zeros(dim, dim), herm_tol: DEFAULT_HERM_TOL }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn herm_tol(&self) -> f64 {
        self.herm_tol
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entries[(i, i)].re).sum()
    }

    /// Largest absolute entry; cheap scale estimate.
    pub fn max_abs(&self) -> f64 {
        if self.dim == 0 { 0.0 } else { self.entries.map(|z| z.norm()).max() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.scale(factor),
            herm_tol: self.herm_tol,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(Self {
            dim: self.dim,
            entries: &self.entries + &other.entries,
            herm_tol: self.herm_tol.max(other.herm_tol),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(self.add(&other.scaled(-1.0))?)
    }
}

/// Eigendecomposition with ascending eigenvalues.
pub fn eig(a: &HermitianOperator) -> EigenSystem {
    let se = a.entries.clone().symmetric_eigen();
    let n = a.dim;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        eigenvectors.set_column(col, &se.eigenvectors.column(i));
    }
    EigenSystem { eigenvalues, eigenvectors }
}

/// Rebuild `V f(Λ) V†` from a decomposition.
pub fn apply_spectral(a: &HermitianOperator, f: impl Fn(f64) -> f64) -> HermitianOperator {
    let es = eig(a);
    assemble(&es, &f)
}

fn assemble(es: &EigenSystem, f: &impl Fn(f64) -> f64) -> HermitianOperator {
    let n = es.eigenvalues.len();
    let mut m = CMatrix::zeros(n, n);
    for k in 0..n {
        let fk = f(es.eigenvalues[k]);
        if fk == 0.0 {
            continue;
        }
        let col = es.eigenvectors.column(k);
        for i in 0..n {
            let ci = col[i] * fk;
            for j in 0..n {
                m[(i, j)] += ci * col[j].conj();
            }
        }
    }
    // symmetrize away accumulation noise
    let adj = m.adjoint();
    let sym = (&m + &adj).scale(0.5);
    HermitianOperator { dim: n, entries: sym, herm_tol: DEFAULT_HERM_TOL }
}

/// Fractional power on the support of a PSD matrix. Eigenvalues in
/// `[-PSD_TOL*s, PSD_CLIP*s]` (s = ‖A‖_∞) count as zero and are excluded
/// from negative and non-integer powers; `t = 0` yields the support
/// projector.
pub fn frac_power(a: &HermitianOperator, t: f64) -> Result<HermitianOperator> {
    let es = eig(a);
    let scale = es.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let min = es.eigenvalues.min();
    if min < -PSD_TOL * scale {
        return Err(Error::NegativeEigenvalue { min_eigenvalue: min });
    }
    let clip = PSD_CLIP * scale;
    Ok(assemble(&es, &|lam| {
        if lam <= clip {
            0.0
        } else if t == 0.0 {
            1.0
        } else {
            lam.powf(t)
        }
    }))
}

/// `2^(factor * A)` via the spectral calculus (no support restriction).
pub fn exp2_scaled(a: &HermitianOperator, factor: f64) -> HermitianOperator {
    apply_spectral(a, |lam| (factor * lam).exp2())
}

/// Orthogonal projector onto the support of a PSD matrix.
pub fn support_projector(a: &HermitianOperator) -> Result<HermitianOperator> {
    frac_power(a, 0.0)
}

/// Whether supp A ⊆ supp B, both PSD, decided by compressing A with the
/// complement of B's support.
pub fn support_contained(a: &HermitianOperator, b: &HermitianOperator) -> Result<bool> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { left: a.dim, right: b.dim });
    }
    let pb = support_projector(b)?;
    let scale_a = op_norm(a);
    if scale_a == 0.0 {
        return Ok(true);
    }
    let min = eig(a).eigenvalues.min();
    if min < -PSD_TOL * scale_a {
        return Err(Error::NegativeEigenvalue { min_eigenvalue: min });
    }
    let q = HermitianOperator::identity(a.dim).sub(&pb)?;
    let compressed = &q.entries * &a.entries * &q.entries;
    let compressed = HermitianOperator {
        dim: a.dim,
        entries: {
            let adj = compressed.adjoint();
            (&compressed + &adj).scale(0.5)
        },
        herm_tol: a.herm_tol,
    };
    Ok(op_norm(&compressed) <= SUPP_TOL * scale_a)
}

pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    let (da, db) = (a.dim, b.dim);
    let dim = da * db;
    let mut m = CMatrix::zeros(dim, dim);
    for i1 in 0..da {
        for j1 in 0..da {
            let aij = a.entries[(i1, j1)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for i2 in 0..db {
                for j2 in 0..db {
                    m[(i1 * db + i2, j1 * db + j2)] = aij * b.entries[(i2, j2)];
                }
            }
        }
    }
    HermitianOperator { dim, entries: m, herm_tol: a.herm_tol.max(b.herm_tol) }
}

pub fn direct_sum(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    let (da, db) = (a.dim, b.dim);
    let dim = da + db;
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..da {
        for j in 0..da {
            m[(i, j)] = a.entries[(i, j)];
        }
    }
    for i in 0..db {
        for j in 0..db {
            m[(da + i, da + j)] = b.entries[(i, j)];
        }
    }
    HermitianOperator { dim, entries: m, herm_tol: a.herm_tol.max(b.herm_tol) }
}

/// Partial trace of an operator on `H1 ⊗ H2` over the named factor.
pub fn partial_trace(
    a: &HermitianOperator,
    dims: (usize, usize),
    traced: Subsystem,
) -> Result<HermitianOperator> {
    let (d1, d2) = dims;
    if d1 * d2 != a.dim {
        return Err(Error::DimensionMismatch { left: d1 * d2, right: a.dim });
    }
    match traced {
        Subsystem::Second => {
            let mut m = CMatrix::zeros(d1, d1);
            for i in 0..d1 {
                for j in 0..d1 {
                    for k in 0..d2 {
                        m[(i, j)] += a.entries[(i * d2 + k, j * d2 + k)];
                    }
                }
            }
            Ok(HermitianOperator { dim: d1, entries: m, herm_tol: a.herm_tol })
        }
        Subsystem::First => {
            let mut m = CMatrix::zeros(d2, d2);
            for i in 0..d2 {
                for j in 0..d2 {
                    for k in 0..d1 {
                        m[(i, j)] += a.entries[(k * d2 + i, k * d2 + j)];
                    }
                }
            }
            Ok(HermitianOperator { dim: d2, entries: m, herm_tol: a.herm_tol })
        }
    }
}

/// Operator norm (largest absolute eigenvalue).
pub fn op_norm(a: &HermitianOperator) -> f64 {
    eig(a).eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
}

/// Trace norm (sum of absolute eigenvalues).
pub fn trace_norm(a: &HermitianOperator) -> f64 {
    eig(a).eigenvalues.iter().map(|v| v.abs()).sum()
}

/// Smallest eigenvalue.
pub fn min_eigenvalue(a: &HermitianOperator) -> f64 {
    eig(a).eigenvalues.min()
}
