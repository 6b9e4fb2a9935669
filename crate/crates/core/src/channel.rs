//! Completely positive maps represented by their Choi matrices.
//!
//! The Choi matrix of `T: B(H_in) -> B(H_out)` lives on `H_in ⊗ H_out`:
//! `J = Σ_ij |i><j| ⊗ T(|i><j|)`, so that `T(X) = Tr_in[(X^T ⊗ I) J]`.
//! `T` is completely positive iff `J ≥ 0` and trace-nonincreasing iff
//! `Tr_out J ≤ I`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    self, min_eigenvalue, partial_trace, CMatrix, C64, HermitianOperator, Subsystem,
};

/// A linear map `B(H_in) -> B(H_out)` held as its Choi matrix.
#[derive(Clone, Debug)]
pub struct Channel {
    choi: HermitianOperator,
    dim_in: usize,
    dim_out: usize,
}

impl Channel {
    pub fn from_choi(choi: HermitianOperator, dim_in: usize, dim_out: usize) -> Result<Self> {
        if choi.dim() != dim_in * dim_out {
            return Err(Error::DimensionMismatch { left: choi.dim(), right: dim_in * dim_out });
        }
        Ok(Self { choi, dim_in, dim_out })
    }

    /// Build from the action on matrix units: `unit(i, j) = T(|i><j|)`.
    pub fn from_map(
        dim_in: usize,
        dim_out: usize,
        unit: impl Fn(usize, usize) -> CMatrix,
    ) -> Result<Self> {
        let dim = dim_in * dim_out;
        let mut j = CMatrix::zeros(dim, dim);
        for a in 0..dim_in {
            for b in 0..dim_in {
                let block = unit(a, b);
                assert_eq!(block.shape(), (dim_out, dim_out), "unit block shape");
                for o in 0..dim_out {
                    for p in 0..dim_out {
                        j[(a * dim_out + o, b * dim_out + p)] = block[(o, p)];
                    }
                }
            }
        }
        Ok(Self { choi: HermitianOperator::new(j)?, dim_in, dim_out })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_map(dim, dim, |i, j| {
            let mut m = CMatrix::zeros(dim, dim);
            m[(i, j)] = C64::new(1.0, 0.0);
            m
        })
        .expect("identity channel")
    }

    /// `T(x) = Tr x`, mapping into `B(C)`.
    pub fn trace_channel(dim_in: usize) -> Self {
        Self::from_map(dim_in, 1, |i, j| {
            let v = if i == j { 1.0 } else { 0.0 };
            DMatrix::from_element(1, 1, C64::new(v, 0.0))
        })
        .expect("trace channel")
    }

    /// `T(x) = Tr(x) * op`.
    pub fn replacer(dim_in: usize, op: &HermitianOperator) -> Self {
        Self::from_map(dim_in, op.dim(), |i, j| {
            if i == j {
                op.entries().clone()
            } else {
                CMatrix::zeros(op.dim(), op.dim())
            }
        })
        .expect("replacer channel")
    }

    /// Unitary (or isometric) conjugation `T(x) = U x U†`.
    pub fn conjugation(u: &CMatrix) -> Self {
        let (rows, cols) = u.shape();
        Self::from_map(cols, rows, |i, j| {
            let mut e = CMatrix::zeros(cols, cols);
            e[(i, j)] = C64::new(1.0, 0.0);
            u * e * u.adjoint()
        })
        .expect("conjugation channel")
    }

    pub fn zero(dim_in: usize, dim_out: usize) -> Self {
        Self {
            choi: HermitianOperator::zeros(dim_in * dim_out),
            dim_in,
            dim_out,
        }
    }

    pub fn choi(&self) -> &HermitianOperator {
        &self.choi
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// Apply the map to a Hermitian operator.
    pub fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        if x.dim() != self.dim_in {
            return Err(Error::DimensionMismatch { left: x.dim(), right: self.dim_in });
        }
        let m = self.dim_out;
        let mut out = CMatrix::zeros(m, m);
        let j = self.choi.entries();
        for a in 0..self.dim_in {
            for b in 0..self.dim_in {
                let xab = x.entries()[(a, b)];
                if xab == C64::new(0.0, 0.0) {
                    continue;
                }
                for o in 0..m {
                    for p in 0..m {
                        out[(o, p)] += xab * j[(a * m + o, b * m + p)];
                    }
                }
            }
        }
        let adj = out.adjoint();
        HermitianOperator::new((&out + &adj).scale(0.5))
    }

    /// Parallel composition `T_a ⊗ T_b`.
    pub fn tensor(&self, other: &Self) -> Self {
        let (na, ma) = (self.dim_in, self.dim_out);
        let (nb, mb) = (other.dim_in, other.dim_out);
        let dim_in = na * nb;
        let dim_out = ma * mb;
        let mut j = CMatrix::zeros(dim_in * dim_out, dim_in * dim_out);
        let ja = self.choi.entries();
        let jb = other.choi.entries();
        for ia in 0..na {
            for ib in 0..nb {
                for oa in 0..ma {
                    for ob in 0..mb {
                        let row = (ia * nb + ib) * dim_out + (oa * mb + ob);
                        for ja_ in 0..na {
                            for jb_ in 0..nb {
                                for pa in 0..ma {
                                    for pb in 0..mb {
                                        let col = (ja_ * nb + jb_) * dim_out + (pa * mb + pb);
                                        j[(row, col)] = ja[(ia * ma + oa, ja_ * ma + pa)]
                                            * jb[(ib * mb + ob, jb_ * mb + pb)];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Self {
            choi: HermitianOperator::new(j).expect("tensor choi"),
            dim_in,
            dim_out,
        }
    }

    /// Block map acting as `self` on the first summand and `other` on the
    /// second, killing the off-diagonal blocks.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (na, ma) = (self.dim_in, self.dim_out);
        let (nb, mb) = (other.dim_in, other.dim_out);
        let dim_in = na + nb;
        let dim_out = ma + mb;
        let mut j = CMatrix::zeros(dim_in * dim_out, dim_in * dim_out);
        let ja = self.choi.entries();
        let jb = other.choi.entries();
        for u in 0..na {
            for v in 0..na {
                for o in 0..ma {
                    for p in 0..ma {
                        j[(u * dim_out + o, v * dim_out + p)] = ja[(u * ma + o, v * ma + p)];
                    }
                }
            }
        }
        for u in 0..nb {
            for v in 0..nb {
                for o in 0..mb {
                    for p in 0..mb {
                        j[((na + u) * dim_out + (ma + o), (na + v) * dim_out + (ma + p))] =
                            jb[(u * mb + o, v * mb + p)];
                    }
                }
            }
        }
        Self {
            choi: HermitianOperator::new(j).expect("direct sum choi"),
            dim_in,
            dim_out,
        }
    }

    /// Partial trace of the Choi matrix over the output factor.
    pub fn trace_out(&self) -> HermitianOperator {
        partial_trace(&self.choi, (self.dim_in, self.dim_out), Subsystem::Second)
            .expect("choi dims")
    }

    /// Negative part of the smallest Choi eigenvalue (0 when CP).
    pub fn cp_residual(&self) -> f64 {
        (-min_eigenvalue(&self.choi)).max(0.0)
    }

    /// Negative part of `λ_min(I - Tr_out J)` (0 when trace-nonincreasing).
    pub fn trace_nonincreasing_residual(&self) -> f64 {
        let gap = HermitianOperator::identity(self.dim_in)
            .sub(&self.trace_out())
            .expect("dims");
        (-linalg::min_eigenvalue(&gap)).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tensor as op_tensor;

    #[test]
    fn identity_acts_trivially() {
        let ch = Channel::identity(3);
        let x = HermitianOperator::from_real(3, &[1.0, 0.2, 0.0, 0.2, 2.0, -0.4, 0.0, -0.4, 0.5])
            .unwrap();
        let y = ch.apply(&x).unwrap();
        let err = (y.entries() - x.entries()).map(|z| z.norm()).max();
        assert!(err < 1e-12);
        assert!(ch.cp_residual() < 1e-12);
        assert!(ch.trace_nonincreasing_residual() < 1e-12);
    }

    #[test]
    fn trace_channel_traces() {
        let ch = Channel::trace_channel(2);
        let x = HermitianOperator::diagonal(&[0.25, 0.5]);
        let y = ch.apply(&x).unwrap();
        assert_eq!(y.dim(), 1);
        assert!((y.trace() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn replacer_replaces() {
        let sigma = HermitianOperator::diagonal(&[0.5, 0.5]);
        let ch = Channel::replacer(3, &sigma);
        let x = HermitianOperator::identity(3);
        let y = ch.apply(&x).unwrap();
        assert!((y.trace() - 3.0).abs() < 1e-12);
        assert!((y.entries()[(0, 0)].re - 1.5).abs() < 1e-12);
    }

    #[test]
    fn tensor_matches_operator_tensor() {
        let sigma = HermitianOperator::diagonal(&[0.3, 0.7]);
        let a = Channel::replacer(2, &sigma);
        let b = Channel::identity(2);
        let ab = a.tensor(&b);
        let x = HermitianOperator::diagonal(&[1.0, 0.0]);
        let w = HermitianOperator::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let joint = op_tensor(&x, &w);
        let got = ab.apply(&joint).unwrap();
        let want = op_tensor(&a.apply(&x).unwrap(), &w);
        let err = (got.entries() - want.entries()).map(|z| z.norm()).max();
        assert!(err < 1e-12, "err {err:.3e}");
    }

    #[test]
    fn direct_sum_keeps_second_block() {
        let t = Channel::trace_channel(2); // 2 -> 1
        let id = Channel::identity(2);
        let block = t.direct_sum(&id); // 4 -> 3
        let x = HermitianOperator::diagonal(&[0.1, 0.2, 0.3, 0.4]);
        let y = block.apply(&x).unwrap();
        assert!((y.entries()[(0, 0)].re - 0.3).abs() < 1e-12);
        assert!((y.entries()[(1, 1)].re - 0.3).abs() < 1e-12);
        assert!((y.entries()[(2, 2)].re - 0.4).abs() < 1e-12);
    }

    #[test]
    fn conjugation_unitary() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)],
        );
        let ch = Channel::conjugation(&u);
        let x = HermitianOperator::diagonal(&[1.0, 0.0]);
        let y = ch.apply(&x).unwrap();
        // |0><0| -> |+><+|
        for i in 0..2 {
            for j in 0..2 {
                assert!((y.entries()[(i, j)].re - 0.5).abs() < 1e-12);
            }
        }
        assert!(ch.trace_nonincreasing_residual() < 1e-12);
    }
}
