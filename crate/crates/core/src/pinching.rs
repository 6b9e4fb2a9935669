//! Pinching maps `P_A(X) = Σ_λ P_λ X P_λ` over the spectral projectors of a
//! Hermitian operator, spectrum counting for tensor powers, and the
//! normalized trace-power sequence `a_n = (Tr P_{A^⊗n}(X^⊗n)^α)^{1/n}`.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{self, eig, op_norm, CMatrix, C64, HermitianOperator};

/// Default relative tolerance for merging nearby eigenvalues into one block.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
/// Hard ceiling on `dim^n` for tensor-power operations.
const DIM_POWER_GUARD: f64 = (1u64 << 20) as f64;
/// Largest pinching block that is still diagonalized densely.
const MAX_BLOCK: usize = 2048;
/// Eigenvalues below this (relative) threshold count as zero in products.
const ZERO_EIG_TOL: f64 = 1e-12;

/// Spectral projectors of a Hermitian operator, one per eigenvalue cluster.
#[derive(Clone, Debug)]
pub struct PinchingMap {
    projectors: Vec<HermitianOperator>,
    eigenvalue_labels: Vec<f64>,
    cluster_tol: f64,
    dim: usize,
}

impl PinchingMap {
    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    pub fn eigenvalue_labels(&self) -> &[f64] {
        &self.eigenvalue_labels
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct eigenvalue blocks.
    pub fn block_count(&self) -> usize {
        self.projectors.len()
    }

    /// `Σ_λ P_λ X P_λ`.
    pub fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: x.dim(), right: self.dim });
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for p in &self.projectors {
            out += p.entries() * x.entries() * p.entries();
        }
        let adj = out.adjoint();
        HermitianOperator::new((&out + &adj).scale(0.5))
    }

    /// The pinching map as a channel (it is CP and trace preserving).
    pub fn to_channel(&self) -> Channel {
        Channel::from_map(self.dim, self.dim, |i, j| {
            let mut e = CMatrix::zeros(self.dim, self.dim);
            e[(i, j)] = C64::new(1.0, 0.0);
            let mut out = CMatrix::zeros(self.dim, self.dim);
            for p in &self.projectors {
                out += p.entries() * &e * p.entries();
            }
            out
        })
        .expect("pinching channel")
    }
}

/// Spectral projectors of `A`, merging eigenvalues closer than
/// `cluster_tol * ‖A‖_∞` (chained).
pub fn pinching_from(a: &HermitianOperator, cluster_tol: f64) -> PinchingMap {
    let es = eig(a);
    let n = a.dim();
    let scale = es.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let gap = cluster_tol * scale.max(f64::MIN_POSITIVE);
    let mut projectors = Vec::new();
    let mut labels = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && es.eigenvalues[end] - es.eigenvalues[end - 1] <= gap {
            end += 1;
        }
        let mut p = CMatrix::zeros(n, n);
        for k in start..end {
            let col = es.eigenvectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] += col[i] * col[j].conj();
                }
            }
        }
        let adj = p.adjoint();
        projectors.push(
            HermitianOperator::new((&p + &adj).scale(0.5)).expect("projector hermitian"),
        );
        labels.push(es.eigenvalues.rows(start, end - start).mean());
        start = end;
    }
    PinchingMap { projectors, eigenvalue_labels: labels, cluster_tol, dim: n }
}

/// Per-factor eigenvalue label: sign and log2 of the absolute value.
#[derive(Clone, Copy, Debug)]
struct FactorLabel {
    sign: i8,
    log_abs: f64,
}

fn factor_labels(a: &HermitianOperator, cluster_tol: f64) -> Vec<FactorLabel> {
    let map = pinching_from(a, cluster_tol);
    let scale = map
        .eigenvalue_labels
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut per_cluster: Vec<FactorLabel> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for (idx, &v) in map.eigenvalue_labels.iter().enumerate() {
        let label = if v.abs() <= ZERO_EIG_TOL * scale {
            FactorLabel { sign: 0, log_abs: f64::NEG_INFINITY }
        } else {
            FactorLabel { sign: if v > 0.0 { 1 } else { -1 }, log_abs: v.abs().log2() }
        };
        per_cluster.push(label);
        sizes.push((map.projectors[idx].trace().round() as isize).max(1) as usize);
    }
    // expand to one label per matrix dimension so multisets carry multiplicity
    let mut labels = Vec::with_capacity(a.dim());
    for (label, size) in per_cluster.into_iter().zip(sizes) {
        for _ in 0..size {
            labels.push(label);
        }
    }
    labels
}

fn guard_power(dim: usize, n: usize) -> Result<()> {
    if (dim as f64).powi(n as i32) > DIM_POWER_GUARD {
        return Err(Error::TooLarge(format!("dim^n = {dim}^{n} exceeds the 2^20 guard")));
    }
    Ok(())
}

/// Cluster sorted (sign, logsum) keys with absolute tolerance `tol` on the
/// log part; returns the cluster id of each input in original order.
fn cluster_keys(keys: &[(i8, f64)], tol: f64) -> (usize, Vec<usize>) {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&i, &j| {
        keys[i]
            .0
            .cmp(&keys[j].0)
            .then(keys[i].1.partial_cmp(&keys[j].1).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut ids = vec![0usize; keys.len()];
    let mut cluster = 0usize;
    let mut prev: Option<(i8, f64)> = None;
    for &idx in &order {
        let k = keys[idx];
        if let Some(p) = prev {
            let same_zero = p.0 == 0 && k.0 == 0;
            let same = same_zero || (p.0 == k.0 && (k.1 - p.1).abs() <= tol);
            if !same {
                cluster += 1;
            }
        }
        ids[idx] = cluster;
        prev = Some(k);
    }
    (cluster + 1, ids)
}

/// Number of distinct eigenvalue clusters of `A^{⊗n}`, computed from
/// multisets of per-factor log-eigenvalues without building the matrix.
pub fn spectrum_count_tensor_power(a: &HermitianOperator, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidDichotomy("tensor power requires n ≥ 1".into()));
    }
    guard_power(a.dim(), n)?;
    let labels = factor_labels(a, DEFAULT_CLUSTER_TOL);
    // enumerate multisets over the distinct labels
    let mut keys: Vec<(i8, f64)> = Vec::new();
    let mut counts = vec![0usize; labels.len()];
    fn rec(
        labels: &[FactorLabel],
        counts: &mut Vec<usize>,
        start: usize,
        left: usize,
        keys: &mut Vec<(i8, f64)>,
    ) {
        if left == 0 {
            let mut sign: i8 = 1;
            let mut log_sum = 0.0;
            for (i, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                if labels[i].sign == 0 {
                    sign = 0;
                    break;
                }
                if labels[i].sign < 0 && c % 2 == 1 {
                    sign = -sign;
                }
                log_sum += labels[i].log_abs * c as f64;
            }
            keys.push((sign, if sign == 0 { f64::NEG_INFINITY } else { log_sum }));
            return;
        }
        if start == labels.len() {
            return;
        }
        for take in (0..=left).rev() {
            counts[start] = take;
            rec(labels, counts, start + 1, left - take, keys);
            counts[start] = 0;
        }
    }
    rec(&labels, &mut counts, 0, n, &mut keys);
    let (count, _) = cluster_keys(&keys, n as f64 * DEFAULT_CLUSTER_TOL);
    Ok(count)
}

/// The sequence `a_n = (Tr P_{A^{⊗n}}(X^{⊗n})^α)^{1/n}` for `n = 1..n_max`.
///
/// Works in the eigenbasis of `A`, grouping computational-basis tuples by
/// their clustered eigenvalue product, so only per-block compressions of
/// `X^{⊗n}` are diagonalized.
pub fn pinching_power_sequence(
    a: &HermitianOperator,
    x: &HermitianOperator,
    alpha: f64,
    n_max: usize,
) -> Result<Vec<f64>> {
    if x.dim() != a.dim() {
        return Err(Error::DimensionMismatch { left: x.dim(), right: a.dim() });
    }
    if alpha < 1.0 || !alpha.is_finite() {
        return Err(Error::InvalidAlpha(alpha));
    }
    let min = linalg::min_eigenvalue(x);
    if min < -1e-9 * op_norm(x) {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    if n_max == 0 {
        return Err(Error::InvalidDichotomy("n_max must be at least 1".into()));
    }
    guard_power(a.dim(), n_max)?;

    let dim = a.dim();
    let es = eig(a);
    // X in the eigenbasis of A
    let xp = es.eigenvectors.adjoint() * x.entries() * &es.eigenvectors;
    let diag_a = HermitianOperator::diagonal(es.eigenvalues.as_slice());
    let labels = factor_labels(&diag_a, DEFAULT_CLUSTER_TOL);

    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let total_tuples = dim.pow(n as u32);
        let mut keys = Vec::with_capacity(total_tuples);
        let mut digits = vec![0usize; n];
        for t in 0..total_tuples {
            let mut rest = t;
            let mut sign: i8 = 1;
            let mut log_sum = 0.0;
            for d in digits.iter_mut().rev() {
                *d = rest % dim;
                rest /= dim;
                let lab = labels[*d];
                if lab.sign == 0 {
                    sign = 0;
                } else if sign != 0 {
                    if lab.sign < 0 {
                        sign = -sign;
                    }
                    log_sum += lab.log_abs;
                }
            }
            keys.push((sign, if sign == 0 { f64::NEG_INFINITY } else { log_sum }));
        }
        let (n_blocks, block_of) = cluster_keys(&keys, n as f64 * DEFAULT_CLUSTER_TOL);
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); n_blocks];
        for (t, &b) in block_of.iter().enumerate() {
            blocks[b].push(t);
        }

        let mut trace_power = 0.0f64;
        for members in &blocks {
            let s = members.len();
            if s > MAX_BLOCK {
                return Err(Error::TooLarge(format!(
                    "pinching block of size {s} at n = {n} exceeds the dense limit {MAX_BLOCK}"
                )));
            }
            let mut block = CMatrix::zeros(s, s);
            for (r, &tr_) in members.iter().enumerate() {
                for (c, &tc) in members.iter().enumerate() {
                    let mut val = C64::new(1.0, 0.0);
                    let (mut ta, mut tb) = (tr_, tc);
                    for _ in 0..n {
                        val *= xp[(ta % dim, tb % dim)];
                        ta /= dim;
                        tb /= dim;
                    }
                    block[(r, c)] = val;
                }
            }
            let adj = block.adjoint();
            let block = (&block + &adj).scale(0.5);
            let eigs = block.symmetric_eigenvalues();
            for &lam in eigs.iter() {
                if lam > 0.0 {
                    trace_power += lam.powf(alpha);
                }
            }
        }
        out.push(trace_power.powf(1.0 / n as f64));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{min_eigenvalue, tensor};

    #[test]
    fn identity_has_single_block() {
        let map = pinching_from(&HermitianOperator::identity(3), DEFAULT_CLUSTER_TOL);
        assert_eq!(map.block_count(), 1);
        let p = &map.projectors()[0];
        assert!((p.trace() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_distinct_blocks() {
        let map = pinching_from(&HermitianOperator::diagonal(&[1.0, 2.0]), DEFAULT_CLUSTER_TOL);
        assert_eq!(map.block_count(), 2);
        assert!((map.projectors()[0].entries()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((map.projectors()[1].entries()[(1, 1)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn near_degenerate_eigenvalues_merge() {
        let eps = 1e-10;
        let a = HermitianOperator::diagonal(&[1.0, 1.0 + eps, 2.0]);
        let map = pinching_from(&a, 1e-8);
        assert_eq!(map.block_count(), 2);
        let dims: Vec<f64> = map.projectors().iter().map(|p| p.trace()).collect();
        assert!((dims[0] - 2.0).abs() < 1e-9);
        assert!((dims[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn apply_kills_off_diagonal() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0]);
        let x = HermitianOperator::from_real(2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let map = pinching_from(&a, DEFAULT_CLUSTER_TOL);
        let y = map.apply(&x).unwrap();
        assert!((y.entries()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((y.entries()[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!(y.entries()[(0, 1)].norm() < 1e-12);
        // trace preserved
        assert!((y.trace() - x.trace()).abs() < 1e-12);
    }

    #[test]
    fn pinching_fixes_its_own_operator() {
        let a = HermitianOperator::new(CMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(1.0, 0.0), C64::new(0.2, 0.4), C64::new(0.0, 0.0),
                C64::new(0.2, -0.4), C64::new(-0.5, 0.0), C64::new(0.3, 0.0),
                C64::new(0.0, 0.0), C64::new(0.3, 0.0), C64::new(2.0, 0.0),
            ],
        ))
        .unwrap();
        let map = pinching_from(&a, DEFAULT_CLUSTER_TOL);
        let y = map.apply(&a).unwrap();
        let err = (y.entries() - a.entries()).map(|z| z.norm()).max();
        assert!(err < 1e-9, "P_A(A) = A fails by {err:.3e}");
        // idempotence
        let yy = map.apply(&y).unwrap();
        let err2 = (yy.entries() - y.entries()).map(|z| z.norm()).max();
        assert!(err2 < 1e-10);
        // commutes with each projector
        for p in map.projectors() {
            let comm = (p.entries() * y.entries() - y.entries() * p.entries())
                .map(|z| z.norm())
                .max();
            assert!(comm < 1e-9);
        }
    }

    #[test]
    fn pinching_inequality() {
        let a = HermitianOperator::diagonal(&[0.5, 1.0, 2.0]);
        let g = CMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(0.8, 0.0), C64::new(0.1, 0.3), C64::new(-0.2, 0.0),
                C64::new(0.4, 0.1), C64::new(0.9, 0.0), C64::new(0.2, -0.5),
                C64::new(0.0, 0.6), C64::new(-0.3, 0.0), C64::new(1.1, 0.0),
            ],
        );
        let x = HermitianOperator::new(&g * g.adjoint()).unwrap();
        let map = pinching_from(&a, DEFAULT_CLUSTER_TOL);
        let y = map.apply(&x).unwrap();
        let bound = y.scaled(map.block_count() as f64).sub(&x).unwrap();
        assert!(min_eigenvalue(&bound) > -1e-9 * op_norm(&x));
    }

    #[test]
    fn spectrum_counts() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0]);
        assert_eq!(spectrum_count_tensor_power(&a, 4).unwrap(), 5);
        let i3 = HermitianOperator::identity(3);
        assert_eq!(spectrum_count_tensor_power(&i3, 7).unwrap(), 1);
        let b = HermitianOperator::diagonal(&[1.0, 2.0, 4.0]);
        assert_eq!(spectrum_count_tensor_power(&b, 2).unwrap(), 5);
    }

    #[test]
    fn spectrum_count_brute_force_oracle() {
        // products of eigenvalue tuples, deduplicated
        let vals = [0.3, 1.0, 1.7];
        let a = HermitianOperator::diagonal(&vals);
        for n in 1..=4usize {
            let mut products: Vec<f64> = Vec::new();
            for t in 0..3usize.pow(n as u32) {
                let mut rest = t;
                let mut prod = 1.0;
                for _ in 0..n {
                    prod *= vals[rest % 3];
                    rest /= 3;
                }
                products.push(prod);
            }
            products.sort_by(|a, b| a.partial_cmp(b).unwrap());
            products.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(1e-300));
            let got = spectrum_count_tensor_power(&a, n).unwrap();
            assert_eq!(got, products.len(), "n = {n}");
            assert!(got >= 1 && got <= (n + 1).pow(3) as usize);
        }
    }

    #[test]
    fn guard_rejects_oversized_powers() {
        let a = HermitianOperator::identity(4);
        assert!(matches!(
            spectrum_count_tensor_power(&a, 11),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn power_sequence_fixed_point() {
        // X = A: the pinching fixes A, so a_n = Tr A^α for every n
        let a = HermitianOperator::diagonal(&[0.5, 1.5]);
        let alpha = 2.0;
        let want: f64 = 0.5f64.powi(2) + 1.5f64.powi(2);
        let seq = pinching_power_sequence(&a, &a, alpha, 4).unwrap();
        for (n, &an) in seq.iter().enumerate() {
            assert!((an - want).abs() < 1e-9, "n = {} a_n = {an}", n + 1);
        }
    }

    #[test]
    fn power_sequence_hand_example() {
        // A = diag(1,2), X = all-ones: P_A(X) = I, a_1 = Tr I^2 = 2
        let a = HermitianOperator::diagonal(&[1.0, 2.0]);
        let x = HermitianOperator::from_real(2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let seq = pinching_power_sequence(&a, &x, 2.0, 6).unwrap();
        assert!((seq[0] - 2.0).abs() < 1e-10, "a_1 = {}", seq[0]);
        let upper = 4.0; // Tr X^2
        for (i, &an) in seq.iter().enumerate() {
            let n = i + 1;
            let spec = spectrum_count_tensor_power(&a, n).unwrap() as f64;
            let lower = spec.powf(-2.0 / n as f64) * upper;
            assert!(an <= upper + 1e-8 * upper, "upper bound fails at n = {n}");
            assert!(an >= lower - 1e-8 * upper, "lower bound fails at n = {n}");
        }
        assert!(seq[5] > seq[0], "sequence should climb toward Tr X^2");
    }

    #[test]
    fn power_sequence_diagonal_is_exact() {
        let a = HermitianOperator::diagonal(&[1.0, 3.0]);
        let x = HermitianOperator::diagonal(&[0.2, 0.8]);
        let alpha = 1.5;
        let want = 0.2f64.powf(alpha) + 0.8f64.powf(alpha);
        let seq = pinching_power_sequence(&a, &x, alpha, 5).unwrap();
        for &an in &seq {
            assert!((an - want).abs() < 1e-10);
        }
    }

    #[test]
    fn channel_matches_apply() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0]);
        let map = pinching_from(&a, DEFAULT_CLUSTER_TOL);
        let ch = map.to_channel();
        let x = HermitianOperator::from_real(2, &[0.6, 0.2, 0.2, 0.4]).unwrap();
        let via_map = map.apply(&x).unwrap();
        let via_channel = ch.apply(&x).unwrap();
        let err = (via_map.entries() - via_channel.entries()).map(|z| z.norm()).max();
        assert!(err < 1e-12);
        assert!(ch.cp_residual() < 1e-12);
        assert!(ch.trace_nonincreasing_residual() < 1e-12);
    }

    #[test]
    fn tensor_power_block_structure_oracle() {
        // dense oracle at n = 2: pinch the full 4x4 matrix directly
        let a = HermitianOperator::diagonal(&[1.0, 2.0]);
        let x = HermitianOperator::from_real(2, &[1.0, 0.3, 0.3, 0.5]).unwrap();
        let a2 = tensor(&a, &a);
        let x2 = tensor(&x, &x);
        let map2 = pinching_from(&a2, DEFAULT_CLUSTER_TOL);
        let pinched = map2.apply(&x2).unwrap();
        let alpha = 2.0;
        let dense: f64 = eig(&pinched)
            .eigenvalues
            .iter()
            .map(|&l| if l > 0.0 { l.powf(alpha) } else { 0.0 })
            .sum();
        let seq = pinching_power_sequence(&a, &x, alpha, 2).unwrap();
        assert!((seq[1] - dense.sqrt()).abs() < 1e-9, "blockwise {} vs dense {}", seq[1], dense.sqrt());
    }
}
