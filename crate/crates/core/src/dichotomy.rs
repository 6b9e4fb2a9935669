//! The semiring of dichotomies: pairs `(ρ, σ)` of PSD operators with
//! `supp ρ ⊆ supp σ`, under direct sum (+) and tensor product (·).

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{
    self, direct_sum, eig, frac_power, op_norm, support_contained, support_projector, tensor,
    CMatrix, C64, HermitianOperator, PSD_TOL,
};

/// Operators whose norm falls below this (relative) threshold count as zero.
const ZERO_TOL: f64 = 1e-12;
/// Relative eigenvalue threshold for rank decisions.
const RANK_TOL: f64 = 1e-9;
/// Slack for integer ceilings of floating-point formulas.
const CEIL_SLACK: f64 = 1e-9;

/// A quantum dichotomy `(ρ, σ)`: both PSD, `supp ρ ⊆ supp σ`, and `σ = 0`
/// whenever `ρ = 0`.
#[derive(Clone, Debug)]
pub struct Dichotomy {
    rho: HermitianOperator,
    sigma: HermitianOperator,
}

/// A pair of nonnegative weight vectors over a common finite index set,
/// with `q_x = 0 ⇒ p_x = 0` and `p = 0 ⇒ q = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDichotomy {
    p: Vec<f64>,
    q: Vec<f64>,
}

/// A dichotomy on the one-dimensional space: either `(0, 0)` or a pair of
/// strictly positive scalars. Multiplying by these rescales the two
/// components independently.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarPair {
    a: f64,
    b: f64,
}

/// Exponent `k` together with the explicit map certifying the power bound.
#[derive(Clone, Debug)]
pub struct UniversalBound {
    pub k: u32,
    pub witness: Channel,
}

/// Output of the natural-number bounding construction: `1 ≼ n1·d` and
/// `d ≼ n2`, each certified by an explicit map.
#[derive(Clone, Debug)]
pub struct BoundedBetween {
    pub n1: u32,
    pub n2: u32,
    pub lower_witness: Channel,
    pub upper_witness: Channel,
    pub kernel_projector: HermitianOperator,
}

fn psd_check(op: &HermitianOperator) -> Result<()> {
    let scale = op_norm(op);
    let min = linalg::min_eigenvalue(op);
    if min < -PSD_TOL * scale {
        return Err(Error::NegativeEigenvalue { min_eigenvalue: min });
    }
    Ok(())
}

impl Dichotomy {
    pub fn new(rho: HermitianOperator, sigma: HermitianOperator) -> Result<Self> {
        if rho.dim() != sigma.dim() {
            return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
        }
        psd_check(&rho)?;
        psd_check(&sigma)?;
        let rho_zero = op_norm(&rho) <= ZERO_TOL * op_norm(&sigma).max(1.0);
        let sigma_zero = op_norm(&sigma) <= ZERO_TOL;
        if rho_zero && !sigma_zero {
            return Err(Error::ZeroRhoNonzeroSigma);
        }
        if !support_contained(&rho, &sigma)? {
            return Err(Error::SupportViolation { residual: f64::NAN });
        }
        Ok(Self { rho, sigma })
    }

    /// The class of `n ∈ N` inside the semiring: `(I_n, I_n)`.
    pub fn natural(n: usize) -> Self {
        Self {
            rho: HermitianOperator::identity(n),
            sigma: HermitianOperator::identity(n),
        }
    }

    /// The multiplicative unit `(1, 1)` on `C`.
    pub fn unit() -> Self {
        Self::natural(1)
    }

    /// The additive unit `(0, 0)` on `C`.
    pub fn zero() -> Self {
        Self { rho: HermitianOperator::zeros(1), sigma: HermitianOperator::zeros(1) }
    }

    pub fn rho(&self) -> &HermitianOperator {
        &self.rho
    }

    pub fn sigma(&self) -> &HermitianOperator {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn is_zero(&self) -> bool {
        op_norm(&self.rho) <= ZERO_TOL && op_norm(&self.sigma) <= ZERO_TOL
    }

    /// Both components have unit trace, up to `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.rho.trace() - 1.0).abs() <= tol && (self.sigma.trace() - 1.0).abs() <= tol
    }

    /// One bit of asymmetric distinguishability: `(|0><0|, I/2)`.
    pub fn distinguishability_bit() -> Self {
        Self {
            rho: HermitianOperator::diagonal(&[1.0, 0.0]),
            sigma: HermitianOperator::diagonal(&[0.5, 0.5]),
        }
    }
}

pub fn make_dichotomy(rho: HermitianOperator, sigma: HermitianOperator) -> Result<Dichotomy> {
    Dichotomy::new(rho, sigma)
}

impl ClassicalDichotomy {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch { left: p.len(), right: q.len() });
        }
        if p.is_empty() {
            return Err(Error::InvalidDichotomy("empty index set".into()));
        }
        let mut p = p;
        let mut q = q;
        for v in p.iter_mut().chain(q.iter_mut()) {
            if *v < -1e-12 {
                return Err(Error::InvalidDichotomy(format!("negative weight {v}")));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        for (&px, &qx) in p.iter().zip(q.iter()) {
            if qx == 0.0 && px > 0.0 {
                return Err(Error::SupportViolation { residual: px });
            }
        }
        let p_zero = p.iter().all(|&v| v == 0.0);
        let q_zero = q.iter().all(|&v| v == 0.0);
        if p_zero && !q_zero {
            return Err(Error::ZeroRhoNonzeroSigma);
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.p.iter().all(|&v| v == 0.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.p.clone();
        p.extend_from_slice(&other.p);
        let mut q = self.q.clone();
        q.extend_from_slice(&other.q);
        Self { p, q }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Vec::with_capacity(self.len() * other.len());
        let mut q = Vec::with_capacity(self.len() * other.len());
        for i in 0..self.len() {
            for j in 0..other.len() {
                p.push(self.p[i] * other.p[j]);
                q.push(self.q[i] * other.q[j]);
            }
        }
        Self { p, q }
    }
}

/// Embed a classical dichotomy as a pair of diagonal operators.
pub fn embed_classical(c: &ClassicalDichotomy) -> Dichotomy {
    Dichotomy {
        rho: HermitianOperator::diagonal(c.p()),
        sigma: HermitianOperator::diagonal(c.q()),
    }
}

/// Direct sum of dichotomies.
pub fn add(d1: &Dichotomy, d2: &Dichotomy) -> Dichotomy {
    Dichotomy {
        rho: direct_sum(&d1.rho, &d2.rho),
        sigma: direct_sum(&d1.sigma, &d2.sigma),
    }
}

/// Tensor product of dichotomies.
pub fn mul(d1: &Dichotomy, d2: &Dichotomy) -> Dichotomy {
    Dichotomy {
        rho: tensor(&d1.rho, &d2.rho),
        sigma: tensor(&d1.sigma, &d2.sigma),
    }
}

impl ScalarPair {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::InvalidDichotomy(format!("negative scalar pair ({a}, {b})")));
        }
        if (a == 0.0) != (b == 0.0) {
            return Err(Error::InvalidDichotomy(format!(
                "scalar pair ({a}, {b}) must be (0,0) or strictly positive"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn as_dichotomy(&self) -> Dichotomy {
        Dichotomy {
            rho: HermitianOperator::diagonal(&[self.a]),
            sigma: HermitianOperator::diagonal(&[self.b]),
        }
    }
}

/// Rescale a dichotomy by a scalar pair: `(a·ρ, b·σ)`.
pub fn scale(d: &Dichotomy, s: &ScalarPair) -> Dichotomy {
    mul(&s.as_dichotomy(), d)
}

/// The power universal element `u = (3, 2)` on `C`.
pub fn power_universal() -> ScalarPair {
    ScalarPair { a: 3.0, b: 2.0 }
}

fn ceil_with_slack(x: f64) -> f64 {
    (x - CEIL_SLACK).ceil().max(0.0)
}

/// `‖σ^{-1/2} ρ σ^{-1/2}‖_∞`, the smallest `t` with `ρ ≤ t σ` (inverse on
/// the support of σ).
pub fn sup_ratio(d: &Dichotomy) -> Result<f64> {
    let s = frac_power(&d.sigma, -0.5)?;
    let m = s.entries() * d.rho.entries() * s.entries();
    let adj = m.adjoint();
    let m = HermitianOperator::new((&m + &adj).scale(0.5))?;
    Ok(op_norm(&m))
}

/// Smallest `k` with `u^k ≽ d`, along with the map
/// `T1(x) = x · 2^{-k} σ` certifying it.
pub fn universal_exponent_upper(d: &Dichotomy) -> Result<UniversalBound> {
    if d.is_zero() {
        return Err(Error::ZeroDichotomy);
    }
    let tr_sigma = d.sigma.trace();
    let lam = sup_ratio(d)?;
    let k = ceil_with_slack(tr_sigma.log2())
        .max(ceil_with_slack(lam.ln() / 1.5f64.ln()))
        .max(0.0) as u32;
    Ok(UniversalBound { k, witness: upper_witness_at(d, k) })
}

/// Smallest `k` with `u^k · d ≽ 1`, along with the map
/// `T2(x) = 2^{-k} Tr(x) / Tr σ` certifying it.
pub fn universal_exponent_lower(d: &Dichotomy) -> Result<UniversalBound> {
    if d.is_zero() {
        return Err(Error::ZeroDichotomy);
    }
    let tr_sigma = d.sigma.trace();
    let tr_rho = d.rho.trace();
    let k = ceil_with_slack(-tr_sigma.log2())
        .max(ceil_with_slack((tr_sigma / tr_rho).ln() / 1.5f64.ln()))
        .max(0.0) as u32;
    Ok(UniversalBound { k, witness: lower_witness_at(d, k) })
}

/// Witness for `u^k ≽ d` at any `k` at least the upper exponent.
pub fn upper_witness_at(d: &Dichotomy, k: u32) -> Channel {
    let sigma_scaled = d.sigma.scaled(0.5f64.powi(k as i32));
    Channel::replacer(1, &sigma_scaled)
}

/// Witness for `u^k · d ≽ 1` at any `k` at least the lower exponent.
pub fn lower_witness_at(d: &Dichotomy, k: u32) -> Channel {
    let c = 0.5f64.powi(k as i32) / d.sigma.trace();
    let dim = d.dim();
    Channel::from_map(dim, 1, |i, j| {
        let v = if i == j { c } else { 0.0 };
        CMatrix::from_element(1, 1, C64::new(v, 0.0))
    })
    .expect("lower witness")
}

/// Multiplier `m = (1, λ)` with `λ = ‖σ^{-1/2} ρ σ^{-1/2}‖_∞`, chosen so
/// that `m·d` satisfies the precondition of the bounding construction.
pub fn multiplier(d: &Dichotomy) -> Result<ScalarPair> {
    if d.is_zero() {
        return Err(Error::ZeroDichotomy);
    }
    let lam = sup_ratio(d)?;
    ScalarPair::new(1.0, lam)
}

/// For `ρ ≤ σ` with `rank(σ - ρ) < rank σ`: natural numbers `n1, n2` with
/// `1 ≼ n1·d` and `d ≼ n2`, certified by explicit maps.
pub fn bounded_between_naturals(d: &Dichotomy) -> Result<BoundedBetween> {
    if d.is_zero() {
        return Err(Error::ZeroDichotomy);
    }
    let gap = d.sigma.sub(&d.rho)?;
    let gap_scale = op_norm(&gap);
    let sigma_scale = op_norm(&d.sigma);
    if linalg::min_eigenvalue(&gap) < -PSD_TOL * sigma_scale.max(gap_scale) {
        return Err(Error::PreconditionViolated("ρ ≤ σ fails".into()));
    }
    let rank = |op: &HermitianOperator, scale: f64| -> usize {
        eig(op).eigenvalues.iter().filter(|&&v| v.abs() > RANK_TOL * scale.max(1e-300)).count()
    };
    let rank_gap = rank(&gap, gap_scale);
    let rank_sigma = rank(&d.sigma, sigma_scale);
    if rank_gap >= rank_sigma {
        return Err(Error::PreconditionViolated(format!(
            "rank(σ-ρ) = {rank_gap} is not below rank σ = {rank_sigma}"
        )));
    }

    // kernel of (σ - ρ) inside supp σ: push the complement of supp σ away
    // with a positive shift, then read off the near-zero eigenvectors
    let supp = support_projector(&d.sigma)?;
    let complement = HermitianOperator::identity(d.dim()).sub(&supp)?;
    let shift = gap_scale.max(sigma_scale).max(1.0);
    let k_op = gap.add(&complement.scaled(shift))?;
    let es = eig(&k_op);
    let kdim = d.dim();
    let mut proj = CMatrix::zeros(kdim, kdim);
    let mut kernel_dim = 0;
    for idx in 0..kdim {
        if es.eigenvalues[idx].abs() <= RANK_TOL * shift {
            kernel_dim += 1;
            let col = es.eigenvectors.column(idx);
            for i in 0..kdim {
                for j in 0..kdim {
                    proj[(i, j)] += col[i] * col[j].conj();
                }
            }
        }
    }
    if kernel_dim == 0 {
        return Err(Error::PreconditionViolated("ker(σ-ρ) ∩ supp σ is trivial".into()));
    }
    let p = HermitianOperator::new(proj)?;

    let tr_sigma_p: f64 = (p.entries() * d.sigma.entries()).diagonal().iter().map(|z| z.re).sum();
    let n1 = ceil_with_slack(1.0 / tr_sigma_p).max(1.0);
    let n2 = ceil_with_slack(d.sigma.trace()).max(1.0);
    if n1 > 1e6 || n2 > 1e6 {
        return Err(Error::TooLarge(format!("bounding naturals n1={n1} n2={n2}")));
    }
    let (n1, n2) = (n1 as u32, n2 as u32);

    // T1: B(C^{n1} ⊗ H) -> B(C), x -> (n1 Tr σP)^{-1} Tr(x (I ⊗ P))
    let c1 = 1.0 / (n1 as f64 * tr_sigma_p);
    let ip = tensor(&HermitianOperator::identity(n1 as usize), &p);
    let dim_big = n1 as usize * d.dim();
    let lower_witness = Channel::from_map(dim_big, 1, |i, j| {
        // Tr(|i><j| (I⊗P)) = (I⊗P)[j, i]
        CMatrix::from_element(1, 1, ip.entries()[(j, i)] * c1)
    })?;

    // T2: B(C^{n2}) -> B(H), x -> σ Tr(x) / n2
    let upper_witness = Channel::replacer(n2 as usize, &d.sigma.scaled(1.0 / n2 as f64));

    Ok(BoundedBetween { n1, n2, lower_witness, upper_witness, kernel_projector: p })
}

/// Decide equivalence (existence of a partial isometry intertwining both
/// pairs) by comparing traces of words in `(ρ, σ)`. Words are explored by
/// saturating the generated algebra, which covers every word up to the
/// 2·dim² length bound and beyond; a heuristic at floating point.
pub fn equivalent(d1: &Dichotomy, d2: &Dichotomy) -> bool {
    let scale = op_norm(&d1.rho)
        .max(op_norm(&d1.sigma))
        .max(op_norm(&d2.rho))
        .max(op_norm(&d2.sigma));
    if scale <= ZERO_TOL {
        return true; // both zero
    }
    let inv = 1.0 / scale;
    let gens: Vec<(CMatrix, CMatrix)> = vec![
        (d1.rho.entries().scale(inv), d2.rho.entries().scale(inv)),
        (d1.sigma.entries().scale(inv), d2.sigma.entries().scale(inv)),
    ];
    let (n1, n2) = (d1.dim(), d2.dim());
    let trace_tol = 1e-8 * (n1.max(n2) as f64);

    let vec_len = n1 * n1 + n2 * n2;
    let to_vec = |w: &(CMatrix, CMatrix)| -> Vec<C64> {
        let mut v = Vec::with_capacity(vec_len);
        v.extend(w.0.iter().copied());
        v.extend(w.1.iter().copied());
        v
    };
    let dot = |a: &[C64], b: &[C64]| -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    let norm = |a: &[C64]| -> f64 { dot(a, a).re.sqrt() };

    let trace_pair_ok = |w: &(CMatrix, CMatrix)| -> bool {
        let t1: C64 = w.0.diagonal().iter().copied().sum();
        let t2: C64 = w.1.diagonal().iter().copied().sum();
        (t1 - t2).norm() <= trace_tol
    };

    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut frontier: Vec<(CMatrix, CMatrix)> = Vec::new();

    let push = |w: (CMatrix, CMatrix),
                    basis: &mut Vec<Vec<C64>>,
                    frontier: &mut Vec<(CMatrix, CMatrix)>|
     -> bool {
        if !trace_pair_ok(&w) {
            return false;
        }
        let mut v = to_vec(&w);
        for b in basis.iter() {
            let c = dot(b, &v);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 {
            for vi in v.iter_mut() {
                *vi /= C64::new(nv, 0.0);
            }
            basis.push(v);
            frontier.push(w);
        }
        true
    };

    for g in &gens {
        if !push(g.clone(), &mut basis, &mut frontier) {
            return false;
        }
    }
    let max_len = 2 * n1.max(n2) * n1.max(n2) + 2;
    let mut len = 1;
    while !frontier.is_empty() && len < max_len {
        let current = std::mem::take(&mut frontier);
        for w in &current {
            for g in &gens {
                let next = (&w.0 * &g.0, &w.1 * &g.1);
                if !push(next, &mut basis, &mut frontier) {
                    return false;
                }
            }
        }
        len += 1;
    }
    true
}
