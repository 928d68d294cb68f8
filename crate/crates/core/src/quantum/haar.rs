//! Haar-distributed unitaries.
//!
//! [`haar_unitary_lie`] runs kinetic Langevin dynamics on `U(n)`:
//!
//! ```text
//! dg  = g xi dt
//! dxi = -gamma xi dt + sqrt(2 gamma) dW
//! ```
//!
//! with `xi` in the Lie algebra `u(n)` of skew-Hermitian matrices. The
//! `g`-marginal of the invariant law is Haar. Each step is a Strang splitting:
//! an exact Ornstein-Uhlenbeck half step on `xi`, the exact group flow
//! `g <- g exp(h xi)`, then another half step. The group update multiplies by
//! an exact unitary, so `g` never leaves `U(n)` beyond rounding, and the
//! columns are re-orthonormalized after every step so rounding does not
//! accumulate along long trajectories.
//!
//! [`haar_unitary_qr`] is the Ginibre + QR construction, used as an
//! independent reference.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix, HermitianMatrix};
use crate::math;

/// Unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    inner: ComplexMatrix,
}

/// Largest accepted `||U^dagger U - I||_F`.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

impl UnitaryMatrix {
    pub fn identity(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::identity(dim),
        }
    }

    /// Accepts `m` if its unitarity defect is at most `tol`.
    pub fn try_new(m: ComplexMatrix, tol: f64) -> Result<Self> {
        let defect = m.unitarity_defect();
        if !(defect <= tol) {
            return Err(Error::InvalidConfig(alloc::format!("unitarity defect {defect:e}")));
        }
        Ok(Self { inner: m })
    }

    pub(crate) fn new_unchecked(inner: ComplexMatrix) -> Self {
        Self { inner }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[inline]
    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        Self {
            inner: self.inner.matmul(&rhs.inner),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }
}

/// Kinetic Langevin sampler settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LieSamplerConfig {
    /// `gamma`.
    pub friction: f64,
    pub step_size: f64,
    pub burn_in_steps: usize,
    /// Steps between successive draws from one chain.
    pub thinning: usize,
}

impl Default for LieSamplerConfig {
    fn default() -> Self {
        Self {
            friction: 1.0,
            step_size: 0.01,
            burn_in_steps: 2000,
            thinning: 50,
        }
    }
}

impl LieSamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.friction > 0.0 && self.friction.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!("friction {}", self.friction)));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!("step_size {}", self.step_size)));
        }
        if self.burn_in_steps == 0 || self.thinning == 0 {
            return Err(Error::InvalidConfig("burn_in_steps and thinning must be positive".into()));
        }
        Ok(())
    }
}

/// Orthonormal basis of `u(n)` under `<A, B> = Re Tr(A^dagger B)`:
/// `i E_kk`, then for each `k < l` the pair `(E_kl - E_lk)/sqrt 2`,
/// `i (E_kl + E_lk)/sqrt 2`.
pub fn lie_algebra_basis(n: usize) -> Vec<ComplexMatrix> {
    let mut basis = Vec::with_capacity(n * n);
    let i = Complex64::new(0.0, 1.0);
    for k in 0..n {
        let mut e = ComplexMatrix::zeros(n);
        e[(k, k)] = i;
        basis.push(e);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let mut a = ComplexMatrix::zeros(n);
            a[(k, l)] = Complex64::new(FRAC_1_SQRT_2, 0.0);
            a[(l, k)] = Complex64::new(-FRAC_1_SQRT_2, 0.0);
            basis.push(a);
            let mut s = ComplexMatrix::zeros(n);
            s[(k, l)] = i * FRAC_1_SQRT_2;
            s[(l, k)] = i * FRAC_1_SQRT_2;
            basis.push(s);
        }
    }
    basis
}

/// `-i xi` for `xi = sum_k coeffs[k] e_k`, in the basis order of
/// [`lie_algebra_basis`].
fn generator_hermitian(coeffs: &[f64], n: usize) -> HermitianMatrix {
    let mut h = ComplexMatrix::zeros(n);
    for k in 0..n {
        h[(k, k)] = Complex64::new(coeffs[k], 0.0);
    }
    let mut idx = n;
    for k in 0..n {
        for l in (k + 1)..n {
            let anti = coeffs[idx];
            let sym = coeffs[idx + 1];
            idx += 2;
            h[(k, l)] = Complex64::new(sym, -anti) * FRAC_1_SQRT_2;
        }
    }
    HermitianMatrix::from_upper(&h)
}

/// `exp(h xi) = exp(i h H)` with `H = -i xi`.
fn exp_skew(coeffs: &[f64], n: usize, h: f64) -> Result<ComplexMatrix> {
    let e = eigh(&generator_hermitian(coeffs, n))?;
    let q = &e.eigenvectors;
    let phases: Vec<Complex64> = e
        .eigenvalues
        .iter()
        .map(|&w| Complex64::new(math::cos(h * w), math::sin(h * w)))
        .collect();
    let scaled = ComplexMatrix::from_fn(n, |i, j| q[(i, j)] * phases[j]);
    Ok(scaled.matmul_adjoint(q))
}

/// State of one Langevin trajectory on `U(n)`.
#[derive(Clone, Debug)]
pub struct LieChain {
    n: usize,
    cfg: LieSamplerConfig,
    g: ComplexMatrix,
    xi: Vec<f64>,
    steps: u64,
}

impl LieChain {
    /// Starts at `g = I`, `xi = 0`.
    pub fn new(n: usize, cfg: LieSamplerConfig) -> Result<Self> {
        cfg.validate()?;
        if n == 0 {
            return Err(Error::InvalidConfig("unitary dimension must be positive".into()));
        }
        Ok(Self {
            n,
            cfg,
            g: ComplexMatrix::identity(n),
            xi: vec![0.0; n * n],
            steps: 0,
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn current(&self) -> UnitaryMatrix {
        UnitaryMatrix::new_unchecked(self.g.clone())
    }

    fn ou_half_step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let tau = 0.5 * self.cfg.step_size * self.cfg.friction;
        let decay = math::exp(-tau);
        let noise = math::sqrt(-math::expm1(-2.0 * tau));
        for c in self.xi.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *c = decay * *c + noise * z;
        }
    }

    /// One splitting step.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        self.ou_half_step(rng);
        let flow = exp_skew(&self.xi, self.n, self.cfg.step_size)?;
        self.g = self.g.matmul(&flow);
        orthonormalize_columns(&mut self.g);
        self.ou_half_step(rng);
        self.steps += 1;
        Ok(())
    }

    pub fn advance<R: Rng + ?Sized>(&mut self, steps: usize, rng: &mut R) -> Result<()> {
        for _ in 0..steps {
            self.step(rng)?;
        }
        Ok(())
    }

    /// Runs the burn-in.
    pub fn burn_in<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        self.advance(self.cfg.burn_in_steps, rng)
    }

    /// Advances by the thinning interval and returns the new position.
    pub fn next_sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<UnitaryMatrix> {
        self.advance(self.cfg.thinning, rng)?;
        Ok(self.current())
    }
}

/// One Haar draw from a fresh chain after `burn_in_steps`.
pub fn haar_unitary_lie<R: Rng + ?Sized>(n: usize, cfg: &LieSamplerConfig, rng: &mut R) -> Result<UnitaryMatrix> {
    let mut chain = LieChain::new(n, *cfg)?;
    chain.burn_in(rng)?;
    Ok(chain.current())
}

/// `count` draws from a single chain: burn-in, then `thinning` steps between
/// successive draws.
pub fn haar_unitaries_lie<R: Rng + ?Sized>(
    n: usize,
    count: usize,
    cfg: &LieSamplerConfig,
    rng: &mut R,
) -> Result<Vec<UnitaryMatrix>> {
    let mut chain = LieChain::new(n, *cfg)?;
    chain.burn_in(rng)?;
    let mut out = Vec::with_capacity(count);
    if count > 0 {
        out.push(chain.current());
    }
    for _ in 1..count {
        out.push(chain.next_sample(rng)?);
    }
    Ok(out)
}

/// Gram-Schmidt on the columns of `m`, projecting twice per column.
fn orthonormalize_columns(m: &mut ComplexMatrix) {
    let n = m.dim();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| m[(i, j)]).collect()).collect();
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let q = &done[k];
                let v = &mut rest[0];
                let proj: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = math::sqrt(cols[j].iter().map(|z| z.norm_sqr()).sum());
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            m[(i, j)] = *z;
        }
    }
}

/// Haar unitary by Gram-Schmidt QR of a complex Ginibre matrix.
///
/// Orthogonalization is done twice per column. The implied `R` has a positive
/// real diagonal, which is the phase convention that makes `Q` Haar.
pub fn haar_unitary_qr<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitaryMatrix {
    let cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * FRAC_1_SQRT_2
                })
                .collect()
        })
        .collect();
    let mut m = ComplexMatrix::from_fn(n, |i, j| cols[j][i]);
    orthonormalize_columns(&mut m);
    UnitaryMatrix::new_unchecked(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn basis_is_orthonormal_and_skew() {
        for n in 1..5 {
            let b = lie_algebra_basis(n);
            assert_eq!(b.len(), n * n);
            for (i, x) in b.iter().enumerate() {
                assert_eq!(x.add(&x.adjoint()), ComplexMatrix::zeros(n));
                for (j, y) in b.iter().enumerate() {
                    let ip = x.adjoint().matmul(y).trace().re;
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - expected).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn generator_matches_basis_expansion() {
        let n = 3;
        let coeffs: Vec<f64> = (0..9).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut xi = ComplexMatrix::zeros(n);
        for (c, e) in coeffs.iter().zip(lie_algebra_basis(n)) {
            xi = xi.add(&e.scale(*c));
        }
        let h = xi.scale(1.0);
        let minus_i_xi = ComplexMatrix::from_fn(n, |i, j| h[(i, j)] * Complex64::new(0.0, -1.0));
        assert!(generator_hermitian(&coeffs, n).as_matrix().distance(&minus_i_xi) < 1e-15);
    }

    #[test]
    fn zero_steps_is_identity() {
        let chain = LieChain::new(4, LieSamplerConfig::default()).unwrap();
        assert_eq!(chain.current(), UnitaryMatrix::identity(4));
    }

    #[test]
    fn chain_stays_unitary() {
        let cfg = LieSamplerConfig {
            step_size: 0.05,
            ..Default::default()
        };
        let mut chain = LieChain::new(4, cfg).unwrap();
        let mut rng = rng::stream(1, 0);
        for _ in 0..20 {
            chain.advance(500, &mut rng).unwrap();
            assert!(chain.current().as_matrix().unitarity_defect() <= 1e-10);
        }
    }

    #[test]
    fn qr_is_unitary() {
        let mut rng = rng::stream(2, 0);
        for n in 1..9 {
            for _ in 0..20 {
                assert!(haar_unitary_qr(n, &mut rng).as_matrix().unitarity_defect() <= 1e-12);
            }
        }
    }

    #[test]
    fn qr_scalar_is_unit_phase() {
        let mut rng = rng::stream(3, 0);
        for _ in 0..100 {
            let u = haar_unitary_qr(1, &mut rng);
            assert!((u.as_matrix()[(0, 0)].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = LieSamplerConfig {
            friction: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = LieSamplerConfig {
            thinning: 0,
            ..Default::default()
        };
        assert!(LieChain::new(2, bad).is_err());
    }
}
