//! Lanczos propagation `psi -> exp(-i H dt) psi` for Hermitian `H`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{Control, Observer, PropagatorConfig, Trajectory};
use crate::spin::{LinearOperator, SpinState};
use crate::{Error, Result};

/// Norm drift that is silently renormalized.
const RENORM_THRESHOLD: f64 = 1e-9;
/// Give up after this many step halvings.
const MAX_HALVINGS: u32 = 40;

/// Counters accumulated across steps.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub matvecs: usize,
    pub substeps: usize,
    pub renormalizations: usize,
}

/// Reusable Lanczos workspace bound to one operator.
pub struct KrylovPropagator<'a, A: LinearOperator + ?Sized> {
    op: &'a A,
    max_dim: usize,
    tolerance: f64,
    basis: Vec<Vec<C64>>,
    stats: StepStats,
}

/// Tridiagonal projection and what is needed to exponentiate it.
struct Projection {
    eigvals: Vec<f64>,
    eigvecs: DMatrix<f64>,
    /// `beta_k`, coupling of the last basis vector to the next one.
    beta_next: f64,
    exact: bool,
}

impl Projection {
    fn new(alpha: &[f64], beta: &[f64], beta_next: f64, exact: bool) -> Self {
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        Self { eigvals: eig.eigenvalues.iter().copied().collect(), eigvecs: eig.eigenvectors, beta_next, exact }
    }

    /// `exp(-i T dt) e_1`.
    fn coefficients(&self, dt: f64) -> Vec<C64> {
        let k = self.eigvals.len();
        let weights: Vec<C64> = (0..k)
            .map(|l| C64::from_polar(self.eigvecs[(0, l)], -self.eigvals[l] * dt))
            .collect();
        (0..k).map(|i| (0..k).map(|l| weights[l] * self.eigvecs[(i, l)]).sum()).collect()
    }

    /// A posteriori local error of the projected exponential.
    fn error(&self, coeffs: &[C64]) -> f64 {
        if self.exact {
            0.0
        } else {
            self.beta_next * coeffs.last().map_or(0.0, |c| c.norm())
        }
    }
}

impl<'a, A: LinearOperator + ?Sized> KrylovPropagator<'a, A> {
    pub fn new(op: &'a A, max_dim: usize, tolerance: f64) -> Result<Self> {
        if max_dim < 2 {
            return Err(Error::InvalidInput("Krylov dimension must be at least 2".into()));
        }
        Ok(Self { op, max_dim, tolerance, basis: Vec::new(), stats: StepStats::default() })
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// Lanczos with full reorthogonalization, stopping as soon as the error
    /// estimate for a step of `dt` meets the tolerance.
    fn project(&mut self, psi: &[C64], norm: f64, dt: f64) -> Projection {
        let dim = psi.len();
        let m = self.max_dim.min(dim);
        if self.basis.len() < m + 1 {
            self.basis.resize_with(m + 1, || vec![C64::new(0.0, 0.0); dim]);
        }
        for (b, p) in self.basis[0].iter_mut().zip(psi) {
            *b = p / norm;
        }
        let mut alpha = Vec::with_capacity(m);
        let mut beta = Vec::with_capacity(m);
        for k in 0..m {
            let (head, tail) = self.basis.split_at_mut(k + 1);
            let w = &mut tail[0];
            self.op.apply(&head[k], w);
            self.stats.matvecs += 1;
            let a = crate::spin::inner(&head[k], w).re;
            alpha.push(a);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for v in head.iter() {
                    let c = crate::spin::inner(v, w);
                    w.par_iter_mut().zip(v.par_iter()).for_each(|(wi, vi)| *wi -= c * vi);
                }
            }
            let b = crate::spin::norm_sqr(w).sqrt();
            let breakdown = b <= 1e-13 * (a.abs() + beta.last().copied().unwrap_or(0.0) + 1e-300);
            if breakdown || k + 1 == m {
                let exact = breakdown || k + 1 == dim;
                return Projection::new(&alpha, &beta, b, exact);
            }
            if k >= 2 {
                let trial = Projection::new(&alpha, &beta, b, false);
                if trial.error(&trial.coefficients(dt)) <= self.tolerance {
                    return trial;
                }
            }
            w.par_iter_mut().for_each(|wi| *wi /= b);
            beta.push(b);
        }
        unreachable!("loop returns on its last iteration")
    }

    /// Advances `psi` by `dt` (any sign), sub-stepping if the Krylov space is
    /// too small for the full step.
    pub fn step(&mut self, psi: &mut [C64], dt: f64) -> Result<()> {
        let norm0 = crate::spin::norm_sqr(psi).sqrt();
        if norm0 == 0.0 {
            return Err(Error::InvalidInput("cannot propagate the zero vector".into()));
        }
        let mut remaining = dt;
        let mut h = dt;
        while remaining != 0.0 {
            if h.abs() > remaining.abs() {
                h = remaining;
            }
            let norm = crate::spin::norm_sqr(psi).sqrt();
            let proj = self.project(psi, norm, h);
            let mut halvings = 0;
            let coeffs = loop {
                let c = proj.coefficients(h);
                let err = proj.error(&c);
                if err <= self.tolerance {
                    break c;
                }
                if halvings == MAX_HALVINGS {
                    return Err(Error::KrylovBreakdown { residual: err, tolerance: self.tolerance });
                }
                h /= 2.0;
                halvings += 1;
                self.stats.substeps += 1;
            };
            let k = coeffs.len();
            let basis = &self.basis[..k];
            psi.par_iter_mut().enumerate().for_each(|(i, p)| {
                *p = norm * basis.iter().zip(&coeffs).map(|(v, c)| v[i] * c).sum::<C64>();
            });
            remaining -= h;
            if remaining.abs() <= 1e-15 * dt.abs() {
                remaining = 0.0;
            }
            if halvings == 0 {
                h *= 2.0;
            }
        }
        let norm1 = crate::spin::norm_sqr(psi).sqrt();
        let drift = (norm1 / norm0 - 1.0).abs();
        if drift > RENORM_THRESHOLD {
            return Err(Error::NormDrift { drift });
        }
        if drift > 0.0 {
            let s = norm0 / norm1;
            psi.par_iter_mut().for_each(|p| *p *= s);
            self.stats.renormalizations += 1;
        }
        Ok(())
    }
}

/// Samples `exp(-i H t) psi0` on the configured grid, handing each sample to
/// `observer`. Stops at `t_final` or when the observer asks to.
pub fn evolve_unitary<A, O>(
    psi0: &SpinState,
    op: &A,
    cfg: &PropagatorConfig,
    observer: &mut O,
) -> Result<Trajectory<SpinState>>
where
    A: LinearOperator + ?Sized,
    O: Observer<SpinState> + ?Sized,
{
    cfg.validate()?;
    if op.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch { expected: psi0.dim(), found: op.dim() });
    }
    let mut state = psi0.clone();
    let mut prop = KrylovPropagator::new(op, cfg.krylov_dim, cfg.step_tolerance)?;
    let mut times = Vec::new();
    let mut max_norm_drift: f64 = 0.0;
    let mut stopped_early = false;
    for (k, t) in cfg.sample_times().into_iter().enumerate() {
        if k > 0 {
            prop.step(state.amplitudes_mut(), cfg.dt_sample)?;
        }
        max_norm_drift = max_norm_drift.max((state.norm_sqr().sqrt() - 1.0).abs());
        times.push(t);
        if observer.observe(t, &state)? == Control::Stop {
            stopped_early = true;
            break;
        }
    }
    let stats = prop.stats();
    log::debug!(
        "unitary run: {} samples, {} matvecs, {} substeps, {} renormalizations",
        times.len(),
        stats.matvecs,
        stats.substeps,
        stats.renormalizations
    );
    Ok(Trajectory { times, final_state: state, stopped_early, max_norm_drift, warnings: Vec::new() })
}
