//! Fixed-step RK4 integration of the Lindblad master equation
//! `d rho/dt = -i[H, rho] + sum_k g_k (A_k rho A_k^dag - {A_k^dag A_k, rho}/2)`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{Control, Observer, PropagatorConfig, Trajectory};
use crate::spin::{DensityMatrix, SparseOperator};
use crate::{Error, Result};

/// Largest atom number integrated in the full product basis.
pub const MAX_LINDBLAD_ATOMS: usize = 10;
const TRACE_TOLERANCE: f64 = 1e-6;
const POSITIVITY_TOLERANCE: f64 = -1e-6;
/// Cap on `h * ||generator||` for accuracy, on top of `h <= dt_sample / 20`.
const MAX_STEP_PHASE: f64 = 0.25;

/// Hamiltonian plus jump operators with their rates.
#[derive(Clone, Debug)]
pub struct LindbladSpec {
    pub hamiltonian: SparseOperator,
    pub jumps: Vec<(SparseOperator, f64)>,
}

impl LindbladSpec {
    pub fn validate(&self) -> Result<()> {
        let dim = self.hamiltonian.dim();
        for (a, rate) in &self.jumps {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: a.dim() });
            }
            if !(*rate >= 0.0 && rate.is_finite()) {
                return Err(Error::InvalidInput(format!("jump rate must be nonnegative, got {rate}")));
            }
        }
        if !self.hamiltonian.is_hermitian(1e-12) {
            return Err(Error::InvalidInput("Lindblad Hamiltonian is not Hermitian".into()));
        }
        Ok(())
    }
}

/// `L(rho) = Y + Y^dag + sum_k g_k A_k (A_k rho)^dag` with `Y = K rho` and
/// `K = -iH - sum_k g_k A_k^dag A_k / 2`.
struct Generator {
    dim: usize,
    k: SparseOperator,
    jumps: Vec<(SparseOperator, f64)>,
    scratch: Vec<C64>,
    scratch2: Vec<C64>,
}

impl Generator {
    fn new(spec: &LindbladSpec) -> Self {
        let dim = spec.hamiltonian.dim();
        let mut k = &spec.hamiltonian * C64::new(0.0, -1.0);
        let mut jumps = Vec::new();
        for (a, rate) in &spec.jumps {
            if *rate == 0.0 {
                continue;
            }
            let ada = &a.adjoint() * a;
            k = &k - &(&ada * (0.5 * rate));
            jumps.push((a.clone(), *rate));
        }
        Self { dim, k, jumps, scratch: vec![C64::default(); dim * dim], scratch2: vec![C64::default(); dim * dim] }
    }

    fn norm_bound(&self) -> f64 {
        2.0 * self.k.row_sum_norm() + self.jumps.iter().map(|(a, g)| g * a.row_sum_norm().powi(2)).sum::<f64>()
    }

    fn apply(&mut self, rho: &[C64], out: &mut [C64]) {
        let dim = self.dim;
        DensityMatrix::left_mul(&self.k, rho, dim, &mut self.scratch);
        let y = &self.scratch;
        out.par_chunks_mut(dim).enumerate().for_each(|(r, row)| {
            for (c, o) in row.iter_mut().enumerate() {
                *o = y[r * dim + c] + y[c * dim + r].conj();
            }
        });
        for (a, rate) in &self.jumps {
            DensityMatrix::left_mul(a, rho, dim, &mut self.scratch);
            // scratch2 = (A rho)^dag
            let z = &self.scratch;
            self.scratch2.par_chunks_mut(dim).enumerate().for_each(|(r, row)| {
                for (c, o) in row.iter_mut().enumerate() {
                    *o = z[c * dim + r].conj();
                }
            });
            DensityMatrix::left_mul(a, &self.scratch2, dim, &mut self.scratch);
            let z = &self.scratch;
            out.par_iter_mut().zip(z.par_iter()).for_each(|(o, v)| *o += v * rate);
        }
    }
}

/// Integrates `rho0` over the configured sampling grid with RK4, calling
/// `observer` at every sample.
pub fn evolve_lindblad<O>(
    rho0: &DensityMatrix,
    spec: &LindbladSpec,
    cfg: &PropagatorConfig,
    observer: &mut O,
) -> Result<Trajectory<DensityMatrix>>
where
    O: Observer<DensityMatrix> + ?Sized,
{
    cfg.validate()?;
    if rho0.n_atoms() > MAX_LINDBLAD_ATOMS {
        let dim = rho0.dim() as u64;
        let max_dim = 1u64 << MAX_LINDBLAD_ATOMS;
        // density matrix plus five RK4 work buffers and two scratch buffers
        let per = std::mem::size_of::<C64>() as u64 * 8;
        return Err(Error::MemoryBudget { required: dim * dim * per, budget: max_dim * max_dim * per });
    }
    if spec.hamiltonian.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: rho0.dim(), found: spec.hamiltonian.dim() });
    }
    spec.validate()?;
    let mut gen = Generator::new(spec);
    let h_max = (cfg.dt_sample / 20.0).min(MAX_STEP_PHASE / gen.norm_bound().max(1e-300));
    let n_sub = (cfg.dt_sample / h_max).ceil().max(20.0) as usize;
    let h = cfg.dt_sample / n_sub as f64;
    log::debug!("lindblad: dim {}, {} RK4 steps per sample, h = {h:e}", rho0.dim(), n_sub);

    let n = rho0.dim() * rho0.dim();
    let mut rho = rho0.clone();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![C64::default(); n], vec![C64::default(); n], vec![C64::default(); n], vec![C64::default(); n], vec![C64::default(); n]);
    let mut times = Vec::new();
    let mut warnings = Vec::new();
    let mut max_drift: f64 = 0.0;
    let mut stopped_early = false;
    for (s, t) in cfg.sample_times().into_iter().enumerate() {
        if s > 0 {
            for _ in 0..n_sub {
                let r = rho.elements_mut();
                gen.apply(r, &mut k1);
                axpy(&mut tmp, r, &k1, h / 2.0);
                gen.apply(&tmp, &mut k2);
                axpy(&mut tmp, r, &k2, h / 2.0);
                gen.apply(&tmp, &mut k3);
                axpy(&mut tmp, r, &k3, h);
                gen.apply(&tmp, &mut k4);
                r.par_iter_mut().enumerate().for_each(|(i, v)| {
                    *v += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
                });
            }
        }
        let drift = (rho.trace() - C64::new(1.0, 0.0)).norm();
        max_drift = max_drift.max(drift);
        if drift > TRACE_TOLERANCE {
            return Err(Error::TraceDrift { drift });
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < POSITIVITY_TOLERANCE {
            warnings.push(format!("t = {t:e}: minimum eigenvalue {min_eig:e}"));
        }
        times.push(t);
        if observer.observe(t, &rho)? == Control::Stop {
            stopped_early = true;
            break;
        }
    }
    Ok(Trajectory { times, final_state: rho, stopped_early, max_norm_drift: max_drift, warnings })
}

fn axpy(out: &mut [C64], x: &[C64], k: &[C64], a: f64) {
    out.par_iter_mut().zip(x.par_iter().zip(k.par_iter())).for_each(|(o, (xi, ki))| *o = xi + ki * a);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::evolve_unitary;
    use crate::hamiltonian::{build_hcgr, coherent_plus_x, CgrParams};
    use crate::spin::{collective_operator, Axis, SpinState};

    #[test]
    fn closed_system_matches_unitary() {
        let p = CgrParams::from_eta(4, 0.6, 0.6, 0.5);
        let h = build_hcgr(&p).unwrap();
        let psi0 = coherent_plus_x(4).unwrap();
        let cfg = PropagatorConfig::new(0.05, 2.0);
        let mut pure = Vec::new();
        let mut obs = |_t: f64, s: &SpinState| {
            pure.push(DensityMatrix::from_pure(s));
            Ok(Control::Continue)
        };
        evolve_unitary(&psi0, &h, &cfg, &mut obs).unwrap();
        let spec = LindbladSpec {
            hamiltonian: h,
            jumps: vec![(collective_operator(4, Axis::Minus).unwrap(), 0.0)],
        };
        let mut mixed = Vec::new();
        let mut obs = |_t: f64, r: &DensityMatrix| {
            mixed.push(r.clone());
            Ok(Control::Continue)
        };
        evolve_lindblad(&DensityMatrix::from_pure(&psi0), &spec, &cfg, &mut obs).unwrap();
        assert_eq!(pure.len(), mixed.len());
        for (a, b) in pure.iter().zip(&mixed) {
            let d = a.elements().iter().zip(b.elements()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(d < 1e-8, "{d}");
        }
    }

    #[test]
    fn two_atom_superradiance_rate_equations() {
        // Dicke ladder |1,1> -> |1,0> -> |1,-1> with rates 2G and 2G:
        // P1 = exp(-2Gt), P0 = 2Gt exp(-2Gt)
        let g = 0.7;
        let spec = LindbladSpec {
            hamiltonian: SparseOperator::zeros(4),
            jumps: vec![(collective_operator(2, Axis::Minus).unwrap(), g)],
        };
        let up = SpinState::basis_state(2, 3).unwrap();
        let cfg = PropagatorConfig::new(0.1, 3.0);
        let sz = collective_operator(2, Axis::Z).unwrap();
        let mut worst = 0.0f64;
        let mut obs = |t: f64, r: &DensityMatrix| {
            let p1 = (-2.0 * g * t).exp();
            let p0 = 2.0 * g * t * (-2.0 * g * t).exp();
            let pm = 1.0 - p1 - p0;
            worst = worst.max((r.get(3, 3).re - p1).abs());
            // |1,0> = (|01> + |10>)/sqrt 2
            let triplet0 = 0.5 * (r.get(1, 1) + r.get(2, 2) + r.get(1, 2) + r.get(2, 1)).re;
            worst = worst.max((triplet0 - p0).abs());
            worst = worst.max((r.get(0, 0).re - pm).abs());
            worst = worst.max((r.expect(&sz).re - (p1 - pm)).abs());
            Ok(Control::Continue)
        };
        let traj = evolve_lindblad(&DensityMatrix::from_pure(&up), &spec, &cfg, &mut obs).unwrap();
        assert!(worst < 1e-6, "{worst}");
        assert!(traj.warnings.is_empty());
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let p = CgrParams::from_eta(4, 0.5, 0.0, 0.3);
        let h = build_hcgr(&p).unwrap();
        let spec = LindbladSpec { hamiltonian: h, jumps: vec![(collective_operator(4, Axis::Minus).unwrap(), 0.2)] };
        let cfg = PropagatorConfig::new(0.1, 2.0);
        let mut obs = |_t: f64, r: &DensityMatrix| {
            assert!((r.trace().re - 1.0).abs() < 1e-7);
            assert!(r.hermiticity_defect() < 1e-10);
            assert!(r.min_eigenvalue() > -1e-8);
            Ok(Control::Continue)
        };
        evolve_lindblad(&DensityMatrix::from_pure(&coherent_plus_x(4).unwrap()), &spec, &cfg, &mut obs).unwrap();
    }

    #[test]
    fn negative_rate_rejected() {
        let spec = LindbladSpec {
            hamiltonian: SparseOperator::zeros(4),
            jumps: vec![(collective_operator(2, Axis::Minus).unwrap(), -1.0)],
        };
        let cfg = PropagatorConfig::new(0.1, 1.0);
        let rho = DensityMatrix::from_pure(&SpinState::all_down(2).unwrap());
        let mut obs = |_t: f64, _r: &DensityMatrix| Ok(Control::Continue);
        assert!(evolve_lindblad(&rho, &spec, &cfg, &mut obs).is_err());
    }

    #[test]
    fn dimension_guard() {
        let rho = DensityMatrix::from_pure(&SpinState::all_down(11).unwrap());
        let spec = LindbladSpec { hamiltonian: SparseOperator::zeros(rho.dim()), jumps: Vec::new() };
        let cfg = PropagatorConfig::new(0.1, 1.0);
        let mut obs = |_t: f64, _r: &DensityMatrix| Ok(Control::Continue);
        assert!(matches!(evolve_lindblad(&rho, &spec, &cfg, &mut obs), Err(Error::MemoryBudget { .. })));
    }
}
