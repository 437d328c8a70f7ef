//! Measured quantities: per-site precession frequencies, synchronization
//! time, collective moments, squeezing, entanglement entropy and the
//! covariance-based Fisher information.

use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::evolve::{Control, Observer};
use crate::spin::{collective_apply, collective_operator, partial_trace_purity, Axis, DensityMatrix, SpinState};
use crate::{Error, Result};

/// Contrast `|<S_j^+>|^2` below which a site's phase is undefined.
pub const MIN_CONTRAST: f64 = 1e-12;
/// Variance reduction required to call a run synchronized.
pub const SYNC_THRESHOLD: f64 = 0.01;
/// Number of points in the rotation-angle grid for `C_yz`.
pub const THETA_GRID: usize = 181;

/// First and second moments of the collective spin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CollectiveMoments {
    pub n_atoms: usize,
    /// `<S^x>, <S^y>, <S^z>`.
    pub mean: [f64; 3],
    /// Symmetrized `<(S^a S^b + S^b S^a)/2>`.
    pub second: [[f64; 3]; 3],
    /// `<S.S>`.
    pub total_spin_sq: f64,
}

impl CollectiveMoments {
    pub fn of(state: &SpinState) -> Self {
        let n = state.n_atoms();
        let psi = state.amplitudes();
        let v: Vec<Vec<C64>> = Axis::CARTESIAN
            .iter()
            .map(|&a| {
                let mut out = vec![C64::new(0.0, 0.0); psi.len()];
                collective_apply(n, a, psi, &mut out);
                out
            })
            .collect();
        let mut mean = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        for a in 0..3 {
            mean[a] = crate::spin::inner(psi, &v[a]).re;
            for b in a..3 {
                // S^a Hermitian: <S^a S^b> = <S^a psi | S^b psi>
                let s = crate::spin::inner(&v[a], &v[b]).re;
                second[a][b] = s;
                second[b][a] = s;
            }
        }
        Self::assemble(n, mean, second)
    }

    pub fn of_density(rho: &DensityMatrix) -> Self {
        let n = rho.n_atoms();
        let dim = rho.dim();
        let ops: Vec<_> = Axis::CARTESIAN.iter().map(|&a| collective_operator(n, a).expect("valid size")).collect();
        let prods: Vec<Vec<C64>> = ops
            .iter()
            .map(|op| {
                let mut out = vec![C64::new(0.0, 0.0); dim * dim];
                DensityMatrix::left_mul(op, rho.elements(), dim, &mut out);
                out
            })
            .collect();
        let mut mean = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        for a in 0..3 {
            mean[a] = rho.expect(&ops[a]).re;
            for b in a..3 {
                // tr(S^a S^b rho) with S^b rho precomputed
                let s: C64 = ops[a].entries().map(|(r, c, v)| v * prods[b][c * dim + r]).sum();
                second[a][b] = s.re;
                second[b][a] = s.re;
            }
        }
        Self::assemble(n, mean, second)
    }

    fn assemble(n_atoms: usize, mean: [f64; 3], second: [[f64; 3]; 3]) -> Self {
        let total_spin_sq = second[0][0] + second[1][1] + second[2][2];
        Self { n_atoms, mean, second, total_spin_sq }
    }

    /// `Cov(a,b) = <S^a S^b + S^b S^a> - 2 <S^a><S^b>`, twice the usual
    /// symmetrized covariance.
    pub fn covariance(&self) -> [[f64; 3]; 3] {
        let mut c = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                c[a][b] = 2.0 * self.second[a][b] - 2.0 * self.mean[a] * self.mean[b];
            }
        }
        c
    }

    pub fn mean_spin_length(&self) -> f64 {
        self.mean.iter().map(|m| m * m).sum::<f64>().sqrt()
    }

    /// `N * min perpendicular variance / |<S>|^2`.
    pub fn squeezing(&self) -> Result<f64> {
        let len = self.mean_spin_length();
        if len < 1e-9 {
            return Err(Error::VanishingSpin(len));
        }
        let n = [self.mean[0] / len, self.mean[1] / len, self.mean[2] / len];
        let helper = if n[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let e1 = normalize(cross(n, helper));
        let e2 = cross(n, e1);
        let cov = self.covariance();
        // conventional covariance is half of Cov
        let q = |u: [f64; 3], w: [f64; 3]| -> f64 {
            let mut s = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    s += u[a] * 0.5 * cov[a][b] * w[b];
                }
            }
            s
        };
        let (a, b, d) = (q(e1, e1), q(e1, e2), q(e2, e2));
        let lambda_min = 0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b * b).sqrt();
        Ok(self.n_atoms as f64 * lambda_min / (len * len))
    }

    /// `<S.S> / (N/2 (N/2 + 1))`.
    pub fn collectivity(&self) -> f64 {
        let s = self.n_atoms as f64 / 2.0;
        self.total_spin_sq / (s * (s + 1.0))
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / l, v[1] / l, v[2] / l]
}

/// Quantities every state representation can report.
pub trait SpinExpectation {
    fn n_atoms(&self) -> usize;
    fn site_raising(&self, site: usize) -> C64;
    fn moments(&self) -> CollectiveMoments;
    /// Purity of the reduced state of sites `0..N/2`.
    fn half_chain_purity(&self) -> Result<f64>;
}

impl SpinExpectation for SpinState {
    fn n_atoms(&self) -> usize {
        SpinState::n_atoms(self)
    }

    fn site_raising(&self, site: usize) -> C64 {
        SpinState::site_raising(self, site)
    }

    fn moments(&self) -> CollectiveMoments {
        CollectiveMoments::of(self)
    }

    fn half_chain_purity(&self) -> Result<f64> {
        let half: Vec<usize> = (0..self.n_atoms() / 2).collect();
        partial_trace_purity(self, &half)
    }
}

impl SpinExpectation for DensityMatrix {
    fn n_atoms(&self) -> usize {
        DensityMatrix::n_atoms(self)
    }

    fn site_raising(&self, site: usize) -> C64 {
        DensityMatrix::site_raising(self, site)
    }

    fn moments(&self) -> CollectiveMoments {
        CollectiveMoments::of_density(self)
    }

    fn half_chain_purity(&self) -> Result<f64> {
        let n = self.n_atoms();
        if n < 2 {
            return Err(Error::InvalidInput("need at least two sites for a bipartition".into()));
        }
        let h = n / 2;
        let (da, dc) = (1usize << h, 1usize << (n - h));
        let mut purity = 0.0;
        for a in 0..da {
            for a2 in 0..da {
                let v: C64 = (0..dc).map(|c| self.get(a | (c << h), a2 | (c << h))).sum();
                purity += v.norm_sqr();
            }
        }
        Ok(purity)
    }
}

pub fn covariance_matrix(state: &SpinState) -> [[f64; 3]; 3] {
    CollectiveMoments::of(state).covariance()
}

pub fn squeezing_parameter(state: &SpinState) -> Result<f64> {
    CollectiveMoments::of(state).squeezing()
}

pub fn collectivity(state: &SpinState) -> f64 {
    CollectiveMoments::of(state).collectivity()
}

/// Normalized half-chain second Renyi entropy `-2 log2(tr rho_A^2) / N`.
pub fn renyi_entropy<S: SpinExpectation + ?Sized>(state: &S) -> Result<f64> {
    let n = state.n_atoms();
    if n % 2 != 0 {
        return Err(Error::InvalidInput(format!("half-chain entropy needs an even atom number, got {n}")));
    }
    Ok(renyi_from_purity(state.half_chain_purity()?, n))
}

pub fn renyi_from_purity(purity: f64, n_atoms: usize) -> f64 {
    // clamp roundoff above one so product states give exactly zero
    (-2.0 * purity.min(1.0).log2() / n_atoms as f64).max(0.0)
}

/// Largest eigenvalue of `2 Cov`.
pub fn quantum_fisher(cov: &[[f64; 3]; 3]) -> f64 {
    let m = Matrix3::from_fn(|a, b| 2.0 * cov[a][b]);
    SymmetricEigen::new(m).eigenvalues.max()
}

/// `Cov(y,z)` of `exp(-i theta S^x) psi` from the covariance of `psi`.
pub fn rotated_cov_yz(cov: &[[f64; 3]; 3], theta: f64) -> f64 {
    (2.0 * theta).cos() * cov[1][2] + 0.5 * (2.0 * theta).sin() * (cov[1][1] - cov[2][2])
}

/// Grid maximum with a parabolic correction through the neighbours of the
/// best point; returns `(x, value)`.
pub fn refined_max(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let (k, _) = ys
        .iter()
        .enumerate()
        .filter(|(_, y)| y.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    if k == 0 || k + 1 == ys.len() {
        return Some((xs[k], ys[k]));
    }
    Some(parabola_vertex([xs[k - 1], xs[k], xs[k + 1]], [ys[k - 1], ys[k], ys[k + 1]]))
}

/// Vertex of the parabola through three points. Falls back to the middle
/// point if the points are collinear.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (d1, d2) = (x[1] - x[0], x[1] - x[2]);
    let (g1, g2) = (y[1] - y[2], y[1] - y[0]);
    let den = d1 * g1 - d2 * g2;
    if den == 0.0 || !den.is_finite() {
        return (x[1], y[1]);
    }
    let xv = x[1] - 0.5 * (d1 * d1 * g1 - d2 * d2 * g2) / den;
    // keep the vertex inside the bracket
    let xv = xv.clamp(x[0].min(x[2]), x[0].max(x[2]));
    (xv, quadratic_at(x, y, xv))
}

/// Lagrange interpolant through three points evaluated at `t`.
fn quadratic_at(x: [f64; 3], y: [f64; 3], t: f64) -> f64 {
    let l0 = (t - x[1]) * (t - x[2]) / ((x[0] - x[1]) * (x[0] - x[2]));
    let l1 = (t - x[0]) * (t - x[2]) / ((x[1] - x[0]) * (x[1] - x[2]));
    let l2 = (t - x[0]) * (t - x[1]) / ((x[2] - x[0]) * (x[2] - x[1]));
    y[0] * l0 + y[1] * l1 + y[2] * l2
}

/// Fisher information and the rotation-family witness `C_yz`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FisherReport {
    pub f_q: f64,
    pub c_yz: f64,
    /// Rotation angle maximizing `Cov(y,z)`.
    pub theta_max: f64,
}

/// `F_Q` of `psi` and `C_yz = 4 max_theta Cov_theta(y,z)` over the family
/// `exp(-i theta S^x) psi`, theta on a uniform grid over `[0, pi)`.
pub fn qfi_and_cyz(state: &SpinState) -> FisherReport {
    fisher_from_covariance(&covariance_matrix(state))
}

pub fn fisher_from_covariance(cov: &[[f64; 3]; 3]) -> FisherReport {
    let thetas: Vec<f64> = (0..THETA_GRID).map(|k| PI * k as f64 / THETA_GRID as f64).collect();
    let vals: Vec<f64> = thetas.iter().map(|&t| rotated_cov_yz(cov, t)).collect();
    let (theta_max, best) = refined_max(&thetas, &vals).expect("grid is nonempty");
    FisherReport { f_q: quantum_fisher(cov), c_yz: 4.0 * best, theta_max }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Sampled observables of one trajectory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    pub n_atoms: usize,
    pub times: Vec<f64>,
    /// Unwrapped `arg <S_j^+>` per sample and site; NaN where undefined.
    pub site_phase: Vec<Vec<f64>>,
    /// Collective moments per sample, when recorded.
    pub moments: Vec<CollectiveMoments>,
    /// Half-chain purity per sample, when recorded.
    pub purity: Vec<Option<f64>>,
    pub warnings: Vec<String>,
}

/// What a [`SeriesRecorder`] measures at each sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecordOptions {
    pub moments: bool,
    /// Record the half-chain purity every this many samples (0 disables).
    pub purity_every: usize,
    /// Stop the run once the first strict minimum of the frequency
    /// variance has been bracketed.
    pub stop_at_first_minimum: bool,
    /// Stop the run after this time, if set.
    pub stop_after: Option<f64>,
}

impl Default for RecordOptions {
    fn default() -> Self {
        Self { moments: true, purity_every: 1, stop_at_first_minimum: false, stop_after: None }
    }
}

/// Observer that fills a [`TimeSeries`], unwrapping site phases on the fly.
pub struct SeriesRecorder {
    opts: RecordOptions,
    series: TimeSeries,
    last_raw: Vec<Option<f64>>,
    unwrapped: Vec<f64>,
    variances: Vec<f64>,
}

impl SeriesRecorder {
    pub fn new(n_atoms: usize, opts: RecordOptions) -> Self {
        Self {
            opts,
            series: TimeSeries { n_atoms, ..Default::default() },
            last_raw: vec![None; n_atoms],
            unwrapped: vec![0.0; n_atoms],
            variances: Vec::new(),
        }
    }

    pub fn series(&self) -> &TimeSeries {
        &self.series
    }

    pub fn into_series(self) -> TimeSeries {
        self.series
    }

    fn record<S: SpinExpectation + ?Sized>(&mut self, t: f64, state: &S) -> Result<Control> {
        let n = self.series.n_atoms;
        if state.n_atoms() != n {
            return Err(Error::DimensionMismatch { expected: n, found: state.n_atoms() });
        }
        let mut phases = Vec::with_capacity(n);
        for j in 0..n {
            let z = state.site_raising(j);
            if z.norm_sqr() < MIN_CONTRAST {
                phases.push(f64::NAN);
                continue;
            }
            let raw = z.arg();
            let phi = match self.last_raw[j] {
                None => raw,
                Some(prev) => self.unwrapped[j] + wrap_angle(raw - prev),
            };
            self.last_raw[j] = Some(raw);
            self.unwrapped[j] = phi;
            phases.push(phi);
        }
        if t > 0.0 {
            let omega: Vec<f64> = phases.iter().map(|p| p / t).collect();
            self.variances.push(site_variance(&omega));
        }
        self.series.times.push(t);
        self.series.site_phase.push(phases);
        if self.opts.moments {
            self.series.moments.push(state.moments());
        }
        let k = self.series.times.len() - 1;
        let purity = if self.opts.purity_every > 0 && k % self.opts.purity_every == 0 {
            Some(state.half_chain_purity()?)
        } else {
            None
        };
        self.series.purity.push(purity);

        if let Some(stop) = self.opts.stop_after {
            if t >= stop {
                return Ok(Control::Stop);
            }
        }
        if self.opts.stop_at_first_minimum && self.variances.len() >= 3 {
            let v = &self.variances;
            let scale = v.iter().filter(|x| x.is_finite()).fold(0.0f64, |a, b| a.max(b.abs()));
            if first_strict_minimum(v, scale).is_some() {
                return Ok(Control::Stop);
            }
        }
        Ok(Control::Continue)
    }
}

impl<S: SpinExpectation> Observer<S> for SeriesRecorder {
    fn observe(&mut self, t: f64, state: &S) -> Result<Control> {
        self.record(t, state)
    }
}

/// Population variance of the finite entries; NaN with fewer than two.
fn site_variance(values: &[f64]) -> f64 {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return f64::NAN;
    }
    let mean = finite.iter().sum::<f64>() / finite.len() as f64;
    finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / finite.len() as f64
}

/// First `k` with `v[k]` strictly below both neighbours, by more than
/// roundoff relative to `scale`.
fn first_strict_minimum(v: &[f64], scale: f64) -> Option<usize> {
    let eps = 1e-12 * scale;
    (1..v.len().saturating_sub(1)).find(|&k| {
        let (a, b, c) = (v[k - 1], v[k], v[k + 1]);
        a.is_finite() && b.is_finite() && c.is_finite() && b < a - eps && b < c - eps
    })
}

/// Per-site frequencies `omega_j(t) = phi_j(t) / t` for `t > 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyTable {
    pub times: Vec<f64>,
    /// `omega[k][j]`, NaN where the phase was undefined.
    pub omega: Vec<Vec<f64>>,
}

pub fn site_frequencies(ts: &TimeSeries) -> FrequencyTable {
    let mut times = Vec::new();
    let mut omega = Vec::new();
    for (t, phases) in ts.times.iter().zip(&ts.site_phase) {
        if *t > 0.0 {
            times.push(*t);
            omega.push(phases.iter().map(|p| p / t).collect());
        }
    }
    FrequencyTable { times, omega }
}

/// Outcome of synchronization detection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyncReport {
    /// Refined time of the first variance minimum.
    pub t_syn: Option<f64>,
    /// Sample index of the bracketed minimum.
    pub min_index: Option<usize>,
    pub times: Vec<f64>,
    pub variance_curve: Vec<f64>,
    pub initial_variance: f64,
    pub variance_at_tsyn: Option<f64>,
    /// `omega_j` interpolated to `t_syn`.
    pub omega_at_tsyn: Option<Vec<f64>>,
    pub synchronized: bool,
}

/// Locates the first strict local minimum of `Var_j omega_j(t)`.
pub fn detect_tsyn(omega: &[Vec<f64>], times: &[f64]) -> Result<SyncReport> {
    if omega.len() != times.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: omega.len() });
    }
    if times.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 samples, got {}", times.len())));
    }
    let variance: Vec<f64> = omega.iter().map(|w| site_variance(w)).collect();
    let initial_variance = variance.iter().copied().find(|v| v.is_finite()).unwrap_or(f64::NAN);
    let scale = variance.iter().filter(|x| x.is_finite()).fold(0.0f64, |a, b| a.max(b.abs()));
    let mut report = SyncReport {
        t_syn: None,
        min_index: None,
        times: times.to_vec(),
        variance_curve: variance.clone(),
        initial_variance,
        variance_at_tsyn: None,
        omega_at_tsyn: None,
        synchronized: false,
    };
    let Some(k) = first_strict_minimum(&variance, scale) else {
        return Ok(report);
    };
    let x = [times[k - 1], times[k], times[k + 1]];
    let (t_syn, v_min) = parabola_vertex_min(x, [variance[k - 1], variance[k], variance[k + 1]]);
    let n_sites = omega[k].len();
    let omega_at = (0..n_sites).map(|j| quadratic_at(x, [omega[k - 1][j], omega[k][j], omega[k + 1][j]], t_syn)).collect();
    let v_min = v_min.max(0.0);
    report.t_syn = Some(t_syn);
    report.min_index = Some(k);
    report.variance_at_tsyn = Some(v_min);
    report.omega_at_tsyn = Some(omega_at);
    report.synchronized = initial_variance > 0.0 && v_min < SYNC_THRESHOLD * initial_variance;
    Ok(report)
}

fn parabola_vertex_min(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (xv, yv) = parabola_vertex(x, y);
    // a bracketed minimum never refines above the middle sample
    if yv > y[1] {
        (x[1], y[1])
    } else {
        (xv, yv)
    }
}

/// Convenience: frequencies and synchronization report of a recorded series.
pub fn sync_report(ts: &TimeSeries) -> Result<SyncReport> {
    let f = site_frequencies(ts);
    detect_tsyn(&f.omega, &f.times)
}

/// First time `values` reaches `fraction` of its maximum, linearly
/// interpolated between samples.
pub fn rise_time(times: &[f64], values: &[f64], fraction: f64) -> Option<f64> {
    let max = values.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return None;
    }
    let level = fraction * max;
    let k = values.iter().position(|&v| v >= level)?;
    if k == 0 {
        return Some(times[0]);
    }
    let (t0, t1, v0, v1) = (times[k - 1], times[k], values[k - 1], values[k]);
    Some(t0 + (level - v0) / (v1 - v0) * (t1 - t0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{coherent_plus_x, oat_unitary_apply, rotation_apply, RotationSign};
    use crate::spin::product_state;

    fn singlet() -> SpinState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        SpinState::new(2, vec![C64::default(), C64::new(-h, 0.0), C64::new(h, 0.0), C64::default()]).unwrap()
    }

    fn oat(n: usize, q: f64) -> SpinState {
        oat_unitary_apply(&coherent_plus_x(n).unwrap(), q)
    }

    #[test]
    fn coherent_state_moments() {
        let m = CollectiveMoments::of(&coherent_plus_x(6).unwrap());
        assert!((m.mean[0] - 3.0).abs() < 1e-12);
        assert!((m.total_spin_sq - 12.0).abs() < 1e-10);
        let c = m.covariance();
        assert!((c[1][1] - 3.0).abs() < 1e-12 && (c[2][2] - 3.0).abs() < 1e-12 && c[1][2].abs() < 1e-12);
        assert!((m.squeezing().unwrap() - 1.0).abs() < 1e-9);
        assert!((m.collectivity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments_match_sparse_operators() {
        let s = rotation_apply(&oat(5, 1.3), Axis::X, 0.4, RotationSign::Minus).unwrap();
        let m = CollectiveMoments::of(&s);
        let ops: Vec<_> = Axis::CARTESIAN.iter().map(|&a| collective_operator(5, a).unwrap()).collect();
        for a in 0..3 {
            assert!((m.mean[a] - s.expect(&ops[a]).re).abs() < 1e-12);
            for b in 0..3 {
                let ab = &ops[a] * &ops[b];
                let ba = &ops[b] * &ops[a];
                let want = 0.5 * (s.expect(&ab) + s.expect(&ba)).re;
                assert!((m.second[a][b] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn density_moments_match_pure() {
        let s = rotation_apply(&oat(4, 0.9), Axis::X, 0.7, RotationSign::Minus).unwrap();
        let a = CollectiveMoments::of(&s);
        let b = CollectiveMoments::of_density(&DensityMatrix::from_pure(&s));
        for i in 0..3 {
            assert!((a.mean[i] - b.mean[i]).abs() < 1e-12);
            for j in 0..3 {
                assert!((a.second[i][j] - b.second[i][j]).abs() < 1e-12);
            }
        }
        let pa = SpinExpectation::half_chain_purity(&s).unwrap();
        let pb = SpinExpectation::half_chain_purity(&DensityMatrix::from_pure(&s)).unwrap();
        assert!((pa - pb).abs() < 1e-12);
    }

    #[test]
    fn squeezing_against_angle_grid() {
        // brute-force minimum of N Var(n.S) / |<S>|^2 over 3600 directions
        // perpendicular to the mean spin
        let n = 4;
        let s = oat(n, 0.5);
        let m = CollectiveMoments::of(&s);
        assert!(m.mean[1].abs() < 1e-12 && m.mean[2].abs() < 1e-12);
        let sy = collective_operator(n, Axis::Y).unwrap();
        let sz = collective_operator(n, Axis::Z).unwrap();
        let mut best = f64::INFINITY;
        for k in 0..3600 {
            let phi = PI * k as f64 / 3600.0;
            let op = &(&sy * phi.cos()) + &(&sz * phi.sin());
            let v = s.apply(&op);
            let var = crate::spin::inner(&v, &v).re - s.expect(&op).re.powi(2);
            best = best.min(var);
        }
        let want = n as f64 * best / m.mean[0].powi(2);
        let got = m.squeezing().unwrap();
        assert!((got - want).abs() < 1e-5, "{got} {want}");
        assert!(got < 1.0);
    }

    #[test]
    fn squeezing_rotation_invariant() {
        let s = oat(6, 1.1);
        let x0 = squeezing_parameter(&s).unwrap();
        for (axis, a) in [(Axis::X, 0.3), (Axis::Y, 1.2), (Axis::Z, 2.5)] {
            let r = rotation_apply(&s, axis, a, RotationSign::Minus).unwrap();
            assert!((squeezing_parameter(&r).unwrap() - x0).abs() < 1e-9);
        }
    }

    #[test]
    fn vanishing_spin_is_error() {
        assert!(matches!(squeezing_parameter(&singlet()), Err(Error::VanishingSpin(_))));
    }

    #[test]
    fn product_state_squeezing_is_one() {
        let c = C64::new(0.6, 0.0);
        let s = product_state(5, [c, C64::new(0.0, 0.8)]).unwrap();
        assert!((squeezing_parameter(&s).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn renyi_values() {
        assert!((renyi_entropy(&singlet()).unwrap() - 1.0).abs() < 1e-12);
        assert!(renyi_entropy(&coherent_plus_x(6).unwrap()).unwrap().abs() < 1e-12);
        assert!(renyi_entropy(&coherent_plus_x(5).unwrap()).is_err());
    }

    #[test]
    fn oat_covariance_closed_form() {
        let n = 16;
        let q = 2.0 * PI * 0.6;
        let c = covariance_matrix(&oat(n, q));
        let nf = n as f64;
        let want = nf * (nf - 1.0) / 2.0 * (q / nf).sin() * (q / nf).cos().powi(n as i32 - 2);
        assert!((c[1][2] - want).abs() < 1e-9);
    }

    #[test]
    fn rotated_covariance_matches_explicit_rotation() {
        let s = oat(6, 1.7);
        let cov = covariance_matrix(&s);
        for k in 0..12 {
            let theta = PI * k as f64 / 12.0;
            let r = rotation_apply(&s, Axis::X, theta, RotationSign::Minus).unwrap();
            assert!((covariance_matrix(&r)[1][2] - rotated_cov_yz(&cov, theta)).abs() < 1e-10);
        }
    }

    #[test]
    fn fisher_of_coherent_state() {
        let f = qfi_and_cyz(&coherent_plus_x(8).unwrap());
        assert!((f.f_q - 8.0).abs() < 1e-9);
        assert!(f.c_yz.abs() < 1e-9);
    }

    #[test]
    fn cyz_matches_closed_amplitude() {
        let cov = covariance_matrix(&oat(10, 2.0));
        let amp = (cov[1][2].powi(2) + 0.25 * (cov[1][1] - cov[2][2]).powi(2)).sqrt();
        let f = fisher_from_covariance(&cov);
        assert!((f.c_yz - 4.0 * amp).abs() < 1e-6 * amp);
        assert!(f.c_yz <= f.f_q + 1e-6);
    }

    #[test]
    fn cyz_vanishes_continuously() {
        let mut last = f64::INFINITY;
        for q in [0.4, 0.1, 0.01, 0.001] {
            let c = qfi_and_cyz(&oat(8, q)).c_yz;
            assert!(c < last);
            last = c;
        }
        assert!(last < 0.02);
    }

    #[test]
    fn collectivity_of_singlet_pair() {
        // singlet on sites 0,1 times |up up>
        let mut amps = vec![C64::default(); 16];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[0b1101] = C64::new(h, 0.0);
        amps[0b1110] = C64::new(-h, 0.0);
        let s = SpinState::new(4, amps).unwrap();
        assert!(collectivity(&s) < 1.0);
    }

    #[test]
    fn wrap_angle_range() {
        for x in [-7.0, -PI, -0.1, 0.0, 3.0, PI, 4.0, 100.0] {
            let w = wrap_angle(x);
            assert!(w > -PI && w <= PI);
            assert!(((x - w) / (2.0 * PI)).fract().abs() < 1e-12 || ((x - w) / (2.0 * PI)).fract().abs() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn detect_minimum_of_parabola() {
        // two sites with omega = +/-(t - 1.03): variance (t - 1.03)^2
        let times: Vec<f64> = (1..40).map(|k| 0.05 * k as f64).collect();
        let omega: Vec<Vec<f64>> = times.iter().map(|t| vec![t - 1.03, 1.03 - t]).collect();
        let r = detect_tsyn(&omega, &times).unwrap();
        assert!((r.t_syn.unwrap() - 1.03).abs() < 1e-12);
        assert!(r.synchronized);
        for w in r.omega_at_tsyn.unwrap() {
            assert!(w.abs() < 1e-12);
        }
    }

    #[test]
    fn flat_variance_has_no_minimum() {
        let times: Vec<f64> = (1..20).map(|k| 0.1 * k as f64).collect();
        let omega: Vec<Vec<f64>> = times.iter().map(|_| vec![-0.5, 0.5]).collect();
        let r = detect_tsyn(&omega, &times).unwrap();
        assert!(r.t_syn.is_none() && !r.synchronized);
    }

    #[test]
    fn rise_time_interpolates() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let v = [0.0, 0.5, 1.0, 2.0];
        assert!((rise_time(&t, &v, 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!((rise_time(&t, &v, 0.1).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn free_precession_frequencies() {
        let p = crate::hamiltonian::CgrParams { n_sites: 4, j_perp: 0.0, j_z: 0.0, omega_grs: 0.9, centered: true };
        let h = crate::hamiltonian::build_hcgr(&p).unwrap();
        let cfg = crate::evolve::PropagatorConfig::new(0.25, 20.0);
        let mut rec = SeriesRecorder::new(4, RecordOptions::default());
        crate::evolve::evolve_unitary(&coherent_plus_x(4).unwrap(), &h, &cfg, &mut rec).unwrap();
        let f = site_frequencies(rec.series());
        for row in &f.omega {
            for (j, w) in row.iter().enumerate() {
                assert!((w - p.bare_frequency(j)).abs() < 1e-9);
            }
        }
        assert!(!sync_report(rec.series()).unwrap().synchronized);
    }
}
