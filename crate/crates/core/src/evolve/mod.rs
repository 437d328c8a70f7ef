//! Time propagation of pure states and density matrices.

mod dense;
mod krylov;
mod lindblad;

pub use dense::DenseEvolution;
pub use krylov::{evolve_unitary, KrylovPropagator, StepStats};
pub use lindblad::{evolve_lindblad, LindbladSpec, MAX_LINDBLAD_ATOMS};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sampling grid and accuracy settings shared by all propagators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    /// Interval between observer calls (s).
    pub dt_sample: f64,
    #[serde(default = "default_krylov_dim")]
    pub krylov_dim: usize,
    /// Local error allowed per Krylov step.
    #[serde(default = "default_step_tolerance")]
    pub step_tolerance: f64,
    /// End of the sampled window (s).
    pub t_final: f64,
}

fn default_krylov_dim() -> usize {
    30
}

fn default_step_tolerance() -> f64 {
    1e-10
}

impl PropagatorConfig {
    pub fn new(dt_sample: f64, t_final: f64) -> Self {
        Self { dt_sample, krylov_dim: default_krylov_dim(), step_tolerance: default_step_tolerance(), t_final }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_sample > 0.0 && self.dt_sample.is_finite()) {
            return Err(Error::InvalidInput(format!("dt_sample must be positive, got {}", self.dt_sample)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidInput(format!("t_final must be positive, got {}", self.t_final)));
        }
        if self.krylov_dim < 4 {
            return Err(Error::InvalidInput(format!("krylov_dim must be at least 4, got {}", self.krylov_dim)));
        }
        if !(self.step_tolerance > 0.0) {
            return Err(Error::InvalidInput("step_tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Number of sampling intervals; the last sample lands on `t_final`
    /// up to rounding of `t_final / dt_sample`.
    pub fn n_intervals(&self) -> usize {
        (self.t_final / self.dt_sample).round().max(1.0) as usize
    }

    /// Sample times `k * dt_sample`, `k = 0..=n_intervals`.
    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.n_intervals()).map(|k| k as f64 * self.dt_sample).collect()
    }
}

/// Returned by observers to continue or end a run early.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Callback invoked at every sample time.
pub trait Observer<S> {
    fn observe(&mut self, t: f64, state: &S) -> Result<Control>;
}

impl<S, F> Observer<S> for F
where
    F: FnMut(f64, &S) -> Result<Control>,
{
    fn observe(&mut self, t: f64, state: &S) -> Result<Control> {
        self(t, state)
    }
}

/// Fans one sample out to several observers; stops when any of them asks to.
pub struct ObserverSet<'a, S> {
    observers: Vec<&'a mut dyn Observer<S>>,
}

impl<'a, S> ObserverSet<'a, S> {
    pub fn new() -> Self {
        Self { observers: Vec::new() }
    }

    pub fn with(mut self, obs: &'a mut dyn Observer<S>) -> Self {
        self.observers.push(obs);
        self
    }
}

impl<S> Default for ObserverSet<'_, S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S> Observer<S> for ObserverSet<'_, S> {
    fn observe(&mut self, t: f64, state: &S) -> Result<Control> {
        let mut control = Control::Continue;
        for obs in self.observers.iter_mut() {
            if obs.observe(t, state)? == Control::Stop {
                control = Control::Stop;
            }
        }
        Ok(control)
    }
}

/// Bookkeeping of a finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub final_state: S,
    pub stopped_early: bool,
    /// Largest deviation of the norm (or trace) from one seen at a sample.
    pub max_norm_drift: f64,
    /// Notes about soft failures, such as negative density-matrix eigenvalues.
    pub warnings: Vec<String>,
}
