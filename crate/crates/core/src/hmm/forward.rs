use super::MsdHmm;
use crate::error::{Error, Result};
use crate::features::QuantizedObservation;

/// Incremental forward recursion holding only the current normalised state
/// posterior.
///
/// Each step computes `u_j = [sum_i a_ij alpha_{t-1}(i)] * exp(ln b_j - m)`
/// with `m = max_j ln b_j`, normalises `u` to sum to one and adds
/// `ln(sum u) + m` to the running log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardState {
    alpha: Vec<f64>,
    log_likelihood: f64,
    steps: usize,
    scratch: Vec<f64>,
}

impl ForwardState {
    pub fn new(n_states: usize) -> Self {
        Self {
            alpha: vec![0.0; n_states],
            log_likelihood: 0.0,
            steps: 0,
            scratch: vec![0.0; n_states],
        }
    }

    pub fn reset(&mut self) {
        self.alpha.iter_mut().for_each(|a| *a = 0.0);
        self.log_likelihood = 0.0;
        self.steps = 0;
    }

    /// Normalised posterior `P(q_t = j | o_1..o_t)`; all zeros before the first step.
    pub fn posterior(&self) -> &[f64] {
        &self.alpha
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps == 0
    }

    /// Advances by one observation and returns the log scaling factor.
    pub fn advance(&mut self, model: &MsdHmm, obs: &QuantizedObservation) -> Result<f64> {
        model.check_observation(obs)?;
        let n = model.n_states();
        if self.alpha.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: self.alpha.len(),
            });
        }
        model.fill_emission_log_probs(obs, &mut self.scratch);
        let shift = self.scratch.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        for j in 0..n {
            let predicted = if self.steps == 0 {
                model.initial[j]
            } else {
                let lo = j.saturating_sub(model.max_jump);
                (lo..=j).map(|i| self.alpha[i] * model.transition[i * n + j]).sum()
            };
            self.scratch[j] = predicted * (self.scratch[j] - shift).exp();
        }
        let total: f64 = self.scratch.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::model("forward recursion lost all probability mass"));
        }
        for (a, u) in self.alpha.iter_mut().zip(&self.scratch) {
            *a = u / total;
        }
        let log_scale = total.ln() + shift;
        self.log_likelihood += log_scale;
        self.steps += 1;
        Ok(log_scale)
    }
}

/// Full forward pass with every normalised state vector retained.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrellis {
    n_states: usize,
    posteriors: Vec<f64>,
    log_scales: Vec<f64>,
    log_likelihood: f64,
}

impl ForwardTrellis {
    pub fn empty(n_states: usize) -> Self {
        Self {
            n_states,
            posteriors: Vec::new(),
            log_scales: Vec::new(),
            log_likelihood: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.log_scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_scales.is_empty()
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Normalised forward vector at step `t` (0-based).
    pub fn posterior(&self, t: usize) -> &[f64] {
        &self.posteriors[t * self.n_states..(t + 1) * self.n_states]
    }

    pub fn log_scales(&self) -> &[f64] {
        &self.log_scales
    }

    /// `ln P(O | model)`, the sum of the log scaling factors.
    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    fn current_state(&self) -> ForwardState {
        let mut s = ForwardState::new(self.n_states);
        if let Some(t) = self.len().checked_sub(1) {
            s.alpha.copy_from_slice(self.posterior(t));
            s.log_likelihood = self.log_likelihood;
            s.steps = self.len();
        }
        s
    }
}

/// Extends `prev` (or starts a new trellis) by one observation.
pub fn forward_step(
    model: &MsdHmm,
    prev: Option<ForwardTrellis>,
    obs: &QuantizedObservation,
) -> Result<ForwardTrellis> {
    let mut trellis = prev.unwrap_or_else(|| ForwardTrellis::empty(model.n_states()));
    if trellis.n_states != model.n_states() {
        return Err(Error::Dimension {
            expected: model.n_states(),
            found: trellis.n_states,
        });
    }
    let mut state = trellis.current_state();
    let log_scale = state.advance(model, obs)?;
    trellis.posteriors.extend_from_slice(state.posterior());
    trellis.log_scales.push(log_scale);
    trellis.log_likelihood = state.log_likelihood();
    Ok(trellis)
}

/// Forward pass over a whole sequence.
pub fn forward(model: &MsdHmm, seq: &[QuantizedObservation]) -> Result<ForwardTrellis> {
    if seq.is_empty() {
        return Err(Error::input("forward needs a non-empty sequence"));
    }
    let mut trellis = ForwardTrellis::empty(model.n_states());
    trellis.posteriors.reserve(seq.len() * model.n_states());
    let mut state = ForwardState::new(model.n_states());
    for obs in seq {
        let log_scale = state.advance(model, obs)?;
        trellis.posteriors.extend_from_slice(state.posterior());
        trellis.log_scales.push(log_scale);
    }
    trellis.log_likelihood = state.log_likelihood();
    Ok(trellis)
}

impl MsdHmm {
    /// `ln P(O | model)` without keeping the trellis.
    pub fn log_likelihood(&self, seq: &[QuantizedObservation]) -> Result<f64> {
        if seq.is_empty() {
            return Err(Error::input("forward needs a non-empty sequence"));
        }
        let mut state = ForwardState::new(self.n_states);
        for obs in seq {
            state.advance(self, obs)?;
        }
        Ok(state.log_likelihood())
    }
}
