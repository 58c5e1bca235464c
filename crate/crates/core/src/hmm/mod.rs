//! Left-right HMM with weighted multiple-stream discrete emissions.
//!
//! Every state `j` holds one categorical table `h_j^d` per stream `d`; the
//! emission of an observation is `prod_d h_j^d(o^d) ^ w_d`. All evaluation
//! runs in the log domain with per-step normalisation of the forward
//! variables.

mod forward;
mod train;

pub use forward::{forward, forward_step, ForwardState, ForwardTrellis};
pub use train::{train, TrainConfig, TrainOutcome};

use crate::error::{Error, Result};
use crate::features::QuantizedObservation;

const STOCHASTIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MsdHmm {
    n_states: usize,
    n_streams: usize,
    n_symbols: usize,
    max_jump: usize,
    initial: Vec<f64>,
    /// Row-major `N x N`.
    transition: Vec<f64>,
    /// `[state][stream][symbol]`, row-major.
    emission: Vec<f64>,
    weights: Vec<f64>,
    /// `w_d * ln h_j^d(l)`, same layout as `emission`.
    weighted_log_emission: Vec<f64>,
}

impl MsdHmm {
    /// Builds a model after checking every structural invariant.
    pub fn new(
        n_states: usize,
        n_streams: usize,
        n_symbols: usize,
        max_jump: usize,
        initial: Vec<f64>,
        transition: Vec<f64>,
        emission: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 || n_streams == 0 || n_symbols == 0 {
            return Err(Error::model("state, stream and symbol counts must be positive"));
        }
        let check_len = |what: &str, v: &[f64], n: usize| {
            if v.len() == n {
                Ok(())
            } else {
                Err(Error::model(format!("{what} has length {}, expected {n}", v.len())))
            }
        };
        check_len("initial", &initial, n_states)?;
        check_len("transition", &transition, n_states * n_states)?;
        check_len("emission", &emission, n_states * n_streams * n_symbols)?;
        check_len("weights", &weights, n_streams)?;

        let is_distribution = |v: &[f64]| {
            v.iter().all(|p| p.is_finite() && *p >= 0.0) && (v.iter().sum::<f64>() - 1.0).abs() <= STOCHASTIC_TOLERANCE
        };
        if !is_distribution(&initial) || initial[0] != 1.0 {
            return Err(Error::model("initial distribution must put all mass on state 0"));
        }
        for i in 0..n_states {
            let row = &transition[i * n_states..(i + 1) * n_states];
            if !is_distribution(row) {
                return Err(Error::model(format!("transition row {i} is not a distribution")));
            }
            if row
                .iter()
                .enumerate()
                .any(|(j, &p)| p != 0.0 && (j < i || j > i + max_jump))
            {
                return Err(Error::model(format!("transition row {i} breaks left-right structure")));
            }
        }
        for (k, table) in emission.chunks_exact(n_symbols).enumerate() {
            if !is_distribution(table) || table.iter().any(|&p| p <= 0.0) {
                return Err(Error::model(format!(
                    "emission table (state {}, stream {}) must be a positive distribution",
                    k / n_streams,
                    k % n_streams
                )));
            }
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::model("stream weights must be finite and non-negative"));
        }

        let mut m = Self {
            n_states,
            n_streams,
            n_symbols,
            max_jump,
            initial,
            transition,
            emission,
            weights,
            weighted_log_emission: Vec::new(),
        };
        m.refresh_log_emission();
        Ok(m)
    }

    fn refresh_log_emission(&mut self) {
        let (d_count, l_count) = (self.n_streams, self.n_symbols);
        self.weighted_log_emission = self
            .emission
            .iter()
            .enumerate()
            .map(|(k, &h)| self.weights[(k / l_count) % d_count] * h.ln())
            .collect();
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_streams(&self) -> usize {
        self.n_streams
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn max_jump(&self) -> usize {
        self.max_jump
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    pub fn transition_prob(&self, from: usize, to: usize) -> f64 {
        self.transition[from * self.n_states + to]
    }

    pub fn emission(&self) -> &[f64] {
        &self.emission
    }

    /// `h_state^stream(symbol)`.
    pub fn emission_prob(&self, state: usize, stream: usize, symbol: usize) -> f64 {
        self.emission[(state * self.n_streams + stream) * self.n_symbols + symbol]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.n_streams || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::model(
                "stream weights must be finite, non-negative, one per stream",
            ));
        }
        self.weights = weights;
        self.refresh_log_emission();
        Ok(self)
    }

    pub(crate) fn check_observation(&self, obs: &QuantizedObservation) -> Result<()> {
        if obs.len() != self.n_streams {
            return Err(Error::Dimension {
                expected: self.n_streams,
                found: obs.len(),
            });
        }
        if let Some(&s) = obs.symbols().iter().find(|&&s| s as usize >= self.n_symbols) {
            return Err(Error::SymbolRange {
                symbol: s as usize,
                levels: self.n_symbols,
            });
        }
        Ok(())
    }

    /// `sum_d w_d ln h_state^d(o^d)`, the log of the weighted emission.
    ///
    /// The observation must already have been validated against the model.
    pub fn emission_log_prob(&self, state: usize, obs: &QuantizedObservation) -> f64 {
        let base = state * self.n_streams * self.n_symbols;
        obs.symbols()
            .iter()
            .enumerate()
            .map(|(d, &s)| self.weighted_log_emission[base + d * self.n_symbols + s as usize])
            .sum()
    }

    pub(crate) fn fill_emission_log_probs(&self, obs: &QuantizedObservation, out: &mut [f64]) {
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = self.emission_log_prob(j, obs);
        }
    }

    /// Last state index, where a gesture ends.
    pub fn last_state(&self) -> usize {
        self.n_states - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: usize, d: usize, l: usize, emission: Vec<f64>, weights: Vec<f64>) -> MsdHmm {
        let mut initial = vec![0.0; n];
        initial[0] = 1.0;
        let mut transition = vec![0.0; n * n];
        for i in 0..n {
            if i + 1 < n {
                transition[i * n + i] = 0.5;
                transition[i * n + i + 1] = 0.5;
            } else {
                transition[i * n + i] = 1.0;
            }
        }
        MsdHmm::new(n, d, l, 1, initial, transition, emission, weights).unwrap()
    }

    fn obs(s: &[u16]) -> QuantizedObservation {
        QuantizedObservation::new(s.to_vec())
    }

    #[test]
    fn zero_weights_give_probability_one() {
        let m = model(1, 2, 2, vec![0.3, 0.7, 0.6, 0.4], vec![0.0, 0.0]);
        assert_eq!(m.emission_log_prob(0, &obs(&[0, 1])), 0.0);
    }

    #[test]
    fn single_stream_single_factor() {
        let m = model(1, 1, 4, vec![0.25; 4], vec![1.0]);
        assert_eq!(m.emission_log_prob(0, &obs(&[2])), 0.25f64.ln());
    }

    #[test]
    fn product_rule_over_streams() {
        let m = model(1, 2, 2, vec![0.5, 0.5, 0.2, 0.8], vec![1.0, 1.0]);
        let lp = m.emission_log_prob(0, &obs(&[0, 0]));
        assert!((lp - 0.1f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn unit_weights_equal_plain_log_product() {
        let h = vec![0.1, 0.2, 0.7, 0.3, 0.3, 0.4];
        let m = model(1, 2, 3, h.clone(), vec![1.0, 1.0]);
        let plain = h[2].ln() + h[3].ln();
        assert_eq!(m.emission_log_prob(0, &obs(&[2, 0])), plain);
    }

    #[test]
    fn structural_violations_are_rejected() {
        let e = vec![0.5; 4];
        // backwards transition
        assert!(MsdHmm::new(
            2,
            1,
            2,
            1,
            vec![1.0, 0.0],
            vec![0.5, 0.5, 0.5, 0.5],
            e.clone(),
            vec![1.0]
        )
        .is_err());
        // initial not on state 0
        assert!(MsdHmm::new(
            2,
            1,
            2,
            1,
            vec![0.0, 1.0],
            vec![0.5, 0.5, 0.0, 1.0],
            e.clone(),
            vec![1.0]
        )
        .is_err());
        // zero emission
        assert!(MsdHmm::new(
            2,
            1,
            2,
            1,
            vec![1.0, 0.0],
            vec![0.5, 0.5, 0.0, 1.0],
            vec![1.0, 0.0, 0.5, 0.5],
            vec![1.0]
        )
        .is_err());
        // negative weight
        assert!(MsdHmm::new(2, 1, 2, 1, vec![1.0, 0.0], vec![0.5, 0.5, 0.0, 1.0], e, vec![-1.0]).is_err());
    }
}
