//! Baum-Welch for the weighted multiple-stream model.
//!
//! Smoothing is a fixed uniform component inside every emission table:
//! `h = (1 - k) p + k / L` with `k = eps L / (1 + eps L)`, which equals
//! `(p + eps) / (1 + eps L)`. Only `p` is learned. The E-step splits each
//! observed symbol between `p` and the uniform component, so every
//! iteration is a true EM step and the (weighted) training log-likelihood
//! cannot decrease.

use super::MsdHmm;
use crate::error::{Error, Result};
use crate::features::QuantizedObservation;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub n_states: usize,
    pub n_symbols: usize,
    pub max_jump: usize,
    /// Cap on EM updates.
    pub iterations: usize,
    /// Stop once the relative log-likelihood gain drops below this.
    pub tolerance: f64,
    pub smoothing: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_states: 8,
            n_symbols: 10,
            max_jump: 1,
            iterations: 30,
            tolerance: 1e-6,
            smoothing: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MsdHmm,
    /// Total log-likelihood of the training set for the initial model and
    /// after every update; the last entry belongs to `model`.
    pub log_likelihoods: Vec<f64>,
    pub converged: bool,
}

struct Learner {
    n: usize,
    d: usize,
    l: usize,
    mix: f64,
    /// Learned component `p`, layout as the emission table.
    learned: Vec<f64>,
}

impl Learner {
    fn smoothed(&self) -> Vec<f64> {
        let floor = self.mix / self.l as f64;
        self.learned.iter().map(|p| (1.0 - self.mix) * p + floor).collect()
    }
}

/// Accumulated expected counts of one E-step.
struct Counts {
    log_likelihood: f64,
    transitions: Vec<f64>,
    emissions: Vec<f64>,
}

pub fn train(sequences: &[Vec<QuantizedObservation>], weights: Vec<f64>, config: &TrainConfig) -> Result<TrainOutcome> {
    let (n, l) = (config.n_states, config.n_symbols);
    if sequences.is_empty() {
        return Err(Error::input("training needs at least one sequence"));
    }
    if n == 0 || l < 2 || config.max_jump == 0 {
        return Err(Error::input("need n_states >= 1, n_symbols >= 2, max_jump >= 1"));
    }
    if !(config.smoothing > 0.0) {
        return Err(Error::input("smoothing must be positive"));
    }
    let d = weights.len();
    for seq in sequences {
        if seq.is_empty() {
            return Err(Error::input("training sequences must contain at least one observation"));
        }
        for obs in seq {
            if obs.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    found: obs.len(),
                });
            }
            if let Some(&s) = obs.symbols().iter().find(|&&s| s as usize >= l) {
                return Err(Error::SymbolRange {
                    symbol: s as usize,
                    levels: l,
                });
            }
        }
    }

    let eps_l = config.smoothing * l as f64;
    let mut learner = Learner {
        n,
        d,
        l,
        mix: eps_l / (1.0 + eps_l),
        learned: uniform_segmentation(sequences, n, d, l),
    };
    let mut initial = vec![0.0; n];
    initial[0] = 1.0;
    let mut transition = vec![0.0; n * n];
    for i in 0..n {
        let hi = (i + config.max_jump).min(n - 1);
        let p = 1.0 / (hi - i + 1) as f64;
        for j in i..=hi {
            transition[i * n + j] = p;
        }
    }

    let build = |transition: &[f64], learner: &Learner| {
        MsdHmm::new(
            n,
            d,
            l,
            config.max_jump,
            initial.clone(),
            transition.to_vec(),
            learner.smoothed(),
            weights.clone(),
        )
    };

    let mut model = build(&transition, &learner)?;
    let mut history = Vec::new();
    let mut converged = false;
    for iteration in 0..=config.iterations {
        let counts = expected_counts(&model, &learner, sequences)?;
        if let Some(&prev) = history.last() {
            let gain = counts.log_likelihood - prev;
            if gain < config.tolerance * f64::abs(prev) {
                converged = true;
            }
        }
        history.push(counts.log_likelihood);
        if converged || iteration == config.iterations {
            break;
        }

        for i in 0..n {
            let row = &counts.transitions[i * n..(i + 1) * n];
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                for j in 0..n {
                    transition[i * n + j] = row[j] / total;
                }
            }
        }
        for (k, table) in counts.emissions.chunks_exact(l).enumerate() {
            let total: f64 = table.iter().sum();
            if total > 0.0 {
                for (s, c) in table.iter().enumerate() {
                    learner.learned[k * l + s] = c / total;
                }
            }
        }
        model = build(&transition, &learner)?;
    }

    Ok(TrainOutcome {
        model,
        log_likelihoods: history,
        converged,
    })
}

/// Emission frequencies from cutting every sequence into `n` equal-length
/// pieces; empty states fall back to uniform.
fn uniform_segmentation(sequences: &[Vec<QuantizedObservation>], n: usize, d: usize, l: usize) -> Vec<f64> {
    let mut counts = vec![0.0; n * d * l];
    for seq in sequences {
        let t_len = seq.len();
        for (t, obs) in seq.iter().enumerate() {
            let state = t * n / t_len;
            for (stream, &s) in obs.symbols().iter().enumerate() {
                counts[(state * d + stream) * l + s as usize] += 1.0;
            }
        }
    }
    for table in counts.chunks_exact_mut(l) {
        let total: f64 = table.iter().sum();
        if total > 0.0 {
            table.iter_mut().for_each(|c| *c /= total);
        } else {
            table.iter_mut().for_each(|c| *c = 1.0 / l as f64);
        }
    }
    counts
}

/// Scaled forward-backward over every sequence.
fn expected_counts(model: &MsdHmm, learner: &Learner, sequences: &[Vec<QuantizedObservation>]) -> Result<Counts> {
    let (n, d, l) = (learner.n, learner.d, learner.l);
    let a = model.transition();
    let h = model.emission();
    let mut counts = Counts {
        log_likelihood: 0.0,
        transitions: vec![0.0; n * n],
        emissions: vec![0.0; n * d * l],
    };

    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut b = Vec::new();
    let mut scale = Vec::new();
    let mut gamma = vec![0.0; n];
    for seq in sequences {
        let t_len = seq.len();
        alpha.clear();
        alpha.resize(t_len * n, 0.0);
        beta.clear();
        beta.resize(t_len * n, 0.0);
        b.clear();
        b.resize(t_len * n, 0.0);
        scale.clear();
        scale.resize(t_len, 0.0);

        // Shifted emissions exp(ln b_j(o_t) - max_j ln b_j(o_t)).
        for (t, obs) in seq.iter().enumerate() {
            let row = &mut b[t * n..(t + 1) * n];
            model.fill_emission_log_probs(obs, row);
            let shift = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.iter_mut().for_each(|x| *x = (*x - shift).exp());
            counts.log_likelihood += shift;
        }

        for t in 0..t_len {
            let mut total = 0.0;
            for j in 0..n {
                let predicted = if t == 0 {
                    model.initial()[j]
                } else {
                    (0..=j).map(|i| alpha[(t - 1) * n + i] * a[i * n + j]).sum()
                };
                let u = predicted * b[t * n + j];
                alpha[t * n + j] = u;
                total += u;
            }
            if !(total > 0.0) {
                return Err(Error::model("training sequence has zero probability"));
            }
            alpha[t * n..(t + 1) * n].iter_mut().for_each(|x| *x /= total);
            scale[t] = total;
            counts.log_likelihood += total.ln();
        }

        for j in 0..n {
            beta[(t_len - 1) * n + j] = 1.0;
        }
        for t in (0..t_len - 1).rev() {
            for i in 0..n {
                let mut s = 0.0;
                for j in i..n {
                    s += a[i * n + j] * b[(t + 1) * n + j] * beta[(t + 1) * n + j];
                }
                beta[t * n + i] = s / scale[t + 1];
            }
        }

        for t in 0..t_len {
            let mut norm = 0.0;
            for j in 0..n {
                gamma[j] = alpha[t * n + j] * beta[t * n + j];
                norm += gamma[j];
            }
            for g in gamma.iter_mut() {
                *g /= norm;
            }

            if t + 1 < t_len {
                for i in 0..n {
                    let ai = alpha[t * n + i];
                    if ai == 0.0 {
                        continue;
                    }
                    for j in i..n {
                        let xi = ai * a[i * n + j] * b[(t + 1) * n + j] * beta[(t + 1) * n + j] / scale[t + 1];
                        counts.transitions[i * n + j] += xi;
                    }
                }
            }

            let symbols = seq[t].symbols();
            for j in 0..n {
                if gamma[j] == 0.0 {
                    continue;
                }
                for (stream, &s) in symbols.iter().enumerate() {
                    let k = (j * d + stream) * l + s as usize;
                    // share of the observation owed to the learned component
                    let r = (1.0 - learner.mix) * learner.learned[k] / h[k];
                    counts.emissions[k] += gamma[j] * r;
                }
            }
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::forward;

    fn seq(s: &[u16]) -> Vec<QuantizedObservation> {
        s.iter().map(|&x| QuantizedObservation::new(vec![x])).collect()
    }

    #[test]
    fn log_likelihood_history_matches_forward() {
        let data = vec![seq(&[0, 0, 1, 2, 2]), seq(&[0, 1, 1, 2])];
        let cfg = TrainConfig {
            n_states: 3,
            n_symbols: 3,
            iterations: 5,
            tolerance: 0.0,
            ..TrainConfig::default()
        };
        let out = train(&data, vec![1.0], &cfg).unwrap();
        let total: f64 = data
            .iter()
            .map(|s| forward(&out.model, s).unwrap().log_likelihood())
            .sum();
        assert!((total - out.log_likelihoods.last().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn smoothing_floor_holds() {
        let data = vec![seq(&[0, 0, 0, 0, 0, 0])];
        let cfg = TrainConfig {
            n_states: 2,
            n_symbols: 4,
            iterations: 20,
            ..TrainConfig::default()
        };
        let out = train(&data, vec![1.0], &cfg).unwrap();
        let floor = 1e-3 / (1.0 + 1e-3 * 4.0);
        assert!(out.model.emission().iter().all(|&h| h >= floor * (1.0 - 1e-12)));
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = TrainConfig::default();
        assert!(train(&[], vec![1.0], &cfg).is_err());
        assert!(train(&[vec![]], vec![1.0], &cfg).is_err());
        assert!(matches!(
            train(&[seq(&[10])], vec![1.0], &cfg),
            Err(Error::SymbolRange { .. })
        ));
    }

    #[test]
    fn short_sequences_leave_late_states_uniform_but_valid() {
        let data = vec![seq(&[1, 2])];
        let cfg = TrainConfig {
            n_states: 8,
            n_symbols: 3,
            ..TrainConfig::default()
        };
        let out = train(&data, vec![1.0], &cfg).unwrap();
        assert_eq!(out.model.n_states(), 8);
    }
}
