//! L-BFGS maximum-likelihood training from zero initialization.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::crf::model::{ll_grad_indexed, AttributedSentence, CrfModel, IndexedData};
use crate::crf::TrainingConfig;
use crate::error::{CoreError, Result};

/// Trained model plus the per-accepted-step objective trace (regularized
/// log-likelihood, ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: CrfModel,
    pub objective_trace: Vec<f64>,
}

/// L-BFGS ascent on the regularized conditional log-likelihood. Stops at
/// `max_iterations` or when the relative objective change falls below
/// `convergence_tol`.
pub fn train(
    data: &[AttributedSentence],
    labels: &[String],
    config: &TrainingConfig,
) -> Result<TrainOutcome> {
    if data.is_empty() {
        return Err(CoreError::EmptyInput("training data".into()));
    }
    if labels.is_empty() {
        return Err(CoreError::InvalidArgument("empty label set".into()));
    }
    let indexed = IndexedData::build(data, labels)?;
    let mut params = vec![0.0f64; indexed.param_count()];
    let mut trace = Vec::new();

    if config.max_iterations > 0 {
        let (mut ll, mut grad) = ll_grad_indexed(&params, &indexed, config.l2_sigma2)?;
        trace.push(ll);
        // (s, y) pairs for the two-loop recursion, newest last.
        let mut memory: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();

        for iteration in 0..config.max_iterations {
            let direction = ascent_direction(&grad, &memory);
            let dir_dot_grad: f64 = direction.iter().zip(&grad).map(|(d, g)| d * g).sum();
            if dir_dot_grad <= 0.0 {
                break; // not an ascent direction; gradient is (near) zero
            }

            // Backtracking line search with the Armijo condition.
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let candidate: Vec<f64> = params
                    .iter()
                    .zip(&direction)
                    .map(|(p, d)| p + step * d)
                    .collect();
                let (cand_ll, cand_grad) = ll_grad_indexed(&candidate, &indexed, config.l2_sigma2)?;
                if cand_ll >= ll + 1e-4 * step * dir_dot_grad {
                    accepted = Some((candidate, cand_ll, cand_grad));
                    break;
                }
                step *= 0.5;
            }
            let Some((new_params, new_ll, new_grad)) = accepted else {
                return Err(CoreError::Numerical(format!(
                    "line search failed at iteration {iteration}"
                )));
            };

            let s: Vec<f64> = new_params
                .iter()
                .zip(&params)
                .map(|(a, b)| a - b)
                .collect();
            // For ascent, curvature pairs use the change in -grad.
            let y: Vec<f64> = grad.iter().zip(&new_grad).map(|(old, new)| old - new).collect();
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
            if sy > 1e-12 {
                if memory.len() == config.lbfgs_memory.max(1) {
                    memory.pop_front();
                }
                memory.push_back((s, y));
            }

            let improvement = (new_ll - ll).abs() / new_ll.abs().max(1.0);
            params = new_params;
            ll = new_ll;
            grad = new_grad;
            trace.push(ll);
            if improvement < config.convergence_tol {
                break;
            }
        }
    }

    let num = labels.len();
    let trans_base = indexed.attrs.len() * num;
    let mut state_weights: HashMap<String, Vec<f64>> = HashMap::with_capacity(indexed.attrs.len());
    for (id, attr) in indexed.attrs.iter().enumerate() {
        state_weights.insert(attr.clone(), params[id * num..(id + 1) * num].to_vec());
    }
    Ok(TrainOutcome {
        model: CrfModel {
            labels: labels.to_vec(),
            state_weights,
            transition_weights: params[trans_base..].to_vec(),
            config: config.clone(),
        },
        objective_trace: trace,
    })
}

/// Two-loop recursion producing an ascent direction H * grad.
fn ascent_direction(grad: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>)>) -> Vec<f64> {
    let mut q = grad.to_vec();
    if memory.is_empty() {
        return q;
    }
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y) in memory.iter().rev() {
        let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
        let alpha = s.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>() / sy;
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= alpha * yi;
        }
        alphas.push((alpha, sy));
    }
    // Initial Hessian scaling from the most recent pair.
    let (s_last, y_last) = memory.back().unwrap();
    let sy: f64 = s_last.iter().zip(y_last).map(|(a, b)| a * b).sum();
    let yy: f64 = y_last.iter().map(|v| v * v).sum();
    if yy > 0.0 {
        let gamma = sy / yy;
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y), &(alpha, sy)) in memory.iter().zip(alphas.iter().rev()) {
        let beta = y.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>() / sy;
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (alpha - beta) * si;
        }
    }
    q
}
