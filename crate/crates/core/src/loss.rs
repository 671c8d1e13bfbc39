//! Loss primitives: each exposes a scalar value and its gradient with
//! respect to the network output, which is what the backward pass consumes.

use crate::tensor::Tensor2;

/// Probabilities are clamped into `[PROB_EPS, 1 - PROB_EPS]` before any log.
pub const PROB_EPS: f64 = 1e-7;

#[inline]
pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// A scalar function of a network's output batch.
pub trait Loss {
    fn value(&self, output: &Tensor2) -> f64;
    /// dValue/dOutput, same shape as the output.
    fn output_gradient(&self, output: &Tensor2) -> Tensor2;
}

/// Mean over all entries of `(output - target)^2`.
pub struct MeanSquaredError {
    pub target: Tensor2,
}

impl Loss for MeanSquaredError {
    fn value(&self, output: &Tensor2) -> f64 {
        let n = output.data().len() as f64;
        output
            .data()
            .iter()
            .zip(self.target.data())
            .map(|(&o, &t)| (o - t) * (o - t))
            .sum::<f64>()
            / n
    }

    fn output_gradient(&self, output: &Tensor2) -> Tensor2 {
        let n = output.data().len() as f64;
        let mut g = output.clone();
        for (gv, &t) in g.data_mut().iter_mut().zip(self.target.data()) {
            *gv = 2.0 * (*gv - t) / n;
        }
        g
    }
}

/// Mean binary cross-entropy of probabilities against targets, with
/// probability clamping. Where the clamp binds the gradient is zero, so the
/// value and the gradient always describe the same function.
pub struct BinaryCrossEntropy {
    pub targets: Tensor2,
}

impl Loss for BinaryCrossEntropy {
    fn value(&self, output: &Tensor2) -> f64 {
        let n = output.data().len() as f64;
        output
            .data()
            .iter()
            .zip(self.targets.data())
            .map(|(&p, &t)| {
                let p = clamp_prob(p);
                -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
            })
            .sum::<f64>()
            / n
    }

    fn output_gradient(&self, output: &Tensor2) -> Tensor2 {
        let n = output.data().len() as f64;
        let mut g = output.clone();
        for (gv, &t) in g.data_mut().iter_mut().zip(self.targets.data()) {
            let p = *gv;
            *gv = if p <= PROB_EPS || p >= 1.0 - PROB_EPS {
                0.0
            } else {
                (p - t) / (p * (1.0 - p)) / n
            };
        }
        g
    }
}

/// Cross-entropy of row-wise softmax over logits against integer labels,
/// averaged over rows. Evaluated through log-sum-exp.
pub struct SoftmaxCrossEntropy {
    pub labels: Vec<usize>,
}

impl Loss for SoftmaxCrossEntropy {
    fn value(&self, output: &Tensor2) -> f64 {
        debug_assert_eq!(output.rows(), self.labels.len());
        let mut total = 0.0;
        for r in 0..output.rows() {
            let row = output.row(r);
            total += log_sum_exp(row) - row[self.labels[r]];
        }
        total / output.rows() as f64
    }

    fn output_gradient(&self, output: &Tensor2) -> Tensor2 {
        let n = output.rows() as f64;
        let mut g = Tensor2::zeros(output.rows(), output.cols());
        for r in 0..output.rows() {
            let row = output.row(r);
            let probs = softmax_row(row);
            for (c, &p) in probs.iter().enumerate() {
                let indicator = if c == self.labels[r] { 1.0 } else { 0.0 };
                g.set(r, c, (p - indicator) / n);
            }
        }
        g
    }
}

pub fn log_sum_exp(row: &[f64]) -> f64 {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + row.iter().map(|&v| (v - m).exp()).sum::<f64>().ln()
}

pub fn softmax_row(row: &[f64]) -> Vec<f64> {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = row.iter().map(|&v| (v - m).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
