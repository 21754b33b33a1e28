//! The negative-sampling objective for a single (center, context) pair.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Logistic function, evaluated without overflow for large `|x|`.
pub fn sigmoid<T: Float>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `ln σ(x)`, stable for large `|x|`.
pub fn log_sigmoid<T: Float>(x: T) -> T {
    // ln σ(x) = -softplus(-x), softplus(y) = max(y, 0) + ln(1 + e^{-|y|})
    let y = -x;
    -(y.max(T::zero()) + (-y.abs()).exp().ln_1p())
}

/// Loss and gradients of one SGNS pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient<T> {
    /// `-ln σ(w·v_o) - Σ_j ln σ(-w·v_nj)`
    pub loss: T,
    pub center: u32,
    /// Gradient with respect to the center word's input vector.
    pub center_grad: Vec<T>,
    /// Gradients with respect to the output (context) vectors, one entry per
    /// distinct output row, in order of first appearance.
    pub output_grads: Vec<(u32, Vec<T>)>,
}

fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Negative-sampling loss of (`center`, `context`) against `negatives` and
/// its exact gradient. A negative id listed twice contributes twice.
pub fn objective_and_gradient<T: Float>(
    input: &Matrix<T>,
    output: &Matrix<T>,
    center: u32,
    context: u32,
    negatives: &[u32],
) -> Result<PairGradient<T>> {
    let vocab_size = input.rows();
    if output.rows() != vocab_size || output.cols() != input.cols() {
        return Err(Error::Config(format!(
            "input matrix is {}x{} but output matrix is {}x{}",
            input.rows(),
            input.cols(),
            output.rows(),
            output.cols()
        )));
    }
    for &id in std::iter::once(&center).chain(std::iter::once(&context)).chain(negatives) {
        if id as usize >= vocab_size {
            return Err(Error::IdOutOfRange {
                id: id as usize,
                vocab_size,
            });
        }
    }

    let w = input.row(center as usize);
    let dim = input.cols();
    let mut loss = T::zero();
    let mut center_grad = vec![T::zero(); dim];
    let mut output_grads: Vec<(u32, Vec<T>)> = Vec::new();

    let targets = std::iter::once((context, true)).chain(negatives.iter().map(|&n| (n, false)));
    for (target, positive) in targets {
        let v = output.row(target as usize);
        let score = dot(w, v);
        // d/dscore of -ln σ(score) is σ(score) - 1; of -ln σ(-score) is σ(score).
        let coeff = if positive {
            loss = loss - log_sigmoid(score);
            sigmoid(score) - T::one()
        } else {
            loss = loss - log_sigmoid(-score);
            sigmoid(score)
        };
        for (g, &x) in center_grad.iter_mut().zip(v) {
            *g = *g + coeff * x;
        }
        let slot = match output_grads.iter().position(|(id, _)| *id == target) {
            Some(i) => i,
            None => {
                output_grads.push((target, vec![T::zero(); dim]));
                output_grads.len() - 1
            }
        };
        for (g, &x) in output_grads[slot].1.iter_mut().zip(w) {
            *g = *g + coeff * x;
        }
    }

    Ok(PairGradient {
        loss,
        center,
        center_grad,
        output_grads,
    })
}
