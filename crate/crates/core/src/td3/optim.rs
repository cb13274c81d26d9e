//! Adam and elementwise gradient clipping over flat parameter vectors.

use serde::{Deserialize, Serialize};

use super::Scalar;

/// Clamps each gradient entry into `[-limit, limit]`.
pub fn clip_gradients<T: Scalar>(grads: &mut [T], limit: T) {
    for g in grads {
        *g = g.max(-limit).min(limit);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Adam<T: Scalar> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    m: Vec<T>,
    v: Vec<T>,
    t: u64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(num_params: usize, lr: f64) -> Self {
        Self {
            lr: T::of(lr),
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            eps: T::of(1e-8),
            m: vec![T::zero(); num_params],
            v: vec![T::zero(); num_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One descent step on `params` along `grads`.
    pub fn step(&mut self, params: &mut [T], grads: &[T]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let one = T::one();
        let exp = i32::try_from(self.t).unwrap_or(i32::MAX);
        let c1 = one - self.beta1.powi(exp);
        let c2 = one - self.beta2.powi(exp);
        let step = self.lr * c2.sqrt() / c1;
        let eps = self.eps * c2.sqrt();
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = self.beta1 * *m + (one - self.beta1) * *g;
            *v = self.beta2 * *v + (one - self.beta2) * *g * *g;
            *p = *p - step * *m / (v.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn clipping_is_elementwise() {
        let mut g = vec![0.5, -0.05, -3.0, 0.1];
        clip_gradients(&mut g, 0.1);
        assert_eq!(g, vec![0.1, -0.05, -0.1, 0.1]);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut adam = Adam::<f64>::new(2, 1e-3);
        let mut p = vec![1.0, -1.0];
        adam.step(&mut p, &[4.0, -0.01]);
        assert_abs_diff_eq!(p[0], 1.0 - 1e-3, epsilon = 1e-9);
        assert_abs_diff_eq!(p[1], -1.0 + 1e-3, epsilon = 1e-8);
    }

    #[test]
    fn minimizes_quadratic() {
        let mut adam = Adam::<f64>::new(3, 0.05);
        let target = [1.0, -2.0, 0.5];
        let mut p = vec![0.0; 3];
        for _ in 0..2000 {
            let g: Vec<f64> = p.iter().zip(&target).map(|(x, t)| 2.0 * (x - t)).collect();
            adam.step(&mut p, &g);
        }
        for (x, t) in p.iter().zip(&target) {
            assert_abs_diff_eq!(*x, *t, epsilon = 1e-3);
        }
    }
}
