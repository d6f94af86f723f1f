use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// First-order optimizer over a flat parameter vector.
#[derive(Debug, Clone)]
pub(crate) struct Optimizer {
    kind: OptimizerKind,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, n: usize) -> Self {
        Self {
            kind,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, x: &mut [f64], g: &[f64], lr: f64) {
        match self.kind {
            OptimizerKind::Sgd => {
                for (xi, gi) in x.iter_mut().zip(g) {
                    *xi -= lr * gi;
                }
            }
            OptimizerKind::Adam => {
                self.t += 1;
                let c1 = 1.0 - BETA1.powi(self.t);
                let c2 = 1.0 - BETA2.powi(self.t);
                for i in 0..x.len() {
                    self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * g[i];
                    self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * g[i] * g[i];
                    let mh = self.m[i] / c1;
                    let vh = self.v[i] / c2;
                    x[i] -= lr * mh / (vh.sqrt() + EPS);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        // Bias correction makes the first step lr · sign(g).
        let mut o = Optimizer::new(OptimizerKind::Adam, 2);
        let mut x = vec![1.0, -1.0];
        o.step(&mut x, &[3.0, -0.5], 0.1);
        assert!((x[0] - 0.9).abs() < 1e-7);
        assert!((x[1] + 0.9).abs() < 1e-6);
    }

    #[test]
    fn both_minimize_a_quadratic() {
        for kind in [OptimizerKind::Adam, OptimizerKind::Sgd] {
            let mut o = Optimizer::new(kind, 1);
            let mut x = vec![5.0];
            for _ in 0..2000 {
                let g = vec![2.0 * (x[0] - 2.0)];
                o.step(&mut x, &g, 0.05);
            }
            assert!((x[0] - 2.0).abs() < 1e-3, "{kind:?} {}", x[0]);
        }
    }
}
