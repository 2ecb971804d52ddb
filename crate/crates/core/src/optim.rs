//! Parameter update rules shared by both trainers.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    /// Plain gradient descent on the mean per-term gradient.
    Gd,
    /// Adam with the usual moment decays (0.9, 0.999) and bias correction.
    #[default]
    Adam,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

pub(crate) struct Stepper {
    kind: Optimizer,
    rate: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Stepper {
    pub(crate) fn new(kind: Optimizer, rate: f64, parameters: usize) -> Self {
        let n = if kind == Optimizer::Adam { parameters } else { 0 };
        Self {
            kind,
            rate,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// Applies one update. `grads` is the gradient of the summed loss over
    /// `terms` terms; gradient descent divides it by `terms`, Adam is
    /// invariant to that scale.
    pub(crate) fn step<'a>(
        &mut self,
        params: impl Iterator<Item = &'a mut f64>,
        grads: impl Iterator<Item = &'a f64>,
        terms: usize,
    ) {
        match self.kind {
            Optimizer::Gd => {
                let rate = self.rate / terms.max(1) as f64;
                for (p, g) in params.zip(grads) {
                    *p -= rate * g;
                }
            }
            Optimizer::Adam => {
                self.t += 1;
                let c1 = 1.0 - libm::pow(BETA1, f64::from(self.t));
                let c2 = 1.0 - libm::pow(BETA2, f64::from(self.t));
                for (((p, g), m), v) in params.zip(grads).zip(&mut self.m).zip(&mut self.v) {
                    *m = BETA1 * *m + (1.0 - BETA1) * g;
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    *p -= self.rate * (*m / c1) / (libm::sqrt(*v / c2) + EPS);
                }
            }
        }
    }
}
