//! Adam with projection onto the physical parameter ranges, and the
//! reduce-on-plateau learning-rate schedule.

use crate::error::{Error, Result};
use crate::npm::NpmParameters;
use crate::pipeline::grads::ParamGrads;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// First/second moment accumulators per parameter tensor.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    step: u64,
    m: ParamGrads,
    v: ParamGrads,
}

impl OptimizerState {
    pub fn new(params: &NpmParameters) -> Self {
        OptimizerState {
            step: 0,
            m: ParamGrads::zeros_like(params),
            v: ParamGrads::zeros_like(params),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

fn adam_update(
    step: u64,
    lr: f64,
    theta: &mut [f64],
    grad: &[f64],
    m: &mut [f64],
    v: &mut [f64],
) {
    let bc1 = 1.0 - BETA1.powi(step as i32);
    let bc2 = 1.0 - BETA2.powi(step as i32);
    for i in 0..theta.len() {
        m[i] = BETA1 * m[i] + (1.0 - BETA1) * grad[i];
        v[i] = BETA2 * v[i] + (1.0 - BETA2) * grad[i] * grad[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        theta[i] -= lr * m_hat / (v_hat.sqrt() + EPSILON);
    }
}

/// One bias-corrected Adam step followed by projection: reflectances are
/// clamped to [0, 1] and sensitivities to nonnegative values.
pub fn adam_step(
    state: &mut OptimizerState,
    params: &mut NpmParameters,
    grads: &ParamGrads,
    lr: f64,
) -> Result<()> {
    if !grads.is_finite() {
        return Err(Error::NonFiniteGradient("adam step".into()));
    }
    state.step += 1;
    let step = state.step;
    adam_update(
        step,
        lr,
        params.s_source.data_mut(),
        grads.s_source.data(),
        state.m.s_source.data_mut(),
        state.v.s_source.data_mut(),
    );
    adam_update(
        step,
        lr,
        params.s_target.data_mut(),
        grads.s_target.data(),
        state.m.s_target.data_mut(),
        state.v.s_target.data_mut(),
    );
    adam_update(
        step,
        lr,
        params.reflectances.data_mut(),
        grads.reflectances.data(),
        state.m.reflectances.data_mut(),
        state.v.reflectances.data_mut(),
    );
    if let (Some(rec), Some(g), Some(m), Some(v)) = (
        params.recovery.as_mut(),
        grads.recovery.as_ref(),
        state.m.recovery.as_mut(),
        state.v.recovery.as_mut(),
    ) {
        adam_update(
            step,
            lr,
            rec.matrix_mut().data_mut(),
            g.data(),
            m.data_mut(),
            v.data_mut(),
        );
    }

    for v in params.s_source.data_mut() {
        *v = v.max(0.0);
    }
    for v in params.s_target.data_mut() {
        *v = v.max(0.0);
    }
    for v in params.reflectances.data_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(())
}

/// Reduce-on-plateau schedule: halt the decay at `min_lr`; any improvement
/// larger than 1e-6 resets the stall counter.
#[derive(Debug, Clone)]
pub struct PlateauScheduler {
    lr: f64,
    factor: f64,
    patience: usize,
    min_lr: f64,
    best: Option<f64>,
    stall: usize,
}

const MIN_IMPROVEMENT: f64 = 1e-6;

impl PlateauScheduler {
    pub fn new(lr: f64, factor: f64, patience: usize, min_lr: f64) -> Self {
        PlateauScheduler {
            lr,
            factor,
            patience: patience.max(1),
            min_lr,
            best: None,
            stall: 0,
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// Feed one epoch's validation loss; returns the learning rate to use
    /// next.
    pub fn step(&mut self, validation_loss: f64) -> f64 {
        match self.best {
            None => {
                self.best = Some(validation_loss);
            }
            Some(best) if validation_loss < best - MIN_IMPROVEMENT => {
                self.best = Some(validation_loss);
                self.stall = 0;
            }
            Some(_) => {
                self.stall += 1;
                if self.stall >= self.patience {
                    self.lr = (self.lr * self.factor).max(self.min_lr);
                    self.stall = 0;
                }
            }
        }
        self.lr
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::init::{init_from_calibration, InitTensors};
    use crate::spectral::SpectralGrid;
    use approx::assert_relative_eq;

    fn params() -> NpmParameters {
        init_from_calibration(
            SpectralGrid::default_visible(),
            InitTensors::default(),
            Some(3),
            7,
        )
        .unwrap()
    }

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut p = params();
        let before = p.clone();
        let grads = ParamGrads::zeros_like(&p);
        let mut state = OptimizerState::new(&p);
        adam_step(&mut state, &mut p, &grads, 0.01).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_magnitude_is_learning_rate() {
        let mut p = params();
        let mut grads = ParamGrads::zeros_like(&p);
        grads.s_source.set(0, 0, 0.37);
        grads.s_source.set(1, 5, -2.4);
        let before = p.clone();
        let mut state = OptimizerState::new(&p);
        let lr = 0.01;
        adam_step(&mut state, &mut p, &grads, lr).unwrap();
        // Bias-corrected Adam moves each touched weight by ~lr against the
        // gradient sign on the first step.
        let d0 = p.s_source.get(0, 0) - before.s_source.get(0, 0);
        assert!((d0 + lr).abs() < lr * 1e-4, "delta {d0}");
        let d1 = p.s_source.get(1, 5) - before.s_source.get(1, 5);
        assert!((d1 - lr).abs() < lr * 1e-4, "delta {d1}");
        // Untouched weights stay put.
        assert_eq!(p.s_target, before.s_target);
    }

    #[test]
    fn projection_clamps_reflectances() {
        let mut p = params();
        p.reflectances.set(3, 3, 0.9999999);
        let mut grads = ParamGrads::zeros_like(&p);
        grads.reflectances.set(3, 3, -5.0); // pushes value above 1
        let mut state = OptimizerState::new(&p);
        adam_step(&mut state, &mut p, &grads, 0.05).unwrap();
        assert_eq!(p.reflectances.get(3, 3), 1.0);
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut p = params();
        let mut grads = ParamGrads::zeros_like(&p);
        grads.s_target.set(0, 0, f64::NAN);
        let mut state = OptimizerState::new(&p);
        assert!(adam_step(&mut state, &mut p, &grads, 0.01).is_err());
    }

    #[test]
    fn plateau_rule() {
        // Strictly decreasing: lr untouched.
        let mut s = PlateauScheduler::new(0.01, 0.5, 10, 1e-4);
        for i in 0..30 {
            s.step(1.0 - i as f64 * 0.01);
        }
        assert_relative_eq!(s.lr(), 0.01);

        // Ten stalled epochs after the baseline halve the rate.
        let mut s = PlateauScheduler::new(0.01, 0.5, 10, 1e-4);
        for _ in 0..11 {
            s.step(1.0);
        }
        assert_relative_eq!(s.lr(), 0.005);

        // Persistent plateau bottoms out at min_lr.
        let mut s = PlateauScheduler::new(0.01, 0.5, 2, 1e-4);
        for _ in 0..200 {
            s.step(1.0);
        }
        assert_relative_eq!(s.lr(), 1e-4);
    }
}
