use super::grad::EtmGrads;
use super::EtmParams;

/// Adam with bias-corrected moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One update of `params` at step `t` (1-based).
    pub fn update(&self, t: u64, params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64]) {
        assert!(params.len() == grads.len() && m.len() == grads.len() && v.len() == grads.len());
        let bc1 = 1.0 - self.beta1.powi(t as i32);
        let bc2 = 1.0 - self.beta2.powi(t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
            v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// First and second moments for every parameter group plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    moments: Vec<(Vec<f64>, Vec<f64>)>,
    with_rho: bool,
}

impl AdamState {
    pub fn new(params: &mut EtmParams, with_rho: bool) -> Self {
        let moments = params
            .groups_mut(with_rho)
            .iter()
            .map(|g| (vec![0.0; g.len()], vec![0.0; g.len()]))
            .collect();
        Self {
            step: 0,
            moments,
            with_rho,
        }
    }

    /// Applies one Adam step to every group.
    pub fn step(&mut self, adam: &Adam, params: &mut EtmParams, grads: &EtmGrads) {
        assert_eq!(
            grads.rho.is_some(),
            self.with_rho,
            "rho gradient presence must match state"
        );
        self.step += 1;
        let t = self.step;
        let groups = params.groups_mut(self.with_rho);
        for ((p, g), (m, v)) in groups
            .into_iter()
            .zip(grads.groups())
            .zip(&mut self.moments)
        {
            adam.update(t, p, g, m, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let adam = Adam::new(0.005);
        let mut p = [1.5, -2.0];
        let (mut m, mut v) = ([0.0; 2], [0.0; 2]);
        adam.update(1, &mut p, &[0.0, 0.0], &mut m, &mut v);
        assert_eq!(p, [1.5, -2.0]);
    }

    #[test]
    fn first_step_hand_value() {
        // m = 0.01, v = 1e-5; m_hat = 0.1, v_hat = 0.01
        let adam = Adam::new(0.005);
        let mut p = [0.0];
        let (mut m, mut v) = ([0.0], [0.0]);
        adam.update(1, &mut p, &[0.1], &mut m, &mut v);
        let want = -0.005 * 0.1 / (0.1 + 1e-8);
        assert!((p[0] - want).abs() < 1e-15);
        assert!((p[0] + 0.005).abs() < 1e-6);
    }

    #[test]
    fn two_step_trace() {
        let adam = Adam::new(0.005);
        let mut p = [1.0];
        let (mut m, mut v) = ([0.0], [0.0]);
        adam.update(1, &mut p, &[0.1], &mut m, &mut v);
        adam.update(2, &mut p, &[-0.3], &mut m, &mut v);
        // hand trace
        let m1 = 0.1 * 0.1;
        let v1 = 0.001 * 0.01;
        let p1 = 1.0 - 0.005 * (m1 / 0.1) / ((v1 / 0.001f64).sqrt() + 1e-8);
        let m2 = 0.9 * m1 + 0.1 * -0.3;
        let v2 = 0.999 * v1 + 0.001 * 0.09;
        let bc1 = 1.0 - 0.81;
        let bc2 = 1.0 - 0.999f64 * 0.999;
        let p2 = p1 - 0.005 * (m2 / bc1) / ((v2 / bc2).sqrt() + 1e-8);
        assert!((p[0] - p2).abs() < 1e-15, "{} vs {p2}", p[0]);
    }
}
