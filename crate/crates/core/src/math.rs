//! Small numeric kernels shared by the model and the relabeling code.

/// Numerically stable softmax (max subtraction).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}

pub fn softplus(x: f64) -> f64 {
    // log(1 + e^x) without overflow for large x
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_of_constants_is_uniform() {
        let p = softmax(&[3.0, 3.0, 3.0, 3.0]);
        assert!(p.iter().all(|&x| x == 0.25));
    }

    #[test]
    fn softplus_matches_definition() {
        for x in [-30.0, -2.0, 0.0, 1.5, 40.0] {
            let direct = (1.0 + f64::exp(x)).ln();
            assert!((softplus(x) - direct).abs() < 1e-12, "x = {x}");
        }
        assert_eq!(softplus(0.0), std::f64::consts::LN_2);
    }

    #[test]
    fn sigmoid_is_softplus_derivative() {
        let h = 1e-6;
        for x in [-3.0, 0.0, 0.7, 5.0] {
            let fd = (softplus(x + h) - softplus(x - h)) / (2.0 * h);
            assert!((fd - sigmoid(x)).abs() < 1e-8);
        }
    }
}
