use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Mean squared error and its gradient `2 (pred - target) / N`.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() {
        return Err(Error::Dimension {
            expected: pred.len(),
            actual: target.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let r = p - t;
            loss += r * r;
            2.0 * r / n
        })
        .collect();
    Ok((loss / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(mse_loss(&[1.5, 2.0], &[1.5, 2.0]).unwrap().0, 0.0);
        assert_eq!(mse_loss(&[1.0, 3.0], &[0.0, 0.0]).unwrap().0, 5.0);
        assert_eq!(mse_loss(&[], &[]), Err(Error::EmptyBatch));
        assert!(mse_loss(&[1.0], &[]).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let p = [0.3, -1.2, 2.5, 0.0];
        let t = [0.1, 0.4, 2.0, -0.7];
        let (_, g) = mse_loss(&p, &t).unwrap();
        let h = 1e-6;
        for i in 0..p.len() {
            let mut a = p;
            a[i] += h;
            let mut b = p;
            b[i] -= h;
            let fd = (mse_loss(&a, &t).unwrap().0 - mse_loss(&b, &t).unwrap().0) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7, "{i}: {fd} vs {}", g[i]);
        }
    }
}
