use alloc::vec::Vec;

use rand::Rng;

/// Forward-pass mode. Dropout is only active in `Train`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Inverted dropout. The returned mask holds the multiplier applied to each
/// element: `0` for dropped units and `1 / (1 - rate)` for survivors.
pub fn dropout_apply<R: Rng + ?Sized>(input: &[f64], rate: f64, mode: Mode, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let mut mask = Vec::with_capacity(input.len());
    fill_mask(&mut mask, input.len(), rate, mode, rng);
    let out = input.iter().zip(&mask).map(|(x, m)| x * m).collect();
    (out, mask)
}

pub(crate) fn fill_mask<R: Rng + ?Sized>(mask: &mut Vec<f64>, n: usize, rate: f64, mode: Mode, rng: &mut R) {
    mask.clear();
    if mode == Mode::Eval || rate <= 0.0 {
        mask.resize(n, 1.0);
        return;
    }
    let keep = 1.0 / (1.0 - rate);
    mask.extend((0..n).map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep }));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn eval_and_zero_rate_are_identity() {
        let mut rng = seed::rng(1);
        let x = [1.0, -2.0, 3.5];
        assert_eq!(dropout_apply(&x, 0.5, Mode::Eval, &mut rng).0, x.to_vec());
        assert_eq!(dropout_apply(&x, 0.0, Mode::Train, &mut rng).0, x.to_vec());
    }

    #[test]
    fn survivor_fraction_and_expectation() {
        let mut rng = seed::rng(2024);
        let n = 100_000;
        let x = alloc::vec![1.0; n];
        let (out, mask) = dropout_apply(&x, 0.5, Mode::Train, &mut rng);
        let survivors = mask.iter().filter(|&&m| m != 0.0).count() as f64 / n as f64;
        assert!((0.49..=0.51).contains(&survivors), "{survivors}");
        let mean = out.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
        assert!(mask.iter().all(|&m| m == 0.0 || m == 2.0));
    }
}
