//! Regression metrics and the TCN receptive-field planning formula.

use crate::error::{Error, Result};

fn check_pair(truth: &[f64], pred: &[f64]) -> Result<()> {
    if truth.len() != pred.len() {
        return Err(Error::Dimensions(format!(
            "{} truths vs {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Value("metrics need at least one pair".into()));
    }
    Ok(())
}

/// Mean squared error, µm² when the inputs are Ra values in µm.
pub fn mse(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check_pair(truth, pred)?;
    let sum: f64 = truth.iter().zip(pred).map(|(y, p)| (y - p) * (y - p)).sum();
    Ok(sum / truth.len() as f64)
}

/// Root mean squared error: `√mse`, so `rmse² = mse` holds by construction.
pub fn rmse(truth: &[f64], pred: &[f64]) -> Result<f64> {
    Ok(mse(truth, pred)?.sqrt())
}

/// Largest absolute prediction error.
pub fn max_abs_error(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check_pair(truth, pred)?;
    Ok(truth.iter().zip(pred).map(|(y, p)| (y - p).abs()).fold(0.0, f64::max))
}

/// Sample Pearson correlation coefficient.
///
/// Errors when either vector is constant — the coefficient is undefined
/// there, and silently returning 0 or 1 would corrupt report aggregation.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    if a.len() < 2 {
        return Err(Error::Value("pearson needs at least two pairs".into()));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        saa += (x - mean_a) * (x - mean_a);
        sbb += (y - mean_b) * (y - mean_b);
        sab += (x - mean_a) * (y - mean_b);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return Err(Error::Value(
            "pearson correlation is undefined for a constant vector".into(),
        ));
    }
    Ok(sab / (saa.sqrt() * sbb.sqrt()))
}

/// Receptive field of a temporal convolutional network:
/// `2·Σ_{i=0..levels−1} (kernel_size − 1)·base^i` input steps.
///
/// The factor 2 reflects the two stacked convolutions per residual level.
pub fn tcn_receptive_field(kernel_size: u64, levels: u32, dilation_base: u64) -> Result<u64> {
    if kernel_size < 2 {
        return Err(Error::Value(format!(
            "kernel size must be ≥ 2, got {kernel_size}"
        )));
    }
    if levels < 1 {
        return Err(Error::Value("need at least one level".into()));
    }
    if dilation_base < 1 {
        return Err(Error::Value(format!(
            "dilation base must be ≥ 1, got {dilation_base}"
        )));
    }
    let mut dilation: u64 = 1;
    let mut field: u64 = 0;
    for level in 0..levels {
        let layer = (kernel_size - 1)
            .checked_mul(dilation)
            .ok_or_else(|| Error::Value("receptive field overflows u64".into()))?;
        field = field
            .checked_add(layer)
            .ok_or_else(|| Error::Value("receptive field overflows u64".into()))?;
        if level + 1 < levels {
            dilation = dilation
                .checked_mul(dilation_base)
                .ok_or_else(|| Error::Value("receptive field overflows u64".into()))?;
        }
    }
    field.checked_mul(2).ok_or_else(|| Error::Value("receptive field overflows u64".into()))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn mse_and_rmse_basics() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(mse(&y, &y).unwrap(), 0.0);
        assert_eq!(rmse(&y, &y).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(rmse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(mse(&y, &[1.0]).is_err());
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn matches_naive_oracles_and_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        for _ in 0..20 {
            let n = rng.gen_range(2..50);
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();

            let mut acc = 0.0;
            let mut worst = 0.0f64;
            for i in 0..n {
                acc += (y[i] - p[i]).powi(2);
                worst = worst.max((y[i] - p[i]).abs());
            }
            assert_abs_diff_eq!(mse(&y, &p).unwrap(), acc / n as f64, epsilon = 1e-12);
            assert_abs_diff_eq!(max_abs_error(&y, &p).unwrap(), worst, epsilon = 0.0);
            assert_abs_diff_eq!(
                rmse(&y, &p).unwrap().powi(2),
                mse(&y, &p).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn pearson_affine_behavior() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let y: Vec<f64> = (0..30).map(|_| rng.gen_range(0.0..3.0)).collect();
        let p: Vec<f64> = (0..30).map(|_| rng.gen_range(0.0..3.0)).collect();

        // Positive affine maps leave r unchanged; negation flips its sign.
        let scaled: Vec<f64> = y.iter().map(|v| 2.0 * v + 3.0).collect();
        assert_abs_diff_eq!(pearson(&scaled, &y).unwrap(), 1.0, epsilon = 1e-12);
        let r = pearson(&y, &p).unwrap();
        assert_abs_diff_eq!(pearson(&scaled, &p).unwrap(), r, epsilon = 1e-12);
        let negated: Vec<f64> = y.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(pearson(&negated, &y).unwrap(), -1.0, epsilon = 1e-12);

        // Covariance-definition oracle.
        let n = 30.0;
        let my = y.iter().sum::<f64>() / n;
        let mp = p.iter().sum::<f64>() / n;
        let cov = y.iter().zip(&p).map(|(a, b)| (a - my) * (b - mp)).sum::<f64>() / n;
        let sy = (y.iter().map(|a| (a - my).powi(2)).sum::<f64>() / n).sqrt();
        let sp = (p.iter().map(|b| (b - mp).powi(2)).sum::<f64>() / n).sqrt();
        assert_abs_diff_eq!(r, cov / (sy * sp), epsilon = 1e-12);

        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn receptive_field_hits_published_configurations() {
        assert_eq!(tcn_receptive_field(9, 12, 2).unwrap(), 65_520);
        assert_eq!(tcn_receptive_field(5, 13, 2).unwrap(), 65_528);
        assert_eq!(tcn_receptive_field(7, 8, 2).unwrap(), 3_060);
        // Base 1 degenerates to 2·(ks−1)·levels.
        assert_eq!(tcn_receptive_field(3, 4, 1).unwrap(), 16);
        assert!(tcn_receptive_field(1, 4, 2).is_err());
        assert!(tcn_receptive_field(9, 0, 2).is_err());
        assert!(tcn_receptive_field(9, 4, 0).is_err());
        assert!(tcn_receptive_field(u64::MAX, 2, 2).is_err());
    }
}
