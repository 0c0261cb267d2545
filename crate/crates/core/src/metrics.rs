//! Classification accuracy, forecasting error and summary statistics.

use crate::error::{Error, Result};
use crate::math;
use crate::tensor::{argmax, Tensor};

/// Number of rows whose argmax matches the label argmax (ties go to the
/// lowest index on both sides).
pub fn count_correct(predictions: &Tensor, labels: &Tensor) -> Result<usize> {
    let (p, l) = (predictions.as_matrix(), labels.as_matrix());
    if p.shape() != l.shape() {
        return Err(Error::dim("accuracy", p.shape(), l.shape()));
    }
    Ok((0..p.rows()).filter(|&i| argmax(p.row(i)) == argmax(l.row(i))).count())
}

/// Fraction of rows classified correctly.
pub fn accuracy(predictions: &Tensor, labels: &Tensor) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::Empty("accuracy"));
    }
    Ok(count_correct(predictions, labels)? as f64 / predictions.as_matrix().rows() as f64)
}

/// Root relative squared error and Pearson correlation over all elements
/// (multivariate series are flattened).
pub fn rrse_corr(y: &Tensor, y_hat: &Tensor) -> Result<(f64, f64)> {
    Ok((rrse(y, y_hat)?, corr(y, y_hat)?))
}

pub fn rrse(y: &Tensor, y_hat: &Tensor) -> Result<f64> {
    let (y, p) = paired(y, y_hat)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let den: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if den == 0.0 {
        return Err(Error::UndefinedMetric("RRSE of a constant series"));
    }
    let num: f64 = y.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(math::sqrt(num / den))
}

pub fn corr(y: &Tensor, y_hat: &Tensor) -> Result<f64> {
    let (y, p) = paired(y, y_hat)?;
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let mp = p.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(p) {
        sxy += (a - my) * (b - mp);
        sxx += (a - my) * (a - my);
        syy += (b - mp) * (b - mp);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric("CORR with a constant series"));
    }
    // sqrt(fl(s·s)) == s, so a perfect fit gives exactly 1.
    Ok((sxy / math::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

fn paired<'a>(y: &'a Tensor, y_hat: &'a Tensor) -> Result<(&'a [f64], &'a [f64])> {
    if y.len() != y_hat.len() {
        return Err(Error::dim("rrse_corr", y.shape(), y_hat.shape()));
    }
    if y.len() < 2 {
        return Err(Error::Empty("series shorter than two samples"));
    }
    Ok((y.data(), y_hat.data()))
}

/// Mean and sample standard deviation (`n − 1` denominator; zero for a
/// single value).
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("mean_std"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, math::sqrt(var)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions() {
        let y = Tensor::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(accuracy(&y, &y).unwrap(), 1.0);
        assert_eq!(accuracy(&Tensor::from_rows(&[&[0.2, 0.8]]), &Tensor::from_rows(&[&[0.0, 1.0]])).unwrap(), 1.0);
    }

    #[test]
    fn uniform_outputs_hit_class_zero_only() {
        let p = Tensor::filled(&[100, 10], 0.1);
        let mut y = Tensor::zeros(&[100, 10]);
        for i in 0..100 {
            y.set(&[i, i % 10], 1.0);
        }
        assert!((accuracy(&p, &y).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn empty_accuracy_errors() {
        assert!(accuracy(&Tensor::zeros(&[0, 3]), &Tensor::zeros(&[0, 3])).is_err());
    }

    #[test]
    fn perfect_fit_and_mean_predictor() {
        let y = Tensor::vector(vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(rrse_corr(&y, &y).unwrap(), (0.0, 1.0));
        let mean = Tensor::filled(&[4], 1.5);
        assert_eq!(rrse(&y, &mean).unwrap(), 1.0);
        assert!(matches!(corr(&y, &mean), Err(Error::UndefinedMetric(_))));
        assert!(matches!(rrse(&mean, &y), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn hand_computed_example() {
        let y = Tensor::vector(vec![0.0, 1.0, 2.0, 3.0]);
        let p = Tensor::vector(vec![0.0, 1.0, 2.0, 4.0]);
        let (r, c) = rrse_corr(&y, &p).unwrap();
        assert!((r - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        // ȳ = 1.5, mean(ŷ) = 1.75: Σxy = 6.5, Σxx = 5, Σyy = 8.75
        assert!((c - 6.5 / (5f64.sqrt() * 8.75f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn summary_statistics() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(mean_std(&[4.0]).unwrap(), (4.0, 0.0));
    }

    proptest! {
        #[test]
        fn corr_is_symmetric(v in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..40)) {
            let y = Tensor::vector(v.iter().map(|p| p.0).collect());
            let p = Tensor::vector(v.iter().map(|p| p.1).collect());
            if let (Ok(a), Ok(b)) = (corr(&y, &p), corr(&p, &y)) {
                prop_assert!((a - b).abs() <= 1e-12);
                prop_assert!((-1.0..=1.0).contains(&a));
            }
        }

        #[test]
        fn rrse_is_scale_free(v in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..40), c in 0.01f64..100.0) {
            let y = Tensor::vector(v.iter().map(|p| p.0).collect());
            let p = Tensor::vector(v.iter().map(|p| p.1).collect());
            if let Ok(a) = rrse(&y, &p) {
                let b = rrse(&y.scale(c), &p.scale(c)).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
                prop_assert!(a >= 0.0);
            }
        }
    }
}
