use crate::error::{Result, ShadowError};

/// Bounded solution of `z_{k+1} = μ z_k - e(k)` from `z_0 = 0` by direct
/// summation, `z_k = -Σ_{j<k} μ^j e(k-1-j)`. Returns `z_0, ..., z_N` for `N`
/// errors.
pub fn linear_series_oracle(errors: &[f64], mu: f64) -> Result<Vec<f64>> {
    if !(mu.abs() < 1.0) {
        return Err(ShadowError::InvalidInput(format!("|mu| = {} must be below 1", mu.abs())));
    }
    Ok((0..=errors.len())
        .map(|k| {
            let mut pow = 1.0;
            let mut sum = 0.0;
            for j in 0..k {
                sum += pow * errors[k - 1 - j];
                pow *= mu;
            }
            -sum
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_errors() {
        assert_eq!(linear_series_oracle(&[0.0; 5], 0.4).unwrap(), vec![0.0; 6]);
    }

    #[test]
    fn constant_error_limit() {
        let mu = 0.3819660112501051;
        let z = linear_series_oracle(&vec![1e-4; 200], mu).unwrap();
        let limit = -1e-4 / (1.0 - mu);
        assert!((z[200] - limit).abs() < 1e-18);
        assert!((limit + 1.6180339887e-4).abs() < 1e-13);
    }

    #[test]
    fn impulse() {
        let mut e = vec![0.0; 10];
        e[0] = 1.0;
        let z = linear_series_oracle(&e, 0.5).unwrap();
        assert_eq!(z[0], 0.0);
        for (k, zk) in z.iter().enumerate().skip(1) {
            assert_eq!(*zk, -(0.5f64.powi(k as i32 - 1)));
        }
    }

    #[test]
    fn rejects_expanding_rate() {
        assert!(linear_series_oracle(&[1.0], 1.0).is_err());
        assert!(linear_series_oracle(&[1.0], f64::NAN).is_err());
    }
}
