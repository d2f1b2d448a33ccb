//! Observed convergence orders from grid-doubling studies.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    pub resolutions: Vec<usize>,
    pub residuals: Vec<f64>,
    /// `log2(r_k / r_{k+1})` for each consecutive pair.
    pub pair_orders: Vec<f64>,
    /// Least-squares slope of `-log r` against `log resolution`.
    pub fitted: f64,
}

impl OrderStudy {
    /// The most pessimistic pairwise order.
    pub fn order(&self) -> f64 {
        self.pair_orders.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Orders from max residuals at resolutions that double at every level.
///
/// A residual sequence that fails to decrease strictly has no meaningful
/// order and is reported as `NoConvergence`.
pub fn convergence_order(resolutions: &[usize], residuals: &[f64]) -> Result<OrderStudy> {
    if resolutions.len() < 3 || residuals.len() != resolutions.len() {
        return Err(Error::invalid("need at least three resolutions with one residual each"));
    }
    if resolutions.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::invalid(format!("resolutions {resolutions:?} do not double")));
    }
    if residuals.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::NoConvergence(format!("residuals {residuals:?} are not positive and finite")));
    }
    if residuals.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::NoConvergence(format!("residuals {residuals:?} do not decrease")));
    }
    let pair_orders = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let xs: Vec<f64> = resolutions.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| -r.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(OrderStudy {
        resolutions: resolutions.to_vec(),
        residuals: residuals.to_vec(),
        pair_orders,
        fitted: sxy / sxx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_second_order_error() {
        let ms = [100, 200, 400, 800];
        // max over a grid of a field with error C dx^2 (1 + dx)
        let r: Vec<f64> = ms
            .iter()
            .map(|&m| {
                let dx = 1.0 / m as f64;
                (0..=m)
                    .map(|j| 3.0 * dx * dx * (1.0 + dx) * (std::f64::consts::PI * j as f64 * dx).sin())
                    .fold(0.0, f64::max)
            })
            .collect();
        let s = convergence_order(&ms, &r).unwrap();
        assert!((s.order() - 2.0).abs() < 0.1, "{s:?}");
        assert!((s.fitted - 2.0).abs() < 0.1);
    }

    #[test]
    fn rejects_bad_sequences() {
        assert!(matches!(
            convergence_order(&[100, 200, 400], &[1e-3, 2e-3, 1e-4]),
            Err(Error::NoConvergence(_))
        ));
        assert!(matches!(convergence_order(&[100, 200, 400], &[1e-3, 0.0, 0.0]), Err(Error::NoConvergence(_))));
        assert!(convergence_order(&[100, 200], &[1e-3, 1e-4]).is_err());
        assert!(convergence_order(&[100, 300, 900], &[1e-2, 1e-3, 1e-4]).is_err());
    }
}
