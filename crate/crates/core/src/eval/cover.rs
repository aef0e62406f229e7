//! Covering counts and empirical dimension fits.

use serde::Serialize;

use super::EvalError;
use crate::metric::{greedy_cover_by, ActionSpace, Arm};

/// Greedy count of sets of diameter at most `eps` covering `subset`; an
/// upper bound on the minimum.
pub fn covering_count(subset: &[Arm], eps: f64, space: &ActionSpace) -> Result<usize, EvalError> {
    if subset.is_empty() {
        return Ok(0);
    }
    Ok(greedy_cover_by(subset.len(), eps, |i, j| space.distance(&subset[i], &subset[j]))?.len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverReport {
    pub eps: Vec<f64>,
    pub counts: Vec<f64>,
    /// Slope of `ln N` against `ln(1/eps)`, floored at 0.
    pub z_hat: f64,
    /// Unfloored slope.
    pub slope: f64,
    pub slope_std_err: f64,
    /// `exp(intercept)`: the multiplier in `N(eps) ~ gamma eps^-z`.
    pub multiplier: f64,
    /// Counts come from greedy covers and are upper bounds.
    pub upper_bound_counts: bool,
}

/// Least-squares fit of `y = a + b x`, returning `(a, b, se(b))`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let se = if x.len() > 2 && sxx > 0.0 {
        let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (a, b, se)
}

/// Fits `ln N(eps) = ln gamma + z ln(1/eps)` over `(eps, N)` pairs.
pub fn dimension_fit(ladder: &[(f64, f64)]) -> Result<CoverReport, EvalError> {
    if ladder.len() < 3 {
        return Err(EvalError::LadderTooShort(ladder.len()));
    }
    if let Some(&(e, n)) = ladder.iter().find(|(e, n)| !(*e > 0.0 && *n > 0.0)) {
        return Err(EvalError::Mismatch(format!("ladder entry ({e}, {n}) must be positive")));
    }
    let x: Vec<f64> = ladder.iter().map(|(e, _)| (1.0 / e).ln()).collect();
    let y: Vec<f64> = ladder.iter().map(|(_, n)| n.ln()).collect();
    let (a, b, se) = least_squares(&x, &y);
    Ok(CoverReport {
        eps: ladder.iter().map(|p| p.0).collect(),
        counts: ladder.iter().map(|p| p.1).collect(),
        z_hat: b.max(0.0),
        slope: b,
        slope_std_err: se,
        multiplier: a.exp(),
        upper_bound_counts: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line() -> ActionSpace {
        ActionSpace::cube(1).unwrap()
    }

    const LADDER: [f64; 6] = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625];

    #[test]
    fn single_point_has_dimension_zero() {
        let pts = vec![Arm::scalar(0.3)];
        let ladder: Vec<(f64, f64)> =
            LADDER.iter().map(|&e| (e, covering_count(&pts, e, &line()).unwrap() as f64)).collect();
        assert!(ladder.iter().all(|p| p.1 == 1.0));
        assert_eq!(dimension_fit(&ladder).unwrap().z_hat, 0.0);
    }

    #[test]
    fn full_grid_has_dimension_one() {
        let grid = line().grid(1.0 / 1024.0);
        let ladder: Vec<(f64, f64)> =
            LADDER.iter().map(|&e| (e, covering_count(&grid, e, &line()).unwrap() as f64)).collect();
        let rep = dimension_fit(&ladder).unwrap();
        assert!((rep.z_hat - 1.0).abs() <= 0.15, "{rep:?}");
    }

    #[test]
    fn two_points_have_dimension_near_zero() {
        let pts = vec![Arm::scalar(0.2), Arm::scalar(0.8)];
        let ladder: Vec<(f64, f64)> =
            LADDER.iter().map(|&e| (e, covering_count(&pts, e, &line()).unwrap() as f64)).collect();
        let rep = dimension_fit(&ladder).unwrap();
        assert!(rep.z_hat <= 0.15, "{rep:?}");
    }

    #[test]
    fn short_ladders_are_rejected() {
        assert!(matches!(dimension_fit(&[(0.5, 2.0), (0.25, 4.0)]), Err(EvalError::LadderTooShort(2))));
    }

    #[test]
    fn counts_shrink_as_eps_grows() {
        let grid = line().grid(1.0 / 256.0);
        let counts: Vec<usize> = LADDER.iter().map(|&e| covering_count(&grid, e, &line()).unwrap()).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    }

    proptest! {
        #[test]
        fn exact_ladders_are_recovered(z in 0.0f64..3.0, c in 0.1f64..50.0) {
            let ladder: Vec<(f64, f64)> = LADDER.iter().map(|&e| (e, c * e.powf(-z))).collect();
            let rep = dimension_fit(&ladder).unwrap();
            prop_assert!((rep.z_hat - z).abs() < 1e-6);
            prop_assert!((rep.multiplier - c).abs() < 1e-6 * c);
        }
    }
}
