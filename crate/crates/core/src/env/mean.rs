//! Mean-reward functions for stochastic instances.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::metric::{ActionSpace, Arm};

/// Region of the action space a mean function (or a combined-instance
/// subset) refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[derive(Default)]
pub enum Support {
    #[default]
    All,
    /// `[low, high)` along every axis; `high >= 1` closes the interval.
    Interval { low: f64, high: f64 },
    /// Point indices of a finite space.
    Points { indices: Vec<usize> },
}

impl Support {
    pub fn contains(&self, arm: &Arm) -> bool {
        match (self, arm) {
            (Support::All, _) => true,
            (Support::Interval { low, high }, Arm::Point(x)) => {
                x.iter().all(|&v| v >= *low && (v < *high || (*high >= 1.0 && v <= *high)))
            }
            (Support::Points { indices }, Arm::Index(i)) => indices.contains(i),
            _ => false,
        }
    }

    /// Whether two supports can share a point.
    pub fn overlaps(&self, other: &Support) -> bool {
        match (self, other) {
            (Support::All, _) | (_, Support::All) => true,
            (Support::Interval { low: a, high: b }, Support::Interval { low: c, high: d }) => {
                a.max(*c) < b.min(*d)
            }
            (Support::Points { indices: a }, Support::Points { indices: b }) => {
                a.iter().any(|i| b.contains(i))
            }
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeanFunction {
    /// `baseline + height * mean_k 4 (x_k - low)(high - x_k) / (high - low)^2`
    /// on the box `[low, high]^d`, `baseline` elsewhere. With
    /// `low = 0, high = 1, height = 1/4` this is `baseline + x (1 - x)` in
    /// one dimension.
    Concave { low: f64, high: f64, baseline: f64, height: f64 },
    /// `max(floor, peak - D(x, target))` on `support`, `baseline` outside.
    DistanceToTarget {
        target: Arm,
        peak: f64,
        #[serde(default)]
        floor: f64,
        #[serde(default)]
        support: Support,
        #[serde(default)]
        baseline: f64,
    },
    /// A tent of the given height and radius on top of a constant.
    BaselineBump { center: Arm, radius: f64, height: f64, baseline: f64 },
    /// Piecewise-linear interpolation of `(x, mu)` knots, constant beyond
    /// the end knots. One-dimensional.
    CustomTable { points: Vec<(f64, f64)> },
    /// Same, loaded from a CSV file of `x,mu` rows when the environment is
    /// built.
    CustomTableFile { path: String },
    /// Per-point means of a finite space.
    PointTable { means: Vec<f64> },
}

impl MeanFunction {
    pub fn mean(&self, space: &ActionSpace, arm: &Arm) -> f64 {
        match self {
            MeanFunction::Concave { low, high, baseline, height } => {
                let Some(x) = arm.coords() else { return *baseline };
                if x.iter().any(|v| v < low || v > high) {
                    return *baseline;
                }
                let w = high - low;
                let s: f64 = x.iter().map(|v| 4.0 * (v - low) * (high - v) / (w * w)).sum();
                baseline + height * s / x.len() as f64
            }
            MeanFunction::DistanceToTarget { target, peak, floor, support, baseline } => {
                if support.contains(arm) {
                    floor.max(peak - space.distance(arm, target))
                } else {
                    *baseline
                }
            }
            MeanFunction::BaselineBump { center, radius, height, baseline } => {
                let r = space.distance(arm, center);
                baseline + height * (1.0 - r / radius).max(0.0)
            }
            MeanFunction::CustomTable { points } => {
                let Some(x) = arm.coords() else { return 0.0 };
                interpolate(points, x[0])
            }
            MeanFunction::CustomTableFile { .. } => f64::NAN,
            MeanFunction::PointTable { means } => arm.index().map_or(f64::NAN, |i| means[i]),
        }
    }

    /// Resolve file-backed tables and check shape against the space.
    pub fn resolve(self, space: &ActionSpace) -> Result<Self, EnvError> {
        let f = match self {
            MeanFunction::CustomTableFile { path } => {
                MeanFunction::CustomTable { points: load_table(Path::new(&path))? }
            }
            MeanFunction::CustomTable { mut points } => {
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                MeanFunction::CustomTable { points }
            }
            other => other,
        };
        match (&f, space) {
            (MeanFunction::CustomTable { points }, ActionSpace::Cube { d }) => {
                if *d != 1 {
                    return Err(EnvError::Invalid("custom_table needs a one-dimensional cube".into()));
                }
                if points.is_empty() {
                    return Err(EnvError::Invalid("custom_table has no knots".into()));
                }
            }
            (MeanFunction::PointTable { means }, ActionSpace::Finite(s)) => {
                if means.len() != s.metric.len() {
                    return Err(EnvError::Invalid(format!(
                        "point_table has {} means for {} points",
                        means.len(),
                        s.metric.len()
                    )));
                }
            }
            (MeanFunction::CustomTable { .. } | MeanFunction::Concave { .. }, ActionSpace::Finite(_)) => {
                return Err(EnvError::Invalid("mean function needs a cube space".into()))
            }
            (MeanFunction::PointTable { .. }, ActionSpace::Cube { .. }) => {
                return Err(EnvError::Invalid("point_table needs a finite space".into()))
            }
            (MeanFunction::DistanceToTarget { target, .. }, _)
            | (MeanFunction::BaselineBump { center: target, .. }, _)
                if !space.contains(target) =>
            {
                return Err(EnvError::Invalid(format!("{target} is not in the action space")));
            }
            _ => {}
        }
        Ok(f)
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = points.partition_point(|p| p.0 <= x);
    let (x0, y0) = points[i - 1];
    let (x1, y1) = points[i];
    if x1 == x0 {
        return y1;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Read `x,mu` rows; a non-numeric first row is treated as a header.
pub fn load_table(path: &Path) -> Result<Vec<(f64, f64)>, EnvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| EnvError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| EnvError::Io(e.to_string()))?;
        let parsed =
            (|| -> Option<(f64, f64)> { Some((rec.get(0)?.parse().ok()?, rec.get(1)?.parse().ok()?)) })();
        match parsed {
            Some(p) => out.push(p),
            None if i == 0 => continue,
            None => {
                return Err(EnvError::Invalid(format!(
                    "{}: row {} is not an (x, mu) pair",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> ActionSpace {
        ActionSpace::cube(1).unwrap()
    }

    #[test]
    fn distance_to_target_shape() {
        let f = MeanFunction::DistanceToTarget {
            target: Arm::scalar(0.3),
            peak: 0.9,
            floor: 0.0,
            support: Support::All,
            baseline: 0.0,
        };
        let s = line();
        assert!((f.mean(&s, &Arm::scalar(0.3)) - 0.9).abs() < 1e-15);
        assert!((f.mean(&s, &Arm::scalar(0.8)) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn concave_is_shifted_parabola() {
        let f = MeanFunction::Concave { low: 0.0, high: 1.0, baseline: 0.25, height: 0.25 };
        for x in [0.0, 0.2, 0.5, 0.9] {
            let want = 0.25 + x * (1.0 - x);
            assert!((f.mean(&line(), &Arm::scalar(x)) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn table_interpolates_and_clamps() {
        let pts = vec![(0.0, 0.2), (0.5, 0.6), (1.0, 0.4)];
        assert_eq!(interpolate(&pts, 0.25), 0.4);
        assert_eq!(interpolate(&pts, -1.0), 0.2);
        assert!((interpolate(&pts, 0.75) - 0.5).abs() < 1e-15);
        assert_eq!(interpolate(&pts, 2.0), 0.4);
    }

    #[test]
    fn table_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(&p, "x,mu\n1.0,0.5\n0.0,0.1\n").unwrap();
        assert_eq!(load_table(&p).unwrap(), vec![(0.0, 0.1), (1.0, 0.5)]);
        std::fs::write(&p, "0,0.1\nbad,row\n").unwrap();
        assert!(load_table(&p).is_err());
    }

    #[test]
    fn support_membership() {
        let s = Support::Interval { low: 0.0, high: 0.5 };
        assert!(s.contains(&Arm::scalar(0.0)));
        assert!(!s.contains(&Arm::scalar(0.5)));
        let t = Support::Interval { low: 0.5, high: 1.0 };
        assert!(t.contains(&Arm::scalar(1.0)));
        assert!(!s.overlaps(&t));
        assert!(s.overlaps(&Support::Interval { low: 0.4, high: 0.6 }));
    }
}
