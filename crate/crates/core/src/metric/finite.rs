//! Finite metric spaces given by a distance matrix, greedy coverings and
//! the doubling constant.

use std::collections::HashSet;
use std::path::Path;

use serde::Serialize;

use super::MetricError;

/// Absolute tolerance for the symmetry and triangle checks.
const METRIC_TOL: f64 = 1e-12;

/// Balls with at most this many points get an exact minimum cover.
pub const EXACT_COVER_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    labels: Vec<String>,
}

impl FiniteMetricSpace {
    /// Validates a square distance matrix: non-negative, zero diagonal,
    /// symmetric, triangle inequality, diameter at most one.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let n = rows.len();
        if n == 0 {
            return Err(MetricError::EmptySpace);
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::NotSquare { row: i, len: row.len(), n });
            }
            dist.extend_from_slice(row);
        }
        let space = FiniteMetricSpace { n, dist, labels: (0..n).map(|i| i.to_string()).collect() };
        space.validate()?;
        Ok(space)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, MetricError> {
        if labels.len() != self.n {
            return Err(MetricError::Parse {
                line: 0,
                msg: format!("{} labels for {} points", labels.len(), self.n),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    fn validate(&self) -> Result<(), MetricError> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let d = self.d(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(MetricError::InvalidDistance { i, j, value: d });
                }
            }
            if self.d(i, i) != 0.0 {
                return Err(MetricError::NonZeroDiagonal { i, value: self.d(i, i) });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if (self.d(i, j) - self.d(j, i)).abs() > METRIC_TOL {
                    return Err(MetricError::Asymmetric { i, j });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let dij = self.d(i, j);
                for k in 0..n {
                    if self.d(i, k) > dij + self.d(j, k) + METRIC_TOL {
                        return Err(MetricError::TriangleViolation { i, j, k });
                    }
                }
            }
        }
        let diam = self.diameter();
        if diam > 1.0 + METRIC_TOL {
            return Err(MetricError::DiameterTooLarge(diam));
        }
        Ok(())
    }

    /// Parse the text format: first line `n`, then `n` lines of `n`
    /// whitespace-separated distances.
    pub fn parse(text: &str) -> Result<Self, MetricError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (first_no, first) = lines.next().ok_or(MetricError::EmptySpace)?;
        let n: usize = first.trim().parse().map_err(|_| MetricError::Parse {
            line: first_no + 1,
            msg: format!("expected point count, got {:?}", first.trim()),
        })?;
        let mut rows = Vec::with_capacity(n);
        for (no, line) in lines {
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| MetricError::Parse {
                        line: no + 1,
                        msg: format!("bad distance {tok:?}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        if rows.len() != n {
            return Err(MetricError::Parse {
                line: 0,
                msg: format!("header says {n} points but found {} rows", rows.len()),
            });
        }
        Self::new(rows)
    }

    pub fn load(path: &Path) -> Result<Self, MetricError> {
        let text = std::fs::read_to_string(path).map_err(|e| MetricError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{}", self.d(i, j))).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Points on a line with `|x - y|` distances (coordinates in `[0,1]`).
    pub fn from_line(points: &[f64]) -> Result<Self, MetricError> {
        Self::new(points.iter().map(|a| points.iter().map(|b| (a - b).abs()).collect()).collect())
    }

    /// Points in `[0,1]^d` with sup-norm distances.
    pub fn from_points_sup(points: &[Vec<f64>]) -> Result<Self, MetricError> {
        Self::new(
            points.iter().map(|a| points.iter().map(|b| super::cube::sup_distance(a, b)).collect()).collect(),
        )
    }

    /// `k` points with all pairwise distances equal to `gap`.
    pub fn uniform(k: usize, gap: f64) -> Result<Self, MetricError> {
        Self::new((0..k).map(|i| (0..k).map(|j| if i == j { 0.0 } else { gap }).collect()).collect())
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Indices within distance `r` of `center`, ascending.
    pub fn ball(&self, center: usize, r: f64) -> Vec<usize> {
        (0..self.n).filter(|&j| self.d(center, j) <= r).collect()
    }
}

/// Greedy covering over an abstract index set: scan indices in ascending
/// order and open a ball of radius `eps/2` at every point not yet covered.
pub fn greedy_cover_by<F>(n: usize, eps: f64, dist: F) -> Result<Vec<usize>, MetricError>
where
    F: Fn(usize, usize) -> f64,
{
    if n == 0 {
        return Err(MetricError::EmptySpace);
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(MetricError::NonPositiveEps(eps));
    }
    let radius = eps / 2.0;
    let mut covered = vec![false; n];
    let mut centers = Vec::new();
    for i in 0..n {
        if covered[i] {
            continue;
        }
        centers.push(i);
        for (j, c) in covered.iter_mut().enumerate() {
            if !*c && dist(i, j) <= radius {
                *c = true;
            }
        }
    }
    Ok(centers)
}

/// Greedy `eps`-covering: closed balls of radius `eps/2` whose centers are
/// more than `eps/2` apart.
pub fn greedy_cover(space: &FiniteMetricSpace, eps: f64) -> Result<Vec<usize>, MetricError> {
    greedy_cover_by(space.len(), eps, |i, j| space.d(i, j))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DoublingReport {
    pub value: usize,
    /// True when every ball was solved by exact minimum cover; otherwise
    /// `value` is an upper bound from greedy covers.
    pub exact: bool,
}

/// Smallest `C` such that every ball is covered by `C` sets of at most half
/// its diameter. Balls are enumerated over every center and every radius
/// present in the distance matrix.
pub fn doubling_constant(space: &FiniteMetricSpace) -> DoublingReport {
    let n = space.len();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut value = 1;
    let mut exact = true;
    for x in 0..n {
        let mut radii: Vec<f64> = (0..n).map(|j| space.d(x, j)).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        for r in radii {
            let ball = space.ball(x, r);
            if ball.len() <= 1 || !seen.insert(ball.clone()) {
                continue;
            }
            let diam = ball
                .iter()
                .flat_map(|&a| ball.iter().map(move |&b| (a, b)))
                .map(|(a, b)| space.d(a, b))
                .fold(0.0, f64::max);
            if diam == 0.0 {
                continue;
            }
            let half = diam / 2.0;
            let count = if ball.len() <= EXACT_COVER_LIMIT {
                min_clique_partition(&ball, |a, b| space.d(a, b) <= half)
            } else {
                exact = false;
                // balls of radius diam/4 have diameter at most diam/2
                greedy_cover_by(ball.len(), half, |i, j| space.d(ball[i], ball[j]))
                    .map(|c| c.len())
                    .unwrap_or(1)
            };
            value = value.max(count);
        }
    }
    DoublingReport { value, exact }
}

/// Minimum number of groups partitioning `items` such that every pair in a
/// group is `compatible`. Exhaustive backtracking; meant for small inputs.
pub fn min_clique_partition<F>(items: &[usize], compatible: F) -> usize
where
    F: Fn(usize, usize) -> bool,
{
    fn search<F: Fn(usize, usize) -> bool>(
        idx: usize,
        items: &[usize],
        groups: &mut Vec<Vec<usize>>,
        best: &mut usize,
        compatible: &F,
    ) {
        if groups.len() >= *best {
            return;
        }
        if idx == items.len() {
            *best = groups.len();
            return;
        }
        let p = items[idx];
        for g in 0..groups.len() {
            if groups[g].iter().all(|&q| compatible(p, q)) {
                groups[g].push(p);
                search(idx + 1, items, groups, best, compatible);
                groups[g].pop();
            }
        }
        groups.push(vec![p]);
        search(idx + 1, items, groups, best, compatible);
        groups.pop();
    }
    if items.is_empty() {
        return 0;
    }
    let mut best = items.len() + 1;
    search(0, items, &mut Vec::new(), &mut best, &compatible);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_matrices() {
        assert!(matches!(FiniteMetricSpace::new(vec![]), Err(MetricError::EmptySpace)));
        assert!(matches!(
            FiniteMetricSpace::new(vec![vec![0.0, 0.5], vec![0.4, 0.0]]),
            Err(MetricError::Asymmetric { .. })
        ));
        assert!(matches!(FiniteMetricSpace::new(vec![vec![0.1]]), Err(MetricError::NonZeroDiagonal { .. })));
        let tri = vec![vec![0.0, 0.1, 0.9], vec![0.1, 0.0, 0.1], vec![0.9, 0.1, 0.0]];
        assert!(matches!(FiniteMetricSpace::new(tri), Err(MetricError::TriangleViolation { .. })));
        assert!(matches!(
            FiniteMetricSpace::new(vec![vec![0.0, 2.0], vec![2.0, 0.0]]),
            Err(MetricError::DiameterTooLarge(_))
        ));
    }

    #[test]
    fn parse_text_format() {
        let s = FiniteMetricSpace::parse("3\n0 0.5 1\n0.5 0 0.5\n1 0.5 0\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.d(0, 2), 1.0);
        assert_eq!(FiniteMetricSpace::parse(&s.to_text()).unwrap(), s);
        let err = FiniteMetricSpace::parse("2\n0 x\n0.5 0\n").unwrap_err();
        assert!(matches!(err, MetricError::Parse { line: 2, .. }), "{err:?}");
        assert!(FiniteMetricSpace::parse("3\n0 1\n1 0\n").is_err());
    }

    #[test]
    fn greedy_cover_examples() {
        let far = FiniteMetricSpace::from_line(&[0.0, 1.0]).unwrap();
        assert_eq!(greedy_cover(&far, 0.4).unwrap().len(), 2);
        let near = FiniteMetricSpace::from_line(&[0.0, 0.1]).unwrap();
        assert_eq!(greedy_cover(&near, 0.4).unwrap().len(), 1);
        assert!(greedy_cover(&near, 0.0).is_err());
    }

    /// Brute-force check of the cover and packing properties.
    fn cover_ok(space: &FiniteMetricSpace, eps: f64, centers: &[usize]) -> bool {
        let covering = (0..space.len()).all(|p| centers.iter().any(|&c| space.d(p, c) <= eps / 2.0));
        let packing = centers
            .iter()
            .enumerate()
            .all(|(i, &a)| centers[i + 1..].iter().all(|&b| space.d(a, b) > eps / 2.0));
        covering && packing
    }

    #[test]
    fn five_point_grid_cover() {
        let grid = FiniteMetricSpace::from_line(&[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        let centers = greedy_cover(&grid, 0.5).unwrap();
        assert!(cover_ok(&grid, 0.5, &centers));
        // radius 0.25 balls from the left: {0,0.25}, {0.5,0.75}, {1}
        assert_eq!(centers, vec![0, 2, 4]);
    }

    #[test]
    fn doubling_examples() {
        let single = FiniteMetricSpace::new(vec![vec![0.0]]).unwrap();
        assert_eq!(doubling_constant(&single).value, 1);
        // three equidistant points: a ball holding all three has diameter 1,
        // sets of diameter 1/2 are singletons
        let tri = FiniteMetricSpace::uniform(3, 1.0).unwrap();
        assert_eq!(doubling_constant(&tri), DoublingReport { value: 3, exact: true });
        let line: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let r = doubling_constant(&FiniteMetricSpace::from_line(&line).unwrap());
        assert!(r.exact);
        assert!(r.value <= 2, "{r:?}");
        let mut sq = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                sq.push(vec![i as f64 / 2.0, j as f64 / 2.0]);
            }
        }
        let r = doubling_constant(&FiniteMetricSpace::from_points_sup(&sq).unwrap());
        assert!(r.value <= 4, "{r:?}");
    }

    #[test]
    fn clique_partition_small_cases() {
        assert_eq!(min_clique_partition(&[0, 1, 2], |_, _| true), 1);
        assert_eq!(min_clique_partition(&[0, 1, 2], |a, b| a == b), 3);
        // path 0-1-2-3 compatible only with neighbours
        assert_eq!(min_clique_partition(&[0, 1, 2, 3], |a, b| a.abs_diff(b) <= 1), 2);
    }

    proptest! {
        #[test]
        fn greedy_cover_properties(pts in proptest::collection::vec(0.0f64..=1.0, 1..40), eps in 0.01f64..1.5) {
            let space = FiniteMetricSpace::from_line(&pts).unwrap();
            let centers = greedy_cover(&space, eps).unwrap();
            prop_assert!(cover_ok(&space, eps, &centers));
        }
    }
}
