//! Cluster extraction: connected components of the `d <= delta` graph on
//! the final positions.

use ndarray::Array2;
use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::geometry::{frechet_mean, raw, BallPoint, FrechetOptions};
use crate::kernel::check_points;

/// Labels `0..num_clusters` (numbered by first member index) plus one mode per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<M> {
    pub labels: Vec<usize>,
    pub num_clusters: usize,
    pub modes: Vec<M>,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("delta must be positive, got {delta}")))
    }
}

/// Components of the graph joining every pair within `delta`, as labels
/// numbered in order of each component's smallest index.
fn components(n: usize, mut within: impl FnMut(usize, usize) -> Result<bool>) -> Result<(Vec<usize>, usize)> {
    let mut uf = UnionFind::<usize>::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if within(i, j)? {
                uf.union(i, j);
            }
        }
    }
    let mut root_label = vec![usize::MAX; n];
    let mut labels = Vec::with_capacity(n);
    let mut next = 0;
    for i in 0..n {
        let r = uf.find(i);
        if root_label[r] == usize::MAX {
            root_label[r] = next;
            next += 1;
        }
        labels.push(root_label[r]);
    }
    Ok((labels, next))
}

/// Hyperbolic cluster assignment. Modes are uniform-weight Fréchet means
/// of each cluster's members (falling back to the last Karcher iterate if
/// it has not met tolerance).
pub fn assign_clusters(points: &[BallPoint], delta: f64) -> Result<Assignment<BallPoint>> {
    check_delta(delta)?;
    check_points(points)?;
    let kappa = points[0].curvature().kappa();
    let (labels, k) = components(points.len(), |i, j| {
        let d = raw::dist(points[i].coords(), points[j].coords(), kappa)
            .ok_or_else(|| Error::degenerate(format!("distance between points {i} and {j} hit the boundary")))?;
        Ok(d <= delta)
    })?;
    let mut modes = Vec::with_capacity(k);
    for c in 0..k {
        let members: Vec<BallPoint> = points
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l == c)
            .map(|(p, _)| p.clone())
            .collect();
        let w = vec![1.0 / members.len() as f64; members.len()];
        let mode = match frechet_mean(&members, &w, FrechetOptions::default()) {
            Ok(m) => m,
            Err(Error::ConvergenceFailure { last, .. }) => *last,
            Err(e) => return Err(e),
        };
        modes.push(mode);
    }
    Ok(Assignment {
        labels,
        num_clusters: k,
        modes,
    })
}

/// Euclidean cluster assignment; modes are member centroids.
pub fn assign_clusters_euclidean(points: &Array2<f64>, delta: f64) -> Result<Assignment<Vec<f64>>> {
    check_delta(delta)?;
    let (labels, k) = components(points.nrows(), |i, j| {
        let d: f64 = points
            .row(i)
            .iter()
            .zip(points.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(d.sqrt() <= delta)
    })?;
    let dim = points.ncols();
    let mut modes = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (row, &l) in points.rows().into_iter().zip(&labels) {
        modes[l].iter_mut().zip(row).for_each(|(m, v)| *m += v);
        counts[l] += 1;
    }
    for (m, &n) in modes.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= n as f64);
    }
    Ok(Assignment {
        labels,
        num_clusters: k,
        modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dist, Curvature};
    use std::collections::VecDeque;

    fn unit(coords: &[f64]) -> BallPoint {
        BallPoint::new(coords.to_vec(), Curvature::UNIT).unwrap()
    }

    fn bfs_components(points: &[BallPoint], delta: f64) -> Vec<usize> {
        let n = points.len();
        let mut labels = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if labels[s] != usize::MAX {
                continue;
            }
            labels[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for v in 0..n {
                    if labels[v] == usize::MAX && dist(&points[u], &points[v]).unwrap() <= delta {
                        labels[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        labels
    }

    #[test]
    fn large_delta_gives_one_cluster() {
        let pts = [unit(&[0.1, 0.0]), unit(&[-0.5, 0.2]), unit(&[0.3, 0.6])];
        let a = assign_clusters(&pts, 100.0).unwrap();
        assert_eq!(a.num_clusters, 1);
        assert_eq!(a.labels, vec![0, 0, 0]);
    }

    #[test]
    fn tiny_delta_gives_singletons() {
        let pts = [unit(&[0.1, 0.0]), unit(&[-0.5, 0.2]), unit(&[0.3, 0.6])];
        let a = assign_clusters(&pts, 1e-6).unwrap();
        assert_eq!(a.num_clusters, 3);
        assert_eq!(a.labels, vec![0, 1, 2]);
        for (m, p) in a.modes.iter().zip(&pts) {
            assert_eq!(m, p);
        }
    }

    #[test]
    fn chains_are_transitive() {
        let pts = [
            unit(&[0.0, 0.0]),
            unit(&[0.1, 0.0]),
            unit(&[0.2, 0.0]),
            unit(&[-0.6, 0.0]),
        ];
        let delta = 0.25;
        assert!(dist(&pts[0], &pts[1]).unwrap() <= delta);
        assert!(dist(&pts[1], &pts[2]).unwrap() <= delta);
        assert!(dist(&pts[0], &pts[2]).unwrap() > delta);
        let a = assign_clusters(&pts, delta).unwrap();
        assert_eq!(a.labels, bfs_components(&pts, delta));
        assert_eq!(a.labels, vec![0, 0, 0, 1]);
    }

    #[test]
    fn labels_follow_first_appearance() {
        let pts = [unit(&[0.5, 0.0]), unit(&[-0.5, 0.0]), unit(&[0.5, 0.001])];
        let a = assign_clusters(&pts, 0.1).unwrap();
        assert_eq!(a.labels, vec![0, 1, 0]);
    }

    #[test]
    fn euclidean_assignment_and_centroids() {
        let pts = ndarray::array![[0.0, 0.0], [0.0, 1.0], [5.0, 5.0]];
        let a = assign_clusters_euclidean(&pts, 1.0).unwrap();
        assert_eq!(a.labels, vec![0, 0, 1]);
        assert_eq!(a.modes, vec![vec![0.0, 0.5], vec![5.0, 5.0]]);
        assert!(assign_clusters_euclidean(&pts, 0.0).is_err());
    }
}
