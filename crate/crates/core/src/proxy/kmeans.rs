//! Lloyd's k-means with k-means++ seeding, fully deterministic per seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::squared_distance;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig {
            k,
            seed,
            max_iter: 200,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Clustering {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances to each point's own centroid.
    pub inertia: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Inertia after each assignment step; non-increasing by
    /// construction of Lloyd iterations.
    pub inertia_trace: Vec<f64>,
}

fn nearest_centroid(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

/// k-means++ seeding: first centroid uniform, the rest sampled with
/// probability proportional to squared distance from the chosen set.
fn seed_centroids(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..n)].clone());
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, w) in d2.iter().enumerate() {
                r -= w;
                if r <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining points coincide with a centroid.
            rng.random_range(0..n)
        };
        centroids.push(points[next].clone());
        for (i, p) in points.iter().enumerate() {
            let d = squared_distance(p, centroids.last().unwrap());
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centroids
}

/// Lloyd iterations until centroid movement falls below `tol` or
/// `max_iter` is reached. An emptied cluster is re-seeded at the point
/// farthest from its current centroid (lowest index on ties), keeping
/// the run deterministic.
pub fn kmeans(points: &[Vec<f64>], config: &KMeansConfig) -> Result<Clustering> {
    let n = points.len();
    let k = config.k;
    if k == 0 || k > n {
        return Err(Error::KMeans(format!("k must be in 1..={n}, got {k}")));
    }
    let p = points[0].len();
    if points.iter().any(|r| r.len() != p) {
        return Err(Error::KMeans("inconsistent point dimensions".into()));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::KMeans("points must be finite".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centroids = seed_centroids(points, k, &mut rng);
    let mut assignments = vec![0usize; n];
    let mut inertia_trace = Vec::new();
    let mut iterations = 0;

    loop {
        // Assignment step.
        let mut inertia = 0.0;
        for (i, point) in points.iter().enumerate() {
            let (c, d) = nearest_centroid(point, &centroids);
            assignments[i] = c;
            inertia += d;
        }
        inertia_trace.push(inertia);

        if iterations >= config.max_iter {
            break;
        }
        iterations += 1;

        // Update step.
        let mut sums = vec![vec![0.0; p]; k];
        let mut counts = vec![0usize; k];
        for (i, point) in points.iter().enumerate() {
            counts[assignments[i]] += 1;
            for (s, v) in sums[assignments[i]].iter_mut().zip(point) {
                *s += v;
            }
        }
        let mut new_centroids = Vec::with_capacity(k);
        for c in 0..k {
            if counts[c] > 0 {
                new_centroids.push(sums[c].iter().map(|s| s / counts[c] as f64).collect());
            } else {
                // Re-seed at the farthest point from its own centroid.
                let far = points
                    .iter()
                    .enumerate()
                    .map(|(i, pt)| (i, squared_distance(pt, &centroids[assignments[i]])))
                    .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(b.0.cmp(&a.0)))
                    .map(|(i, _)| i)
                    .unwrap();
                new_centroids.push(points[far].clone());
            }
        }

        let movement = centroids
            .iter()
            .zip(&new_centroids)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = new_centroids;
        if movement < config.tol {
            // One final assignment pass against the settled centroids.
            let mut inertia = 0.0;
            for (i, point) in points.iter().enumerate() {
                let (c, d) = nearest_centroid(point, &centroids);
                assignments[i] = c;
                inertia += d;
            }
            inertia_trace.push(inertia);
            break;
        }
    }

    Ok(Clustering {
        assignments,
        inertia: *inertia_trace.last().unwrap(),
        centroids,
        iterations,
        seed: config.seed,
        inertia_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::mean;

    fn grid_points() -> Vec<Vec<f64>> {
        (0..12)
            .map(|i| vec![(i % 4) as f64, (i / 4) as f64 * 3.0])
            .collect()
    }

    #[test]
    fn k_one_gives_coordinate_means_and_total_variance() {
        let pts = grid_points();
        let c = kmeans(&pts, &KMeansConfig::new(1, 7)).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
        assert!((c.centroids[0][0] - mean(&xs)).abs() < 1e-12);
        assert!((c.centroids[0][1] - mean(&ys)).abs() < 1e-12);
        let expected: f64 = pts
            .iter()
            .map(|p| squared_distance(p, &c.centroids[0]))
            .sum();
        assert!((c.inertia - expected).abs() < 1e-9);
    }

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let pts = grid_points();
        let c = kmeans(&pts, &KMeansConfig::new(pts.len(), 3)).unwrap();
        assert!(c.inertia < 1e-18);
    }

    #[test]
    fn fixed_seed_is_bit_reproducible() {
        let pts = grid_points();
        let a = kmeans(&pts, &KMeansConfig::new(3, 42)).unwrap();
        let b = kmeans(&pts, &KMeansConfig::new(3, 42)).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.centroids, b.centroids);
        assert_eq!(a.inertia.to_bits(), b.inertia.to_bits());
    }

    #[test]
    fn inertia_trace_is_monotone_non_increasing() {
        let pts = grid_points();
        for seed in 0..10 {
            let c = kmeans(&pts, &KMeansConfig::new(3, seed)).unwrap();
            for w in c.inertia_trace.windows(2) {
                assert!(
                    w[1] <= w[0] * (1.0 + 1e-12) + 1e-12,
                    "inertia increased: {:?}",
                    c.inertia_trace
                );
            }
        }
    }

    #[test]
    fn rejects_bad_k() {
        let pts = grid_points();
        assert!(kmeans(&pts, &KMeansConfig::new(0, 1)).is_err());
        assert!(kmeans(&pts, &KMeansConfig::new(13, 1)).is_err());
    }
}
