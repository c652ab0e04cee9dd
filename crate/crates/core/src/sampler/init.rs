//! Over-specified k-means start for the samplers.

use rand::Rng;

use crate::stats::categorical;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding followed by a few Lloyd passes.
///
/// Returned labels are ordered by decreasing cluster size.
pub(crate) fn kmeans_labels<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<usize> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let k = k.clamp(1, n);
    let mut centers: Vec<Vec<f64>> = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let Some(next) = categorical(&d2, rng) else { break };
        centers.push(points[next].clone());
        let c = centers.last().unwrap();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, c));
        }
    }
    let mut labels = vec![0usize; n];
    for _ in 0..10 {
        for (l, p) in labels.iter_mut().zip(points) {
            *l = (0..centers.len())
                .min_by(|&a, &b| dist2(p, &centers[a]).total_cmp(&dist2(p, &centers[b])))
                .unwrap();
        }
        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (l, p) in labels.iter().zip(points) {
            counts[*l] += 1;
            for (s, x) in sums[*l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for (c, (s, &m)) in centers.iter_mut().zip(sums.iter().zip(&counts)) {
            if m > 0 {
                *c = s.iter().map(|x| x / m as f64).collect();
            }
        }
    }
    let mut counts = vec![0usize; centers.len()];
    for &l in &labels {
        counts[l] += 1;
    }
    let mut order: Vec<usize> = (0..centers.len()).filter(|&c| counts[c] > 0).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut rank = vec![0usize; centers.len()];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    labels.iter().map(|&l| rank[l]).collect()
}
