use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DiagnosisError, Signature};

const MAX_ITERATIONS: usize = 100;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    centers.iter().enumerate().map(|(i, c)| (i, sq_dist(point, c))).fold((0, f64::INFINITY), |best, cur| {
        if cur.1 < best.1 {
            cur
        } else {
            best
        }
    })
}

/// k-means on attribution vectors (L2) with k-means++ seeding.
///
/// Returns one cluster id in `0..k` per signature. Deterministic for a given
/// seed and input order.
pub fn cluster_signatures(signatures: &[Signature], k: usize, seed: u64) -> Result<Vec<usize>, DiagnosisError> {
    if k == 0 {
        return Err(DiagnosisError::InvalidConfig("k must be at least 1".into()));
    }
    if signatures.len() < k {
        return Err(DiagnosisError::TooFewSignatures { k, n: signatures.len() });
    }
    let dim = signatures[0].attributions.len();
    if let Some(s) = signatures.iter().find(|s| s.attributions.len() != dim) {
        return Err(DiagnosisError::DimensionMismatch { expected: dim, got: s.attributions.len() });
    }
    let points: Vec<&[f64]> = signatures.iter().map(|s| s.attributions.as_slice()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centers: Vec<Vec<f64>> = vec![points[rng.random_range(0..points.len())].to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            d2.iter()
                .position(|&w| {
                    target -= w;
                    target < 0.0
                })
                .unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            // All points coincide with a center already.
            rng.random_range(0..points.len())
        };
        centers.push(points[pick].to_vec());
        for (d, p) in d2.iter_mut().zip(&points) {
            *d = d.min(sq_dist(p, centers.last().expect("just pushed")));
        }
    }

    let mut assignment: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
    for _ in 0..MAX_ITERATIONS {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    Ok(assignment)
}
