//! 2D Gaussian mixture fitting by expectation maximization with full
//! covariances, used to turn thresholded pixels into location estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet};

/// Additive diagonal floor keeping every covariance positive definite.
const COVARIANCE_FLOOR: f64 = 1e-6;

/// One Gaussian component with its mixture weight. The covariance is a
/// symmetric positive-definite 2×2 matrix in pixel² units.
#[derive(Debug, Clone, Copy)]
pub struct GaussianComponent {
    pub mean: Point,
    pub covariance: [[f64; 2]; 2],
    pub weight: f64,
}

impl GaussianComponent {
    fn ln_pdf(&self, p: Point) -> f64 {
        let c = &self.covariance;
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        let dr = p.row() - self.mean.row();
        let dc = p.col() - self.mean.col();
        let maha = (c[1][1] * dr * dr - 2.0 * c[0][1] * dr * dc + c[0][0] * dc * dc) / det;
        -(2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln() - 0.5 * maha
    }
}

/// A fitted k-component 2D Gaussian mixture. `log_likelihood` holds the
/// per-iteration EM trace, which is non-decreasing.
#[derive(Debug, Clone)]
pub struct GaussianMixture2D {
    pub components: Vec<GaussianComponent>,
    pub log_likelihood: Vec<f64>,
}

impl GaussianMixture2D {
    pub fn means(&self) -> PointSet {
        self.components.iter().map(|c| c.mean).collect()
    }
}

/// Farthest-point seeding: a seeded random first center, then repeatedly
/// the point farthest from every chosen center. Ties break toward the
/// lowest index.
fn seed_means(points: &[Point], k: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..points.len());
    let mut chosen = vec![points[first]];
    let mut min_dist_sq: Vec<f64> = points
        .iter()
        .map(|&p| dist_sq(p, points[first]))
        .collect();
    while chosen.len() < k {
        let mut best = 0;
        let mut best_dist = f64::NEG_INFINITY;
        for (i, &d) in min_dist_sq.iter().enumerate() {
            if d > best_dist {
                best_dist = d;
                best = i;
            }
        }
        let next = points[best];
        chosen.push(next);
        for (i, &p) in points.iter().enumerate() {
            let d = dist_sq(p, next);
            if d < min_dist_sq[i] {
                min_dist_sq[i] = d;
            }
        }
    }
    chosen
}

fn dist_sq(a: Point, b: Point) -> f64 {
    let dr = a.row() - b.row();
    let dc = a.col() - b.col();
    dr * dr + dc * dc
}

/// Fits a k-component Gaussian mixture to 2D points by EM.
///
/// Initialization uses farthest-point seeding from `seed`; covariances
/// carry a `1e-6·I` floor. EM stops at `tol` log-likelihood change, at
/// `max_iter`, or when an iteration would decrease the likelihood (the
/// previous parameters are kept, so the trace stays monotone).
pub fn fit_gmm(
    points: &PointSet,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<GaussianMixture2D> {
    if k == 0 {
        return Err(Error::InvalidParam {
            name: "k",
            reason: "at least one component is required".into(),
        });
    }
    let n = points.len();
    if n < k {
        return Err(Error::TooFewPoints { k, n });
    }
    let pts = points.points();

    // Overall scatter sets the initial isotropic covariance scale.
    let centroid_row = pts.iter().map(Point::row).sum::<f64>() / n as f64;
    let centroid_col = pts.iter().map(Point::col).sum::<f64>() / n as f64;
    let scatter = pts
        .iter()
        .map(|p| {
            let dr = p.row() - centroid_row;
            let dc = p.col() - centroid_col;
            dr * dr + dc * dc
        })
        .sum::<f64>()
        / n as f64;
    let initial_variance = (scatter / k as f64).max(0.25);

    let mut components: Vec<GaussianComponent> = seed_means(pts, k, seed)
        .into_iter()
        .map(|mean| GaussianComponent {
            mean,
            covariance: [[initial_variance, 0.0], [0.0, initial_variance]],
            weight: 1.0 / k as f64,
        })
        .collect();

    let mut log_likelihood = Vec::new();
    let mut previous = f64::NEG_INFINITY;
    let mut previous_components = components.clone();
    let mut responsibilities = vec![0.0; n * k];

    for _ in 0..max_iter {
        // E-step in log space.
        let mut ll = 0.0;
        for (i, &p) in pts.iter().enumerate() {
            let row = &mut responsibilities[i * k..(i + 1) * k];
            let mut hi = f64::NEG_INFINITY;
            for (c, comp) in components.iter().enumerate() {
                row[c] = comp.weight.ln() + comp.ln_pdf(p);
                hi = hi.max(row[c]);
            }
            let lse = hi + row.iter().map(|&l| (l - hi).exp()).sum::<f64>().ln();
            for l in row.iter_mut() {
                *l = (*l - lse).exp();
            }
            ll += lse;
        }

        if ll + 1e-12 < previous {
            // The covariance floor makes the M-step inexact; keep the
            // better parameters.
            components = previous_components;
            break;
        }
        log_likelihood.push(ll);
        if (ll - previous).abs() < tol {
            break;
        }
        previous = ll;
        previous_components = components.clone();

        // M-step.
        for c in 0..k {
            let total: f64 = (0..n).map(|i| responsibilities[i * k + c]).sum();
            if total < 1e-12 {
                // Starved component; leave it untouched.
                continue;
            }
            let mut mean_row = 0.0;
            let mut mean_col = 0.0;
            for (i, &p) in pts.iter().enumerate() {
                let r = responsibilities[i * k + c];
                mean_row += r * p.row();
                mean_col += r * p.col();
            }
            mean_row /= total;
            mean_col /= total;

            let mut crr = 0.0;
            let mut crc = 0.0;
            let mut ccc = 0.0;
            for (i, &p) in pts.iter().enumerate() {
                let r = responsibilities[i * k + c];
                let dr = p.row() - mean_row;
                let dc = p.col() - mean_col;
                crr += r * dr * dr;
                crc += r * dr * dc;
                ccc += r * dc * dc;
            }
            components[c] = GaussianComponent {
                mean: Point::new(mean_row, mean_col)?,
                covariance: [
                    [crr / total + COVARIANCE_FLOOR, crc / total],
                    [crc / total, ccc / total + COVARIANCE_FLOOR],
                ],
                weight: total / n as f64,
            };
        }
    }

    Ok(GaussianMixture2D {
        components,
        log_likelihood,
    })
}
