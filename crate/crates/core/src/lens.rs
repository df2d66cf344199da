//! Lens functions: project the band-power cloud from R^C to R^2.
//!
//! Two lenses are provided; both keep row `i` of the output aligned with
//! row `i` of the input.
//!
//! * [`pca_project`]: projection onto the top eigenvectors of the
//!   column-centered covariance.
//! * [`tsne_project`]: exact (O(N^2) per iteration) t-SNE with perplexity
//!   calibration, early exaggeration and momentum. The affinity matrix and
//!   the seeded descent are split so grid sweeps can calibrate once per
//!   input and descend once per cell.

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LensMethod {
    Pca,
    Tsne,
}

/// A 2-D embedding; row `i` corresponds to input row `i`.
#[derive(Debug, Clone)]
pub struct Embedding2D {
    /// `n x 2`, all coordinates finite.
    pub points: Array2<f64>,
    pub method: LensMethod,
    pub seed: u64,
}

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

/// Projects onto the top `out_dim` (1 or 2) eigenvectors of the
/// column-centered covariance, ordered by descending eigenvalue. Each
/// eigenvector is oriented so its largest-magnitude entry is positive.
/// Degenerate inputs with fewer nonzero eigenvalues than `out_dim` are
/// padded with zero coordinates (with a warning).
pub fn pca_project(x: &Array2<f64>, out_dim: usize) -> Result<Embedding2D> {
    let (n, c) = x.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "pca needs at least 2 rows, got {n}"
        )));
    }
    if !(1..=2).contains(&out_dim) || c < out_dim {
        return Err(Error::InvalidArgument(format!(
            "pca out_dim must be 1 or 2 and at most the column count ({c}), got {out_dim}"
        )));
    }

    let means: Vec<f64> = (0..c).map(|j| x.column(j).sum() / n as f64).collect();
    let mut cov = nalgebra::DMatrix::<f64>::zeros(c, c);
    for a in 0..c {
        for b in a..c {
            let mut acc = 0.0;
            for i in 0..n {
                acc += (x[(i, a)] - means[a]) * (x[(i, b)] - means[b]);
            }
            let v = acc / (n as f64 - 1.0);
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }

    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("finite eigenvalues")
    });

    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tol = 1e-12 * scale.max(1.0);
    let mut points = Array2::zeros((n, 2));
    for (d, &k) in order.iter().take(out_dim).enumerate() {
        if eig.eigenvalues[k] <= tol {
            log::warn!(
                "pca: eigenvalue {} of rank-deficient input is ~0; padding output dimension {d} with zeros",
                eig.eigenvalues[k]
            );
            continue;
        }
        let col = eig.eigenvectors.column(k);
        // Sign convention: largest-magnitude entry positive.
        let mut arg = 0;
        for i in 1..c {
            if col[i].abs() > col[arg].abs() {
                arg = i;
            }
        }
        let flip = if col[arg] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..c {
                acc += (x[(i, j)] - means[j]) * col[j];
            }
            points[(i, d)] = flip * acc;
        }
    }
    Ok(Embedding2D {
        points,
        method: LensMethod::Pca,
        seed: 0,
    })
}

// ---------------------------------------------------------------------------
// t-SNE
// ---------------------------------------------------------------------------

const EXAGGERATION: f64 = 12.0;
const EXAGGERATION_ITERS: usize = 250;
const MOMENTUM_SWITCH_ITER: usize = 250;
const MOMENTUM_EARLY: f64 = 0.5;
const MOMENTUM_LATE: f64 = 0.8;
const P_FLOOR: f64 = 1e-12;
const ENTROPY_TOL: f64 = 1e-5;
const MAX_BISECTIONS: usize = 50;

/// Symmetrized, normalized input affinities for one dataset.
#[derive(Debug, Clone)]
pub struct TsneAffinities {
    n: usize,
    /// Row-major `n x n`, symmetric, floored at `P_FLOOR`, zero diagonal
    /// before flooring.
    p: Vec<f64>,
}

impl TsneAffinities {
    pub fn n_points(&self) -> usize {
        self.n
    }
}

/// Objective values tracked during the descent (against the un-exaggerated
/// affinities).
#[derive(Debug, Clone, Default)]
pub struct TsneStats {
    pub kl_history: Vec<f64>,
}

impl TsneStats {
    pub fn kl_at_exaggeration_end(&self) -> Option<f64> {
        self.kl_history.get(EXAGGERATION_ITERS - 1).copied()
    }

    pub fn final_kl(&self) -> Option<f64> {
        self.kl_history.last().copied()
    }
}

fn pairwise_sq_dists(x: &Array2<f64>) -> Vec<f64> {
    let (n, c) = x.dim();
    let data = x.as_slice().expect("standard layout");
    (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let row_i = &data[i * c..(i + 1) * c];
            (0..n).map(move |j| {
                let row_j = &data[j * c..(j + 1) * c];
                row_i
                    .iter()
                    .zip(row_j)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
        })
        .collect()
}

/// Conditional affinities P(j|i) with per-row bandwidths bisected until the
/// row entropy matches ln(perplexity) within `ENTROPY_TOL` nats.
fn conditional_affinities(d2: &[f64], n: usize, perplexity: f64) -> Vec<f64> {
    let target_h = perplexity.ln();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = &d2[i * n..(i + 1) * n];
            // Shift by the off-diagonal minimum for numerical stability;
            // the normalized distribution and its entropy are unchanged.
            let shift = row
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .fold(f64::INFINITY, f64::min);
            let eval = |beta: f64| -> (f64, Vec<f64>) {
                let mut p = vec![0.0; n];
                let mut sum = 0.0;
                let mut weighted = 0.0;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let shifted = row[j] - shift;
                    let w = (-beta * shifted).exp();
                    p[j] = w;
                    sum += w;
                    weighted += shifted * w;
                }
                if sum <= 0.0 {
                    return (f64::NEG_INFINITY, p);
                }
                let h = sum.ln() + beta * weighted / sum;
                for v in &mut p {
                    *v /= sum;
                }
                (h, p)
            };

            let mut beta = 1.0;
            let (mut h, mut p) = eval(beta);
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for _ in 0..MAX_BISECTIONS {
                if (h - target_h).abs() <= ENTROPY_TOL {
                    break;
                }
                if h > target_h {
                    // Entropy too high: sharpen (raise beta).
                    lo = beta;
                    beta = if hi.is_finite() { 0.5 * (beta + hi) } else { beta * 2.0 };
                } else {
                    hi = beta;
                    beta = if lo.is_finite() { 0.5 * (beta + lo) } else { beta * 0.5 };
                }
                let r = eval(beta);
                h = r.0;
                p = r.1;
            }
            p
        })
        .collect();

    let mut flat = vec![0.0; n * n];
    for (i, row) in rows.into_iter().enumerate() {
        flat[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    flat
}

/// Calibrates and symmetrizes the input affinities for `x`.
pub fn tsne_affinities(x: &Array2<f64>, perplexity: f64) -> Result<TsneAffinities> {
    let n = x.nrows();
    if !(perplexity > 0.0) || 3.0 * perplexity >= n as f64 {
        return Err(Error::PerplexityInfeasible { perplexity, n });
    }
    let d2 = pairwise_sq_dists(x);
    let cond = conditional_affinities(&d2, n, perplexity);
    let mut p = vec![0.0; n * n];
    let denom = 2.0 * n as f64;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            p[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / denom).max(P_FLOOR);
        }
    }
    Ok(TsneAffinities { n, p })
}

/// Seeded gradient descent on precomputed affinities. Iterations are
/// sequential; within an iteration, per-row work runs in parallel with the
/// reduction order fixed by row index, so results do not depend on the
/// worker count.
pub fn tsne_descend(
    aff: &TsneAffinities,
    iters: usize,
    learning_rate: f64,
    seed: u64,
    record_kl: bool,
) -> (Array2<f64>, TsneStats) {
    let n = aff.n;
    let p = &aff.p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut yx: Vec<f64> = Vec::with_capacity(n);
    let mut yy: Vec<f64> = Vec::with_capacity(n);
    for _ in 0..n {
        yx.push(1e-4 * rng.sample::<f64, _>(StandardNormal));
        yy.push(1e-4 * rng.sample::<f64, _>(StandardNormal));
    }
    let mut ux = vec![0.0; n];
    let mut uy = vec![0.0; n];
    let mut stats = TsneStats::default();

    for iter in 0..iters {
        let exag = if iter < EXAGGERATION_ITERS { EXAGGERATION } else { 1.0 };
        let momentum = if iter < MOMENTUM_SWITCH_ITER {
            MOMENTUM_EARLY
        } else {
            MOMENTUM_LATE
        };

        // Pass 1: student-t normalization constant.
        let row_sums: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| student_row_sum(yx[i], yy[i], &yx, &yy))
            .collect();
        // Each row includes its own j == i term (exactly 1).
        let z = row_sums.iter().sum::<f64>() - n as f64;

        // Pass 2: gradient. The j == i term contributes nothing (dx = dy = 0).
        let grads: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let prow = &p[i * n..(i + 1) * n];
                let (gx, gy) = gradient_row(yx[i], yy[i], &yx, &yy, prow, z, exag);
                (4.0 * gx, 4.0 * gy)
            })
            .collect();

        for i in 0..n {
            ux[i] = momentum * ux[i] - learning_rate * grads[i].0;
            uy[i] = momentum * uy[i] - learning_rate * grads[i].1;
            yx[i] += ux[i];
            yy[i] += uy[i];
        }
        let mx = yx.iter().sum::<f64>() / n as f64;
        let my = yy.iter().sum::<f64>() / n as f64;
        for i in 0..n {
            yx[i] -= mx;
            yy[i] -= my;
        }

        if record_kl {
            stats.kl_history.push(kl_divergence(p, n, &yx, &yy));
        }
    }

    let mut points = Array2::zeros((n, 2));
    for i in 0..n {
        points[(i, 0)] = yx[i];
        points[(i, 1)] = yy[i];
    }
    (points, stats)
}

/// One row of the student-t kernel sum, including the j == i term (which is
/// exactly 1). Four independent accumulators keep the summation order fixed
/// while letting the divisions pipeline.
#[inline]
fn student_row_sum(xi: f64, yi: f64, yx: &[f64], yy: &[f64]) -> f64 {
    let n = yx.len();
    let mut acc = [0.0f64; 4];
    let mut j = 0;
    while j + 4 <= n {
        for (lane, a) in acc.iter_mut().enumerate() {
            let dx = xi - yx[j + lane];
            let dy = yi - yy[j + lane];
            *a += 1.0 / (1.0 + dx * dx + dy * dy);
        }
        j += 4;
    }
    while j < n {
        let dx = xi - yx[j];
        let dy = yi - yy[j];
        acc[0] += 1.0 / (1.0 + dx * dx + dy * dy);
        j += 1;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// One row of the t-SNE gradient (before the factor 4).
#[inline]
fn gradient_row(
    xi: f64,
    yi: f64,
    yx: &[f64],
    yy: &[f64],
    prow: &[f64],
    z: f64,
    exag: f64,
) -> (f64, f64) {
    let n = yx.len();
    let inv_z = 1.0 / z;
    let mut gx = [0.0f64; 4];
    let mut gy = [0.0f64; 4];
    let mut j = 0;
    while j + 4 <= n {
        for lane in 0..4 {
            let dx = xi - yx[j + lane];
            let dy = yi - yy[j + lane];
            let num = 1.0 / (1.0 + dx * dx + dy * dy);
            let q = (num * inv_z).max(P_FLOOR);
            let f = (exag * prow[j + lane] - q) * num;
            gx[lane] += f * dx;
            gy[lane] += f * dy;
        }
        j += 4;
    }
    while j < n {
        let dx = xi - yx[j];
        let dy = yi - yy[j];
        let num = 1.0 / (1.0 + dx * dx + dy * dy);
        let q = (num * inv_z).max(P_FLOOR);
        let f = (exag * prow[j] - q) * num;
        gx[0] += f * dx;
        gy[0] += f * dy;
        j += 1;
    }
    ((gx[0] + gx[1]) + (gx[2] + gx[3]), (gy[0] + gy[1]) + (gy[2] + gy[3]))
}

/// KL(P || Q) against the un-exaggerated affinities.
fn kl_divergence(p: &[f64], n: usize, yx: &[f64], yy: &[f64]) -> f64 {
    let row_sums: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| student_row_sum(yx[i], yy[i], yx, yy))
        .collect();
    let z = row_sums.iter().sum::<f64>() - n as f64;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let pij = p[i * n + j];
                let dx = yx[i] - yx[j];
                let dy = yy[i] - yy[j];
                let num = 1.0 / (1.0 + dx * dx + dy * dy);
                let q = (num / z).max(P_FLOOR);
                acc += pij * (pij / q).ln();
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// Full t-SNE: calibrate affinities, then run the seeded descent.
pub fn tsne_project(
    x: &Array2<f64>,
    perplexity: f64,
    iters: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<Embedding2D> {
    let (points, _) = tsne_descend(
        &tsne_affinities(x, perplexity)?,
        iters,
        learning_rate,
        seed,
        false,
    );
    Ok(Embedding2D {
        points,
        method: LensMethod::Tsne,
        seed,
    })
}

/// As [`tsne_project`] but also returns the per-iteration KL divergence.
pub fn tsne_project_with_stats(
    x: &Array2<f64>,
    perplexity: f64,
    iters: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<(Embedding2D, TsneStats)> {
    let (points, stats) = tsne_descend(
        &tsne_affinities(x, perplexity)?,
        iters,
        learning_rate,
        seed,
        true,
    );
    Ok((
        Embedding2D {
            points,
            method: LensMethod::Tsne,
            seed,
        },
        stats,
    ))
}
