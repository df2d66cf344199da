//! Overlapping square cover of the 2-D embedding.
//!
//! The bounding rectangle of the embedded points is tiled per axis into `b`
//! steps; each bin is widened to `step / (1 - ov)` so adjacent bins overlap
//! by exactly the fraction `ov` of their width. Bin intervals are closed, so
//! a point on a shared boundary belongs to both bins and every point belongs
//! to at least one bin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lens::Embedding2D;

/// Bins per axis and overlap fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverConfig {
    /// Bins per axis (the cover has `b * b` bins).
    pub b: usize,
    /// Overlap fraction between adjacent bins, in `[0, 1)`.
    pub ov: f64,
}

impl CoverConfig {
    pub fn new(b: usize, ov: f64) -> Result<CoverConfig> {
        if b < 1 {
            return Err(Error::InvalidArgument("cover needs b >= 1 bins".into()));
        }
        if !(0.0..1.0).contains(&ov) {
            return Err(Error::InvalidArgument(format!(
                "cover overlap must be in [0, 1), got {ov}"
            )));
        }
        Ok(CoverConfig { b, ov })
    }
}

/// One square bin of the cover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub index: (usize, usize),
    pub center: (f64, f64),
    pub half_width: (f64, f64),
}

/// The cover plus each point's (non-empty) set of containing bins.
#[derive(Debug, Clone)]
pub struct BinAssignment {
    pub config: CoverConfig,
    /// All `b * b` bins in row-major order (first index outer).
    pub bins: Vec<Bin>,
    /// For each point, the sorted bin indices containing it.
    pub memberships: Vec<Vec<(usize, usize)>>,
}

impl BinAssignment {
    pub fn n_points(&self) -> usize {
        self.memberships.len()
    }

    /// Point indices per bin, in ascending order, for occupied bins only;
    /// bins appear in row-major order.
    pub fn occupied_bins(&self) -> Vec<((usize, usize), Vec<usize>)> {
        let b = self.config.b;
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); b * b];
        for (p, bins) in self.memberships.iter().enumerate() {
            for &(i, j) in bins {
                members[i * b + j].push(p);
            }
        }
        members
            .into_iter()
            .enumerate()
            .filter(|(_, m)| !m.is_empty())
            .map(|(flat, m)| ((flat / b, flat % b), m))
            .collect()
    }
}

struct Axis {
    lo: f64,
    step: f64,
    half_width: f64,
    /// Absolute slack for the closed-interval test. Rounding at the
    /// coordinate scale can otherwise evict a boundary point from both of
    /// its bins when the axis range is degenerate.
    tol: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, b: usize, ov: f64) -> Axis {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        let range = max - min;
        let pad = (1e-9 * range.abs()).max(1e-9);
        let lo = min - pad;
        let hi = max + pad;
        let step = (hi - lo) / b as f64;
        let width = step / (1.0 - ov);
        let half_width = width / 2.0;
        let scale = lo.abs().max(hi.abs());
        let tol = (1e-12 * scale).min(0.5 * half_width);
        Axis {
            lo,
            step,
            half_width,
            tol,
        }
    }

    fn center(&self, i: usize) -> f64 {
        self.lo + self.step * (i as f64 + 0.5)
    }

    /// Indices of all bins whose closed interval contains `v`.
    fn bins_of(&self, v: f64, b: usize) -> impl Iterator<Item = usize> + '_ {
        // Candidate range from interval arithmetic, then exact check.
        let first = ((v - self.lo - self.half_width) / self.step - 0.5).floor().max(0.0) as usize;
        let hw = self.half_width + self.tol;
        (first..b).filter(move |&i| (v - self.center(i)).abs() <= hw)
    }
}

/// Assigns every embedded point to all covering bins.
pub fn build_cover(embedding: &Embedding2D, cfg: CoverConfig) -> Result<BinAssignment> {
    let n = embedding.points.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot cover an empty embedding".into()));
    }
    let xs = embedding.points.column(0);
    let ys = embedding.points.column(1);
    let ax = Axis::fit(xs.iter().copied(), cfg.b, cfg.ov);
    let ay = Axis::fit(ys.iter().copied(), cfg.b, cfg.ov);

    let bins: Vec<Bin> = (0..cfg.b)
        .flat_map(|i| {
            (0..cfg.b).map(move |j| (i, j))
        })
        .map(|(i, j)| Bin {
            index: (i, j),
            center: (ax.center(i), ay.center(j)),
            half_width: (ax.half_width, ay.half_width),
        })
        .collect();

    let mut memberships = Vec::with_capacity(n);
    for p in 0..n {
        let x = embedding.points[(p, 0)];
        let y = embedding.points[(p, 1)];
        let xi: Vec<usize> = ax.bins_of(x, cfg.b).collect();
        let yi: Vec<usize> = ay.bins_of(y, cfg.b).collect();
        let mut cells = Vec::with_capacity(xi.len() * yi.len());
        for &i in &xi {
            for &j in &yi {
                cells.push((i, j));
            }
        }
        debug_assert!(!cells.is_empty(), "point {p} escaped the cover");
        memberships.push(cells);
    }
    Ok(BinAssignment {
        config: cfg,
        bins,
        memberships,
    })
}
