//! Box-counting complexity of a boundary.
//!
//! Coordinates are normalized so the profile's bounding-box diagonal is 1,
//! which makes the grid spacing `eps` dimensionless in (0, 1) and the ratio
//! `-log N(eps) / log eps` well defined and positive. The grid is anchored at
//! the bounding-box min corner; an optional mode averages the count over
//! random grid offsets to wash out anchoring noise.

use crate::geom::Vec2;
use crate::profile::Profile;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ComplexityError {
    #[error("epsilon must lie strictly in (0, 1), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("scale range must satisfy 0 < min < max < 1, got ({0}, {1})")]
    BadScaleRange(f64, f64),
    #[error("need at least 4 scales, got {0}")]
    TooFewScales(usize),
}

/// Sampled dimension curve. `epsilons` is descending; `counts` holds the
/// intercepted-cell counts (integral in anchored mode, fractional means in
/// offset-averaged mode); `dbc[i] = -log(counts[i]) / log(epsilons[i])`;
/// `slope_dbc` is a least-squares slope of `log N` versus `log(1/eps)` over a
/// sliding window of 5 consecutive scales.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxCountCurve {
    pub epsilons: Vec<f64>,
    pub counts: Vec<f64>,
    pub dbc: Vec<f64>,
    pub slope_dbc: Vec<f64>,
}

/// Characteristic scales extracted from a dimension curve, in the profile's
/// own (physical) units.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub d_max: f64,
    pub d_min: f64,
    pub converged: bool,
    pub tolerance: f64,
}

/// Grid anchoring policy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridOffsets {
    /// Deterministic anchor at the bounding-box min corner.
    Anchored,
    /// Mean count over `count` uniformly random grid offsets.
    Averaged { count: usize, seed: u64 },
}

/// Normalized vertices (bbox min at the origin, diagonal scaled to 1).
fn normalized_vertices(profile: &Profile) -> Vec<Vec2> {
    let bb = profile.bbox();
    let diag = bb.diagonal();
    profile.vertices().iter().map(|v| (*v - bb.min) / diag).collect()
}

/// Counts grid cells of side `eps` intersected by the closed boundary
/// polyline. A cell `(i, j)` covers the half-open square
/// `[i eps, (i+1) eps) x [j eps, (j+1) eps)`, i.e. the cells are exactly the
/// preimages of `floor(p / eps)`, and a cell counts when the boundary passes
/// through it. Segment-cell incidence is decided by exact interval clipping,
/// never by vertex sampling, so coarse polylines do not undercount.
pub fn box_count(profile: &Profile, eps: f64) -> Result<u64, ComplexityError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ComplexityError::EpsilonOutOfRange(eps));
    }
    Ok(count_cells(&normalized_vertices(profile), eps, Vec2::ZERO))
}

/// Like [`box_count`] with the grid shifted by `offset` (in cell fractions,
/// components in `[0, 1)`).
pub fn box_count_offset(profile: &Profile, eps: f64, offset: Vec2) -> Result<u64, ComplexityError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ComplexityError::EpsilonOutOfRange(eps));
    }
    Ok(count_cells(&normalized_vertices(profile), eps, offset * eps))
}

fn count_cells(verts: &[Vec2], eps: f64, shift: Vec2) -> u64 {
    let n = verts.len();
    let mut cells: HashSet<(i64, i64)> = HashSet::new();
    for i in 0..n {
        let a = verts[i] + shift;
        let b = verts[(i + 1) % n] + shift;
        segment_cells(a, b, eps, &mut cells);
    }
    cells.len() as u64
}

fn cell_of(p: Vec2, eps: f64) -> (i64, i64) {
    ((p.x / eps).floor() as i64, (p.y / eps).floor() as i64)
}

/// Inserts every cell whose half-open square contains a point of `[a, b]`.
fn segment_cells(a: Vec2, b: Vec2, eps: f64, cells: &mut HashSet<(i64, i64)>) {
    let (ia, ja) = cell_of(a, eps);
    let (ib, jb) = cell_of(b, eps);
    let (i0, i1) = (ia.min(ib), ia.max(ib));
    let (j0, j1) = (ja.min(jb), ja.max(jb));
    let d = b - a;
    for i in i0..=i1 {
        for j in j0..=j1 {
            // clip the segment's parameter interval to the closed cell square
            let mut t0 = 0.0f64;
            let mut t1 = 1.0f64;
            let mut feasible = true;
            for (p0, dir, lo, hi) in [
                (a.x, d.x, i as f64 * eps, (i + 1) as f64 * eps),
                (a.y, d.y, j as f64 * eps, (j + 1) as f64 * eps),
            ] {
                if dir == 0.0 {
                    if p0 < lo || p0 > hi {
                        feasible = false;
                        break;
                    }
                } else {
                    let (ta, tb) = ((lo - p0) / dir, (hi - p0) / dir);
                    let (ta, tb) = if ta <= tb { (ta, tb) } else { (tb, ta) };
                    t0 = t0.max(ta);
                    t1 = t1.min(tb);
                    if t0 > t1 {
                        feasible = false;
                        break;
                    }
                }
            }
            if !feasible {
                continue;
            }
            // the clipped chord may lie on the cell's open upper boundary, in
            // which case its points belong to the neighbouring cell; let the
            // floor of the chord midpoint arbitrate
            let mid = a + d * (0.5 * (t0 + t1));
            if cell_of(mid, eps) == (i, j) {
                cells.insert((i, j));
            }
        }
    }
}

/// Log-uniform scale sweep with the deterministic anchored grid.
pub fn dbc_curve(
    profile: &Profile,
    n_scales: usize,
    eps_range: (f64, f64),
) -> Result<BoxCountCurve, ComplexityError> {
    dbc_curve_with(profile, n_scales, eps_range, GridOffsets::Anchored)
}

pub fn dbc_curve_with(
    profile: &Profile,
    n_scales: usize,
    (eps_min, eps_max): (f64, f64),
    offsets: GridOffsets,
) -> Result<BoxCountCurve, ComplexityError> {
    if n_scales < 4 {
        return Err(ComplexityError::TooFewScales(n_scales));
    }
    if !(eps_min > 0.0 && eps_min < eps_max && eps_max < 1.0) {
        return Err(ComplexityError::BadScaleRange(eps_min, eps_max));
    }
    let verts = normalized_vertices(profile);
    let log_max = eps_max.ln();
    let log_min = eps_min.ln();
    let epsilons: Vec<f64> = (0..n_scales)
        .map(|k| {
            let f = k as f64 / (n_scales - 1) as f64;
            (log_max + f * (log_min - log_max)).exp()
        })
        .collect();

    let counts: Vec<f64> = match offsets {
        GridOffsets::Anchored => epsilons
            .iter()
            .map(|&eps| count_cells(&verts, eps, Vec2::ZERO) as f64)
            .collect(),
        GridOffsets::Averaged { count, seed } => {
            use rand::SeedableRng;
            let count = count.max(1);
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let shifts: Vec<Vec2> =
                (0..count).map(|_| Vec2::new(rng.gen::<f64>(), rng.gen::<f64>())).collect();
            epsilons
                .iter()
                .map(|&eps| {
                    let total: u64 = shifts
                        .iter()
                        .map(|s| count_cells(&verts, eps, *s * eps))
                        .sum();
                    total as f64 / count as f64
                })
                .collect()
        }
    };

    let dbc: Vec<f64> =
        epsilons.iter().zip(&counts).map(|(&e, &n)| -n.ln() / e.ln()).collect();

    let window = 5.min(n_scales);
    let xs: Vec<f64> = epsilons.iter().map(|e| -e.ln()).collect(); // log(1/eps)
    let ys: Vec<f64> = counts.iter().map(|n| n.ln()).collect();
    let slope_dbc = (0..n_scales)
        .map(|i| {
            let start = i.saturating_sub(window / 2).min(n_scales - window);
            least_squares_slope(&xs[start..start + window], &ys[start..start + window])
        })
        .collect();

    Ok(BoxCountCurve { epsilons, counts, dbc, slope_dbc })
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        num += (xi - mx) * (yi - my);
        den += (xi - mx) * (xi - mx);
    }
    num / den
}

/// Extracts the synthesis scales from a dimension curve.
///
/// `d_max` is the profile's largest vertex-pair distance in physical units.
/// `d_min` is the largest physical grid scale such that the direct ratio stays
/// within `1 +/- tolerance` at that scale and every finer sampled scale; when
/// no sampled suffix satisfies the band, `converged` is false and `d_min`
/// falls back to the finest sampled scale.
pub fn extract_scales(
    curve: &BoxCountCurve,
    profile: &Profile,
    tolerance: f64,
) -> ComplexityReport {
    let diag = profile.bbox().diagonal();
    let ok: Vec<bool> = curve.dbc.iter().map(|d| (d - 1.0).abs() <= tolerance).collect();
    // epsilons are descending: find the earliest index from which every finer
    // (later) scale stays inside the band
    let mut suffix_start = None;
    for i in (0..ok.len()).rev() {
        if ok[i] {
            suffix_start = Some(i);
        } else {
            break;
        }
    }
    let (d_min, converged) = match suffix_start {
        Some(i) => (curve.epsilons[i] * diag, true),
        None => (*curve.epsilons.last().unwrap() * diag, false),
    };
    ComplexityReport { d_max: profile.max_extent(), d_min, converged, tolerance }
}
