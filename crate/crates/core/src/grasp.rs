//! Planar frictional-contact wrench closure and configuration-space coverage.
//!
//! Contacts are modeled as frictional points on the object boundary; each one
//! contributes its two friction-cone edge wrenches `(f_x, f_y, tau / rho)`
//! with unit force magnitude and torque taken about the object centroid,
//! scaled by `rho` to keep the wrench space dimensionally homogeneous.
//! Closure holds when the origin lies strictly inside the convex hull of the
//! edge wrenches, decided by a rank test plus a small linear program that
//! maximizes the minimum convex-combination coefficient.

use crate::geom::Vec2;
use crate::profile::{Profile, ProfileError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraspError {
    #[error("invalid contact model: {0}")]
    InvalidModel(String),
    #[error("degenerate contact normal at theta = {0}")]
    DegenerateNormal(f64),
    #[error("coverage grid must have at least 8 cells per axis, got {0}")]
    GridTooSmall(usize),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GripperKind {
    FractalHand,
    Antipodal,
}

/// How finger contacts map onto the boundary parameter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactPlacement {
    /// Offsets live in curve-parameter space (arc length is treated as
    /// proportional to the parameter).
    #[default]
    CurveParameter,
    /// Offsets live in true arc length, with the span scaled by
    /// `perimeter / 2 pi`.
    ArcLength,
}

/// Contact pattern of one gripper side pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactModel {
    pub kind: GripperKind,
    /// Contacts per finger: `2^(n-1)` for the fractal hand, 1 for antipodal.
    pub contacts_per_finger: usize,
    /// Grasp span (the width parameter mapped to the boundary), radians.
    pub grasp_span: f64,
    pub mu: f64,
    /// Torque scale; `None` derives the profile's max centroid distance.
    pub torque_scale: Option<f64>,
    pub placement: ContactPlacement,
}

impl ContactModel {
    /// Fractal hand with tree depth `n`: `2^(n-1)` fingertips spread over the
    /// span `delta_theta`.
    pub fn fractal_hand(depth_n: u32, delta_theta: f64, mu: f64) -> Result<Self, GraspError> {
        if depth_n < 1 || depth_n > 20 {
            return Err(GraspError::InvalidModel(format!(
                "depth n must lie in 1..=20, got {depth_n}"
            )));
        }
        if !(delta_theta > 0.0 && delta_theta < PI) {
            return Err(GraspError::InvalidModel(format!(
                "grasp span must lie in (0, pi), got {delta_theta}"
            )));
        }
        check_mu(mu)?;
        Ok(ContactModel {
            kind: GripperKind::FractalHand,
            contacts_per_finger: 1usize << (depth_n - 1),
            grasp_span: delta_theta,
            mu,
            torque_scale: None,
            placement: ContactPlacement::CurveParameter,
        })
    }

    pub fn antipodal(mu: f64) -> Result<Self, GraspError> {
        check_mu(mu)?;
        Ok(ContactModel {
            kind: GripperKind::Antipodal,
            contacts_per_finger: 1,
            grasp_span: 0.0,
            mu,
            torque_scale: None,
            placement: ContactPlacement::CurveParameter,
        })
    }

    fn rho_for(&self, profile: &Profile) -> f64 {
        self.torque_scale.unwrap_or_else(|| profile.max_centroid_distance())
    }
}

fn check_mu(mu: f64) -> Result<(), GraspError> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(GraspError::InvalidModel(format!("friction coefficient must be positive, got {mu}")))
    }
}

/// Boundary contact: point plus inward unit normal.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Contact {
    pub point: Vec2,
    pub normal: Vec2,
}

/// Places the model's contacts for hand centers `theta_a` and `theta_b`.
/// Fingertips go at `theta_c + span * (j / (m - 1) - 1/2)`; a single contact
/// degenerates to the center itself. Angles wrap freely.
pub fn place_contacts(
    profile: &Profile,
    model: &ContactModel,
    theta_a: f64,
    theta_b: f64,
) -> Result<Vec<Contact>, GraspError> {
    let m = model.contacts_per_finger;
    let mut contacts = Vec::with_capacity(2 * m);
    for &center in &[theta_a, theta_b] {
        for j in 0..m {
            let frac = if m == 1 { 0.0 } else { j as f64 / (m - 1) as f64 - 0.5 };
            let theta = match model.placement {
                ContactPlacement::CurveParameter => center + model.grasp_span * frac,
                ContactPlacement::ArcLength => {
                    let span_len = model.grasp_span / TAU * profile.perimeter();
                    let s = profile.arclength_at(center) + span_len * frac;
                    profile.theta_at_arclength(s)
                }
            };
            let point = profile.point_at(theta);
            let normal = profile
                .inward_normal_at(theta)
                .map_err(|_| GraspError::DegenerateNormal(theta))?;
            contacts.push(Contact { point, normal });
        }
    }
    Ok(contacts)
}

/// Friction-cone edge wrenches, two per contact.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WrenchSet {
    pub wrenches: Vec<[f64; 3]>,
}

/// Edge wrenches about `origin` (the object centroid): unit forces along the
/// inward normal rotated by +/- atan(mu), torque `(p - origin) x f / rho`.
pub fn wrench_set(
    contacts: &[Contact],
    mu: f64,
    rho: f64,
    origin: Vec2,
) -> Result<WrenchSet, GraspError> {
    check_mu(mu)?;
    if !(rho > 0.0) {
        return Err(GraspError::InvalidModel(format!("torque scale must be positive, got {rho}")));
    }
    let alpha = mu.atan();
    let mut wrenches = Vec::with_capacity(2 * contacts.len());
    for c in contacts {
        if c.normal.normalized().is_none() {
            return Err(GraspError::DegenerateNormal(f64::NAN));
        }
        let arm = c.point - origin;
        for sign in [1.0, -1.0] {
            let f = c.normal.rotate(sign * alpha);
            wrenches.push([f.x, f.y, arm.cross(f) / rho]);
        }
    }
    Ok(WrenchSet { wrenches })
}

const DEFAULT_CLOSURE_TOLERANCE: f64 = 1e-6;

/// Wrench-closure decision: true iff the origin is strictly interior to the
/// convex hull of the (unit-normalized) edge wrenches. Decided by (a) a rank-3
/// test on the wrench matrix and (b) a linear program maximizing the minimum
/// convex coefficient `t` subject to `sum lambda_i w_i = 0`, `sum lambda_i =
/// 1`, `lambda_i >= t`; closure iff the optimum exceeds `tolerance`.
/// Degenerate sets simply return false.
pub fn wrench_closure(ws: &WrenchSet, tolerance: f64) -> bool {
    let normalized: Vec<[f64; 3]> = ws
        .wrenches
        .iter()
        .filter_map(|w| {
            let n = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
            if n < 1e-12 {
                None
            } else {
                Some([w[0] / n, w[1] / n, w[2] / n])
            }
        })
        .collect();
    if normalized.len() < 4 || wrench_rank(&normalized) < 3 {
        return false;
    }
    match min_coefficient_lp(&normalized) {
        Some(t) => t > tolerance,
        None => false,
    }
}

/// Closure with the default strict-interiority tolerance.
pub fn wrench_closure_default(ws: &WrenchSet) -> bool {
    wrench_closure(ws, DEFAULT_CLOSURE_TOLERANCE)
}

/// Rank of the 3 x k wrench matrix via the eigenvalues of its 3x3 Gram
/// scatter, with a relative cutoff.
fn wrench_rank(wrenches: &[[f64; 3]]) -> usize {
    let mut s = [[0.0f64; 3]; 3];
    for w in wrenches {
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += w[i] * w[j];
            }
        }
    }
    let eig = symmetric_eigenvalues_3x3(s);
    let max = eig.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return 0;
    }
    eig.iter().filter(|&&l| l > 1e-18 * max + 1e-300).count()
}

/// Cyclic Jacobi sweeps; plenty for a 3x3 symmetric PSD matrix.
fn symmetric_eigenvalues_3x3(mut a: [[f64; 3]; 3]) -> [f64; 3] {
    for _ in 0..32 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off < 1e-30 * (a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2]).max(1e-300) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() < 1e-300 {
                continue;
            }
            let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut b = a;
            for k in 0..3 {
                b[p][k] = c * a[p][k] - s * a[q][k];
                b[q][k] = s * a[p][k] + c * a[q][k];
            }
            let tmp = b;
            for k in 0..3 {
                b[k][p] = c * tmp[k][p] - s * tmp[k][q];
                b[k][q] = s * tmp[k][p] + c * tmp[k][q];
            }
            a = b;
        }
    }
    [a[0][0], a[1][1], a[2][2]]
}

/// Max-min-coefficient LP over the convex combinations that cancel the wrench
/// sum. `None` when the origin is outside the hull (infeasible program).
fn min_coefficient_lp(wrenches: &[[f64; 3]]) -> Option<f64> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let t = problem.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    let lambdas: Vec<_> =
        wrenches.iter().map(|_| problem.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for axis in 0..3 {
        let terms: Vec<_> =
            lambdas.iter().zip(wrenches).map(|(&l, w)| (l, w[axis])).collect();
        problem.add_constraint(&terms[..], ComparisonOp::Eq, 0.0);
    }
    let simplex: Vec<_> = lambdas.iter().map(|&l| (l, 1.0)).collect();
    problem.add_constraint(&simplex[..], ComparisonOp::Eq, 1.0);
    for &l in &lambdas {
        problem.add_constraint(&[(l, 1.0), (t, -1.0)][..], ComparisonOp::Ge, 0.0);
    }
    problem.solve().ok().map(|sol| sol.objective())
}

/// Boolean closure grid over hand-center configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageMap {
    pub grid_size: usize,
    /// Row-major over `(theta_a index, theta_b index)`.
    pub closure: Vec<bool>,
    pub coverage_fraction: f64,
}

impl CoverageMap {
    pub fn at(&self, i: usize, j: usize) -> bool {
        self.closure[i * self.grid_size + j]
    }

    pub fn theta(&self, index: usize) -> f64 {
        TAU * index as f64 / self.grid_size as f64
    }
}

/// Sweeps wrench closure over the uniform `(theta_a, theta_b)` grid on
/// `[0, 2pi)^2`. Both hands share the model, so only the upper triangle is
/// evaluated and mirrored, which also makes the symmetry structural. Cells
/// are independent and evaluated in parallel; the result does not depend on
/// the execution schedule.
pub fn coverage_map(
    profile: &Profile,
    model: &ContactModel,
    grid_size: usize,
) -> Result<CoverageMap, GraspError> {
    if grid_size < 8 {
        return Err(GraspError::GridTooSmall(grid_size));
    }
    let rho = model.rho_for(profile);
    let origin = profile.centroid();
    let cells: Vec<(usize, usize)> =
        (0..grid_size).flat_map(|i| (i..grid_size).map(move |j| (i, j))).collect();
    let results: Vec<bool> = cells
        .par_iter()
        .map(|&(i, j)| {
            let ta = TAU * i as f64 / grid_size as f64;
            let tb = TAU * j as f64 / grid_size as f64;
            closure_at(profile, model, ta, tb, rho, origin)
        })
        .collect::<Result<_, _>>()?;
    let mut closure = vec![false; grid_size * grid_size];
    for (&(i, j), &v) in cells.iter().zip(&results) {
        closure[i * grid_size + j] = v;
        closure[j * grid_size + i] = v;
    }
    let trues = closure.iter().filter(|&&b| b).count();
    Ok(CoverageMap {
        grid_size,
        closure,
        coverage_fraction: trues as f64 / (grid_size * grid_size) as f64,
    })
}

fn closure_at(
    profile: &Profile,
    model: &ContactModel,
    theta_a: f64,
    theta_b: f64,
    rho: f64,
    origin: Vec2,
) -> Result<bool, GraspError> {
    let contacts = place_contacts(profile, model, theta_a, theta_b)?;
    let ws = wrench_set(&contacts, model.mu, rho, origin)?;
    Ok(wrench_closure_default(&ws))
}

/// Per-cell outcome of a two-model comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellOutcome {
    Both,
    FractalOnly,
    AntipodalOnly,
    Neither,
}

/// Coverage comparison between a fractal-hand model and the antipodal
/// baseline on one profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Comparison {
    pub fh: CoverageMap,
    pub ap: CoverageMap,
    /// `fh_coverage - ap_coverage`, in coverage-fraction units.
    pub improvement: f64,
}

impl Comparison {
    pub fn win_loss(&self, i: usize, j: usize) -> CellOutcome {
        match (self.fh.at(i, j), self.ap.at(i, j)) {
            (true, true) => CellOutcome::Both,
            (true, false) => CellOutcome::FractalOnly,
            (false, true) => CellOutcome::AntipodalOnly,
            (false, false) => CellOutcome::Neither,
        }
    }
}

/// Runs both models on the same grid. The torque scale must agree: models
/// with `None` share the profile-derived scale automatically.
pub fn compare(
    profile: &Profile,
    fh_model: &ContactModel,
    ap_model: &ContactModel,
    grid_size: usize,
) -> Result<Comparison, GraspError> {
    let fh = coverage_map(profile, fh_model, grid_size)?;
    let ap = coverage_map(profile, ap_model, grid_size)?;
    let improvement = fh.coverage_fraction - ap.coverage_fraction;
    Ok(Comparison { fh, ap, improvement })
}

/// Coverage per `(span, depth)` pair for monotonicity sweeps.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MonotonicityPoint {
    pub grasp_span: f64,
    pub depth_n: u32,
    pub coverage: f64,
}

pub fn coverage_monotonicity(
    profile: &Profile,
    base: &ContactModel,
    spans: &[f64],
    depths: &[u32],
    grid_size: usize,
) -> Result<Vec<MonotonicityPoint>, GraspError> {
    let mut out = Vec::with_capacity(spans.len() * depths.len());
    for &span in spans {
        for &n in depths {
            let mut model = ContactModel::fractal_hand(n, span, base.mu)?;
            model.torque_scale = base.torque_scale;
            model.placement = base.placement;
            let map = coverage_map(profile, &model, grid_size)?;
            out.push(MonotonicityPoint { grasp_span: span, depth_n: n, coverage: map.coverage_fraction });
        }
    }
    Ok(out)
}
