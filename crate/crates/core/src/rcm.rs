//! Isosceles trapezoidal remote-center linkage: construction, position
//! analysis, drift evaluation, dimensional synthesis and the per-level
//! cascade.
//!
//! Frame convention: the remote center O sits at the origin, the symmetry
//! axis is +y (toward the grasped object), the moving platform spans
//! `y = -H` and the ground pivots sit deeper at `y = -(H + h)`. Both legs lie
//! along rays through O at neutral, which pins the remote-center property at
//! the neutral pose by construction.

use crate::geom::Vec2;
use crate::synthesis::FingerSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RcmError {
    #[error("bar angle phi must lie strictly in (0, pi/2), got {0}")]
    BadBarAngle(f64),
    #[error("length parameter must be positive: {0}")]
    BadLength(String),
    #[error("pose unreachable at psi = {requested}; branch limit is {psi_limit}")]
    BranchLimit { requested: f64, psi_limit: f64 },
    #[error("legs are parallel at psi = {0}; instant center at infinity")]
    ParallelLegs(f64),
    #[error("design has no feasible motion range")]
    NoFeasibleMotion,
    #[error("invalid optimizer input: {0}")]
    BadOptimizerInput(String),
    #[error("design space infeasible: every evaluated candidate scored zero")]
    AllInfeasible,
    #[error("cascade infeasible at tree level {level}: {source}")]
    InfeasibleLevel {
        level: u32,
        #[source]
        source: Box<RcmError>,
    },
    #[error("cascade needs a spec with n >= 2, got n = {0}")]
    CascadeTooShallow(u32),
}

/// Trapezoidal remote-center linkage defined by the bar angle `phi`, the
/// allotted half-width clearance `h` and the platform-to-remote-center
/// height `H`. The platform-to-ground axial depth equals `h`, which makes the
/// deeper level's bounding region exactly fill the clearance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidDesign {
    pub phi: f64,
    #[serde(rename = "h")]
    pub clearance: f64,
    #[serde(rename = "H")]
    pub center_height: f64,
    pub depth: f64,
    pub ground_pivots: [Vec2; 2],
    pub platform_pivots: [Vec2; 2],
    pub leg_length: f64,
    pub platform_width: f64,
    pub ground_width: f64,
}

/// Builds the linkage by the ray model: both legs lie along rays through the
/// remote center, the half-angle between each ray and the symmetry axis is
/// `pi/2 - phi`, platform pivots sit at distance `H / cos beta` from O and
/// ground pivots at `(H + h) / cos beta` along the same rays.
pub fn build_trapezoid(phi: f64, h: f64, center_height: f64) -> Result<TrapezoidDesign, RcmError> {
    if !(phi > 0.0 && phi < FRAC_PI_2) {
        return Err(RcmError::BadBarAngle(phi));
    }
    if !(h > 0.0) {
        return Err(RcmError::BadLength(format!("clearance h = {h}")));
    }
    if !(center_height > 0.0) {
        return Err(RcmError::BadLength(format!("center height H = {center_height}")));
    }
    let beta = FRAC_PI_2 - phi;
    let t = beta.tan();
    let platform_pivots = [
        Vec2::new(-center_height * t, -center_height),
        Vec2::new(center_height * t, -center_height),
    ];
    let depth = h;
    let g = center_height + depth;
    let ground_pivots = [Vec2::new(-g * t, -g), Vec2::new(g * t, -g)];
    Ok(TrapezoidDesign {
        phi,
        clearance: h,
        center_height,
        depth,
        ground_pivots,
        platform_pivots,
        leg_length: depth / phi.sin(),
        platform_width: 2.0 * center_height * t,
        ground_width: 2.0 * g * t,
    })
}

impl TrapezoidDesign {
    /// The remote center O in the linkage frame.
    pub fn remote_center(&self) -> Vec2 {
        Vec2::ZERO
    }

    pub fn platform_midpoint(&self) -> Vec2 {
        Vec2::new(0.0, -self.center_height)
    }
}

/// Platform placement at one articulation angle.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PlatformPose {
    /// Platform rotation from neutral (the pose parameter).
    pub psi: f64,
    pub midpoint: Vec2,
    pub left_pivot: Vec2,
    pub right_pivot: Vec2,
}

fn raw_solve(design: &TrapezoidDesign, psi: f64) -> Option<PlatformPose> {
    let half = design.platform_width / 2.0;
    let off_l = Vec2::new(-half, 0.0).rotate(psi);
    let off_r = Vec2::new(half, 0.0).rotate(psi);
    // the midpoint must keep both pivots on their leg circles
    let ca = design.ground_pivots[0] - off_l;
    let cb = design.ground_pivots[1] - off_r;
    let r = design.leg_length;
    let ab = cb - ca;
    let d = ab.norm();
    if d < 1e-300 || d > 2.0 * r {
        return None;
    }
    let half_sq = r * r - (d / 2.0) * (d / 2.0);
    if half_sq < 0.0 {
        return None;
    }
    // of the two intersections, the branch continuous with neutral keeps the
    // midpoint on the positive side of the center line
    let mid = (ca + cb) / 2.0;
    let lift = ab.perp() / d * half_sq.sqrt();
    let midpoint = mid + lift;
    Some(PlatformPose {
        psi,
        midpoint,
        left_pivot: midpoint + off_l,
        right_pivot: midpoint + off_r,
    })
}

/// Four-bar position solution with the platform rotated `psi` from neutral.
/// Solved by circle-circle intersection on the branch continuous with the
/// neutral assembly. An unreachable `psi` reports the branch limit found by
/// bisection.
pub fn solve_pose(design: &TrapezoidDesign, psi: f64) -> Result<PlatformPose, RcmError> {
    match raw_solve(design, psi) {
        Some(pose) => Ok(pose),
        None => {
            let limit = bisect_branch_limit(design, psi);
            Err(RcmError::BranchLimit { requested: psi, psi_limit: limit })
        }
    }
}

fn bisect_branch_limit(design: &TrapezoidDesign, toward: f64) -> f64 {
    let sign = if toward < 0.0 { -1.0 } else { 1.0 };
    let mut good = 0.0f64;
    let mut bad = toward.abs();
    for _ in 0..200 {
        let mid = 0.5 * (good + bad);
        if raw_solve(design, sign * mid).is_some() {
            good = mid;
        } else {
            bad = mid;
        }
        if bad - good < 1e-13 {
            break;
        }
    }
    sign * good
}

fn line_intersection(p: Vec2, pd: Vec2, q: Vec2, qd: Vec2) -> Option<Vec2> {
    let denom = pd.cross(qd);
    let scale = pd.norm() * qd.norm();
    if denom.abs() < 1e-12 * scale {
        return None;
    }
    let t = (q - p).cross(qd) / denom;
    Some(p + pd * t)
}

/// Intersection of the two leg lines at pose `psi`: the platform's
/// instantaneous center of rotation relative to ground. Equals O at neutral.
pub fn instant_center(design: &TrapezoidDesign, psi: f64) -> Result<Vec2, RcmError> {
    let pose = solve_pose(design, psi)?;
    line_intersection(
        design.ground_pivots[0],
        pose.left_pivot - design.ground_pivots[0],
        design.ground_pivots[1],
        pose.right_pivot - design.ground_pivots[1],
    )
    .ok_or(RcmError::ParallelLegs(psi))
}

/// Where the platform-fixed point that starts at the remote center lands at
/// pose `psi`. Its displacement is the remote-center drift: zero to first
/// order at neutral because O is the instant center there.
pub fn carried_center(design: &TrapezoidDesign, pose: &PlatformPose) -> Vec2 {
    let body_offset = design.remote_center() - design.platform_midpoint();
    pose.midpoint + body_offset.rotate(pose.psi)
}

/// Drift measure swept into the evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum DriftMetric {
    /// Max displacement of the platform-carried remote-center point over the
    /// symmetric sweep (default).
    #[default]
    CarriedCenter,
    /// Max leg-line intersection displacement over the sweep.
    LegIntersection,
    /// Carried-point displacement at the extreme poses only.
    ExtremePose,
}

#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    pub psi_cap: f64,
    pub n_samples: usize,
    /// Transmission-angle safety margin kept before the branch singularity.
    pub margin: f64,
    pub drift: DriftMetric,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            psi_cap: FRAC_PI_4,
            n_samples: 64,
            margin: 5.0_f64.to_radians(),
            drift: DriftMetric::CarriedCenter,
        }
    }
}

/// Rotation range, drift and corrected-area score of one design.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcmEvaluation {
    pub theta_max: f64,
    pub delta: f64,
    pub a_cor: f64,
}

fn transmission_ok(design: &TrapezoidDesign, pose: &PlatformPose, margin: f64) -> bool {
    let platform_dir = Vec2::new(1.0, 0.0).rotate(pose.psi);
    for (ground, pivot) in [
        (design.ground_pivots[0], pose.left_pivot),
        (design.ground_pivots[1], pose.right_pivot),
    ] {
        let leg = pivot - ground;
        let n = leg.norm();
        if n < 1e-300 {
            return false;
        }
        let sin_angle = (leg.cross(platform_dir).abs() / n).min(1.0);
        if sin_angle.asin() < margin {
            return false;
        }
    }
    true
}

/// Largest platform rotation (one side; the design is mirror symmetric) that
/// stays solvable with the transmission margin, capped at `up_to`.
fn reachable_rotation(design: &TrapezoidDesign, margin: f64, up_to: f64) -> f64 {
    let ok = |psi: f64| {
        raw_solve(design, psi).map_or(false, |pose| transmission_ok(design, &pose, margin))
    };
    if !ok(0.0) {
        return 0.0;
    }
    let step = 0.005f64;
    let mut good = 0.0;
    let mut bad = None;
    let mut psi = step;
    while psi < up_to {
        if ok(psi) {
            good = psi;
        } else {
            bad = Some(psi);
            break;
        }
        psi += step;
    }
    let mut bad = match bad {
        Some(b) => b,
        None if ok(up_to) => return up_to,
        None => up_to,
    };
    for _ in 0..80 {
        let mid = 0.5 * (good + bad);
        if ok(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

pub fn evaluate(
    design: &TrapezoidDesign,
    psi_cap: f64,
    n_samples: usize,
) -> Result<RcmEvaluation, RcmError> {
    evaluate_with(design, &EvalOptions { psi_cap, n_samples, ..EvalOptions::default() })
}

/// Sweeps the symmetric rotation range and scores the design:
/// `theta_max` = min(cap, in-branch reach with the transmission margin),
/// `delta` = drift per the chosen metric over `n_samples` poses, and
/// `a_cor = theta_max * max(h - delta, 0)^2`.
pub fn evaluate_with(
    design: &TrapezoidDesign,
    opts: &EvalOptions,
) -> Result<RcmEvaluation, RcmError> {
    if !(opts.psi_cap > 0.0) || opts.n_samples < 16 {
        return Err(RcmError::BadOptimizerInput(format!(
            "need psi_cap > 0 and n_samples >= 16, got {} and {}",
            opts.psi_cap, opts.n_samples
        )));
    }
    let theta_max = reachable_rotation(design, opts.margin, opts.psi_cap.min(PI));
    if theta_max <= 0.0 {
        return Err(RcmError::NoFeasibleMotion);
    }
    let origin = design.remote_center();
    let drift_at = |psi: f64| -> Result<f64, RcmError> {
        let pose = solve_pose(design, psi)?;
        match opts.drift {
            DriftMetric::CarriedCenter | DriftMetric::ExtremePose => {
                Ok(carried_center(design, &pose).dist(origin))
            }
            DriftMetric::LegIntersection => Ok(line_intersection(
                design.ground_pivots[0],
                pose.left_pivot - design.ground_pivots[0],
                design.ground_pivots[1],
                pose.right_pivot - design.ground_pivots[1],
            )
            .map_or(f64::INFINITY, |ic| ic.dist(origin))),
        }
    };
    let delta = match opts.drift {
        DriftMetric::ExtremePose => drift_at(theta_max)?.max(drift_at(-theta_max)?),
        _ => {
            let n = opts.n_samples;
            let mut worst = 0.0f64;
            for j in 0..n {
                let psi = -theta_max + 2.0 * theta_max * j as f64 / (n - 1) as f64;
                worst = worst.max(drift_at(psi)?);
            }
            worst
        }
    };
    let usable = (design.clearance - delta).max(0.0);
    Ok(RcmEvaluation { theta_max, delta, a_cor: theta_max * usable * usable })
}

/// One vertex of the design-space sweep, emitted for surface tables.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub phi: f64,
    #[serde(rename = "H")]
    pub center_height: f64,
    pub theta_max: f64,
    pub delta: f64,
    pub a_cor: f64,
}

#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub design: TrapezoidDesign,
    pub eval: RcmEvaluation,
    /// Full grid sweep, phi-major, for design-space plots.
    pub surface: Vec<SurfacePoint>,
}

fn score(h: f64, phi: f64, center_height: f64, opts: &EvalOptions) -> (f64, f64, f64) {
    match build_trapezoid(phi, h, center_height).and_then(|d| evaluate_with(&d, opts)) {
        Ok(ev) => (ev.theta_max, ev.delta, ev.a_cor),
        Err(_) => (0.0, f64::INFINITY, 0.0),
    }
}

/// Coarse grid search over `(phi, H)` maximizing the corrected area, followed
/// by coordinate descent with a golden-section line search per axis. Grid ties
/// resolve to the lexicographically smallest `(phi, H)`; the refined optimum
/// never scores below the best grid vertex.
pub fn optimize_level(
    h: f64,
    phi_range: (f64, f64),
    center_height_range: (f64, f64),
    grid: (usize, usize),
    psi_cap: f64,
) -> Result<OptimizeOutcome, RcmError> {
    optimize_level_with(
        h,
        phi_range,
        center_height_range,
        grid,
        &EvalOptions { psi_cap, ..EvalOptions::default() },
    )
}

pub fn optimize_level_with(
    h: f64,
    (phi_lo, phi_hi): (f64, f64),
    (hh_lo, hh_hi): (f64, f64),
    (grid_phi, grid_hh): (usize, usize),
    opts: &EvalOptions,
) -> Result<OptimizeOutcome, RcmError> {
    if !(h > 0.0) {
        return Err(RcmError::BadLength(format!("clearance h = {h}")));
    }
    if !(phi_lo > 0.0 && phi_lo < phi_hi && phi_hi < FRAC_PI_2) {
        return Err(RcmError::BadOptimizerInput(format!(
            "phi range ({phi_lo}, {phi_hi}) must lie strictly inside (0, pi/2)"
        )));
    }
    if !(hh_lo > 0.0 && hh_lo < hh_hi) {
        return Err(RcmError::BadOptimizerInput(format!(
            "H range ({hh_lo}, {hh_hi}) must be positive and increasing"
        )));
    }
    if grid_phi < 8 || grid_hh < 8 {
        return Err(RcmError::BadOptimizerInput(format!(
            "grid must be at least 8x8, got {grid_phi}x{grid_hh}"
        )));
    }

    let phis: Vec<f64> = (0..grid_phi)
        .map(|i| phi_lo + (phi_hi - phi_lo) * i as f64 / (grid_phi - 1) as f64)
        .collect();
    let hhs: Vec<f64> = (0..grid_hh)
        .map(|j| hh_lo + (hh_hi - hh_lo) * j as f64 / (grid_hh - 1) as f64)
        .collect();

    let cells: Vec<(f64, f64)> =
        phis.iter().flat_map(|&p| hhs.iter().map(move |&q| (p, q))).collect();
    let surface: Vec<SurfacePoint> = cells
        .par_iter()
        .map(|&(phi, hh)| {
            let (theta_max, delta, a_cor) = score(h, phi, hh, opts);
            SurfacePoint { phi, center_height: hh, theta_max, delta, a_cor }
        })
        .collect();

    // row-major walk with strict improvement keeps the first (smallest) tie
    let mut best = &surface[0];
    for pt in &surface {
        if pt.a_cor > best.a_cor {
            best = pt;
        }
    }
    if best.a_cor <= 0.0 {
        return Err(RcmError::AllInfeasible);
    }

    let mut cur = (best.phi, best.center_height);
    let mut cur_score = best.a_cor;
    let step_phi = (phi_hi - phi_lo) / (grid_phi - 1) as f64;
    let step_hh = (hh_hi - hh_lo) / (grid_hh - 1) as f64;
    for _ in 0..60 {
        let prev = cur;
        let prev_score = cur_score;
        let (p, s1) = golden_max(
            (cur.0 - step_phi).max(phi_lo),
            (cur.0 + step_phi).min(phi_hi),
            |phi| score(h, phi, cur.1, opts).2,
        );
        if s1 > cur_score {
            cur = (p, cur.1);
            cur_score = s1;
        }
        let (q, s2) = golden_max(
            (cur.1 - step_hh).max(hh_lo),
            (cur.1 + step_hh).min(hh_hi),
            |hh| score(h, cur.0, hh, opts).2,
        );
        if s2 > cur_score {
            cur = (cur.0, q);
            cur_score = s2;
        }
        let moved = ((cur.0 - prev.0) / (phi_hi - phi_lo)).abs()
            .max(((cur.1 - prev.1) / (hh_hi - hh_lo)).abs());
        let gained = (cur_score - prev_score) / prev_score.max(1e-300);
        if moved < 1e-4 && gained < 1e-4 {
            break;
        }
    }

    let design = build_trapezoid(cur.0, h, cur.1)?;
    let eval = evaluate_with(&design, opts)?;
    debug_assert!(eval.a_cor >= best.a_cor);
    Ok(OptimizeOutcome { design, eval, surface })
}

/// Golden-section maximization on `[a, b]`; returns the best abscissa seen.
fn golden_max(a: f64, b: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..48 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        let cand = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
        if cand.1 > best.1 {
            best = cand;
        }
        if (hi - lo).abs() < 1e-4 * (b - a).abs() {
            break;
        }
    }
    best
}

/// One designed level of the cascade. Tree levels count from the root; the
/// deepest trapezoid level is `n` with `h = D / (2 gamma^(n-1))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CascadeLevel {
    pub tree_level: u32,
    pub design: TrapezoidDesign,
    pub eval: RcmEvaluation,
    #[serde(skip)]
    pub surface: Vec<SurfacePoint>,
}

/// The cascade holds one trapezoid per branching joint level, deepest first.
/// The fingertip level articulates on a plain revolute joint and carries no
/// trapezoid; its hard-stop rotation range is reported alongside.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelCascade {
    pub levels: Vec<CascadeLevel>,
    pub fingertip_rotation: f64,
}

#[derive(Clone, Debug)]
pub struct CascadeOptions {
    pub phi_range: (f64, f64),
    /// Search range for H expressed as multiples of the level's h.
    pub center_height_factors: (f64, f64),
    pub grid: (usize, usize),
    /// Per-level rotation caps, deepest trapezoid first. Missing entries fall
    /// back to the +/-45 degree hard stop.
    pub psi_caps: Vec<f64>,
    pub n_samples: usize,
    pub margin: f64,
    pub drift: DriftMetric,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        CascadeOptions {
            phi_range: (35.0_f64.to_radians(), 80.0_f64.to_radians()),
            center_height_factors: (1.0, 3.0),
            grid: (16, 16),
            psi_caps: Vec::new(),
            n_samples: 64,
            margin: 5.0_f64.to_radians(),
            drift: DriftMetric::CarriedCenter,
        }
    }
}

pub fn cascade(spec: &FingerSpec, psi_caps: Option<&[f64]>) -> Result<LevelCascade, RcmError> {
    let mut opts = CascadeOptions::default();
    if let Some(caps) = psi_caps {
        opts.psi_caps = caps.to_vec();
    }
    cascade_with(spec, &opts)
}

/// Sizes every branching level from the deepest up: level `n` gets
/// `h = D / (2 gamma^(n-1))` and each shallower level's `h` is the deeper
/// level's optimized `H`.
pub fn cascade_with(spec: &FingerSpec, opts: &CascadeOptions) -> Result<LevelCascade, RcmError> {
    if spec.n < 2 {
        return Err(RcmError::CascadeTooShallow(spec.n));
    }
    let gamma = spec.gamma as f64;
    let mut h = spec.width_d / (2.0 * gamma.powi(spec.n as i32 - 1));
    let mut levels = Vec::with_capacity(spec.n as usize - 1);
    for (idx, tree_level) in (2..=spec.n).rev().enumerate() {
        let cap = opts.psi_caps.get(idx).copied().unwrap_or(FRAC_PI_4);
        let eval_opts = EvalOptions {
            psi_cap: cap,
            n_samples: opts.n_samples,
            margin: opts.margin,
            drift: opts.drift,
        };
        let hh_range =
            (opts.center_height_factors.0 * h, opts.center_height_factors.1 * h);
        let outcome =
            optimize_level_with(h, opts.phi_range, hh_range, opts.grid, &eval_opts).map_err(
                |e| RcmError::InfeasibleLevel { level: tree_level, source: Box::new(e) },
            )?;
        h = outcome.design.center_height;
        levels.push(CascadeLevel {
            tree_level,
            design: outcome.design,
            eval: outcome.eval,
            surface: outcome.surface,
        });
    }
    Ok(LevelCascade { levels, fingertip_rotation: FRAC_PI_2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample_design() -> TrapezoidDesign {
        build_trapezoid(60.0_f64.to_radians(), 12.5, 40.0).unwrap()
    }

    #[test]
    fn construction_identities() {
        let d = sample_design();
        // leg lines pass through the remote center at neutral
        for (g, p) in [
            (d.ground_pivots[0], d.platform_pivots[0]),
            (d.ground_pivots[1], d.platform_pivots[1]),
        ] {
            let dir = p - g;
            let cross = dir.cross(Vec2::ZERO - g).abs();
            assert!(cross / (dir.norm() * g.norm()) < 1e-12);
        }
        assert_relative_eq!(
            d.platform_width,
            2.0 * d.center_height * (FRAC_PI_2 - d.phi).tan(),
            max_relative = 1e-12
        );
        assert!(d.ground_width > d.platform_width && d.platform_width > 0.0);

        let steep = build_trapezoid(80.0_f64.to_radians(), 12.5, 40.0).unwrap();
        assert!(steep.ground_width > steep.platform_width);
    }

    #[test]
    fn neutral_pose_is_exact() {
        let d = sample_design();
        let pose = solve_pose(&d, 0.0).unwrap();
        assert!(pose.midpoint.dist(d.platform_midpoint()) < 1e-12);
        assert!(pose.left_pivot.dist(d.platform_pivots[0]) < 1e-12);
        assert!(instant_center(&d, 0.0).unwrap().norm() < 1e-9 * d.center_height);
    }

    #[test]
    fn loop_closure_residuals_tiny() {
        let d = sample_design();
        for k in 0..100 {
            let psi = -0.20 + 0.40 * k as f64 / 99.0;
            let pose = solve_pose(&d, psi).unwrap();
            let r1 = (pose.left_pivot.dist(d.ground_pivots[0]) - d.leg_length).abs();
            let r2 = (pose.right_pivot.dist(d.ground_pivots[1]) - d.leg_length).abs();
            let r3 = (pose.right_pivot.dist(pose.left_pivot) - d.platform_width).abs();
            assert!(r1 / d.leg_length < 1e-9, "left leg at {psi}");
            assert!(r2 / d.leg_length < 1e-9, "right leg at {psi}");
            assert!(r3 / d.platform_width < 1e-9, "platform at {psi}");
        }
    }

    #[test]
    fn mirror_symmetry_of_poses_and_centers() {
        let d = sample_design();
        for psi in [0.05, 0.1, 0.15, 0.2] {
            let plus = solve_pose(&d, psi).unwrap();
            let minus = solve_pose(&d, -psi).unwrap();
            assert!((plus.midpoint.x + minus.midpoint.x).abs() < 1e-9);
            assert!((plus.midpoint.y - minus.midpoint.y).abs() < 1e-9);
            assert!((plus.left_pivot.x + minus.right_pivot.x).abs() < 1e-9);
            assert!((plus.left_pivot.y - minus.right_pivot.y).abs() < 1e-9);

            let icp = instant_center(&d, psi).unwrap();
            let icm = instant_center(&d, -psi).unwrap();
            assert!((icp.x + icm.x).abs() < 1e-9);
            assert!((icp.y - icm.y).abs() < 1e-9);
        }
    }

    #[test]
    fn carried_center_drift_is_second_order() {
        let d = sample_design();
        let drift = |psi: f64| {
            let pose = raw_solve(&d, psi).unwrap();
            carried_center(&d, &pose).norm()
        };
        // Richardson-style order estimate from successive halvings
        let d1 = drift(0.02);
        let d2 = drift(0.01);
        let d3 = drift(0.005);
        let p12 = (d1 / d2).log2();
        let p23 = (d2 / d3).log2();
        assert!(p12 > 1.9 && p23 > 1.9, "orders {p12}, {p23}");
        // and the ratio drift/psi vanishes with psi
        assert!(drift(1e-4) / 1e-4 < drift(1e-2) / 1e-2);
    }

    #[test]
    fn unreachable_pose_reports_branch_limit() {
        let d = sample_design();
        let err = solve_pose(&d, 2.5).unwrap_err();
        match err {
            RcmError::BranchLimit { psi_limit, requested } => {
                assert_eq!(requested, 2.5);
                assert!(psi_limit > 0.0 && psi_limit < 2.5);
                assert!(raw_solve(&d, psi_limit).is_some());
                assert!(raw_solve(&d, psi_limit + 1e-6).is_none());
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn evaluate_basics() {
        let d = sample_design();
        let ev = evaluate(&d, FRAC_PI_4, 64).unwrap();
        assert!(ev.theta_max > 0.0 && ev.theta_max <= FRAC_PI_4);
        assert!(ev.delta >= 0.0);
        assert!(ev.a_cor >= 0.0);
        assert_relative_eq!(
            ev.a_cor,
            ev.theta_max * (d.clearance - ev.delta).max(0.0).powi(2),
            max_relative = 1e-12
        );

        // refinement convergence: doubling the sweep barely moves delta
        let fine = evaluate(&d, FRAC_PI_4, 128).unwrap();
        assert!((fine.delta - ev.delta).abs() <= 0.01 * ev.delta.max(1e-12));
    }

    #[test]
    fn drift_metric_flags() {
        let d = sample_design();
        let carried = evaluate_with(&d, &EvalOptions::default()).unwrap();
        let extreme = evaluate_with(
            &d,
            &EvalOptions { drift: DriftMetric::ExtremePose, ..EvalOptions::default() },
        )
        .unwrap();
        let legs = evaluate_with(
            &d,
            &EvalOptions { drift: DriftMetric::LegIntersection, ..EvalOptions::default() },
        )
        .unwrap();
        // the carried-point drift peaks at the extremes for this geometry
        assert_relative_eq!(carried.delta, extreme.delta, max_relative = 1e-6);
        // the leg-line intersection wanders much farther than the carried point
        assert!(legs.delta > carried.delta);
    }

    #[test]
    fn optimizer_dominates_grid_and_finds_usable_design() {
        let out = optimize_level(
            12.5,
            (35.0_f64.to_radians(), 80.0_f64.to_radians()),
            (12.5, 37.5),
            (12, 12),
            FRAC_PI_4,
        )
        .unwrap();
        assert_eq!(out.surface.len(), 144);
        for pt in &out.surface {
            assert!(out.eval.a_cor >= pt.a_cor, "optimum beaten at {:?}", (pt.phi, pt.center_height));
        }
        assert!(out.eval.delta < 12.5);
    }

    #[test]
    fn cascade_prototype_level_sizes() {
        let spec = FingerSpec::new(2, 3, 100.0, 0.0, 0.0).unwrap();
        let cascade = cascade(&spec, None).unwrap();
        assert_eq!(cascade.levels.len(), 2);
        assert_eq!(cascade.levels[0].tree_level, 3);
        assert_eq!(cascade.levels[0].design.clearance, 12.5);
        assert_eq!(cascade.levels[1].tree_level, 2);
        // chain rule: the shallower level's h is the deeper level's H
        assert_eq!(
            cascade.levels[1].design.clearance,
            cascade.levels[0].design.center_height
        );
        // nondecreasing from deep to shallow with the default H >= h ranges
        assert!(cascade.levels[1].design.clearance >= cascade.levels[0].design.clearance);
        assert_eq!(cascade.fingertip_rotation, FRAC_PI_2);
    }

    #[test]
    fn two_level_spec_gets_single_trapezoid() {
        let spec = FingerSpec::new(2, 2, 100.0, 0.0, 0.0).unwrap();
        let cascade = cascade(&spec, None).unwrap();
        assert_eq!(cascade.levels.len(), 1);
        assert_eq!(cascade.levels[0].tree_level, 2);
        assert_eq!(cascade.levels[0].design.clearance, 25.0);
    }

    #[test]
    fn shallow_spec_rejected() {
        let spec = FingerSpec::new(2, 1, 100.0, 0.0, 0.0).unwrap();
        assert!(matches!(cascade(&spec, None), Err(RcmError::CascadeTooShallow(1))));
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(matches!(
            build_trapezoid(FRAC_PI_2, 1.0, 1.0),
            Err(RcmError::BadBarAngle(_))
        ));
        assert!(build_trapezoid(1.0, 0.0, 1.0).is_err());
        assert!(build_trapezoid(1.0, 1.0, -2.0).is_err());
    }
}
