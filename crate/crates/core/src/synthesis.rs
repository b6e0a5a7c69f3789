//! Sizing the finger joint tree from complexity scales: level count, width
//! bound and derived tree statistics.

use crate::complexity::ComplexityReport;
use crate::units::Units;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed finger spec file: {0}")]
    Malformed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Design parameters of a uniform fractal finger. `stiffness_k` is carried
/// metadata only; nothing in this crate consumes it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerSpec {
    pub gamma: u32,
    pub n: u32,
    #[serde(rename = "width_D")]
    pub width_d: f64,
    #[serde(rename = "pitch_P")]
    pub pitch_p: f64,
    pub stiffness_k: f64,
}

impl FingerSpec {
    pub fn new(
        gamma: u32,
        n: u32,
        width_d: f64,
        pitch_p: f64,
        stiffness_k: f64,
    ) -> Result<FingerSpec, SynthesisError> {
        if gamma < 2 {
            return Err(SynthesisError::InvalidParameter(format!(
                "branching factor gamma must be at least 2, got {gamma}"
            )));
        }
        if n < 1 {
            return Err(SynthesisError::InvalidParameter("depth n must be at least 1".into()));
        }
        if (gamma as u64).checked_pow(n).is_none() {
            return Err(SynthesisError::InvalidParameter(format!(
                "tree gamma={gamma}, n={n} overflows the joint count"
            )));
        }
        if !(width_d > 0.0) {
            return Err(SynthesisError::InvalidParameter(format!(
                "finger width must be positive, got {width_d}"
            )));
        }
        if !(pitch_p >= 0.0) {
            return Err(SynthesisError::InvalidParameter(format!(
                "finger pitch must be non-negative, got {pitch_p}"
            )));
        }
        if !(stiffness_k >= 0.0) {
            return Err(SynthesisError::InvalidParameter(format!(
                "joint stiffness must be non-negative, got {stiffness_k}"
            )));
        }
        Ok(FingerSpec { gamma, n, width_d, pitch_p, stiffness_k })
    }
}

/// Counts derived from `(gamma, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub fingertips: u64,
    pub internal_joints: u64,
    /// gamma^n: the size ratio between first- and deepest-level bodies.
    pub level_scale_ratio: f64,
}

/// Number of levels needed to span `d_max` down to `d_min` with branching
/// `gamma`: the ceiling of `log(d_max/d_min)/log(gamma) + 1`. Ratios within
/// 1e-9 of an exact power snap to it first, so that inverting the formula
/// round-trips instead of tipping over the ceiling.
pub fn levels_required(d_max: f64, d_min: f64, gamma: u32) -> Result<u32, SynthesisError> {
    if gamma < 2 {
        return Err(SynthesisError::InvalidParameter(format!(
            "branching factor gamma must be at least 2, got {gamma}"
        )));
    }
    if !(d_min > 0.0 && d_max >= d_min) {
        return Err(SynthesisError::InvalidParameter(format!(
            "need d_max >= d_min > 0, got d_max={d_max}, d_min={d_min}"
        )));
    }
    let mut x = (d_max / d_min).ln() / (gamma as f64).ln();
    if (x - x.round()).abs() <= 1e-9 * x.round().abs().max(1.0) {
        x = x.round();
    }
    Ok((x + 1.0).ceil() as u32)
}

/// Inverts [`levels_required`]: the finest scale an `n`-level tree resolves,
/// `d_max / gamma^(n-1)`.
pub fn invert_min_scale(d_max: f64, n: u32, gamma: u32) -> Result<f64, SynthesisError> {
    if gamma < 2 || n < 1 {
        return Err(SynthesisError::InvalidParameter(
            "need gamma >= 2 and n >= 1 to invert the level formula".into(),
        ));
    }
    if !(d_max > 0.0) {
        return Err(SynthesisError::InvalidParameter(format!(
            "d_max must be positive, got {d_max}"
        )));
    }
    Ok(d_max / (gamma as f64).powi(n as i32 - 1))
}

/// Upper bound on the finger width: the object perimeter split across the
/// fingers so the hand can envelop it.
pub fn width_upper_bound(perimeter: f64, num_fingers: u32) -> Result<f64, SynthesisError> {
    if !(perimeter > 0.0) {
        return Err(SynthesisError::InvalidParameter(format!(
            "perimeter must be positive, got {perimeter}"
        )));
    }
    if num_fingers < 2 {
        return Err(SynthesisError::InvalidParameter(format!(
            "need at least 2 fingers, got {num_fingers}"
        )));
    }
    Ok(perimeter / num_fingers as f64)
}

/// Fingertip and joint counts for a uniform tree: `gamma^(n-1)` fingertips and
/// the geometric sum `(gamma^(n-1) - 1) / (gamma - 1)` of branching joints
/// over levels `1..n-1`.
pub fn tree_stats(spec: &FingerSpec) -> TreeStats {
    let g = spec.gamma as u64;
    let fingertips = g.pow(spec.n - 1);
    let internal_joints = (fingertips - 1) / (g - 1);
    TreeStats {
        fingertips,
        internal_joints,
        level_scale_ratio: (spec.gamma as f64).powi(spec.n as i32),
    }
}

/// Optional envelop cap applied to the synthesized width.
#[derive(Clone, Copy, Debug)]
pub struct WidthCap {
    pub perimeter: f64,
    pub num_fingers: u32,
}

/// Outcome of [`synthesize_spec`]. A non-converged complexity report is a
/// warning carried in the result, not an error.
#[derive(Clone, Copy, Debug)]
pub struct SynthesisOutcome {
    pub spec: FingerSpec,
    pub width_capped: bool,
    pub non_converged: bool,
}

/// Maps complexity scales to a finger spec: width from `d_max` (optionally
/// capped by the perimeter bound), depth from [`levels_required`], pitch 0
/// unless overridden so all remote centers share the gripper's front line.
pub fn synthesize_spec(
    report: &ComplexityReport,
    gamma: u32,
    cap: Option<WidthCap>,
    pitch: Option<f64>,
    stiffness_k: f64,
) -> Result<SynthesisOutcome, SynthesisError> {
    let n = levels_required(report.d_max, report.d_min, gamma)?;
    let mut width = report.d_max;
    let mut width_capped = false;
    if let Some(c) = cap {
        let bound = width_upper_bound(c.perimeter, c.num_fingers)?;
        if bound < width {
            width = bound;
            width_capped = true;
        }
    }
    let spec = FingerSpec::new(gamma, n, width, pitch.unwrap_or(0.0), stiffness_k)?;
    Ok(SynthesisOutcome { spec, width_capped, non_converged: !report.converged })
}

#[derive(Serialize, Deserialize)]
struct FingerSpecFile {
    gamma: u32,
    n: u32,
    #[serde(rename = "width_D")]
    width_d: f64,
    #[serde(rename = "pitch_P")]
    pitch_p: f64,
    stiffness_k: f64,
    units: Units,
}

pub fn finger_spec_to_json(spec: &FingerSpec, units: Units) -> String {
    let file = FingerSpecFile {
        gamma: spec.gamma,
        n: spec.n,
        width_d: spec.width_d,
        pitch_p: spec.pitch_p,
        stiffness_k: spec.stiffness_k,
        units,
    };
    serde_json::to_string_pretty(&file).expect("finger spec serializes")
}

pub fn finger_spec_from_json(text: &str) -> Result<(FingerSpec, Units), SynthesisError> {
    let file: FingerSpecFile =
        serde_json::from_str(text).map_err(|e| SynthesisError::Malformed(e.to_string()))?;
    let spec =
        FingerSpec::new(file.gamma, file.n, file.width_d, file.pitch_p, file.stiffness_k)?;
    Ok((spec, file.units))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_power_ratio_does_not_tip_the_ceiling() {
        assert_eq!(levels_required(256.0, 1.0, 2).unwrap(), 9);
        assert_eq!(levels_required(1.0, 1.0, 2).unwrap(), 1);
        assert_eq!(levels_required(300.0, 300.0 / 256.0, 2).unwrap(), 9);
        // just above a power boosts the ceiling
        assert_eq!(levels_required(257.0, 1.0, 2).unwrap(), 10);
        assert_eq!(levels_required(9.0, 1.0, 3).unwrap(), 3);
    }

    #[test]
    fn household_fixture_by_inversion() {
        // d_max = 30 cm with n = 9 at gamma = 2 implies d_min of about 1.17 mm
        let d_min = invert_min_scale(300.0, 9, 2).unwrap();
        assert_relative_eq!(d_min, 1.171875, epsilon = 1e-12);
        assert_relative_eq!(d_min, 1.17, max_relative = 2e-3);
        assert_eq!(levels_required(300.0, d_min, 2).unwrap(), 9);
    }

    #[test]
    fn levels_monotone_in_ratio_and_gamma() {
        let mut prev = 0;
        for ratio in [1.0, 1.5, 3.0, 8.0, 64.0, 1000.0] {
            let n = levels_required(ratio, 1.0, 2).unwrap();
            assert!(n >= prev);
            prev = n;
        }
        let mut prev = u32::MAX;
        for gamma in [2, 3, 4, 8] {
            let n = levels_required(1000.0, 1.0, gamma).unwrap();
            assert!(n <= prev);
            prev = n;
        }
    }

    #[test]
    fn width_bound_examples() {
        assert_relative_eq!(
            width_upper_bound(std::f64::consts::TAU, 2).unwrap(),
            std::f64::consts::PI
        );
        assert_relative_eq!(width_upper_bound(40.0, 4).unwrap(), 10.0);
        assert!(width_upper_bound(-1.0, 2).is_err());
        assert!(width_upper_bound(10.0, 1).is_err());
    }

    #[test]
    fn tree_counts() {
        let s = FingerSpec::new(2, 3, 100.0, 0.0, 0.0).unwrap();
        let t = tree_stats(&s);
        assert_eq!((t.fingertips, t.internal_joints), (4, 3));
        assert_eq!(t.level_scale_ratio, 8.0);

        let s = FingerSpec::new(2, 5, 100.0, 0.0, 0.0).unwrap();
        assert_eq!(tree_stats(&s).fingertips, 16);

        let s = FingerSpec::new(3, 3, 100.0, 0.0, 0.0).unwrap();
        let t = tree_stats(&s);
        assert_eq!((t.fingertips, t.internal_joints), (9, 4));
    }

    #[test]
    fn fingertip_joint_relation_holds() {
        for gamma in 2..=5u32 {
            for n in 1..=8u32 {
                let s = FingerSpec::new(gamma, n, 1.0, 0.0, 0.0).unwrap();
                let t = tree_stats(&s);
                assert_eq!(
                    t.fingertips,
                    t.internal_joints * (gamma as u64 - 1) + 1,
                    "gamma={gamma} n={n}"
                );
            }
        }
    }

    #[test]
    fn synthesize_from_report() {
        let report =
            ComplexityReport { d_max: 300.0, d_min: 1.171875, converged: true, tolerance: 0.3 };
        let out = synthesize_spec(&report, 2, None, None, 0.0).unwrap();
        assert_eq!(out.spec.n, 9);
        assert_eq!(out.spec.width_d, 300.0);
        assert_eq!(out.spec.pitch_p, 0.0);
        assert!(!out.non_converged && !out.width_capped);

        // degenerate single-scale object
        let flat = ComplexityReport { d_max: 50.0, d_min: 50.0, converged: true, tolerance: 0.3 };
        let out = synthesize_spec(&flat, 2, None, None, 0.0).unwrap();
        assert_eq!(out.spec.n, 1);
        assert_eq!(out.spec.width_d, 50.0);

        // non-converged reports warn instead of failing
        let rough =
            ComplexityReport { d_max: 50.0, d_min: 1.0, converged: false, tolerance: 0.3 };
        let out = synthesize_spec(&rough, 2, None, None, 0.0).unwrap();
        assert!(out.non_converged);

        // perimeter cap engages when tighter than d_max
        let out = synthesize_spec(
            &rough,
            2,
            Some(WidthCap { perimeter: 60.0, num_fingers: 2 }),
            None,
            0.0,
        )
        .unwrap();
        assert_eq!(out.spec.width_d, 30.0);
        assert!(out.width_capped);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = FingerSpec::new(2, 3, 100.0, 0.0, 1.5).unwrap();
        let json = finger_spec_to_json(&spec, Units::Mm);
        assert!(json.contains("\"width_D\""));
        let (back, units) = finger_spec_from_json(&json).unwrap();
        assert_eq!(back, spec);
        assert_eq!(units, Units::Mm);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(FingerSpec::new(1, 3, 1.0, 0.0, 0.0).is_err());
        assert!(FingerSpec::new(2, 0, 1.0, 0.0, 0.0).is_err());
        assert!(FingerSpec::new(2, 3, 0.0, 0.0, 0.0).is_err());
        assert!(FingerSpec::new(2, 3, 1.0, -1.0, 0.0).is_err());
        assert!(levels_required(10.0, 20.0, 2).is_err());
        assert!(levels_required(10.0, 1.0, 1).is_err());
    }
}
