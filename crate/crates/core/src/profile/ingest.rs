//! Profile ingestion from files.
//!
//! Formats:
//! - `csv_points`: one `x,y` pair per line, header optional.
//! - `json_points`: `{"points": [[x,y], ...], "units": "mm"|"m"|"unitless"}`.
//! - `svg_path`: first closed path element of an SVG document, flattened to a
//!   polyline at a chord tolerance of 1e-3 times the path's bbox diagonal.

use super::{Profile, ProfileError};
use crate::geom::Vec2;
use crate::units::Units;
use kurbo::Shape as _;
use serde::Deserialize;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileFormat {
    CsvPoints,
    JsonPoints,
    SvgPath,
}

impl ProfileFormat {
    /// Guesses the format from a file extension.
    pub fn from_extension(path: &Path) -> Option<ProfileFormat> {
        match path.extension()?.to_str()? {
            "csv" => Some(ProfileFormat::CsvPoints),
            "json" => Some(ProfileFormat::JsonPoints),
            "svg" => Some(ProfileFormat::SvgPath),
            _ => None,
        }
    }
}

/// Ingested profile plus the units declared by the file, when any.
#[derive(Clone, Debug)]
pub struct LoadedProfile {
    pub profile: Profile,
    pub units: Option<Units>,
}

/// Reads, validates and normalizes a boundary file. The returned profile is
/// always counterclockwise with an arc-length-proportional parameter.
pub fn load_profile(path: &Path, format: ProfileFormat) -> Result<LoadedProfile, ProfileError> {
    let text = std::fs::read_to_string(path)?;
    match format {
        ProfileFormat::CsvPoints => Ok(LoadedProfile {
            profile: Profile::from_points(&parse_csv_points(&text)?)?,
            units: None,
        }),
        ProfileFormat::JsonPoints => {
            let (points, units) = parse_json_points(&text)?;
            Ok(LoadedProfile { profile: Profile::from_points(&points)?, units })
        }
        ProfileFormat::SvgPath => Ok(LoadedProfile {
            profile: Profile::from_points(&parse_svg_first_closed_path(&text)?)?,
            units: None,
        }),
    }
}

fn parse_csv_points(text: &str) -> Result<Vec<Vec2>, ProfileError> {
    let malformed = |detail: String| ProfileError::Malformed { format: "csv_points", detail };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        if record.len() != 2 {
            return Err(malformed(format!(
                "line {}: expected 2 fields, got {}",
                idx + 1,
                record.len()
            )));
        }
        let x = record[0].parse::<f64>();
        let y = record[1].parse::<f64>();
        match (x, y) {
            (Ok(x), Ok(y)) => points.push(Vec2::new(x, y)),
            _ if idx == 0 => continue, // optional header line
            _ => return Err(malformed(format!("line {}: non-numeric fields", idx + 1))),
        }
    }
    if points.is_empty() {
        return Err(malformed("no coordinate rows".into()));
    }
    Ok(points)
}

#[derive(Deserialize)]
struct JsonPoints {
    points: Vec<[f64; 2]>,
    #[serde(default)]
    units: Option<Units>,
}

fn parse_json_points(text: &str) -> Result<(Vec<Vec2>, Option<Units>), ProfileError> {
    let parsed: JsonPoints = serde_json::from_str(text).map_err(|e| ProfileError::Malformed {
        format: "json_points",
        detail: e.to_string(),
    })?;
    let points = parsed.points.iter().map(|p| Vec2::new(p[0], p[1])).collect();
    Ok((points, parsed.units))
}

/// Pulls the `d` attribute out of every `<path>` element in document order.
fn svg_path_data(doc: &str) -> Vec<String> {
    let re = regex::Regex::new(r#"<path\b[^>]*?\bd\s*=\s*("([^"]*)"|'([^']*)')"#).unwrap();
    re.captures_iter(doc)
        .filter_map(|c| c.get(2).or_else(|| c.get(3)).map(|m| m.as_str().to_owned()))
        .collect()
}

fn parse_svg_first_closed_path(doc: &str) -> Result<Vec<Vec2>, ProfileError> {
    let malformed = |detail: String| ProfileError::Malformed { format: "svg_path", detail };
    let datas = svg_path_data(doc);
    if datas.is_empty() {
        return Err(malformed("no <path> element with a d attribute".into()));
    }
    let mut first_err = None;
    for d in &datas {
        let path = kurbo::BezPath::from_svg(d).map_err(|e| malformed(e.to_string()))?;
        let Some(sub) = first_subpath(&path) else { continue };
        match closed_polyline(&sub) {
            Ok(points) => return Ok(points),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or_else(|| malformed("no usable path element".into())))
}

fn first_subpath(path: &kurbo::BezPath) -> Option<kurbo::BezPath> {
    let mut sub = kurbo::BezPath::new();
    let mut seen_move = false;
    for el in path.elements() {
        match el {
            kurbo::PathEl::MoveTo(_) if seen_move => break,
            kurbo::PathEl::MoveTo(_) => {
                seen_move = true;
                sub.push(*el);
            }
            kurbo::PathEl::ClosePath => {
                sub.push(*el);
                break;
            }
            _ if seen_move => sub.push(*el),
            _ => return None,
        }
    }
    if seen_move {
        Some(sub)
    } else {
        None
    }
}

fn closed_polyline(sub: &kurbo::BezPath) -> Result<Vec<Vec2>, ProfileError> {
    let bbox = sub.bounding_box();
    let diag = (bbox.width().powi(2) + bbox.height().powi(2)).sqrt();
    if !(diag > 0.0) {
        return Err(ProfileError::Malformed {
            format: "svg_path",
            detail: "path has a degenerate bounding box".into(),
        });
    }
    let tol = 1e-3 * diag;

    let explicitly_closed = sub.elements().iter().any(|e| matches!(e, kurbo::PathEl::ClosePath));
    let mut points: Vec<Vec2> = Vec::new();
    kurbo::flatten(sub.elements().iter().copied(), tol, |el| match el {
        kurbo::PathEl::MoveTo(p) | kurbo::PathEl::LineTo(p) => {
            points.push(Vec2::new(p.x, p.y));
        }
        _ => {}
    });
    if points.len() < 3 {
        return Err(ProfileError::Malformed {
            format: "svg_path",
            detail: "flattened path has fewer than 3 points".into(),
        });
    }
    if !explicitly_closed {
        let gap = points[0].dist(*points.last().unwrap());
        if gap > tol {
            return Err(ProfileError::OpenCurve { gap });
        }
    }
    Ok(points)
}
