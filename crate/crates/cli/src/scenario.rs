//! Scenario files.
//!
//! A scenario is line-oriented text. `#` starts a comment. Section headers
//! are `[scene]`, `[camera_model]` (each exactly once) and `[obstacle]` (any
//! number of times); every other non-blank line is `key = value`.
//!
//! ```text
//! [scene]
//! width = 10          # meters
//! height = 10
//! resolution = 2      # cells per meter
//! cameras = 4
//!
//! [camera_model]
//! fov_half_angle = 45 deg   # radians unless suffixed with `deg`
//! range = 6
//!
//! [obstacle]
//! x_min = 2
//! y_min = 3
//! x_max = 4
//! y_max = 7
//! ```
//!
//! Keys may not repeat within a section and unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use rbfbca::objectives::{CoverageScene, Rect};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: [{section}] is missing `{field}`")]
    MissingField {
        line: usize,
        section: String,
        field: &'static str,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    fields: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn number(&self, field: &'static str) -> Result<f64, ScenarioError> {
        let (line, raw) = self.fields.get(field).ok_or(ScenarioError::MissingField {
            line: self.line,
            section: self.name.clone(),
            field,
        })?;
        parse_number(raw).ok_or_else(|| ScenarioError::Syntax {
            line: *line,
            message: format!("`{field}` has non-numeric value `{raw}`"),
        })
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), ScenarioError> {
        match self
            .fields
            .iter()
            .find(|(k, _)| !allowed.contains(&k.as_str()))
        {
            Some((k, (line, _))) => Err(ScenarioError::Syntax {
                line: *line,
                message: format!("unknown key `{k}` in [{}]", self.name),
            }),
            None => Ok(()),
        }
    }
}

/// Finite number, optionally suffixed with `deg` or `rad`.
fn parse_number(raw: &str) -> Option<f64> {
    let (num, scale) = if let Some(v) = raw.strip_suffix("deg") {
        (v, std::f64::consts::PI / 180.0)
    } else if let Some(v) = raw.strip_suffix("rad") {
        (v, 1.0)
    } else {
        (raw, 1.0)
    };
    num.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(|v| v * scale)
}

fn sections(text: &str) -> Result<Vec<Section>, ScenarioError> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !matches!(name, "scene" | "camera_model" | "obstacle") {
                return Err(ScenarioError::Syntax {
                    line,
                    message: format!("unknown section [{name}]"),
                });
            }
            if name != "obstacle" && out.iter().any(|s| s.name == name) {
                return Err(ScenarioError::Syntax {
                    line,
                    message: format!("duplicate section [{name}]"),
                });
            }
            out.push(Section {
                name: name.to_string(),
                line,
                fields: BTreeMap::new(),
            });
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ScenarioError::Syntax {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(section) = out.last_mut() else {
            return Err(ScenarioError::Syntax {
                line,
                message: format!("`{key}` appears before any section"),
            });
        };
        if key.is_empty() || value.is_empty() {
            return Err(ScenarioError::Syntax {
                line,
                message: "empty key or value".into(),
            });
        }
        if section.fields.contains_key(key) {
            return Err(ScenarioError::Syntax {
                line,
                message: format!("duplicate field `{key}` in [{}]", section.name),
            });
        }
        section
            .fields
            .insert(key.to_string(), (line, value.to_string()));
    }
    Ok(out)
}

fn count(section: &Section, field: &'static str) -> Result<usize, ScenarioError> {
    let v = section.number(field)?;
    if v < 1.0 || v.fract() != 0.0 {
        let line = section.fields[field].0;
        return Err(ScenarioError::Syntax {
            line,
            message: format!("`{field}` must be a positive integer, got {v}"),
        });
    }
    Ok(v as usize)
}

/// Parses and validates scenario text.
pub fn parse_scenario_str(text: &str) -> Result<CoverageScene, ScenarioError> {
    let sections = sections(text)?;
    let find = |name: &str| {
        sections
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| ScenarioError::Invalid(format!("missing section [{name}]")))
    };
    let scene = find("scene")?;
    scene.check_keys(&["width", "height", "resolution", "cameras"])?;
    let model = find("camera_model")?;
    model.check_keys(&["fov_half_angle", "range"])?;

    let width = scene.number("width")?;
    let height = scene.number("height")?;
    let resolution = scene.number("resolution")?;
    if resolution <= 0.0 {
        return Err(ScenarioError::Syntax {
            line: scene.fields["resolution"].0,
            message: format!("resolution must be positive, got {resolution}"),
        });
    }
    let cameras = count(scene, "cameras")?;

    let mut obstacles = Vec::new();
    for (index, s) in sections.iter().filter(|s| s.name == "obstacle").enumerate() {
        s.check_keys(&["x_min", "y_min", "x_max", "y_max"])?;
        let r = Rect::new(
            s.number("x_min")?,
            s.number("y_min")?,
            s.number("x_max")?,
            s.number("y_max")?,
        );
        if r.x_min < 0.0 || r.y_min < 0.0 || r.x_max > width || r.y_max > height {
            return Err(ScenarioError::Syntax {
                line: s.line,
                message: format!("obstacle {index} extends past the {width} x {height} scene box"),
            });
        }
        obstacles.push(r);
    }

    let parsed = CoverageScene {
        width,
        height,
        obstacles,
        resolution,
        fov_half_angle: model.number("fov_half_angle")?,
        range: model.number("range")?,
        cameras,
    };
    parsed
        .validate()
        .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
    Ok(parsed)
}

pub fn parse_scenario(path: &Path) -> Result<CoverageScene, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario_str(&text)
}

/// The two-obstacle demo room shipped with the binary.
pub const TWO_OBSTACLES: &str = include_str!("../scenes/two_obstacles.scn");

pub fn two_obstacles() -> CoverageScene {
    parse_scenario_str(TWO_OBSTACLES).expect("bundled scene is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
[scene]
width = 10
height = 10
resolution = 1
cameras = 1

[camera_model]
fov_half_angle = 180 deg
range = 20
";

    #[test]
    fn minimal_scene_has_a_hundred_cells() {
        let s = parse_scenario_str(MINIMAL).unwrap();
        assert_eq!(s.free_cells().len(), 100);
        assert_eq!(s.cameras, 1);
        assert!((s.fov_half_angle - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn obstacle_outside_the_box_is_named() {
        let text = format!("{MINIMAL}\n[obstacle]\nx_min=1\ny_min=1\nx_max=2\ny_max=2\n[obstacle]\nx_min = 8\ny_min = 8\nx_max = 11\ny_max = 9\n");
        let err = parse_scenario_str(&text).unwrap_err().to_string();
        assert!(err.contains("obstacle 1"), "{err}");
        assert!(err.contains("line 17"), "{err}");
    }

    #[test]
    fn duplicate_fields_are_rejected() {
        let text = MINIMAL.replace("height = 10", "height = 10\nheight = 12");
        let err = parse_scenario_str(&text).unwrap_err().to_string();
        assert!(err.contains("duplicate field `height`"), "{err}");
    }

    #[test]
    fn missing_and_malformed_fields() {
        let err = parse_scenario_str(&MINIMAL.replace("range = 20", ""))
            .unwrap_err()
            .to_string();
        assert!(err.contains("missing `range`"), "{err}");
        let err = parse_scenario_str(&MINIMAL.replace("resolution = 1", "resolution = 0"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("resolution must be positive"), "{err}");
        let err = parse_scenario_str(&MINIMAL.replace("width = 10", "width = ten"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = parse_scenario_str(&MINIMAL.replace("cameras = 1", "cameras = 1\nzoom = 2"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("unknown key `zoom`"), "{err}");
    }

    #[test]
    fn bundled_scene_parses() {
        let s = two_obstacles();
        assert_eq!(s.obstacles.len(), 2);
        assert_eq!(s.cameras, 4);
    }
}
