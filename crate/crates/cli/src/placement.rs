//! Camera placement runs and their SVG maps.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rbfbca::objectives::{coverage_objective, CoverageScene};
use rbfbca::{solve, SolverConfig, SolverResult, SymmetryGroup};

#[derive(Debug, Clone)]
pub struct PlacementReport {
    pub result: SolverResult,
    pub coverage_percent: f64,
    pub svg_path: Option<PathBuf>,
}

fn heading_towards(from: (f64, f64), to: (f64, f64)) -> f64 {
    (to.1 - from.1).atan2(to.0 - from.0).rem_euclid(TAU)
}

/// Cameras in the corners facing the room center, then at edge midpoints,
/// then cycling again.
pub fn corner_heuristic(scene: &CoverageScene) -> Vec<f64> {
    let (w, h) = (scene.width, scene.height);
    let center = (w / 2.0, h / 2.0);
    let spots = [
        (0.0, 0.0),
        (w, h),
        (w, 0.0),
        (0.0, h),
        (w / 2.0, 0.0),
        (w / 2.0, h),
        (0.0, h / 2.0),
        (w, h / 2.0),
    ];
    (0..scene.cameras)
        .flat_map(|m| {
            let p = spots[m % spots.len()];
            [p.0, p.1, heading_towards(p, center)]
        })
        .collect()
}

/// Every camera in the room center, headings evenly spread.
pub fn central_start(scene: &CoverageScene) -> Vec<f64> {
    let m = scene.cameras;
    (0..m)
        .flat_map(|k| {
            [
                scene.width / 2.0,
                scene.height / 2.0,
                TAU * k as f64 / m as f64,
            ]
        })
        .collect()
}

fn wedge_path(x: f64, y: f64, heading: f64, half: f64, r: f64) -> String {
    if half >= PI {
        return format!(
            "M {:.4} {y:.4} A {r:.4} {r:.4} 0 1 1 {:.4} {y:.4} A {r:.4} {r:.4} 0 1 1 {:.4} {y:.4} Z",
            x - r,
            x + r,
            x - r
        );
    }
    let (a, b) = (heading - half, heading + half);
    let large = u8::from(2.0 * half > PI);
    format!(
        "M {x:.4} {y:.4} L {:.4} {:.4} A {r:.4} {r:.4} 0 {large} 1 {:.4} {:.4} Z",
        x + r * a.cos(),
        y + r * a.sin(),
        x + r * b.cos(),
        y + r * b.sin()
    )
}

/// SVG 1.1 map of the room: scene box, obstacles, one view wedge per camera
/// with its position and heading.
pub fn render_svg(scene: &CoverageScene, params: &[f64], coverage: f64) -> String {
    let scale = 50.0;
    let margin = 0.5;
    let (w, h) = (scene.width, scene.height);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.0}" height="{:.0}" viewBox="{} {} {} {}">"#,
        (w + 2.0 * margin) * scale,
        (h + 2.0 * margin + 0.6) * scale,
        -margin,
        -margin - 0.6,
        w + 2.0 * margin,
        h + 2.0 * margin + 0.6
    );
    let _ = writeln!(
        s,
        r#"<text x="0" y="-0.2" font-size="0.4" font-family="sans-serif">coverage {:.2}%</text>"#,
        100.0 * coverage
    );
    // Scene coordinates have y pointing up.
    let _ = writeln!(s, r#"<g transform="translate(0 {h}) scale(1 -1)">"#);
    let _ = writeln!(
        s,
        r##"<rect class="scene" x="0" y="0" width="{w}" height="{h}" fill="#ffffff" stroke="#000000" stroke-width="0.05"/>"##
    );
    for r in &scene.obstacles {
        let _ = writeln!(
            s,
            r##"<rect class="obstacle" x="{}" y="{}" width="{}" height="{}" fill="#555555"/>"##,
            r.x_min,
            r.y_min,
            r.x_max - r.x_min,
            r.y_max - r.y_min
        );
    }
    for cam in params.chunks(3) {
        let (x, y, heading) = (cam[0], cam[1], cam[2]);
        let _ = writeln!(
            s,
            r##"<path class="wedge" d="{}" fill="#3b82f6" fill-opacity="0.25" stroke="#1d4ed8" stroke-width="0.03"/>"##,
            wedge_path(x, y, heading, scene.fov_half_angle, scene.range)
        );
    }
    for cam in params.chunks(3) {
        let (x, y, heading) = (cam[0], cam[1], cam[2]);
        let _ = writeln!(
            s,
            r##"<circle class="camera" cx="{x:.4}" cy="{y:.4}" r="0.15" fill="#dc2626"/>"##
        );
        let _ = writeln!(
            s,
            r##"<line class="heading" x1="{x:.4}" y1="{y:.4}" x2="{:.4}" y2="{:.4}" stroke="#dc2626" stroke-width="0.06"/>"##,
            x + 0.6 * heading.cos(),
            y + 0.6 * heading.sin()
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

/// Coverage of a fixed placement.
pub fn placement_coverage(scene: &CoverageScene, params: &[f64]) -> anyhow::Result<f64> {
    let f = coverage_objective(scene.clone())?;
    Ok(f.eval_fresh(params)?)
}

/// Optimizes the placement from `x0` (the corner heuristic when `None`) and
/// optionally writes the resulting map to `svg`.
pub fn run_placement(
    scene: &CoverageScene,
    config: &SolverConfig,
    closure: bool,
    x0: Option<&[f64]>,
    svg: Option<&Path>,
) -> anyhow::Result<PlacementReport> {
    let f = coverage_objective(scene.clone())?;
    let group = if closure {
        f.symmetry().clone()
    } else {
        SymmetryGroup::identity(scene.cameras)
    };
    let start = x0.map_or_else(|| corner_heuristic(scene), <[f64]>::to_vec);
    let result = solve(&f, &group, &start, config)?;
    let svg_path = match svg {
        Some(path) => {
            std::fs::write(
                path,
                render_svg(scene, &result.best_point, result.best_value),
            )
            .with_context(|| format!("writing {}", path.display()))?;
            Some(path.to_path_buf())
        }
        None => None,
    };
    Ok(PlacementReport {
        coverage_percent: 100.0 * result.best_value,
        result,
        svg_path,
    })
}
