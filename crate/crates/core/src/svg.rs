//! Deterministic SVG rendering of a planar mission and trajectory.
//!
//! Reach regions are filled green and avoid regions red. The path is drawn as
//! a grey polyline overlaid with per-segment strokes whose colour runs from
//! blue at `t = 0` to orange at the horizon; waypoints are circles labelled
//! with their timestamps.

use std::fmt::Write;

use crate::geometry::PwlTrajectory;
use crate::mission::{Mission, RegionRole};

const CANVAS: f64 = 480.0;
const MARGIN: f64 = 30.0;
const EARLY: [f64; 3] = [33.0, 102.0, 204.0];
const LATE: [f64; 3] = [242.0, 133.0, 0.0];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvgError {
    #[error("only planar missions can be plotted, this one has dimension {0}")]
    NotPlanar(usize),
    #[error("trajectory has dimension {found}, mission has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgPlot {
    pub svg: String,
    /// Waypoints clamped into the view box.
    pub warnings: Vec<String>,
}

struct View {
    lower: [f64; 2],
    scale: f64,
    height: f64,
}

impl View {
    fn x(&self, x: f64) -> f64 {
        MARGIN + (x - self.lower[0]) * self.scale
    }

    fn y(&self, y: f64) -> f64 {
        // SVG y grows downwards.
        MARGIN + self.height - (y - self.lower[1]) * self.scale
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn time_colour(frac: f64) -> String {
    let f = frac.clamp(0.0, 1.0);
    let c: Vec<u8> = (0..3)
        .map(|k| (EARLY[k] + (LATE[k] - EARLY[k]) * f).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render `mission` with `traj` (if any) on top.
pub fn render_svg(mission: &Mission, traj: Option<&PwlTrajectory<f64>>) -> Result<SvgPlot, SvgError> {
    let ws = &mission.workspace;
    if ws.dim() != 2 {
        return Err(SvgError::NotPlanar(ws.dim()));
    }
    if let Some(tr) = traj {
        let found = tr.p(0).len();
        if found != 2 {
            return Err(SvgError::DimensionMismatch { expected: 2, found });
        }
    }
    let span = [ws.upper[0] - ws.lower[0], ws.upper[1] - ws.lower[1]];
    let scale = CANVAS / span[0].max(span[1]);
    let view = View {
        lower: [ws.lower[0], ws.lower[1]],
        scale,
        height: span[1] * scale,
    };
    let width = span[0] * scale + 2.0 * MARGIN;
    let height = view.height + 2.0 * MARGIN;
    let mut out = String::new();
    let mut warnings = Vec::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
        w = num(width),
        h = num(height)
    );
    let _ = writeln!(out, "<title>{}</title>", escape(&mission.file.name));
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#ffffff" stroke="#333333"/>"##,
        num(MARGIN),
        num(MARGIN),
        num(span[0] * scale),
        num(view.height)
    );
    for (name, region) in &mission.regions {
        let fill = match mission.roles.get(name) {
            Some(RegionRole::Avoid) => "#e53935",
            _ => "#43a047",
        };
        let verts = region.vertices();
        let points: Vec<String> = verts
            .iter()
            .map(|v| format!("{},{}", num(view.x(v[0])), num(view.y(v[1]))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="0.35" stroke="{fill}"/>"#,
            points.join(" ")
        );
        let n = verts.len().max(1) as f64;
        let cx = verts.iter().map(|v| v[0]).sum::<f64>() / n;
        let cy = verts.iter().map(|v| v[1]).sum::<f64>() / n;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            num(view.x(cx)),
            num(view.y(cy)),
            escape(name)
        );
    }
    if let Some(tr) = traj {
        let horizon = ws.horizon.max(tr.end_time().abs()).max(f64::MIN_POSITIVE);
        let pts: Vec<[f64; 2]> = tr
            .waypoints()
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let clamped = [
                    w.p[0].clamp(ws.lower[0], ws.upper[0]),
                    w.p[1].clamp(ws.lower[1], ws.upper[1]),
                ];
                if clamped[0] != w.p[0] || clamped[1] != w.p[1] {
                    warnings.push(format!(
                        "waypoint {k} at ({}, {}) lies outside the workspace and is drawn clamped",
                        w.p[0], w.p[1]
                    ));
                }
                [view.x(clamped[0]), view.y(clamped[1])]
            })
            .collect();
        let line: Vec<String> = pts.iter().map(|p| format!("{},{}", num(p[0]), num(p[1]))).collect();
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#9e9e9e" stroke-width="4"/>"##,
            line.join(" ")
        );
        for i in 0..tr.num_segments() {
            let mid = (tr.t(i) + tr.t(i + 1)) / 2.0;
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"/>"#,
                num(pts[i][0]),
                num(pts[i][1]),
                num(pts[i + 1][0]),
                num(pts[i + 1][1]),
                time_colour(mid / horizon)
            );
        }
        for (k, p) in pts.iter().enumerate() {
            let t = *tr.t(k);
            let _ = writeln!(
                out,
                r##"<circle cx="{}" cy="{}" r="4" fill="{}" stroke="#222222"/>"##,
                num(p[0]),
                num(p[1]),
                time_colour(t / horizon)
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}">t={}</text>"#,
                num(p[0] + 6.0),
                num(p[1] - 6.0),
                num(t)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(SvgPlot { svg: out, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Waypoint;
    use crate::mission::{MissionFile, ObjectiveName, RegionSpec, WorkspaceBounds};
    use crate::monitor::Side;

    fn mission(regions: Vec<RegionSpec>, formula: &str) -> Mission {
        MissionFile {
            schema: 1,
            name: "plot".into(),
            workspace: WorkspaceBounds {
                lower: vec![0.0, 0.0],
                upper: vec![4.0, 2.0],
            },
            horizon: 4.0,
            regions,
            formula: formula.into(),
            k: 3,
            v_b: 1.0,
            theta_star: 0.1,
            lambda: 1.0,
            epsilon: 0.1,
            eps_t: 1e-3,
            start: None,
            goal: None,
            objective: ObjectiveName::L1Path,
            side: Side::Right,
            encoding: Default::default(),
        }
        .load()
        .unwrap()
    }

    fn traj(points: &[(f64, [f64; 2])]) -> PwlTrajectory<f64> {
        PwlTrajectory::new(points.iter().map(|(t, p)| Waypoint::new(*t, p.to_vec())).collect()).unwrap()
    }

    #[test]
    fn colours_follow_roles_and_time() {
        let m = mission(
            vec![RegionSpec::rect("Home", 0.0, 0.0, 1.0, 1.0), RegionSpec::rect("Rock", 2.0, 0.0, 3.0, 1.0)],
            "F Home & G !Rock",
        );
        let plot = render_svg(&m, Some(&traj(&[(0.0, [0.5, 0.5]), (2.0, [1.5, 1.5]), (4.0, [3.5, 1.5])]))).unwrap();
        assert!(plot.warnings.is_empty());
        assert!(plot.svg.contains(r##"fill="#43a047""##));
        assert!(plot.svg.contains(r##"fill="#e53935""##));
        assert_eq!(plot.svg.matches("<circle").count(), 3);
        assert!(plot.svg.contains(&format!(r#"fill="{}""#, time_colour(0.0))));
        assert!(plot.svg.contains(&format!(r#"fill="{}""#, time_colour(1.0))));
        assert!(plot.svg.contains("t=2.00"));
    }

    #[test]
    fn out_of_view_waypoints_are_clamped() {
        let mut m = mission(vec![RegionSpec::rect("Home", 0.0, 0.0, 1.0, 1.0)], "F Home");
        m.regions.clear();
        let plot = render_svg(&m, Some(&traj(&[(0.0, [0.5, 0.5]), (4.0, [6.0, -1.0])]))).unwrap();
        assert_eq!(plot.warnings.len(), 1);
        assert!(!plot.svg.contains("<polygon"));
        // Clamped to the lower-right corner of the view box.
        assert!(plot.svg.contains(r#"cx="510.00" cy="270.00""#));
    }

    #[test]
    fn rendering_is_deterministic() {
        let m = mission(vec![RegionSpec::rect("Home", 0.0, 0.0, 1.0, 1.0)], "F Home");
        let tr = traj(&[(0.0, [0.5, 0.5]), (4.0, [3.0, 1.0])]);
        assert_eq!(render_svg(&m, Some(&tr)).unwrap(), render_svg(&m, Some(&tr)).unwrap());
    }
}
