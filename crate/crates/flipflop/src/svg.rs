//! Static SVG 1.1 scatter and polyline plots on a fixed 800×800 canvas.
//!
//! The plot window is the unit square. When data leave it, the window grows
//! to the data's bounding box plus a 5% margin; coordinates beyond
//! [`CLIP`] are left out of that box and not drawn.

use std::io::{self, Write};

use flipflop_core::Point;

const SIZE: f64 = 800.0;
const PAD: f64 = 40.0;
const MARGIN: f64 = 0.05;
pub const CLIP: f64 = 10.0;
/// Longer layers are thinned by a fixed stride.
pub const MAX_LAYER_POINTS: usize = 20_000;

#[derive(Debug, Clone, Copy)]
pub enum Style {
    Dots { radius: f64 },
    Line { closed: bool },
}

pub struct Layer {
    pub label: String,
    pub points: Vec<Point>,
    pub color: &'static str,
    pub style: Style,
}

impl Layer {
    pub fn dots(label: impl Into<String>, points: &[Point], color: &'static str) -> Layer {
        Layer {
            label: label.into(),
            points: thin(points),
            color,
            style: Style::Dots { radius: 0.8 },
        }
    }

    pub fn marker(label: impl Into<String>, p: Point, color: &'static str) -> Layer {
        Layer {
            label: label.into(),
            points: vec![p],
            color,
            style: Style::Dots { radius: 4.0 },
        }
    }

    pub fn line(label: impl Into<String>, points: &[Point], color: &'static str, closed: bool) -> Layer {
        Layer {
            label: label.into(),
            points: thin(points),
            color,
            style: Style::Line { closed },
        }
    }
}

fn thin(points: &[Point]) -> Vec<Point> {
    let stride = points.len().div_ceil(MAX_LAYER_POINTS).max(1);
    points.iter().step_by(stride).copied().collect()
}

fn drawable(p: &Point) -> bool {
    p.x.abs() <= CLIP && p.y.abs() <= CLIP
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub layers: Vec<Layer>,
}

impl Plot {
    pub fn new(title: impl Into<String>) -> Plot {
        Plot {
            title: title.into(),
            x_label: "x".into(),
            y_label: "y".into(),
            layers: Vec::new(),
        }
    }

    pub fn with(mut self, layer: Layer) -> Plot {
        self.layers.push(layer);
        self
    }

    fn window(&self) -> (Point, Point) {
        let (mut lo, mut hi) = (Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        for p in self.layers.iter().flat_map(|l| &l.points).filter(|p| drawable(p)) {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if lo != Point::new(0.0, 0.0) || hi != Point::new(1.0, 1.0) {
            let d = (hi - lo) * MARGIN;
            lo = lo - d;
            hi = hi + d;
        }
        (lo, hi)
    }

    pub fn render(&self, out: &mut impl Write, header: &[String]) -> io::Result<()> {
        let (lo, hi) = self.window();
        let span = SIZE - 2.0 * PAD;
        let px = |p: Point| {
            (
                PAD + (p.x - lo.x) / (hi.x - lo.x) * span,
                SIZE - PAD - (p.y - lo.y) / (hi.y - lo.y) * span,
            )
        };

        writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#)?;
        for line in header {
            // "--" may not appear inside an XML comment
            writeln!(out, "<!-- {} -->", line.replace("--", "- -"))?;
        }
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="800" height="800" viewBox="0 0 800 800">"#
        )?;
        writeln!(out, r#"<rect x="0" y="0" width="800" height="800" fill="white"/>"#)?;
        let (x0, y0) = px(Point::new(0.0, 1.0));
        let (x1, y1) = px(Point::new(1.0, 0.0));
        writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#bbbbbb" stroke-width="1"/>"##,
            x1 - x0,
            y1 - y0
        )?;

        for layer in &self.layers {
            writeln!(out, "<g id=\"{}\">", escape(&layer.label))?;
            let visible = layer.points.iter().copied().filter(drawable);
            match layer.style {
                Style::Dots { radius } => {
                    for p in visible {
                        let (x, y) = px(p);
                        writeln!(
                            out,
                            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{radius}" fill="{}"/>"#,
                            layer.color
                        )?;
                    }
                }
                Style::Line { closed } => {
                    let coords: Vec<String> = visible
                        .map(|p| {
                            let (x, y) = px(p);
                            format!("{x:.2},{y:.2}")
                        })
                        .collect();
                    let tag = if closed { "polygon" } else { "polyline" };
                    writeln!(
                        out,
                        r#"<{tag} points="{}" fill="none" stroke="{}" stroke-width="1"/>"#,
                        coords.join(" "),
                        layer.color
                    )?;
                }
            }
            writeln!(out, "</g>")?;
        }

        writeln!(
            out,
            r#"<text x="400" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
            escape(&self.title)
        )?;
        writeln!(
            out,
            r#"<text x="400" y="790" font-family="sans-serif" font-size="12" text-anchor="middle">{} [{:.4}, {:.4}]</text>"#,
            escape(&self.x_label),
            lo.x,
            hi.x
        )?;
        writeln!(
            out,
            r#"<text x="12" y="400" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 12 400)">{} [{:.4}, {:.4}]</text>"#,
            escape(&self.y_label),
            lo.y,
            hi.y
        )?;
        writeln!(out, "</svg>")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
