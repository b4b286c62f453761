//! SVG rendering of layouts as colored layers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bounding_box, BoundingBox, PlacedRect};

pub const PLACED_COLOR: &str = "purple";
pub const TRUTH_COLOR: &str = "blue";
pub const PREDICTED_COLOR: &str = "red";

/// Default colors for layers given without one, in order.
pub const PALETTE: [&str; 3] = [PLACED_COLOR, TRUTH_COLOR, PREDICTED_COLOR];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub label: String,
    pub rects: Vec<PlacedRect>,
    pub color: String,
}

impl Layer {
    pub fn new(label: impl Into<String>, rects: Vec<PlacedRect>, color: impl Into<String>) -> Self {
        Layer {
            label: label.into(),
            rects,
            color: color.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    /// Grid size as (columns, rows); draws unit grid lines over that extent.
    pub grid: Option<(u32, u32)>,
    /// Flip so that larger y is drawn higher up. Off for grid data.
    pub y_up: bool,
    pub margin: f64,
    /// Output pixels per layout unit.
    pub scale: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            grid: None,
            y_up: false,
            margin: 1.0,
            scale: 20.0,
        }
    }
}

/// Fixed-precision number text with trailing zeros removed.
fn n(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render_svg(layers: &[Layer], grid: Option<(u32, u32)>) -> Result<String> {
    render_svg_with(
        layers,
        &RenderOptions {
            grid,
            ..RenderOptions::default()
        },
    )
}

/// Extent of all layers and the grid, before margins.
pub fn content_bounds(layers: &[Layer], grid: Option<(u32, u32)>) -> Result<BoundingBox> {
    let all: Vec<PlacedRect> = layers.iter().flat_map(|l| l.rects.iter().copied()).collect();
    let grid_box = grid.map(|(c, r)| BoundingBox {
        min_x: 0.0,
        min_y: 0.0,
        max_x: f64::from(c),
        max_y: f64::from(r),
    });
    match (all.is_empty(), grid_box) {
        (true, Some(g)) => Ok(g),
        (true, None) => Err(Error::Render("layers contain no rectangles".into())),
        (false, g) => {
            let b = bounding_box(&all)?;
            Ok(g.map_or(b, |g| g.union(&b)))
        }
    }
}

/// Height reserved below the drawing for the legend, in layout units.
pub fn legend_height(layers: &[Layer], margin: f64) -> f64 {
    layers.len() as f64 * margin
}

pub fn render_svg_with(layers: &[Layer], opts: &RenderOptions) -> Result<String> {
    if layers.is_empty() {
        return Err(Error::Render("at least one layer is required".into()));
    }
    if !(opts.margin > 0.0 && opts.scale > 0.0) {
        return Err(Error::Render("margin and scale must be positive".into()));
    }
    let b = content_bounds(layers, opts.grid)?;
    let m = opts.margin;
    let vx = b.min_x - m;
    let vy = if opts.y_up { -b.max_y - m } else { b.min_y - m };
    let vw = b.width() + 2.0 * m;
    let draw_h = b.height() + 2.0 * m;
    let vh = draw_h + legend_height(layers, m);
    let y = |v: f64| if opts.y_up { -v } else { v };
    let stroke = n(m * 0.04);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}" width="{}" height="{}">"#,
        n(vx),
        n(vy),
        n(vw),
        n(vh),
        n(vw * opts.scale),
        n(vh * opts.scale)
    );
    if let Some((cols, rows)) = opts.grid {
        let _ = writeln!(s, r##"<g class="grid" stroke="#cccccc" stroke-width="{stroke}">"##);
        for c in 0..=cols {
            let x = n(f64::from(c));
            let _ = writeln!(
                s,
                r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#,
                n(y(0.0)),
                n(y(f64::from(rows)))
            );
        }
        for r in 0..=rows {
            let yy = n(y(f64::from(r)));
            let _ = writeln!(s, r#"<line x1="0" y1="{yy}" x2="{}" y2="{yy}"/>"#, n(f64::from(cols)));
        }
        s.push_str("</g>\n");
    }

    for layer in layers {
        let _ = writeln!(
            s,
            r#"<g class="layer" data-label="{}" fill="{}" fill-opacity="0.6" stroke="black" stroke-width="{stroke}">"#,
            escape(&layer.label),
            escape(&layer.color)
        );
        for r in &layer.rects {
            let top = if opts.y_up { -r.max_y() } else { r.min_y() };
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
                n(r.min_x()),
                n(top),
                n(r.width),
                n(r.height)
            );
        }
        s.push_str("</g>\n");
    }

    let _ = writeln!(
        s,
        r#"<g class="legend" font-family="sans-serif" font-size="{}">"#,
        n(m * 0.6)
    );
    for (i, layer) in layers.iter().enumerate() {
        let cy = vy + draw_h + m * (i as f64 + 0.5);
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{}"/>"#,
            n(vx + m * 0.5),
            n(cy),
            n(m * 0.25),
            escape(&layer.color)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" dominant-baseline="middle">{}</text>"#,
            n(vx + m),
            n(cy),
            escape(&layer.label)
        );
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Placed, truth and predicted layers with the default palette.
pub fn standard_layers(placed: Vec<PlacedRect>, truth: Vec<PlacedRect>, predicted: Vec<PlacedRect>) -> Vec<Layer> {
    vec![
        Layer::new("placed", placed, PLACED_COLOR),
        Layer::new("truth", truth, TRUTH_COLOR),
        Layer::new("predicted", predicted, PREDICTED_COLOR),
    ]
}
