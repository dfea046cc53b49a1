//! Static beeswarm rendering of attribution tables.

use std::fmt::Write;

use swarmx_core::seed::splitmix64;
use swarmx_core::xplain::SwarmPoint;

const WIDTH: f64 = 900.0;
const LEFT: f64 = 110.0;
const RIGHT: f64 = 140.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const BAND: f64 = 56.0;

// Perceptually ordered ramp from violet (low) to yellow (high).
const RAMP: [(u8, u8, u8); 5] = [(68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37)];

pub fn ramp_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let i = (t.floor() as usize).min(RAMP.len() - 2);
    let f = t - i as f64;
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * f).round() as u8;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Vertical offset in [-0.5, 0.5) derived from the row index alone.
fn jitter(row: usize) -> f64 {
    (splitmix64(row as u64) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}

/// Renders points already in plot order: one band per feature in
/// first-appearance order, x = shap value, color = normalized feature value.
pub fn render_swarm(points: &[SwarmPoint]) -> String {
    let mut features: Vec<&str> = Vec::new();
    for p in points {
        if !features.contains(&p.feature.as_str()) {
            features.push(&p.feature);
        }
    }
    let bands = features.len().max(1);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = BAND * bands as f64;
    let height = TOP + plot_h + BOTTOM;
    let extent = points.iter().map(|p| p.shap_value.abs()).fold(0.0, f64::max);
    let extent = if extent > 0.0 { extent * 1.05 } else { 1.0 };
    let x_of = |v: f64| LEFT + (v + extent) / (2.0 * extent) * plot_w;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{WIDTH:.0}" height="{height:.0}" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r#"<defs><linearGradient id="ramp" x1="0" y1="1" x2="0" y2="0">{}</linearGradient></defs>"#,
        (0..RAMP.len())
            .map(|i| {
                let t = i as f64 / (RAMP.len() - 1) as f64;
                format!(r#"<stop offset="{t:.2}" stop-color="{}"/>"#, ramp_color(t))
            })
            .collect::<String>()
    );

    // Bands and labels.
    for (b, name) in features.iter().enumerate() {
        let y = TOP + BAND * b as f64;
        if b % 2 == 1 {
            let _ = writeln!(s, r##"<rect x="{LEFT:.1}" y="{y:.1}" width="{plot_w:.1}" height="{BAND:.1}" fill="#f4f4f4"/>"##);
        }
        let _ = writeln!(
            s,
            r#"<text class="band" x="{:.1}" y="{:.1}" text-anchor="end" dominant-baseline="middle">{name}</text>"#,
            LEFT - 8.0,
            y + BAND / 2.0
        );
    }

    // Axis, ticks and zero line.
    let axis_y = TOP + plot_h;
    let _ = writeln!(s, r##"<line x1="{LEFT:.1}" y1="{axis_y:.1}" x2="{:.1}" y2="{axis_y:.1}" stroke="#333333"/>"##, LEFT + plot_w);
    for i in 0..=4 {
        let v = -extent + extent * 0.5 * i as f64;
        let x = x_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{axis_y:.1}" x2="{x:.1}" y2="{:.1}" stroke="#333333"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            axis_y + 5.0,
            axis_y + 18.0,
            tick_label(v)
        );
    }
    let zx = x_of(0.0);
    let _ = writeln!(
        s,
        r##"<line class="zero" x1="{zx:.1}" y1="{TOP:.1}" x2="{zx:.1}" y2="{axis_y:.1}" stroke="#888888" stroke-dasharray="4 3"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">SHAP value (impact on AOCC)</text>"#,
        LEFT + plot_w / 2.0,
        axis_y + 40.0
    );

    if points.is_empty() {
        let _ = writeln!(
            s,
            r##"<text class="nodata" x="{:.1}" y="{:.1}" text-anchor="middle" fill="#666666">no data</text>"##,
            LEFT + plot_w / 2.0,
            TOP + plot_h / 2.0
        );
    }

    for (row, p) in points.iter().enumerate() {
        let b = features.iter().position(|f| *f == p.feature).unwrap_or(0);
        let cy = TOP + BAND * (b as f64 + 0.5) + jitter(row) * BAND * 0.7;
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{cy:.2}" r="2.5" fill="{}" fill-opacity="0.8"/>"#,
            x_of(p.shap_value),
            ramp_color(p.normalized_value)
        );
    }

    // Color legend.
    let lx = LEFT + plot_w + 40.0;
    let lh = (plot_h - 20.0).clamp(40.0, 200.0);
    let _ = writeln!(s, r##"<rect x="{lx:.1}" y="{TOP:.1}" width="14" height="{lh:.1}" fill="url(#ramp)" stroke="#333333"/>"##);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">high</text>"#, lx + 20.0, TOP + 10.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">low</text>"#, lx + 20.0, TOP + lh);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" transform="rotate(-90 {:.1} {:.1})" text-anchor="middle">feature value</text>"#,
        lx - 8.0,
        TOP + lh / 2.0,
        lx - 8.0,
        TOP + lh / 2.0
    );
    s.push_str("</svg>\n");
    s
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(f: &str, s: f64, v: f64) -> SwarmPoint {
        SwarmPoint { feature: f.into(), shap_value: s, normalized_value: v }
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp_color(0.0), "#440154");
        assert_eq!(ramp_color(1.0), "#fde725");
        assert_eq!(ramp_color(2.0), "#fde725");
    }

    #[test]
    fn jitter_range() {
        assert!((0..1000).map(jitter).all(|j| (-0.5..0.5).contains(&j)));
    }

    #[test]
    fn empty_plot_has_axes_and_note() {
        let svg = render_swarm(&[]);
        assert!(svg.contains("no data"));
        assert!(svg.contains("SHAP value"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn one_band_per_feature() {
        let pts = vec![pt("c1", 0.1, 0.0), pt("c1", -0.1, 1.0), pt("w", 0.02, 0.5)];
        let svg = render_swarm(&pts);
        assert_eq!(svg.matches(r#"class="band""#).count(), 2);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg, render_swarm(&pts));
    }
}
