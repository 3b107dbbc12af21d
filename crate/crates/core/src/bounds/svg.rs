use std::fmt::Write;

use super::SweepRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Line chart of bound versus epsilon, one polyline per horizon.
pub fn render_sweep_svg(rows: &[SweepRow]) -> String {
    let mut horizons: Vec<u32> = rows.iter().map(|r| r.delta_t).collect();
    horizons.sort_unstable();
    horizons.dedup();
    let (x_min, x_max) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.epsilon), hi.max(r.epsilon))
    });
    let span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x_min) / span * plot_w;
    let py = |y: f64| HEIGHT - MARGIN - y.clamp(0.0, 1.0) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {} L{x0} {y0} L{} {y0}" stroke="black" fill="none"/>"#,
        MARGIN,
        WIDTH - MARGIN
    );
    for i in 0..=4 {
        let y = i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" font-size="11" text-anchor="end">{y:.2}</text>"#,
            MARGIN - 6.0,
            py(y) + 4.0
        );
        let x = x_min + span * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" font-size="11" text-anchor="middle">{x:.2}</text>"#,
            px(x),
            y0 + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">penetration epsilon</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">P_Trend lower bound</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (i, &dt) in horizons.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = rows
            .iter()
            .filter(|r| r.delta_t == dt)
            .map(|r| format!("{:.2},{:.2}", px(r.epsilon), py(r.bound)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" stroke="{color}" stroke-width="2" fill="none"/>"#,
            points.join(" ")
        );
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" font-size="11" fill="{color}">delta_t = {dt}</text>"#,
            WIDTH - MARGIN - 80.0
        );
    }
    s.push_str("</svg>\n");
    s
}
