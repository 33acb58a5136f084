//! Minimal static SVG bar chart for values in [0, 1].

use std::fmt::Write;

pub(crate) struct Bar {
    pub label: String,
    pub value: f64,
}

const BAR_W: f64 = 48.0;
const GAP: f64 = 24.0;
const PLOT_H: f64 = 200.0;
const LEFT: f64 = 48.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 160.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub(crate) fn bar_chart(title: &str, bars: &[Bar]) -> String {
    let width = LEFT + GAP + bars.len() as f64 * (BAR_W + GAP);
    let height = TOP + PLOT_H + BOTTOM;
    let base = TOP + PLOT_H;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="18" font-size="14">{}</text>"#,
        escape(title)
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y = base - tick * PLOT_H;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y}" x2="{width}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{tick}</text>"##,
            LEFT - 4.0,
            y + 4.0
        );
    }
    for (i, bar) in bars.iter().enumerate() {
        let v = if bar.value.is_finite() {
            bar.value.clamp(0.0, 1.0)
        } else {
            0.0
        };
        let x = LEFT + GAP + i as f64 * (BAR_W + GAP);
        let h = v * PLOT_H;
        let cx = x + BAR_W / 2.0;
        let _ = writeln!(
            s,
            r##"<rect x="{x}" y="{}" width="{BAR_W}" height="{h}" fill="#4878a8"/><text x="{cx}" y="{}" text-anchor="middle">{:.3}</text>"##,
            base - h,
            base - h - 4.0,
            v
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate({cx},{}) rotate(45)">{}</text>"#,
            base + 12.0,
            escape(&bar.label)
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{base}" x2="{width}" y2="{base}" stroke="black"/>"#
    );
    s.push_str("</svg>\n");
    s
}
