use std::fmt::Write as _;
use std::path::Path;

use super::{write_file, HarnessError};
use crate::neuralfde::LossHistory;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// SVG of loss against iteration on a logarithmic vertical axis, one
/// polyline per labelled history. Non-positive or non-finite losses are not drawn.
pub fn loss_plot_svg(histories: &[(String, LossHistory)]) -> Result<String, HarnessError> {
    if histories.is_empty() || histories.iter().all(|(_, h)| h.is_empty()) {
        return Err(HarnessError::Usage("no loss histories to plot".into()));
    }
    let positive = || histories.iter().flat_map(|(_, h)| h.loss.iter().copied()).filter(|l| l.is_finite() && *l > 0.0);
    let lo = positive().fold(f64::INFINITY, f64::min);
    let hi = positive().fold(f64::NEG_INFINITY, f64::max);
    let (d_lo, d_hi) = if lo.is_finite() {
        let a = lo.log10().floor() as i32;
        let b = (hi.log10().ceil() as i32).max(a + 1);
        (a, b)
    } else {
        (0, 1)
    };
    let n_max = histories.iter().map(|(_, h)| h.len()).max().unwrap_or(1).max(2);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_of = |i: usize| LEFT + plot_w * i as f64 / (n_max - 1) as f64;
    let y_of = |l: f64| TOP + plot_h * (d_hi as f64 - l.log10()) / (d_hi - d_lo) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for d in d_lo..=d_hi {
        let y = y_of(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line class="ytick" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let x_ticks = 5.min(n_max - 1);
    for k in 0..=x_ticks {
        let i = (n_max - 1) * k / x_ticks;
        let x = x_of(i);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{i}</text>"#, TOP + plot_h + 18.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">iteration</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">loss</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (k, (label, h)) in histories.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = h
            .loss
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_finite() && **l > 0.0)
            .map(|(i, &l)| format!("{:.2},{:.2}", x_of(i), y_of(l)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text class="legend" x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_loss_plot(histories: &[(String, LossHistory)], path: &Path) -> Result<(), HarnessError> {
    write_file(path, loss_plot_svg(histories)?.as_bytes())
}
