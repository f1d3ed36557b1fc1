//! SVG rendering of column layouts.

use std::fmt::Write;

use crate::rational;
use crate::zstack::ColumnLayout;

const STAGE_WIDTH: f64 = 240.0;
const STAGE_GAP: f64 = 40.0;
const HEIGHT: f64 = 480.0;

/// One `<g>` per stage, one `<rect>` per level. Within a stage the horizontal
/// scale maps `[0, ν_n(F_n))` to the stage width and each level gets an equal
/// row; exact endpoints are kept in `data-start`/`data-end`.
pub fn render_columns(layouts: &[ColumnLayout]) -> String {
    let width = layouts.len() as f64 * (STAGE_WIDTH + STAGE_GAP) + STAGE_GAP;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{}" viewBox="0 0 {width} {}">"#,
        HEIGHT + 40.0,
        HEIGHT + 40.0
    );
    for (k, col) in layouts.iter().enumerate() {
        let x0 = STAGE_GAP + k as f64 * (STAGE_WIDTH + STAGE_GAP);
        let total = rational::to_f64(&col.total());
        let scale = if total > 0.0 { STAGE_WIDTH / total } else { 0.0 };
        let row = HEIGHT / col.height().max(1) as f64;
        let _ = writeln!(out, r#"  <g class="stage" data-n="{}" transform="translate({x0:.3},20)">"#, col.n);
        for (i, (a, b)) in col.levels.iter().enumerate() {
            let spacer = col.spacers.binary_search(&(i as i64)).is_ok();
            let _ = writeln!(
                out,
                r#"    <rect data-index="{i}" data-start="{}" data-end="{}" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}" stroke="black" stroke-width="0.2"/>"#,
                rational::to_string(a),
                rational::to_string(b),
                rational::to_f64(a) * scale,
                HEIGHT - (i + 1) as f64 * row,
                rational::to_f64(&(b - a)) * scale,
                row,
                if spacer { "#d9822b" } else { "#4a78b5" },
            );
        }
        let _ = writeln!(out, "  </g>");
    }
    out.push_str("</svg>\n");
    out
}
