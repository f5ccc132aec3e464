use std::fmt::Write as _;

use crate::lifelong::ResultMatrix;

const CELL: usize = 56;
const MARGIN: usize = 90;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// White-to-blue fill for an accuracy in `[0, 1]`.
fn fill(x: f64) -> String {
    let t = x.clamp(0.0, 1.0);
    let c = |lo: f64, hi: f64| (lo + (hi - lo) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(255.0, 8.0), c(255.0, 69.0), c(255.0, 148.0))
}

/// Accuracy heatmap of `R`: rows are the task trained through, columns the
/// task evaluated. Each cell shows its value to two decimals.
pub fn heatmap_svg(r: &ResultMatrix) -> String {
    let t = r.tasks();
    let side = MARGIN + t * CELL + 10;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="0 0 {side} {side}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{side}" height="{side}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="14" text-anchor="middle">evaluated task</text>"#,
        MARGIN + t * CELL / 2
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="12" y="{y}" text-anchor="middle" transform="rotate(-90 12 {y})">trained through</text>"#,
        y = MARGIN + t * CELL / 2
    )
    .unwrap();
    for (j, label) in r.labels.iter().enumerate() {
        writeln!(
            s,
            r#"<text class="col" x="{}" y="{}" text-anchor="middle">{}</text>"#,
            MARGIN + j * CELL + CELL / 2,
            MARGIN - 8,
            escape(label)
        )
        .unwrap();
    }
    for (i, label) in r.labels.iter().enumerate() {
        writeln!(
            s,
            r#"<text class="row" x="{}" y="{}" text-anchor="end">{}</text>"#,
            MARGIN - 6,
            MARGIN + i * CELL + CELL / 2 + 4,
            escape(label)
        )
        .unwrap();
        for j in 0..t {
            let x = r.get(i, j);
            let (cx, cy) = (MARGIN + j * CELL, MARGIN + i * CELL);
            writeln!(
                s,
                r#"<rect x="{cx}" y="{cy}" width="{CELL}" height="{CELL}" fill="{}" stroke="grey"/>"#,
                fill(x)
            )
            .unwrap();
            let ink = if x > 0.55 { "white" } else { "black" };
            writeln!(
                s,
                r#"<text class="cell" data-row="{i}" data-col="{j}" x="{}" y="{}" text-anchor="middle" fill="{ink}">{x:.2}</text>"#,
                cx + CELL / 2,
                cy + CELL / 2 + 4
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_show_rounded_values() {
        let r = ResultMatrix::new(
            vec!["a<1".into(), "b".into()],
            vec![vec![0.456, 0.004], vec![1.0, 0.995]],
        )
        .unwrap();
        let svg = heatmap_svg(&r);
        for (i, j, text) in [(0, 0, "0.46"), (0, 1, "0.00"), (1, 0, "1.00"), (1, 1, "0.99")] {
            let tag = format!(r#"data-row="{i}" data-col="{j}""#);
            let line = svg.lines().find(|l| l.contains(&tag)).unwrap();
            assert!(line.ends_with(&format!(">{text}</text>")), "{line}");
        }
        assert!(svg.contains("a&lt;1"));
        assert_eq!(format!("{:.2}", 0.995), "0.99");
    }
}
