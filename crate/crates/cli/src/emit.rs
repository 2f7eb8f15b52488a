//! CSV, JSON and SVG writers for a [`ReportBundle`].

use std::fmt::Write as _;
use std::io::Write;

use crate::config::Format;
use crate::run::{Cell, PlotSpec, ReportBundle, Table};

/// 17 significant digits, which round-trips every `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(x) => format_float(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(t) => t.clone(),
        Cell::Bool(b) => b.to_string(),
    }
}

pub fn csv(table: &Table) -> std::io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell_text))?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

pub fn json(bundle: &ReportBundle) -> String {
    let mut s = serde_json::to_string_pretty(bundle).expect("bundle serialises");
    s.push('\n');
    s
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 160.0, 40.0, 60.0); // left, right, top, bottom
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 * lo.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Standalone line plot with labelled axes.
pub fn svg(plot: &PlotSpec) -> String {
    let (x0, x1) = extent(plot.series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
    let (y0, y1) = plot.y_range.unwrap_or_else(|| {
        extent(plot.series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)).chain(plot.levels.iter().map(|l| l.1)))
    });
    let (ml, mr, mt, mb) = MARGIN;
    let pw = WIDTH - ml - mr;
    let ph = HEIGHT - mt - mb;
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| mt + (1.0 - (y - y0) / (y1 - y0)) * ph;
    let inside = |y: f64| y.is_finite() && y >= y0 && y <= y1;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, ml + pw / 2.0, escape(&plot.title));
    let _ = writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/>"#, mt + ph, mt + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, mt + ph + 18.0, tick(xv));
        let _ = writeln!(s, r#"<line x1="{}" y1="{py:.2}" x2="{ml}" y2="{py:.2}" stroke="black"/>"#, ml - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, ml - 8.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, ml + pw / 2.0, HEIGHT - 15.0, escape(&plot.x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0,
        escape(&plot.y_label)
    );
    let _ = writeln!(s, r#"<clipPath id="plot"><rect x="{ml}" y="{mt}" width="{pw}" height="{ph}"/></clipPath>"#);

    for (k, (name, pts)) in plot.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        // break the line wherever a point leaves the window
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for &(x, y) in pts {
            if inside(y) && x.is_finite() {
                runs.last_mut().expect("nonempty").push((sx(x), sy(y)));
            } else if !runs.last().expect("nonempty").is_empty() {
                runs.push(Vec::new());
            }
        }
        for run in runs.iter().filter(|r| r.len() > 1) {
            let path: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(s, r#"<polyline clip-path="url(#plot)" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        }
        let ly = mt + 14.0 + 18.0 * k as f64;
        let lx = ml + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(name));
    }
    for (name, level) in &plot.levels {
        if inside(*level) {
            let py = sy(*level);
            let _ = writeln!(s, r#"<line x1="{ml}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="black" stroke-dasharray="2,3"/>"#, ml + pw);
            let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{} = {}</text>"#, ml + pw - 4.0, py - 4.0, escape(name), tick(*level));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{:.4}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Renders the bundle in `format`.
pub fn render(bundle: &ReportBundle, format: Format) -> std::io::Result<Vec<u8>> {
    match format {
        Format::Json => Ok(json(bundle).into_bytes()),
        Format::Csv => match &bundle.table {
            Some(t) => csv(t),
            None => csv(&crate::run::flatten_outputs(&bundle.outputs)),
        },
        Format::Svg => Ok(bundle.plot.as_ref().map(svg).unwrap_or_default().into_bytes()),
    }
}

pub fn write_to(out: &mut dyn Write, bytes: &[u8]) -> std::io::Result<()> {
    out.write_all(bytes)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table { columns: vec!["a".into(), "d".into(), "value".into(), "converged".into()], rows: vec![] };
        assert_eq!(String::from_utf8(csv(&t).unwrap()).unwrap(), "a,d,value,converged\r\n");
    }

    #[test]
    fn text_cells_are_quoted() {
        let t = Table { columns: vec!["detail".into()], rows: vec![vec![Cell::Text("x, y".into())]] };
        assert_eq!(String::from_utf8(csv(&t).unwrap()).unwrap(), "detail\r\n\"x, y\"\r\n");
    }

    #[test]
    fn svg_is_well_formed() {
        let plot = PlotSpec {
            title: "t <1>".into(),
            x_label: "a".into(),
            y_label: "Y".into(),
            series: vec![("s".into(), vec![(0.0, 0.0), (1.0, 1.0), (2.0, f64::NAN), (3.0, 0.5), (4.0, 0.7)])],
            levels: vec![("limit".into(), 0.9)],
            y_range: None,
        };
        let s = svg(&plot);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains("stroke-dasharray") && s.contains("t &lt;1&gt;"));
    }
}
