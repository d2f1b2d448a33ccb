//! Deterministic SVG line plots of monitor CSV columns against `t`.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

/// Columns that decay towards zero and read best on a log axis.
pub const DECAY_COLUMNS: [&str; 6] = ["maxE", "maxGradRm", "maxE_ambient", "maxFsigma", "maxGradH2", "maxTraceless"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub column: String,
    pub log: bool,
}

impl PlotSpec {
    pub fn new(column: impl Into<String>, log: bool) -> Self {
        PlotSpec { column: column.into(), log }
    }
}

/// Parsed numeric CSV with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or_else(|| Error::Truncated("empty CSV".into()))?;
        let header: Vec<String> = head.split(',').map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let row: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse { line: idx + 1, msg: "non-numeric CSV cell".into() })?;
            if row.len() != header.len() {
                return Err(Error::Parse { line: idx + 1, msg: format!("expected {} columns", header.len()) });
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::invalid(format!("CSV has no column '{name}'")))?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Every column except `t`, on a log axis when it is a decay column.
    pub fn default_specs(&self) -> Vec<PlotSpec> {
        self.header
            .iter()
            .filter(|h| h.as_str() != "t")
            .map(|h| PlotSpec::new(h.clone(), DECAY_COLUMNS.contains(&h.as_str())))
            .collect()
    }
}

fn fmt_tick(v: f64) -> String {
    format!("{v:.3e}")
}

/// SVG document for one column; log scale falls back to linear when the
/// column has non-positive values.
pub fn render_svg(table: &Table, spec: &PlotSpec) -> Result<String> {
    if table.rows.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 rows to plot, found {}", table.rows.len())));
    }
    let t = table.column("t")?;
    let raw = table.column(&spec.column)?;
    let log = spec.log && raw.iter().all(|v| *v > 0.0 && v.is_finite());
    let y: Vec<f64> = if log { raw.iter().map(|v| v.log10()).collect() } else { raw.clone() };
    if y.iter().chain(&t).any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("column '{}' has non-finite values", spec.column)));
    }
    let (t0, t1) = (t.iter().cloned().fold(f64::INFINITY, f64::min), t.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let (mut y0, mut y1) = (y.iter().cloned().fold(f64::INFINITY, f64::min), y.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    if y1 - y0 <= 1e-12 * y0.abs().max(y1.abs()).max(1e-300) {
        let pad = if y0 == 0.0 { 1.0 } else { 0.1 * y0.abs() };
        y0 -= pad;
        y1 += pad;
    }
    let tspan = if t1 > t0 { t1 - t0 } else { 1.0 };
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |v: f64| LEFT + (v - t0) / tspan * pw;
    let py = |v: f64| TOP + (y1 - v) / (y1 - y0) * ph;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#).unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    let scale = if log { "log10 " } else { "" };
    writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{} vs t</text>"#,
        WIDTH / 2.0,
        spec.column
    )
    .unwrap();
    writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        TOP + ph,
        LEFT + pw,
        TOP + ph
    )
    .unwrap();
    writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#, TOP + ph).unwrap();
    for i in 0..TICKS {
        let f = i as f64 / (TICKS - 1) as f64;
        let (tv, yv) = (t0 + f * tspan, y0 + f * (y1 - y0));
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            px(tv),
            TOP + ph + 18.0,
            fmt_tick(tv)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py(yv) + 4.0,
            fmt_tick(yv)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">t</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{scale}{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        spec.column
    )
    .unwrap();
    let pts: Vec<String> = t.iter().zip(&y).map(|(&a, &b)| format!("{:.2},{:.2}", px(a), py(b))).collect();
    writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, pts.join(" ")).unwrap();
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes `<stem>_<column>.svg` into `dir` for every spec. All columns are
/// checked before anything is written.
pub fn emit_plots(csv: &str, specs: &[PlotSpec], dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let table = Table::parse(csv)?;
    let docs = specs.iter().map(|sp| render_svg(&table, sp)).collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(docs.len());
    for (sp, doc) in specs.iter().zip(docs) {
        let path = dir.join(format!("{stem}_{}.svg", sp.column));
        std::fs::write(&path, doc)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polyline_ys(svg: &str) -> Vec<f64> {
        let start = svg.find("points=\"").unwrap() + 8;
        let end = start + svg[start..].find('"').unwrap();
        svg[start..end].split(' ').map(|p| p.split(',').nth(1).unwrap().parse().unwrap()).collect()
    }

    #[test]
    fn constant_series_is_horizontal() {
        let t = Table::parse("t,v\n0,3\n1,3\n2,3\n").unwrap();
        let svg = render_svg(&t, &PlotSpec::new("v", false)).unwrap();
        let ys = polyline_ys(&svg);
        assert!(ys.iter().all(|y| *y == ys[0]));
    }

    #[test]
    fn exponential_decay_is_linear_on_log_axis() {
        let csv: String = std::iter::once("t,maxE\n".to_string())
            .chain((0..20).map(|i| format!("{},{}\n", i as f64 * 0.1, (-3.0 * i as f64 * 0.1).exp())))
            .collect();
        let t = Table::parse(&csv).unwrap();
        let svg = render_svg(&t, &PlotSpec::new("maxE", true)).unwrap();
        assert!(svg.contains("log10 maxE"));
        let ys = polyline_ys(&svg);
        let d: Vec<f64> = ys.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(d.iter().all(|x| (x - d[0]).abs() < 0.02), "{d:?}");
    }

    #[test]
    fn guards() {
        let one = Table::parse("t,v\n0,1\n").unwrap();
        assert!(render_svg(&one, &PlotSpec::new("v", false)).is_err());
        let two = Table::parse("t,v\n0,1\n1,2\n").unwrap();
        assert!(render_svg(&two, &PlotSpec::new("w", false)).is_err());
        assert!(Table::parse("t,v\n0,x\n").is_err());
        let a = render_svg(&two, &PlotSpec::new("v", true)).unwrap();
        assert_eq!(a, render_svg(&two, &PlotSpec::new("v", true)).unwrap());
    }
}
