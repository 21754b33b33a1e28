//! CSV tables and SVG line charts for the series computed elsewhere.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use crate::bias::BiasSeries;
use crate::corpus::BinReportRow;
use crate::drift::{DriftSeries, NeighborDiff};
use crate::error::Result;
use crate::freq::FrequencySeries;
use crate::sgns::BinMeta;

pub const DRIFT_HEADER: [&str; 6] = ["word", "mode", "bin_index", "start_year", "end_year", "distance"];
pub const DIFF_HEADER: [&str; 4] = ["word", "direction", "neighbor", "cosine"];
pub const BIAS_HEADER: [&str; 7] = ["word", "stream", "bin_index", "start_year", "end_year", "mean_bias", "usable_pairs"];
pub const FREQ_HEADER: [&str; 6] = ["word", "bin_index", "start_year", "end_year", "count", "relative_frequency"];
pub const BIN_HEADER: [&str; 5] = ["bin_index", "start_year", "end_year", "token_count", "doc_count"];

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(())
}

fn bin_fields(bin: &BinMeta) -> [String; 3] {
    [bin.index.to_string(), bin.start_year.to_string(), bin.end_year.to_string()]
}

pub fn write_drift_csv<W: Write>(out: W, series: &[DriftSeries]) -> Result<()> {
    let mut w = writer(out, &DRIFT_HEADER)?;
    for s in series {
        let mode = s.mode.to_string();
        for p in &s.points {
            let [i, a, b] = bin_fields(&p.bin);
            w.write_record([&s.word, &mode, &i, &a, &b, &p.distance.to_string()])?;
        }
    }
    finish(w)
}

pub fn write_diff_csv<W: Write>(out: W, diffs: &[NeighborDiff]) -> Result<()> {
    let mut w = writer(out, &DIFF_HEADER)?;
    for d in diffs {
        for (direction, list) in [("introduced", &d.introduced), ("eliminated", &d.eliminated)] {
            for n in list {
                w.write_record([d.word.as_str(), direction, &n.word, &n.similarity.to_string()])?;
            }
        }
    }
    finish(w)
}

pub fn write_bias_csv<W: Write>(out: W, series: &[BiasSeries]) -> Result<()> {
    let mut w = writer(out, &BIAS_HEADER)?;
    for s in series {
        for p in &s.points {
            let [i, a, b] = bin_fields(&p.bin);
            w.write_record([&s.word, &s.stream, &i, &a, &b, &p.mean_bias.to_string(), &p.usable.to_string()])?;
        }
    }
    finish(w)
}

pub fn write_freq_csv<W: Write>(out: W, series: &[FrequencySeries]) -> Result<()> {
    let mut w = writer(out, &FREQ_HEADER)?;
    for s in series {
        for p in &s.points {
            let [i, a, b] = bin_fields(&p.bin);
            w.write_record([&s.word, &i, &a, &b, &p.count.to_string(), &p.relative_frequency.to_string()])?;
        }
    }
    finish(w)
}

pub fn write_bin_report_csv<W: Write>(out: W, rows: &[BinReportRow]) -> Result<()> {
    let mut w = writer(out, &BIN_HEADER)?;
    for r in rows {
        w.write_record([
            r.index.to_string(),
            r.start_year.to_string(),
            r.end_year.to_string(),
            r.token_count.to_string(),
            r.doc_count.to_string(),
        ])?;
    }
    finish(w)
}

/// A named line of a chart: one value per bin it covers.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub name: String,
    pub points: Vec<(BinMeta, f64)>,
}

impl From<&DriftSeries> for Line {
    fn from(s: &DriftSeries) -> Self {
        Line {
            name: s.word.clone(),
            points: s.points.iter().map(|p| (p.bin, p.distance)).collect(),
        }
    }
}

impl From<&BiasSeries> for Line {
    fn from(s: &BiasSeries) -> Self {
        Line {
            name: format!("{} / {}", s.word, s.stream),
            points: s.points.iter().map(|p| (p.bin, p.mean_bias)).collect(),
        }
    }
}

impl From<&FrequencySeries> for Line {
    fn from(s: &FrequencySeries) -> Self {
        Line {
            name: s.word.clone(),
            points: s.points.iter().map(|p| (p.bin, p.relative_frequency)).collect(),
        }
    }
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 90.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders `lines` as an SVG line chart. The x axis has one tick per bin,
/// labelled with the bin's year range.
pub fn line_chart_svg(title: &str, y_label: &str, lines: &[Line]) -> String {
    let bins: BTreeMap<u32, BinMeta> = lines
        .iter()
        .flat_map(|l| l.points.iter().map(|(b, _)| (b.index, *b)))
        .collect();
    let slot: BTreeMap<u32, usize> = bins.keys().enumerate().map(|(i, k)| (*k, i)).collect();
    let values = lines.iter().flat_map(|l| l.points.iter().map(|p| p.1)).filter(|v| v.is_finite());
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    lo = lo.min(0.0);
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let n = bins.len().max(1);
    let x = |i: usize| LEFT + if n == 1 { pw / 2.0 } else { pw * i as f64 / (n - 1) as f64 };
    let y = |v: f64| TOP + ph * (hi - v) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r##"<path d="M{LEFT} {TOP}V{}H{}" fill="none" stroke="#333"/>"##,
        TOP + ph,
        LEFT + pw
    );
    for t in 0..=4 {
        let v = lo + (hi - lo) * t as f64 / 4.0;
        let yy = y(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{yy:.2}" x2="{}" y2="{yy:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT,
            LEFT + pw,
            LEFT - 6.0,
            yy + 4.0,
            format_tick(v)
        );
    }
    if lo < 0.0 && hi > 0.0 {
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
            y(0.0),
            LEFT + pw
        );
    }
    for (i, b) in bins.values().enumerate() {
        let xx = x(i);
        let _ = writeln!(
            svg,
            r##"<line x1="{xx:.2}" y1="{0}" x2="{xx:.2}" y2="{1}" stroke="#333"/><text transform="translate({xx:.2} {2}) rotate(-45)" text-anchor="end">{3}</text>"##,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 16.0,
            escape(&b.label())
        );
    }
    let _ = writeln!(
        svg,
        r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + ph / 2.0,
        escape(y_label)
    );
    for (li, line) in lines.iter().enumerate() {
        let color = PALETTE[li % PALETTE.len()];
        let mut pts: Vec<(usize, f64)> = line
            .points
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|(b, v)| (slot[&b.index], *v))
            .collect();
        pts.sort_by_key(|p| p.0);
        let path: Vec<String> = pts.iter().map(|&(i, v)| format!("{:.2},{:.2}", x(i), y(v))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for &(i, v) in &pts {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, x(i), y(v));
        }
        let ly = TOP + 14.0 * li as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{:.2}" width="12" height="3" fill="{color}"/><text x="{}" y="{:.2}">{}</text>"#,
            LEFT + pw + 16.0,
            ly + 4.0,
            LEFT + pw + 32.0,
            ly + 8.0,
            escape(&line.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::BiasPoint;
    use crate::drift::{DriftMode, DriftPoint};
    use crate::freq::FrequencyPoint;

    fn bin(index: u32, s: i32, e: i32) -> BinMeta {
        BinMeta {
            index,
            start_year: s,
            end_year: e,
        }
    }

    #[test]
    fn drift_csv_layout() {
        let s = DriftSeries {
            word: "juif".into(),
            mode: DriftMode::VsFirst,
            points: vec![
                DriftPoint { bin: bin(0, 1789, 1792), distance: 0.0 },
                DriftPoint { bin: bin(1, 1793, 1800), distance: 0.25 },
            ],
            warnings: vec![],
        };
        let mut buf = Vec::new();
        write_drift_csv(&mut buf, &[s]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "word,mode,bin_index,start_year,end_year,distance\njuif,vs_first,0,1789,1792,0\njuif,vs_first,1,1793,1800,0.25\n"
        );
    }

    #[test]
    fn bias_and_freq_headers() {
        let b = BiasSeries {
            word: "w".into(),
            stream: "socio-political".into(),
            points: vec![BiasPoint { bin: bin(2, 1800, 1800), mean_bias: -0.5, usable: 3 }],
            warnings: vec![],
        };
        let mut buf = Vec::new();
        write_bias_csv(&mut buf, &[b]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1), Some("w,socio-political,2,1800,1800,-0.5,3"));

        let f = FrequencySeries {
            word: "a".into(),
            points: vec![FrequencyPoint { bin: bin(0, 1789, 1790), count: 2, relative_frequency: 0.5 }],
        };
        let mut buf = Vec::new();
        write_freq_csv(&mut buf, &[f]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "word,bin_index,start_year,end_year,count,relative_frequency\na,0,1789,1790,2,0.5\n"
        );
    }

    #[test]
    fn chart_labels_bins_by_years() {
        let line = Line {
            name: "a<b".into(),
            points: vec![(bin(0, 1789, 1799), 0.1), (bin(1, 1800, 1800), -0.2)],
        };
        let svg = line_chart_svg("t", "y", &[line]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(">1789-1799</text>"));
        assert!(svg.contains(">1800</text>"));
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(line_chart_svg("empty", "y", &[]).ends_with("</svg>\n"));
    }
}
