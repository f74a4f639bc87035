//! Output documents. Floats are printed in shortest round-trip form.

use std::fmt::Write;

use mbasis::gof::Bin;
use mbasis::GofTest;
use serde::Serialize;

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serialises");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
pub struct BinRecord {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Serialize)]
pub struct TestDocument {
    pub statistic: &'static str,
    pub observed_stat: f64,
    pub sample_size: usize,
    pub exceed_count: usize,
    pub p_value: f64,
    pub mc_std_error: f64,
    pub histogram: Vec<BinRecord>,
}

impl TestDocument {
    pub fn new(r: &GofTest) -> Self {
        Self {
            statistic: "chi-square",
            observed_stat: r.observed_stat,
            sample_size: r.sample_size,
            exceed_count: r.exceed_count,
            p_value: r.p_value,
            mc_std_error: r.mc_std_error,
            histogram: r
                .histogram
                .iter()
                .map(|b| BinRecord {
                    lo: b.lo,
                    hi: b.hi,
                    count: b.count,
                })
                .collect(),
        }
    }
}

pub fn histogram_csv(bins: &[Bin<f64>]) -> String {
    let mut s = String::from("bin_lo,bin_hi,count\n");
    for b in bins {
        writeln!(s, "{},{},{}", b.lo, b.hi, b.count).unwrap();
    }
    s
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;

/// Bars for the bins plus a red vertical line at the observed statistic.
pub fn histogram_svg(bins: &[Bin<f64>], observed: f64) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let base = HEIGHT - MARGIN;
    let lo = bins.first().map_or(0.0, |b| b.lo).min(observed);
    let hi = bins.last().map_or(1.0, |b| b.hi).max(observed);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x_of = |v: f64| MARGIN + (v - lo) / span * plot_w;
    let peak = bins.iter().map(|b| b.count).max().unwrap_or(0).max(1) as f64;
    for b in bins {
        let x0 = x_of(b.lo);
        // A zero-width bin (all statistics equal) still gets a visible bar.
        let w = (x_of(b.hi) - x0).max(2.0);
        let h = b.count as f64 / peak * plot_h;
        writeln!(
            s,
            r##"<rect x="{x0:.2}" y="{:.2}" width="{w:.2}" height="{h:.2}" fill="#7f9fbf" stroke="#334455" stroke-width="0.5"/>"##,
            base - h
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#,
        WIDTH - MARGIN
    )
    .unwrap();
    let xo = x_of(observed);
    writeln!(
        s,
        r#"<line x1="{xo:.2}" y1="{MARGIN}" x2="{xo:.2}" y2="{base}" stroke="red" stroke-width="2"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="12">{lo}</text>"#,
        base + 16.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{hi}</text>"#,
        WIDTH - MARGIN,
        base + 16.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">chi-square statistic, observed {observed}</text>"#,
        WIDTH / 2.0
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bins() -> Vec<Bin<f64>> {
        vec![
            Bin {
                lo: 0.0,
                hi: 0.5,
                count: 3,
            },
            Bin {
                lo: 0.5,
                hi: 1.0,
                count: 1,
            },
        ]
    }

    #[test]
    fn csv_has_header_and_rows() {
        assert_eq!(histogram_csv(&bins()), "bin_lo,bin_hi,count\n0,0.5,3\n0.5,1,1\n");
    }

    #[test]
    fn csv_floats_round_trip() {
        let b = vec![Bin {
            lo: 0.1 + 0.2,
            hi: 1.0 / 3.0,
            count: 1,
        }];
        let csv = histogram_csv(&b);
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[0].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(row[1].parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn svg_has_bars_and_one_marker() {
        let svg = histogram_svg(&bins(), 0.75);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<rect").count(), 3);
        assert_eq!(svg.matches(r#"stroke="red""#).count(), 1);
        // Marker sits at 0.75 of the axis.
        assert!(svg.contains(r#"x1="460.00""#));
    }
}
