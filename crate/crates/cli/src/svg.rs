//! Log-log sweep plot written directly as SVG.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub dashed: bool,
    pub points: &'a [(f64, f64)],
}

struct Axis {
    lo: i32,
    hi: i32,
}

impl Axis {
    /// Whole decades covering every positive value.
    fn covering(values: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| *v > 0.0 && v.is_finite()) {
            lo = lo.min(v.log10());
            hi = hi.max(v.log10());
        }
        if !lo.is_finite() {
            return Axis { lo: -1, hi: 0 };
        }
        let (lo, mut hi) = (lo.floor() as i32, hi.ceil() as i32);
        if hi == lo {
            hi += 1;
        }
        Axis { lo, hi }
    }

    fn frac(&self, v: f64) -> f64 {
        (v.log10() - self.lo as f64) / (self.hi - self.lo) as f64
    }
}

fn decade(e: i32) -> String {
    format!("1e{e}")
}

/// Renders the series on log-log axes. `timestamp` adds a generation comment.
pub fn loglog(title: &str, xlabel: &str, ylabel: &str, series: &[Series], timestamp: Option<u64>) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let xa = Axis::covering(all().map(|p| p.0));
    let ya = Axis::covering(all().map(|p| p.1));
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let px = |x: f64| LEFT + xa.frac(x) * pw;
    let py = |y: f64| TOP + (1.0 - ya.frac(y)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    if let Some(t) = timestamp {
        let _ = writeln!(s, "<!-- generated at unix time {t} -->");
    }
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{title}</text>"#,
        LEFT + pw / 2.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    for e in xa.lo..=xa.hi {
        let x = px(10f64.powi(e));
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="lightgray"/>"#,
            TOP + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            decade(e)
        );
    }
    for e in ya.lo..=ya.hi {
        let y = py(10f64.powi(e));
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="lightgray"/>"#,
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            decade(e)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{xlabel}</text>"#,
        LEFT + pw / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{0}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {0})">{ylabel}</text>"#,
        TOP + ph / 2.0
    );

    for (i, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.0 > 0.0 && p.1 > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let dash = if ser.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
            pts.join(" "),
            ser.color
        );
        if !ser.dashed {
            for p in &pts {
                let (x, y) = p.split_once(',').unwrap();
                let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{}"/>"#, ser.color);
            }
        }
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"{dash}/>"#,
            LEFT + 10.0,
            LEFT + 34.0,
            ser.color
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12">{}</text>"#,
            LEFT + 40.0,
            ly + 4.0,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_cover_whole_decades() {
        let a = Axis::covering([2e-6, 3e-4].into_iter());
        assert_eq!((a.lo, a.hi), (-6, -3));
        let a = Axis::covering([1e-3].into_iter());
        assert_eq!((a.lo, a.hi), (-3, -2));
    }

    #[test]
    fn plot_has_ticks_and_optional_timestamp() {
        let pts = [(1e-6, 1e-5), (1e-3, 1e-2)];
        let ser = [Series {
            label: "sup_dist",
            color: "black",
            dashed: false,
            points: &pts,
        }];
        let a = loglog("t", "d", "y", &ser, None);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains(">1e-6<") && a.contains(">1e-2<"));
        assert!(!a.contains("<!--"));
        let b = loglog("t", "d", "y", &ser, Some(7));
        assert!(b.contains("<!-- generated at unix time 7 -->"));
        assert_eq!(a, b.replace("<!-- generated at unix time 7 -->\n", ""));
    }
}
