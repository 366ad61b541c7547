//! CSV and SVG renderings of a bound report, and atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::bounds::BoundReport;
use crate::error::Result;

use super::config::Units;

pub const CSV_HEADER: &str =
    "t,F_E_nats,F_E_bits,rate_lhs,speed_term,surprisal_term,css_correction,bound_total,lambda_cum,t_esl_cum,bound_kind";

/// Shortest exponent form that still round-trips every `f64` (17 significant
/// digits). Non-finite values print as `inf`, `-inf` or `NaN`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per grid node, `\n` line endings, header always present.
///
/// `F_E_nats` holds the monitored quantity of the report: the relative
/// entropy for the relative-entropy kinds and the trace distance for the
/// trace kind, whose `F_E_bits` column is `NaN`.
pub fn render_csv(report: &BoundReport) -> String {
    let mut out = String::with_capacity(240 * (report.samples.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let kind = report.kind.as_str();
    for (k, s) in report.samples.iter().enumerate() {
        let value = report.values[k];
        let bits = if report.kind.uses_relative_entropy() {
            value * std::f64::consts::LOG2_E
        } else {
            f64::NAN
        };
        let cols = [
            s.t,
            value,
            bits,
            s.lhs_rate,
            s.terms.speed_term,
            s.terms.surprisal_term,
            s.terms.css_correction,
            s.terms.total,
            report.limit.lambda_cum[k],
            report.limit.t_esl_cum[k],
        ];
        for v in cols {
            out.push_str(&num(v));
            out.push(',');
        }
        out.push_str(kind);
        out.push('\n');
    }
    out
}

/// Writes `contents` to a temporary file next to `path`, then renames it over
/// `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 45.0;

struct Panel {
    top: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Panel {
    fn new(top: f64, x: (f64, f64), y: (f64, f64)) -> Self {
        let y = if y.1 > y.0 { y } else { (y.0 - 0.5, y.0 + 0.5) };
        Self { top, x, y }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        self.top + MARGIN_TOP + (1.0 - (y - self.y.0) / (self.y.1 - self.y.0)) * h
    }

    fn frame(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let (x0, x1) = (self.px(self.x.0), self.px(self.x.1));
        let (y0, y1) = (self.py(self.y.0), self.py(self.y.1));
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        for v in ticks(self.x) {
            let x = self.px(v);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
                y0 + 5.0,
                y0 + 18.0,
                label(v)
            );
        }
        for v in ticks(self.y) {
            let y = self.py(v);
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"#,
                x0 - 5.0,
                x0 - 8.0,
                y + 4.0,
                label(v)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            self.top + 24.0,
            escape(title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
            (x0 + x1) / 2.0,
            y0 + 36.0,
            escape(x_label)
        );
        let (cx, cy) = (16.0, (y0 + y1) / 2.0);
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{cy:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {cx:.2} {cy:.2})">{}</text>"#,
            escape(y_label)
        );
    }

    /// One `<polyline>` per run of finite points; every input point is drawn.
    fn series(&self, out: &mut String, id: &str, colour: &str, dashed: bool, xs: &[f64], ys: &[f64]) {
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<g id="{id}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}>"#
        );
        let mut run = String::new();
        let flush = |run: &mut String, out: &mut String| {
            if !run.is_empty() {
                let _ = writeln!(out, r#"<polyline points="{}"/>"#, run.trim_end());
                run.clear();
            }
        };
        for (&x, &y) in xs.iter().zip(ys) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(run, "{:.3},{:.3} ", self.px(x), self.py(y));
            } else {
                flush(&mut run, out);
            }
        }
        flush(&mut run, out);
        out.push_str("</g>\n");
    }
}

fn finite_range(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// About five round tick values covering `range`.
fn ticks(range: (f64, f64)) -> Vec<f64> {
    let span = range.1 - range.0;
    if !(span.is_finite() && span > 0.0) {
        return vec![range.0];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (range.0 / step).ceil() as i64;
    let last = (range.1 / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Two stacked panels: `T_ESL` against `T` with the line `T_ESL = T`, and the
/// observed rate against the bound. The series are the `<g>` groups
/// `t-esl`, `t-reference`, `rate-lhs` and `rate-bound`, with no smoothing or
/// resampling. Rates of the relative-entropy kinds are drawn in `units`.
pub fn render_svg(report: &BoundReport, units: Units) -> String {
    let t: Vec<f64> = report.samples.iter().map(|s| s.t).collect();
    let t_range = (t[0], t[t.len() - 1]);
    let scale = if report.kind.uses_relative_entropy() {
        units.from_nats()
    } else {
        1.0
    };
    let rate_unit = if report.kind.uses_relative_entropy() {
        format!("{} per unit time", units.label())
    } else {
        "trace distance per unit time".to_string()
    };
    let lhs: Vec<f64> = report.samples.iter().map(|s| s.lhs_rate * scale).collect();
    let bound: Vec<f64> = report.samples.iter().map(|s| s.terms.total * scale).collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{}" viewBox="0 0 {WIDTH} {}">"#,
        2.0 * PANEL_HEIGHT,
        2.0 * PANEL_HEIGHT
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let esl_hi = finite_range(report.limit.t_esl_cum.iter().copied().chain([t_range.1])).1;
    let top = Panel::new(0.0, t_range, (0.0, esl_hi));
    top.frame(
        &mut out,
        &format!("{}: speed-limit time ({} bound)", report.trajectory_id, report.kind),
        "T",
        "T_ESL",
    );
    top.series(&mut out, "t-reference", "#888888", true, &t, &t);
    top.series(&mut out, "t-esl", "#1f77b4", false, &t, &report.limit.t_esl_cum);

    let (lo, hi) = finite_range(lhs.iter().chain(&bound).copied());
    let bottom = Panel::new(PANEL_HEIGHT, t_range, (lo.min(0.0), hi));
    bottom.frame(&mut out, "rate and bound", "t", &rate_unit);
    bottom.series(&mut out, "rate-lhs", "#d62728", false, &t, &lhs);
    bottom.series(&mut out, "rate-bound", "#2ca02c", true, &t, &bound);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_at_seventeen_digits() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn ticks_are_round_and_inside() {
        assert_eq!(ticks((0.0, 2.0)), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let t = ticks((0.013, 0.87));
        assert!(t.iter().all(|v| (0.013..=0.87).contains(v)));
        assert!(t.len() >= 4);
    }

    #[test]
    fn atomic_write_replaces_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
