//! Minimal static SVG line charts: one polyline per series, optional log
//! scale on the y axis, no external dependencies.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub width: u32,
    pub height: u32,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            title: String::new(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_y: false,
            width: 640,
            height: 420,
        }
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Render an SVG document. With `log_y`, points with non-positive or
/// non-finite y are skipped and a warning per skipped point is returned
/// alongside the document.
pub fn render_chart(series: &[Series], opts: &PlotOptions) -> Result<(String, Vec<String>)> {
    if series.is_empty() {
        return Err(Error::InvalidParameter("no series to plot".into()));
    }
    let mut warnings = Vec::new();
    let mut kept: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for (si, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            return Err(Error::InvalidParameter(format!("series {:?} is empty", s.label)));
        }
        let mut pts = Vec::with_capacity(s.points.len());
        for &(x, y) in &s.points {
            if !x.is_finite() || !y.is_finite() || (opts.log_y && y <= 0.0) {
                warnings.push(format!(
                    "series {:?}: skipped point ({x}, {y}){}",
                    s.label,
                    if opts.log_y && y <= 0.0 {
                        " (non-positive on log scale)"
                    } else {
                        ""
                    }
                ));
                continue;
            }
            pts.push((x, if opts.log_y { y.log10() } else { y }));
        }
        if pts.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "series {:?} has no plottable points",
                s.label
            )));
        }
        kept.push((si, pts));
    }

    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (_, pts) in &kept {
        for &(x, y) in pts {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if xmax == xmin {
        xmax += 1.0;
        xmin -= 1.0;
    }
    if ymax == ymin {
        ymax += 1.0;
        ymin -= 1.0;
    }

    let (w, h) = (opts.width as f64, opts.height as f64);
    let (ml, mr, mt, mb) = (60.0, 20.0, 30.0, 45.0);
    let sx = |x: f64| ml + (x - xmin) / (xmax - xmin) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
        opts.width, opts.height, opts.width, opts.height
    ));
    svg.push_str(&format!(
        "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        opts.width, opts.height
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb
    ));
    // Ticks: 5 per axis, labelled in data units.
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = xmin + f * (xmax - xmin);
        let yv = ymin + f * (ymax - ymin);
        let xp = sx(xv);
        let yp = sy(yv);
        svg.push_str(&format!(
            "<line x1=\"{xp}\" y1=\"{0}\" x2=\"{xp}\" y2=\"{1}\" stroke=\"black\"/>\n",
            h - mb,
            h - mb + 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{xp}\" y=\"{}\" text-anchor=\"middle\">{:.3}</text>\n",
            h - mb + 18.0,
            xv
        ));
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{yp}\" x2=\"{ml}\" y2=\"{yp}\" stroke=\"black\"/>\n",
            ml - 4.0
        ));
        let ylabel = if opts.log_y {
            format!("1e{yv:.2}")
        } else {
            format!("{yv:.3}")
        };
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{ylabel}</text>\n",
            ml - 8.0,
            yp + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        w / 2.0,
        escape(&opts.title)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        w / 2.0,
        h - 8.0,
        escape(&opts.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {0})\">{1}</text>\n",
        h / 2.0,
        escape(&opts.y_label)
    ));
    for (si, pts) in &kept {
        let color = PALETTE[si % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        // Legend entry.
        let ly = mt + 16.0 * *si as f64;
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{ly}\" x2=\"{1}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            w - mr - 130.0,
            w - mr - 105.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            w - mr - 100.0,
            ly + 4.0,
            escape(&series[*si].label)
        ));
    }
    svg.push_str("</svg>\n");
    Ok((svg, warnings))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(label: &str, pts: &[(f64, f64)]) -> Series {
        Series {
            label: label.into(),
            points: pts.to_vec(),
        }
    }

    #[test]
    fn two_series_two_polylines() {
        let s = vec![
            series("rs", &[(1.0, 2.0), (2.0, 3.0), (3.0, 1.0)]),
            series("pf", &[(1.0, 1.0), (2.0, 2.5)]),
        ];
        let (svg, warnings) = render_chart(&s, &PlotOptions::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(warnings.is_empty());
        assert!(svg.contains("rs") && svg.contains("pf"));
    }

    #[test]
    fn empty_series_rejected() {
        assert!(render_chart(&[], &PlotOptions::default()).is_err());
        let s = vec![series("rs", &[])];
        assert!(render_chart(&s, &PlotOptions::default()).is_err());
    }

    #[test]
    fn log_scale_skips_non_positive_points() {
        let s = vec![series("rs", &[(1.0, 10.0), (2.0, 0.0), (3.0, -5.0), (4.0, 100.0)])];
        let opts = PlotOptions {
            log_y: true,
            ..PlotOptions::default()
        };
        let (svg, warnings) = render_chart(&s, &opts).unwrap();
        assert_eq!(warnings.len(), 2);
        assert!(warnings[0].contains("non-positive"));
        // Two surviving points → one polyline with two coordinates.
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(line.matches(',').count(), 2);
    }

    #[test]
    fn all_points_skipped_is_an_error() {
        let s = vec![series("rs", &[(1.0, 0.0)])];
        let opts = PlotOptions {
            log_y: true,
            ..PlotOptions::default()
        };
        assert!(render_chart(&s, &opts).is_err());
    }
}
