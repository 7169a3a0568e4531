//! Minimal static SVG plots: line charts with error bands for the
//! classification figures and bar histograms for the scaled errors. Output is
//! fully deterministic; run provenance goes into a leading metadata comment.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub color: &'a str,
    pub dashed: bool,
}

/// Optional shaded band (lower, upper) around the first series.
pub struct Band<'a> {
    pub xs: &'a [f64],
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub color: &'a str,
}

fn fmt(v: f64) -> String {
    if v.abs() < 1e-4 && v != 0.0 {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

struct Scale {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Scale {
    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT
            + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT
            - MARGIN_BOTTOM
            - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn axes(out: &mut String, scale: &Scale, title: &str, x_label: &str, y_label: &str) {
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
        WIDTH / 2.0, title
    ));
    out.push_str(&format!(
        "<line x1=\"{l:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        b = HEIGHT - MARGIN_BOTTOM,
        r = WIDTH - MARGIN_RIGHT
    ));
    out.push_str(&format!(
        "<line x1=\"{l:.1}\" y1=\"{t:.1}\" x2=\"{l:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        t = MARGIN_TOP,
        b = HEIGHT - MARGIN_BOTTOM
    ));
    for i in 0..=5 {
        let fx = scale.x_min + (scale.x_max - scale.x_min) * i as f64 / 5.0;
        let fy = scale.y_min + (scale.y_max - scale.y_min) * i as f64 / 5.0;
        let px = scale.x(fx);
        let py = scale.y(fy);
        out.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{b:.1}\" x2=\"{px:.1}\" y2=\"{b2:.1}\" stroke=\"black\"/>\n<text x=\"{px:.1}\" y=\"{ty:.1}\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
            fmt(fx),
            b = HEIGHT - MARGIN_BOTTOM,
            b2 = HEIGHT - MARGIN_BOTTOM + 5.0,
            ty = HEIGHT - MARGIN_BOTTOM + 18.0,
        ));
        out.push_str(&format!(
            "<line x1=\"{l2:.1}\" y1=\"{py:.1}\" x2=\"{l:.1}\" y2=\"{py:.1}\" stroke=\"black\"/>\n<text x=\"{tx:.1}\" y=\"{py2:.1}\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">{}</text>\n",
            fmt(fy),
            l = MARGIN_LEFT,
            l2 = MARGIN_LEFT - 5.0,
            tx = MARGIN_LEFT - 8.0,
            py2 = py + 4.0,
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        HEIGHT - 12.0,
        x_label
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        y_label
    ));
}

/// Line chart with an optional band, returning the SVG document.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    metadata: &str,
    series: &[Series],
    band: Option<&Band>,
) -> String {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for (&x, &y) in s.xs.iter().zip(s.ys) {
            if x.is_finite() && y.is_finite() {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
    }
    if let Some(b) = band {
        for (&lo, &hi) in b.lower.iter().zip(b.upper) {
            if lo.is_finite() && hi.is_finite() {
                y_min = y_min.min(lo);
                y_max = y_max.max(hi);
            }
        }
    }
    if !(y_max > y_min) {
        y_max = y_min + 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    let scale = Scale {
        x_min,
        x_max: if x_max > x_min { x_max } else { x_min + 1.0 },
        y_min: y_min - pad,
        y_max: y_max + pad,
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<!-- {metadata} -->\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    ));
    axes(&mut out, &scale, title, x_label, y_label);

    if let Some(b) = band {
        let mut points = String::new();
        for (&x, &hi) in b.xs.iter().zip(b.upper) {
            points.push_str(&format!("{:.2},{:.2} ", scale.x(x), scale.y(hi)));
        }
        for (&x, &lo) in b.xs.iter().zip(b.lower).rev() {
            points.push_str(&format!("{:.2},{:.2} ", scale.x(x), scale.y(lo)));
        }
        out.push_str(&format!(
            "<polygon points=\"{}\" fill=\"{}\" opacity=\"0.3\" stroke=\"none\"/>\n",
            points.trim_end(),
            b.color
        ));
    }

    for (i, s) in series.iter().enumerate() {
        let mut points = String::new();
        for (&x, &y) in s.xs.iter().zip(s.ys) {
            if x.is_finite() && y.is_finite() {
                points.push_str(&format!("{:.2},{:.2} ", scale.x(x), scale.y(y)));
            }
        }
        let dash = if s.dashed {
            " stroke-dasharray=\"6,4\""
        } else {
            ""
        };
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{dash}/>\n",
            points.trim_end(),
            s.color
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" font-family=\"sans-serif\" fill=\"{}\">{}</text>\n",
            WIDTH - MARGIN_RIGHT - 150.0,
            MARGIN_TOP + 16.0 * (i + 1) as f64,
            s.color,
            s.label
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Histogram with Freedman-Diaconis bin widths.
pub fn histogram(title: &str, x_label: &str, metadata: &str, samples: &[f64]) -> String {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let q1 = sorted[n / 4];
    let q3 = sorted[3 * n / 4];
    let iqr = (q3 - q1).max(1e-12);
    let bin_width = 2.0 * iqr / (n as f64).cbrt();
    let lo = sorted[0];
    let hi = sorted[n - 1];
    let bins = (((hi - lo) / bin_width).ceil() as usize).clamp(1, 400);
    let mut counts = vec![0usize; bins];
    for &x in &sorted {
        let idx = (((x - lo) / (hi - lo + f64::MIN_POSITIVE)) * bins as f64) as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let max_count = *counts.iter().max().unwrap() as f64;
    let scale = Scale {
        x_min: lo,
        x_max: hi,
        y_min: 0.0,
        y_max: max_count * 1.05,
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<!-- {metadata} -->\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    ));
    axes(&mut out, &scale, title, x_label, "count");
    let bw = (hi - lo) / bins as f64;
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let x0 = scale.x(lo + i as f64 * bw);
        let x1 = scale.x(lo + (i + 1) as f64 * bw);
        let y = scale.y(c as f64);
        out.push_str(&format!(
            "<rect x=\"{x0:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"steelblue\" stroke=\"white\" stroke-width=\"0.5\"/>\n",
            (x1 - x0).max(0.5),
            HEIGHT - MARGIN_BOTTOM - y
        ));
    }
    out.push_str("</svg>\n");
    out
}
