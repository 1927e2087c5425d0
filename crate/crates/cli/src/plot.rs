//! Minimal deterministic SVG line plots with linear or logarithmic axes.

use std::fmt::Write;

pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dash {
    Solid,
    Dashed,
    Dotted,
    DashDot,
}

impl Dash {
    pub const CYCLE: [Dash; 4] = [Dash::Solid, Dash::Dashed, Dash::Dotted, Dash::DashDot];

    fn attribute(self) -> &'static str {
        match self {
            Dash::Solid => "",
            Dash::Dashed => " stroke-dasharray=\"8 4\"",
            Dash::Dotted => " stroke-dasharray=\"2 3\"",
            Dash::DashDot => " stroke-dasharray=\"8 3 2 3\"",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Series {
    /// Series sharing a label get one legend entry.
    pub label: Option<String>,
    pub points: Vec<(f64, f64)>,
    pub color: String,
    pub dash: Dash,
    pub markers: bool,
}

impl Series {
    pub fn line(label: Option<String>, points: Vec<(f64, f64)>, color: &str, dash: Dash) -> Self {
        Self {
            label,
            points,
            color: color.to_string(),
            dash,
            markers: false,
        }
    }

    pub fn with_markers(mut self) -> Self {
        self.markers = true;
        self
    }
}

#[derive(Clone, Debug)]
pub struct VLine {
    pub x: f64,
    pub label: String,
    pub color: String,
}

#[derive(Clone, Debug)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
    pub vlines: Vec<VLine>,
}

struct Axis {
    scale: Scale,
    lo: f64,
    hi: f64,
    ticks: Vec<f64>,
    decimals: usize,
}

impl Axis {
    fn fraction(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => (v - self.lo) / (self.hi - self.lo),
            Scale::Log => (v.log10() - self.lo) / (self.hi - self.lo),
        }
    }

    fn label(&self, t: f64) -> String {
        match self.scale {
            Scale::Linear => {
                let s = format!("{t:.*}", self.decimals);
                if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
                    s[1..].to_string()
                } else {
                    s
                }
            }
            Scale::Log => format!("1e{}", t.log10().round() as i64),
        }
    }
}

fn usable(scale: Scale, v: f64) -> bool {
    v.is_finite() && (scale == Scale::Linear || v > 0.0)
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn build_axis(scale: Scale, values: &[f64]) -> Axis {
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    match scale {
        Scale::Linear => {
            if !lo.is_finite() {
                (lo, hi) = (0.0, 1.0);
            }
            if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
                let pad = (lo.abs() * 0.1).max(0.5);
                lo -= pad;
                hi += pad;
            }
            let step = nice_step(hi - lo, 6);
            let lo = (lo / step).floor() * step;
            let hi = (hi / step).ceil() * step;
            let count = ((hi - lo) / step).round() as usize;
            let ticks = (0..=count).map(|k| lo + k as f64 * step).collect();
            let decimals = (-step.log10().floor()).max(0.0) as usize;
            Axis {
                scale,
                lo,
                hi,
                ticks,
                decimals,
            }
        }
        Scale::Log => {
            let (mut a, mut b) = if lo.is_finite() {
                (lo.log10().floor(), hi.log10().ceil())
            } else {
                (0.0, 1.0)
            };
            if b <= a {
                a -= 1.0;
                b += 1.0;
            }
            let stride = ((b - a) / 10.0).ceil().max(1.0);
            let mut ticks = Vec::new();
            let mut k = a;
            while k <= b + 0.5 {
                ticks.push(10f64.powf(k));
                k += stride;
            }
            Axis {
                scale,
                lo: a,
                hi: b,
                ticks,
                decimals: 0,
            }
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl Figure {
    pub fn new(title: &str, x_label: &str, y_label: &str, x_scale: Scale, y_scale: Scale) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x_scale,
            y_scale,
            series: Vec::new(),
            vlines: Vec::new(),
        }
    }

    /// Renders the figure. Points that cannot be shown (non-finite, or not
    /// positive on a log axis) are dropped and counted in a warning; a
    /// figure without any drawable point gets empty axes and a warning.
    pub fn render(&self) -> String {
        let (sx, sy) = (self.x_scale, self.y_scale);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut dropped = 0usize;
        for s in &self.series {
            for &(x, y) in &s.points {
                if usable(sx, x) && usable(sy, y) {
                    xs.push(x);
                    ys.push(y);
                } else {
                    dropped += 1;
                }
            }
        }
        for v in &self.vlines {
            if usable(sx, v.x) && !xs.is_empty() {
                xs.push(v.x);
            }
        }
        let mut warnings = Vec::new();
        if ys.is_empty() {
            warnings.push("warning: empty dataset, nothing to plot".to_string());
        }
        if dropped > 0 {
            warnings.push(format!("warning: {dropped} points outside the axis domain omitted"));
        }
        let ax = build_axis(sx, &xs);
        let ay = build_axis(sy, &ys);
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let px = |x: f64| LEFT + ax.fraction(x) * pw;
        let py = |y: f64| TOP + (1.0 - ay.fraction(y)) * ph;

        let mut out = String::new();
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
        );
        let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">{}</text>", WIDTH / 2.0, escape(&self.title));

        // grid, ticks and tick labels
        for &t in &ax.ticks {
            let x = px(t);
            let _ = writeln!(out, "<line x1=\"{x:.2}\" y1=\"{TOP:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#e6e6e6\"/>", TOP + ph);
            let _ = writeln!(out, "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", TOP + ph + 18.0, escape(&ax.label(t)));
        }
        for &t in &ay.ticks {
            let y = py(t);
            let _ = writeln!(out, "<line x1=\"{LEFT:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#e6e6e6\"/>", LEFT + pw);
            let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", LEFT - 8.0, y + 4.0, escape(&ay.label(t)));
        }
        let _ = writeln!(out, "<rect x=\"{LEFT:.2}\" y=\"{TOP:.2}\" width=\"{pw:.2}\" height=\"{ph:.2}\" fill=\"none\" stroke=\"black\"/>");
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", LEFT + pw / 2.0, HEIGHT - 20.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            "<text x=\"22\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 22 {:.2})\">{}</text>",
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        if !ys.is_empty() {
            let _ = writeln!(out, "<g clip-path=\"url(#plot-area)\">");
            let _ = writeln!(out, "<clipPath id=\"plot-area\"><rect x=\"{LEFT:.2}\" y=\"{TOP:.2}\" width=\"{pw:.2}\" height=\"{ph:.2}\"/></clipPath>");
            for s in &self.series {
                let mut path = String::new();
                let mut pen_down = false;
                for &(x, y) in &s.points {
                    if usable(sx, x) && usable(sy, y) {
                        let _ = write!(path, "{}{:.2} {:.2} ", if pen_down { "L" } else { "M" }, px(x), py(y));
                        pen_down = true;
                    } else {
                        pen_down = false;
                    }
                }
                if !path.is_empty() {
                    let _ = writeln!(
                        out,
                        "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"{}/>",
                        path.trim_end(),
                        s.color,
                        s.dash.attribute()
                    );
                }
                if s.markers {
                    for &(x, y) in s.points.iter().filter(|&&(x, y)| usable(sx, x) && usable(sy, y)) {
                        let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{}\"/>", px(x), py(y), s.color);
                    }
                }
            }
            for v in &self.vlines {
                if usable(sx, v.x) {
                    let x = px(v.x);
                    let _ = writeln!(
                        out,
                        "<line x1=\"{x:.2}\" y1=\"{TOP:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"{}\" stroke-width=\"1.5\" stroke-dasharray=\"8 3 2 3\"/>",
                        TOP + ph,
                        v.color
                    );
                    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"{}\">{}</text>", x + 4.0, TOP + 14.0, v.color, escape(&v.label));
                }
            }
            let _ = writeln!(out, "</g>");
        }

        // legend, one entry per distinct label
        let mut seen: Vec<&str> = Vec::new();
        let mut entry = 0;
        for s in &self.series {
            let Some(label) = s.label.as_deref() else { continue };
            if seen.contains(&label) {
                continue;
            }
            seen.push(label);
            let y = TOP + 16.0 + 16.0 * entry as f64;
            let x = LEFT + pw - 150.0;
            let _ = writeln!(
                out,
                "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"1.5\"{}/>",
                x + 28.0,
                s.color,
                s.dash.attribute()
            );
            let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", x + 34.0, y + 4.0, escape(label));
            entry += 1;
        }

        for (k, w) in warnings.iter().enumerate() {
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#b00020\" font-size=\"14\">{}</text>",
                LEFT + pw / 2.0,
                TOP + ph / 2.0 + 20.0 * k as f64,
                escape(w)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(y_scale: Scale) -> Figure {
        let mut f = Figure::new("t", "x", "y", Scale::Linear, y_scale);
        f.series.push(Series::line(Some("a".into()), vec![(0.0, 1e-3), (0.5, 1e-1), (1.0, 2.0)], PALETTE[0], Dash::Solid));
        f
    }

    #[test]
    fn rendering_is_deterministic() {
        assert_eq!(sample(Scale::Log).render(), sample(Scale::Log).render());
    }

    #[test]
    fn log_axis_has_decade_ticks() {
        let svg = sample(Scale::Log).render();
        for label in ["1e-3", "1e-2", "1e-1", "1e0", "1e1"] {
            assert!(svg.contains(&format!(">{label}</text>")), "{label}");
        }
    }

    #[test]
    fn empty_dataset_warns() {
        let f = Figure::new("empty", "x", "y", Scale::Linear, Scale::Log);
        let svg = f.render();
        assert!(svg.contains("empty dataset"));
        assert!(!svg.contains("<path"));
    }

    #[test]
    fn nonpositive_points_dropped_on_log_axis() {
        let mut f = sample(Scale::Log);
        f.series[0].points.push((1.5, 0.0));
        assert!(f.render().contains("1 points outside the axis domain omitted"));
    }

    #[test]
    fn vertical_marker_drawn() {
        let mut f = sample(Scale::Linear);
        f.vlines.push(VLine {
            x: 0.4,
            label: "eps_c".into(),
            color: PALETTE[7].into(),
        });
        let svg = f.render();
        assert!(svg.contains(">eps_c</text>"));
        assert!(svg.contains("stroke-dasharray=\"8 3 2 3\""));
    }
}
