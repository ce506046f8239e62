//! Static SVG rendering of capacity curves and Gauss-point profiles.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::element::GaussRecord;
use crate::error::{FsdbError, Result};
use crate::model_io::ResultsBundle;
use crate::solver::StepRecord;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: [f64; 4] = [60.0, 20.0, 30.0, 50.0]; // left, right, top, bottom
const COLOURS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// A named polyline.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Round step for about `n` ticks over `span`.
fn tick_step(span: f64, n: usize) -> f64 {
    let raw = span / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let nice = if r < 1.5 {
        1.0
    } else if r < 3.0 {
        2.0
    } else if r < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1e-300) {
        let pad = if hi == 0.0 { 1.0 } else { 0.1 * hi.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Line chart with axes, ticks and a legend.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (mut x0, mut x1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (mut y0, mut y1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let (dx, dy) = (tick_step(x1 - x0, 6), tick_step(y1 - y0, 6));
    x0 = (x0 / dx).floor() * dx;
    x1 = (x1 / dx).ceil() * dx;
    y0 = (y0 / dy).floor() * dy;
    y1 = (y1 / dy).ceil() * dy;
    let [ml, mr, mt, mb] = MARGIN;
    let (pw, ph) = (WIDTH - ml - mr, HEIGHT - mt - mb);
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| mt + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    let n_x = ((x1 - x0) / dx).round() as usize;
    for i in 0..=n_x {
        let x = x0 + i as f64 * dx;
        let px = sx(x);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{mt}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            mt + ph,
            mt + ph + 15.0,
            label(x)
        );
    }
    let n_y = ((y1 - y0) / dy).round() as usize;
    for i in 0..=n_y {
        let y = y0 + i as f64 * dy;
        let py = sy(y);
        let _ = writeln!(
            s,
            r##"<line x1="{ml}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            ml + pw,
            ml - 5.0,
            py + 4.0,
            label(y)
        );
    }
    if x0 < 0.0 && x1 > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{0:.2}" y1="{mt}" x2="{0:.2}" y2="{1:.2}" stroke="#888"/>"##,
            sx(0.0),
            mt + ph
        );
    }
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{ml}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#888"/>"##,
            sy(0.0),
            ml + pw
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        ml + pw / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(15,{}) rotate(-90)" text-anchor="middle">{}</text>"#,
        mt + ph / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let pts = ser
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"><title>{}</title></polyline>"#,
            escape(&ser.label)
        );
        let ly = mt + 14.0 + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="{colour}" stroke-width="2"/><text x="{3:.2}" y="{4:.2}">{5}</text>"#,
            ml + pw - 110.0,
            ly,
            ml + pw - 90.0,
            ml + pw - 85.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Capacity curve; a history that loads in both directions is drawn as a
/// hysteresis plot.
pub fn capacity_svg(steps: &[StepRecord]) -> String {
    let points: Vec<(f64, f64)> = steps
        .iter()
        .map(|s| (s.control_disp * 1e3, s.reaction / 1e3))
        .collect();
    let title = if is_cyclic(steps) {
        "Hysteresis"
    } else {
        "Capacity curve"
    };
    line_chart(
        title,
        "control displacement [mm]",
        "force [kN]",
        &[Series {
            label: "response".into(),
            points,
        }],
    )
}

fn is_cyclic(steps: &[StepRecord]) -> bool {
    steps.iter().any(|s| s.control_disp > 0.0) && steps.iter().any(|s| s.control_disp < 0.0)
}

/// Quantities available for profile plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Curvature,
    AxialStrain,
    BetaX,
    BetaZ,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [
        Quantity::Curvature,
        Quantity::AxialStrain,
        Quantity::BetaX,
        Quantity::BetaZ,
    ];

    fn value(self, g: &GaussRecord) -> f64 {
        match self {
            Quantity::Curvature => g.chi,
            Quantity::AxialStrain => g.eps0,
            Quantity::BetaX => g.beta_x,
            Quantity::BetaZ => g.beta_z,
        }
    }

    fn file_stem(self) -> &'static str {
        match self {
            Quantity::Curvature => "profile_chi",
            Quantity::AxialStrain => "profile_eps0",
            Quantity::BetaX => "profile_beta_x",
            Quantity::BetaZ => "profile_beta_z",
        }
    }

    fn axis_label(self) -> &'static str {
        match self {
            Quantity::Curvature => "curvature [1/m]",
            Quantity::AxialStrain => "axial strain [-]",
            Quantity::BetaX => "beta_x [-]",
            Quantity::BetaZ => "beta_z [-]",
        }
    }
}

/// Profile of `q` along the member, one polyline per step in `at`.
/// Elements are laid end to end over equal shares of the abscissa.
pub fn profile_svg(steps: &[StepRecord], q: Quantity, at: &[usize]) -> String {
    let series: Vec<Series> = at
        .iter()
        .filter_map(|&k| steps.iter().find(|s| s.step == k))
        .map(|s| {
            let n_el = s.fields.len().max(1) as f64;
            let points = s
                .fields
                .iter()
                .enumerate()
                .flat_map(|(e, recs)| {
                    recs.iter()
                        .map(move |g| ((e as f64 + g.x_over_l) / n_el, q.value(g)))
                })
                .collect();
            Series {
                label: format!("step {}", s.step),
                points,
            }
        })
        .collect();
    line_chart(q.axis_label(), "x / L", q.axis_label(), &series)
}

/// Default selection of profile steps: up to four evenly spaced steps
/// ending at the last one.
pub fn default_profile_steps(steps: &[StepRecord]) -> Vec<usize> {
    let n = steps.len();
    if n == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (1..=4).map(|k| (k * n).div_ceil(4) - 1).collect();
    idx.dedup();
    idx.into_iter().map(|i| steps[i].step).collect()
}

/// Render every plot of a results bundle into `dir`.
pub fn write_plots(
    bundle: &ResultsBundle,
    dir: &Path,
    at: Option<&[usize]>,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| FsdbError::io(dir, e))?;
    let default;
    let at = match at {
        Some(a) => a,
        None => {
            default = default_profile_steps(&bundle.steps);
            &default
        }
    };
    let mut files = vec![("capacity.svg".to_string(), capacity_svg(&bundle.steps))];
    for q in Quantity::ALL {
        files.push((
            format!("{}.svg", q.file_stem()),
            profile_svg(&bundle.steps, q, at),
        ));
    }
    let mut out = Vec::with_capacity(files.len());
    for (name, svg) in files {
        let path = dir.join(name);
        fs::write(&path, svg).map_err(|e| FsdbError::io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}
