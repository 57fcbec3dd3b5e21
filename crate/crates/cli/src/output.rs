//! CSV / JSON / SVG emission. Every emitted file starts with a header
//! echoing the fully resolved run configuration, so results are
//! reproducible from the output alone; no timestamps anywhere, the
//! body is byte-identical across reruns.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub struct Report {
    pub config_echo: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Report {
            config_echo: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn echo(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config_echo.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        for (key, value) in &self.config_echo {
            writeln!(out, "# {key}={value}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".to_owned()
        } else {
            "-inf".to_owned()
        }
    } else {
        format!("{x:.17e}")
    }
}

/// Minimal SVG heatmap: one rect per cell, viridis-ish three-stop ramp,
/// NaN cells black.
pub fn svg_heatmap(
    path: &Path,
    width: usize,
    height: usize,
    values: &[f64],
    title: &str,
) -> Result<()> {
    assert_eq!(values.len(), width * height);
    let cell = 4usize;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n",
        width * cell,
        height * cell + 18
    ));
    svg.push_str(&format!(
        "<title>{title}</title>\n<text x=\"4\" y=\"12\" font-size=\"10\">{title}</text>\n"
    ));
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for j in 0..height {
        for i in 0..width {
            let v = values[j * width + i];
            let color = if v.is_nan() {
                "#000000".to_owned()
            } else {
                let t = if hi > lo {
                    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    0.5
                };
                ramp(t)
            };
            svg.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{cell}\" height=\"{cell}\" fill=\"{color}\"/>\n",
                i * cell,
                j * cell + 18
            ));
        }
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}

/// Minimal SVG polyline plot of (x, y) points.
pub fn svg_line(path: &Path, points: &[(f64, f64)], title: &str) -> Result<()> {
    let (w, h) = (480.0, 320.0);
    let (ml, mb) = (40.0, 20.0);
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (x0, x1) = (
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = (
        ys.iter().copied().fold(f64::INFINITY, f64::min),
        ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let sx = |x: f64| ml + (x - x0) / (x1 - x0).max(1e-300) * (w - ml - 10.0);
    let sy = |y: f64| (h - mb) - (y - y0) / (y1 - y0).max(1e-300) * (h - mb - 24.0);
    let pts: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n\
         <title>{title}</title>\n\
         <text x=\"4\" y=\"14\" font-size=\"10\">{title}</text>\n\
         <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{}\"/>\n\
         </svg>\n",
        pts.join(" ")
    );
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}

fn ramp(t: f64) -> String {
    // dark blue -> teal -> yellow
    let stops = [
        (68.0, 1.0, 84.0),
        (33.0, 145.0, 140.0),
        (253.0, 231.0, 37.0),
    ];
    let (a, b, frac) = if t < 0.5 {
        (stops[0], stops[1], t * 2.0)
    } else {
        (stops[1], stops[2], (t - 0.5) * 2.0)
    };
    let mix = |x: f64, y: f64| (x + (y - x) * frac).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}
