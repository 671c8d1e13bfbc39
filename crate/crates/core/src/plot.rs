//! Hand-rolled SVG scatter plots: one marker per sample, colors keyed by
//! domain tag, glyphs keyed by class, axes and a legend. No plotting
//! framework, just string assembly, which keeps the output diff-able.

use std::path::Path;

use crate::domains::{DomainTag, LabeledDataset};
use crate::error::{Error, Result};
use crate::runner::write_atomic;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 52.0;
const MARKER: f64 = 2.6;

/// Per-dataset legend label and fill color.
#[derive(Debug, Clone)]
pub struct PlotStyle {
    pub label: String,
    pub color: String,
}

impl PlotStyle {
    /// Default palette keyed by domain tag.
    pub fn for_tag(tag: DomainTag) -> Self {
        let (label, color) = match tag {
            DomainTag::Source => ("source", "#1f77b4"),
            DomainTag::Target => ("target", "#d62728"),
            DomainTag::Generated => ("generated", "#2ca02c"),
        };
        PlotStyle {
            label: label.to_string(),
            color: color.to_string(),
        }
    }
}

/// Renders the datasets into an SVG string. All datasets must be 2-D; an
/// empty list yields a valid plot with axes only.
pub fn scatter_svg(datasets: &[&LabeledDataset], styles: &[PlotStyle]) -> Result<String> {
    for d in datasets {
        if d.dim() != 2 {
            return Err(Error::ShapeMismatch {
                context: "scatter_svg".into(),
                expected: "2-D datasets".into(),
                actual: format!("{}-D dataset", d.dim()),
            });
        }
    }
    if !styles.is_empty() && styles.len() != datasets.len() {
        return Err(Error::ShapeMismatch {
            context: "scatter_svg styles".into(),
            expected: format!("{} styles", datasets.len()),
            actual: format!("{}", styles.len()),
        });
    }

    // data bounds with 5% padding; a fixed default window when empty
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for d in datasets {
        for r in 0..d.len() {
            let p = d.points.row(r);
            x0 = x0.min(p[0]);
            x1 = x1.max(p[0]);
            y0 = y0.min(p[1]);
            y1 = y1.max(p[1]);
        }
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad_x = (x1 - x0) * 0.05;
    let pad_y = (y1 - y0) * 0.05;
    x0 -= pad_x;
    x1 += pad_x;
    y0 -= pad_y;
    y1 += pad_y;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = move |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = move |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut svg = String::with_capacity(1024 + datasets.iter().map(|d| d.len() * 40).sum::<usize>());
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));

    // axes box and ticks
    svg.push_str(&format!(
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" \
         fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        MARGIN_LEFT, MARGIN_TOP
    ));
    let ticks = 5usize;
    for t in 0..=ticks {
        let fx = x0 + (x1 - x0) * t as f64 / ticks as f64;
        let px = sx(fx);
        svg.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"#333333\"/>\n",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\" \
             fill=\"#333333\">{fx:.2}</text>\n",
            MARGIN_TOP + plot_h + 18.0
        ));
        let fy = y0 + (y1 - y0) * t as f64 / ticks as f64;
        let py = sy(fy);
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{:.1}\" y2=\"{py:.1}\" stroke=\"#333333\"/>\n",
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\" \
             fill=\"#333333\">{fy:.2}</text>\n",
            MARGIN_LEFT - 8.0,
            py + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" \
         fill=\"#333333\">x0</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" \
         fill=\"#333333\" transform=\"rotate(-90 16 {:.1})\">x1</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    // markers, one group per dataset
    for (i, d) in datasets.iter().enumerate() {
        let style = styles
            .get(i)
            .cloned()
            .unwrap_or_else(|| PlotStyle::for_tag(d.domain_tag));
        svg.push_str(&format!("<g fill=\"{}\" fill-opacity=\"0.75\">\n", style.color));
        for r in 0..d.len() {
            let p = d.points.row(r);
            let (px, py) = (sx(p[0]), sy(p[1]));
            if !(MARGIN_LEFT..=MARGIN_LEFT + plot_w).contains(&px)
                || !(MARGIN_TOP..=MARGIN_TOP + plot_h).contains(&py)
            {
                continue;
            }
            svg.push_str(&marker(d.labels[r], px, py));
        }
        svg.push_str("</g>\n");
    }

    // legend, one entry per dataset
    let legend_x = MARGIN_LEFT + plot_w + 18.0;
    for (i, d) in datasets.iter().enumerate() {
        let style = styles
            .get(i)
            .cloned()
            .unwrap_or_else(|| PlotStyle::for_tag(d.domain_tag));
        let y = MARGIN_TOP + 14.0 + i as f64 * 20.0;
        svg.push_str(&format!("<g fill=\"{}\" class=\"legend\">\n", style.color));
        svg.push_str(&marker(0, legend_x + 5.0, y - 3.0));
        svg.push_str("</g>\n");
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{y:.1}\" font-size=\"12\" fill=\"#333333\">{}</text>\n",
            legend_x + 16.0,
            escape_xml(&style.label)
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Class-keyed glyph centered at `(x, y)`: circle, square, triangle, diamond,
/// cycling for higher classes.
fn marker(class: usize, x: f64, y: f64) -> String {
    let m = MARKER;
    match class % 4 {
        0 => format!("<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{m:.1}\"/>\n"),
        1 => format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\"/>\n",
            x - m,
            y - m,
            2.0 * m,
            2.0 * m
        ),
        2 => format!(
            "<polygon points=\"{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}\"/>\n",
            x,
            y - 1.3 * m,
            x - 1.2 * m,
            y + m,
            x + 1.2 * m,
            y + m
        ),
        _ => format!(
            "<polygon points=\"{:.1},{:.1} {:.1},{:.1} {:.1},{:.1} {:.1},{:.1}\"/>\n",
            x,
            y - 1.4 * m,
            x + 1.4 * m,
            y,
            x,
            y + 1.4 * m,
            x - 1.4 * m,
            y
        ),
    }
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders and writes atomically.
pub fn emit_scatter_svg(
    datasets: &[&LabeledDataset],
    styles: &[PlotStyle],
    path: &Path,
) -> Result<()> {
    let svg = scatter_svg(datasets, styles)?;
    write_atomic(path, svg.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{sample_domain, DomainSpec};

    /// Minimal well-formedness check: every open tag is closed in order.
    fn assert_well_formed_xml(text: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut rest = text;
        while let Some(start) = rest.find('<') {
            let end = rest[start..].find('>').expect("unclosed angle bracket") + start;
            let tag = &rest[start + 1..end];
            rest = &rest[end + 1..];
            if tag.starts_with('?') || tag.starts_with('!') {
                continue;
            }
            if let Some(name) = tag.strip_prefix('/') {
                let open = stack.pop().expect("closing tag without opener");
                assert_eq!(open, name, "mismatched tags");
            } else if !tag.ends_with('/') {
                let name: String = tag.split_whitespace().next().unwrap().to_string();
                stack.push(name);
            }
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }

    #[test]
    fn empty_dataset_list_yields_axes_only_svg() {
        let svg = scatter_svg(&[], &[]).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<rect"));
        assert_well_formed_xml(&svg);
    }

    #[test]
    fn three_datasets_get_three_legend_entries() {
        let spec = DomainSpec::isotropic_gaussian(vec![vec![0.0, 0.0]], &[1.0]);
        let mut a = sample_domain(&spec, 20, 1).unwrap();
        let mut b = sample_domain(&spec, 20, 2).unwrap();
        let mut c = sample_domain(&spec, 20, 3).unwrap();
        a.domain_tag = DomainTag::Source;
        b.domain_tag = DomainTag::Target;
        c.domain_tag = DomainTag::Generated;
        let svg = scatter_svg(&[&a, &b, &c], &[]).unwrap();
        assert_eq!(svg.matches(">source<").count(), 1);
        assert_eq!(svg.matches(">target<").count(), 1);
        assert_eq!(svg.matches(">generated<").count(), 1);
        assert_well_formed_xml(&svg);
    }

    #[test]
    fn ten_thousand_points_stay_under_two_megabytes() {
        let spec = DomainSpec::isotropic_gaussian(
            vec![vec![-1.0, 0.0], vec![1.0, 0.0]],
            &[0.8, 0.8],
        );
        let data = sample_domain(&spec, 5000, 7).unwrap();
        let svg = scatter_svg(&[&data], &[]).unwrap();
        assert!(svg.len() < 2_000_000, "svg is {} bytes", svg.len());
        assert_well_formed_xml(&svg);
    }

    #[test]
    fn non_2d_input_rejected() {
        let spec = DomainSpec::isotropic_gaussian(vec![vec![0.0]], &[1.0]);
        let data = sample_domain(&spec, 5, 1).unwrap();
        assert!(scatter_svg(&[&data], &[]).is_err());
    }
}
