//! Static SVG charts of ergodic secrecy rate against the average power budget.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use plotters::element::DashedPathElement;
use plotters::prelude::*;
use thiserror::Error;

use scsec_core::SchemeKind;

use crate::sweep::SweepRow;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("nothing to plot for {0}")]
    Empty(PathBuf),
    #[error("cannot draw {path}: {message}")]
    Draw { path: PathBuf, message: String },
}

fn scheme_color(scheme: SchemeKind) -> RGBColor {
    match scheme {
        SchemeKind::ScOptimal => RGBColor(200, 30, 30),
        SchemeKind::ScSca => RGBColor(30, 90, 200),
        SchemeKind::BitAn => RGBColor(20, 140, 60),
        SchemeKind::BitOnly => RGBColor(90, 90, 90),
    }
}

/// Plots one series per (scheme, K) with a logarithmic power axis.
pub fn emit_plot(rows: &[SweepRow], path: &Path, title: &str) -> Result<(), PlotError> {
    if rows.is_empty() {
        return Err(PlotError::Empty(path.to_path_buf()));
    }
    let draw_err = |e: &dyn std::fmt::Display| PlotError::Draw { path: path.to_path_buf(), message: e.to_string() };

    let mut series: BTreeMap<(SchemeKind, u32), Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        series.entry((r.scheme, r.k)).or_default().push((r.p_bar, r.ergodic_rate));
    }
    for points in series.values_mut() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let ks_of = |scheme: SchemeKind| series.keys().filter(move |(s, _)| *s == scheme).map(|&(_, k)| k);

    let (x_min, x_max) = rows.iter().fold((f64::INFINITY, 0f64), |(lo, hi), r| (lo.min(r.p_bar), hi.max(r.p_bar)));
    let y_max = rows.iter().map(|r| r.ergodic_rate).fold(0.0, f64::max);
    let y_top = if y_max > 0.0 { y_max * 1.1 } else { 1.0 };

    let root = SVGBackend::new(path, (820, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| draw_err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(48)
        .y_label_area_size(64)
        .build_cartesian_2d((x_min / 1.5..x_max * 1.5).log_scale(), 0.0..y_top)
        .map_err(|e| draw_err(&e))?;
    chart
        .configure_mesh()
        .x_desc("average power budget (W)")
        .y_desc("ergodic secrecy rate (bit/s/Hz)")
        .draw()
        .map_err(|e| draw_err(&e))?;

    for ((scheme, k), points) in &series {
        let mut color = scheme_color(*scheme);
        if ks_of(*scheme).count() > 1 {
            // Shade K variants of the same scheme from dark (small K) to light.
            let rank = ks_of(*scheme).filter(|other| other < k).count();
            let t = (rank % 4) as f64 * 0.22;
            let mix = |c: u8| (c as f64 + (255.0 - c as f64) * t) as u8;
            color = RGBColor(mix(color.0), mix(color.1), mix(color.2));
        }
        let label = format!("{scheme} (K={k})");
        let style = color.stroke_width(2);
        let xy = points.iter().copied();
        // SCA tracks the optimum closely, so it is dashed with triangle
        // markers to stay distinguishable on top of the optimal curve.
        if *scheme == SchemeKind::ScSca {
            chart
                .draw_series(DashedLineSeries::new(xy, 9, 6, style))
                .map_err(|e| draw_err(&e))?
                .label(label)
                .legend(move |(x, y)| DashedPathElement::new(vec![(x, y), (x + 18, y)], 5, 3, style));
            chart
                .draw_series(points.iter().map(|&p| TriangleMarker::new(p, 5, color.filled())))
                .map_err(|e| draw_err(&e))?;
        } else {
            chart
                .draw_series(LineSeries::new(xy, style))
                .map_err(|e| draw_err(&e))?
                .label(label)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], style));
            chart
                .draw_series(points.iter().map(|&p| Circle::new(p, 3, color.filled())))
                .map_err(|e| draw_err(&e))?;
        }
    }
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::LowerRight)
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .draw()
        .map_err(|e| draw_err(&e))?;
    root.present().map_err(|e| draw_err(&e))?;
    Ok(())
}
