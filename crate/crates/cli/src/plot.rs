//! SER against SNR as an SVG line chart with a logarithmic SER axis.

use plotters::prelude::*;
use sfc_core::sim::SimRow;

/// One curve: all rows sharing a `(code_id, decoder)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub code_id: String,
    pub decoder: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn label(&self) -> String {
        format!("{} ({})", self.code_id, self.decoder)
    }
}

/// Groups rows into curves in order of first appearance and sorts each curve
/// by SNR. Points with SER 0 have no place on a log axis; they are dropped
/// with a warning.
pub fn group_series(rows: &[SimRow]) -> (Vec<Series>, Vec<String>) {
    let mut series: Vec<Series> = Vec::new();
    let mut warnings = Vec::new();
    for r in rows {
        let idx = match series
            .iter()
            .position(|s| s.code_id == r.code_id && s.decoder == r.decoder)
        {
            Some(i) => i,
            None => {
                series.push(Series {
                    code_id: r.code_id.clone(),
                    decoder: r.decoder.clone(),
                    points: Vec::new(),
                });
                series.len() - 1
            }
        };
        if r.ser > 0.0 && r.ser.is_finite() {
            series[idx].points.push((r.snr_db, r.ser));
        } else {
            warnings.push(format!(
                "{} ({}) at {} dB: SER {} cannot be drawn on a log axis, point skipped",
                r.code_id, r.decoder, r.snr_db, r.ser
            ));
        }
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    (series, warnings)
}

/// Renders the curves. Returns `None` when there is nothing to draw.
pub fn render_svg(series: &[Series], title: &str) -> Option<String> {
    let all: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .collect();
    if all.is_empty() {
        return None;
    }
    let (mut x0, mut x1) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.0), b.max(p.0))
        });
    if x1 - x0 < 1e-9 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let lo = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let y0 = 10f64.powf(lo.log10().floor());
    let y1 = 1.0;

    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (860, 560)).into_drawing_area();
        root.fill(&WHITE).ok()?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 22))
            .margin(20)
            .x_label_area_size(45)
            .y_label_area_size(75)
            .build_cartesian_2d(x0..x1, (y0..y1).log_scale())
            .ok()?;
        chart
            .configure_mesh()
            .x_desc("SNR (dB)")
            .y_desc("symbol error rate")
            .y_label_formatter(&|v| format!("{v:.0e}"))
            .draw()
            .ok()?;
        for (i, s) in series.iter().enumerate() {
            if s.points.is_empty() {
                continue;
            }
            let color = Palette99::pick(i).to_rgba();
            chart
                .draw_series(LineSeries::new(
                    s.points.iter().copied(),
                    color.stroke_width(2),
                ))
                .ok()?
                .label(s.label())
                .legend(move |(x, y)| {
                    PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2))
                });
            chart
                .draw_series(s.points.iter().map(|&p| Circle::new(p, 3, color.filled())))
                .ok()?;
        }
        chart
            .configure_series_labels()
            .position(SeriesLabelPosition::UpperRight)
            .background_style(WHITE.mix(0.9))
            .border_style(BLACK)
            .draw()
            .ok()?;
        root.present().ok()?;
    }
    Some(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(code: &str, dec: &str, snr: f64, ser: f64) -> SimRow {
        SimRow {
            snr_db: snr,
            trials: 10,
            symbol_errors: 0,
            ser,
            decoder: dec.into(),
            code_id: code.into(),
            seed: 0,
            wall_time: 0.0,
        }
    }

    #[test]
    fn grouping_and_zero_points() {
        let rows = vec![
            row("a", "ml", 4.0, 0.1),
            row("b", "ml", 0.0, 0.5),
            row("a", "ml", 0.0, 0.3),
            row("a", "lattice", 0.0, 0.4),
            row("a", "ml", 8.0, 0.0),
        ];
        let (s, w) = group_series(&rows);
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].points, vec![(0.0, 0.3), (4.0, 0.1)]);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn renders_a_chart_with_a_legend() {
        let (s, _) = group_series(&[row("a", "ml", 0.0, 0.3), row("a", "ml", 4.0, 0.01)]);
        let svg = render_svg(&s, "t").unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("a (ml)"));
        assert!(svg.contains("SNR (dB)"));
        assert!(render_svg(&[], "t").is_none());
    }
}
