//! Charts of solution ratio and solving time against the swept parameter,
//! drawn from the aggregate rows of a bench CSV.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

/// Mean values of one method at each swept value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    pub ratio: Vec<(f64, f64)>,
    pub time_ms: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub param: String,
    /// Keyed by method name.
    pub series: BTreeMap<String, Series>,
}

pub fn read_aggregates(csv_text: &str) -> Result<PlotData, String> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("missing column '{name}'"))
    };
    let (seed, param, value, method, ratio, time) = (
        col("seed")?,
        col("varied_param")?,
        col("varied_value")?,
        col("method")?,
        col("solution_ratio")?,
        col("wall_time_ms")?,
    );
    let mut data = PlotData {
        param: String::new(),
        series: BTreeMap::new(),
    };
    for row in reader.records() {
        let row = row.map_err(|e| e.to_string())?;
        if &row[seed] != "mean" {
            continue;
        }
        data.param = row[param].to_string();
        let x: f64 = row[value]
            .parse()
            .map_err(|_| format!("bad varied_value '{}'", &row[value]))?;
        let s = data.series.entry(row[method].to_string()).or_default();
        if let Ok(y) = row[ratio].parse::<f64>() {
            s.ratio.push((x, y));
        }
        if let Ok(y) = row[time].parse::<f64>() {
            s.time_ms.push((x, y));
        }
    }
    if data.series.is_empty() {
        return Err("no aggregate rows in CSV".to_string());
    }
    Ok(data)
}

fn draw(
    path: &Path,
    data: &PlotData,
    y_label: &str,
    pick: fn(&Series) -> &[(f64, f64)],
) -> Result<(), String> {
    let points: Vec<(f64, f64)> = data
        .series
        .values()
        .flat_map(|s| pick(s).iter().copied())
        .collect();
    let (x0, x1) = points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
        (lo.min(p.0), hi.max(p.0))
    });
    let y1 = points.iter().fold(0.0f64, |hi, p| hi.max(p.1));
    let (x0, x1) = if points.is_empty() {
        (0.0, 1.0)
    } else {
        (x0, x1.max(x0 + 1.0))
    };
    let y1 = if y1 <= 0.0 { 1.0 } else { y1 * 1.05 };

    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    let err = |e: &dyn std::fmt::Display| e.to_string();
    root.fill(&WHITE).map_err(|e| err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .margin(16)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, 0.0..y1)
        .map_err(|e| err(&e))?;
    chart
        .configure_mesh()
        .x_desc(data.param.as_str())
        .y_desc(y_label)
        .draw()
        .map_err(|e| err(&e))?;
    for (i, (method, series)) in data.series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let pts = pick(series).to_vec();
        if pts.is_empty() {
            continue;
        }
        chart
            .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
            .map_err(|e| err(&e))?
            .label(method.as_str())
            .legend(move |(x, y)| {
                PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2))
            });
        chart
            .draw_series(pts.into_iter().map(|p| Circle::new(p, 3, color.filled())))
            .map_err(|e| err(&e))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| err(&e))?;
    root.present().map_err(|e| err(&e))
}

/// Writes `<prefix>_ratio.svg` and `<prefix>_time.svg`.
pub fn plot_csv(csv_text: &str, prefix: &Path) -> Result<Vec<PathBuf>, String> {
    let data = read_aggregates(csv_text)?;
    let with_suffix = |s: &str| {
        let mut name = prefix.as_os_str().to_owned();
        name.push(s);
        PathBuf::from(name)
    };
    let ratio = with_suffix("_ratio.svg");
    let time = with_suffix("_time.svg");
    draw(&ratio, &data, "solution ratio", |s| &s.ratio)?;
    draw(&time, &data, "time (ms)", |s| &s.time_ms)?;
    Ok(vec![ratio, time])
}
