//! Standalone SVG accuracy plot: two data polylines (train and validation)
//! over a fixed [0, 1] accuracy axis, with tick marks, axis labels, and a
//! legend. No dependencies; the only `<polyline>` elements are the two data
//! series, so structural checks can count them.

use std::fmt::Write as _;

use pxcnn_core::model::TrainingHistory;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 62.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 52.0;

const TRAIN_COLOR: &str = "#1f77b4";
const VAL_COLOR: &str = "#d62728";

pub fn render_accuracy_svg(history: &TrainingHistory) -> String {
    let n = history.records.len();
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |epoch: usize| -> f64 {
        if n <= 1 {
            LEFT + plot_w / 2.0
        } else {
            LEFT + (epoch as f64 - 1.0) / (n as f64 - 1.0) * plot_w
        }
    };
    let y = |acc: f64| -> f64 { TOP + (1.0 - acc) * plot_h };
    let points = |select: fn(&pxcnn_core::model::EpochRecord) -> f64| -> String {
        history
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| format!("{:.2},{:.2}", x(i + 1), y(select(r))))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );

    // Gridlines and y ticks every 0.2.
    for tick in 0..=5 {
        let acc = tick as f64 / 5.0;
        let ty = y(acc);
        let _ = writeln!(
            svg,
            "  <line x1=\"{LEFT}\" y1=\"{ty:.2}\" x2=\"{:.2}\" y2=\"{ty:.2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>",
            LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\" font-family=\"sans-serif\">{acc:.1}</text>",
            LEFT - 8.0,
            ty + 4.0
        );
    }

    // X ticks: every epoch while readable, otherwise a coarser step.
    let step = n.div_ceil(10).max(1);
    let mut epoch = 1;
    while epoch <= n {
        let tx = x(epoch);
        let _ = writeln!(
            svg,
            "  <line x1=\"{tx:.2}\" y1=\"{:.2}\" x2=\"{tx:.2}\" y2=\"{:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>",
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{tx:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">{epoch}</text>",
            TOP + plot_h + 20.0
        );
        epoch += step;
    }

    // Axes.
    let _ = writeln!(
        svg,
        "  <line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{:.2}\" stroke=\"#333333\" stroke-width=\"1.5\"/>",
        TOP + plot_h
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{LEFT}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#333333\" stroke-width=\"1.5\"/>",
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\">epoch</text>",
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"16\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 16 {:.2})\">accuracy</text>",
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    // The two data series.
    let _ = writeln!(
        svg,
        "  <polyline class=\"data train\" fill=\"none\" stroke=\"{TRAIN_COLOR}\" stroke-width=\"2\" points=\"{}\"/>",
        points(|r| r.train_acc)
    );
    let _ = writeln!(
        svg,
        "  <polyline class=\"data validation\" fill=\"none\" stroke=\"{VAL_COLOR}\" stroke-width=\"2\" points=\"{}\"/>",
        points(|r| r.val_acc)
    );

    // Legend.
    let lx = LEFT + plot_w + 16.0;
    for (i, (color, name)) in [(TRAIN_COLOR, "train"), (VAL_COLOR, "validation")]
        .iter()
        .enumerate()
    {
        let ly = TOP + 12.0 + i as f64 * 22.0;
        let _ = writeln!(
            svg,
            "  <line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            lx + 22.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" font-family=\"sans-serif\">{name}</text>",
            lx + 28.0,
            ly + 4.5
        );
    }

    svg.push_str("</svg>\n");
    svg
}
