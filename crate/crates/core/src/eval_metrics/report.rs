use std::fmt::Write as _;

use super::{ApEntry, Bucket, EvalReport};

/// Column group: a title spanning several sub-columns.
struct Group {
    title: String,
    columns: Vec<String>,
}

/// Renders a boxed table whose header has a spanning group row above the
/// column names, with the stub column label between the two.
fn grid(stub: &str, groups: &[Group], rows: &[(String, Vec<String>)]) -> String {
    let stub_w = rows
        .iter()
        .map(|(name, _)| name.len())
        .chain([stub.len()])
        .max()
        .unwrap_or(0);
    let mut widths: Vec<Vec<usize>> = Vec::new();
    let mut col = 0;
    for g in groups {
        let mut w: Vec<usize> = g
            .columns
            .iter()
            .enumerate()
            .map(|(i, name)| {
                rows.iter()
                    .map(|(_, cells)| cells[col + i].len())
                    .chain([name.len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let span: usize = w.iter().sum::<usize>() + 3 * (w.len() - 1);
        if g.title.len() > span {
            *w.last_mut().unwrap() += g.title.len() - span;
        }
        col += w.len();
        widths.push(w);
    }
    let span = |w: &[usize]| w.iter().sum::<usize>() + 3 * (w.len() - 1);
    let rule = |fill: char, stub_fill: char, inner: char| {
        let mut line = format!("+{}+", stub_fill.to_string().repeat(stub_w + 2));
        for w in &widths {
            let cells: Vec<String> = w.iter().map(|n| fill.to_string().repeat(n + 2)).collect();
            line.push_str(&cells.join(&inner.to_string()));
            line.push('+');
        }
        line
    };

    let mut out = String::new();
    let _ = writeln!(out, "{}", rule('-', '-', '-'));
    let mut line = format!("| {:stub_w$} |", "");
    for (g, w) in groups.iter().zip(&widths) {
        let _ = write!(line, " {:^width$} |", g.title, width = span(w));
    }
    let _ = writeln!(out, "{line}");
    let mut mid = format!("| {stub:<stub_w$} +");
    for w in &widths {
        let cells: Vec<String> = w.iter().map(|n| "-".repeat(n + 2)).collect();
        mid.push_str(&cells.join("+"));
        mid.push('+');
    }
    let _ = writeln!(out, "{mid}");
    let mut line = format!("| {:stub_w$} |", "");
    for (g, w) in groups.iter().zip(&widths) {
        for (name, n) in g.columns.iter().zip(w) {
            let _ = write!(line, " {name:^n$} |");
        }
    }
    let _ = writeln!(out, "{line}");
    let _ = writeln!(out, "{}", rule('=', '=', '+'));
    for (name, cells) in rows {
        let mut line = format!("| {name:<stub_w$} |");
        let mut cells = cells.iter();
        for w in &widths {
            for n in w {
                let _ = write!(line, " {:>n$} |", cells.next().expect("cell per column"));
            }
        }
        let _ = writeln!(out, "{line}");
        let _ = writeln!(out, "{}", rule('-', '-', '+'));
    }
    out
}

fn cell(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

fn mode_label(report: &EvalReport) -> &'static str {
    match report.config.iou_mode {
        crate::box_geometry::IouMode::ThreeD => "3D",
        crate::box_geometry::IouMode::Bev => "BEV",
    }
}

/// AP per difficulty, one row per report, one column group per
/// interpolation and AP threshold. Layout and thresholds follow the first
/// report's configuration.
pub fn ap_table(reports: &[EvalReport]) -> String {
    let Some(first) = reports.first() else {
        return String::new();
    };
    let cfg = &first.config;
    let mut groups = Vec::new();
    let mut keys = Vec::new();
    let kinds = [("AP11", cfg.interpolation.ap11()), ("AP40", cfg.interpolation.ap40())];
    for (kind, enabled) in kinds {
        if !enabled {
            continue;
        }
        for &t in &cfg.ap_thresholds {
            groups.push(Group {
                title: format!("{kind}, (IoU={t:.2})"),
                columns: cfg.difficulties.iter().map(|d| d.to_string()).collect(),
            });
            keys.extend(cfg.difficulties.iter().map(|d| (kind, t, *d)));
        }
    }
    let rows: Vec<(String, Vec<String>)> = reports
        .iter()
        .map(|r| {
            let cells = keys
                .iter()
                .map(|(kind, t, d)| {
                    let entry = r.ap_entry(*d, *t);
                    cell(entry.and_then(|e| if *kind == "AP11" { e.ap11 } else { e.ap40 }))
                })
                .collect();
            (r.method.clone(), cells)
        })
        .collect();
    format!(
        "Average precision, {} box overlap\n{}",
        mode_label(first),
        grid("Method", &groups, &rows)
    )
}

/// Recall over all ground truths of the class, one row per report, with
/// RoI and RCNN sub-columns per threshold. Final predictions carry no
/// proposal-stage information, so both sub-columns hold the same value.
pub fn recall_table(reports: &[EvalReport]) -> String {
    let Some(first) = reports.first() else {
        return String::new();
    };
    let thresholds = &first.config.recall_thresholds;
    let groups: Vec<Group> = thresholds
        .iter()
        .map(|t| Group {
            title: format!("Recall, (IoU={t:.2})"),
            columns: vec!["RoI".to_string(), "RCNN".to_string()],
        })
        .collect();
    let rows: Vec<(String, Vec<String>)> = reports
        .iter()
        .map(|r| {
            let cells = thresholds
                .iter()
                .flat_map(|t| {
                    let v = cell(r.recall_entry(Bucket::Overall, *t).and_then(|e| e.recall));
                    [v.clone(), v]
                })
                .collect();
            (r.method.clone(), cells)
        })
        .collect();
    format!(
        "Recall, {} box overlap\n{}RoI and RCNN both report recall of the final predictions; proposal-stage recall is not observable in result files.\n",
        mode_label(first),
        grid("Method", &groups, &rows)
    )
}

pub fn pr_curve_csv(entry: &ApEntry) -> String {
    let mut out = String::from("score,recall,precision\n");
    for p in &entry.curve.points {
        let _ = writeln!(out, "{},{},{}", p.score, p.recall, p.precision);
    }
    out
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Step plot of precision against recall for each entry.
pub fn pr_curve_svg(title: &str, entries: &[(String, &ApEntry)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    let x = |r: f64| M + r * (W - 2.0 * M);
    let y = |p: f64| H - M - p * (H - 2.0 * M);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    for i in 0..=10 {
        let v = i as f64 / 10.0;
        let _ = writeln!(
            out,
            r##"<line x1="{0:.1}" y1="{2:.1}" x2="{0:.1}" y2="{3:.1}" stroke="#ddd"/><line x1="{4:.1}" y1="{1:.1}" x2="{5:.1}" y2="{1:.1}" stroke="#ddd"/>"##,
            x(v),
            y(v),
            y(1.0),
            y(0.0),
            x(0.0),
            x(1.0)
        );
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.1}</text>"#, x(v), y(0.0) + 18.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"#, x(0.0) - 6.0, y(v) + 4.0);
    }
    let _ = writeln!(
        out,
        r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * M,
        H - 2.0 * M
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">Recall</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">Precision</text>"#,
        H / 2.0
    );
    for (i, (label, entry)) in entries.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        let mut prev = (0.0, entry.curve.points.first().map_or(0.0, |p| p.precision));
        let _ = write!(path, "{:.2},{:.2}", x(prev.0), y(prev.1));
        for p in &entry.curve.points {
            let _ = write!(path, " {:.2},{:.2} {:.2},{:.2}", x(p.recall), y(prev.1), x(p.recall), y(p.precision));
            prev = (p.recall, p.precision);
        }
        let _ = writeln!(out, r#"<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>"#);
        let ly = M + 18.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{2}" y="{3}">{4}</text>"#,
            W - M - 150.0,
            W - M - 126.0,
            W - M - 120.0,
            ly + 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
