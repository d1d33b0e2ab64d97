//! Text renderings of PRR tables and correlation matrices.

use std::fmt::Write as _;

use anyhow::Result;
use sumue_core::analysis::{CorrelationMatrix, PrrTable};

pub const COL_MEAN: &str = "Col Mean";
pub const ROW_MEAN: &str = "Row Mean";

/// Fixed-point text without a negative sign on zero.
pub fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn table_rows(table: &PrrTable<f64>) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec![String::new()];
    header.extend(table.col_names.iter().cloned());
    if table.row_means.is_some() {
        header.push(ROW_MEAN.to_string());
    }
    let mut rows = Vec::new();
    for (i, name) in table.row_names.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend(table.values[i].iter().map(|&v| fixed(v, 4)));
        if let Some(means) = &table.row_means {
            row.push(fixed(means[i], 4));
        }
        rows.push(row);
    }
    let mut mean_row = vec![COL_MEAN.to_string()];
    mean_row.extend(table.col_means.iter().map(|&v| fixed(v, 4)));
    if let Some(means) = &table.row_means {
        let overall = means.iter().sum::<f64>() / means.len() as f64;
        mean_row.push(fixed(overall, 4));
    }
    rows.push(mean_row);
    (header, rows)
}

fn to_csv(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn table_csv(table: &PrrTable<f64>) -> Result<String> {
    let (header, rows) = table_rows(table);
    to_csv(&header, &rows)
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

pub fn table_markdown(table: &PrrTable<f64>) -> String {
    let (header, rows) = table_rows(table);
    let mut out = String::new();
    let line = |cells: &[String]| format!("| {} |\n", cells.iter().map(|c| md_cell(c)).collect::<Vec<_>>().join(" | "));
    out.push_str(&line(&header));
    let mut sep = vec![":---".to_string()];
    sep.extend(std::iter::repeat_n("---:".to_string(), header.len() - 1));
    out.push_str(&line(&sep));
    for r in &rows {
        out.push_str(&line(r));
    }
    let degenerate: Vec<String> = table
        .degenerate
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &d)| d)
                .map(move |(j, _)| format!("{} / {}", table.row_names[i], table.col_names[j]))
        })
        .collect();
    if !degenerate.is_empty() {
        let _ = write!(out, "\nDegenerate cells (constant quality, PRR set to 0): {}\n", degenerate.join("; "));
    }
    out
}

pub fn correlation_csv(m: &CorrelationMatrix<f64>) -> Result<String> {
    let mut header = vec![String::new()];
    header.extend(m.names.iter().cloned());
    let rows: Vec<Vec<String>> = m
        .names
        .iter()
        .zip(&m.values)
        .map(|(name, row)| {
            std::iter::once(name.clone())
                .chain(row.iter().map(|v| v.map(|v| fixed(v, 2)).unwrap_or_default()))
                .collect()
        })
        .collect();
    to_csv(&header, &rows)
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

const NEG: (f64, f64, f64) = (33.0, 102.0, 172.0);
const POS: (f64, f64, f64) = (178.0, 24.0, 43.0);

/// Diverging blue-white-red colour for a value clamped to `[-1, 1]`.
pub fn diverging_color(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let (end, t) = if v < 0.0 { (NEG, -v) } else { (POS, v) };
    let mix = |c: f64| (255.0 + (c - 255.0) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(end.0), mix(end.1), mix(end.2))
}

const CELL: usize = 44;
const CHAR_W: usize = 7;

pub fn correlation_svg(m: &CorrelationMatrix<f64>, title: &str) -> String {
    let k = m.names.len();
    let label_w = m.names.iter().map(|n| n.chars().count()).max().unwrap_or(0) * CHAR_W + 12;
    let top = label_w + 30;
    let legend_h = 40;
    let width = label_w + k * CELL + 20;
    let height = top + k * CELL + legend_h;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    s.push_str(concat!(
        "<defs>\n",
        r#"<pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">"#,
        r##"<rect width="6" height="6" fill="#ffffff"/><line x1="0" y1="0" x2="0" y2="6" stroke="#888888" stroke-width="2"/></pattern>"##,
        "\n",
        r#"<linearGradient id="scale" x1="0" x2="1" y1="0" y2="0">"#,
    ));
    for stop in 0..=4 {
        let v = -1.0 + 0.5 * stop as f64;
        let _ = write!(s, r#"<stop offset="{}%" stop-color="{}"/>"#, stop * 25, diverging_color(v));
    }
    s.push_str("</linearGradient>\n</defs>\n");
    let _ = writeln!(s, r#"<text x="{}" y="16" font-size="13">{}</text>"#, label_w, xml_escape(title));
    for (j, name) in m.names.iter().enumerate() {
        let x = label_w + j * CELL + CELL / 2;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" transform="rotate(-90 {x} {})" text-anchor="start">{}</text>"#,
            top - 6,
            top - 6,
            xml_escape(name)
        );
    }
    for (i, name) in m.names.iter().enumerate() {
        let y = top + i * CELL;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            label_w - 6,
            y + CELL / 2 + 4,
            xml_escape(name)
        );
        for (j, v) in m.values[i].iter().enumerate() {
            let x = label_w + j * CELL;
            match v {
                Some(v) => {
                    let text_color = if v.abs() > 0.6 { "#ffffff" } else { "#000000" };
                    let _ = writeln!(
                        s,
                        r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" stroke="#ffffff"/><text x="{}" y="{}" text-anchor="middle" fill="{text_color}" class="value">{}</text>"##,
                        diverging_color(*v),
                        x + CELL / 2,
                        y + CELL / 2 + 4,
                        fixed(*v, 2)
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="url(#hatch)" stroke="#ffffff" class="null"/>"##
                    );
                }
            }
        }
    }
    let ly = top + k * CELL + 12;
    let lw = (k * CELL).max(120);
    let _ = writeln!(
        s,
        r##"<rect x="{label_w}" y="{ly}" width="{lw}" height="10" fill="url(#scale)" stroke="#cccccc"/>"##
    );
    for (frac, label) in [(0.0, "-1"), (0.5, "0"), (1.0, "1")] {
        let x = label_w as f64 + frac * lw as f64;
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{label}</text>"#, ly + 24);
    }
    s.push_str("</svg>\n");
    s
}
