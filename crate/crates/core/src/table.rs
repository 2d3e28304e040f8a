/// Renders labelled rows with right-aligned columns separated by single spaces.
/// All rows must have the same number of cells.
pub fn aligned_rows(rows: &[(&str, Vec<String>)]) -> String {
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
    let cols = rows.first().map_or(0, |(_, r)| r.len());
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|(_, r)| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (label, cells) in rows {
        let body: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
        out.push_str(&format!("{label:<label_w$} {}\n", body.join(" ")));
    }
    out
}
