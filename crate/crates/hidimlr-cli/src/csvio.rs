use ndarray::Array2;

/// Parse a rectangular numeric CSV: comma-separated, '.' decimal, UTF-8,
/// optionally skipping one header row. Values are parsed as f64, which
/// round-trips anything we print with 17 significant digits.
pub fn parse_matrix(bytes: &[u8], skip_header: bool) -> Result<Array2<f64>, String> {
    let text = std::str::from_utf8(bytes).map_err(|_| "file is not valid UTF-8".to_string())?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 && skip_header {
            continue;
        }
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in trimmed.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| format!("line {}: bad number '{}'", lineno + 1, field.trim()))?;
            if !v.is_finite() {
                return Err(format!("line {}: non-finite value", lineno + 1));
            }
            row.push(v);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(format!(
                    "line {}: expected {} fields, found {}",
                    lineno + 1,
                    w,
                    row.len()
                ));
            }
            _ => {}
        }
        rows.push(row);
    }
    let ncols = width.ok_or_else(|| "empty CSV".to_string())?;
    let nrows = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((nrows, ncols), flat).map_err(|e| e.to_string())
}

/// Write a matrix as CSV with 17 significant digits so read-back is exact.
#[allow(dead_code)]
pub fn format_matrix(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
