//! Delimited text input: group scores, contingency counts, p-value lists.
//!
//! Files are comma or tab delimited with a header row. Group files come in
//! two layouts, told apart by their shape:
//!
//! ```text
//! group,score          A,B
//! A,16                 16,17
//! B,17                 20,21
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<f64>>,
}

fn delimiter(text: &str) -> u8 {
    let header = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if header.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

struct Table {
    header: Vec<String>,
    /// (1-based line, fields)
    rows: Vec<(usize, Vec<String>)>,
}

fn read_table(text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter(text))
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(Error::parse(1, "missing header row"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(Table { header, rows })
}

fn number(line: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::parse(line, format!("`{field}` is not a finite number")))
}

fn is_number(field: &str) -> bool {
    field.parse::<f64>().is_ok()
}

/// Parse a group file in long or wide layout. Groups keep file order.
pub fn parse_groups(text: &str) -> Result<Vec<Group>> {
    let table = read_table(text)?;
    let label_header = table
        .header
        .first()
        .is_some_and(|h| matches!(h.to_ascii_lowercase().as_str(), "group" | "label" | "condition"));
    let first_is_label = table
        .rows
        .first()
        .is_some_and(|(_, r)| r.first().is_some_and(|f| !is_number(f)));
    let long = table.header.len() == 2 && (label_header || first_is_label);

    let mut groups: Vec<Group> = Vec::new();
    if long {
        for (line, row) in &table.rows {
            if row.len() != 2 {
                return Err(Error::parse(*line, format!("expected 2 fields, found {}", row.len())));
            }
            let value = number(*line, &row[1])?;
            match groups.iter_mut().find(|g| g.name == row[0]) {
                Some(g) => g.values.push(value),
                None => groups.push(Group {
                    name: row[0].clone(),
                    values: vec![value],
                }),
            }
        }
    } else {
        groups = table
            .header
            .iter()
            .map(|name| Group {
                name: name.clone(),
                values: Vec::new(),
            })
            .collect();
        for (line, row) in &table.rows {
            if row.len() > groups.len() {
                return Err(Error::parse(*line, "more fields than header columns"));
            }
            for (g, field) in groups.iter_mut().zip(row) {
                if !field.is_empty() {
                    g.values.push(number(*line, field)?);
                }
            }
        }
    }
    if groups.is_empty() || groups.iter().all(|g| g.values.is_empty()) {
        return Err(Error::parse(1, "no observations"));
    }
    Ok(groups)
}

/// Parse a counts matrix. A non-numeric first column is taken as row labels.
pub fn parse_counts(text: &str) -> Result<CountTable> {
    let table = read_table(text)?;
    let labelled = table
        .rows
        .first()
        .is_some_and(|(_, r)| r.first().is_some_and(|f| !is_number(f)));
    let skip = usize::from(labelled);
    let col_labels: Vec<String> = table.header[skip..].to_vec();
    let mut row_labels = Vec::new();
    let mut counts = Vec::new();
    for (i, (line, row)) in table.rows.iter().enumerate() {
        if row.len() != table.header.len() {
            return Err(Error::parse(
                *line,
                format!("expected {} fields, found {}", table.header.len(), row.len()),
            ));
        }
        row_labels.push(if labelled {
            row[0].clone()
        } else {
            format!("row{}", i + 1)
        });
        let values = row[skip..]
            .iter()
            .map(|f| {
                let v = number(*line, f)?;
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(Error::parse(*line, format!("count `{f}` is not a non-negative integer")));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        counts.push(values);
    }
    if counts.is_empty() {
        return Err(Error::parse(1, "no rows of counts"));
    }
    Ok(CountTable {
        row_labels,
        col_labels,
        counts,
    })
}

/// One p-value per line or comma-separated; a non-numeric first line is a
/// header.
pub fn parse_pvalues(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        for field in line.split([',', '\t']).map(str::trim).filter(|f| !f.is_empty()) {
            if out.is_empty() && i == 0 && !is_number(field) {
                continue;
            }
            let p = number(i + 1, field)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::parse(i + 1, format!("p-value {p} outside [0, 1]")));
            }
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(Error::parse(1, "no p-values"));
    }
    Ok(out)
}
