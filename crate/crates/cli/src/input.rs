//! CSV ingestion.

use std::fmt;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use robustperiod::TimeSeries;

/// Column selector: a zero-based index or a header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl Default for Column {
    fn default() -> Self {
        Column::Index(0)
    }
}

impl FromStr for Column {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.is_empty() {
            return Err("column must not be empty".into());
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_string()),
        })
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::Index(i) => write!(f, "{i}"),
            Column::Name(n) => write!(f, "`{n}`"),
        }
    }
}

#[derive(Debug)]
pub enum InputError {
    Io(std::io::Error),
    Csv(csv::Error),
    /// Row numbers are 1-based lines of the file.
    Cell {
        row: usize,
        message: String,
    },
    Column(String),
    Empty,
    Series(robustperiod::Error),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Io(e) => write!(f, "cannot read input: {e}"),
            InputError::Csv(e) => write!(f, "malformed CSV: {e}"),
            InputError::Cell { row, message } => write!(f, "row {row}: {message}"),
            InputError::Column(m) => f.write_str(m),
            InputError::Empty => f.write_str("input contains no data rows"),
            InputError::Series(e) => write!(f, "invalid series: {e}"),
        }
    }
}

impl std::error::Error for InputError {}

pub fn read_csv(path: &Path, column: &Column) -> Result<TimeSeries, InputError> {
    let file = File::open(path).map_err(InputError::Io)?;
    let series = parse_csv(file, column)?;
    Ok(series.with_label(path.display().to_string()))
}

/// Parses comma-separated rows. The first row is a header when the selected
/// cell does not parse as a number, or always when the column is named.
pub fn parse_csv<R: std::io::Read>(reader: R, column: &Column) -> Result<TimeSeries, InputError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut values = Vec::new();
    let mut index = None;
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(InputError::Csv)?;
        let row = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let idx = match index {
            Some(idx) => idx,
            None => {
                let (idx, header) = resolve_column(&record, column)?;
                index = Some(idx);
                if header {
                    continue;
                }
                idx
            }
        };
        let cell = record.get(idx).unwrap_or("");
        if cell.is_empty() {
            return Err(InputError::Cell {
                row,
                message: format!("missing value in column {column}"),
            });
        }
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => {
                return Err(InputError::Cell {
                    row,
                    message: format!("non-finite value `{cell}`"),
                })
            }
            Err(_) => {
                return Err(InputError::Cell {
                    row,
                    message: format!("`{cell}` is not a number"),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(InputError::Empty);
    }
    TimeSeries::new(values).map_err(InputError::Series)
}

fn resolve_column(first: &csv::StringRecord, column: &Column) -> Result<(usize, bool), InputError> {
    match column {
        Column::Name(name) => first
            .iter()
            .position(|h| h == name)
            .map(|i| (i, true))
            .ok_or_else(|| InputError::Column(format!("no column named `{name}` in header"))),
        Column::Index(i) => {
            let cell = first.get(*i).ok_or_else(|| {
                InputError::Column(format!("column {i} out of range ({} columns)", first.len()))
            })?;
            Ok((*i, cell.parse::<f64>().is_err()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, column: &str) -> Result<Vec<f64>, InputError> {
        parse_csv(text.as_bytes(), &column.parse().unwrap()).map(TimeSeries::into_values)
    }

    #[test]
    fn bare_column() {
        assert_eq!(parse("1\n2\n3\n", "0").unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn header_by_name() {
        assert_eq!(parse("value\n1\n2\n", "value").unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn header_detected_by_index() {
        assert_eq!(parse("t,y\n0,1.5\n1,2.5\n", "1").unwrap(), vec![1.5, 2.5]);
    }

    #[test]
    fn bad_cell_names_row() {
        let err = parse("1\n2\nabc\n", "0").unwrap_err();
        assert!(matches!(err, InputError::Cell { row: 3, .. }), "{err}");
        assert!(err.to_string().contains("row 3"));
    }

    #[test]
    fn rejects_missing_and_non_finite() {
        assert!(matches!(
            parse("a,b\n1,2\n3,\n", "b").unwrap_err(),
            InputError::Cell { row: 3, .. }
        ));
        assert!(matches!(
            parse("a,b\n1,2\n3\n", "b").unwrap_err(),
            InputError::Cell { row: 3, .. }
        ));
        assert!(matches!(
            parse("1\nNaN\n", "0").unwrap_err(),
            InputError::Cell { row: 2, .. }
        ));
        assert!(matches!(
            parse("1\ninf\n", "0").unwrap_err(),
            InputError::Cell { row: 2, .. }
        ));
    }

    #[test]
    fn unknown_columns() {
        assert!(matches!(
            parse("a\n1\n", "b").unwrap_err(),
            InputError::Column(_)
        ));
        assert!(matches!(
            parse("1,2\n", "5").unwrap_err(),
            InputError::Column(_)
        ));
        assert!(matches!(parse("", "0").unwrap_err(), InputError::Empty));
        assert!(matches!(
            parse("value\n", "0").unwrap_err(),
            InputError::Empty
        ));
    }
}
