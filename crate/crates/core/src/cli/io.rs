//! Dataset and model-list ingestion, TSV output.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::data::{Dataset, Family};
use crate::error::{PaviError, Result};
use crate::measures::VariableSet;

/// Reads a comma-separated file with a header row. The `response` column
/// becomes y; every other column is a predictor, in file order. Rows are
/// reported 1-based, counting data rows only.
pub fn load_dataset(path: &Path, response: &str, family: Family) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let resp_col = header
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| PaviError::MissingColumn(response.to_string()))?;
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != resp_col)
        .map(|(_, h)| h.clone())
        .collect();
    let p = names.len();

    // row-major while reading, transposed into the column-major matrix at the end
    let mut values: Vec<f64> = Vec::new();
    let mut y: Vec<f64> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != header.len() {
            return Err(PaviError::Parse {
                row,
                column: "*".into(),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            let column = &header[j];
            if field.is_empty() || field.eq_ignore_ascii_case("na") || field.eq_ignore_ascii_case("nan") {
                return Err(PaviError::MissingValue {
                    row,
                    column: column.clone(),
                });
            }
            let v: f64 = field.parse().map_err(|_| PaviError::Parse {
                row,
                column: column.clone(),
                message: format!("'{field}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(PaviError::Parse {
                    row,
                    column: column.clone(),
                    message: format!("'{field}' is not finite"),
                });
            }
            if j == resp_col {
                if family == Family::Binomial && v != 0.0 && v != 1.0 {
                    return Err(PaviError::Parse {
                        row,
                        column: column.clone(),
                        message: format!("binomial response must be 0 or 1, found {field}"),
                    });
                }
                y.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let n = y.len();
    if n == 0 {
        return Err(PaviError::InvalidConfig(format!("{} has no data rows", path.display())));
    }
    let x = DMatrix::from_row_slice(n, p, &values);
    Dataset::new(x, DVector::from_vec(y), family)?.with_column_names(names)
}

/// A named model-under-check.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedModel {
    pub name: String,
    pub set: VariableSet,
}

fn parse_indices(name: &str, text: &str, p: Option<usize>) -> Result<VariableSet> {
    let mut idx = Vec::new();
    for tok in text
        .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
    {
        let i: usize = tok
            .parse()
            .map_err(|_| PaviError::ModelList(format!("model '{name}': '{tok}' is not a variable index")))?;
        if i == 0 {
            return Err(PaviError::ModelList(format!(
                "model '{name}': indices are 1-based, found 0"
            )));
        }
        if let Some(p) = p {
            if i > p {
                return Err(PaviError::ModelList(format!("model '{name}': index {i} exceeds p={p}")));
            }
        }
        if idx.contains(&i) {
            return Err(PaviError::ModelList(format!("model '{name}': duplicate index {i}")));
        }
        idx.push(i);
    }
    VariableSet::new(idx).map_err(|e| PaviError::ModelList(format!("model '{name}': {e}")))
}

/// Parses "name: i,j,k" lines, or a two-column CSV (name, indices) whose
/// optional header row is skipped. Blank lines and lines starting with '#'
/// are ignored. Indices are checked against `p` when given.
pub fn parse_model_list(text: &str, p: Option<usize>) -> Result<Vec<NamedModel>> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let colon_form = lines.first().is_some_and(|l| l.contains(':'));
    let mut models: Vec<NamedModel> = Vec::new();
    if colon_form {
        for line in lines {
            let (name, rest) = line
                .split_once(':')
                .ok_or_else(|| PaviError::ModelList(format!("line '{line}' has no ':'")))?;
            let name = name.trim().to_string();
            let set = parse_indices(&name, rest, p)?;
            models.push(NamedModel { name, set });
        }
    } else {
        let body = lines.join("\n");
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        for (k, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(PaviError::ModelList(format!(
                    "record {} needs a name and an index list",
                    k + 1
                )));
            }
            let name = record[0].to_string();
            // remaining fields are indices, whether quoted as one field or not
            let rest: Vec<&str> = record.iter().skip(1).collect();
            let rest = rest.join(",");
            match parse_indices(&name, &rest, p) {
                Ok(set) => models.push(NamedModel { name, set }),
                Err(_) if k == 0 && rest.chars().any(|c| c.is_alphabetic()) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    for (k, m) in models.iter().enumerate() {
        if m.name.is_empty() {
            return Err(PaviError::ModelList(format!("model {} has an empty name", k + 1)));
        }
        if models[..k].iter().any(|o| o.name == m.name) {
            return Err(PaviError::ModelList(format!("model '{}' is listed twice", m.name)));
        }
    }
    Ok(models)
}

/// `%g`-style formatting with 6 significant digits.
pub fn format_g6(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A header plus rows of already-formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_tsv(&self) -> String {
        let mut out = self.header.join("\t");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Writes `contents` next to `path` under a temporary name, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| PaviError::InvalidConfig(format!("'{}' is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_tsv(path: &Path, table: &Table) -> Result<()> {
    write_atomic(path, &table.to_tsv())
}

pub fn read_tsv(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| PaviError::InvalidConfig(format!("{} is empty", path.display())))?
        .split('\t')
        .map(str::to_string)
        .collect();
    let rows = lines.map(|l| l.split('\t').map(str::to_string).collect()).collect();
    Ok(Table { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tmp(name: &str, contents: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(name);
        fs::write(&p, contents).unwrap();
        (dir, p)
    }

    #[test]
    fn toy_csv_round_trips() {
        let (_d, p) = tmp("toy.csv", "a,y,b\n1.5,0,2\n-3,1,4e-1\n0,1,7\n");
        let d = load_dataset(&p, "y", Family::Binomial).unwrap();
        assert_eq!((d.n(), d.p()), (3, 2));
        assert_eq!(d.column(0), &[1.5, -3.0, 0.0]);
        assert_eq!(d.column(1), &[2.0, 0.4, 7.0]);
        assert_eq!(d.y().as_slice(), &[0.0, 1.0, 1.0]);
        assert_eq!(d.column_names().unwrap(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn bad_inputs_are_located() {
        let (_d, p) = tmp("bad.csv", "x1,y\n1,0\n2,2\n");
        match load_dataset(&p, "y", Family::Binomial) {
            Err(PaviError::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "y");
            }
            other => panic!("{other:?}"),
        }
        let (_d, p) = tmp("nn.csv", "x1,y\n1,0\nabc,1\n");
        assert!(matches!(
            load_dataset(&p, "y", Family::Gaussian),
            Err(PaviError::Parse { row: 2, .. })
        ));
        let (_d, p) = tmp("na.csv", "x1,x2,y\n1,,0\n");
        match load_dataset(&p, "y", Family::Gaussian) {
            Err(PaviError::MissingValue { row, column }) => assert_eq!((row, column.as_str()), (1, "x2")),
            other => panic!("{other:?}"),
        }
        let (_d, p) = tmp("nr.csv", "x1,x2\n1,2\n");
        assert!(matches!(
            load_dataset(&p, "y", Family::Gaussian),
            Err(PaviError::MissingColumn(_))
        ));
    }

    #[test]
    fn wide_file_loads() {
        let mut text = (1..=2000).map(|j| format!("g{j}")).collect::<Vec<_>>().join(",");
        text.push_str(",class\n");
        for i in 0..62 {
            let row: Vec<String> = (0..2000).map(|j| format!("{}", (i * 7 + j) % 13)).collect();
            text.push_str(&row.join(","));
            text.push_str(&format!(",{}\n", i % 2));
        }
        let (_d, p) = tmp("colon.csv", &text);
        let d = load_dataset(&p, "class", Family::Binomial).unwrap();
        assert_eq!((d.n(), d.p()), (62, 2000));
    }

    #[test]
    fn model_lists() {
        let m = parse_model_list("ImpS: 249,1772\n\nL10: 732,994,1473,1763,1794,1843\n", Some(2000)).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].name, "ImpS");
        assert_eq!(m[0].set, VariableSet::new([249, 1772]).unwrap());
        assert_eq!(m[1].set.len(), 6);

        let csv_form = parse_model_list("name,variables\nA,\"1,3\"\nB,2;4\n", Some(5)).unwrap();
        assert_eq!(csv_form[0].set, VariableSet::new([1, 3]).unwrap());
        assert_eq!(csv_form[1].set, VariableSet::new([2, 4]).unwrap());

        let dup = parse_model_list("M1: 1,2,2", None).unwrap_err();
        assert!(dup.to_string().contains("M1"));
        let big = parse_model_list("Big: 1,9", Some(5)).unwrap_err();
        assert!(big.to_string().contains("Big") && big.to_string().contains('9'));
        assert!(parse_model_list("A: 1\nA: 2", None).is_err());
        assert_eq!(parse_model_list("Empty:", None).unwrap()[0].set, VariableSet::empty());
    }

    #[test]
    fn g6_examples() {
        assert_eq!(format_g6(0.0), "0");
        assert_eq!(format_g6(1.0), "1");
        assert_eq!(format_g6(6.0 / 7.0), "0.857143");
        assert_eq!(format_g6(123456.7), "123457");
        assert_eq!(format_g6(1234567.0), "1.23457e+06");
        assert_eq!(format_g6(0.0001234567), "0.000123457");
        assert_eq!(format_g6(0.00001234567), "1.23457e-05");
        assert_eq!(format_g6(-2.5), "-2.5");
        assert_eq!(format_g6(999999.7), "1e+06");
    }

    proptest! {
        #[test]
        fn g6_round_trips_to_six_digits(x in -1e9f64..1e9) {
            let s = format_g6(x);
            let back: f64 = s.parse().unwrap();
            let expected: f64 = format!("{:.5e}", x).parse().unwrap();
            prop_assert_eq!(back, expected);
        }
    }

    #[test]
    fn atomic_write_and_read() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.tsv");
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), format_g6(0.5)]);
        write_tsv(&p, &t).unwrap();
        assert_eq!(read_tsv(&p).unwrap(), t);
        let leftovers: Vec<_> = fs::read_dir(p.parent().unwrap()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }
}
