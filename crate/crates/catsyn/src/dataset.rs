//! Categorical microdata: codebooks, coded datasets, and cross-tabulations.
//!
//! Values are stored as 1-based level indices matching the codebook's level
//! order; `0` marks a missing cell awaiting [`CategoricalDataset::drop_incomplete`].
//! Datasets are immutable after construction and safe to share across threads.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel cell value for "missing, not yet dropped".
pub const MISSING: u32 = 0;

/// Stable per-row identifier, preserved through filtering and synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecordId(pub u64);

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One categorical variable: an ordered set of level labels plus a
/// sensitivity flag that marks it as a synthesis target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub levels: Vec<String>,
    #[serde(default)]
    pub sensitive: bool,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, levels: Vec<String>, sensitive: bool) -> Self {
        VariableSpec {
            name: name.into(),
            levels,
            sensitive,
        }
    }

    /// Number of categories.
    pub fn cardinality(&self) -> usize {
        self.levels.len()
    }

    /// 1-based index of `label`, if the variable defines it.
    pub fn level_index(&self, label: &str) -> Option<u32> {
        self.levels
            .iter()
            .position(|l| l == label)
            .map(|p| p as u32 + 1)
    }

    /// Label of the 1-based level `value`.
    pub fn level_label(&self, value: u32) -> Option<&str> {
        if value == MISSING {
            return None;
        }
        self.levels.get(value as usize - 1).map(String::as_str)
    }
}

#[derive(Deserialize)]
struct CodebookDoc {
    variables: Vec<VariableSpec>,
}

/// Ordered collection of [`VariableSpec`]s describing a dataset's columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodebookDoc")]
pub struct Codebook {
    variables: Vec<VariableSpec>,
    #[serde(skip)]
    by_name: HashMap<String, usize>,
}

impl TryFrom<CodebookDoc> for Codebook {
    type Error = Error;
    fn try_from(doc: CodebookDoc) -> Result<Self> {
        Codebook::new(doc.variables)
    }
}

impl Codebook {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::Codebook("no variables defined".into()));
        }
        let mut by_name = HashMap::new();
        for (j, var) in variables.iter().enumerate() {
            if by_name.insert(var.name.clone(), j).is_some() {
                return Err(Error::Codebook(format!("duplicate variable '{}'", var.name)));
            }
            if var.cardinality() < 2 {
                return Err(Error::Codebook(format!(
                    "variable '{}' needs at least 2 levels, has {}",
                    var.name,
                    var.cardinality()
                )));
            }
            let mut seen = HashSet::new();
            for level in &var.levels {
                if !seen.insert(level) {
                    return Err(Error::Codebook(format!(
                        "variable '{}' repeats level '{}'",
                        var.name, level
                    )));
                }
            }
        }
        Ok(Codebook { variables, by_name })
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    /// Number of variables (columns).
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn var(&self, j: usize) -> &VariableSpec {
        &self.variables[j]
    }

    /// Resolve a variable name, erroring if it is unknown.
    pub fn require(&self, name: &str) -> Result<usize> {
        self.var_index(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Resolve a list of names to column indices, rejecting duplicates.
    pub fn require_all(&self, names: &[String]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for name in names {
            let j = self.require(name)?;
            if out.contains(&j) {
                return Err(Error::invalid(format!("variable '{name}' listed twice")));
            }
            out.push(j);
        }
        Ok(out)
    }

    /// Names of all variables flagged sensitive.
    pub fn sensitive_vars(&self) -> Vec<String> {
        self.variables
            .iter()
            .filter(|v| v.sensitive)
            .map(|v| v.name.clone())
            .collect()
    }

    /// Partial synthesis requires at least one sensitive and one
    /// non-sensitive variable.
    pub fn check_synthesizable(&self) -> Result<()> {
        let sensitive = self.variables.iter().filter(|v| v.sensitive).count();
        if sensitive == 0 {
            return Err(Error::Codebook("no variable is flagged sensitive".into()));
        }
        if sensitive == self.num_vars() {
            return Err(Error::Codebook(
                "every variable is flagged sensitive; partial synthesis needs at least one unchanged variable".into(),
            ));
        }
        Ok(())
    }
}

/// CSV ingestion options.
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// Tokens to treat as missing values. Default: the empty string.
    pub missing_tokens: Vec<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            missing_tokens: vec![String::new()],
        }
    }
}

/// Column reserved for row identifiers in files written by this toolkit.
pub const RECORD_ID_COLUMN: &str = "record_id";

/// A rectangular table of coded categorical values tied to a [`Codebook`].
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDataset {
    codebook: Codebook,
    /// Row-major `n x r` cells, 1-based level indices, 0 = missing.
    cells: Vec<u32>,
    record_ids: Vec<RecordId>,
}

impl CategoricalDataset {
    /// Build a dataset from coded rows, validating every cell against the
    /// codebook. `MISSING` (0) is accepted and flagged for later dropping.
    pub fn new(
        codebook: Codebook,
        rows: Vec<Vec<u32>>,
        record_ids: Vec<RecordId>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset {
                context: "constructing dataset".into(),
            });
        }
        if rows.len() != record_ids.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} record ids",
                rows.len(),
                record_ids.len()
            )));
        }
        let r = codebook.num_vars();
        let mut cells = Vec::with_capacity(rows.len() * r);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != r {
                return Err(Error::invalid(format!(
                    "row {} has {} values, expected {}",
                    i + 1,
                    row.len(),
                    r
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != MISSING && v as usize > codebook.var(j).cardinality() {
                    return Err(Error::invalid(format!(
                        "value {} out of range for variable '{}' (d={}) at row {}",
                        v,
                        codebook.var(j).name,
                        codebook.var(j).cardinality(),
                        i + 1
                    )));
                }
            }
            cells.extend_from_slice(row);
        }
        let mut seen = HashSet::new();
        for id in &record_ids {
            if !seen.insert(*id) {
                return Err(Error::invalid(format!("duplicate record id {id}")));
            }
        }
        Ok(CategoricalDataset {
            codebook,
            cells,
            record_ids,
        })
    }

    /// Load a delimited text file with a header row naming a superset of the
    /// codebook variables. Lines starting with `#` are ignored. An optional
    /// `record_id` column supplies row identifiers; otherwise rows are
    /// numbered 1..n in file order.
    pub fn load_csv(
        path: impl AsRef<Path>,
        codebook: &Codebook,
        options: &CsvOptions,
    ) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(options.delimiter)
            .comment(Some(b'#'))
            .from_path(path.as_ref())?;

        let headers = reader.headers()?.clone();
        let mut col_of_var = Vec::with_capacity(codebook.num_vars());
        for var in codebook.variables() {
            let col = headers
                .iter()
                .position(|h| h == var.name)
                .ok_or_else(|| Error::MissingColumn {
                    variable: var.name.clone(),
                })?;
            col_of_var.push(col);
        }
        let id_col = headers.iter().position(|h| h == RECORD_ID_COLUMN);

        let mut rows = Vec::new();
        let mut record_ids = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let data_row = i + 1;
            let mut coded = Vec::with_capacity(codebook.num_vars());
            for (j, &col) in col_of_var.iter().enumerate() {
                let token = record.get(col).unwrap_or("");
                if options.missing_tokens.iter().any(|t| t == token) {
                    coded.push(MISSING);
                } else {
                    let var = codebook.var(j);
                    let v = var.level_index(token).ok_or_else(|| Error::UnknownLevel {
                        variable: var.name.clone(),
                        row: data_row,
                        label: token.to_string(),
                    })?;
                    coded.push(v);
                }
            }
            let id = match id_col {
                Some(col) => {
                    let token = record.get(col).unwrap_or("");
                    let parsed = token.parse::<u64>().map_err(|_| {
                        Error::invalid(format!(
                            "record_id '{token}' at data row {data_row} is not an integer"
                        ))
                    })?;
                    RecordId(parsed)
                }
                None => RecordId(data_row as u64),
            };
            rows.push(coded);
            record_ids.push(id);
        }
        if rows.is_empty() {
            return Err(Error::EmptyDataset {
                context: "file has a header but no data rows".into(),
            });
        }
        CategoricalDataset::new(codebook.clone(), rows, record_ids)
    }

    /// Write the dataset as labeled CSV with a leading `record_id` column.
    /// `banner` lines (if any) are emitted first as `#`-prefixed comments.
    pub fn write_csv(&self, path: impl AsRef<Path>, banner: &[String]) -> Result<()> {
        let mut file = std::fs::File::create(path.as_ref())?;
        for line in banner {
            writeln!(file, "# {line}")?;
        }
        let mut writer = csv::Writer::from_writer(file);
        let mut header = vec![RECORD_ID_COLUMN.to_string()];
        header.extend(self.codebook.variables().iter().map(|v| v.name.clone()));
        writer.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut record = vec![self.record_ids[i].to_string()];
            for j in 0..self.num_vars() {
                let v = self.cell(i, j);
                let label = if v == MISSING {
                    ""
                } else {
                    self.codebook.var(j).level_label(v).unwrap()
                };
                record.push(label.to_string());
            }
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn n_rows(&self) -> usize {
        self.record_ids.len()
    }

    pub fn num_vars(&self) -> usize {
        self.codebook.num_vars()
    }

    /// Cell value at `(row, col)`: 1-based level index, 0 if missing.
    pub fn cell(&self, row: usize, col: usize) -> u32 {
        self.cells[row * self.num_vars() + col]
    }

    pub fn row(&self, row: usize) -> &[u32] {
        let r = self.num_vars();
        &self.cells[row * r..(row + 1) * r]
    }

    pub fn record_ids(&self) -> &[RecordId] {
        &self.record_ids
    }

    pub fn record_id(&self, row: usize) -> RecordId {
        self.record_ids[row]
    }

    pub fn is_row_complete(&self, row: usize) -> bool {
        self.row(row).iter().all(|&v| v != MISSING)
    }

    pub fn has_missing(&self) -> bool {
        self.cells.contains(&MISSING)
    }

    /// Label of the cell at `(row, col)`, or `None` when missing.
    pub fn cell_label(&self, row: usize, col: usize) -> Option<&str> {
        self.codebook.var(col).level_label(self.cell(row, col))
    }

    /// Listwise deletion: keep exactly the rows with no missing cell,
    /// preserving order and record ids. Idempotent.
    pub fn drop_incomplete(&self) -> Result<CategoricalDataset> {
        let keep: Vec<usize> = (0..self.n_rows())
            .filter(|&i| self.is_row_complete(i))
            .collect();
        if keep.is_empty() {
            return Err(Error::EmptyDataset {
                context: "every row has at least one missing value".into(),
            });
        }
        if keep.len() == self.n_rows() {
            return Ok(self.clone());
        }
        let rows = keep.iter().map(|&i| self.row(i).to_vec()).collect();
        let ids = keep.iter().map(|&i| self.record_ids[i]).collect();
        CategoricalDataset::new(self.codebook.clone(), rows, ids)
    }

    /// Replace the rows wholesale, keeping codebook and record ids. Used by
    /// synthesis, which rewrites sensitive cells only.
    pub(crate) fn with_cells(&self, cells: Vec<u32>) -> CategoricalDataset {
        debug_assert_eq!(cells.len(), self.cells.len());
        CategoricalDataset {
            codebook: self.codebook.clone(),
            cells,
            record_ids: self.record_ids.clone(),
        }
    }

    pub(crate) fn cells(&self) -> &[u32] {
        &self.cells
    }

    /// Relative frequencies of every level combination of `variables`,
    /// zero-count cells included. The dataset must be complete.
    pub fn cross_tabulate(&self, variables: &[String]) -> Result<FrequencyTable> {
        let t = variables.len();
        if t == 0 || t > self.num_vars() {
            return Err(Error::invalid(format!(
                "tabulation order must be in 1..={}, got {t}",
                self.num_vars()
            )));
        }
        let cols = self.codebook.require_all(variables)?;
        if self.has_missing() {
            return Err(Error::invalid(
                "cannot tabulate a dataset with missing cells; call drop_incomplete first",
            ));
        }
        let arities: Vec<usize> = cols
            .iter()
            .map(|&j| self.codebook.var(j).cardinality())
            .collect();
        let num_cells: usize = arities.iter().product();
        let mut counts = vec![0u64; num_cells];
        for i in 0..self.n_rows() {
            let mut idx = 0usize;
            for (&j, &d) in cols.iter().zip(&arities) {
                idx = idx * d + (self.cell(i, j) as usize - 1);
            }
            counts[idx] += 1;
        }
        let n = self.n_rows();
        let freqs = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Ok(FrequencyTable {
            variables: variables.to_vec(),
            arities,
            freqs,
            n,
        })
    }
}

/// Relative frequencies over the full level product of a variable subset.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    variables: Vec<String>,
    arities: Vec<usize>,
    /// Row-major over the level product; zero-count cells are materialized.
    freqs: Vec<f64>,
    n: usize,
}

impl FrequencyTable {
    /// Tabulation arity `t`.
    pub fn order(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn num_cells(&self) -> usize {
        self.freqs.len()
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    /// Frequency of the cell addressed by 1-based `levels` (one per variable).
    pub fn frequency(&self, levels: &[u32]) -> Option<f64> {
        if levels.len() != self.arities.len() {
            return None;
        }
        let mut idx = 0usize;
        for (&v, &d) in levels.iter().zip(&self.arities) {
            if v == 0 || v as usize > d {
                return None;
            }
            idx = idx * d + (v as usize - 1);
        }
        Some(self.freqs[idx])
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    /// 1-based level tuple of the flat cell index.
    pub fn levels_of(&self, mut idx: usize) -> Vec<u32> {
        let mut out = vec![0u32; self.arities.len()];
        for (slot, &d) in out.iter_mut().zip(&self.arities).rev() {
            *slot = (idx % d) as u32 + 1;
            idx /= d;
        }
        out
    }

    /// Cells in lexicographic level order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u32>, f64)> + '_ {
        self.freqs
            .iter()
            .enumerate()
            .map(|(idx, &f)| (self.levels_of(idx), f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_var_codebook() -> Codebook {
        Codebook::new(vec![
            VariableSpec::new("color", vec!["red".into(), "blue".into()], false),
            VariableSpec::new(
                "size",
                vec!["small".into(), "medium".into(), "large".into()],
                true,
            ),
        ])
        .unwrap()
    }

    #[test]
    fn codebook_rejects_duplicate_names() {
        let err = Codebook::new(vec![
            VariableSpec::new("a", vec!["x".into(), "y".into()], false),
            VariableSpec::new("a", vec!["x".into(), "y".into()], false),
        ])
        .unwrap_err();
        assert!(err.to_string().contains("duplicate variable"));
    }

    #[test]
    fn codebook_rejects_single_level() {
        let err =
            Codebook::new(vec![VariableSpec::new("a", vec!["x".into()], false)]).unwrap_err();
        assert!(err.to_string().contains("at least 2 levels"));
    }

    #[test]
    fn codebook_rejects_repeated_level() {
        let err = Codebook::new(vec![VariableSpec::new(
            "a",
            vec!["x".into(), "x".into()],
            false,
        )])
        .unwrap_err();
        assert!(err.to_string().contains("repeats level"));
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_csv_codes_values() {
        let f = write_temp("color,size,extra\nred,small,1\nblue,large,2\nred,medium,3\nblue,small,4\n");
        let ds =
            CategoricalDataset::load_csv(f.path(), &two_var_codebook(), &CsvOptions::default())
                .unwrap();
        assert_eq!(ds.n_rows(), 4);
        assert_eq!(ds.row(0), &[1, 1]);
        assert_eq!(ds.row(1), &[2, 3]);
        assert_eq!(ds.record_id(3), RecordId(4));
    }

    #[test]
    fn load_csv_rejects_unknown_label_with_location() {
        let f = write_temp("color,size\nred,small\ngreen,large\n");
        let err = CategoricalDataset::load_csv(
            f.path(),
            &two_var_codebook(),
            &CsvOptions::default(),
        )
        .unwrap_err();
        match err {
            Error::UnknownLevel {
                variable,
                row,
                label,
            } => {
                assert_eq!(variable, "color");
                assert_eq!(row, 2);
                assert_eq!(label, "green");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_csv_rejects_missing_column() {
        let f = write_temp("color\nred\n");
        let err = CategoricalDataset::load_csv(
            f.path(),
            &two_var_codebook(),
            &CsvOptions::default(),
        )
        .unwrap_err();
        match err {
            Error::MissingColumn { variable } => assert_eq!(variable, "size"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_csv_marks_missing_tokens() {
        let f = write_temp("color,size\nred,\nblue,large\n");
        let ds =
            CategoricalDataset::load_csv(f.path(), &two_var_codebook(), &CsvOptions::default())
                .unwrap();
        assert!(ds.has_missing());
        assert_eq!(ds.cell(0, 1), MISSING);
        let complete = ds.drop_incomplete().unwrap();
        assert_eq!(complete.n_rows(), 1);
        assert_eq!(complete.record_id(0), RecordId(2));
    }

    #[test]
    fn drop_incomplete_keeps_complete_rows_in_order() {
        let cb = two_var_codebook();
        let rows = vec![
            vec![1, 1],
            vec![MISSING, 2],
            vec![2, 2],
            vec![1, MISSING],
            vec![2, 3],
        ];
        let ids = (1..=5).map(RecordId).collect();
        let ds = CategoricalDataset::new(cb, rows, ids).unwrap();
        let out = ds.drop_incomplete().unwrap();
        assert_eq!(out.n_rows(), 3);
        assert_eq!(
            out.record_ids(),
            &[RecordId(1), RecordId(3), RecordId(5)]
        );
        // Idempotent.
        assert_eq!(out.drop_incomplete().unwrap(), out);
    }

    #[test]
    fn drop_incomplete_errors_when_nothing_remains() {
        let cb = two_var_codebook();
        let ds = CategoricalDataset::new(
            cb,
            vec![vec![MISSING, 1], vec![1, MISSING]],
            vec![RecordId(1), RecordId(2)],
        )
        .unwrap();
        assert!(matches!(
            ds.drop_incomplete(),
            Err(Error::EmptyDataset { .. })
        ));
    }

    #[test]
    fn one_way_tabulation_counts() {
        let cb = Codebook::new(vec![VariableSpec::new(
            "v",
            vec!["a".into(), "b".into()],
            false,
        )])
        .unwrap();
        let ds = CategoricalDataset::new(
            cb,
            vec![vec![1], vec![1], vec![2], vec![2]],
            (1..=4).map(RecordId).collect(),
        )
        .unwrap();
        let tab = ds.cross_tabulate(&["v".into()]).unwrap();
        assert_eq!(tab.frequency(&[1]), Some(0.5));
        assert_eq!(tab.frequency(&[2]), Some(0.5));
    }

    #[test]
    fn correlated_columns_have_zero_off_diagonal() {
        let cb = Codebook::new(vec![
            VariableSpec::new("x", vec!["a".into(), "b".into()], false),
            VariableSpec::new("y", vec!["a".into(), "b".into()], false),
        ])
        .unwrap();
        let rows = vec![vec![1, 1], vec![2, 2], vec![1, 1], vec![2, 2]];
        let ds = CategoricalDataset::new(cb, rows, (1..=4).map(RecordId).collect()).unwrap();
        let tab = ds.cross_tabulate(&["x".into(), "y".into()]).unwrap();
        assert_eq!(tab.frequency(&[1, 2]), Some(0.0));
        assert_eq!(tab.frequency(&[2, 1]), Some(0.0));
        assert_eq!(tab.frequency(&[1, 1]), Some(0.5));
        assert_eq!(tab.num_cells(), 4);
    }

    #[test]
    fn three_way_tabulation_matches_nested_loop_oracle() {
        // Independent brute-force count over all rows and all level triples.
        let cb = Codebook::new(vec![
            VariableSpec::new("a", vec!["1".into(), "2".into()], false),
            VariableSpec::new("b", vec!["1".into(), "2".into(), "3".into()], false),
            VariableSpec::new("c", vec!["1".into(), "2".into()], true),
        ])
        .unwrap();
        let mut rng_state = 88172645463325252u64;
        let mut next = move |m: u32| {
            // xorshift64; test-local generator independent of the crate RNG
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state % m as u64) as u32 + 1
        };
        let rows: Vec<Vec<u32>> = (0..200)
            .map(|_| vec![next(2), next(3), next(2)])
            .collect();
        let ds = CategoricalDataset::new(
            cb,
            rows.clone(),
            (1..=200).map(RecordId).collect(),
        )
        .unwrap();
        let tab = ds
            .cross_tabulate(&["a".into(), "b".into(), "c".into()])
            .unwrap();
        for va in 1..=2u32 {
            for vb in 1..=3u32 {
                for vc in 1..=2u32 {
                    let count = rows
                        .iter()
                        .filter(|r| r[0] == va && r[1] == vb && r[2] == vc)
                        .count();
                    let expected = count as f64 / 200.0;
                    assert_eq!(tab.frequency(&[va, vb, vc]), Some(expected));
                }
            }
        }
    }

    #[test]
    fn tabulate_rejects_unknown_variable() {
        let cb = two_var_codebook();
        let ds = CategoricalDataset::new(
            cb,
            vec![vec![1, 1]],
            vec![RecordId(1)],
        )
        .unwrap();
        assert!(matches!(
            ds.cross_tabulate(&["weight".into()]),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn csv_round_trip_preserves_labels_and_ids() {
        let cb = two_var_codebook();
        let rows = vec![vec![1, 3], vec![2, 1], vec![1, 2]];
        let ds =
            CategoricalDataset::new(cb.clone(), rows, vec![RecordId(7), RecordId(3), RecordId(9)])
                .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        ds.write_csv(&path, &["seed=1 config_hash=deadbeef".into()])
            .unwrap();
        let back = CategoricalDataset::load_csv(&path, &cb, &CsvOptions::default()).unwrap();
        assert_eq!(back, ds);
    }

    proptest! {
        #[test]
        fn tabulation_frequencies_sum_to_one(
            rows in proptest::collection::vec((1u32..=2, 1u32..=3), 1..60)
        ) {
            let cb = two_var_codebook();
            let coded: Vec<Vec<u32>> = rows.iter().map(|&(a, b)| vec![a, b]).collect();
            let ids = (1..=coded.len() as u64).map(RecordId).collect();
            let ds = CategoricalDataset::new(cb, coded, ids).unwrap();
            for vars in [vec!["color".to_string()], vec!["size".to_string()],
                         vec!["color".to_string(), "size".to_string()]] {
                let tab = ds.cross_tabulate(&vars).unwrap();
                let total: f64 = tab.frequencies().iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn round_trip_any_complete_dataset(
            rows in proptest::collection::vec((1u32..=2, 1u32..=3), 1..40)
        ) {
            let cb = two_var_codebook();
            let coded: Vec<Vec<u32>> = rows.iter().map(|&(a, b)| vec![a, b]).collect();
            let ids = (1..=coded.len() as u64).map(RecordId).collect();
            let ds = CategoricalDataset::new(cb.clone(), coded, ids).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.csv");
            ds.write_csv(&path, &[]).unwrap();
            let back = CategoricalDataset::load_csv(&path, &cb, &CsvOptions::default()).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
