//! Labeled point sets: loading, validation, normalization and CSV export.
//!
//! A [`Dataset`] is an immutable N×d matrix stored row-major. Row order is the
//! object identity everywhere in the crate; nothing shuffles rows.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{OsdError, Result};

/// N objects in R^d, row-major, all components finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    dim: usize,
}

impl Dataset {
    /// Builds a dataset from rows. Requires at least two rows of equal,
    /// nonzero width and finite values.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(OsdError::TooFewObjects {
                min: 2,
                got: rows.len(),
            });
        }
        let dim = rows[0].as_ref().len();
        if dim == 0 {
            return Err(OsdError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(OsdError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(OsdError::NonFinite { row: r, column: c });
            }
            values.extend_from_slice(row);
        }
        Ok(Self { values, dim })
    }

    /// Builds a dataset from a flat row-major buffer.
    pub fn from_flat(values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(OsdError::DimensionMismatch {
                expected: dim,
                got: values.len(),
            });
        }
        let count = values.len() / dim;
        if count < 2 {
            return Err(OsdError::TooFewObjects { min: 2, got: count });
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(OsdError::NonFinite {
                row: p / dim,
                column: p % dim,
            });
        }
        Ok(Self { values, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.values.len() / self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// Returns a copy with rows reordered so that row `i` of the result is
    /// row `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for &i in order {
            values.extend_from_slice(self.point(i));
        }
        Self {
            values,
            dim: self.dim,
        }
    }

    /// Per-feature (min, max).
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for (c, &v) in p.iter().enumerate() {
                lo[c] = lo[c].min(v);
                hi[c] = hi[c].max(v);
            }
        }
        (lo, hi)
    }

    /// Length of the bounding-box diagonal, an upper bound on the diameter
    /// that is within a factor sqrt(d) of it.
    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            dim: self.dim,
        }
    }
}

/// Squared Euclidean distance. Every distance comparison in the crate goes
/// through this function so that ties resolve identically everywhere.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

/// Binary outlier marks aligned with a dataset's rows (true = outlier).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels(Vec<bool>);

impl Labels {
    pub fn new(flags: Vec<bool>) -> Self {
        Self(flags)
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_outlier(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn flags(&self) -> &[bool] {
        &self.0
    }

    pub fn n_outliers(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn n_normals(&self) -> usize {
        self.len() - self.n_outliers()
    }

    pub fn check_aligned(&self, ds: &Dataset) -> Result<()> {
        if self.len() != ds.count() {
            return Err(OsdError::LabelLength {
                labels: self.len(),
                objects: ds.count(),
            });
        }
        Ok(())
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        Self(order.iter().map(|&i| self.0[i]).collect())
    }
}

/// How the label column of a CSV file is selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl LabelColumn {
    /// Parses `--label-col` values: a bare integer is a 0-based index,
    /// anything else is a header name.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        }
    }
}

/// Loads a CSV file. The header row is detected automatically: the first row
/// is a header iff any of its cells fails to parse as a number.
pub fn load_csv(
    path: impl AsRef<Path>,
    label: Option<&LabelColumn>,
) -> Result<(Dataset, Option<Labels>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| OsdError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, label)
}

/// Same as [`load_csv`] over any reader.
pub fn read_csv<R: Read>(
    reader: R,
    label: Option<&LabelColumn>,
) -> Result<(Dataset, Option<Labels>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(OsdError::TooFewObjects { min: 2, got: 0 });
    }

    let has_header = records[0].iter().any(|c| c.parse::<f64>().is_err());
    let width = records[0].len();
    let label_idx = match label {
        None => None,
        Some(LabelColumn::Index(i)) => {
            if *i >= width {
                return Err(OsdError::MissingLabelColumn(i.to_string()));
            }
            Some(*i)
        }
        Some(LabelColumn::Name(name)) => {
            if !has_header {
                return Err(OsdError::MissingLabelColumn(name.clone()));
            }
            Some(
                records[0]
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| OsdError::MissingLabelColumn(name.clone()))?,
            )
        }
    };

    let dim = width - usize::from(label_idx.is_some());
    let start = usize::from(has_header);
    let mut values = Vec::with_capacity((records.len() - start) * dim);
    let mut flags = Vec::new();
    for (r, rec) in records.iter().enumerate().skip(start) {
        // 1-based line numbers, counting the header.
        let row = r + 1;
        if rec.len() != width {
            return Err(OsdError::RaggedRow {
                row,
                expected: width,
                found: rec.len(),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            if Some(c) == label_idx {
                let flag = match cell.parse::<f64>() {
                    Ok(0.0) => false,
                    Ok(1.0) => true,
                    _ => {
                        return Err(OsdError::BadLabel {
                            row,
                            value: cell.to_string(),
                        })
                    }
                };
                flags.push(flag);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| OsdError::NonNumeric {
                row,
                column: c + 1,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(OsdError::NonFinite { row, column: c + 1 });
            }
            values.push(v);
        }
    }
    let ds = Dataset::from_flat(values, dim)?;
    let labels = label_idx.map(|_| Labels::new(flags));
    Ok((ds, labels))
}

/// Writes `x0..x{d-1}` columns plus an optional `label` column.
pub fn write_csv<W: Write>(writer: W, ds: &Dataset, labels: Option<&Labels>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..ds.dim()).map(|c| format!("x{c}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    wtr.write_record(&header)?;
    for (i, p) in ds.points().enumerate() {
        let mut row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
        if let Some(l) = labels {
            row.push(if l.is_outlier(i) { "1" } else { "0" }.into());
        }
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|source| OsdError::Io {
        path: "<csv writer>".into(),
        source,
    })?;
    Ok(())
}

pub fn save_csv(path: impl AsRef<Path>, ds: &Dataset, labels: Option<&Labels>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| OsdError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(file, ds, labels)
}

/// Maps every feature independently onto [0, 1]. Constant features become 0.
pub fn min_max_normalize(ds: &Dataset) -> Dataset {
    let (lo, hi) = ds.bounds();
    let dim = ds.dim();
    let values = ds
        .as_flat()
        .iter()
        .enumerate()
        .map(|(p, &v)| {
            let c = p % dim;
            let range = hi[c] - lo[c];
            if range > 0.0 {
                // exact endpoints keep the map idempotent
                if v == hi[c] {
                    1.0
                } else {
                    (v - lo[c]) / range
                }
            } else {
                0.0
            }
        })
        .collect();
    ds.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, label: Option<LabelColumn>) -> Result<(Dataset, Option<Labels>)> {
        read_csv(text.as_bytes(), label.as_ref())
    }

    #[test]
    fn headerless_three_rows() {
        let (ds, labels) = parse("1,0,0\n2,0,0\n3,0,0", None).unwrap();
        assert_eq!(ds.count(), 3);
        assert_eq!(ds.dim(), 3);
        assert_eq!(ds.point(1), &[2.0, 0.0, 0.0]);
        assert!(labels.is_none());
    }

    #[test]
    fn named_label_column() {
        let (ds, labels) = parse(
            "a,y,b\n1,0,2\n3,0,4\n5,1,6\n",
            Some(LabelColumn::Name("y".into())),
        )
        .unwrap();
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.point(2), &[5.0, 6.0]);
        assert_eq!(labels.unwrap(), Labels::from_bits(&[0, 0, 1]));
    }

    #[test]
    fn indexed_label_column_without_header() {
        let (ds, labels) = parse("1,2,0\n3,4,1\n", Some(LabelColumn::Index(2))).unwrap();
        assert_eq!(ds.dim(), 2);
        assert_eq!(labels.unwrap(), Labels::from_bits(&[0, 1]));
    }

    #[test]
    fn non_numeric_cell_names_row() {
        let err = parse("1,0,0\nabc,0,0\n3,0,0", None).unwrap_err();
        match err {
            OsdError::NonNumeric { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, 1);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_label_and_ragged_rows() {
        let err = parse("x,y\n1,0\n2,3\n", Some(LabelColumn::Name("y".into()))).unwrap_err();
        assert!(matches!(err, OsdError::BadLabel { row: 3, .. }));
        let err = parse("1,2\n3\n", None).unwrap_err();
        assert!(matches!(err, OsdError::RaggedRow { row: 2, .. }));
        let err = parse("1,2\n3,4\n", Some(LabelColumn::Name("y".into()))).unwrap_err();
        assert!(matches!(err, OsdError::MissingLabelColumn(_)));
    }

    #[test]
    fn missing_file() {
        let err = load_csv("/definitely/not/here.csv", None).unwrap_err();
        assert!(matches!(err, OsdError::Io { .. }));
    }

    #[test]
    fn rejects_degenerate_datasets() {
        assert!(Dataset::from_rows(&[[1.0]]).is_err());
        assert!(Dataset::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Dataset::from_rows(&[[1.0], [f64::NAN]]).is_err());
    }

    #[test]
    fn normalize_examples() {
        let ds = Dataset::from_rows(&[[0.0], [10.0]]).unwrap();
        assert_eq!(min_max_normalize(&ds).to_rows(), vec![vec![0.0], vec![1.0]]);

        let ds = Dataset::from_rows(&[[5.0], [5.0]]).unwrap();
        assert_eq!(min_max_normalize(&ds).to_rows(), vec![vec![0.0], vec![0.0]]);

        let ds = Dataset::from_rows(&[[1.0, 0.0], [3.0, 4.0]]).unwrap();
        assert_eq!(
            min_max_normalize(&ds).to_rows(),
            vec![vec![0.0, 0.0], vec![1.0, 1.0]]
        );
    }

    #[test]
    fn csv_round_trip_keeps_alignment() {
        let ds = Dataset::from_rows(&[[0.5, 1.0], [2.0, -3.25], [7.0, 0.0]]).unwrap();
        let labels = Labels::from_bits(&[0, 1, 0]);
        let mut buf = Vec::new();
        write_csv(&mut buf, &ds, Some(&labels)).unwrap();
        let (back, back_labels) =
            read_csv(buf.as_slice(), Some(&LabelColumn::Name("label".into()))).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back_labels.unwrap(), labels);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn dataset() -> impl Strategy<Value = Dataset> {
            (1usize..5, 2usize..30).prop_flat_map(|(d, n)| {
                prop::collection::vec(-1e3f64..1e3, n * d)
                    .prop_map(move |v| Dataset::from_flat(v, d).unwrap())
            })
        }

        proptest! {
            #[test]
            fn normalize_is_idempotent(ds in dataset()) {
                let once = min_max_normalize(&ds);
                let twice = min_max_normalize(&once);
                prop_assert_eq!(once.as_flat(), twice.as_flat());
                prop_assert!(once.as_flat().iter().all(|v| (0.0..=1.0).contains(v)));
            }

            #[test]
            fn load_normalize_load_preserves_rows(ds in dataset()) {
                let n = ds.count();
                let labels = Labels::new((0..n).map(|i| i % 3 == 0).collect());
                let mut buf = Vec::new();
                write_csv(&mut buf, &min_max_normalize(&ds), Some(&labels)).unwrap();
                let (back, bl) = read_csv(buf.as_slice(), Some(&LabelColumn::Name("label".into()))).unwrap();
                prop_assert_eq!(back.count(), n);
                prop_assert_eq!(bl.unwrap(), labels);
            }
        }
    }
}
