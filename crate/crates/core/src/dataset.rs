//! Binary training data stored column-wise, and the equivalent-points index.

use std::io::{Read, Write};

use rustc_hash::FxHashMap;

use crate::bitvec::BitVector;
use crate::error::{Error, Result};
use crate::exact::ExactValue;

/// `N` samples over `M` binary features with binary labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    feature_names: Vec<String>,
    label_name: String,
    columns: Vec<BitVector>,
    labels: BitVector,
    label_one_count: usize,
}

impl Dataset {
    /// Builds a dataset from row-major feature values.
    pub fn from_rows(
        feature_names: Vec<String>,
        label_name: impl Into<String>,
        rows: &[Vec<bool>],
        labels: &[bool],
    ) -> Result<Self> {
        let m = feature_names.len();
        if rows.len() != labels.len() {
            return Err(Error::Usage(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(Error::Usage(format!(
                "row {} has {} values, expected {m}",
                i + 1,
                r.len()
            )));
        }
        let columns = (0..m)
            .map(|j| BitVector::from_bools(rows.iter().map(|r| r[j])))
            .collect();
        Self::from_columns(
            feature_names,
            label_name,
            columns,
            BitVector::from_bools(labels.iter().copied()),
        )
    }

    pub fn from_columns(
        feature_names: Vec<String>,
        label_name: impl Into<String>,
        columns: Vec<BitVector>,
        labels: BitVector,
    ) -> Result<Self> {
        if feature_names.len() != columns.len() {
            return Err(Error::Usage(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                columns.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::Format("dataset has no rows".into()));
        }
        if columns.is_empty() {
            return Err(Error::Format("dataset has no feature columns".into()));
        }
        if let Some(c) = columns.iter().find(|c| c.len() != labels.len()) {
            return Err(Error::Usage(format!(
                "column of length {} for {} samples",
                c.len(),
                labels.len()
            )));
        }
        let mut seen = rustc_hash::FxHashSet::default();
        for name in &feature_names {
            if name.is_empty() {
                return Err(Error::Format("empty feature name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Format(format!("duplicate feature name {name:?}")));
            }
        }
        let label_one_count = labels.count_ones();
        Ok(Dataset {
            feature_names,
            label_name: label_name.into(),
            columns,
            labels,
            label_one_count,
        })
    }

    /// Reads a headed CSV whose cells are all `0` or `1`.
    pub fn load_csv<R: Read>(source: R, label_column: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(source);
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Format(format!("cannot read header: {e}")))?
            .iter()
            .map(str::to_owned)
            .collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(Error::Format("missing header row".into()));
        }
        let label_idx = header
            .iter()
            .position(|h| h == label_column)
            .ok_or_else(|| {
                Error::Format(format!("label column {label_column:?} not found in header"))
            })?;
        let feature_idx: Vec<usize> = (0..header.len()).filter(|&i| i != label_idx).collect();
        let mut feature_bits: Vec<Vec<bool>> = vec![Vec::new(); feature_idx.len()];
        let mut label_bits = Vec::new();

        for (row_no, record) in reader.records().enumerate() {
            let row = row_no + 1;
            let record =
                record.map_err(|e| Error::Format(format!("row {row}: malformed record: {e}")))?;
            if record.len() != header.len() {
                return Err(Error::Format(format!(
                    "row {row}: expected {} cells, found {}",
                    header.len(),
                    record.len()
                )));
            }
            let cell = |i: usize| -> Result<bool> {
                match &record[i] {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::Format(format!(
                        "row {row}, column {:?}: non-binary cell {other:?}",
                        header[i]
                    ))),
                }
            };
            for (slot, &i) in feature_idx.iter().enumerate() {
                feature_bits[slot].push(cell(i)?);
            }
            label_bits.push(cell(label_idx)?);
        }

        let names = feature_idx.iter().map(|&i| header[i].clone()).collect();
        let columns = feature_bits.into_iter().map(BitVector::from_bools).collect();
        Self::from_columns(
            names,
            label_column,
            columns,
            BitVector::from_bools(label_bits),
        )
    }

    /// Writes the dataset as CSV with the label as the last column.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.label_name);
        w.write_record(&header).map_err(csv_io)?;
        for n in 0..self.n_samples() {
            let row = self
                .columns
                .iter()
                .map(|c| c.get(n))
                .chain(std::iter::once(self.labels.get(n)))
                .map(|b| if b { "1" } else { "0" });
            w.write_record(row).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    #[inline]
    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    #[inline]
    pub fn column(&self, feature: usize) -> &BitVector {
        &self.columns[feature]
    }

    #[inline]
    pub fn labels(&self) -> &BitVector {
        &self.labels
    }

    pub fn label_one_count(&self) -> usize {
        self.label_one_count
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Capture vector of the single clause `feature == polarity`.
    pub fn literal_column(&self, feature: usize, polarity: bool) -> Result<BitVector> {
        let col = self.columns.get(feature).ok_or_else(|| {
            Error::Usage(format!(
                "feature index {feature} out of range (M = {})",
                self.n_features()
            ))
        })?;
        Ok(if polarity { col.clone() } else { col.not() })
    }

    /// Feature values of sample `n`.
    pub fn row(&self, n: usize) -> Vec<bool> {
        self.columns.iter().map(|c| c.get(n)).collect()
    }

    pub fn label(&self, n: usize) -> bool {
        self.labels.get(n)
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Samples grouped by identical feature vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceIndex {
    class_of: Vec<u32>,
    minority_label: Vec<bool>,
    class_size: Vec<usize>,
    minority_count: Vec<usize>,
    z: BitVector,
    n: usize,
}

impl EquivalenceIndex {
    /// Class ids follow first occurrence. On a 0/1 tie the minority label is 0.
    pub fn build(ds: &Dataset) -> Self {
        let n = ds.n_samples();
        let words_per_row = ds.n_features().div_ceil(64);
        let mut ids: FxHashMap<Vec<u64>, u32> = FxHashMap::default();
        let mut class_of = Vec::with_capacity(n);
        let mut ones: Vec<usize> = Vec::new();
        let mut size: Vec<usize> = Vec::new();
        let mut key = vec![0u64; words_per_row];
        for s in 0..n {
            key.iter_mut().for_each(|w| *w = 0);
            for j in 0..ds.n_features() {
                if ds.column(j).get(s) {
                    key[j / 64] |= 1 << (j % 64);
                }
            }
            let next = ids.len() as u32;
            let id = *ids.entry(key.clone()).or_insert(next);
            if id == next {
                ones.push(0);
                size.push(0);
            }
            size[id as usize] += 1;
            if ds.label(s) {
                ones[id as usize] += 1;
            }
            class_of.push(id);
        }
        let minority_label: Vec<bool> = ones
            .iter()
            .zip(&size)
            .map(|(&o, &sz)| o < sz - o)
            .collect();
        let minority_count = ones
            .iter()
            .zip(&size)
            .map(|(&o, &sz)| o.min(sz - o))
            .collect();
        let z = BitVector::from_bools(
            (0..n).map(|s| ds.label(s) == minority_label[class_of[s] as usize]),
        );
        EquivalenceIndex {
            class_of,
            minority_label,
            class_size: size,
            minority_count,
            z,
            n,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.class_size.len()
    }

    pub fn class_of(&self, sample: usize) -> u32 {
        self.class_of[sample]
    }

    pub fn minority_label(&self, class: usize) -> bool {
        self.minority_label[class]
    }

    pub fn class_size(&self, class: usize) -> usize {
        self.class_size[class]
    }

    pub fn minority_count(&self, class: usize) -> usize {
        self.minority_count[class]
    }

    /// θ(e_u): minority members of class `u` as a fraction of all samples.
    pub fn theta(&self, class: usize) -> ExactValue {
        ExactValue::ratio(self.minority_count[class] as i128, self.n as i128)
    }

    /// Σ_u θ(e_u), the irreducible error floor.
    pub fn theta_sum(&self) -> ExactValue {
        ExactValue::ratio(self.z.count_ones() as i128, self.n as i128)
    }

    /// Samples whose label equals their class's minority label.
    pub fn z(&self) -> &BitVector {
        &self.z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "a,b,y\n0,1,1\n1,0,0\n0,1,1\n";

    fn six_sample() -> Dataset {
        let rows = vec![
            vec![false, true],
            vec![false, true],
            vec![false, true],
            vec![false, true],
            vec![true, false],
            vec![true, false],
        ];
        let labels = [true, true, true, true, false, true];
        Dataset::from_rows(vec!["a".into(), "b".into()], "y", &rows, &labels).unwrap()
    }

    #[test]
    fn load_toy_csv() {
        let ds = Dataset::load_csv(TOY.as_bytes(), "y").unwrap();
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.labels().to_bools(), vec![true, false, true]);
        assert_eq!(ds.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(ds.label_one_count(), 2);
    }

    #[test]
    fn missing_label_column() {
        let err = Dataset::load_csv(TOY.as_bytes(), "z").unwrap_err();
        assert!(matches!(err, Error::Format(ref m) if m.contains("\"z\"")), "{err}");
    }

    #[test]
    fn non_binary_cell_reports_location() {
        let err = Dataset::load_csv("a,y\n2,0\n".as_bytes(), "y").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 1") && msg.contains("\"a\""), "{msg}");
    }

    #[test]
    fn rejects_empty_and_duplicate() {
        assert!(Dataset::load_csv("a,y\n".as_bytes(), "y").is_err());
        assert!(Dataset::load_csv("y\n1\n".as_bytes(), "y").is_err());
        assert!(Dataset::load_csv("a,a,y\n0,1,1\n".as_bytes(), "y").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ds = six_sample();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = Dataset::load_csv(buf.as_slice(), "y").unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn literal_columns() {
        let ds = Dataset::from_rows(
            vec!["a".into()],
            "y",
            &[vec![false], vec![true], vec![false]],
            &[true, true, false],
        )
        .unwrap();
        let pos = ds.literal_column(0, true).unwrap();
        let neg = ds.literal_column(0, false).unwrap();
        assert_eq!(pos.to_bools(), vec![false, true, false]);
        assert_eq!(neg.to_bools(), vec![true, false, true]);
        assert_eq!(pos.count_ones() + neg.count_ones(), ds.n_samples());
        assert!(matches!(ds.literal_column(1, true), Err(Error::Usage(_))));
    }

    #[test]
    fn equivalence_six_sample() {
        let eq = EquivalenceIndex::build(&six_sample());
        assert_eq!(eq.n_classes(), 2);
        assert_eq!(eq.theta(0), ExactValue::ZERO);
        assert_eq!(eq.theta(1), ExactValue::ratio(1, 6));
        assert_eq!(eq.z().count_ones(), 1);
        assert_eq!(eq.theta_sum(), ExactValue::ratio(1, 6));
        assert_eq!((0..6).map(|s| eq.class_of(s)).collect::<Vec<_>>(), vec![0, 0, 0, 0, 1, 1]);
    }

    #[test]
    fn equivalence_distinct_rows() {
        let ds = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            "y",
            &[vec![false, false], vec![false, true], vec![true, false], vec![true, true]],
            &[true, false, true, false],
        )
        .unwrap();
        let eq = EquivalenceIndex::build(&ds);
        assert_eq!(eq.n_classes(), 4);
        assert!((0..4).all(|u| eq.theta(u).is_zero()));
        assert_eq!(eq.z().count_ones(), 0);
    }

    #[test]
    fn equivalence_tie_prefers_zero() {
        let ds = Dataset::from_rows(
            vec!["a".into()],
            "y",
            &[vec![true], vec![true], vec![false]],
            &[false, true, true],
        )
        .unwrap();
        let eq = EquivalenceIndex::build(&ds);
        assert_eq!(eq.theta(0), ExactValue::ratio(1, 3));
        assert!(!eq.minority_label(0));
        // the label-0 member of the tied class is the marked one
        assert_eq!(eq.z().to_bools(), vec![true, false, false]);
    }
}
