use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use super::{SliceStream, StreamInstance};
use crate::error::{Error, Result};

/// Label handling for CSV datasets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CsvSchema {
    /// Fixed label set. When set, any other label is an error and the class
    /// index follows this order. Otherwise labels are indexed in order of
    /// first appearance.
    pub labels: Option<Vec<String>>,
}

/// A fully loaded CSV dataset: numeric feature columns followed by a label
/// column.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvDataset {
    pub feature_names: Vec<String>,
    pub labels: Vec<String>,
    pub instances: Vec<StreamInstance>,
}

impl CsvDataset {
    pub fn from_path(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::Ingestion {
            line: 0,
            message: format!("cannot open {}: {e}", path.display()),
        })?;
        Self::from_reader(file, schema)
    }

    pub fn from_reader<R: Read>(reader: R, schema: &CsvSchema) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::ingestion(1, e.to_string()))?
            .clone();
        if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
            return Err(Error::ingestion(1, "missing header row"));
        }
        if header.len() < 2 {
            return Err(Error::ingestion(
                1,
                "need at least one feature column and a label column",
            ));
        }
        let width = header.len();
        let feature_names: Vec<String> = header.iter().take(width - 1).map(str::to_owned).collect();

        let mut labels: Vec<String> = schema.labels.clone().unwrap_or_default();
        let mut index: HashMap<String, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        let fixed = schema.labels.is_some();

        let mut instances = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                Error::ingestion(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != width {
                return Err(Error::ingestion(
                    line,
                    format!("expected {width} fields, found {}", record.len()),
                ));
            }
            let mut features = Vec::with_capacity(width - 1);
            for (col, field) in record.iter().take(width - 1).enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::ingestion(
                        line,
                        format!("column '{}' is not numeric: '{field}'", feature_names[col]),
                    )
                })?;
                features.push(v);
            }
            let raw_label = &record[width - 1];
            let label = match index.get(raw_label) {
                Some(&i) => i,
                None if fixed => {
                    return Err(Error::ingestion(
                        line,
                        format!("label '{raw_label}' is not in the schema"),
                    ));
                }
                None => {
                    labels.push(raw_label.to_owned());
                    index.insert(raw_label.to_owned(), labels.len() - 1);
                    labels.len() - 1
                }
            };
            instances.push(StreamInstance { features, label });
        }
        if instances.is_empty() {
            return Err(Error::ingestion(1, "dataset has no data rows"));
        }
        Ok(Self {
            feature_names,
            labels,
            instances,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn stream(&self) -> SliceStream<'_> {
        SliceStream::new(&self.instances, self.n_classes(), self.n_features())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<CsvDataset> {
        CsvDataset::from_reader(text.as_bytes(), &CsvSchema::default())
    }

    #[test]
    fn labels_by_first_appearance() {
        let ds = load("x,y,label\n1,2,A\n3,4,B\n5,6,A\n").unwrap();
        assert_eq!(ds.n_classes(), 2);
        let labels: Vec<usize> = ds.instances.iter().map(|i| i.label).collect();
        assert_eq!(labels, vec![0, 1, 0]);
        assert_eq!(ds.labels, vec!["A", "B"]);
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(load(""), Err(Error::Ingestion { .. })));
        assert!(matches!(load("a,b,label\n"), Err(Error::Ingestion { .. })));
    }

    #[test]
    fn feature_count() {
        let ds = load("a,b,c,d,e,f,class\n1,2,3,4,5,6,yes\n0,0,0,0,0,0,no\n").unwrap();
        assert_eq!(ds.n_features(), 6);
        assert!(ds.instances.iter().all(|i| i.features.len() == 6));
    }

    #[test]
    fn ragged_and_non_numeric_rows_report_line() {
        match load("a,b,label\n1,2,A\n1,A\n") {
            Err(Error::Ingestion { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match load("a,b,label\n1,2,A\n1,2,B\nx,2,A\n") {
            Err(Error::Ingestion { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("not numeric"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fixed_label_set() {
        let schema = CsvSchema {
            labels: Some(vec!["no".into(), "yes".into()]),
        };
        let ds = CsvDataset::from_reader("a,l\n1,yes\n2,no\n".as_bytes(), &schema).unwrap();
        assert_eq!(ds.instances[0].label, 1);
        let err = CsvDataset::from_reader("a,l\n1,maybe\n".as_bytes(), &schema).unwrap_err();
        assert!(matches!(err, Error::Ingestion { line: 2, .. }));
    }
}
