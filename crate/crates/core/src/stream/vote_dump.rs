//! Vote-dump CSV: one row per (instance, classifier) with header
//! `instance_id,classifier_id,score_0,…,score_{m−1}`.
//!
//! Rows of one instance must be contiguous; their file order is the
//! classifier order used for rank accumulation. Scores are normalized on
//! read.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::votes::{VoteMatrix, VoteVector};

/// Streams `VoteMatrix` values out of a vote dump.
pub struct VoteDumpReader<R: Read> {
    records: csv::StringRecordsIntoIter<R>,
    m: usize,
    pending: Option<(String, VoteVector)>,
}

impl<R: Read> VoteDumpReader<R> {
    pub fn new(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::ingestion(1, e.to_string()))?
            .clone();
        if header.len() < 4 || &header[0] != "instance_id" || &header[1] != "classifier_id" {
            return Err(Error::ingestion(
                1,
                "vote dump header must be instance_id,classifier_id,score_0,...",
            ));
        }
        for (j, name) in header.iter().skip(2).enumerate() {
            if name != format!("score_{j}") {
                return Err(Error::ingestion(
                    1,
                    format!("expected column score_{j}, found '{name}'"),
                ));
            }
        }
        Ok(Self {
            m: header.len() - 2,
            records: rdr.into_records(),
            pending: None,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn next_row(&mut self) -> Option<Result<(String, VoteVector)>> {
        let record = match self.records.next()? {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Some(Err(Error::ingestion(line, e.to_string())));
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != self.m + 2 {
            return Some(Err(Error::ingestion(
                line,
                format!("expected {} fields, found {}", self.m + 2, record.len()),
            )));
        }
        let mut raw = Vec::with_capacity(self.m);
        for field in record.iter().skip(2) {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() && v >= 0.0 => raw.push(v),
                _ => {
                    return Some(Err(Error::ingestion(
                        line,
                        format!("invalid score '{field}'"),
                    )))
                }
            }
        }
        Some(Ok((
            record[0].to_owned(),
            VoteVector::normalize_or_uniform(&raw),
        )))
    }
}

impl<R: Read> Iterator for VoteDumpReader<R> {
    type Item = Result<VoteMatrix>;

    fn next(&mut self) -> Option<Self::Item> {
        let (id, first) = match self.pending.take() {
            Some(p) => p,
            None => match self.next_row()? {
                Ok(p) => p,
                Err(e) => return Some(Err(e)),
            },
        };
        let mut matrix = VoteMatrix::new(self.m);
        matrix.push(&first).expect("width checked");
        loop {
            match self.next_row() {
                None => break,
                Some(Err(e)) => return Some(Err(e)),
                Some(Ok((next_id, vote))) => {
                    if next_id != id {
                        self.pending = Some((next_id, vote));
                        break;
                    }
                    matrix.push(&vote).expect("width checked");
                }
            }
        }
        Some(Ok(matrix))
    }
}

/// Writes vote matrices in dump format.
pub struct VoteDumpWriter<W: Write> {
    writer: csv::Writer<W>,
    m: usize,
    next_instance: u64,
}

impl<W: Write> VoteDumpWriter<W> {
    pub fn new(writer: W, m: usize) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(writer);
        let mut header = vec!["instance_id".to_owned(), "classifier_id".to_owned()];
        header.extend((0..m).map(|j| format!("score_{j}")));
        writer.write_record(&header)?;
        Ok(Self {
            writer,
            m,
            next_instance: 0,
        })
    }

    pub fn write(&mut self, matrix: &VoteMatrix) -> Result<()> {
        if matrix.m() != self.m {
            return Err(Error::validation(
                "vote matrix width does not match the dump",
            ));
        }
        let id = self.next_instance.to_string();
        for (c, row) in matrix.rows().enumerate() {
            let mut rec = Vec::with_capacity(self.m + 2);
            rec.push(id.clone());
            rec.push(c.to_string());
            rec.extend(row.iter().map(|v| v.to_string()));
            self.writer.write_record(&rec)?;
        }
        self.next_instance += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.writer.flush()?;
        self.writer
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}
