//! Long-format CSV to dense tensor.
//!
//! Input has a header and four columns `dim1,dim2,dim3,value`, for example
//! `day,client,year,consumption`. Labels in each dimension are mapped to
//! dense 0-based indices in order of first appearance. Repeated cells are
//! averaged; missing cells are filled according to [`FillPolicy`].

use std::collections::HashMap;
use std::io::Read;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillPolicy {
    /// Missing cells become 0.
    #[default]
    Zero,
    /// Any missing cell is an error.
    Error,
    /// Missing cells take the mean of the observed cells of the same
    /// `(dim1, dim2)` trajectory, or 0 if none was observed.
    Mean,
}

impl std::str::FromStr for FillPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(FillPolicy::Zero),
            "error" => Ok(FillPolicy::Error),
            "mean" => Ok(FillPolicy::Mean),
            other => Err(Error::arg(format!("unknown fill policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub tensor: Tensor3,
    /// Labels of each dimension in index order.
    pub labels: [Vec<String>; 3],
    pub filled: usize,
    /// Rows merged into an already-seen cell.
    pub duplicates: usize,
}

#[derive(Default)]
struct LabelMap {
    index: HashMap<String, usize>,
    labels: Vec<String>,
}

impl LabelMap {
    fn id(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.index.insert(label.to_string(), i);
        self.labels.push(label.to_string());
        i
    }
}

pub fn ingest_long_csv<R: Read>(reader: R, fill: FillPolicy) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
        .clone();
    if headers.len() != 4 {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected 4 columns (dim1,dim2,dim3,value), found {}", headers.len()),
        });
    }

    let mut maps: [LabelMap; 3] = Default::default();
    // (i1, i2, i3) -> (sum, count)
    let mut cells: HashMap<(usize, usize, usize), (f64, usize)> = HashMap::new();
    let mut duplicates = 0;
    for (row, record) in rdr.records().enumerate() {
        // header is line 1
        let line = row + 2;
        let record = record.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        if record.len() != 4 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let value: f64 = record[3].parse().map_err(|_| Error::Parse {
            line,
            msg: format!("non-numeric value {:?}", &record[3]),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse { line, msg: format!("non-finite value {:?}", &record[3]) });
        }
        let key = (maps[0].id(&record[0]), maps[1].id(&record[1]), maps[2].id(&record[2]));
        let cell = cells.entry(key).or_insert((0.0, 0));
        if cell.1 > 0 {
            duplicates += 1;
        }
        cell.0 += value;
        cell.1 += 1;
    }
    let (n1, n2, m) = (maps[0].labels.len(), maps[1].labels.len(), maps[2].labels.len());
    if n1 == 0 {
        return Err(Error::Data("no data rows".into()));
    }

    let mut data = vec![0.0; n1 * n2 * m];
    let mut observed = vec![false; n1 * n2 * m];
    for (&(a, b, c), &(sum, count)) in &cells {
        let pos = (a * n2 + b) * m + c;
        data[pos] = sum / count as f64;
        observed[pos] = true;
    }

    let missing: Vec<usize> = (0..data.len()).filter(|&p| !observed[p]).collect();
    if fill == FillPolicy::Error && !missing.is_empty() {
        let keys: Vec<String> = missing
            .iter()
            .take(10)
            .map(|&p| {
                let (a, b, c) = (p / (n2 * m), (p / m) % n2, p % m);
                format!(
                    "({},{},{})",
                    maps[0].labels[a], maps[1].labels[b], maps[2].labels[c]
                )
            })
            .collect();
        return Err(Error::Data(format!(
            "{} missing cells, first: {}",
            missing.len(),
            keys.join(" ")
        )));
    }
    if fill == FillPolicy::Mean {
        for (fiber, seen) in data.chunks_exact_mut(m).zip(observed.chunks_exact(m)) {
            let count = seen.iter().filter(|&&s| s).count();
            if count == m {
                continue;
            }
            let mean = if count == 0 {
                0.0
            } else {
                fiber.iter().zip(seen).filter(|(_, &s)| s).map(|(v, _)| v).sum::<f64>()
                    / count as f64
            };
            for (v, &s) in fiber.iter_mut().zip(seen) {
                if !s {
                    *v = mean;
                }
            }
        }
    }

    let [a, b, c] = maps;
    Ok(Ingested {
        tensor: Tensor3::new(n1, n2, m, data)?,
        labels: [a.labels, b.labels, c.labels],
        filled: missing.len(),
        duplicates,
    })
}
