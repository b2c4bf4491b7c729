//! CSV schemas: unit files (`id,x1,...,xp[,arm][,y]`), block partitions
//! (`id,block`), and assignment files (`id,arm[,factor_levels]`). UTF-8,
//! comma-separated, `.` decimal point.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::sample::{BlockPartition, Sample, Unit};

/// Raw contents of a unit CSV before an arm count is attached.
#[derive(Debug, Clone)]
pub struct UnitsCsv {
    pub ids: Vec<String>,
    pub covariates: Vec<Vec<f64>>,
    pub x_names: Vec<String>,
    pub arms: Option<Vec<usize>>,
    pub outcomes: Option<Vec<f64>>,
}

impl UnitsCsv {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn covariate_index(&self, name: &str) -> Result<usize> {
        self.x_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no covariate column named {name:?}")))
    }

    pub fn into_sample(self, num_arms: usize) -> Result<Sample> {
        let units = self
            .ids
            .into_iter()
            .zip(self.covariates)
            .enumerate()
            .map(|(i, (id, covariates))| Unit {
                id,
                covariates,
                outcome: self.outcomes.as_ref().map(|o| o[i]),
                arm: self.arms.as_ref().map(|a| a[i]),
            })
            .collect();
        Sample::new(units, num_arms)
    }
}

pub fn read_units_csv<R: Read>(reader: R) -> Result<UnitsCsv> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.first().map(String::as_str) != Some("id") {
        return Err(Error::CsvParse {
            row: 1,
            message: format!(
                "first column must be `id`, got {:?}",
                headers.first().cloned().unwrap_or_default()
            ),
        });
    }
    let mut x_cols = Vec::new();
    let mut arm_col = None;
    let mut y_col = None;
    for (idx, name) in headers.iter().enumerate().skip(1) {
        match name.as_str() {
            "arm" => arm_col = Some(idx),
            "y" => y_col = Some(idx),
            other => {
                let expected = format!("x{}", x_cols.len() + 1);
                if other != expected {
                    return Err(Error::CsvParse {
                        row: 1,
                        message: format!(
                            "unexpected column {other:?}; expected {expected:?}, `arm`, or `y`"
                        ),
                    });
                }
                x_cols.push(idx);
            }
        }
    }
    if x_cols.is_empty() {
        return Err(Error::CsvParse {
            row: 1,
            message: "missing covariate columns x1..xp".into(),
        });
    }

    let mut out = UnitsCsv {
        ids: Vec::new(),
        covariates: Vec::new(),
        x_names: x_cols.iter().map(|i| headers[*i].clone()).collect(),
        arms: arm_col.map(|_| Vec::new()),
        outcomes: y_col.map(|_| Vec::new()),
    };
    for (row_idx, record) in rdr.records().enumerate() {
        let row = row_idx + 2; // header is row 1
        let record = record?;
        let field = |idx: usize| -> Result<&str> {
            record.get(idx).ok_or(Error::CsvParse {
                row,
                message: format!("missing column {}", headers[idx]),
            })
        };
        out.ids.push(field(0)?.to_string());
        let mut xs = Vec::with_capacity(x_cols.len());
        for &c in &x_cols {
            let raw = field(c)?;
            xs.push(raw.parse::<f64>().map_err(|_| Error::CsvParse {
                row,
                message: format!("bad number {raw:?} in column {}", headers[c]),
            })?);
        }
        out.covariates.push(xs);
        if let (Some(c), Some(arms)) = (arm_col, out.arms.as_mut()) {
            let raw = field(c)?;
            arms.push(raw.parse::<usize>().map_err(|_| Error::CsvParse {
                row,
                message: format!("bad arm label {raw:?}"),
            })?);
        }
        if let (Some(c), Some(ys)) = (y_col, out.outcomes.as_mut()) {
            let raw = field(c)?;
            ys.push(raw.parse::<f64>().map_err(|_| Error::CsvParse {
                row,
                message: format!("bad outcome {raw:?}"),
            })?);
        }
    }
    if out.ids.is_empty() {
        return Err(Error::CsvParse {
            row: 2,
            message: "no data rows".into(),
        });
    }
    Ok(out)
}

/// `id,block` with 1-based block numbers; numeric order defines block order.
pub fn write_partition_csv<W: Write>(
    writer: W,
    sample: &Sample,
    partition: &BlockPartition,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "block"])?;
    for (j, block) in partition.blocks().iter().enumerate() {
        let mut members = block.clone();
        members.sort_unstable();
        for i in members {
            w.write_record([sample.unit(i).id.as_str(), &(j + 1).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_partition_csv<R: Read>(reader: R, sample: &Sample) -> Result<BlockPartition> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("id") || headers.get(1) != Some("block") {
        return Err(Error::CsvParse {
            row: 1,
            message: "partition header must be `id,block`".into(),
        });
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new(); // (block number, unit index)
    for (row_idx, record) in rdr.records().enumerate() {
        let row = row_idx + 2;
        let record = record?;
        let id = record.get(0).unwrap_or_default();
        let unit = sample.index_of_id(id).ok_or(Error::CsvParse {
            row,
            message: format!("unknown unit id {id:?}"),
        })?;
        let raw = record.get(1).unwrap_or_default();
        let block: usize = raw.parse().map_err(|_| Error::CsvParse {
            row,
            message: format!("bad block number {raw:?}"),
        })?;
        if block == 0 {
            return Err(Error::CsvParse {
                row,
                message: "block numbers are 1-based".into(),
            });
        }
        pairs.push((block, unit));
    }
    let mut numbers: Vec<usize> = pairs.iter().map(|&(b, _)| b).collect();
    numbers.sort_unstable();
    numbers.dedup();
    let blocks: Vec<Vec<usize>> = numbers
        .iter()
        .map(|&b| {
            pairs
                .iter()
                .filter(|&&(bb, _)| bb == b)
                .map(|&(_, i)| i)
                .collect()
        })
        .collect();
    BlockPartition::new(blocks, sample.len())
}

/// `id,arm[,factor_levels]`; levels joined by `;`.
pub fn write_arms_csv<W: Write>(
    writer: W,
    ids: &[String],
    arms: &[usize],
    levels: Option<&[Vec<i8>]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if levels.is_some() {
        w.write_record(["id", "arm", "factor_levels"])?;
    } else {
        w.write_record(["id", "arm"])?;
    }
    for (i, (id, arm)) in ids.iter().zip(arms).enumerate() {
        if let Some(lv) = levels {
            let joined = lv[i]
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([id.as_str(), &arm.to_string(), &joined])?;
        } else {
            w.write_record([id.as_str(), &arm.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
