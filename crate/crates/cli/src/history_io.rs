//! Training history CSV: header `epoch,train_loss,train_acc,val_loss,val_acc`,
//! one 1-based row per epoch. Floats print in shortest round-trip form, so a
//! written file reads back bit-for-bit.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use pxcnn_core::model::{EpochRecord, TrainingHistory};

use crate::error::AppError;

pub const HEADER: [&str; 5] = ["epoch", "train_loss", "train_acc", "val_loss", "val_acc"];

pub fn write_history_csv(history: &TrainingHistory, path: &Path) -> Result<(), AppError> {
    let file = File::create(path).map_err(AppError::data)?;
    let mut csv = csv::Writer::from_writer(BufWriter::new(file));
    csv.write_record(HEADER).map_err(AppError::data)?;
    for (i, record) in history.records.iter().enumerate() {
        csv.write_record([
            (i + 1).to_string(),
            record.train_loss.to_string(),
            record.train_acc.to_string(),
            record.val_loss.to_string(),
            record.val_acc.to_string(),
        ])
        .map_err(AppError::data)?;
    }
    csv.flush().map_err(AppError::data)
}

pub fn read_history_csv(path: &Path) -> Result<TrainingHistory, AppError> {
    let file = File::open(path)
        .map_err(|e| AppError::Data(format!("cannot open {}: {e}", path.display())))?;
    let mut csv = csv::Reader::from_reader(BufReader::new(file));
    let headers = csv.headers().map_err(AppError::data)?;
    if headers != HEADER.as_slice() {
        return Err(AppError::Data(format!(
            "history CSV header must be {}; got {headers:?}",
            HEADER.join(",")
        )));
    }
    let mut records = Vec::new();
    for (row, record) in csv.records().enumerate() {
        let record = record.map_err(AppError::data)?;
        let field = |i: usize| -> Result<f64, AppError> {
            record
                .get(i)
                .ok_or_else(|| AppError::Data(format!("history row {} is short", row + 1)))?
                .parse()
                .map_err(AppError::data)
        };
        let epoch: usize = record
            .get(0)
            .ok_or_else(|| AppError::Data(format!("history row {} is short", row + 1)))?
            .parse()
            .map_err(AppError::data)?;
        if epoch != row + 1 {
            return Err(AppError::Data(format!(
                "history epochs must be consecutive from 1; row {} says {epoch}",
                row + 1
            )));
        }
        records.push(EpochRecord {
            train_loss: field(1)?,
            train_acc: field(2)?,
            val_loss: field(3)?,
            val_acc: field(4)?,
        });
    }
    if records.is_empty() {
        return Err(AppError::Data(format!(
            "{} has no history rows",
            path.display()
        )));
    }
    Ok(TrainingHistory { records })
}
