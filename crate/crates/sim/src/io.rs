//! File formats: sequence CSV, NDJSON event traces and the results CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use collateral_core::{Event, Transaction, TransactionSequence};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Serialize, Deserialize)]
struct SeqRow {
    slot: u64,
    value: Option<u64>,
}

/// Reads `slot,value` rows. A row with an empty value only extends the
/// horizon (trailing empty slots).
pub fn read_sequence<R: Read>(reader: R) -> Result<TransactionSequence, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["slot", "value"] {
        return Err(HarnessError::config("sequence CSV header must be `slot,value`"));
    }
    let mut seq = TransactionSequence::default();
    for row in rdr.deserialize() {
        let row: SeqRow = row?;
        match row.value {
            Some(v) => seq.push(Transaction::new(row.slot, v))?,
            None => seq.extend_horizon(row.slot),
        }
    }
    Ok(seq)
}

pub fn read_sequence_file(path: &Path) -> Result<TransactionSequence, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_sequence(BufReader::new(file))
}

pub fn write_sequence<W: Write>(writer: W, seq: &TransactionSequence) -> Result<(), HarnessError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["slot", "value"])?;
    for tx in seq.txs() {
        wtr.write_record([tx.slot.to_string(), tx.value.to_string()])?;
    }
    let last = seq.txs().last().map_or(0, |t| t.slot);
    if seq.horizon() > last {
        wtr.write_record([seq.horizon().to_string(), String::new()])?;
    }
    wtr.flush().map_err(|e| HarnessError::io("<sequence>", e))?;
    Ok(())
}

pub fn write_sequence_file(path: &Path, seq: &TransactionSequence) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_sequence(BufWriter::new(file), seq)
}

/// One JSON object per line.
pub fn write_trace<W: Write>(mut writer: W, events: &[Event]) -> Result<(), HarnessError> {
    for e in events {
        serde_json::to_writer(&mut writer, e)?;
        writer.write_all(b"\n").map_err(|e| HarnessError::io("<trace>", e))?;
    }
    writer.flush().map_err(|e| HarnessError::io("<trace>", e))
}

pub fn write_trace_file(path: &Path, events: &[Event]) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_trace(BufWriter::new(file), events)
}

pub fn read_trace<R: Read>(reader: R) -> Result<Vec<Event>, HarnessError> {
    BufReader::new(reader)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|line| {
            let line = line.map_err(|e| HarnessError::io("<trace>", e))?;
            Ok(serde_json::from_str(&line)?)
        })
        .collect()
}

/// One row of the results CSV; field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub run_id: String,
    pub policy: String,
    #[serde(rename = "C")]
    pub c: u64,
    pub k: u64,
    #[serde(rename = "T")]
    pub t: u64,
    #[serde(rename = "F")]
    pub f: u64,
    pub p_ppm: u64,
    /// `tau`, written `num/den` when fractional.
    pub tau: String,
    pub eta_ppm: Option<u64>,
    pub seed: u64,
    pub n_tx: usize,
    pub offered_value: u64,
    pub settled_value: u64,
    pub flush_count: u64,
    pub utility_num: i128,
    pub utility_den: i128,
    pub opt_value: Option<u64>,
    pub opt_utility_num: Option<i128>,
    pub opt_utility_den: Option<i128>,
    pub ratio_value: Option<String>,
    pub ratio_utility: Option<String>,
    pub bound: Option<String>,
    pub bound_ok: Option<bool>,
}

pub const RESULT_COLUMNS: [&str; 23] = [
    "run_id",
    "policy",
    "C",
    "k",
    "T",
    "F",
    "p_ppm",
    "tau",
    "eta_ppm",
    "seed",
    "n_tx",
    "offered_value",
    "settled_value",
    "flush_count",
    "utility_num",
    "utility_den",
    "opt_value",
    "opt_utility_num",
    "opt_utility_den",
    "ratio_value",
    "ratio_utility",
    "bound",
    "bound_ok",
];

pub fn write_results<W: Write>(writer: W, rows: &[ResultRow]) -> Result<(), HarnessError> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    wtr.write_record(RESULT_COLUMNS)?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush().map_err(|e| HarnessError::io("<results>", e))?;
    Ok(())
}

pub fn write_results_file(path: &Path, rows: &[ResultRow]) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_results(BufWriter::new(file), rows)
}

pub fn read_results<R: Read>(reader: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(reader);
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}
