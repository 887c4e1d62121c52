use std::fs::File;
use std::path::Path;

use crate::adapt::{CycleRecord, RunHistory};
use crate::error::Result;
use crate::normprobe::ProbeRecord;

/// Writes `history.csv`:
/// `cycle,ncells,ndof,l2_u,eps_l2_sigma,eta,ratio_u_sigma,ratio_eta_u,wall_ms`.
pub fn write_history(path: &Path, history: &RunHistory) -> Result<()> {
    write_rows(path, &history.records)
}

pub fn read_history(path: &Path) -> Result<Vec<CycleRecord>> {
    read_rows(path)
}

/// Writes `probe.csv`: `norm,eps,p,mesh,lambda_min,lambda_max,ratio`.
pub fn write_probe(path: &Path, records: &[ProbeRecord]) -> Result<()> {
    write_rows(path, records)
}

pub fn read_probe(path: &Path) -> Result<Vec<ProbeRecord>> {
    read_rows(path)
}

fn write_rows<T: serde::Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    Ok(rows)
}
