//! Trajectory CSV: header `t,<var1>,...`, one row per sample. Values use the
//! shortest decimal that parses back to the same double.

use std::io;

use slin_core::Trajectory;

pub fn write_csv<W: io::Write>(out: W, names: &[String], traj: &Trajectory) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once("t").chain(names.iter().map(String::as_str)))?;
    for (t, x) in traj.times().iter().zip(traj.states()) {
        w.write_record(std::iter::once(t).chain(x).map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Header names and rows, for reading back what [`write_csv`] produced.
pub fn read_csv<R: io::Read>(input: R) -> Result<(Vec<String>, Vec<Vec<f64>>), csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| csv::Error::from(io::Error::new(io::ErrorKind::InvalidData, e))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
