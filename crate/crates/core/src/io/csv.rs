//! Sweep records as CSV with a frozen header.

use std::io::{Read, Write};

use crate::error::{RabiError, Result};
use crate::params::{Parity, Phase};
use crate::stats::PhotonStatistics;
use crate::sweep::{Method, RootSummary, SweepRecord};

use super::fmt_float;

pub const CSV_HEADER: &str = "delta,g,lambda,phase,parity,x_root,energy,residual,mean_n,var_n,q_excess,mandel_q,\
mean_x,dx,dp,product,r,overlap,cov_xp,truncation_n,error";

fn opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn row(r: &SweepRecord) -> Vec<String> {
    let root = r.root.as_ref();
    let s = r.stats.as_ref();
    vec![
        fmt_float(r.delta),
        fmt_float(r.g),
        fmt_float(r.lambda),
        r.phase.as_str().to_string(),
        root.map(|x| x.parity.as_str().to_string()).unwrap_or_default(),
        opt(root.map(|x| x.x_root)),
        opt(root.map(|x| x.energy)),
        opt(root.map(|x| x.residual)),
        opt(s.map(|s| s.mean_n)),
        opt(s.map(|s| s.var_n)),
        opt(s.map(|s| s.q_excess)),
        opt(s.and_then(PhotonStatistics::mandel_q)),
        opt(s.map(|s| s.mean_x)),
        opt(s.map(|s| s.dx)),
        opt(s.map(|s| s.dp)),
        opt(s.map(|s| s.product)),
        opt(s.map(|s| s.r)),
        opt(s.map(|s| s.overlap)),
        opt(s.map(|s| s.cov_xp)),
        r.truncation_n.map(|n| n.to_string()).unwrap_or_default(),
        r.error.clone().unwrap_or_default(),
    ]
}

pub fn write_records<W: Write>(out: W, records: &[SweepRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.write_record(row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn records_to_string(records: &[SweepRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_records(&mut buf, records)?;
    String::from_utf8(buf).map_err(|e| RabiError::Format(e.to_string()))
}

fn num(field: &str, name: &str, line: u64) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field.parse().map(Some).map_err(|_| RabiError::Format(format!("line {line}: `{name}` is not a number: `{field}`")))
}

fn required(v: Option<f64>, name: &str, line: u64) -> Result<f64> {
    v.ok_or_else(|| RabiError::Format(format!("line {line}: `{name}` is empty")))
}

/// Reads records back. `mean_p` is restored as zero and the method as
/// spectral; neither is a column.
pub fn read_records<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(RabiError::Format(format!("unexpected header `{}`", header.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let col = |i: usize| rec.get(i).unwrap_or("");
        let n = |i: usize| num(col(i), &header[i], line);
        let delta = required(n(0)?, "delta", line)?;
        let g = required(n(1)?, "g", line)?;
        let lambda = required(n(2)?, "lambda", line)?;
        let phase =
            Phase::parse(col(3)).ok_or_else(|| RabiError::Format(format!("line {line}: bad phase `{}`", col(3))))?;
        let root = match col(4) {
            "" => None,
            p => Some(RootSummary {
                parity: Parity::parse(p).ok_or_else(|| RabiError::Format(format!("line {line}: bad parity `{p}`")))?,
                x_root: required(n(5)?, "x_root", line)?,
                energy: required(n(6)?, "energy", line)?,
                residual: required(n(7)?, "residual", line)?,
            }),
        };
        let stats = match n(8)? {
            None => None,
            Some(mean_n) => Some(PhotonStatistics {
                mean_n,
                var_n: required(n(9)?, "var_n", line)?,
                q_excess: required(n(10)?, "q_excess", line)?,
                mean_x: required(n(12)?, "mean_x", line)?,
                mean_p: 0.0,
                dx: required(n(13)?, "dx", line)?,
                dp: required(n(14)?, "dp", line)?,
                product: required(n(15)?, "product", line)?,
                r: required(n(16)?, "r", line)?,
                overlap: required(n(17)?, "overlap", line)?,
                cov_xp: required(n(18)?, "cov_xp", line)?,
            }),
        };
        let truncation_n = match col(19) {
            "" => None,
            t => Some(t.parse().map_err(|_| RabiError::Format(format!("line {line}: bad truncation_n `{t}`")))?),
        };
        let error = Some(col(20).to_string()).filter(|e| !e.is_empty());
        out.push(SweepRecord { delta, g, lambda, phase, root, stats, truncation_n, method: Method::Spectral, error });
    }
    Ok(out)
}
