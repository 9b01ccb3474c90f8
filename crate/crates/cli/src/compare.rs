//! Differences of normalized variance series.

use std::io::Write;

use kicked_duo::{Error, TimeSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceRow {
    pub n: u64,
    pub minuend: f64,
    pub subtrahend: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceSummary {
    pub max_abs: f64,
    pub n_at_max: u64,
    pub mean: f64,
    pub window: (u64, u64),
    pub points: usize,
}

/// Row-by-row `delta2` difference. Both series must record the same kicks.
pub fn difference(minuend: &TimeSeries, subtrahend: &TimeSeries) -> kicked_duo::Result<Vec<DifferenceRow>> {
    let (a, b) = (&minuend.records, &subtrahend.records);
    for row in 0..a.len().max(b.len()) {
        let left = a.get(row).map_or(u64::MAX, |r| r.n);
        let right = b.get(row).map_or(u64::MAX, |r| r.n);
        if left != right {
            return Err(Error::Misaligned { row, left, right });
        }
    }
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(row, (x, y))| match (x.delta2, y.delta2) {
            (Some(u), Some(v)) => Ok(DifferenceRow { n: x.n, minuend: u, subtrahend: v, difference: u - v }),
            _ => Err(Error::Misaligned { row, left: x.n, right: y.n }),
        })
        .collect()
}

/// Largest absolute difference and mean difference over `window`, or over
/// all rows when `window` is `None`.
pub fn summarize(rows: &[DifferenceRow], window: Option<(u64, u64)>) -> Option<DifferenceSummary> {
    let (lo, hi) = window.unwrap_or((
        rows.first().map_or(0, |r| r.n),
        rows.last().map_or(0, |r| r.n),
    ));
    let inside: Vec<&DifferenceRow> = rows.iter().filter(|r| r.n >= lo && r.n <= hi).collect();
    let top = inside.iter().max_by(|a, b| a.difference.abs().total_cmp(&b.difference.abs()))?;
    let values: Vec<f64> = inside.iter().map(|r| r.difference).collect();
    Some(DifferenceSummary {
        max_abs: top.difference.abs(),
        n_at_max: top.n,
        mean: kicked_duo::numeric::pairwise_sum(&values) / values.len() as f64,
        window: (lo, hi),
        points: values.len(),
    })
}

pub fn write_csv<W: Write>(rows: &[DifferenceRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,delta2_a,delta2_b,difference")?;
    for r in rows {
        writeln!(out, "{},{:e},{:e},{:e}", r.n, r.minuend, r.subtrahend, r.difference)?;
    }
    Ok(())
}
