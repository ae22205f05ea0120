//! Per-step, per-BS training metrics as CSV.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HEADER: [&str; 12] = [
    "episode",
    "step",
    "bs_id",
    "action",
    "reward",
    "r_omni",
    "r_beam",
    "sum_ddqn",
    "sum_exhaustive",
    "sum_random",
    "epsilon",
    "loss",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub episode: usize,
    pub step: usize,
    pub bs_id: usize,
    pub action: usize,
    pub reward: f64,
    pub r_omni: f64,
    pub r_beam: f64,
    pub sum_ddqn: f64,
    pub sum_exhaustive: f64,
    pub sum_random: f64,
    pub epsilon: f64,
    /// Absent while the replay memory is still filling.
    pub loss: Option<f64>,
}

/// Formats `x` with six significant digits, `%g` style.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    // Rounding can carry into the next decade, e.g. 999999.5.
    let sci = format!("{:.5e}", x);
    let (mantissa, e) = sci.split_once('e').unwrap();
    let exp_rounded: i32 = e.parse().unwrap_or(exp);
    if (-5..6).contains(&exp_rounded) {
        let decimals = (5 - exp_rounded).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp_rounded)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

impl StepRecord {
    fn fields(&self) -> [String; 12] {
        [
            self.episode.to_string(),
            self.step.to_string(),
            self.bs_id.to_string(),
            self.action.to_string(),
            format_sig6(self.reward),
            format_sig6(self.r_omni),
            format_sig6(self.r_beam),
            format_sig6(self.sum_ddqn),
            format_sig6(self.sum_exhaustive),
            format_sig6(self.sum_random),
            format_sig6(self.epsilon),
            self.loss.map(format_sig6).unwrap_or_default(),
        ]
    }
}

pub struct MetricsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(sink: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(sink);
        inner.write_record(HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, record: &StepRecord) -> Result<()> {
        self.inner.write_record(record.fields())?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush().map_err(|e| Error::io("metrics", e))?;
        self.inner
            .into_inner()
            .map_err(|e| Error::io("metrics", std::io::Error::other(e.to_string())))
    }
}

pub fn emit_metrics(path: &Path, records: &[StepRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = MetricsWriter::new(std::io::BufWriter::new(file))?;
    for r in records {
        w.write(r)?;
    }
    w.finish()?.flush().map_err(|e| Error::io(path, e))
}

pub fn read_metrics<R: Read>(source: R) -> Result<Vec<StepRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(Error::config("metrics header", format!("unexpected header {header:?}")));
    }
    reader
        .records()
        .map(|row| {
            let row = row?;
            let int = |i: usize| -> Result<usize> {
                row[i].parse().map_err(|_| Error::config(HEADER[i], format!("bad integer `{}`", &row[i])))
            };
            let float = |i: usize| -> Result<f64> {
                row[i].parse().map_err(|_| Error::config(HEADER[i], format!("bad number `{}`", &row[i])))
            };
            Ok(StepRecord {
                episode: int(0)?,
                step: int(1)?,
                bs_id: int(2)?,
                action: int(3)?,
                reward: float(4)?,
                r_omni: float(5)?,
                r_beam: float(6)?,
                sum_ddqn: float(7)?,
                sum_exhaustive: float(8)?,
                sum_random: float(9)?,
                epsilon: float(10)?,
                loss: if row[11].is_empty() { None } else { Some(float(11)?) },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(i: usize) -> StepRecord {
        StepRecord {
            episode: i / 3,
            step: i % 3 + 1,
            bs_id: i % 2,
            action: i % 8,
            reward: 1.234_567_89 * i as f64,
            r_omni: 3.0,
            r_beam: 0.000_012_345_678,
            sum_ddqn: 12.5,
            sum_exhaustive: 13.0,
            sum_random: 1e7 + 3.0,
            epsilon: 0.9,
            loss: if i.is_multiple_of(2) { None } else { Some(0.5 / i as f64) },
        }
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(4.087462841), "4.08746");
        assert_eq!(format_sig6(-0.5), "-0.5");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(999999.7), "1e6");
        assert_eq!(format_sig6(1.5e-7), "1.5e-7");
        assert_eq!(format_sig6(12345678.0), "1.23457e7");
        assert_eq!(format_sig6(0.000123456789), "0.000123457");
    }

    #[test]
    fn header_only_for_no_records() {
        let buf = MetricsWriter::new(Vec::new()).unwrap().finish().unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", HEADER.join(",")));
    }

    #[test]
    fn csv_round_trip_is_a_fixpoint() {
        let records: Vec<StepRecord> = (0..12).map(record).collect();
        let mut w = MetricsWriter::new(Vec::new()).unwrap();
        records.iter().for_each(|r| w.write(r).unwrap());
        let bytes = w.finish().unwrap();
        assert!(!bytes.contains(&b'\r'));
        let parsed = read_metrics(bytes.as_slice()).unwrap();
        assert_eq!(parsed.len(), records.len());
        for (p, r) in parsed.iter().zip(&records) {
            assert_eq!((p.episode, p.step, p.bs_id, p.action), (r.episode, r.step, r.bs_id, r.action));
            assert_eq!(p.loss.is_some(), r.loss.is_some());
            assert!((p.reward - r.reward).abs() <= 5e-6 * r.reward.abs());
        }
        let mut w = MetricsWriter::new(Vec::new()).unwrap();
        parsed.iter().for_each(|r| w.write(r).unwrap());
        assert_eq!(w.finish().unwrap(), bytes);
        let reparsed = read_metrics(bytes.as_slice()).unwrap();
        assert_eq!(reparsed, parsed);
    }
}
