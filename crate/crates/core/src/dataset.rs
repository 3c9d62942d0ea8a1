//! Power measurement samples, immutable datasets and the CSV wire format.
//!
//! A dataset is an ordered collection of samples sharing one platform tag and
//! one scheduler tag. Datasets are never mutated after construction; every
//! derived collection (splits, filters) is a new value.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::CoreError;

/// CSV header for dataset files.
pub const CSV_HEADER: &str = "airtime,snr_db,mcs,power_w,scheduler,platform";

/// Largest valid MCS index (LTE-class stack, 0..=28).
pub const MCS_MAX: u8 = 28;

/// Which scheduler produced a measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheduler {
    Default,
    Custom,
}

impl Scheduler {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheduler::Default => "default",
            Scheduler::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Scheduler> {
        match s {
            "default" => Some(Scheduler::Default),
            "custom" => Some(Scheduler::Custom),
            _ => None,
        }
    }
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSource {
    Synthetic,
    IngestedCsv,
}

/// One power measurement row.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Fraction of subframes used, in [0, 1].
    pub airtime: f64,
    /// SNR in dB, nonnegative.
    pub snr_db: f64,
    /// Modulation and coding scheme index, 0..=28.
    pub mcs: u8,
    /// Measured CPU power in watts, positive.
    pub power_w: f64,
    pub scheduler: Scheduler,
    pub platform: String,
}

impl Sample {
    /// Builds a sample, validating every field invariant.
    pub fn new(
        airtime: f64,
        snr_db: f64,
        mcs: u8,
        power_w: f64,
        scheduler: Scheduler,
        platform: impl Into<String>,
    ) -> Result<Sample, CoreError> {
        let platform = platform.into();
        if !(0.0..=1.0).contains(&airtime) || !airtime.is_finite() {
            return Err(invalid("airtime", airtime, "must be in [0, 1]"));
        }
        if !snr_db.is_finite() || snr_db < 0.0 {
            return Err(invalid("snr_db", snr_db, "must be finite and >= 0"));
        }
        if mcs > MCS_MAX {
            return Err(CoreError::InvalidSample {
                field: "mcs",
                value: mcs.to_string(),
                detail: format!("must be in 0..={MCS_MAX}"),
            });
        }
        if !power_w.is_finite() || power_w <= 0.0 {
            return Err(invalid("power_w", power_w, "must be finite and > 0"));
        }
        if platform.is_empty() || platform.contains([',', '\n', '\r']) {
            return Err(CoreError::InvalidSample {
                field: "platform",
                value: platform,
                detail: "must be nonempty and free of commas/newlines".into(),
            });
        }
        Ok(Sample {
            airtime,
            snr_db,
            mcs,
            power_w,
            scheduler,
            platform,
        })
    }

    /// Formats the sample as one CSV data row (no trailing newline).
    ///
    /// Fixed formatting: airtime 3 decimals, snr_db 2 decimals, power_w
    /// 4 decimals. Values clean at that precision round-trip bit-exactly.
    pub fn csv_row(&self) -> String {
        format!(
            "{:.3},{:.2},{},{:.4},{},{}",
            self.airtime, self.snr_db, self.mcs, self.power_w, self.scheduler, self.platform
        )
    }
}

fn invalid(field: &'static str, value: f64, detail: &str) -> CoreError {
    CoreError::InvalidSample {
        field,
        value: value.to_string(),
        detail: detail.to_string(),
    }
}

/// Immutable ordered collection of samples with provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    platform: String,
    scheduler: Scheduler,
    seed: Option<u64>,
    source: DataSource,
}

impl Dataset {
    /// Builds a dataset, checking that every sample carries the given tags.
    pub fn new(
        samples: Vec<Sample>,
        platform: impl Into<String>,
        scheduler: Scheduler,
        seed: Option<u64>,
        source: DataSource,
    ) -> Result<Dataset, CoreError> {
        let platform = platform.into();
        for (i, s) in samples.iter().enumerate() {
            if s.platform != platform {
                return Err(CoreError::DatasetMismatch {
                    detail: format!(
                        "sample {} has platform `{}`, dataset is `{}`",
                        i, s.platform, platform
                    ),
                });
            }
            if s.scheduler != scheduler {
                return Err(CoreError::DatasetMismatch {
                    detail: format!(
                        "sample {} has scheduler `{}`, dataset is `{}`",
                        i, s.scheduler, scheduler
                    ),
                });
            }
        }
        Ok(Dataset {
            samples,
            platform,
            scheduler,
            seed,
            source,
        })
    }

    /// Empty dataset with explicit tags.
    pub fn empty(platform: impl Into<String>, scheduler: Scheduler) -> Dataset {
        Dataset {
            samples: Vec::new(),
            platform: platform.into(),
            scheduler,
            seed: None,
            source: DataSource::Synthetic,
        }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn platform(&self) -> &str {
        &self.platform
    }

    pub fn scheduler(&self) -> Scheduler {
        self.scheduler
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn source(&self) -> DataSource {
        self.source
    }

    /// New dataset holding a subset of this one's samples, same tags.
    pub fn with_samples(&self, samples: Vec<Sample>) -> Result<Dataset, CoreError> {
        Dataset::new(
            samples,
            self.platform.clone(),
            self.scheduler,
            self.seed,
            self.source,
        )
    }

    /// FNV-1a hash over the canonical CSV rows, as a 16-digit hex tag.
    ///
    /// Two datasets with identical rows (at CSV precision) share a
    /// fingerprint regardless of provenance metadata.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        for s in &self.samples {
            for b in s.csv_row().as_bytes() {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x100000001b3);
            }
            h ^= u64::from(b'\n');
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

/// Reads a dataset from a CSV file in the canonical schema.
///
/// Rows violating sample invariants are rejected with the offending line
/// number. All rows must share one platform and one scheduler tag; a file
/// with no data rows is an error because the dataset tags cannot be
/// inferred from it.
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Dataset, CoreError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CoreError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));

    let header = lines.next().unwrap_or("");
    if header != CSV_HEADER {
        return Err(CoreError::CsvHeader {
            path: path.display().to_string(),
            expected: CSV_HEADER.to_string(),
            found: header.to_string(),
        });
    }

    let mut samples: Vec<Sample> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2; // 1-based, after the header
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(CoreError::CsvRow {
                line: line_no,
                detail: format!("expected 6 fields, found {}", fields.len()),
            });
        }
        let airtime = parse_f64(fields[0], "airtime", line_no)?;
        let snr_db = parse_f64(fields[1], "snr_db", line_no)?;
        let mcs: u8 = fields[2].parse().map_err(|_| CoreError::CsvRow {
            line: line_no,
            detail: format!("mcs `{}` is not a valid integer in 0..={MCS_MAX}", fields[2]),
        })?;
        let power_w = parse_f64(fields[3], "power_w", line_no)?;
        let scheduler = Scheduler::parse(fields[4]).ok_or_else(|| CoreError::CsvRow {
            line: line_no,
            detail: format!("scheduler `{}` must be `default` or `custom`", fields[4]),
        })?;
        let sample = Sample::new(airtime, snr_db, mcs, power_w, scheduler, fields[5])
            .map_err(|e| CoreError::CsvRow {
                line: line_no,
                detail: e.to_string(),
            })?;
        if let Some(first) = samples.first() {
            if sample.platform != first.platform || sample.scheduler != first.scheduler {
                return Err(CoreError::CsvRow {
                    line: line_no,
                    detail: format!(
                        "tags ({}, {}) differ from the file's first row ({}, {})",
                        sample.platform, sample.scheduler, first.platform, first.scheduler
                    ),
                });
            }
        }
        samples.push(sample);
    }

    let first = samples.first().ok_or_else(|| CoreError::EmptyCsv {
        path: path.display().to_string(),
    })?;
    let platform = first.platform.clone();
    let scheduler = first.scheduler;
    Dataset::new(samples, platform, scheduler, None, DataSource::IngestedCsv)
}

fn parse_f64(s: &str, field: &str, line: usize) -> Result<f64, CoreError> {
    s.parse::<f64>().map_err(|_| CoreError::CsvRow {
        line,
        detail: format!("{field} `{s}` is not a number"),
    })
}

/// Writes a dataset to `path` in the canonical CSV schema (UTF-8, LF).
pub fn emit_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), CoreError> {
    let path = path.as_ref();
    fs::write(path, dataset_to_csv(ds)).map_err(|e| CoreError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// In-memory CSV rendering used by `emit_csv` and report fingerprints.
pub fn dataset_to_csv(ds: &Dataset) -> String {
    let mut out = String::with_capacity(ds.len() * 40 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in ds.samples() {
        out.push_str(&s.csv_row());
        out.push('\n');
    }
    out
}
