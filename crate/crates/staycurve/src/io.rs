//! Trajectory and ground-truth file handling.
//!
//! Canonical trajectory format is CSV with header `timestamp,lat,lon`
//! (ISO-8601 timestamps, decimal degrees, LF line endings). GPX 1.1 tracks
//! are supported read-only. Ground-truth stay logs use
//! `day,arrival_min,departure_min,lat,lon,label`.

use std::io::Write;

use chrono::{DateTime, FixedOffset, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One timestamped GPS fix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationSample {
    pub timestamp: DateTime<FixedOffset>,
    pub latitude: f64,
    pub longitude: f64,
}

impl LocationSample {
    /// Minutes since midnight of the sample's own offset-local day
    /// (fractional; sub-second resolution is preserved).
    pub fn minutes_since_midnight(&self) -> f64 {
        use chrono::Timelike;
        let t = self.timestamp.time();
        (t.num_seconds_from_midnight() as f64 + t.nanosecond() as f64 * 1e-9) / 60.0
    }
}

/// All samples of one calendar day, sorted by timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub day: NaiveDate,
    pub samples: Vec<LocationSample>,
}

/// A manually logged stay used as evaluation ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthStay {
    pub day: NaiveDate,
    pub arrival_min: f64,
    pub departure_min: f64,
    pub latitude: f64,
    pub longitude: f64,
    pub label: String,
}

fn check_latitude(value: f64, line: u64) -> Result<f64> {
    if !value.is_finite() || !(-90.0..=90.0).contains(&value) {
        return Err(Error::OutOfRange {
            line,
            field: "lat",
            value,
        });
    }
    Ok(value)
}

fn check_longitude(value: f64, line: u64) -> Result<f64> {
    if !value.is_finite() || !(-180.0..=180.0).contains(&value) {
        return Err(Error::OutOfRange {
            line,
            field: "lon",
            value,
        });
    }
    Ok(value)
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Parse trajectory CSV (`timestamp,lat,lon`).
///
/// Returns samples in file order; callers wanting clean per-day input should
/// pass the result through [`split_by_day`], which sorts and deduplicates.
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<LocationSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let expected = ["timestamp", "lat", "lon"];
    if headers.iter().map(str::trim).ne(expected) {
        return Err(Error::Malformed {
            line: 1,
            message: format!(
                "expected header `timestamp,lat,lon`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record_line(&record);
        if record.len() != 3 {
            return Err(Error::Malformed {
                line,
                message: format!("expected 3 fields, got {}", record.len()),
            });
        }
        samples.push(parse_sample_fields(
            &record[0], &record[1], &record[2], line,
        )?);
    }
    Ok(samples)
}

/// Parse one `timestamp,lat,lon` triple (shared by CSV parsing and the
/// streaming CLI, which reads the same rows line by line).
pub fn parse_sample_fields(
    timestamp: &str,
    lat: &str,
    lon: &str,
    line: u64,
) -> Result<LocationSample> {
    let timestamp =
        DateTime::parse_from_rfc3339(timestamp.trim()).map_err(|e| Error::Malformed {
            line,
            message: format!("bad timestamp `{}`: {e}", timestamp.trim()),
        })?;
    let lat: f64 = lat.trim().parse().map_err(|_| Error::Malformed {
        line,
        message: format!("bad lat `{}`", lat.trim()),
    })?;
    let lon: f64 = lon.trim().parse().map_err(|_| Error::Malformed {
        line,
        message: format!("bad lon `{}`", lon.trim()),
    })?;
    Ok(LocationSample {
        timestamp,
        latitude: check_latitude(lat, line)?,
        longitude: check_longitude(lon, line)?,
    })
}

/// Serialize samples back to the canonical CSV format. Parsing the output
/// with [`parse_trajectory_csv`] reproduces the input exactly.
pub fn write_trajectory_csv<W: Write>(samples: &[LocationSample], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "lat", "lon"])
        .map_err(csv_io_error)?;
    for s in samples {
        w.serialize((s.timestamp.to_rfc3339(), s.latitude, s.longitude))
            .map_err(csv_io_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io_error(e: csv::Error) -> Error {
    Error::Malformed {
        line: 0,
        message: format!("csv write failed: {e}"),
    }
}

/// Parse a GPX 1.1 track document.
///
/// Extracts every trackpoint carrying a `<time>` element, in document order.
/// Returns the samples and the count of trackpoints skipped for lacking one.
pub fn parse_gpx(text: &str) -> Result<(Vec<LocationSample>, usize)> {
    use quick_xml::events::Event;

    let mut reader = quick_xml::Reader::from_str(text);
    let mut samples = Vec::new();
    let mut skipped = 0usize;
    let mut saw_gpx_root = false;
    // State while inside a <trkpt>: its (lat, lon) and any <time> text seen.
    let mut current: Option<(f64, f64, Option<DateTime<FixedOffset>>)> = None;
    let mut in_time = false;

    let line_of = |reader: &quick_xml::Reader<&[u8]>| -> u64 {
        let pos = reader.buffer_position() as usize;
        text.bytes().take(pos).filter(|&b| b == b'\n').count() as u64 + 1
    };

    loop {
        match reader.read_event() {
            Err(e) => {
                return Err(Error::InvalidDocument {
                    expected: "GPX",
                    detail: format!("line {}: {e}", line_of(&reader)),
                })
            }
            Ok(Event::Eof) => break,
            Ok(Event::Start(e)) => match e.local_name().as_ref() {
                b"gpx" => saw_gpx_root = true,
                b"trkpt" => {
                    let line = line_of(&reader);
                    let lat = attribute_value(&e, "lat", line)?;
                    let lon = attribute_value(&e, "lon", line)?;
                    check_latitude(lat, line)?;
                    check_longitude(lon, line)?;
                    current = Some((lat, lon, None));
                }
                b"time" if current.is_some() => in_time = true,
                _ => {}
            },
            // A self-closing element produces no matching End event.
            Ok(Event::Empty(e)) => match e.local_name().as_ref() {
                b"gpx" => saw_gpx_root = true,
                b"trkpt" => {
                    let line = line_of(&reader);
                    let lat = attribute_value(&e, "lat", line)?;
                    let lon = attribute_value(&e, "lon", line)?;
                    check_latitude(lat, line)?;
                    check_longitude(lon, line)?;
                    skipped += 1;
                }
                _ => {}
            },
            Ok(Event::Text(t)) if in_time => {
                let raw = t.decode().map_err(|e| Error::InvalidDocument {
                    expected: "GPX",
                    detail: e.to_string(),
                })?;
                let line = line_of(&reader);
                let ts =
                    DateTime::parse_from_rfc3339(raw.trim()).map_err(|e| Error::Malformed {
                        line,
                        message: format!("bad trackpoint time `{}`: {e}", raw.trim()),
                    })?;
                if let Some((_, _, t)) = current.as_mut() {
                    *t = Some(ts);
                }
            }
            Ok(Event::End(e)) => match e.local_name().as_ref() {
                b"time" => in_time = false,
                b"trkpt" => {
                    if let Some((lat, lon, time)) = current.take() {
                        match time {
                            Some(timestamp) => samples.push(LocationSample {
                                timestamp,
                                latitude: lat,
                                longitude: lon,
                            }),
                            None => skipped += 1,
                        }
                    }
                }
                _ => {}
            },
            Ok(_) => {}
        }
    }

    if !saw_gpx_root {
        return Err(Error::InvalidDocument {
            expected: "GPX",
            detail: "no <gpx> root element found".into(),
        });
    }
    Ok((samples, skipped))
}

fn attribute_value(e: &quick_xml::events::BytesStart, name: &str, line: u64) -> Result<f64> {
    let attr = e
        .try_get_attribute(name)
        .map_err(|err| Error::Malformed {
            line,
            message: err.to_string(),
        })?
        .ok_or_else(|| Error::Malformed {
            line,
            message: format!("trkpt missing `{name}` attribute"),
        })?;
    let raw = attr
        .normalized_value(quick_xml::XmlVersion::Implicit1_0)
        .map_err(|err| Error::Malformed {
            line,
            message: err.to_string(),
        })?;
    raw.trim().parse().map_err(|_| Error::Malformed {
        line,
        message: format!("bad trkpt `{name}` value `{}`", raw.trim()),
    })
}

/// Group samples into per-day trajectories.
///
/// Days are the timestamps' own offset-local calendar dates. Within each day
/// samples are sorted by timestamp and samples sharing an identical instant
/// are collapsed to the first occurrence (the curve transform needs strictly
/// increasing time). Output is ordered by day.
pub fn split_by_day(samples: &[LocationSample]) -> Vec<Trajectory> {
    let mut sorted: Vec<LocationSample> = samples.to_vec();
    sorted.sort_by_key(|s| s.timestamp);
    sorted.dedup_by(|next, first| next.timestamp == first.timestamp);

    let mut days: Vec<Trajectory> = Vec::new();
    for sample in sorted {
        let day = sample.timestamp.date_naive();
        match days.iter_mut().find(|t| t.day == day) {
            Some(t) => t.samples.push(sample),
            None => days.push(Trajectory {
                day,
                samples: vec![sample],
            }),
        }
    }
    days.sort_by_key(|t| t.day);
    days
}

/// Parse a ground-truth stay log (`day,arrival_min,departure_min,lat,lon,label`).
pub fn parse_ground_truth(text: &str) -> Result<Vec<GroundTruthStay>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let expected = ["day", "arrival_min", "departure_min", "lat", "lon", "label"];
    if headers.iter().map(str::trim).ne(expected) {
        return Err(Error::Malformed {
            line: 1,
            message: format!(
                "expected header `{}`, got `{}`",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut stays = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record_line(&record);
        if record.len() != 6 {
            return Err(Error::Malformed {
                line,
                message: format!("expected 6 fields, got {}", record.len()),
            });
        }
        let day: NaiveDate = record[0].trim().parse().map_err(|_| Error::Malformed {
            line,
            message: format!("bad day `{}`", &record[0]),
        })?;
        let arrival_min: f64 = record[1].trim().parse().map_err(|_| Error::Malformed {
            line,
            message: format!("bad arrival_min `{}`", &record[1]),
        })?;
        let departure_min: f64 = record[2].trim().parse().map_err(|_| Error::Malformed {
            line,
            message: format!("bad departure_min `{}`", &record[2]),
        })?;
        for (field, value) in [
            ("arrival_min", arrival_min),
            ("departure_min", departure_min),
        ] {
            if !(0.0..=1440.0).contains(&value) {
                return Err(Error::OutOfRange { line, field, value });
            }
        }
        if arrival_min > departure_min {
            return Err(Error::Malformed {
                line,
                message: format!("arrival {arrival_min} after departure {departure_min}"),
            });
        }
        let lat: f64 = record[3].trim().parse().map_err(|_| Error::Malformed {
            line,
            message: format!("bad lat `{}`", &record[3]),
        })?;
        let lon: f64 = record[4].trim().parse().map_err(|_| Error::Malformed {
            line,
            message: format!("bad lon `{}`", &record[4]),
        })?;
        stays.push(GroundTruthStay {
            day,
            arrival_min,
            departure_min,
            latitude: check_latitude(lat, line)?,
            longitude: check_longitude(lon, line)?,
            label: record[5].trim().to_string(),
        });
    }
    Ok(stays)
}

/// Serialize ground-truth stays to CSV (inverse of [`parse_ground_truth`]).
pub fn write_ground_truth_csv<W: Write>(stays: &[GroundTruthStay], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["day", "arrival_min", "departure_min", "lat", "lon", "label"])
        .map_err(csv_io_error)?;
    for s in stays {
        w.serialize((
            s.day.to_string(),
            s.arrival_min,
            s.departure_min,
            s.latitude,
            s.longitude,
            &s.label,
        ))
        .map_err(csv_io_error)?;
    }
    w.flush()?;
    Ok(())
}
