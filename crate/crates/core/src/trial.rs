//! `trial/v1` recorded-trial files.
//!
//! A trial file is UTF-8 text with `\n` line endings:
//!
//! 1. the magic line `trial/v1`;
//! 2. one JSON object with the [`TrialMetadata`];
//! 3. a `#`-prefixed column header;
//! 4. one line per sample: `t`, then `px py pz qw qx qy qz` for every link
//!    (anchored side first), then `f_left` and `f_right` as
//!    `fx fy fz mx my mz`, then `moving` as `0` or `1`. Fields are separated
//!    by a single space and every line, including the last, ends in `\n`.
//!
//! Numbers use the shortest decimal form that parses back to the same
//! `f64`, so a write/read cycle is bit-exact. Quaternions are written with
//! `w >= 0`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::excitation::SinusoidSpec;
use crate::model::{ObjectSpec, Topology};
use crate::spatial::{Pose, Quaternion, SpatialForce, Vec3};

pub const SCHEMA: &str = "trial/v1";
const DT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSample {
    pub t: f64,
    pub poses: Vec<Pose>,
    /// Wrench measured at the anchored-side grasp, anchored link frame.
    pub f_left: SpatialForce,
    /// Wrench measured at the free-side grasp, free terminal link frame.
    pub f_right: SpatialForce,
    pub moving: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetadata {
    pub schema: String,
    pub fixture: String,
    pub object: ObjectSpec,
    pub object_hash: String,
    pub true_topology: Option<Topology>,
    pub excitation: Option<SinusoidSpec>,
    pub dt: f64,
    pub gravity: Vec3,
    pub seed: u64,
    pub link_count: usize,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub metadata: TrialMetadata,
    pub samples: Vec<TrialSample>,
}

/// Hex SHA-256 of the object's canonical JSON form.
pub fn object_hash(object: &ObjectSpec) -> String {
    let json = serde_json::to_string(object).expect("object spec serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

impl TrialRecord {
    pub fn validate(&self) -> Result<()> {
        let m = &self.metadata;
        if m.schema != SCHEMA {
            return Err(Error::SchemaVersion {
                found: m.schema.clone(),
                expected: SCHEMA.into(),
            });
        }
        if self.samples.len() < 2 {
            return Err(Error::validation(format!(
                "trial needs at least 2 samples, has {}",
                self.samples.len()
            )));
        }
        if m.sample_count != self.samples.len() {
            return Err(Error::validation(format!(
                "header declares {} samples, found {}",
                m.sample_count,
                self.samples.len()
            )));
        }
        if m.link_count != m.object.links.len() {
            return Err(Error::validation(format!(
                "header declares {} links but the object has {}",
                m.link_count,
                m.object.links.len()
            )));
        }
        if !(m.dt > 0.0) {
            return Err(Error::validation(format!("dt must be positive, got {}", m.dt)));
        }
        for (k, s) in self.samples.iter().enumerate() {
            if s.poses.len() != m.link_count {
                return Err(Error::validation(format!(
                    "sample {k} has {} poses, expected {}",
                    s.poses.len(),
                    m.link_count
                )));
            }
            let finite = s.t.is_finite()
                && s.f_left.is_finite()
                && s.f_right.is_finite()
                && s.poses.iter().all(|p| p.position.iter().all(|v| v.is_finite()));
            if !finite {
                return Err(Error::validation(format!("sample {k} has non-finite values")));
            }
        }
        for (k, pair) in self.samples.windows(2).enumerate() {
            if !(pair[1].t > pair[0].t) {
                return Err(Error::validation(format!(
                    "non-monotone time between samples {k} and {}",
                    k + 1
                )));
            }
        }
        for (k, pair) in self.samples.windows(2).enumerate() {
            let step = pair[1].t - pair[0].t;
            if (step - m.dt).abs() > DT_TOLERANCE {
                return Err(Error::validation(format!(
                    "non-uniform time step {step} at sample {k} (dt = {})",
                    m.dt
                )));
            }
        }
        Ok(())
    }

    pub fn motion_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().filter(|s| s.moving).count() as f64 / self.samples.len() as f64
    }

    /// Serializes to the `trial/v1` text form. Fails if the record is invalid.
    pub fn to_text(&self) -> Result<String> {
        self.validate()?;
        let header = serde_json::to_string(&self.metadata)
            .map_err(|e| Error::validation(format!("metadata does not serialize: {e}")))?;
        let mut out = String::with_capacity(64 + self.samples.len() * 40 * (7 * self.metadata.link_count + 14));
        out.push_str(SCHEMA);
        out.push('\n');
        out.push_str(&header);
        out.push('\n');
        out.push_str(&column_header(self.metadata.link_count));
        out.push('\n');
        for s in &self.samples {
            write!(out, "{:?}", s.t).unwrap();
            for pose in &s.poses {
                let p = pose.canonical();
                for v in p.position.iter().chain(p.orientation.wxyz().iter()) {
                    write!(out, " {v:?}").unwrap();
                }
            }
            for v in s.f_left.to_array().iter().chain(s.f_right.to_array().iter()) {
                write!(out, " {v:?}").unwrap();
            }
            out.push_str(if s.moving { " 1\n" } else { " 0\n" });
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = LineCursor::new(text);

        let (line_no, offset, magic) = lines.next_line()?.ok_or_else(|| Error::Parse {
            line: 1,
            offset: 0,
            message: "empty file".into(),
        })?;
        if magic != SCHEMA {
            if magic.starts_with("trial/") {
                return Err(Error::SchemaVersion {
                    found: magic.to_string(),
                    expected: SCHEMA.into(),
                });
            }
            return Err(Error::Parse {
                line: line_no,
                offset,
                message: format!("expected {SCHEMA:?} magic line"),
            });
        }

        let (line_no, offset, header) = lines.expect_line("metadata header")?;
        let metadata: TrialMetadata = serde_json::from_str(header).map_err(|e| Error::Parse {
            line: line_no,
            offset: offset + e.column().saturating_sub(1),
            message: format!("bad metadata: {e}"),
        })?;
        if metadata.schema != SCHEMA {
            return Err(Error::SchemaVersion {
                found: metadata.schema,
                expected: SCHEMA.into(),
            });
        }

        let (line_no, offset, columns) = lines.expect_line("column header")?;
        if columns != column_header(metadata.link_count) {
            return Err(Error::Parse {
                line: line_no,
                offset,
                message: format!("column header does not match {} links", metadata.link_count),
            });
        }

        let width = 1 + 7 * metadata.link_count + 12 + 1;
        let mut samples = Vec::with_capacity(metadata.sample_count);
        while let Some((line_no, offset, line)) = lines.next_line()? {
            samples.push(parse_sample(line, line_no, offset, width, metadata.link_count)?);
        }
        if samples.len() != metadata.sample_count {
            return Err(Error::Parse {
                line: lines.line_no + 1,
                offset: text.len(),
                message: format!(
                    "file ends after {} samples, header declares {}",
                    samples.len(),
                    metadata.sample_count
                ),
            });
        }
        let record = TrialRecord { metadata, samples };
        record.validate()?;
        Ok(record)
    }
}

pub fn write_trial(record: &TrialRecord, path: &Path) -> Result<()> {
    let text = record.to_text()?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_trial(path: &Path) -> Result<TrialRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TrialRecord::from_text(&text)
}

fn column_header(links: usize) -> String {
    let mut h = String::from("# t");
    for i in 0..links {
        for c in ["px", "py", "pz", "qw", "qx", "qy", "qz"] {
            write!(h, " l{i}.{c}").unwrap();
        }
    }
    for side in ["left", "right"] {
        for c in ["fx", "fy", "fz", "mx", "my", "mz"] {
            write!(h, " {side}.{c}").unwrap();
        }
    }
    h.push_str(" moving");
    h
}

fn parse_sample(line: &str, line_no: usize, offset: usize, width: usize, links: usize) -> Result<TrialSample> {
    let err = |col: usize, message: String| Error::Parse {
        line: line_no,
        offset: offset + col,
        message,
    };
    let mut values = Vec::with_capacity(width);
    let mut col = 0;
    for field in line.split(' ') {
        values.push((col, field));
        col += field.len() + 1;
    }
    if values.len() != width {
        return Err(err(0, format!("expected {width} fields, found {}", values.len())));
    }
    let num = |i: usize| -> Result<f64> {
        let (c, s) = values[i];
        s.parse::<f64>()
            .map_err(|_| err(c, format!("field {} is not a number: {s:?}", i + 1)))
    };
    let t = num(0)?;
    let mut poses = Vec::with_capacity(links);
    for l in 0..links {
        let b = 1 + 7 * l;
        let position = Vec3::new(num(b)?, num(b + 1)?, num(b + 2)?);
        let orientation = Quaternion::from_stored(num(b + 3)?, num(b + 4)?, num(b + 5)?, num(b + 6)?)
            .map_err(|e| err(values[b + 3].0, e.to_string()))?;
        poses.push(Pose::new(position, orientation));
    }
    let w = 1 + 7 * links;
    let mut wrench = [0.0; 12];
    for (i, v) in wrench.iter_mut().enumerate() {
        *v = num(w + i)?;
    }
    let moving = match values[width - 1].1 {
        "0" => false,
        "1" => true,
        other => return Err(err(values[width - 1].0, format!("moving flag must be 0 or 1, got {other:?}"))),
    };
    Ok(TrialSample {
        t,
        poses,
        f_left: SpatialForce::from_array(wrench[..6].try_into().unwrap()),
        f_right: SpatialForce::from_array(wrench[6..].try_into().unwrap()),
        moving,
    })
}

struct LineCursor<'a> {
    text: &'a str,
    pos: usize,
    line_no: usize,
}

impl<'a> LineCursor<'a> {
    fn new(text: &'a str) -> Self {
        LineCursor { text, pos: 0, line_no: 0 }
    }

    /// Next complete line as `(line number, byte offset, content)`. A final
    /// line without its newline is reported as truncated.
    fn next_line(&mut self) -> Result<Option<(usize, usize, &'a str)>> {
        if self.pos >= self.text.len() {
            return Ok(None);
        }
        let start = self.pos;
        self.line_no += 1;
        match self.text[start..].find('\n') {
            Some(rel) => {
                self.pos = start + rel + 1;
                Ok(Some((self.line_no, start, &self.text[start..start + rel])))
            }
            None => Err(Error::Parse {
                line: self.line_no,
                offset: start,
                message: format!("truncated record: line ends at byte {} without a newline", self.text.len()),
            }),
        }
    }

    fn expect_line(&mut self, what: &str) -> Result<(usize, usize, &'a str)> {
        let (line, offset) = (self.line_no + 1, self.pos);
        self.next_line()?.ok_or_else(|| Error::Parse {
            line,
            offset,
            message: format!("missing {what}"),
        })
    }
}
