//! JSON-lines detection streams.
//!
//! One detection per line:
//!
//! ```json
//! {"sensor":"S2","x":12.31,"y":40.02,"pi":0.83,"rxx":0.167,"rxy":0.0,"ryy":0.167,"truth":{"kind":"object","id":17}}
//! ```
//!
//! `truth` is optional (`{"kind":"clutter"}` for false alarms, absent for
//! unlabeled field data). Unknown fields are ignored, field order is
//! free. Readers report the 1-based line number of the first malformed or
//! invalid record; writers emit records that parse back bit-identically.

use crate::error::{Error, Result};
use crate::math::{Mat2, Vec2};
use crate::types::{Detection, Truth};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Wire form of one stream line.
#[derive(Debug, Serialize, Deserialize)]
struct DetectionRecord {
    sensor: String,
    x: f64,
    y: f64,
    pi: f64,
    rxx: f64,
    rxy: f64,
    ryy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truth: Option<Truth>,
}

impl From<&Detection> for DetectionRecord {
    fn from(d: &Detection) -> Self {
        DetectionRecord {
            sensor: d.sensor.clone(),
            x: d.z.x,
            y: d.z.y,
            pi: d.pi,
            rxx: d.r.m00,
            rxy: d.r.m01,
            ryy: d.r.m11,
            truth: d.truth,
        }
    }
}

impl From<DetectionRecord> for Detection {
    fn from(r: DetectionRecord) -> Self {
        Detection {
            sensor: r.sensor,
            z: Vec2::new(r.x, r.y),
            pi: r.pi,
            r: Mat2::symmetric(r.rxx, r.rxy, r.ryy),
            truth: r.truth,
        }
    }
}

/// Streaming reader that parses and validates one detection per line.
pub struct DetectionReader<R> {
    reader: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> DetectionReader<R> {
    pub fn new(reader: R) -> Self {
        DetectionReader { reader, line: 0, buf: String::new() }
    }

    fn next_detection(&mut self) -> Result<Option<Detection>> {
        loop {
            self.buf.clear();
            let n = self
                .reader
                .read_line(&mut self.buf)
                .map_err(|e| Error::MalformedStream { line: self.line + 1, message: e.to_string() })?;
            if n == 0 {
                return Ok(None);
            }
            self.line += 1;
            let text = self.buf.trim();
            if text.is_empty() {
                continue; // tolerate blank lines, including a trailing one
            }
            let record: DetectionRecord = serde_json::from_str(text)
                .map_err(|e| Error::MalformedStream { line: self.line, message: e.to_string() })?;
            let det: Detection = record.into();
            det.validate().map_err(|e| Error::MalformedStream {
                line: self.line,
                message: e.to_string(),
            })?;
            return Ok(Some(det));
        }
    }
}

impl<R: BufRead> Iterator for DetectionReader<R> {
    type Item = Result<Detection>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_detection().transpose()
    }
}

/// Read and validate an entire stream.
pub fn read_detections<R: BufRead>(reader: R) -> Result<Vec<Detection>> {
    DetectionReader::new(reader).collect()
}

/// Read and validate a `.jsonl` file.
pub fn read_detections_path(path: &Path) -> Result<Vec<Detection>> {
    let file = File::open(path).map_err(|e| Error::MalformedStream {
        line: 0,
        message: format!("cannot open {}: {e}", path.display()),
    })?;
    read_detections(BufReader::new(file))
}

/// Write detections, one JSON object per line.
pub fn write_detections<W: Write>(mut writer: W, detections: &[Detection]) -> Result<()> {
    for d in detections {
        let record = DetectionRecord::from(d);
        let line = serde_json::to_string(&record)
            .map_err(|e| Error::Internal(format!("serializing detection: {e}")))?;
        writeln!(writer, "{line}")
            .map_err(|e| Error::Internal(format!("writing detection stream: {e}")))?;
    }
    Ok(())
}

/// Write detections to a `.jsonl` file.
pub fn write_detections_path(path: &Path, detections: &[Detection]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Internal(format!(
        "cannot create {}: {e}",
        path.display()
    )))?;
    let mut writer = BufWriter::new(file);
    write_detections(&mut writer, detections)?;
    writer.flush().map_err(|e| Error::Internal(format!("flushing {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn sample() -> Vec<Detection> {
        vec![
            Detection {
                sensor: "S2".into(),
                z: Vec2::new(12.31, 40.02),
                pi: 0.83,
                r: Mat2::scaled_identity(0.167),
                truth: Some(Truth::Object { id: 17 }),
            },
            Detection {
                sensor: "S1".into(),
                z: Vec2::new(-3.0, 0.5),
                pi: 1.0,
                r: Mat2::scaled_identity(0.015),
                truth: Some(Truth::Clutter),
            },
            Detection {
                sensor: "field".into(),
                z: Vec2::new(0.125, 7.5),
                pi: 0.5,
                r: Mat2::symmetric(0.376, 0.01, 0.376),
                truth: None,
            },
        ]
    }

    #[test]
    fn roundtrip_is_lossless() {
        let dets = sample();
        let mut buf = Vec::new();
        write_detections(&mut buf, &dets).unwrap();
        let back = read_detections(Cursor::new(&buf)).unwrap();
        assert_eq!(back, dets);

        // Byte-stable on rewrite.
        let mut buf2 = Vec::new();
        write_detections(&mut buf2, &back).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn accepts_unknown_fields_and_any_order() {
        let line = r#"{"extra":true,"pi":0.9,"y":2.0,"x":1.0,"ryy":0.1,"rxy":0.0,"rxx":0.1,"sensor":"S3","note":"ignored"}"#;
        let dets = read_detections(Cursor::new(line)).unwrap();
        assert_eq!(dets.len(), 1);
        assert_eq!(dets[0].sensor, "S3");
        assert_eq!(dets[0].truth, None);
    }

    #[test]
    fn truth_clutter_parses() {
        let line = r#"{"sensor":"S5","x":0,"y":0,"pi":0.4,"rxx":1,"rxy":0,"ryy":1,"truth":{"kind":"clutter"}}"#;
        let dets = read_detections(Cursor::new(line)).unwrap();
        assert_eq!(dets[0].truth, Some(Truth::Clutter));
    }

    #[test]
    fn malformed_line_is_numbered() {
        let text = "{\"sensor\":\"S1\",\"x\":0,\"y\":0,\"pi\":1,\"rxx\":1,\"rxy\":0,\"ryy\":1}\nnot json\n";
        let err = read_detections(Cursor::new(text)).unwrap_err();
        match err {
            Error::MalformedStream { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn invalid_values_are_numbered_too() {
        let text = concat!(
            "{\"sensor\":\"S1\",\"x\":0,\"y\":0,\"pi\":1,\"rxx\":1,\"rxy\":0,\"ryy\":1}\n",
            "{\"sensor\":\"S1\",\"x\":0,\"y\":0,\"pi\":1.5,\"rxx\":1,\"rxy\":0,\"ryy\":1}\n",
        );
        let err = read_detections(Cursor::new(text)).unwrap_err();
        match err {
            Error::MalformedStream { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("confidence"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn blank_lines_are_skipped() {
        let text = "\n{\"sensor\":\"S1\",\"x\":0,\"y\":0,\"pi\":1,\"rxx\":1,\"rxy\":0,\"ryy\":1}\n\n";
        let dets = read_detections(Cursor::new(text)).unwrap();
        assert_eq!(dets.len(), 1);
    }
}
