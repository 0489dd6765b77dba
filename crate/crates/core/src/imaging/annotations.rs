use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BoundingBox;
use crate::error::{Error, Result};

/// One labelled box on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub frame: u64,
    pub bbox: BoundingBox,
    /// Confidence in `[0, 1]`; `None` for ground truth.
    pub score: Option<f64>,
    pub label: String,
}

impl Annotation {
    pub fn new(frame: u64, bbox: BoundingBox, score: Option<f64>, label: impl Into<String>) -> Result<Self> {
        if let Some(s) = score {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidConfig(format!("score {s} outside [0, 1]")));
            }
        }
        Ok(Self {
            frame,
            bbox,
            score,
            label: label.into(),
        })
    }

    pub fn ground_truth(frame: u64, bbox: BoundingBox) -> Self {
        Self {
            frame,
            bbox,
            score: None,
            label: "drone".into(),
        }
    }
}

/// Flat wire form: `{"frame","x","y","w","h","score","label"}`.
#[derive(Serialize, Deserialize)]
struct Record {
    frame: u64,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    score: Option<f64>,
    label: String,
}

impl From<&Annotation> for Record {
    fn from(a: &Annotation) -> Self {
        Record {
            frame: a.frame,
            x: a.bbox.x(),
            y: a.bbox.y(),
            w: a.bbox.w(),
            h: a.bbox.h(),
            score: a.score,
            label: a.label.clone(),
        }
    }
}

impl Annotation {
    /// Single JSON line, without the trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&Record::from(self)).expect("annotation record serialises")
    }

    pub fn from_json_line(line: &str) -> std::result::Result<Self, String> {
        let r: Record = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let bbox = BoundingBox::new(r.x, r.y, r.w, r.h).map_err(|e| e.to_string())?;
        Annotation::new(r.frame, bbox, r.score, r.label).map_err(|e| e.to_string())
    }
}

/// Parses a JSON Lines annotation file. Blank lines are ignored.
pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<Annotation>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            Annotation::from_json_line(l).map_err(|message| Error::Annotation {
                line: i + 1,
                message,
            })
        })
        .collect()
}

pub fn write_annotations(path: impl AsRef<Path>, annotations: &[Annotation]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    for a in annotations {
        buf.extend_from_slice(a.to_json_line().as_bytes());
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_score_round_trips() {
        let a = Annotation::ground_truth(3, BoundingBox::new(1.5, 2.0, 3.0, 4.25).unwrap());
        let line = a.to_json_line();
        assert_eq!(
            line,
            r#"{"frame":3,"x":1.5,"y":2.0,"w":3.0,"h":4.25,"score":null,"label":"drone"}"#
        );
        assert_eq!(Annotation::from_json_line(&line).unwrap(), a);
    }

    #[test]
    fn out_of_range_score_rejected() {
        let line = r#"{"frame":0,"x":0,"y":0,"w":1,"h":1,"score":1.5,"label":"drone"}"#;
        assert!(Annotation::from_json_line(line).is_err());
        let line = r#"{"frame":0,"x":0,"y":0,"w":0,"h":1,"score":null,"label":"drone"}"#;
        assert!(Annotation::from_json_line(line).is_err());
    }

    #[test]
    fn file_round_trip_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.jsonl");
        let anns = vec![
            Annotation::new(0, BoundingBox::new(0.0, 0.0, 2.0, 2.0).unwrap(), Some(0.25), "drone").unwrap(),
            Annotation::ground_truth(1, BoundingBox::new(1.0, 1.0, 2.0, 2.0).unwrap()),
        ];
        write_annotations(&p, &anns).unwrap();
        assert_eq!(read_annotations(&p).unwrap(), anns);

        fs::write(&p, "{\"frame\":0,\"x\":0,\"y\":0,\"w\":1,\"h\":1,\"score\":null,\"label\":\"d\"}\nnot json\n").unwrap();
        match read_annotations(&p) {
            Err(Error::Annotation { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
