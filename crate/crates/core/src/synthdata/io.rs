//! Dataset files: CSV tables and numbered PPM frame directories.
//!
//! Layout of a dataset root:
//! `<root>/<seq>/frames/000001.ppm ...`, `<root>/<seq>/gt.csv` and optional
//! detection caches `<root>/<seq>/det_<seed>.csv`.

use std::path::{Path, PathBuf};

use super::{GroundtruthTable, GtRow, Sequence};
use crate::featmap::{pnm, Image};
use crate::geometry::{BoundingBox, Rect};
use crate::{Error, Result};

pub const GT_HEADER: [&str; 7] = ["frame_id", "object_id", "class_id", "x", "y", "w", "h"];
pub const BOX_HEADER: [&str; 8] = ["frame_id", "object_id", "class_id", "x", "y", "w", "h", "score"];

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), line, msg: msg.into() }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    parse_err(path, line, e.to_string())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str, path: &Path, line: u64) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| parse_err(path, line, format!("missing column {}", name)))?;
    raw.trim().parse().map_err(|_| parse_err(path, line, format!("bad {} {:?}", name, raw)))
}

fn read_table(path: &Path, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => parse_err(path, 1, format!("{:?}", other)),
    })?;
    let found = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if found.iter().map(str::trim).ne(header.iter().copied()) {
        return Err(parse_err(path, 1, format!("expected header {}", header.join(","))));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(parse_err(path, line, format!("expected {} columns, found {}", header.len(), rec.len())));
        }
        rows.push((line, rec));
    }
    Ok(rows)
}

fn parse_rect(rec: &csv::StringRecord, path: &Path, line: u64) -> Result<Rect> {
    let x = field(rec, 3, "x", path, line)?;
    let y = field(rec, 4, "y", path, line)?;
    let w = field(rec, 5, "w", path, line)?;
    let h = field(rec, 6, "h", path, line)?;
    Rect::new(x, y, w, h).map_err(|e| parse_err(path, line, e.to_string()))
}

pub fn write_groundtruth(path: &Path, table: &GroundtruthTable) -> Result<()> {
    let mut rows = table.rows.clone();
    rows.sort_by_key(|r| (r.frame_id, r.object_id));
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(GT_HEADER).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            r.frame_id.to_string(),
            r.object_id.to_string(),
            r.class_id.to_string(),
            r.rect.x.to_string(),
            r.rect.y.to_string(),
            r.rect.w.to_string(),
            r.rect.h.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_groundtruth(path: &Path) -> Result<GroundtruthTable> {
    let mut rows = Vec::new();
    for (line, rec) in read_table(path, &GT_HEADER)? {
        rows.push(GtRow {
            frame_id: field(&rec, 0, "frame_id", path, line)?,
            object_id: field(&rec, 1, "object_id", path, line)?,
            class_id: field(&rec, 2, "class_id", path, line)?,
            rect: parse_rect(&rec, path, line)?,
        });
    }
    let table = GroundtruthTable::new(rows);
    if let Some(w) = table.rows.windows(2).find(|w| (w[0].frame_id, w[0].object_id) == (w[1].frame_id, w[1].object_id)) {
        return Err(parse_err(path, 0, format!("duplicate object {} in frame {}", w[0].object_id, w[0].frame_id)));
    }
    Ok(table)
}

/// Writes boxes sorted by frame then id. Boxes without an id leave the
/// `object_id` column empty.
pub fn write_boxes(path: &Path, boxes: &[BoundingBox]) -> Result<()> {
    let mut sorted = boxes.to_vec();
    sorted.sort_by_key(|b| (b.fid, b.id));
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(BOX_HEADER).map_err(|e| csv_err(path, e))?;
    for b in sorted {
        w.write_record([
            b.fid.to_string(),
            b.id.map(|i| i.to_string()).unwrap_or_default(),
            b.class_id.to_string(),
            b.rect.x.to_string(),
            b.rect.y.to_string(),
            b.rect.w.to_string(),
            b.rect.h.to_string(),
            b.score.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_boxes(path: &Path) -> Result<Vec<BoundingBox>> {
    let mut boxes = Vec::new();
    for (line, rec) in read_table(path, &BOX_HEADER)? {
        let id = match rec.get(1).map(str::trim) {
            Some("") | None => None,
            Some(_) => Some(field(&rec, 1, "object_id", path, line)?),
        };
        let score: f64 = field(&rec, 7, "score", path, line)?;
        if !(0.0..=1.0).contains(&score) {
            return Err(parse_err(path, line, format!("score {} outside [0, 1]", score)));
        }
        boxes.push(BoundingBox {
            rect: parse_rect(&rec, path, line)?,
            fid: field(&rec, 0, "frame_id", path, line)?,
            score,
            id,
            class_id: field(&rec, 2, "class_id", path, line)?,
        });
    }
    Ok(boxes)
}

pub fn frame_path(dir: &Path, frame_id: u32) -> PathBuf {
    dir.join(format!("{:06}.ppm", frame_id))
}

/// Writes `000001.ppm`, `000002.ppm`, ... (PGM for single-channel frames,
/// still under the `.ppm` name pattern's numbering).
pub fn write_frames(dir: &Path, frames: &[Image]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (i, img) in frames.iter().enumerate() {
        let name = if img.channels() == 1 { format!("{:06}.pgm", i + 1) } else { format!("{:06}.ppm", i + 1) };
        pnm::write(&dir.join(name), img)?;
    }
    Ok(())
}

/// Reads a numbered frame directory. Numbering must start at 1 without gaps.
pub fn read_frames(dir: &Path) -> Result<Vec<Image>> {
    let mut numbered = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let (Some(stem), Some(ext)) = (path.file_stem().and_then(|s| s.to_str()), path.extension().and_then(|s| s.to_str())) else {
            continue;
        };
        if (ext == "ppm" || ext == "pgm") && stem.len() == 6 {
            if let Ok(n) = stem.parse::<u32>() {
                numbered.push((n, path));
            }
        }
    }
    numbered.sort();
    let mut frames = Vec::with_capacity(numbered.len());
    for (k, (n, path)) in numbered.iter().enumerate() {
        let expected = k as u32 + 1;
        if *n != expected {
            return Err(Error::MissingFrame { dir: dir.to_path_buf(), frame: expected });
        }
        frames.push(pnm::read(path)?);
    }
    if frames.is_empty() {
        return Err(Error::MissingFrame { dir: dir.to_path_buf(), frame: 1 });
    }
    Ok(frames)
}

/// One sequence directory read back from disk.
#[derive(Clone, Debug)]
pub struct LoadedSequence {
    pub name: String,
    pub frames: Vec<Image>,
    pub gt: Option<GroundtruthTable>,
}

pub fn save_sequence(root: &Path, name: &str, seq: &Sequence) -> Result<()> {
    let dir = root.join(name);
    write_frames(&dir.join("frames"), &seq.frames)?;
    write_groundtruth(&dir.join("gt.csv"), &seq.gt)
}

pub fn load_sequence(dir: &Path) -> Result<LoadedSequence> {
    let frames = read_frames(&dir.join("frames"))?;
    let gt_path = dir.join("gt.csv");
    let gt = if gt_path.exists() { Some(read_groundtruth(&gt_path)?) } else { None };
    let name = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(LoadedSequence { name, frames, gt })
}

/// Names of the sequence directories (those holding a `frames/` subdirectory), sorted.
pub fn list_sequences(root: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(root)? {
        let entry = entry?;
        if entry.path().join("frames").is_dir() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}
