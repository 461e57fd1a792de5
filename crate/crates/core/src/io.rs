//! File formats: diagram CSV, measure JSON, point cloud and distance matrix
//! CSV, and PGM images.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{BirthDeathPoint, MetricConfig, PersistenceDiagram, PersistenceMeasure};
use crate::persistence::{DistanceMatrix, GrayImage};
use crate::sampling::PointCloud;

#[derive(Serialize, Deserialize)]
struct DiagramRow {
    birth: f64,
    death: f64,
}

/// Writes `birth,death` rows under a header line.
pub fn write_diagram<W: Write>(writer: W, diagram: &PersistenceDiagram) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if diagram.is_empty() {
        w.write_record(["birth", "death"])?;
    }
    for p in diagram.iter() {
        w.serialize(DiagramRow {
            birth: p.birth(),
            death: p.death(),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_diagram<R: Read>(reader: R) -> Result<PersistenceDiagram> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let points = r
        .deserialize::<DiagramRow>()
        .map(|row| {
            let row = row?;
            BirthDeathPoint::new(row.birth, row.death)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PersistenceDiagram::new(points))
}

pub fn save_diagram(path: &Path, diagram: &PersistenceDiagram) -> Result<()> {
    write_diagram(BufWriter::new(File::create(path)?), diagram)
}

pub fn load_diagram(path: &Path) -> Result<PersistenceDiagram> {
    read_diagram(BufReader::new(File::open(path)?))
}

/// On-disk measure: its atoms plus the exponent of the ground metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    #[serde(flatten)]
    pub measure: PersistenceMeasure,
    #[serde(default)]
    pub q: MetricConfig,
}

pub fn load_measure(path: &Path) -> Result<MeasureFile> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn save_measure(path: &Path, measure: &PersistenceMeasure, q: MetricConfig) -> Result<()> {
    let file = MeasureFile {
        measure: measure.clone(),
        q,
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

fn write_rows<W: Write, I: IntoIterator<Item = Vec<f64>>>(writer: W, rows: I) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    r.records()
        .map(|rec| {
            rec?.iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("{f:?}: {e}"))))
                .collect()
        })
        .collect()
}

/// One point per row, no header.
pub fn write_point_cloud<W: Write>(writer: W, pc: &PointCloud) -> Result<()> {
    write_rows(writer, pc.points().iter().cloned())
}

pub fn read_point_cloud<R: Read>(reader: R) -> Result<PointCloud> {
    let rows = read_rows(reader)?;
    let dim = rows.first().map_or(0, Vec::len);
    PointCloud::new(dim, rows)
}

pub fn save_point_cloud(path: &Path, pc: &PointCloud) -> Result<()> {
    write_point_cloud(BufWriter::new(File::create(path)?), pc)
}

pub fn load_point_cloud(path: &Path) -> Result<PointCloud> {
    read_point_cloud(BufReader::new(File::open(path)?))
}

/// `n` rows of `n` entries, no header.
pub fn write_distance_matrix<W: Write>(writer: W, dm: &DistanceMatrix) -> Result<()> {
    write_rows(writer, (0..dm.len()).map(|i| dm.row(i).to_vec()))
}

pub fn read_distance_matrix<R: Read>(reader: R) -> Result<DistanceMatrix> {
    DistanceMatrix::from_rows(&read_rows(reader)?)
}

pub fn load_distance_matrix(path: &Path) -> Result<DistanceMatrix> {
    read_distance_matrix(BufReader::new(File::open(path)?))
}

/// Splits the ASCII header of a PNM file into tokens, skipping `#` comments,
/// and returns them with the offset of the first byte after the header's
/// final whitespace character.
fn pnm_header(bytes: &[u8], wanted: usize) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < wanted {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(Error::InvalidImage("truncated PGM header".into()));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    Ok((tokens, i + 1))
}

/// Parses a P2 (ASCII) or P5 (binary) PGM. Pixel values are kept on the
/// file's own scale `[0, maxval]`.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    parse_pgm_with_maxval(bytes).map(|(img, _)| img)
}

/// Like [`parse_pgm`], with intensities divided by `maxval` into `[0, 1]`.
pub fn parse_pgm_unit(bytes: &[u8]) -> Result<GrayImage> {
    let (img, maxval) = parse_pgm_with_maxval(bytes)?;
    let scale = maxval as f64;
    GrayImage::new(
        img.width(),
        img.height(),
        img.pixels().iter().map(|v| v / scale).collect(),
    )
}

fn parse_pgm_with_maxval(bytes: &[u8]) -> Result<(GrayImage, usize)> {
    let (header, offset) = pnm_header(bytes, 4)?;
    let num = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::InvalidImage(format!("bad header field {s:?}")))
    };
    let (width, height, maxval) = (num(&header[1])?, num(&header[2])?, num(&header[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(Error::InvalidImage(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width * height;
    let pixels: Vec<f64> = match header[0].as_str() {
        "P2" => {
            let body = String::from_utf8_lossy(bytes.get(offset..).unwrap_or(&[]));
            let values = body
                .split_whitespace()
                .take(count)
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::InvalidImage(format!("bad pixel {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            values
        }
        "P5" => {
            let body = bytes.get(offset..).unwrap_or(&[]);
            if maxval < 256 {
                body.iter().take(count).map(|&b| b as f64).collect()
            } else {
                body.chunks_exact(2)
                    .take(count)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
                    .collect()
            }
        }
        other => return Err(Error::InvalidImage(format!("unsupported magic {other:?}"))),
    };
    if pixels.len() != count {
        return Err(Error::InvalidImage(format!(
            "expected {count} pixels, found {}",
            pixels.len()
        )));
    }
    if let Some(v) = pixels.iter().find(|&&v| v > maxval as f64) {
        return Err(Error::InvalidImage(format!("pixel {v} exceeds maxval {maxval}")));
    }
    Ok((GrayImage::new(width, height, pixels)?, maxval))
}

pub fn load_pgm(path: &Path) -> Result<GrayImage> {
    parse_pgm(&std::fs::read(path)?)
}

pub fn load_pgm_unit(path: &Path) -> Result<GrayImage> {
    parse_pgm_unit(&std::fs::read(path)?)
}

/// Writes a binary P5 image, rounding and clamping pixels into `[0, maxval]`.
pub fn write_pgm<W: Write>(mut writer: W, img: &GrayImage, maxval: u16) -> Result<()> {
    write!(writer, "P5\n{} {}\n{}\n", img.width(), img.height(), maxval)?;
    let clamp = |v: f64| v.round().clamp(0.0, maxval as f64) as u16;
    if maxval < 256 {
        let bytes: Vec<u8> = img.pixels().iter().map(|&v| clamp(v) as u8).collect();
        writer.write_all(&bytes)?;
    } else {
        for &v in img.pixels() {
            writer.write_all(&clamp(v).to_be_bytes())?;
        }
    }
    writer.flush()?;
    Ok(())
}
