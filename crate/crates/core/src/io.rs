//! CSV and JSON serialization. JSON floats are written with 17 significant
//! digits so that repeated runs produce byte-identical files.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::functionals::{Curve, Curve3};
use crate::potential::Vec2;

#[derive(Clone, Copy, Debug, Default)]
pub struct FixedFloatFormatter;

impl Formatter for FixedFloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloatFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// Writes rows of numbers under a header using the shortest round-trip format.
pub fn write_csv_rows<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header)?;
    for row in rows {
        wr.write_record(row.iter().map(|x| x.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_curve_csv<W: Write>(w: W, curve: &Curve) -> Result<()> {
    write_csv_rows(w, &["p1", "p2"], curve.vertices().iter().map(|p| vec![p.x, p.y]))
}

pub fn write_curve3_csv<W: Write>(w: W, curve: &Curve3) -> Result<()> {
    write_csv_rows(w, &["p1", "p2", "p3"], curve.vertices().iter().map(|p| vec![p.x, p.y, p.z]))
}

pub fn save_curve_csv(path: &Path, curve: &Curve) -> Result<()> {
    write_curve_csv(fs::File::create(path)?, curve)
}

fn parse_points_csv(text: &str) -> Result<Vec<Vec2>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rd.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "p1" || &headers[1] != "p2" {
        return Err(Error::Parse(format!("expected header p1,p2 (got {:?})", headers)));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let x: f64 = rec[0].parse().map_err(|e| Error::Parse(format!("{e}")))?;
        let y: f64 = rec[1].parse().map_err(|e| Error::Parse(format!("{e}")))?;
        out.push(Vec2::new(x, y));
    }
    Ok(out)
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum CurveJson {
    Points(Vec<[f64; 2]>),
    Tagged { vertices: Vec<[f64; 2]>, #[serde(default)] closed: bool },
}

pub fn curve_to_json(curve: &Curve) -> Result<String> {
    let pts: Vec<[f64; 2]> = curve.vertices().iter().map(|p| [p.x, p.y]).collect();
    if curve.is_closed() {
        to_json_string(&serde_json::json!({ "vertices": pts, "closed": true }))
    } else {
        to_json_string(&pts)
    }
}

/// Parses a curve from either CSV (`p1,p2` header) or JSON (array of pairs,
/// or `{"vertices": [...], "closed": bool}`).
pub fn parse_curve(text: &str) -> Result<Curve> {
    let t = text.trim_start();
    if t.starts_with('[') || t.starts_with('{') {
        match serde_json::from_str::<CurveJson>(t)? {
            CurveJson::Points(v) => Curve::open(v.iter().map(|p| Vec2::new(p[0], p[1])).collect()),
            CurveJson::Tagged { vertices, closed } => {
                Curve::new(vertices.iter().map(|p| Vec2::new(p[0], p[1])).collect(), closed)
            }
        }
    } else {
        Curve::open(parse_points_csv(t)?)
    }
}

pub fn load_curve(path: &Path) -> Result<Curve> {
    parse_curve(&fs::read_to_string(path)?)
}
