//! Deterministic text output and the flux-table CSV format.
//!
//! Every float written by this crate goes through [`fmt_f64`], which prints
//! 17 significant digits so identical inputs give byte-identical files and
//! values read back are bit-exact.

use crate::approx::{GhostRule, SplineFlux};
use crate::models::PlfFluxTable;
use crate::{Error, Result};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use std::io::{self, Read, Write};

/// Scientific notation with 17 significant digits; non-finite values print
/// as `NaN`, `inf` and `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with fixed-width floats. Non-finite floats become `null`.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::Invalid(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    write_json(&mut buf, value)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_flux_table_csv<W: Write>(out: W, table: &PlfFluxTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Invalid(e.to_string());
    w.write_record(["phi0", "f", "g"]).map_err(err)?;
    for i in 0..table.phi0.len() {
        w.write_record([fmt_f64(table.phi0[i]), fmt_f64(table.f[i]), fmt_f64(table.g[i])]).map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `phi0,f,g` rows. The grid must start at 0, be uniform to 1e-9
/// relative and have at least five nodes so a spline can be built on it.
pub fn read_flux_table_csv<R: Read>(input: R) -> Result<PlfFluxTable> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rd.headers().map_err(|e| Error::Invalid(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["phi0", "f", "g"] {
        return Err(Error::Invalid(format!("flux table header must be phi0,f,g, got {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut table = PlfFluxTable { phi0: Vec::new(), f: Vec::new(), g: Vec::new(), flagged: Vec::new() };
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Error::Invalid(e.to_string()))?;
        if rec.len() != 3 {
            return Err(Error::Invalid(format!("row {}: expected 3 fields", line + 1)));
        }
        let mut vals = [0.0; 3];
        for (k, field) in rec.iter().enumerate() {
            vals[k] = field
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Invalid(format!("row {}: bad number {field:?}", line + 1)))?;
        }
        table.phi0.push(vals[0]);
        table.f.push(vals[1]);
        table.g.push(vals[2]);
    }
    validate_grid(&table.phi0)?;
    Ok(table)
}

fn validate_grid(phi0: &[f64]) -> Result<()> {
    if phi0.len() < 5 {
        return Err(Error::Invalid(format!("flux table needs at least 5 rows, got {}", phi0.len())));
    }
    let n = phi0.len() - 1;
    let (lo, hi) = (phi0[0], phi0[n]);
    if lo != 0.0 || !(hi > 0.0) {
        return Err(Error::Invalid("flux table grid must run from 0 to a positive phi_m".into()));
    }
    let h = hi / n as f64;
    for (i, &x) in phi0.iter().enumerate() {
        if (x - i as f64 * h).abs() > 1e-9 * hi {
            return Err(Error::Invalid(format!("flux table grid is not uniform at row {}", i + 1)));
        }
    }
    Ok(())
}

/// Spline closures for `f` and `g` over the table grid.
pub fn table_splines(table: &PlfFluxTable, rule: GhostRule) -> Result<(SplineFlux, SplineFlux)> {
    validate_grid(&table.phi0)?;
    table.splines(rule)
}
