//! Raster model, ESRI ASCII grid I/O and legend handling.
//!
//! Cells are stored row-major with the north row first, exactly as they
//! appear in an `.asc` file. Missing cells carry the header's
//! `nodata_value`; every operation treats nodata as absorbing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Corner and cell-size tolerance used by [`assert_aligned`], in map units.
pub const ALIGN_TOLERANCE: f64 = 1e-9;

/// Nodata value assumed when a grid omits the `NODATA_value` line.
pub const DEFAULT_NODATA: f64 = -9999.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub ncols: usize,
    pub nrows: usize,
    pub xllcorner: f64,
    pub yllcorner: f64,
    pub cellsize: f64,
    pub nodata_value: f64,
}

impl GridHeader {
    pub fn new(
        ncols: usize,
        nrows: usize,
        xllcorner: f64,
        yllcorner: f64,
        cellsize: f64,
        nodata_value: f64,
    ) -> Result<Self> {
        let header = GridHeader {
            ncols,
            nrows,
            xllcorner,
            yllcorner,
            cellsize,
            nodata_value,
        };
        header.validate()?;
        Ok(header)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ncols == 0 || self.nrows == 0 {
            return Err(Error::invalid("grid header", "ncols and nrows must be at least 1"));
        }
        if !(self.cellsize.is_finite() && self.cellsize > 0.0) {
            return Err(Error::invalid("grid header", "cellsize must be positive"));
        }
        if !(self.xllcorner.is_finite() && self.yllcorner.is_finite()) {
            return Err(Error::invalid("grid header", "corner coordinates must be finite"));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.ncols * self.nrows
    }

    /// Area of one cell in hectares, assuming a cellsize in metres.
    pub fn cell_hectares(&self) -> f64 {
        self.cellsize * self.cellsize / 10_000.0
    }

    pub fn is_nodata(&self, v: f64) -> bool {
        v == self.nodata_value || (v.is_nan() && self.nodata_value.is_nan())
    }

    /// Integer code used for nodata in categorical rasters.
    pub fn nodata_code(&self) -> i64 {
        self.nodata_value as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericRaster {
    pub header: GridHeader,
    cells: Vec<f64>,
}

impl NumericRaster {
    pub fn new(header: GridHeader, cells: Vec<f64>) -> Result<Self> {
        header.validate()?;
        if cells.len() != header.cell_count() {
            return Err(Error::invalid(
                "raster",
                format!(
                    "expected {} cells for a {}x{} grid, got {}",
                    header.cell_count(),
                    header.ncols,
                    header.nrows,
                    cells.len()
                ),
            ));
        }
        Ok(NumericRaster { header, cells })
    }

    /// Raster filled with a single value.
    pub fn filled(header: GridHeader, value: f64) -> Result<Self> {
        NumericRaster::new(header, vec![value; header.cell_count()])
    }

    /// Raw cells, nodata sentinel included.
    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn get(&self, idx: usize) -> Option<f64> {
        let v = self.cells[idx];
        (!self.header.is_nodata(v)).then_some(v)
    }

    pub fn at(&self, row: usize, col: usize) -> Option<f64> {
        self.get(row * self.header.ncols + col)
    }

    pub fn values(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        (0..self.cells.len()).map(move |i| self.get(i))
    }

    /// Non-nodata cell values in row-major order.
    pub fn valid_values(&self) -> Vec<f64> {
        self.values().flatten().collect()
    }

    /// Build a raster from per-cell optional values; `None` becomes nodata.
    pub fn from_options(header: GridHeader, values: impl IntoIterator<Item = Option<f64>>) -> Result<Self> {
        let nodata = header.nodata_value;
        let cells = values.into_iter().map(|v| v.unwrap_or(nodata)).collect();
        NumericRaster::new(header, cells)
    }

    /// Min and max over valid cells, `None` when every cell is nodata.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.values().flatten().fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }
}

/// Code → label mapping for a categorical raster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Legend {
    entries: BTreeMap<i64, String>,
}

impl Legend {
    pub fn new(entries: impl IntoIterator<Item = (i64, String)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut labels = BTreeSet::new();
        for (code, label) in entries {
            if !labels.insert(label.clone()) {
                return Err(Error::invalid("legend", format!("duplicate label `{label}`")));
            }
            if map.insert(code, label).is_some() {
                return Err(Error::invalid("legend", format!("duplicate code {code}")));
            }
        }
        if map.is_empty() {
            return Err(Error::invalid("legend", "no entries"));
        }
        Ok(Legend { entries: map })
    }

    pub fn label(&self, code: i64) -> Option<&str> {
        self.entries.get(&code).map(String::as_str)
    }

    pub fn code(&self, label: &str) -> Option<i64> {
        self.entries.iter().find(|(_, l)| *l == label).map(|(c, _)| *c)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &str)> {
        self.entries.iter().map(|(c, l)| (*c, l.as_str()))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.values().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalRaster {
    pub header: GridHeader,
    codes: Vec<i64>,
    pub legend: Legend,
}

impl CategoricalRaster {
    pub fn new(header: GridHeader, codes: Vec<i64>, legend: Legend) -> Result<Self> {
        header.validate()?;
        if codes.len() != header.cell_count() {
            return Err(Error::invalid(
                "categorical raster",
                format!("expected {} codes, got {}", header.cell_count(), codes.len()),
            ));
        }
        let nodata = header.nodata_code();
        if let Some(bad) = codes.iter().find(|&&c| c != nodata && legend.label(c).is_none()) {
            return Err(Error::missing("legend code", bad.to_string()));
        }
        Ok(CategoricalRaster {
            header,
            codes,
            legend,
        })
    }

    /// Interpret a numeric raster as class codes. Non-nodata cells must be
    /// integral and present in the legend.
    pub fn from_numeric(raster: &NumericRaster, legend: Legend) -> Result<Self> {
        let nodata = raster.header.nodata_code();
        let mut codes = Vec::with_capacity(raster.cells.len());
        for (i, v) in raster.values().enumerate() {
            match v {
                None => codes.push(nodata),
                Some(v) if v.fract() == 0.0 && v.abs() < i64::MAX as f64 => codes.push(v as i64),
                Some(v) => {
                    return Err(Error::invalid(
                        "categorical raster",
                        format!("cell {i} holds non-integer code {v}"),
                    ))
                }
            }
        }
        CategoricalRaster::new(raster.header, codes, legend)
    }

    pub fn codes(&self) -> &[i64] {
        &self.codes
    }

    pub fn code(&self, idx: usize) -> Option<i64> {
        let c = self.codes[idx];
        (c != self.header.nodata_code()).then_some(c)
    }

    pub fn label(&self, idx: usize) -> Option<&str> {
        self.code(idx).and_then(|c| self.legend.label(c))
    }

    /// Codes as reals, for writing out as an ASCII grid.
    pub fn to_numeric(&self) -> NumericRaster {
        let cells = self.codes.iter().map(|&c| c as f64).collect();
        NumericRaster {
            header: self.header,
            cells,
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_real(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse `{token}` as a number")))?;
    Ok(v)
}

/// Parse an ESRI ASCII grid.
///
/// Header keys are case-insensitive and may appear in any order;
/// `xllcenter`/`yllcenter` are converted to corners. Cell rows follow,
/// north first. Numbers use a decimal point regardless of locale.
pub fn parse_ascii_grid(text: &str) -> Result<NumericRaster> {
    let mut ncols = None;
    let mut nrows = None;
    let mut xll = None;
    let mut yll = None;
    let mut centered = (false, false);
    let mut cellsize = None;
    let mut nodata = None;

    let mut lines = text.lines().enumerate().peekable();
    while let Some(&(idx, line)) = lines.peek() {
        let lineno = idx + 1;
        let mut tokens = line.split_whitespace();
        let Some(key) = tokens.next() else {
            lines.next();
            continue;
        };
        if !key.starts_with(|c: char| c.is_ascii_alphabetic()) {
            break;
        }
        // Some writers emit `nan`/`inf` cells; those are data, not keys.
        if key.parse::<f64>().is_ok() {
            break;
        }
        let value = tokens
            .next()
            .ok_or_else(|| parse_err(lineno, format!("header key `{key}` has no value")))?;
        if tokens.next().is_some() {
            return Err(parse_err(lineno, format!("header line `{key}` has extra tokens")));
        }
        let count = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| parse_err(lineno, format!("`{key}` must be a positive integer, got `{v}`")))
        };
        match key.to_ascii_lowercase().as_str() {
            "ncols" => ncols = Some(count(value)?),
            "nrows" => nrows = Some(count(value)?),
            "xllcorner" => xll = Some(parse_real(value, lineno)?),
            "yllcorner" => yll = Some(parse_real(value, lineno)?),
            "xllcenter" => {
                xll = Some(parse_real(value, lineno)?);
                centered.0 = true;
            }
            "yllcenter" => {
                yll = Some(parse_real(value, lineno)?);
                centered.1 = true;
            }
            "cellsize" => cellsize = Some(parse_real(value, lineno)?),
            "nodata_value" => nodata = Some(parse_real(value, lineno)?),
            _ => return Err(parse_err(lineno, format!("unknown header key `{key}`"))),
        }
        lines.next();
    }

    let header_end = lines.peek().map_or(text.lines().count(), |(i, _)| *i) + 1;
    let require = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| parse_err(header_end, format!("header is missing `{name}`")))
    };
    let ncols = ncols.ok_or_else(|| parse_err(header_end, "header is missing `ncols`"))?;
    let nrows = nrows.ok_or_else(|| parse_err(header_end, "header is missing `nrows`"))?;
    let cellsize = require(cellsize, "cellsize")?;
    let mut xll = require(xll, "xllcorner")?;
    let mut yll = require(yll, "yllcorner")?;
    if centered.0 {
        xll -= cellsize / 2.0;
    }
    if centered.1 {
        yll -= cellsize / 2.0;
    }
    let header = GridHeader {
        ncols,
        nrows,
        xllcorner: xll,
        yllcorner: yll,
        cellsize,
        nodata_value: nodata.unwrap_or(DEFAULT_NODATA),
    };
    header
        .validate()
        .map_err(|e| parse_err(header_end - 1, e.to_string()))?;

    let expected = header.cell_count();
    let mut cells = Vec::with_capacity(expected);
    let mut last_line = header_end;
    for (idx, line) in lines {
        let lineno = idx + 1;
        for token in line.split_whitespace() {
            let v = parse_real(token, lineno)?;
            if !v.is_finite() && !header.is_nodata(v) {
                return Err(parse_err(lineno, format!("non-finite cell value `{token}`")));
            }
            if cells.len() == expected {
                return Err(parse_err(
                    lineno,
                    format!("more than the {expected} cells declared by the header"),
                ));
            }
            cells.push(v);
        }
        last_line = lineno;
    }
    if cells.len() != expected {
        return Err(parse_err(
            last_line,
            format!("expected {expected} cells, found {}", cells.len()),
        ));
    }
    Ok(NumericRaster { header, cells })
}

/// Shortest text that reads back as exactly `v`.
fn exact_token(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Write an ESRI ASCII grid with cells rounded to `decimals` places.
///
/// Header values are written exactly; nodata cells repeat the header's
/// nodata token.
pub fn serialize_ascii_grid(raster: &NumericRaster, decimals: usize) -> String {
    let decimals = decimals.min(15);
    let h = &raster.header;
    let nodata = exact_token(h.nodata_value);
    let mut out = String::new();
    let _ = writeln!(out, "ncols         {}", h.ncols);
    let _ = writeln!(out, "nrows         {}", h.nrows);
    let _ = writeln!(out, "xllcorner     {}", exact_token(h.xllcorner));
    let _ = writeln!(out, "yllcorner     {}", exact_token(h.yllcorner));
    let _ = writeln!(out, "cellsize      {}", exact_token(h.cellsize));
    let _ = writeln!(out, "NODATA_value  {nodata}");
    for row in raster.cells.chunks(h.ncols) {
        let mut first = true;
        for &v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            if h.is_nodata(v) {
                out.push_str(&nodata);
            } else {
                let _ = write!(out, "{v:.decimals$}");
            }
        }
        out.push('\n');
    }
    out
}

/// Replace each class code by the score of its label.
pub fn apply_legend_scores(
    raster: &CategoricalRaster,
    scores: &BTreeMap<String, f64>,
) -> Result<NumericRaster> {
    let mut by_code = BTreeMap::new();
    for (code, label) in raster.legend.iter() {
        let score = scores
            .get(label)
            .ok_or_else(|| Error::missing("score for label", label))?;
        by_code.insert(code, *score);
    }
    let values = (0..raster.codes.len()).map(|i| raster.code(i).map(|c| by_code[&c]));
    NumericRaster::from_options(raster.header, values)
}

/// Check that all headers describe the same grid.
pub fn assert_aligned(headers: &[&GridHeader]) -> Result<()> {
    let Some((first, rest)) = headers.split_first() else {
        return Err(Error::invalid("alignment", "no rasters given"));
    };
    for h in rest {
        if h.ncols != first.ncols {
            return Err(Error::Misaligned { field: "ncols" });
        }
        if h.nrows != first.nrows {
            return Err(Error::Misaligned { field: "nrows" });
        }
        if (h.cellsize - first.cellsize).abs() > ALIGN_TOLERANCE {
            return Err(Error::Misaligned { field: "cellsize" });
        }
        if (h.xllcorner - first.xllcorner).abs() > ALIGN_TOLERANCE {
            return Err(Error::Misaligned { field: "xllcorner" });
        }
        if (h.yllcorner - first.yllcorner).abs() > ALIGN_TOLERANCE {
            return Err(Error::Misaligned { field: "yllcorner" });
        }
    }
    Ok(())
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    parse_err(line, e.to_string())
}

/// Read a legend CSV with header `code,label`.
pub fn parse_legend_csv(text: &str) -> Result<Legend> {
    let mut rdr = csv_reader(text);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.len() != 2 || &headers[0] != "code" || &headers[1] != "label" {
        return Err(parse_err(1, "legend header must be `code,label`"));
    }
    let mut entries = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let code = rec[0]
            .parse::<i64>()
            .map_err(|_| parse_err(line, format!("bad legend code `{}`", &rec[0])))?;
        entries.push((code, rec[1].to_string()));
    }
    Legend::new(entries)
}

/// Read a score map CSV with header `label,score`.
pub fn parse_score_csv(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut rdr = csv_reader(text);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.len() != 2 || &headers[0] != "label" || &headers[1] != "score" {
        return Err(parse_err(1, "score header must be `label,score`"));
    }
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let score = parse_real(&rec[1], line)?;
        if out.insert(rec[0].to_string(), score).is_some() {
            return Err(parse_err(line, format!("duplicate label `{}`", &rec[0])));
        }
    }
    Ok(out)
}
