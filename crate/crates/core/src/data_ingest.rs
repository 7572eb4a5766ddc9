//! Parsing of published Svensson parameter series and shape frequency reports.
//!
//! Column names, delimiter and date format come from a [`FormatConfig`]; the
//! default profile expects `date,beta0,beta1,beta2,beta3,tau1,tau2`.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape::ShapeTag;
use crate::shape_oracle::classify_direct;
use crate::term_structure::{regime_of_ratio, CurveKind, CurveParams, RegimeTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormatConfig {
    pub date: String,
    pub beta0: String,
    pub beta1: String,
    pub beta2: String,
    pub beta3: String,
    pub tau1: String,
    pub tau2: String,
    pub delimiter: char,
    /// chrono format string.
    pub date_format: String,
}

impl Default for FormatConfig {
    fn default() -> Self {
        FormatConfig {
            date: "date".into(),
            beta0: "beta0".into(),
            beta1: "beta1".into(),
            beta2: "beta2".into(),
            beta3: "beta3".into(),
            tau1: "tau1".into(),
            tau2: "tau2".into(),
            delimiter: ',',
            date_format: "%Y-%m-%d".into(),
        }
    }
}

impl FormatConfig {
    fn columns(&self) -> [&str; 7] {
        [&self.date, &self.beta0, &self.beta1, &self.beta2, &self.beta3, &self.tau1, &self.tau2]
    }

    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| Error::Argument(format!("delimiter {:?} is not a single ASCII character", self.delimiter)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub date: NaiveDate,
    pub params: CurveParams,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamSeries {
    pub rows: Vec<SeriesRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantinedRow {
    /// 1-based line in the input.
    pub line: u64,
    pub reason: String,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseOutcome {
    pub series: ParamSeries,
    pub quarantine: Vec<QuarantinedRow>,
}

fn reason_of(e: &Error) -> String {
    match e {
        Error::Validation(m) => m.clone(),
        other => other.to_string(),
    }
}

/// Reads a delimited parameter series. Malformed rows go to the quarantine
/// list; a repeated or decreasing date is a schema error.
pub fn parse_series<R: Read>(input: R, cfg: &FormatConfig) -> Result<ParseOutcome> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(cfg.delimiter_byte()?)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(Error::Schema("missing header row".into()));
    }
    let mut idx = [0usize; 7];
    for (slot, name) in idx.iter_mut().zip(cfg.columns()) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))?;
    }
    let mut series = ParamSeries::default();
    let mut quarantine = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => {
                if let csv::ErrorKind::Io(_) = e.kind() {
                    return Err(csv_error(e));
                }
                let line = e.position().map_or(0, |p| p.line());
                quarantine.push(QuarantinedRow { line, reason: e.to_string(), raw: String::new() });
                continue;
            }
        }
        let line = record.position().map_or(0, |p| p.line());
        let raw = record.iter().collect::<Vec<_>>().join(&cfg.delimiter.to_string());
        if record.iter().all(str::is_empty) {
            continue;
        }
        match parse_row(&record, &idx, cfg) {
            Ok(row) => {
                if let Some(prev) = series.rows.last() {
                    if row.date <= prev.date {
                        let what = if row.date == prev.date { "duplicate" } else { "decreasing" };
                        return Err(Error::Schema(format!("{what} date {} on line {line}", row.date)));
                    }
                }
                series.rows.push(row);
            }
            Err(reason) => quarantine.push(QuarantinedRow { line, reason, raw }),
        }
    }
    Ok(ParseOutcome { series, quarantine })
}

pub fn parse_series_path(path: impl AsRef<Path>, cfg: &FormatConfig) -> Result<ParseOutcome> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_series(std::io::BufReader::new(f), cfg)
}

fn csv_error(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Schema(e.to_string()),
    }
}

fn parse_row(rec: &csv::StringRecord, idx: &[usize; 7], cfg: &FormatConfig) -> std::result::Result<SeriesRow, String> {
    let names = cfg.columns();
    let field = |k: usize| rec.get(idx[k]).ok_or_else(|| format!("missing field {:?}", names[k]));
    let date_s = field(0)?;
    let date = NaiveDate::parse_from_str(date_s, &cfg.date_format).map_err(|e| format!("bad date {date_s:?}: {e}"))?;
    let mut v = [0.0; 6];
    for (k, slot) in v.iter_mut().enumerate() {
        let s = field(k + 1)?;
        *slot = s.parse::<f64>().map_err(|_| format!("bad number {s:?} in column {:?}", names[k + 1]))?;
    }
    let params = CurveParams::new([v[0], v[1], v[2], v[3]], v[4], v[5]).map_err(|e| reason_of(&e))?;
    Ok(SeriesRow { date, params })
}

/// Writes a series in the layout `cfg` describes; parsing the output gives back the same series.
pub fn series_to_csv(series: &ParamSeries, cfg: &FormatConfig) -> Result<String> {
    let mut w = csv::WriterBuilder::new().delimiter(cfg.delimiter_byte()?).from_writer(Vec::new());
    w.write_record(cfg.columns()).map_err(csv_error)?;
    for row in &series.rows {
        let p = &row.params;
        let b = p.beta();
        let fields = [
            row.date.format(&cfg.date_format).to_string(),
            b[0].to_string(),
            b[1].to_string(),
            b[2].to_string(),
            b[3].to_string(),
            p.tau1().to_string(),
            p.tau2().to_string(),
        ];
        w.write_record(&fields).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegimeCell {
    #[serde(rename = "sr")]
    ScaleRegular,
    #[serde(rename = "wsi")]
    WeaklyScaleInverted,
    #[serde(rename = "ssi")]
    StronglyScaleInverted,
    /// `beta3 = 0`, classified as Nelson-Siegel.
    #[serde(rename = "NS")]
    NelsonSiegel,
}

impl RegimeCell {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeCell::ScaleRegular => "sr",
            RegimeCell::WeaklyScaleInverted => "wsi",
            RegimeCell::StronglyScaleInverted => "ssi",
            RegimeCell::NelsonSiegel => "NS",
        }
    }
}

fn sign_label(v: f64) -> &'static str {
    if v > 0.0 {
        "+"
    } else if v < 0.0 {
        "-"
    } else {
        "0"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCount {
    pub regime: RegimeCell,
    pub beta3_sign: String,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeCount {
    pub shape: ShapeTag,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub date: NaiveDate,
    pub r: f64,
    pub beta3_sign: String,
    pub regime: RegimeCell,
    pub shape: ShapeTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub kind: CurveKind,
    pub total: usize,
    pub regimes: Vec<RegimeCount>,
    pub shapes: Vec<ShapeCount>,
    pub rows: Vec<ReportRow>,
}

/// Percentages at one decimal that add up to exactly 100 (largest remainders).
fn rounded_percentages(counts: &[usize]) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    // work in tenths of a percent
    let exact: Vec<f64> = counts.iter().map(|&c| c as f64 * 1000.0 / total as f64).collect();
    let mut tenths: Vec<i64> = exact.iter().map(|e| e.floor() as i64).collect();
    let short = 1000 - tenths.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take(short.max(0) as usize) {
        tenths[k] += 1;
    }
    tenths.into_iter().map(|t| t as f64 / 10.0).collect()
}

const SHAPE_ORDER: [ShapeTag; 8] = [
    ShapeTag::N,
    ShapeTag::H,
    ShapeTag::Hd,
    ShapeTag::Hdh,
    ShapeTag::I,
    ShapeTag::D,
    ShapeTag::Dh,
    ShapeTag::Dhd,
];

pub fn frequency_report(series: &ParamSeries, kind: CurveKind) -> Result<FrequencyReport> {
    if series.rows.is_empty() {
        return Err(Error::Argument("empty series".into()));
    }
    let mut rows = Vec::with_capacity(series.rows.len());
    for row in &series.rows {
        let p = &row.params;
        let r = p.tau1() / p.tau2();
        let regime = if p.beta3() == 0.0 {
            RegimeCell::NelsonSiegel
        } else {
            match regime_of_ratio(r)?.tag {
                RegimeTag::ScaleRegular => RegimeCell::ScaleRegular,
                RegimeTag::WeaklyScaleInverted => RegimeCell::WeaklyScaleInverted,
                RegimeTag::StronglyScaleInverted => RegimeCell::StronglyScaleInverted,
            }
        };
        let shape = classify_direct(kind, p)?.tag;
        rows.push(ReportRow { date: row.date, r, beta3_sign: sign_label(p.beta3()).into(), regime, shape });
    }

    let cells: Vec<(RegimeCell, &str)> = ["+", "-"]
        .into_iter()
        .flat_map(|s| {
            [RegimeCell::ScaleRegular, RegimeCell::WeaklyScaleInverted, RegimeCell::StronglyScaleInverted]
                .into_iter()
                .map(move |c| (c, s))
        })
        .chain(std::iter::once((RegimeCell::NelsonSiegel, "0")))
        .collect();
    let regime_counts: Vec<usize> = cells
        .iter()
        .map(|(c, s)| rows.iter().filter(|r| r.regime == *c && r.beta3_sign == *s).count())
        .collect();
    let pct = rounded_percentages(&regime_counts);
    let regimes = cells
        .iter()
        .zip(regime_counts.iter().zip(pct))
        .map(|((c, s), (&count, percent))| RegimeCount { regime: *c, beta3_sign: (*s).into(), count, percent })
        .collect();

    let mut by_shape: BTreeMap<ShapeTag, usize> = BTreeMap::new();
    for r in &rows {
        *by_shape.entry(r.shape).or_insert(0) += 1;
    }
    let mut order: Vec<ShapeTag> = SHAPE_ORDER.to_vec();
    if by_shape.contains_key(&ShapeTag::Flat) {
        order.push(ShapeTag::Flat);
    }
    let shape_counts: Vec<usize> = order.iter().map(|s| by_shape.get(s).copied().unwrap_or(0)).collect();
    let pct = rounded_percentages(&shape_counts);
    let shapes = order
        .iter()
        .zip(shape_counts.iter().zip(pct))
        .map(|(s, (&count, percent))| ShapeCount { shape: *s, count, percent })
        .collect();

    Ok(FrequencyReport { kind, total: rows.len(), regimes, shapes, rows })
}

impl FrequencyReport {
    /// Per-date series as CSV with columns `date,r,beta3_sign,regime,shape`.
    pub fn rows_csv(&self) -> String {
        let mut s = String::from("date,r,beta3_sign,regime,shape\n");
        for r in &self.rows {
            s += &format!("{},{},{},{},{}\n", r.date, r.r, r.beta3_sign, r.regime.as_str(), r.shape);
        }
        s
    }

    /// Plain-text tables, one line per sign of `beta3` and two lines of shapes.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (sign, label) in [("+", "beta3 > 0"), ("-", "beta3 < 0")] {
            let cells: Vec<String> = self
                .regimes
                .iter()
                .filter(|c| c.beta3_sign == sign)
                .map(|c| format!("{}: {:.1}%", c.regime.as_str(), c.percent))
                .collect();
            out += &format!("{label}: {}\n", cells.join(", "));
        }
        if let Some(ns) = self.regimes.iter().find(|c| c.regime == RegimeCell::NelsonSiegel) {
            if ns.count > 0 {
                out += &format!("beta3 = 0: NS: {:.1}%\n", ns.percent);
            }
        }
        let line = |tags: &[ShapeTag]| {
            tags.iter()
                .filter_map(|t| self.shapes.iter().find(|c| c.shape == *t))
                .map(|c| format!("{}: {:.1}%", c.shape, c.percent))
                .collect::<Vec<_>>()
                .join(", ")
        };
        out += &line(&SHAPE_ORDER[..4]);
        out.push('\n');
        out += &line(&SHAPE_ORDER[4..]);
        out.push('\n');
        if let Some(f) = self.shapes.iter().find(|c| c.shape == ShapeTag::Flat) {
            out += &format!("flat: {:.1}%\n", f.percent);
        }
        out
    }
}
