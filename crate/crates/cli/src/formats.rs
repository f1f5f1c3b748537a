//! On-disk formats: groups CSV, parameter TOML, raw multi-group records,
//! and plain CSV exports.

use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hubnet::analysis::{RawEvent, RawRecords};
use hubnet::model::{GroupedData, ModelParams};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// A malformed input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub source: String,
    pub line: u64,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.source, self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn parse_error(source: &str, line: u64, message: impl Into<String>) -> anyhow::Error {
    ParseError {
        source: source.to_string(),
        line,
        message: message.into(),
    }
    .into()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn is_binary(cell: &str) -> bool {
    cell == "0" || cell == "1"
}

/// Parses a groups file: one group per row of comma-separated 0/1 cells,
/// an optional header row of node labels, and (with `timestamps`) a
/// leading time column. Lines starting with `#` are ignored.
pub fn parse_groups(text: &str, source: &str, timestamps: bool) -> Result<GroupedData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let skip = usize::from(timestamps);
    let mut labels: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut rows: Vec<Vec<u8>> = Vec::new();
    let mut times: Vec<String> = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(source, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() <= skip {
            return Err(parse_error(source, line, "row has no membership cells"));
        }
        let cells: Vec<&str> = record.iter().skip(skip).collect();
        if first {
            first = false;
            if !cells.iter().all(|c| is_binary(c)) {
                labels = Some(cells.iter().map(|c| c.to_string()).collect());
                width = Some(cells.len());
                continue;
            }
        }
        let n = *width.get_or_insert(cells.len());
        if cells.len() != n {
            return Err(parse_error(
                source,
                line,
                format!("expected {n} membership cells, found {}", cells.len()),
            ));
        }
        let mut row = Vec::with_capacity(n);
        for (j, c) in cells.iter().enumerate() {
            match *c {
                "0" => row.push(0),
                "1" => row.push(1),
                other => {
                    return Err(parse_error(
                        source,
                        line,
                        format!("cell {} is {other:?}, expected 0 or 1", j + 1),
                    ))
                }
            }
        }
        if row.iter().all(|&x| x == 0) {
            return Err(parse_error(source, line, "empty group (all cells are 0)"));
        }
        if timestamps {
            times.push(record[0].to_string());
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{source}: no groups found");
    }
    let times = timestamps.then_some(times);
    GroupedData::new(rows, labels, times).with_context(|| format!("{source}: invalid groups"))
}

pub fn read_groups(path: &Path, timestamps: bool) -> Result<GroupedData> {
    parse_groups(&read_text(path)?, &path.display().to_string(), timestamps)
}

fn csv_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    build(&mut w).expect("writing CSV to memory");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV output is UTF-8")
}

/// Groups as CSV with a label header, plus a `time` column when the data
/// carries timestamps.
pub fn format_groups(data: &GroupedData) -> String {
    let times = data.timestamps();
    csv_string(|w| {
        let mut header: Vec<&str> = Vec::new();
        if times.is_some() {
            header.push("time");
        }
        header.extend(data.labels().iter().map(String::as_str));
        w.write_record(&header)?;
        for (t, row) in data.rows().enumerate() {
            let mut rec: Vec<String> = Vec::with_capacity(row.len() + 1);
            if let Some(ts) = times {
                rec.push(ts[t].clone());
            }
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

/// Parameters as stored on disk. `θ` is a full symmetric matrix whose
/// diagonal is `inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub labels: Vec<String>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub u: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
}

impl ParamsFile {
    pub fn new(params: &ModelParams, labels: &[String]) -> Self {
        Self {
            labels: labels.to_vec(),
            alpha: params.alpha,
            beta: params.beta,
            gamma: params.gamma,
            u: params.u().to_vec(),
            theta: params.theta().rows().into_iter().map(|r| r.to_vec()).collect(),
        }
    }

    pub fn to_params(&self) -> Result<ModelParams> {
        let n = self.u.len();
        if self.labels.len() != n {
            bail!("{} labels for {n} nodes", self.labels.len());
        }
        if self.theta.len() != n || self.theta.iter().any(|r| r.len() != n) {
            bail!("theta must be a {n} x {n} matrix");
        }
        let theta = Array2::from_shape_fn((n, n), |(i, j)| self.theta[i][j]);
        Ok(ModelParams::new(self.u.clone(), theta, self.alpha, self.beta, self.gamma)?)
    }
}

pub fn format_params(params: &ModelParams, labels: &[String]) -> Result<String> {
    Ok(toml::to_string(&ParamsFile::new(params, labels))?)
}

pub fn parse_params(text: &str, source: &str) -> Result<(ModelParams, Vec<String>)> {
    let file: ParamsFile = toml::from_str(text).with_context(|| format!("{source}: malformed parameters"))?;
    let params = file.to_params().with_context(|| format!("{source}: invalid parameters"))?;
    Ok((params, file.labels))
}

pub fn read_params(path: &Path) -> Result<(ModelParams, Vec<String>)> {
    parse_params(&read_text(path)?, &path.display().to_string())
}

pub fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    toml::from_str(&read_text(path)?).with_context(|| format!("{}: malformed file", path.display()))
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &toml::to_string(value)?)
}

/// Dense matrix as headerless CSV.
pub fn format_matrix(m: &Array2<f64>) -> String {
    csv_string(|w| {
        for row in m.rows() {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        Ok(())
    })
}

pub fn parse_matrix(text: &str, source: &str) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.with_context(|| format!("{source}: malformed CSV"))?;
        let line = record.position().map_or(0, |p| p.line());
        if *cols.get_or_insert(record.len()) != record.len() {
            return Err(parse_error(source, line, "ragged matrix row"));
        }
        for cell in record.iter() {
            let x: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_error(source, line, format!("{cell:?} is not a number")))?;
            values.push(x);
        }
        rows += 1;
    }
    Ok(Array2::from_shape_vec((rows, cols.unwrap_or(0)), values)?)
}

/// CSV with a header row and one record per row of `cells`.
pub fn format_table<R, C>(header: &[&str], rows: R) -> String
where
    R: IntoIterator<Item = Vec<C>>,
    C: ToString,
{
    csv_string(|w| {
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        Ok(())
    })
}

/// Parses raw observation records.
///
/// ```text
/// labels: a, b, c, d
/// # time : candidate | candidate ...
/// 13:00 : a b | c d
/// 14:00 : 1,1,0,1
/// ```
///
/// A candidate is either a list of labels (separated by spaces or commas)
/// or a 0/1 vector with one entry per label.
pub fn parse_raw_records(text: &str, source: &str) -> Result<RawRecords> {
    let mut labels: Option<Vec<String>> = None;
    let mut events = Vec::new();
    for (k, raw_line) in text.lines().enumerate() {
        let line_no = k as u64 + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("labels:") {
            if labels.is_some() {
                return Err(parse_error(source, line_no, "labels declared twice"));
            }
            let names: Vec<String> = tokens(rest).map(String::from).collect();
            if names.is_empty() {
                return Err(parse_error(source, line_no, "empty label list"));
            }
            labels = Some(names);
            continue;
        }
        let Some(names) = labels.as_ref() else {
            return Err(parse_error(source, line_no, "event before the labels line"));
        };
        let Some((time, groups)) = line.rsplit_once(':') else {
            return Err(parse_error(source, line_no, "expected `<time> : <group> | <group> ...`"));
        };
        let time = time.trim();
        if time.is_empty() {
            return Err(parse_error(source, line_no, "missing time tag"));
        }
        let mut candidates = Vec::new();
        for part in groups.split('|') {
            let group = parse_candidate(part, names).map_err(|m| parse_error(source, line_no, m))?;
            candidates.push(group);
        }
        events.push(RawEvent {
            time: time.to_string(),
            candidates,
        });
    }
    let Some(labels) = labels else {
        bail!("{source}: missing `labels:` line");
    };
    if events.is_empty() {
        bail!("{source}: no events");
    }
    Ok(RawRecords::new(labels, events)?)
}

pub fn read_raw_records(path: &Path) -> Result<RawRecords> {
    parse_raw_records(&read_text(path)?, &path.display().to_string())
}

fn tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty())
}

fn parse_candidate(part: &str, labels: &[String]) -> std::result::Result<Vec<u8>, String> {
    let toks: Vec<&str> = tokens(part).collect();
    if toks.is_empty() {
        return Err("empty candidate group".into());
    }
    let n = labels.len();
    let vector = toks.len() == n && toks.iter().all(|t| is_binary(t)) && !labels.iter().any(|l| is_binary(l));
    let mut group = vec![0u8; n];
    if vector {
        for (j, t) in toks.iter().enumerate() {
            group[j] = u8::from(*t == "1");
        }
    } else {
        for t in toks {
            let j = labels
                .iter()
                .position(|l| l == t)
                .ok_or_else(|| format!("unknown label {t:?}"))?;
            group[j] = 1;
        }
    }
    if group.iter().all(|&x| x == 0) {
        return Err("empty candidate group".into());
    }
    Ok(group)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line_of(err: &anyhow::Error) -> u64 {
        err.downcast_ref::<ParseError>().expect("a parse error").line
    }

    #[test]
    fn header_detection_and_defaults() {
        let with = parse_groups("a,b,c\n1,0,1\n0,1,1\n", "g", false).unwrap();
        assert_eq!(with.labels(), ["a", "b", "c"]);
        assert_eq!(with.len(), 2);
        let without = parse_groups("1,0,1\n", "g", false).unwrap();
        assert_eq!(without.labels(), ["v1", "v2", "v3"]);
    }

    #[test]
    fn malformed_rows_report_their_line() {
        let err = parse_groups("a,b\n1,0\n1,2\n", "g", false).unwrap_err();
        assert_eq!(line_of(&err), 3);
        let err = parse_groups("1,0\n1,0,1\n", "g", false).unwrap_err();
        assert_eq!(line_of(&err), 2);
        let err = parse_groups("a,b\n0,0\n", "g", false).unwrap_err();
        assert_eq!(line_of(&err), 2);
        assert!(err.to_string().contains("empty group"));
    }

    #[test]
    fn timestamp_column() {
        let g = parse_groups("time,a,b\n1,1,0\n2,1,1\n", "g", true).unwrap();
        assert_eq!(g.timestamps().unwrap(), ["1", "2"]);
        assert_eq!(g.row(1), [1, 1]);
        assert_eq!(parse_groups(&format_groups(&g), "g", true).unwrap(), g);
    }

    #[test]
    fn raw_records_with_labels_and_vectors() {
        let text = "labels: a, b, c\n# note\n1 : a b | c\n2 : 0,1,1\n";
        let raw = parse_raw_records(text, "r").unwrap();
        assert_eq!(raw.events().len(), 2);
        assert_eq!(raw.events()[0].candidates, vec![vec![1, 1, 0], vec![0, 0, 1]]);
        assert_eq!(raw.events()[1].candidates, vec![vec![0, 1, 1]]);
        let err = parse_raw_records("labels: a,b\n1 : a | z\n", "r").unwrap_err();
        assert_eq!(line_of(&err), 2);
        let err = parse_raw_records("labels: a,b\nno separator\n", "r").unwrap_err();
        assert_eq!(line_of(&err), 2);
    }

    #[test]
    fn params_keep_infinite_diagonal() {
        let theta = Array2::from_shape_vec((2, 2), vec![f64::INFINITY, -0.5, -0.5, f64::INFINITY]).unwrap();
        let p = ModelParams::new(vec![0.1, -0.1], theta, 1.0, 2.0, -1.0).unwrap();
        let text = format_params(&p, &["x".into(), "y".into()]).unwrap();
        assert!(text.contains("inf"));
        let (back, labels) = parse_params(&text, "p").unwrap();
        assert_eq!(back, p);
        assert_eq!(labels, ["x", "y"]);
    }

    fn groups_strategy() -> impl Strategy<Value = Vec<Vec<u8>>> {
        (1usize..8, 1usize..30).prop_flat_map(|(n, t)| {
            prop::collection::vec(prop::collection::vec(0u8..2, n), t).prop_map(move |mut rows| {
                for (k, row) in rows.iter_mut().enumerate() {
                    if row.iter().all(|&x| x == 0) {
                        row[k % n] = 1;
                    }
                }
                rows
            })
        })
    }

    proptest! {
        #[test]
        fn groups_round_trip(rows in groups_strategy()) {
            let g = GroupedData::new(rows, None, None).unwrap();
            let back = parse_groups(&format_groups(&g), "g", false).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn params_round_trip_bit_identical(
            n in 2usize..6,
            seed in any::<u64>(),
            scale in prop::sample::select(vec![1e-300, 1e-8, 1.0, 1e8]),
        ) {
            use hubnet::simulate::{replicate_rng, sample_parameters, SimConfig};
            let mut cfg = SimConfig::new(n, 1);
            cfg.alpha = 0.1 * scale;
            cfg.beta = -std::f64::consts::PI * scale;
            cfg.gamma = f64::EPSILON;
            let p = sample_parameters(&cfg, &mut replicate_rng(seed, 0)).unwrap();
            let labels: Vec<String> = (0..n).map(|i| format!("node {i}")).collect();
            let (back, back_labels) = parse_params(&format_params(&p, &labels).unwrap(), "p").unwrap();
            prop_assert_eq!(back_labels, labels);
            prop_assert_eq!(back.alpha.to_bits(), p.alpha.to_bits());
            prop_assert_eq!(back.beta.to_bits(), p.beta.to_bits());
            prop_assert_eq!(back.gamma.to_bits(), p.gamma.to_bits());
            for (a, b) in back.u().iter().zip(p.u()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            for (a, b) in back.theta().iter().zip(p.theta().iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn matrix_round_trip(values in prop::collection::vec(-1e6f64..1e6, 9)) {
            let m = Array2::from_shape_vec((3, 3), values).unwrap();
            let back = parse_matrix(&format_matrix(&m), "m").unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
