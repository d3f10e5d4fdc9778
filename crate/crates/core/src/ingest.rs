//! Price loading, calendar alignment and log-return panels.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use ndarray::{s, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_dot, compensated_sum};

/// Tolerance on row mean and standard deviation for a panel to count as standardized.
pub const STANDARDIZED_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub date: NaiveDate,
    pub ticker: String,
    pub price: f64,
}

/// Validated price observations for one system (market).
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    observations: Vec<Observation>,
    pub system_label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceFormat {
    /// `date,ticker,price` rows.
    LongCsv,
    /// `date,<ticker>...` header with one column per ticker; empty cells are missing prices.
    WideCsv,
}

impl PriceTable {
    /// Builds a table, rejecting non-positive prices and duplicate (date, ticker) pairs.
    pub fn new(system_label: impl Into<String>, observations: Vec<Observation>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(observations.len());
        for (i, o) in observations.iter().enumerate() {
            if !(o.price > 0.0) || !o.price.is_finite() {
                return Err(Error::NonPositivePrice {
                    line: i + 1,
                    date: o.date.to_string(),
                    ticker: o.ticker.clone(),
                    price: o.price,
                });
            }
            if !seen.insert((o.date, o.ticker.as_str())) {
                return Err(Error::DuplicateObservation {
                    date: o.date.to_string(),
                    ticker: o.ticker.clone(),
                });
            }
        }
        Ok(Self {
            observations,
            system_label: system_label.into(),
        })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Tickers in order of first appearance.
    pub fn tickers(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.observations
            .iter()
            .filter(|o| seen.insert(o.ticker.as_str()))
            .map(|o| o.ticker.clone())
            .collect()
    }

    pub fn dates(&self) -> BTreeSet<NaiveDate> {
        self.observations.iter().map(|o| o.date).collect()
    }

    /// Dates on which every ticker of the table has a price.
    pub fn complete_dates(&self) -> BTreeSet<NaiveDate> {
        let n_tickers = self.tickers().len();
        let mut per_date: BTreeMap<NaiveDate, usize> = BTreeMap::new();
        for o in &self.observations {
            *per_date.entry(o.date).or_default() += 1;
        }
        per_date
            .into_iter()
            .filter(|&(_, c)| c == n_tickers)
            .map(|(d, _)| d)
            .collect()
    }

    fn restrict(&self, dates: &BTreeSet<NaiveDate>) -> Self {
        Self {
            observations: self
                .observations
                .iter()
                .filter(|o| dates.contains(&o.date))
                .cloned()
                .collect(),
            system_label: self.system_label.clone(),
        }
    }

    /// Writes the table as a wide CSV (`date,<ticker>...`).
    pub fn write_wide_csv<W: Write>(&self, w: W) -> Result<()> {
        let tickers = self.tickers();
        let col: HashMap<&str, usize> = tickers
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let mut rows: BTreeMap<NaiveDate, Vec<Option<f64>>> = BTreeMap::new();
        for o in &self.observations {
            rows.entry(o.date).or_insert_with(|| vec![None; tickers.len()])[col[o.ticker.as_str()]] =
                Some(o.price);
        }
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["date".to_string()];
        header.extend(tickers.iter().cloned());
        out.write_record(&header)?;
        for (date, prices) in rows {
            let mut rec = vec![date.to_string()];
            rec.extend(prices.iter().map(|p| p.map(|x| x.to_string()).unwrap_or_default()));
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| Error::Parse {
        line,
        message: format!("bad date {s:?}: {e}"),
    })
}

fn parse_price(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        message: format!("bad price {s:?}: {e}"),
    })
}

/// Guesses the format from the header line.
pub fn detect_format(header: &str) -> PriceFormat {
    let cols: Vec<String> = header
        .trim_start_matches('\u{feff}')
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .collect();
    if cols == ["date", "ticker", "price"] {
        PriceFormat::LongCsv
    } else {
        PriceFormat::WideCsv
    }
}

/// Parses price CSV text. The header line is line 1; errors carry the line number.
pub fn parse_prices(text: &str, format: PriceFormat, system_label: &str) -> Result<PriceTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_string())
        .collect();
    if header.first().map(|h| h.to_ascii_lowercase()) != Some("date".into()) {
        return Err(Error::Parse {
            line: 1,
            message: "first column must be `date`".into(),
        });
    }

    let mut observations = Vec::new();
    let mut obs_lines = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        match format {
            PriceFormat::LongCsv => {
                if rec.len() != 3 {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected 3 fields, found {}", rec.len()),
                    });
                }
                observations.push(Observation {
                    date: parse_date(&rec[0], line)?,
                    ticker: rec[1].to_string(),
                    price: parse_price(&rec[2], line)?,
                });
                obs_lines.push(line);
            }
            PriceFormat::WideCsv => {
                if rec.len() != header.len() {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected {} fields, found {}", header.len(), rec.len()),
                    });
                }
                let date = parse_date(&rec[0], line)?;
                for (ticker, cell) in header[1..].iter().zip(rec.iter().skip(1)) {
                    if cell.is_empty() {
                        continue;
                    }
                    observations.push(Observation {
                        date,
                        ticker: ticker.clone(),
                        price: parse_price(cell, line)?,
                    });
                    obs_lines.push(line);
                }
            }
        }
    }

    PriceTable::new(system_label, observations).map_err(|e| match e {
        // Report the file line rather than the observation index.
        Error::NonPositivePrice {
            line,
            date,
            ticker,
            price,
        } => Error::NonPositivePrice {
            line: obs_lines[line - 1],
            date,
            ticker,
            price,
        },
        other => other,
    })
}

/// Loads a price table from disk. The system label is the file stem.
pub fn load_prices(path: impl AsRef<Path>, format: PriceFormat) -> Result<PriceTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_prices(&text, format, &label)
}

/// Loads a price table, detecting the format from its header.
pub fn load_prices_auto(path: impl AsRef<Path>) -> Result<PriceTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let format = detect_format(text.lines().next().unwrap_or(""));
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_prices(&text, format, &label)
}

/// Restricts both tables to the dates on which every ticker of both tables has a price.
pub fn align_calendars(a: &PriceTable, b: &PriceTable) -> Result<(PriceTable, PriceTable)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let common: BTreeSet<NaiveDate> = a
        .complete_dates()
        .intersection(&b.complete_dates())
        .copied()
        .collect();
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok((a.restrict(&common), b.restrict(&common)))
}

/// An N×T matrix of returns: row i is asset i, column t is time t.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    pub values: Array2<f64>,
    pub tickers: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub standardized: bool,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelMeta {
    pub system_label: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub standardized: bool,
}

impl ReturnPanel {
    /// Wraps a raw matrix with synthetic tickers (`<label>000`, ...) and consecutive dates.
    pub fn from_matrix(label: impl Into<String>, values: Array2<f64>) -> Result<Self> {
        let label = label.into();
        let (n, t) = values.dim();
        if n < 1 || t < 2 {
            return Err(Error::DimensionMismatch(format!(
                "panel must have N >= 1 and T >= 2, got {n}x{t}"
            )));
        }
        let start = NaiveDate::from_ymd_opt(2005, 1, 3).expect("valid date");
        Ok(Self {
            tickers: (0..n).map(|i| format!("{label}{i:03}")).collect(),
            dates: (0..t).map(|k| start + Duration::days(k as i64)).collect(),
            values,
            standardized: false,
            label,
        })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn t(&self) -> usize {
        self.values.ncols()
    }

    pub fn meta(&self) -> PanelMeta {
        PanelMeta {
            system_label: self.label.clone(),
            n: self.n(),
            t: self.t(),
            standardized: self.standardized,
        }
    }

    /// Checks the standardization flag and, numerically, that rows have mean 0 and sd 1.
    pub fn check_standardized(&self) -> Result<()> {
        if !self.standardized {
            return Err(Error::NotStandardized);
        }
        let t = self.t() as f64;
        for row in self.values.axis_iter(Axis(0)) {
            let r = row.as_slice().map(|s| s.to_vec()).unwrap_or_else(|| row.to_vec());
            let mean = compensated_sum(r.iter().copied()) / t;
            let var = compensated_dot(&r, &r) / t;
            if mean.abs() > STANDARDIZED_TOL || (var.sqrt() - 1.0).abs() > STANDARDIZED_TOL {
                return Err(Error::NotStandardized);
            }
        }
        Ok(())
    }

    /// Panel restricted to the given rows (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            values: self.values.select(Axis(0), rows),
            tickers: rows.iter().map(|&i| self.tickers[i].clone()).collect(),
            dates: self.dates.clone(),
            standardized: self.standardized,
            label: self.label.clone(),
        }
    }

    /// Columns `start..start + len`. The window is not re-standardized.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if len < 2 || start + len > self.t() {
            return Err(Error::InvalidArgument(format!(
                "window [{start}, {}) outside 0..{}",
                start + len,
                self.t()
            )));
        }
        Ok(Self {
            values: self.values.slice(s![.., start..start + len]).to_owned(),
            tickers: self.tickers.clone(),
            dates: self.dates[start..start + len].to_vec(),
            standardized: false,
            label: self.label.clone(),
        })
    }

    /// CSV with a `ticker,<date>...` header and one labelled row per asset.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["ticker".to_string()];
        header.extend(self.dates.iter().map(|d| d.to_string()));
        out.write_record(&header)?;
        for (ticker, row) in self.tickers.iter().zip(self.values.axis_iter(Axis(0))) {
            let mut rec = vec![ticker.clone()];
            rec.extend(row.iter().map(|x| x.to_string()));
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    /// Converts returns back to prices starting at `base` one day before the first date.
    pub fn to_prices(&self, base: f64) -> Result<PriceTable> {
        let first = self.dates[0] - Duration::days(1);
        let mut obs = Vec::with_capacity(self.n() * (self.t() + 1));
        for (ticker, row) in self.tickers.iter().zip(self.values.axis_iter(Axis(0))) {
            let mut log_p = base.ln();
            obs.push(Observation {
                date: first,
                ticker: ticker.clone(),
                price: base,
            });
            for (date, r) in self.dates.iter().zip(row.iter()) {
                log_p += r;
                obs.push(Observation {
                    date: *date,
                    ticker: ticker.clone(),
                    price: log_p.exp(),
                });
            }
        }
        PriceTable::new(self.label.clone(), obs)
    }
}

/// Log returns between consecutive dates of the table's complete calendar.
pub fn log_returns(p: &PriceTable) -> Result<ReturnPanel> {
    let tickers = p.tickers();
    if tickers.is_empty() {
        return Err(Error::InvalidArgument("empty price table".into()));
    }
    let dates: Vec<NaiveDate> = p.complete_dates().into_iter().collect();
    if dates.len() < 2 {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for o in p.observations() {
            *counts.entry(o.ticker.as_str()).or_default() += 1;
        }
        let worst = tickers
            .iter()
            .min_by_key(|t| counts.get(t.as_str()).copied().unwrap_or(0))
            .expect("nonempty");
        return Err(Error::TooFewPrices {
            ticker: worst.clone(),
            count: dates.len().min(counts.get(worst.as_str()).copied().unwrap_or(0)),
        });
    }
    let row_of: HashMap<&str, usize> = tickers
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let col_of: HashMap<NaiveDate, usize> = dates.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let mut prices = Array2::<f64>::zeros((tickers.len(), dates.len()));
    for o in p.observations() {
        if let Some(&c) = col_of.get(&o.date) {
            prices[[row_of[o.ticker.as_str()], c]] = o.price;
        }
    }
    let t_out = dates.len() - 1;
    let mut values = Array2::<f64>::zeros((tickers.len(), t_out));
    for i in 0..tickers.len() {
        for t in 0..t_out {
            values[[i, t]] = (prices[[i, t + 1]] / prices[[i, t]]).ln();
        }
    }
    Ok(ReturnPanel {
        values,
        tickers,
        dates: dates[1..].to_vec(),
        standardized: false,
        label: p.system_label.clone(),
    })
}

fn row_moments(row: ArrayView1<f64>) -> (f64, f64) {
    let t = row.len() as f64;
    let mean = compensated_sum(row.iter().copied()) / t;
    let var = compensated_sum(row.iter().map(|x| (x - mean) * (x - mean))) / t;
    (mean, var.sqrt())
}

/// Rows rescaled to mean 0 and standard deviation 1 (divisor T).
pub fn standardize(r: &ReturnPanel) -> Result<ReturnPanel> {
    let mut values = r.values.clone();
    for (i, mut row) in values.axis_iter_mut(Axis(0)).enumerate() {
        let (mean, sd) = row_moments(row.view());
        let scale = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(sd > 1e-14 * scale) {
            return Err(Error::ZeroVariance {
                ticker: r.tickers[i].clone(),
            });
        }
        row.mapv_inplace(|x| (x - mean) / sd);
    }
    Ok(ReturnPanel {
        values,
        tickers: r.tickers.clone(),
        dates: r.dates.clone(),
        standardized: true,
        label: r.label.clone(),
    })
}

/// Load, align, log-return and standardize a pair of price files.
pub fn load_pair(
    a: impl AsRef<Path>,
    b: impl AsRef<Path>,
) -> Result<(ReturnPanel, ReturnPanel)> {
    let (pa, pb) = align_calendars(&load_prices_auto(a)?, &load_prices_auto(b)?)?;
    Ok((standardize(&log_returns(&pa)?)?, standardize(&log_returns(&pb)?)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn obs(date: &str, ticker: &str, price: f64) -> Observation {
        Observation {
            date: d(date),
            ticker: ticker.into(),
            price,
        }
    }

    #[test]
    fn parses_long_csv() {
        let text = "date,ticker,price\n2005-01-03,AAA,10.0\n2005-01-04,AAA,11.0\n2005-01-05,AAA,10.5\n";
        let p = parse_prices(text, PriceFormat::LongCsv, "x").unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.observations()[1].price, 11.0);
    }

    #[test]
    fn parses_wide_csv() {
        let text = "date,AAA,BBB\n2005-01-03,1.0,2.0\n2005-01-04,1.5,2.5\n";
        assert_eq!(detect_format(text.lines().next().unwrap()), PriceFormat::WideCsv);
        let p = parse_prices(text, PriceFormat::WideCsv, "x").unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.tickers(), vec!["AAA", "BBB"]);
    }

    #[test]
    fn rejects_zero_price_with_line() {
        let text = "date,ticker,price\n2005-01-03,AAA,10.0\n2005-01-04,AAA,0.0\n";
        match parse_prices(text, PriceFormat::LongCsv, "x") {
            Err(Error::NonPositivePrice { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        let text = "date,ticker,price\n2005-01-03,AAA,10.0\n2005-01-03,AAA,11.0\n";
        assert!(matches!(
            parse_prices(text, PriceFormat::LongCsv, "x"),
            Err(Error::DuplicateObservation { .. })
        ));
        let text = "date,ticker,price\n2005-01-03,AAA,10.0\n2005-13-04,AAA,11.0\n";
        match parse_prices(text, PriceFormat::LongCsv, "x") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alignment_intersects_dates() {
        let a = PriceTable::new(
            "a",
            vec![obs("2005-01-01", "A", 1.0), obs("2005-01-02", "A", 1.0), obs("2005-01-03", "A", 1.0)],
        )
        .unwrap();
        let b = PriceTable::new(
            "b",
            vec![obs("2005-01-02", "B", 1.0), obs("2005-01-03", "B", 1.0), obs("2005-01-04", "B", 1.0)],
        )
        .unwrap();
        let (a2, b2) = align_calendars(&a, &b).unwrap();
        let want: BTreeSet<_> = [d("2005-01-02"), d("2005-01-03")].into();
        assert_eq!(a2.dates(), want);
        assert_eq!(b2.dates(), want);

        let (a3, a4) = align_calendars(&a, &a).unwrap();
        assert_eq!(a3, a);
        assert_eq!(a4, a);

        let c = PriceTable::new("c", vec![obs("2006-01-01", "C", 1.0)]).unwrap();
        assert!(matches!(align_calendars(&a, &c), Err(Error::EmptyIntersection)));
    }

    #[test]
    fn alignment_drops_dates_missing_any_ticker() {
        let a = PriceTable::new(
            "a",
            vec![
                obs("2005-01-01", "A", 1.0),
                obs("2005-01-02", "A", 1.0),
                obs("2005-01-01", "Z", 1.0),
            ],
        )
        .unwrap();
        let (a2, _) = align_calendars(&a, &a).unwrap();
        assert_eq!(a2.dates(), [d("2005-01-01")].into());
    }

    #[test]
    fn log_returns_by_hand() {
        let p = PriceTable::new(
            "a",
            vec![obs("2005-01-03", "A", 10.0), obs("2005-01-04", "A", 11.0), obs("2005-01-05", "A", 10.5)],
        )
        .unwrap();
        let r = log_returns(&p).unwrap();
        assert_eq!(r.values.dim(), (1, 2));
        assert!((r.values[[0, 0]] - 0.0953101798043249).abs() < 1e-12);
        assert!((r.values[[0, 1]] + 0.0465200156348928).abs() < 1e-12);
        assert!(!r.standardized);
        assert_eq!(r.dates, vec![d("2005-01-04"), d("2005-01-05")]);
    }

    #[test]
    fn constant_prices_and_single_date() {
        let p = PriceTable::new(
            "a",
            vec![obs("2005-01-03", "A", 5.0), obs("2005-01-04", "A", 5.0), obs("2005-01-05", "A", 5.0)],
        )
        .unwrap();
        assert!(log_returns(&p).unwrap().values.iter().all(|&x| x == 0.0));
        let p = PriceTable::new("a", vec![obs("2005-01-03", "A", 5.0)]).unwrap();
        assert!(matches!(log_returns(&p), Err(Error::TooFewPrices { .. })));
    }

    #[test]
    fn standardize_examples() {
        let r = ReturnPanel::from_matrix("x", array![[1.0, -1.0], [2.0, 0.0]]).unwrap();
        let s = standardize(&r).unwrap();
        assert_eq!(s.values.row(0).to_vec(), vec![1.0, -1.0]);
        let r = ReturnPanel::from_matrix("x", array![[2.0, 0.0, -2.0]]).unwrap();
        let s = standardize(&r).unwrap();
        let k = 1.5f64.sqrt();
        for (got, want) in s.values.iter().zip([k, 0.0, -k]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!(s.standardized);
        s.check_standardized().unwrap();

        let r = ReturnPanel::from_matrix("x", array![[0.1, 0.1, 0.1]]).unwrap();
        assert!(matches!(standardize(&r), Err(Error::ZeroVariance { .. })));
    }

    #[test]
    fn panel_csv_has_ticker_labels() {
        let r = ReturnPanel::from_matrix("s", array![[1.0, -1.0]]).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "ticker,2005-01-03,2005-01-04\ns000,1,-1\n");
        let meta = serde_json::to_string(&r.meta()).unwrap();
        assert_eq!(meta, r#"{"system_label":"s","N":1,"T":2,"standardized":false}"#);
    }

    #[test]
    fn prices_round_trip_through_returns() {
        let r = ReturnPanel::from_matrix("s", array![[0.01, -0.02, 0.03], [0.0, 0.05, -0.01]]).unwrap();
        let p = r.to_prices(100.0).unwrap();
        let mut buf = Vec::new();
        p.write_wide_csv(&mut buf).unwrap();
        let p2 = parse_prices(std::str::from_utf8(&buf).unwrap(), PriceFormat::WideCsv, "s").unwrap();
        let back = log_returns(&p2).unwrap();
        for (a, b) in back.values.iter().zip(r.values.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn standardize_is_idempotent(rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 8), 1..4)) {
                let n = rows.len();
                let flat: Vec<f64> = rows.concat();
                let m = Array2::from_shape_vec((n, 8), flat).unwrap();
                let r = ReturnPanel::from_matrix("p", m).unwrap();
                if let Ok(once) = standardize(&r) {
                    let twice = standardize(&once).unwrap();
                    for (a, b) in once.values.iter().zip(twice.values.iter()) {
                        prop_assert!((a - b).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
