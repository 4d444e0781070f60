use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{validate_markets, MarketMeta, PricePanel, ReturnPanel};
use crate::error::{Error, Result};

const DATE_FORMAT: &str = "%Y-%m-%d";
const MISSING_TOKENS: [&str; 7] = ["", "na", "nan", "null", "n/a", ".", "-"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Keep only dates on which every market has a value.
    #[default]
    Intersect,
    /// Keep every date; carry each market's last observation forward.
    /// Leading dates before a market's first observation are dropped.
    ForwardFill,
}

impl FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersect" => Ok(MissingPolicy::Intersect),
            "forward-fill" | "ffill" => Ok(MissingPolicy::ForwardFill),
            other => Err(Error::Config(format!("unknown missing-data policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    pub policy: MissingPolicy,
    pub delimiter: u8,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            policy: MissingPolicy::Intersect,
            delimiter: b',',
        }
    }
}

impl IngestOptions {
    pub fn for_path(path: &Path, policy: MissingPolicy) -> Self {
        let delimiter = match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("tab") => b'\t',
            _ => b',',
        };
        Self { policy, delimiter }
    }
}

/// Loads a `date,<id1>,...,<idM>` file into a [`PricePanel`] ordered by `order_index`.
pub fn load_price_panel(
    path: impl AsRef<Path>,
    meta: &[MarketMeta],
    policy: MissingPolicy,
) -> Result<PricePanel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_price_panel(file, meta, IngestOptions::for_path(path, policy))
}

pub fn read_price_panel<R: Read>(
    reader: R,
    meta: &[MarketMeta],
    options: IngestOptions,
) -> Result<PricePanel> {
    let markets = validate_markets(meta)?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    if headers.get(0).map(|h| h.eq_ignore_ascii_case("date")) != Some(true) {
        return Err(Error::Config("first column of the price file must be 'date'".into()));
    }
    let known: HashMap<&str, usize> = markets
        .iter()
        .enumerate()
        .map(|(i, m)| (m.market_id.as_str(), i))
        .collect();
    // column position in file -> market row
    let mut column_to_row = Vec::with_capacity(headers.len() - 1);
    let mut found = vec![false; markets.len()];
    for name in headers.iter().skip(1) {
        let row = *known
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown market column '{name}'")))?;
        if found[row] {
            return Err(Error::Config(format!("duplicate market column '{name}'")));
        }
        found[row] = true;
        column_to_row.push(row);
    }
    if let Some(missing) = found.iter().position(|f| !f) {
        return Err(Error::Config(format!(
            "market '{}' has no column in the price file",
            markets[missing].market_id
        )));
    }

    let m = markets.len();
    let mut records: BTreeMap<NaiveDate, Vec<Option<f64>>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let raw_date = rec.get(0).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, DATE_FORMAT).map_err(|e| Error::DataAt {
            row: line,
            column: "date".into(),
            message: format!("cannot parse '{raw_date}' as YYYY-MM-DD: {e}"),
        })?;
        let mut values = vec![None; m];
        for (pos, &row) in column_to_row.iter().enumerate() {
            let cell = rec.get(pos + 1).unwrap_or("");
            if MISSING_TOKENS.contains(&cell.to_ascii_lowercase().as_str()) {
                continue;
            }
            let column = || markets[row].market_id.clone();
            let v: f64 = cell.parse().map_err(|_| Error::DataAt {
                row: line,
                column: column(),
                message: format!("cannot parse '{cell}' as a number"),
            })?;
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::DataAt {
                    row: line,
                    column: column(),
                    message: format!("price must be positive, got {v}"),
                });
            }
            values[row] = Some(v);
        }
        if records.insert(date, values).is_some() {
            return Err(Error::DataAt {
                row: line,
                column: "date".into(),
                message: format!("duplicate date {date}"),
            });
        }
    }

    let rows: Vec<(NaiveDate, Vec<f64>)> = match options.policy {
        MissingPolicy::Intersect => records
            .into_iter()
            .filter_map(|(d, v)| v.into_iter().collect::<Option<Vec<_>>>().map(|v| (d, v)))
            .collect(),
        MissingPolicy::ForwardFill => {
            let mut last: Vec<Option<f64>> = vec![None; m];
            records
                .into_iter()
                .filter_map(|(d, v)| {
                    for (slot, obs) in last.iter_mut().zip(v) {
                        if obs.is_some() {
                            *slot = obs;
                        }
                    }
                    last.iter().copied().collect::<Option<Vec<_>>>().map(|v| (d, v))
                })
                .collect()
        }
    };
    if rows.is_empty() {
        return Err(Error::Data(
            "no dates on which every market has a price".into(),
        ));
    }

    let mut prices = Array2::zeros((m, rows.len()));
    let mut dates = Vec::with_capacity(rows.len());
    for (t, (date, values)) in rows.into_iter().enumerate() {
        dates.push(date);
        for (row, v) in values.into_iter().enumerate() {
            prices[[row, t]] = v;
        }
    }
    PricePanel::new(markets, dates, prices)
}

fn write_table<W: Write>(
    writer: W,
    markets: &[MarketMeta],
    dates: &[NaiveDate],
    values: &Array2<f64>,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string()];
    header.extend(markets.iter().map(|m| m.market_id.clone()));
    wtr.write_record(&header)?;
    for (t, date) in dates.iter().enumerate() {
        let mut rec = vec![date.format(DATE_FORMAT).to_string()];
        rec.extend(values.column(t).iter().map(|v| v.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::Internal(e.to_string()))?;
    Ok(())
}

/// Writes prices in the same layout [`load_price_panel`] reads.
pub fn write_price_csv<W: Write>(writer: W, panel: &PricePanel) -> Result<()> {
    write_table(writer, panel.markets(), panel.dates(), panel.prices())
}

pub fn write_return_csv<W: Write>(writer: W, panel: &ReturnPanel) -> Result<()> {
    write_table(writer, panel.markets(), panel.dates(), panel.returns())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::Zone;

    fn meta(ids: &[&str]) -> Vec<MarketMeta> {
        ids.iter()
            .enumerate()
            .map(|(i, id)| MarketMeta::new(id, id, Zone::Europe, i + 1))
            .collect()
    }

    fn read(text: &str, ids: &[&str], policy: MissingPolicy) -> Result<PricePanel> {
        read_price_panel(
            text.as_bytes(),
            &meta(ids),
            IngestOptions {
                policy,
                delimiter: b',',
            },
        )
    }

    #[test]
    fn single_market_identity() {
        let p = read(
            "date,A\n2001-01-02,10\n2001-01-03,11\n2001-01-04,12.5\n",
            &["A"],
            MissingPolicy::Intersect,
        )
        .unwrap();
        assert_eq!(p.prices().dim(), (1, 3));
        assert_eq!(p.prices().row(0).to_vec(), vec![10.0, 11.0, 12.5]);
    }

    #[test]
    fn columns_are_reordered_by_order_index() {
        let p = read(
            "date,B,A\n2001-01-02,1,2\n2001-01-03,3,4\n",
            &["A", "B"],
            MissingPolicy::Intersect,
        )
        .unwrap();
        assert_eq!(p.prices().row(0).to_vec(), vec![2.0, 4.0]);
        assert_eq!(p.prices().row(1).to_vec(), vec![1.0, 3.0]);
    }

    const GAPPY: &str = "date,A,B\n\
        2001-01-02,10,20\n\
        2001-01-03,11,21\n\
        2001-01-04,12,\n\
        2001-01-05,13,23\n\
        2001-01-08,14,24\n";

    #[test]
    fn forward_fill_carries_previous_value() {
        let p = read(GAPPY, &["A", "B"], MissingPolicy::ForwardFill).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p.prices().row(1).to_vec(), vec![20.0, 21.0, 21.0, 23.0, 24.0]);
    }

    #[test]
    fn intersect_drops_gap_dates() {
        let p = read(GAPPY, &["A", "B"], MissingPolicy::Intersect).unwrap();
        assert_eq!(p.len(), 4);
        assert!(!p.dates().contains(&NaiveDate::from_ymd_opt(2001, 1, 4).unwrap()));
    }

    #[test]
    fn forward_fill_drops_leading_gap() {
        let p = read(
            "date,A,B\n2001-01-02,10,NA\n2001-01-03,11,21\n",
            &["A", "B"],
            MissingPolicy::ForwardFill,
        )
        .unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn unsorted_rows_are_ordered() {
        let p = read(
            "date,A\n2001-01-03,11\n2001-01-02,10\n",
            &["A"],
            MissingPolicy::Intersect,
        )
        .unwrap();
        assert_eq!(p.prices().row(0).to_vec(), vec![10.0, 11.0]);
    }

    #[test]
    fn unknown_column_is_config_error() {
        let err = read("date,A,Z\n2001-01-02,1,2\n", &["A"], MissingPolicy::Intersect).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        let err = read("date,A\n2001-01-02,1\n", &["A", "B"], MissingPolicy::Intersect).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn non_positive_price_reports_location() {
        let err = read(
            "date,A,B\n2001-01-02,1,2\n2001-01-03,1,-2\n",
            &["A", "B"],
            MissingPolicy::Intersect,
        )
        .unwrap_err();
        match err {
            Error::DataAt { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "B");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn empty_intersection_is_data_error() {
        let err = read(
            "date,A,B\n2001-01-02,1,\n2001-01-03,,2\n",
            &["A", "B"],
            MissingPolicy::Intersect,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn bad_date_and_duplicate_date() {
        assert!(matches!(
            read("date,A\n01/02/2001,1\n", &["A"], MissingPolicy::Intersect),
            Err(Error::DataAt { .. })
        ));
        assert!(matches!(
            read("date,A\n2001-01-02,1\n2001-01-02,2\n", &["A"], MissingPolicy::Intersect),
            Err(Error::DataAt { .. })
        ));
    }

    #[test]
    fn write_then_read_is_exact() {
        let p = read(GAPPY, &["A", "B"], MissingPolicy::ForwardFill).unwrap();
        let mut buf = Vec::new();
        write_price_csv(&mut buf, &p).unwrap();
        let back = read(std::str::from_utf8(&buf).unwrap(), &["A", "B"], MissingPolicy::Intersect).unwrap();
        assert_eq!(back, p);
    }
}
