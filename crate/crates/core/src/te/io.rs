//! Line-oriented text form of a [`TeMatrixSeries`]:
//!
//! ```text
//! # tecnet-te-series v1
//! # markets=[{"id":"DJI",...}, ...]
//! # provenance={"te":{...},"lag_policy":{...},...}
//! segment,end_date,M,v11,v12,...,vMM
//! 1,1993-01-29,10,NA,0.2113,...
//! ```
//!
//! Values are row-major; `NA` marks the diagonal and flagged cells. Floats use
//! the shortest representation that parses back to the same bits.

use std::io::{BufRead, Write};

use chrono::NaiveDate;
use ndarray::Array2;

use super::matrix::{Provenance, TeMatrix, TeMatrixSeries};
use crate::error::{Error, Result};
use crate::market::{validate_markets, MarketMeta};

const MAGIC: &str = "# tecnet-te-series v1";
const SENTINEL: &str = "NA";

pub fn write_te_series<W: Write>(mut w: W, series: &TeMatrixSeries) -> Result<()> {
    let io = |e| Error::Internal(format!("writing TE series: {e}"));
    writeln!(w, "{MAGIC}").map_err(io)?;
    writeln!(w, "# markets={}", serde_json::to_string(&series.markets)?).map_err(io)?;
    writeln!(w, "# provenance={}", serde_json::to_string(&series.provenance)?).map_err(io)?;
    writeln!(w, "segment,end_date,M,values").map_err(io)?;
    for m in &series.matrices {
        let mut line = format!(
            "{},{},{}",
            m.segment_index,
            m.end_date.format("%Y-%m-%d"),
            m.n_markets()
        );
        for i in 0..m.n_markets() {
            for j in 0..m.n_markets() {
                line.push(',');
                match m.get(i, j) {
                    Some(v) => line.push_str(&v.to_string()),
                    None => line.push_str(SENTINEL),
                }
            }
        }
        writeln!(w, "{line}").map_err(io)?;
    }
    Ok(())
}

pub fn read_te_series<R: BufRead>(r: R) -> Result<TeMatrixSeries> {
    let bad = |line: usize, msg: String| Error::DataAt {
        row: line,
        column: "te-series".into(),
        message: msg,
    };
    let mut lines = r.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i + 1, l)),
            Some((i, Err(e))) => Err(bad(i + 1, e.to_string())),
            None => Err(Error::Data(format!("TE series truncated before {what}"))),
        }
    };

    let (n, magic) = next("header")?;
    if magic.trim_end() != MAGIC {
        return Err(bad(n, "not a tecnet TE series file".into()));
    }
    let (n, markets_line) = next("markets header")?;
    let markets: Vec<MarketMeta> = serde_json::from_str(
        markets_line
            .strip_prefix("# markets=")
            .ok_or_else(|| bad(n, "expected '# markets='".into()))?,
    )?;
    let markets = validate_markets(&markets)?;
    let (n, prov_line) = next("provenance header")?;
    let provenance: Provenance = serde_json::from_str(
        prov_line
            .strip_prefix("# provenance=")
            .ok_or_else(|| bad(n, "expected '# provenance='".into()))?,
    )?;
    next("column header")?;

    let m = markets.len();
    let mut matrices = Vec::new();
    while let Ok((n, line)) = next("") {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 + m * m {
            return Err(bad(n, format!("expected {} fields, found {}", 3 + m * m, fields.len())));
        }
        let segment_index = fields[0]
            .parse()
            .map_err(|_| bad(n, format!("bad segment index '{}'", fields[0])))?;
        let end_date = NaiveDate::parse_from_str(fields[1], "%Y-%m-%d")
            .map_err(|_| bad(n, format!("bad date '{}'", fields[1])))?;
        if fields[2].parse::<usize>().ok() != Some(m) {
            return Err(bad(n, format!("record M={} does not match header M={m}", fields[2])));
        }
        let mut values = Array2::from_elem((m, m), f64::NAN);
        for (idx, f) in fields[3..].iter().enumerate() {
            if *f == SENTINEL {
                continue;
            }
            let v: f64 = f.parse().map_err(|_| bad(n, format!("bad value '{f}'")))?;
            if idx / m == idx % m {
                return Err(bad(n, "diagonal cell must be NA".into()));
            }
            values[[idx / m, idx % m]] = v;
        }
        matrices.push(TeMatrix {
            segment_index,
            end_date,
            values,
        });
    }
    Ok(TeMatrixSeries {
        markets,
        matrices,
        provenance,
    })
}
