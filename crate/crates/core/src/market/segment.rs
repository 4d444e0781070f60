use std::fmt;
use std::ops::Range;

use chrono::{Datelike, NaiveDate};
use ndarray::{s, ArrayView2};
use serde::{Deserialize, Serialize};

use super::ReturnPanel;
use crate::error::{Error, Result};

/// A calendar month, totally ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn of(date: NaiveDate) -> Self {
        Self {
            year: date.year(),
            month: date.month(),
        }
    }

    /// Months since year 0.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_ordinal(ord: i64) -> Self {
        Self {
            year: ord.div_euclid(12) as i32,
            month: ord.rem_euclid(12) as u32 + 1,
        }
    }

    pub fn plus(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    pub fn months_until(self, later: YearMonth) -> i64 {
        later.ordinal() - self.ordinal()
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid month")
    }

    pub fn last_day(self) -> NaiveDate {
        self.plus(1).first_day().pred_opt().expect("valid date")
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// One calendar window of the return panel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// 1-based.
    pub index: usize,
    pub first_month: YearMonth,
    pub last_month: YearMonth,
    /// First trading day in the window (first calendar day of the window if it has none).
    pub start_date: NaiveDate,
    /// Last trading day of the window's final month (falls back to the last
    /// trading day in the window, then to the final calendar day).
    pub end_date: NaiveDate,
    /// Column range into the return panel.
    pub columns: Range<usize>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SegmentSeries {
    returns: ReturnPanel,
    window_months: usize,
    step_months: usize,
    segments: Vec<Segment>,
}

impl SegmentSeries {
    pub fn returns(&self) -> &ReturnPanel {
        &self.returns
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn window_months(&self) -> usize {
        self.window_months
    }

    pub fn step_months(&self) -> usize {
        self.step_months
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// M×L_s view of the returns inside `segment`.
    pub fn view(&self, segment: &Segment) -> ArrayView2<'_, f64> {
        self.returns
            .returns()
            .slice(s![.., segment.columns.clone()])
    }
}

/// Cuts the return panel into `window_months`-long calendar windows stepped
/// by `step_months`, starting at the month of the first return.
///
/// Months are counted inclusively from the first to the last return date, so
/// partially covered boundary months count as whole months.
pub fn segment_by_calendar(
    rp: &ReturnPanel,
    window_months: usize,
    step_months: usize,
) -> Result<SegmentSeries> {
    if window_months == 0 || step_months == 0 {
        return Err(Error::Config(
            "window_months and step_months must both be at least 1".into(),
        ));
    }
    let dates = rp.dates();
    let (first, last) = match (dates.first(), dates.last()) {
        (Some(f), Some(l)) => (YearMonth::of(*f), YearMonth::of(*l)),
        _ => return Err(Error::InsufficientData("return panel is empty".into())),
    };
    let total_months = first.months_until(last) as usize + 1;
    if total_months < window_months {
        return Err(Error::InsufficientData(format!(
            "returns span {total_months} calendar months, shorter than one {window_months}-month window"
        )));
    }
    let count = (total_months - window_months) / step_months + 1;

    // Dates are sorted, so each window is a contiguous column range.
    let lower = |ym: YearMonth| dates.partition_point(|d| YearMonth::of(*d) < ym);
    let segments = (0..count)
        .map(|i| {
            let first_month = first.plus((i * step_months) as i64);
            let last_month = first_month.plus(window_months as i64 - 1);
            let columns = lower(first_month)..lower(last_month.plus(1));
            let start_date = dates
                .get(columns.start)
                .filter(|_| !columns.is_empty())
                .copied()
                .unwrap_or_else(|| first_month.first_day());
            let end_date = if columns.is_empty() {
                last_month.last_day()
            } else {
                dates[columns.end - 1]
            };
            Segment {
                index: i + 1,
                first_month,
                last_month,
                start_date,
                end_date,
                columns,
            }
        })
        .collect();

    Ok(SegmentSeries {
        returns: rp.clone(),
        window_months,
        step_months,
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{MarketMeta, Zone};
    use ndarray::Array2;

    /// Weekdays between the two dates inclusive.
    fn weekdays(from: NaiveDate, to: NaiveDate) -> Vec<NaiveDate> {
        from.iter_days()
            .take_while(|d| *d <= to)
            .filter(|d| d.weekday().num_days_from_monday() < 5)
            .collect()
    }

    fn panel(dates: Vec<NaiveDate>) -> ReturnPanel {
        let n = dates.len();
        ReturnPanel::new(
            vec![MarketMeta::new("A", "A", Zone::Asia, 1)],
            dates,
            Array2::from_shape_fn((1, n), |(_, t)| t as f64 * 1e-3),
        )
        .unwrap()
    }

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn twelve_months_is_one_window() {
        let rp = panel(weekdays(ymd(2001, 1, 1), ymd(2001, 12, 31)));
        let s = segment_by_calendar(&rp, 12, 1).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.segments()[0].columns, 0..rp.len());
        assert_eq!(s.segments()[0].end_date, ymd(2001, 12, 31));
    }

    #[test]
    fn fourteen_months_is_three_windows() {
        // Enumerated by hand: Jan-Dec, Feb-Jan, Mar-Feb.
        let rp = panel(weekdays(ymd(2001, 1, 1), ymd(2002, 2, 28)));
        let s = segment_by_calendar(&rp, 12, 1).unwrap();
        assert_eq!(s.len(), 3);
        let months: Vec<_> = s
            .segments()
            .iter()
            .map(|seg| (seg.first_month.to_string(), seg.last_month.to_string()))
            .collect();
        assert_eq!(
            months,
            [
                ("2001-01".to_string(), "2001-12".to_string()),
                ("2001-02".to_string(), "2002-01".to_string()),
                ("2001-03".to_string(), "2002-02".to_string()),
            ]
        );
        assert_eq!(s.segments()[2].end_date, ymd(2002, 2, 28));
        assert_eq!(s.segments()[1].end_date, ymd(2002, 1, 31));
    }

    #[test]
    fn too_short_is_insufficient() {
        let rp = panel(weekdays(ymd(2001, 1, 1), ymd(2001, 11, 30)));
        assert!(matches!(
            segment_by_calendar(&rp, 12, 1),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn zero_window_is_config_error() {
        let rp = panel(weekdays(ymd(2001, 1, 1), ymd(2001, 11, 30)));
        assert!(matches!(segment_by_calendar(&rp, 0, 1), Err(Error::Config(_))));
    }

    #[test]
    fn window_count_formula_with_larger_step() {
        let rp = panel(weekdays(ymd(2001, 1, 1), ymd(2003, 12, 31)));
        // 36 months, L=12, step 5: floor(24/5)+1 = 5
        assert_eq!(segment_by_calendar(&rp, 12, 5).unwrap().len(), 5);
    }

    #[test]
    fn view_matches_columns() {
        let rp = panel(weekdays(ymd(2001, 1, 1), ymd(2002, 2, 28)));
        let s = segment_by_calendar(&rp, 12, 1).unwrap();
        let seg = &s.segments()[1];
        let v = s.view(seg);
        assert_eq!(v.ncols(), seg.len());
        assert_eq!(v[[0, 0]], rp.returns()[[0, seg.columns.start]]);
        assert!(rp.dates()[seg.columns.clone()]
            .iter()
            .all(|d| YearMonth::of(*d) >= seg.first_month && YearMonth::of(*d) <= seg.last_month));
    }

    #[test]
    fn year_month_arithmetic() {
        let ym = YearMonth { year: 1999, month: 11 };
        assert_eq!(ym.plus(3), YearMonth { year: 2000, month: 2 });
        assert_eq!(ym.months_until(YearMonth { year: 2000, month: 2 }), 3);
        assert_eq!(YearMonth { year: 2000, month: 2 }.last_day(), ymd(2000, 2, 29));
    }
}
