use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::scalar::MetricSeries;
use crate::error::{Error, Result};
use crate::market::YearMonth;

pub const DEFAULT_MAX_LEAD_MONTHS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrisisEvent {
    pub id: String,
    pub start_date: NaiveDate,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrisisCalendar {
    events: Vec<CrisisEvent>,
}

impl CrisisCalendar {
    pub fn new(events: Vec<CrisisEvent>) -> Result<Self> {
        if let Some(w) = events.windows(2).find(|w| w[0].start_date >= w[1].start_date) {
            return Err(Error::Config(format!(
                "crisis dates must be strictly increasing ({} then {})",
                w[0].id, w[1].id
            )));
        }
        for (i, e) in events.iter().enumerate() {
            if events[..i].iter().any(|o| o.id == e.id) {
                return Err(Error::Config(format!("duplicate crisis id '{}'", e.id)));
            }
        }
        Ok(Self { events })
    }

    /// The eight crises of 1992–2017 used as the default calendar.
    pub fn builtin() -> Self {
        let ev = |id: &str, y, m, d, label: &str| CrisisEvent {
            id: id.into(),
            start_date: NaiveDate::from_ymd_opt(y, m, d).expect("valid date"),
            label: label.into(),
        };
        Self {
            events: vec![
                ev("C1", 1994, 12, 30, "Mexican peso crisis"),
                ev("C2", 1997, 7, 2, "Asian financial crisis"),
                ev("C3", 2002, 9, 23, "Internet bubble burst"),
                ev("C4", 2005, 5, 29, "EU constitutional treaty rejected; euro falls"),
                ev("C5", 2008, 9, 14, "Global financial crisis"),
                ev("C6", 2009, 12, 8, "Greek sovereign rating downgrades"),
                ev("C7", 2012, 5, 1, "Japanese financial crisis"),
                ev("C8", 2014, 12, 16, "Russian financial crisis"),
            ],
        }
    }

    pub fn events(&self) -> &[CrisisEvent] {
        &self.events
    }

    /// Reads `[[events]]` tables with `id`, `start_date` ("YYYY-MM-DD") and `label`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: CrisisCalendar = toml::from_str(&text)?;
        Self::new(raw.events)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("calendar always serialises")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub peak_date: NaiveDate,
    pub trend_value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakMatch {
    pub event_id: String,
    pub peak_date: NaiveDate,
    /// Event month minus peak month.
    pub lead_months: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    pub matches: Vec<PeakMatch>,
    pub unmatched_peaks: Vec<NaiveDate>,
    pub unmatched_events: Vec<String>,
}

/// Indices of strict local maxima. A flat top counts once, at its last index,
/// when both sides fall away; series endpoints are never peaks.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let n = values.len();
    let mut i = 1;
    while i + 1 < n {
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        if j + 1 < n && values[i - 1] < values[i] && values[j + 1] < values[j] {
            peaks.push(j);
        }
        i = j + 1;
    }
    peaks
}

/// Finds trend peaks and pairs each event with the nearest unused peak in the
/// same or an earlier month, at most `max_lead_months` before it.
pub fn detect_peaks(
    trend: &MetricSeries,
    calendar: &CrisisCalendar,
    max_lead_months: usize,
) -> Result<PeakReport> {
    if trend.is_empty() {
        return Err(Error::InsufficientData("trend series is empty".into()));
    }
    let peaks: Vec<Peak> = local_maxima(&trend.values)
        .into_iter()
        .map(|i| Peak {
            peak_date: trend.segment_end_dates[i],
            trend_value: trend.values[i],
        })
        .collect();

    let mut used = vec![false; peaks.len()];
    let mut matches = Vec::new();
    let mut unmatched_events = Vec::new();
    for event in calendar.events() {
        let event_month = YearMonth::of(event.start_date);
        let best = peaks
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, p)| (k, YearMonth::of(p.peak_date).months_until(event_month)))
            .filter(|&(_, lead)| lead >= 0 && lead <= max_lead_months as i64)
            .min_by_key(|&(_, lead)| lead);
        match best {
            Some((k, lead)) => {
                used[k] = true;
                matches.push(PeakMatch {
                    event_id: event.id.clone(),
                    peak_date: peaks[k].peak_date,
                    lead_months: lead,
                });
            }
            None => unmatched_events.push(event.id.clone()),
        }
    }
    let unmatched_peaks = peaks
        .iter()
        .zip(&used)
        .filter(|(_, u)| !**u)
        .map(|(p, _)| p.peak_date)
        .collect();
    Ok(PeakReport {
        peaks,
        matches,
        unmatched_peaks,
        unmatched_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricKind;

    fn monthly(values: Vec<f64>, first: YearMonth) -> MetricSeries {
        let dates = (0..values.len())
            .map(|i| first.plus(i as i64).last_day())
            .collect();
        MetricSeries::new(MetricKind::Trend, dates, values).unwrap()
    }

    fn calendar(dates: &[(i32, u32, u32)]) -> CrisisCalendar {
        CrisisCalendar::new(
            dates
                .iter()
                .enumerate()
                .map(|(i, &(y, m, d))| CrisisEvent {
                    id: format!("E{}", i + 1),
                    start_date: NaiveDate::from_ymd_opt(y, m, d).unwrap(),
                    label: String::new(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn monotone_has_no_peaks() {
        assert!(local_maxima(&[1.0, 2.0, 3.0, 4.0]).is_empty());
        assert!(local_maxima(&[4.0, 3.0, 2.0]).is_empty());
    }

    #[test]
    fn plateau_reports_last_index() {
        assert_eq!(local_maxima(&[0.0, 1.0, 1.0, 1.0, 0.5]), vec![3]);
        // rising into a plateau that never falls is not a peak
        assert!(local_maxima(&[0.0, 1.0, 1.0]).is_empty());
    }

    #[test]
    fn single_peak_five_months_ahead() {
        let first = YearMonth { year: 2000, month: 1 };
        let s = monthly(vec![0.1, 0.2, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.0, -0.1], first);
        // peak in 2000-03, event in 2000-08
        let r = detect_peaks(&s, &calendar(&[(2000, 8, 10)]), 24).unwrap();
        assert_eq!(r.peaks.len(), 1);
        assert_eq!(r.matches.len(), 1);
        assert_eq!(r.matches[0].lead_months, 5);
        assert!(r.unmatched_events.is_empty() && r.unmatched_peaks.is_empty());
    }

    #[test]
    fn peak_after_event_or_too_early_is_ignored() {
        let first = YearMonth { year: 2000, month: 1 };
        let s = monthly(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0], first);
        let r = detect_peaks(&s, &calendar(&[(2000, 3, 1)]), 24).unwrap();
        assert!(r.matches.is_empty());
        assert_eq!(r.unmatched_events, vec!["E1".to_string()]);
        let r = detect_peaks(&s, &calendar(&[(2000, 12, 1)]), 3).unwrap();
        assert!(r.matches.is_empty());
    }

    #[test]
    fn each_peak_used_once() {
        let first = YearMonth { year: 2000, month: 1 };
        let s = monthly(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0], first);
        let r = detect_peaks(&s, &calendar(&[(2000, 4, 1), (2000, 5, 1)]), 24).unwrap();
        assert_eq!(r.matches.len(), 1);
        assert_eq!(r.matches[0].event_id, "E1");
        assert_eq!(r.unmatched_events, vec!["E2".to_string()]);
    }

    #[test]
    fn same_month_peak_has_zero_lead() {
        let first = YearMonth { year: 2012, month: 3 };
        let s = monthly(vec![0.0, 0.5, 1.0, 0.5], first);
        let cal = CrisisCalendar::builtin();
        let r = detect_peaks(&s, &cal, 24).unwrap();
        let c7 = r.matches.iter().find(|m| m.event_id == "C7").unwrap();
        assert_eq!(c7.lead_months, 0);
    }

    #[test]
    fn builtin_calendar_is_valid_and_round_trips() {
        let cal = CrisisCalendar::builtin();
        assert_eq!(CrisisCalendar::new(cal.events().to_vec()).unwrap(), cal);
        assert_eq!(cal.events().len(), 8);
        let back: CrisisCalendar = toml::from_str(&cal.to_toml()).unwrap();
        assert_eq!(back, cal);
    }

    #[test]
    fn calendar_rejects_unordered() {
        let e = |id: &str, y| CrisisEvent {
            id: id.into(),
            start_date: NaiveDate::from_ymd_opt(y, 1, 1).unwrap(),
            label: String::new(),
        };
        assert!(CrisisCalendar::new(vec![e("A", 2001), e("B", 2000)]).is_err());
        assert!(CrisisCalendar::new(vec![e("A", 2000), e("A", 2001)]).is_err());
    }
}
