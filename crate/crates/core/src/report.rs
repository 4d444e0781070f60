//! Plain-text summary of a run directory.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::PeakReport;
use crate::pipeline::{load_summary, Manifest, RunStatus, PEAKS_FILE};

fn range(r: Option<(f64, f64)>) -> String {
    match r {
        Some((lo, hi)) => format!("[{lo:.4}, {hi:.4}]"),
        None => "undefined".into(),
    }
}

/// Renders the summary of the run stored in `dir`.
pub fn render_report(dir: impl AsRef<Path>) -> Result<String> {
    let dir = dir.as_ref();
    let manifest = Manifest::load(dir)?;
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "tecnet {} run in {}", manifest.version, dir.display()).ok();
    if manifest.status == RunStatus::Failed {
        let stage = manifest.failed_stage.map(|s| s.to_string()).unwrap_or_else(|| "unknown".into());
        writeln!(w, "status: FAILED at stage {stage}").ok();
        if let Some(e) = &manifest.error {
            writeln!(w, "error: {e}").ok();
        }
        writeln!(w, "artifacts written before the failure: {}", manifest.artifacts.len()).ok();
        for a in &manifest.artifacts {
            writeln!(w, "  {}", a.file).ok();
        }
        return Ok(out);
    }
    let s = load_summary(dir)?;
    let r = &s.reference;
    writeln!(w, "status: ok").ok();
    writeln!(w, "markets: {}", s.markets.join(", ")).ok();
    writeln!(
        w,
        "returns: {} days, {} segments of {} months, step {}",
        s.return_days, s.segments, s.window_months, s.step_months
    )
    .ok();
    if s.invalid_cells > 0 {
        writeln!(w, "undefined TE cells: {}", s.invalid_cells).ok();
    }
    writeln!(w).ok();
    writeln!(w, "{:<28} {:>18} {:>18}", "quantity", "this run", "reference").ok();
    let row = |w: &mut String, name: &str, ours: String, theirs: String| {
        writeln!(w, "{name:<28} {ours:>18} {theirs:>18}").ok();
    };
    match &s.te {
        Some(te) => {
            row(w, "TE mean", format!("{:.4}", te.mean), format!("{:.4}", r.te_mean));
            row(w, "TE std", format!("{:.4}", te.std), format!("{:.4}", r.te_std));
            row(w, "TE skewness", format!("{:.3}", te.skewness), "-".into());
        }
        None => row(w, "TE mean", "undefined".into(), format!("{:.4}", r.te_mean)),
    }
    row(w, "AVI range", range(s.avi_range), range(Some(r.avi_range)));
    row(w, "ASI range", range(s.asi_range), range(Some(r.asi_range)));
    row(
        w,
        "Pearson(AVI, ASI)",
        s.avi_asi_pearson.map_or("undefined".into(), |p| format!("{p:.4}")),
        format!("{:.4}", r.avi_asi_pearson),
    );
    row(w, "activity grand mean", format!("{:.4}", s.grand_mean), format!("{:.4}", r.grand_mean));
    row(w, "pair corr mean", format!("{:.4}", s.pair_corr_mean), format!("{:.4}", r.pair_corr_mean));
    row(w, "pair corr std", format!("{:.4}", s.pair_corr_std), format!("{:.4}", r.pair_corr_std));
    row(w, "strong pair links", s.pair_links.to_string(), r.pair_links.to_string());

    writeln!(w).ok();
    writeln!(w, "AVI trend peaks vs crisis onsets").ok();
    let peaks: Option<PeakReport> = fs::read_to_string(dir.join(PEAKS_FILE))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok());
    writeln!(w, "  {:<6} {:>12} {:>10} {:>10}", "event", "peak", "lead", "reference").ok();
    let reference = |id: &str| {
        r.peak_leads
            .iter()
            .find(|(e, _)| e == id)
            .map_or("-".to_string(), |(_, l)| l.to_string())
    };
    if let Some(p) = &peaks {
        for m in &p.matches {
            writeln!(
                w,
                "  {:<6} {:>12} {:>10} {:>10}",
                m.event_id,
                m.peak_date.to_string(),
                m.lead_months,
                reference(&m.event_id)
            )
            .ok();
        }
    }
    for e in &s.unmatched_events {
        writeln!(w, "  {:<6} {:>12} {:>10} {:>10}", e, "none", "-", reference(e)).ok();
    }

    writeln!(w).ok();
    writeln!(
        w,
        "influential network: {} edges above {:.4}",
        s.influence_edges, s.influence_threshold
    )
    .ok();
    for e in &s.top_influences {
        writeln!(w, "  {} -> {}  {:.4}", e.source, e.target, e.strength).ok();
    }

    writeln!(w).ok();
    if s.pair_links == 0 {
        writeln!(w, "influential pair network: 0 strong links ({})", s.pair_filter).ok();
    } else {
        writeln!(w, "influential pair network: {} strong links ({})", s.pair_links, s.pair_filter).ok();
        for k in &s.link_kinds {
            writeln!(w, "  {:<16} {}", k.kind, k.count).ok();
        }
        if s.low_band_links > 0 {
            writeln!(w, "  below the band: {}", s.low_band_links).ok();
        }
    }
    let counted: usize = s.link_kinds.iter().map(|k| k.count).sum();
    if counted != s.pair_links {
        return Err(Error::Internal(format!(
            "link kinds sum to {counted} but {} links were recorded",
            s.pair_links
        )));
    }
    Ok(out)
}
