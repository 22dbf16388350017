use std::fmt::Write as _;
use std::str::FromStr;

use super::{ExperimentReport, FoldReport, TechniqueReport};
use crate::bcart::MoveKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    Csv,
    #[default]
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!(
                "unknown report format {other:?} (expected csv|markdown)"
            ))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 14] = [
    "dataset",
    "technique",
    "size_mean",
    "size_std",
    "performance",
    "performance_2sigma",
    "correct",
    "correct_2sigma",
    "uncertain",
    "uncertain_2sigma",
    "incorrect",
    "incorrect_2sigma",
    "single_dt",
    "single_dt_2sigma",
];

/// Renders the report. Only quantities fixed by the config and seeds are
/// printed, so equal inputs give byte-identical text.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Markdown => emit_markdown(report),
    }
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

fn opt_pct(x: Option<f64>) -> String {
    x.map(pct).unwrap_or_default()
}

fn emit_csv(report: &ExperimentReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for t in &report.techniques {
        let e = &t.envelope;
        let s = e.two_sigma;
        let record = [
            report.dataset.name.clone(),
            t.technique.name().to_string(),
            format!("{:.2}", t.size_mean),
            format!("{:.2}", t.size_std),
            pct(e.accuracy),
            opt_pct(s.map(|s| s.accuracy)),
            pct(e.rate_correct),
            opt_pct(s.map(|s| s.correct)),
            pct(e.rate_uncertain),
            opt_pct(s.map(|s| s.uncertain)),
            pct(e.rate_incorrect),
            opt_pct(s.map(|s| s.incorrect)),
            opt_pct(t.single_tree_accuracy.map(|a| a.0)),
            opt_pct(t.single_tree_accuracy.map(|a| a.1)),
        ];
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn with_width(value: f64, width: Option<f64>) -> String {
    match width {
        Some(wd) => format!("{}±{}", pct(value), pct(wd)),
        None => pct(value),
    }
}

fn technique_row(dataset: &str, t: &TechniqueReport) -> String {
    let e = &t.envelope;
    let s = e.two_sigma;
    let single = match t.single_tree_accuracy {
        Some((m, w)) => with_width(m, Some(w)),
        None => String::new(),
    };
    format!(
        "| {} | {} | {:.1}±{:.1} | {} | {} | {} | {} | {} |",
        dataset,
        t.technique.name(),
        t.size_mean,
        t.size_std,
        with_width(e.accuracy, s.map(|s| s.accuracy)),
        with_width(e.rate_correct, s.map(|s| s.correct)),
        with_width(e.rate_uncertain, s.map(|s| s.uncertain)),
        with_width(e.rate_incorrect, s.map(|s| s.incorrect)),
        single,
    )
}

fn fold_row(f: &FoldReport) -> String {
    let r = &f.rates;
    let single = f
        .single_tree
        .map(|s| format!("{} (tree {}, {} leaves)", pct(s.test_accuracy), s.index, s.size))
        .unwrap_or_default();
    format!(
        "| {} | {} | {:.1}±{:.1} | {} | {} | {} | {} | {} |",
        f.fold,
        f.n_train,
        f.size_mean,
        f.size_std,
        pct(r.accuracy),
        pct(r.correct),
        pct(r.uncertain),
        pct(r.incorrect),
        single,
    )
}

fn emit_markdown(report: &ExperimentReport) -> String {
    let d = &report.dataset;
    let exp = &report.config.experiment;
    let mut out = String::new();
    let _ = writeln!(out, "# Results: {}", d.name);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{} classes, {} features, {} train, {} test; P0 = {}, envelope mode {}, seed {}",
        d.num_classes,
        d.n_features,
        d.n_train,
        d.n_test,
        exp.p0,
        match exp.envelope_mode {
            crate::EnsembleMode::Vote => "vote",
            crate::EnsembleMode::Average => "average",
        },
        exp.seed,
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "| Data | Technique | DT size | Perform, % | Correct, % | Uncertain, % | Incorrect, % | Single DT, % |"
    );
    let _ = writeln!(out, "|---|---|---|---|---|---|---|---|");
    for t in &report.techniques {
        let _ = writeln!(out, "{}", technique_row(&d.name, t));
    }

    for t in &report.techniques {
        if !t.folds.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "## {} folds", t.technique.name());
            let _ = writeln!(out);
            let _ = writeln!(
                out,
                "| Fold | Train | DT size | Perform, % | Correct, % | Uncertain, % | Incorrect, % | Single DT, % |"
            );
            let _ = writeln!(out, "|---|---|---|---|---|---|---|---|");
            for f in &t.folds {
                let _ = writeln!(out, "{}", fold_row(f));
            }
        }
        if !t.sweep.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "## {} P0 sweep", t.technique.name());
            let _ = writeln!(out);
            let _ = writeln!(out, "| P0 | Correct, % | Uncertain, % | Incorrect, % |");
            let _ = writeln!(out, "|---|---|---|---|");
            for p in &t.sweep {
                let (e, s) = (&p.envelope, p.envelope.two_sigma);
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} |",
                    p.p0,
                    with_width(e.rate_correct, s.map(|s| s.correct)),
                    with_width(e.rate_uncertain, s.map(|s| s.uncertain)),
                    with_width(e.rate_incorrect, s.map(|s| s.incorrect)),
                );
            }
        }
        if let Some(stats) = &t.move_stats {
            let _ = writeln!(out);
            let _ = writeln!(out, "## {} sampler", t.technique.name());
            let _ = writeln!(out);
            let _ = writeln!(out, "| Move | Proposed | Accepted, % |");
            let _ = writeln!(out, "|---|---|---|");
            for kind in MoveKind::ALL {
                let _ = writeln!(
                    out,
                    "| {:?} | {} | {} |",
                    kind,
                    stats.proposed[kind.index()],
                    pct(stats.acceptance_rate(kind)),
                );
            }
            let _ = writeln!(out, "| all | {} | {} |", stats.proposed.iter().sum::<u64>(), pct(stats.total_acceptance_rate()));
        }
    }
    out
}
