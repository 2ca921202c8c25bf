use std::fmt::Write as _;

use serde::Serialize;

use super::HarnessError;

/// Exponential moving average with `s_0 = x_0`.
pub fn ema_smooth(series: &[f64], factor: f64) -> Result<Vec<f64>, HarnessError> {
    let (&first, rest) = series.split_first().ok_or(HarnessError::EmptySeries)?;
    let mut out = Vec::with_capacity(series.len());
    out.push(first);
    let mut s = first;
    for &x in rest {
        s = factor * s + (1.0 - factor) * x;
        out.push(s);
    }
    Ok(out)
}

/// `100 * segmented / raw`, rounded half away from zero to one decimal.
/// `None` when `raw` is zero.
pub fn improvement_percent(raw: f64, segmented: f64) -> Option<f64> {
    if raw == 0.0 {
        return None;
    }
    Some((1000.0 * segmented / raw).round() / 10.0)
}

/// Scores of one game for the report. `None` means the run finished no episode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScorePair {
    pub game: String,
    pub raw: Option<f64>,
    pub segmented: Option<f64>,
    /// Neither agent rose above the random-policy band.
    pub no_learning: bool,
}

impl ScorePair {
    pub fn new(game: impl Into<String>, raw: f64, segmented: f64) -> Self {
        ScorePair { game: game.into(), raw: Some(raw), segmented: Some(segmented), no_learning: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Outcome {
    Percent(f64),
    NoLearning,
    NotComparable,
}

impl Outcome {
    pub fn label(&self) -> String {
        match self {
            Outcome::Percent(p) => format!("{p:.1}%"),
            Outcome::NoLearning => "no learning".to_string(),
            Outcome::NotComparable => "not comparable".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub game: String,
    pub raw: Option<f64>,
    pub segmented: Option<f64>,
    pub outcome: Outcome,
}

/// Rows sorted by improvement, highest first; rows without a percentage
/// follow in input order.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ImprovementReport {
    pub rows: Vec<ReportRow>,
}

pub fn improvement_report(pairs: &[ScorePair]) -> ImprovementReport {
    let mut scored = Vec::new();
    let mut rest = Vec::new();
    for p in pairs {
        let outcome = match (p.raw, p.segmented) {
            _ if p.no_learning => Outcome::NoLearning,
            (Some(r), Some(s)) => improvement_percent(r, s).map_or(Outcome::NotComparable, Outcome::Percent),
            _ => Outcome::NoLearning,
        };
        let row = ReportRow { game: p.game.clone(), raw: p.raw, segmented: p.segmented, outcome };
        match outcome {
            Outcome::Percent(_) => scored.push(row),
            _ => rest.push(row),
        }
    }
    let pct = |r: &ReportRow| match r.outcome {
        Outcome::Percent(p) => p,
        _ => unreachable!(),
    };
    scored.sort_by(|a, b| pct(b).total_cmp(&pct(a)));
    scored.extend(rest);
    ImprovementReport { rows: scored }
}

fn score(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

impl ImprovementReport {
    pub fn row(&self, game: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.game == game)
    }

    /// `game,segmented,raw,improvement`; improvement is a number or a label.
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["game", "segmented", "raw", "improvement"])?;
        for r in &self.rows {
            let improvement = match r.outcome {
                Outcome::Percent(p) => format!("{p:.1}"),
                other => other.label(),
            };
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([r.game.clone(), opt(r.segmented), opt(r.raw), improvement])?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let header = ["Game", "Segmented", "Raw", "Improvement"];
        let cells: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| [r.game.clone(), score(r.segmented), score(r.raw), r.outcome.label()])
            .collect();
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: [&str; 4]| {
            let _ = writeln!(
                out,
                "{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}",
                row[0],
                row[1],
                row[2],
                row[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            );
        };
        line(&mut out, header);
        let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 6));
        for row in &cells {
            line(&mut out, [&row[0], &row[1], &row[2], &row[3]]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ema_examples() {
        assert_eq!(ema_smooth(&[3.0; 5], 0.99).unwrap(), vec![3.0; 5]);
        assert_eq!(ema_smooth(&[1.0, 5.0, -2.0], 0.0).unwrap(), vec![1.0, 5.0, -2.0]);
        let s = ema_smooth(&[0.0, 1.0], 0.99).unwrap();
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 0.01).abs() < 1e-15);
        assert!(matches!(ema_smooth(&[], 0.99), Err(HarnessError::EmptySeries)));
    }

    #[test]
    fn percent_examples() {
        assert_eq!(improvement_percent(390.3, 505.1), Some(129.4));
        assert_eq!(improvement_percent(1870.0, 247.5), Some(13.2));
        assert_eq!(improvement_percent(42.0, 42.0), Some(100.0));
        assert_eq!(improvement_percent(0.0, 5.0), None);
        assert_eq!(improvement_percent(-4.0, -1.0), Some(25.0));
    }

    #[test]
    fn report_orders_and_labels() {
        let mut pong = ScorePair::new("Pong", -20.0, -20.5);
        pong.no_learning = true;
        let report = improvement_report(&[
            ScorePair::new("Road Runner", 1870.0, 247.5),
            pong,
            ScorePair::new("Beam Rider", 390.3, 505.1),
            ScorePair::new("Zero", 0.0, 1.0),
            ScorePair { game: "Empty".into(), raw: None, segmented: Some(1.0), no_learning: false },
        ]);
        let games: Vec<_> = report.rows.iter().map(|r| r.game.as_str()).collect();
        assert_eq!(games, ["Beam Rider", "Road Runner", "Pong", "Zero", "Empty"]);
        assert_eq!(report.row("Zero").unwrap().outcome, Outcome::NotComparable);
        assert_eq!(report.row("Empty").unwrap().outcome, Outcome::NoLearning);
        let csv = report.to_csv().unwrap();
        assert!(csv.starts_with("game,segmented,raw,improvement\nBeam Rider,505.1,390.3,129.4\n"));
        let text = report.to_text();
        assert!(text.lines().nth(2).unwrap().ends_with("129.4%"));
        let widths: Vec<usize> = text.lines().filter(|l| !l.starts_with('-')).map(str::len).collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]));
    }
}
