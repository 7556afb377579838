use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::eval::EvalReport;

fn pct(x: f64) -> String {
    format!("{:.1}", 100.0 * x)
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.digits$}"))
}

fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                if i == 0 {
                    format!("{cell:<w$}", w = widths[i])
                } else {
                    format!("{cell:>w$}", w = widths[i])
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

impl EvalReport {
    /// Human-readable summary: overall metrics, then the category breakdown.
    /// Rates are percentages.
    pub fn to_table(&self) -> String {
        let o = &self.overall;
        let mut rows = vec![
            [
                "n",
                "IC",
                "on-topic",
                "violation",
                "copy-BLEU",
                "Rep-1",
                "Rep-2",
                "PPL",
            ]
            .map(String::from)
            .to_vec(),
            vec![
                o.count.to_string(),
                pct(o.ic),
                pct(o.on_topic),
                pct(o.violation),
                format!("{:.3}", self.copy_bleu),
                opt(self.rep1, 3),
                opt(self.rep2, 3),
                opt(self.ppl, 2),
            ],
        ];
        let mut out = aligned(&rows);
        if !self.categories.is_empty() {
            out.push('\n');
            rows = vec![
                ["kb", "side", "category", "n", "IC", "on-topic", "violation"]
                    .map(String::from)
                    .to_vec(),
            ];
            for c in &self.categories {
                rows.push(vec![
                    format!("{:?}", c.kb_kind).to_lowercase(),
                    c.side.clone(),
                    c.category.clone(),
                    c.rates.count.to_string(),
                    pct(c.rates.ic),
                    pct(c.rates.on_topic),
                    pct(c.rates.violation),
                ]);
            }
            out.push_str(&aligned(&rows));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Category breakdown as CSV with rates in [0, 1].
    pub fn categories_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "kb",
            "side",
            "category",
            "count",
            "ic",
            "on_topic",
            "violation",
        ])
        .map_err(csv_err)?;
        for c in &self.categories {
            w.write_record([
                format!("{:?}", c.kb_kind).to_lowercase(),
                c.side.clone(),
                c.category.clone(),
                c.rates.count.to_string(),
                c.rates.ic.to_string(),
                c.rates.on_topic.to_string(),
                c.rates.violation.to_string(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

/// One row per labelled report, for comparing runs side by side.
pub fn comparison_table(reports: &[(String, EvalReport)]) -> String {
    let mut rows = vec![[
        "run",
        "n",
        "IC",
        "on-topic",
        "violation",
        "copy-BLEU",
        "Rep-1",
        "Rep-2",
        "PPL",
    ]
    .map(String::from)
    .to_vec()];
    for (label, r) in reports {
        let o = &r.overall;
        rows.push(vec![
            label.clone(),
            o.count.to_string(),
            pct(o.ic),
            pct(o.on_topic),
            pct(o.violation),
            format!("{:.3}", r.copy_bleu),
            opt(r.rep1, 3),
            opt(r.rep2, 3),
            opt(r.ppl, 2),
        ]);
    }
    aligned(&rows)
}
