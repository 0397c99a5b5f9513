use serde::{Deserialize, Serialize};

use crate::eval::{MetricsRecord, METRIC_HEADERS};

/// One row of a metrics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemMetrics {
    pub system: String,
    pub metrics: MetricsRecord,
}

/// Rows of `system` followed by the ten metrics ×100 with two decimals.
pub fn metrics_tsv(rows: &[SystemMetrics]) -> String {
    let mut out = String::from("system");
    for h in METRIC_HEADERS {
        out.push('\t');
        out.push_str(h);
    }
    out.push('\n');
    for row in rows {
        out.push_str(&row.system);
        for v in row.metrics.values() {
            out.push_str(&format!("\t{:.2}", v * 100.0));
        }
        out.push('\n');
    }
    out
}

pub fn metrics_json(rows: &[SystemMetrics]) -> String {
    serde_json::to_string_pretty(rows).expect("metrics serialization is infallible") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_layout() {
        let rows = [SystemMetrics {
            system: "bm25".into(),
            metrics: MetricsRecord::from_values([0.547, 0.5, 0.3333333, 0.2, 1.0, 0.0, 0.25, 0.125, 0.0, 0.99999]),
        }];
        let tsv = metrics_tsv(&rows);
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(
            lines[0],
            "system\tMRR\tP@1\tP@3\tP@5\tnDCG@1\tnDCG@3\tnDCG@5\tERR@1\tERR@3\tERR@5"
        );
        assert_eq!(
            lines[1],
            "bm25\t54.70\t50.00\t33.33\t20.00\t100.00\t0.00\t25.00\t12.50\t0.00\t100.00"
        );
        let back: Vec<SystemMetrics> = serde_json::from_str(&metrics_json(&rows)).unwrap();
        assert_eq!(back, rows);
    }
}
