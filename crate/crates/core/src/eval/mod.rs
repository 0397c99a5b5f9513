//! Ranking metrics, aggregation, significance testing and descriptive
//! statistics.

mod metrics;
mod report;
mod significance;
mod stats;

pub use metrics::{
    dcg_at, err_at, evaluate_ranking, macro_average, ndcg_at, precision_at, reciprocal_rank, Gain, MetricsRecord,
    METRIC_HEADERS, METRIC_NAMES,
};
pub use report::{metrics_json, metrics_tsv, SystemMetrics};
pub use significance::{paired_t_test, SignificanceResult, ALPHA};
pub use stats::{
    answer_stats, answer_text_stats, dataset_stats, format_answer_stats, format_dataset_stats, is_yes_no, AnswerStats,
    DatasetStats, MeanStd,
};
