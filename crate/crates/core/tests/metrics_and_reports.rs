mod common;

use std::collections::BTreeMap;

use common::{criteria, TABLE4, TABLE5};
use spambench::metrics::mean_std_over_k;
use spambench::ShotCount;

#[test]
fn metrics_exact_over_all_small_confusions() {
    criteria::metrics_exhaustive().assert_pass();
}

#[test]
fn reports_regenerate_published_tables() {
    criteria::report_regeneration().assert_pass();
}

#[test]
fn published_summary_row_recomputed_from_few_shot_row() {
    for (row, &(mean, std)) in TABLE4.iter().zip(TABLE5.iter()) {
        let by_k: BTreeMap<ShotCount, f64> = ShotCount::DEFAULT_GRID
            .iter()
            .copied()
            .zip(row.iter().copied())
            .collect();
        let (m, s) = mean_std_over_k(&by_k).unwrap();
        assert!((m - mean).abs() <= 5e-4, "mean {m} vs {mean}");
        assert!((s - std).abs() <= 5e-4, "std {s} vs {std}");
    }
}
