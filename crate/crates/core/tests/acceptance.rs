//! Acceptance summary: one PASS / FAIL / BLOCKED line per criterion.
//!
//! Criteria that need the public corpora report BLOCKED unless
//! `SPAMBENCH_DATA` points at them; run those with `--release`.

mod common;

use std::io::Write;

use common::criteria::{self, Outcome};

type Check = (&'static str, fn() -> Outcome);

#[test]
fn acceptance_summary() {
    let checks: [Check; 9] = [
        ("tf-idf oracle equivalence", criteria::tfidf_oracle),
        ("Porter stemmer vocabulary", criteria::porter_vocabulary),
        ("metrics exactness", criteria::metrics_exhaustive),
        ("ingestion statistics", criteria::ingestion_statistics),
        (
            "full-train baseline reproduction",
            criteria::full_train_reproduction,
        ),
        ("few-shot trends", criteria::few_shot_trends),
        ("protocol partitions", criteria::protocol_partitions),
        ("exchange path equivalence", criteria::exchange_equivalence),
        ("report regeneration", criteria::report_regeneration),
    ];
    // Written straight to the stdout handle so the lines show without --nocapture.
    let mut out = std::io::stdout().lock();
    let mut failed = Vec::new();
    writeln!(out, "\nacceptance criteria").unwrap();
    for (name, check) in checks {
        let outcome = check();
        writeln!(out, "  [{name}] {outcome}").unwrap();
        if matches!(outcome, Outcome::Fail(_)) {
            failed.push(name);
        }
    }
    out.flush().unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
#[ignore = "needs the public corpora under SPAMBENCH_DATA"]
fn ingestion_statistics_on_public_corpora() {
    criteria::ingestion_statistics().assert_pass();
}

#[test]
#[ignore = "needs the public corpora under SPAMBENCH_DATA; minutes in release mode"]
fn full_train_baselines_on_public_corpora() {
    criteria::full_train_reproduction().assert_pass();
}

#[test]
#[ignore = "needs the public corpora under SPAMBENCH_DATA; minutes in release mode"]
fn few_shot_trends_on_public_corpora() {
    criteria::few_shot_trends().assert_pass();
}
