//! Source adapters on small synthetic layouts, plus the public-corpus
//! statistics when `SPAMBENCH_DATA` is set.

mod common;

use std::fs;
use std::path::Path;

use spambench::{ingest, Label, Source};

fn write(path: &Path, content: &str) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, content).unwrap();
}

#[test]
fn ling_reads_bare_variant_only() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write(
        &root.join("bare/part1/3-1msg1.txt"),
        "Subject: conference\n\ncall for papers on syntax\n",
    );
    write(
        &root.join("bare/part1/spmsg001.txt"),
        "Subject: cash\n\nmake   money\n fast\n",
    );
    write(
        &root.join("bare/part2/3-1msg2.txt"),
        "Subject: conference\n\ncall for papers on syntax\n",
    );
    write(
        &root.join("lemm/part1/3-1msg1.txt"),
        "Subject: other\n\nshould be ignored\n",
    );
    let (msgs, stats) = ingest(Source::Ling, root).unwrap();
    assert_eq!(stats.raw.total, 3);
    assert_eq!(stats.duplicates_removed, 1);
    assert_eq!((stats.total, stats.spam, stats.ham), (2, 1, 1));
    let spam = msgs.iter().find(|m| m.label == Label::Spam).unwrap();
    assert_eq!(spam.text, "cash make money fast");
    assert!(msgs.iter().all(|m| m.source == Source::Ling));
}

#[test]
fn sms_tab_separated() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("SMSSpamCollection"),
        "ham\tOk lar... Joking wif u oni...\nspam\tFree entry in 2 a wkly comp\nham\tOk lar... Joking wif u oni...\nham\t   \n",
    );
    let (msgs, stats) = ingest(Source::Sms, dir.path()).unwrap();
    assert_eq!(stats.raw.total, 4);
    assert_eq!(stats.duplicates_removed, 1);
    assert_eq!(stats.empties_removed, 1);
    assert_eq!(msgs.len(), 2);
    assert!((stats.spam_rate - 0.5).abs() < 1e-12);
}

#[test]
fn sms_bad_label_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("SMSSpamCollection"), "maybe\tsomething\n");
    let err = ingest(Source::Sms, dir.path()).unwrap_err();
    assert!(err.to_string().contains("line 1"), "{err}");
}

#[test]
fn spamassassin_parts_and_headers() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let mail = |subject: &str, body: &str| {
        format!("From someone@example.com  Mon Jan 1 00:00:00 2002\nReturn-Path: <a@b>\nSubject: {subject}\n\t continued\nX-Other: 1\n\n{body}\n")
    };
    write(
        &root.join("easy_ham/0001.abc"),
        &mail("lunch", "see you at noon"),
    );
    write(
        &root.join("hard_ham/0002.def"),
        &mail("newsletter", "weekly digest"),
    );
    write(
        &root.join("spam/0003.ghi"),
        &mail("winner", "claim your prize"),
    );
    write(
        &root.join("spam_2/0004.jkl"),
        &mail("winner", "claim your prize"),
    );
    write(&root.join("spam/cmds"), "mv a b\n");
    write(&root.join("unrelated/0005.mno"), &mail("x", "y"));
    let (msgs, stats) = ingest(Source::SpamAssassin, root).unwrap();
    assert_eq!(stats.raw.total, 4);
    assert_eq!(stats.duplicates_removed, 1);
    assert_eq!((stats.spam, stats.ham), (1, 2));
    let lunch = msgs.iter().find(|m| m.text.contains("noon")).unwrap();
    assert_eq!(lunch.text, "lunch continued see you at noon");
}

#[test]
fn enron_directories_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("enron");
    write(
        &root.join("enron1/ham/0001.1999-12-10.farmer.ham.txt"),
        "Subject: gas nomination\nplease see attached\n",
    );
    write(
        &root.join("enron1/spam/0002.2004-08-01.GP.spam.txt"),
        "Subject: cheap meds\nbuy now\n",
    );
    write(
        &root.join("enron2/spam/0003.2004-08-01.GP.spam.txt"),
        "Subject: cheap meds\nbuy now\n",
    );
    let (_, stats) = ingest(Source::Enron, &root).unwrap();
    assert_eq!(
        (stats.raw.total, stats.total, stats.duplicates_removed),
        (3, 2, 1)
    );

    let csv = dir.path().join("enron_spam_data.csv");
    fs::write(
        &csv,
        "Message ID,Subject,Message,Spam/Ham,Date\n0,gas nomination,\"please see\nattached\",ham,1999-12-10\n1,cheap meds,buy now,spam,2004-08-01\n",
    )
    .unwrap();
    let (msgs, stats) = ingest(Source::Enron, &csv).unwrap();
    assert_eq!((stats.total, stats.spam), (2, 1));
    assert_eq!(msgs[0].text, "gas nomination please see attached");
}

#[test]
fn missing_path_is_an_error() {
    assert!(ingest(Source::Ling, Path::new("/nonexistent/spambench")).is_err());
}

#[test]
#[ignore = "needs the public corpora under SPAMBENCH_DATA"]
fn public_corpus_statistics() {
    common::criteria::ingestion_statistics().assert_pass();
}
