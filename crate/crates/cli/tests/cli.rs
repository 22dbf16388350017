use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn treeuq(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeuq"))
        .args(args)
        .env("TREEUQ_CACHE_DIR", cache)
        .output()
        .expect("spawn treeuq")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A pima-shaped raw file: eight numeric columns and a 0/1 label.
fn pima_fixture(dir: &Path, rows: usize) -> (String, String) {
    let mut text = String::new();
    for i in 0..rows {
        let label = (i * 7 % 5 < 2) as usize;
        let feats: Vec<String> = (0..8).map(|j| ((i * (j + 3) + label * 11) % 17).to_string()).collect();
        text.push_str(&format!("{},{label}\n", feats.join(",")));
    }
    let path = dir.join("pima.raw");
    fs::write(&path, &text).unwrap();
    (format!("file://{}", path.display()), hex::encode(Sha256::digest(text.as_bytes())))
}

#[test]
fn synth_writes_a_labelled_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    let o = treeuq(&["synth", "--n", "40", "--seed", "3", "--out", out.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let mut r = csv::Reader::from_path(&out).unwrap();
    assert_eq!(r.headers().unwrap().len(), 3);
    let rows: Vec<_> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|row| row[0].parse::<f64>().is_ok() && row[1].parse::<f64>().is_ok()));
}

#[test]
fn print_config_applies_preset_and_seed() {
    let dir = TempDir::new().unwrap();
    let o = treeuq(&["run", "--print-config", "--preset", "paper", "--seed", "42"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("seed = 42"), "{text}");
    assert!(text.contains("restarts = 50"), "{text}");
    assert!(text.contains("n_trees = 200"), "{text}");
}

#[test]
fn bad_config_fails_with_one_line() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "[experiment]\np0 = 1.5\n").unwrap();
    let o = treeuq(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
    let err = stderr(&o);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(err.starts_with("error:") && err.contains("p0"), "{err}");

    fs::write(&cfg, "[experiment]\nbogus = 1\n").unwrap();
    let o = treeuq(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
}

#[test]
fn unknown_dataset_lists_known_ids() {
    let dir = TempDir::new().unwrap();
    let o = treeuq(&["fetch", "iris"], dir.path());
    assert!(!o.status.success());
    let err = stderr(&o);
    for id in ["ionosphere", "wisconsin", "image", "votes", "sonar", "vehicle", "pima"] {
        assert!(err.contains(id), "{err}");
    }
}

#[test]
fn fetch_verifies_checksum_and_caches() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("cache");
    let (url, sha) = pima_fixture(dir.path(), 60);

    let wrong = "0".repeat(64);
    let o = treeuq(&["fetch", "pima", "--url", &url, "--sha256", &wrong], &cache);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("checksum mismatch"), "{}", stderr(&o));
    assert!(!cache.join("pima.csv").exists());
    assert!(!cache.join(".pima.csv.partial").exists());

    let o = treeuq(&["fetch", "pima", "--url", &url, "--sha256", &sha], &cache);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("60 rows") && !text.contains("cached"), "{text}");
    let mut r = csv::Reader::from_path(cache.join("pima.csv")).unwrap();
    assert_eq!(r.headers().unwrap().len(), 9);
    assert_eq!(r.records().count(), 60);

    let o = treeuq(&["fetch", "pima", "--sha256", &sha], &cache);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("(cached)"), "{}", stdout(&o));
}

#[test]
fn csv_experiment_end_to_end() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("cache");
    let (url, _) = pima_fixture(dir.path(), 90);
    assert!(treeuq(&["fetch", "pima", "--url", &url], &cache).status.success());
    let cfg = dir.path().join("pima.cfg");
    fs::write(
        &cfg,
        "[dataset]\nkind = \"csv\"\nname = \"pima\"\npath = \"cache/pima.csv\"\ntrain = 60\ntest = 30\n\n\
         [experiment]\nfolds = 3\np0 = 0.9\nseed = 5\n\n\
         [randomized]\nn_trees = 10\n\n\
         [mcmc]\nrestarts = 2\nburn_in = 50\npost_burn_in = 50\nmax_leaves = 10\n",
    )
    .unwrap();
    let report = dir.path().join("out.csv");
    let trace = dir.path().join("chain.tsv");
    let o = treeuq(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--format",
            "csv",
            "--out",
            report.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ],
        &cache,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("finished in"));
    let mut r = csv::Reader::from_path(&report).unwrap();
    assert_eq!(r.headers().unwrap().len(), 14);
    let rows: Vec<_> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((&rows[0][0], &rows[0][1]), ("pima", "randomized"));
    assert_eq!(&rows[1][1], "bayesian");
    for row in &rows {
        let (c, u, i): (f64, f64, f64) = (row[6].parse().unwrap(), row[8].parse().unwrap(), row[10].parse().unwrap());
        assert!((c + u + i - 100.0).abs() < 0.05, "{row:?}");
    }
    let trace = fs::read_to_string(trace).unwrap();
    assert_eq!(trace.lines().next(), Some("restart\tstep\tleaves\tlog_posterior"));
    assert_eq!(trace.lines().count(), 1 + 2 * 50);

    let o = treeuq(&["run", "--config", cfg.to_str().unwrap(), "--sweep", "0.8,0.95"], &cache);
    assert!(o.status.success(), "{}", stderr(&o));
    let md = stdout(&o);
    assert!(md.contains("## randomized P0 sweep") && md.contains("| 0.95 |"), "{md}");
}
