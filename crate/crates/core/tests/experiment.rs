use std::fs;

use tempfile::TempDir;
use treeuq::data::{make_paper_mixture, sample_mixture};
use treeuq::experiment::{run_experiment, ExperimentConfig, TechniqueKind};

#[test]
fn csv_config_resolves_relative_paths_and_runs() {
    let dir = TempDir::new().unwrap();
    fs::create_dir(dir.path().join("data")).unwrap();
    let data = sample_mixture(&make_paper_mixture(), 120, 8).unwrap();
    data.write_csv(fs::File::create(dir.path().join("data/mix.csv")).unwrap()).unwrap();
    let cfg_path = dir.path().join("mix.cfg");
    fs::write(
        &cfg_path,
        "[dataset]\nkind = \"csv\"\npath = \"data/mix.csv\"\ntrain = 80\ntest = 40\n\n\
         [experiment]\ntechnique = \"randomized\"\nfolds = 4\nseed = 2\n\n\
         [randomized]\nn_trees = 15\n",
    )
    .unwrap();

    let cfg = ExperimentConfig::load(&cfg_path).unwrap();
    assert_eq!(cfg.dataset.path.as_deref(), Some(dir.path().join("data/mix.csv").as_path()));
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.dataset.name, "mix");
    let t = report.technique(TechniqueKind::Randomized).unwrap();
    assert_eq!(t.folds.len(), 4);
    assert!(t.folds.iter().all(|f| f.n_train == 60));
    assert!(report.technique(TechniqueKind::Bayesian).is_none());
    assert_eq!(run_experiment(&cfg).unwrap().techniques, report.techniques);
}

#[test]
fn missing_config_file_is_an_error() {
    let dir = TempDir::new().unwrap();
    assert!(ExperimentConfig::load(dir.path().join("absent.cfg")).is_err());
}
