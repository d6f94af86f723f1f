use std::path::PathBuf;

use bepgp::experiments::{build_dataset, ExperimentConfig};

fn shipped() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    paths
}

#[test]
fn every_shipped_config_validates_and_builds_data() {
    let paths = shipped();
    assert!(paths.len() >= 19);
    for p in &paths {
        let cfg = ExperimentConfig::load(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(cfg.name, p.file_stem().unwrap().to_str().unwrap());
        let data = build_dataset(&cfg).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        println!("{}: {} rows", cfg.name, data.len());
    }
}

#[test]
fn halfline_benchmark_has_121_points_per_slice() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cfg = ExperimentConfig::load(&dir.join("wave1d_neumann.toml")).unwrap();
    let data = build_dataset(&cfg).unwrap();
    assert_eq!(data.len(), 242);
}

#[test]
fn sector_collocation_defaults_are_visible() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cfg = ExperimentConfig::load(&dir.join("wave2d_sector_hybrid.toml")).unwrap();
    let c = &cfg.collocation[0];
    assert_eq!((c.n_space, c.n_time), (100, 41));
    let data = build_dataset(&cfg).unwrap();
    let arc = data
        .observations
        .iter()
        .filter(|o| o.group == bepgp::ObservationGroup::BoundaryCollocation)
        .count();
    assert_eq!(arc, 4100);
}
