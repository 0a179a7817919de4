use sparsepath::experiments::*;
use sparsepath::Penalty;

#[test]
fn recovery_probability_drops_with_sparsity() {
    let spec = SweepSpec {
        values: vec![10.0, 100.0],
        replications: 6,
        ..SweepSpec::vary_s()
    };
    let table = support_probability_sweep(&spec, Penalty::L0, 2).unwrap();
    let easy = table.probability_at(10.0).unwrap();
    let hard = table.probability_at(100.0).unwrap();
    assert!(easy >= 5.0 / 6.0, "{}", table.to_csv());
    assert!(hard <= 0.5, "{}", table.to_csv());
}

#[test]
fn default_haar_reconstruction_is_accurate() {
    let spec = Haar1dSpec::default();
    let result = haar1d_reconstruction(&spec, Penalty::L0).unwrap();
    assert!((200..=300).contains(&result.s), "s = {}", result.s);
    assert!(result.psnr_db >= 45.0, "{}", result.psnr_db);
}

#[test]
fn phase_grid_corners_behave() {
    let spec = PhaseSpec {
        p: 200,
        delta_grid: vec![0.2, 1.0],
        rho_grid: vec![0.1, 0.9],
        trials: 4,
        ..PhaseSpec::default()
    };
    let grid = phase_transition_grid(&spec, Penalty::L1, 2).unwrap();
    // Overdetermined and sparse: always recovered. Underdetermined and dense: never.
    assert_eq!(grid.cell(1, 0).successes, 4);
    assert_eq!(grid.cell(0, 1).successes, 0);
    assert_eq!(grid.curve90.len(), 2);
    assert!(grid.curve90.iter().all(|r| (0.1..=0.9).contains(&r.rho90)));
}

#[test]
fn manifest_records_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let spec = BenchSpec::default();
    let manifest = RunManifest::new("bench", &spec, vec!["bench.csv".into()], 1, 0.5).unwrap();
    let path = dir.path().join("manifest.json");
    manifest.write(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let back: RunManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(back.config["sizes"][0], 2000);
    assert_eq!(back.command, "bench");
}
