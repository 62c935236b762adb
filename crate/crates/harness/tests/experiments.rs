use std::io::Write;
use std::path::Path;

use wmc_harness::{certify, read_csv, run, write_csv, ExperimentConfig, ExperimentKind, HarnessError, Preset};

fn movielens_fixture(dir: &Path, users: usize, items: usize, keep: impl Fn(usize, usize) -> bool) -> std::path::PathBuf {
    let path = dir.join("u.data");
    let mut f = std::fs::File::create(&path).unwrap();
    for u in 0..users {
        for i in 0..items {
            if keep(u, i) {
                writeln!(f, "{}\t{}\t3\t0", u + 1, i + 1).unwrap();
            }
        }
    }
    path
}

fn real_cfg(dataset: &Path, extra: &str) -> ExperimentConfig {
    let text = format!(
        "dataset = {:?}\ndataset_format = \"movielens100k\"\nsubsample_users = 1000\n{extra}",
        dataset.to_str().unwrap()
    );
    ExperimentConfig::resolve(ExperimentKind::RealPattern, Preset::Desk, Some(&text)).unwrap()
}

fn csv_bytes(cfg: &ExperimentConfig) -> Vec<u8> {
    let out = run(cfg).unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, &out.header, &out.rows).unwrap();
    buf
}

#[test]
fn real_pattern_fixture_gives_one_row_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let data = movielens_fixture(dir.path(), 12, 9, |u, i| (u * 7 + i * 3) % 4 != 0);
    let cfg = real_cfg(&data, "rank_grid = [1]\ntrials = 1\nnoise_repeats = 1\n");
    let out = run(&cfg).unwrap();
    assert_eq!(out.rows.len(), 2);
    let methods: Vec<&str> = out.rows.iter().map(|r| r.method.as_str()).collect();
    assert_eq!(methods, ["debiased", "standard"]);
    assert!(out.rows.iter().all(|r| r.weighted_error_std == 0.0 && r.cells == 1));
    assert_eq!(csv_bytes(&cfg), csv_bytes(&cfg));
}

#[test]
fn real_pattern_full_noiseless_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let data = movielens_fixture(dir.path(), 15, 11, |_, _| true);
    let cfg = real_cfg(&data, "rank_grid = [1, 3]\ntrials = 2\nnoise_repeats = 2\nsigma = 0.0\n");
    let out = run(&cfg).unwrap();
    for row in out.rows.iter().filter(|r| r.method == "debiased") {
        assert!(row.weighted_error_mean <= 1e-6, "{row:?}");
    }
    assert!(out.header.aggregation.contains("N data matrices"));
}

#[test]
fn missing_dataset_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = real_cfg(&dir.path().join("absent"), "");
    let err = run(&cfg).unwrap_err();
    assert!(matches!(err, HarnessError::Data(_)), "{err}");
    assert_eq!(err.exit_code(), 3);
}

fn small_sample_w() -> ExperimentConfig {
    let text = "d = 100\nrank = 3\nm_grid = [1200.0, 2000.0, 3000.0]\ny_grid = [0.12, 0.2]\ntrials = 3\nnoise_repeats = 3\n";
    ExperimentConfig::resolve(ExperimentKind::SampleW, Preset::Desk, Some(text)).unwrap()
}

#[test]
fn sample_w_small_grid_trends() {
    let out = run(&small_sample_w()).unwrap();
    assert_eq!(out.rows.len(), 3 * 3 * 2);
    let pick = |m: f64, family: &str, y: Option<f64>, method: &str| {
        out.rows
            .iter()
            .find(|r| {
                r.m == Some(m)
                    && r.method == method
                    && r.weight_family.as_deref() == Some(family)
                    && (y.is_none() || r.y == y)
            })
            .unwrap()
    };
    for m in [1200.0, 2000.0, 3000.0] {
        // the flat weight gives the smallest gap between the two methods
        let gap = |family, y| {
            (pick(m, family, y, "debiased").weighted_error_mean - pick(m, family, y, "standard").weighted_error_mean).abs()
        };
        let flat = gap("flat", None);
        assert!(flat < gap("spiky", Some(0.12)) && flat < gap("spiky", Some(0.2)));
        for y in [0.12, 0.2] {
            let d = pick(m, "spiky", Some(y), "debiased");
            let s = pick(m, "spiky", Some(y), "standard");
            assert!(d.weighted_error_mean <= s.weighted_error_mean);
            assert!((d.weight_mass - m).abs() <= 1e-9 * m);
        }
    }
    for y in [0.12, 0.2] {
        let errs: Vec<(f64, f64)> = [1200.0, 2000.0, 3000.0]
            .iter()
            .map(|&m| {
                let r = pick(m, "spiky", Some(y), "debiased");
                (r.weighted_error_mean, r.weighted_error_std)
            })
            .collect();
        for p in errs.windows(2) {
            assert!(p[1].0 < p[0].0 + p[0].1.max(p[1].1), "{errs:?}");
        }
    }
}

#[test]
fn sample_w_csv_roundtrip_and_seed_sensitivity() {
    let cfg = small_sample_w();
    let bytes = csv_bytes(&cfg);
    let (meta, rows) = read_csv(bytes.as_slice()).unwrap();
    assert_eq!(rows, run(&cfg).unwrap().rows);
    assert_eq!(meta[0], ("experiment".to_string(), "sample_w".to_string()));
    assert_eq!(meta[1].1, cfg.hash());
    let mut other = cfg.clone();
    other.master_seed += 1;
    assert_ne!(csv_bytes(&other), bytes);
}

#[test]
fn spectral_gap_small_run_has_draw_and_total_rows() {
    let text = "k = 9\nrank = 2\nrho_grid = [2, 4]\ntrials = 2\nnoise_repeats = 2\n";
    let cfg = ExperimentConfig::resolve(ExperimentKind::SpectralGap, Preset::Desk, Some(text)).unwrap();
    let out = run(&cfg).unwrap();
    // 2 rho x 3 kinds x 2 methods x (1 total + 2 draws)
    assert_eq!(out.rows.len(), 36);
    for row in &out.rows {
        assert!(row.lambda1.is_some() && row.lambda2.is_some() && row.lambda.is_some());
        assert!(row.weighted_error_std >= 0.0 && row.weighted_error_mean.is_finite());
    }
    let band = out
        .rows
        .iter()
        .find(|r| r.graph_kind.as_deref() == Some("band_band") && r.rho == Some(2) && r.draw.is_none())
        .unwrap();
    // (ρ+1)² members per row
    assert_eq!(band.sample_count, 81.0 * 9.0);
    assert!((band.lambda1.unwrap() - 9.0).abs() < 1e-9);
}

#[test]
fn odd_rho_is_a_config_error() {
    let err = ExperimentConfig::resolve(ExperimentKind::SpectralGap, Preset::Desk, Some("rho_grid = [3]")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn proportional_small_run() {
    let text = "d = 30\nm_grid = [300.0, 900.0]\ntrials = 2\nmaxnorm_iterations = 500\n";
    let cfg = ExperimentConfig::resolve(ExperimentKind::Proportional, Preset::Desk, Some(text)).unwrap();
    let out = run(&cfg).unwrap();
    assert_eq!(out.rows.len(), 2);
    for row in &out.rows {
        assert!(row.expected_queries.unwrap() <= row.m.unwrap() * (1.0 + 1e-12));
        assert!(row.relative_error_mean.unwrap().is_finite());
        assert_eq!(row.method, "proportional");
    }
    // at m = d² most leverage weights exceed 1 and are clamped
    let full = "d = 12\nm_grid = [144.0]\ntrials = 1\nmaxnorm_iterations = 5000\n";
    let cfg = ExperimentConfig::resolve(ExperimentKind::Proportional, Preset::Desk, Some(full)).unwrap();
    let row = &run(&cfg).unwrap().rows[0];
    assert!(row.clamped_entries.unwrap() > 0);
    assert!(row.sample_count > 0.8 * 144.0);
    assert!(row.relative_error_mean.unwrap() < out.rows[1].relative_error_mean.unwrap() + 0.1, "{row:?}");
}

fn certify_file(dir: &Path, name: &str, pattern: &wmc_core::pattern::SamplePattern) -> ExperimentConfig {
    let path = dir.join(name);
    pattern.save(&path).unwrap();
    let mut cfg = ExperimentConfig::preset(ExperimentKind::Certify, Preset::Desk);
    cfg.pattern = Some(path);
    cfg
}

#[test]
fn certify_examples() {
    use wmc_core::pattern::SamplePattern;
    let dir = tempfile::tempdir().unwrap();

    let rec = certify(&certify_file(dir.path(), "full.pat", &SamplePattern::full(4, 4))).unwrap();
    assert!(rec.report.lambda.abs() < 1e-12);
    assert!((rec.report.mu - 2.0).abs() < 1e-12);
    assert_eq!(rec.weight_source, "best_rank1");

    let band = wmc_core::patterns::circulant_band(6, 3).unwrap();
    let rec = certify(&certify_file(dir.path(), "band.pat", &band)).unwrap();
    assert!((rec.report.lambda - 8f64.sqrt()).abs() < 1e-4, "{}", rec.report.lambda);

    let rect = SamplePattern::full(3, 5);
    let rec = certify(&certify_file(dir.path(), "rect.pat", &rect)).unwrap();
    let json = serde_json::to_value(&rec).unwrap();
    let obj = json.as_object().unwrap();
    assert!(obj.contains_key("lambda") && obj.contains_key("bounds"));
    assert!(!obj.contains_key("lambda1") && !obj.contains_key("lambda2"));
}

#[test]
fn certify_rejects_oversized_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let p = wmc_core::pattern::SamplePattern::from_pairs(2049, 2, (0..2049).map(|i| (i, i % 2))).unwrap();
    let err = certify(&certify_file(dir.path(), "big.pat", &p)).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}
