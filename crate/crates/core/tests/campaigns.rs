use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use kpell_core::reduction::{stage1_campaign, stage2_campaign, CampaignConfig};

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

#[test]
fn stage1_reports_do_not_depend_on_schedule() {
    let cfg = CampaignConfig::default();
    let one = with_threads(1, || stage1_campaign((3, 30), (1, 9), &cfg).unwrap());
    let many = with_threads(6, || stage1_campaign((3, 30), (1, 9), &cfg).unwrap());
    assert_eq!(
        serde_json::to_string(&one).unwrap(),
        serde_json::to_string(&many).unwrap()
    );
    assert_eq!(one.records.len(), 28 * 9);
}

#[test]
fn resumed_run_matches_fresh_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CampaignConfig {
        checkpoint_dir: Some(dir.path().to_path_buf()),
        ..CampaignConfig::default()
    };
    // Partial run, then the full range reusing what is on disk.
    stage1_campaign((3, 10), (1, 9), &cfg).unwrap();
    let resumed = stage1_campaign((3, 20), (1, 9), &cfg).unwrap();
    let fresh = stage1_campaign((3, 20), (1, 9), &CampaignConfig::default()).unwrap();
    assert_eq!(resumed.records, fresh.records);
    let files = std::fs::read_dir(dir.path().join("stage1")).unwrap().count();
    assert_eq!(files, 18 * 9);
}

#[test]
fn stale_checkpoints_are_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = CampaignConfig {
        checkpoint_dir: Some(dir.path().to_path_buf()),
        ..CampaignConfig::default()
    };
    let a = stage2_campaign((1, 9), &cfg).unwrap();
    cfg.advance_budget = 5;
    let b = stage2_campaign((1, 9), &cfg).unwrap();
    assert_eq!(a.records, b.records);
    // Corrupt file: recomputed, not trusted.
    std::fs::write(dir.path().join("stage2").join("d3.json"), "{").unwrap();
    let c = stage2_campaign((1, 9), &cfg).unwrap();
    assert_eq!(a.records, c.records);
}

#[test]
fn range_preconditions() {
    let cfg = CampaignConfig::default();
    assert!(stage1_campaign((2, 5), (1, 9), &cfg).is_err());
    assert!(stage1_campaign((3, 401), (1, 9), &cfg).is_err());
    assert!(stage2_campaign((0, 9), &cfg).is_err());
    let cancelled = CampaignConfig {
        cancel: Some(Arc::new(AtomicBool::new(true))),
        ..CampaignConfig::default()
    };
    assert!(stage2_campaign((1, 9), &cancelled).is_err());
}
