use mrlbm::experiment::{run_snapshot, run_table_to_file, ExperimentConfig, CSV_HEADER};

fn small(dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "lmax_range = 6..7\nljump = 1, 2\nT = 0.25\nout = {}\n",
        dir.display()
    ))
    .unwrap()
}

#[test]
fn table_file_has_one_row_per_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let (rows, path) = run_table_to_file(&cfg).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 5);
    let keys: Vec<(u32, u32)> = rows.iter().map(|r| (r.l_jump, r.l_max)).collect();
    assert_eq!(keys, vec![(1, 6), (1, 7), (2, 6), (2, 7)]);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 14);
    }
    // the first row of each l_jump block has no rates
    assert!(lines[1].ends_with(",,,,,,"));
    assert!(!lines[2].ends_with(','));
    // reference and coarse quantities do not depend on the jump mesh
    assert_eq!(rows[0].e_ref, rows[2].e_ref);
    for r in &rows {
        assert!(r.values().iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!(r.d_jump_refl <= r.d_jump);
    }
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.cfg");
    std::fs::write(&path, "# comment only\n\nljump = 3\nlmax_range = 9..11 # inline\n").unwrap();
    let cfg = ExperimentConfig::from_file(&path).unwrap();
    assert_eq!(cfg.ljumps, vec![3]);
    assert_eq!((cfg.lmax_min, cfg.lmax_max), (9, 11));
    assert!(ExperimentConfig::from_file(&dir.path().join("missing.cfg")).is_err());
}

#[test]
fn snapshot_writes_both_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let [jump, reference] = run_snapshot(&cfg, 7, 2, &[0.25, 0.0]).unwrap();
    let j = std::fs::read_to_string(jump).unwrap();
    let r = std::fs::read_to_string(reference).unwrap();
    let blocks: Vec<&str> = j.split("\n\n").collect();
    assert_eq!(blocks.len(), 2);
    assert!(blocks[0].starts_with("# t=0\n"));
    assert!(blocks[1].starts_with("# t=0.25\n"));
    // 256 fine cells left of x = 2 and 32 coarse cells right of it
    assert_eq!(blocks[1].lines().count(), 1 + 256 + 32);
    assert_eq!(r.split("\n\n").nth(1).unwrap().lines().count(), 1 + 384);
    let last: Vec<&str> = blocks[1].lines().last().unwrap().split_whitespace().collect();
    assert_eq!(last.len(), 3);
    assert_eq!(last[2], "5");
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (_, pa) = run_table_to_file(&small(a.path())).unwrap();
    let (_, pb) = run_table_to_file(&small(b.path())).unwrap();
    assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
}

#[test]
fn profiles_at_final_time_for_a_three_level_jump() {
    use mrlbm::experiment::{profiles, Run};
    let cfg = ExperimentConfig::default();
    let t = cfg.final_time;
    let jump = profiles(&cfg, Run::Jump { l_max: 10, l_min: 7 }, &[t]).unwrap().remove(0);
    let reference = profiles(&cfg, Run::Reference { l_max: 10 }, &[t]).unwrap().remove(0);

    let (x_peak, _, level) = jump
        .points
        .iter()
        .filter(|p| p.0 > 1.5)
        .copied()
        .fold((0.0, f64::MIN, 0), |best, p| if p.1 > best.1 { p } else { best });
    assert!((x_peak - 2.28).abs() < 0.02, "peak at {x_peak}");
    assert_eq!(level, 7);

    // the fine part of both runs shares cells; only a reflected wave remains
    let mut worst = 0.0f64;
    for (a, b) in jump.points.iter().zip(&reference.points) {
        if a.0 >= 1.6 && a.0 <= 1.9 {
            assert_eq!(a.0, b.0);
            worst = worst.max((a.1 - b.1).abs());
        }
    }
    assert!(worst > 0.0 && worst <= 1e-5, "reflected amplitude {worst:e}");
}
