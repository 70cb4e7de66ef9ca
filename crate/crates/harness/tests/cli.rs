use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mexplore(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mexplore")).args(args).current_dir(dir).output().expect("binary runs")
}

const TINY: &str = "\
# small enough for a test
env = corner
algorithm = ours
horizon = 8
hidden = 6
z_dim = 3
repr_dim = 3
meta_batch = 2
n_pre_traj = 2
n_post_traj = 2
outer_epochs = 1
iterations = 3
checkpoint_every = 3
";

#[test]
fn repeated_runs_write_identical_logs() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("tiny.cfg"), TINY).unwrap();
    for out in ["a", "b"] {
        let o = mexplore(&["run", "--config", "tiny.cfg", "--seed", "4", "--out", out, "-q"], tmp.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["metrics.csv", "tasks.txt", "config.txt", "checkpoints/iter_00003.txt"] {
        let a = fs::read(tmp.path().join("a").join(file)).unwrap();
        assert_eq!(a, fs::read(tmp.path().join("b").join(file)).unwrap(), "{file}");
    }
    let config = fs::read_to_string(tmp.path().join("a/config.txt")).unwrap();
    assert!(config.contains("seed = 4"));
}

#[test]
fn thread_count_does_not_change_the_log() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("par.cfg"), format!("{TINY}parallel = true\nalgorithm = promp\n").replace("algorithm = ours\n", "")).unwrap();
    for (out, threads) in [("one", "1"), ("three", "3")] {
        let o = Command::new(env!("CARGO_BIN_EXE_mexplore"))
            .args(["run", "--config", "par.cfg", "--out", out, "-q"])
            .env("MEXPLORE_THREADS", threads)
            .current_dir(tmp.path())
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let read = |d: &str| fs::read(tmp.path().join(d).join("metrics.csv")).unwrap();
    assert_eq!(read("one"), read("three"));
}

#[test]
fn resume_reuses_a_finished_run() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("tiny.cfg"), TINY).unwrap();
    let first = mexplore(&["run", "--config", "tiny.cfg", "--out", "r", "-q"], tmp.path());
    assert!(first.status.success());
    let csv = tmp.path().join("r/metrics.csv");
    // a reused run is read back, not rewritten
    let marker = fs::read_to_string(&csv).unwrap();
    fs::write(tmp.path().join("r/tasks.txt"), "kept\n").unwrap();
    let again = mexplore(&["run", "--config", "tiny.cfg", "--out", "r", "--resume", "-q"], tmp.path());
    assert!(again.status.success());
    assert_eq!(fs::read_to_string(tmp.path().join("r/tasks.txt")).unwrap(), "kept\n");
    assert_eq!(fs::read_to_string(&csv).unwrap(), marker);
    assert_eq!(first.stdout, again.stdout);
}

#[test]
fn compare_and_plot_read_run_directories() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("tiny.cfg"), TINY).unwrap();
    assert!(mexplore(&["run", "--config", "tiny.cfg", "--out", "x", "-q"], tmp.path()).status.success());
    let cmp = mexplore(&["compare", "--last", "2", "x"], tmp.path());
    assert!(cmp.status.success());
    let table = String::from_utf8(cmp.stdout).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert!(table.lines().nth(1).unwrap().starts_with("x "));
    let plot = mexplore(&["plot", "--out", "x.svg", "x"], tmp.path());
    assert!(plot.status.success(), "{}", String::from_utf8_lossy(&plot.stderr));
    assert!(fs::read_to_string(tmp.path().join("x.svg")).unwrap().contains("<polyline"));
}

#[test]
fn presets_list_and_write() {
    let tmp = tempfile::tempdir().unwrap();
    let list = mexplore(&["presets"], tmp.path());
    assert!(String::from_utf8(list.stdout).unwrap().contains("corner-ablation-grid: ours vpg-inner"));
    let w = mexplore(&["presets", "semicircle", "--write", "cfgs"], tmp.path());
    assert!(w.status.success());
    let text = fs::read_to_string(tmp.path().join("cfgs/ours-env-reward.cfg")).unwrap();
    assert!(text.contains("env = semicircle"));
}

#[test]
fn bad_input_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.cfg"), "horizon = 8\nwarp = 9\n").unwrap();
    let o = mexplore(&["run", "--config", "bad.cfg"], tmp.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key `warp`"));
    let o = mexplore(&["run", "--preset", "nope"], tmp.path());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown preset"));
    assert!(!tmp.path().join("runs").exists());
}
