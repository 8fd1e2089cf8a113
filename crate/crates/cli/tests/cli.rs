//! End-to-end tests for the `swarmtopo` binary on a deliberately tiny
//! library (2 combos x 2 runs, 20 agents) so the whole pipeline runs in
//! seconds. One shared store is built once through every subcommand;
//! tests that re-invoke the binary against it serialize on a mutex so
//! the store lock never sees two concurrent invocations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::{Mutex, MutexGuard, OnceLock};

use tempfile::{tempdir, TempDir};

const TINY_CONFIG: &str = "\
[grid]
c_values = [0.1, 2.0]
ell_values = [0.1]
runs_per_combo = 2

[sim]
n = 20

[ml]
k = 2
folds = 2
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swarmtopo"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawning swarmtopo");
    assert!(
        out.status.success(),
        "swarmtopo {:?} failed\nstdout:\n{}\nstderr:\n{}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
    out
}

fn run_err(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("spawning swarmtopo");
    assert!(
        !out.status.success(),
        "swarmtopo {args:?} unexpectedly succeeded"
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

struct Fixture {
    _dir: TempDir,
    store: PathBuf,
    config: PathBuf,
    /// Serializes binary invocations against the shared store.
    lock: Mutex<()>,
}

impl Fixture {
    fn args<'a>(&'a self, rest: &[&'a str]) -> Vec<String> {
        let mut v = vec![
            "--config".to_string(),
            self.config.display().to_string(),
            "--out".to_string(),
            self.store.display().to_string(),
        ];
        v.extend(rest.iter().map(|s| s.to_string()));
        v
    }

    fn invoke(&self, rest: &[&str]) -> (MutexGuard<'_, ()>, Output) {
        let guard = self.lock.lock().unwrap();
        let args = self.args(rest);
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        (guard, run_ok(&argv))
    }
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let dir = tempdir().expect("tempdir");
        let config = dir.path().join("tiny.toml");
        let store = dir.path().join("store");
        fs::write(&config, TINY_CONFIG).expect("writing config");
        let fx = Fixture {
            store,
            config,
            lock: Mutex::new(()),
            _dir: dir,
        };
        for step in [
            vec!["simulate"],
            vec!["features", "crocker"],
            vec!["features", "order-params"],
            vec!["cluster"],
            vec!["classify"],
            vec!["report"],
        ] {
            let args = fx.args(&step);
            let argv: Vec<&str> = args.iter().map(String::as_str).collect();
            run_ok(&argv);
        }
        fx
    })
}

fn read_toml(path: &Path) -> toml::Value {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"));
    toml::from_str(&text).unwrap_or_else(|e| panic!("parsing {path:?}: {e}"))
}

// Just the manifest fields the tests look at. Seeds are u64 and can
// exceed i64::MAX, so a generic `toml::Value` parse would reject them.
#[derive(serde::Deserialize)]
struct TestManifest {
    master_seed: u64,
    runs: Vec<TestRun>,
}

#[derive(serde::Deserialize)]
struct TestRun {
    id: String,
    phenotype: String,
    status: String,
    checksum: String,
    rhs_evaluations: u64,
    #[serde(default)]
    crockers: std::collections::BTreeMap<String, toml::Value>,
}

fn read_manifest(store: &Path) -> TestManifest {
    let path = store.join("manifest.toml");
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"));
    toml::from_str(&text).unwrap_or_else(|e| panic!("parsing {path:?}: {e}"))
}

/// Copy a store directory tree (flat enough that two levels suffice).
fn copy_store(src: &Path, dst: &Path) {
    fs::create_dir_all(dst).unwrap();
    for entry in fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        let to = dst.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_store(&entry.path(), &to);
        } else {
            fs::copy(entry.path(), &to).unwrap();
        }
    }
}

const ALL_SETS: [(&str, usize); 11] = [
    ("op-pol", 87),
    ("op-mang", 87),
    ("op-mabs", 87),
    ("op-dnn", 87),
    ("op-all", 348),
    ("pos-b0", 17400),
    ("pos-b1", 17400),
    ("pos-b0b1", 34800),
    ("del-b0", 17200),
    ("del-b1", 17200),
    ("del-b0b1", 34400),
];

#[test]
fn pipeline_populates_the_store() {
    let fx = fixture();

    let manifest = read_manifest(&fx.store);
    assert_eq!(manifest.master_seed, 0);
    assert_eq!(manifest.runs.len(), 4);
    for run in &manifest.runs {
        assert_eq!(run.status, "ok");
        assert_eq!(run.checksum.len(), 64);
        assert!(run.rhs_evaluations > 0);
        // Four crocker artifacts per run, each listed with a checksum.
        for key in ["pos-b0", "pos-b1", "del-b0", "del-b1"] {
            assert!(run.crockers.contains_key(key), "missing crocker record {key}");
        }
    }

    // One feature table per set, with the advertised dimensionality.
    for (name, dims) in ALL_SETS {
        let path = fx.store.join("features").join(format!("{name}.tsv"));
        let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path:?}: {e}"));
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("swarmtopo-features v1"));
        assert_eq!(lines.next(), Some("rows 4"));
        assert_eq!(lines.next().unwrap(), format!("features {dims}"));
    }
}

#[test]
fn reports_are_complete_and_consistent() {
    let fx = fixture();
    let reports = fx.store.join("reports");

    let cluster = read_toml(&reports.join("cluster.toml"));
    let classify = read_toml(&reports.join("classify.toml"));
    let summary = read_toml(&reports.join("summary.toml"));

    let sets = cluster["cells"].as_array().expect("cluster cells");
    assert_eq!(sets.len(), 11);
    for cell in sets {
        for mode in ["parameter_accuracy", "phenotype_accuracy"] {
            let acc = cell[mode].as_float().expect("accuracy");
            assert!((0.0..=1.0).contains(&acc));
        }
        assert_eq!(cell["medoids"].as_array().map(Vec::len), Some(2));
    }

    let cells = classify["cells"].as_array().expect("classify cells");
    assert_eq!(cells.len(), 33, "11 sets x 3 pca treatments");
    for cell in cells {
        let acc = cell["mean_accuracy"].as_float().expect("mean accuracy");
        assert!((0.0..=1.0).contains(&acc));
        assert_eq!(cell["fold_accuracy"].as_array().map(Vec::len), Some(2));
    }

    // The summary's headline gap must agree with the cluster report.
    let acc = |name: &str| {
        sets.iter()
            .find(|c| c["feature"].as_str() == Some(name))
            .and_then(|c| c["parameter_accuracy"].as_float())
            .unwrap()
    };
    let gap = summary["claims"]["cluster_parameter_gap"].as_float().unwrap();
    assert!((gap - (acc("pos-b0b1") - acc("op-all"))).abs() < 1e-12);
    for claim in [
        "best_supervised_topological",
        "best_supervised_order_params",
    ] {
        assert!(summary["claims"][claim].as_float().is_some());
    }

    // Confusion matrices: integer rows that sum to the number of runs.
    let conf =
        fs::read_to_string(reports.join("confusion/cluster-pos-b0-parameter.txt")).unwrap();
    let mut lines = conf.lines();
    assert_eq!(lines.next(), Some("swarmtopo-confusion v1"));
    assert_eq!(lines.next(), Some("classes 2"));
    let total: i64 = lines
        .flat_map(|l| l.split_whitespace())
        .map(|t| t.parse::<i64>().expect("integer count"))
        .sum();
    assert_eq!(total, 4);
    assert!(reports.join("confusion/classify-del-b0b1-3.txt").exists());
}

#[test]
fn simulate_and_features_are_idempotent() {
    let fx = fixture();
    let manifest_before = {
        let _g = fx.lock.lock().unwrap();
        fs::read(fx.store.join("manifest.toml")).unwrap()
    };

    let (_g, out) = fx.invoke(&["simulate"]);
    assert!(
        stdout_of(&out).contains("0 integrated, 4 already present"),
        "unexpected simulate output: {}",
        stdout_of(&out)
    );
    drop(_g);

    let (_g, out) = fx.invoke(&["features", "crocker"]);
    assert!(stdout_of(&out).contains("up to date"));
    drop(_g);

    let manifest_after = {
        let _g = fx.lock.lock().unwrap();
        fs::read(fx.store.join("manifest.toml")).unwrap()
    };
    assert_eq!(manifest_before, manifest_after, "manifest changed on no-op");
}

#[test]
fn stale_lock_blocks_and_names_the_file() {
    let fx = fixture();
    let _g = fx.lock.lock().unwrap();
    let lock_path = fx.store.join(".lock");
    fs::write(&lock_path, "pid 0\n").unwrap();
    let args = fx.args(&["simulate"]);
    let argv: Vec<&str> = args.iter().map(String::as_str).collect();
    let stderr = run_err(&argv);
    fs::remove_file(&lock_path).unwrap();
    assert!(
        stderr.contains("locked by another invocation") && stderr.contains(".lock"),
        "unhelpful lock error: {stderr}"
    );
}

#[test]
fn mismatched_seed_is_refused() {
    let fx = fixture();
    let _g = fx.lock.lock().unwrap();
    let args = fx.args(&["--seed", "1", "simulate"]);
    let argv: Vec<&str> = args.iter().map(String::as_str).collect();
    let stderr = run_err(&argv);
    assert!(
        stderr.contains("different grid or master seed"),
        "unhelpful mismatch error: {stderr}"
    );
}

#[test]
fn features_refuse_an_incomplete_library() {
    let fx = fixture();
    let dir = tempdir().unwrap();
    let store = dir.path().join("empty-store");
    let stderr = run_err(&[
        "--config",
        fx.config.to_str().unwrap(),
        "--out",
        store.to_str().unwrap(),
        "features",
        "crocker",
    ]);
    assert!(stderr.contains("run `swarmtopo simulate` first"), "{stderr}");
}

#[test]
fn report_requires_experiment_outputs() {
    let fx = fixture();
    let dir = tempdir().unwrap();
    let store = dir.path().join("empty-store");
    let stderr = run_err(&[
        "--config",
        fx.config.to_str().unwrap(),
        "--out",
        store.to_str().unwrap(),
        "report",
    ]);
    assert!(stderr.contains("run `swarmtopo cluster` first"), "{stderr}");
}

#[test]
fn corrupted_trajectory_fails_the_checksum_gate() {
    let fx = fixture();
    let dir = tempdir().unwrap();
    let copy = dir.path().join("store");
    {
        let _g = fx.lock.lock().unwrap();
        copy_store(&fx.store, &copy);
    }
    fs::remove_file(copy.join(".lock")).ok();

    // Tamper with one trajectory alongside a valid checksum record, then
    // force the order-parameter tables to be rebuilt from it.
    let traj = copy.join("c2_l0.1/run00.txt");
    let mut bytes = fs::read(&traj).unwrap();
    let n = bytes.len();
    bytes[n - 10] = b'9';
    fs::write(&traj, bytes).unwrap();
    for (name, _) in ALL_SETS.iter().filter(|(n, _)| n.starts_with("op-")) {
        fs::remove_file(copy.join("features").join(format!("{name}.tsv"))).unwrap();
    }

    let stderr = run_err(&[
        "--config",
        fx.config.to_str().unwrap(),
        "--out",
        copy.to_str().unwrap(),
        "features",
        "order-params",
    ]);
    assert!(
        stderr.contains("missing or corrupt"),
        "expected checksum failure: {stderr}"
    );
}

#[test]
fn rebuilding_with_the_same_seed_reproduces_trajectories() {
    let fx = fixture();
    let dir = tempdir().unwrap();
    let store = dir.path().join("store-b");
    run_ok(&[
        "--config",
        fx.config.to_str().unwrap(),
        "--out",
        store.to_str().unwrap(),
        "simulate",
    ]);

    let checksums = |path: &Path| -> Vec<(String, String)> {
        read_manifest(path)
            .runs
            .into_iter()
            .map(|r| (r.id, r.checksum))
            .collect()
    };
    let _g = fx.lock.lock().unwrap();
    assert_eq!(checksums(&fx.store), checksums(&store));
}

#[test]
fn runs_override_shrinks_the_grid() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("three.toml");
    let store = dir.path().join("store-small");
    fs::write(
        &config,
        "[grid]\nc_values = [0.1]\nell_values = [0.1]\nruns_per_combo = 3\n\n\
         [sim]\nn = 5\n\n[ml]\nk = 2\nfolds = 2\n",
    )
    .unwrap();
    let out = run_ok(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        store.to_str().unwrap(),
        "--runs",
        "2",
        "simulate",
    ]);
    assert!(stdout_of(&out).contains("2 integrated"), "{}", stdout_of(&out));
    assert_eq!(read_manifest(&store).runs.len(), 2);
}

#[test]
fn off_grid_combos_simulate_but_have_no_phenotype() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("offgrid.toml");
    let store = dir.path().join("store");
    fs::write(
        &config,
        "[grid]\nc_values = [0.2]\nell_values = [0.1]\nruns_per_combo = 2\n\n\
         [sim]\nn = 5\n\n[ml]\nk = 2\nfolds = 2\n",
    )
    .unwrap();
    run_ok(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        store.to_str().unwrap(),
        "simulate",
    ]);
    assert_eq!(read_manifest(&store).runs[0].phenotype, "-");

    let stderr = run_err(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        store.to_str().unwrap(),
        "features",
        "order-params",
    ]);
    assert!(stderr.contains("no phenotype"), "{stderr}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[ml]\nbogus = 3\n").unwrap();
    let stderr = run_err(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("store").to_str().unwrap(),
        "simulate",
    ]);
    assert!(stderr.contains("bogus"), "{stderr}");
}

fn parse_svg(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{path:?}: {e}"));
    let doc = roxmltree::Document::parse(&text).unwrap_or_else(|e| panic!("{path:?}: {e}"));
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    text
}

#[test]
fn plots_are_well_formed_svg() {
    let fx = fixture();
    let dir = tempdir().unwrap();
    let (crocker, traj) = {
        let _g = fx.lock.lock().unwrap();
        (
            fx.store.join("c2_l0.1/run00.pos.b0.txt"),
            fx.store.join("c2_l0.1/run00.txt"),
        )
    };

    let heat = dir.path().join("crocker.svg");
    run_ok(&[
        "plot",
        crocker.to_str().unwrap(),
        "--out",
        heat.to_str().unwrap(),
    ]);
    let text = parse_svg(&heat);
    assert!(text.contains("(cap 150)"), "default b0 cap in title");
    assert!(text.contains("1e-3"), "epsilon decade ticks");

    let capped = dir.path().join("capped.svg");
    run_ok(&[
        "plot",
        crocker.to_str().unwrap(),
        "--cap",
        "5",
        "--out",
        capped.to_str().unwrap(),
    ]);
    assert!(parse_svg(&capped).contains("(cap 5)"));

    let snap = dir.path().join("snapshot.svg");
    run_ok(&["plot", traj.to_str().unwrap(), "--out", snap.to_str().unwrap()]);
    let text = parse_svg(&snap);
    assert!(text.contains("<circle"), "agent dots");
    assert!(text.contains("<line"), "velocity arrows");

    let proj = dir.path().join("projections.svg");
    run_ok(&[
        "plot",
        traj.to_str().unwrap(),
        "--delay",
        "--out",
        proj.to_str().unwrap(),
    ]);
    let text = parse_svg(&proj);
    for pair in ["x vs y", "x vs xd", "y vs yd"] {
        assert!(text.contains(pair), "projection panel {pair}");
    }
}
