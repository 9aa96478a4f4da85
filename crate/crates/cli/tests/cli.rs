use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use zeeman_xpm::atom::presets::rb87_d1;
use zeeman_xpm::response::group_velocity;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeeman-xpm"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.txt");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

struct Csv {
    metadata: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn read(path: &Path) -> Self {
        let text = fs::read_to_string(path).unwrap();
        let (meta, body): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with('#'));
        Self {
            metadata: meta.into_iter().map(String::from).collect(),
            columns: body[0].split(',').map(String::from).collect(),
            rows: body[1..]
                .iter()
                .map(|l| l.split(',').map(String::from).collect())
                .collect(),
        }
    }

    fn get(&self, row: usize, column: &str) -> &str {
        let k = self.columns.iter().position(|c| c == column).unwrap();
        &self.rows[row][k]
    }

    fn num(&self, row: usize, column: &str) -> f64 {
        self.get(row, column).parse().unwrap()
    }

    fn row_with(&self, method: &str) -> usize {
        (0..self.rows.len())
            .find(|&r| self.get(r, "method") == method)
            .unwrap()
    }
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    num / x.iter().map(|a| (a - mx).powi(2)).sum::<f64>()
}

#[test]
fn preset_steady_reports_the_splitting_ratio() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["--preset", "rb87-d1", "steady"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = Csv::read(&dir.path().join("response.csv"));
    let r = csv.row_with("closed-form");
    assert!((csv.num(r, "ratio_a") / 70.0 - 1.0).abs() < 0.02);
    assert!(csv.metadata.iter().any(|l| l == "# preset = rb87-d1"));
    assert!(dir.path().join("regime.json").exists());
}

#[test]
fn absent_partner_gives_zero_alpha_a() {
    let dir = TempDir::new().unwrap();
    let file = scenario(dir.path(), "preset = rb87-d1\nrabi_b = 0\n");
    assert!(run(dir.path(), &["--scenario", &file, "steady"])
        .status
        .success());
    let csv = Csv::read(&dir.path().join("response.csv"));
    assert_eq!(csv.rows.len(), 3);
    for r in 0..csv.rows.len() {
        assert_eq!(csv.num(r, "re_alpha_a"), 0.0);
        assert_eq!(csv.num(r, "im_alpha_a"), 0.0);
    }
}

#[test]
fn doppler_flag_reaches_the_output() {
    let dir = TempDir::new().unwrap();
    assert!(run(dir.path(), &["steady", "--doppler", "T=10"])
        .status
        .success());
    let csv = Csv::read(&dir.path().join("response.csv"));
    assert!(csv
        .metadata
        .iter()
        .any(|l| l == "# doppler_averaged = true"));
    assert!(csv.metadata.iter().any(|l| l == "# temperature = 1e1"));
    assert_eq!(
        csv.get(csv.row_with("numeric-steady-state"), "doppler_averaged"),
        "true"
    );
}

#[test]
fn drive_sweep_follows_inverse_square() {
    let dir = TempDir::new().unwrap();
    let d = rb87_d1().rabi_drive;
    let text = format!("preset = rb87-d1\nsweep_variable = rabi-drive\nsweep_start = {d}\nsweep_end = {}\nsweep_samples = 9\n", 2.0 * d);
    let file = scenario(dir.path(), &text);
    assert!(run(dir.path(), &["--scenario", &file, "sweep"])
        .status
        .success());
    let csv = Csv::read(&dir.path().join("sweep.csv"));
    assert_eq!(csv.rows.len(), 9);
    let x: Vec<f64> = (0..9).map(|r| csv.num(r, "parameter").ln()).collect();
    let y: Vec<f64> = (0..9).map(|r| csv.num(r, "re_alpha_a").ln()).collect();
    assert!((slope(&x, &y) + 2.0).abs() <= 0.02);

    let file = scenario(dir.path(), &format!("{text}alpha_source = numeric\n"));
    assert!(run(dir.path(), &["--scenario", &file, "sweep"])
        .status
        .success());
    let csv = Csv::read(&dir.path().join("sweep.csv"));
    let y: Vec<f64> = (0..9).map(|r| csv.num(r, "im_alpha_a").ln()).collect();
    assert!((slope(&x, &y) + 2.0).abs() <= 0.02);
}

#[test]
fn detuning_sweep_slope_matches_group_velocity() {
    let dir = TempDir::new().unwrap();
    let config = rb87_d1().cross_phase().folded().unwrap();
    // Plain central differences need a step well inside the transparency window.
    let h = config.atom().gamma / 1000.0;
    let text = format!(
        "preset = rb87-d1\nalpha_source = numeric\nsweep_variable = detuning-a\nsweep_start = {}\nsweep_end = {h}\nsweep_samples = 3\n",
        -h
    );
    let file = scenario(dir.path(), &text);
    assert!(run(dir.path(), &["--scenario", &file, "sweep"])
        .status
        .success());
    let csv = Csv::read(&dir.path().join("sweep.csv"));
    let fd = (csv.num(2, "re_alpha_a") - csv.num(0, "re_alpha_a")) / (2.0 * h);
    let gv = group_velocity(&config, None).unwrap();
    assert!(
        (fd / gv.slope_a - 1.0).abs() < 1e-3,
        "{fd} vs {}",
        gv.slope_a
    );
}

#[test]
fn single_point_sweep_equals_steady() {
    let dir = TempDir::new().unwrap();
    assert!(run(dir.path(), &["steady"]).status.success());
    let steady = Csv::read(&dir.path().join("response.csv"));
    let d = rb87_d1().rabi_drive;
    for (source, method) in [
        ("analytic", "closed-form"),
        ("numeric", "numeric-steady-state"),
    ] {
        let text = format!(
            "preset = rb87-d1\nalpha_source = {source}\nsweep_start = {d}\nsweep_samples = 1\n"
        );
        let file = scenario(dir.path(), &text);
        assert!(run(dir.path(), &["--scenario", &file, "sweep"])
            .status
            .success());
        let sweep = Csv::read(&dir.path().join("sweep.csv"));
        assert_eq!(sweep.rows.len(), 1);
        assert_eq!(sweep.rows[0], steady.rows[steady.row_with(method)]);
    }
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let text = "preset = rb87-d1\nalpha_source = numeric\nsweep_variable = detuning-b\nsweep_start = -1e6\nsweep_end = 1e6\nsweep_samples = 7\n";
    let (fa, fb) = (scenario(a.path(), text), scenario(b.path(), text));
    assert!(run(a.path(), &["--scenario", &fa, "--jobs", "1", "sweep"])
        .status
        .success());
    assert!(run(b.path(), &["--scenario", &fb, "--jobs", "4", "sweep"])
        .status
        .success());
    let read = |d: &TempDir| fs::read(d.path().join("sweep.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    for d in [&a, &b] {
        assert!(run(d.path(), &["steady", "--format", "json"])
            .status
            .success());
    }
    let read = |d: &TempDir| fs::read(d.path().join("response.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn bad_scenarios_exit_with_config_code() {
    let dir = TempDir::new().unwrap();
    let file = scenario(dir.path(), "preset = rb87-d1\n\nwarp_factor = 9\n");
    let out = run(dir.path(), &["--scenario", &file, "steady"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let file = scenario(
        dir.path(),
        "preset = rb87-d1\nsweep_start = 1\nsweep_end = 1\n",
    );
    assert_eq!(
        run(dir.path(), &["--scenario", &file, "sweep"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(dir.path(), &["--preset", "cs133", "steady"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn under_resolved_propagation_is_a_numeric_error() {
    let dir = TempDir::new().unwrap();
    let file = scenario(dir.path(), "preset = rb87-d1\ndz = 5 mm\n");
    let out = run(dir.path(), &["--scenario", &file, "propagate"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn propagation_writes_grid_and_summary() {
    let dir = TempDir::new().unwrap();
    let file = scenario(dir.path(), "preset = rb87-d1\ntime_samples = 129\n");
    assert!(run(dir.path(), &["--scenario", &file, "propagate"])
        .status
        .success());
    let csv = Csv::read(&dir.path().join("propagation.csv"));
    assert_eq!(csv.rows.len() % 129, 0);
    assert!(csv.rows.len() / 129 >= 33);
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("propagation_summary.json")).unwrap(),
    )
    .unwrap();
    let phase = summary["data"]["phase_a"].as_f64().unwrap();
    assert!(phase > 2.5 && phase < 3.5);
}

#[test]
fn partner_field_switches_absorption() {
    let dir = TempDir::new().unwrap();
    assert!(run(dir.path(), &["switch", "--format", "json"])
        .status
        .success());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("switch.json")).unwrap()).unwrap();
    let row = &doc["data"][0];
    let with = row["transmission_with_partner"].as_f64().unwrap();
    let without = row["transmission_without_partner"].as_f64().unwrap();
    assert!(with < 0.5 && without > 0.99);
    assert_eq!(doc["metadata"]["scenario"]["scheme"], "cross-absorption");
}

#[test]
fn validate_reports_per_criterion() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "validate",
            "--criterion",
            "3",
            "--criterion",
            "5",
            "--format",
            "json",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("validation.json")).unwrap())
            .unwrap();
    let ids: Vec<u64> = doc["data"]["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_u64().unwrap())
        .collect();
    assert_eq!(ids, [3, 5]);
    assert_eq!(doc["data"]["mutation_detected"], true);
    assert_eq!(
        run(dir.path(), &["validate", "--criterion", "99"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn shipped_scenarios_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let s = zeeman_xpm::scenario::parse(&text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        s.validate().unwrap();
        n += 1;
    }
    assert!(n >= 5);
}
