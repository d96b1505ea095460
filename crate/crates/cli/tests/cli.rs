use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgsqueeze"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn wgsqueeze")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// First number following `marker` in `text`.
fn number_after(text: &str, marker: &str) -> f64 {
    let rest = &text[text
        .find(marker)
        .unwrap_or_else(|| panic!("no `{marker}` in {text}"))
        + marker.len()..];
    let token: String = rest
        .trim_start()
        .chars()
        .take_while(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e'))
        .collect();
    token
        .parse()
        .unwrap_or_else(|_| panic!("bad number `{token}` in {text}"))
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bogus"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn same_seed_gives_identical_trace() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&["trace", "--seed", "7", "--out", "a.csv"], dir.path());
    let b = run(&["trace", "--seed", "7", "--out", "b.csv"], dir.path());
    let c = run(&["trace", "--seed", "8", "--out", "c.csv"], dir.path());
    assert!(a.status.success() && b.status.success() && c.status.success());
    let read = |n: &str| fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));
}

#[test]
fn seed_from_config_matches_flag() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "seed = 11\n").unwrap();
    let a = run(&["trace", "--config", "run.toml"], dir.path());
    let b = run(&["trace", "--seed", "11"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn trace_minimum_sits_near_squeezed_level() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["trace", "--summary", "--out", "t.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rel = number_after(&text, "dBm (");
    // Model minimum at 304 mW is -6.44 dB; the VBW-smoothed scatter is ~0.1 dB.
    assert!((rel + 6.44).abs() < 0.5, "{text}");
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("time_s,power_dbm"));
    assert_eq!(csv.lines().count(), 1 + 20_000);
}

#[test]
fn spectrum_half_width_matches_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--summary", "--out", "s.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let hwhm = number_after(&stdout(&o), "HWHM");
    assert!((hwhm - 2.5).abs() <= 0.1, "{hwhm}");
}

#[test]
fn squeeze_reproduces_headline_levels() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "squeeze",
            "--set",
            "pump_mw=[304]",
            "--set",
            "source.eta=0.79",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let row: Vec<f64> = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(
        (row[1] + 6.44).abs() < 0.01 && (row[2] - 15.66).abs() < 0.01,
        "{out}"
    );
}

#[test]
fn fit_round_trips_model_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["squeeze", "--out", "sweep.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(
        &["fit", "--input", "sweep.csv", "--out", "curve.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!((number_after(&text, "eta =") - 0.79).abs() < 1e-3, "{text}");
    assert!(
        (number_after(&text, "\na =") - 1210.0).abs() < 1.0,
        "{text}"
    );
}

#[test]
fn fit_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(&["fit", "--input", "nope.csv"], dir.path());
    assert_eq!(missing.status.code(), Some(5));

    fs::write(
        dir.path().join("bad.csv"),
        "pump_mw,squeezing_db,antisqueezing_db\n100,x,8\n",
    )
    .unwrap();
    let bad = run(&["fit", "--input", "bad.csv"], dir.path());
    assert_eq!(bad.status.code(), Some(3));
    assert!(stderr(&bad).contains("line 2"), "{}", stderr(&bad));

    fs::write(
        dir.path().join("one.csv"),
        "pump_mw,squeezing_db,antisqueezing_db\n100,-4,8\n",
    )
    .unwrap();
    let one = run(&["fit", "--input", "one.csv"], dir.path());
    assert_eq!(one.status.code(), Some(4));

    let none = run(&["fit"], dir.path());
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["squeeze", "--set", "source.eta=1.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("source"), "{}", stderr(&o));

    let o = run(&["squeeze", "--set", "pumpmw=3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pumpmw"), "{}", stderr(&o));

    fs::write(dir.path().join("bad.toml"), "[squeeze\n").unwrap();
    let o = run(&["squeeze", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["squeeze", "--config", "absent.toml"], dir.path());
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn empty_width_list_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["modes", "--set", "top_widths_um=[]"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("top_widths_um"));
}

#[test]
fn freqsweep_writes_requested_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["freqsweep", "--set", "points=11", "--out", "f.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn modes_writes_fields_and_dispersion() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "modes",
            "--set",
            "top_widths_um=[5.0]",
            "--set",
            "n_modes=1",
            "--set",
            "waveguide.resolution=10",
            "--set",
            "field_dir=fields",
            "--set",
            "dispersion_wavelengths_um=[1.5,1.6]",
            "--set",
            "dispersion_out=disp.csv",
            "--out",
            "w.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let fields: Vec<_> = fs::read_dir(dir.path().join("fields")).unwrap().collect();
    assert_eq!(fields.len(), 1);
    let disp = fs::read_to_string(dir.path().join("disp.csv")).unwrap();
    assert_eq!(disp.lines().count(), 3);
    let w = fs::read_to_string(dir.path().join("w.csv")).unwrap();
    assert!(w.starts_with("top_width_um,n_guided"), "{w}");
}

#[test]
fn modes_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        [
            "modes",
            "--set",
            "top_widths_um=[4.0,7.0]",
            "--set",
            "waveguide.resolution=10",
            "--out",
            out,
        ]
    };
    assert!(run(&args("a.csv"), dir.path()).status.success());
    assert!(run(&args("b.csv"), dir.path()).status.success());
    let read = |n: &str| fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    let text = String::from_utf8(read("a.csv")).unwrap();
    let counts: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(counts, ["1", "2"], "{text}");
}
