use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn sccp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sccp"))
}

fn run(args: &[&str]) -> Output {
    sccp().args(args).output().expect("binary runs")
}

fn model(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
        .display()
        .to_string()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SCALE_1E3: [&str; 6] = [
    "--param",
    "N0=1000",
    "--param",
    "OmegaZ=1000",
    "--param",
    "OmegaV=1000",
];

#[test]
fn parse_exit_codes() {
    let ok = run(&["parse", &model("prostate_ias_base.sccp")]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));

    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.sccp");
    std::fs::write(
        &bad,
        "vars { X = 0; }\na :- [true -> Time' = 3]{inf}.a;\nnetwork a;\n",
    )
    .unwrap();
    let o = run(&["parse", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.sccp:2:"), "{}", stderr(&o));
    assert!(stderr(&o).contains("Time"));

    let o = run(&["parse", dir.path().join("missing.sccp").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["parse"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parameter_overrides() {
    let o = run(&["parse", "--builtin", "prostate", "--param", "N0=10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&["parse", "--builtin", "prostate", "--param", "nope=1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = run(&["parse", "--builtin", "prostate", "--param", "N0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["parse", "--builtin", "prostate", "--policy", "sometimes"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compile_reports_modes() {
    let o = run(&[
        "compile",
        "--builtin",
        "prostate",
        "--kappa",
        "all-continuous",
        "--emit",
        "tdsha",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("modes 1\n"));

    let dir = TempDir::new().unwrap();
    let f = dir.path().join("m.sccp");
    std::fs::write(
        &f,
        "vars { X = 0; }\n\
         a :- [true -> X' = X + 1]{1}.b;\n\
         b :- [true -> ]{1}.c;\n\
         c :- [true -> ]{1}.a;\n\
         s :- [true -> ]{1}.t;\n\
         t :- [true -> ]{1}.s;\n\
         network a || s;\n",
    )
    .unwrap();
    let f = f.to_str().unwrap();
    let rts = stdout(&run(&["compile", f, "--emit", "rts"]));
    assert!(rts.contains("component a states 3"), "{rts}");
    assert!(rts.contains("component s states 2"));
    let o = run(&["compile", f, "--kappa", "all-discrete", "--emit", "tdsha"]);
    assert!(stdout(&o).starts_with("modes 6\n"));
    let dot = stdout(&run(&["compile", f, "--emit", "dot"]));
    assert!(dot.starts_with("digraph"));

    let o = run(&["compile", f, "--kappa", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "compile",
        f,
        "--kappa",
        "all-discrete,zz.0=c",
        "--emit",
        "tdsha",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ias_psa_stays_in_control_band() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = vec![
        "simulate",
        "--builtin",
        "prostate",
        "--policy",
        "ias",
        "--kappa",
        "all-discrete",
        "--t-end",
        "1000",
        "--seed",
        "7",
        "--grid",
        "1",
        "--out",
        out,
    ];
    args.extend(SCALE_1E3);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("trajectory.csv"));
    let v = header.iter().position(|h| h == "V").unwrap();
    let u = header.iter().position(|h| h == "U").unwrap();
    // after the first switch-off, the 28-day checks keep PSA in a bounded band
    let first_off = rows.iter().position(|r| r[u] == 0.0).unwrap();
    let band: Vec<f64> = rows[first_off..].iter().map(|r| r[v] / 1000.0).collect();
    let lo = band.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = band.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(lo > 2.0 && lo < 4.5, "{lo}");
    assert!(hi > 10.0 && hi < 25.0, "{hi}");

    let text = std::fs::read_to_string(dir.path().join("events.csv")).unwrap();
    let toggles = text.lines().filter(|l| l.contains("checkPSA")).count();
    assert!(toggles >= 4, "{text}");
}

#[test]
fn fluid_run_ignores_seed() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        let o = run(&[
            "simulate",
            "--builtin",
            "prostate",
            "--kappa",
            "all-continuous",
            "--t-end",
            "1000",
            "--grid",
            "10",
            "--seed",
            seed,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let ta = std::fs::read(a.path().join("trajectory.csv")).unwrap();
    let tb = std::fs::read(b.path().join("trajectory.csv")).unwrap();
    assert_eq!(ta, tb);
    let (header, rows) = read_csv(&a.path().join("trajectory.csv"));
    let v = header.iter().position(|h| h == "V").unwrap();
    // relapse: PSA rises at the end
    let n = rows.len();
    assert!(rows[n - 1][v] > rows[n - 2][v]);
}

fn psa_roughness(variant: &str) -> f64 {
    let dir = TempDir::new().unwrap();
    let mut args = vec![
        "simulate",
        "--builtin",
        "prostate",
        "--policy",
        "ias",
        "--variant",
        variant,
        "--t-end",
        "200",
        "--grid",
        "0.25",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ];
    args.extend(SCALE_1E3);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("trajectory.csv"));
    let v = header.iter().position(|h| h == "V").unwrap();
    let steps: Vec<f64> = rows
        .windows(2)
        .map(|w| (w[1][v] - w[0][v]) / 1000.0)
        .collect();
    steps.iter().map(|d| d * d).sum::<f64>() / steps.len() as f64
}

#[test]
fn hidden_switch_roughens_psa() {
    let base = psa_roughness("base");
    let hidden = psa_roughness("hidden");
    assert!(hidden > 20.0 * base, "{hidden} vs {base}");
}

#[test]
fn single_replicate_ensemble_equals_simulation() {
    let s = TempDir::new().unwrap();
    let e = TempDir::new().unwrap();
    let common = [
        "--builtin",
        "prostate",
        "--t-end",
        "50",
        "--grid",
        "5",
        "--seed",
        "11",
    ];
    let mut args = vec!["simulate"];
    args.extend(common);
    args.extend(SCALE_1E3);
    args.extend(["--out", s.path().to_str().unwrap()]);
    assert_eq!(run(&args).status.code(), Some(0));
    let mut args = vec!["ensemble", "--n", "1"];
    args.extend(common);
    args.extend(SCALE_1E3);
    args.extend(["--out", e.path().to_str().unwrap()]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let (header, traj) = read_csv(&s.path().join("trajectory.csv"));
    let text = std::fs::read_to_string(e.path().join("stats.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,var,mean,var,q05,q50,q95"));
    let mut count = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let t: f64 = f[0].parse().unwrap();
        let k = traj.iter().position(|r| r[0] == t).unwrap();
        let c = header.iter().position(|h| h == f[1]).unwrap();
        let mean: f64 = f[2].parse().unwrap();
        assert_eq!(mean, traj[k][c]);
        assert_eq!(f[3], "0");
        count += 1;
    }
    assert_eq!(count, 11 * 4);
}

#[test]
fn ensemble_output_independent_of_jobs() {
    let mut outs = Vec::new();
    for jobs in ["1", "3"] {
        let dir = TempDir::new().unwrap();
        let o = run(&[
            "ensemble",
            "--builtin",
            "prostate",
            "--policy",
            "ias",
            "--n0",
            "100",
            "--n",
            "24",
            "--t-end",
            "120",
            "--grid",
            "10",
            "--seed",
            "5",
            "--jobs",
            jobs,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outs.push(std::fs::read(dir.path().join("stats.csv")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn extinction_report_under_cas() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "ensemble",
        "--builtin",
        "prostate",
        "--report",
        "extinction",
        "--policy",
        "cas",
        "--n0",
        "100",
        "--n",
        "60",
        "--t-end",
        "1000",
        "--grid",
        "100",
        "--seed",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("extinction.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("var,extinct,replicates,fraction,ci95_low,ci95_high")
    );
    let y: Vec<&str> = lines
        .find(|l| l.starts_with("Y,"))
        .unwrap()
        .split(',')
        .collect();
    let frac: f64 = y[3].parse().unwrap();
    let (lo, hi): (f64, f64) = (y[4].parse().unwrap(), y[5].parse().unwrap());
    assert!(frac > 0.0);
    assert!(lo <= frac && frac <= hi);
}

#[test]
fn noise_scaling_table() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "ensemble",
        "--builtin",
        "prostate",
        "--report",
        "noise-scaling",
        "--n0",
        "100,400,1600",
        "--n",
        "40",
        "--t-end",
        "50",
        "--grid",
        "50",
        "--at",
        "50",
        "--seed",
        "9",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("noise_scaling_fit.csv"));
    assert_eq!(header, ["slope", "slope_se", "intercept"]);
    let slope = rows[0][0];
    assert!((slope + 0.5).abs() < 0.2, "{slope}");
    let table = std::fs::read_to_string(dir.path().join("noise_scaling.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(stdout(&o).contains("slope"));

    let o = run(&[
        "ensemble",
        "--builtin",
        "prostate",
        "--report",
        "noise-scaling",
        "--n0",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn replay_reproduces_outputs() {
    let work = TempDir::new().unwrap();
    let f = work.path().join("birth_death.sccp");
    std::fs::write(
        &f,
        "params { b = 0.9; }\nvars { int N = 20; }\n\
         birth :- [true -> N' = N + 1]{b * N}.birth;\n\
         death :- [N > 0 -> N' = N - 1]{N}.death;\n\
         network birth || death;\n",
    )
    .unwrap();
    let first = work.path().join("first");
    let o = run(&[
        "simulate",
        f.to_str().unwrap(),
        "--t-end",
        "5",
        "--seed",
        "4",
        "--log-all-events",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = first.join("manifest.json");
    let second = work.path().join("second");
    let o = run(&[
        "replay",
        manifest.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["trajectory.csv", "events.csv", "manifest.json"] {
        assert_eq!(
            std::fs::read(first.join(name)).unwrap(),
            std::fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }

    std::fs::write(
        &f,
        "vars { int N = 1; }\nd :- [N > 0 -> N' = N - 1]{1}.d;\nnetwork d;\n",
    )
    .unwrap();
    let o = run(&[
        "replay",
        manifest.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("changed"));
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("from-env");
    let o = sccp()
        .args([
            "simulate",
            "--builtin",
            "prostate",
            "--param",
            "N0=10",
            "--param",
            "OmegaZ=10",
        ])
        .args(["--param", "OmegaV=10", "--t-end", "10"])
        .env("SCCP_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(target.join("trajectory.csv").exists());
    assert!(target.join("manifest.json").exists());
}

#[test]
fn simulate_without_event_log() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "simulate",
        "--builtin",
        "prostate",
        "--policy",
        "ias",
        "--variant",
        "random-psa-rate",
        "--param",
        "N0=10",
        "--param",
        "OmegaZ=10",
        "--param",
        "OmegaV=10",
        "--t-end",
        "50",
        "--grid",
        "5",
        "--no-events",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("trajectory.csv").exists());
    assert!(!dir.path().join("events.csv").exists());
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("--no-events"));
    assert!(!manifest.contains("events.csv"));
}
