use std::path::Path;
use std::process::{Command, Output};

fn sram9t(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sram9t"))
        .args(args)
        .current_dir(dir)
        .env_remove("SRAM9T_PARAMS")
        .output()
        .expect("run sram9t")
}

fn trace(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn single_cell_xor_trace_prints_zero() {
    let dir = tempfile::tempdir().unwrap();
    let t = trace(
        dir.path(),
        "x.trace",
        "INIT 1 1\nLOADROW 0 1\nLOADB 1\nMASK 0\nXOR\nREADROW 0\n",
    );
    let o = sram9t(dir.path(), &["run", &t]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0\n");
}

#[test]
fn double_toggle_trace_restores_bits() {
    let dir = tempfile::tempdir().unwrap();
    let t = trace(
        dir.path(),
        "t.trace",
        "INIT 2 6\nLOADROW 1 110010\nTOGGLE\nTOGGLE\nREADROW 1\n",
    );
    let o = sram9t(dir.path(), &["run", &t]);
    assert_eq!(stdout(&o), "110010\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_bits = trace(dir.path(), "bad.trace", "INIT 1 2\nLOADROW 0 1z\n");
    let o = sram9t(dir.path(), &["run", &bad_bits]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let no_b = trace(dir.path(), "nob.trace", "INIT 1 2\nXOR\n");
    assert_eq!(sram9t(dir.path(), &["run", &no_b]).status.code(), Some(3));

    assert_eq!(
        sram9t(dir.path(), &["snm", "--bogus"]).status.code(),
        Some(1)
    );
    assert_eq!(
        sram9t(dir.path(), &["run", "missing.trace"]).status.code(),
        Some(1)
    );

    std::fs::write(dir.path().join("bad.params"), "vdd = lots\n").unwrap();
    let o = sram9t(dir.path(), &["snm", "--params", "bad.params"]);
    assert_eq!(o.status.code(), Some(1));

    // a step far too large for the node capacitances leaves the voltage window
    let o = sram9t(
        dir.path(),
        &["transient-step1", "--blr", "-0.6", "--dt-ps", "20"],
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn hold_snm_same_for_both_cells() {
    let dir = tempfile::tempdir().unwrap();
    let six = stdout(&sram9t(
        dir.path(),
        &["snm", "--cell", "6t", "--mode", "hold"],
    ));
    let nine = stdout(&sram9t(
        dir.path(),
        &["snm", "--cell", "9t", "--mode", "hold"],
    ));
    let value = |s: &str| {
        s.lines()
            .nth(1)
            .unwrap()
            .rsplit(',')
            .next()
            .unwrap()
            .to_string()
    };
    assert!(six.starts_with("mode,cell,value_v\n"));
    assert_eq!(value(&six), value(&nine));
}

#[test]
fn params_from_env_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("wide.params"), "w_m3 = 3\nw_m4 = 3\n").unwrap();
    let default = stdout(&sram9t(dir.path(), &["snm", "--mode", "read"]));
    let flagged = stdout(&sram9t(
        dir.path(),
        &["snm", "--mode", "read", "--params", "wide.params"],
    ));
    let from_env = Command::new(env!("CARGO_BIN_EXE_sram9t"))
        .args(["snm", "--mode", "read"])
        .current_dir(dir.path())
        .env("SRAM9T_PARAMS", "wide.params")
        .output()
        .unwrap();
    assert_ne!(default, flagged);
    assert_eq!(stdout(&from_env), flagged);
}

#[test]
fn transient_csv_and_demo_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = sram9t(dir.path(), &["transient-step1", "--duration-ps", "50"]);
    let csv = stdout(&o);
    assert!(csv.starts_with("time_s,vx_v,vy_v,n_v\n"));
    assert_eq!(csv.lines().count(), 52);
    assert!(String::from_utf8_lossy(&o.stderr).contains("flip at"));

    let o = sram9t(
        dir.path(),
        &[
            "bnn-demo", "--rows", "64", "--cols", "64", "--seed", "3", "--out", "bnn.csv",
        ],
    );
    assert!(stdout(&o).contains("oracle match: true"));
    let rows = std::fs::read_to_string(dir.path().join("bnn.csv")).unwrap();
    assert_eq!(rows.lines().count(), 65);

    let o = sram9t(
        dir.path(),
        &["otp-demo", "--bytes", "100", "--out", "ct.hex"],
    );
    assert!(stdout(&o).contains("roundtrip: true"));

    let o = sram9t(
        dir.path(),
        &["aging", "--total-time", "400", "--out", "aging.csv"],
    );
    assert!(stdout(&o).contains("max asymmetry: 1.000000"));
}
