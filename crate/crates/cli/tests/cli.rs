use std::path::Path;
use std::process::{Command, Output};

fn ks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn build_gamma_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let g = path(dir.path(), "g.json");
    let o = ks(&["build", "gamma", "--a-angle", "0", "--b-angle", "45", "-o", &g]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&g).unwrap();
    assert!(text.contains("\"gadget\": \"gamma\""));

    let o = ks(&["verify", &g]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("[holds]").count(), 4);

    let o = ks(&["verify", &g, "--pin", "a=1", "--pin", "b=1"]);
    assert!(stdout(&o).starts_with("infeasible"));
    let o = ks(&["verify", &g, "--pin", "a=0", "--pin", "b=0", "--expect", "infeasible"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ks(&["verify", &g, "--pin", "a=1", "--two-valued", "--expect", "none"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn orthogonal_rays_are_an_input_error() {
    let o = ks(&["build", "gamma", "--b-angle", "90"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("non orthogonal"));
}

#[test]
fn d_margin_printed_as_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path(), "d.json");
    let o = ks(&["build", "d", "--a-angle", "20", "--b-angle", "50", "-o", &d]);
    assert_eq!(o.status.code(), Some(0));
    let o = ks(&["verify", &d, "--pin", "z=1", "--max", "b-a", "--expect", "negative"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("max = -1/49"));
}

#[test]
fn frame_two_valued_witness_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "f.json");
    assert_eq!(ks(&["build", "frame", "-o", &f]).status.code(), Some(0));
    let o = ks(&["verify", &f, "--two-valued"]);
    assert!(stdout(&o).contains("witness"));

    let dot = stdout(&ks(&["export", &f, "--format", "dot"]));
    assert!(dot.starts_with("graph orthogonality {"));
    assert!(dot.contains("label=\"b12\""));
    let csv = stdout(&ks(&["export", &f, "--format", "csv", "--pole", "0,0,1"]));
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("index,x,y,z,angle_to_pole_deg"));

    let back = path(dir.path(), "back.json");
    assert_eq!(ks(&["import", &f, "-o", &back]).status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(&f).unwrap(),
        std::fs::read_to_string(&back).unwrap()
    );
}

#[test]
fn import_rejects_malformed_json() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(&bad, "{ \"rays\": [ [\"1\", \"0\" ").unwrap();
    let o = ks(&["import", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn import_plain_rays_with_detection() {
    let dir = tempfile::tempdir().unwrap();
    let r = path(dir.path(), "rays.txt");
    std::fs::write(&r, "# frame\n1,0,0\n0 1 0\n0,0,-1\n").unwrap();
    let o = ks(&["import", &r, "--rays", "--detect"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("3 rays, 1 triples, 3 pairs"));
}

#[test]
fn builds_are_deterministic() {
    let a = ks(&["build", "piron"]);
    let b = ks(&["build", "piron"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "run.toml");
    std::fs::write(&cfg, "[build]\na_angle = 40\nb_angle = 80\n[tolerance]\northo_eps = 1e-11\n").unwrap();
    let o = ks(&["--config", &cfg, "build", "d"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"value\": 40.0"));
    std::fs::write(&cfg, "[build]\nunknown = 1\n").unwrap();
    assert_eq!(ks(&["--config", &cfg, "build", "d"]).status.code(), Some(2));
}

#[test]
fn fit_reports_state() {
    let o = ks(&["fit", "e1=0.4", "e2=0.4", "e3=0.2", "b12=0.6", "b13=0.3", "b23=0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["is_state"], true);
    assert!((v["w"][3].as_f64().unwrap() - 0.2).abs() < 1e-15);
    assert_eq!(ks(&["fit", "e1=0.4"]).status.code(), Some(2));
}

#[test]
fn interval_table() {
    let o = ks(&["interval", "--x-angle", "30", "--stages", "1", "--epsilon", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "stage,rays,lo,hi,lo_approx,hi_approx,born,width");
    assert!(lines[1].starts_with("0,2,0,1,"));
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("# width < 2*epsilon: false"));
}
