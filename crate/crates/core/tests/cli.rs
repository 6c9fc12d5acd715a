use polygur::fenchel::KFn;
use polygur::kernel::rational::{q, qvec};
use polygur::Space;
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polygur"));
    for var in ["POLYGUR_SEED", "POLYGUR_DIM_CAP", "POLYGUR_LEVEL", "POLYGUR_NET_STEP", "POLYGUR_OUT", "POLYGUR_JOBS"] {
        c.env_remove(var);
    }
    c
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("polygur-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn write_line_types(dir: &std::path::Path) -> (PathBuf, PathBuf) {
    let e = Space::ell_inf(1);
    let f = KFn::new(e.clone(), vec![(qvec(&[1]), q(1)), (qvec(&[-1]), q(1))]).unwrap();
    let g = KFn::new(e, vec![(qvec(&[1]), q(0)), (qvec(&[-1]), q(0)), (qvec(&[0]), q(1))]).unwrap();
    let (pf, pg) = (dir.join("f.json"), dir.join("g.json"));
    std::fs::write(&pf, serde_json::to_string(&f.to_type().unwrap()).unwrap()).unwrap();
    std::fs::write(&pg, serde_json::to_string(&g.to_type().unwrap()).unwrap()).unwrap();
    (pf, pg)
}

#[test]
fn norm_of_named_space() {
    let o = run(&["norm", "--space", "l1:2", "--v", "[1, -2]"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["norm"], "3");
}

#[test]
fn malformed_vector_is_a_parse_error() {
    let o = run(&["norm", "--space", "l1:2", "--v", "[1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["kind"], "parse");
}

#[test]
fn broken_json_reports_position() {
    let dir = scratch("broken");
    let p = dir.join("bad.json");
    std::fs::write(&p, "{\n  \"base\": [1,\n").unwrap();
    let o = run(&["dist", "--type1", p.to_str().unwrap(), "--type2", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr_json(&o);
    assert_eq!(err["kind"], "parse");
    assert!(err["line"].as_u64().is_some() && err["column"].as_u64().is_some());
}

#[test]
fn distance_between_line_types() {
    let dir = scratch("dist");
    let (f, g) = write_line_types(&dir);
    let o = run(&["dist", "--type1", f.to_str().unwrap(), "--type2", g.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!((v["lo"].as_str(), v["hi"].as_str(), v["exact"].as_bool()), (Some("1"), Some("1"), Some(true)));
}

#[test]
fn non_isolated_type_exits_one_and_certificate_verifies() {
    let dir = scratch("isolate");
    let (f, _) = write_line_types(&dir);
    let o = run(&["isolate", "--type", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let cert = dir.join("cert.json");
    std::fs::write(&cert, &o.stdout).unwrap();
    let v = run(&["verify", "--cert", cert.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(stdout_json(&v)["valid"], true);
}

#[test]
fn smoothness_answers() {
    let o = run(&["smooth", "--space", "linf:2", "--v", "[1, 1/2]"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["smooth", "--space", "linf:2", "--v", "[1, 1]"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dimension_cap_above_six_is_rejected() {
    let o = run(&["--dim-cap", "9", "norm", "--space", "l1:2", "--v", "[1, 0]"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["kind"], "dimension_too_large");
}

#[test]
fn census_net_is_deterministic_under_seed() {
    let outs: Vec<PathBuf> = ["a", "b"].iter().map(|n| scratch(&format!("net-{n}"))).collect();
    for d in &outs {
        let o = run(&["--seed", "5", "--out", d.to_str().unwrap(), "census", "net", "--space", "linf:1", "--R", "2", "--eps", "1/2", "--samples", "6"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["net.json", "samples.json", "coverage.csv"] {
        assert_eq!(std::fs::read(outs[0].join(f)).unwrap(), std::fs::read(outs[1].join(f)).unwrap(), "{f}");
    }
}

#[test]
fn forge_outputs_verify() {
    let dir = scratch("forge");
    let o = run(&["--out", dir.to_str().unwrap(), "forge", "run", "--budget", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["unresolved"], 0);
    for f in ["chain.json", "extensions.json"] {
        let v = run(&["verify", "--cert", dir.join(f).to_str().unwrap()]);
        assert_eq!(v.status.code(), Some(0), "{f}");
        assert_eq!(stdout_json(&v)["valid"], true);
    }
    let csv = std::fs::read_to_string(dir.join("defect.csv")).unwrap();
    assert!(csv.lines().count() >= 2);
}

#[test]
fn square_has_no_three_anchors() {
    let dir = scratch("anchors");
    let search = dir.join("grid.json");
    std::fs::write(&search, r#"{"grid": {"radius": 10}}"#).unwrap();
    let o = run(&["--out", dir.to_str().unwrap(), "census", "lindenstrauss", "--space", "linf:2", "--m", "3", "--anchors", search.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["anchors_found"], false);
}
