use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use szego_core::heisenberg::{group_mul, hnorm};
use szego_core::lattice::{lattice, LatticeSpec};
use szego_core::projection::SampledFunction;
use szego_core::{GroupPoint, Quaternion};

fn szego(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_szego")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_samples(path: &Path, g: &GroupPoint) {
    let spec = LatticeSpec::new(1.0, 0.5, 0.2).unwrap();
    let pts: Vec<GroupPoint> = lattice(&spec, 2)
        .unwrap()
        .iter()
        .map(|v| group_mul(g, &v.point).unwrap())
        .collect();
    let f = SampledFunction::tabulate(2, 0.5, 0.25, &pts, |h| {
        Quaternion::new((-hnorm(h)).exp(), 0.0, h.t.to_array()[1], 0.0)
    })
    .unwrap();
    f.write_csv(fs::File::create(path).unwrap()).unwrap();
}

#[test]
fn verify_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "4", "1"] {
        let p = dir.path().join(format!("v{}.json", files.len()));
        let out = szego(&[
            "verify", "--n", "2", "--seed", "7", "--samples", "200", "--threads", threads, "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.code().is_some());
        files.push(fs::read(&p).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
    let v: Value = serde_json::from_slice(&files[0]).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 12);
    assert!(v.get("runtime_ms").is_none());
}

#[test]
fn eval_records_row_errors_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("pts.csv");
    fs::write(&p, "t1,t2,t3,y1,y2,y3,y4\n0,0,0,0,0,0,0\n1,0,0,0,0,0,0\n").unwrap();
    let out = szego(&["eval", "--in", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t1,t2,t3,y1,y2,y3,y4,f1,f2,f3,f4,status,error");
    assert!(lines[1].contains(",NaN,NaN,NaN,NaN,1,line 2:"), "{}", lines[1]);
    assert!(lines[2].ends_with("0.0000000000000000e0,4.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,0,"));
}

#[test]
fn eval_quaternion_mode_and_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    fs::write(&p, "x1,x2,x3,x4\n1,0,0,0\n1,1,0,oops\n").unwrap();
    let out = szego(&["eval", "--in", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    fs::write(&p, "x1,x2,x3,x4\n1,0,0,0\n").unwrap();
    let out = szego(&["eval", "--in", p.to_str().unwrap(), "--c", "2"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("2.4000000000000000e1"));
}

#[test]
fn lower_bound_reports_anchor() {
    let out = szego(&["lower-bound", "--n", "2", "--c", "2", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let s = &v["nonvanishing"]["s_one_plus_i"];
    assert_eq!(s[1].as_f64().unwrap(), -2.0);
    assert_eq!(s[0].as_f64().unwrap(), 0.0);
    assert_eq!(v["nonvanishing"]["a_table"].as_array().unwrap().len(), 9);
    assert!(v["ball_pair"]["inf"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(szego(&["verify", "--n", "1"]).status.code(), Some(2));
    assert_eq!(szego(&["verify", "--bogus"]).status.code(), Some(2));
    assert_eq!(szego(&["scan", "--claim", "nope"]).status.code(), Some(2));
    assert_eq!(szego(&["eval", "--in", "/nonexistent.csv"]).status.code(), Some(3));
    // the commutator check targets 2·b while the bracket is 4·b
    let out = szego(&["scan", "--claim", "commutator"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["params"]["observed_factor"].as_f64().unwrap(), 4.0);
}

#[test]
fn project_output_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let g = GroupPoint::from_coords(&[0.25, 0.0, 0.0, 0.5, 0.0, -0.5, 0.0]).unwrap();
    let p = dir.path().join("f.csv");
    write_samples(&p, &g);
    let point = "0.25,0,0,0.5,0,-0.5,0";
    let args = |threads: &'static str| {
        vec![
            "project", "--in", p.to_str().unwrap(), "--radius", "1", "--hy", "0.5", "--exclusion", "0.2", "--point",
            point, "--threads", threads,
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>()
    };
    let run = |a: Vec<String>| szego(&a.iter().map(String::as_str).collect::<Vec<_>>());
    let a = run(args("1"));
    let b = run(args("8"));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["value"].as_array().unwrap().len(), 4);
    assert_eq!(v["spec"]["radius"].as_f64().unwrap(), 1.0);
    assert!(v.get("runtime_ms").is_none());
    let mut timed = args("1");
    timed.push("--timing".into());
    assert!(json(&run(timed)).get("runtime_ms").is_some());
    let mut rev = args("1");
    rev.push("--reversed".into());
    assert_ne!(json(&run(rev))["value"], v["value"]);
    // a point whose shifted lattice leaves the sampled set
    let mut off = args("1");
    off[10] = "1,0,0,0,0,0,0".into();
    assert_eq!(run(off).status.code(), Some(3));
}

#[test]
fn reproduce_small_lattice() {
    let out = szego(&["reproduce", "--radius", "2", "--hy", "0.5", "--exclusion", "0.1"]);
    let v = json(&out);
    assert_eq!(v["report"]["method"], "radial");
    assert!(v["report"]["rel_err"].as_f64().unwrap().is_finite());
    assert_eq!(out.status.code(), Some(if v["pass"].as_bool().unwrap() { 0 } else { 1 }));
}
