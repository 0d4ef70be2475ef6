use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &PathBuf, file: &str, v: &Value) -> String {
    let p = dir.join(file);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn qgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgeom")).args(args).env_remove("QGEOM_THREADS").output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = qgeom(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn pauli() -> Value {
    json!([
        {"re": [[0, 1], [1, 0]]},
        {"re": [[0, 0], [0, 0]], "im": [[0, -1], [1, 0]]},
        {"re": [[1, 0], [0, -1]]}
    ])
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(qgeom(&[]).status.code(), Some(2));
    assert_eq!(qgeom(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qgeom(&["jnr"]).status.code(), Some(2));
    assert_eq!(qgeom(&["jnr", "--ops", "/nonexistent/ops.json"]).status.code(), Some(2));
    assert_eq!(qgeom(&["--help"]).status.code(), Some(0));
    assert_eq!(qgeom(&["--threads", "0", "uncertainty", "--table-j", "1"]).status.code(), Some(2));

    let dir = scratch("usage");
    let skew = write(&dir, "skew.json", &json!([{"re": [[0, 1], [0, 0]]}]));
    let out = qgeom(&["jnr", "--ops", &skew]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let bad = write(&dir, "bad.json", &json!({"nope": 1}));
    assert_eq!(qgeom(&["jnr", "--ops", &bad]).status.code(), Some(2));
    let not_state = write(&dir, "ns.json", &json!({"re": [[2, 0, 0], [0, 0, 0], [0, 0, -1]]}));
    assert_eq!(qgeom(&["wigner", "--state", &not_state, "--dims", "3"]).status.code(), Some(2));
    let mixed = write(&dir, "m.json", &json!({"re": [[0.5, 0], [0, 0.5]]}));
    assert_eq!(qgeom(&["wigner", "--state", &mixed, "--dims", "2"]).status.code(), Some(2));
    assert_eq!(qgeom(&["uncertainty", "--table-j", "0"]).status.code(), Some(2));
}

#[test]
fn common_eigenvector_exits_1() {
    let dir = scratch("classify");
    let ops = write(
        &dir,
        "ops.json",
        &json!([
            {"re": [[1, 0, 0], [0, 0, 1], [0, 1, 0]]},
            {"re": [[0, 0, 0], [0, 0, 0], [0, 0, 0]], "im": [[0, 0, 0], [0, 0, -1], [0, 1, 0]]},
            {"re": [[0, 0, 0], [0, 1, 0], [0, 0, -1]]}
        ]),
    );
    let out = qgeom(&["classify", "--ops", &ops]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn pauli_range_mesh_is_a_sphere() {
    let dir = scratch("jnr");
    let ops = write(&dir, "pauli.json", &pauli());
    let mesh = dir.join("ball.obj");
    let v = ok_json(&["jnr", "--ops", &ops, "--dirs", "300", "--mesh", mesh.to_str().unwrap()]);
    assert_eq!(v["tool"], "qgeom");
    assert_eq!(v["result"]["dim"], 3);
    assert_eq!(v["result"]["bounded"], true);
    let text = fs::read_to_string(&mesh).unwrap();
    let mut verts = 0;
    let mut faces = 0;
    for line in text.lines() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.first() {
            Some(&"v") => {
                let p: Vec<f64> = parts[1..].iter().map(|s| s.parse().unwrap()).collect();
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                assert!((r - 1.0).abs() < 0.02, "vertex norm {r}");
                verts += 1;
            }
            Some(&"f") => {
                for s in &parts[1..] {
                    let i: usize = s.parse().unwrap();
                    assert!(i >= 1);
                }
                faces += 1;
            }
            _ => {}
        }
    }
    assert!(verts >= 100);
    // closed triangulated sphere
    assert_eq!(faces, 2 * verts - 4);

    let two = write(&dir, "xz.json", &json!([pauli()[0], pauli()[2]]));
    let csv_path = dir.join("poly.csv");
    ok_json(&["jnr", "--ops", &two, "--dirs", "64", "--mesh", csv_path.to_str().unwrap()]);
    let mut rd = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["x", "y"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert!(rows.len() >= 64);
    assert_eq!(rows.first(), rows.last());
}

#[test]
fn uncertainty_table_value() {
    let v = ok_json(&["uncertainty", "--table-j", "1"]);
    let x = v["result"]["value"].as_f64().unwrap();
    assert!((x - 0.4375).abs() < 1e-9, "{x}");
    let lb = v["result"]["lower_bound"].as_f64().unwrap();
    assert!(lb <= x + 1e-9 && x - lb < 1e-3);
    let half = ok_json(&["uncertainty", "--table-j", "1/2"]);
    assert!((half["result"]["value"].as_f64().unwrap() - 0.25).abs() < 1e-9);
}

#[test]
fn exact_interconvert_example() {
    let dir = scratch("interconvert");
    let psi = write(&dir, "psi.json", &json!({"offset": 1, "probs": ["1/6", "1/3", "1/3", "1/6"]}));
    let phi = write(&dir, "phi.json", &json!({"offset": 0, "probs": ["1/2", "1/2"]}));
    let v = ok_json(&["interconvert", "--psi", &psi, "--phi", &phi, "--exact"]);
    let r = &v["result"];
    assert_eq!(r["convertible"], true);
    assert_eq!(r["embedding_dim"], 11);
    assert_eq!(r["w"]["offset"], 1);
    assert_eq!(r["w"]["weights"], json!(["1/3", "1/3", "1/3"]));

    let k = ok_json(&["interconvert", "--psi", &psi, "--phi", &phi, "--kraus"]);
    assert_eq!(k["result"]["kraus"]["operators"].as_array().unwrap().len(), 3);

    // the reverse direction spreads the support and is refused
    let back = ok_json(&["interconvert", "--psi", &phi, "--phi", &psi]);
    assert_eq!(back["result"]["convertible"], false);
    assert!(back["result"]["w"].is_null());

    let amps = write(&dir, "amps.json", &json!({"offset": 0, "amps": [[0.5f64.sqrt(), 0.0], [0.0, 0.5f64.sqrt()]]}));
    let out = qgeom(&["interconvert", "--psi", &amps, "--phi", &phi, "--exact"]);
    assert_eq!(out.status.code(), Some(2));
    let aux = ok_json(&["interconvert", "--psi", &phi, "--phi", &psi, "--aux-d", "2"]);
    assert!(aux["result"]["convertible"].is_boolean());
}

#[test]
fn reports_are_deterministic() {
    let dir = scratch("determinism");
    let h = write(
        &dir,
        "h.json",
        &json!({"dims": [2, 2], "re": [[1, 0, 0, 0.3], [0, -1, 0.2, 0], [0, 0.2, 0.5, 0], [0.3, 0, 0, -0.5]]}),
    );
    let args = ["--seed", "7", "sep-max", "--op", &h, "--restarts", "8"];
    let a = qgeom(&args);
    let b = qgeom(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["tolerances"].is_object());
    let r = &v["result"];
    let (lo, hi) = (r["lower"].as_f64().unwrap(), r["upper"].as_f64().unwrap());
    assert!(lo <= hi + 1e-9 && hi - lo < 1e-6);

    let ops = write(&dir, "ops.json", &json!({"dims": [2, 2], "ops": [
        {"re": [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]},
        {"re": [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]]}
    ]}));
    let one = qgeom(&["--seed", "3", "--threads", "1", "sep-jnr", "--ops", &ops, "--dirs", "16", "--restarts", "4"]);
    let two = qgeom(&["--seed", "3", "--threads", "2", "sep-jnr", "--ops", &ops, "--dirs", "16", "--restarts", "4"]);
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    let ppt = ok_json(&["ppt-jnr", "--ops", &ops, "--dirs", "8"]);
    assert_eq!(ppt["result"]["dim"], 2);
}

#[test]
fn wigner_commands() {
    let dir = scratch("wigner");
    let zero = write(&dir, "zero.json", &json!({"re": [[1, 0, 0], [0, 0, 0], [0, 0, 0]]}));
    let table = dir.join("w.csv");
    let v = ok_json(&["wigner", "--state", &zero, "--dims", "3", "--out", table.to_str().unwrap()]);
    assert!((v["result"]["total"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let mut rd = csv::Reader::from_path(&table).unwrap();
    for row in rd.records() {
        let row = row.unwrap();
        let w: f64 = row[2].parse().unwrap();
        let want = if &row[0] == "0" { 1.0 / 3.0 } else { 0.0 };
        assert!((w - want).abs() < 1e-12);
    }

    let mixed = write(&dir, "mixed.json", &json!({"re": [[0.5, 0, 0], [0, 0.25, 0], [0, 0, 0.25]]}));
    let same = ok_json(&["wh-convert", "--rho", &mixed, "--sigma", &mixed, "--dims", "3"]);
    assert_eq!(same["result"]["convertible"], true);
    // a diagonal state is fixed by every Z displacement, so only the x = 0 column is forced
    let k: Vec<f64> = same["result"]["kernel"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((k[..3].iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(k[3..].iter().all(|x| x.abs() < 1e-9));
    let purify = ok_json(&["wh-convert", "--rho", &zero, "--sigma", &mixed, "--dims", "3"]);
    assert_eq!(purify["result"]["convertible"], false);
}

#[test]
fn su2_commands() {
    let dir = scratch("su2");
    let phi = write(
        &dir,
        "phi.json",
        &json!([
            {"j": "1", "m": "-1", "amp": [1.0 / 3f64.sqrt(), 0.0]},
            {"j": "2", "m": "-1", "amp": [1.0 / 3f64.sqrt(), 0.0]},
            {"j": "3", "m": "-1", "amp": [1.0 / 3f64.sqrt(), 0.0]}
        ]),
    );
    let omega = write(
        &dir,
        "omega.json",
        &json!([{"j": "0", "m": "0", "amp": [0.5f64.sqrt(), 0.0]}, {"j": "1", "m": "0", "amp": [0.5f64.sqrt(), 0.0]}]),
    );
    let v = ok_json(&["su2", "convert", "--a", &phi, "--b", &omega]);
    let want = [("1", 3.0 / 10.0), ("2", 43.0 / 126.0), ("3", 97.0 / 360.0), ("4", 5.0 / 56.0)];
    let entries = v["result"].as_array().unwrap();
    assert_eq!(entries.len(), 4);
    for (e, (j, p)) in entries.iter().zip(want) {
        assert_eq!(e["j"], j);
        assert_eq!(e["m"], "-1");
        let a = e["amp"][0].as_f64().unwrap();
        assert!((a * a - p).abs() < 1e-12);
    }

    let up = write(&dir, "up.json", &json!([{"j": "1/2", "m": "1/2", "amp": [1.0, 0.0]}]));
    let c = ok_json(&["su2", "combine", "--a", &up, "--b", &up]);
    assert_eq!(c["result"], json!([{"j": "1", "m": "1", "tag": "(1/2,1/2)", "amp": [1.0, 0.0]}]));

    let chi = ok_json(&["su2", "chi", "--a", &up, "--g", "0,0,-1.5"]);
    let z = &chi["result"][0]["chi"];
    assert!((z[0].as_f64().unwrap() - 0.75f64.cos()).abs() < 1e-12);
    assert!((z[1].as_f64().unwrap() + 0.75f64.sin()).abs() < 1e-12);

    let target = write(
        &dir,
        "target.json",
        &json!([{"j": "0", "m": "0", "amp": [0.5f64.sqrt(), 0.0]}, {"j": "1", "m": "1", "amp": [0.5f64.sqrt(), 0.0]}]),
    );
    let m = ok_json(&["su2", "marvian", "--a", &up, "--b", &target, "--samples", "200"]);
    assert_eq!(m["result"]["verdict"], "impossible");
    let self_test = ok_json(&["su2", "marvian", "--a", &up, "--b", &up, "--samples", "30"]);
    assert_eq!(self_test["result"]["verdict"], "consistent");
    assert_eq!(qgeom(&["su2", "convert", "--a", &up]).status.code(), Some(2));
    let bad = write(&dir, "bad.json", &json!([{"j": "1/2", "m": "1", "amp": [1.0, 0.0]}]));
    assert_eq!(qgeom(&["su2", "combine", "--a", &bad, "--b", &up]).status.code(), Some(2));
}

#[test]
fn gap_and_distinguish() {
    let dir = scratch("gap");
    let curve = dir.join("curve.csv");
    let v = ok_json(&["gap", "--n", "4", "--steps", "80", "--csv", curve.to_str().unwrap()]);
    let r = &v["result"];
    let (eps, gap) = (r["epsilon"].as_f64().unwrap(), r["true_gap"].as_f64().unwrap());
    assert!(gap <= eps + 1e-9, "{gap} > {eps}");
    let rows = csv::Reader::from_path(&curve).unwrap().records().count();
    assert_eq!(rows, 81);

    let u = write(&dir, "u.json", &json!({"re": [[1, 0], [0, 1]]}));
    let x = write(&dir, "x.json", &json!({"re": [[0, 1], [1, 0]]}));
    let d = ok_json(&["distinguish", "--u", &u, "--v", &x]);
    assert_eq!(d["result"]["distinguishable"], true);
    let s = write(&dir, "s.json", &json!({"re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 1]]}));
    let d = ok_json(&["distinguish", "--u", &u, "--v", &s]);
    assert_eq!(d["result"]["distinguishable"], false);
    let n = write(&dir, "n.json", &json!({"re": [[1, 1], [0, 1]]}));
    assert_eq!(qgeom(&["distinguish", "--u", &u, "--v", &n]).status.code(), Some(2));
}
