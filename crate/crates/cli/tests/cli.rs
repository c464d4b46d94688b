use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dgsuper(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgsuper")).args(args).output().expect("spawn dgsuper")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

/// `(N, mode, component) -> (l1, l2, linf)` from a convergence CSV.
fn read_table(path: &Path) -> Vec<(usize, String, String, [f64; 3])> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "N,l1,order1,l2,order2,linf,orderinf,mode,component");
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[7].into(),
                f[8].into(),
                [f[1].parse().unwrap(), f[3].parse().unwrap(), f[5].parse().unwrap()],
            )
        })
        .collect()
}

#[test]
fn ex1_k1_table_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = dgsuper(&["run", "--preset", "ex1", "--k", "1", "--N", "40,80,160,320", "--out", &out_arg(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ca = fs::read(a.join("convergence.csv")).unwrap();
    assert_eq!(ca, fs::read(b.join("convergence.csv")).unwrap());
    let linf: Vec<f64> = read_table(&a.join("convergence.csv"))
        .into_iter()
        .filter(|r| r.1 == "0" && r.2 == "0")
        .map(|r| r.3[2])
        .collect();
    for (got, want) in linf.iter().zip([2.10e-3, 2.73e-4, 3.47e-5, 4.35e-6]) {
        assert!((got / want - 1.0).abs() < 0.05, "{got} vs {want}");
    }
}

#[test]
fn manifest_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = dgsuper(&[
        "run",
        "--preset",
        "ex3",
        "--k",
        "1",
        "--N",
        "20,40",
        "--profile",
        "--transient-samples",
        "20",
        "--out",
        &out_arg(&a),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    for key in
        ["preset = ex3", "k = 1", "N = 20,40", "cfl = 0.1", "init = l2", "flux = upwind", "tool_version", "wall_time_s"]
    {
        assert!(manifest.contains(key), "manifest lacks `{key}`:\n{manifest}");
    }
    let o = dgsuper(&["run", "--config", a.join("manifest.txt").to_str().unwrap(), "--out", &out_arg(&b)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["convergence.csv", "profile_N20.csv", "profile_N40.csv", "transient_N20.csv", "transient_N40.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let transient = fs::read_to_string(a.join("transient_N20.csv")).unwrap();
    assert!(transient.starts_with("t,scaled_linf,init_kind\n"));
    assert!(transient.contains(",l2\n") && transient.contains(",gauss_radau\n"));
    assert_eq!(transient.lines().count(), 1 + 2 * 21);
}

#[test]
fn flags_override_config_and_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "# ex1 sweep\npreset = ex1\nk = 7\nN = 40,80\n").unwrap();
    let out = out_arg(&dir.path().join("o"));
    let o = dgsuper(&["run", "--config", cfg.to_str().unwrap(), "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("exp.cfg:3:") && err.contains("k must lie in [0, 4]"), "{err}");
    let o = dgsuper(&["run", "--config", cfg.to_str().unwrap(), "--k", "0", "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(dir.path().join("o/manifest.txt")).unwrap().contains("k = 0\n"));

    fs::write(&cfg, "preset = ex1\nk = 1\ninit = special(3)\n").unwrap();
    let o = dgsuper(&["run", "--config", cfg.to_str().unwrap(), "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exp.cfg:3:"));

    for bad in [["--N", "30,60"], ["--N", "4"], ["--M", "-1"]] {
        let o = dgsuper(&["run", "--preset", "ex2", "--k", "1", "--flux", "lf", bad[0], bad[1], "--out", &out]);
        assert_eq!(o.status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn runtime_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = dgsuper(&["run", "--preset", "ex1", "--k", "0", "--N", "8", "--out", &out_arg(&blocker.join("sub"))]);
    assert_eq!(o.status.code(), Some(3));
}

fn summary(dir: &Path) -> Vec<(String, String)> {
    fs::read_to_string(dir.join("spectrum_summary.txt"))
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once(" = ").unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn value(s: &[(String, String)], key: &str) -> f64 {
    s.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no {key}")).1.parse().unwrap()
}

#[test]
fn spectrum_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let up = dir.path().join("up");
    assert!(dgsuper(&["spectrum", "--k", "2", "--flux", "upwind", "--out", &out_arg(&up)]).status.success());
    let s = summary(&up);
    assert!((value(&s, "alpha") - 3.0).abs() < 1e-9);
    assert!(value(&s, "pade_residual_mh_0.1") < 1e-9);
    assert!(fs::read_to_string(up.join("spectrum.csv"))
        .unwrap()
        .starts_with("m,mh,re_lambda_0,im_lambda_0,re_lambda_1,im_lambda_1,re_lambda_2,im_lambda_2,physical_index\n"));

    let lf2 = dir.path().join("lf2");
    assert!(dgsuper(&["spectrum", "--k", "1", "--flux", "lf", "--M", "2", "--a", "1", "--out", &out_arg(&lf2)])
        .status
        .success());
    let s = summary(&lf2);
    assert!((value(&s, "fit_constant") / (1.0 / 144.0) - 1.0).abs() < 0.02);
    assert_eq!(s.iter().find(|(k, _)| k == "lf_equals_upwind").unwrap().1, "false");

    let (lf1, up1) = (dir.path().join("lf1"), dir.path().join("up1"));
    assert!(dgsuper(&["spectrum", "--k", "1", "--flux", "lf", "--M", "1", "--a", "1", "--out", &out_arg(&lf1)])
        .status
        .success());
    assert!(dgsuper(&["spectrum", "--k", "1", "--out", &out_arg(&up1)]).status.success());
    assert_eq!(summary(&lf1).iter().find(|(k, _)| k == "lf_equals_upwind").unwrap().1, "true");
    assert_eq!(fs::read(lf1.join("spectrum.csv")).unwrap(), fs::read(up1.join("spectrum.csv")).unwrap());
}

#[test]
fn presets_listing() {
    let o = dgsuper(&["presets"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["ex1", "ex2", "ex3", "ex4", "custom"] {
        assert!(text.contains(name));
    }
}
