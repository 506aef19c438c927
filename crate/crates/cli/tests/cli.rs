use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pointscatter"))
}

fn example_potential() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/two_scatterers.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn forward_reports_charges_and_amplitudes() {
    let input = example_potential();
    let o = run(&[
        "forward",
        "--input",
        input.to_str().unwrap(),
        "--k",
        "0.05,0.05",
        "--directions",
        "4",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["amplitudes"].as_array().unwrap().len(), 4);
    let q0 = &v["charges"][0];
    assert!((q0[0].as_f64().unwrap() - 0.51).abs() < 0.01);
    assert!((q0[1].as_f64().unwrap() + 1.86).abs() < 0.01);
}

#[test]
fn forward_names_the_off_shell_row() {
    let input = example_potential();
    let o = run(&[
        "forward",
        "--input",
        input.to_str().unwrap(),
        "--k",
        "0.05,0.05",
        "--l=-0.05,0.05",
        "--l",
        "0.05,0.06",
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("l row 1"), "{}", stderr(&o));
}

#[test]
fn forward_rejects_k_disagreeing_with_kappa() {
    let input = example_potential();
    let o = run(&["forward", "--input", input.to_str().unwrap(), "--k", "0.05,0.06"]);
    assert!(!o.status.success());
}

#[test]
fn recover_self_test_reproduces_potential_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let input = example_potential();
    let mut outputs = Vec::new();
    for run_id in 0..2 {
        let out = dir.path().join(format!("p{run_id}.json"));
        let report = dir.path().join(format!("r{run_id}.txt"));
        let o = run(&[
            "recover",
            "--self-test",
            "--no-meta",
            "--input",
            input.to_str().unwrap(),
            "--k",
            "0.05,0.05",
            "--output",
            out.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let report = fs::read_to_string(&report).unwrap();
        assert!(report.contains("self_test PASS"), "{report}");
        outputs.push((fs::read(&out).unwrap(), report));
    }
    assert_eq!(outputs[0], outputs[1]);
    let (p, kappa) = pointscatter::io::read_potential(&dir.path().join("p0.json")).unwrap();
    assert_eq!(p.len(), 2);
    assert!(kappa.is_some());
}

#[test]
fn recover_from_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let input = example_potential();
    let (p, kappa) = pointscatter::io::read_potential(&input).unwrap();
    let kappa = kappa.unwrap();
    let k = pointscatter::model::IncidentVector::new(vec![0.05, 0.05], kappa).unwrap();
    let oracle = pointscatter::forward::solve_charges(&p, kappa, &k)
        .unwrap()
        .amplitude_oracle()
        .unwrap();
    let dataset = pointscatter::io::FarFieldDataset::from_oracle(&oracle, kappa, Some(&k));
    let path = dir.path().join("data.json");
    pointscatter::io::write_json(&path, &dataset).unwrap();
    let o = run(&["recover", "--input", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let back: pointscatter::io::PotentialFile = serde_json::from_str(&stdout(&o)).unwrap();
    let (q, _) = back.to_potential().unwrap();
    assert_eq!(q.len(), 2);

    let o = run(&["recover-source", "--input", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["sources"].as_array().unwrap().len(), 2);
}

#[test]
fn zeros_exit_status_distinguishes_empty_box() {
    let input = example_potential();
    let inp = input.to_str().unwrap();
    let none = run(&[
        "zeros",
        "--input",
        inp,
        "--k",
        "0.05,0.05",
        "--box=-1,1,-1,1",
        "--grid-n",
        "50",
    ]);
    assert_eq!(none.status.code(), Some(2));
    let some = run(&["zeros", "--input", inp, "--k", "0.05,0.05", "--box=-8,8,-8,8"]);
    assert!(some.status.success(), "{}", stderr(&some));
    let text = stdout(&some);
    assert!(text.starts_with("x1,x2,residual\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn grid_has_one_row_per_lattice_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let input = example_potential();
    let o = run(&[
        "grid",
        "--input",
        input.to_str().unwrap(),
        "--k",
        "0.05,0.05",
        "--box=-2,2,-6,0",
        "--nx",
        "7",
        "--ny",
        "5",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,re_psi,im_psi,abs_psi"));
    assert_eq!(lines.count(), 35);
}

#[test]
fn counterexample_fit_writes_both_potentials() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "counterexample",
        "fit",
        "--k",
        "0,0,2",
        "--y2",
        "1,0,0",
        "--alpha2",
        "1,1",
        "--alpha2-tilde",
        "2",
        "--output",
        dir.path().to_str().unwrap(),
        "--no-meta",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("directions 64\n"));
    let (nu, _) = pointscatter::io::read_potential(&dir.path().join("nu.json")).unwrap();
    let (nu_t, _) = pointscatter::io::read_potential(&dir.path().join("nu_tilde.json")).unwrap();
    assert_eq!(nu.position(1), &[1.0, 0.0, 0.0][..]);
    assert_eq!(nu_t.position(1), &[-1.0, 0.0, 0.0][..]);
}

#[test]
fn counterexample_invisible_with_real_strength() {
    let dir = tempfile::tempdir().unwrap();
    let input = example_potential();
    let o = run(&[
        "counterexample",
        "invisible",
        "--input",
        input.to_str().unwrap(),
        "--k",
        "0.05,0.05",
        "--box=-8,8,-8,8",
        "--alpha-new",
        "1",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (nu_t, _) = pointscatter::io::read_potential(&dir.path().join("nu_tilde.json")).unwrap();
    assert_eq!(nu_t.len(), 3);
    assert!(nu_t.scatterers().iter().all(|s| s.strength.im == 0.0));
}

#[test]
fn stale_zero_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = example_potential();
    let o = run(&[
        "counterexample",
        "invisible",
        "--input",
        input.to_str().unwrap(),
        "--k",
        "0.05,0.05",
        "--zero=0.994,-4.398",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("not a zero"), "{}", stderr(&o));
}
