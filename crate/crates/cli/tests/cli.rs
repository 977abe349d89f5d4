use std::fs;
use std::path::Path;

use clutter_cli::raster::parse_csv;
use clutter_cli::{run, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_INVALID_STRUCTURE, EXIT_OK, EXIT_USAGE};

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn clutter(args: &[&str]) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("clutter").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

/// Nonnegative-definite lag table: `0.4 e^{-(k²+l²)/4}` with alternating column sign.
fn write_alternating_matrix(path: &Path) {
    let mut text = String::from("# alternating gaussian structure\n");
    for k in 0..6 {
        let row: Vec<String> = (0..6)
            .map(|l| {
                let v = if (k, l) == (0, 0) {
                    1.0
                } else {
                    let sign = if l % 2 == 1 { -1.0 } else { 1.0 };
                    sign * 0.4 * (-((k * k + l * l) as f64) / 4.0).exp()
                };
                format!("{v:.16e}")
            })
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

fn parse_table(stdout: &str) -> Vec<Vec<String>> {
    stdout.lines().map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn corrmap_examples() {
    let r = clutter(&["corrmap", "--alpha", "-1.5", "--looks", "1", "--rho", "0.5"]);
    assert_eq!(r.code, EXIT_OK);
    let tau: f64 = r.stdout.trim().parse().unwrap();
    assert!((tau - 0.629).abs() < 0.01);
    assert!(r.stderr.contains("alpha=-1.5"));

    let r = clutter(&["corrmap", "--alpha", "-1.5", "--looks", "1", "--rho", "0"]);
    assert_eq!(r.stdout, "0.000000\n");

    let r = clutter(&["corrmap", "--alpha", "-1.5", "--looks", "1", "--rho", "-0.9"]);
    assert_eq!(r.code, EXIT_INFEASIBLE);
    assert!(r.stderr.contains("attainable range"));
}

#[test]
fn usage_errors() {
    assert_eq!(clutter(&["corrmap", "--alpha", "-1.5"]).code, EXIT_USAGE);
    assert_eq!(clutter(&["corrmap", "--alpha", "-0.5", "--rho", "0.1"]).code, EXIT_USAGE);
    assert_eq!(clutter(&["nonsense"]).code, EXIT_USAGE);
    assert_eq!(clutter(&["table", "--bogus-flag"]).code, EXIT_USAGE);
    assert_eq!(clutter(&["--help"]).code, EXIT_OK);
    let r = clutter(&["simulate", "--alpha", "-3", "--size", "63", "--model", "param:a=0.4,L=2", "--out", "/dev/null"]);
    assert_eq!(r.code, EXIT_USAGE);
    let r = clutter(&["simulate", "--alpha", "-3", "--size", "64", "--model", "gauss:a=1", "--out", "/dev/null"]);
    assert_eq!(r.code, EXIT_USAGE);
    let r = clutter(&["simulate", "--alpha", "-3", "--size", "64", "--model", "param:a=0.4,L=3", "--out", "/dev/null"]);
    assert_eq!(r.code, EXIT_USAGE);
}

#[test]
fn table_zero_row() {
    let r = clutter(&["table", "--rhos", "0"]);
    assert_eq!(r.code, EXIT_OK);
    let rows = parse_table(&r.stdout);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].len(), 13);
    assert!(rows[1][1..].iter().all(|c| c == "0.000000"));
}

#[test]
fn table_marks_infeasible_cells_blank() {
    let r = clutter(&["table", "--alphas", "-1.5", "--looks", "1", "--rhos", "-0.5,-0.4"]);
    let rows = parse_table(&r.stdout);
    assert_eq!(rows[1], vec!["-0.5", ""]);
    assert!(!rows[2][1].is_empty());
}

#[test]
fn density_table_integrates_to_one() {
    let r = clutter(&["density", "--alpha", "-3", "--looks", "1", "--gamma", "1", "--zmax", "60", "--points", "60001"]);
    assert_eq!(r.code, EXIT_OK);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("z,pdf"));
    let pts: Vec<(f64, f64)> = lines
        .map(|l| {
            let (z, p) = l.split_once(',').unwrap();
            (z.parse().unwrap(), p.parse().unwrap())
        })
        .collect();
    assert_eq!(pts[0], (0.0, 0.0));
    let area: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    assert!((area - 1.0).abs() < 1e-4, "{area}");
}

#[test]
fn normalized_density_has_unit_mean() {
    let r = clutter(&["density", "--alpha", "-3", "--looks", "3", "--normalized", "--zmax", "80", "--points", "80001"]);
    assert_eq!(r.code, EXIT_OK);
    let pts: Vec<(f64, f64)> = r
        .stdout
        .lines()
        .skip(1)
        .map(|l| {
            let (z, p) = l.split_once(',').unwrap();
            (z.parse().unwrap(), p.parse().unwrap())
        })
        .collect();
    let mean: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].0 * w[0].1 + w[1].0 * w[1].1)).sum();
    assert!((mean - 1.0).abs() < 1e-3, "{mean}");

    let r = clutter(&["density", "--alpha", "-3", "--gamma", "1", "--points", "3", "--zmax", "2", "--log"]);
    assert!(r.stdout.starts_with("z,ln_pdf\n"));
    assert_eq!(clutter(&["density", "--alpha", "-3"]).code, EXIT_USAGE);
}

#[test]
fn two_branch_model_is_rejected_as_invalid_structure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("field.csv");
    let r = clutter(&[
        "simulate", "--alpha", "-1.5", "--gamma", "1", "--looks", "1", "--size", "128", "--model", "param:a=0.4,L=2", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_INVALID_STRUCTURE);
    assert!(r.stderr.contains("spectral mask"));
    assert!(!out.exists());
}

#[test]
fn simulate_from_matrix_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("rho.csv");
    write_alternating_matrix(&matrix);
    let model = format!("matrix:{}", matrix.display());
    let field = dir.path().join("field.csv");
    let tau = dir.path().join("tau.csv");
    let psi = dir.path().join("psi.csv");
    let r = clutter(&[
        "simulate", "--alpha", "-3", "--size", "64", "--model", &model, "--seed", "5", "--out",
        field.to_str().unwrap(), "--emit-tau", tau.to_str().unwrap(), "--emit-psi", psi.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stderr.contains("seed=5"));
    let (rows, cols, values) = parse_csv(&fs::read_to_string(&field).unwrap()).unwrap();
    assert_eq!((rows, cols), (64, 64));
    assert!(values.iter().all(|&v| v > 0.0));
    let (_, _, tau) = parse_csv(&fs::read_to_string(&tau).unwrap()).unwrap();
    assert_eq!(tau[0], 1.0);
    assert!(tau[1] < 0.0 && tau[64] > 0.0);
    let (_, _, psi) = parse_csv(&fs::read_to_string(&psi).unwrap()).unwrap();
    assert!(psi.iter().all(|&p| p >= 0.0));

    let again = dir.path().join("again.csv");
    clutter(&["simulate", "--alpha", "-3", "--size", "64", "--model", &model, "--seed", "5", "--out", again.to_str().unwrap()]);
    assert_eq!(fs::read(&field).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn simulate_pgm_with_bounds_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("rho.csv");
    write_alternating_matrix(&matrix);
    let img = dir.path().join("field.pgm");
    let r = clutter(&[
        "simulate", "--alpha", "-9", "--looks", "3", "--size", "32", "--model", &format!("matrix:{}", matrix.display()),
        "--format", "pgm16", "--out", img.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let bytes = fs::read(&img).unwrap();
    let header = b"P5\n32 32\n65535\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 2 * 32 * 32);
    let sidecar = fs::read_to_string(dir.path().join("field.pgm.bounds")).unwrap();
    assert!(sidecar.starts_with("min=") && sidecar.contains("\nmax="));
}

#[test]
fn simulate_input_and_feasibility_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let out = out.to_str().unwrap();
    let r = clutter(&["simulate", "--alpha", "-3", "--size", "16", "--model", "matrix:/no/such/file.csv", "--out", out]);
    assert_eq!(r.code, EXIT_INPUT);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,0.2\n0.5\n").unwrap();
    let r = clutter(&["simulate", "--alpha", "-3", "--size", "16", "--model", &format!("matrix:{}", bad.display()), "--out", out]);
    assert_eq!(r.code, EXIT_INPUT);

    let infeasible = dir.path().join("neg.csv");
    fs::write(&infeasible, "1,-0.9\n-0.95,0\n").unwrap();
    let r = clutter(&[
        "simulate", "--alpha", "-1.5", "--size", "16", "--model", &format!("matrix:{}", infeasible.display()), "--out", out,
    ]);
    assert_eq!(r.code, EXIT_INFEASIBLE);
    assert!(r.stderr.contains("(0,1)=-0.9") && r.stderr.contains("(1,0)=-0.95"), "{}", r.stderr);

    let r = clutter(&["simulate", "--alpha", "-1", "--size", "16", "--model", "param:a=0.4,L=2", "--out", out]);
    assert_eq!(r.code, EXIT_USAGE);
}

#[test]
fn estimate_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("rho.csv");
    write_alternating_matrix(&matrix);
    let field = dir.path().join("field.csv");
    let r = clutter(&[
        "simulate", "--alpha", "-3", "--size", "256", "--model", &format!("matrix:{}", matrix.display()), "--seed", "3", "--out",
        field.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let est = dir.path().join("est.csv");
    let r = clutter(&[
        "estimate", "--input", field.to_str().unwrap(), "--window", "4", "--out", est.to_str().unwrap(), "--fit-moments",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.starts_with("alpha="));
    let (rows, cols, r_hat) = parse_csv(&fs::read_to_string(&est).unwrap()).unwrap();
    assert_eq!((rows, cols), (4, 4));
    let target = 0.4 * (-0.25f64).exp();
    // 32 x 32 blocks: standard error near 1/32
    assert!((r_hat[4] - target).abs() < 0.12, "{}", r_hat[4]);
    assert!((r_hat[1] + target).abs() < 0.12, "{}", r_hat[1]);

    let flat = dir.path().join("flat.csv");
    fs::write(&flat, "2,2,2,2\n2,2,2,2\n2,2,2,2\n2,2,2,2\n").unwrap();
    let r = clutter(&["estimate", "--input", flat.to_str().unwrap(), "--window", "1", "--out", est.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_INFEASIBLE);

    let r = clutter(&["estimate", "--input", "/no/such.csv", "--window", "2", "--out", est.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_INPUT);
}
