use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anticyclo")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json_rows(out: &[u8]) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(out).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

const SMALL: &str = "q = [3]\nn_t = [0]\nn_chi = [0, 1]\ntruncation = 40\n";

#[test]
fn local_integral_example_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "q = [3]\nkinds = [\"split\"]\nn_t = [0]\nn_chi = [1]\ns = [0]\n");
    let out = bin(&["local-integral", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = json_rows(&out.stdout);
    assert!(!rows.is_empty());
    for r in &rows {
        assert_eq!(r["schema_version"], 1);
        assert_eq!(r["quantity"], "I_T");
        assert_eq!(r["pass"], true);
        assert_eq!(r["value_re"], r["reference_re"]);
    }
}

#[test]
fn exceptional_rows_are_alpha_twists_of_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let out = bin(&["exceptional", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    for r in json_rows(&out.stdout).iter().filter(|r| r["quantity"] == "I_T(0)") {
        let zero = r["value_re"] == 0.0 && r["value_im"] == 0.0;
        assert_eq!(r["exceptional"].as_bool().unwrap(), zero, "{r}");
        if zero {
            assert_eq!(r["n_chi"], 0);
            if r["kind"] != "inert" {
                assert_eq!(r["alpha"].as_str().unwrap().parse::<i64>().unwrap(), r["chi_uniformizer"].as_i64().unwrap());
            }
        }
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for bad in ["q = [4]", "alpha = [3]", "no_such_key = true", "q = \"x\"", "[constants]\nc_T = 0", "tate_p = 5\nprecision = 30"] {
        let cfg = write(dir.path(), "bad.toml", bad);
        let out = bin(&["euler", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        let err: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
        assert_eq!(err["exit_code"], 2);
    }
    assert_eq!(bin(&["euler", "--config", "/nonexistent/x.toml"]).status.code(), Some(2));
}

#[test]
fn failed_invariant_exits_1_with_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[[places]]\nq = 3\nkind = \"ramified\"\nalpha = 1\nchi_uniformizer = 1\n");
    let out = bin(&["interpolate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let rec: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(rec["subcommand"], "interpolate");
    assert_eq!(rec["failures"], 1);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let a = bin(&["local-integral", "--config", &cfg, "--jobs", "1", "--format", "csv"]);
    let b = bin(&["local-integral", "--config", &cfg, "--jobs", "4", "--format", "csv"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("q,kind,n_T,n_chi,alpha,s,value_re,value_im,exceptional,symbolic_deps,"));
}

#[test]
fn out_file_and_seed_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "samples = 10\ncocycle_level = 4\n");
    let out_path = dir.path().join("o.csv");
    let out = bin(&["cocycle", "--config", &cfg, "--seed", "7", "--precision", "8", "--out", out_path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(out_path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("10/10"));
}

#[test]
fn pairing_rows_list_symbolic_dependencies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "q = [3]\nn_t = [0]\n");
    let out = bin(&["pairing", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    for r in json_rows(&out.stdout) {
        if r["quantity"] == "<f,f>_special" {
            assert_eq!(r["symbolic_deps"], "c_T;C_T_bar");
        }
    }
}

#[test]
fn discrete_series_report() {
    let out = bin(&["discrete-series", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.contains("K_max = 20"));
}
