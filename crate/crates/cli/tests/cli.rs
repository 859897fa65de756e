use std::path::Path;
use std::process::{Command, Output};

use qwrad::gridfile::Grid;

fn qwrad(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwrad"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("QWRAD_THREADS")
        .output()
        .expect("launch qwrad")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn lists_presets() {
    let dir = tempfile::tempdir().unwrap();
    let o = qwrad(&["presets"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for p in ["fig3", "fig4", "fig5a", "fig5b", "fig5c", "fig5d", "fig6a", "fig6b", "einstein", "appendixD"] {
        assert!(text.lines().any(|l| l == p), "{p}");
    }
}

#[test]
fn spr_map_fig5b_echoes_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = qwrad(&["spr-map", "--preset", "fig5b", "--format", "bin"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let spots = read_json(&dir.path().join("spots.json"));
    assert!((spots["sigma_z_over_lambda_g"].as_f64().unwrap() - 0.22).abs() < 1e-12);
    assert_eq!(spots["beta0"].as_f64(), Some(0.7));
    assert_eq!(spots["n_g"].as_u64(), Some(9));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "spr-map");
    assert_eq!(manifest["resolved"]["grating"]["n_g"].as_u64(), Some(9));
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    let f = std::fs::File::open(dir.path().join("map_quantum.bin")).unwrap();
    let g = Grid::read(std::io::BufReader::new(f)).unwrap();
    assert_eq!(g.rows.len(), 399);
    assert!(g.values.iter().all(|v| v.is_finite() && *v >= 0.0));
}

#[test]
fn drift_scan_has_single_interior_maximum() {
    let dir = tempfile::tempdir().unwrap();
    let o = qwrad(&["bunching", "--preset", "fig4", "--scan-drift"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("drift_scan.csv")).unwrap();
    let b1: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap())
        .filter(|r| &r[2] == "1")
        .map(|r| r[5].parse().unwrap())
        .collect();
    assert!(b1.len() > 100);
    let maxima = (1..b1.len() - 1).filter(|&i| b1[i] > b1[i - 1] && b1[i] >= b1[i + 1]).count();
    assert_eq!(maxima, 1);
    let peak = (0..b1.len()).max_by(|a, b| b1[*a].total_cmp(&b1[*b])).unwrap();
    assert!(peak > 0 && peak + 1 < b1.len());
    let mut rdr = csv::Reader::from_path(dir.path().join("bl.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["l", "re", "im", "abs"]);
}

#[test]
fn wigner_grid_files_agree() {
    let dir = tempfile::tempdir().unwrap();
    let o = qwrad(
        &["wigner", "--preset", "fig3", "--set", "wigner.drift_factors=[1.0]"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = std::fs::File::open(dir.path().join("wigner_0.bin")).unwrap();
    let g = Grid::read(std::io::BufReader::new(f)).unwrap();
    assert_eq!((g.columns.len(), g.rows.len()), (512, 256));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(dir.path().join("wigner_0.csv"))
        .unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 257);
    let v: f64 = rows[100][201].parse().unwrap();
    assert_eq!(v, g.values[99 * 512 + 200]);
}

#[test]
fn manifest_rerun_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    assert!(qwrad(&["ensemble", "--preset", "appendixD", "--threads", "1"], &a).status.success());
    let manifest = a.join("manifest.json");
    let o = qwrad(&["ensemble", "--config", manifest.to_str().unwrap(), "--threads", "3"], &b);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let flat = a.join("config.toml");
    assert!(qwrad(&["ensemble", "--config", flat.to_str().unwrap()], &c).status.success());
    for f in ["estimates.csv", "pulse_spectrum.csv", "stimulated.json", "manifest.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f}");
        assert_eq!(x, std::fs::read(c.join(f)).unwrap(), "{f}");
    }
    let mut rdr = csv::Reader::from_path(a.join("estimates.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["l", "omega", "analytic", "mc_mean", "mc_stderr", "n_trials", "seed"]
    );
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, sub: &str| {
        Command::new(env!("CARGO_BIN_EXE_qwrad"))
            .args(["stimulated-map", "--preset", "fig5d", "--format", "bin", "--out"])
            .arg(dir.path().join(sub))
            .env("QWRAD_THREADS", threads)
            .output()
            .unwrap()
    };
    assert!(run("1", "one").status.success());
    assert!(run("4", "four").status.success());
    let a = std::fs::read(dir.path().join("one/map_stimulated.bin")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("four/map_stimulated.bin")).unwrap());
    assert_eq!(run("0", "zero").status.code(), Some(2));
}

#[test]
fn spectrum_and_wavepacket_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = qwrad(&["spectrum", "--preset", "fig5c"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["omega", "value", "channel", "l", "m"]);
    let channels: std::collections::BTreeSet<String> = rdr.records().map(|r| r.unwrap()[2].to_string()).collect();
    assert_eq!(
        channels.into_iter().collect::<Vec<_>>(),
        vec!["classical", "extinction", "modulated", "quantum"]
    );
    let spec = read_json(&dir.path().join("spectrum.json"));
    assert_eq!(spec["provenance"]["config"]["preset"], "fig5c");

    let dir = tempfile::tempdir().unwrap();
    let o = qwrad(&["wavepacket", "--preset", "fig4"], dir.path());
    assert!(o.status.success());
    let wp = read_json(&dir.path().join("wavepacket.json"));
    let fwhm = wp["micro_bunch_fwhm"].as_f64().unwrap();
    assert!(fwhm > 60e-18 && fwhm < 90e-18, "{fwhm}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(qwrad(&["frobnicate"], d).status.code(), Some(1));
    assert_eq!(qwrad(&["wavepacket", "--bogus"], d).status.code(), Some(1));
    assert_eq!(qwrad(&["wavepacket", "--config", "/nonexistent/c.toml"], d).status.code(), Some(1));

    let o = qwrad(&["wavepacket", "--preset", "fig4", "--set", "electron.beta0=1.5"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta0"));
    assert_eq!(qwrad(&["wavepacket", "--preset", "fig4", "--set", "electron.size=1"], d).status.code(), Some(2));
    assert_eq!(qwrad(&["wavepacket", "--preset", "nope"], d).status.code(), Some(2));
    assert_eq!(qwrad(&["wigner", "--preset", "fig5a"], d).status.code(), Some(2));

    let o = qwrad(&["spr-map", "--preset", "fig5d", "--set", "axes.n_lambda=50", "--format", "bin"], d);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_lambda"));
    let o = qwrad(&["wigner", "--preset", "fig3", "--set", "wigner.n_zeta=64"], d);
    assert_eq!(o.status.code(), Some(3));
}
