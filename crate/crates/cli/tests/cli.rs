use std::path::Path;
use std::process::Command as Process;

use catpump_cli::{run, Command, RunConfig};

const SMALL: &str = "[numerics]\nsignal_dim = 20\npump_dim = 12\n";

fn config(extra: &str) -> RunConfig {
    RunConfig::from_toml(&format!("{SMALL}{extra}")).unwrap()
}

fn catpump(dir: &Path, args: &[&str], toml: &str) -> (i32, String, String) {
    let path = dir.join("run.toml");
    std::fs::write(&path, toml).unwrap();
    let out = Process::new(env!("CARGO_BIN_EXE_catpump"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// Turns a header line back into a config file.
fn header_to_toml(header: &str) -> (String, String) {
    let mut fields = header.trim_start_matches("# catpump v1 ").split(' ');
    let command = fields.next().unwrap().trim_start_matches("command=").to_string();
    let mut sections: Vec<(String, Vec<String>)> = Vec::new();
    for kv in fields {
        let (key, value) = kv.split_once('=').unwrap();
        let (sec, name) = key.split_once('.').unwrap();
        let value = if value.starts_with('[') || value == "true" || value == "false" || value.parse::<f64>().is_ok() {
            value.to_string()
        } else {
            format!("\"{value}\"")
        };
        match sections.iter_mut().find(|s| s.0 == sec) {
            Some(s) => s.1.push(format!("{name} = {value}")),
            None => sections.push((sec.to_string(), vec![format!("{name} = {value}")])),
        }
    }
    let text = sections
        .iter()
        .map(|(s, lines)| format!("[{s}]\n{}\n", lines.join("\n")))
        .collect::<String>();
    (command, text)
}

#[test]
fn phi_sweep_is_deterministic_across_workers() {
    let cfg = config("[phi_sweep]\nphi_inv = [4.0, 2.0, 3.0]\ncycles_per_phi_inv = 4.0\n");
    let one = run(Command::PhiSweep, &cfg, 1).unwrap().to_csv();
    let again = run(Command::PhiSweep, &cfg, 1).unwrap().to_csv();
    let three = run(Command::PhiSweep, &cfg, 3).unwrap().to_csv();
    assert_eq!(one, again);
    assert_eq!(one, three);
    let rows: Vec<&str> = one.lines().skip(2).collect();
    assert!(rows[0].starts_with("2.00000000e0,") && rows[2].starts_with("4.00000000e0,"));
    assert!(rows[1].ends_with(",12,20,12"), "{}", rows[1]);
}

#[test]
fn header_reruns_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let toml = format!("{SMALL}[trajectory]\nmode = \"adiabatic\"\nomega_p = 0.3\ng_nl = 1.0\ngamma_p = 20.0\nt_final = 1.0\nsample_interval = 0.25\n");
    let (code, first, _) = catpump(dir.path(), &["trajectory"], &toml);
    assert_eq!(code, 0);
    let (command, rerun) = header_to_toml(first.lines().next().unwrap());
    assert_eq!(command, "trajectory");
    let (code, second, err) = catpump(dir.path(), &["trajectory"], &rerun);
    assert_eq!(code, 0, "{err}\n{rerun}");
    assert_eq!(first, second);
}

#[test]
fn empty_grid_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = catpump(dir.path(), &["phi-sweep"], "[phi_sweep]\nphi_inv = []\n");
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("kind=config") && err.contains("field=phi_sweep.phi_inv"), "{err}");
}

#[test]
fn unknown_key_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = catpump(dir.path(), &["phi-sweep"], "[numerics]\nsignal_dims = 3\n");
    assert_eq!(code, 2);
    assert!(err.contains("signal_dims"), "{err}");
}

#[test]
fn thin_pump_truncation_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let toml = "[numerics]\nsignal_dim = 12\npump_dim = 6\n[phi_sweep]\nphi_inv = [1.0]\ncycles_per_phi_inv = 2.0\n";
    let (code, _, err) = catpump(dir.path(), &["phi-sweep"], toml);
    assert_eq!(code, 3);
    assert!(err.contains("kind=numerical") && err.contains("truncation"), "{err}");
}

#[test]
fn out_flag_and_convergence_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fx.csv");
    let toml = format!("{SMALL}[phi_sweep]\nphi_inv = [3.0]\ncycles_per_phi_inv = 2.0\n");
    let (code, out, err) = catpump(
        dir.path(),
        &["phi-sweep", "--out", csv.to_str().unwrap(), "--convergence", "--workers", "2"],
        &toml,
    );
    assert_eq!(code, 0, "{err}");
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(written.lines().count(), 3);
    assert!(err.contains("convergence signal_dim=60 pump_dim=30 max_deviation="), "{err}");
}

#[test]
fn lossless_loss_sweep_matches_phi_sweep() {
    let grid = "phi_inv = [2.0, 3.0]\ncycles_per_phi_inv = 3.0\n";
    let cfg = config(&format!(
        "[phi_sweep]\n{grid}[loss_sweep]\n{grid}gamma_s_signal = [0.0]\ngamma_s_pump = [0.0]\n"
    ));
    let phi = run(Command::PhiSweep, &cfg, 1).unwrap().table;
    let loss = run(Command::LossSweep, &cfg, 1).unwrap().table;
    assert_eq!(phi.column("f_max"), loss.column("f_max"));
    assert_eq!(phi.column("alpha_opt_mag"), loss.column("alpha_opt_mag"));
    for f in loss.column("f_at_alpha2").unwrap() {
        assert!((0.0..=1.0).contains(&f));
    }
}

#[test]
fn loss_lowers_fidelity() {
    let cfg = config("[loss_sweep]\nphi_inv = [2.0]\ncycles_per_phi_inv = 2.0\ngamma_s_signal = [0.0, 0.2]\ngamma_s_pump = [0.0]\n");
    let t = run(Command::LossSweep, &cfg, 1).unwrap().table;
    let f = t.column("f_max").unwrap();
    assert_eq!(t.column("gamma_s_signal").unwrap(), vec![0.0, 0.2]);
    assert!(f[1] < f[0]);
}

#[test]
fn synchronous_trajectory_rows() {
    let cfg = config("[trajectory]\nt_final = 1.5\n");
    let t = run(Command::Trajectory, &cfg, 1).unwrap().table;
    assert_eq!(t.column("g_nl_t").unwrap(), vec![0.0, 0.5, 1.0, 1.5]);
    for p in t.column("parity").unwrap() {
        assert!((p - 1.0).abs() < 1e-10);
    }
    let purity = t.column("purity").unwrap();
    assert_eq!(purity[0], 1.0);
    assert!(purity[3] < 1.0);
}

#[test]
fn adiabatic_trajectory_approaches_the_cat() {
    let cfg = config("[trajectory]\nmode = \"adiabatic\"\ncat_alpha = [0.0, 1.5]\ngamma_d = 0.5\nt_final = 8.0\nsample_interval = 0.5\n");
    let t = run(Command::Trajectory, &cfg, 1).unwrap().table;
    assert_eq!(t.rows.len(), 17);
    let f = t.column("f_max").unwrap();
    let a = t.column("alpha_opt_mag").unwrap();
    assert!(f[16] > 0.99, "{}", f[16]);
    assert!((a[16] - 1.5).abs() < 0.02, "{}", a[16]);
}

#[test]
fn wigner_snapshots() {
    let cfg = config("[wigner]\nsnapshots = [0.5, 0.0]\nt_final = 1.0\nextent = 5.0\npoints = 101\n");
    let t = run(Command::Wigner, &cfg, 2).unwrap().table;
    let n = 101 * 101;
    assert_eq!(t.rows.len(), 2 * n);
    let w = t.column("w").unwrap();
    let (vac, cat) = w.split_at(n);
    // rows are ordered by time, then x, then p
    assert_eq!(t.column("g_nl_t").unwrap()[0], 0.0);
    let centre = 50 * 101 + 50;
    assert!(vac.iter().all(|&v| v <= vac[centre] && v > -1e-8));
    assert!(cat.iter().any(|&v| v < -0.01));
    let h = 0.1;
    for grid in [vac, cat] {
        let integral: f64 = grid.iter().sum::<f64>() * h * h;
        assert!((integral - 1.0).abs() < 1e-3, "{integral}");
    }
}

#[test]
fn wigner_beyond_horizon_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = catpump(dir.path(), &["wigner"], "[wigner]\nsnapshots = [12.0]\nt_final = 10.0\n");
    assert_eq!(code, 2);
    assert!(err.contains("field=wigner.snapshots") && err.contains("horizon"), "{err}");
}

#[test]
fn effective_loss_table() {
    let cfg = RunConfig::from_toml(
        "[effective_loss]\ng_loss_hz = [10e6]\ngamma_re_hz = [10e6]\ndelta_hz = [30e6, 0.0, -30e6, 1e9]\n",
    )
    .unwrap();
    let t = run(Command::EffectiveLoss, &cfg, 1).unwrap().table;
    assert_eq!(t.column("delta_hz").unwrap(), vec![-30e6, 0.0, 30e6, 1e9]);
    let k = t.column("kappa_eff_hz").unwrap();
    let s = t.column("delta_shift_hz").unwrap();
    assert_eq!(k[1], 10e6);
    assert_eq!(s[1], 0.0);
    assert_eq!(k[0], k[2]);
    assert_eq!(s[0], -s[2]);
    assert!((k[2] - 1e6).abs() < 1e-6);
    let ratio = t.column("kappa_eff_over_gnl").unwrap();
    assert!((ratio[3] - 0.01).abs() < 1e-5);
}
