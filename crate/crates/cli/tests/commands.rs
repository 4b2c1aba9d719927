//! Command-level checks through the library entry point.

use coopscatter_cli::commands::{command_defaults, run};
use coopscatter_cli::config::RunConfig;
use coopscatter_cli::table::ResultTable;

fn cfg(command: &str, pairs: &[(&str, &str)]) -> RunConfig {
    let mut c = command_defaults(command);
    for (k, v) in pairs {
        c.set(k, v).unwrap();
    }
    c
}

#[test]
fn sweep_conserves_energy_and_finds_minima() {
    let t = run(&cfg("sweep-lattice", &[])).unwrap();
    assert_eq!(t.failures(), 0);
    let (a, tt, r) = (t.values("a"), t.values("T"), t.values("R"));
    for i in 0..a.len() {
        assert!((tt[i] + r[i] - 1.0).abs() < 1e-8, "a = {}", a[i]);
    }
    for centre in [0.2, 0.8] {
        let best = (0..a.len())
            .filter(|&i| (a[i] - centre).abs() <= 0.02)
            .min_by(|&i, &j| tt[i].total_cmp(&tt[j]))
            .unwrap();
        assert!(tt[best] < 1e-3);
    }
}

#[test]
fn lossy_rows_follow_the_reduced_amplitude() {
    let t = run(&cfg(
        "sweep-lattice",
        &[("gamma_nr", "0.5"), ("delta", "resonance"), ("a_min", "0.1"), ("a_max", "0.9"), ("a_step", "0.1")],
    ))
    .unwrap();
    let (r, g) = (t.values("R"), t.values("Gamma"));
    assert!(!r.is_empty());
    for (r, g) in r.iter().zip(&g) {
        let w = g + 1.0;
        assert!((r - (w / (w + 0.5)).powi(2)).abs() < 1e-10);
    }
}

#[test]
fn detuning_map_ridge_follows_delta() {
    let t = run(&cfg("map-detuning", &[("n_a", "12"), ("n_delta", "121"), ("a_max", "0.9"), ("delta_min", "-3"), ("delta_max", "3")])).unwrap();
    let ai = t.column("a").unwrap();
    let di = t.column("delta").unwrap();
    let ri = t.column("R").unwrap();
    let li = t.column("Delta").unwrap();
    let fi = t.column("on_resonance").unwrap();
    let step = 6.0 / 120.0;
    let mut columns: Vec<f64> = t.rows.iter().filter_map(|r| r.values[ai]).collect();
    columns.dedup();
    for a in columns {
        let rows: Vec<_> = t.rows.iter().filter(|r| r.is_ok() && r.values[ai] == Some(a)).collect();
        if rows.is_empty() {
            continue;
        }
        let on = rows.iter().find(|r| r.values[fi] == Some(1.0)).unwrap();
        assert!((on.values[ri].unwrap() - 1.0).abs() < 1e-6);
        let grid: Vec<_> = rows.iter().filter(|r| r.values[fi] == Some(0.0)).collect();
        let lam = on.values[li].unwrap();
        if lam.abs() < 2.9 {
            let peak = grid.iter().max_by(|x, y| x.values[ri].partial_cmp(&y.values[ri]).unwrap()).unwrap();
            assert!((peak.values[di].unwrap() - lam).abs() <= step, "a = {a}");
        }
    }
}

#[test]
fn far_detuned_boundary_is_dark() {
    let t = run(&cfg("map-detuning", &[("n_a", "5"), ("n_delta", "3"), ("a_min", "0.3"), ("a_max", "0.6"), ("delta_min", "-40"), ("delta_max", "40")])).unwrap();
    let di = t.column("delta").unwrap();
    let ri = t.column("R").unwrap();
    for r in t.rows.iter().filter(|r| r.values[di].map(f64::abs) == Some(40.0)) {
        assert!(r.values[ri].unwrap() < 0.5);
    }
}

#[test]
fn bands_outside_the_cone_do_not_radiate() {
    let t = run(&cfg("bands", &[("path_points", "24")])).unwrap();
    assert_eq!(t.meta("z_band_everywhere"), Some("true"));
    let cone = t.values("light_cone");
    for g in ["gamma0", "gamma1", "gamma2"] {
        for (v, c) in t.values(g).iter().zip(&cone) {
            if *c == 0.0 {
                assert!((v + 1.0).abs() < 1e-4);
            }
        }
    }
}

#[test]
fn zero_displacement_gives_zero_shift() {
    let t = run(&cfg("disorder", &[("dr", "0"), ("samples", "3"), ("nx", "5"), ("ny", "5")])).unwrap();
    for v in t.values("shift") {
        assert!(v.abs() < 1e-9);
    }
}

#[test]
fn saturation_defaults() {
    let t = run(&cfg("saturation", &[])).unwrap();
    let n = t.values("N")[0];
    assert!((13.0..=16.0).contains(&n));
}

#[test]
fn kk_within_reported_tolerance() {
    let t = run(&cfg("kk-check", &[])).unwrap();
    assert_eq!(t.meta("within_tolerance"), Some("true"));
}

#[test]
fn beam_reports_extraction() {
    let t = run(&cfg("beam", &[("nx", "6"), ("ny", "6"), ("a", "0.3"), ("resolution", "4")])).unwrap();
    assert!(t.meta("T_num").is_some() && t.meta("order(0,0)").is_some());
    assert_eq!(t.rows.len(), 16);
}

#[test]
fn threshold_points_are_flagged_not_fatal() {
    let t = run(&cfg("sweep-lattice", &[("a_min", "0.99"), ("a_max", "1.01"), ("a_step", "0.005")])).unwrap();
    assert!(t.failures() >= 1);
    assert!(t.rows.iter().any(|r| r.status == "threshold"));
    assert!(t.rows.iter().any(|r| r.is_ok()));
    let csv = t.to_csv();
    assert!(!csv.contains("NaN") && !csv.contains("inf"));
    assert_eq!(ResultTable::parse_csv(&csv).unwrap(), t);
}

#[test]
fn every_table_has_standard_header() {
    for c in ["sweep-lattice", "bands", "kk-check"] {
        let conf = cfg(c, &[("a_step", "0.2"), ("path_points", "4")]);
        conf.validate().unwrap();
        let t = run(&conf).unwrap();
        for key in ["artifact", "command", "config_hash", "units"] {
            assert!(t.meta(key).is_some(), "{c}: {key}");
        }
        if c != "kk-check" {
            assert!(t.meta("convergence").unwrap().contains("method=ewald"));
        }
        assert!(t.columns.iter().all(|col| !col.unit.is_empty()));
    }
}
