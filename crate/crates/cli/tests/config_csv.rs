use proptest::prelude::*;
use tdgrating::csv::{quantize, HEADER};
use tdgrating::{emit_csv, parse_config, parse_csv, read_csv, run_sweep, write_csv, CsvError};
use tdgrating_core::params::{Scheme, MEASURED_RATES_MHZ};
use tdgrating_core::sweep::{Backend, ControlKind, SpectrumGrid};
use tdgrating_core::units::{dbm_to_rabi, mhz_to_angular};

fn data_rows(text: &str) -> usize {
    text.lines().skip_while(|l| *l != HEADER).skip(1).count()
}

#[test]
fn empty_config_is_the_measured_setup() {
    let cfg = parse_config("").unwrap();
    assert_eq!(cfg.backend, Backend::Lindblad);
    assert_eq!(cfg.scheme, Scheme::Complementary);
    assert_eq!(cfg.tau_ns, 50.0);
    assert_eq!(cfg.rates_mhz, MEASURED_RATES_MHZ);
    assert_eq!(cfg.params().omega_p, dbm_to_rabi(-31.0));
    assert_eq!((cfg.delta.start, cfg.delta.stop, cfg.delta.count), (-60.0, 60.0, 241));
    assert_eq!(cfg.control_kind, ControlKind::PowerDbm);
    assert_eq!((cfg.control.start, cfg.control.stop, cfg.control.count), (-20.0, 0.0, 41));
    let echo = cfg.echo();
    let applied = &echo.iter().find(|(k, _)| k == "config.defaults_applied").unwrap().1;
    for key in ["tau_ns", "gamma_10_mhz", "probe_dbm", "delta_count", "tol"] {
        assert!(applied.split(',').any(|k| k == key), "{key} missing from {applied}");
    }
}

#[test]
fn explicit_keys_leave_the_defaulted_list() {
    let cfg = parse_config("[drive]\ngamma_10_mhz = 2.267\ntau_ns = 40\n").unwrap();
    assert_eq!(cfg.params().gamma_10, mhz_to_angular(2.267));
    assert_eq!(cfg.tau_ns, 40.0);
    assert!(!cfg.defaulted.contains(&"gamma_10_mhz"));
    assert!(!cfg.defaulted.contains(&"tau_ns"));
    assert!(cfg.defaulted.contains(&"gamma_21_mhz"));
}

#[test]
fn constraint_violations_cite_key_and_line() {
    let err = parse_config("# header\n\ntau_ns = -5\n").unwrap_err();
    assert_eq!(err.line, 3);
    assert_eq!(err.key, "tau_ns");

    let err = parse_config("delta_count = 0\n").unwrap_err();
    assert_eq!((err.line, err.key.as_str()), (1, "delta_count"));

    let err = parse_config("delta_start_mhz = 5\ndelta_stop_mhz = -5\n").unwrap_err();
    assert!(err.key.starts_with("delta_"), "{err}");
    assert!(err.line >= 1);

    let err = parse_config("n_c = 4.5\n").unwrap_err();
    assert_eq!(err.key, "n_c");
}

#[test]
fn unknown_and_misplaced_keys_fail_loudly() {
    for text in [
        "gamma10_mhz = 2.0\n",
        "tau = 50\n",
        "[grid]\ntau_ns = 50\n",
        "[physics]\n",
        "tau_ns = 50\ntau_ns = 60\n",
        "tau_ns 50\n",
        "probe_dbm = -31\nprobe_mhz = 2.4\n",
    ] {
        assert!(parse_config(text).is_err(), "accepted {text:?}");
    }
}

#[test]
fn single_point_grid_is_one_data_row() {
    let cfg = parse_config(
        "backend = analytic\ndelta_start_mhz = 0\ndelta_stop_mhz = 0\ndelta_count = 1\n\
         control_kind = rabi_mhz\ncontrol_start = 40\ncontrol_stop = 40\ncontrol_count = 1\n",
    )
    .unwrap();
    let outcome = run_sweep(&cfg.sweep_config().unwrap(), 1).unwrap();
    let text = emit_csv(&outcome.grid, &cfg.echo()).unwrap();
    assert_eq!(data_rows(&text), 1);
    assert!(text.lines().next().unwrap().starts_with('#'));
}

#[test]
fn default_axes_give_the_full_figure_grid() {
    let cfg = parse_config("backend = analytic\n").unwrap();
    let outcome = run_sweep(&cfg.sweep_config().unwrap(), 4).unwrap();
    assert!(outcome.is_clean());
    let text = emit_csv(&outcome.grid, &cfg.echo()).unwrap();
    assert_eq!(data_rows(&text), 241 * 41);
    let back = parse_csv(&text).unwrap();
    assert_eq!(back.delta_axis, outcome.grid.delta_axis);
    assert_eq!(back.control_axis, outcome.grid.control_axis);
    assert_eq!(back.values, outcome.grid.values);
}

#[test]
fn sweeps_are_identical_for_any_worker_count() {
    for backend in ["analytic", "gvv", "lindblad"] {
        let cfg = parse_config(&format!(
            "backend = {backend}\ndelta_start_mhz = -30\ndelta_stop_mhz = 30\ndelta_count = 13\n\
             control_start = -16\ncontrol_stop = -4\ncontrol_count = 3\n"
        ))
        .unwrap();
        let config = cfg.sweep_config().unwrap();
        let one = run_sweep(&config, 1).unwrap().grid;
        let four = run_sweep(&config, 4).unwrap().grid;
        let bits = |g: &SpectrumGrid| g.values.iter().map(|v| v.map(f64::to_bits)).collect::<Vec<_>>();
        assert_eq!(bits(&one), bits(&four), "{backend}");
        assert_eq!(one, four);
    }
}

#[test]
fn files_round_trip_and_io_errors_name_the_path() {
    let grid = SpectrumGrid::new(
        vec![-1.0, 0.0, 1.5],
        ControlKind::PowerDbm,
        vec![-20.0, -10.0],
        vec![Some(0.25), None, Some(1.0), Some(0.0), Some(0.123456789), Some(0.5)],
        vec![("backend".into(), "gvv".into())],
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    write_csv(&grid, &[], &path).unwrap();
    assert_eq!(read_csv(&path).unwrap(), grid);

    let missing = dir.path().join("absent.csv");
    match read_csv(&missing) {
        Err(CsvError::Io { path, .. }) => assert_eq!(path, missing),
        other => panic!("{other:?}"),
    }
    let unwritable = dir.path().join("no_such_dir").join("grid.csv");
    assert!(matches!(write_csv(&grid, &[], &unwritable), Err(CsvError::Io { .. })));
}

#[test]
fn malformed_files_are_rejected_with_a_line() {
    let good = "# control_kind = rabi_mhz\ndelta_mhz,control,signal\n0,1,0.5\n1,1,0.25\n";
    assert!(parse_csv(good).is_ok());
    for bad in [
        "# control_kind = rabi_mhz\n0,1,0.5\n",
        "# control_kind = rabi_mhz\ndelta_mhz,control,signal\n0,1\n",
        "# control_kind = rabi_mhz\ndelta_mhz,control,signal\n1,1,0.5\n0,1,0.25\n",
        "# control_kind = watts\ndelta_mhz,control,signal\n0,1,0.5\n",
        "# control_kind = rabi_mhz\ndelta_mhz,control,signal\n0,1,abc\n",
    ] {
        assert!(matches!(parse_csv(bad), Err(CsvError::Format { .. }) | Err(CsvError::Grid(_))), "{bad:?}");
    }
}

fn axis(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(-100_000i64..100_000, len).prop_map(|s| s.into_iter().map(|v| quantize(v as f64 * 1e-3)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn emitted_grids_parse_back_bit_identically(
        (delta, control, values, kind) in (1usize..8, 1usize..5).prop_flat_map(|(n, m)| (
            axis(n),
            axis(m),
            prop::collection::vec(prop::option::weighted(0.9, 0.0f64..1.0), n * m),
            prop::bool::ANY,
        ))
    ) {
        let values: Vec<Option<f64>> = values.into_iter().map(|v| v.map(quantize)).collect();
        let kind = if kind { ControlKind::PowerDbm } else { ControlKind::RabiMhz };
        let grid = SpectrumGrid::new(delta, kind, control, values, vec![("note".into(), "x y".into())]).unwrap();
        let text = emit_csv(&grid, &[]).unwrap();
        let back = parse_csv(&text).unwrap();
        prop_assert_eq!(&back.delta_axis, &grid.delta_axis);
        prop_assert_eq!(&back.control_axis, &grid.control_axis);
        let bits = |g: &SpectrumGrid| g.values.iter().map(|v| v.map(f64::to_bits)).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&grid));
        prop_assert_eq!(back, grid);
    }

    #[test]
    fn quantizing_is_idempotent(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let q = quantize(x);
        prop_assert_eq!(quantize(q).to_bits(), q.to_bits());
        prop_assert!((q - x).abs() <= 5e-9 * x.abs());
    }
}
