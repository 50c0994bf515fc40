use ltve_core::fields::{DoubleGyre, GriddedVelocity, LinearField, StandingWave};
use ltve_core::ftle::{bound_report, compute_ftle};
use ltve_core::ltve::{compute_field, compute_field_from_set, integrate_mesh, trajectory_cache};
use ltve_core::{
    BoundaryPolicy, DomainBox, DomainBox64, IntegratorConfig, LtveConfig, LtveConfig64, Mesh64, MeshSpec,
    MetricKind, SchemeOrder, Storage, TimeWindow, TimeWindow64, TrajectorySet64, VelocityField,
};

fn square(h: f64) -> Mesh64 {
    Mesh64::new(DomainBox64::new(vec![-h, -h], vec![h, h]).unwrap(), h / 10.0).unwrap()
}

#[test]
fn saddle_exponents_have_closed_forms() {
    let rate = 0.5;
    let t = 2.0;
    let mesh = square(1.0);
    let window = TimeWindow64::new(0.0, t, 2).unwrap();
    let integ = IntegratorConfig::new(200, BoundaryPolicy::Open).unwrap();
    let saddle = LinearField::saddle(rate);
    let cfg = LtveConfig64::new(window)
        .with_metric(MetricKind::EuclideanL2)
        .with_integrator(integ);
    let ltve = compute_field(&saddle, &mesh, &cfg).unwrap().field;
    let expected = ((rate * t).exp() - 1.0).ln() / t;
    for v in ltve.values() {
        assert!((v - expected).abs() < 1e-9, "{v} vs {expected}");
    }
    let ftle = compute_ftle(&saddle, &mesh, &window, &integ, 0).unwrap();
    for v in ftle.values() {
        assert!((v - rate).abs() < 1e-9, "{v}");
    }
    let report = bound_report(&saddle, &mesh, &window, &integ, 0).unwrap();
    assert!(report.pass, "{report}");
    assert!((report.observed_max_diff - (rate - expected).abs()).abs() < 1e-9);
}

#[test]
fn three_dimensional_streaming_matches_full() {
    let field = LinearField::new(3, vec![0.2, 1.0, 0.0, -1.0, 0.1, 0.0, 0.0, 0.3, -0.4]).unwrap();
    let domain = DomainBox64::new(vec![-1.0, -1.0, -0.5], vec![1.0, 1.0, 0.5]).unwrap();
    let mesh = Mesh64::new(domain, 0.25).unwrap();
    assert_eq!(mesh.dims(), &[9, 9, 5]);
    let window = TimeWindow64::new(0.0, 1.5, 6).unwrap();
    for order in [SchemeOrder::First, SchemeOrder::Second, SchemeOrder::Third] {
        for metric in [MetricKind::NormalizedL2, MetricKind::DiscreteFrechet, MetricKind::Hausdorff] {
            let cfg = LtveConfig64::new(window).with_scheme(order).with_metric(metric);
            let full = compute_field(&field, &mesh, &cfg).unwrap();
            let streamed = compute_field(&field, &mesh, &cfg.clone().with_storage(Storage::Streaming)).unwrap();
            assert_eq!(full.field.to_fld_bytes(), streamed.field.to_fld_bytes(), "{order} {metric}");
            assert_eq!(full.argmax, streamed.argmax);
            assert!(streamed.stats.peak_resident < mesh.len());
        }
    }
}

#[test]
fn cache_file_reproduces_direct_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gyre.trj");
    let mesh = Mesh64::new(DomainBox64::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap(), 0.05).unwrap();
    let window = TimeWindow64::new(0.0, 4.0, 9).unwrap();
    let integ = IntegratorConfig::default();
    trajectory_cache(&DoubleGyre, &mesh, &window, &integ, 2, &path).unwrap();
    let desc = VelocityField::<f64>::descriptor(&DoubleGyre).to_string();
    let set = TrajectorySet64::load(&path, &mesh, &window, Some(&desc)).unwrap();
    for metric in [MetricKind::NormalizedL2, MetricKind::Hausdorff] {
        let cfg = LtveConfig64::new(window).with_metric(metric);
        let cached = compute_field_from_set(&set, &cfg).unwrap();
        let direct = compute_field(&DoubleGyre, &mesh, &cfg).unwrap();
        assert_eq!(cached.field.to_fld_bytes(), direct.field.to_fld_bytes());
    }
    assert!(TrajectorySet64::load(&path, &mesh, &window, Some("circular")).is_err());
}

#[test]
fn gridded_gyre_tracks_the_analytic_field() {
    let xs: Vec<f64> = (0..=80).map(|i| i as f64 / 40.0).collect();
    let ys: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
    let ts: Vec<f64> = (0..=40).map(|i| i as f64 / 10.0).collect();
    let gridded = GriddedVelocity::from_fn(vec![xs, ys], ts, |x, t, out| DoubleGyre.velocity(x, t, out)).unwrap();
    let mesh = Mesh64::new(DomainBox64::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap(), 0.1).unwrap();
    let window = TimeWindow64::new(0.0, 4.0, 10).unwrap();
    let cfg = LtveConfig64::new(window);
    let a = compute_field(&DoubleGyre, &mesh, &cfg).unwrap().field;
    let b = compute_field(&gridded, &mesh, &cfg).unwrap().field;
    let worst = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn single_precision_pipeline_runs() {
    let mesh: MeshSpec<f32> = MeshSpec::new(DomainBox::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap(), 0.1).unwrap();
    let window: TimeWindow<f32> = TimeWindow::new(0.0, 1.0, 8).unwrap();
    let out = compute_field(&DoubleGyre, &mesh, &LtveConfig::new(window)).unwrap();
    let reference = compute_field(
        &DoubleGyre,
        &Mesh64::new(DomainBox64::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap(), 0.1).unwrap(),
        &LtveConfig64::new(TimeWindow64::new(0.0, 1.0, 8).unwrap()),
    )
    .unwrap();
    for (a, b) in out.field.values().iter().zip(reference.field.values()) {
        assert!((*a as f64 - b).abs() < 1e-3, "{a} vs {b}");
    }
}

#[test]
fn standing_wave_returns_home_after_a_period() {
    let wave = StandingWave::new(8.0 * std::f64::consts::PI, 7, 0.8).unwrap();
    let mesh = Mesh64::new(DomainBox64::new(vec![-3.0, -3.0], vec![3.0, 3.0]).unwrap(), 0.5).unwrap();
    let window = TimeWindow64::new(0.0, 0.25, 20).unwrap();
    let integ = IntegratorConfig::new(20, BoundaryPolicy::Open).unwrap();
    let set = integrate_mesh(&wave, &mesh, &window, &integ, 0).unwrap();
    for i in 0..set.len() {
        let seed = set.seed(i);
        let arrival = set.arrival(i);
        assert!((arrival[0] - seed[0]).abs() < 1e-6 && (arrival[1] - seed[1]).abs() < 1e-6);
        let mid = set.trajectory(i);
        let exact = wave.trajectory(&seed, window.sample_time(5));
        let got = ltve_core::PointSequence::point(&mid, 5);
        assert!((got[0] - exact[0]).abs() < 1e-6 && (got[1] - exact[1]).abs() < 1e-6);
    }
}

#[test]
fn worker_counts_agree() {
    let mesh = Mesh64::new(DomainBox64::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap(), 0.05).unwrap();
    let window = TimeWindow64::new(0.0, 5.0, 12).unwrap();
    let base = compute_field(&DoubleGyre, &mesh, &LtveConfig64::new(window).with_workers(1)).unwrap();
    for w in [2, 3, 7] {
        let other = compute_field(&DoubleGyre, &mesh, &LtveConfig64::new(window).with_workers(w)).unwrap();
        assert_eq!(base.field.to_fld_bytes(), other.field.to_fld_bytes());
        assert_eq!(base.argmax, other.argmax);
    }
}
