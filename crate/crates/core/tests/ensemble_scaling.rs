use qhj_impulse::ensemble::{run_ensemble, EnsembleSpec, MicrostateSource};
use qhj_impulse::perturbation::{case_window, trajectory_e1};
use qhj_impulse::{ImpulseSpec, Microstate, TrajectoryClock, TransferCase, WellModel};

#[test]
fn stderr_falls_as_inverse_root_n() {
    let well = WellModel::natural();
    let spec = ImpulseSpec::new(1.0, 0.1, 0.0, 1.0, &well).unwrap();
    let ms = Microstate::new(2.0, 3.0, 1.0).unwrap();
    let stderr = |n: u64| {
        let es = EnsembleSpec::new(n, MicrostateSource::Fixed(ms), 11, spec);
        run_ensemble(&es, &well).unwrap().stderr_e1
    };
    let s = [stderr(10_000), stderr(100_000), stderr(1_000_000)];
    for w in s.windows(2) {
        let ratio = w[0] / w[1] / 10f64.sqrt();
        assert!((1.0 / 1.3..=1.3).contains(&ratio), "{s:?}");
    }
}

#[test]
fn mirrored_microstate_swaps_walls() {
    // (a, b, c) and (a, b, -c) are mirror images under x -> -x; an epoch
    // landing on one wall for the first lands on the other for the second,
    // with the same magnitude of transfer and the opposite sign.
    let well = WellModel::natural();
    let spec = ImpulseSpec::new(1.0, 0.05, 0.0, 1.0, &well).unwrap();
    let ms = Microstate::new(2.0, 3.0, 1.0).unwrap();
    let mirror = Microstate::new(2.0, 3.0, -1.0).unwrap();
    let clock = TrajectoryClock::new(well, ms, 0.0).unwrap();
    let w = case_window(TransferCase::LeftWallPlus, &clock, spec.epsilon()).unwrap();
    for f in [0.1, 0.5, 0.9] {
        let s = w.lo + f * (w.hi - w.lo);
        let r = trajectory_e1(&well, &ms, &spec, -s).unwrap();
        let m = trajectory_e1(&well, &mirror, &spec, -s - clock.sheet_shift()).unwrap();
        assert_eq!(r.case, TransferCase::LeftWallPlus);
        assert_eq!(m.case, TransferCase::RightWallMinus);
        assert!((r.e1 - m.e1).abs() <= 1e-12 * r.e1.abs(), "{} vs {}", r.e1, m.e1);
    }
}
