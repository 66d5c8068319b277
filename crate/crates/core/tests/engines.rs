//! Cross-checks between the analytic and transient engines at the reference point.

use ppconv_core::analytic::waveforms;
use ppconv_core::waveform::*;
use ppconv_core::*;

fn reference() -> (ConverterParams, GateSchedule) {
    let p = ConverterParams::reference();
    let s = build_schedule(&p, &p.derive());
    (p, s)
}

fn transient() -> WaveformSet {
    let (p, s) = reference();
    simulate(&p, &s, &SimConfig::default()).expect("reference run converges")
}

fn rms_diff(a: &WaveformSet, b: &WaveformSet, c: usize) -> f64 {
    let n = a.len() as f64;
    (a.channel(c).zip(b.channel(c)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n).sqrt()
}

#[test]
fn transient_matches_analytic_within_five_percent() {
    let p = ConverterParams::reference();
    let sol = solve_steady_state(&p).unwrap();
    let a = waveforms(&p, &sol, 1024);
    let t = transient();
    assert_eq!(a.time, t.time);
    // Secondary channels carry the reflected current n I_L / 2.
    for (c, scale) in [(I_LK1, 1.0), (I_LK2, 1.0), (I_S, 1.0), (I_S + 1, 1.0)]
        .into_iter()
        .chain((2..6).map(|k| (I_S + k, 0.5 * p.n)))
    {
        let e = rms_diff(&a, &t, c);
        assert!(e <= 0.05 * scale * sol.i_l, "{}: rms {e} vs I_L {}", CHANNEL_NAMES[c], sol.i_l);
    }
    let op = t.steady_state_metrics();
    assert!((op.vo1 - sol.vo1).abs() < 0.03 * sol.vo1, "{} vs {}", op.vo1, sol.vo1);
}

#[test]
fn energy_audit_balances() {
    let w = transient();
    let g = &w.integrals;
    let rel = (g.source_energy - g.load_energy - g.stored_delta).abs() / g.source_energy;
    assert!(rel < 0.01, "{g:?}");
    assert!(g.stored_delta.abs() < 1e-6 * g.source_energy);
}

#[test]
fn volt_second_balance() {
    let (p, _) = reference();
    let w = transient();
    assert!(w.integrals.avg_v_l.abs() < 1e-3 * p.vi);
    assert!(w.integrals.avg_v_lk1.abs() < 1e-3 * p.vi);
    assert!(w.integrals.avg_v_lk2.abs() < 1e-3 * p.vi);
}

#[test]
fn events_alternate_per_device() {
    let (p, _) = reference();
    let sol = solve_steady_state(&p).unwrap();
    for w in [transient(), waveforms(&p, &sol, 1024)] {
        for dev in Device::all() {
            let kinds: Vec<EventKind> = w.events_for(dev).map(|e| e.kind).collect();
            for pair in kinds.windows(2) {
                assert_ne!(pair[0], pair[1], "{dev}: {kinds:?}");
            }
        }
        for pair in w.events.windows(2) {
            assert!(pair[0].t <= pair[1].t);
        }
    }
}

#[test]
fn transient_events_follow_analytic_timing() {
    let (p, _) = reference();
    let sol = solve_steady_state(&p).unwrap();
    let t = transient();
    let tol = 0.02 * t.period;
    for e in analytic::events(&p, &sol) {
        let hit = t.events_for(e.device).any(|x| x.kind == e.kind && (x.t - e.t).abs() < tol);
        assert!(hit, "no transient match for {} {} at {}", e.device, e.kind, e.t);
    }
}

#[test]
fn input_ripple_at_twice_switching_frequency() {
    let (p, _) = reference();
    let r = analyze(&transient(), &Thresholds::default()).unwrap();
    assert_eq!(r.ripple_hz, Some(2.0 * p.fs));
}

#[test]
fn half_wave_symmetry() {
    let w = transient();
    let n = w.len();
    let h = n / 2;
    let scale = w.peak_abs(I_LK1);
    for k in 0..n {
        let a = w.samples[k];
        let b = w.samples[(k + h) % n];
        assert!((a[I_LK1] - b[I_LK2]).abs() < 1e-6 * scale);
        assert!((a[V_CO1] - b[V_CO1]).abs() < 1e-6 * a[V_CO1]);
    }
}

#[test]
fn seed_does_not_change_the_steady_state() {
    let (p, s) = reference();
    let a = transient();
    let cfg = SimConfig { seed: transient::Seed::Zero, max_periods: 100_000, ..SimConfig::default() };
    let b = simulate(&p, &s, &cfg).unwrap();
    assert!(b.periods_run > 1);
    assert!((a.mean(V_CO1) - b.mean(V_CO1)).abs() < 1e-5 * a.mean(V_CO1));
    assert!(rms_diff(&a, &b, I_LK1) < 1e-4);
}

#[test]
fn soft_switching_holds_in_both_engines() {
    let (p, _) = reference();
    let sol = solve_steady_state(&p).unwrap();
    let th = Thresholds::default();
    let t = analyze(&transient(), &th).unwrap();
    let a = analyze(&waveforms(&p, &sol, 1024), &th).unwrap();
    for k in 0..2 {
        assert!(t.switches[k].zcs);
        assert_eq!(a.switches[k].turn_off_current, 0.0);
    }
    for k in 2..6 {
        assert!(t.switches[k].zvs);
        assert_eq!(a.switches[k].turn_on_voltage, 0.0);
    }
}

#[test]
fn snubbers_converge_and_conserve_energy() {
    for c in [1e-10, 1e-9, 1e-8] {
        let p = ConverterParams { csn: [c; 6], ..ConverterParams::reference() };
        let s = build_schedule(&p, &p.derive());
        let w = simulate(&p, &s, &SimConfig::default()).unwrap();
        let g = &w.integrals;
        let out = g.load_energy + g.stored_delta + g.switching_loss;
        assert!((g.source_energy - out).abs() < 1e-3 * g.source_energy, "{c:e}: {g:?}");
        assert!(g.switching_loss > 0.0);
        let r = analyze(&w, &Thresholds::default()).unwrap();
        for k in 2..6 {
            assert!(r.switches[k].zvs, "{c:e}: S{} {:?}", k + 1, r.switches[k]);
        }
    }
}
