//! Closed-form periodic steady state under a ripple-free input current.
//!
//! One period is stitched from affine segments. The S1-incoming half runs in the schedule
//! frame from `t0` (secondary pair (S3, S6) gated on) to `t8 = t0 + T/2`:
//!
//! | mode | interval        | conduction                                   |
//! |------|-----------------|----------------------------------------------|
//! | 1    | `[t0, t1)`      | S2 alone, D3/D6 carry the reflected current  |
//! | 2    | `[t1, t2)`      | snubber transition, empty for ideal devices   |
//! | 3    | `[t2, t3)`      | S1 and S2, current ramps, D3/D6 decay        |
//! | 4    | `[t3, t4)`      | S1 and S2, S3/S6 channels                    |
//! | 5    | `[t4, t5)`      | S1 and D2, current overshoots                |
//! | 6    | `[t5, t6)`      | S1 and D2, D4/D5, D2 decays                  |
//! | 7    | `[t6, t7)`      | snubber transition, empty for ideal devices   |
//! | 8    | `[t7, t8)`      | S1 alone, D4/D5                              |
//!
//! The S2-incoming half is the mirror image under S1<->S2, S3<->S5, S4<->S6.

use alloc::vec::Vec;
use thiserror::Error;

use crate::params::{ConverterParams, ParamsError};
use crate::waveform::*;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("analytic engine requires ideal switches (all Csn = 0); use the transient engine")]
    SnubbersUnsupported,
    #[error("no steady state after {0} iterations")]
    NoSteadyState(usize),
    #[error("commutation exceeds half-period: ramp {ramp} s longer than overlap {window} s")]
    CommutationExceedsHalfPeriod { ramp: f64, window: f64 },
    #[error("secondary turn-on at {turn_on} s misses diode conduction ending at {diode_off} s")]
    SecondaryHardSwitched { turn_on: f64, diode_off: f64 },
    #[error("no single-switch conduction interval left (D + D_ext = {0})")]
    NoSingleConduction(f64),
}

const MAX_ITERATIONS: usize = 100;
const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateSolution {
    pub i_l: f64,
    pub vo1: f64,
    pub vo2: f64,
    pub d_ext: f64,
    /// Commutation ramp duration `t4 - t2`.
    pub ramp: f64,
    /// Leakage current slope during commutation, A/s.
    pub slope: f64,
    /// Mode boundaries `t0..t8` in the schedule frame (S1 turns on at 0).
    pub boundaries: [f64; 9],
    pub i_lk1_peak: f64,
    pub i_d2_peak: f64,
    pub iterations: usize,
}

/// Affine piece of one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSegment {
    pub mode: u8,
    /// 0 for the S1-incoming half, 1 for its mirror.
    pub half: u8,
    pub start: f64,
    pub end: f64,
    pub value: [f64; N_CHANNELS],
    pub slope: [f64; N_CHANNELS],
    pub channel_on: [bool; 6],
    pub diode_on: [bool; 6],
}

impl ModeSegment {
    pub fn at(&self, t: f64) -> [f64; N_CHANNELS] {
        let dt = t - self.start;
        core::array::from_fn(|c| self.value[c] + self.slope[c] * dt)
    }
}

fn load_power(p: &ConverterParams, vo2: f64) -> f64 {
    p.load_power(vo2)
}

/// Solves the operating point by fixed-point iteration on D_ext.
pub fn solve_steady_state(params: &ConverterParams) -> Result<SteadyStateSolution, AnalyticError> {
    let p = params.validate()?;
    if p.csn.iter().any(|&c| c != 0.0) {
        return Err(AnalyticError::SnubbersUnsupported);
    }
    let dc = p.derive();
    let period = dc.period;
    let window = p.d - 0.5;
    let gain = |d_ext: f64| p.vi / (2.0 * (p.n * (1.0 - p.d - d_ext) + 1.0));
    let raw_ext = |vo2: f64, i_l: f64| window - i_l * p.llk1 * p.fs / (p.n * vo2);

    let mut d_ext = 0.0;
    let mut prev_step = 0.0;
    let mut converged = None;
    for it in 1..=MAX_ITERATIONS {
        let vo2 = gain(d_ext);
        let i_l = load_power(&p, vo2) / p.vi;
        let target = raw_ext(vo2, i_l).max(0.0);
        let mut step = target - d_ext;
        if step * prev_step < 0.0 {
            step *= 0.5;
        }
        prev_step = step;
        d_ext += step;
        if libm::fabs(step) <= REL_TOL * window {
            converged = Some(it);
            break;
        }
    }
    let iterations = converged.ok_or(AnalyticError::NoSteadyState(MAX_ITERATIONS))?;

    let vo2 = gain(d_ext);
    let vo1 = 2.0 * vo2;
    let i_l = load_power(&p, vo2) / p.vi;
    let slope = 2.0 * p.n * vo2 / dc.l_lkt;
    let ramp = i_l / slope;
    let t_ov = dc.overlap(p.d);
    if raw_ext(vo2, i_l) < 0.0 || ramp > t_ov {
        return Err(AnalyticError::CommutationExceedsHalfPeriod { ramp, window: t_ov });
    }
    // Turn-off of the outgoing body diode, after the overshoot decays.
    let t6 = 2.0 * t_ov - ramp;
    let gate_on = t_ov - dc.duty_secondary * period;
    if gate_on >= 0.5 * ramp {
        return Err(AnalyticError::SecondaryHardSwitched { turn_on: gate_on, diode_off: 0.5 * ramp });
    }
    if p.d + d_ext >= 1.0 || t6 >= 0.5 * period + gate_on.min(0.0) {
        return Err(AnalyticError::NoSingleConduction(p.d + d_ext));
    }
    let t0 = gate_on.min(0.0);
    let boundaries = [t0, 0.0, 0.0, 0.5 * ramp, ramp, t_ov, t6, t6, t0 + 0.5 * period];
    let overshoot = slope * (t_ov - ramp);
    Ok(SteadyStateSolution {
        i_l,
        vo1,
        vo2,
        d_ext,
        ramp,
        slope,
        boundaries,
        i_lk1_peak: i_l + overshoot,
        i_d2_peak: overshoot,
        iterations,
    })
}

/// Recomputes the boundaries from the solved operating values.
pub fn mode_boundaries(params: &ConverterParams, sol: &SteadyStateSolution) -> Result<[f64; 9], AnalyticError> {
    let dc = params.derive();
    let ramp = sol.i_l * dc.l_lkt / (2.0 * params.n * sol.vo2);
    let t_ov = dc.overlap(params.d);
    if ramp > t_ov {
        return Err(AnalyticError::CommutationExceedsHalfPeriod { ramp, window: t_ov });
    }
    let t0 = (t_ov - dc.duty_secondary * dc.period).min(0.0);
    let t6 = 2.0 * t_ov - ramp;
    Ok([t0, 0.0, 0.0, 0.5 * ramp, ramp, t_ov, t6, t6, t0 + 0.5 * dc.period])
}

/// Channel values of the S1-incoming half for an explicit mode at schedule time `t`.
fn first_half(p: &ConverterParams, sol: &SteadyStateSolution, mode: u8, t: f64) -> ([f64; N_CHANNELS], [bool; 6], [bool; 6]) {
    let s = sol.slope;
    let il = sol.i_l;
    let t_ov = sol.boundaries[5];
    let vo = sol.vo1;
    // (i1, di1/dt, S1 conducts, S2 conducts, secondary path with v_ab = +Vo1)
    let (i1, di1, c1, c2, plus) = match mode {
        1 | 2 => (0.0, 0.0, false, true, true),
        3..=5 => (s * t, s, true, true, true),
        6 | 7 => (sol.i_lk1_peak - s * (t - t_ov), -s, true, true, false),
        _ => (il, 0.0, true, false, false),
    };
    let i2 = il - i1;
    let i_sec = 0.5 * p.n * (i1 - i2);
    let v_tap = if c1 && c2 { 0.0 } else { p.n * sol.vo2 };
    let v_block = 2.0 * p.n * sol.vo2;

    let mut v = [0.0; N_CHANNELS];
    let mut ch = [false; 6];
    let mut di = [false; 6];
    v[I_L] = il;
    v[I_LK1] = i1;
    v[I_LK2] = i2;
    for (k, (ik, on)) in [(i1, c1), (i2, c2)].into_iter().enumerate() {
        if on {
            v[I_S + k] = ik.max(0.0);
            v[I_D + k] = (-ik).max(0.0);
            ch[k] = ik >= 0.0;
            di[k] = ik < 0.0;
        } else {
            v[V_S + k] = v_block;
        }
    }
    let fwd = i_sec.max(0.0);
    let rev = (-i_sec).max(0.0);
    if plus {
        // Leg a top, leg b bottom.
        for k in [2, 5] {
            v[I_S + k] = fwd;
            v[I_D + k] = rev;
            ch[k] = i_sec >= 0.0;
            di[k] = i_sec < 0.0;
        }
        v[V_S + 3] = vo;
        v[V_S + 4] = vo;
    } else {
        for k in [3, 4] {
            v[I_S + k] = rev;
            v[I_D + k] = fwd;
            ch[k] = i_sec < 0.0;
            di[k] = i_sec >= 0.0;
        }
        v[V_S + 2] = vo;
        v[V_S + 5] = vo;
    }
    v[V_CO1] = vo;
    v[V_CO2] = sol.vo2;
    v[V_L] = p.vi - vo - v_tap;
    v[V_LK1] = p.llk1 * di1;
    v[V_LK2] = -p.llk2 * di1;
    (v, ch, di)
}

const MIRROR: [usize; N_CHANNELS] = {
    let mut m = [0usize; N_CHANNELS];
    let mut c = 0;
    while c < N_CHANNELS {
        m[c] = c;
        c += 1;
    }
    m[I_LK1] = I_LK2;
    m[I_LK2] = I_LK1;
    m[V_LK1] = V_LK2;
    m[V_LK2] = V_LK1;
    let swaps = [(0, 1), (2, 4), (3, 5)];
    let mut i = 0;
    while i < 3 {
        let (a, b) = swaps[i];
        let mut base = 0;
        while base < 3 {
            let off = [I_S, I_D, V_S][base];
            m[off + a] = off + b;
            m[off + b] = off + a;
            base += 1;
        }
        i += 1;
    }
    m
};

const SWITCH_MIRROR: [usize; 6] = [1, 0, 4, 5, 2, 3];

fn mirror_values(v: &[f64; N_CHANNELS]) -> [f64; N_CHANNELS] {
    core::array::from_fn(|c| v[MIRROR[c]])
}

fn mirror_flags(f: &[bool; 6]) -> [bool; 6] {
    core::array::from_fn(|k| f[SWITCH_MIRROR[k]])
}

/// Affine segments covering `[t0, t0 + T)`; empty modes are omitted.
pub fn segments(params: &ConverterParams, sol: &SteadyStateSolution) -> Vec<ModeSegment> {
    let b = sol.boundaries;
    let half = b[8] - b[0];
    let mut out = Vec::with_capacity(16);
    for h in 0..2u8 {
        for mode in 1..=8u8 {
            let (start, end) = (b[mode as usize - 1], b[mode as usize]);
            if end <= start {
                continue;
            }
            let (v0, ch, di) = first_half(params, sol, mode, start);
            let (v1, _, _) = first_half(params, sol, mode, end);
            let len = end - start;
            let slope: [f64; N_CHANNELS] = core::array::from_fn(|c| (v1[c] - v0[c]) / len);
            let shift = h as f64 * half;
            let seg = if h == 0 {
                ModeSegment { mode, half: 0, start, end, value: v0, slope, channel_on: ch, diode_on: di }
            } else {
                ModeSegment {
                    mode,
                    half: 1,
                    start: start + shift,
                    end: end + shift,
                    value: mirror_values(&v0),
                    slope: mirror_values(&slope),
                    channel_on: mirror_flags(&ch),
                    diode_on: mirror_flags(&di),
                }
            };
            out.push(seg);
        }
    }
    out
}

fn locate(segs: &[ModeSegment], t: f64, period: f64) -> (usize, f64) {
    let t0 = segs[0].start;
    let mut u = (t - t0) % period;
    if u < 0.0 {
        u += period;
    }
    let tt = t0 + u;
    let idx = segs.iter().rposition(|s| s.start <= tt).unwrap_or(0);
    (idx, tt)
}

/// Every device quantity at time `t`, folded into the period.
pub fn eval(params: &ConverterParams, sol: &SteadyStateSolution, t: f64) -> CircuitState {
    let segs = segments(params, sol);
    let (i, tt) = locate(&segs, t, 1.0 / params.fs);
    let s = &segs[i];
    CircuitState { t, values: s.at(tt), channel_on: s.channel_on, diode_on: s.diode_on }
}

/// Device events over `[0, T)`, sorted by time.
pub fn events(params: &ConverterParams, sol: &SteadyStateSolution) -> Vec<Event> {
    let period = 1.0 / params.fs;
    let b = sol.boundaries;
    let gate_on = b[5] - (1.0 - params.d) * period;
    let vblock = 2.0 * params.n * sol.vo2;
    let vo = sol.vo1;
    let i_sec_peak = 0.5 * params.n * (sol.i_lk1_peak - (sol.i_l - sol.i_lk1_peak));
    let first = [
        (gate_on, Device::Switch(2), EventKind::On, 0.0, 0.0),
        (gate_on, Device::Switch(5), EventKind::On, 0.0, 0.0),
        (0.0, Device::Switch(0), EventKind::On, 0.0, vblock),
        (b[3], Device::Diode(2), EventKind::Off, 0.0, 0.0),
        (b[3], Device::Diode(5), EventKind::Off, 0.0, 0.0),
        (b[4], Device::Diode(1), EventKind::On, 0.0, 0.0),
        (b[5], Device::Switch(1), EventKind::Off, 0.0, 0.0),
        (b[5], Device::Switch(2), EventKind::Off, i_sec_peak, 0.0),
        (b[5], Device::Switch(5), EventKind::Off, i_sec_peak, 0.0),
        (b[5], Device::Diode(3), EventKind::On, 0.0, vo),
        (b[5], Device::Diode(4), EventKind::On, 0.0, vo),
        (b[6], Device::Diode(1), EventKind::Off, 0.0, 0.0),
    ];
    let fold = |t: f64| {
        let r = t % period;
        if r < 0.0 { r + period } else { r }
    };
    let mirror = |d: Device| match d {
        Device::Switch(k) => Device::Switch(SWITCH_MIRROR[k as usize] as u8),
        Device::Diode(k) => Device::Diode(SWITCH_MIRROR[k as usize] as u8),
    };
    let mut out: Vec<Event> = Vec::with_capacity(2 * first.len());
    for (t, device, kind, current, voltage) in first {
        out.push(Event { t: fold(t), device, kind, current, voltage });
        out.push(Event { t: fold(t + 0.5 * period), device: mirror(device), kind, current, voltage });
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.device.cmp(&b.device)));
    out
}

/// Samples one period on `samples` uniform points starting at t = 0.
pub fn waveforms(params: &ConverterParams, sol: &SteadyStateSolution, samples: usize) -> WaveformSet {
    let period = 1.0 / params.fs;
    let segs = segments(params, sol);
    let time: Vec<f64> = (0..samples).map(|k| k as f64 * period / samples as f64).collect();
    let data = time
        .iter()
        .map(|&t| {
            let (i, tt) = locate(&segs, t, period);
            segs[i].at(tt)
        })
        .collect();
    let avg = |c: usize| {
        segs.iter().map(|s| {
            let len = s.end - s.start;
            len * (s.value[c] + 0.5 * s.slope[c] * len)
        })
        .sum::<f64>()
            / period
    };
    let integrals = PeriodIntegrals {
        source_energy: params.vi * sol.i_l * period,
        load_energy: params.load_power(sol.vo2) * period,
        stored_delta: 0.0,
        switching_loss: 0.0,
        avg_v_l: avg(V_L),
        avg_v_lk1: avg(V_LK1),
        avg_v_lk2: avg(V_LK2),
    };
    WaveformSet {
        period,
        time,
        samples: data,
        events: events(params, sol),
        converged: true,
        periods_run: 0,
        residual: 0.0,
        integrals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference() -> (ConverterParams, SteadyStateSolution) {
        let p = ConverterParams::reference();
        let s = solve_steady_state(&p).unwrap();
        (p, s)
    }

    /// Vo2 from the quadratic obtained by eliminating D_ext, independent of the iteration.
    fn vo2_oracle(p: &ConverterParams) -> f64 {
        let w = p.d - 0.5;
        let k = (4.0 / p.r1 + 1.0 / p.r2) * p.llk1 * p.fs / (p.n * p.vi);
        let a = 2.0 * p.n * k;
        let b = 2.0 * (1.0 + p.n * (1.0 - p.d - w));
        (-b + (b * b + 4.0 * a * p.vi).sqrt()) / (2.0 * a)
    }

    #[test]
    fn reference_operating_point() {
        let (p, s) = reference();
        assert_relative_eq!(s.vo2, vo2_oracle(&p), max_relative = 1e-11);
        assert!((s.vo2 - 7.79).abs() < 0.01, "{}", s.vo2);
        assert_eq!(s.vo1, 2.0 * s.vo2);
        assert!((s.i_l - 1.405).abs() < 0.005);
        assert!((s.ramp - 2.50e-6).abs() < 0.01e-6);
        assert!((s.d_ext - 0.07).abs() < 0.001);
        assert!((s.i_lk1_peak - 2.39).abs() < 0.01);
    }

    #[test]
    fn fixed_point_is_self_consistent() {
        let (p, s) = reference();
        let vo2 = p.vi / (2.0 * (p.n * (1.0 - p.d - s.d_ext) + 1.0));
        assert_relative_eq!(vo2, s.vo2, max_relative = 1e-9);
        let il = (s.vo1 * s.vo1 / p.r1 + s.vo2 * s.vo2 / p.r2) / p.vi;
        assert_relative_eq!(il, s.i_l, max_relative = 1e-9);
        let d_ext = p.d - 0.5 - s.i_l * p.llk1 * p.fs / (p.n * s.vo2);
        assert!((d_ext - s.d_ext).abs() < 1e-9);
        assert_eq!(mode_boundaries(&p, &s).unwrap(), s.boundaries);
    }

    #[test]
    fn boundaries_ordered() {
        let (_, s) = reference();
        let b = s.boundaries;
        assert!(b[0] < b[1]);
        assert_eq!(b[1], b[2]);
        assert!(b[2] < b[3] && b[3] < b[4] && b[4] < b[5] && b[5] <= b[6]);
        assert_eq!(b[6], b[7]);
        assert!(b[7] < b[8]);
        assert_relative_eq!(b[8] - b[0], 12.5e-6, max_relative = 1e-12);
        // Ramp = I_L L_LKT / (2 n Vo2).
        assert_relative_eq!(b[4] - b[2], s.i_l * 221.8e-6 / (16.0 * s.vo2), max_relative = 1e-12);
    }

    #[test]
    fn ramp_example() {
        // I_L = 1 A, L_LKT = 221.8 uH, n = 8, Vo2 = 6.59 V gives about 2.1 us.
        let ramp: f64 = 1.0 * 221.8e-6 / (2.0 * 8.0 * 6.59);
        assert!((ramp - 2.1e-6).abs() < 0.01e-6);
    }

    #[test]
    fn mode_values() {
        let (p, s) = reference();
        let b = s.boundaries;
        let m1 = eval(&p, &s, 0.5 * b[0]);
        assert_eq!(m1.values[I_S + 1], s.i_l);
        assert_eq!(m1.values[I_S], 0.0);
        assert_relative_eq!(m1.values[V_S], 16.0 * s.vo2);
        assert_eq!(m1.values[V_S + 3], s.vo1);
        assert_eq!(m1.values[V_S + 4], s.vo1);
        assert_eq!(m1.i_lk1(), 0.0);
        let m3 = eval(&p, &s, b[3]);
        assert_relative_eq!(m3.values[I_S], s.i_l / 2.0, max_relative = 1e-12);
        assert_relative_eq!(m3.values[I_S + 1], s.i_l / 2.0, max_relative = 1e-12);
        assert!(m3.values[I_D + 2].abs() < 1e-12);
        assert!(m3.values[I_D + 5].abs() < 1e-12);
        let m4 = eval(&p, &s, b[4]);
        assert_relative_eq!(m4.values[I_S], s.i_l, max_relative = 1e-12);
        assert!(m4.values[I_S + 1].abs() < 1e-12);
        assert_relative_eq!(m4.values[I_S + 2], 4.0 * s.i_l, max_relative = 1e-12);
        assert_relative_eq!(m4.values[I_S + 5], 4.0 * s.i_l, max_relative = 1e-12);
    }

    #[test]
    fn soft_switching_is_exact() {
        let (p, s) = reference();
        let ev = events(&p, &s);
        for e in &ev {
            match (e.device, e.kind) {
                (Device::Switch(0 | 1), EventKind::Off) => assert_eq!(e.current, 0.0),
                (Device::Switch(2..=5), EventKind::On) => assert_eq!(e.voltage, 0.0),
                _ => {}
            }
        }
        // S2 channel current at its turn-off, evaluated from the segments.
        let at = eval(&p, &s, s.boundaries[5] - 1e-15);
        assert!(at.values[I_S + 1].abs() < 1e-12);
        assert_eq!(ev.len(), 24);
    }

    #[test]
    fn events_alternate() {
        let (p, s) = reference();
        let ev = events(&p, &s);
        for d in Device::all() {
            let kinds: Vec<_> = ev.iter().filter(|e| e.device == d).map(|e| e.kind).collect();
            assert_eq!(kinds.len(), 2, "{d}");
            assert_ne!(kinds[0], kinds[1]);
        }
    }

    #[test]
    fn period_balances() {
        let (p, s) = reference();
        let w = waveforms(&p, &s, 1024);
        assert!(w.integrals.avg_v_lk1.abs() < 1e-6 * p.vi);
        assert!(w.integrals.avg_v_l.abs() < 1e-9 * p.vi);
        let rel = (w.integrals.source_energy - w.integrals.load_energy) / w.integrals.load_energy;
        assert!(rel.abs() < 1e-9);
    }

    #[test]
    fn half_wave_symmetry() {
        let (p, s) = reference();
        let t = 1.0 / p.fs;
        for k in 0..50 {
            let ta = k as f64 * t / 100.0 + 1.3e-8;
            let a = eval(&p, &s, ta).values;
            let b = eval(&p, &s, ta + t / 2.0).values;
            let m = mirror_values(&a);
            for c in 0..N_CHANNELS {
                assert!((m[c] - b[c]).abs() < 1e-9 * (1.0 + a[c].abs()), "{} at {ta}", CHANNEL_NAMES[c]);
            }
        }
    }

    #[test]
    fn continuity_of_inductor_currents() {
        let (p, s) = reference();
        let segs = segments(&p, &s);
        for w in segs.windows(2) {
            let end = w[0].at(w[0].end);
            for c in [I_LK1, I_LK2, I_L] {
                assert!((end[c] - w[1].value[c]).abs() < 1e-12, "{}", CHANNEL_NAMES[c]);
            }
        }
    }

    #[test]
    fn snubbers_rejected() {
        let mut p = ConverterParams::reference();
        p.csn[0] = 1e-9;
        assert_eq!(solve_steady_state(&p), Err(AnalyticError::SnubbersUnsupported));
    }

    #[test]
    fn long_commutation_rejected() {
        let p = ConverterParams { llk1: 1109e-6, llk2: 1109e-6, ..ConverterParams::reference() };
        let e = solve_steady_state(&p).unwrap_err();
        assert!(e.to_string().starts_with("commutation exceeds half-period"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn invariants_hold(d in 0.55f64..0.72, r in 2.0f64..40.0, llk in 10e-6f64..150e-6, frac in 0.0f64..1.0) {
            let p = ConverterParams { d, r1: r, r2: r, llk1: llk, llk2: llk, ..ConverterParams::reference() };
            let s = match solve_steady_state(&p) {
                Ok(s) => s,
                Err(AnalyticError::CommutationExceedsHalfPeriod { .. }) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(alloc::format!("{e}"))),
            };
            prop_assert!((s.vo2 - vo2_oracle(&p)).abs() < 1e-9 * s.vo2);
            let st = eval(&p, &s, frac / p.fs);
            prop_assert!((st.i_lk1() + st.i_lk2() - st.i_l()).abs() < 1e-12 * s.i_l.max(1.0));
            let i_sec = 0.5 * p.n * (st.i_lk1() - st.i_lk2());
            let v = st.values;
            let a_leg = v[I_S + 2] - v[I_D + 2] - v[I_S + 3] + v[I_D + 3];
            prop_assert!((a_leg - i_sec).abs() < 1e-9 * (1.0 + i_sec.abs()));
            let power = p.vi * s.i_l;
            prop_assert!((power - p.load_power(s.vo2)).abs() < 1e-9 * power);
        }
    }
}
