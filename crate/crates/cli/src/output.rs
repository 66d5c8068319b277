//! CSV writers and plain-text report formatting.
//!
//! Numbers use Rust's `Display` for `f64`, the shortest representation that round-trips,
//! so repeated runs produce byte-identical files.

use std::fmt::Write as _;

use ppconv_core::analyzer::{ComparisonRow, SoftSwitchReport};
use ppconv_core::waveform::{WaveformSet, CHANNEL_NAMES};
use ppconv_core::{GateSchedule, SteadyStateSolution};

pub fn hash_line(hash: &str) -> String {
    format!("# params-hash: {hash}\n")
}

/// `t` followed by every channel, one row per sample.
pub fn waveforms_csv(w: &WaveformSet, hash: &str) -> String {
    let mut out = hash_line(hash);
    out.push('t');
    for name in CHANNEL_NAMES {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (t, row) in w.time.iter().zip(&w.samples) {
        let _ = write!(out, "{t}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn events_csv(w: &WaveformSet, hash: &str) -> String {
    let mut out = hash_line(hash);
    out.push_str("t,device,kind\n");
    for e in &w.events {
        let _ = writeln!(out, "{},{},{}", e.t, e.device, e.kind);
    }
    out
}

/// Gate states on the sampling grid of `w`.
pub fn gates_csv(schedule: &GateSchedule, w: &WaveformSet, hash: &str) -> String {
    let mut out = hash_line(hash);
    out.push_str("t,s1,s2,s3,s4,s5,s6\n");
    for &t in &w.time {
        let _ = write!(out, "{t}");
        for g in schedule.gate_state(t) {
            let _ = write!(out, ",{}", u8::from(g));
        }
        out.push('\n');
    }
    out
}

/// Comparison rows; `delta_rel` is taken against the column matching the engine.
pub fn report_csv(rows: &[ComparisonRow], against_sim: bool, hash: &str) -> String {
    let mut out = hash_line(hash);
    out.push_str("metric,value,target_analytic,target_sim,delta_rel\n");
    for r in rows {
        let rel = if against_sim { r.delta_rel_sim } else { r.delta_rel_analytic };
        let _ = writeln!(out, "{},{},{},{},{}", r.metric, r.value, r.target_analytic, r.target_sim, rel);
    }
    out
}

pub fn solution_summary(sol: &SteadyStateSolution) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "operating point (analytic)");
    let _ = writeln!(s, "  I_L        {:>12.6} A", sol.i_l);
    let _ = writeln!(s, "  Vo1        {:>12.6} V", sol.vo1);
    let _ = writeln!(s, "  Vo2        {:>12.6} V", sol.vo2);
    let _ = writeln!(s, "  D_ext      {:>12.6}", sol.d_ext);
    let _ = writeln!(s, "  ramp       {:>12.6} us", sol.ramp * 1e6);
    let _ = writeln!(s, "  I_LK1 peak {:>12.6} A", sol.i_lk1_peak);
    let _ = writeln!(s, "  I_D2 peak  {:>12.6} A", sol.i_d2_peak);
    let _ = writeln!(s, "mode boundaries (us)");
    for (k, t) in sol.boundaries.iter().enumerate() {
        let _ = writeln!(s, "  t{k} {:>12.6}", t * 1e6);
    }
    s
}

pub fn waveform_summary(w: &WaveformSet) -> String {
    let op = w.steady_state_metrics();
    let mut s = String::new();
    let _ = writeln!(s, "operating point (transient)");
    let _ = writeln!(s, "  converged  {} after {} periods (residual {:e})", w.converged, w.periods_run, w.residual);
    let _ = writeln!(s, "  I_L        {:>12.6} A", op.i_l);
    let _ = writeln!(s, "  Vo1        {:>12.6} V", op.vo1);
    let _ = writeln!(s, "  Vo2        {:>12.6} V", op.vo2);
    let _ = writeln!(s, "  I_LK1 peak {:>12.6} A", op.i_lk1_peak);
    let _ = writeln!(s, "  I_LK2 peak {:>12.6} A", op.i_lk2_peak);
    let g = &w.integrals;
    let _ = writeln!(s, "  E_source   {:>12.6e} J", g.source_energy);
    let _ = writeln!(s, "  E_load     {:>12.6e} J", g.load_energy);
    let _ = writeln!(s, "  E_switch   {:>12.6e} J", g.switching_loss);
    s
}

pub fn report_text(r: &SoftSwitchReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "soft switching (ZCS limit {:.4} A, ZVS limit {:.4} V)",
        r.current_threshold, r.voltage_threshold
    );
    let _ = writeln!(s, "  {:<4} {:>10} {:>10} {:>5} {:>5} {:>10} {:>10}", "dev", "i_off[A]", "v_on[V]", "ZCS", "ZVS", "v_pk[V]", "i_pk[A]");
    for (k, sw) in r.switches.iter().enumerate() {
        let yn = |b: bool| if b { "yes" } else { "no" };
        let _ = writeln!(
            s,
            "  S{:<3} {:>10.4} {:>10.4} {:>5} {:>5} {:>10.4} {:>10.4}",
            k + 1,
            sw.turn_off_current,
            sw.turn_on_voltage,
            yn(sw.zcs),
            yn(sw.zvs),
            sw.peak_voltage,
            sw.peak_current
        );
    }
    match r.ripple_hz {
        Some(f) => {
            let _ = writeln!(s, "  input ripple {f} Hz");
        }
        None => {
            let _ = writeln!(s, "  input ripple none");
        }
    }
    s
}

pub fn comparison_text(rows: &[ComparisonRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "  {:<16} {:>10} {:>10} {:>9} {:>10} {:>9}  note", "metric", "value", "analytic", "rel", "sim", "rel");
    for r in rows {
        let _ = writeln!(
            s,
            "  {:<16} {:>10.4} {:>10.4} {:>+8.2}% {:>10.4} {:>+8.2}%  {}",
            r.metric,
            r.value,
            r.target_analytic,
            100.0 * r.delta_rel_analytic,
            r.target_sim,
            100.0 * r.delta_rel_sim,
            r.note
        );
    }
    s
}
