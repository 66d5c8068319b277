//! Periodic gate schedule for S1..S6.

use alloc::vec::Vec;

use crate::params::{ConverterParams, DerivedConstants};

/// Half-open interval `[start, end)` inside one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }
}

/// Gate on-intervals per switch, folded into `[0, period)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSchedule {
    pub period: f64,
    pub on_intervals: [Vec<Interval>; 6],
}

/// Interval `[start, end)` with `start` possibly negative, folded into `[0, period)`.
fn wrapped(start: f64, end: f64, period: f64) -> Vec<Interval> {
    let mut v = if start < 0.0 {
        alloc::vec![Interval { start: 0.0, end }, Interval { start: start + period, end: period }]
    } else {
        alloc::vec![Interval { start, end }]
    };
    v.retain(|i| !i.is_empty());
    v
}

/// S1 turns on at t = 0 and S2 half a period later, both for D·T.
///
/// The (S3, S6) pair conducts for (1 - D)·T and turns off together with S2, at the end of
/// the S1-incoming overlap. The (S4, S5) pair is the same pattern shifted by T/2. Coincident
/// edges share one expression so they compare equal.
pub fn build_schedule(params: &ConverterParams, derived: &DerivedConstants) -> GateSchedule {
    let t = derived.period;
    let half = 0.5 * t;
    let on_p = params.d * t;
    let t_ov = derived.overlap(params.d);
    let on_s = derived.duty_secondary * t;
    let s1 = alloc::vec![Interval { start: 0.0, end: on_p }];
    let s2 = wrapped(half - t, t_ov, t);
    let s36 = wrapped(t_ov - on_s, t_ov, t);
    let s45 = wrapped(on_p - on_s, on_p, t);
    GateSchedule {
        period: t,
        on_intervals: [s1, s2, s36.clone(), s45.clone(), s45, s36],
    }
}

impl GateSchedule {
    /// Gate state of S1..S6 at `t`; periodic with half-open interval semantics.
    pub fn gate_state(&self, t: f64) -> [bool; 6] {
        let tau = self.fold_time(t);
        core::array::from_fn(|k| self.on_intervals[k].iter().any(|i| i.contains(tau)))
    }

    /// Schedule with fixed gate states, independent of time.
    pub fn constant(period: f64, on: [bool; 6]) -> Self {
        let full = || alloc::vec![Interval { start: 0.0, end: period }];
        GateSchedule {
            period,
            on_intervals: core::array::from_fn(|k| if on[k] { full() } else { Vec::new() }),
        }
    }

    /// Gate edges `(time, switch index, turns_on)` of one period in ascending time.
    ///
    /// Intervals touching the period boundary are merged, so a switch that stays on across
    /// `t = period` produces no spurious edge at 0.
    pub fn edges(&self) -> Vec<(f64, usize, bool)> {
        let mut out = Vec::new();
        for (k, ivs) in self.on_intervals.iter().enumerate() {
            for iv in ivs {
                if iv.is_empty() {
                    continue;
                }
                let wraps_in = iv.start == 0.0 && ivs.iter().any(|o| o.end >= self.period);
                let wraps_out = iv.end >= self.period && ivs.iter().any(|o| o.start == 0.0);
                if !wraps_in {
                    out.push((iv.start, k, true));
                }
                if !wraps_out {
                    out.push((iv.end % self.period, k, false));
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }

    /// First gate edge strictly after `t`, with its absolute time.
    pub fn next_edge_after(&self, t: f64) -> Option<f64> {
        let edges = self.edges();
        if edges.is_empty() {
            return None;
        }
        let base = libm::floor(t / self.period) * self.period;
        for cycle in 0..3 {
            let offset = base + cycle as f64 * self.period;
            for &(te, _, _) in &edges {
                let abs = offset + te;
                if abs > t {
                    return Some(abs);
                }
            }
        }
        None
    }

    /// Fraction of the period switch `k` is gated on.
    pub fn duty(&self, k: usize) -> f64 {
        self.on_intervals[k].iter().map(Interval::len).sum::<f64>() / self.period
    }

    fn fold_time(&self, t: f64) -> f64 {
        let r = t - libm::floor(t / self.period) * self.period;
        if r >= self.period { 0.0 } else { r }
    }
}
