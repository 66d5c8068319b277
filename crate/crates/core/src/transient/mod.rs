//! Exact piecewise-linear transient integration of the ideal-switch circuit.
//!
//! Between events each conduction topology is an affine ODE propagated with its matrix
//! exponential. Gate edges are hit exactly; diode transitions and clamp onsets are located by
//! binary search on cached half-steps. The run stops at periodic steady state.

mod network;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use thiserror::Error;

use crate::analytic::solve_steady_state;
use crate::params::{ConverterParams, ParamsError};
use crate::pwm::GateSchedule;
use crate::waveform::*;
use network::{project, stored_energy, Leg, Lin, Network, State, Topology, I1, I2, LEVELS, VO};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("invalid simulation config: {0}")]
    Config(&'static str),
    #[error("no convergence after {periods} periods (residual {residual:e})")]
    NoConvergence { periods: usize, residual: f64 },
    #[error("stiff/degenerate network at t = {t} s: {reason}")]
    Degenerate { t: f64, reason: &'static str },
}

/// Initial state of the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seed {
    /// All zero except the input current, set to the ripple-free estimate.
    Analytic,
    Zero,
    /// Explicit leakage currents and Vo1 rail voltage.
    Custom { i_lk1: f64, i_lk2: f64, vo1: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Largest propagation step; `None` selects T/256.
    pub max_step: Option<f64>,
    /// Guard tolerance for event detection, amperes or volts.
    pub event_tol: f64,
    /// Relative period-to-period state change accepted as steady state.
    pub ss_tol: f64,
    pub max_periods: usize,
    /// Sample points over the final period.
    pub samples: usize,
    pub seed: Seed,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { max_step: None, event_tol: 1e-6, ss_tol: 1e-8, max_periods: 20_000, samples: 1024, seed: Seed::Analytic }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if let Some(h) = self.max_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(SimError::Config("max_step must be positive"));
            }
        }
        if !(self.event_tol.is_finite() && self.event_tol > 0.0) {
            return Err(SimError::Config("event_tol must be positive"));
        }
        if !(self.ss_tol.is_finite() && self.ss_tol > 0.0) {
            return Err(SimError::Config("ss_tol must be positive"));
        }
        if self.max_periods == 0 {
            return Err(SimError::Config("max_periods must be positive"));
        }
        if self.samples < 64 {
            return Err(SimError::Config("samples per period must be at least 64"));
        }
        Ok(())
    }
}

/// Runs until periodic steady state and returns the final period.
pub fn simulate(params: &ConverterParams, schedule: &GateSchedule, cfg: &SimConfig) -> Result<WaveformSet, SimError> {
    let mut e = Engine::new(params, schedule, cfg)?;
    let w = e.run(cfg.max_periods, true)?;
    if w.converged {
        Ok(w)
    } else {
        Err(SimError::NoConvergence { periods: w.periods_run, residual: w.residual })
    }
}

/// Runs exactly `periods` periods; `converged` reports whether steady state was reached.
pub fn simulate_periods(
    params: &ConverterParams,
    schedule: &GateSchedule,
    cfg: &SimConfig,
    periods: usize,
) -> Result<WaveformSet, SimError> {
    if periods == 0 {
        return Err(SimError::Config("periods must be positive"));
    }
    Engine::new(params, schedule, cfg)?.run(periods, false)
}

#[derive(Debug, Clone, Copy)]
struct Watch {
    /// Triggers when `f < -tol`.
    f: Lin,
    guard: bool,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    end: f64,
    x0: State,
    key: u8,
}

/// Fraction of the period a freshly chosen topology must remain consistent for.
const LOOKAHEAD: f64 = 1e-6;

/// Event time tolerance as a fraction of the period.
const BISECT_TOL: f64 = 1e-9;

/// Events per period before the run is declared chattering.
const EVENT_LIMIT: usize = 10_000;

struct Engine<'a> {
    p: ConverterParams,
    sched: &'a GateSchedule,
    cfg: SimConfig,
    period: f64,
    max_step: f64,
    nets: BTreeMap<u8, Option<Box<Network>>>,
    edges: Vec<(f64, usize, bool)>,
    x: State,
    topo: Topology,
    gates: [bool; 6],
    watches: Vec<Watch>,
    diodes: [bool; 6],
    segs: Vec<Segment>,
    seg_start: (f64, State),
    events: Vec<Event>,
    p_index: usize,
    jump_loss: f64,
}

impl<'a> Engine<'a> {
    fn new(params: &ConverterParams, sched: &'a GateSchedule, cfg: &SimConfig) -> Result<Self, SimError> {
        let p = params.validate()?;
        cfg.validate()?;
        let period = sched.period;
        let mut x = State::zeros();
        match cfg.seed {
            Seed::Zero => {}
            Seed::Analytic => x[I2] = input_current_estimate(&p),
            Seed::Custom { i_lk1, i_lk2, vo1 } => {
                x[I1] = i_lk1;
                x[I2] = i_lk2;
                x[VO] = vo1;
            }
        }
        Ok(Engine {
            p,
            sched,
            cfg: *cfg,
            period,
            max_step: cfg.max_step.unwrap_or(period / 256.0),
            nets: BTreeMap::new(),
            edges: sched.edges(),
            x,
            topo: Topology { prim: [true, true], leg: [Leg::Float, Leg::Float] },
            gates: [false; 6],
            watches: Vec::new(),
            diodes: [false; 6],
            segs: Vec::new(),
            seg_start: (0.0, x),
            events: Vec::new(),
            p_index: 0,
            jump_loss: 0.0,
        })
    }

    fn ensure(&mut self, topo: Topology) -> bool {
        let key = topo.key();
        if !self.nets.contains_key(&key) {
            let net = Network::build(&self.p, topo, self.max_step).map(Box::new);
            self.nets.insert(key, net);
        }
        self.nets[&key].is_some()
    }

    fn net(&self) -> &Network {
        self.nets[&self.topo.key()].as_deref().expect("active topology is built")
    }

    fn abs_time(&self, u: f64) -> f64 {
        self.p_index as f64 * self.period + u
    }

    fn run(&mut self, periods: usize, stop: bool) -> Result<WaveformSet, SimError> {
        let gates = self.sched.gate_state(0.0);
        self.gates = gates;
        let pre = [0.0; N_CHANNELS];
        self.resolve(0.0, &pre)?;
        let mut residual = f64::INFINITY;
        let mut converged = false;
        let mut x_start = self.x;
        let mut e_start = stored_energy(&self.p, &self.x);
        let mut run = 0;
        for pi in 0..periods {
            self.p_index = pi;
            self.segs.clear();
            self.events.clear();
            self.jump_loss = 0.0;
            x_start = self.x;
            e_start = stored_energy(&self.p, &self.x);
            self.seg_start = (0.0, self.x);
            let mut ei = 0;
            if pi > 0 {
                let at_zero: Vec<_> = self.edges.iter().copied().filter(|e| e.0 == 0.0).collect();
                if !at_zero.is_empty() {
                    self.apply_gates(0.0, &at_zero)?;
                }
            }
            while ei < self.edges.len() && self.edges[ei].0 <= 0.0 {
                ei += 1;
            }
            let mut u = 0.0;
            let mut n_events = 0;
            loop {
                let target = if ei < self.edges.len() { self.edges[ei].0 } else { self.period };
                self.integrate_to(&mut u, target, &mut n_events)?;
                if ei >= self.edges.len() {
                    break;
                }
                let te = self.edges[ei].0;
                let mut batch = Vec::new();
                while ei < self.edges.len() && self.edges[ei].0 == te {
                    batch.push(self.edges[ei]);
                    ei += 1;
                }
                self.apply_gates(u, &batch)?;
            }
            self.close_segment(self.period);
            residual = self.residual(&x_start);
            run = pi + 1;
            converged = pi > 0 && residual < self.cfg.ss_tol;
            if stop && converged {
                break;
            }
        }
        Ok(self.output(run, residual, converged, &x_start, e_start))
    }

    fn residual(&self, x0: &State) -> f64 {
        let x = &self.x;
        let (mut di, mut si, mut dv, mut sv) = (0.0f64, 1e-12f64, 0.0f64, 1e-12f64);
        for k in 0..network::NX {
            let d = libm::fabs(x[k] - x0[k]);
            let s = libm::fabs(x[k]).max(libm::fabs(x0[k]));
            if k < 2 {
                di = di.max(d);
                si = si.max(s);
            } else {
                dv = dv.max(d);
                sv = sv.max(s);
            }
        }
        (di / si).max(dv / sv)
    }

    fn triggered(&self, x: &State) -> bool {
        let tol = self.cfg.event_tol;
        self.watches.iter().any(|w| w.f.eval(x) < -tol)
    }

    fn integrate_to(&mut self, u: &mut f64, target: f64, n_events: &mut usize) -> Result<(), SimError> {
        while *u < target {
            let net = self.net();
            let rest = target - *u;
            let h = net.h0.min(rest);
            let x1 = if h == net.h0 { (net.phi[0] * self.x.push(1.0)).fixed_rows::<7>(0).into_owned() } else { net.advance(&self.x, h) };
            if self.triggered(&x1) {
                let (dt, xe) = self.bisect(h, x1);
                *u = if dt >= rest { target } else { *u + dt };
                self.x = xe;
                let pre = self.net().channels(&self.x);
                self.close_segment(*u);
                self.resolve(*u, &pre)?;
                *n_events += 1;
                if *n_events > EVENT_LIMIT {
                    return Err(SimError::Degenerate { t: self.abs_time(*u), reason: "event chattering" });
                }
            } else {
                *u = if h == rest { target } else { *u + h };
                self.x = x1;
            }
        }
        Ok(())
    }

    /// Locates the first trigger within `(0, h]` to the event time tolerance.
    fn bisect(&self, h: f64, x_end: State) -> (f64, State) {
        let net = self.net();
        let tol_t = self.period * BISECT_TOL;
        let (mut off, mut lo) = (0.0, self.x.push(1.0));
        let (mut hi_off, mut hi) = (h, x_end.push(1.0));
        let mut hk = net.h0;
        for k in 1..LEVELS {
            if hi_off - off <= tol_t {
                break;
            }
            hk *= 0.5;
            if off + hk >= hi_off {
                continue;
            }
            let cand = net.phi[k] * lo;
            if self.triggered(&cand.fixed_rows::<7>(0).into_owned()) {
                hi_off = off + hk;
                hi = cand;
            } else {
                lo = cand;
                off += hk;
            }
        }
        (hi_off, hi.fixed_rows::<7>(0).into_owned())
    }

    fn close_segment(&mut self, u: f64) {
        let (start, x0) = self.seg_start;
        if u > start {
            self.segs.push(Segment { start, end: u, x0, key: self.topo.key() });
        }
        self.seg_start = (u, self.x);
    }

    fn apply_gates(&mut self, u: f64, batch: &[(f64, usize, bool)]) -> Result<(), SimError> {
        let pre = self.net().channels(&self.x);
        for &(_, k, on) in batch {
            self.events.push(Event {
                t: u,
                device: Device::Switch(k as u8),
                kind: if on { EventKind::On } else { EventKind::Off },
                current: pre[I_S + k],
                voltage: pre[V_S + k],
            });
            self.gates[k] = on;
        }
        self.close_segment(u);
        self.resolve(u, &pre)
    }

    fn candidates(&self) -> Vec<Topology> {
        let g = self.gates;
        let prim = |k: usize| if g[k] { alloc::vec![true] } else { alloc::vec![true, false] };
        let leg = |top: usize, bot: usize| match (g[top], g[bot]) {
            (true, _) => alloc::vec![Leg::Top],
            (_, true) => alloc::vec![Leg::Bottom],
            _ => alloc::vec![Leg::Top, Leg::Bottom, Leg::Float],
        };
        let mut out = Vec::new();
        for p1 in prim(0) {
            for p2 in prim(1) {
                for a in leg(2, 3) {
                    for b in leg(4, 5) {
                        out.push(Topology { prim: [p1, p2], leg: [a, b] });
                    }
                }
            }
        }
        out
    }

    /// Guards and sign watches of `net` under the current gates at state `x`.
    fn watches_for(&self, net: &Network, x: &State) -> (Vec<Watch>, [bool; 6]) {
        let tol = self.cfg.event_tol;
        let dx = net.deriv(x);
        let mut ws = Vec::new();
        let mut diodes = [false; 6];
        let sign = |f: Lin, ws: &mut Vec<Watch>| {
            let v = f.eval(x);
            let neg = if libm::fabs(v) <= tol { f.w.dot(&dx) < 0.0 } else { v < 0.0 };
            ws.push(Watch { f: if neg { f.scale(-1.0) } else { f }, guard: false });
            neg
        };
        for k in 0..2 {
            let i = Lin::state(I1 + k);
            if net.topo.prim[k] {
                if self.gates[k] {
                    diodes[k] = sign(i, &mut ws);
                } else {
                    ws.push(Watch { f: i.scale(-1.0), guard: true });
                    diodes[k] = true;
                }
            } else {
                ws.push(Watch { f: net.v_prim(k), guard: true });
            }
        }
        for k in 0..2 {
            match net.leg_device(k) {
                Some(s) => {
                    let i = net.leg_current(k);
                    if self.gates[s] {
                        diodes[s] = sign(i, &mut ws);
                    } else {
                        ws.push(Watch { f: i.scale(-1.0), guard: true });
                        diodes[s] = true;
                    }
                }
                None => {
                    let v = net.v_leg(k);
                    ws.push(Watch { f: v, guard: true });
                    ws.push(Watch { f: Lin::state(VO).add(v.scale(-1.0)), guard: true });
                }
            }
        }
        (ws, diodes)
    }

    /// Violation of `net`'s guards at `x`; zero when consistent.
    fn violation(&self, net: &Network, x: &State) -> f64 {
        let tol = self.cfg.event_tol;
        let (ws, _) = self.watches_for(net, x);
        let dx = net.deriv(x);
        let mut viol = 0.0;
        for w in ws.iter().filter(|w| w.guard) {
            let v = w.f.eval(x);
            let d = w.f.w.dot(&dx);
            if v < -tol {
                viol += -v;
            } else if v <= tol {
                if d * self.period < -tol {
                    viol += tol.min(-d * self.period);
                }
            } else if v + d * self.period * LOOKAHEAD < -tol {
                // Barely positive and about to cross: a zero-loss polarity flip, not a state.
                viol += tol;
            }
        }
        viol
    }

    /// Voltage step forced onto a capacitive device whose gate is off.
    ///
    /// A body diode starts conducting only once its capacitance has swung to zero; only a
    /// gated channel may discharge it abruptly.
    fn cap_jump(&self, cand: &Topology) -> f64 {
        let cs = self.p.csn;
        let x = &self.x;
        // Event location leaves a voltage overshoot of up to slew rate times its time tolerance.
        let dx = match self.nets.get(&self.topo.key()) {
            Some(Some(net)) => net.deriv(x),
            _ => State::zeros(),
        };
        let slack = 4.0 * self.period * BISECT_TOL;
        let floor = 1e-4 * self.p.vi;
        let mut jump = 0.0;
        let mut add = |c: f64, gated: bool, dv: f64, rate: f64| {
            let dv = libm::fabs(dv);
            if c > 0.0 && !gated && dv > floor + slack * rate {
                jump += dv;
            }
        };
        for k in 0..2 {
            if cand.prim[k] {
                let vc = network::VC1 + k;
                add(cs[k], self.gates[k], x[vc], libm::fabs(dx[vc]));
            }
        }
        for k in 0..2 {
            let (top, bot) = (2 + 2 * k, 3 + 2 * k);
            let xa = network::XA + k;
            let v = x[xa];
            let c = cs[top] + cs[bot];
            let rate = libm::fabs(dx[xa]) + libm::fabs(dx[VO]);
            match cand.leg[k] {
                Leg::Top => add(c, self.gates[top], x[VO] - v, rate),
                Leg::Bottom => add(c, self.gates[bot], v, rate),
                Leg::Float => {}
            }
        }
        jump
    }

    /// Picks the conduction topology consistent with the gates at the current state.
    fn resolve(&mut self, u: f64, pre: &[f64; N_CHANNELS]) -> Result<(), SimError> {
        let t_abs = self.abs_time(u);
        if (self.gates[2] && self.gates[3]) || (self.gates[4] && self.gates[5]) {
            return Err(SimError::Degenerate { t: t_abs, reason: "both switches of a secondary leg gated" });
        }
        let mut best: Option<(Topology, State, f64, f64)> = None;
        for cand in self.candidates() {
            if !self.ensure(cand) {
                continue;
            }
            let Some((y, lost)) = project(&self.p, &cand, &self.x) else { continue };
            let net = self.nets[&cand.key()].as_deref().unwrap();
            let viol = self.violation(net, &y) + self.cap_jump(&cand);
            let better = match &best {
                None => true,
                Some((bt, _, bl, bv)) => {
                    if viol != *bv {
                        viol < *bv
                    } else {
                        let scale = 1e-9 * bl.abs().max(lost.abs()) + 1e-24;
                        if (lost - bl).abs() > scale {
                            lost < *bl
                        } else {
                            let (da, db) = (cand.distance(&self.topo), bt.distance(&self.topo));
                            da < db || (da == db && cand.key() < bt.key())
                        }
                    }
                }
            };
            if better {
                best = Some((cand, y, lost, viol));
            }
        }
        let (topo, y, lost, _) = best.ok_or(SimError::Degenerate { t: t_abs, reason: "no solvable topology" })?;
        let zero_caps = self.p.csn[0] == 0.0 && self.p.csn[1] == 0.0;
        if !topo.prim[0] && !topo.prim[1] && zero_caps && libm::fabs(self.x[I1] + self.x[I2]) > self.cfg.event_tol {
            return Err(SimError::Degenerate { t: t_abs, reason: "input current source open-circuited" });
        }
        self.topo = topo;
        self.x = y;
        self.jump_loss += lost;
        self.seg_start = (u, y);
        let (ws, diodes) = self.watches_for(self.net(), &y);
        self.watches = ws;
        for k in 0..6 {
            if diodes[k] != self.diodes[k] {
                self.events.push(Event {
                    t: u,
                    device: Device::Diode(k as u8),
                    kind: if diodes[k] { EventKind::On } else { EventKind::Off },
                    current: pre[I_D + k],
                    voltage: pre[V_S + k],
                });
            }
        }
        self.diodes = diodes;
        Ok(())
    }

    fn output(&self, run: usize, residual: f64, converged: bool, x_start: &State, e_start: f64) -> WaveformSet {
        let n = self.cfg.samples;
        let period = self.period;
        let time: Vec<f64> = (0..n).map(|k| k as f64 * period / n as f64).collect();
        let mut samples = Vec::with_capacity(n);
        let mut si = 0;
        for &t in &time {
            while si + 1 < self.segs.len() && self.segs[si].end <= t {
                si += 1;
            }
            let s = &self.segs[si];
            let net = self.nets[&s.key].as_deref().unwrap();
            samples.push(net.channels(&net.advance(&s.x0, t - s.start)));
        }
        let _ = x_start;

        // Five-point Gauss-Legendre on [0, 1].
        const GL: [(f64, f64); 5] = [
            (0.046_910_077_030_668, 0.118_463_442_528_095),
            (0.230_765_344_947_158, 0.239_314_335_249_683),
            (0.5, 0.284_444_444_444_444),
            (0.769_234_655_052_842, 0.239_314_335_249_683),
            (0.953_089_922_969_332, 0.118_463_442_528_095),
        ];
        let g = self.p.output_conductance();
        let (mut src, mut load, mut vl, mut vlk1, mut vlk2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for s in &self.segs {
            let net = self.nets[&s.key].as_deref().unwrap();
            let len = s.end - s.start;
            let pieces = libm::ceil(len / net.h0).max(1.0) as usize;
            let dh = len / pieces as f64;
            for j in 0..pieces {
                for (node, w) in GL {
                    let x = net.advance(&s.x0, (j as f64 + node) * dh);
                    let d = net.deriv(&x);
                    let wt = w * dh;
                    src += wt * self.p.vi * (x[I1] + x[I2]);
                    load += wt * g * x[VO] * x[VO];
                    vl += wt * self.p.l * (d[I1] + d[I2]);
                    vlk1 += wt * self.p.llk1 * d[I1];
                    vlk2 += wt * self.p.llk2 * d[I2];
                }
            }
        }
        let integrals = PeriodIntegrals {
            source_energy: src,
            load_energy: load,
            stored_delta: stored_energy(&self.p, &self.x) - e_start,
            switching_loss: self.jump_loss,
            avg_v_l: vl / period,
            avg_v_lk1: vlk1 / period,
            avg_v_lk2: vlk2 / period,
        };
        WaveformSet {
            period,
            time,
            samples,
            events: self.events.clone(),
            converged,
            periods_run: run,
            residual,
            integrals,
        }
    }
}

/// Ripple-free input current estimate used to seed the run.
fn input_current_estimate(p: &ConverterParams) -> f64 {
    let ideal = ConverterParams { csn: [0.0; 6], ..*p };
    let vo2 = match solve_steady_state(&ideal) {
        Ok(s) => s.vo2,
        Err(_) => p.vi / (2.0 * (p.n * (1.0 - p.d) + 1.0)),
    };
    p.load_power(vo2) / p.vi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwm::build_schedule;

    fn reference() -> (ConverterParams, GateSchedule) {
        let p = ConverterParams::reference();
        let s = build_schedule(&p, &p.derive());
        (p, s)
    }

    #[test]
    fn config_validation() {
        let c = SimConfig { samples: 32, ..SimConfig::default() };
        assert_eq!(c.validate(), Err(SimError::Config("samples per period must be at least 64")));
        assert!(SimConfig::default().validate().is_ok());
    }

    #[test]
    fn one_period_is_not_converged() {
        let (p, s) = reference();
        let cfg = SimConfig { seed: Seed::Zero, ..SimConfig::default() };
        let w = simulate_periods(&p, &s, &cfg, 1).unwrap();
        assert!(!w.converged);
        assert_eq!(w.periods_run, 1);
        assert_eq!(w.len(), 1024);
    }

    #[test]
    fn symmetric_split_with_secondary_open() {
        // S1 and S2 held on, secondary gates off. Once the secondary diodes release,
        // i1 = i2 and the DC point is vo = Vi, i_L = Vi G (hand analysis).
        let p = ConverterParams::reference();
        let s = GateSchedule::constant(1.0 / p.fs, [true, true, false, false, false, false]);
        let cfg = SimConfig { seed: Seed::Custom { i_lk1: 0.0, i_lk2: 1.0, vo1: 5.0 }, ..SimConfig::default() };
        let w = simulate_periods(&p, &s, &cfg, 4000).unwrap();
        let last = w.samples.last().unwrap();
        let il = p.vi * p.output_conductance();
        assert!((last[I_LK1] - last[I_LK2]).abs() < 1e-9 * il);
        assert!((last[I_L] - il).abs() < 1e-4 * il, "{} vs {}", last[I_L], il);
        assert!((last[V_CO1] - p.vi).abs() < 1e-4 * p.vi);
    }

    #[test]
    fn open_input_is_degenerate() {
        let p = ConverterParams::reference();
        let s = GateSchedule::constant(1.0 / p.fs, [false; 6]);
        let cfg = SimConfig { seed: Seed::Custom { i_lk1: 0.5, i_lk2: 0.5, vo1: 0.0 }, ..SimConfig::default() };
        assert!(matches!(simulate_periods(&p, &s, &cfg, 1), Err(SimError::Degenerate { .. })));
    }
}
