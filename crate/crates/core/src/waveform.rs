//! Sampled waveforms, event logs and operating-point metrics shared by both engines.

use alloc::vec::Vec;
use core::fmt;

/// Number of sampled channels, excluding time.
pub const N_CHANNELS: usize = 26;

/// Channel names in CSV column order (time column excluded).
pub const CHANNEL_NAMES: [&str; N_CHANNELS] = [
    "i_L", "i_LK1", "i_LK2", "i_S1", "i_S2", "i_S3", "i_S4", "i_S5", "i_S6", "i_D1", "i_D2", "i_D3", "i_D4", "i_D5",
    "i_D6", "v_S1", "v_S2", "v_S3", "v_S4", "v_S5", "v_S6", "v_Co1", "v_Co2", "v_L", "v_LK1", "v_LK2",
];

pub const I_L: usize = 0;
pub const I_LK1: usize = 1;
pub const I_LK2: usize = 2;
pub const I_S: usize = 3;
pub const I_D: usize = 9;
pub const V_S: usize = 15;
pub const V_CO1: usize = 21;
pub const V_CO2: usize = 22;
pub const V_L: usize = 23;
pub const V_LK1: usize = 24;
pub const V_LK2: usize = 25;

/// A switch channel or its anti-parallel diode, index 0 for S1/D1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Device {
    Switch(u8),
    Diode(u8),
}

impl Device {
    /// Column index of the device current.
    pub fn current_channel(self) -> usize {
        match self {
            Device::Switch(k) => I_S + k as usize,
            Device::Diode(k) => I_D + k as usize,
        }
    }

    /// Column index of the voltage across the device (shared by switch and diode).
    pub fn voltage_channel(self) -> usize {
        match self {
            Device::Switch(k) | Device::Diode(k) => V_S + k as usize,
        }
    }

    pub fn all() -> impl Iterator<Item = Device> {
        (0..6).map(Device::Switch).chain((0..6).map(Device::Diode))
    }
}

impl fmt::Display for Device {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Device::Switch(k) => write!(f, "S{}", k + 1),
            Device::Diode(k) => write!(f, "D{}", k + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    On,
    Off,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::On => "on",
            EventKind::Off => "off",
        })
    }
}

/// A device transition. Switch events are gate edges; diode events are conduction changes.
///
/// `current` is the device current just before the transition and `voltage` the device
/// voltage just before it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub device: Device,
    pub kind: EventKind,
    pub current: f64,
    pub voltage: f64,
}

/// Exact per-period integrals, not derived from the sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PeriodIntegrals {
    /// Energy delivered by the input source over one period.
    pub source_energy: f64,
    /// Energy dissipated in both loads over one period.
    pub load_energy: f64,
    /// Change in stored energy (inductors and capacitors) across the period.
    pub stored_delta: f64,
    /// Energy lost in instantaneous switching events (snubber dumps, current steps).
    pub switching_loss: f64,
    pub avg_v_l: f64,
    pub avg_v_lk1: f64,
    pub avg_v_lk2: f64,
}

/// One period of sampled waveforms on a uniform grid `t0 + k T / N`, `k = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSet {
    pub period: f64,
    pub time: Vec<f64>,
    pub samples: Vec<[f64; N_CHANNELS]>,
    /// Events inside the sampled period, in time order.
    pub events: Vec<Event>,
    pub converged: bool,
    pub periods_run: usize,
    /// Relative period-to-period state change at exit.
    pub residual: f64,
    pub integrals: PeriodIntegrals,
}

/// Snapshot of every device quantity at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitState {
    pub t: f64,
    pub values: [f64; N_CHANNELS],
    /// Channel conduction per switch.
    pub channel_on: [bool; 6],
    /// Body-diode conduction per switch.
    pub diode_on: [bool; 6],
}

impl CircuitState {
    pub fn i_l(&self) -> f64 {
        self.values[I_L]
    }

    pub fn i_lk1(&self) -> f64 {
        self.values[I_LK1]
    }

    pub fn i_lk2(&self) -> f64 {
        self.values[I_LK2]
    }

    pub fn v_co1(&self) -> f64 {
        self.values[V_CO1]
    }

    pub fn v_co2(&self) -> f64 {
        self.values[V_CO2]
    }

    /// Voltage across the snubber capacitance of switch `k`, equal to the device voltage.
    pub fn v_csn(&self, k: usize) -> f64 {
        self.values[V_S + k]
    }
}

/// Period-averaged operating point and device stresses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub vo1: f64,
    pub vo2: f64,
    pub i_l: f64,
    pub i_lk1_peak: f64,
    pub i_lk2_peak: f64,
    /// Peak |v| per switch S1..S6.
    pub peak_v: [f64; 6],
    /// Peak |i| through switch channel S1..S6.
    pub peak_i_switch: [f64; 6],
    /// Peak |i| through body diode D1..D6.
    pub peak_i_diode: [f64; 6],
    /// Period average of the voltage across L.
    pub avg_v_l: f64,
    pub converged: bool,
}

impl WaveformSet {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn channel(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(move |s| s[c])
    }

    pub fn mean(&self, c: usize) -> f64 {
        self.channel(c).sum::<f64>() / self.len() as f64
    }

    pub fn peak_abs(&self, c: usize) -> f64 {
        self.channel(c).fold(0.0, |m, x| m.max(libm::fabs(x)))
    }

    pub fn events_for(&self, device: Device) -> impl Iterator<Item = &Event> + '_ {
        self.events.iter().filter(move |e| e.device == device)
    }

    /// Operating point from the final period.
    pub fn steady_state_metrics(&self) -> OperatingPoint {
        OperatingPoint {
            vo1: self.mean(V_CO1),
            vo2: self.mean(V_CO2),
            i_l: self.mean(I_L),
            i_lk1_peak: self.peak_abs(I_LK1),
            i_lk2_peak: self.peak_abs(I_LK2),
            peak_v: core::array::from_fn(|k| self.peak_abs(V_S + k)),
            peak_i_switch: core::array::from_fn(|k| self.peak_abs(I_S + k)),
            peak_i_diode: core::array::from_fn(|k| self.peak_abs(I_D + k)),
            avg_v_l: self.integrals.avg_v_l,
            converged: self.converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_layout() {
        assert_eq!(CHANNEL_NAMES[I_S], "i_S1");
        assert_eq!(CHANNEL_NAMES[I_D + 5], "i_D6");
        assert_eq!(CHANNEL_NAMES[V_S + 2], "v_S3");
        assert_eq!(CHANNEL_NAMES[V_CO1], "v_Co1");
        assert_eq!(CHANNEL_NAMES[V_LK2], "v_LK2");
        assert_eq!(Device::Diode(2).current_channel(), I_D + 2);
        assert_eq!(Device::Diode(2).voltage_channel(), V_S + 2);
        assert_eq!(Device::all().count(), 12);
    }

    #[test]
    fn device_names() {
        assert_eq!(Device::Switch(0).to_string(), "S1");
        assert_eq!(Device::Diode(5).to_string(), "D6");
        assert_eq!(EventKind::Off.to_string(), "off");
    }

    #[test]
    fn metrics_from_samples() {
        let mut a = [0.0; N_CHANNELS];
        let mut b = [0.0; N_CHANNELS];
        a[V_CO1] = 10.0;
        b[V_CO1] = 12.0;
        a[I_LK2] = -3.0;
        b[I_LK2] = 2.0;
        let w = WaveformSet {
            period: 1.0,
            time: alloc::vec![0.0, 0.5],
            samples: alloc::vec![a, b],
            events: Vec::new(),
            converged: true,
            periods_run: 1,
            residual: 0.0,
            integrals: PeriodIntegrals::default(),
        };
        let m = w.steady_state_metrics();
        assert_eq!(m.vo1, 11.0);
        assert_eq!(m.i_lk2_peak, 3.0);
    }
}
