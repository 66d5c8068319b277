//! Modelling toolkit for a dual-output step-down current-fed push-pull converter with
//! soft-switched primary and secondary bridges.
//!
//! Two independent engines produce the same [`WaveformSet`]: a closed-form piecewise-affine
//! model ([`analytic`]) and an exact piecewise-linear transient integrator ([`transient`]).
#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod analytic;
pub mod analyzer;
pub mod design;
pub mod params;
pub mod pwm;
pub mod transient;
pub mod waveform;

pub use analytic::{solve_steady_state, AnalyticError, SteadyStateSolution};
pub use analyzer::{analyze, compare_to_reference, AnalyzeError, ReferenceTable, SoftSwitchReport, Thresholds};
pub use params::{ConverterParams, DerivedConstants, ParamsError};
pub use pwm::{build_schedule, GateSchedule};
pub use transient::{simulate, simulate_periods, SimConfig, SimError};
pub use waveform::{Device, Event, EventKind, WaveformSet};
