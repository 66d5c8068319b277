//! Closed-form design equations and their inverses.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("domain violation: {0}")]
    Domain(&'static str),
    #[error("gain unattainable: Vi/(2 Vo2) - 1 = {0} must lie in (0, n/2)")]
    GainUnattainable(f64),
    #[error("commutation exceeds half-period: D_ext = {d_ext} > D - 0.5 = {window}")]
    CommutationExceedsHalfPeriod { d_ext: f64, window: f64 },
}

/// Targets and operating values for a design pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignInputs {
    pub vi: f64,
    pub vo2_target: f64,
    pub n: f64,
    pub d: f64,
    pub i_l: f64,
    pub delta_ii: f64,
    pub fs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignResult {
    /// Vo2 / Vi.
    pub gain: f64,
    pub l: f64,
    pub llk_each: f64,
    pub d_ext: f64,
}

impl DesignResult {
    pub fn l_lkt(&self) -> f64 {
        2.0 * self.llk_each
    }
}

/// Outcome of [`extended_duty`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedDuty {
    pub d_ext: f64,
    /// The raw value was negative and has been clamped to 0.
    pub clamped: bool,
    /// The value sits at its maximum D - 0.5 (no commutation at all).
    pub saturated: bool,
}

fn positive(name: &'static str, v: f64) -> Result<(), DesignError> {
    if v.is_finite() && v > 0.0 { Ok(()) } else { Err(DesignError::Domain(name)) }
}

fn duty_open(d: f64) -> Result<(), DesignError> {
    if d > 0.5 && d < 1.0 { Ok(()) } else { Err(DesignError::Domain("D must lie in (0.5, 1)")) }
}

/// M = Vo2/Vi = 1 / (2 (n (1 - D) + 1)).
///
/// Accepts the closed limits n = 0 and D in [0, 1].
pub fn voltage_gain(n: f64, d: f64) -> Result<f64, DesignError> {
    if !(n.is_finite() && n >= 0.0) {
        return Err(DesignError::Domain("n must be non-negative"));
    }
    if !(0.0..=1.0).contains(&d) {
        return Err(DesignError::Domain("D must lie in [0, 1]"));
    }
    Ok(1.0 / (2.0 * (n * (1.0 - d) + 1.0)))
}

/// Gain including the extended diode conduction D_ext.
pub fn voltage_gain_extended(n: f64, d: f64, d_ext: f64) -> Result<f64, DesignError> {
    voltage_gain(n, d + d_ext)
}

/// Inverse of [`voltage_gain`] in D.
pub fn duty_for_gain(n: f64, vi: f64, vo2: f64) -> Result<f64, DesignError> {
    positive("n", n)?;
    positive("Vi", vi)?;
    positive("Vo2", vo2)?;
    let x = vi / (2.0 * vo2) - 1.0;
    if !(x > 0.0 && x < 0.5 * n) {
        return Err(DesignError::GainUnattainable(x));
    }
    Ok(1.0 - x / n)
}

/// Per-winding leakage that completes the commutation exactly at the end of the overlap.
pub fn leakage_for_zcs(n: f64, vo2: f64, d: f64, i_l: f64, fs: f64) -> Result<f64, DesignError> {
    positive("n", n)?;
    positive("Vo2", vo2)?;
    positive("I_L", i_l)?;
    positive("fs", fs)?;
    if !(0.5..1.0).contains(&d) {
        return Err(DesignError::Domain("D must lie in [0.5, 1)"));
    }
    Ok(n * vo2 * (d - 0.5) / (2.0 * i_l * fs))
}

/// Input inductance for a peak-to-peak input ripple `delta_ii`.
pub fn input_inductance(n: f64, d: f64, delta_ii: f64, fs: f64, vi: f64) -> Result<f64, DesignError> {
    positive("n", n)?;
    positive("delta_Ii", delta_ii)?;
    positive("fs", fs)?;
    positive("Vi", vi)?;
    if !(0.5..1.0).contains(&d) {
        return Err(DesignError::Domain("D must lie in [0.5, 1)"));
    }
    Ok(3.0 * n * (d - 0.5) * vi / (8.0 * delta_ii * fs * (n * (1.0 - d) + 1.0)))
}

/// Extra diode-conduction duty left over after the commutation ramp, clamped at 0.
pub fn extended_duty(d: f64, i_l: f64, llk_each: f64, n: f64, vo2: f64, fs: f64) -> Result<ExtendedDuty, DesignError> {
    duty_open(d)?;
    positive("n", n)?;
    positive("Vo2", vo2)?;
    positive("fs", fs)?;
    if !(i_l.is_finite() && i_l >= 0.0) {
        return Err(DesignError::Domain("I_L must be non-negative"));
    }
    if !(llk_each.is_finite() && llk_each >= 0.0) {
        return Err(DesignError::Domain("LLK must be non-negative"));
    }
    let window = d - 0.5;
    let raw = window - i_l * 2.0 * llk_each * fs / (n * vo2);
    if raw > window {
        return Err(DesignError::CommutationExceedsHalfPeriod { d_ext: raw, window });
    }
    let d_ext = raw.max(0.0);
    Ok(ExtendedDuty { d_ext, clamped: raw < 0.0, saturated: d_ext >= window })
}

/// Total leakage L_LKT that yields a given D_ext; exact inverse of [`extended_duty`].
pub fn total_leakage(n: f64, vo2: f64, d: f64, d_ext: f64, i_l: f64, fs: f64) -> Result<f64, DesignError> {
    duty_open(d)?;
    positive("n", n)?;
    positive("Vo2", vo2)?;
    positive("I_L", i_l)?;
    positive("fs", fs)?;
    if !(0.0..=d - 0.5).contains(&d_ext) {
        return Err(DesignError::Domain("D_ext must lie in [0, D - 0.5]"));
    }
    Ok(n * vo2 * (d - 0.5 - d_ext) / (i_l * fs))
}

/// Full design pass: gain from D, leakage for ZCS, input inductor for the ripple target.
pub fn design(inp: &DesignInputs) -> Result<DesignResult, DesignError> {
    positive("Vi", inp.vi)?;
    positive("Vo2", inp.vo2_target)?;
    duty_open(inp.d)?;
    let gain = voltage_gain(inp.n, inp.d)?;
    let llk_each = leakage_for_zcs(inp.n, inp.vo2_target, inp.d, inp.i_l, inp.fs)?;
    let l = input_inductance(inp.n, inp.d, inp.delta_ii, inp.fs, inp.vi)?;
    let d_ext = extended_duty(inp.d, inp.i_l, llk_each, inp.n, inp.vo2_target, inp.fs)?.d_ext;
    Ok(DesignResult { gain, l, llk_each, d_ext })
}
