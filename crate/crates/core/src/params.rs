//! Electrical parameters of the converter and the constants derived from them.

use thiserror::Error;

/// Validation failure; names the first invariant that does not hold.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("{0} must be positive and finite")]
    NotPositive(&'static str),
    #[error("{0} must be non-negative and finite")]
    Negative(&'static str),
    #[error("D must exceed 0.5 (got {0})")]
    DutyTooLow(f64),
    #[error("D must be below 1 (got {0})")]
    DutyTooHigh(f64),
    #[error("leakage symmetry violated: LLK1 = {0} H, LLK2 = {1} H")]
    LeakageAsymmetric(f64, f64),
}

/// Every electrical constant of the circuit. SI units throughout.
///
/// Switch-indexed arrays use index 0 for S1 through index 5 for S6.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverterParams {
    /// Input source voltage.
    pub vi: f64,
    /// Input inductance.
    pub l: f64,
    pub llk1: f64,
    pub llk2: f64,
    /// Input capacitance. Carried for completeness; the ideal source makes it inert.
    pub ci: f64,
    pub co1: f64,
    pub co2: f64,
    /// Parasitic capacitance across S1..S6. Zero means an ideal, instantaneous transition.
    pub csn: [f64; 6],
    /// Turns ratio, primary half-winding to secondary half-winding.
    pub n: f64,
    /// Primary switch duty cycle.
    pub d: f64,
    pub r1: f64,
    pub r2: f64,
    /// Switching frequency.
    pub fs: f64,
}

impl ConverterParams {
    /// Reference operating point: 48 V input, n = 8, D = 0.67, 40 kHz, 4.5 ohm loads,
    /// 110.9 uH leakage per winding.
    pub fn reference() -> Self {
        Self {
            vi: 48.0,
            l: 1109e-6,
            llk1: 110.9e-6,
            llk2: 110.9e-6,
            ci: 4700e-6,
            co1: 220e-6,
            co2: 220e-6,
            csn: [0.0; 6],
            n: 8.0,
            d: 0.67,
            r1: 4.5,
            r2: 4.5,
            fs: 40e3,
        }
    }

    pub fn validate(self) -> Result<Self, ParamsError> {
        let positive = [
            ("Vi", self.vi),
            ("L", self.l),
            ("LLK1", self.llk1),
            ("LLK2", self.llk2),
            ("Co1", self.co1),
            ("Co2", self.co2),
            ("n", self.n),
            ("R1", self.r1),
            ("R2", self.r2),
            ("fs", self.fs),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ParamsError::NotPositive(name));
            }
        }
        if !(self.ci.is_finite() && self.ci >= 0.0) {
            return Err(ParamsError::Negative("Ci"));
        }
        const CSN: [&str; 6] = ["Csn1", "Csn2", "Csn3", "Csn4", "Csn5", "Csn6"];
        for (name, c) in CSN.iter().zip(self.csn) {
            if !(c.is_finite() && c >= 0.0) {
                return Err(ParamsError::Negative(name));
            }
        }
        if !self.d.is_finite() || self.d <= 0.5 {
            return Err(ParamsError::DutyTooLow(self.d));
        }
        if self.d >= 1.0 {
            return Err(ParamsError::DutyTooHigh(self.d));
        }
        if libm::fabs(self.llk1 - self.llk2) > 1e-12 * self.llk1.max(self.llk2) {
            return Err(ParamsError::LeakageAsymmetric(self.llk1, self.llk2));
        }
        Ok(self)
    }

    pub fn derive(&self) -> DerivedConstants {
        DerivedConstants {
            period: 1.0 / self.fs,
            l_lkt: self.llk1 + self.llk2,
            duty_secondary: 1.0 - self.d,
        }
    }

    /// Output capacitance referred to the Vo1 rail. The centre tap holds Vo2 = Vo1/2.
    pub fn output_capacitance(&self) -> f64 {
        self.co1 + self.co2 / 4.0
    }

    /// Load conductance referred to the Vo1 rail.
    pub fn output_conductance(&self) -> f64 {
        1.0 / self.r1 + 1.0 / (4.0 * self.r2)
    }

    /// Total load power at a given Vo2.
    pub fn load_power(&self, vo2: f64) -> f64 {
        let vo1 = 2.0 * vo2;
        vo1 * vo1 / self.r1 + vo2 * vo2 / self.r2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// Switching period.
    pub period: f64,
    /// Total leakage inductance LLK1 + LLK2.
    pub l_lkt: f64,
    /// On-fraction of each secondary switch pair.
    pub duty_secondary: f64,
}

impl DerivedConstants {
    /// Gate overlap of S1 and S2 at one commutation, (D - 0.5) T.
    pub fn overlap(&self, d: f64) -> f64 {
        (d - 0.5) * self.period
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_point_is_valid() {
        let p = ConverterParams::reference();
        assert_eq!(p.validate(), Ok(p));
    }

    #[test]
    fn low_duty_is_rejected() {
        let p = ConverterParams { d: 0.4, ..ConverterParams::reference() };
        let err = p.validate().unwrap_err();
        assert_eq!(err, ParamsError::DutyTooLow(0.4));
        assert!(err.to_string().starts_with("D must exceed 0.5"));
    }

    #[test]
    fn asymmetric_leakage_is_rejected() {
        let p = ConverterParams { llk1: 100e-6, llk2: 120e-6, ..ConverterParams::reference() };
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("leakage symmetry violated"));
    }

    #[test]
    fn infinite_load_is_rejected() {
        let p = ConverterParams { r1: f64::INFINITY, r2: f64::INFINITY, ..ConverterParams::reference() };
        assert_eq!(p.validate(), Err(ParamsError::NotPositive("R1")));
    }

    #[test]
    fn negative_snubber_is_rejected() {
        let mut p = ConverterParams::reference();
        p.csn[4] = -1e-12;
        assert_eq!(p.validate(), Err(ParamsError::Negative("Csn5")));
    }

    #[test]
    fn derived_constants() {
        let p = ConverterParams::reference();
        let d = p.derive();
        assert!((d.period - 25e-6).abs() < 1e-18);
        assert!((d.l_lkt - 221.8e-6).abs() < 1e-15);
        assert!((d.duty_secondary - 0.33).abs() < 1e-15);
        assert!(d.duty_secondary < 0.5);
    }

    #[test]
    fn validate_is_idempotent() {
        let p = ConverterParams::reference();
        let once = p.validate().unwrap();
        assert_eq!(once.validate(), Ok(once));
        assert_eq!(p.derive(), once.derive());
    }
}
