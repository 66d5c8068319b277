//! Piecewise-linear network equations for one conduction topology.
//!
//! State `x = [i1, i2, vo, vc1, vc2, va, vb]`: leakage currents, the Vo1 rail, the primary
//! snubber voltages and the two secondary leg midpoints. The input current is `i1 + i2`.
//! Each topology yields `z = Z x + zc` for the unknown vector
//! `z = [di1, di2, dvo, dvc1, dvc2, dva, dvb, vA, vB, va, vb, vT, phi]`.

use nalgebra::{Schur, SMatrix, SVector};

use crate::params::ConverterParams;
use crate::waveform::*;

pub(crate) const NX: usize = 7;
const NZ: usize = 13;

pub(crate) type State = SVector<f64, NX>;
pub(crate) type Aug = SMatrix<f64, 8, 8>;

pub(crate) const I1: usize = 0;
pub(crate) const I2: usize = 1;
pub(crate) const VO: usize = 2;
pub(crate) const VC1: usize = 3;
pub(crate) const XA: usize = 5;

const DI1: usize = 0;
const DI2: usize = 1;
const DVO: usize = 2;
const DVC1: usize = 3;
const DVA: usize = 5;
const DVB: usize = 6;
const VA: usize = 7;
const VB: usize = 8;
const VAA: usize = 9;
const VBA: usize = 10;
const VT: usize = 11;
const PHI: usize = 12;

/// Number of cached binary sub-steps `h0 / 2^k`.
pub(crate) const LEVELS: usize = 52;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Leg {
    Top,
    Bottom,
    Float,
}

/// Conduction state: primary switch conducting (channel or diode) and secondary leg clamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Topology {
    pub prim: [bool; 2],
    pub leg: [Leg; 2],
}

impl Topology {
    pub fn key(&self) -> u8 {
        let l = |x: Leg| x as u8;
        self.prim[0] as u8 | (self.prim[1] as u8) << 1 | l(self.leg[0]) << 2 | l(self.leg[1]) << 4
    }

    /// Number of differing elements, used to prefer minimal changes.
    pub fn distance(&self, o: &Topology) -> usize {
        (self.prim[0] != o.prim[0]) as usize
            + (self.prim[1] != o.prim[1]) as usize
            + (self.leg[0] != o.leg[0]) as usize
            + (self.leg[1] != o.leg[1]) as usize
    }
}

/// Affine function `w . x + w0` of the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Lin {
    pub w: State,
    pub w0: f64,
}

impl Lin {
    pub fn state(k: usize) -> Self {
        let mut w = State::zeros();
        w[k] = 1.0;
        Lin { w, w0: 0.0 }
    }

    pub fn eval(&self, x: &State) -> f64 {
        self.w.dot(x) + self.w0
    }

    pub fn scale(self, s: f64) -> Self {
        Lin { w: self.w * s, w0: self.w0 * s }
    }

    pub fn add(self, o: Lin) -> Self {
        Lin { w: self.w + o.w, w0: self.w0 + o.w0 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Network {
    pub topo: Topology,
    z: SMatrix<f64, NZ, NX>,
    zc: SVector<f64, NZ>,
    pub a: SMatrix<f64, NX, NX>,
    pub b: State,
    pub h0: f64,
    /// `exp(Ahat h0 / 2^k)` for the augmented affine system.
    pub phi: [Aug; LEVELS],
    n: f64,
    csn: [f64; 6],
    l: [f64; 3],
}

impl Network {
    /// Builds the network, or `None` when the topology has no unique solution.
    pub fn build(p: &ConverterParams, topo: Topology, max_step: f64) -> Option<Self> {
        let mut m = SMatrix::<f64, NZ, NZ>::zeros();
        let mut nn = SMatrix::<f64, NZ, NX>::zeros();
        let mut c = SVector::<f64, NZ>::zeros();
        let n = p.n;
        let h = 0.5 * n;
        let cs = p.csn;

        m[(0, DI1)] = p.l;
        m[(0, DI2)] = p.l;
        m[(0, VT)] = 1.0;
        nn[(0, VO)] = -1.0;
        c[0] = p.vi;

        m[(1, DI1)] = p.llk1;
        m[(1, PHI)] = -n;
        m[(1, VA)] = 1.0;
        m[(1, VT)] = -1.0;

        m[(2, DI2)] = p.llk2;
        m[(2, PHI)] = n;
        m[(2, VB)] = 1.0;
        m[(2, VT)] = -1.0;

        m[(3, VAA)] = 1.0;
        m[(3, VBA)] = -1.0;
        m[(3, PHI)] = -2.0;

        for k in 0..2 {
            let r = 4 + 2 * k;
            let (di, dvc, v, vc, ik) = (DI1 + k, DVC1 + k, VA + k, VC1 + k, I1 + k);
            if topo.prim[k] {
                m[(r, v)] = 1.0;
                m[(r + 1, dvc)] = 1.0;
            } else if cs[k] > 0.0 {
                m[(r, v)] = 1.0;
                nn[(r, vc)] = 1.0;
                m[(r + 1, dvc)] = cs[k];
                nn[(r + 1, ik)] = 1.0;
            } else {
                m[(r, di)] = 1.0;
                m[(r + 1, dvc)] = 1.0;
            }
        }

        let ca = cs[2] + cs[3];
        let cb = cs[4] + cs[5];
        let both_open = topo.leg == [Leg::Float, Leg::Float] && ca == 0.0 && cb == 0.0;
        // Leg a: top device S3, bottom S4; i_sec leaves node a into the winding.
        match topo.leg[0] {
            Leg::Top => {
                m[(8, VAA)] = 1.0;
                nn[(8, VO)] = 1.0;
                m[(9, DVA)] = 1.0;
                m[(9, DVO)] = -1.0;
            }
            Leg::Bottom => {
                m[(8, VAA)] = 1.0;
                m[(9, DVA)] = 1.0;
            }
            Leg::Float if ca > 0.0 => {
                m[(8, VAA)] = 1.0;
                nn[(8, XA)] = 1.0;
                m[(9, DVA)] = ca;
                m[(9, DVO)] = -cs[2];
                nn[(9, I1)] = -h;
                nn[(9, I2)] = h;
            }
            Leg::Float => {
                m[(8, DI1)] = h;
                m[(8, DI2)] = -h;
                m[(9, DVA)] = 1.0;
            }
        }
        // Leg b: top device S5, bottom S6; i_sec enters node b from the winding.
        match topo.leg[1] {
            Leg::Top => {
                m[(10, VBA)] = 1.0;
                nn[(10, VO)] = 1.0;
                m[(11, DVB)] = 1.0;
                m[(11, DVO)] = -1.0;
            }
            Leg::Bottom => {
                m[(10, VBA)] = 1.0;
                m[(11, DVB)] = 1.0;
            }
            Leg::Float if cb > 0.0 => {
                m[(10, VBA)] = 1.0;
                nn[(10, XA + 1)] = 1.0;
                m[(11, DVB)] = cb;
                m[(11, DVO)] = -cs[4];
                nn[(11, I1)] = h;
                nn[(11, I2)] = -h;
            }
            Leg::Float if both_open => {
                m[(10, VAA)] = 1.0;
                m[(10, VBA)] = 1.0;
                nn[(10, VO)] = 1.0;
                m[(11, DVB)] = 1.0;
            }
            Leg::Float => {
                m[(10, DI1)] = h;
                m[(10, DI2)] = -h;
                m[(11, DVB)] = 1.0;
            }
        }

        m[(12, DVO)] = p.output_capacitance();
        nn[(12, I1)] = 1.0;
        nn[(12, I2)] = 1.0;
        nn[(12, VO)] = -p.output_conductance();
        match topo.leg[0] {
            Leg::Top => {
                m[(12, DVO)] += cs[3];
                nn[(12, I1)] -= h;
                nn[(12, I2)] += h;
            }
            Leg::Bottom => m[(12, DVO)] += cs[2],
            Leg::Float => {
                m[(12, DVA)] -= cs[2];
                m[(12, DVO)] += cs[2];
            }
        }
        match topo.leg[1] {
            Leg::Top => {
                m[(12, DVO)] += cs[5];
                nn[(12, I1)] += h;
                nn[(12, I2)] -= h;
            }
            Leg::Bottom => m[(12, DVO)] += cs[4],
            Leg::Float => {
                m[(12, DVB)] -= cs[4];
                m[(12, DVO)] += cs[4];
            }
        }

        let lu = m.lu();
        if !lu.is_invertible() {
            return None;
        }
        let z = lu.solve(&nn)?;
        let zc = lu.solve(&c)?;
        if z.iter().chain(zc.iter()).any(|v| !v.is_finite()) {
            return None;
        }
        let a: SMatrix<f64, NX, NX> = z.fixed_rows::<NX>(0).into_owned();
        let b: State = zc.fixed_rows::<NX>(0).into_owned();

        let lambda = spectral_radius(&a);
        let h0 = if lambda > 0.0 { max_step.min(0.5 / lambda) } else { max_step };
        let mut ahat = Aug::zeros();
        ahat.fixed_view_mut::<NX, NX>(0, 0).copy_from(&a);
        ahat.fixed_view_mut::<NX, 1>(0, NX).copy_from(&b);
        let phi = core::array::from_fn(|k| expm(&(ahat * (h0 / libm::ldexp(1.0, k as i32)))));

        Some(Network { topo, z, zc, a, b, h0, phi, n, csn: cs, l: [p.l, p.llk1, p.llk2] })
    }

    fn row(&self, k: usize) -> Lin {
        Lin { w: self.z.row(k).transpose(), w0: self.zc[k] }
    }

    pub fn deriv(&self, x: &State) -> State {
        self.a * x + self.b
    }

    /// Advances the state by `dt` using the cached binary sub-steps.
    pub fn advance(&self, x: &State, dt: f64) -> State {
        let mut y = x.push(1.0);
        let mut r = dt;
        while r >= self.h0 {
            y = self.phi[0] * y;
            r -= self.h0;
        }
        let mut hk = self.h0;
        for k in 1..LEVELS {
            hk *= 0.5;
            if r >= hk {
                y = self.phi[k] * y;
                r -= hk;
            }
        }
        y.fixed_rows::<NX>(0).into_owned()
    }

    pub fn i_sec(&self) -> Lin {
        Lin::state(I1).add(Lin::state(I2).scale(-1.0)).scale(0.5 * self.n)
    }

    /// Voltage across primary switch `k`.
    pub fn v_prim(&self, k: usize) -> Lin {
        self.row(VA + k)
    }

    pub fn v_leg(&self, k: usize) -> Lin {
        self.row(VAA + k)
    }

    /// Forward current of the conducting device in leg `k` (top or bottom).
    pub fn leg_current(&self, k: usize) -> Lin {
        let dvo = self.row(DVO);
        let i_sec = self.i_sec();
        let c = &self.csn;
        match (k, self.topo.leg[k]) {
            (0, Leg::Top) => i_sec.add(dvo.scale(c[3])),
            (0, Leg::Bottom) => dvo.scale(c[2]).add(i_sec.scale(-1.0)),
            (1, Leg::Top) => dvo.scale(c[5]).add(i_sec.scale(-1.0)),
            (1, Leg::Bottom) => dvo.scale(c[4]).add(i_sec),
            _ => Lin { w: State::zeros(), w0: 0.0 },
        }
    }

    /// Switch index (0-based) of the conducting device in leg `k`, if clamped.
    pub fn leg_device(&self, k: usize) -> Option<usize> {
        match (k, self.topo.leg[k]) {
            (_, Leg::Float) => None,
            (0, Leg::Top) => Some(2),
            (0, Leg::Bottom) => Some(3),
            (_, Leg::Top) => Some(4),
            _ => Some(5),
        }
    }

    /// Every sampled channel at state `x`.
    pub fn channels(&self, x: &State) -> [f64; N_CHANNELS] {
        let d = self.deriv(x);
        let mut v = [0.0; N_CHANNELS];
        let (i1, i2, vo) = (x[I1], x[I2], x[VO]);
        v[I_L] = i1 + i2;
        v[I_LK1] = i1;
        v[I_LK2] = i2;
        for (k, ik) in [i1, i2].into_iter().enumerate() {
            if self.topo.prim[k] {
                v[I_S + k] = ik.max(0.0);
                v[I_D + k] = (-ik).max(0.0);
            } else {
                v[V_S + k] = self.v_prim(k).eval(x);
            }
        }
        let va = self.v_leg(0).eval(x);
        let vb = self.v_leg(1).eval(x);
        v[V_S + 2] = vo - va;
        v[V_S + 3] = va;
        v[V_S + 4] = vo - vb;
        v[V_S + 5] = vb;
        for k in 0..2 {
            if let Some(s) = self.leg_device(k) {
                let i = self.leg_current(k).eval(x);
                v[I_S + s] = i.max(0.0);
                v[I_D + s] = (-i).max(0.0);
            }
        }
        v[V_CO1] = vo;
        v[V_CO2] = 0.5 * vo;
        v[V_L] = self.l[0] * (d[I1] + d[I2]);
        v[V_LK1] = self.l[1] * d[I1];
        v[V_LK2] = self.l[2] * d[I2];
        v
    }
}

/// Matrix exponential by scaling and squaring with a diagonal (6, 6) Pade approximant.
pub(crate) fn expm(a: &Aug) -> Aug {
    const C: [f64; 7] = [1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15_840.0, 1.0 / 665_280.0];
    let norm = (0..8).map(|j| a.column(j).iter().map(|v| libm::fabs(*v)).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm > 0.5 { libm::ceil(libm::log2(norm / 0.5)) as i32 } else { 0 };
    let x = a * libm::ldexp(1.0, -s);
    let id = Aug::identity();
    let (mut num, mut den) = (id, id);
    let mut pow = id;
    for (k, c) in C.iter().enumerate().skip(1) {
        pow *= x;
        num += pow * *c;
        den += pow * if k % 2 == 0 { *c } else { -*c };
    }
    let mut e = den.lu().solve(&num).unwrap_or(id);
    for _ in 0..s {
        e = e * e;
    }
    e
}

fn spectral_radius(a: &SMatrix<f64, NX, NX>) -> f64 {
    match Schur::try_new(*a, f64::EPSILON, 10_000) {
        Some(s) => s.complex_eigenvalues().iter().fold(0.0, |m: f64, z| m.max(libm::hypot(z.re, z.im))),
        None => a.iter().fold(0.0, |m: f64, v| m.max(libm::fabs(*v))) * NX as f64,
    }
}

/// Inductance matrix of `(i1, i2)`.
fn inductance(p: &ConverterParams) -> [[f64; 2]; 2] {
    [[p.l + p.llk1, p.l], [p.l, p.l + p.llk2]]
}

/// Post-switching state consistent with `topo`, with the energy lost in the jump.
///
/// Currents constrained to zero are removed by a flux-conserving projection in the
/// inductance metric; capacitors shorted by the new topology are discharged.
pub(crate) fn project(p: &ConverterParams, topo: &Topology, x: &State) -> Option<(State, f64)> {
    let mut y = *x;
    let mut lost = 0.0;
    let cs = p.csn;
    let mut rows: [[f64; 2]; 3] = [[0.0; 2]; 3];
    let mut nr = 0;
    for k in 0..2 {
        if topo.prim[k] {
            lost += 0.5 * cs[k] * y[VC1 + k] * y[VC1 + k];
            y[VC1 + k] = 0.0;
        } else if cs[k] == 0.0 {
            y[VC1 + k] = 0.0;
            rows[nr][k] = 1.0;
            nr += 1;
        }
    }
    let caps = [(cs[2], cs[3]), (cs[4], cs[5])];
    let mut open = false;
    for k in 0..2 {
        let (ct, cbot) = caps[k];
        let vo = y[VO];
        let v = y[XA + k];
        let before = 0.5 * ct * (vo - v) * (vo - v) + 0.5 * cbot * v * v;
        let nv = match topo.leg[k] {
            Leg::Top => vo,
            Leg::Bottom => 0.0,
            Leg::Float if ct + cbot > 0.0 => v.clamp(0.0, vo.max(0.0)),
            Leg::Float => {
                open = true;
                0.0
            }
        };
        y[XA + k] = nv;
        lost += before - (0.5 * ct * (vo - nv) * (vo - nv) + 0.5 * cbot * nv * nv);
    }
    if open {
        rows[nr] = [1.0, -1.0];
        nr += 1;
    }

    let m = inductance(p);
    let i = [y[I1], y[I2]];
    let new = match nr {
        0 => i,
        1 => {
            let c = rows[0];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det == 0.0 {
                return None;
            }
            let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
            let mic = [inv[0][0] * c[0] + inv[0][1] * c[1], inv[1][0] * c[0] + inv[1][1] * c[1]];
            let denom = c[0] * mic[0] + c[1] * mic[1];
            let viol = c[0] * i[0] + c[1] * i[1];
            [i[0] - mic[0] * viol / denom, i[1] - mic[1] * viol / denom]
        }
        _ => [0.0, 0.0],
    };
    let di = [new[0] - i[0], new[1] - i[1]];
    lost += 0.5
        * (di[0] * (m[0][0] * di[0] + m[0][1] * di[1]) + di[1] * (m[1][0] * di[0] + m[1][1] * di[1]));
    y[I1] = new[0];
    y[I2] = new[1];
    Some((y, lost))
}

/// Energy stored in every reactive element.
pub(crate) fn stored_energy(p: &ConverterParams, x: &State) -> f64 {
    let il = x[I1] + x[I2];
    let vo = x[VO];
    let cs = p.csn;
    0.5 * p.l * il * il
        + 0.5 * p.llk1 * x[I1] * x[I1]
        + 0.5 * p.llk2 * x[I2] * x[I2]
        + 0.5 * p.output_capacitance() * vo * vo
        + 0.5 * cs[0] * x[VC1] * x[VC1]
        + 0.5 * cs[1] * x[VC1 + 1] * x[VC1 + 1]
        + (0..2)
            .map(|k| {
                let v = x[XA + k];
                0.5 * cs[2 + 2 * k] * (vo - v) * (vo - v) + 0.5 * cs[3 + 2 * k] * v * v
            })
            .sum::<f64>()
}
