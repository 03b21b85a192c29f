//! Spin-3/2 quadrupole hamiltonian `H = (B̂·J)²` (units μ|B|² = 1), its
//! instantaneous eigenframes and the Wilczek-Zee connection of the m = ±1/2
//! doublet in the north, south and equator gauges.
//!
//! Basis order is m = 3/2, 1/2, −1/2, −3/2. The doublet is ordered
//! (+1/2, −1/2), so the su(2) components of a connection are read with
//! σ₃ = diag(1, −1) in that order.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::su2::{AlgebraVector, Frame};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Default finite-difference step for [`connection_numeric`].
pub const DEFAULT_FD_STEP: f64 = 1e-5;

pub type StateVector = Vector4<Complex64>;
pub type Operator = Matrix4<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Spin-3/2 angular momentum matrices in the J_z eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators32 {
    pub jx: Operator,
    pub jy: Operator,
    pub jz: Operator,
}

impl SpinOperators32 {
    pub fn new() -> Self {
        let ms = [1.5, 0.5, -0.5, -1.5];
        let mut jp = Operator::zeros();
        // ⟨m+1|J₊|m⟩ = √(j(j+1) − m(m+1))
        for i in 1..4 {
            let m: f64 = ms[i];
            jp[(i - 1, i)] = c((3.75 - m * (m + 1.0)).sqrt());
        }
        let jm = jp.adjoint();
        let jx = (jp + jm) * c(0.5);
        let jy = (jp - jm) * Complex64::new(0.0, -0.5);
        let jz = Operator::from_diagonal(&Vector4::from_iterator(ms.iter().map(|&m| c(m))));
        Self { jx, jy, jz }
    }

    /// `n·J` for a (not necessarily unit) 3-vector `n`.
    pub fn along(&self, n: [f64; 3]) -> Operator {
        self.jx * c(n[0]) + self.jy * c(n[1]) + self.jz * c(n[2])
    }
}

impl Default for SpinOperators32 {
    fn default() -> Self {
        Self::new()
    }
}

/// Direction B̂ of the field in polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldDirection {
    pub theta: f64,
    pub phi: f64,
}

impl FieldDirection {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain {
                what: "polar angle",
                value: theta,
            });
        }
        Ok(Self { theta, phi })
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Local choice of eigenframe phases for the ±1/2 doublet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    /// Regular everywhere except the south pole.
    North,
    /// North frame times ρ₁ = e^{−iΦσ₃}; regular except at the north pole.
    South,
    /// North frame times ρ₂ = e^{−iΦσ₃/2}; locally defined away from both poles.
    Equator,
}

impl Gauge {
    /// True when Θ lies on this gauge's chart.
    pub fn covers(&self, theta: f64) -> bool {
        match self {
            Gauge::North => (0.0..PI).contains(&theta),
            Gauge::South => theta > 0.0 && theta <= PI,
            Gauge::Equator => theta > 0.0 && theta < PI,
        }
    }

    fn check(&self, theta: f64) -> Result<()> {
        if self.covers(theta) {
            Ok(())
        } else {
            Err(Error::OffChart {
                gauge: *self,
                theta,
            })
        }
    }

    /// k in ρ = e^{−ikΦσ₃} relating this gauge's doublet to the north one.
    fn twist(&self) -> f64 {
        match self {
            Gauge::North => 0.0,
            Gauge::South => 1.0,
            Gauge::Equator => 0.5,
        }
    }
}

/// `H = (B̂·J)²`.
pub fn hamiltonian(dir: &FieldDirection) -> Operator {
    let bj = SpinOperators32::new().along(dir.unit_vector());
    bj * bj
}

/// Instantaneous eigenvectors, indexed like the basis (3/2, 1/2, −1/2, −3/2).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenFrame {
    pub states: [StateVector; 4],
    pub gauge: Gauge,
    pub dir: FieldDirection,
}

impl EigenFrame {
    pub fn plus_half(&self) -> &StateVector {
        &self.states[1]
    }

    pub fn minus_half(&self) -> &StateVector {
        &self.states[2]
    }

    /// 4×2 matrix with columns |+1/2⟩, |−1/2⟩.
    pub fn doublet(&self) -> nalgebra::Matrix4x2<Complex64> {
        nalgebra::Matrix4x2::from_columns(&[self.states[1], self.states[2]])
    }

    /// 4×2 matrix with columns |3/2⟩, |−3/2⟩.
    pub fn outer_doublet(&self) -> nalgebra::Matrix4x2<Complex64> {
        nalgebra::Matrix4x2::from_columns(&[self.states[0], self.states[3]])
    }

    pub fn matrix(&self) -> Operator {
        Operator::from_columns(&self.states)
    }
}

/// Wigner d-matrix entries of e^{−iΘJ_y} for j = 3/2, column `col`.
fn wigner_column(theta: f64, col: usize) -> [f64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    match col {
        0 => [c * c * c, SQRT3 * c * c * s, SQRT3 * c * s * s, s * s * s],
        // closed forms of the doublet, rewritten without csc(Θ/2):
        // sin²Θ / sin(Θ/2) = 4 sin(Θ/2) cos²(Θ/2)
        1 => [
            -SQRT3 * c * c * s,
            c * (3.0 * c * c - 2.0),
            s * (3.0 * c * c - 1.0),
            SQRT3 * c * s * s,
        ],
        2 => [
            SQRT3 * c * s * s,
            -s * (3.0 * c * c - 1.0),
            c * (3.0 * c * c - 2.0),
            SQRT3 * c * c * s,
        ],
        _ => [-s * s * s, SQRT3 * c * s * s, -SQRT3 * c * c * s, c * c * c],
    }
}

/// Eigenframe obtained by rotating the J_z eigenbasis about
/// (−sinΦ, cosΦ, 0) by Θ, with the doublet rephased by the gauge factor.
pub fn eigenframe(dir: &FieldDirection, gauge: Gauge) -> Result<EigenFrame> {
    gauge.check(dir.theta)?;
    let ms = [1.5, 0.5, -0.5, -1.5];
    let k = gauge.twist();
    let states = std::array::from_fn(|col| {
        let d = wigner_column(dir.theta, col);
        let mcol = ms[col];
        // doublet columns pick up e^{∓ikΦ} from ρ = e^{−ikΦσ₃}
        let g = match col {
            1 => -k,
            2 => k,
            _ => 0.0,
        };
        Vector4::from_iterator((0..4).map(|row| {
            Complex64::from_polar(d[row], (mcol - ms[row] + g) * dir.phi)
        }))
    });
    Ok(EigenFrame {
        states,
        gauge,
        dir: *dir,
    })
}

/// su(2) coefficients of the doublet connection `A = aΘ·σ dΘ + aΦ·σ dΦ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionValue {
    pub a_theta: AlgebraVector,
    pub a_phi: AlgebraVector,
    pub gauge: Gauge,
    pub dir: FieldDirection,
}

impl ConnectionValue {
    fn new(a_theta: [f64; 3], a_phi: [f64; 3], gauge: Gauge, dir: FieldDirection) -> Self {
        Self {
            a_theta: AlgebraVector::base(a_theta),
            a_phi: AlgebraVector::base(a_phi),
            gauge,
            dir,
        }
    }

    /// Largest componentwise difference to another connection value.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            worst = worst
                .max((self.a_theta.v[k] - other.a_theta.v[k]).abs())
                .max((self.a_phi.v[k] - other.a_phi.v[k]).abs());
        }
        worst
    }
}

/// The printed closed forms of A_N, A_S and A_E.
pub fn connection_closed_form(dir: &FieldDirection, gauge: Gauge) -> Result<ConnectionValue> {
    gauge.check(dir.theta)?;
    let (st, ct) = dir.theta.sin_cos();
    let (sp, cp) = dir.phi.sin_cos();
    let (a_theta, a_phi) = match gauge {
        Gauge::North => ([-sp, cp, 0.0], [-st * cp, -st * sp, 0.5 * (ct - 1.0)]),
        Gauge::South => ([sp, cp, 0.0], [-st * cp, st * sp, 0.5 * (ct + 1.0)]),
        Gauge::Equator => ([0.0, 1.0, 0.0], [-st, 0.0, 0.5 * ct]),
    };
    Ok(ConnectionValue::new(a_theta, a_phi, gauge, *dir))
}

/// Full 4×4 connection matrices `i⟨a|∂|b⟩` from finite differences.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionMatrices {
    pub d_theta: Operator,
    pub d_phi: Operator,
    pub gauge: Gauge,
}

impl ConnectionMatrices {
    /// max |A − A†| over both components.
    pub fn hermiticity_defect(&self) -> f64 {
        let a = self.d_theta - self.d_theta.adjoint();
        let b = self.d_phi - self.d_phi.adjoint();
        a.iter().chain(b.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest off-diagonal coupling inside the ±3/2 doublet.
    pub fn outer_offdiagonal(&self) -> f64 {
        [self.d_theta, self.d_phi]
            .iter()
            .map(|m| m[(0, 3)].norm().max(m[(3, 0)].norm()))
            .fold(0.0, f64::max)
    }

    /// Largest matrix element coupling the two doublets.
    pub fn interdoublet_coupling(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for m in [&self.d_theta, &self.d_phi] {
            for &i in &[0usize, 3] {
                for &j in &[1usize, 2] {
                    worst = worst.max(m[(i, j)].norm()).max(m[(j, i)].norm());
                }
            }
        }
        worst
    }

    pub fn doublet_value(&self, dir: &FieldDirection) -> ConnectionValue {
        ConnectionValue::new(
            su2_components(&self.d_theta),
            su2_components(&self.d_phi),
            self.gauge,
            *dir,
        )
    }
}

/// Pauli components of the ±1/2 block, a_k = ½ Re Tr(A σ_k).
fn su2_components(a: &Operator) -> [f64; 3] {
    let b = Matrix2::new(a[(1, 1)], a[(1, 2)], a[(2, 1)], a[(2, 2)]);
    [
        0.5 * (b[(0, 1)] + b[(1, 0)]).re,
        0.5 * (b[(1, 0)] - b[(0, 1)]).im,
        0.5 * (b[(0, 0)] - b[(1, 1)]).re,
    ]
}

fn shifted(dir: &FieldDirection, dtheta: f64, dphi: f64) -> FieldDirection {
    FieldDirection {
        theta: dir.theta + dtheta,
        phi: dir.phi + dphi,
    }
}

fn frame_derivative(dir: &FieldDirection, gauge: Gauge, h: f64, wrt_theta: bool) -> Result<Operator> {
    let (dt, dp) = if wrt_theta { (h, 0.0) } else { (0.0, h) };
    let fwd = eigenframe(&shifted(dir, dt, dp), gauge)?.matrix();
    let bwd = eigenframe(&shifted(dir, -dt, -dp), gauge)?.matrix();
    Ok((fwd - bwd) * c(0.5 / h))
}

/// Central-difference connection matrices at step `h`.
pub fn connection_matrices_numeric(
    dir: &FieldDirection,
    gauge: Gauge,
    h: f64,
) -> Result<ConnectionMatrices> {
    if !(h > 0.0 && h <= 1e-3) {
        return Err(Error::Domain {
            what: "finite-difference step",
            value: h,
        });
    }
    gauge.check(dir.theta)?;
    let b = eigenframe(dir, gauge)?.matrix();
    let ib = b.adjoint() * Complex64::i();
    Ok(ConnectionMatrices {
        d_theta: ib * frame_derivative(dir, gauge, h, true)?,
        d_phi: ib * frame_derivative(dir, gauge, h, false)?,
        gauge,
    })
}

/// Doublet connection from central differences; error O(h²).
pub fn connection_numeric(dir: &FieldDirection, gauge: Gauge, h: f64) -> Result<ConnectionValue> {
    Ok(connection_matrices_numeric(dir, gauge, h)?.doublet_value(dir))
}

/// Richardson combination (4D(h/2) − D(h))/3 of two central differences.
pub fn connection_richardson(dir: &FieldDirection, gauge: Gauge, h: f64) -> Result<ConnectionMatrices> {
    let coarse = connection_matrices_numeric(dir, gauge, h)?;
    let fine = connection_matrices_numeric(dir, gauge, h / 2.0)?;
    let mix = |f: Operator, g: Operator| (f * c(4.0) - g) * c(1.0 / 3.0);
    Ok(ConnectionMatrices {
        d_theta: mix(fine.d_theta, coarse.d_theta),
        d_phi: mix(fine.d_phi, coarse.d_phi),
        gauge,
    })
}

/// Gauge factors relating the three charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaugeFactor {
    /// ρ₁ = e^{−iΦσ₃}: north → south.
    Rho1,
    /// ρ₂ = e^{−iΦσ₃/2}: north → equator.
    Rho2,
    /// ρ₁⁻¹: south → north.
    Rho1Inverse,
    /// ρ₂⁻¹: equator → north.
    Rho2Inverse,
}

impl GaugeFactor {
    fn name(&self) -> &'static str {
        match self {
            GaugeFactor::Rho1 => "rho1",
            GaugeFactor::Rho2 => "rho2",
            GaugeFactor::Rho1Inverse => "rho1^-1",
            GaugeFactor::Rho2Inverse => "rho2^-1",
        }
    }
}

/// `A′ = ρ†Aρ + iρ†dρ` for ρ = e^{−ikΦσ₃}, which in components rotates the
/// coefficients by −2kΦ about the 3-axis and adds kσ₃ dΦ.
pub fn gauge_transform(a: &ConnectionValue, which: GaugeFactor) -> Result<ConnectionValue> {
    let (from, to, k, inverse) = match which {
        GaugeFactor::Rho1 => (Gauge::North, Gauge::South, 1.0, false),
        GaugeFactor::Rho2 => (Gauge::North, Gauge::Equator, 0.5, false),
        GaugeFactor::Rho1Inverse => (Gauge::South, Gauge::North, 1.0, true),
        GaugeFactor::Rho2Inverse => (Gauge::Equator, Gauge::North, 0.5, true),
    };
    if a.gauge != from {
        return Err(Error::GaugePairing {
            factor: which.name(),
            gauge: a.gauge,
        });
    }
    let phi = a.dir.phi;
    let rot = |v: [f64; 3], angle: f64| {
        let (s, c) = angle.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
    };
    let (a_theta, a_phi) = if inverse {
        let mut p = a.a_phi.v;
        p[2] -= k;
        (rot(a.a_theta.v, 2.0 * k * phi), rot(p, 2.0 * k * phi))
    } else {
        let mut p = rot(a.a_phi.v, -2.0 * k * phi);
        p[2] += k;
        (rot(a.a_theta.v, -2.0 * k * phi), p)
    };
    Ok(ConnectionValue {
        a_theta: AlgebraVector::new(a_theta, Frame::Base),
        a_phi: AlgebraVector::new(a_phi, Frame::Base),
        gauge: to,
        dir: a.dir,
    })
}
