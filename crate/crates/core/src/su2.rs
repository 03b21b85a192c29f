//! SU(2) and U(2) group elements in quaternion coordinates, the su(2)
//! exponential and logarithm, bi-invariant distances, and the frame
//! rotations used to diagonalize the holonomy statistics.
//!
//! An SU(2) element is stored as `U = x0·1 + i x·σ` with `x0² + |x|² = 1`;
//! U(2) elements carry an extra global phase, `U = e^{iα}(x0·1 + i x·σ)`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomy::omega;

/// Renormalize a product once its quaternion norm drifts past this.
const RENORM_TOL: f64 = 1e-13;
/// Slack allowed when clamping trace arguments back onto [-1, 1].
const CLAMP_TOL: f64 = 1e-12;

/// 2×2 complex matrix, row major.
pub type Matrix2 = [[Complex64; 2]; 2];

/// Basis of su(2) in which the components of an [`AlgebraVector`] are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Pauli basis (σ₁, σ₂, σ₃).
    Base,
    /// Rotated by η about the 2-axis so that A₀ points along 3′.
    Primed,
    /// (σ₊, σ₀, σ₋) built from the primed basis; stored as primed components.
    Ladder,
    /// Primed basis rotated by πΩ about 3′; axis-aligned with the Λ gaussian.
    Tilded,
}

/// Real 3-vector of su(2) coefficients, tagged with its frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraVector {
    pub v: [f64; 3],
    pub frame: Frame,
}

/// Complex ladder components of a vector with `Λ·σ = Λ₊σ₊ + Λ₀σ₀ + Λ₋σ₋`.
///
/// The ladder basis is normalized so that `Λ² = Λ₊Λ₋ + Λ₀²`, which gives
/// `Λ₊ = Λ₁′ − iΛ₂′` and `Λ₋ = Λ₊*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderComponents {
    pub plus: Complex64,
    pub zero: f64,
    pub minus: Complex64,
}

impl AlgebraVector {
    pub const fn new(v: [f64; 3], frame: Frame) -> Self {
        Self { v, frame }
    }

    pub const fn base(v: [f64; 3]) -> Self {
        Self::new(v, Frame::Base)
    }

    pub const fn zero(frame: Frame) -> Self {
        Self::new([0.0; 3], frame)
    }

    pub fn norm(&self) -> f64 {
        dot(&self.v, &self.v).sqrt()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.v.map(|c| c * k), self.frame)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_frame(other)?;
        Ok(Self::new(
            [
                self.v[0] + other.v[0],
                self.v[1] + other.v[1],
                self.v[2] + other.v[2],
            ],
            self.frame,
        ))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(-1.0))
    }

    pub fn try_dot(&self, other: &Self) -> Result<f64> {
        self.check_frame(other)?;
        Ok(dot(&self.v, &other.v))
    }

    fn check_frame(&self, other: &Self) -> Result<()> {
        if storage_frame(self.frame) == storage_frame(other.frame) {
            Ok(())
        } else {
            Err(Error::FrameMismatch {
                left: self.frame,
                right: other.frame,
            })
        }
    }

    /// Ladder view of a primed (or ladder-tagged) vector.
    pub fn ladder(&self) -> Result<LadderComponents> {
        match self.frame {
            Frame::Primed | Frame::Ladder => {
                let plus = Complex64::new(self.v[0], -self.v[1]);
                Ok(LadderComponents {
                    plus,
                    zero: self.v[2],
                    minus: plus.conj(),
                })
            }
            other => Err(Error::UnsupportedFrame {
                source_frame: other,
                target: Frame::Ladder,
            }),
        }
    }

    /// Builds a ladder-tagged vector from its σ₊ and σ₀ components.
    pub fn from_ladder(plus: Complex64, zero: f64) -> Self {
        Self::new([plus.re, -plus.im, zero], Frame::Ladder)
    }
}

fn storage_frame(f: Frame) -> Frame {
    match f {
        Frame::Ladder => Frame::Primed,
        f => f,
    }
}

impl fmt::Display for AlgebraVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.6e}, {:.6e}, {:.6e})[{:?}]",
            self.v[0], self.v[1], self.v[2], self.frame
        )
    }
}

/// Unitary 2×2 element `e^{iα}(x0·1 + i x·σ)`; SU(2) when `phase == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement2 {
    pub x0: f64,
    pub x: [f64; 3],
    /// Global U(1) phase α in [0, 2π).
    pub phase: f64,
}

impl GroupElement2 {
    pub const IDENTITY: Self = Self {
        x0: 1.0,
        x: [0.0; 3],
        phase: 0.0,
    };

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    /// SU(2) element from quaternion components; normalizes the input.
    pub fn from_quaternion(x0: f64, x: [f64; 3]) -> Self {
        Self {
            x0,
            x,
            phase: 0.0,
        }
        .normalized()
    }

    /// U(2) element `e^{iα}·su2`.
    pub fn with_phase(self, alpha: f64) -> Self {
        Self {
            phase: wrap_angle(self.phase + alpha),
            ..self
        }
    }

    pub fn is_special(&self) -> bool {
        self.phase == 0.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.x0 * self.x0 + dot(&self.x, &self.x)
    }

    pub fn normalized(self) -> Self {
        let n = self.norm_sq().sqrt();
        Self {
            x0: self.x0 / n,
            x: self.x.map(|c| c / n),
            phase: self.phase,
        }
    }

    fn renormalize_if_needed(self) -> Self {
        if (self.norm_sq() - 1.0).abs() > RENORM_TOL {
            self.normalized()
        } else {
            self
        }
    }

    /// Hermitian adjoint (group inverse).
    pub fn adjoint(&self) -> Self {
        Self {
            x0: self.x0,
            x: self.x.map(|c| -c),
            phase: wrap_angle(-self.phase),
        }
    }

    /// `-U`, i.e. the antipodal point on S³ (phase unchanged).
    pub fn negate(&self) -> Self {
        Self {
            x0: -self.x0,
            x: self.x.map(|c| -c),
            phase: self.phase,
        }
    }

    /// SU(2) part `x0·1 + i x·σ`, dropping the global phase.
    pub fn su2_part(&self) -> Self {
        Self {
            phase: 0.0,
            ..*self
        }
    }

    pub fn matrix(&self) -> Matrix2 {
        let [x1, x2, x3] = self.x;
        let g = Complex64::from_polar(1.0, self.phase);
        [
            [
                g * Complex64::new(self.x0, x3),
                g * Complex64::new(x2, x1),
            ],
            [
                g * Complex64::new(-x2, x1),
                g * Complex64::new(self.x0, -x3),
            ],
        ]
    }

    /// Reads a (near-)unitary matrix; the phase branch is chosen with
    /// α = arg(det)/2 ∈ (−π/2, π/2]. The SU(2) part is renormalized, so
    /// slightly non-unitary inputs are projected.
    pub fn from_matrix(m: &Matrix2) -> Self {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let alpha = det.arg() / 2.0;
        let g = Complex64::from_polar(1.0, -alpha);
        let a = m[0][0] * g;
        let b = m[0][1] * g;
        let c = m[1][0] * g;
        let d = m[1][1] * g;
        let x0 = (a.re + d.re) / 2.0;
        let x3 = (a.im - d.im) / 2.0;
        let x1 = (b.im + c.im) / 2.0;
        let x2 = (b.re - c.re) / 2.0;
        Self {
            x0,
            x: [x1, x2, x3],
            phase: 0.0,
        }
        .normalized()
        .with_phase(alpha)
    }

    /// ½ Tr(U V†).
    pub fn half_trace_with(&self, other: &Self) -> Complex64 {
        let real = self.x0 * other.x0 + dot(&self.x, &other.x);
        Complex64::from_polar(real, self.phase - other.phase)
    }

    /// Largest deviation |(U U† − 1)_ij| of the matrix view.
    pub fn unitarity_defect(&self) -> f64 {
        let m = self.matrix();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    s += m[i][k] * m[j][k].conj();
                }
                if i == j {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }
}

impl Mul for GroupElement2 {
    type Output = GroupElement2;

    fn mul(self, rhs: Self) -> Self {
        let (x0, x) = (self.x0, self.x);
        let (y0, y) = (rhs.x0, rhs.x);
        let c = cross(&x, &y);
        Self {
            x0: x0 * y0 - dot(&x, &y),
            x: [
                x0 * y[0] + y0 * x[0] - c[0],
                x0 * y[1] + y0 * x[1] - c[1],
                x0 * y[2] + y0 * x[2] - c[2],
            ],
            phase: wrap_angle(self.phase + rhs.phase),
        }
        .renormalize_if_needed()
    }
}

/// `exp(i v·σ) = cos|v|·1 + i sin|v| (v/|v|)·σ`, with the components read in
/// the vector's own basis.
pub fn exp_map(v: &AlgebraVector) -> GroupElement2 {
    exp_components(&v.v)
}

pub(crate) fn exp_components(v: &[f64; 3]) -> GroupElement2 {
    let angle = dot(v, v).sqrt();
    if angle == 0.0 {
        return GroupElement2::IDENTITY;
    }
    let (s, c) = angle.sin_cos();
    let k = s / angle;
    GroupElement2 {
        x0: c,
        x: v.map(|c| c * k),
        phase: 0.0,
    }
}

/// Principal logarithm: the base-frame `v` with |v| ∈ [0, π] and `exp_map(v) = U`.
pub fn log_map(u: &GroupElement2) -> Result<AlgebraVector> {
    if !u.is_special() {
        return Err(Error::Domain {
            what: "log_map (element not in SU(2))",
            value: u.phase,
        });
    }
    let xn = dot(&u.x, &u.x).sqrt();
    if xn == 0.0 {
        if u.x0 < 0.0 {
            return Err(Error::DegenerateLog { angle: PI });
        }
        return Ok(AlgebraVector::zero(Frame::Base));
    }
    let angle = xn.atan2(u.x0);
    Ok(AlgebraVector::base(u.x.map(|c| c * angle / xn)))
}

/// Bi-invariant distance `arccos(x0 y0 + x·y)` on SU(2), in [0, π].
pub fn distance_su2(u: &GroupElement2, v: &GroupElement2) -> Result<f64> {
    if !u.is_special() || !v.is_special() {
        return Err(Error::Domain {
            what: "distance_su2 (element not in SU(2))",
            value: if u.is_special() { v.phase } else { u.phase },
        });
    }
    let arg = u.x0 * v.x0 + dot(&u.x, &v.x);
    if arg.abs() - 1.0 > CLAMP_TOL {
        return Err(Error::Domain {
            what: "distance_su2 trace argument",
            value: arg,
        });
    }
    // atan2 of the imaginary part of U V† keeps full precision near 0 and π.
    let w = *u * v.adjoint();
    let im = dot(&w.x, &w.x).sqrt();
    Ok(im.atan2(w.x0))
}

/// U(2) extension `|arccos(½ Tr U V†)|` with the principal complex arccos.
pub fn distance_u2(u: &GroupElement2, v: &GroupElement2) -> f64 {
    let mut z = u.half_trace_with(v);
    // the trace of a product of unitaries has modulus ≤ 1
    let r = z.norm();
    if r > 1.0 && r - 1.0 <= CLAMP_TOL {
        z /= r;
    }
    if z.im == 0.0 {
        return z.re.clamp(-1.0, 1.0).acos();
    }
    z.acos().norm()
}

/// Geodesic distance of the bi-invariant metric on U(2): the r.m.s. of the
/// principal eigenphases of `U V†`. Equals [`distance_su2`] on SU(2) and
/// |γ| for a pure global phase e^{iγ}.
pub fn distance_geodesic(u: &GroupElement2, v: &GroupElement2) -> f64 {
    let w = *u * v.adjoint();
    let half = dot(&w.x, &w.x).sqrt().atan2(w.x0);
    let a = wrap_symmetric(w.phase + half);
    let b = wrap_symmetric(w.phase - half);
    ((a * a + b * b) / 2.0).sqrt()
}

/// Real orthogonal map between the component vectors of two frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRotation {
    pub matrix: [[f64; 3]; 3],
    pub source: Frame,
    pub target: Frame,
}

impl FrameRotation {
    pub fn identity(frame: Frame) -> Self {
        Self {
            matrix: IDENTITY3,
            source: frame,
            target: frame,
        }
    }

    pub fn apply(&self, v: &AlgebraVector) -> Result<AlgebraVector> {
        if storage_frame(v.frame) != storage_frame(self.source) {
            return Err(Error::FrameMismatch {
                left: v.frame,
                right: self.source,
            });
        }
        Ok(AlgebraVector::new(mat_vec(&self.matrix, &v.v), self.target))
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: transpose(&self.matrix),
            source: self.target,
            target: self.source,
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Self) -> Result<Self> {
        if first.target != self.source {
            return Err(Error::FrameMismatch {
                left: first.target,
                right: self.source,
            });
        }
        Ok(Self {
            matrix: mat_mul(&self.matrix, &first.matrix),
            source: first.source,
            target: self.target,
        })
    }

    pub fn determinant(&self) -> f64 {
        det3(&self.matrix)
    }

    /// max |(RᵀR − 1)_ij|
    pub fn orthogonality_defect(&self) -> f64 {
        let p = mat_mul(&transpose(&self.matrix), &self.matrix);
        let mut worst: f64 = 0.0;
        for (i, row) in p.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                worst = worst.max((e - IDENTITY3[i][j]).abs());
            }
        }
        worst
    }

    /// Angle-axis vector (angle·axis, angle ∈ [0, π]) of the matrix.
    pub fn angle_axis(&self) -> [f64; 3] {
        rotation_angle_axis(&self.matrix)
    }
}

/// Component map from frame `source` to frame `target` at polar angle Θ₀.
///
/// base→primed is the rotation by η about the 2-axis (cos η = cos Θ₀/Ω,
/// sin η = 2 sin Θ₀/Ω); primed→tilded rotates by πΩ about 3′. The ladder
/// frame is complex and has no real rotation.
pub fn frame_rotation(theta0: f64, source: Frame, target: Frame) -> Result<FrameRotation> {
    if !(0.0..=PI).contains(&theta0) {
        return Err(Error::Domain {
            what: "frame_rotation theta0",
            value: theta0,
        });
    }
    if source == Frame::Ladder || target == Frame::Ladder {
        return Err(Error::UnsupportedFrame {
            source_frame: source,
            target,
        });
    }
    let from_base = |f: Frame| -> [[f64; 3]; 3] {
        match f {
            Frame::Base => IDENTITY3,
            Frame::Primed => base_to_primed(theta0),
            Frame::Tilded => mat_mul(&primed_to_tilded(theta0), &base_to_primed(theta0)),
            Frame::Ladder => unreachable!(),
        }
    };
    let matrix = mat_mul(&from_base(target), &transpose(&from_base(source)));
    Ok(FrameRotation {
        matrix,
        source,
        target,
    })
}

/// (cos η, sin η) for the tilt of A₀ away from the 3-axis.
pub fn eta(theta0: f64) -> (f64, f64) {
    let om = omega(theta0);
    let (s, c) = theta0.sin_cos();
    (c / om, 2.0 * s / om)
}

fn base_to_primed(theta0: f64) -> [[f64; 3]; 3] {
    let (ce, se) = eta(theta0);
    [[ce, 0.0, se], [0.0, 1.0, 0.0], [-se, 0.0, ce]]
}

fn primed_to_tilded(theta0: f64) -> [[f64; 3]; 3] {
    let (s, c) = (PI * omega(theta0)).sin_cos();
    [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]]
}

pub(crate) const IDENTITY3: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn mat_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

pub(crate) fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub(crate) fn transpose(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    dot(&m[0], &cross(&m[1], &m[2]))
}

fn rotation_angle_axis(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let cos = ((tr - 1.0) / 2.0).clamp(-1.0, 1.0);
    let skew = [m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]];
    let sn = dot(&skew, &skew).sqrt() / 2.0;
    let angle = sn.atan2(cos);
    if angle < 1e-12 {
        return [0.0; 3];
    }
    if PI - angle > 1e-6 {
        let k = angle / (2.0 * sn);
        return skew.map(|c| c * k);
    }
    // near a half turn: R ≈ 2nnᵀ − 1, read the axis from the largest diagonal entry
    let i = (0..3)
        .max_by(|&a, &b| m[a][a].total_cmp(&m[b][b]))
        .unwrap_or(0);
    let mut axis = [0.0; 3];
    axis[i] = ((m[i][i] + 1.0) / 2.0).max(0.0).sqrt();
    for j in 0..3 {
        if j != i {
            axis[j] = (m[i][j] + m[j][i]) / (4.0 * axis[i]);
        }
    }
    // fix the sign with the (small) skew part when it carries information
    if dot(&axis, &skew) < 0.0 {
        axis = axis.map(|c| -c);
    }
    let n = dot(&axis, &axis).sqrt();
    axis.map(|c| c * angle / n)
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

fn wrap_symmetric(a: f64) -> f64 {
    let r = wrap_angle(a + PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}
