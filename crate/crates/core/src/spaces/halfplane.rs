//! Upper half-plane model of the hyperbolic plane.
//!
//! Points are complex numbers with Im z > 0, the basepoint is i, and
//! isometries are real 2x2 matrices of positive determinant acting by
//! Moebius transformation. Matrices are normalized to determinant one on
//! construction, which pins the float scale of long products.

use crate::error::{Error, Result};

/// Determinant-one real 2x2 matrix acting on the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moebius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Smallest imaginary part a point may reach before the model is declared
/// out of its reliable float regime.
pub const MIN_IM: f64 = 1e-290;

impl Moebius {
    pub const IDENTITY: Moebius = Moebius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    /// Build from raw entries; requires positive determinant and rescales to
    /// determinant one.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !det.is_finite() || det <= 0.0 {
            return Err(Error::validation(format!(
                "half-plane isometry needs positive determinant, got {det:e}"
            )));
        }
        let s = det.sqrt();
        Ok(Moebius { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn compose(&self, other: &Moebius) -> Result<Moebius> {
        Moebius::new(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )
    }

    pub fn inverse(&self) -> Moebius {
        // det = 1, so the adjugate is the inverse and stays normalized.
        Moebius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Moebius action on z = re + i*im. With det = 1 the image has
    /// Im = im / |cz + d|^2.
    pub fn apply(&self, re: f64, im: f64) -> Result<(f64, f64)> {
        let dr = self.c * re + self.d;
        let di = self.c * im;
        let denom = dr * dr + di * di;
        let nr = self.a * re + self.b;
        let ni = self.a * im;
        let out_re = (nr * dr + ni * di) / denom;
        let out_im = im / denom;
        if !out_re.is_finite() || !out_im.is_finite() || out_im < MIN_IM {
            return Err(Error::numerical(format!(
                "half-plane point left the reliable regime (Im = {out_im:e})"
            )));
        }
        Ok((out_re, out_im))
    }

    /// Action on a boundary point of R union {infinity}; `None` encodes
    /// infinity.
    pub fn apply_boundary(&self, xi: Option<f64>) -> Option<f64> {
        match xi {
            None => {
                if self.c == 0.0 {
                    None
                } else {
                    Some(self.a / self.c)
                }
            }
            Some(x) => {
                let denom = self.c * x + self.d;
                if denom == 0.0 {
                    None
                } else {
                    Some((self.a * x + self.b) / denom)
                }
            }
        }
    }
}

/// Hyperbolic distance in the asinh form, which stays accurate for nearby
/// points where the arcosh form cancels.
pub fn distance(re1: f64, im1: f64, re2: f64, im2: f64) -> f64 {
    let dx = re1 - re2;
    let dy = im1 - im2;
    let chord = (dx * dx + dy * dy).sqrt();
    2.0 * (chord / (2.0 * (im1 * im2).sqrt())).asinh()
}

/// Isometry fixing i that sends infinity to the real boundary point xi; used
/// to parameterize geodesic rays from i toward xi.
pub fn ray_frame(xi: f64) -> Moebius {
    let r = (1.0 + xi * xi).sqrt();
    // rotation about i with cot(theta) = -xi
    Moebius { a: -xi / r, b: 1.0 / r, c: -1.0 / r, d: -xi / r }
}

/// Point at arclength t along the unit-speed geodesic from i toward the
/// boundary point (None = infinity).
pub fn ray_point(xi: Option<f64>, t: f64) -> Result<(f64, f64)> {
    let im = t.exp();
    match xi {
        None => {
            if !im.is_finite() {
                return Err(Error::numerical("ray parameter too large for f64"));
            }
            Ok((0.0, im))
        }
        Some(x) => ray_frame(x).apply(0.0, im),
    }
}

/// Geodesic midpoint of two points, via mapping both onto the imaginary axis.
pub fn midpoint(re1: f64, im1: f64, re2: f64, im2: f64) -> Result<(f64, f64)> {
    // translate/scale p1 to i: z -> (z - re1) / im1
    let g = Moebius::new(1.0 / im1.sqrt(), -re1 / im1.sqrt(), 0.0, im1.sqrt())?;
    let (qr, qi) = g.apply(re2, im2)?;
    // rotate about i until the image of p2 is purely imaginary
    let phi = 0.5 * (-2.0 * qr).atan2(1.0 - (qr * qr + qi * qi));
    let (c, s) = (phi.cos(), phi.sin());
    let rot = Moebius::new(c, s, -s, c)?;
    let (zr, zi) = rot.apply(qr, qi)?;
    if zr.abs() > 1e-7 * (1.0 + zi.abs()) {
        return Err(Error::numerical(format!(
            "midpoint rotation left residual real part {zr:e}"
        )));
    }
    // on the axis the midpoint of i and zi*i is the geometric mean
    let m_im = zi.sqrt();
    let back = g.inverse().compose(&rot.inverse())?;
    back.apply(0.0, m_im)
}

/// Boundary point hit by the geodesic from i through z; `None` is infinity.
pub fn boundary_projection(re: f64, im: f64) -> Option<f64> {
    if re.abs() < 1e-12 {
        return if im > 1.0 { None } else { Some(0.0) };
    }
    let c = (re * re + im * im - 1.0) / (2.0 * re);
    let r = (1.0 + c * c).sqrt();
    Some(if re > 0.0 { c + r } else { c - r })
}
