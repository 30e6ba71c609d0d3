//! Wigner 3j symbols, Wigner small-d functions and spin-weighted spherical
//! harmonics.
//!
//! Angular-momentum labels are [`HalfInteger`]s (stored as doubled integers),
//! so every selection rule is decided in exact integer arithmetic.
//!
//! Phase conventions are fixed project-wide:
//!
//! * `d^j_{m'm}(β)` follows Wigner's explicit sum (the Sakurai/Edmonds
//!   convention), e.g. `d^1_{10}(β) = -sin β / √2`.
//! * `ₛY_{lm}(θ, φ) = √((2l+1)/4π) · e^{imφ} · d^l_{m,-s}(θ)`. For `s = 0`
//!   this is the Condon–Shortley `Y_{lm}`. The conjugation rule is
//!   `conj(ₛY_{lm}) = (-1)^{m+s} ₋ₛY_{l,-m}`, and the eth operator
//!   `ð η = -(sin θ)^s (∂_θ + i csc θ ∂_φ)((sin θ)^{-s} η)` and its adjoint
//!   `ð̄ η = -(sin θ)^{-s} (∂_θ - i csc θ ∂_φ)((sin θ)^s η)` act as
//!   `ð ₛY_{lm} = -√((l-s)(l+s+1)) ₛ₊₁Y_{lm}` and
//!   `ð̄ ₛY_{lm} = √((l+s)(l-s+1)) ₛ₋₁Y_{lm}`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::linalg::compensated_sum;

/// An integer or half-integer, stored as twice its value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInteger(i32);

impl HalfInteger {
    pub const ZERO: HalfInteger = HalfInteger(0);
    pub const HALF: HalfInteger = HalfInteger(1);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInteger(twice)
    }

    pub const fn integer(n: i32) -> Self {
        HalfInteger(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn abs(self) -> Self {
        HalfInteger(self.0.abs())
    }

    /// The integer value, if this is an integer.
    pub const fn as_integer(self) -> Option<i32> {
        if self.is_integer() {
            Some(self.0 / 2)
        } else {
            None
        }
    }

    /// `(-1)^self`; only defined for integers.
    fn phase(self) -> f64 {
        debug_assert!(self.is_integer());
        if (self.0 / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Debug for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Add for HalfInteger {
    type Output = HalfInteger;
    fn add(self, rhs: Self) -> Self {
        HalfInteger(self.0 + rhs.0)
    }
}

impl Sub for HalfInteger {
    type Output = HalfInteger;
    fn sub(self, rhs: Self) -> Self {
        HalfInteger(self.0 - rhs.0)
    }
}

impl Neg for HalfInteger {
    type Output = HalfInteger;
    fn neg(self) -> Self {
        HalfInteger(-self.0)
    }
}

/// `(a ± b)` as a nonnegative integer factorial argument.
fn nat(x: HalfInteger) -> u64 {
    debug_assert!(x.is_integer() && x.0 >= 0, "factorial argument {x}");
    (x.0 / 2) as u64
}

fn lnf(x: HalfInteger) -> f64 {
    ln_factorial(nat(x))
}

fn check_projection(j: HalfInteger, m: HalfInteger) -> Result<()> {
    if j.0 < 0 {
        return Err(Error::InvalidLabels(format!("negative j = {j}")));
    }
    if m.abs() > j {
        return Err(Error::InvalidLabels(format!("|m| = |{m}| exceeds j = {j}")));
    }
    if !(j - m).is_integer() {
        return Err(Error::InvalidLabels(format!(
            "j = {j} and m = {m} differ by a half-integer"
        )));
    }
    Ok(())
}

/// The triangle condition plus integrality of `j1 + j2 + j3`.
pub fn triangle_allowed(j1: HalfInteger, j2: HalfInteger, j3: HalfInteger) -> bool {
    (j1 + j2 + j3).is_integer() && j3 >= (j1 - j2).abs() && j3 <= j1 + j2
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)` by the Racah sum.
///
/// Returns exactly `0.0` whenever a selection rule fails. Terms of the
/// alternating sum are accumulated in log space, sorted by magnitude and
/// added with compensated summation.
pub fn wigner_3j(
    j1: HalfInteger,
    j2: HalfInteger,
    j3: HalfInteger,
    m1: HalfInteger,
    m2: HalfInteger,
    m3: HalfInteger,
) -> Result<f64> {
    check_projection(j1, m1)?;
    check_projection(j2, m2)?;
    check_projection(j3, m3)?;
    if (m1 + m2 + m3).0 != 0 || !triangle_allowed(j1, j2, j3) {
        return Ok(0.0);
    }

    let ln_delta = lnf(j1 + j2 - j3) + lnf(j1 - j2 + j3) + lnf(j2 + j3 - j1) - lnf(j1 + j2 + j3 + HalfInteger(2));
    let ln_norm = lnf(j1 + m1) + lnf(j1 - m1) + lnf(j2 + m2) + lnf(j2 - m2) + lnf(j3 + m3) + lnf(j3 - m3);
    let ln_prefactor = 0.5 * (ln_delta + ln_norm);

    // k runs over integers keeping every factorial argument nonnegative.
    let lo = [0, (j2 - j3 - m1).0, (j1 - j3 + m2).0].into_iter().max().unwrap();
    let hi = [(j1 + j2 - j3).0, (j1 - m1).0, (j2 + m2).0].into_iter().min().unwrap();
    if lo > hi {
        return Ok(0.0);
    }
    let mut terms = Vec::with_capacity(((hi - lo) / 2 + 1) as usize);
    let mut k2 = lo;
    while k2 <= hi {
        let k = HalfInteger(k2);
        let ln_den = lnf(k)
            + lnf(j3 - j2 + k + m1)
            + lnf(j3 - j1 + k - m2)
            + lnf(j1 + j2 - j3 - k)
            + lnf(j1 - k - m1)
            + lnf(j2 - k + m2);
        terms.push(k.phase() * (ln_prefactor - ln_den).exp());
        k2 += 2;
    }
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let phase = (j1 - j2 - m3).phase();
    Ok(phase * compensated_sum(terms))
}

/// Wigner small-d matrix element `d^j_{m' m}(β)`.
pub fn wigner_small_d(j: HalfInteger, mp: HalfInteger, m: HalfInteger, beta: f64) -> Result<f64> {
    check_projection(j, mp)?;
    check_projection(j, m)?;
    let (s, c) = (0.5 * beta).sin_cos();
    let ln_norm = 0.5 * (lnf(j + mp) + lnf(j - mp) + lnf(j + m) + lnf(j - m));
    let lo = 0.max((m - mp).0);
    let hi = (j + m).0.min((j - mp).0);
    let mut terms = Vec::new();
    let mut k2 = lo;
    while k2 <= hi {
        let k = HalfInteger(k2);
        let ln_den = lnf(j + m - k) + lnf(k) + lnf(j - k - mp) + lnf(k - m + mp);
        let cos_pow = (j + j - k - k + m - mp).0 / 2;
        let sin_pow = (k + k - m + mp).0 / 2;
        let trig = c.powi(cos_pow) * s.powi(sin_pow);
        terms.push((k - m + mp).phase() * (ln_norm - ln_den).exp() * trig);
        k2 += 2;
    }
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    Ok(compensated_sum(terms))
}

const SUPPORTED_SPINS: [i32; 5] = [-2, -1, 0, 1, 2];

fn check_spin(s: HalfInteger) -> Result<()> {
    if SUPPORTED_SPINS.contains(&s.0) {
        Ok(())
    } else {
        Err(Error::InvalidLabels(format!(
            "spin weight {s} outside the supported set {{-1, -1/2, 0, 1/2, 1}}"
        )))
    }
}

/// Spin-weighted spherical harmonic `ₛY_{lm}(θ, φ)`.
pub fn spin_weighted_y(s: HalfInteger, l: HalfInteger, m: HalfInteger, theta: f64, phi: f64) -> Result<Complex64> {
    check_spin(s)?;
    check_projection(l, s)?;
    check_projection(l, m)?;
    let d = wigner_small_d(l, m, -s, theta)?;
    let norm = ((2.0 * l.value() + 1.0) / (4.0 * PI)).sqrt();
    Ok(Complex64::from_polar(norm * d, m.value() * phi))
}

/// Ordinary (spin-0) spherical harmonic with integer labels.
pub fn spherical_y(l: i32, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    spin_weighted_y(
        HalfInteger::ZERO,
        HalfInteger::integer(l),
        HalfInteger::integer(m),
        theta,
        phi,
    )
}

/// `∫ conj(ₛ₁Y_{l1 m1}) · Y_{l2 m2} · ₛ₃Y_{l3 m3} dΩ`.
///
/// The middle factor is an ordinary harmonic, so the integral vanishes unless
/// `s1 = s3`. The value is real in the fixed phase convention:
/// `(-1)^{s1+m1} √((2l1+1)(2l2+1)(2l3+1)/4π) (l1 l2 l3; -m1 m2 m3)(l1 l2 l3; s1 0 -s3)`.
#[allow(clippy::too_many_arguments)]
pub fn triple_integral(
    s1: HalfInteger,
    l1: HalfInteger,
    m1: HalfInteger,
    l2: HalfInteger,
    m2: HalfInteger,
    s3: HalfInteger,
    l3: HalfInteger,
    m3: HalfInteger,
) -> Result<f64> {
    check_spin(s1)?;
    check_spin(s3)?;
    check_projection(l1, s1)?;
    check_projection(l3, s3)?;
    check_projection(l1, m1)?;
    check_projection(l2, m2)?;
    check_projection(l3, m3)?;
    if !l2.is_integer() {
        return Err(Error::InvalidLabels(format!(
            "middle factor must be an ordinary harmonic, got l2 = {l2}"
        )));
    }
    if s1 != s3 || (m1 - m2 - m3).0 != 0 || !triangle_allowed(l1, l2, l3) {
        return Ok(0.0);
    }
    let azimuthal = wigner_3j(l1, l2, l3, -m1, m2, m3)?;
    if azimuthal == 0.0 {
        return Ok(0.0);
    }
    let spin = wigner_3j(l1, l2, l3, s1, HalfInteger::ZERO, -s3)?;
    let dims = (2.0 * l1.value() + 1.0) * (2.0 * l2.value() + 1.0) * (2.0 * l3.value() + 1.0);
    Ok((s1 + m1).phase() * (dims / (4.0 * PI)).sqrt() * azimuthal * spin)
}
