//! Fourier toolkit: window functions and their transforms, Dirichlet sums,
//! the periodised Gaussian, prime tuples, interval goodness and the
//! E-family of estimators.
//!
//! Transforms use φ(y) = ∫ f(x) e(−xy) dx with e(x) = e^{2πix}.

mod goodness;
mod schedule;
mod tuples;

pub use goodness::{
    goodness_all, interval_bounds, interval_goodness, partition, CoordinateGoodness, GoodnessReport, Verdict,
};
pub use schedule::Schedule;
pub use tuples::{
    classify_tuple, e_direct, e_restricted_sum, type_a_prediction, DirectEstimate, FrequencyTuple, PrimeTuple,
    RestrictedSum, RestrictedVariant, SumRange, TupleType,
};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// e(x) = exp(2πix).
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

/// sin(πz)/(πz) with its removable singularity filled in.
pub fn sinc(z: f64) -> f64 {
    let t = PI * z;
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Window {
    /// 1_{[−1,1]} * 1_{[−1,1]}, the tent max(0, 2 − |x|).
    Tent,
    /// ε⁻¹ 1_{[0,1]} * 1_{[0,ε]}.
    Plus,
    /// ε⁻¹ 1_{[0,1]} * 1_{[−ε,0]}.
    Minus,
}

fn trapezoid(x: f64, a: f64, b: f64, eps: f64) -> f64 {
    // ramp up on [a, a + ε], flat to b, ramp down on [b, b + ε]
    if x <= a || x >= b + eps {
        0.0
    } else if x < a + eps {
        (x - a) / eps
    } else if x <= b {
        1.0
    } else {
        (b + eps - x) / eps
    }
}

pub fn window_eval(kind: Window, x: f64, eps: f64) -> f64 {
    match kind {
        Window::Tent => (2.0 - x.abs()).max(0.0),
        Window::Plus => trapezoid(x, 0.0, 1.0, eps),
        Window::Minus => trapezoid(x, -eps, 1.0 - eps, eps),
    }
}

/// Closed-form transform of the window.
pub fn window_fourier(kind: Window, y: f64, eps: f64) -> Complex64 {
    match kind {
        Window::Tent => {
            let s = 2.0 * sinc(2.0 * y);
            Complex64::new(s * s, 0.0)
        }
        Window::Plus => e(-y / 2.0) * sinc(y) * e(-eps * y / 2.0) * sinc(eps * y),
        Window::Minus => e(-y / 2.0) * sinc(y) * e(eps * y / 2.0) * sinc(eps * y),
    }
}

/// |φ±(y)|; the two signs share it.
pub fn window_fourier_abs(kind: Window, y: f64, eps: f64) -> f64 {
    match kind {
        Window::Tent => window_fourier(kind, y, eps).re,
        _ => (sinc(y) * sinc(eps * y)).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaRange {
    /// N⁻¹ Σ_{n ≤ N} e(nx).
    Full,
    /// N^{−1/2} Σ_{n ∈ S_u} e(nx), S_u = [(u−1)w + 1, uw].
    Sub { u: u64, width: u64 },
}

/// Σ_{n=a}^{b} e(nx) in closed form.
pub fn geometric_sum(x: f64, a: u64, b: u64) -> Complex64 {
    if b < a {
        return Complex64::new(0.0, 0.0);
    }
    let len = (b - a + 1) as f64;
    let xr = x - x.round();
    if xr == 0.0 {
        return Complex64::new(len, 0.0);
    }
    // centre phase (a + b)x/2, reduced mod 1 before use
    let centre = ((a as f64 + b as f64) * xr / 2.0).rem_euclid(1.0);
    e(centre) * ((PI * len * xr).sin() / (PI * xr).sin())
}

pub fn dirichlet_theta(x: f64, n: u64, range: ThetaRange) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::validation("N must be at least 1"));
    }
    Ok(match range {
        ThetaRange::Full => geometric_sum(x, 1, n) / n as f64,
        ThetaRange::Sub { u, width } => {
            if u == 0 || width == 0 {
                return Err(Error::validation("sub-range needs u >= 1 and width >= 1"));
            }
            geometric_sum(x, (u - 1) * width + 1, u * width) / (n as f64).sqrt()
        }
    })
}

/// Periodised Gaussian Σ_{m′} exp(−(x − m′)²/(2ε²)), evaluated on both the
/// space and the frequency side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodisedGaussian {
    pub space: f64,
    pub frequency: f64,
    pub tail_bound: f64,
}

pub const GAUSSIAN_TAIL_TARGET: f64 = 1e-12;

fn space_tail(eps: f64, m: u64) -> f64 {
    // terms with |x − m′| ≥ M + 1/2 once x is reduced to [−1/2, 1/2]
    let d = m as f64 + 0.5;
    let q = (-d / (eps * eps)).exp();
    2.0 * (-d * d / (2.0 * eps * eps)).exp() / (1.0 - q).max(f64::MIN_POSITIVE)
}

fn frequency_tail(eps: f64, m: u64) -> f64 {
    let c = 2.0 * PI * PI * eps * eps;
    let m1 = m as f64 + 1.0;
    let q = (-c * (2.0 * m1 + 1.0)).exp();
    2.0 * (2.0 * PI).sqrt() * eps * (-c * m1 * m1).exp() / (1.0 - q).max(f64::MIN_POSITIVE)
}

pub fn periodised_gaussian(x: f64, eps: f64, tail_terms: u64) -> Result<PeriodisedGaussian> {
    if !(eps > 0.0) || tail_terms == 0 {
        return Err(Error::validation("need epsilon > 0 and tail_terms >= 1"));
    }
    let tail = space_tail(eps, tail_terms).max(frequency_tail(eps, tail_terms));
    if !(tail <= GAUSSIAN_TAIL_TARGET) {
        return Err(Error::Truncation(format!(
            "{tail_terms} terms leave a tail of {tail:e} at epsilon = {eps}"
        )));
    }
    let xr = x - x.round();
    let m = tail_terms as i64;
    let mut space = crate::util::Compensated::new();
    for k in -m..=m {
        let d = xr - k as f64;
        space.add((-d * d / (2.0 * eps * eps)).exp());
    }
    let mut freq = crate::util::Compensated::new();
    freq.add(1.0);
    for k in 1..=m {
        let kf = k as f64;
        freq.add(2.0 * (2.0 * PI * kf * xr).cos() * (-2.0 * PI * PI * eps * eps * kf * kf).exp());
    }
    Ok(PeriodisedGaussian {
        space: space.value(),
        frequency: (2.0 * PI).sqrt() * eps * freq.value(),
        tail_bound: tail,
    })
}
