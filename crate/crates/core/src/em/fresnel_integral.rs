//! Fresnel cosine/sine integrals and the two quantities built on them: the
//! transition function used by wedge diffraction and the complex knife-edge
//! factor.
//!
//! `C(u) = ∫₀ᵘ cos(πt²/2) dt`, `S(u) = ∫₀ᵘ sin(πt²/2) dt`, in the normalised
//! convention where both tend to 1/2 as `u → ∞`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// Switch between the Maclaurin series and the large-argument asymptotic
/// expansion. At the crossover the series needs ~45 terms and the asymptotic
/// tail bottoms out below 1e-7, so both sides agree to ~1e-7 absolute.
const SERIES_CUTOFF: f64 = 3.2;

/// Fresnel integrals `(C(u), S(u))`.
///
/// Absolute error is below ~1e-9 in the series region and ~1e-7 in the
/// asymptotic region; both are far inside what field-strength comparisons
/// at the 0.1 dB level require.
pub fn fresnel_cs(u: f64) -> (f64, f64) {
    let x = u.abs();
    let (c, s) = if x <= SERIES_CUTOFF { cs_series(x) } else { cs_asymptotic(x) };
    if u < 0.0 {
        (-c, -s) // both integrals are odd
    } else {
        (c, s)
    }
}

fn cs_series(x: f64) -> (f64, f64) {
    // C(x) = Σ (-1)^n (π/2)^{2n}   x^{4n+1} / ((2n)!  (4n+1))
    // S(x) = Σ (-1)^n (π/2)^{2n+1} x^{4n+3} / ((2n+1)!(4n+3))
    let x2 = x * x;
    let x4 = x2 * x2;
    let mut c = 0.0;
    let mut s = 0.0;
    // Running factors: (-1)^n (π/2)^{2n} x^{4n+1} / (2n)! and its S analogue.
    let mut term_c = x;
    let mut term_s = FRAC_PI_2 * x * x2;
    for n in 0..60 {
        let add_c = term_c / (4 * n + 1) as f64;
        let add_s = term_s / ((4 * n + 3) as f64 * (2 * n + 1) as f64);
        c += add_c;
        s += add_s;
        if add_c.abs() < 1e-18 && add_s.abs() < 1e-18 {
            break;
        }
        let k = (2 * n + 1) as f64;
        term_c *= -(FRAC_PI_2 * FRAC_PI_2) * x4 / (k * (k + 1.0));
        term_s *= -(FRAC_PI_2 * FRAC_PI_2) * x4 / (k * (k + 1.0));
    }
    (c, s)
}

fn cs_asymptotic(x: f64) -> (f64, f64) {
    // Tail integral I(x) = ∫ₓ^∞ e^{-jπt²/2} dt expanded by repeated
    // integration by parts:
    //   I(x) = e^{-jπx²/2}/(jπx) · Σₘ (-1)^m (2m-1)!! / (jπx²)^m,
    // truncated at the smallest term. Then C - jS = (1-j)/2 - I.
    let jpix2 = Complex64::new(0.0, PI * x * x);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for m in 0..30 {
        sum += term;
        let next = term * (-(2.0 * m as f64 + 1.0)) / jpix2;
        if next.norm() >= prev {
            break; // divergent tail: stop at the smallest term
        }
        prev = next.norm();
        term = next;
        if prev < 1e-18 {
            sum += term;
            break;
        }
    }
    let phase = Complex64::from_polar(1.0, -FRAC_PI_2 * x * x);
    let tail = phase / Complex64::new(0.0, PI * x) * sum;
    let half = Complex64::new(0.5, -0.5);
    let cms = half - tail;
    (cms.re, -cms.im)
}

/// Transition function `F(x) = 2j√x e^{jx} ∫_{√x}^∞ e^{-jτ²} dτ` for `x >= 0`.
///
/// `F` smoothly blends the diffraction coefficient through its shadow- and
/// reflection-boundary singularities: `F(0) = 0` and `F(x) → 1` as `x → ∞`.
pub fn transition_function(x: f64) -> Complex64 {
    debug_assert!(x >= 0.0, "transition function argument must be non-negative");
    if x == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // Substitute τ = t√(π/2):  ∫_{√x}^∞ e^{-jτ²}dτ = √(π/2)·[(1-j)/2 - (C - jS)(u)]
    // with u = √(2x/π).
    let u = (2.0 * x / PI).sqrt();
    let (c, s) = fresnel_cs(u);
    let rest = Complex64::new(0.5 - c, -(0.5 - s));
    let integral = (FRAC_PI_2).sqrt() * rest;
    Complex64::new(0.0, 2.0 * x.sqrt()) * Complex64::from_polar(1.0, x) * integral
}

/// Complex knife-edge factor
/// `KEF(ν) = (1+j)/2 · ∫_ν^∞ e^{-jπt²/2} dt`:
/// the ratio of the field behind an absorbing half-plane to the free-space
/// field. `KEF(0) = 1/2` (6.02 dB loss at grazing), `KEF(ν→∞) → 0` deep in
/// shadow, and `KEF(ν→-∞) → 1` when the edge is far below the direct path.
pub fn knife_edge_factor(nu: f64) -> Complex64 {
    let (c, s) = fresnel_cs(nu);
    let tail = Complex64::new(0.5 - c, -(0.5 - s));
    Complex64::new(0.5, 0.5) * tail
}
