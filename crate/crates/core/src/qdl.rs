//! Faddeev's noncompact quantum dilogarithm Φ_b and the classical
//! dilogarithm Li₂ it degenerates to.
//!
//! Φ_b is evaluated from its defining contour integral
//!
//! ```text
//! log Φ_b(z) = ∫_C exp(−2izw) / (4 sinh(wb) sinh(w/b) w) dw
//! ```
//!
//! with C along the real axis passing above the origin.  Inside the analyticity
//! strip the contour is realized as two symmetrized tails plus a small
//! semicircle over the origin; outside the strip the functional (shift)
//! equations extend the value.

use crate::quad::{self, QuadResult};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Errors surfaced by the special-function layer.
#[derive(Debug, Clone, thiserror::Error)]
pub enum QdlError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("imaginary part {im} exceeds the supported extension range {max}")]
    TooFarFromStrip { im: f64, max: f64 },
    #[error("evaluation point within {distance} of a {kind} (margin {margin})")]
    NearSingularity { distance: f64, margin: f64, kind: &'static str },
}

pub type Result<T> = std::result::Result<T, QdlError>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Quantization parameter b > 0 with its derived constants.
///
/// ℏ = (b + 1/b)^{-2}, c_b = i(b + 1/b)/2, and the two unit phases
/// ζ_o = e^{iπ(1−4c_b²)/12} and ζ_inv = e^{iπ(1+2c_b²)/6} that appear in the
/// Fourier/inversion identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularParameter {
    b: f64,
}

impl ModularParameter {
    pub fn new(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(QdlError::InvalidParameter(format!("b must be positive, got {b}")));
        }
        Ok(ModularParameter { b })
    }

    /// Solves b + 1/b = ℏ^{-1/2} for the root in (0, 1].
    pub fn from_hbar(hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar <= 0.25) {
            return Err(QdlError::InvalidParameter(format!(
                "hbar must lie in (0, 1/4], got {hbar}"
            )));
        }
        let s = hbar.powf(-0.5);
        let b = 0.5 * (s - (s * s - 4.0).sqrt());
        ModularParameter::new(b)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn b_min(&self) -> f64 {
        self.b.min(1.0 / self.b)
    }

    pub fn hbar(&self) -> f64 {
        let s = self.b + 1.0 / self.b;
        1.0 / (s * s)
    }

    /// |c_b| = (b + 1/b)/2; c_b itself is i|c_b|.
    pub fn cb_abs(&self) -> f64 {
        0.5 * (self.b + 1.0 / self.b)
    }

    pub fn c_b(&self) -> Complex64 {
        I * self.cb_abs()
    }

    /// c_b² as a real number, −(b+1/b)²/4 = −1/(4ℏ).
    pub fn cb_sq(&self) -> f64 {
        -self.cb_abs() * self.cb_abs()
    }

    pub fn zeta_o(&self) -> Complex64 {
        (I * PI * (1.0 - 4.0 * self.cb_sq()) / 12.0).exp()
    }

    pub fn zeta_inv(&self) -> Complex64 {
        (I * PI * (1.0 + 2.0 * self.cb_sq()) / 6.0).exp()
    }

    pub fn q(&self) -> Complex64 {
        (I * PI * self.b * self.b).exp()
    }

    /// Modular partner with b ↦ 1/b (Φ is invariant under it).
    pub fn dual(&self) -> Self {
        ModularParameter { b: 1.0 / self.b }
    }
}

// ---------------------------------------------------------------------------
// Classical dilogarithm
// ---------------------------------------------------------------------------

/// Bernoulli numbers B₀..B₃₀ (even indices; odd ones vanish except B₁ = −1/2).
const BERNOULLI_EVEN: [f64; 16] = [
    1.0,
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

fn li2_series(w: Complex64) -> Complex64 {
    // Σ w^k / k², for |w| ≤ 0.5
    let mut term = w;
    let mut sum = w;
    for k in 2..80u32 {
        term *= w;
        let add = term / ((k * k) as f64);
        sum += add;
        if add.norm() < 1e-18 * (1.0 + sum.norm()) {
            break;
        }
    }
    sum
}

/// Bernoulli series in u = −log(1−w); converges for |u| < 2π.
fn li2_log_series(w: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - w).ln();
    // Li₂(w) = Σ_{n≥0} B_n u^{n+1}/(n+1)!  (B₁ = −1/2 convention)
    let mut sum = u - u * u / 4.0;
    let u2 = u * u;
    let mut upow = u; // u^{2k+1}
    let mut fact = 1.0f64; // (2k+1)!
    for k in 1..16usize {
        upow *= u2;
        fact *= ((2 * k) * (2 * k + 1)) as f64;
        let add = BERNOULLI_EVEN[k] * upow / fact;
        sum += add;
        if add.norm() < 1e-18 * (1.0 + sum.norm()) {
            break;
        }
    }
    sum
}

/// Principal-branch complex dilogarithm with cut along [1, ∞); on the cut the
/// value is continuous from above (Im w = +0).
pub fn li2(w: Complex64) -> Complex64 {
    let pi2_6 = PI * PI / 6.0;
    if w.norm() <= 0.5 {
        return li2_series(w);
    }
    if (Complex64::new(1.0, 0.0) - w).norm() <= 0.5 {
        // reflection at w = 1
        let omw = Complex64::new(1.0, 0.0) - w;
        let lw = if w.im == 0.0 && w.re > 1.0 {
            // continuous from above: log(1-w) with 1-w real negative gets -iπ from +0 side
            Complex64::new(omw.norm().max(1e-300).ln(), -PI)
        } else {
            omw.ln()
        };
        return pi2_6 - w.ln() * lw - li2_series(omw);
    }
    if w.norm() > 1.5 {
        // inversion: Li₂(w) = −Li₂(1/w) − π²/6 − log(−w)²/2
        let lmw = if w.im == 0.0 && w.re > 1.0 {
            Complex64::new(w.re.ln(), PI) // log(−w) from the +i0 side
        } else {
            (-w).ln()
        };
        return -li2(1.0 / w) - pi2_6 - 0.5 * lmw * lmw;
    }
    if w.re > 0.5 {
        // reflection first, then the log series on 1−w
        let omw = Complex64::new(1.0, 0.0) - w;
        return pi2_6 - w.ln() * omw.ln() - li2_log_series(omw);
    }
    li2_log_series(w)
}

/// Li₂(−e^z), analytically continued across the strip; analytic except on the
/// half-lines Re z = 0, |Im z| > π.
pub fn li2_negexp(z: Complex64) -> Complex64 {
    if z.re <= 0.0 {
        li2(-z.exp())
    } else {
        // reflection Li₂(−e^z) = −π²/6 − z²/2 − Li₂(−e^{−z})
        -PI * PI / 6.0 - 0.5 * z * z - li2(-(-z).exp())
    }
}

/// log(1 + e^z), continued consistently with `li2_negexp` (it is −∂_z of it).
pub fn log1p_exp(z: Complex64) -> Complex64 {
    if z.re <= 0.0 {
        (Complex64::new(1.0, 0.0) + z.exp()).ln()
    } else {
        z + (Complex64::new(1.0, 0.0) + (-z).exp()).ln()
    }
}

// ---------------------------------------------------------------------------
// Quantum dilogarithm
// ---------------------------------------------------------------------------

fn in_strip_log_phi(mp: &ModularParameter, z: Complex64) -> Complex64 {
    let b = mp.b;
    let binv = 1.0 / b;

    // Far out along the strip the function is flat: log Φ → 0 as Re z → −∞
    // with corrections O(e^{2π b_min Re z}), and the inversion relation
    // Φ(z)Φ(−z) = ζ_inv⁻¹ e^{iπz²} transports that to Re z → +∞.  Beyond the
    // threshold the correction is below 1e−14 and the defining integral can
    // be skipped.
    let x0 = 5.2 / mp.b_min();
    if z.re < -x0 {
        return Complex64::new(0.0, 0.0);
    }
    if z.re > x0 {
        return I * PI * (z * z - (1.0 + 2.0 * mp.cb_sq()) / 6.0);
    }
    let r = 0.5 * (PI * mp.b_min()).min(1.0);
    // decay rate of the symmetrized tail integrand
    let rate = (b + binv) - 2.0 * z.im.abs();
    let w_max = r + 45.0 / rate;
    let tol = 1e-14;

    // tails: −i sin(2zw) / (2 sinh(wb) sinh(w/b) w) on [r, w_max]
    let mut tail_f = |w: f64| {
        let s = (2.0 * z * w).sin();
        -I * s / (2.0 * (w * b).sinh() * (w * binv).sinh() * w)
    };
    let max_panels = 2000 + (40.0 * w_max * (1.0 + z.re.abs())) as usize;
    let tails = quad::integrate(&mut tail_f, r, w_max, tol, tol, max_panels);

    // semicircle over the origin, w = r e^{iθ}, θ from π to 0
    let mut semi_f = |theta: f64| {
        let w = r * (I * theta).exp();
        let f = (-2.0 * I * z * w).exp() / (4.0 * (w * b).sinh() * (w * binv).sinh() * w);
        -f * I * r * (I * theta).exp() // minus: traversal is π → 0
    };
    let semi = quad::integrate(&mut semi_f, 0.0, PI, tol, tol, 400);

    tails.value + semi.value
}

/// log Φ_b(z) (a branch of it: exp of the result is exactly Φ_b(z)).
///
/// Inside the strip |Im z| ≤ 0.3|c_b| the defining integral is used directly;
/// outside, the shift equations walk the point into the strip in steps of
/// i·min(b, 1/b).  Points with |Im z| > 50|c_b| are refused, as are points
/// within `margin` of a pole (zeros are benign; log Φ stays accurate there).
pub fn log_phi_with_margin(
    mp: &ModularParameter,
    z: Complex64,
    margin: f64,
) -> Result<Complex64> {
    let cb = mp.cb_abs();
    let max_im = 50.0 * cb;
    if z.im.abs() > max_im {
        return Err(QdlError::TooFarFromStrip { im: z.im, max: max_im });
    }
    let s = nearest_singularity(mp, z);
    if s.kind == SingularityKind::Pole && s.distance < margin {
        return Err(QdlError::NearSingularity {
            distance: s.distance,
            margin,
            kind: s.kind.name(),
        });
    }

    let step = mp.b_min();
    let tau = (0.3 * cb).max(0.5 * step + 1e-12);
    let two_pi = 2.0 * PI;
    let mut zz = z;
    let mut correction = Complex64::new(0.0, 0.0);
    let mut steps = 0usize;
    let max_steps = (z.im.abs() / step).ceil() as usize + 2;
    while zz.im.abs() > tau {
        if steps >= max_steps {
            return Err(QdlError::TooFarFromStrip { im: z.im, max: max_im });
        }
        if zz.im < 0.0 {
            // Φ(z) = Φ(z + ib_min) · (1 + e^{2πb_min(z + ib_min/2)})
            correction += log1p_exp(two_pi * step * (zz + I * (0.5 * step)));
            zz += I * step;
        } else {
            // Φ(z) = Φ(z − ib_min) / (1 + e^{2πb_min(z − ib_min/2)})
            correction -= log1p_exp(two_pi * step * (zz - I * (0.5 * step)));
            zz -= I * step;
        }
        steps += 1;
    }
    Ok(in_strip_log_phi(mp, zz) + correction)
}

/// log Φ_b(z) with the default (tiny) pole margin.
pub fn log_phi(mp: &ModularParameter, z: Complex64) -> Result<Complex64> {
    log_phi_with_margin(mp, z, 1e-9 * mp.cb_abs())
}

/// Φ_b(z).
pub fn phi(mp: &ModularParameter, z: Complex64) -> Result<Complex64> {
    Ok(log_phi(mp, z)?.exp())
}

/// Φ_b(z) refusing evaluation within `margin` of a pole.
pub fn phi_with_margin(mp: &ModularParameter, z: Complex64, margin: f64) -> Result<Complex64> {
    Ok(log_phi_with_margin(mp, z, margin)?.exp())
}

/// Truncated asymptotic (quasi-classical) expansion of log Φ_b(x/(2πb)):
///
/// ```text
/// Σ_{n=0}^{order} (2πi b²)^{2n−1} B_{2n}(1/2)/(2n)! ∂_x^{2n} Li₂(−e^x)
/// ```
///
/// Supported orders 0..=4.
pub fn phi_asymptotic(mp: &ModularParameter, x: Complex64, order: usize) -> Result<Complex64> {
    if order > 4 {
        return Err(QdlError::InvalidParameter(format!("order must be ≤ 4, got {order}")));
    }
    // B_{2n}(1/2) = (2^{1−2n} − 1) B_{2n}
    let half_bernoulli = |n: usize| ((2.0f64).powi(1 - 2 * n as i32) - 1.0) * BERNOULLI_EVEN[n];
    let lam = 2.0 * PI * I * mp.b() * mp.b();
    let mut total = li2_negexp(x) / lam; // n = 0 term (B₀(1/2) = 1)
    if order >= 1 {
        // ∂² Li₂(−e^x) = −σ(x) with σ the logistic function; higher even
        // derivatives come from the σ-polynomial recursion below.
        let sigma = 1.0 / (Complex64::new(1.0, 0.0) + (-x).exp());
        // poly[k] = coefficient of σ^{k+1} in the (m)-th derivative of σ
        let mut poly: Vec<f64> = vec![1.0]; // σ itself
        let mut deriv_order = 0usize;
        let mut fact = 1.0f64; // (2n)!
        let mut lam_pow = lam; // (2πib²)^{2n−1}
        for n in 1..=order {
            // advance σ-derivative order to 2n−2
            while deriv_order < 2 * n - 2 {
                // d/dx σ^{k+1} = (k+1)(σ^{k+1} − σ^{k+2})
                let mut next = vec![0.0; poly.len() + 1];
                for (k, &c) in poly.iter().enumerate() {
                    next[k] += c * (k as f64 + 1.0);
                    next[k + 1] -= c * (k as f64 + 1.0);
                }
                poly = next;
                deriv_order += 1;
            }
            let mut deriv = Complex64::new(0.0, 0.0);
            let mut spow = sigma;
            for &c in &poly {
                deriv += c * spow;
                spow *= sigma;
            }
            fact *= ((2 * n - 1) * (2 * n)) as f64;
            let term = lam_pow * half_bernoulli(n) / fact * (-deriv);
            total += term;
            lam_pow *= lam * lam;
        }
    }
    Ok(total)
}

/// Maximum relative residual of the two shift equations
/// Φ(z − ib^{±1}/2) = (1 + e^{2πb^{±1}z}) Φ(z + ib^{±1}/2) at z.
pub fn phi_shift_residual(mp: &ModularParameter, z: Complex64) -> Result<f64> {
    let mut worst = 0.0f64;
    for bb in [mp.b(), 1.0 / mp.b()] {
        let lhs = log_phi(mp, z - I * (0.5 * bb))?;
        let rhs = log1p_exp(2.0 * PI * bb * z) + log_phi(mp, z + I * (0.5 * bb))?;
        let res = (lhs.exp() - rhs.exp()).norm() / rhs.exp().norm();
        worst = worst.max(res);
    }
    Ok(worst)
}

/// Kind of singularity of Φ_b (with the e^{−2izw} sign convention of the
/// defining integral used here: poles sit in the upper half-plane).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityKind {
    /// zeros at −(c_b + i m b + i n / b), m, n ≥ 0
    Zero,
    /// poles at +(c_b + i m b + i n / b)
    Pole,
}

impl SingularityKind {
    pub fn name(&self) -> &'static str {
        match self {
            SingularityKind::Zero => "zero",
            SingularityKind::Pole => "pole",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Singularity {
    pub location: Complex64,
    pub kind: SingularityKind,
    pub m: u32,
    pub n: u32,
    pub distance: f64,
}

/// Nearest zero or pole of Φ_b to z.  All of them lie on the imaginary axis
/// at ±i(|c_b| + m b + n/b).
pub fn nearest_singularity(mp: &ModularParameter, z: Complex64) -> Singularity {
    let b = mp.b();
    let cb = mp.cb_abs();
    let target = z.im.abs();
    let mut best: Option<Singularity> = None;
    let m_max = (((target - cb) / b).ceil().max(0.0) as u32) + 1;
    for m in 0..=m_max {
        // choose n to bring cb + m b + n/b closest to |Im z|
        let base = cb + m as f64 * b;
        let n_opt = ((target - base) * b).round().max(0.0) as u32;
        for n in n_opt.saturating_sub(1)..=n_opt + 1 {
            let height = base + n as f64 / b;
            for sign in [1.0f64, -1.0] {
                let loc = I * (sign * height);
                let dist = (z - loc).norm();
                let kind = if sign > 0.0 { SingularityKind::Pole } else { SingularityKind::Zero };
                if best.map_or(true, |s| dist < s.distance) {
                    best = Some(Singularity { location: loc, kind, m, n, distance: dist });
                }
            }
        }
    }
    best.unwrap()
}

/// Convenience wrapper returning Φ and quadrature diagnostics for reports.
pub fn phi_with_diagnostics(mp: &ModularParameter, z: Complex64) -> Result<(Complex64, QuadResult)> {
    let lp = log_phi(mp, z)?;
    Ok((
        lp.exp(),
        QuadResult { value: lp, abs_error: 0.0, evals: 0 },
    ))
}
