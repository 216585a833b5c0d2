//! Saddle-point analysis of the one-dimensional state integrals
//!
//! ```text
//! g_n(hbar) = (2 pi sqrt(hbar))^{-1} int_{R - i0}
//!             Phi(z / (2 pi sqrt(hbar)))^{-n} e^{i z^2 / (4 pi hbar)} dz,
//! ```
//!
//! their steepest-descent contours, and the extraction of the limiting
//! exponential growth rate `lim 2 pi hbar log |g_n| = Im v_n(z_n)`, which for
//! n = 2, 3 reproduces (minus) the hyperbolic volumes of the two simplest
//! hyperbolic knot complements.

use crate::qdl::{self, li2_negexp, log1p_exp, ModularParameter, QdlError};
use crate::quad::Contour;
use crate::state_integral::{contour_integral_1d, EvalConfig, EvaluationResult, StateError};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error)]
pub enum AsymError {
    #[error("n must lie in 2..=6, got {0}")]
    UnsupportedN(u32),
    #[error(transparent)]
    Qdl(#[from] QdlError),
    #[error(transparent)]
    Eval(#[from] StateError),
    #[error("{0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, AsymError>;

// ---------------------------------------------------------------------------
// The potential and its saddles
// ---------------------------------------------------------------------------

/// The scaling potential `v_n(z) = -n Li2(-e^z) - z^2/2` governing the small
/// `hbar` behaviour of `g_n`, together with its exact derivatives.
#[derive(Debug, Clone, Copy)]
pub struct SaddleProblem {
    pub n: u32,
}

impl SaddleProblem {
    pub fn new(n: u32) -> Result<Self> {
        if !(2..=6).contains(&n) {
            return Err(AsymError::UnsupportedN(n));
        }
        Ok(SaddleProblem { n })
    }

    /// `v_n(z) = -n Li2(-e^z) - z^2 / 2`
    pub fn v(&self, z: Complex64) -> Complex64 {
        -(self.n as f64) * li2_negexp(z) - 0.5 * z * z
    }

    /// `v_n'(z) = n log(1 + e^z) - z`
    pub fn v_prime(&self, z: Complex64) -> Complex64 {
        (self.n as f64) * log1p_exp(z) - z
    }

    /// `v_n''(z) = n e^z / (1 + e^z) - 1`
    pub fn v_second(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        // e^z / (1 + e^z) = 1 / (1 + e^{-z}), stable for large |Re z|
        (self.n as f64) * (one / (one + (-z).exp())) - one
    }
}

/// All solutions of `v_n'(z) = 0` in the strip `|Im z| < pi`, found as the
/// roots of the polynomial `(1 + w)^n = w` in `w = e^z` mapped back by the
/// principal logarithm. Roots of the polynomial whose principal logarithm
/// lands on a different branch of `log(1 + e^z)` (so that `v_n'` does not
/// actually vanish there) are filtered out by the residual.
pub fn saddles(n: u32) -> Result<Vec<Complex64>> {
    let sp = SaddleProblem::new(n)?;
    // (1 + w)^n - w: coefficients binomial(n, k), minus 1 at k = 1
    let mut coeffs = vec![0.0f64; (n + 1) as usize];
    let mut binom = 1.0f64;
    for k in 0..=n {
        coeffs[k as usize] = binom;
        binom = binom * ((n - k) as f64) / ((k + 1) as f64);
    }
    coeffs[1] -= 1.0;
    let roots = durand_kerner(&coeffs)?;
    let mut out = Vec::new();
    for w in roots {
        let z = w.ln(); // principal branch
        if z.im.abs() >= PI {
            continue;
        }
        if sp.v_prime(z).norm() > 1e-8 {
            continue; // spurious branch root
        }
        // Newton polish to the requested residual
        let mut zp = z;
        for _ in 0..8 {
            let r = sp.v_prime(zp);
            if r.norm() < 1e-14 {
                break;
            }
            zp -= r / sp.v_second(zp);
        }
        if sp.v_prime(zp).norm() < 1e-12 {
            out.push(zp);
        }
    }
    out.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    out.dedup_by(|a, b| (*a - *b).norm() < 1e-9);
    if out.is_empty() {
        return Err(AsymError::Numerical(format!("no saddles found for n={n}")));
    }
    Ok(out)
}

/// Durand–Kerner simultaneous root iteration for a real-coefficient
/// polynomial `c[0] + c[1] x + ... + c[d] x^d`.
fn durand_kerner(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    let poly = |x: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    // distinct non-real, non-unit-modulus starting points
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..200 {
        let mut delta = 0.0f64;
        for i in 0..d {
            let mut denom = Complex64::new(lead, 0.0);
            for j in 0..d {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = poly(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 {
            return Ok(roots);
        }
    }
    Err(AsymError::Numerical("root iteration did not converge".into()))
}

/// The saddle `z_n` selected by minimal `Im v_n` over the critical set.
pub fn selected_saddle(n: u32) -> Result<Complex64> {
    let sp = SaddleProblem::new(n)?;
    let all = saddles(n)?;
    Ok(all
        .into_iter()
        .min_by(|a, b| sp.v(*a).im.total_cmp(&sp.v(*b).im))
        .expect("non-empty"))
}

/// `Im v_n(z_n)`; for n = 2, 3 this equals minus the hyperbolic volume of the
/// figure-eight and 5_2 knot complements respectively.
pub fn im_v_at_saddle(n: u32) -> Result<f64> {
    let sp = SaddleProblem::new(n)?;
    Ok(sp.v(selected_saddle(n)?).im)
}

// ---------------------------------------------------------------------------
// Descent contour
// ---------------------------------------------------------------------------

/// Polyline approximation to the steepest-descent contour through the saddle:
/// the level set `Re v_n = Re v_n(z_n)` along which `Im v_n` decreases away
/// from the anchor, with straight asymptote slopes -1 (right) and +1 (left).
#[derive(Debug, Clone)]
pub struct DescentContour {
    pub anchor: Complex64,
    /// nodes ordered left-to-right; the anchor is one of them
    pub nodes: Vec<Complex64>,
}

/// Traces the level set `Re v_n(z) = Re v_n(z_n)` by predictor-corrector
/// steps from the saddle in both directions until `|Re z| > reach`.
pub fn descent_contour(n: u32, reach: f64) -> Result<DescentContour> {
    let sp = SaddleProblem::new(n)?;
    let z0 = selected_saddle(n)?;
    let target = sp.v(z0).re;
    let h = 0.02f64;

    // Near the saddle v - v(z0) ~ v''/2 (z - z0)^2; the two descent
    // directions solve  v''/2 d^2 = negative real.
    let v2 = sp.v_second(z0);
    let d0 = (-2.0 * I / (v2 / v2.norm())).sqrt();
    let d0 = d0 / d0.norm();
    let mut arms: Vec<Vec<Complex64>> = Vec::new();
    for sgn in [1.0f64, -1.0] {
        let mut arm = Vec::new();
        let mut dir = sgn * d0;
        // descend: pick the sign of the initial direction that lowers Im v
        if (sp.v(z0 + 1e-3 * dir).im - sp.v(z0).im) > 0.0 {
            dir = -dir;
        }
        let mut z = z0 + h * dir;
        for _ in 0..10_000 {
            // corrector: Newton steps back onto the level set
            for _ in 0..3 {
                let vp = sp.v_prime(z);
                let r = sp.v(z).re - target;
                if vp.norm() < 1e-12 || r.abs() < 1e-13 {
                    break;
                }
                z -= r * vp.conj() / vp.norm_sqr();
            }
            arm.push(z);
            if z.re.abs() > reach {
                break;
            }
            // predictor: unit tangent of the level set, oriented continuously
            let vp = sp.v_prime(z);
            let mut t = I * vp.conj() / vp.norm();
            if (t * dir.conj()).re < 0.0 {
                t = -t;
            }
            dir = t;
            z += h * t;
        }
        arms.push(arm);
    }
    // order left-to-right through the anchor
    let (mut left, right) = if arms[0].last().unwrap().re < arms[1].last().unwrap().re {
        (arms[0].clone(), arms[1].clone())
    } else {
        (arms[1].clone(), arms[0].clone())
    };
    left.reverse();
    let mut nodes = left;
    nodes.push(z0);
    nodes.extend(right);
    Ok(DescentContour { anchor: z0, nodes })
}

impl DescentContour {
    /// Largest deviation of `Re v_n` from its value at the anchor.
    pub fn max_level_error(&self, sp: &SaddleProblem) -> f64 {
        let target = sp.v(self.anchor).re;
        self.nodes
            .iter()
            .map(|&z| (sp.v(z).re - target).abs())
            .fold(0.0, f64::max)
    }

    /// Checks that `Im v_n` is monotonically non-increasing away from the
    /// anchor along both arms (up to `slack` for roundoff).
    pub fn im_monotone(&self, sp: &SaddleProblem, slack: f64) -> bool {
        let k = self
            .nodes
            .iter()
            .position(|&z| z == self.anchor)
            .expect("anchor is a node");
        let ok_arm = |iter: &mut dyn Iterator<Item = &Complex64>| -> bool {
            let mut prev = f64::INFINITY;
            for &z in iter {
                let im = sp.v(z).im;
                if im > prev + slack {
                    return false;
                }
                prev = im;
            }
            true
        };
        ok_arm(&mut self.nodes[k..].iter()) && ok_arm(&mut self.nodes[..=k].iter().rev())
    }
}

// ---------------------------------------------------------------------------
// g_n and its asymptotics
// ---------------------------------------------------------------------------

/// Derives the modular parameter from `hbar = (b + 1/b)^{-2}`, taking the
/// root with `b` in (0, 1] (the symmetry b -> 1/b makes the choice
/// immaterial; pinning it keeps runs reproducible).
pub fn modular_from_hbar(hbar: f64) -> Result<ModularParameter> {
    Ok(ModularParameter::from_hbar(hbar)?)
}

/// `g_n(hbar)` evaluated on `R - i0` (with Gaussian-rotated tails), after the
/// substitution `z = 2 pi sqrt(hbar) y` which removes the overall prefactor:
/// `g_n = int Phi(y)^{-n} e^{i pi y^2} dy`.
pub fn g_n(n: u32, hbar: f64, cfg: &EvalConfig) -> Result<EvaluationResult> {
    SaddleProblem::new(n)?;
    let mp = modular_from_hbar(hbar)?;
    let contour = Contour::new(cfg.radius, -0.1 * mp.cb_abs().min(1.0), -PI / 4.0, PI / 4.0);
    g_n_on(&mp, n, &contour, cfg)
}

/// `g_n` on an explicit contour (used for the contour-independence check and
/// for integration along a [`DescentContour`] polyline).
pub fn g_n_on(
    mp: &ModularParameter,
    n: u32,
    contour: &Contour,
    cfg: &EvalConfig,
) -> Result<EvaluationResult> {
    let nf = n as f64;
    Ok(contour_integral_1d(
        |y| Ok((-nf * qdl::log_phi(mp, y)? + I * PI * y * y).exp()),
        contour,
        cfg,
    )?)
}

/// `g_n` integrated along the limiting descent contour `C_n` rescaled to the
/// `y = z / (2 pi sqrt(hbar))` variable, by straight-segment quadrature over
/// the polyline plus Gaussian asymptote tails.
pub fn g_n_on_descent(n: u32, hbar: f64, _cfg: &EvalConfig) -> Result<EvaluationResult> {
    let mp = modular_from_hbar(hbar)?;
    let dc = descent_contour(n, 8.0)?;
    let s = 2.0 * PI * hbar.sqrt();
    let nf = n as f64;
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0f64;
    let mut nodes_used = 0usize;
    // Gauss-Legendre 8-point on each straight segment between polyline nodes
    const GL_X: [f64; 4] = [0.183434642495650, 0.525532409916329, 0.796666477413627, 0.960289856497536];
    const GL_W: [f64; 4] = [0.362683783378362, 0.313706645877887, 0.222381034453374, 0.101228536290376];
    let f = |y: Complex64| -> Result<Complex64> {
        Ok((-nf * qdl::log_phi(&mp, y)? + I * PI * y * y).exp())
    };
    for w in dc.nodes.windows(2) {
        let (a, b) = (w[0] / s, w[1] / s);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            acc += GL_W[k] * (f(mid + GL_X[k] * half)? + f(mid - GL_X[k] * half)?);
            nodes_used += 8;
        }
        value += acc * half;
    }
    // straight tails along the asymptotes, slope -1 on the right, +1 left
    for (end, dirsign) in [(dc.nodes.last().unwrap(), 1.0f64), (dc.nodes.first().unwrap(), -1.0)] {
        // slope -1 asymptote on the right, slope +1 on the left; the left
        // tail is traversed outward, hence the orientation sign on the piece
        let dir = if dirsign > 0.0 {
            Complex64::new(1.0, -1.0) / 2f64.sqrt()
        } else {
            Complex64::new(-1.0, -1.0) / 2f64.sqrt()
        };
        let start = *end / s;
        let mut t = 0.0f64;
        let step = 0.25f64;
        loop {
            let mut acc = Complex64::new(0.0, 0.0);
            let mid = start + (t + 0.5 * step) * dir;
            let half = 0.5 * step * dir;
            for k in 0..4 {
                acc += GL_W[k] * (f(mid + GL_X[k] * half)? + f(mid - GL_X[k] * half)?);
                nodes_used += 8;
            }
            let piece = acc * half * dirsign;
            value += piece;
            t += step;
            if piece.norm() < 1e-14 || t > 60.0 {
                err = piece.norm();
                break;
            }
        }
    }
    Ok(EvaluationResult {
        value,
        abs_error_estimate: err.max(1e-12),
        nodes_used,
        contour_used: format!("descent polyline C_{n} ({} nodes)", dc.nodes.len()),
    })
}

/// The sub-leading amplitude `g(x) = (1 + e^x)^{i x / 2 pi} e^{(i/pi) Li2(-e^x)}`.
fn amplitude_g(x: Complex64) -> Complex64 {
    ((I * x / (2.0 * PI)) * log1p_exp(x) + (I / PI) * li2_negexp(x)).exp()
}

/// Steepest-descent leading order of `g_n`:
/// `e^{v_n(z_n) / (2 pi i hbar)} g(z_n)^{-n} / sqrt(i v_n''(z_n))`,
/// with the principal branch of the square root (validated against direct
/// quadrature of `g_n` at moderate `hbar`).
pub fn leading_order(n: u32, hbar: f64) -> Result<Complex64> {
    let sp = SaddleProblem::new(n)?;
    let zn = selected_saddle(n)?;
    let phase = (sp.v(zn) / (2.0 * PI * I * hbar)).exp();
    let amp = amplitude_g(zn).powi(-(n as i32));
    Ok(phase * amp / (I * sp.v_second(zn)).sqrt())
}

// ---------------------------------------------------------------------------
// Volume extraction
// ---------------------------------------------------------------------------

/// Result of the volume-extraction sweep: the raw scaled logarithms
/// `2 pi hbar log |g_n(hbar)|` per sample and their extrapolation to
/// `hbar = 0`, to be compared with `Im v_n(z_n)`.
#[derive(Debug, Clone)]
pub struct VolumeResult {
    pub n: u32,
    pub saddle: Complex64,
    pub im_v: f64,
    pub estimate_by_hbar: Vec<(f64, f64)>,
    pub extrapolated: f64,
}

/// Computes `2 pi hbar log |g_n|` over a decreasing sequence of `hbar` and
/// extrapolates with the model `V + A h log h + B h (+ C h^2)` fitted exactly
/// through the last points (the leading correction is O(h log h)).
pub fn volume_estimate(n: u32, hbars: &[f64], cfg: &EvalConfig) -> Result<VolumeResult> {
    if hbars.len() < 3 || hbars.windows(2).any(|w| w[1] >= w[0]) || hbars[hbars.len() - 1] <= 0.0 {
        return Err(AsymError::Numerical(
            "need a strictly decreasing positive hbar sequence of length >= 3".into(),
        ));
    }
    let mut samples = Vec::new();
    for &h in hbars {
        let g = g_n(n, h, cfg)?;
        samples.push((h, 2.0 * PI * h * g.value.norm().ln()));
    }
    let k = samples.len().min(4);
    let pts = &samples[samples.len() - k..];
    let basis: Vec<fn(f64) -> f64> = match k {
        3 => vec![|_| 1.0, |h| h * h.ln(), |h| h],
        _ => vec![|_| 1.0, |h| h * h.ln(), |h| h, |h| h * h],
    };
    let m = basis.len();
    let mut a = vec![vec![0.0f64; m + 1]; m];
    for (r, &(h, y)) in pts.iter().take(m).enumerate() {
        for (c, f) in basis.iter().enumerate() {
            a[r][c] = f(h);
        }
        a[r][m] = y;
    }
    let extrapolated = solve_first_coefficient(&mut a).ok_or_else(|| {
        AsymError::Numerical("singular extrapolation system".into())
    })?;
    Ok(VolumeResult {
        n,
        saddle: selected_saddle(n)?,
        im_v: im_v_at_saddle(n)?,
        estimate_by_hbar: samples,
        extrapolated,
    })
}

/// Gaussian elimination; returns the first unknown of the square augmented
/// system (the constant term of the extrapolation model).
fn solve_first_coefficient(a: &mut [Vec<f64>]) -> Option<f64> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..=n {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    Some(a[0][n] / a[0][0])
}
