//! Hypergeometric-type integral identities for the noncompact quantum
//! dilogarithm, each paired with a direct quadrature cross-check.
//!
//! The identities covered are
//! - an integral analogue of Ramanujan's ₁ψ₁ summation: the Fourier
//!   integral Ψ(u,v,w) = ∫ Φ(x+u)/Φ(x+v) e^{2πiwx} dx has two equivalent
//!   closed forms related by the inversion relation,
//! - the Fourier transforms of Φ and 1/Φ (degenerate limits of Ψ),
//! - the family I_n(a₁..a_n; b₁..b_{n−1}; w) of integrals of products
//!   Φ(x+a_j)/Φ(x+b_j−c_b) with b_n = i0, including the closed form of I₁,
//!   the Euler–Heine transformation of I₂ and the Saalschütz evaluation
//!   of I₃ together with its c → −∞ degeneration.
//!
//! Quadrature contours are horizontal lines Im x = const chosen inside the
//! pole-free strip of each integrand, with the right tail rotated downward
//! whenever the integrand has net Gaussian decay instead of plain
//! exponential decay.  Parameter points for the check batteries are drawn
//! with a seeded generator inside the convergence polytope, scaled by 0.5
//! toward its analytic center so every contour keeps a safe distance from
//! the pole lattices.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::qdl::{self, ModularParameter, QdlError};
use crate::quad::Contour;
use crate::state_integral::{contour_integral_1d, EvalConfig, EvaluationResult, StateError};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error)]
pub enum IdentityError {
    #[error("parameters outside the convergence domain: {0}")]
    OutOfDomain(String),
    #[error(transparent)]
    Qdl(#[from] QdlError),
    #[error(transparent)]
    Eval(#[from] StateError),
}

pub type Result<T> = std::result::Result<T, IdentityError>;

fn phi(mp: &ModularParameter, z: Complex64) -> Result<Complex64> {
    Ok(qdl::phi(mp, z)?)
}

// ---------------------------------------------------------------------------
// Ramanujan-type Fourier integral Ψ(u, v, w)
// ---------------------------------------------------------------------------

/// Parameters of Ψ(u,v,w) = ∫ Φ(x+u)/Φ(x+v) e^{2πiwx} dx.
#[derive(Debug, Clone, Copy)]
pub struct RamanujanParams {
    pub u: Complex64,
    pub v: Complex64,
    pub w: Complex64,
}

impl RamanujanParams {
    /// Convergence domain of the real-axis contour:
    /// Im(v+c_b) > 0, Im(−u+c_b) > 0 (poles stay off the axis) and
    /// Im(v−u) < Im w < 0 (exponential decay of both tails).
    pub fn validate(&self, mp: &ModularParameter) -> Result<()> {
        let cb = mp.cb_abs();
        if self.v.im + cb <= 0.0 || -self.u.im + cb <= 0.0 {
            return Err(IdentityError::OutOfDomain(format!(
                "need Im(v) > -|c_b| and Im(u) < |c_b|; got u = {}, v = {}, |c_b| = {}",
                self.u, self.v, cb
            )));
        }
        if !(self.v.im - self.u.im < self.w.im && self.w.im < 0.0) {
            return Err(IdentityError::OutOfDomain(format!(
                "need Im(v-u) < Im(w) < 0; got Im(v-u) = {}, Im(w) = {}",
                self.v.im - self.u.im,
                self.w.im
            )));
        }
        Ok(())
    }
}

/// Evaluation strategy for an identity: direct quadrature or closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Integral,
    Closed,
}

/// Ψ(u,v,w), either by quadrature along ℝ or by its closed-form evaluation
/// ζ_o Φ(u−v−c_b) Φ(w+c_b) / Φ(u−v+w−c_b) · e^{−2πiw(v+c_b)}.
pub fn ramanujan_psi(
    mp: &ModularParameter,
    p: &RamanujanParams,
    mode: EvalMode,
    cfg: &EvalConfig,
) -> Result<Complex64> {
    p.validate(mp)?;
    match mode {
        EvalMode::Integral => Ok(ramanujan_psi_quadrature(mp, p, cfg)?.value),
        EvalMode::Closed => {
            let cb = mp.c_b();
            let num = phi(mp, p.u - p.v - cb)? * phi(mp, p.w + cb)?;
            let den = phi(mp, p.u - p.v + p.w - cb)?;
            Ok(mp.zeta_o() * num / den * (-2.0 * PI * I * p.w * (p.v + cb)).exp())
        }
    }
}

/// Quadrature of Ψ(u,v,w) with the full error report.
pub fn ramanujan_psi_quadrature(
    mp: &ModularParameter,
    p: &RamanujanParams,
    cfg: &EvalConfig,
) -> Result<EvaluationResult> {
    p.validate(mp)?;
    let (u, v, w) = (p.u, p.v, p.w);
    let contour = Contour::new(cfg.radius, 0.0, 0.0, 0.0);
    let r = contour_integral_1d(
        |x| {
            let lf = qdl::log_phi(mp, x + u)? - qdl::log_phi(mp, x + v)?;
            Ok((lf + 2.0 * PI * I * w * x).exp())
        },
        &contour,
        cfg,
    )?;
    Ok(r)
}

/// The second closed form of Ψ(u,v,w), obtained from the first through the
/// inversion relation:
/// ζ_o⁻¹ Φ(v−u−w+c_b) / (Φ(v−u+c_b) Φ(−w−c_b)) · e^{−2πiw(u−c_b)}.
pub fn ramanujan_psi_inverted(mp: &ModularParameter, p: &RamanujanParams) -> Result<Complex64> {
    p.validate(mp)?;
    let cb = mp.c_b();
    let num = phi(mp, p.v - p.u - p.w + cb)?;
    let den = phi(mp, p.v - p.u + cb)? * phi(mp, -p.w - cb)?;
    Ok(num / den / mp.zeta_o() * (-2.0 * PI * I * p.w * (p.u - cb)).exp())
}

// ---------------------------------------------------------------------------
// Fourier transforms of Φ and 1/Φ
// ---------------------------------------------------------------------------

fn fourier_strip_check(mp: &ModularParameter, w: Complex64) -> Result<f64> {
    let cb = mp.cb_abs();
    if !(-cb < w.im && w.im < 0.0) {
        return Err(IdentityError::OutOfDomain(format!(
            "need -|c_b| < Im(w) < 0; got Im(w) = {}, |c_b| = {}",
            w.im, cb
        )));
    }
    // Contour offset between the envelope growth rate |Im w| and the first
    // pole line of Φ at Im x = |c_b|.
    Ok(0.5 * (w.im.abs() + cb))
}

/// ∫ Φ(x) e^{2πiwx} dx, closed form ζ_o⁻¹ e^{2πiwc_b} / Φ(−w−c_b).
pub fn fourier_phi_plus(mp: &ModularParameter, w: Complex64) -> Result<Complex64> {
    fourier_strip_check(mp, w)?;
    let cb = mp.c_b();
    Ok((2.0 * PI * I * w * cb).exp() / (mp.zeta_o() * phi(mp, -w - cb)?))
}

/// The equivalent closed form ζ_o e^{−iπw²} Φ(w+c_b) of the same transform.
pub fn fourier_phi_plus_alt(mp: &ModularParameter, w: Complex64) -> Result<Complex64> {
    fourier_strip_check(mp, w)?;
    let cb = mp.c_b();
    Ok(mp.zeta_o() * (-I * PI * w * w).exp() * phi(mp, w + cb)?)
}

/// Quadrature of ∫ Φ(x) e^{2πiwx} dx along the line Im x = δ > 0, where the
/// Gaussian tail of Φ supplies the decay that the real axis lacks.
pub fn fourier_phi_plus_quadrature(
    mp: &ModularParameter,
    w: Complex64,
    cfg: &EvalConfig,
) -> Result<EvaluationResult> {
    let delta = fourier_strip_check(mp, w)?;
    let contour = Contour::new(cfg.radius, delta, 0.0, 0.0);
    let r = contour_integral_1d(
        |x| Ok((qdl::log_phi(mp, x)? + 2.0 * PI * I * w * x).exp()),
        &contour,
        cfg,
    )?;
    Ok(r)
}

/// ∫ Φ(x)⁻¹ e^{2πiwx} dx, closed form ζ_o e^{−2πiwc_b} Φ(w+c_b).
pub fn fourier_phi_minus(mp: &ModularParameter, w: Complex64) -> Result<Complex64> {
    fourier_strip_check(mp, w)?;
    let cb = mp.c_b();
    Ok(mp.zeta_o() * (-2.0 * PI * I * w * cb).exp() * phi(mp, w + cb)?)
}

/// The equivalent closed form ζ_o⁻¹ e^{iπw²} / Φ(−w−c_b).
pub fn fourier_phi_minus_alt(mp: &ModularParameter, w: Complex64) -> Result<Complex64> {
    fourier_strip_check(mp, w)?;
    let cb = mp.c_b();
    Ok((I * PI * w * w).exp() / (mp.zeta_o() * phi(mp, -w - cb)?))
}

/// Quadrature of ∫ Φ(x)⁻¹ e^{2πiwx} dx along the line Im x = −δ < 0.
pub fn fourier_phi_minus_quadrature(
    mp: &ModularParameter,
    w: Complex64,
    cfg: &EvalConfig,
) -> Result<EvaluationResult> {
    let delta = fourier_strip_check(mp, w)?;
    let contour = Contour::new(cfg.radius, -delta, 0.0, 0.0);
    let r = contour_integral_1d(
        |x| Ok((-qdl::log_phi(mp, x)? + 2.0 * PI * I * w * x).exp()),
        &contour,
        cfg,
    )?;
    Ok(r)
}

// ---------------------------------------------------------------------------
// The integral hypergeometric family I_n
// ---------------------------------------------------------------------------

/// A parameter of I_n; `None` stands for −∞, whose Φ factor degenerates to 1.
pub type IhgEntry = Option<Complex64>;

/// I_n(a₁..a_n; b₁..b_{n−1}; w) = ∫ e^{2πix(w−c_b)} ∏ Φ(x+a_j)/Φ(x+b_j−c_b) dx
/// with b_n = i0 (the contour passes above the zeros that this last factor
/// places on the real axis).  `None` entries stand for parameters sent to −∞
/// along the real direction; their factors are identically 1.
///
/// Domain: Im(b_j) > 0 and Im(c_b − a_j) > 0 for finite entries,
/// Im(w − c_b) < 0 for the left tail, and on the right either a surplus of
/// denominator factors (net Gaussian decay, handled by rotating the tail
/// downward) or, with balanced counts, a positive decay rate
/// Im(w − c_b + Σa_j − Σ(b_j − c_b)) > 0.
pub fn ihg(
    mp: &ModularParameter,
    a: &[IhgEntry],
    b: &[IhgEntry],
    w: Complex64,
    cfg: &EvalConfig,
) -> Result<EvaluationResult> {
    let n = a.len();
    if n == 0 || b.len() != n - 1 {
        return Err(IdentityError::OutOfDomain(format!(
            "need n >= 1 numerator entries and n-1 denominator entries; got {} and {}",
            n,
            b.len()
        )));
    }
    let cb = mp.c_b();
    let cb_abs = mp.cb_abs();
    let fin_a: Vec<Complex64> = a.iter().flatten().copied().collect();
    let fin_b: Vec<Complex64> = b.iter().flatten().copied().collect();
    for aj in &fin_a {
        if cb_abs - aj.im <= 0.0 {
            return Err(IdentityError::OutOfDomain(format!(
                "need Im(a_j) < |c_b| for every finite a_j; got a_j = {aj}, |c_b| = {cb_abs}"
            )));
        }
    }
    for bj in &fin_b {
        if bj.im <= 0.0 {
            return Err(IdentityError::OutOfDomain(format!(
                "need Im(b_j) > 0 for every finite b_j; got b_j = {bj}"
            )));
        }
    }
    if w.im - cb_abs >= 0.0 {
        return Err(IdentityError::OutOfDomain(format!(
            "need Im(w) < |c_b| for the left tail; got Im(w) = {}",
            w.im
        )));
    }
    // Net count of Gaussian factors at Re x → +∞: every finite denominator
    // (including the implicit b_n = i0) decays like e^{-iπx²}, every finite
    // numerator grows like e^{+iπx²}.
    let deficit = (fin_b.len() + 1) as i32 - fin_a.len() as i32;
    if deficit < 0 {
        return Err(IdentityError::OutOfDomain(
            "more numerator than denominator factors: the integral diverges".into(),
        ));
    }
    if deficit == 0 {
        let xi: Complex64 = w - cb + fin_a.iter().sum::<Complex64>()
            - fin_b.iter().map(|bj| bj - cb).sum::<Complex64>()
            + cb; // the implicit b_n = i0 denominator contributes −(0 − c_b)
        if xi.im <= 0.0 {
            return Err(IdentityError::OutOfDomain(format!(
                "balanced factor counts need a positive right-tail rate; got Im = {}",
                xi.im
            )));
        }
    }
    // Contour: Im x = δ, strictly between the zeros of the b_n factor just
    // below the axis and the lowest numerator pole line Im x = |c_b| − Im a_j.
    let mut ceiling = cb_abs;
    for aj in &fin_a {
        ceiling = ceiling.min(cb_abs - aj.im);
    }
    let delta = 0.35 * ceiling;
    let contour = if deficit > 0 {
        // Surplus denominators give Gaussian decay on the downward-rotated
        // tail, but the integrand can grow exponentially along the straight
        // segment (the e^{2πix(w−c_b)} envelope outpaces the factor decay).
        // Turn downward as soon as the ray clears the zero lattices of the
        // denominator factors, which extend leftward from Re x = −Re b_j.
        let mut r_right: f64 = 0.6;
        for bj in &fin_b {
            r_right = r_right.max(0.3 - bj.re);
        }
        let half = 0.5 * (cfg.radius + r_right);
        let mut c = Contour::new(half, delta, 0.0, PI / 4.0);
        c.shift = Complex64::new(r_right - half, 0.0);
        c
    } else {
        Contour::new(cfg.radius, delta, 0.0, 0.0)
    };
    let r = contour_integral_1d(
        |x| {
            let mut lf = 2.0 * PI * I * x * (w - cb);
            for aj in &fin_a {
                lf += qdl::log_phi(mp, x + aj)?;
            }
            lf -= qdl::log_phi(mp, x - cb)?;
            for bj in &fin_b {
                lf -= qdl::log_phi(mp, x + bj - cb)?;
            }
            Ok(lf.exp())
        },
        &contour,
        cfg,
    )?;
    Ok(r)
}

/// Closed form of I₁: ζ_o Φ(a) Φ(w) / Φ(a+w−c_b).
pub fn ihg1_closed(mp: &ModularParameter, a: Complex64, w: Complex64) -> Result<Complex64> {
    let cb = mp.c_b();
    Ok(mp.zeta_o() * phi(mp, a)? * phi(mp, w)? / phi(mp, a + w - cb)?)
}

/// Saalschütz closed form of I₃(a,b,c; d, a+b+c−d−c_b; −c_b):
/// ζ_o³ e^{iπd(2c_b−d)} Φ(a)Φ(b)Φ(c)Φ(a−d)Φ(b−d)Φ(c−d)
/// / (Φ(a+b−d−c_b)Φ(b+c−d−c_b)Φ(c+a−d−c_b)).
pub fn saalschuetz_closed(
    mp: &ModularParameter,
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
) -> Result<Complex64> {
    let cb = mp.c_b();
    let z3 = mp.zeta_o().powi(3);
    let pref = z3 * (I * PI * d * (2.0 * cb - d)).exp();
    let num = phi(mp, a)?
        * phi(mp, b)?
        * phi(mp, c)?
        * phi(mp, a - d)?
        * phi(mp, b - d)?
        * phi(mp, c - d)?;
    let den =
        phi(mp, a + b - d - cb)? * phi(mp, b + c - d - cb)? * phi(mp, c + a - d - cb)?;
    Ok(pref * num / den)
}

/// The c → −∞ degeneration of the Saalschütz evaluation:
/// I₂(a,b; d; −c_b) = ζ_o³ e^{iπd(2c_b−d)} Φ(a)Φ(b)Φ(a−d)Φ(b−d) / Φ(a+b−d−c_b).
pub fn saalschuetz_degenerate_closed(
    mp: &ModularParameter,
    a: Complex64,
    b: Complex64,
    d: Complex64,
) -> Result<Complex64> {
    let cb = mp.c_b();
    let z3 = mp.zeta_o().powi(3);
    let pref = z3 * (I * PI * d * (2.0 * cb - d)).exp();
    let num = phi(mp, a)? * phi(mp, b)? * phi(mp, a - d)? * phi(mp, b - d)?;
    Ok(pref * num / phi(mp, a + b - d - cb)?)
}

/// Record of one numeric identity check.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub parameters: String,
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub rel_err: f64,
    pub pass: bool,
}

/// A batch of identity checks with a shared tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub suite: String,
    pub tolerance: f64,
    pub checks: Vec<IdentityCheck>,
    pub max_rel_err: f64,
    pub pass: bool,
}

impl IdentityReport {
    pub fn new(suite: &str, tolerance: f64) -> Self {
        IdentityReport {
            suite: suite.to_string(),
            tolerance,
            checks: Vec::new(),
            max_rel_err: 0.0,
            pass: true,
        }
    }

    pub fn push(&mut self, identity: &str, parameters: String, lhs: Complex64, rhs: Complex64) {
        let scale = rhs.norm().max(lhs.norm()).max(f64::MIN_POSITIVE);
        let rel = (lhs - rhs).norm() / scale;
        let pass = rel < self.tolerance;
        self.max_rel_err = self.max_rel_err.max(rel);
        self.pass &= pass;
        self.checks.push(IdentityCheck {
            identity: identity.to_string(),
            parameters,
            lhs: [lhs.re, lhs.im],
            rhs: [rhs.re, rhs.im],
            rel_err: rel,
            pass,
        });
    }

    /// Lines describing the failed checks, parameters verbatim.
    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| {
                format!(
                    "{}: rel err {:.3e} at {} (lhs {:?}, rhs {:?})",
                    c.identity, c.rel_err, c.parameters, c.lhs, c.rhs
                )
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Seeded in-domain sampling
// ---------------------------------------------------------------------------

fn unit(rng: &mut StdRng) -> f64 {
    rng.gen::<f64>()
}

fn shrink(p: Complex64, center: Complex64) -> Complex64 {
    center + 0.5 * (p - center)
}

/// Seeded sample of Ψ parameters: raw points are drawn inside the open
/// convergence polytope (real parts boxed to |Re| < 0.7, imaginary parts in
/// strips that keep both pole lattices off the contour, Im w drawn as a
/// convex combination of its strip bounds), then pulled halfway toward the
/// polytope's analytic center so no coordinate sits near a face.
pub fn sample_ramanujan_params(
    mp: &ModularParameter,
    seed: u64,
    count: usize,
) -> Vec<RamanujanParams> {
    let mut rng = StdRng::seed_from_u64(seed);
    let center = RamanujanParams {
        u: Complex64::new(0.0, 0.4),
        v: Complex64::new(0.0, -0.4),
        w: Complex64::new(0.0, -0.4),
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = Complex64::new(1.4 * (unit(&mut rng) - 0.5), 0.05 + 0.65 * unit(&mut rng));
        let v = Complex64::new(1.4 * (unit(&mut rng) - 0.5), -0.05 - 0.65 * unit(&mut rng));
        let lo = v.im - u.im; // < 0 by construction
        let t = unit(&mut rng);
        let w = Complex64::new(1.4 * (unit(&mut rng) - 0.5), lo * (0.1 + 0.8 * t));
        let p = RamanujanParams {
            u: shrink(u, center.u),
            v: shrink(v, center.v),
            w: shrink(w, center.w),
        };
        if p.validate(mp).is_ok() {
            out.push(p);
        }
    }
    out
}

/// Seeded in-domain points for the Saalschütz identity: Im a, Im b, Im c
/// large enough that the second denominator parameter a+b+c−d−c_b keeps a
/// positive imaginary part, then the same 0.5 shrink toward the center.
pub fn sample_saalschuetz_params(
    mp: &ModularParameter,
    seed: u64,
    count: usize,
) -> Vec<[Complex64; 4]> {
    let mut rng = StdRng::seed_from_u64(seed);
    let cb_abs = mp.cb_abs();
    let im_abc = |rng: &mut StdRng| 0.40 + 0.15 * unit(rng);
    let center_im = 0.475;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = Complex64::new(0.9 * (unit(&mut rng) - 0.5), im_abc(&mut rng));
        let b = Complex64::new(0.9 * (unit(&mut rng) - 0.5), im_abc(&mut rng));
        let c = Complex64::new(0.9 * (unit(&mut rng) - 0.5), im_abc(&mut rng));
        let a = shrink(a, Complex64::new(0.0, center_im));
        let b = shrink(b, Complex64::new(0.0, center_im));
        let c = shrink(c, Complex64::new(0.0, center_im));
        let room = a.im + b.im + c.im - cb_abs; // Im d must stay below this
        if room <= 0.1 {
            continue;
        }
        let d_im = room * (0.25 + 0.5 * unit(&mut rng));
        let d = Complex64::new(0.45 * (unit(&mut rng) - 0.5), d_im);
        out.push([a, b, c, d]);
    }
    out
}

// ---------------------------------------------------------------------------
// Check batteries (shared by the integration tests and the CLI)
// ---------------------------------------------------------------------------

fn fmt_c(z: Complex64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

/// Ramanujan-type battery: quadrature vs closed form, the two closed forms
/// against each other, the Fourier-transform degenerations of Ψ, and the
/// closed form of I₁.
pub fn ramanujan_battery(
    mp: &ModularParameter,
    seed: u64,
    count: usize,
    cfg: &EvalConfig,
    tol: f64,
) -> Result<IdentityReport> {
    let mut rep = IdentityReport::new("ramanujan", tol);
    for p in sample_ramanujan_params(mp, seed, count) {
        let label = format!("u={}, v={}, w={}", fmt_c(p.u), fmt_c(p.v), fmt_c(p.w));
        let quad = ramanujan_psi(mp, &p, EvalMode::Integral, cfg)?;
        let closed = ramanujan_psi(mp, &p, EvalMode::Closed, cfg)?;
        rep.push("psi quadrature vs closed", label.clone(), quad, closed);
        let inverted = ramanujan_psi_inverted(mp, &p)?;
        rep.push("psi closed vs inverted closed", label, closed, inverted);
    }

    // Fourier transforms: both closed forms and the quadrature at seeded w.
    let mut rng = StdRng::seed_from_u64(seed ^ 0xf0f0_f0f0);
    for _ in 0..count {
        let w = Complex64::new(
            0.35 * (unit(&mut rng) - 0.5),
            -0.15 - 0.30 * unit(&mut rng),
        );
        let label = format!("w={}", fmt_c(w));
        rep.push(
            "fourier plus closed forms",
            label.clone(),
            fourier_phi_plus(mp, w)?,
            fourier_phi_plus_alt(mp, w)?,
        );
        rep.push(
            "fourier plus quadrature",
            label.clone(),
            fourier_phi_plus_quadrature(mp, w, cfg)?.value,
            fourier_phi_plus(mp, w)?,
        );
        rep.push(
            "fourier minus closed forms",
            label.clone(),
            fourier_phi_minus(mp, w)?,
            fourier_phi_minus_alt(mp, w)?,
        );
        rep.push(
            "fourier minus quadrature",
            label,
            fourier_phi_minus_quadrature(mp, w, cfg)?.value,
            fourier_phi_minus(mp, w)?,
        );
    }

    // Degenerate limit: Ψ(u, 0, w) → Fourier transform of 1/Φ as u → −∞.
    {
        let u = Complex64::new(-7.0, 0.4);
        let w = Complex64::new(0.1, -0.22);
        let p = RamanujanParams { u, v: Complex64::new(0.0, 0.0), w };
        let label = format!("u={}, w={}", fmt_c(u), fmt_c(w));
        rep.push(
            "psi degenerate limit vs fourier minus",
            label,
            ramanujan_psi(mp, &p, EvalMode::Integral, cfg)?,
            fourier_phi_minus(mp, w)?,
        );
    }

    // I₁ closed form at seeded points.
    let mut rng = StdRng::seed_from_u64(seed ^ 0x1234_5678);
    for _ in 0..count {
        let a = Complex64::new(1.2 * (unit(&mut rng) - 0.5), 0.35 + 0.25 * unit(&mut rng));
        let w = Complex64::new(1.2 * (unit(&mut rng) - 0.5), -0.2 + 0.4 * unit(&mut rng));
        if (w + a).im <= 0.12 {
            continue;
        }
        let label = format!("a={}, w={}", fmt_c(a), fmt_c(w));
        let quad = ihg(mp, &[Some(a)], &[], w, cfg)?.value;
        rep.push("ihg1 quadrature vs closed", label, quad, ihg1_closed(mp, a, w)?);
    }
    Ok(rep)
}

/// Saalschütz battery: the full I₃ evaluation, its c → −∞ degeneration both
/// as a closed-form limit and as an I₂ quadrature, the fully degenerate
/// I₂(−∞,−∞; d; −c_b), and the Euler–Heine transformation of I₂.
pub fn saalschuetz_battery(
    mp: &ModularParameter,
    seed: u64,
    count: usize,
    cfg: &EvalConfig,
    tol: f64,
) -> Result<IdentityReport> {
    let mut rep = IdentityReport::new("saalschuetz", tol);
    let cb = mp.c_b();
    let points = sample_saalschuetz_params(mp, seed, count);
    for [a, b, c, d] in &points {
        let (a, b, c, d) = (*a, *b, *c, *d);
        let e = a + b + c - d - cb;
        let label = format!("a={}, b={}, c={}, d={}", fmt_c(a), fmt_c(b), fmt_c(c), fmt_c(d));
        let quad = ihg(mp, &[Some(a), Some(b), Some(c)], &[Some(d), Some(e)], -cb, cfg)?.value;
        rep.push(
            "saalschuetz quadrature vs closed",
            label,
            quad,
            saalschuetz_closed(mp, a, b, c, d)?,
        );
    }

    // c → −∞: the closed form converges to the degenerate closed form, and
    // the degenerate identity holds as an I₂ quadrature.
    {
        let [a, b, _, d] = points[0];
        let label = format!("a={}, b={}, d={}", fmt_c(a), fmt_c(b), fmt_c(d));
        let far = Complex64::new(-9.0, 0.45);
        rep.push(
            "saalschuetz closed form c to -inf",
            format!("{label}, c={}", fmt_c(far)),
            saalschuetz_closed(mp, a, b, far, d)?,
            saalschuetz_degenerate_closed(mp, a, b, d)?,
        );
        if (a + b - d).im > 0.1 {
            let quad = ihg(mp, &[Some(a), Some(b)], &[Some(d)], -cb, cfg)?.value;
            rep.push(
                "degenerate saalschuetz quadrature",
                label,
                quad,
                saalschuetz_degenerate_closed(mp, a, b, d)?,
            );
        }
    }

    // Fully degenerate case I₂(−∞,−∞; d; −c_b) = ζ_o³ e^{iπd(2c_b−d)}.
    let mut rng = StdRng::seed_from_u64(seed ^ 0x9e37_79b9);
    for _ in 0..count {
        let d = Complex64::new(0.8 * (unit(&mut rng) - 0.5), 0.1 + 0.5 * unit(&mut rng));
        let label = format!("d={}", fmt_c(d));
        let quad = ihg(mp, &[None, None], &[Some(d)], -cb, cfg)?.value;
        let closed = mp.zeta_o().powi(3) * (I * PI * d * (2.0 * cb - d)).exp();
        rep.push("doubly degenerate saalschuetz", label, quad, closed);
    }

    // Euler–Heine transformation of I₂ at seeded in-domain points.
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5151_5151);
    let mut done = 0;
    while done < count {
        let jig = |rng: &mut StdRng| 0.1 * (unit(rng) - 0.5);
        let a = Complex64::new(0.10 + jig(&mut rng), 0.30 + jig(&mut rng));
        let b = Complex64::new(-0.20 + jig(&mut rng), 0.25 + jig(&mut rng));
        let c = Complex64::new(0.15 + jig(&mut rng), 0.45 + jig(&mut rng));
        let w = Complex64::new(0.05 + jig(&mut rng), -0.20 + jig(&mut rng));
        let wp = a + b + w - c;
        // Both sides must converge: Im of the shared right-tail rate and of
        // every denominator parameter stays positive.
        let xi = (w + a + b - c + cb).im;
        if xi <= 0.15 || c.im <= 0.1 || (c - a).im >= mp.cb_abs() || (c - b).im >= mp.cb_abs() {
            continue;
        }
        let label = format!("a={}, b={}, c={}, w={}", fmt_c(a), fmt_c(b), fmt_c(c), fmt_c(w));
        let lhs = ihg(mp, &[Some(a), Some(b)], &[Some(c)], w, cfg)?.value;
        let factor = phi(mp, a)? * phi(mp, b)? * phi(mp, w)?
            / (phi(mp, c - b)? * phi(mp, c - a)? * phi(mp, a + b + w - c)?);
        let rhs = factor * ihg(mp, &[Some(c - a), Some(c - b)], &[Some(c)], wp, cfg)?.value;
        rep.push("euler-heine transformation", label, lhs, rhs);
        done += 1;
    }
    Ok(rep)
}

/// Rejects the degenerate parameter d = c_b, where the second denominator
/// factor of the Saalschütz integrand collides with the b_n = i0 factor and
/// the contour prescription breaks down.
pub fn saalschuetz_domain_check(mp: &ModularParameter, d: Complex64) -> Result<()> {
    if (d - mp.c_b()).norm() < 1e-9 {
        return Err(IdentityError::OutOfDomain(
            "d = c_b is a degenerate point of the Saalschütz identity".into(),
        ));
    }
    if d.im <= 0.0 {
        return Err(IdentityError::OutOfDomain(format!(
            "need Im(d) > 0; got d = {d}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp() -> ModularParameter {
        ModularParameter::new(0.8).unwrap()
    }

    #[test]
    fn ramanujan_domain_is_enforced() {
        let mp = mp();
        let ok = RamanujanParams {
            u: Complex64::new(0.1, 0.3),
            v: Complex64::new(-0.1, -0.3),
            w: Complex64::new(0.0, -0.3),
        };
        assert!(ok.validate(&mp).is_ok());
        // Im w >= 0 leaves the left tail without decay.
        let bad = RamanujanParams { w: Complex64::new(0.0, 0.1), ..ok };
        assert!(matches!(bad.validate(&mp), Err(IdentityError::OutOfDomain(_))));
        // Im w below Im(v-u) leaves the right tail without decay.
        let bad = RamanujanParams { w: Complex64::new(0.0, -0.8), ..ok };
        assert!(bad.validate(&mp).is_err());
        // A pole of Phi(x+u) lands on the contour.
        let bad = RamanujanParams { u: Complex64::new(0.0, 1.2 * mp.cb_abs()), ..ok };
        assert!(bad.validate(&mp).is_err());
    }

    #[test]
    fn sampled_points_lie_in_the_open_domain() {
        let mp = mp();
        let pts = sample_ramanujan_params(&mp, 7, 20);
        assert_eq!(pts.len(), 20);
        for p in pts {
            p.validate(&mp).unwrap();
            // The 0.5 shrink keeps every coordinate clearly off the faces.
            assert!(p.w.im < -0.01 && p.w.im > p.v.im - p.u.im + 0.01);
        }
        let pts = sample_saalschuetz_params(&mp, 7, 10);
        let cb = mp.cb_abs();
        for [a, b, c, d] in pts {
            assert!(a.im > 0.0 && b.im > 0.0 && c.im > 0.0 && d.im > 0.0);
            assert!(a.im + b.im + c.im - d.im - cb > 0.0);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let mp = mp();
        let p1 = sample_ramanujan_params(&mp, 42, 5);
        let p2 = sample_ramanujan_params(&mp, 42, 5);
        for (x, y) in p1.iter().zip(&p2) {
            assert_eq!((x.u, x.v, x.w), (y.u, y.v, y.w));
        }
    }

    #[test]
    fn ihg_rejects_divergent_and_misshapen_input() {
        let mp = mp();
        let cfg = EvalConfig::default();
        let w = Complex64::new(0.0, -0.2);
        // More numerator than denominator factors diverges.
        let a = [Some(Complex64::new(0.0, 0.3)), Some(Complex64::new(0.1, 0.3))];
        let err = ihg(&mp, &a, &[None], w, &cfg).unwrap_err();
        assert!(matches!(err, IdentityError::OutOfDomain(_)));
        // Wrong arity.
        assert!(ihg(&mp, &a, &[], w, &cfg).is_err());
        // Balanced counts with a non-positive right-tail rate.
        let a1 = [Some(Complex64::new(0.0, 0.2))];
        assert!(ihg(&mp, &a1, &[], Complex64::new(0.0, -0.5), &cfg).is_err());
    }

    #[test]
    fn degenerate_saalschuetz_point_is_rejected() {
        let mp = mp();
        assert!(saalschuetz_domain_check(&mp, mp.c_b()).is_err());
        assert!(saalschuetz_domain_check(&mp, Complex64::new(0.2, -0.1)).is_err());
        assert!(saalschuetz_domain_check(&mp, Complex64::new(0.2, 0.3)).is_ok());
    }

    #[test]
    fn closed_forms_are_mutually_consistent() {
        // Pure closed-form cross-checks (no quadrature): the two Fourier
        // expressions are related by inversion, and the two Ramanujan
        // expressions agree.
        let mp = mp();
        let w = Complex64::new(0.17, -0.33);
        let plus = fourier_phi_plus(&mp, w).unwrap();
        let plus_alt = fourier_phi_plus_alt(&mp, w).unwrap();
        assert!((plus - plus_alt).norm() < 1e-12 * plus.norm());
        let minus = fourier_phi_minus(&mp, w).unwrap();
        let minus_alt = fourier_phi_minus_alt(&mp, w).unwrap();
        assert!((minus - minus_alt).norm() < 1e-12 * minus.norm());
        let p = RamanujanParams {
            u: Complex64::new(0.2, 0.35),
            v: Complex64::new(-0.1, -0.25),
            w: Complex64::new(0.05, -0.3),
        };
        let r1 = ramanujan_psi(&mp, &p, EvalMode::Closed, &EvalConfig::default()).unwrap();
        let r2 = ramanujan_psi_inverted(&mp, &p).unwrap();
        assert!((r1 - r2).norm() < 1e-12 * r1.norm(), "r1 = {r1}, r2 = {r2}");
    }
}
