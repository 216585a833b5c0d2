//! Charged tetrahedral kernel functions and their exact symmetry and
//! pentagon relations at the scalar level.
//!
//! The building block is the charged inverse quantum dilogarithm
//! `psi_{a,c}(x) = psi(x - 2 c_b (a+c)) * e^{-4 pi i c_b a (x - c_b(a+c))}
//! * e^{-pi i c_b^2 (4(a-c)+1)/6}` with `psi = 1/Phi_b` and positive
//! charges `a, c` such that `b = 1/2 - a - c > 0`.  Its charge-rotated
//! Fourier transform has the closed form
//! `psitilde'_{a,c} = e^{-i pi/12} psi_{c,b}`, which is what all kernel
//! evaluations use; quadrature appears only in consistency tests and in
//! the one rotation identity whose derivation leaves a genuine integral.

use crate::qdl::{log_phi, ModularParameter, QdlError, Result};
use crate::quad::{integrate, Contour, QuadResult};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Signed;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Charge pair (a, c) with derived b = 1/2 - a - c; all three positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeTriple {
    pub a: f64,
    pub c: f64,
}

impl ChargeTriple {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        let b = 0.5 - a - c;
        if !(a > 0.0 && c > 0.0 && b > 0.0) {
            return Err(QdlError::InvalidParameter(format!(
                "charges must be positive with a + b + c = 1/2: a={a}, c={c}, b={b}"
            )));
        }
        Ok(ChargeTriple { a, c })
    }

    pub fn b(&self) -> f64 {
        0.5 - self.a - self.c
    }

    /// The rotated triple (c, b) appearing in the Fourier identity.
    pub fn rotated(&self) -> ChargeTriple {
        ChargeTriple { a: self.c, c: self.b() }
    }
}

/// nu(x) = e^{-i pi c_b^2 (4x+1)/6}.
pub fn nu(mp: &ModularParameter, x: f64) -> Complex64 {
    (-I * PI * mp.cb_sq() * (4.0 * x + 1.0) / 6.0).exp()
}

/// nu_{x,y} = e^{4 pi i c_b^2 x(x+y)} nu(x-y).
pub fn nu_pair(mp: &ModularParameter, x: f64, y: f64) -> Complex64 {
    (I * 4.0 * PI * mp.cb_sq() * x * (x + y)).exp() * nu(mp, x - y)
}

/// mu_{c,b} = nu_{c,b} e^{i 8 pi c_b^2 b(b+c)}.
pub fn mu(mp: &ModularParameter, c: f64, b: f64) -> Complex64 {
    nu_pair(mp, c, b) * (I * 8.0 * PI * mp.cb_sq() * b * (b + c)).exp()
}

/// Logarithm of psi_{a,c}(x) (branch from `log_phi`), valid for complex x.
pub fn log_psi_ac(mp: &ModularParameter, ch: &ChargeTriple, x: Complex64) -> Result<Complex64> {
    let cb = mp.c_b();
    let ac = ch.a + ch.c;
    let arg = x - 2.0 * cb * ac;
    let lp = log_phi(mp, arg)?;
    Ok(-lp - I * 4.0 * PI * cb * ch.a * (x - cb * ac)
        - I * PI * mp.cb_sq() * (4.0 * (ch.a - ch.c) + 1.0) / 6.0)
}

/// psi_{a,c}(x).
pub fn psi_ac(mp: &ModularParameter, ch: &ChargeTriple, x: Complex64) -> Result<Complex64> {
    Ok(log_psi_ac(mp, ch, x)?.exp())
}

/// psitilde'_{a,c}(x) = e^{-i pi x^2} * (Fourier transform of psi_{a,c}),
/// evaluated through the closed form e^{-i pi/12} psi_{c,b}(x).
pub fn psi_tilde_prime(mp: &ModularParameter, ch: &ChargeTriple, x: Complex64) -> Result<Complex64> {
    Ok((-I * PI / 12.0).exp() * psi_ac(mp, &ch.rotated(), x)?)
}

/// Fourier transform of psi_{a,c} by direct quadrature (consistency oracle;
/// the closed form above is what production code uses).
pub fn psi_tilde_quadrature(
    mp: &ModularParameter,
    ch: &ChargeTriple,
    x: f64,
) -> Result<(Complex64, QuadResult)> {
    // |psi_{a,c}(y)| decays like e^{-4 pi |c_b| a y} as y -> +inf and
    // e^{+4 pi |c_b| (a+2c-1/2) y} ... conservatively, sample until small.
    let mut err: Option<QdlError> = None;
    let mut f = |y: f64| match psi_ac(mp, ch, Complex64::new(y, 0.0)) {
        Ok(v) => v * (-I * 2.0 * PI * x * y).exp(),
        Err(e) => {
            err = Some(e);
            Complex64::new(0.0, 0.0)
        }
    };
    let rate = 4.0 * PI * mp.cb_abs() * ch.a.min(ch.b()).min(ch.c);
    let reach = 45.0 / rate;
    let r = integrate(&mut f, -reach, reach, 1e-13, 1e-13, 4000);
    match err {
        Some(e) => Err(e),
        None => Ok((r.value, r)),
    }
}

/// Symbolic kernel of one tetrahedron: a Dirac delta on an integer linear
/// combination of the four face variables times an explicit factor.
#[derive(Debug, Clone)]
pub struct KernelDescriptor {
    pub sign: i8,
    pub charges: ChargeTriple,
    /// Coefficients of the delta constraint over face variables (x0..x3).
    pub delta: [i64; 4],
}

impl KernelDescriptor {
    /// The non-delta factor at the given face variable values.
    pub fn factor(&self, mp: &ModularParameter, x: [Complex64; 4]) -> Result<Complex64> {
        let w = x[3] - x[2];
        if self.sign > 0 {
            // psitilde'_{a,c}(x3-x2) e^{2 pi i x0 (x3-x2)}
            Ok(psi_tilde_prime(mp, &self.charges, w)? * (I * 2.0 * PI * x[0] * w).exp())
        } else {
            // on (x,y|u,v) = faces (0,2|1,3):
            // psi_{b,c}(v-y) e^{-i pi/12} e^{i pi (v-y)^2} e^{-2 pi i u(y-v)}
            let bc = ChargeTriple { a: self.charges.b(), c: self.charges.c };
            Ok(psi_ac(mp, &bc, w)?
                * (-I * PI / 12.0).exp()
                * (I * PI * w * w).exp()
                * (I * 2.0 * PI * x[1] * w).exp())
        }
    }

    /// Natural logarithm of the factor (for products over many tetrahedra).
    pub fn log_factor(&self, mp: &ModularParameter, x: [Complex64; 4]) -> Result<Complex64> {
        let w = x[3] - x[2];
        if self.sign > 0 {
            Ok(-I * PI / 12.0 + log_psi_ac(mp, &self.charges.rotated(), w)?
                + I * 2.0 * PI * x[0] * w)
        } else {
            let bc = ChargeTriple { a: self.charges.b(), c: self.charges.c };
            Ok(log_psi_ac(mp, &bc, w)? - I * PI / 12.0 + I * PI * w * w + I * 2.0 * PI * x[1] * w)
        }
    }
}

/// The kernel of a positively or negatively oriented tetrahedron with the
/// given charges.  Face variables are ordered by face index; the bra pair
/// lives on faces (0, 2) and the ket pair on faces (1, 3).
pub fn kernel_for(sign: i8, ch: ChargeTriple) -> KernelDescriptor {
    let delta = if sign > 0 {
        [1, -1, 1, 0] // x0 + x2 - x1
    } else {
        [-1, 1, 0, 1] // u + v - x on (x,y|u,v)
    };
    KernelDescriptor { sign, charges: ch, delta }
}

/// Report of the pentagon charge conditions.
#[derive(Debug, Clone)]
pub struct PentagonReport {
    /// a1 = a0+a2, a3 = a2+a4, c1 = c0+a4, c3 = a0+c4, c2 = c1+c3.
    pub linear: [bool; 5],
    /// strict positivity of a_i, b_i, c_i for each of the five tetrahedra
    pub positive: [bool; 5],
    /// a2 c2 + a4 c4 + a4(a0 - c3) = a2(a4 + c0 + c3)
    pub quadratic: bool,
    /// phase exponent multiplier: P = 2(c0 + a2 + c4) - 1/2
    pub phase_exponent: BigRational,
}

impl PentagonReport {
    pub fn all_hold(&self) -> bool {
        self.linear.iter().all(|&x| x) && self.positive.iter().all(|&x| x) && self.quadratic
    }
}

/// Exact verification of the pentagon charge conditions for five charge
/// pairs (a_i, c_i), i = 0..5.
pub fn pentagon_charge_check(a: &[BigRational; 5], c: &[BigRational; 5]) -> PentagonReport {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let linear = [
        a[1] == &a[0] + &a[2],
        a[3] == &a[2] + &a[4],
        c[1] == &c[0] + &a[4],
        c[3] == &a[0] + &c[4],
        c[2] == &c[1] + &c[3],
    ];
    let mut positive = [false; 5];
    for i in 0..5 {
        let b = &half - &a[i] - &c[i];
        positive[i] = a[i].is_positive() && c[i].is_positive() && b.is_positive();
    }
    let lhs = &a[2] * &c[2] + &a[4] * &c[4] + &a[4] * (&a[0] - &c[3]);
    let rhs = &a[2] * (&a[4] + &c[0] + &c[3]);
    let two = BigRational::from(BigInt::from(2));
    PentagonReport {
        linear,
        positive,
        quadratic: lhs == rhs,
        phase_exponent: two * (&c[0] + &a[2] + &c[4]) - half,
    }
}

/// Which of the three charge-rotation identities to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationIdentity {
    P01,
    P12,
    P23,
}

/// Relative residual between the two sides of a charge-rotation identity
/// in its delta-reduced scalar form, at a real point (u, v, y) with
/// x = u + v understood.
///
/// P01 and P23 reduce to pure phase bookkeeping; P12 requires a genuine
/// one-dimensional Gaussian-convolution quadrature on the left side.
pub fn fundamental_lemma_residual(
    mp: &ModularParameter,
    which: RotationIdentity,
    ch: &ChargeTriple,
    u: f64,
    v: f64,
    y: f64,
) -> Result<f64> {
    let x = u + v;
    let w = v - y;
    let wc = Complex64::new(w, 0.0);
    let phase = |t: Complex64| t.exp();
    let e12 = phase(-I * PI / 12.0);
    let (a, b, c) = (ch.a, ch.b(), ch.c);
    // the right side is always a rotated-charge negative-tetrahedron kernel
    // scalar: e^{-i pi/12} psi_{b',c'}(v-y) e^{i pi (v-y)^2} e^{2 pi i u (v-y)}
    let rhs_for = |aa: f64, cc: f64| -> Result<Complex64> {
        let rot = ChargeTriple::new(aa, cc)?;
        let bc = ChargeTriple { a: rot.b(), c: rot.c };
        Ok(e12 * psi_ac(mp, &bc, wc)? * phase(I * PI * w * w) * phase(I * 2.0 * PI * u * w))
    };
    let (lhs, rhs) = match which {
        RotationIdentity::P01 => {
            // left side reduces to
            // e^{-i pi/12} psi_{c,b}(v-y) e^{i pi (v-y)(2u+v-y)}
            let cb = ChargeTriple::new(c, b)?;
            let lhs = e12
                * psi_ac(mp, &ChargeTriple { a: cb.b(), c: cb.c }, wc)?
                * phase(I * PI * w * (2.0 * u + w));
            // identity direction 0 -> 1 rotates (a, c) to (a, b)
            (lhs, rhs_for(a, b)?)
        }
        RotationIdentity::P23 => {
            // left side reduces with no residual integral to
            // e^{-i pi/12} psi_{c,b}(v-y) e^{i pi (y-v-2u)(y-v)}
            let lhs = e12
                * psi_ac(mp, &ChargeTriple { a: c, c: b }, wc)?
                * phase(I * PI * (-w - 2.0 * u) * (-w));
            // identity direction 2 -> 3 rotates (a, c) to (a, b)
            (lhs, rhs_for(a, b)?)
        }
        RotationIdentity::P12 => {
            // left side keeps a genuine convolution:
            // e^{-i pi/12 - i pi u^2} ∫ dt psitilde'_{a,c}(t-x)
            //            e^{-2 pi i u (t-x)} e^{i pi (t-y)^2}
            let mut err: Option<QdlError> = None;
            let mut f = |t: f64| {
                let tx = Complex64::new(t - x, 0.0);
                match psi_tilde_prime(mp, ch, tx) {
                    Ok(p) => {
                        p * phase(-I * 2.0 * PI * u * (t - x))
                            * phase(I * PI * (t - y) * (t - y))
                    }
                    Err(e) => {
                        err = Some(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            };
            let rate = 4.0 * PI * mp.cb_abs() * a.min(b).min(c);
            let reach = 50.0 / rate;
            let quad = integrate(&mut f, x - reach, x + reach, 1e-13, 1e-13, 6000);
            if let Some(e) = err {
                return Err(e);
            }
            let lhs = e12 * phase(-I * PI * u * u) * quad.value;
            // identity direction 1 -> 2 rotates (a, c) to (b, c)
            (lhs, rhs_for(b, c)?)
        }
    };
    let scale = lhs.norm().max(rhs.norm());
    Ok(if scale == 0.0 { 0.0 } else { (lhs - rhs).norm() / scale })
}

/// The tetrahedral partition function scalar written directly in shape
/// variables (angle parameters alpha_i in units of pi): the factor of a
/// positive tetrahedron with the delta removed,
/// `exp(2 pi i (x3-x2)(x0 - c_b alpha_2) + i pi phi / (4 hbar))
///  / Phi(x3-x2 - c_b (1 - alpha_0))`
/// with `phi = alpha_0 alpha_2 + (alpha_0 - alpha_2)/3 - (2 hbar + 1)/6`.
/// Used as an oracle for the charged-kernel form.
pub fn tet_scalar_in_angles(
    mp: &ModularParameter,
    alpha0: f64,
    alpha2: f64,
    x0: f64,
    w: f64,
) -> Result<Complex64> {
    let cb = mp.c_b();
    let hbar = mp.hbar();
    let phi_t = alpha0 * alpha2 + (alpha0 - alpha2) / 3.0 - (2.0 * hbar + 1.0) / 6.0;
    let arg = Complex64::new(w, 0.0) - cb * (1.0 - alpha0);
    let lp = log_phi(mp, arg)?;
    Ok((I * 2.0 * PI * w * (x0 - cb * alpha2) + I * PI * phi_t / (4.0 * hbar) - lp).exp())
}

/// Kernel contour placement guard: minimal allowed distance from any pole
/// of the assembled integrand, as a fraction of |c_b|.
pub const POLE_MARGIN_FRACTION: f64 = 0.05;

/// Default integration contour for a reduced state-integral variable:
/// central segment offset below the real axis by 0.1 |c_b|, tails rotated
/// by the given angles.
pub fn default_variable_contour(mp: &ModularParameter, theta_left: f64, theta_right: f64) -> Contour {
    Contour::new(3.0, -0.1 * mp.cb_abs(), theta_left, theta_right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn mp(b: f64) -> ModularParameter {
        ModularParameter::new(b).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn nu_special_values() {
        let m = mp(0.8);
        assert!((nu(&m, -0.25) - 1.0).norm() < 1e-15);
        // nu_pair with x = 0 reduces to nu(-y)
        assert!((nu_pair(&m, 0.0, 0.37) - nu(&m, -0.37)).norm() < 1e-15);
        // mu with b = 0 reduces to nu_pair(c, 0)
        assert!((mu(&m, 0.21, 0.0) - nu_pair(&m, 0.21, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fourier_identity_against_quadrature() {
        let m = mp(0.8);
        let ch = ChargeTriple::new(1.0 / 6.0, 1.0 / 6.0).unwrap();
        for &x in &[0.0, 0.5] {
            let (ft, _) = psi_tilde_quadrature(&m, &ch, x).unwrap();
            let direct = ft * (-I * PI * x * x).exp();
            let closed = psi_tilde_prime(&m, &ch, Complex64::new(x, 0.0)).unwrap();
            assert!(
                (direct - closed).norm() < 1e-8,
                "x={x}: quadrature {direct} vs closed {closed}"
            );
        }
    }

    #[test]
    fn conjugation_identities() {
        let m = mp(0.9);
        let ch = ChargeTriple::new(0.2, 0.15).unwrap();
        for &x in &[-0.4, 0.0, 0.7] {
            let xc = Complex64::new(x, 0.0);
            // conj(psi_{a,c}(x)) = e^{-i pi/6} e^{i pi x^2} psi_{c,a}(-x)
            let lhs = psi_ac(&m, &ch, xc).unwrap().conj();
            let swapped = ChargeTriple::new(ch.c, ch.a).unwrap();
            let rhs = (-I * PI / 6.0).exp()
                * (I * PI * x * x).exp()
                * psi_ac(&m, &swapped, -xc).unwrap();
            assert!((lhs - rhs).norm() / rhs.norm() < 1e-12);
            // conj(psitilde'_{a,c}(x)) = e^{-i pi/12} e^{i pi x^2} psi_{b,c}(-x)
            let lhs2 = psi_tilde_prime(&m, &ch, xc).unwrap().conj();
            let bc = ChargeTriple::new(ch.b(), ch.c).unwrap();
            let rhs2 = (-I * PI / 12.0).exp()
                * (I * PI * x * x).exp()
                * psi_ac(&m, &bc, -xc).unwrap();
            assert!((lhs2 - rhs2).norm() / rhs2.norm() < 1e-12);
        }
    }

    #[test]
    fn psi_decays_both_ways() {
        let m = mp(1.0);
        let ch = ChargeTriple::new(1.0 / 6.0, 1.0 / 6.0).unwrap();
        let at = |x: f64| psi_ac(&m, &ch, Complex64::new(x, 0.0)).unwrap().norm();
        let mid = at(0.0);
        assert!(at(5.0) < 1e-3 * mid);
        assert!(at(-5.0) < 1e-3 * mid);
    }

    #[test]
    fn negative_kernel_is_conjugate_of_positive() {
        // <x,y|Tbar(a,c)|u,v> = conj(<u,v|T(a,c)|x,y>)
        let m = mp(0.75);
        let ch = ChargeTriple::new(0.12, 0.2).unwrap();
        let kp = kernel_for(1, ch);
        let km = kernel_for(-1, ch);
        // positive kernel on (u,v|x,y): faces carry (u, x, v, y)
        let (u, v, xx, yy) = (0.3, -0.2, 0.1, 0.25);
        let c = |t: f64| Complex64::new(t, 0.0);
        let pos = kp.factor(&m, [c(u), c(xx), c(v), c(yy)]).unwrap();
        // negative kernel on (x,y|u,v): faces carry (x, u, y, v)
        let neg = km.factor(&m, [c(xx), c(u), c(yy), c(v)]).unwrap();
        assert!((neg - pos.conj()).norm() / neg.norm() < 1e-12);
        // and the delta constraints agree: u + v - x both times
        assert_eq!(kp.delta, [1, -1, 1, 0]);
        assert_eq!(km.delta, [-1, 1, 0, 1]);
    }

    #[test]
    fn kernel_matches_angle_form() {
        // the charged factor equals the shape-variable scalar with
        // alpha_0 = 2a, alpha_2 = 2c
        let m = mp(0.85);
        for (a, cc) in [(1.0 / 6.0, 1.0 / 6.0), (0.1, 0.3), (0.22, 0.14)] {
            let ch = ChargeTriple::new(a, cc).unwrap();
            let k = kernel_for(1, ch);
            for (x0, w) in [(0.0, 0.4), (0.3, -0.2), (-0.1, 0.05)] {
                let c = |t: f64| Complex64::new(t, 0.0);
                let lhs = k.factor(&m, [c(x0), c(0.0), c(0.0), c(w)]).unwrap();
                let rhs = tet_scalar_in_angles(&m, 2.0 * a, 2.0 * cc, x0, w).unwrap();
                assert!(
                    (lhs - rhs).norm() / rhs.norm() < 1e-9,
                    "a={a} c={cc} x0={x0} w={w}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn log_factor_consistent_with_factor() {
        let m = mp(0.7);
        let ch = ChargeTriple::new(0.15, 0.18).unwrap();
        for sign in [1i8, -1] {
            let k = kernel_for(sign, ch);
            let c = |t: f64| Complex64::new(t, 0.0);
            let vars = [c(0.2), c(0.5), c(0.3), c(-0.1)];
            let f = k.factor(&m, vars).unwrap();
            let lf = k.log_factor(&m, vars).unwrap().exp();
            assert!((f - lf).norm() / f.norm() < 1e-12);
        }
    }

    #[test]
    fn pentagon_conditions() {
        // equal charges 1/6 violate the linear conditions
        let sixth = [rat(1, 6), rat(1, 6), rat(1, 6), rat(1, 6), rat(1, 6)];
        let rep = pentagon_charge_check(&sixth, &sixth);
        assert!(!rep.linear[0]);
        // derived solution with a failing positivity of b2
        let a = [rat(1, 8), rat(1, 4), rat(1, 8), rat(1, 4), rat(1, 8)];
        let c = [rat(1, 8), rat(1, 4), rat(1, 2), rat(1, 4), rat(1, 8)];
        let rep = pentagon_charge_check(&a, &c);
        assert!(rep.linear.iter().all(|&x| x));
        assert!(rep.quadratic);
        assert!(!rep.positive[2]);
        assert_eq!(rep.phase_exponent, rat(2, 1) * (rat(1, 8) + rat(1, 8) + rat(1, 8)) - rat(1, 2));
    }

    #[test]
    fn pentagon_quadratic_follows_from_linear() {
        // property test: random rationals satisfying the linear conditions
        // always satisfy the quadratic identity
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let r = |rng: &mut rand::rngs::StdRng| {
                rat(rng.gen_range(-50..50), rng.gen_range(1..40))
            };
            let (a0, a2, a4, c0, c4) = (r(&mut rng), r(&mut rng), r(&mut rng), r(&mut rng), r(&mut rng));
            let a1 = &a0 + &a2;
            let a3 = &a2 + &a4;
            let c1 = &c0 + &a4;
            let c3 = &a0 + &c4;
            let c2 = &c1 + &c3;
            let rep = pentagon_charge_check(
                &[a0, a1, a2, a3, a4],
                &[c0, c1, c2, c3, c4],
            );
            assert!(rep.linear.iter().all(|&x| x));
            assert!(rep.quadratic);
        }
    }

    #[test]
    fn rotation_identities_hold() {
        let m = mp(0.8);
        let ch = ChargeTriple::new(1.0 / 6.0, 1.0 / 6.0).unwrap();
        let (u, v, y) = (0.2, -0.1, 0.3);
        for which in [RotationIdentity::P01, RotationIdentity::P12, RotationIdentity::P23] {
            let r = fundamental_lemma_residual(&m, which, &ch, u, v, y).unwrap();
            assert!(r < 1e-6, "{which:?}: residual {r}");
        }
    }

    #[test]
    fn charge_triple_validation() {
        assert!(ChargeTriple::new(0.3, 0.3).is_err()); // b < 0
        assert!(ChargeTriple::new(-0.1, 0.2).is_err());
        assert!((ChargeTriple::new(0.1, 0.2).unwrap().b() - 0.2).abs() < 1e-15);
        let _ = BigRational::one();
    }
}
