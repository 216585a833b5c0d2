//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands along
//! real parameter intervals and piecewise-linear complex contours.

use num_complex::Complex64;

/// 15-point Kronrod nodes on [0, 1] side of the symmetric rule (positive half).
const XGK: [f64; 8] = [
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
];

/// 7-point Gauss weights for the even-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
];

/// Outcome of a quadrature: value, error estimate, work counter.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error: f64,
    pub evals: usize,
}

impl QuadResult {
    pub fn zero() -> Self {
        QuadResult { value: Complex64::new(0.0, 0.0), abs_error: 0.0, evals: 0 }
    }

    fn accumulate(&mut self, other: &QuadResult) {
        self.value += other.value;
        self.abs_error += other.abs_error;
        self.evals += other.evals;
    }
}

/// One G7K15 evaluation on [a, b]; returns (kronrod value, |gauss - kronrod| estimate).
fn qk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> QuadResult {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = Complex64::new(0.0, 0.0);
    let mut gauss = Complex64::new(0.0, 0.0);
    let f0 = f(mid);
    kronrod += WGK[0] * f0;
    gauss += WG[0] * f0;
    for i in 1..8 {
        let dx = half * XGK[i];
        let s = f(mid - dx) + f(mid + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 0 {
            gauss += WG[i / 2] * s;
        }
    }
    kronrod *= half;
    gauss *= half;
    let err = (kronrod - gauss).norm();
    QuadResult { value: kronrod, abs_error: err, evals: 15 }
}

/// Adaptive bisection driven by per-panel error, until the summed error
/// estimate satisfies `tol_abs + tol_rel * |value|` or the panel budget runs out.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol_abs: f64,
    tol_rel: f64,
    max_panels: usize,
) -> QuadResult {
    #[derive(Clone, Copy)]
    struct Panel {
        a: f64,
        b: f64,
        res: QuadResult,
    }
    let first = qk15(f, a, b);
    let mut panels = vec![Panel { a, b, res: first }];
    let mut evals = first.evals;
    loop {
        let value: Complex64 = panels.iter().map(|p| p.res.value).sum();
        let err: f64 = panels.iter().map(|p| p.res.abs_error).sum();
        let target = tol_abs + tol_rel * value.norm();
        if err <= target || panels.len() >= max_panels {
            return QuadResult { value, abs_error: err, evals };
        }
        // split the worst panel
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.res.abs_error.total_cmp(&y.1.res.abs_error))
            .unwrap();
        let Panel { a: pa, b: pb, .. } = panels[idx];
        if !(pb - pa > f64::EPSILON * (pa.abs() + pb.abs() + 1.0)) {
            // interval exhausted at machine precision
            return QuadResult { value, abs_error: err, evals };
        }
        let pm = 0.5 * (pa + pb);
        let left = qk15(f, pa, pm);
        let right = qk15(f, pm, pb);
        evals += left.evals + right.evals;
        panels[idx] = Panel { a: pa, b: pm, res: left };
        panels.push(Panel { a: pm, b: pb, res: right });
    }
}

/// Integrates `f` over `[start, ±∞)` by marching fixed-width panels outward
/// (direction = ±1) until a panel contributes below the truncation threshold.
pub fn integrate_tail<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    start: f64,
    direction: f64,
    panel_width: f64,
    tol_abs: f64,
    tol_rel: f64,
    truncation: f64,
    max_panels_per_step: usize,
) -> QuadResult {
    let mut total = QuadResult::zero();
    let mut t0 = start;
    let mut scale: f64 = 0.0;
    for _ in 0..100_000 {
        let t1 = t0 + direction * panel_width;
        let (a, b) = if direction > 0.0 { (t0, t1) } else { (t1, t0) };
        let piece = integrate(f, a, b, tol_abs, tol_rel, max_panels_per_step);
        total.accumulate(&piece);
        scale = scale.max(piece.value.norm());
        if piece.value.norm() + piece.abs_error < truncation * (1.0 + scale) {
            break;
        }
        t0 = t1;
    }
    total
}

/// Piecewise-linear contour `t ↦ z(t)`: a straight central segment
/// `[-radius, radius] + i*offset_im`, continued by tail rays leaving the
/// segment ends with signed rotation angles (positive angle = right tail
/// rotated below the axis, left tail above; i.e. z = endpoint + (t∓R) e^{∓iθ}).
#[derive(Clone, Copy, Debug)]
pub struct Contour {
    pub radius: f64,
    pub offset_im: f64,
    pub theta_left: f64,
    pub theta_right: f64,
    pub shift: Complex64,
}

impl Contour {
    pub fn new(radius: f64, offset_im: f64, theta_left: f64, theta_right: f64) -> Self {
        Contour { radius, offset_im, theta_left, theta_right, shift: Complex64::new(0.0, 0.0) }
    }

    /// Real-axis contour with no offset or rotation.
    pub fn real_axis() -> Self {
        Contour::new(0.0, 0.0, 0.0, 0.0)
    }

    /// Point and velocity at parameter t.
    pub fn at(&self, t: f64) -> (Complex64, Complex64) {
        let i = Complex64::i();
        let base = self.shift + i * self.offset_im;
        if t > self.radius {
            let dir = (-i * self.theta_right).exp();
            (base + self.radius + (t - self.radius) * dir, dir)
        } else if t < -self.radius {
            let dir = (-i * self.theta_left).exp();
            (base - self.radius + (t + self.radius) * dir, dir)
        } else {
            (base + t, Complex64::new(1.0, 0.0))
        }
    }
}

/// Integrates `f(z) dz` along a `Contour`, splitting at the joints and
/// truncating the two tails adaptively.
pub fn integrate_contour<F: FnMut(Complex64) -> Complex64>(
    f: &mut F,
    contour: &Contour,
    tol_abs: f64,
    tol_rel: f64,
    max_panels: usize,
) -> QuadResult {
    let mut g = |t: f64| {
        let (z, dz) = contour.at(t);
        f(z) * dz
    };
    let mut total = QuadResult::zero();
    let r = contour.radius;
    if r > 0.0 {
        total.accumulate(&integrate(&mut g, -r, r, tol_abs, tol_rel, max_panels));
    }
    let width = (r * 0.5).max(1.0);
    total.accumulate(&integrate_tail(&mut g, r, 1.0, width, tol_abs, tol_rel, 1e-18, max_panels));
    total.accumulate(&integrate_tail(&mut g, -r, -1.0, width, tol_abs, tol_rel, 1e-18, max_panels));
    total
}
