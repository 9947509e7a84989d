use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

/// Value, gradient and Hessian of a function of `x ∈ ℝ³`, propagated
/// through arithmetic (second-order forward differentiation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet {
    pub fn constant(v: f64) -> Jet {
        Jet { v, g: [0.0; 3], h: [[0.0; 3]; 3] }
    }

    /// The coordinate function `x_i` at the point `x`.
    pub fn coordinate(x: [f64; 3], i: usize) -> Jet {
        let mut g = [0.0; 3];
        g[i] = 1.0;
        Jet { v: x[i], g, h: [[0.0; 3]; 3] }
    }

    /// `φ ∘ self` given `φ`, `φ′` and `φ″` at `self.v`.
    pub fn compose(self, f: f64, fp: f64, fpp: f64) -> Jet {
        let mut out = Jet { v: f, g: self.g.map(|g| fp * g), h: [[0.0; 3]; 3] };
        for i in 0..3 {
            for j in 0..3 {
                out.h[i][j] = fp * self.h[i][j] + fpp * self.g[i] * self.g[j];
            }
        }
        out
    }

    pub fn powi(self, n: i32) -> Jet {
        let v = self.v;
        let nf = n as f64;
        self.compose(v.powi(n), nf * v.powi(n - 1), nf * (nf - 1.0) * v.powi(n - 2))
    }

    pub fn sqrt(self) -> Jet {
        let s = self.v.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * self.v))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut out = self;
        out.v += o.v;
        for i in 0..3 {
            out.g[i] += o.g[i];
            for j in 0..3 {
                out.h[i][j] += o.h[i][j];
            }
        }
        out
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        Jet { v: self.v * c, g: self.g.map(|g| g * c), h: self.h.map(|r| r.map(|h| h * c)) }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..3 {
            out.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for j in 0..3 {
                out.h[i][j] = self.v * o.h[i][j] + o.v * self.h[i][j] + self.g[i] * o.g[j] + self.g[j] * o.g[i];
            }
        }
        out
    }
}

/// Flat index of `(l, m)` with `|m| ≤ l`.
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Number of `(l, m)` pairs with `l ≤ l_max`.
pub fn lm_count(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// All `(l, m)` pairs up to `l_max` in index order.
pub fn lm_pairs(l_max: usize) -> impl Iterator<Item = (usize, i64)> {
    (0..=l_max).flat_map(|l| (-(l as i64)..=l as i64).map(move |m| (l, m)))
}

/// Orthonormal real spherical harmonics `Y_lm(x/|x|)` for `l ≤ l_max`,
/// as jets of the degree-zero extension to `ℝ³ \ {0}`.
///
/// `m > 0` carries `cos(mφ)`, `m < 0` carries `sin(|m|φ)`.
pub fn harmonics(x: [f64; 3], l_max: usize) -> Vec<Jet> {
    let [xj, yj, zj] = [0, 1, 2].map(|i| Jet::coordinate(x, i));
    let r = (xj * xj + yj * yj + zj * zj).sqrt();
    let inv_r = r.powi(-1);
    let t = zj * inv_r;
    let mut out = vec![Jet::constant(0.0); lm_count(l_max)];
    // (x + iy)^m / r^m, split into real and imaginary parts.
    let (mut cm, mut sm) = (Jet::constant(1.0), Jet::constant(0.0));
    let xr = xj * inv_r;
    let yr = yj * inv_r;
    let mut double_factorial = 1.0;
    for m in 0..=l_max {
        if m > 0 {
            let c = cm * xr - sm * yr;
            let s = cm * yr + sm * xr;
            cm = c;
            sm = s;
            double_factorial *= (2 * m - 1) as f64;
        }
        // Q_l^m(t) = P_l^m(t) / (1 − t²)^{m/2}, built upwards in l.
        let mut q_prev = Jet::constant(0.0);
        let mut q = Jet::constant(double_factorial);
        for l in m..=l_max {
            if l > m {
                let next = if l == m + 1 {
                    t * q * (2 * m + 1) as f64
                } else {
                    (t * q * (2 * l - 1) as f64 - q_prev * (l + m - 1) as f64) * (1.0 / (l - m) as f64)
                };
                q_prev = q;
                q = next;
            }
            let norm = normalization(l, m);
            if m == 0 {
                out[lm_index(l, 0)] = q * norm;
            } else {
                let n2 = norm * std::f64::consts::SQRT_2;
                out[lm_index(l, m as i64)] = q * cm * n2;
                out[lm_index(l, -(m as i64))] = q * sm * n2;
            }
        }
    }
    out
}

fn normalization(l: usize, m: usize) -> f64 {
    // √((2l+1)/(4π) · (l−m)!/(l+m)!)
    let mut ratio = 1.0;
    for k in (l - m + 1)..=(l + m) {
        ratio /= k as f64;
    }
    ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt()
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Gauss–Legendre in `cos θ` times uniform longitudes: integrates products of
/// two harmonics of degree `≤ l_max` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    pub l_max: usize,
    /// Unit vectors of the sample points.
    pub points: Vec<[f64; 3]>,
    /// Weights on the unit sphere; they sum to `4π`.
    pub weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn new(l_max: usize) -> Self {
        let nlat = l_max + 1;
        let nlon = 2 * l_max + 2;
        let (t, w) = gauss_legendre(nlat);
        let mut points = Vec::with_capacity(nlat * nlon);
        let mut weights = Vec::with_capacity(nlat * nlon);
        for (ti, wi) in t.iter().zip(&w) {
            let s = (1.0 - ti * ti).sqrt();
            for j in 0..nlon {
                let phi = 2.0 * PI * j as f64 / nlon as f64;
                points.push([s * phi.cos(), s * phi.sin(), *ti]);
                weights.push(wi * 2.0 * PI / nlon as f64);
            }
        }
        SphereQuadrature { l_max, points, weights }
    }

    /// Harmonic jets at every sample point.
    pub fn tables(&self) -> Vec<Vec<Jet>> {
        self.points.iter().map(|p| harmonics(*p, self.l_max)).collect()
    }

    /// Scalar coefficients of sampled values.
    pub fn analyze_scalar(&self, values: &[f64]) -> Vec<f64> {
        let tables = self.tables();
        let mut out = vec![0.0; lm_count(self.l_max)];
        for ((y, w), v) in tables.iter().zip(&self.weights).zip(values) {
            for (o, yk) in out.iter_mut().zip(y) {
                *o += w * v * yk.v;
            }
        }
        out
    }

    /// `GRAD_S` and `CROSS` coefficients of a sampled tangential field.
    pub fn analyze_tangential(&self, values: &[[f64; 3]]) -> (Vec<f64>, Vec<f64>) {
        let tables = self.tables();
        let n = lm_count(self.l_max);
        let (mut grad, mut cross) = (vec![0.0; n], vec![0.0; n]);
        for (((y, w), v), p) in tables.iter().zip(&self.weights).zip(values).zip(&self.points) {
            for (l, m) in lm_pairs(self.l_max).filter(|&(l, _)| l > 0) {
                let k = lm_index(l, m);
                let gs = y[k].g;
                let cs = cross3(*p, gs);
                let ll = (l * (l + 1)) as f64;
                grad[k] += w * dot3(*v, gs) / ll;
                cross[k] += w * dot3(*v, cs) / ll;
            }
        }
        (grad, cross)
    }
}

pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
