//! Exterior problems on the complement of a ball, solved mode by mode in real
//! spherical harmonics: decaying harmonic potentials with prescribed
//! tangential gradient and flux, the tangential-to-normal map `Σ`, gradient
//! fields with prescribed normal trace, fields with a prescribed gradient
//! curl, and the residual between interior and exterior normal traces.

mod harmonics;

pub use harmonics::{gauss_legendre, harmonics, lm_count, lm_index, lm_pairs, Jet, SphereQuadrature};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use harmonics::{cross3, dot3};

/// Coefficients below this size count as zero when checking admissibility.
const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Basis {
    /// Scalar or normal component `Y_lm`.
    Y,
    /// Surface gradient `∇_S Y_lm` on the unit sphere.
    GradS,
    /// `r̂ × ∇_S Y_lm`.
    Cross,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::Y => "Y",
            Basis::GradS => "GRAD_S",
            Basis::Cross => "CROSS",
        }
    }
}

/// Real spherical-harmonic coefficients in the three bases, dense in
/// `(l, m)` up to `l_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalHarmonicCoeffs {
    pub l_max: usize,
    pub sphere_radius: f64,
    pub y: Vec<f64>,
    pub grad_s: Vec<f64>,
    pub cross: Vec<f64>,
}

impl SphericalHarmonicCoeffs {
    pub fn zeros(l_max: usize, sphere_radius: f64) -> Result<Self> {
        if !(sphere_radius > 0.0 && sphere_radius.is_finite()) {
            return Err(Error::InvalidParameters(format!("sphere radius must be positive, got {sphere_radius}")));
        }
        let n = lm_count(l_max);
        Ok(SphericalHarmonicCoeffs { l_max, sphere_radius, y: vec![0.0; n], grad_s: vec![0.0; n], cross: vec![0.0; n] })
    }

    /// A single unit mode.
    pub fn mode(l_max: usize, sphere_radius: f64, l: usize, m: i64, basis: Basis) -> Result<Self> {
        let mut c = Self::zeros(l_max, sphere_radius)?;
        c.set(l, m, basis, 1.0)?;
        Ok(c)
    }

    fn slot(&self, l: usize, m: i64, basis: Basis) -> Result<usize> {
        if l > self.l_max || m.unsigned_abs() as usize > l {
            return Err(Error::InvalidParameters(format!("mode ({l}, {m}) outside l_max = {}", self.l_max)));
        }
        if l == 0 && basis != Basis::Y {
            return Err(Error::InvalidParameters("tangential bases have no l = 0 mode".into()));
        }
        Ok(lm_index(l, m))
    }

    fn table(&self, basis: Basis) -> &Vec<f64> {
        match basis {
            Basis::Y => &self.y,
            Basis::GradS => &self.grad_s,
            Basis::Cross => &self.cross,
        }
    }

    pub fn get(&self, l: usize, m: i64, basis: Basis) -> Result<f64> {
        Ok(self.table(basis)[self.slot(l, m, basis)?])
    }

    pub fn set(&mut self, l: usize, m: i64, basis: Basis, value: f64) -> Result<()> {
        let k = self.slot(l, m, basis)?;
        match basis {
            Basis::Y => self.y[k] = value,
            Basis::GradS => self.grad_s[k] = value,
            Basis::Cross => self.cross[k] = value,
        }
        Ok(())
    }

    fn has(&self, basis: Basis) -> bool {
        self.table(basis).iter().any(|c| c.abs() > ZERO_TOL)
    }

    /// Rows `l,m,basis,value` for every nonzero coefficient.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,m,basis,value\n");
        for basis in [Basis::Y, Basis::GradS, Basis::Cross] {
            for (l, m) in lm_pairs(self.l_max) {
                let v = self.table(basis)[lm_index(l, m)];
                if v != 0.0 {
                    s.push_str(&format!("{l},{m},{},{v:.15e}\n", basis.name()));
                }
            }
        }
        s
    }

    /// Tangential field `Σ grad_s ∇_S Y + cross r̂ × ∇_S Y` at a unit vector.
    pub fn tangential_at(&self, p: [f64; 3]) -> [f64; 3] {
        let y = harmonics(p, self.l_max);
        let mut out = [0.0; 3];
        for (k, yk) in y.iter().enumerate() {
            let c = cross3(p, yk.g);
            for i in 0..3 {
                out[i] += self.grad_s[k] * yk.g[i] + self.cross[k] * c[i];
            }
        }
        out
    }

    /// Scalar `Σ y Y` at a unit vector.
    pub fn scalar_at(&self, p: [f64; 3]) -> f64 {
        harmonics(p, self.l_max).iter().zip(&self.y).map(|(h, c)| c * h.v).sum()
    }
}

/// `r^{−(l+1)} Y_lm` for every mode, as jets at `x`.
fn decaying_modes(x: [f64; 3], l_max: usize) -> Vec<Jet> {
    let [a, b, c] = [0, 1, 2].map(|i| Jet::coordinate(x, i));
    let r = (a * a + b * b + c * c).sqrt();
    let y = harmonics(x, l_max);
    lm_pairs(l_max).map(|(l, m)| y[lm_index(l, m)] * r.powi(-(l as i32 + 1))).collect()
}

fn radius_of(x: [f64; 3]) -> Result<f64> {
    let r = dot3(x, x).sqrt();
    if r > 0.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(Error::InvalidParameters("exterior fields are not defined at the origin".into()))
    }
}

/// `φ = Σ c_lm r^{−(l+1)} Y_lm` outside the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorScalarSolution {
    /// `Y`-basis coefficients `c_lm`.
    pub coeffs: SphericalHarmonicCoeffs,
    /// `∮ ∂φ/∂r dS`, the same on every sphere around the origin.
    pub flux: f64,
}

impl ExteriorScalarSolution {
    fn jet(&self, x: [f64; 3]) -> Result<Jet> {
        radius_of(x)?;
        let modes = decaying_modes(x, self.coeffs.l_max);
        Ok(modes.iter().zip(&self.coeffs.y).fold(Jet::constant(0.0), |acc, (m, c)| acc + *m * *c))
    }

    pub fn value(&self, x: [f64; 3]) -> Result<f64> {
        Ok(self.jet(x)?.v)
    }

    pub fn gradient(&self, x: [f64; 3]) -> Result<[f64; 3]> {
        Ok(self.jet(x)?.g)
    }
}

/// `u = ∇ψ + Σ t_lm x × ∇(r^{−(l+1)} Y_lm)` outside the sphere, with
/// `ψ = Σ g_lm r^{−(l+1)} Y_lm`.
///
/// On the sphere of radius `r` the toroidal term equals
/// `t_lm r^{−(l+1)} r̂ × ∇_S Y_lm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorVectorSolution {
    /// `Y`-basis coefficients of the potential `ψ`.
    pub gradient_part: SphericalHarmonicCoeffs,
    /// `CROSS`-basis coefficients `t_lm`.
    pub toroidal_part: SphericalHarmonicCoeffs,
}

impl ExteriorVectorSolution {
    /// Field value and its Jacobian `∂_j u_i`.
    fn field_and_jacobian(&self, x: [f64; 3]) -> Result<([f64; 3], [[f64; 3]; 3])> {
        radius_of(x)?;
        let l_max = self.gradient_part.l_max.max(self.toroidal_part.l_max);
        let modes = decaying_modes(x, l_max);
        let mut u = [0.0; 3];
        let mut du = [[0.0; 3]; 3];
        for (l, m) in lm_pairs(l_max) {
            let k = lm_index(l, m);
            let g = self.gradient_part.y.get(k).copied().unwrap_or(0.0);
            let t = self.toroidal_part.cross.get(k).copied().unwrap_or(0.0);
            if g == 0.0 && t == 0.0 {
                continue;
            }
            let j = modes[k];
            let xc = cross3(x, j.g);
            for i in 0..3 {
                u[i] += g * j.g[i] + t * xc[i];
                for d in 0..3 {
                    // ∂_d (x × ∇I)_i = (e_d × ∇I)_i + (x × ∂_d ∇I)_i
                    let mut e = [0.0; 3];
                    e[d] = 1.0;
                    let hd = [j.h[0][d], j.h[1][d], j.h[2][d]];
                    let tor = cross3(e, j.g)[i] + cross3(x, hd)[i];
                    du[i][d] += g * j.h[i][d] + t * tor;
                }
            }
        }
        Ok((u, du))
    }

    pub fn value(&self, x: [f64; 3]) -> Result<[f64; 3]> {
        Ok(self.field_and_jacobian(x)?.0)
    }

    pub fn curl(&self, x: [f64; 3]) -> Result<[f64; 3]> {
        let (_, d) = self.field_and_jacobian(x)?;
        Ok([d[2][1] - d[1][2], d[0][2] - d[2][0], d[1][0] - d[0][1]])
    }

    pub fn divergence(&self, x: [f64; 3]) -> Result<f64> {
        let (_, d) = self.field_and_jacobian(x)?;
        Ok(d[0][0] + d[1][1] + d[2][2])
    }
}

fn require_gradient_data(v: &SphericalHarmonicCoeffs) -> Result<()> {
    if v.has(Basis::Cross) {
        Err(Error::NonGradientData)
    } else {
        Ok(())
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("sphere radius must be positive, got {radius}")))
    }
}

/// Decaying harmonic `φ` with `(∇φ)_T = v` on the sphere of radius `radius`
/// and total flux `flux_mu`.
pub fn solve_exterior_scalar(v: &SphericalHarmonicCoeffs, flux_mu: f64, radius: f64) -> Result<ExteriorScalarSolution> {
    check_radius(radius)?;
    require_gradient_data(v)?;
    let mut c = SphericalHarmonicCoeffs::zeros(v.l_max, radius)?;
    c.y[0] = -flux_mu / (4.0 * std::f64::consts::PI).sqrt();
    for (l, m) in lm_pairs(v.l_max).filter(|&(l, _)| l > 0) {
        let k = lm_index(l, m);
        c.y[k] = v.grad_s[k] * radius.powi(l as i32 + 2);
    }
    Ok(ExteriorScalarSolution { coeffs: c, flux: flux_mu })
}

/// Normal trace of the decaying gradient field whose tangential trace is `v`.
pub fn sigma_dtn(v: &SphericalHarmonicCoeffs) -> Result<SphericalHarmonicCoeffs> {
    require_gradient_data(v)?;
    let mut out = SphericalHarmonicCoeffs::zeros(v.l_max, v.sphere_radius)?;
    for (l, m) in lm_pairs(v.l_max).filter(|&(l, _)| l > 0) {
        let k = lm_index(l, m);
        out.y[k] = -((l + 1) as f64) * v.grad_s[k];
    }
    Ok(out)
}

/// Decaying `u = ∇ψ` with `∂ψ/∂r = g` on the sphere of radius `radius`.
pub fn solve_exterior_gradient_normal(g: &SphericalHarmonicCoeffs, radius: f64) -> Result<ExteriorVectorSolution> {
    check_radius(radius)?;
    if g.y[0].abs() > ZERO_TOL {
        return Err(Error::NonzeroMean(g.y[0]));
    }
    let mut psi = SphericalHarmonicCoeffs::zeros(g.l_max, radius)?;
    for (l, m) in lm_pairs(g.l_max).filter(|&(l, _)| l > 0) {
        let k = lm_index(l, m);
        psi.y[k] = -g.y[k] * radius.powi(l as i32 + 2) / (l + 1) as f64;
    }
    Ok(ExteriorVectorSolution { gradient_part: psi, toroidal_part: SphericalHarmonicCoeffs::zeros(g.l_max, radius)? })
}

/// Decaying `u` with `curl u = ∇φ₀` and tangential trace `v_data` on the
/// sphere of radius `radius`.
pub fn solve_exterior_curl_source(
    phi0: &ExteriorScalarSolution,
    v_data: &SphericalHarmonicCoeffs,
    radius: f64,
) -> Result<ExteriorVectorSolution> {
    check_radius(radius)?;
    if phi0.flux.abs() > ZERO_TOL || phi0.coeffs.y[0].abs() > ZERO_TOL {
        return Err(Error::NonzeroFlux(phi0.flux));
    }
    let l_max = phi0.coeffs.l_max.max(v_data.l_max);
    let mut psi = SphericalHarmonicCoeffs::zeros(l_max, radius)?;
    let mut tor = SphericalHarmonicCoeffs::zeros(l_max, radius)?;
    for (l, m) in lm_pairs(l_max).filter(|&(l, _)| l > 0) {
        let k = lm_index(l, m);
        let c = phi0.coeffs.y.get(k).copied().unwrap_or(0.0);
        let t = c / l as f64;
        tor.cross[k] = t;
        let expected = t * radius.powi(-(l as i32 + 1));
        let got = v_data.cross.get(k).copied().unwrap_or(0.0);
        if (got - expected).abs() > 1e-10 * expected.abs().max(1.0) {
            return Err(Error::Incompatible { l, m, expected, got });
        }
        psi.y[k] = v_data.grad_s.get(k).copied().unwrap_or(0.0) * radius.powi(l as i32 + 2);
    }
    Ok(ExteriorVectorSolution { gradient_part: psi, toroidal_part: tor })
}

/// Values of a trace at quadrature points of a boundary, with their weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSamples {
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl TraceSamples {
    /// Samples of the scalar `Σ y Y` on the sphere of `coeffs`, with area
    /// weights of that sphere.
    pub fn on_sphere(coeffs: &SphericalHarmonicCoeffs, quadrature: &SphereQuadrature) -> Self {
        let r2 = coeffs.sphere_radius.powi(2);
        TraceSamples {
            weights: quadrature.weights.iter().map(|w| w * r2).collect(),
            values: quadrature.points.iter().map(|p| coeffs.scalar_at(*p)).collect(),
        }
    }
}

/// Weighted `L²` distance between two traces on the same sampling.
pub fn comparability_residual(interior_normal: &TraceSamples, exterior_normal: &TraceSamples) -> Result<f64> {
    let (a, b) = (interior_normal, exterior_normal);
    if a.values.len() != a.weights.len() || b.values.len() != b.weights.len() {
        return Err(Error::SamplingMismatch("each trace needs one weight per value".into()));
    }
    if a.weights.len() != b.weights.len() || a.weights.iter().zip(&b.weights).any(|(x, y)| (x - y).abs() > 1e-14 * x.abs().max(1.0)) {
        return Err(Error::SamplingMismatch("traces are sampled at different points".into()));
    }
    Ok(a.values.iter().zip(&b.values).zip(&a.weights).map(|((x, y), w)| w * (x - y).powi(2)).sum::<f64>().sqrt())
}
