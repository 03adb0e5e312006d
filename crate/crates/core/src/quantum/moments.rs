use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::Result;
use crate::grid::{complex_laplacian, trapezoid};

use super::fields::{flux_velocity, osmotic_velocity, MaskedField};
use super::wavefunction::{inner_product, Wavefunction};

/// Momentum moments of a state, computed from the operator p̂ = −iA∇ and from
/// the velocity fields (p̂ψ = m(v − iu)ψ).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentumStats {
    /// ⟨p̂⟩ from the spectral representation.
    pub mean_p: f64,
    /// m⟨v⟩, the real part of ⟨p̂⟩ in the velocity decomposition.
    pub mean_mv: f64,
    /// m⟨u⟩; ⟨p̂⟩ has imaginary part −m⟨u⟩, zero for states vanishing at the ends.
    pub mean_mu: f64,
    /// ⟨p̂²⟩ = A² Σ k²|ψ̃(k)|².
    pub mean_p2: f64,
    /// ∫ψ*(−A²∇²)ψ with the finite-difference Laplacian.
    pub mean_p2_operator: f64,
    /// m²⟨v² + u²⟩.
    pub mean_p2_fields: f64,
    pub var_p: f64,
    pub var_mv: f64,
    pub var_mu: f64,
}

impl MomentumStats {
    /// |var_p − (var_mv + var_mu)| / var_p.
    pub fn decomposition_gap(&self) -> f64 {
        (self.var_p - self.var_mv - self.var_mu).abs() / self.var_p
    }
}

/// ⟨f⟩ = ∫ρ f. The integrand ρ·f is continuous through nodes of ψ, so an
/// isolated masked node takes the mean of its neighbours' integrand values;
/// other masked nodes (far tails) contribute nothing.
pub(crate) fn density_average(rho: &[f64], f: &MaskedField, h: f64, map: impl Fn(f64) -> f64) -> f64 {
    let n = rho.len();
    let value = |i: usize| f.get(i).map(|x| rho[i] * map(x));
    let weighted: Vec<f64> = (0..n)
        .map(|i| match value(i) {
            Some(w) => w,
            None if i > 0 && i + 1 < n => match (value(i - 1), value(i + 1)) {
                (Some(a), Some(b)) => 0.5 * (a + b),
                _ => 0.0,
            },
            None => 0.0,
        })
        .collect();
    trapezoid(&weighted, h)
}

/// First and second spectral moments Σk|ψ̃|², Σk²|ψ̃|² (normalized by Σ|ψ̃|²).
fn spectral_moments(psi: &Wavefunction) -> (f64, f64) {
    let grid = psi.grid();
    let n = grid.len();
    let mut buf: Vec<Complex64> = psi.psi().values().to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * grid.dx());
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (j, z) in buf.iter().enumerate() {
        let k = if 2 * j < n { j as f64 } else { j as f64 - n as f64 } * dk;
        let w = z.norm_sqr();
        s0 += w;
        s1 += k * w;
        s2 += k * k * w;
    }
    (s1 / s0, s2 / s0)
}

pub fn momentum_stats(psi: &Wavefunction) -> Result<MomentumStats> {
    let p = psi.params();
    let (m, action) = (p.mass, p.action());
    let h = psi.grid().dx();
    let rho = psi.density();

    let (k1, k2) = spectral_moments(psi);
    let mean_p = action * k1;
    let mean_p2 = action * action * k2;

    let lap = complex_laplacian(psi.psi());
    let mean_p2_operator = -action * action * inner_product(psi.psi().values(), lap.values(), h).re;

    let v = flux_velocity(psi)?;
    let u = osmotic_velocity(psi)?;
    let mean_v = density_average(rho.values(), &v, h, |x| x);
    let mean_u = density_average(rho.values(), &u, h, |x| x);
    let mean_v2 = density_average(rho.values(), &v, h, |x| x * x);
    let mean_u2 = density_average(rho.values(), &u, h, |x| x * x);

    Ok(MomentumStats {
        mean_p,
        mean_mv: m * mean_v,
        mean_mu: m * mean_u,
        mean_p2,
        mean_p2_operator,
        mean_p2_fields: m * m * (mean_v2 + mean_u2),
        var_p: mean_p2 - mean_p * mean_p,
        var_mv: m * m * (mean_v2 - mean_v * mean_v),
        var_mu: m * m * (mean_u2 - mean_u * mean_u),
    })
}

/// Δx·Δp, with Δp from the spectral variance.
pub fn heisenberg_product(psi: &Wavefunction) -> Result<f64> {
    let stats = momentum_stats(psi)?;
    Ok(psi.variance_x().sqrt() * stats.var_p.sqrt())
}
