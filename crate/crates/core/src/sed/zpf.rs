//! The zero-point field as a random-phase mode sum.
//!
//!   S(ω) = (2ħ/3πc³) ω³,   ω_k = (k − ½) dω,   a_k = √(2 S(ω_k) dω)
//!   E(t) = Σ_k a_k cos(ω_k t + φ_k)
//!
//! so that ⟨E(t)E(t′)⟩ → φ(t − t′) = (2ħ/3πc³) ∫₀^{ω_c} ω³ cos ω(t − t′) dω.
//! On the grid t_j = j·2π/(N dω) the sum is one length-N FFT:
//!   E_j = Re[e^{−iπj/N} Σ_k a_k e^{iφ_k} e^{2πikj/N}].

use std::f64::consts::PI;

use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::rng::{tags, RandomStreamSpec};

pub const MIN_MODES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZpfSpec {
    pub omega_cutoff: f64,
    pub n_modes: usize,
    pub d_omega: f64,
    pub hbar: f64,
    pub light_speed: f64,
    pub seed: RandomStreamSpec,
}

impl ZpfSpec {
    pub fn new(omega_cutoff: f64, n_modes: usize, params: &PhysicalParams, seed: u64) -> Result<Self> {
        if !(omega_cutoff > 0.0 && omega_cutoff.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega_cutoff",
                reason: format!("must be > 0 (got {omega_cutoff})"),
            });
        }
        if n_modes < MIN_MODES {
            return Err(Error::InvalidParameter {
                name: "n_modes",
                reason: format!("must be >= {MIN_MODES} (got {n_modes})"),
            });
        }
        Ok(Self {
            omega_cutoff,
            n_modes,
            d_omega: omega_cutoff / n_modes as f64,
            hbar: params.hbar,
            light_speed: params.light_speed,
            seed: RandomStreamSpec::new(seed, 0),
        })
    }

    /// The fewest modes whose spacing keeps `duration` free of recurrences
    /// (duration·dω ≤ π).
    pub fn for_duration(omega_cutoff: f64, duration: f64, params: &PhysicalParams, seed: u64) -> Result<Self> {
        let n = (omega_cutoff * duration / PI).ceil() as usize;
        Self::new(omega_cutoff, n.max(MIN_MODES), params, seed)
    }

    pub fn frequency(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.d_omega
    }

    /// 2ħ/3πc³.
    pub fn prefactor(&self) -> f64 {
        2.0 * self.hbar / (3.0 * PI * self.light_speed.powi(3))
    }

    /// Recurrence of the discrete spectrum sets in beyond π/dω.
    pub fn recurrence_free(&self, duration: f64) -> bool {
        duration * self.d_omega <= PI * (1.0 + 1e-12)
    }
}

/// S(ω) = (2ħ/3πc³) ω³.
pub fn spectral_density(omega: f64, spec: &ZpfSpec) -> f64 {
    spec.prefactor() * omega.powi(3)
}

/// φ(t) = (2ħ/3πc³) ∫₀^{ω_c} ω³ cos ωt dω in closed form.
pub fn covariance_phi(t: f64, spec: &ZpfSpec) -> f64 {
    let w = spec.omega_cutoff;
    let z = w * t.abs();
    let integral = if z < 1.0 {
        // Σ_k (−1)^k z^{2k} / ((2k)! (2k+4)) times W⁴.
        let mut term = 1.0;
        let mut sum = 0.25;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= -z * z / ((2.0 * k - 1.0) * (2.0 * k));
            let add = term / (2.0 * k + 4.0);
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        sum * w.powi(4)
    } else {
        let t = t.abs();
        let (s, c) = z.sin_cos();
        w.powi(3) * s / t + 3.0 * w * w * c / (t * t) - 6.0 * w * s / t.powi(3) - 6.0 * (c - 1.0) / t.powi(4)
    };
    spec.prefactor() * integral
}

/// One draw of the mode phases.
#[derive(Debug, Clone, PartialEq)]
pub struct ZpfRealization {
    pub spec: ZpfSpec,
    pub stream_index: u64,
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
}

impl ZpfRealization {
    pub fn generate(spec: &ZpfSpec, stream_index: u64) -> Self {
        let mut rng = spec.seed.derive(tags::ZPF_PHASES).with_stream(stream_index).rng();
        let amplitudes = (0..spec.n_modes)
            .map(|k| (2.0 * spectral_density(spec.frequency(k), spec) * spec.d_omega).sqrt())
            .collect();
        let phases = (0..spec.n_modes).map(|_| rng.gen::<f64>() * 2.0 * PI).collect();
        Self {
            spec: *spec,
            stream_index,
            amplitudes,
            phases,
        }
    }

    /// Direct mode sum at one time.
    pub fn evaluate(&self, t: f64) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .enumerate()
            .map(|(k, (a, p))| a * (self.spec.frequency(k) * t + p).cos())
            .sum()
    }
}

/// E(t) sampled on t_j = j·dt, j = 0..len.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub dt: f64,
    pub values: Vec<f64>,
    /// duration·dω > π: the samples repeat (up to sign) within the run.
    pub recurrence_flag: bool,
}

fn is_five_smooth(mut n: usize) -> bool {
    for p in [2, 3, 5] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

/// Smallest 2^a 3^b 5^c ≥ n.
pub(crate) fn next_five_smooth(n: usize) -> usize {
    (n.max(1)..).find(|&m| is_five_smooth(m)).expect("unbounded search")
}

/// Samples one realization on a uniform grid over [0, duration] with step at
/// most `dt_max`. The actual step is 2π/(N dω) for the FFT length N.
pub fn synthesize(field: &ZpfRealization, duration: f64, dt_max: f64) -> Result<SampledField> {
    if !(dt_max > 0.0 && duration > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("dt and duration must be > 0 (got {dt_max}, {duration})"),
        });
    }
    let spec = &field.spec;
    let needed = (2.0 * PI / (spec.d_omega * dt_max)).ceil() as usize;
    let n = next_five_smooth(needed.max(spec.n_modes + 1));
    let dt = 2.0 * PI / (n as f64 * spec.d_omega);

    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (k, (a, p)) in field.amplitudes.iter().zip(&field.phases).enumerate() {
        buf[k] = Complex64::from_polar(*a, *p);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);

    // ω_k t_j = 2π k j/N + π j/N; the half-step factor flips sign every N samples.
    let len = (duration / dt).floor() as usize + 1;
    let values = (0..len)
        .map(|j| {
            let (wrap, r) = (j / n, j % n);
            let twist = Complex64::from_polar(1.0, PI * r as f64 / n as f64);
            let v = (buf[r] * twist).re;
            if wrap % 2 == 1 {
                -v
            } else {
                v
            }
        })
        .collect();
    Ok(SampledField {
        dt,
        values,
        recurrence_flag: !spec.recurrence_free(duration),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;

    fn spec() -> ZpfSpec {
        ZpfSpec::new(20.0, 400, &PhysicalParams::natural(), 7).unwrap()
    }

    #[test]
    fn phi_at_zero_and_parity() {
        let s = spec();
        let at_zero = s.prefactor() * 20f64.powi(4) / 4.0;
        assert!((covariance_phi(0.0, &s) - at_zero).abs() < 1e-12 * at_zero);
        for t in [1e-5, 0.01, 0.049, 0.05, 0.3, 2.0] {
            assert_eq!(covariance_phi(t, &s), covariance_phi(-t, &s));
        }
    }

    #[test]
    fn phi_matches_quadrature() {
        let s = spec();
        for wt in [3.7, 0.5, 1.0, 1e-4, 40.0] {
            let t = wt / s.omega_cutoff;
            let (q, _) = integrate_adaptive(|w| w.powi(3) * (w * t).cos(), 0.0, s.omega_cutoff, 1e-14, 1e-14);
            let exact = s.prefactor() * q;
            let closed = covariance_phi(t, &s);
            assert!((closed - exact).abs() <= 1e-10 * exact.abs().max(1e-3 * covariance_phi(0.0, &s)), "ω_c t = {wt}: {closed} vs {exact}");
        }
    }

    #[test]
    fn fft_samples_equal_the_mode_sum() {
        let s = spec();
        let f = ZpfRealization::generate(&s, 3);
        let sampled = synthesize(&f, 60.0, 0.05).unwrap();
        assert!(sampled.dt <= 0.05);
        assert!(!sampled.recurrence_flag);
        let scale = covariance_phi(0.0, &s).sqrt();
        for j in [0, 1, 17, 999, sampled.values.len() - 1] {
            let direct = f.evaluate(j as f64 * sampled.dt);
            assert!((sampled.values[j] - direct).abs() < 1e-9 * scale, "j = {j}");
        }
    }

    #[test]
    fn long_runs_are_flagged() {
        let f = ZpfRealization::generate(&spec(), 0);
        let period = PI / f.spec.d_omega;
        assert!(synthesize(&f, 3.0 * period, 0.05).unwrap().recurrence_flag);
        let sampled = synthesize(&f, 3.0 * period, 0.05).unwrap();
        let j = sampled.values.len() - 1;
        let direct = f.evaluate(j as f64 * sampled.dt);
        assert!((sampled.values[j] - direct).abs() < 1e-8 * covariance_phi(0.0, &f.spec).sqrt());
    }

    #[test]
    fn realizations_are_reproducible_and_distinct() {
        let s = spec();
        assert_eq!(ZpfRealization::generate(&s, 5), ZpfRealization::generate(&s, 5));
        assert_ne!(ZpfRealization::generate(&s, 5).phases, ZpfRealization::generate(&s, 6).phases);
        assert!(ZpfSpec::new(20.0, 99, &PhysicalParams::natural(), 0).is_err());
    }

    #[test]
    fn five_smooth_lengths() {
        assert_eq!(next_five_smooth(7), 8);
        assert_eq!(next_five_smooth(11), 12);
        assert_eq!(next_five_smooth(1000), 1000);
        assert_eq!(next_five_smooth(1001), 1024);
    }
}
