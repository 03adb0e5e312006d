//! Builds core objects from a resolved config.

use num_complex::Complex64;
use stoqlab::quantum::{solve_eigenstates, Wavefunction};
use stoqlab::samplers::BinSpec;
use stoqlab::{Grid1D, PhysicalParams, ScalarField};

use crate::config::{PotentialConfig, ScenarioConfig, StateKind};
use crate::RunError;

pub fn params(cfg: &ScenarioConfig) -> Result<PhysicalParams, RunError> {
    let p = &cfg.params;
    let mut out = PhysicalParams::quantum(p.hbar, p.mass)
        .with_branch(p.branch)
        .with_diffusion(p.diffusion);
    out.light_speed = p.light_speed;
    out.validate()?;
    Ok(out)
}

pub fn grid(cfg: &ScenarioConfig) -> Result<Grid1D, RunError> {
    Ok(Grid1D::new(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_points)?)
}

/// Harmonic frequency ω₀, for scenarios that need an oscillator.
pub fn harmonic_omega(cfg: &ScenarioConfig) -> Result<f64, RunError> {
    match cfg.potential {
        PotentialConfig::Harmonic { omega } => Ok(omega),
        _ => Err(RunError::Invalid(format!(
            "scenario `{}` needs potential.harmonic.omega",
            cfg.scenario
        ))),
    }
}

fn read_table(path: &std::path::Path) -> Result<(Vec<f64>, Vec<f64>), RunError> {
    let invalid = |msg: String| RunError::Invalid(format!("potential.custom.file {}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| invalid(e.to_string()))?;
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    for row in reader.records() {
        let row = row.map_err(|e| invalid(e.to_string()))?;
        let field = |k: usize| -> Result<f64, RunError> {
            row.get(k)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|x| x.is_finite())
                .ok_or_else(|| invalid(format!("bad number in row {:?}", row)))
        };
        let x = field(0)?;
        if xs.last().is_some_and(|&last| x <= last) {
            return Err(invalid("x must increase".into()));
        }
        xs.push(x);
        vs.push(field(1)?);
    }
    if xs.len() < 2 {
        return Err(invalid("need at least two rows".into()));
    }
    Ok((xs, vs))
}

pub fn potential(cfg: &ScenarioConfig, grid: Grid1D) -> Result<ScalarField, RunError> {
    let mass = cfg.params.mass;
    let field = match &cfg.potential {
        PotentialConfig::Harmonic { omega } => ScalarField::from_fn(grid, |x| 0.5 * mass * omega * omega * x * x)?,
        PotentialConfig::Box { .. } => ScalarField::constant(grid, 0.0)?,
        PotentialConfig::Custom { file } => {
            let (xs, vs) = read_table(file)?;
            if grid.x_min() < xs[0] || grid.x_max() > xs[xs.len() - 1] {
                return Err(RunError::Invalid(format!(
                    "potential table covers [{}, {}] but the grid spans [{}, {}]",
                    xs[0],
                    xs[xs.len() - 1],
                    grid.x_min(),
                    grid.x_max()
                )));
            }
            ScalarField::from_fn(grid, |x| {
                let k = xs.partition_point(|&t| t <= x).clamp(1, xs.len() - 1);
                let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                (1.0 - w) * vs[k - 1] + w * vs[k]
            })?
        }
    };
    Ok(field)
}

/// The configured initial state and whether it is stationary.
pub fn state(cfg: &ScenarioConfig, params: PhysicalParams, v: &ScalarField) -> Result<(Wavefunction, bool), RunError> {
    let s = &cfg.state;
    match s.kind {
        StateKind::Eigen => {
            let states = solve_eigenstates(v, &params, s.n + 1)?;
            Ok((states[s.n].wavefunction(params), true))
        }
        StateKind::Superposition => {
            let states = solve_eigenstates(v, &params, s.n.max(s.m) + 1)?;
            let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let (a, b) = (states[s.n].wavefunction(params), states[s.m].wavefunction(params));
            Ok((Wavefunction::superposition(&[(c, &a), (c, &b)])?, false))
        }
        StateKind::Gaussian => Ok((
            Wavefunction::gaussian(*v.grid(), params, s.center, s.sigma, s.k0)?,
            false,
        )),
    }
}

pub fn bins(cfg: &ScenarioConfig) -> Result<BinSpec, RunError> {
    Ok(BinSpec::new(cfg.ensemble.bin_lo, cfg.ensemble.bin_hi, cfg.ensemble.bins)?)
}

/// Probability of each bin under a density tabulated on a grid (normalized
/// over the grid, linear in the running integral between nodes).
pub fn bin_probabilities(rho: &ScalarField, bins: &BinSpec) -> Vec<f64> {
    let grid = *rho.grid();
    let cumulative = stoqlab::grid::cumulative_integral(rho);
    let total = *cumulative.last().expect("grid has nodes");
    let at = |x: f64| {
        if x <= grid.x_min() {
            return 0.0;
        }
        if x >= grid.x_max() {
            return total;
        }
        let (i, w) = grid.locate(x);
        (1.0 - w) * cumulative[i] + w * cumulative[i + 1]
    };
    (0..bins.count)
        .map(|b| {
            let lo = bins.lo + b as f64 * bins.width();
            (at(lo + bins.width()) - at(lo)) / total
        })
        .collect()
}
