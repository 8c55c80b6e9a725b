use super::config::InitialCondition;
use crate::barenblatt::BarenblattProfile;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn normalized(field: Field, mass: f64) -> Result<Field> {
    let m = field.mass();
    if !(m > 0.0) {
        return Err(Error::Config(
            "initial condition has no mass on the grid".into(),
        ));
    }
    Ok(field.scaled(mass / m))
}

/// Builds the initial density on `grid`; `s` fixes the Barenblatt shape and
/// `seed` drives the random variant.
pub fn initial_density(ic: &InitialCondition, grid: &Grid1D, s: f64, seed: u64) -> Result<Field> {
    match *ic {
        InitialCondition::Box {
            mass,
            center,
            half_width,
        } => {
            let (a, b) = (center - half_width, center + half_width);
            let dx = grid.dx();
            let vals = (0..grid.n_cells())
                .map(|i| {
                    let overlap = b.min(grid.face(i + 1)) - a.max(grid.face(i));
                    overlap.max(0.0) / dx
                })
                .collect();
            normalized(Field::from_values(*grid, vals)?, mass)
        }
        InitialCondition::Gaussian {
            mass,
            center,
            sigma,
            cutoff,
        } => {
            let f = Field::from_fn(*grid, |x| {
                let z = (x - center) / sigma;
                if z.abs() <= cutoff {
                    (-0.5 * z * z).exp()
                } else {
                    0.0
                }
            });
            normalized(f, mass)
        }
        InitialCondition::PerturbedBarenblatt {
            mass,
            amplitude,
            center,
            width,
        } => {
            let base = BarenblattProfile::from_mass(mass, s)?.sample_on_grid(grid)?;
            let vals = base
                .values()
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    let z = (grid.center(i as isize) - center) / width;
                    (r * (1.0 + amplitude * (-0.5 * z * z).exp())).max(0.0)
                })
                .collect();
            normalized(Field::from_values(*grid, vals)?, mass)
        }
        InitialCondition::RandomBumps {
            mass,
            count,
            spread,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bumps: Vec<(f64, f64, f64)> = (0..count.max(1))
                .map(|_| {
                    let w = rng.gen_range(0.1..0.4) * spread;
                    let c = rng.gen_range(-spread + w..spread - w);
                    (c, w, rng.gen_range(0.2..1.0))
                })
                .collect();
            let f = Field::from_fn(*grid, |x| {
                bumps
                    .iter()
                    .map(|&(c, w, h)| {
                        let z = (x - c) / w;
                        // compactly supported smooth bump
                        if z.abs() < 1.0 {
                            h * (1.0 - z * z).powi(3)
                        } else {
                            0.0
                        }
                    })
                    .sum()
            });
            normalized(f, mass)
        }
    }
}
