use crate::error::{Error, Result};
use crate::fem::FEField;
use crate::parabolic::{TimeGrid, Trajectory};

/// Unnormalised bump `exp(-1 / (1 - s²))` on `(-1, 1)`.
fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// `S_δ(t) = ((T + 2δ) / T) (t - a) + a - δ`, mapping `[a, a + T]` onto
/// `[a - δ, a + T + δ]`.
pub fn stretch_map(t: f64, grid: &TimeGrid, delta: f64) -> f64 {
    let (a, len) = (grid.start, grid.t_final);
    (len + 2.0 * delta) / len * (t - a) + a - delta
}

pub fn stretch_map_inverse(s: f64, grid: &TimeGrid, delta: f64) -> f64 {
    let (a, len) = (grid.start, grid.t_final);
    (s - a + delta) * len / (len + 2.0 * delta) + a
}

/// `u ∘ S_δ⁻¹` on the stretched grid `[a - δ, a + T + δ]` with the same
/// number of steps, by piecewise-linear resampling.
pub fn stretch_time(u: &Trajectory, delta: f64) -> Result<Trajectory> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("delta must be non-negative, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(u.clone());
    }
    let g = u.grid();
    let stretched = TimeGrid::on_interval(g.start - delta, g.t_final + 2.0 * delta, g.steps)?;
    let values = stretched
        .nodes()
        .into_iter()
        .map(|s| u.sample_at(stretch_map_inverse(s, g, delta)))
        .collect();
    Trajectory::new(u.space().clone(), stretched, values)
}

/// Convolution in time with the normalised bump `η_ε`, `u` extended by its
/// end values outside the grid. Each output node is a convex combination of
/// samples of the piecewise-linear interpolant.
pub fn mollify_time(u: &Trajectory, epsilon: f64) -> Result<Trajectory> {
    let g = u.grid();
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if epsilon < g.tau() {
        return Err(Error::invalid(format!(
            "epsilon = {epsilon} is below the time step {}: kernel not resolved",
            g.tau()
        )));
    }
    // midpoint rule for the kernel, several points per time step
    let n = 8 * (epsilon / g.tau()).ceil() as usize;
    let zs: Vec<f64> = (0..n).map(|j| -1.0 + (2.0 * j as f64 + 1.0) / n as f64).collect();
    let raw: Vec<f64> = zs.iter().map(|&z| bump(z)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let dofs = u.space().n_dofs();
    let values = g
        .nodes()
        .into_iter()
        .map(|t| {
            let mut acc = vec![0.0; dofs];
            for (z, w) in zs.iter().zip(&weights) {
                let s = u.sample_at(t - epsilon * z);
                acc.iter_mut().zip(&s).for_each(|(a, x)| *a += w * x);
            }
            acc
        })
        .collect();
    Trajectory::new(u.space().clone(), *g, values)
}

/// Partition of unity `{φ_i}` subordinate to the snapshot times: `φ_i` is
/// supported between the neighbouring snapshot times (constant beyond the
/// first and last one) and `Σ φ_i = 1`.
pub fn partition_of_unity(times: &[f64], t: f64) -> Vec<f64> {
    let m = times.len();
    if m == 1 {
        return vec![1.0];
    }
    let mut phi = vec![0.0; m];
    if t <= times[0] {
        phi[0] = 1.0;
        return phi;
    }
    if t >= times[m - 1] {
        phi[m - 1] = 1.0;
        return phi;
    }
    for i in 0..m {
        let left = if i == 0 { f64::NEG_INFINITY } else { times[i - 1] };
        let right = if i + 1 == m { f64::INFINITY } else { times[i + 1] };
        phi[i] = if t == times[i] {
            1.0
        } else if t < times[i] && t > left {
            bump((times[i] - t) / (times[i] - left))
        } else if t > times[i] && t < right {
            bump((t - times[i]) / (right - times[i]))
        } else {
            0.0
        };
    }
    // at a snapshot time only that snapshot contributes
    if let Some(i) = times.iter().position(|&s| s == t) {
        phi.iter_mut().enumerate().for_each(|(j, p)| *p = if j == i { 1.0 } else { 0.0 });
        return phi;
    }
    let s: f64 = phi.iter().sum();
    phi.iter_mut().for_each(|p| *p /= s);
    phi
}

/// `Σ φ_i(t) v_i` sampled on `grid`.
pub fn pou_recovery(snapshots: &[(f64, FEField)], grid: TimeGrid) -> Result<Trajectory> {
    let (_, first) = snapshots
        .first()
        .ok_or_else(|| Error::invalid("pou_recovery needs at least one snapshot"))?;
    let space = first.space().clone();
    for w in snapshots.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::invalid("snapshot times must be strictly increasing"));
        }
    }
    if snapshots.iter().any(|(_, v)| !v.space().same_as(&space)) {
        return Err(Error::invalid("snapshots live on different spaces"));
    }
    let times: Vec<f64> = snapshots.iter().map(|(t, _)| *t).collect();
    let values = grid
        .nodes()
        .into_iter()
        .map(|t| {
            let phi = partition_of_unity(&times, t);
            let mut acc = vec![0.0; space.n_dofs()];
            for (p, (_, v)) in phi.iter().zip(snapshots) {
                if *p == 1.0 {
                    return v.values().to_vec();
                }
                if *p != 0.0 {
                    acc.iter_mut().zip(v.values()).for_each(|(a, x)| *a += p * x);
                }
            }
            acc
        })
        .collect();
    Trajectory::new(space, grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_sums_to_one() {
        let times = [0.0, 0.3, 0.5, 1.0];
        for k in 0..=100 {
            let t = -0.1 + 1.2 * k as f64 / 100.0;
            let phi = partition_of_unity(&times, t);
            assert!((phi.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(phi.iter().all(|&p| p >= 0.0));
            for (i, p) in phi.iter().enumerate() {
                if *p > 0.0 {
                    let lo = if i == 0 { f64::NEG_INFINITY } else { times[i - 1] };
                    let hi = if i + 1 == times.len() { f64::INFINITY } else { times[i + 1] };
                    assert!(t > lo && t < hi);
                }
            }
        }
    }

    #[test]
    fn stretch_endpoints() {
        let g = TimeGrid::new(2.0, 10).unwrap();
        assert_eq!(stretch_map(0.0, &g, 0.3), -0.3);
        assert!((stretch_map(2.0, &g, 0.3) - 2.3).abs() < 1e-15);
        assert!((stretch_map_inverse(stretch_map(0.7, &g, 0.3), &g, 0.3) - 0.7).abs() < 1e-15);
    }
}
