//! Cost functions of the energy-biased tree search.

use crate::cspace::SpaceDescriptor;
use crate::scalar::Real;

/// Bottleneck cost-to-come of a child: `max{c_parent, E(child) - E(init)}`.
pub fn combine_energy_cost<S: Real>(c_parent: S, e_child: S, e_init: S) -> S {
    c_parent.max(e_child - e_init)
}

/// Energy cost plus `gamma` times path length.
pub fn hybrid_cost<S: Real>(c_energy: S, c_length: S, gamma: S) -> S {
    c_energy + gamma * c_length
}

/// Neighborhood radius `min{gamma_rrt * (ln n / n)^(1/d), cap}` for a tree of `n` vertices.
pub fn rewire_radius<S: Real>(
    n_vertices: usize,
    space: &SpaceDescriptor<S>,
    gamma_rrt: S,
    cap: S,
) -> S {
    let n = n_vertices.max(1) as f64;
    let d = space.dimension().max(1) as f64;
    let shrink = (n.ln() / n).powf(1.0 / d);
    (gamma_rrt * S::lit(shrink)).min(cap)
}

/// Karaman-Frazzoli lower bound on `gamma_rrt` for asymptotic optimality,
/// `2 (1 + 1/d)^(1/d) (mu / zeta_d)^(1/d)`.
pub fn optimal_gamma_rrt<S: Real>(space: &SpaceDescriptor<S>) -> S {
    let d = space.dimension().max(1) as f64;
    let mu = space.measure().as_f64();
    // Volume of the unit d-ball.
    let zeta = std::f64::consts::PI.powf(d / 2.0) / gamma_fn(d / 2.0 + 1.0);
    S::lit(2.0 * (1.0 + 1.0 / d).powf(1.0 / d) * (mu / zeta).powf(1.0 / d))
}

/// Gamma function for the half-integer arguments the unit-ball volume needs.
fn gamma_fn(x: f64) -> f64 {
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as u64).map(|k| k as f64).product()
    } else {
        // x = k + 1/2
        let mut g = std::f64::consts::PI.sqrt();
        let mut y = 0.5;
        while y + 1e-12 < x {
            g *= y;
            y += 1.0;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_recurrence() {
        assert_eq!(combine_energy_cost(2.0, 5.0, 0.0), 5.0);
        assert_eq!(combine_energy_cost(7.0, 5.0, 0.0), 7.0);
        assert_eq!(combine_energy_cost(0.0, 3.25, 3.25), 0.0);
    }

    #[test]
    fn hybrid_mixture() {
        assert_eq!(hybrid_cost(1.5, 4.0, 0.0), 1.5);
        assert_eq!(hybrid_cost(1.0, 2.0, 1.0), 3.0);
        assert_eq!(hybrid_cost(0.0, 5.0, 10.0), 50.0);
    }

    #[test]
    fn radius_formula() {
        let plane = SpaceDescriptor::<f64>::planar_point([0.0, 0.0], [1.0, 1.0]).unwrap();
        assert_eq!(rewire_radius(1, &plane, 10.0, 0.5), 0.0);
        // 10 * sqrt(ln(100) / 100) = 2.146 > 0.5
        assert_eq!(rewire_radius(100, &plane, 10.0, 0.5), 0.5);
        let uncapped = rewire_radius(100, &plane, 10.0, f64::INFINITY);
        assert!((uncapped - 10.0 * (100f64.ln() / 100.0).sqrt()).abs() < 1e-12);
        assert!((uncapped - 2.146).abs() < 1e-3);
        let mut last = f64::INFINITY;
        for n in 3..5000 {
            let r = rewire_radius(n, &plane, 10.0, f64::INFINITY);
            assert!(r <= last);
            last = r;
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((gamma_fn(2.0) - 1.0).abs() < 1e-12);
        assert!((gamma_fn(2.5) - 1.329_340_388_179_137).abs() < 1e-12);
        assert!((gamma_fn(4.0) - 6.0).abs() < 1e-12);
    }
}
