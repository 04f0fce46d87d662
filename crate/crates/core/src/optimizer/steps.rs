//! Per-iteration update rules.
//!
//! Every rule moves particles in index order against the global best as it
//! stood at the start of the sweep. Personal and global bests are updated
//! right after each evaluation, so a sweep cut short by the budget still
//! leaves a consistent state.

use super::swarm::{Evaluator, SwarmState};
use super::{BallLaw, PsoParams};
use crate::domain::{clamp_to_domain, Domain};
use crate::rng::Rng;

/// The evaluation budget ran out mid-sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetExhausted;

/// Clamps, evaluates, and updates bests for particle `j`. Personal best
/// moves on strict improvement unless `accept_ties` is set.
fn commit(
    state: &mut SwarmState,
    j: usize,
    mut x: Vec<f64>,
    mut v: Vec<f64>,
    domain: &Domain,
    eval: &mut Evaluator<'_>,
    accept_ties: bool,
) -> Result<(), BudgetExhausted> {
    clamp_to_domain(&mut x, &mut v, domain);
    let (id, value) = eval.eval(&x).ok_or(BudgetExhausted)?;
    let p = &mut state.particles[j];
    let improved = if accept_ties { value <= p.best_value } else { value < p.best_value };
    if improved {
        p.best_position = x.clone();
        p.best_value = value;
    }
    p.position = x;
    p.velocity = v;
    p.value = value;
    p.eval_id = id;
    state.offer_global(j);
    Ok(())
}

/// Componentwise rule shared by OPSO and the heuristic-direction variants:
/// `v' = ω v + φ_p R_p ⊙ (p - x) + φ_g R_g ⊙ (g - x) [+ φ_h R_h ⊙ (h - x)]`.
fn componentwise_velocity(
    rng: &mut Rng,
    params: &PsoParams,
    x: &[f64],
    v: &[f64],
    p: &[f64],
    g: &[f64],
    heuristic: Option<&[f64]>,
) -> Vec<f64> {
    let d = x.len();
    let rp: Vec<f64> = (0..d).map(|_| rng.uniform()).collect();
    let rg: Vec<f64> = (0..d).map(|_| rng.uniform()).collect();
    let mut out: Vec<f64> = (0..d)
        .map(|i| params.omega * v[i] + params.phi_p * rp[i] * (p[i] - x[i]) + params.phi_g * rg[i] * (g[i] - x[i]))
        .collect();
    // Zero weight draws nothing, so the rule reduces exactly to OPSO.
    if let Some(h) = heuristic.filter(|_| params.phi_h != 0.0) {
        let rh: Vec<f64> = (0..d).map(|_| rng.uniform()).collect();
        for i in 0..d {
            out[i] += params.phi_h * rh[i] * (h[i] - x[i]);
        }
    }
    out
}

/// SPSO2011 velocity: `ω v + (y - x)` with `y` drawn from the ball around the
/// center of gravity `G` of radius `‖G - x‖`.
fn spso_velocity(rng: &mut Rng, params: &PsoParams, x: &[f64], v: &[f64], center: &[f64]) -> Vec<f64> {
    let radius = x.iter().zip(center).map(|(a, c)| (c - a) * (c - a)).sum::<f64>().sqrt();
    let y = match params.ball {
        BallLaw::Radial => rng.in_ball_radial(center, radius),
        BallLaw::Volume => rng.in_ball(center, radius),
    };
    let omega = params.omega;
    (0..x.len()).map(|i| omega * v[i] + (y[i] - x[i])).collect()
}

/// `G = x + (φ_p (p - x) + φ_g (g - x)) / 3`, or `x + φ_p (p - x) / 2` for the
/// particle that owns the global best.
fn spso_center(params: &PsoParams, x: &[f64], p: &[f64], g: &[f64], owns_global: bool) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            if owns_global {
                x[i] + params.phi_p * (p[i] - x[i]) / 2.0
            } else {
                x[i] + (params.phi_p * (p[i] - x[i]) + params.phi_g * (g[i] - x[i])) / 3.0
            }
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn spso_move(
    state: &mut SwarmState,
    j: usize,
    params: &PsoParams,
    domain: &Domain,
    rng: &mut Rng,
    eval: &mut Evaluator<'_>,
    g: &[f64],
    g_index: usize,
) -> Result<(), BudgetExhausted> {
    let pt = &state.particles[j];
    let center = spso_center(params, &pt.position, &pt.best_position, g, j == g_index);
    let v = spso_velocity(rng, params, &pt.position, &pt.velocity, &center);
    let x: Vec<f64> = pt.position.iter().zip(&v).map(|(a, b)| a + b).collect();
    commit(state, j, x, v, domain, eval, false)
}

pub fn step_opso(
    state: &mut SwarmState,
    params: &PsoParams,
    domain: &Domain,
    rng: &mut Rng,
    eval: &mut Evaluator<'_>,
) -> Result<(), BudgetExhausted> {
    componentwise_sweep(state, params, domain, rng, eval, None)
}

fn componentwise_sweep(
    state: &mut SwarmState,
    params: &PsoParams,
    domain: &Domain,
    rng: &mut Rng,
    eval: &mut Evaluator<'_>,
    heuristic: Option<&[f64]>,
) -> Result<(), BudgetExhausted> {
    let g = state.global_best_position.clone();
    for j in 0..state.particles.len() {
        if eval.exhausted() {
            return Err(BudgetExhausted);
        }
        let pt = &state.particles[j];
        let v = componentwise_velocity(rng, params, &pt.position, &pt.velocity, &pt.best_position, &g, heuristic);
        let x: Vec<f64> = pt.position.iter().zip(&v).map(|(a, b)| a + b).collect();
        commit(state, j, x, v, domain, eval, false)?;
    }
    Ok(())
}

pub fn step_spso2011(
    state: &mut SwarmState,
    params: &PsoParams,
    domain: &Domain,
    rng: &mut Rng,
    eval: &mut Evaluator<'_>,
) -> Result<(), BudgetExhausted> {
    let g = state.global_best_position.clone();
    let g_index = state.global_best_index;
    for j in 0..state.particles.len() {
        if eval.exhausted() {
            return Err(BudgetExhausted);
        }
        spso_move(state, j, params, domain, rng, eval, &g, g_index)?;
    }
    Ok(())
}

/// Heuristic direction toward `h`, the surrogate-mean minimizer.
pub fn step_variant_a(
    state: &mut SwarmState,
    params: &PsoParams,
    domain: &Domain,
    rng: &mut Rng,
    eval: &mut Evaluator<'_>,
    h: &[f64],
) -> Result<(), BudgetExhausted> {
    if !params.geometric_heuristic {
        return componentwise_sweep(state, params, domain, rng, eval, Some(h));
    }
    let g = state.global_best_position.clone();
    for j in 0..state.particles.len() {
        if eval.exhausted() {
            return Err(BudgetExhausted);
        }
        let pt = &state.particles[j];
        let (x, p) = (&pt.position, &pt.best_position);
        let center: Vec<f64> = (0..x.len())
            .map(|i| {
                x[i] + (params.phi_p * (p[i] - x[i]) + params.phi_g * (g[i] - x[i]) + params.phi_h * (h[i] - x[i]))
                    / 4.0
            })
            .collect();
        let v = spso_velocity(rng, params, x, &pt.velocity, &center);
        let nx: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
        commit(state, j, nx, v, domain, eval, false)?;
    }
    Ok(())
}

/// Relocates the worst particle to `target` with a standard-normal velocity;
/// every other particle takes an SPSO2011 step. Returns the relocated index.
///
/// The relocated particle's personal best moves unless the new value is
/// strictly worse than the old personal best.
pub fn step_relocate(
    state: &mut SwarmState,
    params: &PsoParams,
    domain: &Domain,
    rng: &mut Rng,
    eval: &mut Evaluator<'_>,
    target: &[f64],
) -> Result<usize, BudgetExhausted> {
    let worst = state.worst_index();
    let g = state.global_best_position.clone();
    let g_index = state.global_best_index;
    for j in 0..state.particles.len() {
        if eval.exhausted() {
            return Err(BudgetExhausted);
        }
        if j == worst {
            let v: Vec<f64> = (0..target.len()).map(|_| rng.standard_normal()).collect();
            let mut x = target.to_vec();
            domain.project(&mut x);
            commit(state, j, x, v, domain, eval, true)?;
        } else {
            spso_move(state, j, params, domain, rng, eval, &g, g_index)?;
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Objective;
    use crate::optimizer::swarm::Particle;
    use crate::optimizer::Variant;

    fn particle(x: Vec<f64>, v: Vec<f64>, f: &Objective) -> Particle {
        let val = f.eval(&x);
        Particle { position: x.clone(), velocity: v, value: val, eval_id: 0, best_position: x, best_value: val }
    }

    fn sphere(d: usize) -> Objective {
        Objective::new("sphere", d, |x| x.iter().map(|c| c * c).sum())
    }

    #[test]
    fn opso_at_rest_stays_put() {
        let f = sphere(2);
        let d = Domain::cube(2, -5.0, 5.0).unwrap();
        let mut s = SwarmState::new(vec![particle(vec![0.0, 0.0], vec![0.0, 0.0], &f)]);
        let mut e = Evaluator::new(&f, 10, 1);
        let params = PsoParams::preset(Variant::Opso, 1);
        step_opso(&mut s, &params, &d, &mut Rng::new(1), &mut e).unwrap();
        assert_eq!(s.particles[0].position, vec![0.0, 0.0]);
        assert_eq!(s.particles[0].velocity, vec![0.0, 0.0]);
    }

    #[test]
    fn opso_without_attraction_is_inertia() {
        let f = sphere(2);
        let d = Domain::cube(2, -5.0, 5.0).unwrap();
        let mut s = SwarmState::new(vec![
            particle(vec![1.0, 1.0], vec![0.5, -0.25], &f),
            particle(vec![-2.0, 0.5], vec![-1.0, 1.0], &f),
        ]);
        let mut e = Evaluator::new(&f, 10, 1);
        let mut params = PsoParams::preset(Variant::Opso, 2);
        params.phi_p = 0.0;
        params.phi_g = 0.0;
        step_opso(&mut s, &params, &d, &mut Rng::new(1), &mut e).unwrap();
        assert_eq!(s.particles[0].position, vec![1.5, 0.75]);
        assert_eq!(s.particles[1].position, vec![-3.0, 1.5]);
    }

    #[test]
    fn opso_scalar_replay() {
        // Hand-rolled replay of two steps of one 1D particle.
        let f = Objective::new("q", 1, |x| (x[0] - 1.0).powi(2));
        let d = Domain::cube(1, -10.0, 10.0).unwrap();
        let params = PsoParams { omega: 0.7, phi_p: 1.4, phi_g: 1.1, ..PsoParams::preset(Variant::Opso, 1) };
        let mut s = SwarmState::new(vec![particle(vec![3.0], vec![-0.5], &f)]);
        let mut e = Evaluator::new(&f, 10, 1);
        let mut rng = Rng::new(99);
        step_opso(&mut s, &params, &d, &mut rng, &mut e).unwrap();
        step_opso(&mut s, &params, &d, &mut rng, &mut e).unwrap();

        let mut oracle = Rng::new(99);
        let (mut x, mut v, mut p, mut fp) = (3.0f64, -0.5f64, 3.0f64, 4.0f64);
        for _ in 0..2 {
            let rp = oracle.uniform();
            let rg = oracle.uniform();
            let g = p;
            v = 0.7 * v + 1.4 * rp * (p - x) + 1.1 * rg * (g - x);
            x += v;
            let fx = (x - 1.0) * (x - 1.0);
            if fx < fp {
                p = x;
                fp = fx;
            }
        }
        assert_eq!(s.particles[0].position[0], x);
        assert_eq!(s.particles[0].velocity[0], v);
        assert_eq!(s.particles[0].best_position[0], p);
        assert_eq!(s.global_best_value, fp);
    }

    #[test]
    fn spso_degenerate_sphere_is_inertia() {
        let f = sphere(3);
        let d = Domain::cube(3, -5.0, 5.0).unwrap();
        let mut s = SwarmState::new(vec![particle(vec![0.5, -0.5, 1.0], vec![0.2, 0.4, -0.1], &f)]);
        let params = PsoParams::preset(Variant::Spso2011, 1);
        let mut e = Evaluator::new(&f, 10, 1);
        step_spso2011(&mut s, &params, &d, &mut Rng::new(3), &mut e).unwrap();
        let w = params.omega;
        let expected: Vec<f64> = [0.2, 0.4, -0.1].iter().map(|v| w * v).collect();
        assert_eq!(s.particles[0].velocity, expected);
    }

    #[test]
    fn spso_ball_mean_is_center() {
        // ω = 0, p = g ≠ x: x' is drawn from ball(G, ‖G - x‖), symmetric about G.
        for ball in [BallLaw::Radial, BallLaw::Volume] {
            let params = PsoParams { omega: 0.0, ball, ..PsoParams::preset(Variant::Spso2011, 2) };
            ball_mean_is_center(&params);
        }
    }

    fn ball_mean_is_center(params: &PsoParams) {
        let x = [1.0, -1.0];
        let p = [0.0, 0.5];
        let center = spso_center(params, &x, &p, &p, false);
        let radius = ((center[0] - x[0]).powi(2) + (center[1] - x[1]).powi(2)).sqrt();
        let mut rng = Rng::new(8);
        let n = 10_000;
        let mut mean = [0.0, 0.0];
        for _ in 0..n {
            let v = spso_velocity(&mut rng, params, &x, &[0.0, 0.0], &center);
            mean[0] += (x[0] + v[0]) / n as f64;
            mean[1] += (x[1] + v[1]) / n as f64;
        }
        let err = ((mean[0] - center[0]).powi(2) + (mean[1] - center[1]).powi(2)).sqrt();
        assert!(err < 0.05 * radius, "err {err} radius {radius}");
    }

    #[test]
    fn variant_a_zero_weight_matches_opso() {
        let f = sphere(3);
        let d = Domain::cube(3, -5.0, 5.0).unwrap();
        let mk = |f: &Objective| {
            SwarmState::new(vec![
                particle(vec![1.0, 2.0, -1.0], vec![0.3, 0.0, 0.1], f),
                particle(vec![-2.0, 0.5, 3.0], vec![-0.2, 0.4, 0.0], f),
            ])
        };
        let params = PsoParams { phi_h: 0.0, ..PsoParams::preset(Variant::A3, 2) };
        let (mut sa, mut sb) = (mk(&f), mk(&f));
        let (mut ra, mut rb) = (Rng::new(5), Rng::new(5));
        let mut ea = Evaluator::new(&f, 100, 1);
        let mut eb = Evaluator::new(&f, 100, 1);
        for _ in 0..10 {
            step_variant_a(&mut sa, &params, &d, &mut ra, &mut ea, &[4.0, 4.0, 4.0]).unwrap();
            step_opso(&mut sb, &params, &d, &mut rb, &mut eb).unwrap();
        }
        assert_eq!(sa.particles, sb.particles);
    }

    #[test]
    fn variant_a_all_coincide() {
        let f = sphere(2);
        let d = Domain::cube(2, -5.0, 5.0).unwrap();
        let mut s = SwarmState::new(vec![particle(vec![0.0, 0.0], vec![1.0, -1.0], &f)]);
        let params = PsoParams::preset(Variant::A1, 1);
        let mut e = Evaluator::new(&f, 10, 1);
        step_variant_a(&mut s, &params, &d, &mut Rng::new(2), &mut e, &[0.0, 0.0]).unwrap();
        assert_eq!(s.particles[0].velocity, vec![0.42, -0.42]);
    }

    #[test]
    fn relocation_of_single_particle() {
        let f = sphere(2);
        let d = Domain::cube(2, -5.0, 5.0).unwrap();
        let mut s = SwarmState::new(vec![particle(vec![3.0, 3.0], vec![0.0, 0.0], &f)]);
        let params = PsoParams::preset(Variant::B, 1);
        let mut e = Evaluator::new(&f, 10, 1);
        let j = step_relocate(&mut s, &params, &d, &mut Rng::new(2), &mut e, &[1.0, -1.0]).unwrap();
        assert_eq!(j, 0);
        assert_eq!(s.particles[0].position, vec![1.0, -1.0]);
        // Improvement moves the personal best to the target.
        assert_eq!(s.particles[0].best_position, vec![1.0, -1.0]);
        assert_eq!(s.global_best_value, 2.0);
    }

    #[test]
    fn relocation_to_worse_target_keeps_personal_best() {
        let f = sphere(1);
        let d = Domain::cube(1, -5.0, 5.0).unwrap();
        let mut s = SwarmState::new(vec![particle(vec![0.5], vec![0.0], &f)]);
        let params = PsoParams::preset(Variant::B, 1);
        let mut e = Evaluator::new(&f, 10, 1);
        step_relocate(&mut s, &params, &d, &mut Rng::new(2), &mut e, &[4.0]).unwrap();
        assert_eq!(s.particles[0].position, vec![4.0]);
        assert_eq!(s.particles[0].best_position, vec![0.5]);
    }

    #[test]
    fn relocation_to_own_position_resamples_velocity() {
        let f = sphere(2);
        let d = Domain::cube(2, -5.0, 5.0).unwrap();
        let mut s = SwarmState::new(vec![
            particle(vec![0.1, 0.1], vec![0.0, 0.0], &f),
            particle(vec![2.0, 2.0], vec![0.0, 0.0], &f),
        ]);
        let params = PsoParams::preset(Variant::B, 2);
        let mut e = Evaluator::new(&f, 10, 1);
        let j = step_relocate(&mut s, &params, &d, &mut Rng::new(4), &mut e, &[2.0, 2.0]).unwrap();
        assert_eq!(j, 1);
        assert_eq!(s.particles[1].position, vec![2.0, 2.0]);
        assert_ne!(s.particles[1].velocity, vec![0.0, 0.0]);
    }

    #[test]
    fn partial_sweep_stops_at_budget() {
        let f = sphere(1);
        let d = Domain::cube(1, -5.0, 5.0).unwrap();
        let mut s = SwarmState::new((0..4).map(|i| particle(vec![i as f64], vec![0.1], &f)).collect());
        let params = PsoParams::preset(Variant::Spso2011, 4);
        let mut e = Evaluator::new(&f, 2, 1);
        assert_eq!(step_spso2011(&mut s, &params, &d, &mut Rng::new(0), &mut e), Err(BudgetExhausted));
        assert_eq!(e.used(), 2);
        assert_eq!(s.particles[2].position, vec![2.0]);
    }
}
