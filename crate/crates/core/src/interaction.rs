//! Obstacle-interaction shape solver.
//!
//! When the commanded uniform curvature would push the backbone into an
//! obstacle, the robot settles into the segmented shape that minimizes its
//! strain-energy surrogate
//!
//! ```text
//! f(k) = gamma1 * sum_i (k_i - k_t)^2 + gamma2 * sum_i (k_{i+1} - k_i)^2
//! ```
//!
//! subject to every sub-segment tip keeping distance `r_o + r_r` from the
//! obstacle center. The solver is a quadratic-penalty method (penalty weight
//! grows by 10x per round, 5 rounds) with a damped Gauss-Newton inner loop
//! on the penalized least-squares residuals. It is deterministic and free of
//! shared state, so concurrent calls are safe.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{chain_poses, PlanarPoint, PlanarPose, SegmentedShape};

/// Circular obstacle in the working plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub center: PlanarPoint,
    pub radius: f64,
}

impl Obstacle {
    pub fn new(center: PlanarPoint, radius: f64) -> Result<Self> {
        let o = Self { center, radius };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() || !self.radius.is_finite() || self.radius <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "obstacle needs finite center and radius > 0, got ({}, {}) r={}",
                self.center.x, self.center.y, self.radius
            )));
        }
        Ok(())
    }

    /// True if `p` lies strictly inside the obstacle disc.
    pub fn contains(&self, p: &PlanarPoint) -> bool {
        self.center.distance_to(p) < self.radius
    }
}

/// Weights and discretization of the interaction problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InteractionWeights {
    /// Weight on deviation from the commanded curvature.
    pub gamma1: f64,
    /// Weight on curvature differences between neighboring sub-segments.
    pub gamma2: f64,
    /// Robot tube radius added to the obstacle radius in the clearance.
    pub robot_radius: f64,
    /// Number of sub-segments the backbone is split into.
    pub segments: usize,
}

impl Default for InteractionWeights {
    fn default() -> Self {
        Self {
            gamma1: 1.0,
            gamma2: 10.0,
            robot_radius: 0.05,
            segments: 20,
        }
    }
}

impl InteractionWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma1 > 0.0 && self.gamma1.is_finite()) || !(self.gamma2 > 0.0 && self.gamma2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gamma weights must be positive, got gamma1={} gamma2={}",
                self.gamma1, self.gamma2
            )));
        }
        if !(self.robot_radius >= 0.0 && self.robot_radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "robot radius must be >= 0, got {}",
                self.robot_radius
            )));
        }
        if self.segments < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 sub-segments, got {}",
                self.segments
            )));
        }
        Ok(())
    }
}

/// Outcome of one [`resolve_shape`] call.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// The resolved backbone shape.
    pub shape: SegmentedShape,
    /// Strain-energy objective of the resolved shape.
    pub objective_value: f64,
    /// Largest remaining clearance violation, meters (0 when feasible).
    pub max_violation: f64,
    /// Total inner iterations spent across penalty rounds and starts.
    pub iterations: usize,
    /// Feasible within tolerance and the inner loop reached stationarity.
    pub converged: bool,
    /// Penalized-merit values after each accepted inner step, one trace per
    /// penalty round of the winning start. Non-increasing within a trace.
    pub merit_traces: Vec<Vec<f64>>,
}

/// Violation below this counts as feasible (meters).
pub const VIOLATION_TOLERANCE: f64 = 1e-4;
const REL_OBJECTIVE_TOLERANCE: f64 = 1e-8;
const MAX_INNER_ITERATIONS: usize = 500;
const PENALTY_ROUNDS: usize = 5;
const PENALTY_INITIAL: f64 = 10.0;
const PENALTY_GROWTH: f64 = 10.0;

/// Strain-energy objective over sub-segment curvatures.
pub fn objective(kappas: &[f64], kappa_target: f64, w: &InteractionWeights) -> f64 {
    let deviation: f64 = kappas.iter().map(|k| (k - kappa_target).powi(2)).sum();
    let smoothness: f64 = kappas.windows(2).map(|p| (p[1] - p[0]).powi(2)).sum();
    w.gamma1 * deviation + w.gamma2 * smoothness
}

/// Signed clearance margin at each sub-segment tip: distance to the obstacle
/// center minus `r_o + r_r`. Non-negative entries satisfy the constraint.
pub fn clearance(
    shape: &SegmentedShape,
    base: &PlanarPose,
    obstacle: &Obstacle,
    robot_radius: f64,
) -> Result<Vec<f64>> {
    let poses = chain_poses(shape, base)?;
    let safe = obstacle.radius + robot_radius;
    Ok(poses[1..]
        .iter()
        .map(|p| p.position.distance_to(&obstacle.center) - safe)
        .collect())
}

/// True iff any sub-segment tip violates the clearance constraint.
pub fn is_colliding(
    shape: &SegmentedShape,
    base: &PlanarPose,
    obstacle: &Obstacle,
    robot_radius: f64,
) -> Result<bool> {
    Ok(clearance(shape, base, obstacle, robot_radius)?.iter().any(|m| *m < 0.0))
}

/// d/dkappa of the local arc chord, singularity-safe.
fn arc_chord_deriv(kappa: f64, l: f64) -> (f64, f64) {
    let u = kappa * l;
    if u.abs() < 1e-4 {
        (
            -l * l / 2.0 * (1.0 - u * u / 4.0),
            -kappa * l * l * l / 3.0 * (1.0 - u * u / 10.0),
        )
    } else {
        (
            (1.0 - u.cos() - u * u.sin()) / (kappa * kappa),
            (u * u.cos() - u.sin()) / (kappa * kappa),
        )
    }
}

struct ProblemGeometry<'a> {
    base: &'a PlanarPose,
    obstacle: &'a Obstacle,
    safe_distance: f64,
    segment_length: f64,
    total_length: f64,
}

impl ProblemGeometry<'_> {
    fn margins(&self, kappas: &[f64]) -> Result<(Vec<PlanarPose>, Vec<f64>)> {
        let shape = SegmentedShape::new(kappas.to_vec(), self.total_length)?;
        let poses = chain_poses(&shape, self.base)?;
        let margins = poses[1..]
            .iter()
            .map(|p| p.position.distance_to(&self.obstacle.center) - self.safe_distance)
            .collect();
        Ok((poses, margins))
    }

    fn merit(&self, kappas: &[f64], kappa_target: f64, w: &InteractionWeights, mu: f64) -> Result<f64> {
        let (_, margins) = self.margins(kappas)?;
        let penalty: f64 = margins.iter().map(|m| m.min(0.0).powi(2)).sum();
        Ok(objective(kappas, kappa_target, w) + mu * penalty)
    }

    /// Gradient of margin `i` with respect to every curvature `j <= i`.
    ///
    /// The tip of sub-segment `i` is a sum of rotated chords; differentiating
    /// curvature `j` moves chord `j` directly and rotates everything after it:
    /// `dp/dk_j = R(theta_j) * chord'(k_j) + l * J * (p_{i+1} - p_{j+1})`
    /// with `J` the quarter-turn matrix.
    fn margin_jacobian_row(&self, poses: &[PlanarPose], kappas: &[f64], i: usize, row: &mut [f64]) {
        let l = self.segment_length;
        let tip = poses[i + 1].position;
        let dist = tip.distance_to(&self.obstacle.center);
        row.iter_mut().for_each(|v| *v = 0.0);
        if dist < 1e-12 {
            return; // gradient undefined at the center; leave zero
        }
        let ux = (tip.x - self.obstacle.center.x) / dist;
        let uy = (tip.y - self.obstacle.center.y) / dist;
        for j in 0..=i {
            let (dcx, dcy) = arc_chord_deriv(kappas[j], l);
            let (sh, ch) = poses[j].heading.sin_cos();
            let mut dx = ch * dcx - sh * dcy;
            let mut dy = sh * dcx + ch * dcy;
            let tx = tip.x - poses[j + 1].position.x;
            let ty = tip.y - poses[j + 1].position.y;
            dx += l * (-ty);
            dy += l * tx;
            row[j] = ux * dx + uy * dy;
        }
    }
}

struct StartResult {
    kappas: Vec<f64>,
    objective_value: f64,
    max_violation: f64,
    iterations: usize,
    inner_converged: bool,
    merit_traces: Vec<Vec<f64>>,
}

fn solve_from_start(
    start: &[f64],
    kappa_target: f64,
    w: &InteractionWeights,
    geom: &ProblemGeometry<'_>,
) -> Result<StartResult> {
    let n = start.len();
    let mut kappas = start.to_vec();
    let mut iterations = 0usize;
    let mut inner_converged = false;
    let mut merit_traces = Vec::with_capacity(PENALTY_ROUNDS);

    let mut mu = PENALTY_INITIAL;
    for _round in 0..PENALTY_ROUNDS {
        let mut trace = Vec::new();
        let mut lambda = 1e-3;
        let mut merit = geom.merit(&kappas, kappa_target, w, mu)?;
        trace.push(merit);
        inner_converged = false;

        let mut inner = 0usize;
        let mut jac_row = vec![0.0; n];
        while inner < MAX_INNER_ITERATIONS {
            inner += 1;
            iterations += 1;

            let (poses, margins) = geom.margins(&kappas)?;

            // Normal equations A * delta = -g for the penalized least squares.
            let mut a = DMatrix::<f64>::zeros(n, n);
            let mut g = DVector::<f64>::zeros(n);
            for j in 0..n {
                a[(j, j)] += w.gamma1;
                g[j] += w.gamma1 * (kappas[j] - kappa_target);
            }
            for j in 0..n - 1 {
                let diff = kappas[j + 1] - kappas[j];
                a[(j, j)] += w.gamma2;
                a[(j + 1, j + 1)] += w.gamma2;
                a[(j, j + 1)] -= w.gamma2;
                a[(j + 1, j)] -= w.gamma2;
                g[j] -= w.gamma2 * diff;
                g[j + 1] += w.gamma2 * diff;
            }
            for (i, &m) in margins.iter().enumerate() {
                if m >= 0.0 {
                    continue;
                }
                geom.margin_jacobian_row(&poses, &kappas, i, &mut jac_row);
                let violation = -m;
                for j in 0..=i {
                    g[j] += mu * violation * (-jac_row[j]);
                    for k in 0..=i {
                        a[(j, k)] += mu * jac_row[j] * jac_row[k];
                    }
                }
            }

            if g.amax() < 1e-12 {
                inner_converged = true;
                break;
            }

            // Damped step; grow lambda until the merit decreases.
            let mut accepted = false;
            for _attempt in 0..30 {
                let mut damped = a.clone();
                for j in 0..n {
                    damped[(j, j)] += lambda;
                }
                let Some(chol) = damped.cholesky() else {
                    lambda *= 10.0;
                    continue;
                };
                let delta = chol.solve(&(-&g));
                let candidate: Vec<f64> =
                    kappas.iter().zip(delta.iter()).map(|(k, d)| k + d).collect();
                let new_merit = geom.merit(&candidate, kappa_target, w, mu)?;
                if new_merit <= merit {
                    let step = delta.amax();
                    let rel_drop = (merit - new_merit) / merit.abs().max(1.0);
                    kappas = candidate;
                    merit = new_merit;
                    trace.push(merit);
                    lambda = (lambda / 3.0).max(1e-12);
                    accepted = true;
                    if rel_drop < REL_OBJECTIVE_TOLERANCE || step < 1e-12 {
                        inner_converged = true;
                    }
                    break;
                }
                lambda *= 4.0;
            }
            if !accepted || inner_converged {
                inner_converged = inner_converged || !accepted;
                break;
            }
        }
        merit_traces.push(trace);

        let (_, margins) = geom.margins(&kappas)?;
        let max_violation = margins.iter().fold(0.0f64, |acc, m| acc.max(-m));
        if max_violation <= VIOLATION_TOLERANCE {
            return Ok(StartResult {
                objective_value: objective(&kappas, kappa_target, w),
                max_violation,
                kappas,
                iterations,
                inner_converged,
                merit_traces,
            });
        }
        mu *= PENALTY_GROWTH;
    }

    let (_, margins) = geom.margins(&kappas)?;
    let max_violation = margins.iter().fold(0.0f64, |acc, m| acc.max(-m));
    Ok(StartResult {
        objective_value: objective(&kappas, kappa_target, w),
        max_violation,
        kappas,
        iterations,
        inner_converged,
        merit_traces,
    })
}

/// Resolve the backbone shape for commanded curvature `kappa_target` and
/// length `s` against `obstacle`.
///
/// If the uniform shape already clears the obstacle it is returned exactly
/// (objective 0, zero iterations). Otherwise the penalty solver runs from
/// the uniform start plus two deflected starts (the backbone can yield to
/// either side of the obstacle) and the best feasible result wins.
pub fn resolve_shape(
    kappa_target: f64,
    s: f64,
    w: &InteractionWeights,
    obstacle: &Obstacle,
    base: &PlanarPose,
) -> Result<SolveReport> {
    if !kappa_target.is_finite() || !s.is_finite() || s <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "resolve_shape needs finite kappa and s > 0, got kappa={kappa_target}, s={s}"
        )));
    }
    w.validate()?;
    obstacle.validate()?;
    let n = w.segments;

    let uniform = SegmentedShape::uniform(kappa_target, n, s)?;
    let margins = clearance(&uniform, base, obstacle, w.robot_radius)?;
    if margins.iter().all(|m| *m >= 0.0) {
        return Ok(SolveReport {
            shape: uniform,
            objective_value: 0.0,
            max_violation: 0.0,
            iterations: 0,
            converged: true,
            merit_traces: Vec::new(),
        });
    }

    let geom = ProblemGeometry {
        base,
        obstacle,
        safe_distance: obstacle.radius + w.robot_radius,
        segment_length: s / n as f64,
        total_length: s,
    };

    let starts = [
        vec![kappa_target; n],
        vec![kappa_target + 0.4; n],
        vec![kappa_target - 0.4; n],
    ];
    let mut best: Option<StartResult> = None;
    let mut total_iterations = 0usize;
    for start in &starts {
        let result = solve_from_start(start, kappa_target, w, &geom)?;
        total_iterations += result.iterations;
        let better = match &best {
            None => true,
            Some(b) => {
                let feasible = result.max_violation <= VIOLATION_TOLERANCE;
                let best_feasible = b.max_violation <= VIOLATION_TOLERANCE;
                match (feasible, best_feasible) {
                    (true, true) => result.objective_value < b.objective_value,
                    (true, false) => true,
                    (false, true) => false,
                    (false, false) => result.max_violation < b.max_violation,
                }
            }
        };
        if better {
            best = Some(result);
        }
    }

    let best = best.expect("at least one start");
    let converged = best.max_violation <= VIOLATION_TOLERANCE && best.inner_converged;
    Ok(SolveReport {
        shape: SegmentedShape::new(best.kappas, s)?,
        objective_value: best.objective_value,
        max_violation: best.max_violation,
        iterations: total_iterations,
        converged,
        merit_traces: best.merit_traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn weights(gamma1: f64, gamma2: f64, robot_radius: f64, segments: usize) -> InteractionWeights {
        InteractionWeights { gamma1, gamma2, robot_radius, segments }
    }

    #[test]
    fn objective_examples() {
        let w = weights(1.0, 1.0, 0.0, 2);
        assert_eq!(objective(&[0.3, 0.3, 0.3], 0.3, &w), 0.0);
        assert_eq!(objective(&[0.0, 1.0], 0.0, &w), 2.0);

        // Linear in the weights.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let kappas: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let base = objective(&kappas, 0.2, &weights(1.3, 4.2, 0.0, 5));
        let scaled = objective(&kappas, 0.2, &weights(3.7 * 1.3, 3.7 * 4.2, 0.0, 5));
        assert!((scaled - 3.7 * base).abs() < 1e-12);
    }

    #[test]
    fn clearance_examples() {
        let far = Obstacle::new(PlanarPoint::new(100.0, 100.0), 0.5).unwrap();
        let shape = SegmentedShape::uniform(0.3, 5, 5.0).unwrap();
        for m in clearance(&shape, &PlanarPose::ORIGIN, &far, 0.05).unwrap() {
            assert!(m > 90.0);
        }

        // Straight 3 m backbone along +y against a disc centered on it.
        let obstacle = Obstacle::new(PlanarPoint::new(0.0, 2.0), 0.5).unwrap();
        let straight = SegmentedShape::uniform(0.0, 3, 3.0).unwrap();
        let margins = clearance(&straight, &PlanarPose::ORIGIN, &obstacle, 0.0).unwrap();
        let expect = [0.5, -0.5, 0.5];
        for (m, e) in margins.iter().zip(expect) {
            assert!((m - e).abs() < 1e-12, "margin {m} vs {e}");
        }

        // Zero radii reduce the margin to the plain distance.
        let tiny = Obstacle { center: PlanarPoint::new(0.3, 1.1), radius: 0.0 };
        let margins = clearance(&straight, &PlanarPose::ORIGIN, &tiny, 0.0).unwrap();
        let poses = chain_poses(&straight, &PlanarPose::ORIGIN).unwrap();
        for (m, pose) in margins.iter().zip(&poses[1..]) {
            assert!((m - pose.position.distance_to(&tiny.center)).abs() < 1e-12);
        }
    }

    #[test]
    fn collision_predicate() {
        let far = Obstacle::new(PlanarPoint::new(100.0, 100.0), 0.5).unwrap();
        let straight = SegmentedShape::uniform(0.0, 3, 3.0).unwrap();
        assert!(!is_colliding(&straight, &PlanarPose::ORIGIN, &far, 0.0).unwrap());

        let blocking = Obstacle::new(PlanarPoint::new(0.0, 2.0), 0.5).unwrap();
        assert!(is_colliding(&straight, &PlanarPose::ORIGIN, &blocking, 0.0).unwrap());

        // A zero-radius obstacle off the backbone never collides.
        let point = Obstacle { center: PlanarPoint::new(0.5, 1.0), radius: 0.0 };
        assert!(!is_colliding(&straight, &PlanarPose::ORIGIN, &point, 0.0).unwrap());
    }

    #[test]
    fn inactive_constraint_returns_uniform_exactly() {
        let far = Obstacle::new(PlanarPoint::new(100.0, 100.0), 0.5).unwrap();
        let w = weights(1.0, 10.0, 0.05, 10);
        let report = resolve_shape(0.3, 5.0, &w, &far, &PlanarPose::ORIGIN).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
        assert_eq!(report.objective_value, 0.0);
        assert_eq!(report.max_violation, 0.0);
        for &k in report.shape.kappas() {
            assert_eq!(k, 0.3); // bit-for-bit
        }
    }

    #[test]
    fn contact_solution_matches_frozen_grid_oracle() {
        // Exhaustive grid search over kappa_i in [-1, 1] at resolution 2e-3
        // (feasible points only) for N=3, s=3, kappa_t=0, obstacle (0, 2)
        // r=0.5, gamma1=1, gamma2=10 froze:
        //   objective 0.176864, best point (-0.258, -0.234, -0.212)
        // (mirror-symmetric optimum at the negated point). The bound below
        // covers one grid cell of objective variation around the optimum.
        let w = weights(1.0, 10.0, 0.0, 3);
        let obstacle = Obstacle::new(PlanarPoint::new(0.0, 2.0), 0.5).unwrap();
        let report = resolve_shape(0.0, 3.0, &w, &obstacle, &PlanarPose::ORIGIN).unwrap();
        assert!(report.converged, "solver should converge: {report:?}");
        assert!(report.max_violation <= VIOLATION_TOLERANCE);
        let frozen_grid_objective = 0.176864;
        let resolution_bound = 0.012;
        assert!(
            report.objective_value <= frozen_grid_objective + resolution_bound,
            "solver {} vs grid {}",
            report.objective_value,
            frozen_grid_objective
        );
        assert!(
            report.objective_value >= frozen_grid_objective - resolution_bound,
            "solver {} suspiciously below grid {}",
            report.objective_value,
            frozen_grid_objective
        );
    }

    #[test]
    fn mirror_symmetry() {
        // Reflecting the obstacle across the base heading axis and negating
        // the commanded curvature negates the resolved curvatures.
        let w = weights(1.0, 10.0, 0.05, 8);
        let obstacle = Obstacle::new(PlanarPoint::new(-0.4, 1.5), 0.5).unwrap();
        let mirrored = Obstacle::new(PlanarPoint::new(0.4, 1.5), 0.5).unwrap();
        let report = resolve_shape(0.3, 3.0, &w, &obstacle, &PlanarPose::ORIGIN).unwrap();
        let mirror = resolve_shape(-0.3, 3.0, &w, &mirrored, &PlanarPose::ORIGIN).unwrap();
        assert!(report.converged && mirror.converged);
        for (a, b) in report.shape.kappas().iter().zip(mirror.shape.kappas()) {
            assert!((a + b).abs() < 1e-9, "mirror mismatch: {a} vs {b}");
        }
    }

    #[test]
    fn merit_traces_non_increasing_within_rounds() {
        let w = weights(1.0, 10.0, 0.05, 12);
        let obstacle = Obstacle::new(PlanarPoint::new(0.2, 1.4), 0.4).unwrap();
        let report = resolve_shape(0.1, 3.5, &w, &obstacle, &PlanarPose::ORIGIN).unwrap();
        assert!(!report.merit_traces.is_empty());
        for trace in &report.merit_traces {
            for pair in trace.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-12, "merit increased: {} -> {}", pair[0], pair[1]);
            }
        }
    }

    #[test]
    fn random_contact_instances_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut contacts = 0;
        for _ in 0..20 {
            let n = rng.gen_range(3..7);
            let w = weights(1.0, 10.0, 0.02, n);
            let obstacle = Obstacle::new(
                PlanarPoint::new(rng.gen_range(-0.8..0.8), rng.gen_range(0.8..2.4)),
                rng.gen_range(0.2..0.6),
            )
            .unwrap();
            let kappa_t = rng.gen_range(-0.5..0.5);
            let s = rng.gen_range(2.0..4.5);
            let report = resolve_shape(kappa_t, s, &w, &obstacle, &PlanarPose::ORIGIN).unwrap();
            if report.iterations > 0 {
                contacts += 1;
            }
            if report.converged {
                assert!(report.max_violation <= VIOLATION_TOLERANCE);
            }
            assert!(report.converged, "instance failed to converge: {report:?}");
        }
        assert!(contacts > 5, "sampled instances should include real contacts");
    }

    #[test]
    fn rejects_bad_inputs() {
        let obstacle = Obstacle::new(PlanarPoint::new(0.0, 2.0), 0.5).unwrap();
        let w = InteractionWeights::default();
        assert!(resolve_shape(f64::NAN, 3.0, &w, &obstacle, &PlanarPose::ORIGIN).is_err());
        assert!(resolve_shape(0.0, 0.0, &w, &obstacle, &PlanarPose::ORIGIN).is_err());
        assert!(weights(0.0, 1.0, 0.0, 3).validate().is_err());
        assert!(weights(1.0, 1.0, -0.1, 3).validate().is_err());
        assert!(weights(1.0, 1.0, 0.0, 1).validate().is_err());
        assert!(Obstacle::new(PlanarPoint::new(0.0, 0.0), 0.0).is_err());
    }
}
