//! Symmetrizability of a state family `{rho_{x,t}}`: does a stochastic kernel
//! `U(t|x)` exist with `sum_t U(t|x) rho_{x',t} = sum_t U(t|x') rho_{x,t}` for
//! every input pair? A symmetrizable family has zero deterministic capacity,
//! so this is the gate in front of the secrecy-rate bounds.
//!
//! The decision is solved as a linear program: minimize the maximum entrywise
//! violation over the product of simplices, split into real/imaginary linear
//! equations. The verdict is then re-checked independently of the solver by
//! [`verify_symmetrizer`], which measures the worst pair in trace norm.

use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};
use rand::Rng;

use crate::channel::{CqavwcChannel, Distribution, Receiver};
use crate::error::{Error, Result};
use crate::qmath::{trace_norm, CMatrix, DensityOperator};

/// Feasibility threshold: a family counts as symmetrizable when the verified
/// residual does not exceed this.
pub const TOL_SYM: f64 = 1e-7;

/// A single-receiver doubly indexed family `{rho_{x,t}}`.
#[derive(Debug, Clone)]
pub struct StateFamily {
    inputs: Vec<String>,
    states: Vec<String>,
    /// `[x][t]` in alphabet order.
    ops: Vec<Vec<DensityOperator>>,
}

impl StateFamily {
    pub fn new(
        inputs: Vec<String>,
        states: Vec<String>,
        ops: Vec<Vec<DensityOperator>>,
    ) -> Result<Self> {
        if inputs.is_empty() || states.is_empty() {
            return Err(Error::DegenerateInput("empty input alphabet or state set".into()));
        }
        if ops.len() != inputs.len() || ops.iter().any(|row| row.len() != states.len()) {
            return Err(Error::LengthMismatch("state family not total on X x Theta".into()));
        }
        let dim = ops[0][0].dim();
        if ops.iter().flatten().any(|o| o.dim() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: 0 });
        }
        Ok(Self { inputs, states, ops })
    }

    /// One receiver's family of a channel.
    pub fn from_channel(ch: &CqavwcChannel, receiver: Receiver) -> Self {
        let ops = ch
            .inputs()
            .iter()
            .enumerate()
            .map(|(xi, _)| {
                (0..ch.states().len()).map(|ti| ch.state_at(receiver, xi, ti).clone()).collect()
            })
            .collect();
        Self { inputs: ch.inputs().to_vec(), states: ch.states().to_vec(), ops }
    }

    /// The per-state family `{rho_{x,t0}}_x` with a singleton state set.
    pub fn fixed_state(&self, t: &str) -> Result<StateFamily> {
        let ti = self.states.iter().position(|l| l == t).ok_or_else(|| Error::UnknownLabel {
            label: t.into(),
            place: "state set".into(),
        })?;
        Ok(StateFamily {
            inputs: self.inputs.clone(),
            states: vec![self.states[ti].clone()],
            ops: self.ops.iter().map(|row| vec![row[ti].clone()]).collect(),
        })
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn op(&self, x_idx: usize, t_idx: usize) -> &DensityOperator {
        &self.ops[x_idx][t_idx]
    }

    pub fn dim(&self) -> usize {
        self.ops[0][0].dim()
    }
}

/// The rows `U(.|x)` of a candidate symmetrizing kernel.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Symmetrizer {
    rows: Vec<(String, Distribution)>,
}

impl Symmetrizer {
    pub fn new(rows: Vec<(String, Distribution)>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[(String, Distribution)] {
        &self.rows
    }

    pub fn row_for(&self, x: &str) -> Option<&Distribution> {
        self.rows.iter().find(|(label, _)| label == x).map(|(_, d)| d)
    }
}

/// Outcome of [`check_symmetrizable`].
#[derive(Debug, Clone)]
pub struct SymmetrizabilityVerdict {
    pub symmetrizable: bool,
    /// Present exactly when symmetrizable.
    pub certificate: Option<Symmetrizer>,
    /// Max over input pairs of the trace-norm violation at the best kernel
    /// found (at the certificate, when one is returned).
    pub residual: f64,
}

/// Max over pairs `(x, x')` of
/// `|| sum_t U(t|x) rho_{x',t} - sum_t U(t|x') rho_{x,t} ||_1`.
/// A pure re-check, independent of the solver.
pub fn verify_symmetrizer(family: &StateFamily, u: &Symmetrizer) -> Result<f64> {
    let nx = family.inputs.len();
    let mut aligned = Vec::with_capacity(nx);
    for x in &family.inputs {
        let row = u.row_for(x).ok_or_else(|| Error::UnknownLabel {
            label: x.clone(),
            place: "symmetrizer rows".into(),
        })?;
        aligned.push(row.aligned_to(&family.states, "symmetrizer row")?);
    }
    let dim = family.dim();
    let mut worst = 0.0f64;
    for x in 0..nx {
        for xp in (x + 1)..nx {
            let mut m = CMatrix::zeros(dim, dim);
            for (t, (wx, wxp)) in aligned[x].iter().zip(&aligned[xp]).enumerate() {
                m += family.ops[xp][t].matrix().scale(*wx);
                m -= family.ops[x][t].matrix().scale(*wxp);
            }
            worst = worst.max(trace_norm(&m)?);
        }
    }
    Ok(worst)
}

/// Decides symmetrizability by minimizing the maximum entrywise violation of
/// the defining equalities over the product of simplices, then re-verifying
/// the optimal kernel in trace norm. Feasible means the verified residual is
/// at most `tol_sym`.
pub fn check_symmetrizable(family: &StateFamily, tol_sym: f64) -> Result<SymmetrizabilityVerdict> {
    let nx = family.inputs.len();
    let nt = family.states.len();

    // A single input makes the condition vacuous.
    if nx == 1 {
        let row = Distribution::uniform(&family.states)?;
        return Ok(SymmetrizabilityVerdict {
            symmetrizable: true,
            certificate: Some(Symmetrizer::new(vec![(family.inputs[0].clone(), row)])),
            residual: 0.0,
        });
    }

    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let u_vars: Vec<Vec<microlp::Variable>> =
        (0..nx).map(|_| (0..nt).map(|_| problem.add_var(0.0, (0.0, 1.0))).collect()).collect();
    let slack = problem.add_var(1.0, (0.0, f64::INFINITY));

    for row in &u_vars {
        let coeffs: Vec<(microlp::Variable, f64)> = row.iter().map(|&v| (v, 1.0)).collect();
        problem.add_constraint(&coeffs, ComparisonOp::Eq, 1.0);
    }

    let dim = family.dim();
    for x in 0..nx {
        for xp in (x + 1)..nx {
            // M = sum_t u[x][t] rho_{x',t} - sum_t u[x'][t] rho_{x,t} is
            // Hermitian, so the upper triangle (plus real diagonal) covers
            // every entry.
            for i in 0..dim {
                for j in i..dim {
                    for part in 0..2 {
                        if part == 1 && i == j {
                            continue;
                        }
                        let mut coeffs: Vec<(microlp::Variable, f64)> = Vec::new();
                        for (t, (&vx, &vxp)) in u_vars[x].iter().zip(&u_vars[xp]).enumerate() {
                            let plus = family.ops[xp][t].matrix()[(i, j)];
                            let minus = family.ops[x][t].matrix()[(i, j)];
                            let (cp, cm) =
                                if part == 0 { (plus.re, minus.re) } else { (plus.im, minus.im) };
                            if cp != 0.0 {
                                coeffs.push((vx, cp));
                            }
                            if cm != 0.0 {
                                coeffs.push((vxp, -cm));
                            }
                        }
                        // |expr| <= slack
                        let mut le = coeffs.clone();
                        le.push((slack, -1.0));
                        problem.add_constraint(&le, ComparisonOp::Le, 0.0);
                        let mut ge = coeffs;
                        ge.push((slack, 1.0));
                        problem.add_constraint(&ge, ComparisonOp::Ge, 0.0);
                    }
                }
            }
        }
    }

    let solution = match problem.solve() {
        Ok(SolveOutcome::Solution(s)) => s,
        Ok(SolveOutcome::Interrupted(_)) => {
            return Err(Error::Solver("interrupted before finding a solution".into()))
        }
        Err(e) => return Err(Error::Solver(e.to_string())),
    };

    let mut rows = Vec::with_capacity(nx);
    for x in 0..nx {
        let mut weights: Vec<f64> = (0..nt).map(|t| solution[u_vars[x][t]].max(0.0)).collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Solver("degenerate kernel row from solver".into()));
        }
        for w in &mut weights {
            *w /= total;
        }
        rows.push((family.inputs[x].clone(), Distribution::new(family.states.to_vec(), weights)?));
    }
    let candidate = Symmetrizer::new(rows);
    let residual = verify_symmetrizer(family, &candidate)?;
    let symmetrizable = residual <= tol_sym;
    Ok(SymmetrizabilityVerdict {
        symmetrizable,
        certificate: symmetrizable.then_some(candidate),
        residual,
    })
}

/// Both readings of the zero-capacity gate for a channel's legal family:
/// one verdict per fixed jammer state, and one for the joint family.
#[derive(Debug, Clone)]
pub struct ChannelSymmetrizability {
    pub per_state: Vec<(String, SymmetrizabilityVerdict)>,
    pub joint: SymmetrizabilityVerdict,
}

impl ChannelSymmetrizability {
    pub fn any_per_state(&self) -> bool {
        self.per_state.iter().any(|(_, v)| v.symmetrizable)
    }
}

/// Runs the per-state and joint symmetrizability checks on the legal family.
pub fn channel_symmetrizability(
    ch: &CqavwcChannel,
    tol_sym: f64,
) -> Result<ChannelSymmetrizability> {
    let family = StateFamily::from_channel(ch, Receiver::Legal);
    let mut per_state = Vec::with_capacity(ch.states().len());
    for t in ch.states() {
        let sub = family.fixed_state(t)?;
        per_state.push((t.clone(), check_symmetrizable(&sub, tol_sym)?));
    }
    let joint = check_symmetrizable(&family, tol_sym)?;
    Ok(ChannelSymmetrizability { per_state, joint })
}

/// The canonical symmetrizable family `rho_{x,t} = tau_{x xor t}` on binary
/// alphabets; `U(t|x) = delta_{t,x}` is a symmetrizer for any `tau_0, tau_1`.
pub fn xor_family(tau0: &DensityOperator, tau1: &DensityOperator) -> Result<StateFamily> {
    StateFamily::new(
        vec!["0".into(), "1".into()],
        vec!["0".into(), "1".into()],
        vec![vec![tau0.clone(), tau1.clone()], vec![tau1.clone(), tau0.clone()]],
    )
}

/// Random binary-alphabet qubit family that is symmetrizable by construction:
/// draw the kernel rows and three of the states at random, then solve the
/// defining equality for the fourth (retrying until it is positive).
pub fn random_symmetrizable_family(rng: &mut impl Rng) -> StateFamily {
    use crate::qmath::random_density;
    loop {
        let u0: f64 = rng.random_range(0.05..0.95);
        let u1: f64 = rng.random_range(0.05..0.95);
        let rho00 = random_density(rng, 2);
        let rho01 = random_density(rng, 2);
        let rho10 = random_density(rng, 2);
        // Pair condition: u0 rho_{1,0} + (1-u0) rho_{1,1}
        //               = u1 rho_{0,0} + (1-u1) rho_{0,1}.
        let rhs = rho00.matrix().scale(u1) + rho01.matrix().scale(1.0 - u1);
        let solved = (rhs - rho10.matrix().scale(u0)).scale(1.0 / (1.0 - u0));
        if let Ok(rho11) = DensityOperator::new(solved) {
            return StateFamily::new(
                vec!["0".into(), "1".into()],
                vec!["0".into(), "1".into()],
                vec![vec![rho00, rho01], vec![rho10, rho11]],
            )
            .expect("well-formed family");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{random_density, random_pure};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn delta_symmetrizer(states: &[String]) -> Symmetrizer {
        Symmetrizer::new(
            states
                .iter()
                .map(|t| (t.clone(), Distribution::point_mass(states, t).unwrap()))
                .collect(),
        )
    }

    #[test]
    fn xor_family_is_symmetrizable() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let tau0 = random_density(&mut rng, 2);
        let tau1 = random_pure(&mut rng, 2);
        let family = xor_family(&tau0, &tau1).unwrap();

        // The delta kernel is an exact certificate.
        let delta = delta_symmetrizer(family.states());
        assert_abs_diff_eq!(verify_symmetrizer(&family, &delta).unwrap(), 0.0, epsilon = 1e-12);

        let verdict = check_symmetrizable(&family, TOL_SYM).unwrap();
        assert!(verdict.symmetrizable);
        assert!(verdict.residual <= TOL_SYM);
        let cert = verdict.certificate.expect("certificate present");
        assert!(verify_symmetrizer(&family, &cert).unwrap() <= TOL_SYM);
    }

    #[test]
    fn singleton_state_set_requires_equal_states() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let rho0 = random_density(&mut rng, 2);
        let rho1 = random_density(&mut rng, 2);
        let family = StateFamily::new(
            vec!["0".into(), "1".into()],
            vec!["t".into()],
            vec![vec![rho0.clone()], vec![rho1.clone()]],
        )
        .unwrap();
        let verdict = check_symmetrizable(&family, TOL_SYM).unwrap();
        assert!(!verdict.symmetrizable);
        assert!(verdict.certificate.is_none());
        let direct = trace_norm(&(rho0.matrix() - rho1.matrix())).unwrap();
        assert_abs_diff_eq!(verdict.residual, direct, epsilon = 1e-7);

        // Uniform kernel on the singleton set reproduces the same residual.
        let uniform = Symmetrizer::new(vec![
            ("0".into(), Distribution::uniform(family.states()).unwrap()),
            ("1".into(), Distribution::uniform(family.states()).unwrap()),
        ]);
        assert_abs_diff_eq!(
            verify_symmetrizer(&family, &uniform).unwrap(),
            direct,
            epsilon = 1e-12
        );
    }

    #[test]
    fn x_constant_family_verifies_to_zero() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let a = random_density(&mut rng, 2);
        let b = random_density(&mut rng, 2);
        // rho_{x,t} constant in x: any shared kernel row gives zero residual.
        let family = StateFamily::new(
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            vec![vec![a.clone(), b.clone()], vec![a.clone(), b.clone()]],
        )
        .unwrap();
        let uniform = Symmetrizer::new(vec![
            ("0".into(), Distribution::uniform(family.states()).unwrap()),
            ("1".into(), Distribution::uniform(family.states()).unwrap()),
        ]);
        assert_abs_diff_eq!(verify_symmetrizer(&family, &uniform).unwrap(), 0.0, epsilon = 1e-12);
        assert!(check_symmetrizable(&family, TOL_SYM).unwrap().symmetrizable);
    }

    #[test]
    fn t_independent_distinct_family_is_not_symmetrizable() {
        let zero = DensityOperator::basis_state(2, 0);
        let one = DensityOperator::basis_state(2, 1);
        let family = StateFamily::new(
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            vec![vec![zero.clone(), zero.clone()], vec![one.clone(), one.clone()]],
        )
        .unwrap();
        let verdict = check_symmetrizable(&family, TOL_SYM).unwrap();
        assert!(!verdict.symmetrizable);
        // Every kernel leaves || rho_1 - rho_0 ||_1 = 2.
        assert_abs_diff_eq!(verdict.residual, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn single_input_is_vacuously_symmetrizable() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let family = StateFamily::new(
            vec!["only".into()],
            vec!["0".into(), "1".into()],
            vec![vec![random_density(&mut rng, 2), random_density(&mut rng, 2)]],
        )
        .unwrap();
        let verdict = check_symmetrizable(&family, TOL_SYM).unwrap();
        assert!(verdict.symmetrizable);
        assert_eq!(verdict.residual, 0.0);
    }

    #[test]
    fn constructed_feasible_families_are_detected() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..25 {
            let family = random_symmetrizable_family(&mut rng);
            let verdict = check_symmetrizable(&family, TOL_SYM).unwrap();
            assert!(verdict.symmetrizable, "residual {}", verdict.residual);
            let cert = verdict.certificate.unwrap();
            assert!(verify_symmetrizer(&family, &cert).unwrap() <= TOL_SYM);
        }
    }

    #[test]
    fn verdict_is_invariant_under_relabeling() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        for trial in 0..10 {
            let family = if trial % 2 == 0 {
                random_symmetrizable_family(&mut rng)
            } else {
                StateFamily::new(
                    vec!["0".into(), "1".into()],
                    vec!["0".into(), "1".into()],
                    vec![
                        vec![random_density(&mut rng, 2), random_density(&mut rng, 2)],
                        vec![random_density(&mut rng, 2), random_density(&mut rng, 2)],
                    ],
                )
                .unwrap()
            };
            let base = check_symmetrizable(&family, TOL_SYM).unwrap();

            // Swap both input labels and state labels.
            let swapped = StateFamily::new(
                vec![family.inputs[1].clone() + "_r", family.inputs[0].clone() + "_r"],
                vec![family.states[1].clone() + "_r", family.states[0].clone() + "_r"],
                vec![
                    vec![family.ops[1][1].clone(), family.ops[1][0].clone()],
                    vec![family.ops[0][1].clone(), family.ops[0][0].clone()],
                ],
            )
            .unwrap();
            let permuted = check_symmetrizable(&swapped, TOL_SYM).unwrap();
            assert_eq!(base.symmetrizable, permuted.symmetrizable);
            assert_abs_diff_eq!(base.residual, permuted.residual, epsilon = 1e-6);
        }
    }

    /// Dense grid search over the two free kernel parameters for binary
    /// qubit families; used as the independent oracle.
    fn grid_oracle(family: &StateFamily, step: f64) -> f64 {
        let mut best = f64::INFINITY;
        let cells = (1.0 / step).round() as usize;
        for i in 0..=cells {
            for j in 0..=cells {
                let u0 = i as f64 * step;
                let u1 = j as f64 * step;
                let m = family.ops[1][0].matrix().scale(u0)
                    + family.ops[1][1].matrix().scale(1.0 - u0)
                    - family.ops[0][0].matrix().scale(u1)
                    - family.ops[0][1].matrix().scale(1.0 - u1);
                best = best.min(trace_norm(&m).unwrap());
            }
        }
        best
    }

    #[test]
    fn depolarized_xor_family_matches_grid_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let tau0 = random_density(&mut rng, 2);
        let tau1 = random_density(&mut rng, 2);
        let phi0 = random_pure(&mut rng, 2);
        let phi1 = random_pure(&mut rng, 2);
        // rho_{x,t} = 0.8 tau_{x xor t} + 0.2 phi_x: the x-dependent floor
        // breaks the xor symmetry.
        let mix = |tau: &DensityOperator, phi: &DensityOperator| {
            DensityOperator::mixture(&[(0.8, tau), (0.2, phi)]).unwrap()
        };
        let family = StateFamily::new(
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            vec![
                vec![mix(&tau0, &phi0), mix(&tau1, &phi0)],
                vec![mix(&tau1, &phi1), mix(&tau0, &phi1)],
            ],
        )
        .unwrap();
        let verdict = check_symmetrizable(&family, TOL_SYM).unwrap();
        let oracle_min = grid_oracle(&family, 0.01);
        // Lipschitz slack: half a grid step in each parameter.
        let lipschitz =
            trace_norm(&(family.ops[1][0].matrix() - family.ops[1][1].matrix())).unwrap()
                + trace_norm(&(family.ops[0][0].matrix() - family.ops[0][1].matrix())).unwrap();
        let oracle_feasible = oracle_min <= 0.005 * lipschitz + TOL_SYM;
        assert_eq!(verdict.symmetrizable, oracle_feasible);
        assert!(!verdict.symmetrizable, "x-dependent mixing should break symmetrizability");
    }

    #[test]
    fn random_families_agree_with_grid_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let mut agreements = 0;
        let trials = 40;
        for trial in 0..trials {
            let family = if trial % 2 == 0 {
                random_symmetrizable_family(&mut rng)
            } else {
                StateFamily::new(
                    vec!["0".into(), "1".into()],
                    vec!["0".into(), "1".into()],
                    vec![
                        vec![random_density(&mut rng, 2), random_density(&mut rng, 2)],
                        vec![random_density(&mut rng, 2), random_density(&mut rng, 2)],
                    ],
                )
                .unwrap()
            };
            let verdict = check_symmetrizable(&family, TOL_SYM).unwrap();
            let oracle_min = grid_oracle(&family, 0.01);
            let lipschitz =
                trace_norm(&(family.ops[1][0].matrix() - family.ops[1][1].matrix())).unwrap()
                    + trace_norm(&(family.ops[0][0].matrix() - family.ops[0][1].matrix())).unwrap();
            let oracle_feasible = oracle_min <= 0.005 * lipschitz + TOL_SYM;
            if verdict.symmetrizable == oracle_feasible {
                agreements += 1;
            }
        }
        assert!(agreements >= trials - 1, "only {agreements}/{trials} agreed");
    }

    #[test]
    fn channel_level_checks_cover_both_readings() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let tau0 = random_density(&mut rng, 2);
        let tau1 = random_density(&mut rng, 2);
        let mixed = DensityOperator::maximally_mixed(2);
        let ch = CqavwcChannel::from_states(
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            vec![vec![tau0.clone(), tau1.clone()], vec![tau1.clone(), tau0.clone()]],
            vec![vec![mixed.clone(), mixed.clone()], vec![mixed.clone(), mixed.clone()]],
        )
        .unwrap();
        let report = channel_symmetrizability(&ch, TOL_SYM).unwrap();
        // The xor family is jointly symmetrizable but each fixed-t slice holds
        // two distinct states, so no per-state check fires.
        assert!(report.joint.symmetrizable);
        assert!(!report.any_per_state());
    }
}
