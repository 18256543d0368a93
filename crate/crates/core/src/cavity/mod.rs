//! Physical model: truncated cavity mode, qubit and qutrit ancillae, their
//! Hamiltonians, target-state factories and the collision trajectory.

mod kernel;
mod states;

use serde::{Deserialize, Serialize};

pub use kernel::CollisionMap;
pub use states::{coherent_state, fock_state, squeezed_vacuum, thermal_state, LEAKAGE_THRESHOLD};

use crate::error::{Error, Result};
use crate::opalg::{partial_trace_ancilla, pauli, propagator, tensor, Complex64, ComplexMatrix, DensityMatrix};

/// Truncated Fock space of the cavity mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    n_levels: usize,
}

impl FockSpace {
    pub fn new(n_levels: usize) -> Result<Self> {
        if n_levels < 2 {
            return Err(Error::Config(format!("n_levels must be at least 2, got {n_levels}")));
        }
        Ok(Self { n_levels })
    }

    #[inline]
    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    /// `a` with `a[m, m+1] = sqrt(m+1)`.
    pub fn annihilation(&self) -> ComplexMatrix {
        let n = self.n_levels;
        let mut a = ComplexMatrix::zeros(n, n);
        for m in 0..n - 1 {
            a[(m, m + 1)] = Complex64::new(((m + 1) as f64).sqrt(), 0.0);
        }
        a
    }

    pub fn creation(&self) -> ComplexMatrix {
        self.annihilation().adjoint()
    }

    pub fn number(&self) -> ComplexMatrix {
        ComplexMatrix::from_diag(&(0..self.n_levels).map(|k| k as f64).collect::<Vec<_>>())
    }

    /// `H_S = omega_c (a†a + 1/2)`.
    pub fn system_hamiltonian(&self, omega_c: f64) -> ComplexMatrix {
        ComplexMatrix::from_diag(&(0..self.n_levels).map(|k| omega_c * (k as f64 + 0.5)).collect::<Vec<_>>())
    }
}

/// Ancilla species and its bare frequencies.
///
/// Qubit basis: index 0 is the excited state (sigma_z = +1), index 1 the
/// ground state. Qutrit basis: |0> ground, |1>, |2> excited.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AncillaKind {
    DiagonalQubit { omega_a: f64 },
    GenericQubit { omega_a: f64 },
    Qutrit { omega_1: f64, omega_2: f64 },
}

impl AncillaKind {
    pub fn dim(&self) -> usize {
        match self {
            Self::DiagonalQubit { .. } | Self::GenericQubit { .. } => 2,
            Self::Qutrit { .. } => 3,
        }
    }

    pub fn is_qubit(&self) -> bool {
        self.dim() == 2
    }

    /// Bare ancilla Hamiltonian.
    pub fn hamiltonian(&self) -> ComplexMatrix {
        match *self {
            Self::DiagonalQubit { omega_a } | Self::GenericQubit { omega_a } => {
                ComplexMatrix::from_diag(&[0.5 * omega_a, -0.5 * omega_a])
            }
            Self::Qutrit { omega_1, omega_2 } => ComplexMatrix::from_diag(&[0.0, omega_1, omega_2]),
        }
    }

    pub fn thermal(&self, beta: f64) -> Result<DensityMatrix> {
        thermal_state(&self.hamiltonian(), beta)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::DiagonalQubit { omega_a } | Self::GenericQubit { omega_a } => finite("omega_a", omega_a),
            Self::Qutrit { omega_1, omega_2 } => {
                finite("omega_1", omega_1)?;
                finite("omega_2", omega_2)?;
                if omega_1 > omega_2 {
                    return Err(Error::Config(format!("qutrit needs omega_1 <= omega_2, got {omega_1} > {omega_2}")));
                }
                Ok(())
            }
        }
    }
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name, value })
    }
}

/// System-ancilla coupling constants. Qubits use `g_l` and `g_nl`; qutrits use
/// `g_l1`, `g_l2` and `g_nl`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub g_l: f64,
    pub g_nl: f64,
    pub g_l1: f64,
    pub g_l2: f64,
}

impl Couplings {
    pub fn linear(g_l: f64) -> Self {
        Self { g_l, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        finite("g_l", self.g_l)?;
        finite("g_nl", self.g_nl)?;
        finite("g_l1", self.g_l1)?;
        finite("g_l2", self.g_l2)
    }
}

/// Everything that fixes the joint Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Physics {
    pub space: FockSpace,
    pub omega_c: f64,
    pub ancilla: AncillaKind,
    pub couplings: Couplings,
}

impl Physics {
    /// Resonant qubit with Jaynes-Cummings coupling `g`, omega_c = omega_a = 1.
    pub fn resonant_qubit(space: FockSpace, g: f64) -> Self {
        Self {
            space,
            omega_c: 1.0,
            ancilla: AncillaKind::GenericQubit { omega_a: 1.0 },
            couplings: Couplings::linear(g),
        }
    }

    pub fn dim_s(&self) -> usize {
        self.space.n_levels()
    }

    pub fn dim_a(&self) -> usize {
        self.ancilla.dim()
    }

    /// `H = H_S ⊗ I + I ⊗ H_A + H_l + H_nl`, system slow, ancilla fast.
    pub fn joint_hamiltonian(&self) -> Result<ComplexMatrix> {
        finite("omega_c", self.omega_c)?;
        self.ancilla.validate()?;
        self.couplings.validate()?;
        let space = self.space;
        let da = self.dim_a();
        let a = space.annihilation();
        let a2 = &a * &a;
        let mut h = &tensor(&space.system_hamiltonian(self.omega_c), &ComplexMatrix::identity(da))
            + &tensor(&ComplexMatrix::identity(space.n_levels()), &self.ancilla.hamiltonian());
        let c = self.couplings;
        let mut add_with_hc = |op: ComplexMatrix, g: f64| {
            if g != 0.0 {
                let term = op.scale_real(g);
                h = &(&h + &term) + &term.adjoint();
            }
        };
        if self.ancilla.is_qubit() {
            add_with_hc(tensor(&a, &pauli::sigma_plus()), c.g_l);
            add_with_hc(tensor(&a2, &pauli::sigma_plus()), c.g_nl);
        } else {
            add_with_hc(tensor(&a, &transition(3, 0, 1)), c.g_l1);
            add_with_hc(tensor(&a, &transition(3, 1, 2)), c.g_l2);
            add_with_hc(tensor(&a2, &transition(3, 0, 2)), c.g_nl);
        }
        Ok(h)
    }

    /// Joint propagator for one collision of duration `t_c`.
    pub fn propagator(&self, t_c: f64) -> Result<ComplexMatrix> {
        propagator(&self.joint_hamiltonian()?, t_c)
    }

    pub fn collision_map(&self, t_c: f64) -> Result<CollisionMap> {
        CollisionMap::new(&self.propagator(t_c)?, self.dim_s(), self.dim_a())
    }
}

/// `|i><j|` in dimension `dim`.
pub fn transition(dim: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// A fully specified collision sequence.
#[derive(Clone, Debug)]
pub struct CollisionScenario {
    pub physics: Physics,
    pub t_c: f64,
    pub initial_state: DensityMatrix,
    pub ancilla_states: Vec<DensityMatrix>,
}

impl CollisionScenario {
    pub fn n(&self) -> usize {
        self.ancilla_states.len()
    }

    pub fn total_time(&self) -> f64 {
        self.n() as f64 * self.t_c
    }

    pub fn validate(&self) -> Result<()> {
        if self.ancilla_states.is_empty() {
            return Err(Error::Config("a scenario needs at least one collision".into()));
        }
        if !(self.t_c > 0.0) || !self.t_c.is_finite() {
            return Err(Error::Config(format!("collision time must be positive, got {}", self.t_c)));
        }
        if self.initial_state.dim() != self.physics.dim_s() {
            return Err(Error::Dimension(format!(
                "initial state has dimension {}, cavity has {}",
                self.initial_state.dim(),
                self.physics.dim_s()
            )));
        }
        if let Some(bad) = self.ancilla_states.iter().position(|r| r.dim() != self.physics.dim_a()) {
            return Err(Error::Dimension(format!("ancilla state {bad} has the wrong dimension")));
        }
        Ok(())
    }
}

/// One collision by direct construction: `tr_A[u (rho_s ⊗ rho_a) u†]`.
///
/// Reference path; trajectories use [`CollisionMap`].
pub fn collide(rho_s: &DensityMatrix, rho_a: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    let (ds, da) = (rho_s.dim(), rho_a.dim());
    if u.rows() != ds * da || u.cols() != ds * da {
        return Err(Error::Dimension(format!("propagator is {}x{}, states are {ds} and {da}", u.rows(), u.cols())));
    }
    let joint = DensityMatrix::new_unchecked(tensor(rho_s.matrix(), rho_a.matrix()));
    partial_trace_ancilla(&joint.conjugate(u)?, ds, da)
}

/// Full trajectory `[rho_0, rho_1, ..., rho_n]`.
pub fn run_trajectory(scenario: &CollisionScenario) -> Result<Vec<DensityMatrix>> {
    scenario.validate()?;
    let map = scenario.physics.collision_map(scenario.t_c)?;
    trajectory_with_map(&map, &scenario.initial_state, &scenario.ancilla_states)
}

pub fn trajectory_with_map(
    map: &CollisionMap,
    initial: &DensityMatrix,
    ancillae: &[DensityMatrix],
) -> Result<Vec<DensityMatrix>> {
    let mut out = Vec::with_capacity(ancillae.len() + 1);
    out.push(initial.clone());
    for rho_a in ancillae {
        let next = map.apply(out.last().expect("nonempty"), rho_a)?;
        out.push(next);
    }
    Ok(out)
}

/// Final state only.
pub fn final_state_with_map(
    map: &CollisionMap,
    initial: &DensityMatrix,
    ancillae: &[DensityMatrix],
) -> Result<DensityMatrix> {
    let mut rho = initial.clone();
    for rho_a in ancillae {
        rho = map.apply(&rho, rho_a)?;
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{trace_distance, ZERO};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    #[test]
    fn fock_space_bounds() {
        assert!(FockSpace::new(1).is_err());
        assert!(FockSpace::new(2).is_ok());
    }

    #[test]
    fn annihilation_examples() {
        let a = space(2).annihilation();
        assert_eq!(a, ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]));
        let a = space(5).annihilation();
        let mut vac = vec![ZERO; 5];
        vac[0] = Complex64::new(1.0, 0.0);
        assert!(a.mul_vec(&vac).unwrap().iter().all(|z| *z == ZERO));
    }

    #[test]
    fn truncated_commutator() {
        let s = space(6);
        let comm = s.annihilation().commutator(&s.creation()).unwrap();
        let mut expected = ComplexMatrix::identity(6);
        expected[(5, 5)] = Complex64::new(1.0 - 6.0, 0.0);
        assert!(comm.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn system_hamiltonian_examples() {
        assert_eq!(space(2).system_hamiltonian(1.0), ComplexMatrix::from_diag(&[0.5, 1.5]));
        assert_abs_diff_eq!(space(20).system_hamiltonian(1.0).trace().re, 200.0, epsilon = 1e-12);
        let s = space(7);
        assert_eq!(s.system_hamiltonian(1.3).commutator(&s.number()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn decoupled_hamiltonian_spectrum() {
        let p = Physics {
            space: space(3),
            omega_c: 1.0,
            ancilla: AncillaKind::GenericQubit { omega_a: 0.7 },
            couplings: Couplings::default(),
        };
        let h = p.joint_hamiltonian().unwrap();
        let mut expected: Vec<f64> = (0..3).flat_map(|k| [k as f64 + 0.5 + 0.35, k as f64 + 0.5 - 0.35]).collect();
        expected.sort_by(f64::total_cmp);
        let got = crate::opalg::hermitian_eigenvalues(&h).unwrap();
        for (a, b) in got.iter().zip(&expected) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn jaynes_cummings_matrix_element() {
        let h = Physics::resonant_qubit(space(2), 1.0).joint_hamiltonian().unwrap();
        // <0,e| H |1,g>: index 0*2+0 and 1*2+1
        assert_abs_diff_eq!(h[(0, 3)].re, 1.0);
        assert_abs_diff_eq!(h[(3, 0)].re, 1.0);
    }

    #[test]
    fn qutrit_hamiltonian_elements() {
        let p = Physics {
            space: space(4),
            omega_c: 1.0,
            ancilla: AncillaKind::Qutrit { omega_1: 0.8, omega_2: 2.1 },
            couplings: Couplings { g_l: 0.0, g_nl: 0.3, g_l1: 0.5, g_l2: -0.2 },
        };
        let h = p.joint_hamiltonian().unwrap();
        assert!(h.hermiticity_error() < 1e-15);
        let idx = |n: usize, s: usize| n * 3 + s;
        // g_l1 a |0><1| : <0,0| H |1,1> = g_l1
        assert_abs_diff_eq!(h[(idx(0, 0), idx(1, 1))].re, 0.5);
        // g_l2 a |1><2| : <1,1| H |2,2> = g_l2 sqrt2
        assert_abs_diff_eq!(h[(idx(1, 1), idx(2, 2))].re, -0.2 * 2f64.sqrt(), epsilon = 1e-15);
        // g_nl a^2 |0><2| : <0,0| H |2,2> = g_nl sqrt2
        assert_abs_diff_eq!(h[(idx(0, 0), idx(2, 2))].re, 0.3 * 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(h[(idx(2, 1), idx(2, 1))].re, 2.5 + 0.8);
    }

    #[test]
    fn non_finite_constants_rejected() {
        let mut p = Physics::resonant_qubit(space(3), f64::NAN);
        assert!(p.joint_hamiltonian().is_err());
        p.couplings.g_l = 1.0;
        p.ancilla = AncillaKind::Qutrit { omega_1: 2.0, omega_2: 1.0 };
        assert!(p.joint_hamiltonian().is_err());
    }

    #[test]
    fn resonant_rabi_transfer() {
        let p = Physics::resonant_qubit(space(6), 1.0);
        let u = p.propagator(PI / 2.0).unwrap();
        let vac = fock_state(&p.space, 0).unwrap();
        let excited = DensityMatrix::basis(2, 0).unwrap();
        let out = collide(&vac, &excited, &u).unwrap();
        let one = fock_state(&p.space, 1).unwrap();
        assert!(out.matrix().max_abs_diff(one.matrix()) < 1e-9);
        let fast = p.collision_map(PI / 2.0).unwrap().apply(&vac, &excited).unwrap();
        assert!(fast.matrix().max_abs_diff(one.matrix()) < 1e-9);
    }

    #[test]
    fn no_interaction_leaves_cavity_alone() {
        let mut p = Physics::resonant_qubit(space(5), 0.0);
        p.ancilla = AncillaKind::GenericQubit { omega_a: 1.7 };
        let rho = coherent_state(&space(5), Complex64::new(0.1, 0.05)).unwrap();
        let anc = DensityMatrix::pure(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        let out = collide(&rho, &anc, &p.propagator(0.9).unwrap()).unwrap();
        // free evolution of H_S only rotates phases; compare with U_S rho U_S†
        let us = propagator(&space(5).system_hamiltonian(1.0), 0.9).unwrap();
        assert!(out.matrix().max_abs_diff(rho.conjugate(&us).unwrap().matrix()) < 1e-10);
        let thermal = thermal_state(&space(5).system_hamiltonian(1.0), 1.0).unwrap();
        let out = collide(&thermal, &anc, &p.propagator(0.9).unwrap()).unwrap();
        assert!(out.matrix().max_abs_diff(thermal.matrix()) < 1e-10);
    }

    #[test]
    fn kernel_matches_reference_collision() {
        let p = Physics {
            space: space(9),
            omega_c: 1.0,
            ancilla: AncillaKind::GenericQubit { omega_a: 1.4 },
            couplings: Couplings { g_l: 0.6, g_nl: -0.3, ..Default::default() },
        };
        let rho = coherent_state(&space(9), Complex64::new(0.3, -0.2)).unwrap();
        let anc = DensityMatrix::new(ComplexMatrix::from_rows(&[
            &[Complex64::new(0.7, 0.0), Complex64::new(0.1, 0.2)],
            &[Complex64::new(0.1, -0.2), Complex64::new(0.3, 0.0)],
        ]))
        .unwrap();
        let u = p.propagator(0.37).unwrap();
        let slow = collide(&rho, &anc, &u).unwrap();
        let fast = CollisionMap::new(&u, 9, 2).unwrap().apply(&rho, &anc).unwrap();
        assert!(slow.matrix().max_abs_diff(fast.matrix()) < 1e-13);
    }

    #[test]
    fn jc_propagator_is_sparse() {
        let map = Physics::resonant_qubit(space(20), 1.0).collision_map(0.5).unwrap();
        assert!(map.density() < 0.1, "density {}", map.density());
    }

    #[test]
    fn trajectory_basics() {
        let p = Physics::resonant_qubit(space(8), 1.0);
        let vac = fock_state(&p.space, 0).unwrap();
        let anc = p.ancilla.thermal(-1.0).unwrap();
        let scenario =
            CollisionScenario { physics: p, t_c: 0.3, initial_state: vac.clone(), ancilla_states: vec![anc.clone()] };
        let traj = run_trajectory(&scenario).unwrap();
        assert_eq!(traj.len(), 2);
        let single = collide(&vac, &anc, &p.propagator(0.3).unwrap()).unwrap();
        assert!(traj[1].matrix().max_abs_diff(single.matrix()) < 1e-13);

        let frozen = CollisionScenario {
            physics: Physics::resonant_qubit(space(8), 0.0),
            t_c: 0.3,
            initial_state: vac.clone(),
            ancilla_states: vec![anc; 5],
        };
        for rho in run_trajectory(&frozen).unwrap() {
            assert!(trace_distance(&rho, &vac).unwrap() < 1e-12);
        }
    }

    #[test]
    fn scenario_validation() {
        let p = Physics::resonant_qubit(space(4), 1.0);
        let vac = fock_state(&p.space, 0).unwrap();
        let mut s = CollisionScenario { physics: p, t_c: 0.5, initial_state: vac, ancilla_states: vec![] };
        assert!(s.validate().is_err());
        s.ancilla_states.push(DensityMatrix::maximally_mixed(3));
        assert!(s.validate().is_err());
        s.ancilla_states[0] = DensityMatrix::maximally_mixed(2);
        s.t_c = 0.0;
        assert!(s.validate().is_err());
        s.t_c = 0.5;
        assert!(s.validate().is_ok());
        assert_abs_diff_eq!(s.total_time(), 0.5);
    }
}
