//! Fourier-space symbols of the JST spatial operator: central convective
//! part, scalar-dissipation part with its enthalpy weighting matrix, and the
//! pressure-sensor and dissipation-coefficient symbols.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::euler::{EulerState, GAMMA};
use crate::linalg::{complexify, CMat4, RMat4};

/// Phase-angle pair on the discrete wavenumber lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePair {
    pub theta_x: f64,
    pub theta_y: f64,
}

impl PhasePair {
    pub fn new(theta_x: f64, theta_y: f64) -> Self {
        Self { theta_x, theta_y }
    }

    /// Phases Theta = 2 pi k / n for lattice wavenumbers.
    pub fn from_wavenumbers(kx: i64, ky: i64, nx: usize, ny: usize) -> Self {
        Self {
            theta_x: 2.0 * std::f64::consts::PI * kx as f64 / nx as f64,
            theta_y: 2.0 * std::f64::consts::PI * ky as f64 / ny as f64,
        }
    }
}

/// Cartesian analysis mesh. The unit square is cut into n_x * n_y cells, so
/// high aspect ratios mean thin cells in y (the boundary-layer direction)
/// while the x width stays fixed.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub dx: f64,
    pub dy: f64,
    pub n_x: usize,
    pub n_y: usize,
}

impl GridSpec {
    pub fn new(dx: f64, dy: f64, n_x: usize, n_y: usize) -> Self {
        assert!(dx > 0.0 && dy > 0.0);
        assert!(n_x >= 2 && n_x % 2 == 0, "n_x must be even and >= 2");
        assert!(n_y >= 2 && n_y % 2 == 0, "n_y must be even and >= 2");
        Self { dx, dy, n_x, n_y }
    }

    /// The 8 x (8 AR) analysis grid on the unit square: dx = 1/8 and
    /// dy = dx / AR.
    pub fn analysis(ar: f64) -> Self {
        assert!(ar >= 1.0);
        let n_x = 8usize;
        let n_y = (8.0 * ar).round() as usize;
        Self::new(1.0 / n_x as f64, 1.0 / n_y as f64, n_x, n_y)
    }

    /// Grid with the same spacing convention but explicit cell counts, used
    /// by the nonlinear solver (dy = dx / AR).
    pub fn stretched(n_x: usize, n_y: usize, ar: f64) -> Self {
        let dx = 1.0 / n_x as f64;
        Self::new(dx, dx / ar, n_x, n_y)
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.dx / self.dy
    }

    pub fn volume(&self) -> f64 {
        self.dx * self.dy
    }
}

/// Steady or dual-time (BDF-2 shifted) residual operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Steady,
    Unsteady { dt: f64 },
}

impl Mode {
    /// 3/(2 dt) for the unsteady operator, zero otherwise.
    pub fn time_shift(&self) -> f64 {
        match self {
            Mode::Steady => 0.0,
            Mode::Unsteady { dt } => 1.5 / dt,
        }
    }
}

/// Fourier transform of the shift operator: E^power -> e^{i power theta}.
pub fn shift_symbol(theta: f64, power: i32) -> Complex64 {
    Complex64::from_polar(1.0, power as f64 * theta)
}

/// Symbol of the central convective operator,
/// (i sin(tx)/dx) A + (i sin(ty)/dy) B, plus 3/(2 dt) I in unsteady mode.
pub fn convective_symbol(
    state: &EulerState,
    grid: &GridSpec,
    phase: PhasePair,
    mode: Mode,
) -> CMat4 {
    let a = crate::euler::flux_jacobian(state, [1.0, 0.0]);
    let b = crate::euler::flux_jacobian(state, [0.0, 1.0]);
    convective_symbol_from_jacobians(&a, &b, grid, phase, mode)
}

pub fn convective_symbol_from_jacobians(
    a: &RMat4,
    b: &RMat4,
    grid: &GridSpec,
    phase: PhasePair,
    mode: Mode,
) -> CMat4 {
    let cx = Complex64::new(0.0, phase.theta_x.sin() / grid.dx);
    let cy = Complex64::new(0.0, phase.theta_y.sin() / grid.dy);
    let mut h = complexify(a) * cx + complexify(b) * cy;
    let shift = mode.time_shift();
    if shift != 0.0 {
        for i in 0..4 {
            h[(i, i)] += Complex64::new(shift, 0.0);
        }
    }
    h
}

/// Which denominator the pressure-sensor symbol uses. The printed form of
/// the sum stencil carries a 2|v|^2 coefficient that is inconsistent with
/// the pressure identity (1/2 |v|^2); both are kept selectable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SensorDenominator {
    #[default]
    Printed,
    Consistent,
}

pub const SENSOR_REGULARIZER: f64 = 0.001;

/// Unclamped modulus of the pressure-sensor ratio: second-difference over
/// sum stencils of the pressure combination at the frozen state.
pub fn sensor_ratio(
    state: &EulerState,
    theta: f64,
    denom: SensorDenominator,
    regularizer: f64,
) -> f64 {
    let d2 = 2.0 * theta.cos() - 2.0;
    let s2 = 2.0 * theta.cos() + 2.0;
    let q2 = state.q2();
    let num = (GAMMA - 1.0) * d2 * (state.rho_e - 0.5 * q2 * state.rho);
    let den_coeff = match denom {
        SensorDenominator::Printed => 2.0,
        SensorDenominator::Consistent => 0.5,
    };
    let den = (GAMMA - 1.0) * s2 * (state.rho_e - den_coeff * q2 * state.rho) + regularizer;
    (num / den).abs()
}

/// Pressure-sensor symbol: the ratio modulus clamped to 0.25.
pub fn sensor_symbol(
    state: &EulerState,
    theta: f64,
    denom: SensorDenominator,
    regularizer: f64,
) -> f64 {
    sensor_ratio(state, theta, denom, regularizer).min(0.25)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    X,
    Y,
}

/// Per-direction epsilons, or one shared pair taken from the x-direction
/// quantities for both stencil directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    #[default]
    PerDirection,
    Shared,
}

/// Spectral radius estimate r per direction, optionally with the
/// multidimensional correction r~_x = r_x (1 + (r_y/r_x)^{2/3}).
pub fn spectral_radii(state: &EulerState, corrected: bool) -> (f64, f64) {
    let rx = state.v1.abs() + state.a;
    let ry = state.v2.abs() + state.a;
    if corrected {
        (
            rx * (1.0 + (ry / rx).powf(2.0 / 3.0)),
            ry * (1.0 + (rx / ry).powf(2.0 / 3.0)),
        )
    } else {
        (rx, ry)
    }
}

/// (eps2, eps4) for one stencil direction: eps2 = r s(theta) and
/// eps4 = max(0, r/32 - 2 eps2).
pub fn dissipation_coefficients(
    state: &EulerState,
    theta: f64,
    direction: Direction,
    denom: SensorDenominator,
    spectral_correction: bool,
) -> (f64, f64) {
    let (rx, ry) = spectral_radii(state, spectral_correction);
    let r = match direction {
        Direction::X => rx,
        Direction::Y => ry,
    };
    let s = sensor_symbol(state, theta, denom, SENSOR_REGULARIZER);
    let eps2 = r * s;
    let eps4 = (r / 32.0 - 2.0 * eps2).max(0.0);
    (eps2, eps4)
}

/// How the dissipation coefficients entering the viscous symbol are chosen:
/// from the sensor symbol, or frozen constants (the latter is what a true
/// linearization around a smooth state produces, and what the solver
/// validation compares against).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DissipationModel {
    Sensor {
        denom: SensorDenominator,
        coupling: Coupling,
        spectral_correction: bool,
    },
    Fixed {
        eps2_x: f64,
        eps4_x: f64,
        eps2_y: f64,
        eps4_y: f64,
    },
}

/// Weighting matrix applied to the dissipated differences. `Paper` freezes
/// the velocity inside the pressure when differencing the enthalpy density;
/// `ExactJacobian` is the true derivative of (rho, m1, m2, rho H).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyWeighting {
    #[default]
    Paper,
    ExactJacobian,
}

pub fn dissipation_matrix(state: &EulerState, weighting: EnergyWeighting) -> RMat4 {
    let mut m = RMat4::identity();
    let g1 = GAMMA - 1.0;
    match weighting {
        EnergyWeighting::Paper => {
            m[(3, 0)] = -g1 * 0.5 * state.q2();
            m[(3, 3)] = GAMMA;
        }
        EnergyWeighting::ExactJacobian => {
            m[(3, 0)] = g1 * 0.5 * state.q2();
            m[(3, 1)] = -g1 * state.v1;
            m[(3, 2)] = -g1 * state.v2;
            m[(3, 3)] = GAMMA;
        }
    }
    m
}

/// Even real symbol of the second difference, -E^+ + 2 - E^-.
pub fn second_difference_symbol(theta: f64) -> f64 {
    2.0 - 2.0 * theta.cos()
}

/// Even real symbol of the fourth difference, E^{+2} - 4E^+ + 6 - 4E^- + E^{-2}.
pub fn fourth_difference_symbol(theta: f64) -> f64 {
    6.0 - 8.0 * theta.cos() + 2.0 * (2.0 * theta).cos()
}

/// Scalar part of the dissipation symbol (the factor multiplying M).
pub fn viscous_scalar_symbol(
    state: &EulerState,
    grid: &GridSpec,
    phase: PhasePair,
    model: DissipationModel,
) -> f64 {
    let (e2x, e4x, e2y, e4y) = match model {
        DissipationModel::Sensor { denom, coupling, spectral_correction } => {
            let (e2x, e4x) = dissipation_coefficients(
                state,
                phase.theta_x,
                Direction::X,
                denom,
                spectral_correction,
            );
            match coupling {
                Coupling::PerDirection => {
                    let (e2y, e4y) = dissipation_coefficients(
                        state,
                        phase.theta_y,
                        Direction::Y,
                        denom,
                        spectral_correction,
                    );
                    (e2x, e4x, e2y, e4y)
                }
                Coupling::Shared => (e2x, e4x, e2x, e4x),
            }
        }
        DissipationModel::Fixed { eps2_x, eps4_x, eps2_y, eps4_y } => {
            (eps2_x, eps4_x, eps2_y, eps4_y)
        }
    };
    (e2x * second_difference_symbol(phase.theta_x)
        + e4x * fourth_difference_symbol(phase.theta_x))
        / grid.dx
        + (e2y * second_difference_symbol(phase.theta_y)
            + e4y * fourth_difference_symbol(phase.theta_y))
            / grid.dy
}

/// Symbol of the artificial-dissipation operator: the scalar difference
/// symbol times the weighting matrix M.
pub fn viscous_symbol(
    state: &EulerState,
    grid: &GridSpec,
    phase: PhasePair,
    model: DissipationModel,
    weighting: EnergyWeighting,
) -> CMat4 {
    let sigma = viscous_scalar_symbol(state, grid, phase, model);
    complexify(&dissipation_matrix(state, weighting)) * Complex64::new(sigma, 0.0)
}
