//! Frozen-state 2D Euler flux Jacobians, eigendecomposition, eigenvalue
//! cutoff and flux-vector splitting. Shared by the Fourier analysis and the
//! physical-space preconditioner.

use crate::error::{Error, Result};
use crate::linalg::{Lu4, RMat4, RVec4};

pub const GAMMA: f64 = 1.4;

/// Conservative 4-vector plus derived primitive quantities at a frozen
/// linearization point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerState {
    pub rho: f64,
    pub m1: f64,
    pub m2: f64,
    pub rho_e: f64,
    // derived
    pub v1: f64,
    pub v2: f64,
    pub p: f64,
    pub a: f64,
    pub h: f64,
}

impl EulerState {
    /// Builds the state from conservative variables and populates the
    /// derived quantities.
    pub fn from_conservative(u: [f64; 4]) -> Result<Self> {
        let [rho, m1, m2, rho_e] = u;
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::NonPhysicalState(format!("rho = {rho}")));
        }
        let v1 = m1 / rho;
        let v2 = m2 / rho;
        let p = (GAMMA - 1.0) * (rho_e - 0.5 * rho * (v1 * v1 + v2 * v2));
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::NonPhysicalState(format!("p = {p}")));
        }
        let a = (GAMMA * p / rho).sqrt();
        let h = (rho_e + p) / rho;
        Ok(Self { rho, m1, m2, rho_e, v1, v2, p, a, h })
    }

    pub fn conservative(&self) -> [f64; 4] {
        [self.rho, self.m1, self.m2, self.rho_e]
    }

    pub fn mach(&self) -> f64 {
        (self.v1 * self.v1 + self.v2 * self.v2).sqrt() / self.a
    }

    pub fn q2(&self) -> f64 {
        self.v1 * self.v1 + self.v2 * self.v2
    }

    /// Mach 0.8 state with 45 degree flow angle, (1, sqrt(2)/2, sqrt(2)/2, 3.290).
    pub fn preset_u1() -> Self {
        let s = std::f64::consts::SQRT_2 / 2.0;
        Self::from_conservative([1.0, s, s, 3.290]).expect("preset state is physical")
    }

    /// Mach 0.8 state with grid-aligned flow, (1, 1, 0, 3.290).
    pub fn preset_u3() -> Self {
        Self::from_conservative([1.0, 1.0, 0.0, 3.290]).expect("preset state is physical")
    }
}

/// Average of the conservative variables on both sides of an interface,
/// re-deriving the primitive quantities.
pub fn interface_average(l: &EulerState, r: &EulerState) -> Result<EulerState> {
    let ul = l.conservative();
    let ur = r.conservative();
    EulerState::from_conservative([
        0.5 * (ul[0] + ur[0]),
        0.5 * (ul[1] + ur[1]),
        0.5 * (ul[2] + ur[2]),
        0.5 * (ul[3] + ur[3]),
    ])
}

/// Euler flux in direction `normal`.
pub fn flux(state: &EulerState, normal: [f64; 2]) -> RVec4 {
    let [n1, n2] = normal;
    let vn = state.v1 * n1 + state.v2 * n2;
    RVec4::new(
        state.rho * vn,
        state.m1 * vn + state.p * n1,
        state.m2 * vn + state.p * n2,
        state.rho * state.h * vn,
    )
}

/// Analytic flux Jacobian A*n1 + B*n2 at the frozen state.
pub fn flux_jacobian(state: &EulerState, normal: [f64; 2]) -> RMat4 {
    let [n1, n2] = normal;
    let (u, v, h) = (state.v1, state.v2, state.h);
    let g = GAMMA;
    let vn = u * n1 + v * n2;
    let phi2 = 0.5 * (g - 1.0) * state.q2();
    RMat4::new(
        0.0,
        n1,
        n2,
        0.0,
        n1 * phi2 - u * vn,
        vn - (g - 2.0) * n1 * u,
        n2 * u - (g - 1.0) * n1 * v,
        (g - 1.0) * n1,
        n2 * phi2 - v * vn,
        n1 * v - (g - 1.0) * n2 * u,
        vn - (g - 2.0) * n2 * v,
        (g - 1.0) * n2,
        vn * (phi2 - h),
        n1 * h - (g - 1.0) * u * vn,
        n2 * h - (g - 1.0) * v * vn,
        g * vn,
    )
}

/// Parabolic eigenvalue floor: below the fraction `d` of the speed of
/// sound the modulus is replaced by (ad + lambda^2/(ad))/2. `d = 0` is the
/// identity.
pub fn apply_cutoff(lambda_abs: f64, a: f64, d: f64) -> f64 {
    debug_assert!(lambda_abs >= 0.0 && a > 0.0 && (0.0..=1.0).contains(&d));
    let ad = a * d;
    if d == 0.0 || lambda_abs > ad {
        lambda_abs
    } else {
        0.5 * (ad + lambda_abs * lambda_abs / ad)
    }
}

/// Split flux Jacobian A = A+ + A- with the cutoff applied to the
/// eigenvalue moduli before forming lambda± = (lambda ± |lambda|_cut)/2.
#[derive(Clone, Copy, Debug)]
pub struct JacobianSplit {
    pub a_plus: RMat4,
    pub a_minus: RMat4,
    pub normal: [f64; 2],
}

/// Right eigenvector basis of the directional Jacobian together with the
/// eigenvalues (vn - a, vn, vn, vn + a).
fn eigenbasis(state: &EulerState, normal: [f64; 2]) -> (RMat4, [f64; 4]) {
    let [n1, n2] = normal;
    let (u, v, a, h) = (state.v1, state.v2, state.a, state.h);
    let vn = u * n1 + v * n2;
    // tangent (-n2, n1); shear wave carries the tangential velocity
    let (t1, t2) = (-n2, n1);
    let wt = u * t1 + v * t2;
    let r = RMat4::new(
        1.0,
        1.0,
        0.0,
        1.0,
        u - a * n1,
        u,
        t1,
        u + a * n1,
        v - a * n2,
        v,
        t2,
        v + a * n2,
        h - a * vn,
        0.5 * state.q2(),
        wt,
        h + a * vn,
    );
    (r, [vn - a, vn, vn, vn + a])
}

pub fn split_jacobian(state: &EulerState, normal: [f64; 2], d: f64) -> Result<JacobianSplit> {
    let (r, lambda) = eigenbasis(state, normal);
    let rt_lu = Lu4::factor(&r.transpose()).map_err(|_| {
        Error::EigendecompositionFailure("right eigenvector matrix is singular".into())
    })?;
    let mut lam_plus = RVec4::zeros();
    let mut lam_minus = RVec4::zeros();
    for k in 0..4 {
        let cut = apply_cutoff(lambda[k].abs(), state.a, d);
        lam_plus[k] = 0.5 * (lambda[k] + cut);
        lam_minus[k] = 0.5 * (lambda[k] - cut);
    }
    // X = R diag(lam) R^{-1}  <=>  R^T X^T = (R diag(lam))^T
    let assemble = |lam: &RVec4| -> RMat4 {
        let mut scaled = r;
        for c in 0..4 {
            let col = scaled.column(c) * lam[c];
            scaled.set_column(c, &col);
        }
        rt_lu.solve_mat(&scaled.transpose()).transpose()
    };
    Ok(JacobianSplit {
        a_plus: assemble(&lam_plus),
        a_minus: assemble(&lam_minus),
        normal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn u3() -> EulerState {
        EulerState::preset_u3()
    }

    #[test]
    fn primitive_derivation_matches_hand_values() {
        // (1, 1, 0, 3.290) -> p = 1.116, a ~ 1.24996, Mach ~ 0.8
        let s = u3();
        assert_relative_eq!(s.p, 1.116, max_relative = 1e-12);
        assert_relative_eq!(s.a, (1.4 * 1.116f64).sqrt(), max_relative = 1e-12);
        assert!((s.a - 1.24996).abs() < 5e-6);
        assert!((s.mach() - 0.800).abs() < 5e-5);
        assert_relative_eq!(s.h, (s.rho_e + s.p) / s.rho, max_relative = 1e-15);
    }

    #[test]
    fn diagonal_flow_state_matches_axis_state() {
        let s1 = EulerState::preset_u1();
        let s3 = u3();
        assert_relative_eq!(s1.q2(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(s1.p, s3.p, max_relative = 1e-12);
        assert_relative_eq!(s1.a, s3.a, max_relative = 1e-12);
    }

    #[test]
    fn rest_state() {
        let s = EulerState::from_conservative([1.0, 0.0, 0.0, 2.5]).unwrap();
        assert_relative_eq!(s.p, 1.0, max_relative = 1e-14);
        assert_relative_eq!(s.a, 1.4f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(s.h, 3.5, max_relative = 1e-14);
    }

    #[test]
    fn rejects_nonphysical_states() {
        assert!(matches!(
            EulerState::from_conservative([-1.0, 0.0, 0.0, 2.5]),
            Err(Error::NonPhysicalState(_))
        ));
        // kinetic energy exceeds total energy -> negative pressure
        assert!(matches!(
            EulerState::from_conservative([1.0, 3.0, 0.0, 2.5]),
            Err(Error::NonPhysicalState(_))
        ));
    }

    #[test]
    fn jacobian_eigenvalues_are_vn_and_vn_pm_a() {
        let s = u3();
        let a = flux_jacobian(&s, [1.0, 0.0]);
        let evs = crate::linalg::eigenvalues4(&crate::linalg::complexify(&a)).unwrap();
        let mut re: Vec<f64> = evs.iter().map(|e| e.re).collect();
        re.sort_by(f64::total_cmp);
        let expect = [1.0 - s.a, 1.0, 1.0, 1.0 + s.a];
        let mut exp = expect;
        exp.sort_by(f64::total_cmp);
        for (x, y) in re.iter().zip(exp.iter()) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
        // y direction: v2 = 0 so {0, 0, ±a}
        let b = flux_jacobian(&s, [0.0, 1.0]);
        let evs = crate::linalg::eigenvalues4(&crate::linalg::complexify(&b)).unwrap();
        let mut re: Vec<f64> = evs.iter().map(|e| e.re).collect();
        re.sort_by(f64::total_cmp);
        for (x, y) in re.iter().zip([-s.a, 0.0, 0.0, s.a].iter()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn jacobian_homogeneity_reproduces_flux() {
        // Euler fluxes are homogeneous of degree one: A_n u = f_n(u)
        for normal in [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]] {
            let s = EulerState::preset_u1();
            let u = RVec4::from_row_slice(&s.conservative());
            let lhs = flux_jacobian(&s, normal) * u;
            let rhs = flux(&s, normal);
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
        }
    }

    #[test]
    fn cutoff_edge_values() {
        assert_relative_eq!(apply_cutoff(0.0, 1.0, 0.5), 0.25, max_relative = 1e-15);
        // continuity at the threshold
        let (a, d) = (1.3, 0.4);
        assert_relative_eq!(apply_cutoff(a * d, a, d), a * d, max_relative = 1e-15);
        // spec example: lambda = 0.25, a = 1.24996, d = 0.5
        let got = apply_cutoff(0.25, 1.24996, 0.5);
        let ad: f64 = 1.24996 * 0.5;
        assert_relative_eq!(got, 0.5 * (ad + 0.0625 / ad), max_relative = 1e-15);
        assert!((got - 0.3625).abs() < 2e-5);
        // d = 0 is the identity even at lambda = 0
        assert_eq!(apply_cutoff(0.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn cutoff_monotone_and_floored() {
        let (a, d) = (1.24996, 0.5);
        let mut prev = apply_cutoff(0.0, a, d);
        let n = 1000;
        for i in 1..=n {
            let lam = a * d * i as f64 / n as f64;
            let cur = apply_cutoff(lam, a, d);
            assert!(cur >= prev - 1e-15);
            assert!(cur >= lam.max(0.5 * a * d) - 1e-15);
            prev = cur;
        }
    }

    #[test]
    fn split_sums_to_jacobian() {
        for d in [0.0, 0.25, 0.5, 1.0] {
            for normal in [[1.0, 0.0], [0.0, 1.0]] {
                let s = u3();
                let a = flux_jacobian(&s, normal);
                let sp = split_jacobian(&s, normal, d).unwrap();
                let sum = sp.a_plus + sp.a_minus;
                let scale = s.v1.abs() + s.a;
                for i in 0..4 {
                    for j in 0..4 {
                        assert!(
                            (sum[(i, j)] - a[(i, j)]).abs() <= 1e-12 * scale,
                            "entry ({i},{j}) d={d}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn split_eigenvalue_signs() {
        let s = u3();
        let sp = split_jacobian(&s, [1.0, 0.0], 0.5).unwrap();
        let plus = crate::linalg::eigenvalues4(&crate::linalg::complexify(&sp.a_plus)).unwrap();
        let minus = crate::linalg::eigenvalues4(&crate::linalg::complexify(&sp.a_minus)).unwrap();
        for e in plus {
            assert!(e.re >= -1e-10);
        }
        for e in minus {
            assert!(e.re <= 1e-10);
        }
        // eigenvalue -0.25 maps to lambda- = (lambda - cut)/2
        let lam = 1.0 - s.a;
        let cut = apply_cutoff(lam.abs(), s.a, 0.5);
        let expect = 0.5 * (lam - cut);
        let found = minus.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
        assert!((found - expect).abs() < 1e-10, "{found} vs {expect}");
    }

    #[test]
    fn supersonic_split_is_one_sided() {
        let s = EulerState::from_conservative([1.0, 3.0, 0.0, 8.0]).unwrap();
        assert!(s.v1 > s.a);
        let sp = split_jacobian(&s, [1.0, 0.0], 0.0).unwrap();
        assert!(sp.a_minus.norm() < 1e-12 * sp.a_plus.norm());
        let a = flux_jacobian(&s, [1.0, 0.0]);
        assert!((sp.a_plus - a).norm() < 1e-11 * a.norm());
    }

    #[test]
    fn absolute_value_jacobian_at_d_zero() {
        // A+ - A- = |A|: check |A| has the moduli of A's eigenvalues
        let s = u3();
        let sp = split_jacobian(&s, [1.0, 0.0], 0.0).unwrap();
        let abs = sp.a_plus - sp.a_minus;
        let evs = crate::linalg::eigenvalues4(&crate::linalg::complexify(&abs)).unwrap();
        let mut re: Vec<f64> = evs.iter().map(|e| e.re).collect();
        re.sort_by(f64::total_cmp);
        let mut expect = [(1.0f64 - s.a).abs(), 1.0, 1.0, 1.0 + s.a];
        expect.sort_by(f64::total_cmp);
        for (x, y) in re.iter().zip(expect.iter()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn eigendecomposition_roundtrip() {
        // R Lambda R^{-1} with the unsplit eigenvalues reproduces A
        let s = EulerState::preset_u1();
        for normal in [[1.0, 0.0], [0.0, 1.0]] {
            let a = flux_jacobian(&s, normal);
            let sp = split_jacobian(&s, normal, 0.0).unwrap();
            let sum = sp.a_plus + sp.a_minus;
            assert!((sum - a).norm() <= 1e-10 * a.norm());
        }
    }
}
