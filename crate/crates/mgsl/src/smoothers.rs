//! Smoother coefficient registry and the stage-recursion engines: the
//! low-storage form shared by (preconditioned) additive Runge-Kutta and
//! additive W methods, plus the stage-derivative Rosenbrock reference used
//! as a consistency oracle.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cidentity, CMat4, Lu4, RVec4};
use crate::precond::SgsApplier;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    Erk,
    Ark,
    Aw,
    Rosenbrock,
}

/// Named coefficient set driving the stage recursion. All tabulated schemes
/// have alpha_s = 1 and beta_1 = 1; setting every beta to one recovers the
/// unsplit scheme.
#[derive(Clone, Debug)]
pub struct SmootherScheme {
    pub name: String,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub kind: SchemeKind,
}

const ALPHA_3J: [f64; 3] = [0.1481, 2.0 / 5.0, 1.0];
const BETA_3J: [f64; 3] = [1.0, 0.5, 0.5];
const ALPHA_5J: [f64; 5] = [0.25, 1.0 / 6.0, 0.375, 0.5, 1.0];
const BETA_5J: [f64; 5] = [1.0, 0.0, 0.56, 0.0, 0.44];
const ALPHA_51: [f64; 5] = [0.0533, 0.1263, 0.2375, 0.4414, 1.0];
const ALPHA_52: [f64; 5] = [0.0695, 0.1602, 0.2898, 0.5060, 1.0];

impl SmootherScheme {
    pub fn new(name: &str, alpha: &[f64], beta: &[f64], kind: SchemeKind) -> Self {
        assert_eq!(alpha.len(), beta.len());
        assert!(!alpha.is_empty());
        Self { name: name.to_string(), alpha: alpha.to_vec(), beta: beta.to_vec(), kind }
    }

    /// Looks up a named scheme. ERK names accept the 3-stage alias without
    /// the J suffix ("ERK3" = "ERK3J"); the 51/52 schemes borrow the ARK5J
    /// beta coefficients.
    pub fn registry(name: &str) -> Result<Self> {
        let ones3 = [1.0; 3];
        let ones5 = [1.0; 5];
        let s = match name.to_ascii_uppercase().as_str() {
            "ERK3" | "ERK3J" => Self::new("ERK3", &ALPHA_3J, &ones3, SchemeKind::Erk),
            "ARK3J" => Self::new("ARK3J", &ALPHA_3J, &BETA_3J, SchemeKind::Ark),
            "ERK5" | "ERK5J" => Self::new("ERK5J", &ALPHA_5J, &ones5, SchemeKind::Erk),
            "ARK5J" => Self::new("ARK5J", &ALPHA_5J, &BETA_5J, SchemeKind::Ark),
            "ERK51" => Self::new("ERK51", &ALPHA_51, &ones5, SchemeKind::Erk),
            "ARK51" => Self::new("ARK51", &ALPHA_51, &BETA_5J, SchemeKind::Ark),
            "ERK52" => Self::new("ERK52", &ALPHA_52, &ones5, SchemeKind::Erk),
            "ARK52" => Self::new("ARK52", &ALPHA_52, &BETA_5J, SchemeKind::Ark),
            "AW3" => Self::new("AW3", &ALPHA_3J, &BETA_3J, SchemeKind::Aw),
            "AW5J" => Self::new("AW5J", &ALPHA_5J, &BETA_5J, SchemeKind::Aw),
            "AW51" => Self::new("AW51", &ALPHA_51, &BETA_5J, SchemeKind::Aw),
            "AW52" => Self::new("AW52", &ALPHA_52, &BETA_5J, SchemeKind::Aw),
            "ROS3" => Self::new("ROS3", &ALPHA_3J, &BETA_3J, SchemeKind::Rosenbrock),
            "ROS5J" => Self::new("ROS5J", &ALPHA_5J, &BETA_5J, SchemeKind::Rosenbrock),
            "ROS51" => Self::new("ROS51", &ALPHA_51, &BETA_5J, SchemeKind::Rosenbrock),
            "ROS52" => Self::new("ROS52", &ALPHA_52, &BETA_5J, SchemeKind::Rosenbrock),
            _ => return Err(Error::UnknownScheme(name.to_string())),
        };
        Ok(s)
    }

    pub fn known_names() -> &'static [&'static str] {
        &[
            "ERK3", "ARK3J", "ERK5J", "ARK5J", "ERK51", "ARK51", "ERK52", "ARK52", "AW3",
            "AW5J", "AW51", "AW52", "ROS3", "ROS5J", "ROS51", "ROS52",
        ]
    }

    pub fn stages(&self) -> usize {
        self.alpha.len()
    }

    /// Whether the stage matrix plays the W role (I + eta dt* J) rather
    /// than approximating J itself.
    pub fn is_w_framing(&self) -> bool {
        matches!(self.kind, SchemeKind::Aw | SchemeKind::Rosenbrock)
    }
}

/// Pseudo-time stepping parameters shared by the analysis and the solver.
#[derive(Clone, Copy, Debug)]
pub struct PseudoTimeConfig {
    pub cstar: f64,
    pub c_physical: Option<f64>,
    pub eta: f64,
    pub d: f64,
    /// c* limit applied for the first few nonlinear iterations.
    pub startup_cap: Option<(f64, usize)>,
}

impl Default for PseudoTimeConfig {
    fn default() -> Self {
        Self { cstar: 1.0, c_physical: None, eta: 0.8, d: 0.5, startup_cap: Some((20.0, 2)) }
    }
}

/// Applies the inverse of the stage matrix (preconditioner symbol).
pub enum StageInverse<'a> {
    Identity,
    Factored(&'a SgsApplier),
    Full(Lu4<Complex64>),
}

impl StageInverse<'_> {
    pub fn from_matrix(p: &CMat4) -> Result<StageInverse<'static>> {
        Ok(StageInverse::Full(
            Lu4::factor(p).map_err(|_| Error::SingularPreconditioner)?,
        ))
    }

    fn solve_mat(&self, t: &CMat4) -> CMat4 {
        match self {
            StageInverse::Identity => *t,
            StageInverse::Factored(applier) => applier.solve_mat(t),
            StageInverse::Full(lu) => lu.solve_mat(t),
        }
    }
}

/// Low-storage stage recursion on symbol matrices: returns G with
/// u^{k+1} = G u^k. The same engine serves ERK (identity preconditioner),
/// preconditioned ARK (P ~ J) and AW (W ~ I + eta dt* J); only the matrix
/// whose inverse is applied differs.
pub fn amplification_matrix_with(
    scheme: &SmootherScheme,
    hc: &CMat4,
    hv: &CMat4,
    inverse: &StageInverse,
    pseudo_dt: f64,
) -> CMat4 {
    let s = scheme.stages();
    let eye = cidentity();
    let mut g = eye;
    let mut f = *hv; // f^{v,(0)} acting on the input mode
    for i in 1..=s {
        let t = inverse.solve_mat(&(hc * g + f));
        g = eye - t * Complex64::new(scheme.alpha[i - 1] * pseudo_dt, 0.0);
        if i < s {
            let b = scheme.beta[i]; // beta_{i+1}
            f = hv * g * Complex64::new(b, 0.0) + f * Complex64::new(1.0 - b, 0.0);
        }
    }
    g
}

/// Spec-level entry point taking the preconditioner symbol as a matrix.
pub fn amplification_matrix(
    scheme: &SmootherScheme,
    hc: &CMat4,
    hv: &CMat4,
    precond_symbol: &CMat4,
    pseudo_dt: f64,
) -> Result<CMat4> {
    let inv = StageInverse::from_matrix(precond_symbol)?;
    Ok(amplification_matrix_with(scheme, hc, hv, &inv, pseudo_dt))
}

/// Additive Rosenbrock reference in stage-derivative form with the exact
/// per-stage matrix I + eta dt* (Hc + Hv). Independent route against which
/// the low-storage AW engine is checked.
pub fn rosenbrock_reference_matrix(
    scheme: &SmootherScheme,
    hc: &CMat4,
    hv: &CMat4,
    eta: f64,
    pseudo_dt: f64,
) -> Result<CMat4> {
    let m = cidentity() + (hc + hv) * Complex64::new(eta * pseudo_dt, 0.0);
    let lu = Lu4::factor(&m).map_err(|_| Error::SingularStageMatrix)?;
    let s = scheme.stages();
    let mut u_prev = cidentity(); // operator for u^{(i-1)}
    let mut kv = CMat4::zeros();
    for i in 1..=s {
        let b = scheme.beta[i - 1];
        let kc = -lu.solve_mat(&(hc * u_prev));
        kv = -lu.solve_mat(&(hv * u_prev)) * Complex64::new(b, 0.0)
            + kv * Complex64::new(1.0 - b, 0.0);
        u_prev = cidentity() + (kc + kv) * Complex64::new(scheme.alpha[i - 1] * pseudo_dt, 0.0);
    }
    Ok(u_prev)
}

/// Residual split for the pseudo-time iteration: the convective part
/// carries central fluxes, the discretized time derivative and multigrid
/// source terms; the dissipative part carries the artificial dissipation.
pub trait SplitResidual {
    fn convective(&self, u: &[RVec4], out: &mut [RVec4]) -> Result<()>;
    fn dissipative(&self, u: &[RVec4], out: &mut [RVec4]) -> Result<()>;
}

pub trait PrecondOp {
    fn apply(&self, r: &mut [RVec4]);
}

pub struct IdentityPrecondOp;

impl PrecondOp for IdentityPrecondOp {
    fn apply(&self, _r: &mut [RVec4]) {}
}

impl PrecondOp for crate::precond::PhysicalSgs {
    fn apply(&self, r: &mut [RVec4]) {
        crate::precond::PhysicalSgs::apply(self, r)
    }
}

/// One s-stage pseudo-time step on a field. The preconditioner is applied
/// once per stage to the combined stage residual.
pub fn nonlinear_pseudo_step(
    scheme: &SmootherScheme,
    u: &mut [RVec4],
    residual: &dyn SplitResidual,
    precond: &dyn PrecondOp,
    pseudo_dt: f64,
) -> Result<()> {
    let n = u.len();
    let s = scheme.stages();
    let u0: Vec<RVec4> = u.to_vec();
    let mut fv = vec![RVec4::zeros(); n];
    residual.dissipative(&u0, &mut fv)?;
    let mut fc = vec![RVec4::zeros(); n];
    let mut work = vec![RVec4::zeros(); n];
    let mut fv_new = vec![RVec4::zeros(); n];
    for i in 1..=s {
        residual.convective(u, &mut fc)?;
        for c in 0..n {
            work[c] = fc[c] + fv[c];
        }
        precond.apply(&mut work);
        let coef = scheme.alpha[i - 1] * pseudo_dt;
        for c in 0..n {
            u[c] = u0[c] - work[c] * coef;
            if !u[c].iter().all(|x| x.is_finite()) {
                return Err(Error::DivergedState(format!(
                    "non-finite value in cell {c} at stage {i}"
                )));
            }
        }
        if i < s {
            let b = scheme.beta[i];
            if b != 0.0 {
                residual.dissipative(u, &mut fv_new)?;
                for c in 0..n {
                    fv[c] = fv_new[c] * b + fv[c] * (1.0 - b);
                }
            }
        }
    }
    Ok(())
}
