//! Exact n-spinon dynamic structure factor of the spin-1/2 Heisenberg
//! antiferromagnetic chain.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: complex log-gamma, q-Pochhammer/theta products, elliptic
//!   integrals and Jacobi functions.
//! - [`quad`]: adaptive Gauss–Kronrod, nested tanh-sinh and Gauss–Legendre.
//! - [`dispersion`]: spinon momentum/energy of a rapidity, and the
//!   anisotropic (XXZ) dispersion used to check the isotropic limit.
//! - [`kinematics`]: continuum boundaries and two-spinon pair solutions.
//! - [`aminus`]: the lineshape weight |A₋(x+iy)|² and its interpolation table.
//! - [`gfunction`]: the contour-integral factor g by residue summation.
//! - [`dsf`]: two- and four-spinon structure factors and sum-rule diagnostics.
//! - [`selfcheck`]: fast invariant checks shared by tests and the CLI.
//!
//! Momentum arguments of the public structure-factor API are the physical
//! transfer k in [0, 2π]; the continuum at k is bounded by
//! w_l = π|sin k| and w_u = 2π sin(k/2).

pub mod aminus;
pub mod dispersion;
pub mod dsf;
pub mod error;
pub mod gfunction;
pub mod kinematics;
pub mod quad;
pub mod selfcheck;
pub mod specfun;

pub use aminus::{
    a_minus_half, a_minus_sq, a_minus_sq_real, AminusArg, AminusTable, AminusValue,
};
pub use dispersion::{
    energy_of_rapidity, momentum_of_rapidity, rapidity_of_momentum, tau, xxz_energy, xxz_momentum,
    Rapidity, SpinonMomentum, XxzParams,
};
pub use dsf::{
    c_n, s2_pm, s4_pm, s4_pm_monte_carlo, s_component, sum_rule_fraction, Axis, DsfContext, DsfPoint, FourSpinonSpec,
    GridSpec, SumRuleReport, SumRuleScheme,
};
pub use error::{Error, Result};
pub use gfunction::{
    g_sum_sq, g_sum_sq_detailed, g_value, l_set, GSumSq, GValue, LSet, PoleSite, ResidueSpec,
    SpinConfig,
};
pub use kinematics::{
    boundaries, pair_orbit, rapidity_difference, solve_pairs, Boundaries, PairFrame, PairSolutions,
    TransferPoint,
};

pub use specfun::{ComplexValue, EllipticModulus, QuadratureSpec};
