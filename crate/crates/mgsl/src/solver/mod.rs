//! Nonlinear finite-volume FAS multigrid solver (work in progress).
