//! Steepest-descent landscape of the `m = 1` integrand
//! `f(t1, t2, s) = log(b2 s - t1 t2) - ((t1 + iλ0)² + (t2 + iλ0)² + s²) / 2`.

mod landscape;
mod roots;
mod stationary;

pub use landscape::{h_alpha, h_alpha_bound, verify_lemma2, FamilyReport, LandscapePoint, Lemma2Report};
pub use roots::{edge_beta, edge_parameters, solve_alpha, OutsideRegimeSolution};
pub use stationary::{
    f_eval, f_gradient, f_hessian, stationary_points_m1, SaddleClass, SaddlePoint,
};
