//! Linear algebra and random-variate plumbing shared by every other module.

mod mat;
mod rng;

pub use mat::{
    cholesky, cholesky_solve, log_det_from_cholesky, solve_spd, Mat, RECONSTRUCT_TOL, SOLVE_TOL, SPD_TOL, SYM_TOL,
};
pub use rng::{normal_draw, stream_id, RngStream};
