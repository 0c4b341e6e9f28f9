//! Exact and certified computations around zero counting of polynomials
//! restricted to trajectories of polynomial vector fields.

pub mod algebra;
pub mod calibration;
pub mod constants;
pub mod elimination;
pub mod dynamics;
pub mod error;
pub mod orbit_ideal;
pub mod points;
pub mod rationality;
pub mod systems;
pub mod zerocount;

pub use error::{Error, Result};
