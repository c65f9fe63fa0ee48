//! Adjoint orbits, shadows and Poincaré series for `SL_n` over `Z/p^r`.

pub mod fp;
pub mod group;
pub mod lie;
pub mod matrix;
pub mod orbits;
pub mod poly;
pub mod report;
pub mod ring;
pub mod shadows;
pub mod subgroup;
pub mod zeta;
