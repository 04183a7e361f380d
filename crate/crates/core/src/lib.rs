//! Robust Stackelberg anti-jamming model for a surface-assisted MIMO link.
//!
//! [`scene`] draws channels, [`game`] holds the exact utilities and the jammer's
//! best response, [`lmi`] builds the robust certificates, [`bsum`] runs the
//! leader's block solver and [`verify`] provides solver-free oracles.

pub mod bsum;
pub mod game;
pub mod linalg;
pub mod lmi;
pub mod scene;
pub mod verify;
