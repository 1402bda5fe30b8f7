//! One-shot and asymptotic quantum-information quantities: fidelity
//! family, relative-entropy zoo, hypothesis testing, max-information,
//! channel functionals, moderate-deviation expansions, and executable
//! protocol checks, with verification suites for every claimed property.

pub mod bounds;
pub mod distances;
pub mod entropies;
pub mod error;
pub mod hypotest;
pub mod moddev;
pub mod optimize;
pub mod protocols;
pub mod qchannels;
pub mod qregisters;
pub mod sdp;
pub mod smoothing;
pub mod testutil;
pub mod verify;
