//! Flat-plane mechanisms: linkages that turn spherical input motion into exactly
//! planar output motion by geometric inversion.
//!
//! The crate covers the design space of the mechanism, its forward and inverse
//! kinematics, a Monte Carlo measure of how fabrication errors reach the output
//! plane, flatness metrology and scan compensation, a simulator of the
//! measurement-free fabrication bootstrap, and a G-code front end.
//!
//! ```
//! use fpm::design::{links_from_design, DesignParams};
//! use fpm::kinematics::{forward, ControlInput};
//!
//! let links = links_from_design(&DesignParams::optimal(1.0)).unwrap();
//! let (tip, _) = forward(&links, ControlInput::for_radius(1.0, 0.2, 0.5)).unwrap();
//! assert!((tip.z - 1.0).abs() < 1e-12);
//! ```

pub mod design;
pub mod error;
pub mod fabrication;
pub mod gcode;
pub mod geom;
pub mod kinematics;
pub mod metrology;
pub mod rng;
pub mod sensitivity;

pub use error::{Error, Result};
