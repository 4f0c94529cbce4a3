//! Verification toolkit for monochromatic distance tuples on a two-coloured
//! circle of unit perimeter.
//!
//! Everything is exact: distances, densities and Beatty parameters are
//! [`Rational`]s, and colourings live on the regular n-gon `Z_n`.

pub mod beatty;
pub mod cli;
pub mod colouring;
pub mod detector;
pub mod doubling;
pub mod majority;
pub mod rational;
pub mod robust;
pub mod satgen;
pub mod tuple;
pub mod uniform;

pub use colouring::{Colour, Colouring};
pub use detector::{CopyColour, CopyWitness};
pub use rational::Rational;
pub use tuple::{DiscreteInstance, DistanceTuple};
