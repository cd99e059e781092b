//! Two-stage perceptual encoder: retina normalization followed by V1-like energies of a
//! complex steerable pyramid, with exact vector-Jacobian products.

mod encoder;
mod pyramid;
mod retina;

pub use encoder::{v1_energy, BandLayout, BandShape, EncoderTape, PerceptualConfig, PerceptualEncoder, V1Feature};
pub use pyramid::{pyramid_build_filters, PyramidBands, PyramidConfig, PyramidFilters, ScaleFilters, MIN_SCALE_SUPPORT};
pub use retina::{sigmoid, softplus, Retina, RetinaParams, RetinaTape};
