//! Zero-shot video restoration with an image diffusion prior.
//!
//! The crate contains the whole inference-time pipeline:
//!
//! - [`seqio`]: frame sequences, the VSEQ container, PNG directories and synthetic fixtures.
//! - [`degrade`]: linear measurement operators (super-resolution, blur, temporal averaging)
//!   with exact adjoints.
//! - [`perceptual`]: a retina/LGN normalization stage followed by complex steerable-pyramid
//!   energies, with hand-written vector-Jacobian products.
//! - [`straightness`]: trajectory curvature, the straightening penalty, its gradient and the
//!   guidance refinement loop.
//! - [`diffusion`]: noise schedule, pluggable priors and latent codecs, conjugate-gradient data
//!   consistency and the full sampling loop.
//! - [`mpes`]: multi-path ensembles, pixel/latent fusion and the Gaussian MMSE oracle.
//! - [`metrics`]: PSNR, SSIM and curvature reports.
//! - [`cli`]: configuration, manifests and the command implementations behind the binary.

pub mod cli;
pub mod degrade;
pub mod diffusion;
mod error;
pub mod fft;
pub mod filter;
pub mod metrics;
pub mod mpes;
pub mod perceptual;
pub mod seqio;
pub mod straightness;

pub use error::{Error, Result};
pub use seqio::{Dims, FrameSequence};
