//! Instance-aware visual-language bird's-eye maps.
//!
//! RGB-D frames with per-pixel embeddings are fused into a top-down grid; segmentation
//! masks over that grid are attributed with a category and a color; landmarks such as
//! "the third yellow table" are resolved to cells; and navigation programs drive an
//! agent over the map. A synthetic scene generator and an evaluation harness close
//! the loop.
//!
//! Geometry, mapping and similarity are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the element type used by the file formats and the CLI.

pub mod config;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod instance;
pub mod io;
pub mod localization;
pub mod mapping;
pub mod navigation;
pub mod navlang;
pub mod pipeline;
pub mod raster;
pub mod render;
pub mod rle;
pub mod scalar;
pub mod scene;
pub mod vocab;

pub use config::EngineConfig;
pub use error::{Error, Result};
pub use raster::{Cell, Mask, Raster, Tensor3};
pub use scalar::{ElementType, Scalar};

pub type Pose = geometry::Pose<f32>;
pub type Pose64 = geometry::Pose<f64>;
pub type GridSpec = geometry::GridSpec<f32>;
pub type GridSpec64 = geometry::GridSpec<f64>;
pub type CameraIntrinsics = geometry::CameraIntrinsics<f32>;
pub type FrameInput = mapping::FrameInput<f32>;
pub type MapBundle = mapping::MapBundle<f32>;
pub type MapBundle64 = mapping::MapBundle<f64>;
pub type LabelEmbeddings = vocab::LabelEmbeddings<f32>;
pub type IvlMap = instance::IvlMap<f32>;
pub type IvlMap64 = instance::IvlMap<f64>;
