//! Ego-motion compensation, ground removal and BEV voxelization.

mod bev;
mod compensate;
mod export;
mod ground;

pub use bev::{gaussian_blur, voxelize_bev, BevConfig, BevMaps};
pub use compensate::compensate_ego_motion;
pub use export::{bev_csv, encode_pgm, export_bev};
pub use ground::{ground_mask, remove_ground, GroundConfig};
