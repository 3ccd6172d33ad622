//! Elementary-motion-detector core: temporal filtering, the two search
//! stages and lateral inhibition.

mod config;
mod detector;
mod exact_match;
mod fast_search;
mod field_io;
mod inhibition;
mod lowpass;
mod reichardt;
mod sector;

pub use config::{Connections, InhibitionKernel, SearchConfig};
pub use detector::{detect_motion, DetectionStats, MotionDetector, MotionField, SearchMode};
pub use exact_match::{
    argmin_offset, combine_energies, exact_match, patch_cells, patch_energies, MatchOutcome,
};
pub use fast_search::{fast_search, RoughField};
pub use field_io::{field_from_csv, field_to_csv, field_to_ppm};
pub use inhibition::{filter_at, inhibit_component, lateral_inhibition};
pub use lowpass::{lowpass_step, LowPassState};
pub use reichardt::emd_pair_response;
pub use sector::{build_sector, full_disc, SectorSpace};
