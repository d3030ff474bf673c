//! Scene files and CSV records.

pub mod records;
pub mod scene_file;

pub use records::{
    read_csv, write_csv, CellRecord, FrameRecord, GammaRecord, RunRecord, TraceRecord,
    CSV_FORMAT_VERSION,
};
pub use scene_file::{load_scene, parse_scene, LoadedScene, SceneDocument, SCENE_FORMAT_VERSION};
