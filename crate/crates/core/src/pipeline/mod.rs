//! Record-level drivers tying the modules together, and the batch commands
//! behind the command-line tool.

mod config;
mod detect;
mod lead;
mod quality;
mod trainval;

pub use config::{LeadSelection, PipelineConfig};
pub use detect::{cmd_detect, selected_records, DetectReport, LeadDetection, RecordDetection, ScoreRow, Skipped};
pub use lead::{analyze_lead, LeadAnalysis};
pub use quality::{cmd_quality, quality_vector, read_quality_labels, QualityLabel, QualityReport, QUALITY_LEVELS};
pub use trainval::{
    annotated_features, cmd_trainval, to_dataset, CvSummary, Task, TaskReport, TrainValReport, FOUR_CLASSES,
};
