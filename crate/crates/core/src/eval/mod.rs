//! Prequential evaluation, summary statistics and the experiment grid.

mod grid;
mod prequential;
mod stats;

pub use grid::{
    run_cell, run_cell_observed, run_experiment_grid, summarize, CellResult, DatasetSpec,
    ExperimentRow, GridConfig, GridReport, PreparedDataset, SummaryRow, OUTPUT_FILES,
};
pub use prequential::{prequential_run, OnlineClassifier, PrequentialRecord};
pub use stats::{mean_and_stddev, nearest_tested_size, pearson_correlation, percent_of_max};
