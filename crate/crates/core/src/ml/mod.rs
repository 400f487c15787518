//! Weighted one-vs-one RBF SVM trained by SMO, stratified cross-validation
//! and grid search, KNN classification, and confusion-matrix metrics.

mod cv;
mod dataset;
mod kernel;
mod knn;
mod metrics;
pub mod smo;
mod svm;

pub use cv::{cross_validate, grid_search_cv, stratified_folds, CvResult, GridSearch, ParamGrid};
pub use dataset::{Dataset, Standardizer};
pub use kernel::{rbf, DenseGram, Gram, RbfGram};
pub use knn::{knn_cross_validate, knn_fit_predict, KnnModel};
pub use metrics::{evaluate, EvalReport};
pub use svm::{svm_train, PairModel, SolverOptions, SvmModel, SvmParams, Votes, MODEL_VERSION};
