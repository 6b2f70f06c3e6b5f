//! Typed tables and the preprocessing pipeline shared by real and synthetic
//! data.

mod sampling;
mod schema;
mod table;
mod transform;

pub use sampling::{split, split_indices, undersample, undersample_indices};
pub use schema::{infer_schema, is_missing_token, ColumnKind, ColumnRole, ColumnSchema, RawTable};
pub use table::{ColumnData, FeatureMatrix, Table, MISSING_CODE};
pub use transform::{
    apply_transform, fit_transform, impute_missing, ColumnTransform, Encoding, FittedTransform,
    Normalization, PreprocessSpec, UNKNOWN_LEVEL,
};
