//! Dataset ingestion and preprocessing: CSV loading against a named schema,
//! cleaning and encoding into a fully numeric [`DataTable`], per-class
//! downsampling and seeded train/test splitting.

mod load;
mod preprocess;
mod schema;
mod table;

pub use load::{load_csv, load_csv_groups, load_csv_many, ColumnValues, RawColumn, RawTable};
pub use preprocess::{clean_and_encode, downsample, split, SplitPair};
pub use schema::{DatasetSchema, SchemaName, NSL_KDD_COLUMNS};
pub use table::{DataTable, Matrix};
