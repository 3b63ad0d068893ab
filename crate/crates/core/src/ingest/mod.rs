//! IDX decoding, PCA and dataset tables.

mod idx;
mod pca;
mod table;

pub use idx::{decode_idx, encode_idx, read_idx, write_idx, IdxTensor, IMAGES_MAGIC, LABELS_MAGIC};
pub use pca::{images_to_matrix, pca_fit_transform, PcaModel};
pub use table::{read_dataset_csv, write_dataset_csv};
