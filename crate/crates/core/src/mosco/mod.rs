//! Mosco-convergence machinery: embeddings into the hold-all ball, (M1)
//! defects, time stretching, mollification, partition-of-unity recovery
//! and a discrete capacity.

mod capacity;
mod defect;
mod embed;
mod grid;
mod time;

pub use capacity::{capacity, vertices_where, CAPACITY_OMEGA};
pub use defect::{m1_defect, m1_defect_time, MoscoDefectSeries, TransferPlan};
pub(crate) use defect::fmt_csv;
pub use embed::{
    embed, embed_trajectory, embed_with, EmbedKind, EmbeddedField, Sampler, SplitSq,
};
pub use grid::{cell_disk_area, DGrid, DEFAULT_CELLS};
pub use time::{
    mollify_time, partition_of_unity, pou_recovery, stretch_map, stretch_map_inverse,
    stretch_time,
};
