pub mod error;
pub mod galois;
pub mod geometry;
pub mod automorphism;
pub mod distribution;
pub mod generate;
pub mod lu;
pub mod mtx;
pub mod pcg;
pub mod sparse;
pub mod spmv;

pub use error::{Error, Result};
pub use galois::{FieldElement, FieldSpec, GaloisField};
pub use geometry::{incident, phi, PointIndex, ProjectiveSpace, Subspace};
pub use automorphism::{build_matching, standard_matchings, Automorphism, MatchingPattern};
pub use distribution::{
    comm_profile, projective_distribution, rowwise_distribution, validate_weak_cartesian, CommProfile,
    DistributionMap,
};
pub use generate::MatrixGenerator;
pub use pcg::{pcg_solve, PcgOptions, PcgResult};
pub use sparse::CsrMatrix;
pub use spmv::{spmv, tile_matrix, BlockedMatrix, BlockedVector, MessageLog, PackedBlock, SpmvPlan, VectorBlock};
pub use lu::{block_lu_reference, run_scheme, BlockLUProblem, CycleLog, LuRun, PgMachine, Schedule, Scheme};
