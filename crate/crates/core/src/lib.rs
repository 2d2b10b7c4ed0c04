//! Automorphisms of pseudoellipsoids
//! `{ |z_head|^2 + sum_j |w_j|^{2 p_j} < 1 }` through the branched cover onto
//! the unit ball and the group SU(n,1).

pub mod ball;
pub mod charts;
pub mod domain;
pub mod error;
pub mod hermitian;
pub mod json;
pub mod lift;
pub mod matrix;
pub mod poly;
pub mod verify;

pub use ball::{BallAutomorphism, BlockDecomposition, BlockFailure};
pub use domain::{BoundaryClass, BoundaryPointReport, PseudoEllipsoid};
pub use error::{Error, Locus, Result};
pub use hermitian::{check_membership, MatrixFile, MembershipRejection, SignatureForm, SpecialUnitaryMatrix};
pub use lift::{
    build_lift, check_extendible, compose_lifts, invert_lift, EllipsoidAutomorphism, ExtendibilityVerdict,
    PermutationCertificate,
};
pub use matrix::ComplexMatrix;
