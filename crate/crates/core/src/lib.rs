//! Computational laboratory for dense random finitely generated subgroups
//! of Lie groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`scalar`]: exact arithmetic in Q(√2, √3, √5) and exact/float linear algebra;
//! * [`lie`]: structure-constant Lie algebras, central series, adjoint action,
//!   regular elements and Cartan subalgebras;
//! * [`group`]: concrete groups (vector groups, tori, Heisenberg, the
//!   4-dimensional filiform group, SL(2,R), SO(3)) with charts and Haar samplers;
//! * [`abelian`]: certified density decisions in `R^n`;
//! * [`closure`]: commutator dynamics, closure-dimension estimates and trials;
//! * [`optimality`]: ping-pong (Schottky) families in SL(2,R).

pub mod abelian;
pub mod closure;
pub mod group;
pub mod lie;
pub mod optimality;
pub mod scalar;
pub mod seed;
pub(crate) mod serde_util;
