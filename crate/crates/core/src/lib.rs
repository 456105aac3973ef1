//! Value computation and ε-optimal strategy synthesis for one-clock
//! bi-valued priced timed games.
//!
//! Player 1 minimizes the accumulated price of reaching a target, Player 2
//! maximizes it. Bi-valued arenas (all rates in `{p⁻, p⁺} ⊆ {-d, 0, d}`) are
//! reduced to a finite priced game on η-regions around the integer
//! constants, solved there by value iteration, and the resulting strategies
//! are translated back into timed strategies.
//!
//! The algorithms are generic over a [`Scalar`] clock domain; the crate
//! works with exact rationals through the [`Rational`] alias.
//!
//! ```
//! use bptg::{io::parse_arena, solve_ptg, ExtValue, Rational};
//!
//! let doc = parse_arena(
//!     "location a owner=1 rate=1 inv=[0,2]\n\
//!      location t owner=1 inv=[0,2]\n\
//!      target t\n\
//!      edge a go t guard=[1,2] reset=false price=0\n",
//! )
//! .unwrap();
//! let sol = solve_ptg(&doc.arena, "a", &Rational::from_integer(0.into()), &Rational::new(1.into(), 10.into())).unwrap();
//! assert_eq!(sol.value, ExtValue::Finite(1));
//! ```

pub mod abstraction;
pub mod arena;
pub mod finite_solver;
pub mod io;
pub mod regions;
pub mod scalar;
pub mod simulation;
pub mod synthesis;

pub use arena::{ExtValue, Player, PtgArena};
pub use scalar::Scalar;
pub use synthesis::{decide_objective, solve_ptg, Comparator, PtgSolution, Verdict};

/// Exact clock valuations.
pub type Rational = num_rational::BigRational;

pub type RationalPlay = simulation::Play<Rational>;
pub type RationalConfiguration = simulation::Configuration<Rational>;
pub type RationalMove = simulation::TimedMove<Rational>;
pub type RationalSolution = synthesis::PtgSolution<Rational>;
