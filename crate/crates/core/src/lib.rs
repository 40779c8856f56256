//! Exact nucleolus of weighted voting games.
//!
//! ```
//! use wvg_nucleolus::{solve_nucleolus, Instance};
//!
//! let game = Instance::new(vec![1, 1, 1], 2).unwrap();
//! let result = solve_nucleolus(&game).unwrap();
//! let shares: Vec<String> = result.allocation.values().iter().map(|v| v.to_string()).collect();
//! assert_eq!(shares, ["1/3", "1/3", "1/3"]);
//! ```

pub mod error;
pub mod game;
pub mod generate;
pub mod io;
pub mod lp;
pub mod modlinalg;
pub mod oracle;
pub mod primes;
pub mod scheme;
pub mod separation;

pub use error::{Error, Result};
pub use game::{excess, excess_vector, lex_compare, value, Allocation, Coalition, ExcessVector, Instance, Rational};
pub use oracle::{brute_gamma, brute_nucleolus, brute_separate, ExplicitGame};
pub use primes::{prime_set, PrimeSet};
pub use scheme::{is_fixed, solve_nucleolus, solve_nucleolus_with, LevelState, NucleolusResult, SolverOptions};

#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $path))]
            pub struct $name;
        };
    }
    chapter!(Introduction, "introduction.md");
    chapter!(Games, "games.md");
    chapter!(Primes, "primes.md");
    chapter!(FiniteFields, "finite-fields.md");
    chapter!(Separation, "separation.md");
    chapter!(LinearPrograms, "linear-programs.md");
    chapter!(Scheme, "scheme.md");
    chapter!(Oracle, "oracle.md");
    chapter!(CommandLine, "command-line.md");
}
