//! Gene-Machine: a population-free, mutation-free search heuristic for
//! permutation problems built around building blocks.
//!
//! A building block is a gene at a given position. The machine keeps one
//! fitness value per block (the best fitness of any chromosome that
//! contained it) and grows new chromosomes by drawing blocks with a bias
//! toward good ones, raising that bias as the budget runs out. Several
//! machines can be run side by side and merged by taking the blockwise
//! minimum of their lists.
//!
//! ```
//! use genemachine::engine::{evolve, machine_rng, Budget, GeneMachine};
//! use genemachine::growing::PressureSchedule;
//! use genemachine::problems::ProblemInstance;
//!
//! let problem = ProblemInstance::four_city_line();
//! let mut machine = GeneMachine::new(4).unwrap();
//! let mut rng = machine_rng(7, 0);
//! evolve(&mut machine, &problem, Budget::Evaluations(200), &PressureSchedule::default(), &mut rng).unwrap();
//! assert_eq!(machine.best().unwrap().fitness, 3.0);
//! ```

pub mod bench;
pub mod demo;
pub mod engine;
pub mod error;
pub mod ga;
pub mod growing;
pub mod model;
pub mod notation;
pub mod problems;
pub mod seeding;
pub mod trace;

pub use error::{Error, Result};
pub use model::{BuildingBlock, Chromosome, FitnessList, Gene, Position};
