//! SuperMinHash: set signatures for Jaccard similarity estimation.
//!
//! ```
//! use superminhash::{estimate_jaccard, Algorithm, Signature, SketchConfig};
//!
//! let config = SketchConfig::new(128, Algorithm::SuperMinHash, 0).unwrap();
//! let a = Signature::from_elements(config, ["apple", "banana", "cherry"]);
//! let b = Signature::from_elements(config, ["banana", "cherry", "durian"]);
//! let est = estimate_jaccard(&a, &b).unwrap();
//! assert!(est.j_hat > 0.0 && est.j_hat < 1.0);
//! ```

pub mod analytics;
pub mod cli;
pub mod error;
pub mod io;
pub mod rng;
pub mod sim;
pub mod sketch;

pub use analytics::{estimate_jaccard, EstimateResult};
pub use error::{Error, Result};
pub use rng::ElementStream;
pub use sketch::{Algorithm, Signature, SketchBuilder, SketchConfig, UNSET};
