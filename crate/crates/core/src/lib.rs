//! Link-level simulation and closed-form analysis of phase-rotation-aided
//! MaxMin relay selection in two-way decode-and-forward relay networks.
//!
//! Two single-antenna sources exchange one symbol each through one of `K`
//! relays, relay `k` carrying `L_k` antennas. In the multiple-access (MA)
//! stage both sources transmit at once and the selected relay jointly
//! detects the pair with an ML multi-user detector, forming the
//! network-coded symbol (bitwise XOR of the two labels). In the broadcast
//! (BC) stage the relay beamforms that symbol back and each source strips
//! its own symbol off.
//!
//! Module map:
//!
//! - [`math`]: complex vectors, `Q`/`Gamma` special functions, Gauss-Legendre
//!   quadrature and reproducible random streams.
//! - [`modem`]: constellations, symbol-level XOR and the difference set.
//! - [`phy`]: Rayleigh channel draws, CSI corruption, effective angle and
//!   the per-relay MaxMin gain.
//! - [`twr`]: one end-to-end two-way round (phase rotation, ML detection,
//!   Gram-Schmidt beamforming, broadcast detection).
//! - [`selection`]: MaxMin relay selection and the MaxMin antenna-selection
//!   baseline.
//! - [`analysis`]: instantaneous and averaged SER bounds, the distribution
//!   of the selected channel gain, array gain and slope fitting.
//! - [`harness`]: configuration files, SNR sweeps, scheme comparison and
//!   CSV/JSON output.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod math;
pub mod modem;
pub mod phy;
pub mod selection;
pub mod twr;

pub use error::{Error, Result};
pub use num_complex::Complex64;
