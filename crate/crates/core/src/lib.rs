//! Information rates of unipolar OFDM over the discrete-time Gaussian optical
//! intensity channel under an average optical power constraint.
//!
//! * [`channel`] and [`scheme`]: channel and scheme parameterization.
//! * [`clipstats`]: Bussgang moments of clipped Gaussian signals.
//! * [`rates`]: closed-form rates, capacity bounds and asymptotic constants.
//! * [`optim`]: maximization over clipping scale and power allocation.
//! * [`sim`]: Monte Carlo signal chain that measures what the closed forms predict.

pub mod channel;
pub mod clipstats;
pub mod error;
pub mod optim;
pub mod rates;
pub mod scheme;
pub mod sim;
pub mod special;

pub use channel::{snr_db_to_channel, tg_mean, ChannelSpec, Rate, TruncGauss};
pub use clipstats::ClipMoments;
pub use error::{Error, Result};
pub use rates::RateBreakdown;
pub use scheme::{SchemeConfig, SchemeKind};
